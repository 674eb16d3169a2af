//! Optomechanical Hamiltonian with the pair-creation (Casimir) term, its
//! spectrum, level sweeps versus the cavity frequency and avoided crossings.

use faer::{Mat, Side};
use rayon::prelude::*;

use crate::bosonics::{destroy, displaced_overlap, embed_cavity, embed_mech, FockDims, OperatorMatrix};
use crate::error::{Error, Result};
use crate::linalg::{self, C64};

/// Physical parameters, in units where the mechanical frequency is the energy scale.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemParams {
    pub omega_m: f64,
    pub omega_c: f64,
    /// Single-photon optomechanical coupling.
    pub g: f64,
    /// Cavity damping rate.
    pub kappa: f64,
    /// Mechanical damping rate.
    pub gamma: f64,
    /// Photonic reservoir temperature (k_B = 1).
    pub t_kappa: f64,
    /// Effective temperature of the mechanical noise source.
    pub t_gamma: f64,
    pub dims: FockDims,
    pub include_dce: bool,
}

/// Truncation used unless a scenario asks otherwise.
pub const DEFAULT_PHOTON_LEVELS: usize = 6;
pub const DEFAULT_PHONON_LEVELS: usize = 14;

impl Default for SystemParams {
    fn default() -> Self {
        Self {
            omega_m: 1.0,
            omega_c: 1.0,
            g: 0.1,
            kappa: 0.025,
            gamma: 0.05,
            t_kappa: 0.0,
            t_gamma: 0.9,
            dims: FockDims::new(DEFAULT_PHOTON_LEVELS, DEFAULT_PHONON_LEVELS).expect("valid default"),
            include_dce: true,
        }
    }
}

impl SystemParams {
    /// Normalized coupling `g / omega_m`.
    pub fn eta(&self) -> f64 {
        self.g / self.omega_m
    }

    /// Total loss rate `kappa + gamma`.
    pub fn gamma_tot(&self) -> f64 {
        self.kappa + self.gamma
    }

    pub fn with_omega_c(&self, omega_c: f64) -> Self {
        Self { omega_c, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [("omega_m", self.omega_m), ("omega_c", self.omega_c)];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Domain(format!("{name} must be positive, got {v}")));
            }
        }
        let nonneg = [
            ("g", self.g),
            ("kappa", self.kappa),
            ("gamma", self.gamma),
            ("t_kappa", self.t_kappa),
            ("t_gamma", self.t_gamma),
        ];
        for (name, v) in nonneg {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Domain(format!("{name} must be non-negative, got {v}")));
            }
        }
        Ok(())
    }
}

struct Ladders {
    a: OperatorMatrix,
    b: OperatorMatrix,
}

fn ladders(dims: FockDims) -> Result<Ladders> {
    Ok(Ladders {
        a: embed_cavity(&destroy(dims.n_photon_levels())?, dims)?,
        b: embed_mech(&destroy(dims.n_phonon_levels())?, dims)?,
    })
}

/// Cavity annihilation operator on the joint space.
pub fn cavity_lowering(dims: FockDims) -> Result<OperatorMatrix> {
    Ok(ladders(dims)?.a.with_label("a"))
}

/// Mechanical annihilation operator on the joint space.
pub fn mechanical_lowering(dims: FockDims) -> Result<OperatorMatrix> {
    Ok(ladders(dims)?.b.with_label("b"))
}

/// `omega_c a^H a + omega_m b^H b`
pub fn bare_hamiltonian(params: &SystemParams) -> Result<OperatorMatrix> {
    let dims = params.dims;
    OperatorMatrix::from_fn(dims.total(), "H0", |i, j| {
        if i != j {
            return C64::new(0.0, 0.0);
        }
        let (n, k) = dims.occupations(i);
        C64::new(params.omega_c * n as f64 + params.omega_m * k as f64, 0.0)
    })
}

/// Radiation-pressure coupling `g a^H a (b + b^H)`.
pub fn optomechanical_coupling(params: &SystemParams) -> Result<OperatorMatrix> {
    let Ladders { a, b } = ladders(params.dims)?;
    let x = &b + &b.dagger();
    Ok((&(&a.dagger() * &a) * &x).scale(C64::new(params.g, 0.0)).with_label("V_om"))
}

/// Pair-creation coupling `(g/2)(a^2 + a^H^2)(b + b^H)`.
pub fn dce_coupling(params: &SystemParams) -> Result<OperatorMatrix> {
    let Ladders { a, b } = ladders(params.dims)?;
    let x = &b + &b.dagger();
    let a2 = &a * &a;
    let pairs = &a2 + &a2.dagger();
    Ok((&pairs * &x).scale(C64::new(params.g / 2.0, 0.0)).with_label("V_dce"))
}

pub fn build_hamiltonian(params: &SystemParams) -> Result<OperatorMatrix> {
    params.validate()?;
    let mut h = &bare_hamiltonian(params)? + &optomechanical_coupling(params)?;
    if params.include_dce {
        h = &h + &dce_coupling(params)?;
    }
    h.with_label("H").into_hermitian()
}

/// Closed-form levels of the model without the pair-creation term:
/// `n omega_c + k omega_m - n^2 g^2 / omega_m`.
pub fn displaced_oscillator_energy(params: &SystemParams, photons: usize, phonons: usize) -> f64 {
    let n = photons as f64;
    n * params.omega_c + phonons as f64 * params.omega_m - n * n * params.g * params.g / params.omega_m
}

/// Energy-ordered eigenvalues and eigenvectors of a Hamiltonian.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    energies: Vec<f64>,
    states: Mat<C64>,
    ground_energy_subtracted: bool,
    ground_offset: f64,
    blocks: Vec<usize>,
    n_blocks: usize,
}

/// Hermiticity tolerance accepted by [`diagonalize`].
pub const DIAGONALIZE_HERMITIAN_TOL: f64 = 1e-10;

impl EigenSystem {
    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn energy(&self, label: usize) -> f64 {
        self.energies[label]
    }

    /// `omega_jk = omega_j - omega_k`
    pub fn transition(&self, j: usize, k: usize) -> f64 {
        self.energies[j] - self.energies[k]
    }

    /// Columns are eigenvectors in the bare product basis.
    pub fn states(&self) -> &Mat<C64> {
        &self.states
    }

    pub fn state(&self, label: usize) -> Vec<C64> {
        (0..self.dim()).map(|i| self.states[(i, label)]).collect()
    }

    pub fn ground_energy_subtracted(&self) -> bool {
        self.ground_energy_subtracted
    }

    /// Energy removed by [`EigenSystem::subtract_ground`] (zero otherwise).
    pub fn ground_offset(&self) -> f64 {
        self.ground_offset
    }

    /// Index of the invariant block of the Hamiltonian each eigenstate lives in.
    /// Eigenstates never mix blocks.
    pub fn blocks(&self) -> &[usize] {
        &self.blocks
    }

    pub fn n_blocks(&self) -> usize {
        self.n_blocks
    }

    pub fn subtract_ground(&mut self) {
        if self.ground_energy_subtracted || self.energies.is_empty() {
            return;
        }
        let e0 = self.energies[0];
        for e in &mut self.energies {
            *e -= e0;
        }
        self.ground_offset = e0;
        self.ground_energy_subtracted = true;
    }

    /// `U^H M U`
    pub fn to_eigenbasis(&self, m: &Mat<C64>) -> Mat<C64> {
        linalg::to_basis(&self.states, m)
    }

    /// `U M U^H`
    pub fn to_bare(&self, m: &Mat<C64>) -> Mat<C64> {
        linalg::from_basis(&self.states, m)
    }

    /// `max |H v_l - e_l v_l|` against the (unshifted) Hamiltonian.
    pub fn residual(&self, h: &OperatorMatrix) -> f64 {
        let hv = h.entries() * &self.states;
        let mut worst = 0.0f64;
        for l in 0..self.dim() {
            let e = self.energies[l] + self.ground_offset;
            for i in 0..self.dim() {
                worst = worst.max((hv[(i, l)] - self.states[(i, l)] * e).norm());
            }
        }
        worst
    }

    /// `max |U^H U - I|`
    pub fn orthonormality_error(&self) -> f64 {
        let g = self.states.adjoint() * &self.states;
        linalg::max_abs_diff(&g, &Mat::identity(self.dim(), self.dim()))
    }
}

fn connected_blocks(h: &Mat<C64>) -> (Vec<usize>, usize) {
    let n = h.nrows();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for j in 0..n {
        for i in 0..j {
            if h[(i, j)].norm() != 0.0 || h[(j, i)].norm() != 0.0 {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut ids = vec![usize::MAX; n];
    let mut labels = vec![0; n];
    let mut count = 0;
    for i in 0..n {
        let r = find(&mut parent, i);
        if ids[r] == usize::MAX {
            ids[r] = count;
            count += 1;
        }
        labels[i] = ids[r];
    }
    (labels, count)
}

/// Diagonalizes a Hermitian matrix block by block (blocks are the connected
/// components of its sparsity graph). Eigenvalues ascend; each eigenvector's
/// largest component is made real and positive.
pub fn diagonalize(h: &OperatorMatrix) -> Result<EigenSystem> {
    diagonalize_ordered(h, None)
}

/// Like [`diagonalize`], with degenerate levels ordered by descending
/// mean photon number.
pub fn diagonalize_fock(h: &OperatorMatrix, dims: FockDims) -> Result<EigenSystem> {
    if h.dim() != dims.total() {
        return Err(Error::DimensionMismatch { expected: dims.total(), found: h.dim() });
    }
    let photons: Vec<f64> = (0..dims.total()).map(|i| dims.occupations(i).0 as f64).collect();
    diagonalize_ordered(h, Some(&photons))
}

fn diagonalize_ordered(h: &OperatorMatrix, tie_weights: Option<&[f64]>) -> Result<EigenSystem> {
    let deviation = linalg::hermiticity_error(h.entries());
    if deviation > DIAGONALIZE_HERMITIAN_TOL {
        return Err(Error::NotHermitian { deviation });
    }
    let m = h.entries();
    let n = h.dim();
    let (labels, n_blocks) = connected_blocks(m);

    struct Level {
        energy: f64,
        block: usize,
        vector: Vec<C64>,
        weight: f64,
    }
    let mut levels = Vec::with_capacity(n);
    for block in 0..n_blocks {
        let idx: Vec<usize> = (0..n).filter(|&i| labels[i] == block).collect();
        let sub = Mat::from_fn(idx.len(), idx.len(), |a, b| m[(idx[a], idx[b])]);
        let is_real = (0..idx.len()).all(|b| (0..idx.len()).all(|a| sub[(a, b)].im == 0.0));
        let (values, vectors): (Vec<f64>, Mat<C64>) = if is_real {
            let re = Mat::from_fn(idx.len(), idx.len(), |a, b| sub[(a, b)].re);
            let evd = re.self_adjoint_eigen(Side::Lower).map_err(|_| Error::Eigen)?;
            let s = evd.S();
            let u = evd.U();
            (
                (0..idx.len()).map(|i| s[i]).collect(),
                Mat::from_fn(idx.len(), idx.len(), |a, b| C64::new(u[(a, b)], 0.0)),
            )
        } else {
            let evd = sub.self_adjoint_eigen(Side::Lower).map_err(|_| Error::Eigen)?;
            let s = evd.S();
            ((0..idx.len()).map(|i| s[i].re).collect(), evd.U().to_owned())
        };
        for (col, &energy) in values.iter().enumerate() {
            let mut vector = vec![C64::new(0.0, 0.0); n];
            for (a, &i) in idx.iter().enumerate() {
                vector[i] = vectors[(a, col)];
            }
            let weight = tie_weights
                .map(|w| vector.iter().zip(w).map(|(v, w)| v.norm_sqr() * w).sum())
                .unwrap_or(0.0);
            levels.push(Level { energy, block, vector, weight });
        }
    }

    levels.sort_by(|x, y| x.energy.total_cmp(&y.energy));
    if tie_weights.is_some() {
        let mut start = 0;
        while start < levels.len() {
            let mut end = start + 1;
            while end < levels.len()
                && levels[end].energy - levels[end - 1].energy <= 1e-10 * levels[end].energy.abs().max(1.0)
            {
                end += 1;
            }
            levels[start..end].sort_by(|x, y| y.weight.total_cmp(&x.weight));
            start = end;
        }
    }

    let mut states = Mat::<C64>::zeros(n, n);
    for (l, level) in levels.iter().enumerate() {
        let mut pivot = 0;
        for i in 1..n {
            if level.vector[i].norm() > level.vector[pivot].norm() {
                pivot = i;
            }
        }
        let p = level.vector[pivot];
        let phase = if p.norm() > 0.0 { p.conj() / p.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..n {
            states[(i, l)] = level.vector[i] * phase;
        }
    }
    Ok(EigenSystem {
        energies: levels.iter().map(|l| l.energy).collect(),
        blocks: levels.iter().map(|l| l.block).collect(),
        states,
        ground_energy_subtracted: false,
        ground_offset: 0.0,
        n_blocks,
    })
}

/// Builds and diagonalizes the Hamiltonian for `params`.
pub fn solve(params: &SystemParams) -> Result<EigenSystem> {
    diagonalize_fock(&build_hamiltonian(params)?, params.dims)
}

/// Gap minimum between two tracked levels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossingRecord {
    pub pair: (usize, usize),
    /// Cavity frequency of the minimum, in units of `omega_m`.
    pub omega_r: f64,
    pub gap_min: f64,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    /// Cavity frequencies in units of `omega_m`.
    pub omega_c_grid: Vec<f64>,
    /// `levels[i][l]` is the energy of eigenstate `l` (0 = ground) at grid point `i`.
    pub levels: Vec<Vec<f64>>,
    pub crossing_records: Vec<CrossingRecord>,
}

impl SweepResult {
    pub fn gap(&self, point: usize, pair: (usize, usize)) -> f64 {
        (self.levels[point][pair.1] - self.levels[point][pair.0]).abs()
    }

    /// Locates the avoided crossing of `pair` and records it.
    pub fn track(&mut self, pair: (usize, usize)) -> Result<CrossingRecord> {
        let (omega_r, gap_min) = find_avoided_crossing(self, pair)?;
        let record = CrossingRecord { pair, omega_r, gap_min };
        self.crossing_records.push(record);
        Ok(record)
    }
}

/// Lowest `n_levels` eigenvalues (labels `0..n_levels`) across a grid of
/// `omega_c / omega_m`. Grid points are evaluated in parallel; the output order
/// follows the grid.
pub fn level_sweep(
    params: &SystemParams,
    omega_c_over_omega_m: &[f64],
    n_levels: usize,
    subtract_ground: bool,
) -> Result<SweepResult> {
    params.validate()?;
    if omega_c_over_omega_m.is_empty() {
        return Err(Error::Domain("empty frequency grid".into()));
    }
    if let Some(bad) = omega_c_over_omega_m.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
        return Err(Error::Domain(format!("grid point {bad} outside (0, inf)")));
    }
    if omega_c_over_omega_m.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain("grid must be strictly increasing".into()));
    }
    let usable = params.dims.total() - params.dims.guard_band();
    if n_levels == 0 || n_levels >= usable {
        return Err(Error::InvalidDimension(format!(
            "n_levels must lie in 1..{usable} for truncation {}",
            params.dims
        )));
    }
    let levels = omega_c_over_omega_m
        .par_iter()
        .map(|&x| {
            let mut eig = solve(&params.with_omega_c(x * params.omega_m))?;
            if subtract_ground {
                eig.subtract_ground();
            }
            Ok(eig.energies()[..n_levels].iter().map(|e| e / params.omega_m).collect())
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    Ok(SweepResult {
        omega_c_grid: omega_c_over_omega_m.to_vec(),
        levels,
        crossing_records: Vec::new(),
    })
}

/// Grid minimum of the gap between `pair`, refined by a parabola through the
/// minimum and its two neighbours.
pub fn find_avoided_crossing(sweep: &SweepResult, pair: (usize, usize)) -> Result<(f64, f64)> {
    let n_levels = sweep.levels.first().map_or(0, Vec::len);
    if pair.0 >= n_levels || pair.1 >= n_levels || pair.0 == pair.1 {
        return Err(Error::Domain(format!("level pair {pair:?} not in the {n_levels} computed levels")));
    }
    let gaps: Vec<f64> = (0..sweep.omega_c_grid.len()).map(|i| sweep.gap(i, pair)).collect();
    let mut best = 0;
    for (i, g) in gaps.iter().enumerate() {
        if *g < gaps[best] {
            best = i;
        }
    }
    if best == 0 || best + 1 >= gaps.len() {
        return Err(Error::CrossingNotFound { pair });
    }
    let x = &sweep.omega_c_grid;
    Ok(parabolic_minimum(
        (x[best - 1], gaps[best - 1]),
        (x[best], gaps[best]),
        (x[best + 1], gaps[best + 1]),
    ))
}

fn parabolic_minimum(p0: (f64, f64), p1: (f64, f64), p2: (f64, f64)) -> (f64, f64) {
    let (x0, y0) = p0;
    let (x1, y1) = p1;
    let (x2, y2) = p2;
    let num = (x1 - x0).powi(2) * (y1 - y2) - (x1 - x2).powi(2) * (y1 - y0);
    let den = (x1 - x0) * (y1 - y2) - (x1 - x2) * (y1 - y0);
    if den == 0.0 || !den.is_finite() {
        return (x1, y1.max(0.0));
    }
    let x = (x1 - 0.5 * num / den).clamp(x0, x2);
    let y = y0 * (x - x1) * (x - x2) / ((x0 - x1) * (x0 - x2))
        + y1 * (x - x0) * (x - x2) / ((x1 - x0) * (x1 - x2))
        + y2 * (x - x0) * (x - x1) / ((x2 - x0) * (x2 - x1));
    (x, y.min(y1).max(0.0))
}

/// Zooms in on the gap minimum of `pair` inside `[lo, hi]` (units of `omega_m`)
/// by repeated sweeps until the bracket is narrower than `x_tol`.
pub fn locate_avoided_crossing(
    params: &SystemParams,
    pair: (usize, usize),
    lo: f64,
    hi: f64,
    x_tol: f64,
) -> Result<CrossingRecord> {
    const POINTS: usize = 33;
    let n_levels = pair.0.max(pair.1) + 1;
    let (mut a, mut b) = (lo, hi);
    loop {
        let grid: Vec<f64> = (0..POINTS).map(|i| a + (b - a) * i as f64 / (POINTS - 1) as f64).collect();
        let sweep = level_sweep(params, &grid, n_levels, false)?;
        let (omega_r, gap_min) = find_avoided_crossing(&sweep, pair)?;
        if b - a < x_tol {
            return Ok(CrossingRecord { pair, omega_r, gap_min });
        }
        // re-bracket around the grid minimum, not the parabola vertex, so a kink
        // in the gap (a level from another parity block crossing) cannot push
        // the minimum out of the next bracket
        let best = (1..POINTS - 1)
            .min_by(|&i, &j| sweep.gap(i, pair).total_cmp(&sweep.gap(j, pair)))
            .unwrap_or(POINTS / 2);
        a = grid[best.saturating_sub(2)];
        b = grid[(best + 2).min(POINTS - 1)];
    }
}

/// Tracked pair whose anticrossing defines the resonance: the symmetric and
/// antisymmetric mixtures of two phonons and a displaced photon pair.
pub const RESONANCE_PAIR: (usize, usize) = (3, 5);

/// Resonant cavity frequency (units of `omega_m`) for the two-phonon to
/// photon-pair conversion, searched in `[0.9, 1.15]`.
pub fn locate_resonance(params: &SystemParams) -> Result<CrossingRecord> {
    locate_avoided_crossing(params, RESONANCE_PAIR, 0.9, 1.15, 1e-9)
}

/// First-order splitting of the anticrossing between two phonons and a
/// displaced photon pair:
/// `sqrt(2) g [sqrt(3) D_{3,0}(2 eta) + sqrt(2) D_{1,0}(2 eta)]`.
pub fn perturbative_splitting(eta: f64, g: f64) -> f64 {
    let beta = 2.0 * eta;
    2f64.sqrt() * g * (3f64.sqrt() * displaced_overlap(3, 0, beta) + 2f64.sqrt() * displaced_overlap(1, 0, beta))
}
