use std::sync::OnceLock;

use faer::Mat;

use super::jumps::{dressed_jump_sets, thermal_occupation, DressedJumpSet, DressingOptions};
use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::model::{EigenSystem, SystemParams};

/// Which `(omega, omega')` pairs of the dissipator double sum are kept.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PairSelection {
    /// Every pair (the full non-secular generator).
    All,
    /// Only pairs with `|omega - omega'| < W`.
    Bandwidth(f64),
    /// Only `omega = omega'`.
    Secular,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LiouvillianOptions {
    pub pairs: PairSelection,
    pub dressing: DressingOptions,
}

impl LiouvillianOptions {
    pub fn for_params(params: &SystemParams) -> Self {
        Self { pairs: PairSelection::All, dressing: DressingOptions::for_params(params) }
    }
}

/// A dissipation channel: rate, reservoir temperature and dressed jump operators.
#[derive(Debug, Clone)]
pub struct Bath {
    pub rate: f64,
    pub temperature: f64,
    pub jumps: DressedJumpSet,
}

#[derive(Debug, Clone)]
struct DenseTerm {
    coef: f64,
    left: Mat<C64>,
    right: Mat<C64>,
}

/// Real coordinate of a Hermitian matrix in the eigenbasis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Coord {
    /// `rho_jj`
    Diag(usize),
    /// `Re rho_jk`, `j < k`
    Re(usize, usize),
    /// `Im rho_jk`, `j < k`
    Im(usize, usize),
}

/// An invariant subspace of Hermitian operators under the generator, made of
/// whole blocks `(P, Q)` of eigenstate symmetry labels.
#[derive(Debug, Clone)]
pub struct Sector {
    coords: Vec<Coord>,
    /// Eigenbasis pairs `(j, k)`, `j <= k`, whose entries the sector owns.
    pairs: Vec<(usize, usize)>,
    contains_diagonal: bool,
}

impl Sector {
    pub fn coords(&self) -> &[Coord] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn contains_diagonal(&self) -> bool {
        self.contains_diagonal
    }

    /// Real coordinates of the Hermitian matrix `h` (eigenbasis) in this sector.
    pub fn gather(&self, h: &Mat<C64>) -> Vec<f64> {
        self.coords
            .iter()
            .map(|c| match *c {
                Coord::Diag(j) => h[(j, j)].re,
                Coord::Re(j, k) => h[(j, k)].re,
                Coord::Im(j, k) => h[(j, k)].im,
            })
            .collect()
    }

    /// Adds the Hermitian matrix with coordinates `x` into `h`.
    pub fn scatter_add(&self, x: &[f64], h: &mut Mat<C64>) {
        for (c, &v) in self.coords.iter().zip(x) {
            match *c {
                Coord::Diag(j) => h[(j, j)].re += v,
                Coord::Re(j, k) => {
                    h[(j, k)].re += v;
                    h[(k, j)].re += v;
                }
                Coord::Im(j, k) => {
                    h[(j, k)].im += v;
                    h[(k, j)].im -= v;
                }
            }
        }
    }

    /// Coefficients `f` with `Tr[A X] = sum_c f_c x_c` for Hermitian `X` in this sector.
    pub fn trace_functional(&self, a: &Mat<C64>) -> Vec<C64> {
        let i = C64::new(0.0, 1.0);
        self.coords
            .iter()
            .map(|c| match *c {
                Coord::Diag(j) => a[(j, j)],
                Coord::Re(j, k) => a[(k, j)] + a[(j, k)],
                Coord::Im(j, k) => i * (a[(k, j)] - a[(j, k)]),
            })
            .collect()
    }

    /// True when `h` has a nonzero entry owned by this sector.
    pub fn supports(&self, h: &Mat<C64>) -> bool {
        self.pairs.iter().any(|&(j, k)| h[(j, k)] != C64::new(0.0, 0.0) || h[(k, j)] != C64::new(0.0, 0.0))
    }
}

/// Generator of the dressed master equation in the Schrödinger picture,
/// acting on density matrices expressed in the Hamiltonian eigenbasis.
///
/// `L(rho) = K_L rho + rho K_R + sum_t c_t L_t rho R_t + (explicit two-sided map)`,
/// where `K_L`, `K_R` carry the coherent part and the one-sided dissipator terms.
#[derive(Debug)]
pub struct Liouvillian {
    dim: usize,
    params: SystemParams,
    eig: EigenSystem,
    baths: Vec<Bath>,
    selection: PairSelection,
    k_left: Mat<C64>,
    k_right: Mat<C64>,
    dense: Vec<DenseTerm>,
    /// `explicit[a * d + b]` lists `(i, j, c)`: input `rho_ab` adds `c rho_ab` to output `(i, j)`.
    explicit: Vec<Vec<(usize, usize, C64)>>,
    sectors: Vec<Sector>,
    generators: Vec<OnceLock<Mat<f64>>>,
}

impl Liouvillian {
    /// Assembles the generator from an eigen-decomposition and a set of baths.
    pub fn from_baths(eig: &EigenSystem, params: &SystemParams, baths: Vec<Bath>, selection: PairSelection) -> Result<Self> {
        let d = eig.dim();
        if let PairSelection::Bandwidth(w) = selection {
            if !(w > 0.0) {
                return Err(Error::Domain(format!("bandwidth must be positive, got {w}")));
            }
        }
        let mut k_left = Mat::from_fn(d, d, |i, j| if i == j { C64::new(0.0, -eig.energy(i)) } else { C64::new(0.0, 0.0) });
        let mut k_right = Mat::from_fn(d, d, |i, j| if i == j { C64::new(0.0, eig.energy(i)) } else { C64::new(0.0, 0.0) });
        let mut dense = Vec::new();
        let mut explicit = Vec::new();

        for bath in &baths {
            if bath.jumps.dim() != d {
                return Err(Error::DimensionMismatch { expected: d, found: bath.jumps.dim() });
            }
            if bath.rate == 0.0 {
                continue;
            }
            if !(bath.rate > 0.0) {
                return Err(Error::Domain(format!("bath rate must be non-negative, got {}", bath.rate)));
            }
            if bath.jumps.components().is_empty() {
                return Err(Error::Construction(format!("no dressed components for the {} bath", bath.jumps.mode())));
            }
            let occupations = bath
                .jumps
                .components()
                .iter()
                .map(|c| thermal_occupation(c.omega, bath.temperature))
                .collect::<Result<Vec<f64>>>()?;
            match selection {
                PairSelection::All => {
                    add_factorized(bath, &occupations, &mut k_left, &mut k_right, &mut dense);
                }
                _ => {
                    if explicit.is_empty() {
                        explicit = vec![Vec::new(); d * d];
                    }
                    add_explicit(bath, &occupations, selection, &mut k_left, &mut k_right, &mut explicit);
                }
            }
        }

        let mut liouvillian = Liouvillian {
            dim: d,
            params: params.clone(),
            eig: eig.clone(),
            baths,
            selection,
            k_left,
            k_right,
            dense,
            explicit,
            sectors: Vec::new(),
            generators: Vec::new(),
        };
        liouvillian.sectors = liouvillian.find_sectors();
        liouvillian.generators = (0..liouvillian.sectors.len()).map(|_| OnceLock::new()).collect();
        Ok(liouvillian)
    }

    /// Hilbert-space dimension `d` (the generator acts on `d^2` entries).
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn eigen_system(&self) -> &EigenSystem {
        &self.eig
    }

    pub fn baths(&self) -> &[Bath] {
        &self.baths
    }

    pub fn selection(&self) -> PairSelection {
        self.selection
    }

    pub fn to_eigenbasis(&self, bare: &Mat<C64>) -> Mat<C64> {
        self.eig.to_eigenbasis(bare)
    }

    pub fn to_bare(&self, eigen: &Mat<C64>) -> Mat<C64> {
        self.eig.to_bare(eigen)
    }

    /// `L(rho)` with `rho` in the eigenbasis.
    pub fn apply(&self, rho: &Mat<C64>) -> Mat<C64> {
        let mut out = &self.k_left * rho + rho * &self.k_right;
        for t in &self.dense {
            let prod = &t.left * rho * &t.right;
            out += Mat::from_fn(self.dim, self.dim, |i, j| prod[(i, j)] * t.coef);
        }
        if !self.explicit.is_empty() {
            for a in 0..self.dim {
                for b in 0..self.dim {
                    let x = rho[(a, b)];
                    if x == C64::new(0.0, 0.0) {
                        continue;
                    }
                    for &(i, j, c) in &self.explicit[a * self.dim + b] {
                        out[(i, j)] += c * x;
                    }
                }
            }
        }
        out
    }

    /// Hilbert-Schmidt adjoint `L^H(X)`, so that `Tr[X^H L(rho)] = Tr[L^H(X)^H rho]`.
    pub fn apply_adjoint(&self, x: &Mat<C64>) -> Mat<C64> {
        let mut out = self.k_left.adjoint() * x + x * self.k_right.adjoint();
        for t in &self.dense {
            let prod = t.left.adjoint() * x * t.right.adjoint();
            out += Mat::from_fn(self.dim, self.dim, |i, j| prod[(i, j)] * t.coef);
        }
        if !self.explicit.is_empty() {
            for a in 0..self.dim {
                for b in 0..self.dim {
                    for &(i, j, c) in &self.explicit[a * self.dim + b] {
                        out[(a, b)] += c.conj() * x[(i, j)];
                    }
                }
            }
        }
        out
    }

    /// `L(|a><b|)`
    pub fn apply_unit(&self, a: usize, b: usize) -> Mat<C64> {
        let d = self.dim;
        let mut out = Mat::zeros(d, d);
        for i in 0..d {
            let kl = self.k_left[(i, a)];
            if kl != C64::new(0.0, 0.0) {
                out[(i, b)] += kl;
            }
            let kr = self.k_right[(b, i)];
            if kr != C64::new(0.0, 0.0) {
                out[(a, i)] += kr;
            }
        }
        for t in &self.dense {
            for i in 0..d {
                let l = t.left[(i, a)];
                if l == C64::new(0.0, 0.0) {
                    continue;
                }
                let l = l * t.coef;
                for j in 0..d {
                    let r = t.right[(b, j)];
                    if r != C64::new(0.0, 0.0) {
                        out[(i, j)] += l * r;
                    }
                }
            }
        }
        if !self.explicit.is_empty() {
            for &(i, j, c) in &self.explicit[a * d + b] {
                out[(i, j)] += c;
            }
        }
        out
    }

    pub fn sectors(&self) -> &[Sector] {
        &self.sectors
    }

    /// Index of the sector holding all populations (and hence the steady state).
    pub fn population_sector(&self) -> Result<usize> {
        let holders: Vec<usize> = (0..self.sectors.len()).filter(|&s| self.sectors[s].contains_diagonal).collect();
        match holders.as_slice() {
            [s] => Ok(*s),
            _ => Err(Error::DegenerateSteadyState(format!(
                "populations split across {} disconnected sectors",
                holders.len()
            ))),
        }
    }

    /// Real matrix of the generator restricted to sector `s`, in the sector's
    /// coordinates. Built on first use and cached.
    pub fn sector_generator(&self, s: usize) -> &Mat<f64> {
        self.generators[s].get_or_init(|| self.assemble_sector(s))
    }

    fn assemble_sector(&self, s: usize) -> Mat<f64> {
        let sector = &self.sectors[s];
        let n = sector.dim();
        let mut m = Mat::<f64>::zeros(n, n);
        let i_unit = C64::new(0.0, 1.0);
        let mut col = 0;
        for &(a, b) in &sector.pairs {
            let z = self.apply_unit(a, b);
            let fill = |m: &mut Mat<f64>, col: usize, f: &dyn Fn(usize, usize) -> C64| {
                for (row, c) in sector.coords.iter().enumerate() {
                    m[(row, col)] = match *c {
                        Coord::Diag(j) => f(j, j).re,
                        Coord::Re(j, k) => f(j, k).re,
                        Coord::Im(j, k) => f(j, k).im,
                    };
                }
            };
            if a == b {
                fill(&mut m, col, &|p, q| z[(p, q)]);
                col += 1;
            } else {
                fill(&mut m, col, &|p, q| z[(p, q)] + z[(q, p)].conj());
                fill(&mut m, col + 1, &|p, q| i_unit * (z[(p, q)] - z[(q, p)].conj()));
                col += 2;
            }
        }
        debug_assert_eq!(col, n);
        m
    }

    fn find_sectors(&self) -> Vec<Sector> {
        let d = self.dim;
        let blocks = self.eig.blocks();
        let nb = self.eig.n_blocks();
        let mut uf = UnionFind::new(nb * nb);
        let node = |p: usize, q: usize| p * nb + q;
        for p in 0..nb {
            for q in 0..nb {
                uf.union(node(p, q), node(q, p));
            }
        }
        // block-level sparsity of an operator: (from, to) pairs
        let links = |m: &Mat<C64>| {
            let mut set = vec![false; nb * nb];
            for j in 0..d {
                for i in 0..d {
                    if m[(i, j)] != C64::new(0.0, 0.0) {
                        set[blocks[j] * nb + blocks[i]] = true;
                    }
                }
            }
            (0..nb * nb).filter(|&x| set[x]).map(|x| (x / nb, x % nb)).collect::<Vec<_>>()
        };
        let one_sided = |uf: &mut UnionFind, l: &[(usize, usize)], r: &[(usize, usize)]| {
            for &(pf, pt) in l {
                for &(qf, qt) in r {
                    uf.union(node(pf, qf), node(pt, qt));
                }
            }
        };
        let all_identity: Vec<(usize, usize)> = (0..nb).map(|p| (p, p)).collect();
        // rho R maps column block of R's row index to R's column index: (from, to) = (row, col)
        let right_links = |m: &Mat<C64>| {
            let t = m.transpose().to_owned();
            links(&t)
        };
        one_sided(&mut uf, &links(&self.k_left), &all_identity);
        one_sided(&mut uf, &all_identity, &right_links(&self.k_right));
        for t in &self.dense {
            one_sided(&mut uf, &links(&t.left), &right_links(&t.right));
        }
        if !self.explicit.is_empty() {
            for a in 0..d {
                for b in 0..d {
                    for &(i, j, _) in &self.explicit[a * d + b] {
                        uf.union(node(blocks[a], blocks[b]), node(blocks[i], blocks[j]));
                    }
                }
            }
        }

        let mut root_to_sector: Vec<Option<usize>> = vec![None; nb * nb];
        let mut sectors: Vec<Sector> = Vec::new();
        for j in 0..d {
            for k in j..d {
                let root = uf.find(node(blocks[j], blocks[k]));
                let s = *root_to_sector[root].get_or_insert_with(|| {
                    sectors.push(Sector { coords: Vec::new(), pairs: Vec::new(), contains_diagonal: false });
                    sectors.len() - 1
                });
                let sector = &mut sectors[s];
                sector.pairs.push((j, k));
                if j == k {
                    sector.coords.push(Coord::Diag(j));
                    sector.contains_diagonal = true;
                } else {
                    sector.coords.push(Coord::Re(j, k));
                    sector.coords.push(Coord::Im(j, k));
                }
            }
        }
        sectors
    }
}

fn add_factorized(
    bath: &Bath,
    occupations: &[f64],
    k_left: &mut Mat<C64>,
    k_right: &mut Mat<C64>,
    dense: &mut Vec<DenseTerm>,
) {
    let d = bath.jumps.dim();
    let a = bath.jumps.lowering_eig().clone();
    let mut a_n = Mat::<C64>::zeros(d, d);
    for (c, &n) in bath.jumps.components().iter().zip(occupations) {
        for e in &c.elements {
            a_n[(e.lower, e.upper)] += e.value * n;
        }
    }
    let a_n1 = &a_n + &a;
    let a_dag = a.adjoint().to_owned();
    let a_n_dag = a_n.adjoint().to_owned();
    let a_n1_dag = a_n1.adjoint().to_owned();
    let half = 0.5 * bath.rate;

    let left = &a * &a_n_dag + &a_dag * &a_n1;
    let right = &a_n * &a_dag + &a_n1_dag * &a;
    *k_left -= Mat::from_fn(d, d, |i, j| left[(i, j)] * half);
    *k_right -= Mat::from_fn(d, d, |i, j| right[(i, j)] * half);
    dense.push(DenseTerm { coef: half, left: a_n_dag.clone(), right: a.clone() });
    dense.push(DenseTerm { coef: half, left: a_n1.clone(), right: a_dag.clone() });
    dense.push(DenseTerm { coef: half, left: a_dag, right: a_n });
    dense.push(DenseTerm { coef: half, left: a, right: a_n1_dag });
}

fn add_explicit(
    bath: &Bath,
    occupations: &[f64],
    selection: PairSelection,
    k_left: &mut Mat<C64>,
    k_right: &mut Mat<C64>,
    explicit: &mut [Vec<(usize, usize, C64)>],
) {
    let d = bath.jumps.dim();
    let comps = bath.jumps.components();
    let half = 0.5 * bath.rate;
    for (ie, ce) in comps.iter().enumerate() {
        for (if_, cf) in comps.iter().enumerate() {
            let keep = match selection {
                PairSelection::All => true,
                PairSelection::Bandwidth(w) => (ce.omega - cf.omega).abs() < w,
                PairSelection::Secular => ie == if_,
            };
            if !keep {
                continue;
            }
            // ce carries omega, cf carries omega'
            let (n, n_prime) = (occupations[ie], occupations[if_]);
            for e in &ce.elements {
                for f in &cf.elements {
                    let w = f.value.conj() * e.value;
                    // O^H(omega') rho O(omega): |j_f><k_f| rho |k_e><j_e|
                    explicit[f.lower * d + e.lower].push((f.upper, e.upper, w * (half * (n + n_prime))));
                    // O(omega) rho O^H(omega'): |k_e><j_e| rho |j_f><k_f|
                    explicit[e.upper * d + f.upper].push((e.lower, f.lower, w * (half * (n + n_prime + 2.0))));
                    if e.upper == f.upper {
                        // O(omega) O^H(omega') = |k_e><k_f|
                        k_left[(e.lower, f.lower)] -= w * (half * n_prime);
                        k_right[(e.lower, f.lower)] -= w * (half * n);
                    }
                    if e.lower == f.lower {
                        // O^H(omega') O(omega) = |j_f><j_e|
                        k_left[(f.upper, e.upper)] -= w * (half * (n + 1.0));
                        k_right[(f.upper, e.upper)] -= w * (half * (n_prime + 1.0));
                    }
                }
            }
        }
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Full generator for `params`: coherent part plus cavity (`kappa`, `t_kappa`)
/// and mechanical (`gamma`, `t_gamma`) dissipators with every frequency pair.
pub fn build_liouvillian(eig: &EigenSystem, params: &SystemParams) -> Result<Liouvillian> {
    build_liouvillian_with(eig, params, LiouvillianOptions::for_params(params))
}

pub fn build_liouvillian_with(eig: &EigenSystem, params: &SystemParams, options: LiouvillianOptions) -> Result<Liouvillian> {
    params.validate()?;
    if eig.dim() != params.dims.total() {
        return Err(Error::DimensionMismatch { expected: params.dims.total(), found: eig.dim() });
    }
    let (cavity, mechanical) = dressed_jump_sets(eig, params, options.dressing)?;
    let baths = vec![
        Bath { rate: params.kappa, temperature: params.t_kappa, jumps: cavity },
        Bath { rate: params.gamma, temperature: params.t_gamma, jumps: mechanical },
    ];
    Liouvillian::from_baths(eig, params, baths, options.pairs)
}
