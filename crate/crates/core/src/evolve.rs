//! Time evolution, steady states, two-time correlations and emission spectra.
//!
//! Density matrices are propagated in real Hermitian coordinates, sector by
//! sector, with the exact propagator `exp(M dt)` of each sector generator.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use faer::linalg::solvers::Solve;
use faer::Mat;
use rayon::prelude::*;

use crate::dressed_me::{Coord, DensityMatrix, DressedJumpSet, Liouvillian};
use crate::error::{Error, Result};
use crate::linalg::{self, C64};

/// Default trace drift and negative eigenvalue that abort a propagation.
pub const PROPAGATION_TOL: f64 = 1e-7;

/// Abort thresholds of [`propagate_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationOptions {
    pub trace_tol: f64,
    /// Largest tolerated `-min eigenvalue` of a recorded state.
    pub positivity_tol: f64,
}

impl Default for PropagationOptions {
    fn default() -> Self {
        Self { trace_tol: PROPAGATION_TOL, positivity_tol: PROPAGATION_TOL }
    }
}
/// Population of the top Fock levels above which results are flagged as truncated.
pub const GUARD_POPULATION_LIMIT: f64 = 1e-6;
/// Entries smaller than this are treated as absent when deciding which sectors to evolve.
const SUPPORT_FLOOR: f64 = 1e-13;
/// Required decay `|C(tau_max)| / C(0)` before a spectrum is taken.
pub const WINDOW_DECAY_LIMIT: f64 = 1e-4;

/// Sector propagators `exp(M dt)`, cached by sector and step.
pub struct Propagator<'a> {
    liouvillian: &'a Liouvillian,
    cache: Mutex<HashMap<usize, Vec<(f64, Arc<Mat<f64>>)>>>,
}

impl<'a> Propagator<'a> {
    pub fn new(liouvillian: &'a Liouvillian) -> Self {
        Self { liouvillian, cache: Mutex::new(HashMap::new()) }
    }

    pub fn liouvillian(&self) -> &Liouvillian {
        self.liouvillian
    }

    /// `exp(M_s dt)`. Steps equal to a cached one within `1e-12 dt` reuse it.
    pub fn step(&self, sector: usize, dt: f64) -> Arc<Mat<f64>> {
        if let Some(hit) = self.lookup(sector, dt) {
            return hit;
        }
        let m = self.liouvillian.sector_generator(sector);
        let scaled = Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * dt);
        let p = Arc::new(linalg::expm(scaled.as_ref()));
        self.cache.lock().expect("propagator cache poisoned").entry(sector).or_default().push((dt, p.clone()));
        p
    }

    fn lookup(&self, sector: usize, dt: f64) -> Option<Arc<Mat<f64>>> {
        let cache = self.cache.lock().expect("propagator cache poisoned");
        cache
            .get(&sector)?
            .iter()
            .find(|(t, _)| (t - dt).abs() <= 1e-12 * dt.abs())
            .map(|(_, p)| p.clone())
    }
}

fn check_grid(times: &[f64], what: &str) -> Result<()> {
    if times.is_empty() {
        return Err(Error::Domain(format!("empty {what} grid")));
    }
    if !(times[0] >= 0.0) || times.iter().any(|t| !t.is_finite()) {
        return Err(Error::Domain(format!("{what} grid must start at a finite value >= 0")));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain(format!("{what} grid must be strictly increasing")));
    }
    Ok(())
}

fn sector_support(l: &Liouvillian, h: &Mat<C64>) -> Vec<usize> {
    (0..l.sectors().len())
        .filter(|&s| l.sectors()[s].gather(h).iter().any(|x| x.abs() > SUPPORT_FLOOR))
        .collect()
}

fn column(x: &[f64]) -> Mat<f64> {
    Mat::from_fn(x.len(), 1, |i, _| x[i])
}

/// One recorded time of a propagation.
#[derive(Debug, Clone)]
pub struct Frame {
    pub time: f64,
    pub state: DensityMatrix,
    pub trace_error: f64,
    pub min_eigenvalue: f64,
    pub guard_population: f64,
}

/// Diagnostics of a completed propagation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationSummary {
    pub max_trace_error: f64,
    pub min_eigenvalue: f64,
    pub max_guard_population: f64,
    pub truncation_flag: bool,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    pub trace_errors: Vec<f64>,
    pub min_eigenvalues: Vec<f64>,
    /// Set when the top Fock level of either mode held more than
    /// [`GUARD_POPULATION_LIMIT`] at any recorded time.
    pub truncation_flag: bool,
}

/// Solves `d rho/dt = L(rho)` from `rho0` at `t = 0` and records every time in `times`.
pub fn propagate(l: &Liouvillian, rho0: &DensityMatrix, times: &[f64]) -> Result<Trajectory> {
    let mut traj = Trajectory {
        times: Vec::with_capacity(times.len()),
        states: Vec::with_capacity(times.len()),
        trace_errors: Vec::with_capacity(times.len()),
        min_eigenvalues: Vec::with_capacity(times.len()),
        truncation_flag: false,
    };
    let summary = propagate_with(&Propagator::new(l), rho0, times, PropagationOptions::default(), |frame| {
        traj.times.push(frame.time);
        traj.trace_errors.push(frame.trace_error);
        traj.min_eigenvalues.push(frame.min_eigenvalue);
        traj.states.push(frame.state.clone());
    })?;
    traj.truncation_flag = summary.truncation_flag;
    Ok(traj)
}

/// Streaming variant of [`propagate`]: `observer` sees each frame in time order.
/// Fails with [`Error::PropagationFailure`] at the first frame whose trace
/// drifts by more than `options.trace_tol` or whose smallest eigenvalue falls
/// below `-options.positivity_tol`. The trace is never renormalized.
pub fn propagate_with(
    propagator: &Propagator<'_>,
    rho0: &DensityMatrix,
    times: &[f64],
    options: PropagationOptions,
    mut observer: impl FnMut(&Frame),
) -> Result<PropagationSummary> {
    let l = propagator.liouvillian();
    check_grid(times, "time")?;
    if rho0.dim() != l.dim() {
        return Err(Error::DimensionMismatch { expected: l.dim(), found: rho0.dim() });
    }
    rho0.validate()?;
    let dims = l.params().dims;
    let guard: Vec<usize> = (0..dims.total()).filter(|&i| dims.is_guard_state(i)).collect();

    let rho_eig = l.to_eigenbasis(rho0.matrix());
    let active = sector_support(l, &rho_eig);
    let mut coords: Vec<Mat<f64>> = active.iter().map(|&s| column(&l.sectors()[s].gather(&rho_eig))).collect();

    let mut summary = PropagationSummary { max_trace_error: 0.0, min_eigenvalue: f64::INFINITY, max_guard_population: 0.0, truncation_flag: false };
    let mut now = 0.0;
    for &t in times {
        let dt = t - now;
        if dt > 0.0 {
            for (x, &s) in coords.iter_mut().zip(&active) {
                *x = &*propagator.step(s, dt) * &*x;
            }
        }
        now = t;

        let mut rho = Mat::<C64>::zeros(l.dim(), l.dim());
        for (x, &s) in coords.iter().zip(&active) {
            let v: Vec<f64> = (0..x.nrows()).map(|i| x[(i, 0)]).collect();
            l.sectors()[s].scatter_add(&v, &mut rho);
        }
        let state = DensityMatrix::new_unchecked(l.to_bare(&rho));
        let trace_error = (linalg::trace(&rho).re - 1.0).abs();
        let min_eigenvalue = linalg::hermitian_eigenvalues(&rho)?.first().copied().unwrap_or(0.0);
        let guard_population: f64 = guard.iter().map(|&i| state.matrix()[(i, i)].re).sum();
        if !(trace_error <= options.trace_tol) {
            return Err(Error::PropagationFailure { time: t, reason: format!("trace drift {trace_error:e}") });
        }
        if !(min_eigenvalue >= -options.positivity_tol) {
            return Err(Error::PropagationFailure { time: t, reason: format!("negative eigenvalue {min_eigenvalue:e}") });
        }
        summary.max_trace_error = summary.max_trace_error.max(trace_error);
        summary.min_eigenvalue = summary.min_eigenvalue.min(min_eigenvalue);
        summary.max_guard_population = summary.max_guard_population.max(guard_population);
        summary.truncation_flag |= guard_population > GUARD_POPULATION_LIMIT;
        observer(&Frame { time: t, state, trace_error, min_eigenvalue, guard_population });
    }
    Ok(summary)
}

/// Residual `max |L(rho)|` accepted for a steady state.
pub const STEADY_STATE_RESIDUAL: f64 = 1e-10;

/// Unique stationary state, from the population sector generator with one
/// equation replaced by the trace constraint.
pub fn steady_state(l: &Liouvillian) -> Result<DensityMatrix> {
    let s = l.population_sector()?;
    let sector = &l.sectors()[s];
    let m = l.sector_generator(s);
    let n = sector.dim();
    let anchor = sector
        .coords()
        .iter()
        .position(|c| matches!(c, Coord::Diag(_)))
        .expect("population sector holds a diagonal coordinate");
    let is_diag: Vec<bool> = sector.coords().iter().map(|c| matches!(c, Coord::Diag(_))).collect();
    let a = Mat::from_fn(n, n, |i, j| {
        if i == anchor {
            if is_diag[j] {
                1.0
            } else {
                0.0
            }
        } else {
            m[(i, j)]
        }
    });
    let b = Mat::from_fn(n, 1, |i, _| if i == anchor { 1.0 } else { 0.0 });
    let lu = a.partial_piv_lu();
    let u = lu.U();
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for i in 0..n {
        let p = u[(i, i)].abs();
        lo = lo.min(p);
        hi = hi.max(p);
    }
    if !(lo > 1e-13 * hi) {
        return Err(Error::DegenerateSteadyState(format!("generator kernel is not one-dimensional (pivot ratio {:e})", lo / hi)));
    }
    let mut x = lu.solve(&b);
    let r = &b - &a * &x;
    x += lu.solve(&r);

    let mut rho = Mat::<C64>::zeros(l.dim(), l.dim());
    let v: Vec<f64> = (0..n).map(|i| x[(i, 0)]).collect();
    if v.iter().any(|z| !z.is_finite()) {
        return Err(Error::DegenerateSteadyState("non-finite solution".into()));
    }
    sector.scatter_add(&v, &mut rho);
    let residual = linalg::max_abs(&l.apply(&rho));
    if !(residual < STEADY_STATE_RESIDUAL) {
        return Err(Error::DegenerateSteadyState(format!("stationary residual {residual:e}")));
    }
    let state = DensityMatrix::new_unchecked(l.to_bare(&rho));
    state.validate()?;
    Ok(state)
}

/// `C(tau) = <A^H(0) A(tau)>` in the steady state.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationRecord {
    pub taus: Vec<f64>,
    pub values: Vec<C64>,
}

impl CorrelationRecord {
    /// `|C(tau_max)| / |C(0)|`
    pub fn decay_ratio(&self) -> f64 {
        let c0 = self.values.first().map_or(0.0, |c| c.norm());
        let last = self.values.last().map_or(0.0, |c| c.norm());
        if c0 == 0.0 {
            if last == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            last / c0
        }
    }

    /// Largest `|C(tau)| / C(0) - 1` over the record (non-positive for a valid correlation).
    pub fn max_excess(&self) -> f64 {
        let c0 = self.values.first().map_or(0.0, |c| c.re);
        self.values.iter().map(|c| c.norm() / c0 - 1.0).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Steady-state correlation of the dressed lowering operator `A` of `jump` by
/// the quantum regression theorem: `C(tau) = Tr[A exp(L tau)(rho_ss A^H)]`.
pub fn qrt_correlation(
    l: &Liouvillian,
    rho_ss: &DensityMatrix,
    jump: &DressedJumpSet,
    taus: &[f64],
) -> Result<CorrelationRecord> {
    qrt_correlation_with(&Propagator::new(l), rho_ss, jump, taus)
}

pub fn qrt_correlation_with(
    propagator: &Propagator<'_>,
    rho_ss: &DensityMatrix,
    jump: &DressedJumpSet,
    taus: &[f64],
) -> Result<CorrelationRecord> {
    let l = propagator.liouvillian();
    check_grid(taus, "delay")?;
    if rho_ss.dim() != l.dim() || jump.dim() != l.dim() {
        return Err(Error::DimensionMismatch { expected: l.dim(), found: rho_ss.dim().max(jump.dim()) });
    }
    let rho = l.to_eigenbasis(rho_ss.matrix());
    let residual = linalg::max_abs(&l.apply(&rho));
    if !(residual < 1e-8) {
        return Err(Error::InvalidState(format!("state is not stationary (residual {residual:e})")));
    }
    let a = jump.lowering_eig();
    let seed = &rho * a.adjoint();
    let d = l.dim();
    let half = C64::new(0.5, 0.0);
    let h1 = Mat::from_fn(d, d, |i, j| (seed[(i, j)] + seed[(j, i)].conj()) * half);
    let h2 = Mat::from_fn(d, d, |i, j| (seed[(i, j)] - seed[(j, i)].conj()) * C64::new(0.0, -0.5));

    let mut active: Vec<usize> = sector_support(l, &h1);
    for s in sector_support(l, &h2) {
        if !active.contains(&s) {
            active.push(s);
        }
    }
    active.sort_unstable();
    let mut states: Vec<Mat<f64>> = active
        .iter()
        .map(|&s| {
            let (x1, x2) = (l.sectors()[s].gather(&h1), l.sectors()[s].gather(&h2));
            Mat::from_fn(x1.len(), 2, |i, j| if j == 0 { x1[i] } else { x2[i] })
        })
        .collect();
    let functionals: Vec<Vec<C64>> = active.iter().map(|&s| l.sectors()[s].trace_functional(a)).collect();
    let traces: Vec<Vec<f64>> = active
        .iter()
        .map(|&s| l.sectors()[s].coords().iter().map(|c| if matches!(c, Coord::Diag(_)) { 1.0 } else { 0.0 }).collect())
        .collect();
    let trace_of = |states: &[Mat<f64>], col: usize| -> f64 {
        states.iter().zip(&traces).map(|(x, t)| (0..x.nrows()).map(|i| t[i] * x[(i, col)]).sum::<f64>()).sum()
    };
    let initial_trace = [trace_of(&states, 0), trace_of(&states, 1)];
    let scale = linalg::max_abs(&seed).max(f64::MIN_POSITIVE);

    let mut values = Vec::with_capacity(taus.len());
    let mut now = 0.0;
    for &tau in taus {
        let dt = tau - now;
        if dt > 0.0 {
            for (x, &s) in states.iter_mut().zip(&active) {
                *x = &*propagator.step(s, dt) * &*x;
            }
        }
        now = tau;
        for col in 0..2 {
            let drift = (trace_of(&states, col) - initial_trace[col]).abs() / scale;
            if !(drift <= PROPAGATION_TOL) {
                return Err(Error::PropagationFailure { time: tau, reason: format!("seed trace drift {drift:e}") });
            }
        }
        let mut c = C64::new(0.0, 0.0);
        for (x, f) in states.iter().zip(&functionals) {
            for i in 0..x.nrows() {
                c += f[i] * C64::new(x[(i, 0)], x[(i, 1)]);
            }
        }
        values.push(c);
    }
    Ok(CorrelationRecord { taus: taus.to_vec(), values })
}

/// Correlation on a uniform delay grid of step `dt`, doubling the window from
/// `tau_max` until `|C(tau_max)| / C(0)` is below [`WINDOW_DECAY_LIMIT`] or the
/// window would exceed `tau_cap`. The last record is returned either way.
pub fn qrt_correlation_decayed(
    propagator: &Propagator<'_>,
    rho_ss: &DensityMatrix,
    jump: &DressedJumpSet,
    dt: f64,
    tau_max: f64,
    tau_cap: f64,
) -> Result<CorrelationRecord> {
    let mut window = tau_max;
    loop {
        let corr = qrt_correlation_with(propagator, rho_ss, jump, &uniform_grid(window, dt)?)?;
        if corr.decay_ratio() < WINDOW_DECAY_LIMIT || 2.0 * window > tau_cap {
            return Ok(corr);
        }
        window *= 2.0;
    }
}

/// `0, dt, 2 dt, ...` up to and including the first point at or beyond `tau_max`.
pub fn uniform_grid(tau_max: f64, dt: f64) -> Result<Vec<f64>> {
    if !(dt > 0.0) || !(tau_max >= 0.0) || !tau_max.is_finite() {
        return Err(Error::Domain(format!("bad grid: tau_max {tau_max}, step {dt}")));
    }
    let n = (tau_max / dt - 1e-9).ceil().max(0.0) as usize;
    Ok((0..=n).map(|i| i as f64 * dt).collect())
}

/// `n` evenly spaced points over `[lo, hi]`, endpoints included.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// Default delay window `20 / Gamma_tot`.
pub fn default_tau_max(gamma_tot: f64) -> f64 {
    20.0 / gamma_tot
}

/// Default delay step, in units of `1/omega_m`.
pub const DEFAULT_TAU_STEP: f64 = 0.5;

/// 2048 points over `[0.8, 1.2] omega_m`.
pub fn default_omega_grid(omega_m: f64) -> Vec<f64> {
    linspace(0.8 * omega_m, 1.2 * omega_m, 2048)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumRecord {
    pub omegas: Vec<f64>,
    pub values: Vec<f64>,
}

impl SpectrumRecord {
    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Copy scaled so the maximum is 1.
    pub fn normalized(&self) -> Self {
        let m = self.max();
        let values = if m > 0.0 { self.values.iter().map(|v| v / m).collect() } else { self.values.clone() };
        Self { omegas: self.omegas.clone(), values }
    }

    /// Interior local maxima higher than `min_relative * max`, tallest first.
    pub fn peaks(&self, min_relative: f64) -> Vec<(f64, f64)> {
        let floor = min_relative * self.max();
        let v = &self.values;
        let mut out: Vec<(f64, f64)> = (1..v.len().saturating_sub(1))
            .filter(|&i| v[i] > v[i - 1] && v[i] >= v[i + 1] && v[i] > floor)
            .map(|i| (self.omegas[i], v[i]))
            .collect();
        out.sort_by(|a, b| b.1.total_cmp(&a.1));
        out
    }
}

/// `S(omega) = Re int_0^tau_max C(tau) exp(i omega tau) d tau` by the trapezoidal rule
/// on the correlation's own delay grid.
pub fn emission_spectrum(corr: &CorrelationRecord, omegas: &[f64]) -> Result<SpectrumRecord> {
    if corr.taus.len() < 2 || corr.taus.len() != corr.values.len() {
        return Err(Error::Domain("correlation needs at least two delays".into()));
    }
    let ratio = corr.decay_ratio();
    if !(ratio < WINDOW_DECAY_LIMIT) {
        return Err(Error::WindowTooShort { ratio, limit: WINDOW_DECAY_LIMIT });
    }
    let taus = &corr.taus;
    let n = taus.len();
    let weights: Vec<f64> = (0..n)
        .map(|i| {
            let left = if i > 0 { taus[i] - taus[i - 1] } else { 0.0 };
            let right = if i + 1 < n { taus[i + 1] - taus[i] } else { 0.0 };
            0.5 * (left + right)
        })
        .collect();
    let values = omegas
        .par_iter()
        .map(|&w| {
            (0..n)
                .map(|i| {
                    let (s, c) = (w * taus[i]).sin_cos();
                    weights[i] * (corr.values[i].re * c - corr.values[i].im * s)
                })
                .sum()
        })
        .collect();
    Ok(SpectrumRecord { omegas: omegas.to_vec(), values })
}
