use faer::Mat;

use super::jumps::thermal_occupation;
use crate::error::{Error, Result};
use crate::linalg::{self, C64};
use crate::model::{EigenSystem, SystemParams};

pub const STATE_HERMITIAN_TOL: f64 = 1e-10;
pub const STATE_TRACE_TOL: f64 = 1e-10;
pub const STATE_MIN_EIGENVALUE: f64 = -1e-8;

/// Density matrix in the bare photon-phonon product basis.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    rho: Mat<C64>,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(rho: Mat<C64>) -> Result<Self> {
        let state = Self::new_unchecked(rho);
        state.validate()?;
        Ok(state)
    }

    /// Wraps a matrix without checking the physical constraints.
    pub fn new_unchecked(rho: Mat<C64>) -> Self {
        Self { rho }
    }

    pub fn validate(&self) -> Result<()> {
        let rho = &self.rho;
        if rho.nrows() != rho.ncols() || rho.nrows() == 0 {
            return Err(Error::InvalidDimension(format!("density matrix is {}x{}", rho.nrows(), rho.ncols())));
        }
        let herm = linalg::hermiticity_error(rho);
        if !(herm < STATE_HERMITIAN_TOL) {
            return Err(Error::InvalidState(format!("not Hermitian (deviation {herm:e})")));
        }
        let drift = (self.trace() - 1.0).abs();
        if !(drift < STATE_TRACE_TOL) {
            return Err(Error::InvalidState(format!("trace deviates from 1 by {drift:e}")));
        }
        let min = self.min_eigenvalue()?;
        if !(min > STATE_MIN_EIGENVALUE) {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        Ok(())
    }

    /// Energy ground state of `eig`.
    pub fn ground(eig: &EigenSystem) -> Self {
        Self::from_eigen_populations(eig, &[1.0])
    }

    /// `exp(-H/T)/Z` of the coupled Hamiltonian; the ground state at `T = 0`.
    pub fn gibbs(eig: &EigenSystem, temperature: f64) -> Result<Self> {
        if !(temperature >= 0.0) || !temperature.is_finite() {
            return Err(Error::Domain(format!("temperature must be non-negative, got {temperature}")));
        }
        if temperature == 0.0 {
            return Ok(Self::ground(eig));
        }
        let e0 = eig.energy(0);
        let weights: Vec<f64> = eig.energies().iter().map(|e| (-(e - e0) / temperature).exp()).collect();
        let z: f64 = weights.iter().sum();
        let pops: Vec<f64> = weights.iter().map(|w| w / z).collect();
        Ok(Self::from_eigen_populations(eig, &pops))
    }

    /// Product of truncated, renormalized single-mode thermal states of the bare modes.
    pub fn product_thermal(params: &SystemParams, t_cavity: f64, t_mech: f64) -> Result<Self> {
        let dims = params.dims;
        let mode = |omega: f64, t: f64, levels: usize| -> Result<Vec<f64>> {
            let mut p = vec![0.0; levels];
            if t == 0.0 {
                p[0] = 1.0;
                return Ok(p);
            }
            // geometric weights r^n with r = n/(n+1)
            let n = thermal_occupation(omega, t)?;
            let r = n / (n + 1.0);
            for (k, x) in p.iter_mut().enumerate() {
                *x = r.powi(k as i32);
            }
            let z: f64 = p.iter().sum();
            p.iter_mut().for_each(|x| *x /= z);
            Ok(p)
        };
        let pc = mode(params.omega_c, t_cavity, dims.n_photon_levels())?;
        let pm = mode(params.omega_m, t_mech, dims.n_phonon_levels())?;
        let d = dims.total();
        Ok(Self::new_unchecked(Mat::from_fn(d, d, |i, j| {
            if i != j {
                return C64::new(0.0, 0.0);
            }
            let (n, k) = dims.occupations(i);
            C64::new(pc[n] * pm[k], 0.0)
        })))
    }

    /// `|psi><psi| / <psi|psi>`
    pub fn pure(psi: &[C64]) -> Result<Self> {
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidState("zero or non-finite state vector".into()));
        }
        let d = psi.len();
        Ok(Self::new_unchecked(Mat::from_fn(d, d, |i, j| psi[i] * psi[j].conj() / norm)))
    }

    fn from_eigen_populations(eig: &EigenSystem, pops: &[f64]) -> Self {
        let d = eig.dim();
        let u = eig.states();
        let mut rho = Mat::<C64>::zeros(d, d);
        for (l, &p) in pops.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            for j in 0..d {
                let uj = u[(j, l)].conj() * p;
                if uj == C64::new(0.0, 0.0) {
                    continue;
                }
                for i in 0..d {
                    rho[(i, j)] += u[(i, l)] * uj;
                }
            }
        }
        Self::new_unchecked(rho)
    }

    pub fn dim(&self) -> usize {
        self.rho.nrows()
    }

    pub fn matrix(&self) -> &Mat<C64> {
        &self.rho
    }

    pub fn into_matrix(self) -> Mat<C64> {
        self.rho
    }

    pub fn trace(&self) -> f64 {
        linalg::trace(&self.rho).re
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(linalg::hermitian_eigenvalues(&self.rho)?.first().copied().unwrap_or(0.0))
    }

    /// `Tr[O rho]`
    pub fn expect(&self, op: &Mat<C64>) -> C64 {
        linalg::trace_product(op, &self.rho)
    }

    /// `(1/2) sum |eigenvalues of (rho - sigma)|`
    pub fn trace_distance(&self, other: &Self) -> Result<f64> {
        let diff = &self.rho - &other.rho;
        let herm = Mat::from_fn(diff.nrows(), diff.ncols(), |i, j| 0.5 * (diff[(i, j)] + diff[(j, i)].conj()));
        Ok(0.5 * linalg::hermitian_eigenvalues(&herm)?.iter().map(|x| x.abs()).sum::<f64>())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bosonics::FockDims;
    use crate::model::solve;

    #[test]
    fn constructors_are_valid_states() {
        let p = SystemParams { dims: FockDims::new(4, 6).unwrap(), ..SystemParams::default() };
        let eig = solve(&p).unwrap();
        DensityMatrix::ground(&eig).validate().unwrap();
        DensityMatrix::gibbs(&eig, 0.3).unwrap().validate().unwrap();
        DensityMatrix::product_thermal(&p, 0.2, 0.9).unwrap().validate().unwrap();
        assert!(DensityMatrix::gibbs(&eig, -1.0).is_err());
    }

    #[test]
    fn rejects_unphysical_matrices() {
        let d = 3;
        let bad_trace = Mat::from_fn(d, d, |i, j| if i == j { C64::new(0.5, 0.0) } else { C64::new(0.0, 0.0) });
        assert!(matches!(DensityMatrix::new(bad_trace), Err(Error::InvalidState(_))));
        let negative = Mat::from_fn(d, d, |i, j| match (i, j) {
            (0, 0) => C64::new(1.5, 0.0),
            (1, 1) => C64::new(-0.5, 0.0),
            _ => C64::new(0.0, 0.0),
        });
        assert!(matches!(DensityMatrix::new(negative), Err(Error::InvalidState(_))));
        let skew = Mat::from_fn(d, d, |i, j| match (i, j) {
            (0, 0) => C64::new(1.0, 0.0),
            (0, 1) => C64::new(0.1, 0.0),
            _ => C64::new(0.0, 0.0),
        });
        assert!(matches!(DensityMatrix::new(skew), Err(Error::InvalidState(_))));
    }

    #[test]
    fn gibbs_at_zero_temperature_is_ground() {
        let p = SystemParams { dims: FockDims::new(3, 5).unwrap(), ..SystemParams::default() };
        let eig = solve(&p).unwrap();
        let a = DensityMatrix::gibbs(&eig, 0.0).unwrap();
        let b = DensityMatrix::ground(&eig);
        assert!(a.trace_distance(&b).unwrap() < 1e-14);
    }

    #[test]
    fn uncoupled_gibbs_is_product_thermal() {
        let p = SystemParams { g: 0.0, omega_c: 1.2, dims: FockDims::new(6, 8).unwrap(), ..SystemParams::default() };
        let eig = solve(&p).unwrap();
        let a = DensityMatrix::gibbs(&eig, 0.4).unwrap();
        let b = DensityMatrix::product_thermal(&p, 0.4, 0.4).unwrap();
        assert!(a.trace_distance(&b).unwrap() < 1e-12);
    }
}
