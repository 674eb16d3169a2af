//! Populations, zero-delay second-order correlations, output flux and quality factors.

use std::f64::consts::PI;

use faer::Mat;

use crate::dressed_me::{DensityMatrix, DressedJumpSet};
use crate::linalg::C64;

/// Population below which `g2` is reported as undefined.
pub const G2_POPULATION_FLOOR: f64 = 1e-8;

/// Number and pair operators `X^H X`, `X^H X^H X X` of a lowering operator `X`.
#[derive(Debug, Clone)]
pub struct ModeObservables {
    number: Mat<C64>,
    pair: Mat<C64>,
}

impl ModeObservables {
    pub fn from_lowering(x: &Mat<C64>) -> Self {
        let xd = x.adjoint().to_owned();
        let x2 = x * x;
        Self { number: &xd * x, pair: &xd * &xd * &x2 }
    }

    /// Built from the dressed lowering operator in the bare basis.
    pub fn dressed(jump: &DressedJumpSet) -> Self {
        Self::from_lowering(jump.lowering_bare())
    }

    pub fn population(&self, rho: &DensityMatrix) -> f64 {
        rho.expect(&self.number).re
    }

    /// `<X^H X^H X X> / <X^H X>^2`, or `None` when the population is below `floor`.
    pub fn g2(&self, rho: &DensityMatrix, floor: f64) -> Option<f64> {
        let n = self.population(rho);
        if !(n > floor) {
            return None;
        }
        Some(rho.expect(&self.pair).re / (n * n))
    }
}

/// `Tr[A^H A rho]` with `A` the summed positive-frequency dressed operator.
pub fn dressed_population(rho: &DensityMatrix, jump: &DressedJumpSet) -> f64 {
    ModeObservables::dressed(jump).population(rho)
}

/// Zero-delay `g2` of the dressed operator; `None` below [`G2_POPULATION_FLOOR`].
pub fn g2_zero_delay(rho: &DensityMatrix, jump: &DressedJumpSet) -> Option<f64> {
    ModeObservables::dressed(jump).g2(rho, G2_POPULATION_FLOOR)
}

/// Output flux `kappa_phys * population` in photons per second, with the
/// dimensionless `kappa` (units of `omega_m`) converted through
/// `omega_m = 2 pi f_c / (omega_c / omega_m)`.
pub fn photon_flux(kappa: f64, population_ss: f64, omega_c_hz: f64, omega_c_over_omega_m: f64) -> f64 {
    let omega_m_rad_s = 2.0 * PI * omega_c_hz / omega_c_over_omega_m;
    kappa * omega_m_rad_s * population_ss
}

/// `Q = omega / rate`
pub fn quality_factor(omega: f64, rate: f64) -> f64 {
    omega / rate
}

/// A named time series of a scalar observable.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableRecord {
    pub name: String,
    pub times: Vec<f64>,
    /// `NaN` marks an undefined value (e.g. `g2` below the population floor).
    pub values: Vec<f64>,
}

impl ObservableRecord {
    pub fn new(name: impl Into<String>) -> Self {
        Self { name: name.into(), times: Vec::new(), values: Vec::new() }
    }

    pub fn push(&mut self, time: f64, value: f64) {
        self.times.push(time);
        self.values.push(value);
    }

    pub fn last(&self) -> Option<f64> {
        self.values.last().copied()
    }
}
