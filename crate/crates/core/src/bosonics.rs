//! Truncated bosonic operator algebra for one cavity mode and one mechanical mode.
//!
//! The joint space is ordered photon-major: basis state `|n, k>` (n photons,
//! k phonons) sits at index `n * n_phonon_levels + k`.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use faer::Mat;

use crate::error::{Error, Result};
use crate::linalg::{self, C64};

/// Truncation of the photon and phonon Fock spaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FockDims {
    n_photon_levels: usize,
    n_phonon_levels: usize,
}

impl FockDims {
    pub fn new(n_photon_levels: usize, n_phonon_levels: usize) -> Result<Self> {
        if n_photon_levels < 2 || n_phonon_levels < 2 {
            return Err(Error::InvalidDimension(format!(
                "each mode needs at least 2 levels, got {n_photon_levels}x{n_phonon_levels}"
            )));
        }
        Ok(Self { n_photon_levels, n_phonon_levels })
    }

    pub fn n_photon_levels(&self) -> usize {
        self.n_photon_levels
    }

    pub fn n_phonon_levels(&self) -> usize {
        self.n_phonon_levels
    }

    /// Dimension of the joint space.
    pub fn total(&self) -> usize {
        self.n_photon_levels * self.n_phonon_levels
    }

    pub fn index(&self, photons: usize, phonons: usize) -> usize {
        debug_assert!(photons < self.n_photon_levels && phonons < self.n_phonon_levels);
        photons * self.n_phonon_levels + phonons
    }

    /// Inverse of [`FockDims::index`]: `(photons, phonons)`.
    pub fn occupations(&self, index: usize) -> (usize, usize) {
        (index / self.n_phonon_levels, index % self.n_phonon_levels)
    }

    /// Whether the basis state sits on the top (guard) level of either mode.
    pub fn is_guard_state(&self, index: usize) -> bool {
        let (n, k) = self.occupations(index);
        n + 1 == self.n_photon_levels || k + 1 == self.n_phonon_levels
    }

    /// Number of joint basis states that touch a guard level.
    pub fn guard_band(&self) -> usize {
        self.n_photon_levels + self.n_phonon_levels - 1
    }
}

impl fmt::Display for FockDims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.n_photon_levels, self.n_phonon_levels)
    }
}

/// Complex square matrix acting on a truncated Fock space.
#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    entries: Mat<C64>,
    label: String,
    hermitian: bool,
}

/// Tolerance behind the Hermitian flag.
pub const HERMITIAN_FLAG_TOL: f64 = 1e-12;

impl OperatorMatrix {
    pub fn new(entries: Mat<C64>, label: impl Into<String>) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::DimensionMismatch { expected: entries.nrows(), found: entries.ncols() });
        }
        if entries.nrows() == 0 {
            return Err(Error::InvalidDimension("empty operator".into()));
        }
        for j in 0..entries.ncols() {
            for i in 0..entries.nrows() {
                let z = entries[(i, j)];
                if !(z.re.is_finite() && z.im.is_finite()) {
                    return Err(Error::Domain(format!("non-finite entry at ({i}, {j})")));
                }
            }
        }
        Ok(Self { entries, label: label.into(), hermitian: false })
    }

    pub fn from_fn(dim: usize, label: impl Into<String>, f: impl FnMut(usize, usize) -> C64) -> Result<Self> {
        Self::new(Mat::from_fn(dim, dim, f), label)
    }

    pub fn identity(dim: usize) -> Self {
        Self { entries: Mat::identity(dim, dim), label: "I".into(), hermitian: true }
    }

    pub fn zeros(dim: usize) -> Self {
        Self { entries: Mat::zeros(dim, dim), label: "0".into(), hermitian: true }
    }

    /// Sets the Hermitian flag after checking `max |M - M^H| < 1e-12`.
    pub fn into_hermitian(mut self) -> Result<Self> {
        let deviation = linalg::hermiticity_error(&self.entries);
        if deviation >= HERMITIAN_FLAG_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        self.hermitian = true;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &Mat<C64> {
        &self.entries
    }

    pub fn into_entries(self) -> Mat<C64> {
        self.entries
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.entries[(i, j)]
    }

    pub fn dagger(&self) -> Self {
        Self {
            entries: linalg::dagger(&self.entries),
            label: format!("{}^H", self.label),
            hermitian: self.hermitian,
        }
    }

    pub fn scale(&self, c: C64) -> Self {
        let n = self.dim();
        let hermitian = self.hermitian && c.im == 0.0;
        Self {
            entries: Mat::from_fn(n, n, |i, j| self.entries[(i, j)] * c),
            label: self.label.clone(),
            hermitian,
        }
    }

    /// `[self, other]`
    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    pub fn max_abs(&self) -> f64 {
        linalg::max_abs(&self.entries)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        linalg::max_abs_diff(&self.entries, &other.entries)
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.dim());
        (0..self.dim())
            .map(|i| (0..self.dim()).map(|j| self.entries[(i, j)] * v[j]).sum())
            .collect()
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self {
            entries: linalg::kron(&self.entries, &other.entries),
            label: format!("{} (x) {}", self.label, other.label),
            hermitian: self.hermitian && other.hermitian,
        }
    }
}

impl Mul for &OperatorMatrix {
    type Output = OperatorMatrix;

    fn mul(self, rhs: Self) -> OperatorMatrix {
        assert_eq!(self.dim(), rhs.dim(), "operator dimensions differ");
        OperatorMatrix {
            entries: &self.entries * &rhs.entries,
            label: format!("{} {}", self.label, rhs.label),
            hermitian: false,
        }
    }
}

impl Add for &OperatorMatrix {
    type Output = OperatorMatrix;

    fn add(self, rhs: Self) -> OperatorMatrix {
        assert_eq!(self.dim(), rhs.dim(), "operator dimensions differ");
        let n = self.dim();
        OperatorMatrix {
            entries: Mat::from_fn(n, n, |i, j| self.entries[(i, j)] + rhs.entries[(i, j)]),
            label: format!("{} + {}", self.label, rhs.label),
            hermitian: self.hermitian && rhs.hermitian,
        }
    }
}

impl Sub for &OperatorMatrix {
    type Output = OperatorMatrix;

    fn sub(self, rhs: Self) -> OperatorMatrix {
        assert_eq!(self.dim(), rhs.dim(), "operator dimensions differ");
        let n = self.dim();
        OperatorMatrix {
            entries: Mat::from_fn(n, n, |i, j| self.entries[(i, j)] - rhs.entries[(i, j)]),
            label: format!("{} - {}", self.label, rhs.label),
            hermitian: self.hermitian && rhs.hermitian,
        }
    }
}

/// Annihilation operator truncated to `n_levels` Fock states.
pub fn destroy(n_levels: usize) -> Result<OperatorMatrix> {
    if n_levels < 2 {
        return Err(Error::InvalidDimension(format!("ladder operator needs n_levels >= 2, got {n_levels}")));
    }
    OperatorMatrix::from_fn(n_levels, "a", |i, j| {
        if j == i + 1 {
            C64::new((j as f64).sqrt(), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// `op (x) I` on the joint space.
pub fn embed_cavity(op: &OperatorMatrix, dims: FockDims) -> Result<OperatorMatrix> {
    if op.dim() != dims.n_photon_levels() {
        return Err(Error::DimensionMismatch { expected: dims.n_photon_levels(), found: op.dim() });
    }
    Ok(op.kron(&OperatorMatrix::identity(dims.n_phonon_levels())).with_label(format!("{}_c", op.label())))
}

/// `I (x) op` on the joint space.
pub fn embed_mech(op: &OperatorMatrix, dims: FockDims) -> Result<OperatorMatrix> {
    if op.dim() != dims.n_phonon_levels() {
        return Err(Error::DimensionMismatch { expected: dims.n_phonon_levels(), found: op.dim() });
    }
    Ok(OperatorMatrix::identity(dims.n_photon_levels()).kron(op).with_label(format!("{}_m", op.label())))
}

/// Displacement operator `exp(alpha (b^H - b))` for real `alpha`, exponentiated on
/// the truncated space. Unitary only up to truncation error near the top levels.
pub fn displacement(alpha: f64, n_levels: usize) -> Result<OperatorMatrix> {
    let b = destroy(n_levels)?;
    let generator = Mat::from_fn(n_levels, n_levels, |i, j| alpha * (b.get(j, i).conj() - b.get(i, j)));
    OperatorMatrix::new(linalg::expm(generator.as_ref()), format!("D({alpha})"))
}

/// Associated Laguerre polynomial `L_k^m(x)` via the three-term recurrence.
pub fn laguerre_assoc(k: usize, m: i64, x: f64) -> f64 {
    let m = m as f64;
    let mut prev = 1.0;
    if k == 0 {
        return prev;
    }
    let mut cur = 1.0 + m - x;
    for j in 1..k {
        let j = j as f64;
        let next = ((2.0 * j + 1.0 + m - x) * cur - (j + m) * prev) / (j + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// `<k'| D(beta) |k>` for real `beta`, from the closed form
/// `sqrt(k!/k'!) beta^(k'-k) exp(-beta^2/2) L_k^(k'-k)(beta^2)` with `k' >= k`
/// and the reflection `D_{k',k} = (-1)^(k-k') D_{k,k'}` otherwise.
pub fn displaced_overlap(k_prime: usize, k: usize, beta: f64) -> f64 {
    if k_prime < k {
        let sign = if (k - k_prime) % 2 == 0 { 1.0 } else { -1.0 };
        return sign * displaced_overlap(k, k_prime, beta);
    }
    let shift = k_prime - k;
    let ratio: f64 = ((k + 1)..=k_prime).map(|i| 1.0 / (i as f64).sqrt()).product();
    let x = beta * beta;
    ratio * beta.powi(shift as i32) * (-x / 2.0).exp() * laguerre_assoc(k, shift as i64, x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn destroy_two_levels() {
        let a = destroy(2).unwrap();
        assert_eq!(a.get(0, 1), c(1.0));
        assert_eq!(a.get(0, 0), c(0.0));
        assert_eq!(a.get(1, 0), c(0.0));
        assert_eq!(a.get(1, 1), c(0.0));
    }

    #[test]
    fn destroy_matrix_element() {
        let a = destroy(3).unwrap();
        assert_eq!(a.get(1, 2), c(2f64.sqrt()));
    }

    #[test]
    fn destroy_rejects_single_level() {
        assert!(matches!(destroy(1), Err(Error::InvalidDimension(_))));
        assert!(FockDims::new(1, 4).is_err());
    }

    #[test]
    fn number_operator_is_diagonal() {
        let n = 7;
        let a = destroy(n).unwrap();
        let num = &a.dagger() * &a;
        for i in 0..n {
            for j in 0..n {
                let expected = if i == j { i as f64 } else { 0.0 };
                assert!((num.get(i, j) - c(expected)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn truncated_commutator_is_identity_except_top() {
        for n in 2..12 {
            let a = destroy(n).unwrap();
            let comm = &(&a * &a.dagger()) - &(&a.dagger() * &a);
            for i in 0..n {
                for j in 0..n {
                    let expected = if i != j {
                        0.0
                    } else if i + 1 == n {
                        1.0 - n as f64
                    } else {
                        1.0
                    };
                    assert!((comm.get(i, j) - c(expected)).norm() < 1e-14, "n={n} ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn embedding_acts_on_the_right_factor() {
        let dims = FockDims::new(2, 2).unwrap();
        let a = embed_cavity(&destroy(2).unwrap(), dims).unwrap();
        let mut v = vec![c(0.0); 4];
        v[dims.index(1, 0)] = c(1.0);
        let out = a.apply(&v);
        for (i, z) in out.iter().enumerate() {
            assert_eq!(*z, if i == dims.index(0, 0) { c(1.0) } else { c(0.0) });
        }
        let i = embed_cavity(&OperatorMatrix::identity(2), dims).unwrap();
        assert_eq!(i.max_abs_diff(&OperatorMatrix::identity(4)), 0.0);
    }

    #[test]
    fn cavity_and_mechanical_modes_commute() {
        let dims = FockDims::new(4, 5).unwrap();
        let a = embed_cavity(&destroy(4).unwrap(), dims).unwrap();
        let b = embed_mech(&destroy(5).unwrap(), dims).unwrap();
        assert_eq!(a.commutator(&b).max_abs(), 0.0);
        assert_eq!(a.commutator(&b.dagger()).max_abs(), 0.0);
    }

    #[test]
    fn embedding_checks_dimensions() {
        let dims = FockDims::new(3, 4).unwrap();
        assert!(matches!(
            embed_cavity(&destroy(4).unwrap(), dims),
            Err(Error::DimensionMismatch { expected: 3, found: 4 })
        ));
        assert!(embed_mech(&destroy(3).unwrap(), dims).is_err());
    }

    #[test]
    fn zero_displacement_is_identity() {
        let d = displacement(0.0, 10).unwrap();
        assert!(d.max_abs_diff(&OperatorMatrix::identity(10)) < 1e-15);
    }

    #[test]
    fn displacement_vacuum_amplitude() {
        let d = displacement(0.2, 30).unwrap();
        assert!((d.get(0, 0).re - (-0.02f64).exp()).abs() < 1e-8);
    }

    #[test]
    fn displacement_inverse_in_low_block() {
        let n = 30;
        let prod = &displacement(0.4, n).unwrap() * &displacement(-0.4, n).unwrap();
        for i in 0..n / 2 {
            for j in 0..n / 2 {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((prod.get(i, j) - c(expected)).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn displacement_adjoint_reverses_sign() {
        let n = 16;
        let d = displacement(0.35, n).unwrap();
        let dm = displacement(-0.35, n).unwrap();
        assert!(d.dagger().max_abs_diff(&dm) < 1e-12);
    }

    #[test]
    fn laguerre_low_orders() {
        assert_eq!(laguerre_assoc(0, 3, 0.7), 1.0);
        assert_eq!(laguerre_assoc(0, -2, 5.0), 1.0);
        assert!((laguerre_assoc(1, 1, 0.04) - 1.96).abs() < 1e-15);
    }

    /// L_k^m(x) = sum_i (-1)^i C(k+m, k-i) x^i / i!
    fn laguerre_series(k: usize, m: i64, x: f64) -> f64 {
        let binom = |n: f64, r: usize| -> f64 {
            (0..r).map(|i| (n - i as f64) / (i as f64 + 1.0)).product()
        };
        (0..=k)
            .map(|i| {
                let fact: f64 = (1..=i).map(|v| v as f64).product();
                (-1f64).powi(i as i32) * binom(k as f64 + m as f64, k - i) * x.powi(i as i32) / fact
            })
            .sum()
    }

    #[test]
    fn laguerre_matches_series() {
        assert!((laguerre_assoc(3, 2, 0.5) - laguerre_series(3, 2, 0.5)).abs() < 1e-12);
        // L_3^2(0.5) = 10 - 5 + 0.625 - 0.5^3/6
        assert!((laguerre_assoc(3, 2, 0.5) - (10.0 - 5.0 + 0.625 - 0.125 / 6.0)).abs() < 1e-12);
        for k in 0..8 {
            for m in 0..5 {
                for &x in &[0.0, 0.04, 0.3, 1.7] {
                    let r = laguerre_assoc(k, m, x);
                    let s = laguerre_series(k, m, x);
                    assert!((r - s).abs() < 1e-10 * s.abs().max(1.0), "k={k} m={m} x={x}");
                }
            }
        }
    }

    #[test]
    fn overlap_identity_displacement() {
        for k in 0..6 {
            assert!((displaced_overlap(k, k, 0.0) - 1.0).abs() < 1e-15);
        }
        assert_eq!(displaced_overlap(3, 0, 0.0), 0.0);
    }

    #[test]
    fn overlap_single_phonon() {
        let expected = 0.2 * (-0.02f64).exp();
        assert!((displaced_overlap(1, 0, 0.2) - expected).abs() < 1e-15);
        assert!((expected - 0.19604).abs() < 1e-5);
        let d = displacement(0.2, 30).unwrap();
        assert!((displaced_overlap(1, 0, 0.2) - d.get(1, 0).re).abs() < 1e-10);
        assert!((displaced_overlap(3, 0, 0.2) - d.get(3, 0).re).abs() < 1e-10);
    }

    proptest! {
        #[test]
        fn overlap_matches_exponential(beta in -0.5f64..0.5, kp in 0usize..10, k in 0usize..10) {
            let n = 30;
            let d = displacement(beta, n).unwrap();
            let closed = displaced_overlap(kp, k, beta);
            prop_assert!((closed - d.get(kp, k).re).abs() < 1e-8);
            prop_assert!(d.get(kp, k).im.abs() < 1e-14);
        }

        #[test]
        fn overlap_rows_are_normalized(beta in -0.5f64..0.5, k in 0usize..10) {
            let total: f64 = (0..30).map(|kp| displaced_overlap(kp, k, beta).powi(2)).sum();
            prop_assert!((total - 1.0).abs() < 1e-6);
        }
    }
}
