//! Dense matrix helpers shared by the operator algebra and the master-equation solvers.

use std::ops::{Add, Mul, Sub};

use faer::linalg::solvers::Solve;
use faer::traits::ComplexField;
use faer::{Mat, MatRef, Side};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Matrix element types the exponential is implemented for.
pub trait Entry:
    ComplexField + Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + From<f64>
{
    fn modulus(self) -> f64;
}

impl Entry for f64 {
    #[inline]
    fn modulus(self) -> f64 {
        self.abs()
    }
}

impl Entry for C64 {
    #[inline]
    fn modulus(self) -> f64 {
        self.norm()
    }
}

/// Maximum absolute column sum.
pub fn norm_one<T: Entry>(a: MatRef<'_, T>) -> f64 {
    (0..a.ncols())
        .map(|j| (0..a.nrows()).map(|i| a[(i, j)].modulus()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn scaled_sum<T: Entry>(n: usize, terms: &[(f64, &Mat<T>)], identity: f64) -> Mat<T> {
    Mat::from_fn(n, n, |i, j| {
        let mut acc = if i == j { T::from(identity) } else { T::from(0.0) };
        for (c, m) in terms {
            acc = acc + T::from(*c) * m[(i, j)];
        }
        acc
    })
}

const PADE_3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE_5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE_7: [f64; 8] = [
    17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0,
];
const PADE_9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const PADE_13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
// Largest 1-norms for which the degree-m approximant meets unit roundoff.
const THETA: [(usize, f64); 4] = [
    (3, 1.495585217958292e-2),
    (5, 2.539398330063230e-1),
    (7, 9.504178996162932e-1),
    (9, 2.097847961257068),
];
const THETA_13: f64 = 5.371920351148152;

/// Matrix exponential by scaling and squaring with diagonal Padé approximants
/// (Higham's 2005 degree selection).
pub fn expm<T: Entry>(a: MatRef<'_, T>) -> Mat<T> {
    assert_eq!(a.nrows(), a.ncols(), "expm needs a square matrix");
    let n = a.nrows();
    let a = a.to_owned();
    let norm = norm_one(a.as_ref());
    if n == 0 {
        return a;
    }

    let a2 = &a * &a;
    for &(m, theta) in &THETA {
        if norm <= theta {
            let b: &[f64] = match m {
                3 => &PADE_3,
                5 => &PADE_5,
                7 => &PADE_7,
                _ => &PADE_9,
            };
            // powers A^2, A^4, ... up to A^(m-1)
            let mut powers = vec![a2.clone()];
            while powers.len() < (m - 1) / 2 {
                let next = powers.last().unwrap() * &a2;
                powers.push(next);
            }
            let odd: Vec<(f64, &Mat<T>)> =
                powers.iter().enumerate().map(|(i, p)| (b[2 * i + 3], p)).collect();
            let even: Vec<(f64, &Mat<T>)> =
                powers.iter().enumerate().map(|(i, p)| (b[2 * i + 2], p)).collect();
            let u = &a * scaled_sum(n, &odd, b[1]);
            let v = scaled_sum(n, &even, b[0]);
            return pade_quotient(&u, &v);
        }
    }

    let s = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil().max(0.0) as i32
    } else {
        0
    };
    let scale = 0.5f64.powi(s);
    let a = Mat::from_fn(n, n, |i, j| T::from(scale) * a[(i, j)]);
    let a2 = Mat::from_fn(n, n, |i, j| T::from(scale * scale) * a2[(i, j)]);
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let b = &PADE_13;
    let inner_u = &a6 * scaled_sum(n, &[(b[13], &a6), (b[11], &a4), (b[9], &a2)], 0.0);
    let u = &a
        * scaled_sum(
            n,
            &[(1.0, &inner_u), (b[7], &a6), (b[5], &a4), (b[3], &a2)],
            b[1],
        );
    let inner_v = &a6 * scaled_sum(n, &[(b[12], &a6), (b[10], &a4), (b[8], &a2)], 0.0);
    let v = scaled_sum(
        n,
        &[(1.0, &inner_v), (b[6], &a6), (b[4], &a4), (b[2], &a2)],
        b[0],
    );
    let mut r = pade_quotient(&u, &v);
    for _ in 0..s {
        r = &r * &r;
    }
    r
}

fn pade_quotient<T: Entry>(u: &Mat<T>, v: &Mat<T>) -> Mat<T> {
    let n = u.nrows();
    let q = Mat::from_fn(n, n, |i, j| v[(i, j)] - u[(i, j)]);
    let p = Mat::from_fn(n, n, |i, j| v[(i, j)] + u[(i, j)]);
    q.partial_piv_lu().solve(&p)
}

pub fn dagger(a: &Mat<C64>) -> Mat<C64> {
    a.adjoint().to_owned()
}

pub fn max_abs(a: &Mat<C64>) -> f64 {
    let mut m = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            m = m.max(a[(i, j)].norm());
        }
    }
    m
}

pub fn max_abs_diff(a: &Mat<C64>, b: &Mat<C64>) -> f64 {
    assert_eq!((a.nrows(), a.ncols()), (b.nrows(), b.ncols()));
    let mut m = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            m = m.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    m
}

/// max |M - M^H|
pub fn hermiticity_error(a: &Mat<C64>) -> f64 {
    let mut m = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..=j.min(a.nrows().saturating_sub(1)) {
            m = m.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    m
}

pub fn trace(a: &Mat<C64>) -> C64 {
    (0..a.nrows().min(a.ncols())).map(|i| a[(i, i)]).sum()
}

/// Tr[A B] without forming the product.
pub fn trace_product(a: &Mat<C64>, b: &Mat<C64>) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

/// Ascending eigenvalues of a Hermitian matrix (only the lower triangle is read).
pub fn hermitian_eigenvalues(a: &Mat<C64>) -> Result<Vec<f64>> {
    a.self_adjoint_eigenvalues(Side::Lower).map_err(|_| Error::Eigen)
}

pub fn kron(a: &Mat<C64>, b: &Mat<C64>) -> Mat<C64> {
    let (ra, ca) = (a.nrows(), a.ncols());
    let (rb, cb) = (b.nrows(), b.ncols());
    Mat::from_fn(ra * rb, ca * cb, |i, j| a[(i / rb, j / cb)] * b[(i % rb, j % cb)])
}

/// U^H M U
pub fn to_basis(u: &Mat<C64>, m: &Mat<C64>) -> Mat<C64> {
    u.adjoint() * (m * u)
}

/// U M U^H
pub fn from_basis(u: &Mat<C64>, m: &Mat<C64>) -> Mat<C64> {
    u * (m * u.adjoint())
}
