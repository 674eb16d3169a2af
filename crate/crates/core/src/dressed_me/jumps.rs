use std::fmt;

use faer::Mat;

use crate::bosonics::OperatorMatrix;
use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::model::{EigenSystem, SystemParams};

/// Bose-Einstein occupation `1 / (exp(omega/T) - 1)`, exactly zero at `T = 0`.
pub fn thermal_occupation(omega: f64, temperature: f64) -> Result<f64> {
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(Error::Domain(format!("thermal occupation needs omega > 0, got {omega}")));
    }
    if !(temperature >= 0.0) || !temperature.is_finite() {
        return Err(Error::Domain(format!("temperature must be non-negative, got {temperature}")));
    }
    if temperature == 0.0 {
        return Ok(0.0);
    }
    Ok(1.0 / (omega / temperature).exp_m1())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BareMode {
    Cavity,
    Mechanical,
}

impl fmt::Display for BareMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BareMode::Cavity => "cavity",
            BareMode::Mechanical => "mechanical",
        })
    }
}

/// Frequency resolution used when splitting a bare operator into dressed components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DressingOptions {
    /// Transition frequencies closer than this are one component (single linkage).
    pub bin_tol: f64,
    /// Transitions at or below this frequency are excluded from the dissipator.
    pub omega_min: f64,
}

impl DressingOptions {
    /// `bin_tol = 1e-9 omega_m`, `omega_min = 1e-6 omega_m`.
    pub fn for_params(params: &SystemParams) -> Self {
        Self { bin_tol: 1e-9 * params.omega_m, omega_min: 1e-6 * params.omega_m }
    }
}

impl Default for DressingOptions {
    fn default() -> Self {
        Self { bin_tol: 1e-9, omega_min: 1e-6 }
    }
}

/// Matrix element `value |lower><upper|` in the energy eigenbasis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Element {
    pub lower: usize,
    pub upper: usize,
    pub value: C64,
}

/// All transitions of one bare operator at (approximately) one frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpComponent {
    pub omega: f64,
    pub elements: Vec<Element>,
}

impl JumpComponent {
    pub fn to_matrix(&self, dim: usize) -> Mat<C64> {
        let mut m = Mat::zeros(dim, dim);
        for e in &self.elements {
            m[(e.lower, e.upper)] += e.value;
        }
        m
    }
}

/// Positive-frequency (lowering) decomposition of `o + o^H` in the eigenbasis
/// of the system Hamiltonian.
#[derive(Debug, Clone)]
pub struct DressedJumpSet {
    mode: BareMode,
    dim: usize,
    components: Vec<JumpComponent>,
    /// Pairs with `|omega_jk| <= omega_min`, diagonal included, stored as `(row, col, value)`.
    zero_frequency: Vec<(usize, usize, C64)>,
    lowering_eig: Mat<C64>,
    lowering_bare: Mat<C64>,
}

impl DressedJumpSet {
    pub fn mode(&self) -> BareMode {
        self.mode
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Components in ascending frequency.
    pub fn components(&self) -> &[JumpComponent] {
        &self.components
    }

    pub fn zero_frequency(&self) -> &[(usize, usize, C64)] {
        &self.zero_frequency
    }

    pub fn component_operator(&self, index: usize) -> Result<OperatorMatrix> {
        let c = &self.components[index];
        OperatorMatrix::new(c.to_matrix(self.dim), format!("{}({:.6})", self.mode, c.omega))
    }

    /// Total dressed lowering operator `sum_omega C(omega)` in the eigenbasis.
    pub fn lowering_eig(&self) -> &Mat<C64> {
        &self.lowering_eig
    }

    /// Same operator in the bare product basis.
    pub fn lowering_bare(&self) -> &Mat<C64> {
        &self.lowering_bare
    }

    /// `sum_omega [C + C^H] + zero block`, which reproduces `o + o^H` in the eigenbasis.
    pub fn reconstruct(&self) -> Mat<C64> {
        let mut m = Mat::zeros(self.dim, self.dim);
        for c in &self.components {
            for e in &c.elements {
                m[(e.lower, e.upper)] += e.value;
                m[(e.upper, e.lower)] += e.value.conj();
            }
        }
        for &(i, j, v) in &self.zero_frequency {
            m[(i, j)] += v;
        }
        m
    }

    /// Same decomposition with every element multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for c in &mut out.components {
            for e in &mut c.elements {
                e.value *= factor;
            }
        }
        for z in &mut out.zero_frequency {
            z.2 *= factor;
        }
        out.lowering_eig = Mat::from_fn(self.dim, self.dim, |i, j| self.lowering_eig[(i, j)] * factor);
        out.lowering_bare = Mat::from_fn(self.dim, self.dim, |i, j| self.lowering_bare[(i, j)] * factor);
        out
    }
}

/// Splits the bare lowering operator `bare_op` into dressed components. The element
/// `<k|(o + o^H)|j>` of every pair with `omega_jk > omega_min` goes to the
/// component at `omega_jk`; frequencies within `bin_tol` merge.
pub fn dressed_components(
    eig: &EigenSystem,
    bare_op: &OperatorMatrix,
    mode: BareMode,
    options: DressingOptions,
) -> Result<DressedJumpSet> {
    let d = eig.dim();
    if bare_op.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, found: bare_op.dim() });
    }
    if !(options.bin_tol > 0.0) || !(options.omega_min >= 0.0) {
        return Err(Error::Domain("bin_tol must be positive and omega_min non-negative".into()));
    }
    let x = bare_op + &bare_op.dagger();
    let x_eig = eig.to_eigenbasis(x.entries());
    let scale = crate::linalg::max_abs(&x_eig);
    let negligible = 1e-15 * scale;

    let mut transitions: Vec<(f64, Element)> = Vec::new();
    let mut zero_frequency = Vec::new();
    for j in 0..d {
        for k in 0..d {
            let value = x_eig[(k, j)];
            if value.norm() <= negligible {
                continue;
            }
            let omega = eig.transition(j, k);
            if omega.abs() <= options.omega_min {
                zero_frequency.push((k, j, value));
            } else if omega > 0.0 {
                transitions.push((omega, Element { lower: k, upper: j, value }));
            }
        }
    }
    transitions.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.upper.cmp(&b.1.upper)).then(a.1.lower.cmp(&b.1.lower)));

    let mut components: Vec<JumpComponent> = Vec::new();
    let mut last_omega = f64::NEG_INFINITY;
    let mut omega_sum = 0.0;
    for (omega, element) in transitions {
        if omega - last_omega > options.bin_tol || components.is_empty() {
            if let Some(c) = components.last_mut() {
                c.omega = omega_sum / c.elements.len() as f64;
            }
            components.push(JumpComponent { omega, elements: Vec::new() });
            omega_sum = 0.0;
        }
        let c = components.last_mut().expect("pushed above");
        c.elements.push(element);
        omega_sum += omega;
        last_omega = omega;
    }
    if let Some(c) = components.last_mut() {
        c.omega = omega_sum / c.elements.len() as f64;
    }

    let mut lowering_eig = Mat::zeros(d, d);
    for c in &components {
        for e in &c.elements {
            lowering_eig[(e.lower, e.upper)] += e.value;
        }
    }
    let lowering_bare = eig.to_bare(&lowering_eig);
    Ok(DressedJumpSet { mode, dim: d, components, zero_frequency, lowering_eig, lowering_bare })
}

/// Cavity and mechanical jump sets for `params`.
pub fn dressed_jump_sets(
    eig: &EigenSystem,
    params: &SystemParams,
    options: DressingOptions,
) -> Result<(DressedJumpSet, DressedJumpSet)> {
    let a = crate::model::cavity_lowering(params.dims)?;
    let b = crate::model::mechanical_lowering(params.dims)?;
    Ok((
        dressed_components(eig, &a, BareMode::Cavity, options)?,
        dressed_components(eig, &b, BareMode::Mechanical, options)?,
    ))
}
