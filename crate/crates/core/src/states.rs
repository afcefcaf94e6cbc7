//! Density matrices and the two-qubit initial-state families.
//!
//! Two-qubit matrices are written in the basis |00⟩, |01⟩, |10⟩, |11⟩. When
//! used as dimer initial states the first label is dimer 2 (|3⟩/|4⟩) and the
//! second is dimer 1 (|1⟩/|2⟩), matching the product basis
//! {|3⟩|1⟩, |3⟩|2⟩, |4⟩|1⟩, |4⟩|2⟩} used by [`crate::dynamics`].

use std::fmt;
use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matfun::{self, CMatrix, HermitianOperator, C64};

/// Tolerance used by [`validate_density_matrix`] for each property.
pub const STATE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NotSquare { rows: usize, cols: usize },
    NotHermitian { residual: f64 },
    TraceNotOne { residual: f64 },
    NotPsd { min_eigenvalue: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NotSquare { rows, cols } => write!(f, "not square ({rows}x{cols})"),
            Violation::NotHermitian { residual } => {
                write!(f, "Hermiticity violated (residual {residual:.3e})")
            }
            Violation::TraceNotOne { residual } => {
                write!(f, "trace differs from 1 by {residual:.3e}")
            }
            Violation::NotPsd { min_eigenvalue } => {
                write!(f, "not PSD (min eigenvalue {min_eigenvalue:.3e})")
            }
        }
    }
}

/// Every violated density-matrix property with its measured residual.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "ok");
        }
        let parts: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        write!(f, "{}", parts.join("; "))
    }
}

/// Checks Hermiticity, unit trace and positivity, each to 1e-10.
pub fn validate_density_matrix(m: &CMatrix) -> ValidationReport {
    let mut report = ValidationReport::default();
    if !m.is_square() {
        report.violations.push(Violation::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
        return report;
    }
    let residual = matfun::hermitian_residual(m);
    if residual > STATE_TOL {
        report.violations.push(Violation::NotHermitian { residual });
    }
    let trace_residual = (m.trace() - C64::new(1.0, 0.0)).norm();
    if trace_residual > STATE_TOL {
        report.violations.push(Violation::TraceNotOne {
            residual: trace_residual,
        });
    }
    let n = m.nrows();
    let herm = HermitianOperator::hermitized(m, vec![n]).expect("square layout");
    let eig = matfun::eig_hermitian(&herm).expect("hermitized input");
    let min = eig.values.last().copied().unwrap_or(0.0);
    if min < -STATE_TOL {
        report.violations.push(Violation::NotPsd {
            min_eigenvalue: min,
        });
    }
    report
}

/// A validated density matrix: Hermitian, PSD and unit trace.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(HermitianOperator);

impl DensityMatrix {
    pub fn new(matrix: CMatrix, dims: Vec<usize>) -> Result<Self> {
        let report = validate_density_matrix(&matrix);
        if !report.is_ok() {
            return Err(Error::InvalidState(report));
        }
        Ok(Self(HermitianOperator::hermitized(&matrix, dims)?))
    }

    pub fn from_operator(op: HermitianOperator) -> Result<Self> {
        let dims = op.dims().to_vec();
        Self::new(op.into_matrix(), dims)
    }

    /// Wraps an operator that is a density matrix by construction.
    pub(crate) fn trusted(op: HermitianOperator) -> Self {
        Self(op)
    }

    /// Pure state `|ψ⟩⟨ψ|`; `psi` is normalized first.
    pub fn pure(psi: &[C64], dims: Vec<usize>) -> Result<Self> {
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) {
            return Err(Error::Parameter("zero state vector".into()));
        }
        let normalized: Vec<C64> = psi.iter().map(|z| z / norm).collect();
        Self::from_operator(HermitianOperator::projector(&normalized, dims)?)
    }

    pub fn maximally_mixed(dims: Vec<usize>) -> Self {
        let n: usize = dims.iter().product();
        Self(HermitianOperator::identity(dims).scaled(1.0 / n as f64))
    }

    pub fn operator(&self) -> &HermitianOperator {
        &self.0
    }

    pub fn into_operator(self) -> HermitianOperator {
        self.0
    }

    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        Self(matfun::tensor(&self.0, &other.0))
    }

    /// Reduced state on the listed factors.
    pub fn reduce(&self, keep: &[usize]) -> Result<DensityMatrix> {
        Ok(Self(matfun::partial_trace(&self.0, keep)?))
    }

    /// `U ρ U^†` for a unitary `U` (not checked).
    pub fn evolve_by(&self, unitary: &CMatrix) -> Result<DensityMatrix> {
        Ok(Self(self.0.conjugate_by(unitary)?))
    }

    pub fn swap_qubits(&self) -> Result<DensityMatrix> {
        Ok(Self(matfun::swap_factors(&self.0)?))
    }
}

impl Deref for DensityMatrix {
    type Target = HermitianOperator;

    fn deref(&self) -> &HermitianOperator {
        &self.0
    }
}

const PARAM_TOL: f64 = 1e-12;

/// Parameters of a two-qubit X state. `beta_off` is the |01⟩⟨10| coherence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XStateParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub delta: C64,
    pub beta_off: C64,
}

impl XStateParams {
    pub fn check(&self) -> Result<()> {
        for (name, v) in [("a", self.a), ("b", self.b), ("c", self.c), ("d", self.d)] {
            if !(v >= -PARAM_TOL) || !v.is_finite() {
                return Err(Error::Constraint {
                    constraint: "a, b, c, d >= 0",
                    detail: format!("{name} = {v}"),
                });
            }
        }
        let sum = self.a + self.b + self.c + self.d;
        if (sum - 1.0).abs() > PARAM_TOL {
            return Err(Error::Constraint {
                constraint: "a + b + c + d = 1",
                detail: format!("sum = {sum}"),
            });
        }
        let ad = self.a * self.d;
        if self.delta.norm_sqr() > ad + PARAM_TOL {
            return Err(Error::Constraint {
                constraint: "|delta|^2 <= a*d",
                detail: format!("|delta|^2 = {} > a*d = {}", self.delta.norm_sqr(), ad),
            });
        }
        let bc = self.b * self.c;
        if self.beta_off.norm_sqr() > bc + PARAM_TOL {
            return Err(Error::Constraint {
                constraint: "|beta|^2 <= b*c",
                detail: format!("|beta|^2 = {} > b*c = {}", self.beta_off.norm_sqr(), bc),
            });
        }
        Ok(())
    }

    /// Reads the X-state parameters back from a two-qubit matrix.
    pub fn from_matrix(m: &CMatrix) -> Self {
        Self {
            a: m[(0, 0)].re,
            b: m[(1, 1)].re,
            c: m[(2, 2)].re,
            d: m[(3, 3)].re,
            delta: m[(0, 3)],
            beta_off: m[(1, 2)],
        }
    }
}

pub fn x_state(p: &XStateParams) -> Result<DensityMatrix> {
    p.check()?;
    let z = C64::new(0.0, 0.0);
    let r = |v: f64| C64::new(v, 0.0);
    #[rustfmt::skip]
    let m = CMatrix::from_row_slice(4, 4, &[
        r(p.a),            z,                     z,                p.delta,
        z,                 r(p.b),                p.beta_off,       z,
        z,                 p.beta_off.conj(),     r(p.c),           z,
        p.delta.conj(),    z,                     z,                r(p.d),
    ]);
    DensityMatrix::new(m, vec![2, 2])
}

/// Correlation coefficients of a canonical-initial (CI) state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CIStateParams {
    pub c01: C64,
    pub c10: C64,
    pub c11: f64,
    pub c22: f64,
    pub c33: f64,
}

/// The CI matrix, `1/4` times the correlation table, checked for positivity.
pub fn ci_state(p: &CIStateParams) -> Result<DensityMatrix> {
    let r = |v: f64| C64::new(v, 0.0);
    let (c01, c10) = (p.c01, p.c10);
    #[rustfmt::skip]
    let m = CMatrix::from_row_slice(4, 4, &[
        r(1.0 + p.c33),     c01,                c10,                r(p.c11 - p.c22),
        c01.conj(),         r(1.0 - p.c33),     r(p.c11 + p.c22),   c10,
        c10.conj(),         r(p.c11 + p.c22),   r(1.0 - p.c33),     c01,
        r(p.c11 - p.c22),   c10.conj(),         c01.conj(),         r(1.0 + p.c33),
    ]) * r(0.25);
    let report = validate_density_matrix(&m);
    if let Some(Violation::NotPsd { min_eigenvalue }) = report
        .violations
        .iter()
        .find(|v| matches!(v, Violation::NotPsd { .. }))
    {
        return Err(Error::Constraint {
            constraint: "CI matrix positive semidefinite",
            detail: format!("min eigenvalue {min_eigenvalue:.6e}"),
        });
    }
    DensityMatrix::new(m, vec![2, 2])
}

/// Special canonical-initial state: `C22 = -C11·C33`, `C10 = C11·C01`, `C33² + C01² <= 1`.
pub fn sci_state(c33: f64, c01: f64, c11: f64) -> Result<DensityMatrix> {
    let radius = c33 * c33 + c01 * c01;
    if radius > 1.0 + PARAM_TOL {
        return Err(Error::Constraint {
            constraint: "C33^2 + C01^2 <= 1",
            detail: format!("C33^2 + C01^2 = {radius}"),
        });
    }
    ci_state(&sci_params(c33, c01, c11))
}

pub fn sci_params(c33: f64, c01: f64, c11: f64) -> CIStateParams {
    CIStateParams {
        c01: C64::new(c01, 0.0),
        c10: C64::new(c11 * c01, 0.0),
        c11,
        c22: -c11 * c33,
        c33,
    }
}

/// Initial-state specification as it appears in experiment configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateSpec {
    XState {
        a: f64,
        b: f64,
        c: f64,
        d: f64,
        #[serde(default)]
        delta: ComplexValue,
        #[serde(default)]
        beta_off: ComplexValue,
    },
    SciState {
        #[serde(rename = "C33")]
        c33: f64,
        #[serde(rename = "C01")]
        c01: f64,
        #[serde(rename = "C11")]
        c11: f64,
    },
}

impl StateSpec {
    pub fn build(&self) -> Result<DensityMatrix> {
        match *self {
            StateSpec::XState {
                a,
                b,
                c,
                d,
                delta,
                beta_off,
            } => x_state(&XStateParams {
                a,
                b,
                c,
                d,
                delta: delta.into(),
                beta_off: beta_off.into(),
            }),
            StateSpec::SciState { c33, c01, c11 } => sci_state(c33, c01, c11),
        }
    }
}

/// A complex number written either as a plain real or as `[re, im]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexValue {
    Real(f64),
    Pair([f64; 2]),
}

impl Default for ComplexValue {
    fn default() -> Self {
        ComplexValue::Real(0.0)
    }
}

impl From<ComplexValue> for C64 {
    fn from(v: ComplexValue) -> C64 {
        match v {
            ComplexValue::Real(re) => C64::new(re, 0.0),
            ComplexValue::Pair([re, im]) => C64::new(re, im),
        }
    }
}
