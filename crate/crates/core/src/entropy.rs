//! Rényi and von Neumann entropies and conditional mutual informations.
//!
//! All logarithms are base 2. Three-party states are ordered `(X, E, B)`:
//! a classical register, the measurement environment, and the unmeasured
//! system. `I(E;B|X)` is computed either from von Neumann entropies or from
//! the sandwiched Rényi expression
//!
//! ```text
//! I_α = α/(α-1) · log2 Tr[(ρ_X^{(α-1)/2} Tr_E{ρ_EX^{(1-α)/2} τ^α ρ_EX^{(1-α)/2}} ρ_X^{(α-1)/2})^{1/α}]
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matfun::{self, HermitianOperator, SUPPORT_CUTOFF};
use crate::states::DensityMatrix;

/// Orders closer than this to 1 are evaluated as the von Neumann limit.
pub const VON_NEUMANN_WINDOW: f64 = 1e-6;

/// Rényi order α > 0.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct RenyiOrder(f64);

impl RenyiOrder {
    /// Any finite α > 0; entropies accept the whole half-line.
    pub fn new(alpha: f64) -> Result<Self> {
        if alpha.is_finite() && alpha > 0.0 {
            Ok(Self(alpha))
        } else {
            Err(Error::Parameter(format!(
                "Renyi order must be finite and positive, got {alpha}"
            )))
        }
    }

    /// α ∈ (0, 2], the range on which the Rényi discord is defined.
    pub fn for_discord(alpha: f64) -> Result<Self> {
        let order = Self::new(alpha)?;
        if alpha > 2.0 {
            return Err(Error::Parameter(format!(
                "Renyi discord needs alpha in (0,1) U (1,2], got {alpha}"
            )));
        }
        Ok(order)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn is_von_neumann(self) -> bool {
        (self.0 - 1.0).abs() < VON_NEUMANN_WINDOW
    }
}

impl TryFrom<f64> for RenyiOrder {
    type Error = Error;

    fn try_from(alpha: f64) -> Result<Self> {
        Self::new(alpha)
    }
}

impl From<RenyiOrder> for f64 {
    fn from(order: RenyiOrder) -> f64 {
        order.0
    }
}

pub fn renyi_entropy(rho: &DensityMatrix, order: RenyiOrder) -> Result<f64> {
    if order.is_von_neumann() {
        return von_neumann_entropy(rho);
    }
    let alpha = order.value();
    let tr = matfun::trace_pow_psd(rho.operator(), alpha, SUPPORT_CUTOFF)?;
    Ok((tr.log2() / (1.0 - alpha)).max(0.0))
}

pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    operator_entropy(rho.operator())
}

fn operator_entropy(op: &HermitianOperator) -> Result<f64> {
    let eig = matfun::psd_spectrum(op)?;
    let h: f64 = eig
        .values
        .iter()
        .filter(|&&l| l > 0.0)
        .map(|&l| -l * l.log2())
        .sum();
    Ok(h.max(0.0))
}

fn check_tripartite(tau: &DensityMatrix) -> Result<()> {
    if tau.dims().len() != 3 {
        return Err(Error::Dimension(format!(
            "conditional mutual information needs factors (X, E, B), got dims {:?}",
            tau.dims()
        )));
    }
    Ok(())
}

/// `S(EX) + S(BX) - S(X) - S(EBX)`.
pub fn vn_cmi(tau: &DensityMatrix) -> Result<f64> {
    check_tripartite(tau)?;
    let s_ex = operator_entropy(&matfun::partial_trace(tau, &[0, 1])?)?;
    let s_bx = operator_entropy(&matfun::partial_trace(tau, &[0, 2])?)?;
    let s_x = operator_entropy(&matfun::partial_trace(tau, &[0])?)?;
    let s_all = operator_entropy(tau.operator())?;
    Ok(s_ex + s_bx - s_x - s_all)
}

/// Sandwiched Rényi conditional mutual information `I_α(E;B|X)`.
pub fn renyi_cmi(tau: &DensityMatrix, order: RenyiOrder) -> Result<f64> {
    check_tripartite(tau)?;
    if order.is_von_neumann() {
        return vn_cmi(tau);
    }
    let alpha = order.value();
    let dims = tau.dims().to_vec();
    let (dx, db) = (dims[0], dims[2]);

    let rho_ex = matfun::partial_trace(tau, &[0, 1]).map_err(|e| e.at_stage("reduce to EX"))?;
    let rho_x = matfun::partial_trace(tau, &[0]).map_err(|e| e.at_stage("reduce to X"))?;

    let ex_pow = matfun::mat_pow_psd(&rho_ex, (1.0 - alpha) / 2.0, SUPPORT_CUTOFF)
        .map_err(|e| e.at_stage("rho_EX power"))?;
    let ex_pow = matfun::tensor(&ex_pow, &HermitianOperator::identity(vec![db]));
    let tau_pow =
        matfun::mat_pow_psd(tau, alpha, SUPPORT_CUTOFF).map_err(|e| e.at_stage("tau power"))?;
    let inner = ex_pow.matrix() * tau_pow.matrix() * ex_pow.matrix();
    let inner = HermitianOperator::hermitized(&inner, dims)?;

    let reduced = matfun::partial_trace(&inner, &[0, 2]).map_err(|e| e.at_stage("trace out E"))?;
    sandwiched_outer(&reduced, &rho_x, alpha, dx, db)
}

/// Final stage shared with the discord objective: given `K = Tr_E{…}` on
/// (X, B) and `ρ_X`, returns `α/(α-1) log2 Tr[(ρ_X^{(α-1)/2} K ρ_X^{(α-1)/2})^{1/α}]`.
pub(crate) fn sandwiched_outer(
    reduced: &HermitianOperator,
    rho_x: &HermitianOperator,
    alpha: f64,
    dx: usize,
    db: usize,
) -> Result<f64> {
    let x_pow = matfun::mat_pow_psd(rho_x, (alpha - 1.0) / 2.0, SUPPORT_CUTOFF)
        .map_err(|e| e.at_stage("rho_X power"))?;
    let x_pow = matfun::tensor(&x_pow, &HermitianOperator::identity(vec![db]));
    let outer = x_pow.matrix() * reduced.matrix() * x_pow.matrix();
    let outer = HermitianOperator::hermitized(&outer, vec![dx, db])?;

    let tr = matfun::trace_pow_psd(&outer, 1.0 / alpha, SUPPORT_CUTOFF)
        .map_err(|e| e.at_stage("outer power"))?;
    if !(tr > 0.0) || !tr.is_finite() {
        return Err(Error::Numerical {
            stage: "outer power",
            detail: format!("trace {tr} is not positive"),
        });
    }
    Ok(alpha / (alpha - 1.0) * tr.log2())
}
