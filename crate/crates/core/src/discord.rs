//! Von Neumann and Rényi discord of two-qubit states.
//!
//! Both quantities are minimized over rank-1 projective measurements on the
//! first qubit (A), parameterized by a Bloch-sphere direction. The Rényi
//! discord evaluates the sandwiched conditional mutual information on the
//! isometry-extended state `τ_XEB`; the von Neumann discord uses the
//! post-measurement conditional entropies of B directly.

use std::f64::consts::{PI, TAU};

use crate::entropy::{self, RenyiOrder};
use crate::error::{Error, Result};
use crate::matfun::{self, CMatrix, HermitianOperator, C64, SUPPORT_CUTOFF};
use crate::optimize::{self, OptimizerSettings};
use crate::states::DensityMatrix;

/// Measurement along the Bloch direction `(sinθ cosφ, sinθ sinφ, cosθ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectiveMeasurement {
    pub theta: f64,
    pub phi: f64,
}

impl ProjectiveMeasurement {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&theta) || !(0.0..TAU).contains(&phi) {
            return Err(Error::Parameter(format!(
                "measurement angles out of range: theta = {theta}, phi = {phi}"
            )));
        }
        Ok(Self { theta, phi })
    }

    /// Canonical angles for an arbitrary real pair, via the Bloch vector.
    pub fn wrapped(theta: f64, phi: f64) -> Self {
        let [x, y, z] = bloch_vector(theta, phi);
        let theta = z.clamp(-1.0, 1.0).acos();
        let phi = if x.hypot(y) < 1e-15 {
            0.0
        } else {
            y.atan2(x).rem_euclid(TAU)
        };
        Self {
            theta,
            phi: if phi >= TAU { 0.0 } else { phi },
        }
    }

    pub fn bloch(&self) -> [f64; 3] {
        bloch_vector(self.theta, self.phi)
    }
}

fn bloch_vector(theta: f64, phi: f64) -> [f64; 3] {
    [
        theta.sin() * phi.cos(),
        theta.sin() * phi.sin(),
        theta.cos(),
    ]
}

/// `Π_0 = |n⟩⟨n|`, `Π_1 = |n⊥⟩⟨n⊥|`, written as `(I ± n·σ)/2`.
pub fn povm_elements(m: &ProjectiveMeasurement) -> [CMatrix; 2] {
    projectors(m.theta, m.phi)
}

fn projectors(theta: f64, phi: f64) -> [CMatrix; 2] {
    let [x, y, z] = bloch_vector(theta, phi);
    let element = |sign: f64| {
        CMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(0.5 * (1.0 + sign * z), 0.0),
                C64::new(0.5 * sign * x, -0.5 * sign * y),
                C64::new(0.5 * sign * x, 0.5 * sign * y),
                C64::new(0.5 * (1.0 - sign * z), 0.0),
            ],
        )
    };
    [element(1.0), element(-1.0)]
}

fn check_two_qubit(rho: &DensityMatrix) -> Result<()> {
    if rho.dims() != [2, 2] {
        return Err(Error::Dimension(format!(
            "expected a two-qubit state with dims [2, 2], got {:?}",
            rho.dims()
        )));
    }
    Ok(())
}

/// The Stinespring isometry `A⊗B → X⊗E⊗B`, E = (copy of A) ⊗ (copy of outcome).
///
/// Flat output index is `x·8 + a'·4 + k·2 + b` with the outcome copy `k = x`.
fn isometry(theta: f64, phi: f64) -> CMatrix {
    let pi = projectors(theta, phi);
    let mut v = CMatrix::zeros(16, 4);
    for (x, proj) in pi.iter().enumerate() {
        for a_out in 0..2 {
            for a_in in 0..2 {
                for b in 0..2 {
                    v[(x * 8 + a_out * 4 + x * 2 + b, a_in * 2 + b)] = proj[(a_out, a_in)];
                }
            }
        }
    }
    v
}

/// `τ_XEB = V ρ_AB V^†` with factor order (X, E, B) and dims (2, 4, 2).
pub fn isometry_apply(rho_ab: &DensityMatrix, m: &ProjectiveMeasurement) -> Result<DensityMatrix> {
    check_two_qubit(rho_ab)?;
    extend(rho_ab, m.theta, m.phi)
}

fn extend(rho_ab: &DensityMatrix, theta: f64, phi: f64) -> Result<DensityMatrix> {
    let v = isometry(theta, phi);
    let tau = HermitianOperator::hermitized(&(&v * rho_ab.matrix() * v.adjoint()), vec![2, 4, 2])?;
    Ok(DensityMatrix::trusted(tau))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscordResult {
    /// Discord in bits.
    pub value: f64,
    pub argmin: ProjectiveMeasurement,
    pub evaluations: usize,
    pub converged: bool,
}

/// Rényi discord `D_α`: the smallest `I_α(E;B|X)` over projective measurements on A.
pub fn renyi_discord(
    rho_ab: &DensityMatrix,
    order: RenyiOrder,
    settings: &OptimizerSettings,
) -> Result<DiscordResult> {
    check_two_qubit(rho_ab)?;
    if order.value() > 2.0 {
        return Err(Error::Parameter(format!(
            "Renyi discord needs alpha <= 2, got {}",
            order.value()
        )));
    }
    if order.is_von_neumann() {
        return vn_discord(rho_ab, settings);
    }
    let objective = RenyiObjective::new(rho_ab, order)?;
    minimize(|theta, phi| objective.eval(theta, phi), settings)
}

/// `I_α(E;B|X)` of the extended state as a function of the measurement angles.
///
/// For the isometry `V = W ⊗ I_B`, `τ^α = V ρ^α V^†` and
/// `ρ_EX^p = W ρ_A^p W^†`, so the sandwiched operator equals
/// `V (ρ_A^s ⊗ I) ρ^α (ρ_A^s ⊗ I) V^†` with `s = (1-α)/2`. The 4×4 middle
/// factor does not depend on the measurement and is computed once.
#[derive(Debug, Clone)]
pub struct RenyiObjective {
    rho_ab: CMatrix,
    middle: CMatrix,
    alpha: f64,
}

impl RenyiObjective {
    pub fn new(rho_ab: &DensityMatrix, order: RenyiOrder) -> Result<Self> {
        check_two_qubit(rho_ab)?;
        let alpha = order.value();
        let rho_a = matfun::partial_trace(rho_ab, &[0])?;
        let a_pow = matfun::mat_pow_psd(&rho_a, (1.0 - alpha) / 2.0, SUPPORT_CUTOFF)
            .map_err(|e| e.at_stage("rho_A power"))?;
        let a_pow = a_pow.matrix().kronecker(&CMatrix::identity(2, 2));
        let rho_pow = matfun::mat_pow_psd(rho_ab, alpha, SUPPORT_CUTOFF)
            .map_err(|e| e.at_stage("rho_AB power"))?;
        Ok(Self {
            rho_ab: rho_ab.matrix().clone(),
            middle: &a_pow * rho_pow.matrix() * &a_pow,
            alpha,
        })
    }

    pub fn eval(&self, theta: f64, phi: f64) -> Result<f64> {
        let v = isometry(theta, phi);
        let tau = HermitianOperator::hermitized(&(&v * &self.rho_ab * v.adjoint()), vec![2, 4, 2])?;
        let rho_x = matfun::partial_trace(&tau, &[0])?;
        let inner =
            HermitianOperator::hermitized(&(&v * &self.middle * v.adjoint()), vec![2, 4, 2])?;
        let reduced =
            matfun::partial_trace(&inner, &[0, 2]).map_err(|e| e.at_stage("trace out E"))?;
        entropy::sandwiched_outer(&reduced, &rho_x, self.alpha, 2, 2)
    }
}

/// `I_α(E;B|X)` for one measurement; the quantity [`renyi_discord`] minimizes.
pub fn renyi_objective(
    rho_ab: &DensityMatrix,
    m: &ProjectiveMeasurement,
    order: RenyiOrder,
) -> Result<f64> {
    entropy::renyi_cmi(&isometry_apply(rho_ab, m)?, order)
}

/// Von Neumann discord `S(A) - S(AB) + min Σ_k p_k S(ρ_B|k)`.
pub fn vn_discord(rho_ab: &DensityMatrix, settings: &OptimizerSettings) -> Result<DiscordResult> {
    check_two_qubit(rho_ab)?;
    let s_a = entropy::von_neumann_entropy(&rho_ab.reduce(&[0])?)?;
    let s_ab = entropy::von_neumann_entropy(rho_ab)?;
    let mut result = minimize(
        |theta, phi| conditional_entropy_after_measurement(rho_ab, theta, phi),
        settings,
    )?;
    result.value += s_a - s_ab;
    Ok(result)
}

/// `Σ_k p_k S(ρ_B|k)` for the measurement along (θ, φ).
fn conditional_entropy_after_measurement(
    rho_ab: &DensityMatrix,
    theta: f64,
    phi: f64,
) -> Result<f64> {
    let id = CMatrix::identity(2, 2);
    let mut total = 0.0;
    for proj in projectors(theta, phi) {
        let lifted = proj.kronecker(&id);
        let post = &lifted * rho_ab.matrix() * &lifted;
        let p = post.trace().re;
        if p <= 1e-14 {
            continue;
        }
        let post = HermitianOperator::hermitized(&post.map(|z| z / p), vec![2, 2])?;
        let rho_b = DensityMatrix::trusted(matfun::partial_trace(&post, &[1])?);
        total += p * entropy::von_neumann_entropy(&rho_b)?;
    }
    Ok(total)
}

fn minimize<F>(objective: F, settings: &OptimizerSettings) -> Result<DiscordResult>
where
    F: Fn(f64, f64) -> Result<f64> + Sync,
{
    let m = optimize::minimize_sphere(objective, settings)?;
    Ok(DiscordResult {
        value: m.value,
        argmin: ProjectiveMeasurement::wrapped(m.point[0], m.point[1]),
        evaluations: m.evaluations,
        converged: m.converged,
    })
}
