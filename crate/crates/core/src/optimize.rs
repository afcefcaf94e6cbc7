//! Deterministic two-parameter minimization: a coarse grid followed by
//! Nelder–Mead refinement from the best grid point.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerSettings {
    /// Grid points over θ ∈ [0, π], endpoints included.
    pub grid_theta: usize,
    /// Grid points over φ ∈ [0, 2π).
    pub grid_phi: usize,
    /// Refinement stops once the simplex values agree to this absolute tolerance.
    pub refine_tol: f64,
    pub max_iters: usize,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        Self {
            grid_theta: 32,
            grid_phi: 64,
            refine_tol: 1e-8,
            max_iters: 200,
        }
    }
}

impl OptimizerSettings {
    pub fn check(&self) -> Result<()> {
        if self.grid_theta < 2 || self.grid_phi < 1 {
            return Err(Error::Config(format!(
                "optimizer grid must be at least 2x1, got {}x{}",
                self.grid_theta, self.grid_phi
            )));
        }
        if !(self.refine_tol > 0.0) {
            return Err(Error::Config(format!(
                "refine_tol must be positive, got {}",
                self.refine_tol
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum {
    pub point: [f64; 2],
    pub value: f64,
    pub evaluations: usize,
    pub converged: bool,
}

/// Grid search over `[0, π] × [0, 2π)` then simplex refinement.
///
/// Grid points are evaluated in parallel; ties go to the lowest grid index so
/// the result does not depend on scheduling.
pub fn minimize_sphere<F>(objective: F, settings: &OptimizerSettings) -> Result<Minimum>
where
    F: Fn(f64, f64) -> Result<f64> + Sync,
{
    settings.check()?;
    let (nt, np) = (settings.grid_theta, settings.grid_phi);
    let theta_step = std::f64::consts::PI / (nt - 1) as f64;
    let phi_step = std::f64::consts::TAU / np as f64;
    let values: Vec<f64> = (0..nt * np)
        .into_par_iter()
        .map(|k| objective((k / np) as f64 * theta_step, (k % np) as f64 * phi_step))
        .collect::<Result<_>>()?;
    let (best, &best_value) = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1).then(a.0.cmp(&b.0)))
        .expect("non-empty grid");
    let start = [
        (best / np) as f64 * theta_step,
        (best % np) as f64 * phi_step,
    ];

    let refined = nelder_mead(
        |p| objective(p[0], p[1]),
        start,
        best_value,
        [theta_step * 0.5, phi_step * 0.5],
        settings.refine_tol,
        settings.max_iters,
    )?;
    Ok(Minimum {
        evaluations: refined.evaluations + values.len(),
        ..refined
    })
}

/// Nelder–Mead on two parameters with standard coefficients.
fn nelder_mead<F>(
    f: F,
    start: [f64; 2],
    start_value: f64,
    step: [f64; 2],
    tol: f64,
    max_iters: usize,
) -> Result<Minimum>
where
    F: Fn([f64; 2]) -> Result<f64>,
{
    const REFLECT: f64 = 1.0;
    const EXPAND: f64 = 2.0;
    const CONTRACT: f64 = 0.5;
    const SHRINK: f64 = 0.5;

    let mut evaluations = 0usize;
    let mut eval = |p: [f64; 2]| -> Result<f64> {
        evaluations += 1;
        f(p)
    };

    let mut simplex = [
        (start, start_value),
        ([start[0] + step[0], start[1]], 0.0),
        ([start[0], start[1] + step[1]], 0.0),
    ];
    for vertex in simplex.iter_mut().skip(1) {
        vertex.1 = eval(vertex.0)?;
    }

    let mut converged = false;
    for _ in 0..max_iters {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let spread = simplex[2].1 - simplex[0].1;
        let size = simplex
            .iter()
            .skip(1)
            .map(|v| {
                (v.0[0] - simplex[0].0[0])
                    .abs()
                    .max((v.0[1] - simplex[0].0[1]).abs())
            })
            .fold(0.0, f64::max);
        if spread <= tol || size < 1e-12 {
            converged = true;
            break;
        }

        let centroid = [
            0.5 * (simplex[0].0[0] + simplex[1].0[0]),
            0.5 * (simplex[0].0[1] + simplex[1].0[1]),
        ];
        let worst = simplex[2];
        let along = |coef: f64| {
            [
                centroid[0] + coef * (centroid[0] - worst.0[0]),
                centroid[1] + coef * (centroid[1] - worst.0[1]),
            ]
        };

        let reflected = along(REFLECT);
        let fr = eval(reflected)?;
        if fr < simplex[0].1 {
            let expanded = along(EXPAND);
            let fe = eval(expanded)?;
            simplex[2] = if fe < fr {
                (expanded, fe)
            } else {
                (reflected, fr)
            };
        } else if fr < simplex[1].1 {
            simplex[2] = (reflected, fr);
        } else {
            let (contracted, fc) = if fr < worst.1 {
                let p = along(CONTRACT * REFLECT);
                (p, eval(p)?)
            } else {
                let p = along(-CONTRACT);
                (p, eval(p)?)
            };
            if fc < worst.1.min(fr) {
                simplex[2] = (contracted, fc);
            } else {
                let best = simplex[0].0;
                for vertex in simplex.iter_mut().skip(1) {
                    let p = [
                        best[0] + SHRINK * (vertex.0[0] - best[0]),
                        best[1] + SHRINK * (vertex.0[1] - best[1]),
                    ];
                    *vertex = (p, eval(p)?);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    Ok(Minimum {
        point: simplex[0].0,
        value: simplex[0].1,
        evaluations,
        converged,
    })
}
