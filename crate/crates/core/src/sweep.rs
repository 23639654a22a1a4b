//! Parameter sweeps and availability/fidelity frontiers.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytics::{bound_violations, evaluate, Bounds, Metrics};
use crate::error::{domain, Error, Result};
use crate::params::SystemParams;
use crate::policy::{PolicyConfig, PolicySpec};
use crate::state::BellDiagonalState;

/// Slack used when re-checking bound containment on emitted rows.
pub const BOUND_SLACK: f64 = 1e-9;
/// Default number of purification probabilities on a frontier.
pub const DEFAULT_FRONTIER_POINTS: usize = 201;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    Q,
    PGen,
    Gamma,
    PCon,
    FNew,
}

impl SweepVariable {
    pub fn name(&self) -> &'static str {
        match self {
            SweepVariable::Q => "q",
            SweepVariable::PGen => "p_gen",
            SweepVariable::Gamma => "gamma",
            SweepVariable::PCon => "p_con",
            SweepVariable::FNew => "f_new",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "q" => Ok(Self::Q),
            "p_gen" => Ok(Self::PGen),
            "gamma" => Ok(Self::Gamma),
            "p_con" => Ok(Self::PCon),
            "f_new" => Ok(Self::FNew),
            other => Err(Error::Config(format!(
                "unknown sweep variable '{other}' (expected q, p_gen, gamma, p_con or f_new)"
            ))),
        }
    }

    /// Copy of `params` with this variable set to `value`. Sweeping `f_new` makes the fresh link Werner.
    pub fn apply(&self, params: &SystemParams, value: f64) -> Result<SystemParams> {
        let mut p = *params;
        match self {
            SweepVariable::Q => p.q = value,
            SweepVariable::PGen => p.p_gen = value,
            SweepVariable::Gamma => p.gamma = value,
            SweepVariable::PCon => p.p_con = value,
            SweepVariable::FNew => p.new_link = BellDiagonalState::werner(value)?,
        }
        p.validate()?;
        Ok(p)
    }
}

/// `steps` evenly spaced points from `from` to `to` inclusive.
pub fn linspace(from: f64, to: f64, steps: usize) -> Result<Vec<f64>> {
    match steps {
        0 => Err(domain("a grid needs at least one point")),
        1 => Ok(vec![from]),
        _ => Ok((0..steps)
            .map(|i| {
                if i == steps - 1 {
                    to
                } else {
                    from + (to - from) * i as f64 / (steps - 1) as f64
                }
            })
            .collect()),
    }
}

/// Metrics of a successfully evaluated sweep point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RowValues {
    pub metrics: Metrics,
    pub bounds: Bounds,
    /// Bound violations beyond [`BOUND_SLACK`]; expected empty.
    pub violations: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub variable: SweepVariable,
    pub value: f64,
    pub policy_label: String,
    pub outcome: Result<RowValues>,
}

fn evaluate_point(params: &SystemParams, policy: &PolicyConfig) -> Result<(String, RowValues)> {
    let built = policy.build(params.n, &params.new_link)?;
    let e = evaluate(params, &built)?;
    let check_lower = built.improves_fresh(params.f_new());
    let violations = bound_violations(&e.metrics, &e.bounds, check_lower, BOUND_SLACK);
    Ok((
        built.label().to_string(),
        RowValues {
            metrics: e.metrics,
            bounds: e.bounds,
            violations,
        },
    ))
}

/// Evaluates `policy` at every grid value of `variable`. Failures are recorded per row.
pub fn sweep(
    params: &SystemParams,
    policy: &PolicyConfig,
    variable: SweepVariable,
    grid: &[f64],
) -> Vec<SweepRow> {
    let fallback_label = policy
        .build(params.n, &params.new_link)
        .map(|p| p.label().to_string())
        .unwrap_or_else(|_| policy.label.clone().unwrap_or_default());
    grid.par_iter()
        .map(|&value| {
            let result = variable
                .apply(params, value)
                .and_then(|p| evaluate_point(&p, policy));
            match result {
                Ok((label, values)) => SweepRow {
                    variable,
                    value,
                    policy_label: label,
                    outcome: Ok(values),
                },
                Err(e) => SweepRow {
                    variable,
                    value,
                    policy_label: fallback_label.clone(),
                    outcome: Err(e),
                },
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrontierRow {
    pub policy_label: String,
    pub q: f64,
    pub availability: f64,
    pub avg_fidelity: f64,
    pub bounds: Bounds,
}

/// `(A, F_bar)` over the `q` grid for every policy. Replacement does not depend on `q` and is
/// reported once at `q = 1`. Any bound violation aborts.
pub fn frontier(
    params: &SystemParams,
    policies: &[PolicyConfig],
    q_grid: &[f64],
) -> Result<Vec<FrontierRow>> {
    let mut rows = Vec::new();
    for policy in policies {
        let grid: &[f64] = if matches!(policy.spec, PolicySpec::Replacement) {
            &[1.0]
        } else {
            q_grid
        };
        let points: Vec<Result<(String, RowValues, f64)>> = grid
            .par_iter()
            .map(|&q| {
                let p = SweepVariable::Q.apply(params, q)?;
                let (label, values) = evaluate_point(&p, policy)?;
                Ok((label, values, q))
            })
            .collect();
        for point in points {
            let (label, values, q) = point?;
            if !values.violations.is_empty() {
                return Err(Error::Evaluation(format!(
                    "bound containment failed for '{label}' at q = {q}: {}",
                    values.violations.join("; ")
                )));
            }
            rows.push(FrontierRow {
                policy_label: label,
                q,
                availability: values.metrics.availability,
                avg_fidelity: values.metrics.avg_fidelity,
                bounds: values.bounds,
            });
        }
    }
    Ok(rows)
}
