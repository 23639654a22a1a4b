//! Closed-form availability and average consumed fidelity, plus their analytic bounds.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::{binomial_weights, SystemParams};
use crate::policy::PurificationPolicy;

/// Below this magnitude the occupied-time denominator is recomputed from the expanded form.
pub const CANCELLATION_THRESHOLD: f64 = 1e-8;

/// Binomially weighted sums of the policy coefficients over `k = 1..=n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PolicyAggregates {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub p_gen_star: f64,
}

pub fn policy_aggregates(
    policy: &PurificationPolicy,
    n: usize,
    p_gen: f64,
) -> Result<PolicyAggregates> {
    if policy.n() != n {
        return Err(Error::Config(format!(
            "policy '{}' is defined for n = {} but the system has n = {n}",
            policy.label(),
            policy.n()
        )));
    }
    let weights = binomial_weights(n, p_gen);
    let mut agg = PolicyAggregates {
        a: 0.0,
        b: 0.0,
        c: 0.0,
        d: 0.0,
        p_gen_star: crate::params::effective_generation_probability(n, p_gen),
    };
    for (k, w) in weights.iter().enumerate().skip(1) {
        let p = policy.protocol(k);
        agg.a += w * p.a;
        agg.b += w * p.b;
        agg.c += w * p.c;
        agg.d += w * p.d;
    }
    Ok(agg)
}

/// Scaled aggregates and the coefficients of both closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnalyticIntermediates {
    pub a_scaled: f64,
    pub b_scaled: f64,
    pub c_scaled: f64,
    pub d_scaled: f64,
    /// Per-tick probability that an occupied memory leaves the plain-decay branch.
    pub p_exit: f64,
    /// `e^gamma - 1`.
    pub gamma_factor: f64,
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub xi0: f64,
    pub xi1: f64,
    pub xi2: f64,
}

pub fn intermediates(params: &SystemParams, agg: &PolicyAggregates) -> AnalyticIntermediates {
    let g = params.gamma_factor();
    let pc = params.p_con;
    let ps = agg.p_gen_star;
    let u = params.q * (1.0 - pc);
    let p_exit = pc + u * ps;
    let den1 = g + p_exit;
    let (a_scaled, c_scaled) = if den1 > 0.0 {
        (u * agg.a / den1, u * agg.c / den1)
    } else {
        (f64::NAN, f64::NAN)
    };
    let (b_scaled, d_scaled) = if p_exit > 0.0 {
        (u * agg.b / p_exit, u * agg.d / p_exit)
    } else {
        (f64::NAN, f64::NAN)
    };
    AnalyticIntermediates {
        a_scaled,
        b_scaled,
        c_scaled,
        d_scaled,
        p_exit,
        gamma_factor: g,
        w: pc + u * (ps + agg.c / 4.0 - agg.d),
        x: 0.25 * (g + u * (-agg.a + 4.0 * agg.b - agg.c / 4.0 + agg.d)),
        y: u * agg.c,
        z: g + pc + u * (ps - agg.a - agg.c / 4.0),
        xi0: g * pc + pc * pc,
        xi1: 1.0 + 2.0 * g + (2.0 - g) * pc - 2.0 * pc * pc,
        xi2: 2.0 * (1.0 - pc) * (1.0 - pc),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Metrics {
    pub availability: f64,
    pub avg_fidelity: f64,
    pub expected_occupied_time: f64,
    pub expected_generation_time: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bounds {
    pub availability_lower: f64,
    pub availability_upper: f64,
    pub fidelity_lower: f64,
    pub fidelity_upper: f64,
}

/// Everything computed for one parameter point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evaluation {
    pub policy_label: String,
    pub params: SystemParams,
    pub metrics: Metrics,
    pub bounds: Bounds,
    pub aggregates: PolicyAggregates,
    pub intermediates: AnalyticIntermediates,
}

fn occupied_time(params: &SystemParams, agg: &PolicyAggregates, im: &AnalyticIntermediates) -> Result<f64> {
    if im.p_exit <= 0.0 {
        return Err(Error::Divergent(
            "no consumption and no purification attempts: the occupied period never ends".into(),
        ));
    }
    let h = params.h_new();
    let den = (1.0 - im.a_scaled) * (1.0 - im.d_scaled) - im.b_scaled * im.c_scaled;
    let value = if den.abs() >= CANCELLATION_THRESHOLD {
        (1.0 - im.a_scaled + im.c_scaled * h) / (den * im.p_exit)
    } else {
        // Same quantity with numerator and denominator multiplied by p_exit (gamma + p_exit).
        let g = im.gamma_factor;
        let pc = params.p_con;
        let ps = agg.p_gen_star;
        let uq = (1.0 - pc) * params.q;
        let eps = g + pc;
        let eps1 = ps - agg.a + h * agg.c;
        let del0 = eps * pc;
        let del1 = g * ps + 2.0 * pc * ps - pc * agg.a - (g + pc) * agg.d;
        let del2 = ps * ps - ps * agg.a - ps * agg.d + agg.a * agg.d - agg.b * agg.c;
        let numerator = eps + uq * eps1;
        let denominator = del0 + uq * del1 + uq * uq * del2;
        if denominator <= f64::EPSILON * numerator.abs() {
            return Err(Error::Divergent(
                "the buffered link is never removed: expected occupied time is infinite".into(),
            ));
        }
        numerator / denominator
    };
    if !(value.is_finite() && value > 0.0) {
        return Err(Error::Divergent(format!(
            "expected occupied time evaluated to {value}"
        )));
    }
    Ok(value)
}

fn fidelity_from(params: &SystemParams, im: &AnalyticIntermediates) -> Result<f64> {
    let f = params.f_new();
    let den = im.y * f + im.z;
    if den.is_nan() || den.abs() <= 1e-300 {
        return Err(Error::Evaluation(
            "average consumed fidelity denominator vanishes".into(),
        ));
    }
    Ok((im.w * f + im.x) / den)
}

pub fn expected_occupied_time(params: &SystemParams, policy: &PurificationPolicy) -> Result<f64> {
    params.validate()?;
    let agg = policy_aggregates(policy, params.n, params.p_gen)?;
    occupied_time(params, &agg, &intermediates(params, &agg))
}

pub fn availability(params: &SystemParams, policy: &PurificationPolicy) -> Result<f64> {
    Ok(evaluate(params, policy)?.metrics.availability)
}

pub fn avg_consumed_fidelity(params: &SystemParams, policy: &PurificationPolicy) -> Result<f64> {
    params.validate()?;
    let agg = policy_aggregates(policy, params.n, params.p_gen)?;
    fidelity_from(params, &intermediates(params, &agg))
}

/// Closed-form metrics, bounds and intermediates at one parameter point.
pub fn evaluate(params: &SystemParams, policy: &PurificationPolicy) -> Result<Evaluation> {
    params.validate()?;
    let agg = policy_aggregates(policy, params.n, params.p_gen)?;
    if agg.p_gen_star <= 0.0 {
        return Err(Error::NoGeneration);
    }
    let im = intermediates(params, &agg);
    let t_occ = occupied_time(params, &agg, &im)?;
    let t_gen = 1.0 / agg.p_gen_star;
    let availability = agg.p_gen_star * t_occ / (1.0 + agg.p_gen_star * t_occ);
    let avg_fidelity = fidelity_from(params, &im)?;
    Ok(Evaluation {
        policy_label: policy.label().to_string(),
        params: *params,
        metrics: Metrics {
            availability,
            avg_fidelity,
            expected_occupied_time: t_occ,
            expected_generation_time: t_gen,
        },
        bounds: bounds(params),
        aggregates: agg,
        intermediates: im,
    })
}

/// Policy-independent bounds for an effective generation probability `p_star`.
pub fn bounds_at(p_star: f64, p_con: f64, gamma: f64, f_new: f64) -> Bounds {
    let g = gamma.exp_m1();
    let xi0 = g * p_con + p_con * p_con;
    let xi1 = 1.0 + 2.0 * g + (2.0 - g) * p_con - 2.0 * p_con * p_con;
    let xi2 = 2.0 * (1.0 - p_con) * (1.0 - p_con);
    let a_lower = p_star * (g + p_con) / (xi0 + xi1 * p_star + xi2 * p_star * p_star);
    let a_upper = p_star / (p_star + p_con);
    let f_den = 4.0 * g + 4.0 * p_con;
    let f_lower = (g + 4.0 * f_new * p_con) / f_den;
    let f_upper = f_lower + 3.0 * (1.0 - p_con) * p_star / f_den;
    Bounds {
        availability_lower: a_lower,
        availability_upper: a_upper,
        fidelity_lower: f_lower,
        fidelity_upper: f_upper,
    }
}

pub fn bounds(params: &SystemParams) -> Bounds {
    bounds_at(params.p_gen_star(), params.p_con, params.gamma, params.f_new())
}

/// `(lower, upper)` bounds on availability.
pub fn availability_bounds(params: &SystemParams) -> (f64, f64) {
    let b = bounds(params);
    (b.availability_lower, b.availability_upper)
}

/// `(lower, upper)` bounds on average consumed fidelity. The lower bound assumes every protocol
/// maps the fresh fidelity to at least itself.
pub fn fidelity_bounds(params: &SystemParams) -> (f64, f64) {
    let b = bounds(params);
    (b.fidelity_lower, b.fidelity_upper)
}

/// Describes every bound the metrics break by more than `slack`.
pub fn bound_violations(
    metrics: &Metrics,
    bounds: &Bounds,
    check_fidelity_lower: bool,
    slack: f64,
) -> Vec<String> {
    let mut out = Vec::new();
    let (a, f) = (metrics.availability, metrics.avg_fidelity);
    if a < bounds.availability_lower - slack {
        out.push(format!("A = {a} below lower bound {}", bounds.availability_lower));
    }
    if a > bounds.availability_upper + slack {
        out.push(format!("A = {a} above upper bound {}", bounds.availability_upper));
    }
    if check_fidelity_lower && f < bounds.fidelity_lower - slack {
        out.push(format!("F_bar = {f} below lower bound {}", bounds.fidelity_lower));
    }
    if f > bounds.fidelity_upper + slack {
        out.push(format!("F_bar = {f} above upper bound {}", bounds.fidelity_upper));
    }
    out
}
