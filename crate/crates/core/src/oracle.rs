//! Independent reference evaluation of one renewal cycle.
//!
//! A cycle starts when a fresh link is stored and ends when the link is consumed or lost to a
//! failed purification. Rather than enumerating the exponentially many trajectories of a cycle one
//! by one, the oracle pushes their probability mass forward tick by tick. Because every protocol
//! acts linearly on `(1, h)` after multiplying the jump by its success probability, the pair
//! `(P(alive), E[h; alive])` with `h = F - 1/4` is propagated exactly over all branches.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::{binomial_weights, SystemParams};
use crate::policy::PurificationPolicy;

/// Default cap on the number of ticks followed per cycle.
pub const DEFAULT_TICK_BUDGET: usize = 10_000_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleResult {
    pub availability: f64,
    pub availability_bracket: (f64, f64),
    pub avg_fidelity: f64,
    pub fidelity_bracket: (f64, f64),
    pub expected_occupied_time: f64,
    pub occupied_time_bracket: (f64, f64),
    pub expected_generation_time: f64,
    /// Probability that the cycle is still running when enumeration stops.
    pub residual_mass: f64,
    pub ticks: usize,
}

pub fn cycle_oracle(
    params: &SystemParams,
    policy: &PurificationPolicy,
    epsilon: f64,
) -> Result<OracleResult> {
    cycle_oracle_with_budget(params, policy, epsilon, DEFAULT_TICK_BUDGET)
}

pub fn cycle_oracle_with_budget(
    params: &SystemParams,
    policy: &PurificationPolicy,
    epsilon: f64,
    max_ticks: usize,
) -> Result<OracleResult> {
    params.validate()?;
    if params.p_con <= 0.0 {
        return Err(Error::Domain("the cycle oracle needs p_con > 0".into()));
    }
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::Domain(format!("tail tolerance {epsilon} must be positive")));
    }
    if policy.n() != params.n {
        return Err(Error::Config(format!(
            "policy is defined for n = {} but the system has n = {}",
            policy.n(),
            params.n
        )));
    }
    let p_star = params.p_gen_star();
    if p_star <= 0.0 {
        return Err(Error::NoGeneration);
    }

    let weights = binomial_weights(params.n, params.p_gen);
    let decay = (-params.gamma).exp();
    let pc = params.p_con;
    let stay = (1.0 - pc) * (1.0 - params.q * p_star);
    let attempt = (1.0 - pc) * params.q;

    let mut alive = 1.0;
    let mut h_mass = params.h_new();
    let mut occupied = 0.0;
    let mut consumed = 0.0;
    let mut reward = 0.0;
    let mut ticks = 0;
    let target = epsilon / 10.0;

    while alive >= target {
        if ticks == max_ticks {
            let partial = summarize(occupied, consumed, reward, alive, pc, p_star, ticks);
            return Err(Error::BudgetExceeded {
                steps: ticks,
                residual: alive,
                partial: Box::new(partial),
            });
        }
        ticks += 1;
        occupied += alive;
        let decayed = decay * h_mass;
        consumed += pc * alive;
        reward += pc * (decayed + 0.25 * alive);

        let mut next_alive = stay * alive;
        let mut next_h = stay * decayed;
        for (k, w) in weights.iter().enumerate().skip(1) {
            let p = policy.protocol(k);
            let scale = attempt * w;
            next_alive += scale * (p.c * decayed + p.d * alive);
            next_h += scale * (p.a * decayed + p.b * alive);
        }
        alive = next_alive;
        h_mass = next_h;
    }
    Ok(summarize(occupied, consumed, reward, alive, pc, p_star, ticks))
}

fn summarize(
    occupied: f64,
    consumed: f64,
    reward: f64,
    residual: f64,
    p_con: f64,
    p_star: f64,
    ticks: usize,
) -> OracleResult {
    let t_gen = 1.0 / p_star;
    let avail = |t: f64| t / (t_gen + t);
    // A surviving link is consumed with probability p_con on every further tick.
    let t_hi = occupied + residual / p_con;
    let fid = if consumed > 0.0 { reward / consumed } else { f64::NAN };
    let with_tail_low = (reward + 0.25 * residual) / (consumed + residual);
    let with_tail_high = (reward + residual) / (consumed + residual);
    OracleResult {
        availability: avail(occupied),
        availability_bracket: (avail(occupied), avail(t_hi)),
        avg_fidelity: fid,
        fidelity_bracket: (fid.min(with_tail_low), fid.max(with_tail_high)),
        expected_occupied_time: occupied,
        occupied_time_bracket: (occupied, t_hi),
        expected_generation_time: t_gen,
        residual_mass: residual,
        ticks,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::evaluate;
    use crate::protocol::PurificationProtocol;
    use crate::state::BellDiagonalState;

    fn params(n: usize, p_gen: f64, f_new: f64, p_con: f64, gamma: f64, q: f64) -> SystemParams {
        SystemParams {
            n,
            p_gen,
            p_con,
            gamma,
            q,
            new_link: BellDiagonalState::werner(f_new).unwrap(),
        }
    }

    #[test]
    fn replacement_hand_value() {
        let p = params(1, 1.0, 0.8, 0.5, 0.1, 1.0);
        let rep = PurificationPolicy::replacement(1, 0.8).unwrap();
        let r = cycle_oracle(&p, &rep, 1e-12).unwrap();
        assert!((r.availability - 2.0 / 3.0).abs() < 1e-11);
        assert!(r.availability_bracket.1 - r.availability_bracket.0 < 1e-11);
    }

    #[test]
    fn saturated_edge_case() {
        let p = params(2, 1.0, 0.8, 1.0, 0.3, 1.0);
        let dej = PurificationPolicy::dejmps(2, &BellDiagonalState::werner(0.8).unwrap()).unwrap();
        let r = cycle_oracle(&p, &dej, 1e-10).unwrap();
        assert_eq!(r.ticks, 1);
        assert!((r.availability - 0.5).abs() < 1e-15);
        let expected = (-0.3f64).exp() * 0.55 + 0.25;
        assert!((r.avg_fidelity - expected).abs() < 1e-15);
    }

    #[test]
    fn budget_and_domain_errors() {
        let p = params(2, 0.5, 0.8, 0.01, 0.0, 0.0);
        let id = PurificationPolicy::identity(2).unwrap();
        match cycle_oracle_with_budget(&p, &id, 1e-10, 50) {
            Err(Error::BudgetExceeded { steps, partial, .. }) => {
                assert_eq!(steps, 50);
                assert!(partial.occupied_time_bracket.0 <= 100.0);
                assert!(partial.occupied_time_bracket.1 >= 100.0 - 1e-9);
            }
            other => panic!("expected budget error, got {other:?}"),
        }
        let p = params(2, 0.5, 0.8, 0.0, 0.0, 1.0);
        assert!(cycle_oracle(&p, &id, 1e-10).is_err());
    }

    /// Walks every trajectory explicitly, dropping branches whose probability falls below `cut`.
    fn brute_force(p: &SystemParams, policy: &PurificationPolicy, cut: f64) -> (f64, f64, f64) {
        struct Acc {
            occupied: f64,
            consumed: f64,
            reward: f64,
        }
        fn walk(
            p: &SystemParams,
            policy: &PurificationPolicy,
            weights: &[f64],
            f: f64,
            prob: f64,
            cut: f64,
            acc: &mut Acc,
        ) {
            if prob < cut {
                return;
            }
            acc.occupied += prob;
            let decayed = (f - 0.25) * (-p.gamma).exp() + 0.25;
            acc.consumed += prob * p.p_con;
            acc.reward += prob * p.p_con * decayed;
            let rest = prob * (1.0 - p.p_con);
            walk(p, policy, weights, decayed, rest * weights[0], cut, acc);
            for (k, w) in weights.iter().enumerate().skip(1) {
                walk(p, policy, weights, decayed, rest * w * (1.0 - p.q), cut, acc);
                let proto: &PurificationProtocol = policy.protocol(k);
                let succ = proto.success_prob(decayed);
                if succ > 0.0 {
                    let next = proto.jump(decayed).unwrap();
                    walk(p, policy, weights, next, rest * w * p.q * succ, cut, acc);
                }
            }
        }
        let weights = binomial_weights(p.n, p.p_gen);
        let mut acc = Acc {
            occupied: 0.0,
            consumed: 0.0,
            reward: 0.0,
        };
        walk(p, policy, &weights, p.f_new(), 1.0, cut, &mut acc);
        let ps = p.p_gen_star();
        (
            acc.occupied / (1.0 / ps + acc.occupied),
            acc.reward / acc.consumed,
            acc.occupied,
        )
    }

    #[test]
    fn matches_explicit_trajectory_walk() {
        let w = BellDiagonalState::werner(0.75).unwrap();
        let cases = [
            (params(1, 0.6, 0.75, 0.6, 0.2, 0.7), PurificationPolicy::dejmps(1, &w).unwrap()),
            (
                params(2, 0.5, 0.75, 0.7, 0.1, 1.0),
                PurificationPolicy::concatenated_dejmps(2, &w, 2, false).unwrap(),
            ),
        ];
        for (p, policy) in cases {
            let (a, f, t) = brute_force(&p, &policy, 1e-13);
            let r = cycle_oracle(&p, &policy, 1e-13).unwrap();
            assert!((r.expected_occupied_time - t).abs() < 1e-6, "{t} vs {r:?}");
            assert!((r.availability - a).abs() < 1e-6);
            assert!((r.avg_fidelity - f).abs() < 1e-6);
            let closed = evaluate(&p, &policy).unwrap().metrics;
            assert!((closed.availability - r.availability).abs() < 1e-10);
            assert!((closed.avg_fidelity - r.avg_fidelity).abs() < 1e-10);
        }
    }
}
