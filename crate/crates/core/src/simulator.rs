//! Tick-level Monte-Carlo simulation of the buffer.
//!
//! Each tick: a consumption request arrives with probability `p_con` and, if a link is stored,
//! consumes it and ends the tick. Otherwise `k ~ Binomial(n, p_gen)` fresh links appear. An empty
//! memory stores one of them (it does not decay this tick); an occupied memory attempts
//! purification with probability `q`, decaying first and then succeeding with `p_k(F)`. An
//! occupied memory that does not purify decays by one tick.
//!
//! Replication `i` draws from `ChaCha8Rng::seed_from_u64(seed)` with its stream set to `i`, so
//! results do not depend on how replications are scheduled across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::params::SystemParams;
use crate::policy::PurificationPolicy;

/// A run keeps going past `max_steps` (up to this multiple) until enough links were consumed.
pub const MAX_EXTENSION_FACTOR: u64 = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub max_steps: u64,
    pub min_consumption_events: u64,
    pub replications: u32,
    pub seed: u64,
    pub warmup_steps: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            max_steps: 1_000_000,
            min_consumption_events: 0,
            replications: 10,
            seed: 0,
            warmup_steps: 0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_steps == 0 {
            return Err(domain("max_steps must be >= 1"));
        }
        if self.replications == 0 {
            return Err(domain("replications must be >= 1"));
        }
        Ok(())
    }
}

/// What happened during a tick.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Event {
    None,
    GenStore,
    PurifyOk,
    PurifyFail,
    Consume,
    RequestUnserved,
}

impl Event {
    pub fn as_str(&self) -> &'static str {
        match self {
            Event::None => "none",
            Event::GenStore => "gen_store",
            Event::PurifyOk => "purify_ok",
            Event::PurifyFail => "purify_fail",
            Event::Consume => "consume",
            Event::RequestUnserved => "request_unserved",
        }
    }
}

/// Counters accumulated over a trajectory.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Counters {
    pub steps: u64,
    pub requests: u64,
    pub served: u64,
    pub consumed_fidelity_sum: f64,
    /// Ticks that started with a link in memory.
    pub occupied_steps: u64,
    /// Sum of the decayed fidelity over occupied ticks.
    pub occupied_fidelity_sum: f64,
    pub purification_attempts: u64,
    pub purification_successes: u64,
    pub stores: u64,
}

/// Live state of one trajectory; `fidelity == 0` means the memory is empty.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimState {
    pub t: u64,
    pub fidelity: f64,
    pub counters: Counters,
}

impl Default for SimState {
    fn default() -> Self {
        Self::new()
    }
}

impl SimState {
    pub fn new() -> Self {
        Self {
            t: 0,
            fidelity: 0.0,
            counters: Counters::default(),
        }
    }
}

/// Pre-validated per-run constants.
struct Dynamics<'a> {
    params: &'a SystemParams,
    policy: &'a PurificationPolicy,
    binomial: Binomial,
    decay: f64,
}

impl<'a> Dynamics<'a> {
    fn new(params: &'a SystemParams, policy: &'a PurificationPolicy) -> Result<Self> {
        params.validate()?;
        if policy.n() != params.n {
            return Err(Error::Config(format!(
                "policy is defined for n = {} but the system has n = {}",
                policy.n(),
                params.n
            )));
        }
        let binomial = Binomial::new(params.n as u64, params.p_gen)
            .map_err(|e| domain(format!("binomial sampler: {e}")))?;
        Ok(Self {
            params,
            policy,
            binomial,
            decay: (-params.gamma).exp(),
        })
    }

    fn step<R: Rng>(&self, state: &mut SimState, rng: &mut R) -> Event {
        let p = self.params;
        let c = &mut state.counters;
        state.t += 1;
        c.steps += 1;
        let occupied = state.fidelity > 0.0;
        let decayed = if occupied && self.decay < 1.0 {
            (state.fidelity - 0.25) * self.decay + 0.25
        } else if occupied {
            state.fidelity
        } else {
            0.0
        };
        if occupied {
            c.occupied_steps += 1;
            c.occupied_fidelity_sum += decayed;
        }

        let mut event = Event::None;
        if rng.random::<f64>() < p.p_con {
            c.requests += 1;
            if occupied {
                c.served += 1;
                c.consumed_fidelity_sum += decayed;
                state.fidelity = 0.0;
                return Event::Consume;
            }
            event = Event::RequestUnserved;
        }

        let k = self.binomial.sample(rng) as usize;
        if k >= 1 && !occupied {
            state.fidelity = p.f_new();
            c.stores += 1;
            return Event::GenStore;
        }
        if k >= 1 && rng.random::<f64>() < p.q {
            c.purification_attempts += 1;
            let proto = self.policy.protocol(k);
            let success = proto.success_prob(decayed);
            if success > 0.0 && rng.random::<f64>() < success {
                c.purification_successes += 1;
                state.fidelity = 0.25 + (proto.a * (decayed - 0.25) + proto.b) / success;
                return Event::PurifyOk;
            }
            state.fidelity = 0.0;
            return Event::PurifyFail;
        }
        if occupied {
            state.fidelity = decayed;
        }
        event
    }
}

/// Advances `state` by one tick and returns what happened.
pub fn step<R: Rng>(
    state: &mut SimState,
    params: &SystemParams,
    policy: &PurificationPolicy,
    rng: &mut R,
) -> Result<Event> {
    Ok(Dynamics::new(params, policy)?.step(state, rng))
}

/// Availability and fidelity estimates from one set of counters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimates {
    /// Fraction of requests that found a link; `None` without requests.
    pub availability_consumer: Option<f64>,
    /// Mean fidelity of consumed links; `None` without consumption.
    pub fidelity_consumer: Option<f64>,
    /// Fraction of ticks that started with a link in memory.
    pub availability_time: Option<f64>,
    /// Mean decayed fidelity over occupied ticks.
    pub fidelity_time: Option<f64>,
}

pub fn estimate_metrics(c: &Counters) -> Estimates {
    let ratio = |num: f64, den: u64| (den > 0).then(|| num / den as f64);
    Estimates {
        availability_consumer: ratio(c.served as f64, c.requests),
        fidelity_consumer: ratio(c.consumed_fidelity_sum, c.served),
        availability_time: ratio(c.occupied_steps as f64, c.steps),
        fidelity_time: ratio(c.occupied_fidelity_sum, c.occupied_steps),
    }
}

/// Pooled value, replication standard error and per-replication values of one estimator.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimatorSummary {
    pub pooled: Option<f64>,
    pub standard_error: f64,
    pub per_replication: Vec<Option<f64>>,
}

impl EstimatorSummary {
    fn from_values(pooled: Option<f64>, per_replication: Vec<Option<f64>>) -> Self {
        let defined: Vec<f64> = per_replication.iter().flatten().copied().collect();
        let r = defined.len();
        let standard_error = if r >= 2 {
            let mean = defined.iter().sum::<f64>() / r as f64;
            let var = defined.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (r - 1) as f64;
            (var / r as f64).sqrt()
        } else {
            0.0
        };
        Self {
            pooled,
            standard_error,
            per_replication,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimResult {
    pub policy_label: String,
    pub config: SimConfig,
    pub availability_consumer: EstimatorSummary,
    pub fidelity_consumer: EstimatorSummary,
    pub availability_time: EstimatorSummary,
    pub fidelity_time: EstimatorSummary,
    pub totals: Counters,
    pub replication_counters: Vec<Counters>,
    pub diagnostics: Vec<String>,
}

fn run_replication(dynamics: &Dynamics<'_>, config: &SimConfig, index: u32) -> Counters {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(index as u64);
    let mut state = SimState::new();
    for _ in 0..config.warmup_steps {
        dynamics.step(&mut state, &mut rng);
    }
    state.counters = Counters::default();
    let hard_cap = config.max_steps.saturating_mul(MAX_EXTENSION_FACTOR);
    while state.counters.steps < config.max_steps
        || (state.counters.served < config.min_consumption_events
            && state.counters.steps < hard_cap)
    {
        dynamics.step(&mut state, &mut rng);
    }
    state.counters
}

fn add(total: &mut Counters, c: &Counters) {
    total.steps += c.steps;
    total.requests += c.requests;
    total.served += c.served;
    total.consumed_fidelity_sum += c.consumed_fidelity_sum;
    total.occupied_steps += c.occupied_steps;
    total.occupied_fidelity_sum += c.occupied_fidelity_sum;
    total.purification_attempts += c.purification_attempts;
    total.purification_successes += c.purification_successes;
    total.stores += c.stores;
}

/// Runs independent replications in parallel and pools them in replication order.
pub fn simulate(
    params: &SystemParams,
    policy: &PurificationPolicy,
    config: &SimConfig,
) -> Result<SimResult> {
    config.validate()?;
    let dynamics = Dynamics::new(params, policy)?;
    let per_rep: Vec<Counters> = (0..config.replications)
        .into_par_iter()
        .map(|i| run_replication(&dynamics, config, i))
        .collect();

    let mut totals = Counters::default();
    for c in &per_rep {
        add(&mut totals, c);
    }
    let pooled = estimate_metrics(&totals);
    let each: Vec<Estimates> = per_rep.iter().map(estimate_metrics).collect();
    let column = |f: fn(&Estimates) -> Option<f64>| each.iter().map(f).collect::<Vec<_>>();

    let mut diagnostics = Vec::new();
    if totals.served == 0 {
        diagnostics.push("no consumption request was served: consumed fidelity is undefined".into());
    }
    if totals.requests == 0 {
        diagnostics.push("no consumption request arrived: consumer availability is undefined".into());
    }
    if config.min_consumption_events > 0
        && per_rep.iter().any(|c| c.served < config.min_consumption_events)
    {
        diagnostics.push(format!(
            "some replications served fewer than {} requests within {} steps",
            config.min_consumption_events,
            config.max_steps.saturating_mul(MAX_EXTENSION_FACTOR)
        ));
    }

    Ok(SimResult {
        policy_label: policy.label().to_string(),
        config: *config,
        availability_consumer: EstimatorSummary::from_values(
            pooled.availability_consumer,
            column(|e| e.availability_consumer),
        ),
        fidelity_consumer: EstimatorSummary::from_values(
            pooled.fidelity_consumer,
            column(|e| e.fidelity_consumer),
        ),
        availability_time: EstimatorSummary::from_values(
            pooled.availability_time,
            column(|e| e.availability_time),
        ),
        fidelity_time: EstimatorSummary::from_values(
            pooled.fidelity_time,
            column(|e| e.fidelity_time),
        ),
        totals,
        replication_counters: per_rep,
        diagnostics,
    })
}

/// One row of a trajectory dump.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRow {
    pub t: u64,
    pub fidelity: f64,
    pub event: Event,
}

/// Single trajectory of `steps` ticks using replication stream 0 of `seed`.
pub fn trace(
    params: &SystemParams,
    policy: &PurificationPolicy,
    seed: u64,
    steps: u64,
) -> Result<Vec<TraceRow>> {
    let dynamics = Dynamics::new(params, policy)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(0);
    let mut state = SimState::new();
    let mut rows = Vec::with_capacity(steps as usize);
    for _ in 0..steps {
        let event = dynamics.step(&mut state, &mut rng);
        rows.push(TraceRow {
            t: state.t,
            fidelity: state.fidelity,
            event,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
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

    fn config(steps: u64, reps: u32, seed: u64) -> SimConfig {
        SimConfig {
            max_steps: steps,
            replications: reps,
            seed,
            ..SimConfig::default()
        }
    }

    #[test]
    fn empty_memory_without_generation_only_advances_time() {
        let p = params(2, 0.0, 0.8, 0.0, 0.1, 1.0);
        let policy = PurificationPolicy::identity(2).unwrap();
        let mut state = SimState::new();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let event = step(&mut state, &p, &policy, &mut rng).unwrap();
        assert_eq!(event, Event::None);
        assert_eq!(state.t, 1);
        assert_eq!(state.fidelity, 0.0);
    }

    #[test]
    fn consumption_clears_memory() {
        let p = params(1, 0.0, 0.8, 1.0, 0.1, 1.0);
        let policy = PurificationPolicy::identity(1).unwrap();
        let mut state = SimState::new();
        state.fidelity = 0.9;
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        assert_eq!(step(&mut state, &p, &policy, &mut rng).unwrap(), Event::Consume);
        assert_eq!(state.fidelity, 0.0);
        assert_eq!(state.counters.served, 1);
        let expected = 0.65 * (-0.1f64).exp() + 0.25;
        assert!((state.counters.consumed_fidelity_sum - expected).abs() < 1e-15);
    }

    #[test]
    fn failed_purification_discards_link() {
        let p = params(1, 1.0, 0.8, 0.0, 0.1, 1.0);
        let fail = PurificationPolicy::new(
            "fail",
            vec![crate::protocol::PurificationProtocol::ALWAYS_FAIL],
        )
        .unwrap();
        let mut state = SimState::new();
        state.fidelity = 0.9;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert_eq!(step(&mut state, &p, &fail, &mut rng).unwrap(), Event::PurifyFail);
        assert_eq!(state.fidelity, 0.0);
    }

    #[test]
    fn fresh_link_not_consumed_in_storage_tick() {
        let p = params(1, 1.0, 0.8, 1.0, 0.0, 1.0);
        let policy = PurificationPolicy::identity(1).unwrap();
        let rows = trace(&p, &policy, 4, 6).unwrap();
        let events: Vec<_> = rows.iter().map(|r| r.event).collect();
        assert_eq!(events[0], Event::GenStore);
        assert_eq!(events[1], Event::Consume);
        assert_eq!(events[2], Event::GenStore);
    }

    #[test]
    fn saturated_edge_case_is_exact() {
        let p = params(3, 1.0, 0.8, 1.0, 0.2, 0.5);
        let policy = PurificationPolicy::dejmps(3, &p.new_link).unwrap();
        let r = simulate(&p, &policy, &config(10_000, 4, 9)).unwrap();
        assert_eq!(r.availability_consumer.pooled, Some(0.5));
        assert_eq!(r.availability_time.pooled, Some(0.5));
        let expected = 0.55 * (-0.2f64).exp() + 0.25;
        assert!((r.fidelity_consumer.pooled.unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn no_purification_without_q() {
        let p = params(2, 0.7, 0.9, 0.2, 0.05, 0.0);
        let policy = PurificationPolicy::dejmps(2, &p.new_link).unwrap();
        let r = simulate(&p, &policy, &config(20_000, 3, 5)).unwrap();
        assert_eq!(r.totals.purification_attempts, 0);
    }

    #[test]
    fn zero_noise_zero_q_fidelity_is_exact() {
        let p = params(2, 0.4, 0.85, 0.3, 0.0, 0.0);
        let policy = PurificationPolicy::dejmps(2, &p.new_link).unwrap();
        let r = simulate(&p, &policy, &config(20_000, 3, 6)).unwrap();
        assert!((r.fidelity_consumer.pooled.unwrap() - 0.85).abs() < 1e-12);
        assert!(r.fidelity_consumer.standard_error < 1e-12);
    }

    #[test]
    fn never_consumed_time_average() {
        let p = params(1, 1.0, 0.9, 0.0, 0.0, 0.0);
        let policy = PurificationPolicy::identity(1).unwrap();
        let r = simulate(&p, &policy, &config(1_000, 2, 7)).unwrap();
        assert_eq!(r.availability_consumer.pooled, None);
        assert!(r.availability_time.pooled.unwrap() > 0.99);
        assert!(!r.diagnostics.is_empty());
    }

    #[test]
    fn alternating_trace_estimates() {
        let c = Counters {
            steps: 10,
            occupied_steps: 5,
            occupied_fidelity_sum: 4.0,
            ..Counters::default()
        };
        let e = estimate_metrics(&c);
        assert_eq!(e.availability_time, Some(0.5));
        assert_eq!(e.fidelity_time, Some(0.8));
        assert_eq!(e.availability_consumer, None);
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let p = params(3, 0.3, 0.9, 0.1, 0.02, 0.8);
        let policy = PurificationPolicy::dejmps(3, &p.new_link).unwrap();
        let a = simulate(&p, &policy, &config(5_000, 4, 11)).unwrap();
        let b = simulate(&p, &policy, &config(5_000, 4, 11)).unwrap();
        assert_eq!(a, b);
        let c = simulate(&p, &policy, &config(5_000, 4, 12)).unwrap();
        assert_ne!(a.totals, c.totals);
    }

    #[test]
    fn min_consumption_extends_run() {
        let p = params(1, 1.0, 0.9, 0.001, 0.0, 0.0);
        let policy = PurificationPolicy::identity(1).unwrap();
        let cfg = SimConfig {
            min_consumption_events: 5,
            ..config(100, 1, 3)
        };
        let r = simulate(&p, &policy, &cfg).unwrap();
        assert!(r.totals.steps >= 100);
        assert!(r.totals.steps <= 1000);
    }

    #[test]
    fn invalid_config_rejected() {
        let p = params(1, 1.0, 0.9, 0.1, 0.0, 0.0);
        let policy = PurificationPolicy::identity(1).unwrap();
        assert!(simulate(&p, &policy, &config(0, 1, 0)).is_err());
        assert!(simulate(&p, &policy, &config(10, 0, 0)).is_err());
    }
}
