#![allow(dead_code)]

use gnb_core::{BellDiagonalState, PurificationPolicy, PurificationProtocol, SystemParams};
use rand::Rng;

/// Uniform draw from `[lo, hi]`, tolerating a degenerate interval.
fn uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    if hi <= lo {
        lo
    } else {
        rng.random_range(lo..=hi)
    }
}

/// Samples the admissible region constraint by constraint; every interval is non-empty.
pub fn random_protocol<R: Rng>(rng: &mut R) -> PurificationProtocol {
    let d = uniform(rng, 0.0, 1.0);
    let c = uniform(rng, -4.0 / 3.0 * d, 4.0 / 3.0 * (1.0 - d));
    let b = uniform(rng, 0.0, 0.75 * d);
    let a = uniform(rng, -4.0 / 3.0 * b, -4.0 / 3.0 * b + 0.75 * c + d);
    PurificationProtocol::new(a, b, c, d)
}

/// Admissible protocol that does not lower the fresh fidelity.
pub fn random_improving_protocol<R: Rng>(rng: &mut R, f_new: f64) -> PurificationProtocol {
    loop {
        let p = random_protocol(rng);
        if p.validate(Some(f_new)).improves_fresh == Some(true) && p.success_prob(f_new) > 1e-3 {
            return p;
        }
    }
}

pub fn random_policy<R: Rng>(rng: &mut R, n: usize) -> PurificationPolicy {
    let protocols = (0..n).map(|_| random_protocol(rng)).collect();
    PurificationPolicy::new("random", protocols).unwrap()
}

pub fn random_improving_policy<R: Rng>(rng: &mut R, n: usize, f_new: f64) -> PurificationPolicy {
    let protocols = (0..n).map(|_| random_improving_protocol(rng, f_new)).collect();
    PurificationPolicy::new("random improving", protocols).unwrap()
}

/// Valid parameters with `p_con >= min_p_con` and `n <= max_n`.
pub fn random_params<R: Rng>(rng: &mut R, max_n: usize, min_p_con: f64) -> SystemParams {
    SystemParams {
        n: rng.random_range(1..=max_n),
        p_gen: uniform(rng, 0.01, 1.0),
        p_con: uniform(rng, min_p_con, 1.0),
        gamma: uniform(rng, 0.0, 2.0),
        q: uniform(rng, 0.0, 1.0),
        new_link: BellDiagonalState::werner(uniform(rng, 0.3, 1.0)).unwrap(),
    }
}

/// Interpolated fidelity the curve reaches at availability `a` or above; `None` if no point of the
/// curve has availability `>= a`. Points are `(A, F_bar)` pairs.
pub fn best_fidelity_at(curve: &[(f64, f64)], a: f64) -> Option<f64> {
    let mut best: Option<f64> = None;
    for &(ca, cf) in curve {
        if ca >= a {
            best = Some(best.map_or(cf, |b: f64| b.max(cf)));
        }
    }
    for pair in curve.windows(2) {
        let ((a0, f0), (a1, f1)) = (pair[0], pair[1]);
        let (lo, hi) = if a0 <= a1 { (a0, a1) } else { (a1, a0) };
        if lo <= a && a <= hi && hi > lo {
            let f = f0 + (f1 - f0) * (a - a0) / (a1 - a0);
            best = Some(best.map_or(f, |b: f64| b.max(f)));
        }
    }
    best
}
