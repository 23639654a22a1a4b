use serde::{Deserialize, Serialize};

use crate::error::{check_probability, domain, Result};
use crate::state::BellDiagonalState;

/// Parameters of the buffer: one long-lived memory fed by `n` short-lived generating memories.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Number of generating memories.
    pub n: usize,
    /// Per-memory, per-tick generation success probability.
    pub p_gen: f64,
    /// Per-tick consumption request probability.
    pub p_con: f64,
    /// Decoherence rate per tick.
    pub gamma: f64,
    /// Probability of attempting purification when fresh links arrive at an occupied memory.
    pub q: f64,
    /// State of every freshly generated link.
    pub new_link: BellDiagonalState,
}

impl SystemParams {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(domain("n must be >= 1"));
        }
        check_probability("p_gen", self.p_gen)?;
        check_probability("p_con", self.p_con)?;
        check_probability("q", self.q)?;
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(domain(format!("gamma = {} must be finite and >= 0", self.gamma)));
        }
        if self.f_new() <= 0.25 {
            return Err(domain(format!(
                "fresh-link fidelity {} must exceed 1/4",
                self.f_new()
            )));
        }
        Ok(())
    }

    pub fn f_new(&self) -> f64 {
        self.new_link.fidelity()
    }

    /// Fresh fidelity measured from the fully mixed fixed point.
    pub fn h_new(&self) -> f64 {
        self.f_new() - 0.25
    }

    /// Probability that at least one fresh link is generated in a tick.
    pub fn p_gen_star(&self) -> f64 {
        effective_generation_probability(self.n, self.p_gen)
    }

    /// `e^gamma - 1`.
    pub fn gamma_factor(&self) -> f64 {
        self.gamma.exp_m1()
    }
}

/// `1 - (1 - p_gen)^n`, evaluated without cancellation for small `p_gen`.
pub fn effective_generation_probability(n: usize, p_gen: f64) -> f64 {
    if p_gen >= 1.0 {
        return 1.0;
    }
    -(n as f64 * (-p_gen).ln_1p()).exp_m1()
}

/// Binomial weights `C(n,k) (1-p)^(n-k) p^k` for `k = 0..=n`.
pub fn binomial_weights(n: usize, p: f64) -> Vec<f64> {
    let mut w = vec![0.0; n + 1];
    if p <= 0.0 {
        w[0] = 1.0;
        return w;
    }
    if p >= 1.0 {
        w[n] = 1.0;
        return w;
    }
    let (lp, lq) = (p.ln(), (-p).ln_1p());
    let mut log_choose = 0.0f64;
    for (k, slot) in w.iter_mut().enumerate() {
        if k > 0 {
            log_choose += ((n - k + 1) as f64).ln() - (k as f64).ln();
        }
        *slot = (log_choose + k as f64 * lp + (n - k) as f64 * lq).exp();
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn effective_generation_examples() {
        assert!((effective_generation_probability(1, 0.3) - 0.3).abs() < 1e-15);
        assert!((effective_generation_probability(2, 0.5) - 0.75).abs() < 1e-15);
        assert!((effective_generation_probability(10, 0.5) - 0.9990234375).abs() < 1e-15);
        assert_eq!(effective_generation_probability(3, 0.0), 0.0);
        assert_eq!(effective_generation_probability(3, 1.0), 1.0);
        let tiny = effective_generation_probability(1, 1e-12);
        assert!((tiny - 1e-12).abs() < 1e-24);
    }

    #[test]
    fn binomial_weights_sum_to_one() {
        for (n, p) in [(1, 0.3), (5, 0.5), (10, 0.9), (40, 0.01)] {
            let w = binomial_weights(n, p);
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            let star: f64 = w[1..].iter().sum();
            assert!((star - effective_generation_probability(n, p)).abs() < 1e-12);
        }
        assert!((binomial_weights(2, 0.5)[1] - 0.5).abs() < 1e-15);
        assert_eq!(binomial_weights(3, 1.0), vec![0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn validation() {
        let ok = SystemParams {
            n: 2,
            p_gen: 0.5,
            p_con: 0.1,
            gamma: 0.02,
            q: 1.0,
            new_link: BellDiagonalState::werner(0.9).unwrap(),
        };
        assert!(ok.validate().is_ok());
        assert!(SystemParams { n: 0, ..ok }.validate().is_err());
        assert!(SystemParams { p_con: 1.2, ..ok }.validate().is_err());
        assert!(SystemParams { gamma: -1.0, ..ok }.validate().is_err());
        assert!(SystemParams { q: f64::NAN, ..ok }.validate().is_err());
        let mixed = BellDiagonalState::werner(0.25).unwrap();
        assert!(SystemParams { new_link: mixed, ..ok }.validate().is_err());
    }
}
