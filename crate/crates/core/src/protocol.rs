//! Single purification protocols parameterised by `(a, b, c, d)`.
//!
//! With `h = F - 1/4` the buffered link survives with probability `c h + d`
//! and, on success, jumps to `1/4 + (a h + b) / (c h + d)`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::state::BellDiagonalState;

/// Slack allowed when checking the linear admissibility constraints.
pub const ADMISSIBILITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PurificationProtocol {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

/// Per-constraint outcome of [`PurificationProtocol::validate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdmissibilityReport {
    pub d_ok: bool,
    pub c_ok: bool,
    pub b_ok: bool,
    pub a_ok: bool,
    /// `Some(J(F_new) >= F_new)` when a fresh-link fidelity was supplied.
    pub improves_fresh: Option<bool>,
}

impl AdmissibilityReport {
    pub fn is_admissible(&self) -> bool {
        self.d_ok && self.c_ok && self.b_ok && self.a_ok
    }

    fn first_failure(&self) -> Option<&'static str> {
        if !self.d_ok {
            Some("d outside [0, 1]")
        } else if !self.c_ok {
            Some("c outside [-4d/3, 4(1-d)/3]")
        } else if !self.b_ok {
            Some("b outside [0, 3d/4]")
        } else if !self.a_ok {
            Some("a outside [-4b/3, -4b/3 + 3c/4 + d]")
        } else {
            None
        }
    }
}

impl PurificationProtocol {
    pub const IDENTITY: Self = Self::new(1.0, 0.0, 0.0, 1.0);
    pub const ALWAYS_FAIL: Self = Self::new(0.0, 0.0, 0.0, 0.0);

    pub const fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self { a, b, c, d }
    }

    pub fn coefficients(&self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    /// Deterministic replacement of the buffered link by a fresh one.
    pub fn replacement(f_new: f64) -> Result<Self> {
        if !(f_new > 0.25 && f_new <= 1.0) {
            return Err(domain(format!("fresh fidelity {f_new} outside (1/4, 1]")));
        }
        Ok(Self::new(0.0, f_new - 0.25, 0.0, 1.0))
    }

    /// 2-to-1 DEJMPS with the buffered link as one input and `fresh` as the other.
    pub fn dejmps(fresh: &BellDiagonalState) -> Self {
        let [r0, r1, r2, r3] = fresh.diag();
        Self::new(
            (5.0 * r0 + r1 + r2 - 3.0 * r3) / 6.0,
            (3.0 * r0 - 3.0 * r1 - 3.0 * r2 + 5.0 * r3) / 24.0,
            2.0 * (r0 - r1 - r2 + r3) / 3.0,
            (r0 + r1 + r2 + r3) / 2.0,
        )
    }

    /// Prepends a stage that succeeds with probability `theta`; a failed stage discards everything.
    pub fn with_prestage(&self, theta: f64) -> Result<Self> {
        if theta == 0.0 {
            return Err(Error::Degenerate("pre-stage success probability is zero".into()));
        }
        if !(theta > 0.0 && theta <= 1.0) {
            return Err(domain(format!("pre-stage success probability {theta} outside (0, 1]")));
        }
        Ok(Self::new(
            theta * self.a,
            theta * self.b,
            theta * self.c,
            theta * self.d,
        ))
    }

    /// Success probability `c (F - 1/4) + d`.
    pub fn success_prob(&self, fidelity: f64) -> f64 {
        self.c * (fidelity - 0.25) + self.d
    }

    /// Fidelity after a successful application.
    pub fn jump(&self, fidelity: f64) -> Result<f64> {
        let p = self.success_prob(fidelity);
        if p <= 0.0 {
            return Err(Error::UndefinedJump(fidelity));
        }
        Ok(0.25 + (self.a * (fidelity - 0.25) + self.b) / p)
    }

    pub fn validate(&self, f_new: Option<f64>) -> AdmissibilityReport {
        let t = ADMISSIBILITY_TOL;
        let Self { a, b, c, d } = *self;
        let improves_fresh = f_new.map(|f| match self.jump(f) {
            Ok(j) => j >= f - t,
            Err(_) => false,
        });
        AdmissibilityReport {
            d_ok: d >= -t && d <= 1.0 + t,
            c_ok: c >= -4.0 / 3.0 * d - t && c <= 4.0 / 3.0 * (1.0 - d) + t,
            b_ok: b >= -t && b <= 0.75 * d + t,
            a_ok: a >= -4.0 / 3.0 * b - t && a <= -4.0 / 3.0 * b + 0.75 * c + d + t,
            improves_fresh,
        }
    }

    /// Fails with [`Error::Inadmissible`] naming the first violated constraint.
    pub fn ensure_admissible(&self, k: usize) -> Result<()> {
        let report = self.validate(None);
        match report.first_failure() {
            None if self.coefficients().iter().all(|x| x.is_finite()) => Ok(()),
            None => Err(Error::Inadmissible {
                k,
                reason: "non-finite coefficient".into(),
            }),
            Some(reason) => Err(Error::Inadmissible {
                k,
                reason: reason.into(),
            }),
        }
    }
}
