//! Bell-diagonal two-qubit states.
//!
//! Basis order is fixed as `[phi+, phi-, psi+, psi-]`; the first entry is the
//! fidelity with respect to the target pair `phi+`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Tolerance for a constructed state being a probability vector.
pub const STATE_TOL: f64 = 1e-12;
/// Inputs deviating from unit sum by less than this are renormalised; larger deviations are rejected.
pub const RENORM_TOL: f64 = 1e-9;

/// Diagonal of a Bell-diagonal density matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 4]", into = "[f64; 4]")]
pub struct BellDiagonalState {
    diag: [f64; 4],
}

impl BellDiagonalState {
    /// Validates and (if necessary) renormalises a diagonal.
    pub fn new(diag: [f64; 4]) -> Result<Self> {
        if diag.iter().any(|x| !x.is_finite()) {
            return Err(domain(format!("non-finite Bell-diagonal entry in {diag:?}")));
        }
        if diag.iter().any(|&x| x < -STATE_TOL) {
            return Err(domain(format!("negative Bell-diagonal entry in {diag:?}")));
        }
        let clipped = diag.map(|x| x.max(0.0));
        let sum: f64 = clipped.iter().sum();
        if (sum - 1.0).abs() > RENORM_TOL {
            return Err(domain(format!(
                "Bell-diagonal entries sum to {sum}, not 1"
            )));
        }
        Ok(Self {
            diag: clipped.map(|x| x / sum),
        })
    }

    /// Werner state `(F, (1-F)/3, (1-F)/3, (1-F)/3)`.
    pub fn werner(fidelity: f64) -> Result<Self> {
        if !(0.25..=1.0).contains(&fidelity) {
            return Err(domain(format!(
                "Werner fidelity {fidelity} outside [1/4, 1]"
            )));
        }
        let r = (1.0 - fidelity) / 3.0;
        Ok(Self {
            diag: [fidelity, r, r, r],
        })
    }

    pub fn perfect() -> Self {
        Self {
            diag: [1.0, 0.0, 0.0, 0.0],
        }
    }

    pub fn diag(&self) -> [f64; 4] {
        self.diag
    }

    pub fn fidelity(&self) -> f64 {
        self.diag[0]
    }

    pub fn is_werner(&self) -> bool {
        let [_, b, c, d] = self.diag;
        (b - c).abs() <= STATE_TOL && (c - d).abs() <= STATE_TOL
    }

    /// Depolarises the non-target entries, keeping the fidelity exactly.
    pub fn twirl(&self) -> Self {
        let f = self.diag[0];
        let r = (1.0 - f) / 3.0;
        Self {
            diag: [f, r, r, r],
        }
    }

    /// One round of DEJMPS on two pairs. Returns the normalised output and the success probability.
    pub fn dejmps_combine(&self, other: &Self) -> Result<(Self, f64)> {
        let [s0, s1, s2, s3] = self.diag;
        let [t0, t1, t2, t3] = other.diag;
        let p = (s0 + s3) * (t0 + t3) + (s1 + s2) * (t1 + t2);
        if p <= 0.0 {
            return Err(Error::Degenerate(
                "DEJMPS success probability is zero".into(),
            ));
        }
        let out = [
            (s0 * t0 + s3 * t3) / p,
            (s0 * t3 + s3 * t0) / p,
            (s1 * t1 + s2 * t2) / p,
            (s1 * t2 + s2 * t1) / p,
        ];
        Ok((Self::new(out)?, p))
    }
}

impl TryFrom<[f64; 4]> for BellDiagonalState {
    type Error = Error;
    fn try_from(diag: [f64; 4]) -> Result<Self> {
        Self::new(diag)
    }
}

impl From<BellDiagonalState> for [f64; 4] {
    fn from(s: BellDiagonalState) -> Self {
        s.diag
    }
}

/// Fidelity after `t` ticks of depolarising decay at rate `gamma`. `F = 0` is the empty-memory sentinel.
pub fn decohere_fidelity(fidelity: f64, t: u64, gamma: f64) -> Result<f64> {
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(domain(format!("decay rate {gamma} must be finite and >= 0")));
    }
    if !(0.0..=1.0).contains(&fidelity) {
        return Err(domain(format!("fidelity {fidelity} outside [0, 1]")));
    }
    if fidelity == 0.0 {
        return Ok(0.0);
    }
    Ok(decay(fidelity, gamma * t as f64))
}

/// `(F - 1/4) e^{-x} + 1/4` without range checks, used on hot paths.
#[inline]
pub(crate) fn decay(fidelity: f64, exponent: f64) -> f64 {
    (fidelity - 0.25) * (-exponent).exp() + 0.25
}
