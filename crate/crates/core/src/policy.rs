//! Purification policies: one protocol for every possible number `k` of fresh links.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::protocol::PurificationProtocol;
use crate::state::BellDiagonalState;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PurificationPolicy {
    label: String,
    protocols: Vec<PurificationProtocol>,
}

impl PurificationPolicy {
    /// `protocols[k - 1]` is used when `k` fresh links were generated.
    pub fn new(label: impl Into<String>, protocols: Vec<PurificationProtocol>) -> Result<Self> {
        if protocols.is_empty() {
            return Err(domain("a policy needs at least one protocol (n >= 1)"));
        }
        for (i, p) in protocols.iter().enumerate() {
            p.ensure_admissible(i + 1)?;
        }
        Ok(Self {
            label: label.into(),
            protocols,
        })
    }

    fn uniform(label: &str, n: usize, protocol: PurificationProtocol) -> Result<Self> {
        check_n(n)?;
        Self::new(label, vec![protocol; n])
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn n(&self) -> usize {
        self.protocols.len()
    }

    pub fn protocols(&self) -> &[PurificationProtocol] {
        &self.protocols
    }

    /// Protocol for `k` fresh links, `1 <= k <= n`.
    pub fn protocol(&self, k: usize) -> &PurificationProtocol {
        &self.protocols[k - 1]
    }

    /// True when every protocol maps `f_new` to something at least as good.
    pub fn improves_fresh(&self, f_new: f64) -> bool {
        self.protocols
            .iter()
            .all(|p| p.validate(Some(f_new)).improves_fresh == Some(true))
    }

    /// True when no protocol depends on the buffered fidelity through its success probability.
    pub fn is_deterministic(&self) -> bool {
        self.protocols.iter().all(|p| p.c == 0.0 && p.d == 1.0)
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::uniform("identity", n, PurificationProtocol::IDENTITY)
    }

    pub fn replacement(n: usize, f_new: f64) -> Result<Self> {
        Self::uniform("replacement", n, PurificationProtocol::replacement(f_new)?)
    }

    pub fn dejmps(n: usize, fresh: &BellDiagonalState) -> Result<Self> {
        Self::uniform("DEJMPS", n, PurificationProtocol::dejmps(fresh))
    }

    /// Sequentially purifies `min(k, max_rounds)` fresh links, then runs DEJMPS against the buffer.
    pub fn concatenated_dejmps(
        n: usize,
        fresh: &BellDiagonalState,
        max_rounds: usize,
        twirl_before_final: bool,
    ) -> Result<Self> {
        check_n(n)?;
        if max_rounds == 0 {
            return Err(domain("the number of concatenations must be >= 1"));
        }
        let protocols = (1..=n)
            .map(|k| concatenated_protocol(fresh, k.min(max_rounds), twirl_before_final))
            .collect::<Result<Vec<_>>>()?;
        let label = format!("concatenated DEJMPS x{max_rounds}");
        Self::new(label, protocols)
    }

    /// Tree-purifies the largest power-of-two subset of fresh links, then runs DEJMPS against the buffer.
    pub fn nested_dejmps(n: usize, fresh: &BellDiagonalState) -> Result<Self> {
        check_n(n)?;
        let protocols = (1..=n)
            .map(|k| {
                let m = 1usize << (usize::BITS - 1 - k.leading_zeros());
                let mut layer = vec![*fresh; m];
                let mut theta = 1.0;
                while layer.len() > 1 {
                    let mut next = Vec::with_capacity(layer.len() / 2);
                    for pair in layer.chunks(2) {
                        let (out, p) = pair[0].dejmps_combine(&pair[1])?;
                        theta *= p;
                        next.push(out);
                    }
                    layer = next;
                }
                PurificationProtocol::dejmps(&layer[0]).with_prestage(theta)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new("nested DEJMPS", protocols)
    }

    /// Bilocal-Clifford-optimal pre-stage for `k <= 4`, followed by DEJMPS against the buffer.
    pub fn optimal_bc(n: usize, f_new: f64, tails: Option<&OptimalBcTails>) -> Result<Self> {
        check_n(n)?;
        if n > 4 {
            return Err(Error::UnsupportedTabulation(format!(
                "optimal bilocal Clifford coefficients are only available for n <= 4, got n = {n}"
            )));
        }
        let fresh = BellDiagonalState::werner(f_new)?;
        let mut protocols = vec![PurificationProtocol::dejmps(&fresh)];
        for k in 2..=n {
            let tail = match tails {
                Some(t) => t.get(k).ok_or_else(|| {
                    Error::MissingData(format!("no optimal bC tail entries supplied for k = {k}"))
                })?,
                None => bundled_optimal_bc_tail(f_new, k).ok_or_else(|| {
                    Error::MissingData(format!(
                        "optimal bC tail entries are bundled only for F_new = {OPTIMAL_BC_TABLE_FIDELITY}; supply them for F_new = {f_new}"
                    ))
                })?,
            };
            let (theta, sigma) = optimal_bc_output(k, f_new, tail)?;
            protocols.push(PurificationProtocol::dejmps(&sigma).with_prestage(theta)?);
        }
        Self::new("optimal bC", protocols)
    }

    /// `k = 5` uses the [[5,1,3]]-code distillation with externally supplied success and output
    /// fidelity, `k = 1` plain DEJMPS and everything else twice-concatenated DEJMPS.
    pub fn ec513(
        n: usize,
        fresh: &BellDiagonalState,
        theta: f64,
        sigma00: f64,
        twirl_before_final: bool,
    ) -> Result<Self> {
        check_n(n)?;
        let code_output = BellDiagonalState::werner(sigma00)?;
        let code_protocol = PurificationProtocol::dejmps(&code_output).with_prestage(theta)?;
        let protocols = (1..=n)
            .map(|k| match k {
                1 => Ok(PurificationProtocol::dejmps(fresh)),
                5 => Ok(code_protocol),
                _ => concatenated_protocol(fresh, 2, twirl_before_final),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new("513 EC", protocols)
    }

    /// Replacement for a single fresh link; with two or more, DEJMPS on two fresh links followed by
    /// replacement, where a failed first stage leaves the buffer untouched.
    pub fn flagged_dejmps_replacement(n: usize, fresh: &BellDiagonalState) -> Result<Self> {
        let (rep, dej, h_new) = dejmps_replacement_parts(n, fresh)?;
        let flagged = PurificationProtocol::new(
            1.0 - dej.c * h_new - dej.d,
            dej.a * h_new + dej.b,
            0.0,
            1.0,
        );
        let protocols = (1..=n).map(|k| if k == 1 { rep } else { flagged }).collect();
        Self::new("flagged DEJMPS + replacement", protocols)
    }

    /// Unflagged counterpart: a failed first stage discards the buffered link too.
    pub fn dejmps_replacement(n: usize, fresh: &BellDiagonalState) -> Result<Self> {
        let (rep, dej, h_new) = dejmps_replacement_parts(n, fresh)?;
        let unflagged =
            PurificationProtocol::new(0.0, dej.a * h_new + dej.b, 0.0, dej.c * h_new + dej.d);
        let protocols = (1..=n).map(|k| if k == 1 { rep } else { unflagged }).collect();
        Self::new("DEJMPS + replacement", protocols)
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        Err(domain("number of bad memories n must be >= 1"))
    } else {
        Ok(())
    }
}

fn concatenated_protocol(
    fresh: &BellDiagonalState,
    m: usize,
    twirl_before_final: bool,
) -> Result<PurificationProtocol> {
    let mut sigma = *fresh;
    let mut theta = 1.0;
    for _ in 1..m {
        let (out, p) = sigma.dejmps_combine(fresh)?;
        sigma = out;
        theta *= p;
    }
    if twirl_before_final {
        sigma = sigma.twirl();
    }
    PurificationProtocol::dejmps(&sigma).with_prestage(theta)
}

fn dejmps_replacement_parts(
    n: usize,
    fresh: &BellDiagonalState,
) -> Result<(PurificationProtocol, PurificationProtocol, f64)> {
    if n < 2 {
        return Err(domain("DEJMPS + replacement policies need n >= 2"));
    }
    let f_new = fresh.fidelity();
    let rep = PurificationProtocol::replacement(f_new)?;
    Ok((rep, PurificationProtocol::dejmps(fresh), f_new - 0.25))
}

/// Fresh-link fidelity at which bundled optimal-bC tail entries are available.
pub const OPTIMAL_BC_TABLE_FIDELITY: f64 = 0.7;

const OPTIMAL_BC_TABLE: [[f64; 3]; 3] = [
    [0.20589, 0.02941, 0.02941],
    [0.14287, 0.03571, 0.03571],
    [0.04545, 0.04545, 0.04545],
];

/// User-supplied non-target diagonal entries of the optimal-bC pre-stage output.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OptimalBcTails {
    #[serde(default)]
    pub k2: Option<[f64; 3]>,
    #[serde(default)]
    pub k3: Option<[f64; 3]>,
    #[serde(default)]
    pub k4: Option<[f64; 3]>,
}

impl OptimalBcTails {
    fn get(&self, k: usize) -> Option<[f64; 3]> {
        match k {
            2 => self.k2,
            3 => self.k3,
            4 => self.k4,
            _ => None,
        }
    }
}

fn bundled_optimal_bc_tail(f_new: f64, k: usize) -> Option<[f64; 3]> {
    if (f_new - OPTIMAL_BC_TABLE_FIDELITY).abs() > 1e-9 {
        return None;
    }
    OPTIMAL_BC_TABLE.get(k.checked_sub(2)?).copied()
}

/// Success probability of the optimal bilocal Clifford `k`-to-1 stage on Werner inputs.
pub fn optimal_bc_success(k: usize, f: f64) -> Result<f64> {
    let f2 = f * f;
    match k {
        2 => Ok(8.0 / 9.0 * f2 - 4.0 / 9.0 * f + 5.0 / 9.0),
        3 => Ok(32.0 / 27.0 * f2 * f - 4.0 / 9.0 * f2 + 7.0 / 27.0),
        4 => Ok(32.0 / 27.0 * f2 * f2 - 4.0 / 9.0 * f2 + 4.0 / 27.0 * f + 1.0 / 9.0),
        _ => Err(Error::UnsupportedTabulation(format!(
            "no optimal bC polynomial for k = {k}"
        ))),
    }
}

/// Output fidelity of the optimal bilocal Clifford `k`-to-1 stage on Werner inputs.
pub fn optimal_bc_fidelity(k: usize, f: f64) -> Result<f64> {
    let f2 = f * f;
    let numerator = match k {
        2 => 10.0 / 9.0 * f2 - 2.0 / 9.0 * f + 1.0 / 9.0,
        3 => 28.0 / 27.0 * f2 * f - f / 9.0 + 2.0 / 27.0,
        4 => 8.0 / 9.0 * f2 * f2 + 8.0 / 27.0 * f2 * f - 2.0 / 9.0 * f2 + 1.0 / 27.0,
        _ => {
            return Err(Error::UnsupportedTabulation(format!(
                "no optimal bC polynomial for k = {k}"
            )))
        }
    };
    Ok(numerator / optimal_bc_success(k, f)?)
}

/// Success probability and output state of the optimal-bC stage. The tail is rescaled so that the
/// state is normalised; rounded tabulated entries would otherwise miss unit sum by ~1e-5.
pub fn optimal_bc_output(k: usize, f_new: f64, tail: [f64; 3]) -> Result<(f64, BellDiagonalState)> {
    let theta = optimal_bc_success(k, f_new)?;
    let sigma00 = optimal_bc_fidelity(k, f_new)?;
    let rest = 1.0 - sigma00;
    let total: f64 = tail.iter().sum();
    if tail.iter().any(|&x| x < 0.0 || !x.is_finite()) {
        return Err(domain(format!("optimal bC tail {tail:?} must be non-negative")));
    }
    let scaled = if total > 0.0 {
        tail.map(|x| x * rest / total)
    } else if rest.abs() <= 1e-12 {
        [0.0; 3]
    } else {
        return Err(domain("optimal bC tail entries sum to zero"));
    };
    let sigma = BellDiagonalState::new([sigma00, scaled[0], scaled[1], scaled[2]])?;
    Ok((theta, sigma))
}

/// Bundled `(F_new, success, output fidelity)` triples for the [[5,1,3]] stage.
pub const EC513_PRESETS: [(f64, f64, f64); 2] = [(0.86, 0.869, 0.864), (0.95, 0.981, 0.978)];

pub fn ec513_preset(f_new: f64) -> Option<(f64, f64)> {
    EC513_PRESETS
        .iter()
        .find(|(f, _, _)| (f - f_new).abs() <= 1e-9)
        .map(|&(_, theta, sigma00)| (theta, sigma00))
}

/// Serializable description of a policy; resolved against `n` and the fresh-link state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PolicySpec {
    Identity,
    Replacement,
    Dejmps,
    ConcatDejmps {
        max_concatenations: usize,
        #[serde(default)]
        twirl_before_final: bool,
    },
    NestedDejmps,
    OptimalBc {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tails: Option<OptimalBcTails>,
    },
    Ec513 {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        theta: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        sigma00: Option<f64>,
        #[serde(default)]
        twirl_before_final: bool,
    },
    FlaggedDejmpsReplacement,
    DejmpsReplacement,
    Custom {
        protocols: Vec<[f64; 4]>,
    },
}

/// A policy description with an optional display label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyConfig {
    #[serde(flatten)]
    pub spec: PolicySpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl From<PolicySpec> for PolicyConfig {
    fn from(spec: PolicySpec) -> Self {
        Self { spec, label: None }
    }
}

impl PolicyConfig {
    pub fn build(&self, n: usize, fresh: &BellDiagonalState) -> Result<PurificationPolicy> {
        let policy = self.spec.build(n, fresh)?;
        Ok(match &self.label {
            Some(label) => policy.with_label(label.clone()),
            None => policy,
        })
    }
}

impl PolicySpec {
    pub fn build(&self, n: usize, fresh: &BellDiagonalState) -> Result<PurificationPolicy> {
        let f_new = fresh.fidelity();
        match self {
            PolicySpec::Identity => PurificationPolicy::identity(n),
            PolicySpec::Replacement => PurificationPolicy::replacement(n, f_new),
            PolicySpec::Dejmps => PurificationPolicy::dejmps(n, fresh),
            PolicySpec::ConcatDejmps {
                max_concatenations,
                twirl_before_final,
            } => PurificationPolicy::concatenated_dejmps(
                n,
                fresh,
                *max_concatenations,
                *twirl_before_final,
            ),
            PolicySpec::NestedDejmps => PurificationPolicy::nested_dejmps(n, fresh),
            PolicySpec::OptimalBc { tails } => {
                if !fresh.is_werner() {
                    return Err(domain("the optimal bC policy needs a Werner fresh link"));
                }
                PurificationPolicy::optimal_bc(n, f_new, tails.as_ref())
            }
            PolicySpec::Ec513 {
                theta,
                sigma00,
                twirl_before_final,
            } => {
                let (theta, sigma00) = match (theta, sigma00) {
                    (Some(t), Some(s)) => (*t, *s),
                    (None, None) => ec513_preset(f_new).ok_or_else(|| {
                        Error::MissingData(format!(
                            "no bundled 513 EC data for F_new = {f_new}; supply theta and sigma00"
                        ))
                    })?,
                    _ => {
                        return Err(Error::MissingData(
                            "513 EC needs both theta and sigma00".into(),
                        ))
                    }
                };
                PurificationPolicy::ec513(n, fresh, theta, sigma00, *twirl_before_final)
            }
            PolicySpec::FlaggedDejmpsReplacement => {
                PurificationPolicy::flagged_dejmps_replacement(n, fresh)
            }
            PolicySpec::DejmpsReplacement => PurificationPolicy::dejmps_replacement(n, fresh),
            PolicySpec::Custom { protocols } => {
                if protocols.len() != n {
                    return Err(Error::Config(format!(
                        "custom policy lists {} protocols but n = {n}",
                        protocols.len()
                    )));
                }
                let protocols = protocols
                    .iter()
                    .map(|&[a, b, c, d]| PurificationProtocol::new(a, b, c, d))
                    .collect();
                PurificationPolicy::new("custom", protocols)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn werner(f: f64) -> BellDiagonalState {
        BellDiagonalState::werner(f).unwrap()
    }

    #[test]
    fn identity_and_replacement() {
        let id = PurificationPolicy::identity(3).unwrap();
        assert_eq!(id.n(), 3);
        assert!(id.protocols().iter().all(|p| *p == PurificationProtocol::IDENTITY));
        assert!(close(id.protocol(2).jump(0.6).unwrap(), 0.6, 1e-15));
        assert!(PurificationPolicy::identity(0).is_err());

        let rep = PurificationPolicy::replacement(2, 0.7).unwrap();
        assert!(close(rep.protocol(1).b, 0.45, 1e-15));
        assert!(close(rep.protocol(2).jump(0.95).unwrap(), 0.7, 1e-15));
        assert_eq!(rep.protocol(1).success_prob(0.3), 1.0);
        assert!(PurificationPolicy::replacement(2, 0.25).is_err());
    }

    #[test]
    fn dejmps_policy_is_k_independent() {
        let p = PurificationPolicy::dejmps(10, &werner(0.9)).unwrap();
        assert_eq!(p.protocol(1), p.protocol(10));
        assert!(close(p.protocol(4).a, (16.0 * 0.9 - 1.0) / 18.0, 1e-15));
    }

    #[test]
    fn concatenation_examples() {
        let w = werner(0.7);
        let one = PurificationPolicy::concatenated_dejmps(4, &w, 1, false).unwrap();
        assert_eq!(one.protocols(), PurificationPolicy::dejmps(4, &w).unwrap().protocols());

        let two = PurificationPolicy::concatenated_dejmps(3, &w, 2, false).unwrap();
        let (sigma, theta) = w.dejmps_combine(&w).unwrap();
        assert!(close(theta, 0.68, 1e-12));
        let expected = PurificationProtocol::dejmps(&sigma).with_prestage(theta).unwrap();
        assert_eq!(*two.protocol(2), expected);
        assert_eq!(*two.protocol(3), expected);

        let perfect = BellDiagonalState::perfect();
        for rounds in 1..4 {
            let p = PurificationPolicy::concatenated_dejmps(4, &perfect, rounds, false).unwrap();
            for proto in p.protocols() {
                assert!(close(proto.jump(1.0).unwrap(), 1.0, 1e-15));
                assert!(close(proto.success_prob(1.0), 1.0, 1e-15));
            }
        }
        assert!(PurificationPolicy::concatenated_dejmps(2, &w, 0, false).is_err());
    }

    #[test]
    fn nested_examples() {
        let w = werner(0.7);
        let nested = PurificationPolicy::nested_dejmps(5, &w).unwrap();
        let concat = PurificationPolicy::concatenated_dejmps(5, &w, 2, false).unwrap();
        assert_eq!(nested.protocol(1), concat.protocol(1));
        assert_eq!(nested.protocol(2), concat.protocol(2));
        assert_eq!(nested.protocol(3), concat.protocol(2));

        let (pair, p1) = w.dejmps_combine(&w).unwrap();
        let (quad, p2) = pair.dejmps_combine(&pair).unwrap();
        let expected = PurificationProtocol::dejmps(&quad)
            .with_prestage(p1 * p1 * p2)
            .unwrap();
        assert_eq!(*nested.protocol(4), expected);
        assert_eq!(*nested.protocol(5), expected);
    }

    #[test]
    fn optimal_bc_tabulation() {
        assert!(close(optimal_bc_success(2, 0.7).unwrap(), 0.68, 1e-12));
        assert!(close(optimal_bc_success(3, 0.7).unwrap(), 0.448, 1e-12));
        assert!(close(optimal_bc_success(4, 0.7).unwrap(), 0.2816, 1e-12));
        assert!(close(optimal_bc_fidelity(2, 0.7).unwrap(), 0.735294, 1e-6));
        assert!(close(optimal_bc_fidelity(3, 0.7).unwrap(), 0.785714, 1e-6));
        assert!(close(optimal_bc_fidelity(4, 0.7).unwrap(), 0.863636, 1e-6));

        let (_, s2) = optimal_bc_output(2, 0.7, OPTIMAL_BC_TABLE[0]).unwrap();
        for (x, y) in s2.diag().iter().zip([0.735294, 0.20589, 0.02941, 0.02941]) {
            assert!(close(*x, y, 1e-5));
        }
        let (_, s4) = optimal_bc_output(4, 0.7, OPTIMAL_BC_TABLE[2]).unwrap();
        for x in &s4.diag()[1..] {
            assert!(close(*x, 0.04545, 1e-5));
        }

        let policy = PurificationPolicy::optimal_bc(4, 0.7, None).unwrap();
        assert_eq!(*policy.protocol(1), PurificationProtocol::dejmps(&werner(0.7)));
        assert!(matches!(
            PurificationPolicy::optimal_bc(5, 0.7, None),
            Err(Error::UnsupportedTabulation(_))
        ));
        assert!(matches!(
            PurificationPolicy::optimal_bc(3, 0.8, None),
            Err(Error::MissingData(_))
        ));
        assert!(PurificationPolicy::optimal_bc(1, 0.8, None).is_ok());
        let tails = OptimalBcTails {
            k2: Some([0.1, 0.02, 0.02]),
            ..Default::default()
        };
        assert!(PurificationPolicy::optimal_bc(2, 0.8, Some(&tails)).is_ok());
        assert!(PurificationPolicy::optimal_bc(3, 0.8, Some(&tails)).is_err());
    }

    #[test]
    fn ec513_examples() {
        assert_eq!(ec513_preset(0.86), Some((0.869, 0.864)));
        assert_eq!(ec513_preset(0.95), Some((0.981, 0.978)));
        assert_eq!(ec513_preset(0.9), None);

        let w = werner(0.86);
        let policy = PurificationPolicy::ec513(5, &w, 0.869, 0.864, false).unwrap();
        let concat = PurificationPolicy::concatenated_dejmps(5, &w, 2, false).unwrap();
        assert_eq!(policy.protocol(1), concat.protocol(1));
        for k in 2..=4 {
            assert_eq!(policy.protocol(k), concat.protocol(k));
        }
        let code = PurificationProtocol::dejmps(&werner(0.864))
            .with_prestage(0.869)
            .unwrap();
        assert_eq!(*policy.protocol(5), code);

        let spec = PolicySpec::Ec513 {
            theta: None,
            sigma00: None,
            twirl_before_final: false,
        };
        assert_eq!(spec.build(5, &w).unwrap(), policy);
        assert!(matches!(spec.build(5, &werner(0.9)), Err(Error::MissingData(_))));
    }

    #[test]
    fn flagged_and_unflagged() {
        let w = werner(0.7);
        let flagged = PurificationPolicy::flagged_dejmps_replacement(3, &w).unwrap();
        let p = flagged.protocol(2);
        assert!(close(p.a, 0.32, 1e-12));
        assert!(close(p.b, 0.338333333333, 1e-11));
        assert_eq!(p.success_prob(0.4), 1.0);
        let dej = PurificationProtocol::dejmps(&w);
        let mix = 0.68 * dej.jump(0.7).unwrap() + 0.32 * 0.7;
        assert!(close(p.jump(0.7).unwrap(), mix, 1e-12));
        assert!(close(mix, 0.73233, 1e-5));
        assert_eq!(*flagged.protocol(1), PurificationProtocol::replacement(0.7).unwrap());

        let unflagged = PurificationPolicy::dejmps_replacement(3, &w).unwrap();
        let u = unflagged.protocol(3);
        assert_eq!(u.a, 0.0);
        assert!(close(u.b, p.b, 1e-15));
        assert!(close(u.d, 0.68, 1e-12));
        assert!(PurificationPolicy::flagged_dejmps_replacement(1, &w).is_err());
    }

    #[test]
    fn custom_policy_validated() {
        let spec = PolicySpec::Custom {
            protocols: vec![[0.0, 0.0, 2.0, 0.0]],
        };
        assert!(matches!(
            spec.build(1, &werner(0.8)),
            Err(Error::Inadmissible { k: 1, .. })
        ));
        let spec = PolicySpec::Custom {
            protocols: vec![[1.0, 0.0, 0.0, 1.0]],
        };
        assert!(matches!(spec.build(2, &werner(0.8)), Err(Error::Config(_))));
    }

    #[test]
    fn spec_json_forms() {
        let cfg: PolicyConfig =
            serde_json::from_str(r#"{"kind":"concat_dejmps","max_concatenations":2,"label":"cx2"}"#)
                .unwrap();
        let policy = cfg.build(3, &werner(0.9)).unwrap();
        assert_eq!(policy.label(), "cx2");
        let back = serde_json::to_string(&cfg).unwrap();
        assert_eq!(serde_json::from_str::<PolicyConfig>(&back).unwrap(), cfg);
        assert!(serde_json::from_str::<PolicyConfig>(r#"{"kind":"bogus"}"#).is_err());
    }
}
