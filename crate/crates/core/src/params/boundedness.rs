//! Partial boundedness and the "bounded cuts, bounded spacers, large last
//! column" sufficient condition.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, Zero};

use super::eventual::{accumulator_behaviour, decide_eventually, transition, AccBehaviour, Affine2, Eventually};
use super::{ParameterSpec, SpecError, StageRule};

/// Concrete stages evaluated past the preperiod before induction takes over.
const SAFETY_HORIZON: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckMode {
    Symbolic,
    NumericUpTo(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerifiedMode {
    /// Proved for every stage from the threshold on.
    Symbolic,
    /// Checked for stages `threshold..=M`.
    NumericUpTo(usize),
}

/// Witnesses for the three partial boundedness conditions: for every stage
/// `n >= threshold` covered by `mode`, `r_n < cut_bound`, interior spacers
/// of one stage differ by less than `spread_bound`, and every interior
/// spacer is at least `|w_n|`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialBoundednessCertificate {
    pub cut_bound: usize,
    pub spread_bound: BigUint,
    pub threshold: usize,
    pub mode: VerifiedMode,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Refutation {
    /// Which condition fails (2 = spread, 3 = spacers at least the word length).
    pub condition: u8,
    pub stage: usize,
    pub i: usize,
    pub j: Option<usize>,
    pub detail: String,
}

impl fmt::Display for Refutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "condition ({}) fails at stage {} (i={}", self.condition, self.stage, self.i)?;
        if let Some(j) = self.j {
            write!(f, ", j={j}")?;
        }
        write!(f, "): {}", self.detail)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PartialBoundedness {
    Certified(PartialBoundednessCertificate),
    Refuted(Refutation),
    /// The symbolic procedure could not decide; rerun in numeric mode.
    FallBackToNumeric { reason: String },
}

impl PartialBoundedness {
    pub fn certificate(&self) -> Option<&PartialBoundednessCertificate> {
        match self {
            PartialBoundedness::Certified(c) => Some(c),
            _ => None,
        }
    }
}

fn spacer_excess(rule: &StageRule) -> Vec<Affine2> {
    // s_n(i) - h_n; normalized heights equal word lengths
    rule.spacers.iter().map(|e| Affine2::from_expr(e).sub(&Affine2::new(1, 0, 0))).collect()
}

fn max_spread(values: &[BigUint]) -> BigUint {
    match (values.iter().max(), values.iter().min()) {
        (Some(hi), Some(lo)) => hi - lo,
        _ => BigUint::zero(),
    }
}

enum Spread {
    Bounded(BigUint),
    Unbounded { i: usize, j: usize },
    Unknown { i: usize, j: usize },
}

/// Classify `max_n |s_n(i) - s_n(j)|` over the stages at one cycle position.
fn cycle_spread(rule: &StageRule, acc: &AccBehaviour) -> Spread {
    let exprs: Vec<Affine2> = rule
        .spacers
        .iter()
        .map(|e| {
            let a = Affine2::from_expr(e);
            match acc {
                AccBehaviour::Frozen(v) => a.freeze_acc(v),
                AccBehaviour::Unbounded => a,
            }
        })
        .collect();
    let mut worst = BigUint::zero();
    for i in 0..exprs.len() {
        for j in (i + 1)..exprs.len() {
            let d = exprs[i].sub(&exprs[j]);
            if d.h.is_zero() && d.acc.is_zero() {
                let m = d.constant.abs().to_biguint().expect("abs");
                worst = worst.max(m);
            } else if d.h.signum() * d.acc.signum() >= BigInt::zero() {
                // same sign (or one of them zero): the gap grows with h or A
                return Spread::Unbounded { i, j };
            } else {
                return Spread::Unknown { i, j };
            }
        }
    }
    Spread::Bounded(worst)
}

/// Check the partial boundedness conditions on a normalized spec.
pub fn check_partially_bounded(spec: &ParameterSpec, mode: CheckMode) -> Result<PartialBoundedness, SpecError> {
    if !spec.is_normalized() {
        return Err(SpecError::NotNormalized);
    }
    Ok(match mode {
        CheckMode::Symbolic => symbolic(spec),
        CheckMode::NumericUpTo(m) => numeric(spec, m),
    })
}

fn symbolic(spec: &ParameterSpec) -> PartialBoundedness {
    let pre = spec.preperiod.len();
    let acc = accumulator_behaviour(spec);
    let mut cycle_worst = BigUint::zero();
    for (p, rule) in spec.cycle.iter().enumerate() {
        match cycle_spread(rule, &acc) {
            Spread::Bounded(w) => cycle_worst = cycle_worst.max(w),
            Spread::Unbounded { i, j } => {
                return PartialBoundedness::Refuted(Refutation {
                    condition: 2,
                    stage: pre + p,
                    i,
                    j: Some(j),
                    detail: format!("|s_n({i}) - s_n({j})| is unbounded along cycle position {p}"),
                })
            }
            Spread::Unknown { i, j } => {
                return PartialBoundedness::FallBackToNumeric {
                    reason: format!("spread between spacers {i} and {j} at cycle position {p} mixes growth directions"),
                }
            }
        }
    }
    let threshold = match decide_eventually(spec, SAFETY_HORIZON, spacer_excess) {
        Eventually::Holds { from } => from,
        Eventually::Fails { stage, constraint } => {
            let st = spec.stages().nth(stage).expect("infinite");
            return PartialBoundedness::Refuted(Refutation {
                condition: 3,
                stage,
                i: constraint,
                j: None,
                detail: format!(
                    "s_n({constraint}) = {} < |w_n| = {} and the deficit recurs forever",
                    st.spacers[constraint], st.height
                ),
            });
        }
        Eventually::Unknown { reason } => return PartialBoundedness::FallBackToNumeric { reason },
    };
    let mut cut_max = spec.cycle.iter().map(|r| r.cuts).max().expect("nonempty cycle");
    let mut spread = cycle_worst;
    for st in spec.stages().take(pre).skip(threshold) {
        cut_max = cut_max.max(st.cuts);
        spread = spread.max(max_spread(&st.spacers));
    }
    PartialBoundedness::Certified(PartialBoundednessCertificate {
        cut_bound: cut_max + 1,
        spread_bound: spread + 1u32,
        threshold,
        mode: VerifiedMode::Symbolic,
    })
}

fn numeric(spec: &ParameterSpec, up_to: usize) -> PartialBoundedness {
    let stages: Vec<_> = spec.stages().take(up_to + 1).collect();
    let mut last_fail: Option<(usize, usize)> = None;
    for st in &stages {
        if let Some(i) = st.spacers.iter().position(|s| *s < st.height) {
            last_fail = Some((st.index, i));
        }
    }
    if let Some((n, i)) = last_fail {
        if n == up_to {
            let st = &stages[n];
            return PartialBoundedness::Refuted(Refutation {
                condition: 3,
                stage: n,
                i,
                j: None,
                detail: format!("s_n({i}) = {} < |w_n| = {} at the last checked stage", st.spacers[i], st.height),
            });
        }
    }
    let threshold = last_fail.map_or(0, |(n, _)| n + 1);
    let tail = &stages[threshold..];
    let cut_max = tail.iter().map(|s| s.cuts).max().expect("nonempty tail");
    let spread = tail.iter().map(|s| max_spread(&s.spacers)).max().unwrap_or_default();
    PartialBoundedness::Certified(PartialBoundednessCertificate {
        cut_bound: cut_max + 1,
        spread_bound: spread + BigUint::one(),
        threshold,
        mode: VerifiedMode::NumericUpTo(up_to),
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SufficientReport {
    /// From `threshold` on: `r_n <= cut_bound`, interior spacers are
    /// `< spacer_bound`, and `2 s_n(r_n - 1) >= h_{n+1}`.
    Holds { cut_bound: usize, spacer_bound: BigUint, threshold: usize },
    Fails { reason: String },
    Undecided { reason: String },
}

impl SufficientReport {
    pub fn holds(&self) -> bool {
        matches!(self, SufficientReport::Holds { .. })
    }
}

/// Bounded cuts, bounded interior spacers, and a last column holding at
/// least half of the next height, all for sufficiently large stages.
pub fn check_sufficient_conditions(spec: &ParameterSpec) -> SufficientReport {
    let pre = spec.preperiod.len();
    let acc = accumulator_behaviour(spec);
    for (p, rule) in spec.cycle.iter().enumerate() {
        for (i, e) in rule.spacers.iter().enumerate() {
            let a = Affine2::from_expr(e);
            let a = match &acc {
                AccBehaviour::Frozen(v) => a.freeze_acc(v),
                AccBehaviour::Unbounded => a,
            };
            if !(a.h.is_zero() && a.acc.is_zero()) {
                return SufficientReport::Fails {
                    reason: format!("interior spacer {i} at cycle position {p} ({e}) is unbounded"),
                };
            }
        }
    }
    let requirement = |rule: &StageRule| {
        let (h_next, _) = transition(rule);
        let last = rule.last.map(|e| Affine2::from_expr(&e)).unwrap_or_else(Affine2::zero);
        vec![last.scale(2).sub(&h_next)]
    };
    let threshold = match decide_eventually(spec, SAFETY_HORIZON, requirement) {
        Eventually::Holds { from } => from,
        Eventually::Fails { stage, .. } => {
            return SufficientReport::Fails {
                reason: format!("2 s_n(r_n - 1) < h_(n+1) at stage {stage} and infinitely often after"),
            }
        }
        Eventually::Unknown { reason } => return SufficientReport::Undecided { reason },
    };
    let tail_start = threshold.min(pre);
    let mut cut_max = spec.cycle.iter().map(|r| r.cuts).max().expect("nonempty");
    let mut spacer_max = BigUint::zero();
    for st in spec.stages().take(pre + spec.period()).skip(tail_start) {
        if st.index >= threshold || st.index >= pre {
            cut_max = cut_max.max(st.cuts);
            if let Some(m) = st.spacers.iter().max() {
                spacer_max = spacer_max.max(m.clone());
            }
        }
    }
    SufficientReport::Holds { cut_bound: cut_max, spacer_bound: spacer_max + 1u32, threshold }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{normalize, SpacerExpr};
    use crate::registry;

    #[test]
    fn chacon_certificate() {
        let cert = check_partially_bounded(&registry::chacon(), CheckMode::Symbolic).unwrap();
        assert_eq!(
            cert,
            PartialBoundedness::Certified(PartialBoundednessCertificate {
                cut_bound: 4,
                spread_bound: BigUint::from(2u32),
                threshold: 1,
                mode: VerifiedMode::Symbolic,
            })
        );
        let numeric = check_partially_bounded(&registry::chacon(), CheckMode::NumericUpTo(10)).unwrap();
        let c = numeric.certificate().unwrap();
        assert_eq!((c.cut_bound, c.threshold), (4, 1));
        assert_eq!(c.spread_bound, BigUint::from(2u32));
    }

    #[test]
    fn hajian_kakutani_certificate() {
        let cert = check_partially_bounded(&registry::hk(), CheckMode::Symbolic).unwrap();
        let c = cert.certificate().expect("certified");
        assert_eq!(c.cut_bound, 3);
        assert_eq!(c.spread_bound, BigUint::one());
        assert_eq!(c.threshold, 1);
        let c = check_partially_bounded(&registry::hk(), CheckMode::NumericUpTo(20)).unwrap();
        assert_eq!(c.certificate().unwrap().threshold, 1);
    }

    #[test]
    fn zero_spacers_are_refuted() {
        for mode in [CheckMode::Symbolic, CheckMode::NumericUpTo(8)] {
            match check_partially_bounded(&registry::finite_odometer(), mode).unwrap() {
                PartialBoundedness::Refuted(r) => assert_eq!(r.condition, 3),
                other => panic!("expected refutation, got {other:?}"),
            }
        }
    }

    #[test]
    fn raw_specs_are_rejected() {
        assert_eq!(
            check_partially_bounded(&registry::chacon_raw(), CheckMode::Symbolic).unwrap_err(),
            SpecError::NotNormalized
        );
    }

    #[test]
    fn growing_spread_is_refuted() {
        let spec = ParameterSpec::new(
            "spread",
            vec![],
            vec![StageRule::new(3, vec![SpacerExpr::new(1, 0, 0), SpacerExpr::new(2, 0, 0)]).unwrap()],
        )
        .unwrap();
        match check_partially_bounded(&spec, CheckMode::Symbolic).unwrap() {
            PartialBoundedness::Refuted(r) => assert_eq!(r.condition, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn mixed_growth_falls_back() {
        let spec = ParameterSpec::new(
            "mixed",
            vec![],
            vec![StageRule::new(3, vec![SpacerExpr::new(1, 0, 0), SpacerExpr::new(0, 1, 0)])
                .unwrap()
                .with_carry(SpacerExpr::new(2, 0, 0))],
        )
        .unwrap();
        assert!(matches!(
            check_partially_bounded(&spec, CheckMode::Symbolic).unwrap(),
            PartialBoundedness::FallBackToNumeric { .. }
        ));
    }

    #[test]
    fn sufficient_condition_examples() {
        assert_eq!(
            check_sufficient_conditions(&registry::chacon_raw()),
            SufficientReport::Holds { cut_bound: 3, spacer_bound: BigUint::from(2u32), threshold: 0 }
        );
        assert_eq!(
            check_sufficient_conditions(&registry::hk_raw()),
            SufficientReport::Holds { cut_bound: 2, spacer_bound: BigUint::one(), threshold: 0 }
        );
        let no_last = ParameterSpec::new(
            "no-last",
            vec![],
            vec![StageRule::new(2, vec![SpacerExpr::constant(1)]).unwrap().with_last(SpacerExpr::ZERO)],
        )
        .unwrap();
        assert!(matches!(check_sufficient_conditions(&no_last), SufficientReport::Fails { .. }));
        assert!(matches!(check_sufficient_conditions(&registry::chacon()), SufficientReport::Fails { .. }));
    }

    #[test]
    fn sufficient_implies_certificate_for_registry() {
        for raw in [registry::chacon_raw(), registry::hk_raw()] {
            assert!(check_sufficient_conditions(&raw).holds());
            let norm = normalize(&raw).unwrap();
            assert!(check_partially_bounded(&norm, CheckMode::NumericUpTo(12)).unwrap().certificate().is_some());
        }
    }
}
