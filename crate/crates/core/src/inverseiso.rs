//! Spacer tuple calculus and the tests for isomorphism with the inverse.

use std::fmt;

use num_bigint::BigUint;
use num_integer::Integer;
use thiserror::Error;

use crate::params::{
    check_partially_bounded, decide_eventually, normalize, stage_table, AccBehaviour, Affine2, CheckMode,
    ConcreteStage, Eventually, ParameterSpec, PartialBoundedness, PartialBoundednessCertificate, SpacerExpr,
    SpecError, StageRule, accumulator_behaviour,
};
use crate::tower::NameWindow;
use crate::words::{build_word, occurrences, WordError, DEFAULT_CAP};

/// Cycle periods searched for groupings and numeric fallbacks.
pub const DEFAULT_HORIZON_PERIODS: usize = 32;

/// `(s(0), ..., s(r-2))`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct SpacerTuple(pub Vec<BigUint>);

impl SpacerTuple {
    pub fn from_u64s(entries: &[u64]) -> Self {
        SpacerTuple(entries.iter().map(|&e| BigUint::from(e)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn reverse(&self) -> SpacerTuple {
        SpacerTuple(self.0.iter().rev().cloned().collect())
    }

    pub fn is_palindromic(&self) -> bool {
        self.0.iter().eq(self.0.iter().rev())
    }

    pub fn is_constant(&self) -> bool {
        self.0.windows(2).all(|w| w[0] == w[1])
    }
}

impl From<&ConcreteStage> for SpacerTuple {
    fn from(st: &ConcreteStage) -> Self {
        SpacerTuple(st.spacers.clone())
    }
}

impl fmt::Display for SpacerTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|e| e.to_string()).collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// `s2 * s1 = s1 s2(0) s1 s2(1) ... s2(r2-2) s1`: the spacer tuple of two
/// consecutive stages merged into one.
pub fn star(s2: &SpacerTuple, s1: &SpacerTuple) -> SpacerTuple {
    let mut out = Vec::with_capacity((s1.len() + 1) * (s2.len() + 1) - 1);
    out.extend(s1.0.iter().cloned());
    for c in &s2.0 {
        out.push(c.clone());
        out.extend(s1.0.iter().cloned());
    }
    SpacerTuple(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("incompatibility compares tuples of equal length, got {0} and {1}")]
pub struct LengthMismatch(pub usize, pub usize);

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Compatibility {
    Incompatible,
    /// `s` occurs at `offset` of `s' c s'`; `c` is `None` when the alignment
    /// does not touch the middle entry.
    Compatible { offset: usize, c: Option<BigUint> },
}

impl Compatibility {
    pub fn is_incompatible(&self) -> bool {
        *self == Compatibility::Incompatible
    }
}

/// Is there an integer `c` with `s` a substring of `s' c s'`?
pub fn incompatible(s: &SpacerTuple, s_prime: &SpacerTuple) -> Result<Compatibility, LengthMismatch> {
    let len = s.len();
    if len != s_prime.len() {
        return Err(LengthMismatch(len, s_prime.len()));
    }
    'offsets: for offset in 0..=len + 1 {
        let mut c = None;
        for (k, entry) in s.0.iter().enumerate() {
            let p = offset + k;
            let expected = match p.cmp(&len) {
                std::cmp::Ordering::Less => &s_prime.0[p],
                std::cmp::Ordering::Equal => {
                    c = Some(entry.clone());
                    continue;
                }
                std::cmp::Ordering::Greater => &s_prime.0[p - len - 1],
            };
            if entry != expected {
                continue 'offsets;
            }
        }
        return Ok(Compatibility::Compatible { offset, c });
    }
    Ok(Compatibility::Incompatible)
}

/// Stages `from .. from+count` merged into one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grouping {
    pub from: usize,
    pub count: usize,
    /// Number of copies of `w_from` in `w_{from+count}`.
    pub q: BigUint,
    /// `s_{from+count-1} * ... * s_from`.
    pub t: SpacerTuple,
}

pub fn group_stages(spec: &ParameterSpec, from: usize, count: usize) -> Grouping {
    assert!(count >= 1, "a grouping covers at least one stage");
    let table = stage_table(spec, from + count);
    group_table(&table, from, count)
}

fn group_table(table: &[ConcreteStage], from: usize, count: usize) -> Grouping {
    let mut q = BigUint::from(1u32);
    let mut t: Option<SpacerTuple> = None;
    for st in &table[from..from + count] {
        q *= st.cuts;
        let s = SpacerTuple::from(st);
        t = Some(match t {
            None => s,
            Some(inner) => star(&s, &inner),
        });
    }
    Grouping { from, count, q, t: t.expect("count >= 1") }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InverseError {
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error("spec is not certified partially bounded: {0}")]
    NotCertified(String),
    #[error("inconclusive: {0}")]
    Inconclusive(String),
    #[error(transparent)]
    Word(#[from] WordError),
}

fn horizon_stages(spec: &ParameterSpec, periods: usize) -> usize {
    spec.preperiod.len() + periods * spec.period()
}

/// Certify a normalized spec, falling back to a numeric check over the horizon.
pub fn certify(spec: &ParameterSpec, horizon_periods: usize) -> Result<PartialBoundednessCertificate, InverseError> {
    let symbolic = check_partially_bounded(spec, CheckMode::Symbolic)?;
    let result = match symbolic {
        PartialBoundedness::FallBackToNumeric { .. } => {
            check_partially_bounded(spec, CheckMode::NumericUpTo(horizon_stages(spec, horizon_periods)))?
        }
        other => other,
    };
    match result {
        PartialBoundedness::Certified(c) => Ok(c),
        PartialBoundedness::Refuted(r) => Err(InverseError::NotCertified(r.to_string())),
        PartialBoundedness::FallBackToNumeric { reason } => Err(InverseError::NotCertified(reason)),
    }
}

fn palindrome_gaps(rule: &StageRule) -> Vec<Affine2> {
    let s = &rule.spacers;
    let len = s.len();
    (0..len / 2)
        .flat_map(|i| {
            let d = Affine2::from_expr(&s[i]).sub(&Affine2::from_expr(&s[len - 1 - i]));
            [d.scale(-1), d]
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InverseVerdict {
    pub isomorphic_to_inverse: bool,
    /// Smallest `N` with `s_n` palindromic for every `n >= N`.
    pub n: Option<usize>,
    /// Cycle positions whose tuples are palindromic at only finitely many stages.
    pub never_palindromic: Vec<usize>,
    pub certificate: PartialBoundednessCertificate,
}

/// Isomorphic to the inverse iff the spacer tuples are eventually palindromic.
///
/// The criterion is applied to the normalized presentation; normalizing adds
/// the same amount to every entry of a tuple, which does not change whether
/// it is a palindrome.
pub fn decide_inverse_isomorphic(spec: &ParameterSpec, horizon_periods: usize) -> Result<InverseVerdict, InverseError> {
    let spec = normalize(spec)?;
    let certificate = certify(&spec, horizon_periods)?;
    let horizon = horizon_stages(&spec, horizon_periods);
    match decide_eventually(&spec, horizon, palindrome_gaps) {
        Eventually::Holds { from } => {
            Ok(InverseVerdict { isomorphic_to_inverse: true, n: Some(from), never_palindromic: vec![], certificate })
        }
        Eventually::Fails { .. } => Ok(InverseVerdict {
            isomorphic_to_inverse: false,
            n: None,
            never_palindromic: never_palindromic_positions(&spec),
            certificate,
        }),
        Eventually::Unknown { reason } => Err(InverseError::Inconclusive(reason)),
    }
}

fn never_palindromic_positions(spec: &ParameterSpec) -> Vec<usize> {
    let acc = accumulator_behaviour(spec);
    let grows = acc == AccBehaviour::Unbounded;
    spec.cycle
        .iter()
        .enumerate()
        .filter(|(_, rule)| {
            palindrome_gaps(rule).iter().step_by(2).any(|g| {
                let g = match &acc {
                    AccBehaviour::Frozen(v) => g.freeze_acc(v),
                    AccBehaviour::Unbounded => g.clone(),
                };
                let sign_h = g.h.sign();
                let sign_a = if grows { g.acc.sign() } else { num_bigint::Sign::NoSign };
                match (sign_h, sign_a) {
                    (num_bigint::Sign::NoSign, num_bigint::Sign::NoSign) => g.constant.sign() != num_bigint::Sign::NoSign,
                    (x, num_bigint::Sign::NoSign) | (num_bigint::Sign::NoSign, x) => x != num_bigint::Sign::NoSign,
                    (x, y) => x == y,
                }
            })
        })
        .map(|(p, _)| p)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Basis {
    Symbolic,
    NumericUpTo(usize),
    /// Incompatible blocks recur through the searched stages.
    Horizon(usize),
    /// Reversed-twin structure: incompatibility recurs by the merged-stage
    /// lemma wherever the tuples are not palindromes.
    ReversedTwin,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Status {
    Holds(Basis),
    Fails { stage: Option<usize>, detail: String },
    Unknown(String),
}

impl Status {
    pub fn holds(&self) -> bool {
        matches!(self, Status::Holds(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IncompatibleBlock {
    pub grouping_a: Grouping,
    pub t_prime: SpacerTuple,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NonIsoReport {
    pub criteria_met: bool,
    /// Conditions (1) to (4): commensurable parameters, a common spread bound
    /// across both specs, spacers at least the word length, and a bounded
    /// grouping with infinitely many incompatible blocks.
    pub conditions: [Status; 4],
    pub spread_bound: Option<BigUint>,
    pub from_stage: usize,
    pub blocks: Vec<IncompatibleBlock>,
    /// Bound on `q` over the reported blocks.
    pub q_bound: Option<BigUint>,
}

fn sum_expr(rule: &StageRule) -> SpacerExpr {
    rule.spacers.iter().fold(SpacerExpr::ZERO, |acc, e| {
        SpacerExpr::new(acc.height + e.height, acc.acc + e.acc, acc.constant + e.constant)
    })
}

fn same_dynamics(a: &StageRule, b: &StageRule) -> bool {
    a.cuts == b.cuts && sum_expr(a) == sum_expr(b) && a.carry.unwrap_or_default() == b.carry.unwrap_or_default()
}

fn joint_span(a: &ParameterSpec, b: &ParameterSpec) -> (usize, usize) {
    let pre = a.preperiod.len().max(b.preperiod.len());
    (pre, a.period().lcm(&b.period()))
}

/// Sufficient conditions for `a` and `b` not to be isomorphic. A negative
/// outcome only means the conditions were not established.
pub fn check_non_isomorphism(a: &ParameterSpec, b: &ParameterSpec, horizon_periods: usize) -> Result<NonIsoReport, InverseError> {
    let a = normalize(a)?;
    let b = normalize(b)?;
    let (pre, lcm) = joint_span(&a, &b);
    let horizon = pre + horizon_periods.max(1) * lcm;
    let ta = stage_table(&a, horizon + 1);
    let tb = stage_table(&b, horizon + 1);

    let symbolic_1 = (0..pre + lcm).all(|n| same_dynamics(a.rule(n), b.rule(n)));
    let cond1 = if symbolic_1 {
        Status::Holds(Basis::Symbolic)
    } else {
        match (0..=horizon).find(|&n| ta[n].cuts != tb[n].cuts || ta[n].interior_sum() != tb[n].interior_sum()) {
            Some(n) => Status::Fails { stage: Some(n), detail: "cuts or spacer sums differ".into() },
            None => Status::Holds(Basis::NumericUpTo(horizon)),
        }
    };

    let (cert_a, cert_b) = (certify(&a, horizon_periods), certify(&b, horizon_periods));
    let cond3 = match (&cert_a, &cert_b) {
        (Ok(ca), Ok(cb)) => {
            let basis = match (&ca.mode, &cb.mode) {
                (crate::params::VerifiedMode::Symbolic, crate::params::VerifiedMode::Symbolic) => Basis::Symbolic,
                _ => Basis::NumericUpTo(horizon),
            };
            Status::Holds(basis)
        }
        (Err(e), _) | (_, Err(e)) => Status::Fails { stage: None, detail: e.to_string() },
    };
    let from_stage = match (&cert_a, &cert_b) {
        (Ok(ca), Ok(cb)) => ca.threshold.max(cb.threshold),
        _ => 0,
    };

    let mut spread_bound = None;
    let cond2 = if !cond1.holds() {
        Status::Unknown("requires commensurable parameters".into())
    } else {
        let cross_max = |n: usize| -> Option<BigUint> {
            let (sa, sb) = (&ta[n].spacers, &tb[n].spacers);
            sa.iter().flat_map(|x| sb.iter().map(move |y| if x > y { x - y } else { y - x })).max()
        };
        let numeric_max = (from_stage..=horizon).filter_map(cross_max).max().unwrap_or_default();
        if symbolic_1 {
            let acc = accumulator_behaviour(&a);
            let varying = (pre..pre + lcm).any(|n| {
                a.rule(n).spacers.iter().any(|x| {
                    b.rule(n).spacers.iter().any(|y| {
                        let d = Affine2::from_expr(x).sub(&Affine2::from_expr(y));
                        let d = match &acc {
                            AccBehaviour::Frozen(v) => d.freeze_acc(v),
                            AccBehaviour::Unbounded => d,
                        };
                        !(d.h == 0.into() && d.acc == 0.into())
                    })
                })
            });
            if varying {
                Status::Unknown("a cross difference varies with h or A".into())
            } else {
                spread_bound = Some(numeric_max + 1u32);
                Status::Holds(Basis::Symbolic)
            }
        } else {
            spread_bound = Some(numeric_max + 1u32);
            Status::Holds(Basis::NumericUpTo(horizon))
        }
    };

    let mut blocks = Vec::new();
    let mut n = from_stage;
    while n + 3 <= horizon + 1 && cond1.holds() {
        if ta[n].spacers != tb[n].spacers {
            let ga = group_table(&ta, n, 3);
            let gb = group_table(&tb, n, 3);
            if incompatible(&ga.t, &gb.t).map(|c| c.is_incompatible()).unwrap_or(false) {
                blocks.push(IncompatibleBlock { grouping_a: ga, t_prime: gb.t });
                n += 3;
                continue;
            }
        }
        n += 1;
    }
    let q_bound = blocks.iter().map(|b| b.grouping_a.q.clone()).max().map(|q| q + 1u32);
    let twin = is_reversed_twin(&a, &b);
    let cond4 = if blocks.is_empty() {
        Status::Unknown(format!("no incompatible three-stage block in stages {from_stage}..={horizon}"))
    } else if twin && matches!(decide_eventually(&a, horizon, palindrome_gaps), Eventually::Fails { .. }) {
        Status::Holds(Basis::ReversedTwin)
    } else {
        let late = horizon.saturating_sub((horizon - from_stage) / 3);
        if blocks.iter().any(|b| b.grouping_a.from >= late) {
            Status::Holds(Basis::Horizon(horizon))
        } else {
            Status::Unknown(format!("incompatible blocks stop before stage {late}"))
        }
    };

    let conditions = [cond1, cond2, cond3, cond4];
    let criteria_met = conditions.iter().all(Status::holds);
    Ok(NonIsoReport { criteria_met, conditions, spread_bound, from_stage, blocks, q_bound })
}

fn is_reversed_twin(a: &ParameterSpec, b: &ParameterSpec) -> bool {
    let rev = a.reversed(b.name.clone());
    rev.preperiod == b.preperiod && rev.cycle == b.cycle
}

/// Result of replacing expected copies of `v_N` by the reversed-parameter word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rewrite {
    pub window: NameWindow,
    /// Name indices where a copy of `v_N` was replaced.
    pub replaced: Vec<i64>,
    /// Name indices of `0`s not covered by a complete copy (edge fragments).
    pub flagged: Vec<i64>,
}

/// Replace every complete copy of `v_N` in the window by `v'_N`, the stage
/// `N` word of the spec with every tuple reversed.
pub fn stable_rewrite(spec: &ParameterSpec, window: &NameWindow, n: usize) -> Result<Rewrite, InverseError> {
    let spec = normalize(spec)?;
    let v = build_word(&spec, n, DEFAULT_CAP)?.letters;
    let v_rev = build_word(&spec.reversed(format!("{}-reversed", spec.name)), n, DEFAULT_CAP)?.letters;
    let text = &window.letters;
    let mut out = text.clone();
    let mut covered = vec![false; text.len()];
    let mut replaced = Vec::new();
    let mut last_end = 0usize;
    for pos in occurrences(&v, text) {
        if pos < last_end {
            continue;
        }
        let mut w = out.slice(0, pos);
        w.push_word(&v_rev);
        w.push_word(&out.slice(pos + v.len(), out.len()));
        out = w;
        covered[pos..pos + v.len()].iter_mut().for_each(|c| *c = true);
        replaced.push(window.anchor + pos as i64);
        last_end = pos + v.len();
    }
    let flagged = (0..text.len())
        .filter(|&k| text.letter(k) == 0 && !covered[k])
        .map(|k| window.anchor + k as i64)
        .collect();
    Ok(Rewrite { window: NameWindow { anchor: window.anchor, letters: out, provenance: None }, replaced, flagged })
}
