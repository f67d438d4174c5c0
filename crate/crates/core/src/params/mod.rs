//! Cutting and spacer parameter sequences.
//!
//! A [`ParameterSpec`] describes the sequences `(r_n)` and `(s_n)` of a
//! rank-one transformation finitely: a preperiod of stage rules followed by a
//! cycle that repeats forever. Spacer counts are [`SpacerExpr`]s, affine in
//! the current height and in the accumulated last-column spacers, so the
//! classical "many spacers on the last column" constructions stay exactly
//! representable after [`normalize`].
//!
//! Spacer tuples are 0-based: `s_n(0)..s_n(r_n - 2)` sit between copies and
//! the optional `last` entry is `s_n(r_n - 1)` above the final copy. (Some
//! write-ups start the displayed tuple at `s_n(1)`; the worked examples only
//! agree with the 0-based reading.)

mod boundedness;
mod eventual;
mod expr;
mod grammar;

use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use thiserror::Error;

pub use boundedness::{
    check_sufficient_conditions, check_partially_bounded, CheckMode, SufficientReport, PartialBoundedness,
    PartialBoundednessCertificate, Refutation, VerifiedMode,
};
pub use eventual::{accumulator_behaviour, decide_eventually, Affine2, AccBehaviour, Eventually};
pub use expr::SpacerExpr;
pub use grammar::{parse_spec, ParseError};

/// The construction rule for one stage: `cuts` subcolumns, `cuts - 1`
/// interior spacer counts, and either an explicit last-column count (raw
/// presentation) or a `carry` that feeds the accumulator (normalized
/// presentation).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StageRule {
    pub cuts: usize,
    pub spacers: Vec<SpacerExpr>,
    pub last: Option<SpacerExpr>,
    pub carry: Option<SpacerExpr>,
}

impl StageRule {
    pub fn new(cuts: usize, spacers: Vec<SpacerExpr>) -> Result<Self, SpecError> {
        let rule = StageRule { cuts, spacers, last: None, carry: None };
        rule.validate()?;
        Ok(rule)
    }

    pub fn with_last(mut self, last: SpacerExpr) -> Self {
        self.last = Some(last);
        self
    }

    pub fn with_carry(mut self, carry: SpacerExpr) -> Self {
        self.carry = Some(carry);
        self
    }

    pub fn validate(&self) -> Result<(), SpecError> {
        if self.cuts < 2 {
            return Err(SpecError::TooFewCuts(self.cuts));
        }
        if self.spacers.len() != self.cuts - 1 {
            return Err(SpecError::SpacerArity { cuts: self.cuts, found: self.spacers.len() });
        }
        if self.last.is_some() && self.carry.is_some() {
            return Err(SpecError::LastAndCarry);
        }
        Ok(())
    }

    /// The amount added to the accumulator after this stage.
    fn increment(&self) -> SpacerExpr {
        self.last.or(self.carry).unwrap_or(SpacerExpr::ZERO)
    }

    fn is_palindromic(&self) -> bool {
        let n = self.spacers.len();
        (0..n / 2).all(|i| self.spacers[i] == self.spacers[n - 1 - i])
    }

    /// The same rule with the interior spacer tuple reversed.
    pub fn reversed(&self) -> StageRule {
        let mut spacers = self.spacers.clone();
        spacers.reverse();
        StageRule { spacers, ..self.clone() }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpecError {
    #[error("a stage needs at least 2 cuts, got {0}")]
    TooFewCuts(usize),
    #[error("a stage with {cuts} cuts needs {} interior spacers, got {found}", cuts - 1)]
    SpacerArity { cuts: usize, found: usize },
    #[error("a rule cannot carry both `last` and `carry`")]
    LastAndCarry,
    #[error("the cycle must contain at least one rule")]
    EmptyCycle,
    #[error("`carry` entries belong to normalized presentations and cannot be mixed with `last`")]
    MixedPresentation,
    #[error("spec is not normalized (it still places spacers on the last column)")]
    NotNormalized,
    #[error("coefficient overflow while normalizing stage {stage}")]
    NormalizeOverflow { stage: usize },
}

/// A finitely described cutting and spacer parameter sequence.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ParameterSpec {
    pub name: String,
    pub preperiod: Vec<StageRule>,
    pub cycle: Vec<StageRule>,
}

impl ParameterSpec {
    pub fn new(
        name: impl Into<String>,
        preperiod: Vec<StageRule>,
        cycle: Vec<StageRule>,
    ) -> Result<Self, SpecError> {
        let spec = ParameterSpec { name: name.into(), preperiod, cycle };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), SpecError> {
        if self.cycle.is_empty() {
            return Err(SpecError::EmptyCycle);
        }
        let mut has_last = false;
        let mut has_carry = false;
        for rule in self.rules() {
            rule.validate()?;
            has_last |= rule.last.is_some();
            has_carry |= rule.carry.is_some();
        }
        if has_last && has_carry {
            return Err(SpecError::MixedPresentation);
        }
        Ok(())
    }

    pub fn rules(&self) -> impl Iterator<Item = &StageRule> {
        self.preperiod.iter().chain(self.cycle.iter())
    }

    /// True when no rule places spacers above the last subcolumn.
    pub fn is_normalized(&self) -> bool {
        self.rules().all(|r| r.last.is_none())
    }

    pub fn period(&self) -> usize {
        self.cycle.len()
    }

    /// The symbolic rule governing stage `n`.
    pub fn rule(&self, n: usize) -> &StageRule {
        if n < self.preperiod.len() {
            &self.preperiod[n]
        } else {
            &self.cycle[(n - self.preperiod.len()) % self.cycle.len()]
        }
    }

    /// Iterate over the concrete stages `0, 1, 2, ...`.
    pub fn stages(&self) -> Stages<'_> {
        Stages { spec: self, index: 0, height: BigUint::one(), acc: BigUint::zero() }
    }

    /// The spec with every interior spacer tuple reversed.
    pub fn reversed(&self, name: impl Into<String>) -> ParameterSpec {
        ParameterSpec {
            name: name.into(),
            preperiod: self.preperiod.iter().map(StageRule::reversed).collect(),
            cycle: self.cycle.iter().map(StageRule::reversed).collect(),
        }
    }

    pub fn cycle_is_palindromic(&self) -> bool {
        self.cycle.iter().all(StageRule::is_palindromic)
    }

    /// Serialize in the config grammar accepted by [`parse_spec`].
    pub fn to_config(&self) -> String {
        grammar::serialize(self)
    }
}

impl fmt::Display for ParameterSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_config())
    }
}

/// A stage with all spacer expressions evaluated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConcreteStage {
    pub index: usize,
    pub cuts: usize,
    pub spacers: Vec<BigUint>,
    /// `s_n(r_n - 1)`; zero in normalized presentations.
    pub last: BigUint,
    /// `h_n`.
    pub height: BigUint,
    /// `A_n`, the accumulator value at the start of the stage.
    pub acc: BigUint,
}

impl ConcreteStage {
    /// `h_{n+1} = r_n h_n + sum of all spacers`.
    pub fn next_height(&self) -> BigUint {
        let mut h = &self.height * self.cuts;
        for s in &self.spacers {
            h += s;
        }
        h + &self.last
    }

    pub fn interior_sum(&self) -> BigUint {
        self.spacers.iter().sum()
    }
}

/// Iterator over concrete stages of a spec; never terminates.
#[derive(Debug, Clone)]
pub struct Stages<'a> {
    spec: &'a ParameterSpec,
    index: usize,
    height: BigUint,
    acc: BigUint,
}

impl Iterator for Stages<'_> {
    type Item = ConcreteStage;

    fn next(&mut self) -> Option<ConcreteStage> {
        let rule = self.spec.rule(self.index);
        let spacers: Vec<BigUint> =
            rule.spacers.iter().map(|e| e.eval(&self.height, &self.acc)).collect();
        let last = rule.last.map(|e| e.eval(&self.height, &self.acc)).unwrap_or_default();
        let stage = ConcreteStage {
            index: self.index,
            cuts: rule.cuts,
            spacers,
            last,
            height: self.height.clone(),
            acc: self.acc.clone(),
        };
        let inc = rule.increment().eval(&self.height, &self.acc);
        self.height = stage.next_height();
        self.acc += inc;
        self.index += 1;
        Some(stage)
    }
}

/// The concrete rule at stage `n` (heights follow the stacking recurrence
/// from `h_0 = 1`).
pub fn rule_at(spec: &ParameterSpec, n: usize) -> ConcreteStage {
    spec.stages().nth(n).expect("stage iterator is infinite")
}

/// `h_0, ..., h_up_to`.
pub fn heights(spec: &ParameterSpec, up_to: usize) -> Vec<BigUint> {
    spec.stages().take(up_to + 1).map(|s| s.height).collect()
}

/// The first `count` concrete stages.
pub fn stage_table(spec: &ParameterSpec, count: usize) -> Vec<ConcreteStage> {
    spec.stages().take(count).collect()
}

/// Move every last-column spacer into later stages.
///
/// Each raw stage contributes its last-column count to the accumulator `A`,
/// and every later interior spacer is raised by `A`: `s'_n(i) = s_n(i) + A_n`.
/// Raw heights satisfy `h_n = h'_n + A_n`, so raw expressions in `h` are
/// rewritten in terms of the normalized height. Normalized specs are
/// returned unchanged.
pub fn normalize(spec: &ParameterSpec) -> Result<ParameterSpec, SpecError> {
    if spec.is_normalized() {
        return Ok(spec.clone());
    }
    let pre_len = spec.preperiod.len();
    let convert = |stage: usize, rule: &StageRule| -> Result<StageRule, SpecError> {
        let overflow = SpecError::NormalizeOverflow { stage };
        let spacers = rule
            .spacers
            .iter()
            .map(|e| {
                let acc = e
                    .height
                    .checked_add(e.acc)
                    .and_then(|v| v.checked_add(1))
                    .ok_or(overflow.clone())?;
                Ok(SpacerExpr::new(e.height, acc, e.constant))
            })
            .collect::<Result<Vec<_>, SpecError>>()?;
        let carry = match rule.last {
            Some(l) if !l.is_zero() => {
                let acc = l.height.checked_add(l.acc).ok_or(overflow.clone())?;
                Some(SpacerExpr::new(l.height, acc, l.constant))
            }
            _ => None,
        };
        Ok(StageRule { cuts: rule.cuts, spacers, last: None, carry })
    };
    let preperiod = spec
        .preperiod
        .iter()
        .enumerate()
        .map(|(i, r)| convert(i, r))
        .collect::<Result<Vec<_>, _>>()?;
    let cycle = spec
        .cycle
        .iter()
        .enumerate()
        .map(|(i, r)| convert(pre_len + i, r))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ParameterSpec { name: spec.name.clone(), preperiod, cycle })
}
