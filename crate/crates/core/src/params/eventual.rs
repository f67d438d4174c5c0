//! Exact decisions about "for all sufficiently large n" statements.
//!
//! Every stage of a spec acts on the state `(h_n, A_n)` by an affine map with
//! nonnegative integer coefficients. A per-stage requirement `g(h, A) >= 0`
//! holds from some stage on if it holds at the first stage of the tail and
//! the region `{h >= 1, A >= 0, g_p >= 0}` is mapped into `{g_{p+1} >= 0}`
//! for every position `p` of the cycle. The inclusion is checked exactly on
//! the vertices and recession rays of the (two-dimensional) region. When the
//! induction does not close and no divergence argument applies, the answer
//! is [`Eventually::Unknown`], never a guess.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::{ParameterSpec, SpacerExpr, StageRule};

/// `h * x + acc * y + constant` over the integers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Affine2 {
    pub h: BigInt,
    pub acc: BigInt,
    pub constant: BigInt,
}

impl Affine2 {
    pub fn new(h: impl Into<BigInt>, acc: impl Into<BigInt>, constant: impl Into<BigInt>) -> Self {
        Affine2 { h: h.into(), acc: acc.into(), constant: constant.into() }
    }

    pub fn zero() -> Self {
        Self::new(0, 0, 0)
    }

    pub fn from_expr(e: &SpacerExpr) -> Self {
        Self::new(e.height, e.acc, e.constant)
    }

    pub fn eval(&self, h: &BigUint, acc: &BigUint) -> BigInt {
        &self.h * BigInt::from(h.clone()) + &self.acc * BigInt::from(acc.clone()) + &self.constant
    }

    fn eval_q(&self, h: &BigRational, acc: &BigRational) -> BigRational {
        BigRational::from(self.h.clone()) * h
            + BigRational::from(self.acc.clone()) * acc
            + BigRational::from(self.constant.clone())
    }

    fn linear_q(&self, dh: &BigRational, dacc: &BigRational) -> BigRational {
        BigRational::from(self.h.clone()) * dh + BigRational::from(self.acc.clone()) * dacc
    }

    pub fn add(&self, other: &Affine2) -> Affine2 {
        Affine2 { h: &self.h + &other.h, acc: &self.acc + &other.acc, constant: &self.constant + &other.constant }
    }

    pub fn sub(&self, other: &Affine2) -> Affine2 {
        Affine2 { h: &self.h - &other.h, acc: &self.acc - &other.acc, constant: &self.constant - &other.constant }
    }

    pub fn scale(&self, k: impl Into<BigInt>) -> Affine2 {
        let k = k.into();
        Affine2 { h: &self.h * &k, acc: &self.acc * &k, constant: &self.constant * &k }
    }

    /// `self` after substituting `h := fh`, `A := fa`.
    pub fn compose(&self, fh: &Affine2, fa: &Affine2) -> Affine2 {
        fh.scale(self.h.clone()).add(&fa.scale(self.acc.clone())).add(&Affine2::new(0, 0, self.constant.clone()))
    }

    /// Substitute a fixed accumulator value.
    pub fn freeze_acc(&self, acc: &BigUint) -> Affine2 {
        Affine2 {
            h: self.h.clone(),
            acc: BigInt::zero(),
            constant: &self.constant + &self.acc * BigInt::from(acc.clone()),
        }
    }
}

/// The affine maps `(h, A) -> (h', A')` performed by one stage.
pub(crate) fn transition(rule: &StageRule) -> (Affine2, Affine2) {
    let mut h_next = Affine2::new(rule.cuts as u64, 0, 0);
    for e in &rule.spacers {
        h_next = h_next.add(&Affine2::from_expr(e));
    }
    if let Some(l) = &rule.last {
        h_next = h_next.add(&Affine2::from_expr(l));
    }
    let inc = rule.last.or(rule.carry).unwrap_or(SpacerExpr::ZERO);
    let acc_next = Affine2::from_expr(&inc).add(&Affine2::new(0, 1, 0));
    (h_next, acc_next)
}

/// Long-run behaviour of the accumulator over the cycle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AccBehaviour {
    /// Constant from the start of the cycle on.
    Frozen(BigUint),
    /// Grows without bound.
    Unbounded,
}

pub fn accumulator_behaviour(spec: &ParameterSpec) -> AccBehaviour {
    let cycle_start = spec.stages().nth(spec.preperiod.len()).expect("infinite");
    let incs: Vec<SpacerExpr> =
        spec.cycle.iter().map(|r| r.last.or(r.carry).unwrap_or(SpacerExpr::ZERO)).collect();
    let static_inc = incs.iter().all(|e| e.height == 0 && e.constant == 0);
    let acc_free = incs.iter().all(|e| e.acc == 0);
    if static_inc && (acc_free || cycle_start.acc.is_zero()) {
        AccBehaviour::Frozen(cycle_start.acc)
    } else {
        AccBehaviour::Unbounded
    }
}

/// Outcome of an eventual-truth decision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Eventually {
    /// All requirements hold for every stage `>= from`, and `from` is the
    /// smallest such stage.
    Holds { from: usize },
    /// Requirements fail at infinitely many stages; `stage` is one failing
    /// stage past the preperiod and `constraint` indexes the failing
    /// requirement there.
    Fails { stage: usize, constraint: usize },
    Unknown { reason: String },
}

fn rq(v: &BigInt) -> BigRational {
    BigRational::from(v.clone())
}

/// Is `phi >= 0` on `{x : c(x) >= 0 for all c in constraints}`?
///
/// The region is pointed because `h >= 1` and `A >= 0` are always included.
fn nonneg_on(phi: &Affine2, constraints: &[Affine2]) -> bool {
    let mut cons: Vec<Affine2> = constraints.to_vec();
    cons.push(Affine2::new(1, 0, -1));
    cons.push(Affine2::new(0, 1, 0));
    let feasible = |h: &BigRational, a: &BigRational| cons.iter().all(|c| !c.eval_q(h, a).is_negative());
    let mut any_vertex = false;
    for i in 0..cons.len() {
        for j in (i + 1)..cons.len() {
            let (c1, c2) = (&cons[i], &cons[j]);
            let det = &c1.h * &c2.acc - &c1.acc * &c2.h;
            if det.is_zero() {
                continue;
            }
            // c1.h x + c1.acc y = -c1.constant, likewise for c2
            let det_q = rq(&det);
            let x = rq(&(-&c1.constant * &c2.acc + &c2.constant * &c1.acc)) / &det_q;
            let y = rq(&(-&c1.h * &c2.constant + &c2.h * &c1.constant)) / &det_q;
            if feasible(&x, &y) {
                any_vertex = true;
                if phi.eval_q(&x, &y).is_negative() {
                    return false;
                }
            }
        }
    }
    if !any_vertex {
        // empty region
        return true;
    }
    for c in &cons {
        for sign in [BigInt::one(), -BigInt::one()] {
            let dh = rq(&(&c.acc * &sign));
            let da = rq(&(-&c.h * &sign));
            if dh.is_zero() && da.is_zero() {
                continue;
            }
            let in_cone = cons.iter().all(|k| !k.linear_q(&dh, &da).is_negative());
            if in_cone && phi.linear_q(&dh, &da).is_negative() {
                return false;
            }
        }
    }
    true
}

/// Decide whether every requirement produced by `requirements(rule)` holds
/// at all sufficiently large stages, and from which stage on.
///
/// `horizon` is the number of stages past the preperiod that are evaluated
/// concretely before the inductive argument takes over.
pub fn decide_eventually<F>(spec: &ParameterSpec, horizon: usize, requirements: F) -> Eventually
where
    F: Fn(&StageRule) -> Vec<Affine2>,
{
    let pre = spec.preperiod.len();
    let period = spec.period();
    let periods = horizon.div_ceil(period).max(2);
    let last_stage = pre + periods * period;
    let acc_mode = accumulator_behaviour(spec);
    let frozen = |a: &Affine2| match &acc_mode {
        AccBehaviour::Frozen(v) => a.freeze_acc(v),
        AccBehaviour::Unbounded => a.clone(),
    };

    let mut last_failure: Option<usize> = None;
    for st in spec.stages().take(last_stage + 1) {
        let rule = spec.rule(st.index);
        if requirements(rule).iter().any(|g| g.eval(&st.height, &st.acc).is_negative()) {
            last_failure = Some(st.index);
        }
    }
    let from = last_failure.map_or(0, |n| n + 1);

    // Divergence: a requirement whose value tends to minus infinity along
    // its cycle position fails infinitely often.
    for (p, rule) in spec.cycle.iter().enumerate() {
        for (k, g) in requirements(rule).iter().enumerate() {
            let g = frozen(g);
            let acc_grows = acc_mode == AccBehaviour::Unbounded;
            let diverges = (g.h.is_negative() && !g.acc.is_positive())
                || (g.h.is_zero() && g.acc.is_negative() && acc_grows)
                || (g.h.is_zero() && g.acc.is_zero() && g.constant.is_negative());
            if diverges {
                let first = pre + p;
                let stage = spec
                    .stages()
                    .skip(first)
                    .step_by(period)
                    .take(4096)
                    .find(|st| g.eval(&st.height, &st.acc).is_negative())
                    .map(|st| st.index)
                    .unwrap_or(first);
                return Eventually::Fails { stage, constraint: k };
            }
        }
    }

    if from > last_stage {
        return Eventually::Unknown {
            reason: format!("requirements still fail at stage {last_stage}, the end of the evaluated horizon"),
        };
    }

    let extra: Vec<Affine2> = match &acc_mode {
        AccBehaviour::Frozen(v) => {
            let v = BigInt::from(v.clone());
            vec![Affine2::new(0, 1, -v.clone()), Affine2::new(0, -1, v)]
        }
        AccBehaviour::Unbounded => vec![],
    };
    for p in 0..period {
        let rule = &spec.cycle[p];
        let next = &spec.cycle[(p + 1) % period];
        let (fh, fa) = transition(rule);
        let mut region = requirements(rule);
        region.extend(extra.iter().cloned());
        for g in requirements(next) {
            let pulled = g.compose(&fh, &fa);
            if !nonneg_on(&pulled, &region) {
                return Eventually::Unknown {
                    reason: format!(
                        "no inductive certificate across cycle position {p}; holds numerically for stages {from}..={last_stage}"
                    ),
                };
            }
        }
    }
    Eventually::Holds { from }
}
