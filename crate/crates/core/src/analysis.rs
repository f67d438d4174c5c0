//! Good and bad occurrences of `w_n` in a name `x` relative to a candidate
//! image name `y = S(x)`.
//!
//! Windows follow the shift convention of the tower: if `y` is the name of
//! `T^l(p)` and `x` the name of `p`, then `y[k] = x[k + l]`.

use std::collections::HashMap;

use num_rational::BigRational;
use num_traits::ToPrimitive;
use thiserror::Error;

use crate::params::{heights, ParameterSpec, PartialBoundednessCertificate};
use crate::tower::NameWindow;
use crate::words::{build_word, expected_occurrences, occurrences, Word, WordError, DEFAULT_CAP};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("x covers [{x_start}, {x_end}) but y covers [{y_start}, {y_end})")]
    RangeMismatch { x_start: i64, x_end: i64, y_start: i64, y_end: i64 },
    #[error("stage n = {n} must exceed kappa = {kappa}")]
    StageTooSmall { n: usize, kappa: usize },
    #[error("m = {m} must be at least n = {n}")]
    OuterStageTooSmall { m: usize, n: usize },
    #[error("two copies of w_n in y contain the w_kappa probe at {index}")]
    AmbiguousContainment { index: i64 },
    #[error(transparent)]
    Word(#[from] WordError),
}

/// Smallest `kappa >= N` with `|w_kappa| > S`.
pub fn select_kappa(spec: &ParameterSpec, cert: &PartialBoundednessCertificate) -> usize {
    let mut n = cert.threshold;
    loop {
        let h = heights(spec, n).pop().expect("nonempty");
        if h > cert.spread_bound {
            return n;
        }
        n += 1;
    }
}

/// Two name windows over the same range plus the stages being compared.
#[derive(Debug, Clone)]
pub struct CandidatePair {
    pub x: NameWindow,
    pub y: NameWindow,
    pub kappa: usize,
    pub n: usize,
    spec: ParameterSpec,
    cut_bound: usize,
    w_n: Word,
    w_kappa: Word,
}

impl CandidatePair {
    pub fn new(
        spec: &ParameterSpec,
        cert: &PartialBoundednessCertificate,
        x: NameWindow,
        y: NameWindow,
        n: usize,
    ) -> Result<Self, AnalysisError> {
        CandidatePair::with_kappa(spec, cert, x, y, n, select_kappa(spec, cert))
    }

    pub fn with_kappa(
        spec: &ParameterSpec,
        cert: &PartialBoundednessCertificate,
        x: NameWindow,
        y: NameWindow,
        n: usize,
        kappa: usize,
    ) -> Result<Self, AnalysisError> {
        if x.start() != y.start() || x.end() != y.end() {
            return Err(AnalysisError::RangeMismatch {
                x_start: x.start(),
                x_end: x.end(),
                y_start: y.start(),
                y_end: y.end(),
            });
        }
        if n <= kappa {
            return Err(AnalysisError::StageTooSmall { n, kappa });
        }
        let w_n = build_word(spec, n, DEFAULT_CAP)?.letters;
        let w_kappa = build_word(spec, kappa, DEFAULT_CAP)?.letters;
        Ok(CandidatePair { x, y, kappa, n, spec: spec.clone(), cut_bound: cert.cut_bound, w_n, w_kappa })
    }

    pub fn w_n(&self) -> &Word {
        &self.w_n
    }

    pub fn w_kappa(&self) -> &Word {
        &self.w_kappa
    }

    fn wn_len(&self) -> i64 {
        self.w_n.len() as i64
    }

    fn window_occurs(window: &NameWindow, pattern: &Word, i: i64) -> Option<bool> {
        let start = window.local(i)?;
        window.local(i + pattern.len() as i64 - 1)?;
        Some(window.letters.occurs_at(pattern, start))
    }

    /// Length of the `1`-run starting at `i`; `None` if it reaches the window edge.
    fn run_after(window: &NameWindow, i: i64) -> Option<u64> {
        let k = window.local(i)?;
        let run = window.letters.ones_run_from(k);
        (k + run < window.len()).then_some(run as u64)
    }

    /// Length of the `1`-run ending just before `i`; `None` if it reaches the edge.
    fn run_before(window: &NameWindow, i: i64) -> Option<u64> {
        let k = window.local(i - 1)? + 1;
        let run = window.letters.ones_run_before(k);
        (run < k).then_some(run as u64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Good,
    Bad,
    /// The `w_kappa` probe leaves the window.
    Indeterminate,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Good => "good",
            Verdict::Bad => "bad",
            Verdict::Indeterminate => "indeterminate",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OccurrenceRecord {
    pub index: i64,
    pub verdict: Verdict,
    /// Offset of the containing copy of `w_n` in `y`, which starts at `index - rho`.
    pub rho: Option<u64>,
    /// The `1`-run after this occurrence in `x`.
    pub next_gap: Option<u64>,
    /// The `1`-run after the containing copy in `y`.
    pub image_gap: Option<u64>,
}

/// Classify every occurrence of `w_n` in `x`.
pub fn classify(pair: &CandidatePair) -> Result<Vec<OccurrenceRecord>, AnalysisError> {
    let wn = pair.wn_len();
    let slack = wn - pair.w_kappa.len() as i64;
    let mut out = Vec::new();
    for pos in occurrences(&pair.w_n, &pair.x.letters) {
        let i = pair.x.anchor + pos as i64;
        let next_gap = CandidatePair::run_after(&pair.x, i + wn);
        let verdict = match CandidatePair::window_occurs(&pair.y, &pair.w_kappa, i) {
            None => Verdict::Indeterminate,
            Some(true) => Verdict::Good,
            Some(false) => Verdict::Bad,
        };
        let mut rho = None;
        let mut image_gap = None;
        if verdict == Verdict::Good {
            let found: Vec<i64> = ((i - slack)..=i)
                .filter(|&j| CandidatePair::window_occurs(&pair.y, &pair.w_n, j) == Some(true))
                .collect();
            match found.as_slice() {
                [] => {}
                [j] => {
                    rho = Some((i - j) as u64);
                    image_gap = CandidatePair::run_after(&pair.y, j + wn);
                }
                _ => return Err(AnalysisError::AmbiguousContainment { index: i }),
            }
        }
        out.push(OccurrenceRecord { index: i, verdict, rho, next_gap, image_gap });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Next,
    Previous,
}

/// One application of the `a = b` law from a good occurrence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AbCheck {
    pub index: i64,
    pub side: Side,
    pub neighbour: i64,
    pub a: u64,
    pub b: u64,
    /// The law's prediction: the neighbour is good iff `a == b`.
    pub predicted: Verdict,
    pub observed: Verdict,
}

impl AbCheck {
    pub fn agrees(&self) -> bool {
        self.predicted == self.observed
    }
}

/// Apply the law at the good occurrence `index`. `None` when the gaps, the
/// image copies or the neighbour's verdict cannot be resolved in the windows.
pub fn check_ab_law(pair: &CandidatePair, records: &[OccurrenceRecord], index: i64, side: Side) -> Option<AbCheck> {
    let find = |i: i64| records.binary_search_by_key(&i, |r| r.index).ok().map(|k| &records[k]);
    let rec = find(index)?;
    if rec.verdict != Verdict::Good {
        return None;
    }
    let image = index - rec.rho? as i64;
    let wn = pair.wn_len();
    let (a, b, neighbour, image_neighbour) = match side {
        Side::Next => {
            let a = CandidatePair::run_after(&pair.x, index + wn)?;
            let b = CandidatePair::run_after(&pair.y, image + wn)?;
            (a, b, index + wn + a as i64, image + wn + b as i64)
        }
        Side::Previous => {
            let a = CandidatePair::run_before(&pair.x, index)?;
            let b = CandidatePair::run_before(&pair.y, image)?;
            (a, b, index - a as i64 - wn, image - b as i64 - wn)
        }
    };
    // the law speaks about w_n 1^b w_n in y
    if CandidatePair::window_occurs(&pair.y, &pair.w_n, image_neighbour) != Some(true) {
        return None;
    }
    let observed = find(neighbour)?.verdict;
    if observed == Verdict::Indeterminate {
        return None;
    }
    let predicted = if a == b { Verdict::Good } else { Verdict::Bad };
    Some(AbCheck { index, side, neighbour, a, b, predicted, observed })
}

/// Every resolvable application of the law, in both directions.
pub fn ab_law_checks(pair: &CandidatePair, records: &[OccurrenceRecord]) -> Vec<AbCheck> {
    records
        .iter()
        .filter(|r| r.verdict == Verdict::Good)
        .flat_map(|r| [Side::Next, Side::Previous].map(|s| check_ab_law(pair, records, r.index, s)))
        .flatten()
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PropagationError {
    #[error("seed {0} is not a good occurrence with a located image copy")]
    SeedNotGood(i64),
    #[error("occurrence at {index} is {verdict:?} but the law propagates goodness to it")]
    Contradiction { index: i64, verdict: Verdict },
    #[error("occurrence at {index} has offset {found:?} instead of {expected}")]
    OffsetDrift { index: i64, expected: u64, found: Option<u64> },
    #[error("y[{index}] differs from x[{index} + l]")]
    ShiftMismatch { index: i64 },
}

/// Walk the law left and right from `seed`. When every occurrence in range
/// is good, return `l = rho(seed)` after checking `y[k] = x[k + l]` on the
/// overlap of the windows.
pub fn propagate_goodness(pair: &CandidatePair, records: &[OccurrenceRecord], seed: i64) -> Result<u64, PropagationError> {
    let pos = records.iter().position(|r| r.index == seed).ok_or(PropagationError::SeedNotGood(seed))?;
    let rec = &records[pos];
    let ell = match (rec.verdict, rec.rho) {
        (Verdict::Good, Some(rho)) => rho,
        _ => return Err(PropagationError::SeedNotGood(seed)),
    };
    let walk = |r: &OccurrenceRecord| -> Result<bool, PropagationError> {
        match r.verdict {
            Verdict::Indeterminate => Ok(false),
            Verdict::Bad => Err(PropagationError::Contradiction { index: r.index, verdict: r.verdict }),
            // image copy cut off by the window edge: nothing to compare
            Verdict::Good if r.rho.is_none() || r.rho == Some(ell) => Ok(true),
            Verdict::Good => Err(PropagationError::OffsetDrift { index: r.index, expected: ell, found: r.rho }),
        }
    };
    for r in &records[pos + 1..] {
        if !walk(r)? {
            break;
        }
    }
    for r in records[..pos].iter().rev() {
        if !walk(r)? {
            break;
        }
    }
    let shift = ell as i64;
    for k in pair.y.start()..pair.y.end() {
        if let (Some(a), Some(b)) = (pair.y.letter(k), pair.x.letter(k + shift)) {
            if a != b {
                return Err(PropagationError::ShiftMismatch { index: k });
            }
        }
    }
    Ok(ell)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Density {
    pub good: usize,
    /// Occurrences with a resolved verdict.
    pub resolved: usize,
    pub ratio: Option<BigRational>,
    /// `1 - 1/(2R + 1)`.
    pub threshold: BigRational,
}

impl Density {
    /// Strictly above the threshold.
    pub fn exceeds_threshold(&self) -> bool {
        self.ratio.as_ref().is_some_and(|r| *r > self.threshold)
    }
}

pub fn density_threshold(cut_bound: usize) -> BigRational {
    let r = 2 * cut_bound as u64;
    BigRational::new(r.into(), (r + 1).into())
}

/// Fraction of good occurrences among those with a resolved verdict.
pub fn good_density(pair: &CandidatePair, records: &[OccurrenceRecord]) -> Density {
    let good = records.iter().filter(|r| r.verdict == Verdict::Good).count();
    let resolved = records.iter().filter(|r| r.verdict != Verdict::Indeterminate).count();
    let ratio = (resolved > 0).then(|| BigRational::new(good.into(), resolved.into()));
    Density { good, resolved, ratio, threshold: density_threshold(pair.cut_bound) }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Total {
    TotallyGood,
    TotallyBad,
    Mixed,
    Indeterminate,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TotalRecord {
    pub index: i64,
    pub verdict: Total,
    /// `rho` of the first constituent copy of `w_n`, when totally good.
    pub rho: Option<u64>,
}

/// Aggregate the verdicts of the `w_n` copies inside each occurrence of `w_m` in `x`.
pub fn classify_totally(pair: &CandidatePair, records: &[OccurrenceRecord], m: usize) -> Result<Vec<TotalRecord>, AnalysisError> {
    if m < pair.n {
        return Err(AnalysisError::OuterStageTooSmall { m, n: pair.n });
    }
    let w_m = build_word(&pair.spec, m, DEFAULT_CAP)?.letters;
    let inner: Vec<i64> = expected_occurrences(&pair.spec, pair.n, m)?
        .iter()
        .map(|o| o.to_i64().expect("offset fits"))
        .collect();
    let by_index: HashMap<i64, &OccurrenceRecord> = records.iter().map(|r| (r.index, r)).collect();
    let mut out = Vec::new();
    for pos in occurrences(&w_m, &pair.x.letters) {
        let i = pair.x.anchor + pos as i64;
        let verdicts: Option<Vec<Verdict>> = inner.iter().map(|o| by_index.get(&(i + o)).map(|r| r.verdict)).collect();
        let verdict = match verdicts {
            None => Total::Indeterminate,
            Some(v) if v.contains(&Verdict::Indeterminate) => Total::Indeterminate,
            Some(v) if v.iter().all(|&x| x == Verdict::Good) => Total::TotallyGood,
            Some(v) if v.iter().all(|&x| x == Verdict::Bad) => Total::TotallyBad,
            Some(_) => Total::Mixed,
        };
        let rho = match verdict {
            Total::TotallyGood => by_index.get(&i).and_then(|r| r.rho),
            _ => None,
        };
        out.push(TotalRecord { index: i, verdict, rho });
    }
    Ok(out)
}

/// The law for totally good copies of `w_m`: when `x` reads `w_m 1^a w_m`
/// from a totally good copy and `y` reads `w_m 1^b w_m` from its image, the
/// next copy is totally good when `a = b` and totally bad otherwise.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TotalCheck {
    pub index: i64,
    /// Start of the next copy, `index + |w_m| + a`.
    pub next: i64,
    pub a: u64,
    pub b: u64,
    pub predicted: Total,
    pub observed: Total,
}

pub fn total_law_checks(pair: &CandidatePair, totals: &[TotalRecord], m: usize) -> Result<Vec<TotalCheck>, AnalysisError> {
    let m_len = heights(&pair.spec, m).pop().expect("nonempty").to_i64().expect("fits");
    let w_m = build_word(&pair.spec, m, DEFAULT_CAP)?.letters;
    let by_index: HashMap<i64, &TotalRecord> = totals.iter().map(|t| (t.index, t)).collect();
    let mut out = Vec::new();
    for t in totals.iter().filter(|t| t.verdict == Total::TotallyGood) {
        let Some(rho) = t.rho else { continue };
        let image = t.index - rho as i64;
        if CandidatePair::window_occurs(&pair.y, &w_m, image) != Some(true) {
            continue;
        }
        let (Some(a), Some(b)) =
            (CandidatePair::run_after(&pair.x, t.index + m_len), CandidatePair::run_after(&pair.y, image + m_len))
        else {
            continue;
        };
        if CandidatePair::window_occurs(&pair.y, &w_m, image + m_len + b as i64) != Some(true) {
            continue;
        }
        let next = t.index + m_len + a as i64;
        let Some(rec) = by_index.get(&next) else { continue };
        if rec.verdict == Total::Indeterminate {
            continue;
        }
        let predicted = if a == b { Total::TotallyGood } else { Total::TotallyBad };
        out.push(TotalCheck { index: t.index, next, a, b, predicted, observed: rec.verdict });
    }
    Ok(out)
}

/// Starts of the copies that the law reaches and finds mixed, which the
/// dichotomy forbids.
pub fn dichotomy_violations(pair: &CandidatePair, totals: &[TotalRecord], m: usize) -> Result<Vec<i64>, AnalysisError> {
    Ok(total_law_checks(pair, totals, m)?.into_iter().filter(|c| c.observed == Total::Mixed).map(|c| c.next).collect())
}

/// `x = name[start, start+len)` and `y = name[start+l, start+l+len)`, both
/// re-anchored at `anchor`: the windows of a point and of its `T^l` image.
pub fn shift_pair(name: &Word, start: usize, len: usize, ell: usize, anchor: i64) -> (NameWindow, NameWindow) {
    let x = NameWindow::from_word(anchor, name.slice(start, start + len));
    let y = NameWindow::from_word(anchor, name.slice(start + ell, start + ell + len));
    (x, y)
}

/// Insert `count` extra `1`s at local position `at` and truncate back to the
/// original length.
pub fn insert_ones(window: &NameWindow, at: usize, count: usize) -> NameWindow {
    let mut w = window.letters.slice(0, at);
    w.push_ones(count);
    w.push_word(&window.letters.slice(at, window.len() - count));
    NameWindow::from_word(window.anchor, w)
}
