//! Geometric cutting and stacking with exact coordinates.
//!
//! A point is `(stage n, level j, offset u)`: it sits in level `j` of the
//! column `C_n` at relative position `u in [0, 1)` across the level. Spacers
//! are never embedded in the real line; only the tower combinatorics is kept.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::params::ParameterSpec;
use crate::words::{copy_offsets, LazyWord, Word, WordError};

pub const DEFAULT_DEPTH: usize = 128;
/// Refinements allowed inside a single application of `T` or `T^-1`.
pub const DEFAULT_BUDGET: usize = 64;
/// Sampled offsets are `k / 2^OFFSET_BITS`.
pub const OFFSET_BITS: u32 = 53;
/// Columns up to this height keep their word materialized for fast reads.
const CACHE_HEIGHT: u64 = 1 << 22;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TowerPoint {
    pub stage: usize,
    pub level: BigUint,
    pub offset: BigRational,
}

impl TowerPoint {
    pub fn new(stage: usize, level: impl Into<BigUint>, offset: BigRational) -> Self {
        TowerPoint { stage, level: level.into(), offset }
    }

    /// `(n, j, num/den)` with small integers.
    pub fn at(stage: usize, level: u64, num: i64, den: i64) -> Self {
        TowerPoint::new(stage, level, BigRational::new(num.into(), den.into()))
    }
}

impl fmt::Display for TowerPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}/{}", self.stage, self.level, self.offset.numer(), self.offset.denom())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("points are written n:j:p/q, got {0:?}")]
pub struct PointSyntax(pub String);

impl FromStr for TowerPoint {
    type Err = PointSyntax;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || PointSyntax(s.to_string());
        let mut parts = s.trim().splitn(3, ':');
        let stage = parts.next().and_then(|p| p.parse().ok()).ok_or_else(err)?;
        let level = parts.next().and_then(|p| p.parse().ok()).ok_or_else(err)?;
        let offset = parts.next().ok_or_else(err)?;
        let offset = match offset.split_once('/') {
            Some((p, q)) => {
                let p: BigInt = p.parse().map_err(|_| err())?;
                let q: BigInt = q.parse().map_err(|_| err())?;
                if q.is_zero() {
                    return Err(err());
                }
                BigRational::new(p, q)
            }
            None => BigRational::from_integer(offset.parse().map_err(|_| err())?),
        };
        Ok(TowerPoint { stage, level, offset })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TowerError {
    #[error("orbit of {point} is undefined {direction:?}: still on the column edge after {budget} refinements")]
    UndefinedOrbit { point: String, direction: Direction, budget: usize },
    #[error("stage {0} is beyond the precomputed depth")]
    DepthExceeded(usize),
    #[error("level {level} is outside C_{stage}")]
    LevelOutOfRange { stage: usize, level: BigUint },
    #[error("offset {0} is outside [0, 1)")]
    OffsetOutOfRange(String),
    #[error(transparent)]
    Word(#[from] WordError),
}

/// A finite piece `[a, b)` of a `T`-`P` name: letter `k` is the name at index
/// `anchor + k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NameWindow {
    pub anchor: i64,
    pub letters: Word,
    pub provenance: Option<TowerPoint>,
}

impl NameWindow {
    pub fn from_word(anchor: i64, letters: Word) -> Self {
        NameWindow { anchor, letters, provenance: None }
    }

    pub fn start(&self) -> i64 {
        self.anchor
    }

    pub fn end(&self) -> i64 {
        self.anchor + self.letters.len() as i64
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn letter(&self, i: i64) -> Option<u8> {
        let k = i.checked_sub(self.anchor)?;
        usize::try_from(k).ok().and_then(|k| self.letters.get(k))
    }

    /// Position inside `letters` of name index `i`, if in range.
    pub fn local(&self, i: i64) -> Option<usize> {
        let k = usize::try_from(i.checked_sub(self.anchor)?).ok()?;
        (k < self.letters.len()).then_some(k)
    }
}

impl fmt::Display for NameWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "anchor:{} letters:{}", self.anchor, self.letters)
    }
}

/// Mutable walker state. Unlike `TowerPoint` it is not kept canonical.
struct Cursor {
    stage: usize,
    level: BigUint,
    offset: BigRational,
}

/// The tower of a normalized spec, precomputed to a fixed depth.
#[derive(Debug, Clone)]
pub struct Tower {
    lazy: LazyWord,
    offsets: Vec<Vec<BigUint>>,
    cached: Vec<Word>,
    budget: usize,
}

impl Tower {
    pub fn new(spec: &ParameterSpec) -> Result<Self, TowerError> {
        Tower::with_limits(spec, DEFAULT_DEPTH, DEFAULT_BUDGET)
    }

    pub fn with_limits(spec: &ParameterSpec, depth: usize, budget: usize) -> Result<Self, TowerError> {
        let lazy = LazyWord::new(spec, depth)?;
        let offsets = (0..depth).map(|n| copy_offsets(lazy.stage(n))).collect();
        let mut cached = vec![Word::zero()];
        while cached.len() <= depth && *lazy.height(cached.len()) <= BigUint::from(CACHE_HEIGHT) {
            let n = cached.len() - 1;
            let w = &cached[n];
            let mut next = w.clone();
            for s in &lazy.stage(n).spacers {
                next.push_ones(s.to_usize().expect("cached height"));
                next.push_word(w);
            }
            cached.push(next);
        }
        Ok(Tower { lazy, offsets, cached, budget })
    }

    pub fn depth(&self) -> usize {
        self.lazy.depth()
    }

    pub fn height(&self, n: usize) -> &BigUint {
        self.lazy.height(n)
    }

    pub fn words(&self) -> &LazyWord {
        &self.lazy
    }

    fn cuts(&self, n: usize) -> usize {
        self.lazy.stage(n).cuts
    }

    pub fn validate(&self, p: &TowerPoint) -> Result<(), TowerError> {
        if p.stage > self.depth() {
            return Err(TowerError::DepthExceeded(p.stage));
        }
        if p.level >= *self.height(p.stage) {
            return Err(TowerError::LevelOutOfRange { stage: p.stage, level: p.level.clone() });
        }
        if p.offset < BigRational::zero() || p.offset >= BigRational::one() {
            return Err(TowerError::OffsetOutOfRange(p.offset.to_string()));
        }
        Ok(())
    }

    /// Split `u * r` into the copy index and the new offset.
    fn split(offset: &BigRational, r: usize) -> (usize, BigRational) {
        let scaled = offset * BigRational::from_integer(r.into());
        let k = scaled.floor();
        let rest = &scaled - &k;
        (k.to_integer().to_usize().expect("copy index"), rest)
    }

    /// The same point one stage deeper.
    pub fn refine(&self, p: &TowerPoint) -> Result<TowerPoint, TowerError> {
        let n = p.stage;
        if n >= self.depth() {
            return Err(TowerError::DepthExceeded(n + 1));
        }
        let (k, offset) = Tower::split(&p.offset, self.cuts(n));
        Ok(TowerPoint { stage: n + 1, level: &p.level + &self.offsets[n][k], offset })
    }

    /// The same point one stage shallower, if it lies in a copy of `C_{n-1}`.
    pub fn coarsen(&self, p: &TowerPoint) -> Option<TowerPoint> {
        let n = p.stage.checked_sub(1)?;
        let h = self.height(n);
        let offs = &self.offsets[n];
        let k = offs.partition_point(|o| *o <= p.level) - 1;
        let within = &p.level - &offs[k];
        if within >= *h {
            return None;
        }
        let r = BigRational::from_integer(self.cuts(n).into());
        let offset = (&p.offset + BigRational::from_integer(k.into())) / r;
        Some(TowerPoint { stage: n, level: within, offset })
    }

    /// Smallest stage at which the point lies in the column.
    pub fn canonicalize(&self, p: &TowerPoint) -> TowerPoint {
        let mut p = p.clone();
        while let Some(q) = self.coarsen(&p) {
            p = q;
        }
        p
    }

    fn step(&self, c: &mut Cursor, dir: Direction) -> Result<(), TowerError> {
        match dir {
            Direction::Forward => {
                let next = &c.level + 1u32;
                if next < *self.height(c.stage) {
                    c.level = next;
                    return Ok(());
                }
            }
            Direction::Backward => {
                if !c.level.is_zero() {
                    c.level -= 1u32;
                    return Ok(());
                }
            }
        }
        let start = TowerPoint { stage: c.stage, level: c.level.clone(), offset: c.offset.clone() };
        for _ in 0..self.budget {
            let n = c.stage;
            if n >= self.depth() {
                return Err(TowerError::DepthExceeded(n + 1));
            }
            let r = self.cuts(n);
            let (k, offset) = Tower::split(&c.offset, r);
            c.stage = n + 1;
            c.offset = offset;
            c.level = &c.level + &self.offsets[n][k];
            match dir {
                Direction::Forward if k + 1 < r => {
                    c.level += 1u32;
                    return Ok(());
                }
                Direction::Backward if k > 0 => {
                    c.level -= 1u32;
                    return Ok(());
                }
                _ => {}
            }
        }
        Err(TowerError::UndefinedOrbit { point: start.to_string(), direction: dir, budget: self.budget })
    }

    fn apply(&self, p: &TowerPoint, dir: Direction) -> Result<TowerPoint, TowerError> {
        self.validate(p)?;
        let mut c = Cursor { stage: p.stage, level: p.level.clone(), offset: p.offset.clone() };
        self.step(&mut c, dir)?;
        Ok(self.canonicalize(&TowerPoint { stage: c.stage, level: c.level, offset: c.offset }))
    }

    pub fn apply_t(&self, p: &TowerPoint) -> Result<TowerPoint, TowerError> {
        self.apply(p, Direction::Forward)
    }

    pub fn apply_t_inverse(&self, p: &TowerPoint) -> Result<TowerPoint, TowerError> {
        self.apply(p, Direction::Backward)
    }

    fn letter(&self, stage: usize, level: &BigUint) -> u8 {
        if let Some(w) = self.cached.get(stage) {
            return w.letter(level.to_usize().expect("cached level"));
        }
        self.lazy.letter_at(stage, level).expect("level in range").letter()
    }

    /// Is the point in the base `B_0` of the initial column?
    pub fn in_base0(&self, p: &TowerPoint) -> Result<bool, TowerError> {
        self.validate(p)?;
        Ok(self.letter(p.stage, &p.level) == 0)
    }

    /// Letters `i in [a, b)` with `0` exactly when `T^i(p)` lies in `B_0`.
    pub fn name_window(&self, p: &TowerPoint, a: i64, b: i64) -> Result<NameWindow, TowerError> {
        self.validate(p)?;
        let mut letters = Word::new();
        if a < b {
            let cursor = || Cursor { stage: p.stage, level: p.level.clone(), offset: p.offset.clone() };
            let mut back = Vec::new();
            if a < 0 {
                let mut c = cursor();
                for i in (a..0).rev() {
                    self.step(&mut c, Direction::Backward)?;
                    if i < b {
                        back.push(self.letter(c.stage, &c.level));
                    }
                }
            }
            letters = Word::from_letters(back.into_iter().rev());
            if b > 0 {
                let mut c = cursor();
                for i in 0..b {
                    if i > 0 {
                        self.step(&mut c, Direction::Forward)?;
                    }
                    if i >= a {
                        letters.push(self.letter(c.stage, &c.level));
                    }
                }
            }
        }
        Ok(NameWindow { anchor: a, letters, provenance: Some(p.clone()) })
    }

    /// A point with uniformly chosen level in `C_m` and a dyadic offset, in
    /// canonical form.
    pub fn sample_point<R: Rng>(&self, m: usize, rng: &mut R) -> TowerPoint {
        let h = self.height(m).to_u64().expect("sampling stage height fits in u64");
        let level = rng.gen_range(0..h);
        self.canonicalize(&TowerPoint { stage: m, level: level.into(), offset: random_offset(rng) })
    }

    /// The point refined until it sits at `stage`.
    pub fn refine_to(&self, p: &TowerPoint, stage: usize) -> Result<TowerPoint, TowerError> {
        let mut p = p.clone();
        while p.stage < stage {
            p = self.refine(&p)?;
        }
        Ok(p)
    }

    /// Compare the names of two points over `[a, b)`.
    pub fn separate(&self, p: &TowerPoint, q: &TowerPoint, a: i64, b: i64) -> Result<Separation, TowerError> {
        let x = self.name_window(p, a, b)?;
        let y = self.name_window(q, a, b)?;
        if let Some(k) = (0..x.len()).find(|&k| x.letters.letter(k) != y.letters.letter(k)) {
            return Ok(Separation::Separated { index: a + k as i64 });
        }
        if self.canonicalize(p) == self.canonicalize(q) {
            Ok(Separation::Identical)
        } else {
            Ok(Separation::NotSeparable)
        }
    }

    /// Sample `trials` pairs of points in distinct levels of `C_m` and check
    /// that their names differ on a centered window of length `window`.
    pub fn verify_injectivity(&self, trials: usize, window: u64, m: usize, seed: u64) -> Result<InjectivityReport, TowerError> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = self.height(m).to_u64().expect("sampling stage height fits in u64");
        assert!(h >= 2, "C_{m} has a single level");
        let a = -((window / 2) as i64);
        let b = a + window as i64;
        let mut report = InjectivityReport { trials, separated: 0, failures: Vec::new() };
        for _ in 0..trials {
            let j1 = rng.gen_range(0..h);
            let mut j2 = rng.gen_range(0..h - 1);
            if j2 >= j1 {
                j2 += 1;
            }
            let p = TowerPoint { stage: m, level: j1.into(), offset: random_offset(&mut rng) };
            let q = TowerPoint { stage: m, level: j2.into(), offset: random_offset(&mut rng) };
            match self.separate(&p, &q, a, b)? {
                Separation::Separated { .. } => report.separated += 1,
                _ => report.failures.push((p, q)),
            }
        }
        Ok(report)
    }
}

pub fn random_offset<R: Rng>(rng: &mut R) -> BigRational {
    let k: u64 = rng.gen_range(0..1u64 << OFFSET_BITS);
    BigRational::new(k.into(), BigInt::one() << OFFSET_BITS)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Separation {
    Separated { index: i64 },
    Identical,
    /// Distinct points whose names agree on the window: their levels only
    /// split at a deeper stage.
    NotSeparable,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InjectivityReport {
    pub trials: usize,
    pub separated: usize,
    pub failures: Vec<(TowerPoint, TowerPoint)>,
}

impl InjectivityReport {
    pub fn all_separated(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Product of `1 / r_k` for `k < n`: the width of one level of `C_n`.
pub fn level_width(tower: &Tower, n: usize) -> BigRational {
    let denom = (0..n).fold(BigInt::one(), |acc, k| acc * BigInt::from(tower.cuts(k)));
    BigRational::new(BigInt::one(), denom)
}
