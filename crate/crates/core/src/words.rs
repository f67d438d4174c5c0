//! Rank-one words: materialized construction, lazy letter access, substring
//! occurrences and the "builds" relation.
//!
//! Spacer tuples are 0-based: `w_{n+1} = w_n 1^{s_n(0)} w_n ... 1^{s_n(r_n-2)} w_n`.
//! (Some presentations start the displayed indices at `s_n(1)`; the tuple
//! has `r_n - 1` entries either way.)

use std::fmt;
use std::str::FromStr;

use bitvec::prelude::*;
use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use crate::params::{stage_table, ConcreteStage, ParameterSpec};

/// Default materialization cap in letters.
pub const DEFAULT_CAP: u64 = 1 << 26;

pub type Bits = BitVec<u64, Lsb0>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WordError {
    #[error("|w_{stage}| = {length} exceeds the materialization cap {cap}; use lazy access")]
    CapExceeded { stage: usize, length: BigUint, cap: u64 },
    #[error("spec must be normalized (no last-column spacers)")]
    NotNormalized,
    #[error("index {index} out of range for a word of length {length}")]
    IndexOutOfRange { index: BigUint, length: BigUint },
    #[error("invalid letter {0:?}; words use only '0' and '1'")]
    BadLetter(char),
}

/// A finite word over {0, 1}, packed one bit per letter (set bit = `1`).
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Word {
    bits: Bits,
}

impl Word {
    pub fn new() -> Self {
        Word::default()
    }

    pub fn from_bits(bits: Bits) -> Self {
        Word { bits }
    }

    pub fn from_letters<I: IntoIterator<Item = u8>>(letters: I) -> Self {
        Word { bits: letters.into_iter().map(|l| l != 0).collect() }
    }

    pub fn zero() -> Self {
        Word::from_letters([0])
    }

    pub fn ones(count: usize) -> Self {
        Word { bits: BitVec::repeat(true, count) }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<u8> {
        self.bits.get(i).map(|b| *b as u8)
    }

    pub fn letter(&self, i: usize) -> u8 {
        self.bits[i] as u8
    }

    pub fn bits(&self) -> &BitSlice<u64, Lsb0> {
        &self.bits
    }

    pub fn letters(&self) -> impl Iterator<Item = u8> + '_ {
        self.bits.iter().by_vals().map(|b| b as u8)
    }

    pub fn slice(&self, start: usize, end: usize) -> Word {
        Word { bits: self.bits[start..end].to_bitvec() }
    }

    pub fn push(&mut self, letter: u8) {
        self.bits.push(letter != 0);
    }

    pub fn push_ones(&mut self, count: usize) {
        let len = self.bits.len();
        self.bits.resize(len + count, true);
    }

    pub fn push_word(&mut self, other: &Word) {
        self.bits.extend_from_bitslice(&other.bits);
    }

    /// Begins and ends with `0`.
    pub fn in_cf(&self) -> bool {
        matches!((self.bits.first().as_deref(), self.bits.last().as_deref()), (Some(false), Some(false)))
    }

    pub fn occurs_at(&self, pattern: &Word, i: usize) -> bool {
        i + pattern.len() <= self.len() && self.bits[i..i + pattern.len()] == pattern.bits[..]
    }

    /// Length of the run of `1`s starting at `i` (stops at the end of the word).
    pub fn ones_run_from(&self, i: usize) -> usize {
        self.bits.get(i..).map_or(0, |s| s.leading_ones())
    }

    /// Length of the run of `1`s ending just before `i`.
    pub fn ones_run_before(&self, i: usize) -> usize {
        self.bits.get(..i).map_or(0, |s| s.trailing_ones())
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = self.bits.iter().by_vals().map(|b| if b { '1' } else { '0' }).collect();
        f.write_str(&s)
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word(\"{self}\")")
    }
}

impl FromStr for Word {
    type Err = WordError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut bits = Bits::with_capacity(s.len());
        for c in s.chars() {
            match c {
                '0' => bits.push(false),
                '1' => bits.push(true),
                other => return Err(WordError::BadLetter(other)),
            }
        }
        Ok(Word { bits })
    }
}

/// `w_n` together with its stage.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankOneWord {
    pub stage: usize,
    pub letters: Word,
}

impl RankOneWord {
    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }
}

fn require_normalized(spec: &ParameterSpec) -> Result<(), WordError> {
    if spec.is_normalized() {
        Ok(())
    } else {
        Err(WordError::NotNormalized)
    }
}

fn to_usize(v: &BigUint) -> Option<usize> {
    v.to_usize()
}

/// Materialize `w_n`.
pub fn build_word(spec: &ParameterSpec, n: usize, cap: u64) -> Result<RankOneWord, WordError> {
    require_normalized(spec)?;
    let table = stage_table(spec, n + 1);
    build_from_table(&table, n, cap)
}

fn build_from_table(table: &[ConcreteStage], n: usize, cap: u64) -> Result<RankOneWord, WordError> {
    let height = &table[n].height;
    if *height > BigUint::from(cap) {
        return Err(WordError::CapExceeded { stage: n, length: height.clone(), cap });
    }
    let mut w = Word::zero();
    for st in &table[..n] {
        let mut next = Word { bits: Bits::with_capacity(to_usize(&st.next_height()).unwrap_or(0)) };
        next.push_word(&w);
        for s in &st.spacers {
            next.push_ones(to_usize(s).expect("spacer below cap"));
            next.push_word(&w);
        }
        w = next;
    }
    Ok(RankOneWord { stage: n, letters: w })
}

/// All of `w_0, ..., w_n` (each below `cap`).
pub fn build_words(spec: &ParameterSpec, n: usize, cap: u64) -> Result<Vec<RankOneWord>, WordError> {
    require_normalized(spec)?;
    let table = stage_table(spec, n + 1);
    if table[n].height > BigUint::from(cap) {
        return Err(WordError::CapExceeded { stage: n, length: table[n].height.clone(), cap });
    }
    let mut out: Vec<RankOneWord> = vec![RankOneWord { stage: 0, letters: Word::zero() }];
    for (k, st) in table[..n].iter().enumerate() {
        let w = &out[k].letters;
        let mut next = w.clone();
        for s in &st.spacers {
            next.push_ones(to_usize(s).expect("spacer below cap"));
            next.push_word(w);
        }
        out.push(RankOneWord { stage: k + 1, letters: next });
    }
    Ok(out)
}

/// A position inside a spacer run: the `offset`-th `1` of the gap that
/// follows copy `gap` of `w_stage` inside `w_{stage+1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpacerSite {
    pub stage: usize,
    pub gap: usize,
    pub offset: BigUint,
}

/// Positional decomposition of an index of `w_n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordAddress {
    pub stage: usize,
    pub index: BigUint,
    /// Copy indices chosen while descending, outermost first: `path[0]` is the
    /// copy of `w_{n-1}` inside `w_n`, and so on.
    pub path: Vec<usize>,
    /// `None` when the descent reaches `w_0`.
    pub spacer: Option<SpacerSite>,
}

impl WordAddress {
    pub fn letter(&self) -> u8 {
        u8::from(self.spacer.is_some())
    }
}

/// Lazy access into arbitrarily deep words of a normalized spec.
#[derive(Debug, Clone)]
pub struct LazyWord {
    table: Vec<ConcreteStage>,
}

impl LazyWord {
    pub fn new(spec: &ParameterSpec, depth: usize) -> Result<Self, WordError> {
        require_normalized(spec)?;
        Ok(LazyWord { table: stage_table(spec, depth + 1) })
    }

    pub fn depth(&self) -> usize {
        self.table.len() - 1
    }

    pub fn stage(&self, n: usize) -> &ConcreteStage {
        &self.table[n]
    }

    pub fn height(&self, n: usize) -> &BigUint {
        &self.table[n].height
    }

    pub fn build(&self, n: usize, cap: u64) -> Result<RankOneWord, WordError> {
        build_from_table(&self.table, n, cap)
    }

    pub fn letter_at(&self, n: usize, j: &BigUint) -> Result<WordAddress, WordError> {
        let length = self.height(n);
        if j >= length {
            return Err(WordError::IndexOutOfRange { index: j.clone(), length: length.clone() });
        }
        let index = j.clone();
        let mut j = j.clone();
        let mut path = Vec::with_capacity(n);
        for m in (0..n).rev() {
            let st = &self.table[m];
            let h = &st.height;
            let mut k = 0usize;
            loop {
                if j < *h {
                    path.push(k);
                    break;
                }
                j -= h;
                let s = &st.spacers[k];
                if j < *s {
                    path.push(k);
                    return Ok(WordAddress {
                        stage: n,
                        index,
                        path,
                        spacer: Some(SpacerSite { stage: m, gap: k, offset: j }),
                    });
                }
                j -= s;
                k += 1;
            }
        }
        debug_assert!(j.is_zero());
        Ok(WordAddress { stage: n, index, path, spacer: None })
    }

    /// Offsets of the expected copies of `w_n` inside `w_m`.
    pub fn expected_occurrences(&self, n: usize, m: usize) -> Vec<BigUint> {
        assert!(n <= m, "expected occurrences need n <= m");
        let mut positions = vec![BigUint::zero()];
        for k in (n..m).rev() {
            let st = &self.table[k];
            let offsets = copy_offsets(st);
            positions = positions.iter().flat_map(|p| offsets.iter().map(move |o| p + o)).collect();
        }
        positions
    }
}

/// Start offsets of the `r_n` copies of `w_n` inside `w_{n+1}`.
pub fn copy_offsets(st: &ConcreteStage) -> Vec<BigUint> {
    let mut out = Vec::with_capacity(st.cuts);
    let mut pos = BigUint::zero();
    for k in 0..st.cuts {
        out.push(pos.clone());
        if k + 1 < st.cuts {
            pos += &st.height + &st.spacers[k];
        }
    }
    out
}

/// The letter of `w_n` at `j`, with its address.
pub fn letter_at(spec: &ParameterSpec, n: usize, j: &BigUint) -> Result<WordAddress, WordError> {
    LazyWord::new(spec, n)?.letter_at(n, j)
}

/// Expected copies of `w_n` in `w_m`, as indices into `w_m`.
pub fn expected_occurrences(spec: &ParameterSpec, n: usize, m: usize) -> Result<Vec<BigUint>, WordError> {
    Ok(LazyWord::new(spec, m)?.expected_occurrences(n, m))
}

fn kmp_table(p: &[bool]) -> Vec<usize> {
    let mut fail = vec![0usize; p.len()];
    let mut k = 0;
    for i in 1..p.len() {
        while k > 0 && p[i] != p[k] {
            k = fail[k - 1];
        }
        if p[i] == p[k] {
            k += 1;
        }
        fail[i] = k;
    }
    fail
}

/// All (possibly overlapping) occurrences of `pattern` in `text`.
pub fn occurrences(pattern: &Word, text: &Word) -> Vec<usize> {
    assert!(!pattern.is_empty(), "pattern must be nonempty");
    let p: Vec<bool> = pattern.bits.iter().by_vals().collect();
    let fail = kmp_table(&p);
    let mut out = Vec::new();
    let mut k = 0;
    for (i, c) in text.bits.iter().by_vals().enumerate() {
        while k > 0 && c != p[k] {
            k = fail[k - 1];
        }
        if c == p[k] {
            k += 1;
        }
        if k == p.len() {
            out.push(i + 1 - p.len());
            k = fail[k - 1];
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("builds is only defined for words that begin and end with 0")]
pub struct NotCf;

/// Result of testing whether `u` builds `w`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Builds {
    /// Gap lengths `a_1, ..., a_r` with `w = u 1^{a_1} u ... 1^{a_r} u`.
    pub gaps: Vec<usize>,
    /// Whether another decomposition exists. Always false for inputs that
    /// begin and end with `0`: each gap is the maximal run of `1`s after a copy.
    pub alternatives: bool,
}

/// Does `u` build `w`? Returns the witness gaps when it does.
pub fn builds(u: &Word, w: &Word) -> Result<Option<Builds>, NotCf> {
    if !u.in_cf() || !w.in_cf() {
        return Err(NotCf);
    }
    let mut pos = 0;
    let mut gaps = Vec::new();
    loop {
        if !w.occurs_at(u, pos) {
            return Ok(None);
        }
        pos += u.len();
        if pos == w.len() {
            return Ok(Some(Builds { gaps, alternatives: false }));
        }
        let a = w.ones_run_from(pos);
        gaps.push(a);
        pos += a;
    }
}
