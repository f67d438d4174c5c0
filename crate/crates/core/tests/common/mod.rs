//! Brute-force oracles for the integration tests. Nothing here calls into the
//! words, tower, analysis or inverseiso modules.
#![allow(dead_code)]

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use rand::Rng;

/// Raw stage rule with interior spacers `a h + b` and last spacer `alpha h + beta`.
#[derive(Debug, Clone)]
pub struct RawRule {
    pub cuts: usize,
    pub interior: Vec<(u64, u64)>,
    pub last: (u64, u64),
}

#[derive(Debug, Clone)]
pub struct RawSpec {
    pub preperiod: Vec<RawRule>,
    pub cycle: Vec<RawRule>,
}

/// Concrete normalized stage: cuts, spacer tuple and `|w_n|`.
#[derive(Debug, Clone)]
pub struct OracleStage {
    pub cuts: usize,
    pub spacers: Vec<BigUint>,
    pub len: BigUint,
}

fn expr(a: u64, b: u64) -> String {
    match (a, b) {
        (0, b) => b.to_string(),
        (1, 0) => "h".into(),
        (1, b) => format!("h+{b}"),
        (a, 0) => format!("{a}h"),
        (a, b) => format!("{a}h+{b}"),
    }
}

impl RawRule {
    fn text(&self) -> String {
        let s: Vec<String> = self.interior.iter().map(|&(a, b)| expr(a, b)).collect();
        format!("r={}, s=({}), last={}", self.cuts, s.join(", "), expr(self.last.0, self.last.1))
    }
}

impl RawSpec {
    pub fn rule(&self, n: usize) -> &RawRule {
        if n < self.preperiod.len() {
            &self.preperiod[n]
        } else {
            &self.cycle[(n - self.preperiod.len()) % self.cycle.len()]
        }
    }

    pub fn text(&self, name: &str) -> String {
        let list = |rules: &[RawRule]| rules.iter().map(RawRule::text).collect::<Vec<_>>().join("; ");
        format!("name: {name}\npreperiod: [{}]\ncycle: [{}]\n", list(&self.preperiod), list(&self.cycle))
    }

    /// Stages `0..count`, plus `|w_count|` as the final length.
    pub fn stages(&self, count: usize) -> (Vec<OracleStage>, BigUint) {
        let mut h = BigUint::from(1u32);
        let mut acc = BigUint::zero();
        let mut out = Vec::with_capacity(count);
        for n in 0..count {
            let rule = self.rule(n);
            let interior: Vec<BigUint> = rule.interior.iter().map(|&(a, b)| &h * a + b).collect();
            let last = &h * rule.last.0 + rule.last.1;
            let spacers = interior.iter().map(|s| s + &acc).collect();
            out.push(OracleStage { cuts: rule.cuts, spacers, len: &h - &acc });
            h = &h * rule.cuts + interior.iter().sum::<BigUint>() + &last;
            acc += last;
        }
        (out, &h - &acc)
    }
}

pub fn chacon_raw() -> RawSpec {
    RawSpec { preperiod: vec![], cycle: vec![RawRule { cuts: 3, interior: vec![(0, 0), (0, 1)], last: (3, 1) }] }
}

pub fn hk_raw() -> RawSpec {
    RawSpec { preperiod: vec![], cycle: vec![RawRule { cuts: 2, interior: vec![(0, 0)], last: (2, 1) }] }
}

fn random_rule<R: Rng>(rng: &mut R, bounded: bool) -> RawRule {
    let cuts = rng.gen_range(2..=4);
    let interior: Vec<(u64, u64)> =
        (0..cuts - 1).map(|_| (if bounded { 0 } else { rng.gen_range(0..=1) }, rng.gen_range(0..=3))).collect();
    let last = if bounded {
        // 2 last >= h_{n+1} = r h + sum + last
        let sum: u64 = interior.iter().map(|e| e.1).sum();
        (cuts as u64 + rng.gen_range(0..=2), sum + rng.gen_range(0..=3))
    } else {
        (rng.gen_range(0..=3), rng.gen_range(0..=3))
    };
    RawRule { cuts, interior, last }
}

/// Random raw spec; with `bounded` the cycle satisfies the bounded-spacer,
/// large-last-column sufficient conditions while the preperiod is arbitrary.
pub fn random_raw<R: Rng>(rng: &mut R, bounded: bool) -> RawSpec {
    let pre = rng.gen_range(0..=2);
    let cyc = rng.gen_range(1..=3);
    RawSpec {
        preperiod: (0..pre).map(|_| random_rule(rng, false)).collect(),
        cycle: (0..cyc).map(|_| random_rule(rng, bounded)).collect(),
    }
}

/// `w_n` as ASCII by direct concatenation.
pub fn naive_word(stages: &[OracleStage], n: usize) -> Vec<u8> {
    let mut w = vec![b'0'];
    for st in &stages[..n] {
        let mut next = w.clone();
        for s in &st.spacers {
            next.extend(std::iter::repeat_n(b'1', s.to_usize().unwrap()));
            next.extend_from_slice(&w);
        }
        w = next;
    }
    w
}

pub fn naive_find(pattern: &[u8], text: &[u8]) -> Vec<usize> {
    if pattern.len() > text.len() {
        return vec![];
    }
    (0..=text.len() - pattern.len()).filter(|&i| &text[i..i + pattern.len()] == pattern).collect()
}

/// Starts of the copies of `w_n` placed inside `w_m` by the construction.
pub fn expected_positions(stages: &[OracleStage], n: usize, m: usize) -> Vec<BigUint> {
    let mut pos = vec![BigUint::zero()];
    for st in &stages[n..m] {
        let mut offsets = vec![BigUint::zero()];
        for s in &st.spacers {
            let o = offsets.last().unwrap() + &st.len + s;
            offsets.push(o);
        }
        pos = offsets.iter().flat_map(|o| pos.iter().map(move |p| o + p)).collect();
    }
    pos
}

/// Copy offsets of stage `n` inside stage `n + 1`.
pub fn copy_offsets(st: &OracleStage) -> Vec<BigUint> {
    let mut offsets = vec![BigUint::zero()];
    for s in &st.spacers {
        let o = offsets.last().unwrap() + &st.len + s;
        offsets.push(o);
    }
    offsets
}

/// Is `s` a substring of `t c t` for some integer `c`? Tries every value that
/// can matter: the entries of `s` and one value that appears nowhere.
pub fn compatible_brute(s: &[u64], t: &[u64]) -> bool {
    let fresh = s.iter().chain(t).max().map_or(0, |m| m + 1);
    s.iter().copied().chain([fresh]).any(|c| {
        let mut hay = t.to_vec();
        hay.push(c);
        hay.extend_from_slice(t);
        hay.windows(s.len().max(1)).any(|w| w == s) || s.is_empty()
    })
}

/// Spacer tuple of the single stage obtained by stacking `tuples` in order
/// (first tuple applied first), read off as the gaps between the zeros of
/// the resulting word built from `0`.
pub fn merged_by_word(tuples: &[Vec<u64>]) -> Vec<u64> {
    let mut w = vec![b'0'];
    for t in tuples {
        let mut next = w.clone();
        for &s in t {
            next.extend(std::iter::repeat_n(b'1', s as usize));
            next.extend_from_slice(&w);
        }
        w = next;
    }
    let zeros: Vec<usize> = w.iter().enumerate().filter(|(_, &c)| c == b'0').map(|(i, _)| i).collect();
    zeros.windows(2).map(|p| (p[1] - p[0] - 1) as u64).collect()
}

/// Length of the `1`-run starting at `k`, or `None` if it reaches the end.
pub fn ones_after(text: &[u8], k: usize) -> Option<u64> {
    let run = text[k.min(text.len())..].iter().take_while(|&&c| c == b'1').count();
    (k + run < text.len()).then_some(run as u64)
}

/// Length of the `1`-run ending just before `k`, or `None` if it reaches the start.
pub fn ones_before(text: &[u8], k: usize) -> Option<u64> {
    let run = text[..k].iter().rev().take_while(|&&c| c == b'1').count();
    (run < k).then_some(run as u64)
}

pub fn occurs_at(text: &[u8], pattern: &[u8], k: i64) -> Option<bool> {
    if k < 0 || k as usize + pattern.len() > text.len() {
        return None;
    }
    Some(&text[k as usize..k as usize + pattern.len()] == pattern)
}
