//! Block refinement (`⊑`), eventual domination (`≤*`), and membership in the
//! meager sets `E_{x,f}`, all evaluated on finite prefixes.
//!
//! A statement of the form "for all but finitely many n" is judged inside a
//! [`Window`]: indices below `threshold` are ignored and only blocks that end
//! at or before `limit` are looked at. Every check returns the violating
//! indices rather than a bare boolean.

use std::fmt;
use std::ops::Deref;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BlockError {
    #[error("sequence is empty")]
    EmptySequence,
    #[error("sequence is not strictly increasing at index {0}")]
    NotIncreasing(usize),
    #[error("sequence has length {have}, need at least {need}")]
    LengthTooShort { have: usize, need: usize },
    #[error("window threshold {threshold} exceeds limit {limit}")]
    BadWindow { threshold: u64, limit: u64 },
    #[error("only {found} non-adjacent violating indices in the window, need {need}")]
    InsufficientViolations { found: usize, need: usize },
    #[error("bounded search up to {0} found no certified pair")]
    SearchExhausted(usize),
    #[error("invalid bit string: {0}")]
    BadBits(String),
}

/// A finite strictly increasing sequence of naturals.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<u64>", into = "Vec<u64>")]
pub struct IncSeq(Vec<u64>);

impl IncSeq {
    pub fn new(values: Vec<u64>) -> Result<Self, BlockError> {
        if let Some(i) = values.windows(2).position(|w| w[0] >= w[1]) {
            return Err(BlockError::NotIncreasing(i + 1));
        }
        Ok(IncSeq(values))
    }

    /// `slope * n + offset` for `n < len`.
    pub fn affine(slope: u64, offset: u64, len: usize) -> Self {
        assert!(slope > 0, "affine sequence needs a positive slope");
        IncSeq((0..len as u64).map(|n| slope * n + offset).collect())
    }

    pub fn into_vec(self) -> Vec<u64> {
        self.0
    }
}

impl Deref for IncSeq {
    type Target = [u64];
    fn deref(&self) -> &[u64] {
        &self.0
    }
}

impl TryFrom<Vec<u64>> for IncSeq {
    type Error = BlockError;
    fn try_from(v: Vec<u64>) -> Result<Self, BlockError> {
        IncSeq::new(v)
    }
}

impl From<IncSeq> for Vec<u64> {
    fn from(s: IncSeq) -> Vec<u64> {
        s.0
    }
}

/// A finite bit string; serialized as a string of `0`/`1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct BitSeq(Vec<bool>);

impl BitSeq {
    pub fn new(bits: Vec<bool>) -> Self {
        BitSeq(bits)
    }

    pub fn zeros(len: usize) -> Self {
        BitSeq(vec![false; len])
    }

    pub fn push(&mut self, bit: bool) {
        self.0.push(bit);
    }

    /// This prefix followed by `fill` up to `len` bits.
    pub fn padded(&self, len: usize, fill: bool) -> BitSeq {
        let mut bits = self.0.clone();
        if bits.len() < len {
            bits.resize(len, fill);
        }
        BitSeq(bits)
    }

    /// Whether `self` is an initial segment of `other`.
    pub fn is_prefix_of(&self, other: &BitSeq) -> bool {
        other.0.starts_with(&self.0)
    }
}

impl Deref for BitSeq {
    type Target = [bool];
    fn deref(&self) -> &[bool] {
        &self.0
    }
}

impl fmt::Display for BitSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BitSeq {
    type Err = BlockError;
    fn from_str(s: &str) -> Result<Self, BlockError> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(BlockError::BadBits(s.to_owned())),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(BitSeq)
    }
}

impl TryFrom<String> for BitSeq {
    type Error = BlockError;
    fn try_from(s: String) -> Result<Self, BlockError> {
        s.parse()
    }
}

impl From<BitSeq> for String {
    fn from(b: BitSeq) -> String {
        b.to_string()
    }
}

/// Finite stand-in for "all but finitely many": indices from `threshold`,
/// blocks ending at or before `limit`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub threshold: u64,
    #[serde(default = "unbounded")]
    pub limit: u64,
}

fn unbounded() -> u64 {
    u64::MAX
}

impl Window {
    pub fn new(threshold: u64, limit: u64) -> Result<Self, BlockError> {
        if threshold > limit {
            return Err(BlockError::BadWindow { threshold, limit });
        }
        Ok(Window { threshold, limit })
    }

    /// Everything from `threshold` on.
    pub fn from(threshold: u64) -> Self {
        Window {
            threshold,
            limit: u64::MAX,
        }
    }
}

/// Whether some block `[f(k), f(k+1))` lies inside `[lo, hi)`.
pub fn contains_block(f: &[u64], lo: u64, hi: u64) -> bool {
    let k = f.partition_point(|&v| v < lo);
    k + 1 < f.len() && f[k + 1] <= hi
}

/// Indices `n` of `g`-blocks that `refines_at` judges.
pub fn judged_blocks(f: &[u64], g: &[u64], w: Window) -> Vec<usize> {
    let (Some(&f_last), true) = (f.last(), g.len() >= 2) else {
        return Vec::new();
    };
    let cap = w.limit.min(f_last);
    (0..g.len() - 1)
        .filter(|&n| n as u64 >= w.threshold && g[n + 1] <= cap)
        .collect()
}

/// Judged `g`-blocks containing no `f`-block. Empty means `f ⊑ g` at `w`.
pub fn refines_at(f: &[u64], g: &[u64], w: Window) -> Result<Vec<usize>, BlockError> {
    if f.is_empty() || g.is_empty() {
        return Err(BlockError::EmptySequence);
    }
    Ok(judged_blocks(f, g, w)
        .into_iter()
        .filter(|&n| !contains_block(f, g[n], g[n + 1]))
        .collect())
}

/// Indices in `[threshold, limit)` where `f(n) > g(n)`. Empty means `f ≤* g`
/// at `w`.
pub fn star_dominates_at(f: &[u64], g: &[u64], w: Window) -> Result<Vec<usize>, BlockError> {
    let need = usize::try_from(w.limit).unwrap_or(usize::MAX);
    for s in [f, g] {
        if s.len() < need {
            return Err(BlockError::LengthTooShort {
                have: s.len(),
                need,
            });
        }
    }
    Ok((w.threshold as usize..need)
        .filter(|&n| f[n] > g[n])
        .collect())
}

/// Membership of `z` in `E_{x,f}` with witness threshold `m`: every judged
/// block `[f(n), f(n+1))` with `n ≥ m` holds a position where `z` and `x`
/// differ.
pub fn e_member(
    z: &[bool],
    x: &[bool],
    f: &[u64],
    m: usize,
    w: Window,
) -> Result<bool, BlockError> {
    Ok(first_agreeing_block(z, x, f, m, w)?.is_none())
}

/// The first judged `f`-block at or after `m` on which `z` agrees with `x`.
pub fn first_agreeing_block(
    z: &[bool],
    x: &[bool],
    f: &[u64],
    m: usize,
    w: Window,
) -> Result<Option<usize>, BlockError> {
    let Some(&f_last) = f.last() else {
        return Ok(None);
    };
    let need = usize::try_from(f_last.min(w.limit)).unwrap_or(usize::MAX);
    for s in [z, x] {
        if s.len() < need {
            return Err(BlockError::LengthTooShort {
                have: s.len(),
                need,
            });
        }
    }
    Ok((m..f.len().saturating_sub(1))
        .filter(|&n| f[n + 1] <= w.limit)
        .find(|&n| (f[n] as usize..f[n + 1] as usize).all(|j| z[j] == x[j])))
}

/// `f ⊑ g` at `w`, which makes `E_{x,f} ⊆ E_{x,g}` on the judged range.
pub fn subset_implied(f: &[u64], g: &[u64], w: Window) -> Result<bool, BlockError> {
    Ok(refines_at(f, g, w)?.is_empty())
}

/// How the violating `g`-blocks are chosen for the non-inclusion witness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Thinning {
    /// Keep a greedy subset of pairwise non-adjacent indices.
    #[default]
    NonAdjacent,
    /// Use every violating index.
    Verbatim,
}

/// A point `z` of `E_{x,f}` lying outside `E_{y,g}` within the window.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub z: BitSeq,
    /// Every violating `g`-block index in the window.
    pub violations: Vec<usize>,
    /// The indices on which `z` copies `y`.
    pub selected: Vec<usize>,
}

pub fn non_subset_witness(
    x: &[bool],
    y: &[bool],
    f: &[u64],
    g: &[u64],
    w: Window,
) -> Result<Witness, BlockError> {
    non_subset_witness_with(x, y, f, g, w, Thinning::NonAdjacent)
}

/// Copies `y` on the selected violating `g`-blocks and the complement of
/// `x` everywhere else.
pub fn non_subset_witness_with(
    x: &[bool],
    y: &[bool],
    f: &[u64],
    g: &[u64],
    w: Window,
    thinning: Thinning,
) -> Result<Witness, BlockError> {
    let violations = refines_at(f, g, w)?;
    let selected: Vec<usize> = match thinning {
        Thinning::Verbatim => violations.clone(),
        Thinning::NonAdjacent => {
            let mut out: Vec<usize> = Vec::new();
            for &n in &violations {
                if out.last().is_none_or(|&prev| n > prev + 1) {
                    out.push(n);
                }
            }
            out
        }
    };
    if selected.len() < 2 {
        return Err(BlockError::InsufficientViolations {
            found: selected.len(),
            need: 2,
        });
    }
    let len = f.last().copied().max(g.last().copied()).unwrap_or(0) as usize;
    for s in [x, y] {
        if s.len() < len {
            return Err(BlockError::LengthTooShort {
                have: s.len(),
                need: len,
            });
        }
    }
    let mut bits: Vec<bool> = x[..len].iter().map(|&b| !b).collect();
    for &n in &selected {
        let (lo, hi) = (g[n] as usize, g[n + 1] as usize);
        bits[lo..hi].copy_from_slice(&y[lo..hi]);
    }
    Ok(Witness {
        z: BitSeq(bits),
        violations,
        selected,
    })
}

/// The `g`-block indices among `blocks` on which `z` equals `y` throughout.
pub fn agreeing_blocks(z: &[bool], y: &[bool], g: &[u64], blocks: &[usize]) -> Vec<usize> {
    blocks
        .iter()
        .copied()
        .filter(|&n| {
            n + 1 < g.len()
                && (g[n] as usize..g[n + 1] as usize)
                    .all(|j| j < z.len() && j < y.len() && z[j] == y[j])
        })
        .collect()
}

/// Two machine-checked pairs showing that `⊑` and `≤*` are independent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RemarkPairs {
    pub window: Window,
    /// `f ≤* g` on the whole window but `f ⋢ g`.
    pub dominated_not_refined: (IncSeq, IncSeq),
    /// `f ⊑ g` but `f ≤* g` fails somewhere in the window.
    pub refined_not_dominated: (IncSeq, IncSeq),
}

const SEARCH_SLOPES: std::ops::RangeInclusive<u64> = 1..=4;
const SEARCH_OFFSETS: std::ops::RangeInclusive<u64> = 0..=4;

/// Exhaustive search over pairs of affine sequences `a·n + b` of length
/// `bound`, judged on the window `[0, bound)`. Each returned pair is
/// re-checked before it is accepted.
pub fn remark_counterexamples(bound: usize) -> Result<RemarkPairs, BlockError> {
    let window = Window::new(0, bound as u64)?;
    let candidates: Vec<IncSeq> = SEARCH_SLOPES
        .flat_map(|a| SEARCH_OFFSETS.map(move |b| (a, b)))
        .map(|(a, b)| IncSeq::affine(a, b, bound))
        .collect();
    let pairs = || {
        candidates
            .iter()
            .flat_map(|f| candidates.iter().map(move |g| (f, g)))
    };
    // A pair only counts when at least two g-blocks are actually judged.
    let informative = |f: &IncSeq, g: &IncSeq| judged_blocks(f, g, window).len() >= 2;

    let mut first = None;
    let mut second = None;
    for (f, g) in pairs() {
        if !informative(f, g) {
            continue;
        }
        let star = star_dominates_at(f, g, window)?;
        let refine = refines_at(f, g, window)?;
        if first.is_none() && star.is_empty() && !refine.is_empty() {
            first = Some((f.clone(), g.clone()));
        }
        if second.is_none() && refine.is_empty() && !star.is_empty() {
            second = Some((f.clone(), g.clone()));
        }
        if first.is_some() && second.is_some() {
            break;
        }
    }
    match (first, second) {
        (Some(dominated_not_refined), Some(refined_not_dominated)) => Ok(RemarkPairs {
            window,
            dominated_not_refined,
            refined_not_dominated,
        }),
        _ => Err(BlockError::SearchExhausted(bound)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(v: &[u64]) -> IncSeq {
        IncSeq::new(v.to_vec()).unwrap()
    }

    fn bits(s: &str) -> BitSeq {
        s.parse().unwrap()
    }

    #[test]
    fn incseq_rejects_non_increasing() {
        assert_eq!(
            IncSeq::new(vec![0, 2, 2]),
            Err(BlockError::NotIncreasing(2))
        );
        assert!(serde_json::from_str::<IncSeq>("[3,1]").is_err());
    }

    #[test]
    fn refines_examples() {
        let unit = seq(&[0, 1, 2, 3, 4, 5, 6, 7, 8]);
        let even = seq(&[0, 2, 4, 6, 8]);
        let w = Window::new(0, 8).unwrap();
        assert!(refines_at(&unit, &even, w).unwrap().is_empty());
        assert_eq!(
            refines_at(&even, &unit, w).unwrap(),
            (0..8).collect::<Vec<_>>()
        );
        assert_eq!(refines_at(&[], &even, w), Err(BlockError::EmptySequence));
    }

    #[test]
    fn threshold_and_limit_restrict_judging() {
        let unit = seq(&[0, 1, 2, 3, 4, 5, 6, 7, 8]);
        let even = seq(&[0, 2, 4, 6, 8]);
        assert_eq!(
            refines_at(&even, &unit, Window::new(3, 6).unwrap()).unwrap(),
            vec![3, 4, 5]
        );
        // g-blocks beyond f's covered range are not judged.
        let short = seq(&[0, 2, 4]);
        assert_eq!(
            refines_at(&short, &unit, Window::from(0)).unwrap(),
            vec![0, 1, 2, 3]
        );
    }

    #[test]
    fn star_examples() {
        let id: Vec<u64> = (0..10).collect();
        let succ: Vec<u64> = (1..11).collect();
        let w = Window::new(0, 10).unwrap();
        assert!(star_dominates_at(&id, &id, w).unwrap().is_empty());
        assert_eq!(
            star_dominates_at(&succ, &id, w).unwrap(),
            (0..10).collect::<Vec<_>>()
        );
        assert_eq!(
            star_dominates_at(&id[..5], &id, w),
            Err(BlockError::LengthTooShort { have: 5, need: 10 })
        );
    }

    #[test]
    fn e_member_examples() {
        let x = BitSeq::zeros(16);
        let f: Vec<u64> = (0..=8).map(|n| 2 * n).collect();
        let w = Window::new(0, 16).unwrap();
        let z = bits(&"01".repeat(8));
        assert!(e_member(&z, &x, &f, 0, w).unwrap());
        assert!(!e_member(&x, &x, &f, 0, w).unwrap());
        assert!(!e_member(&x, &x, &f, 7, w).unwrap());
        assert!(matches!(
            e_member(&z[..4], &x, &f, 0, w),
            Err(BlockError::LengthTooShort { .. })
        ));
    }

    #[test]
    fn witness_thinning() {
        let x = BitSeq::zeros(16);
        let f: Vec<u64> = (0..=8).map(|n| 2 * n).collect();
        let g: Vec<u64> = (0..=16).collect();
        let w = Window::new(0, 16).unwrap();

        let wit = non_subset_witness(&x, &x, &f, &g, w).unwrap();
        assert_eq!(wit.violations, (0..16).collect::<Vec<_>>());
        assert_eq!(wit.selected, (0..16).step_by(2).collect::<Vec<_>>());
        assert_eq!(wit.z, bits(&"01".repeat(8)));
        assert!(e_member(&wit.z, &x, &f, 0, w).unwrap());
        assert_eq!(agreeing_blocks(&wit.z, &x, &g, &wit.selected).len(), 8);

        let raw = non_subset_witness_with(&x, &x, &f, &g, w, Thinning::Verbatim).unwrap();
        assert_eq!(raw.z, BitSeq::zeros(16));
        assert!(!e_member(&raw.z, &x, &f, 0, w).unwrap());
    }

    #[test]
    fn witness_needs_two_separated_violations() {
        let x = BitSeq::zeros(16);
        let f: Vec<u64> = vec![0, 2, 3, 4, 5, 6, 7, 8];
        let g: Vec<u64> = vec![0, 1, 3, 5, 7];
        // Only g-block 0 = [0,1) misses an f-block.
        assert_eq!(refines_at(&f, &g, Window::from(0)).unwrap(), vec![0]);
        assert_eq!(
            non_subset_witness(&x, &x, &f, &g, Window::from(0)),
            Err(BlockError::InsufficientViolations { found: 1, need: 2 })
        );
    }

    #[test]
    fn remark_search_succeeds_at_sixteen() {
        let pairs = remark_counterexamples(16).unwrap();
        let w = pairs.window;
        let (f1, g1) = &pairs.dominated_not_refined;
        assert!(star_dominates_at(f1, g1, w).unwrap().is_empty());
        assert!(!refines_at(f1, g1, w).unwrap().is_empty());
        let (f2, g2) = &pairs.refined_not_dominated;
        assert!(refines_at(f2, g2, w).unwrap().is_empty());
        assert!(!star_dominates_at(f2, g2, w).unwrap().is_empty());
    }

    #[test]
    fn bitseq_text_form() {
        assert_eq!(bits("0110").to_string(), "0110");
        assert!("01a".parse::<BitSeq>().is_err());
        assert_eq!(serde_json::to_string(&bits("10")).unwrap(), "\"10\"");
    }
}
