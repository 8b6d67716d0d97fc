//! Finite partial orders with a cofinal subset, natural-number ranks, the
//! rank-increasing order `≪`, and constrained linear extensions.
//!
//! Elements are interned in lexicographic order of their identifiers, so an
//! [`ElemId`] comparison is the same as comparing identifiers. The adjoined
//! top element is not stored; it is addressed through [`Node::Top`].

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PosetError {
    #[error("unknown element `{0}`")]
    UnknownElement(String),
    #[error("duplicate element `{0}`")]
    DuplicateElement(String),
    #[error("relation contains a cycle through `{0}`")]
    Cycle(String),
    #[error("element `{0}` has no upper bound in the cofinal set")]
    NotCofinal(String),
}

/// Index of an element inside the poset that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ElemId(usize);

impl ElemId {
    pub fn index(self) -> usize {
        self.0
    }
}

/// An element of `Q` or the adjoined top element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Node {
    Elem(ElemId),
    Top,
}

impl From<ElemId> for Node {
    fn from(id: ElemId) -> Self {
        Node::Elem(id)
    }
}

/// A finite strict partial order, stored as its transitive closure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poset {
    names: Vec<String>,
    lookup: BTreeMap<String, ElemId>,
    // less[i][j] <=> i < j
    less: Vec<Vec<bool>>,
}

impl Poset {
    /// Builds a poset from identifiers and `(lower, upper)` pairs. The pairs
    /// may be covers or a full relation; the transitive closure is taken and
    /// any cycle (including `a < a`) is rejected.
    pub fn new<S: AsRef<str>>(elements: &[S], relations: &[(S, S)]) -> Result<Self, PosetError> {
        let mut sorted: Vec<String> = elements.iter().map(|s| s.as_ref().to_owned()).collect();
        sorted.sort();
        for pair in sorted.windows(2) {
            if pair[0] == pair[1] {
                return Err(PosetError::DuplicateElement(pair[0].clone()));
            }
        }
        let lookup: BTreeMap<String, ElemId> = sorted
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), ElemId(i)))
            .collect();
        let n = sorted.len();
        let mut less = vec![vec![false; n]; n];
        for (lo, hi) in relations {
            let lo = lookup
                .get(lo.as_ref())
                .ok_or_else(|| PosetError::UnknownElement(lo.as_ref().to_owned()))?;
            let hi = lookup
                .get(hi.as_ref())
                .ok_or_else(|| PosetError::UnknownElement(hi.as_ref().to_owned()))?;
            less[lo.0][hi.0] = true;
        }
        // Warshall closure.
        #[allow(clippy::needless_range_loop)]
        for k in 0..n {
            for i in 0..n {
                if less[i][k] {
                    for j in 0..n {
                        if less[k][j] {
                            less[i][j] = true;
                        }
                    }
                }
            }
        }
        if let Some(i) = (0..n).find(|&i| less[i][i]) {
            return Err(PosetError::Cycle(sorted[i].clone()));
        }
        Ok(Poset {
            names: sorted,
            lookup,
            less,
        })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn elements(&self) -> impl Iterator<Item = ElemId> + '_ {
        (0..self.names.len()).map(ElemId)
    }

    pub fn name(&self, id: ElemId) -> &str {
        &self.names[id.0]
    }

    pub fn id(&self, name: &str) -> Result<ElemId, PosetError> {
        self.lookup
            .get(name)
            .copied()
            .ok_or_else(|| PosetError::UnknownElement(name.to_owned()))
    }

    /// Strict order `a < b`.
    pub fn lt(&self, a: ElemId, b: ElemId) -> bool {
        self.less[a.0][b.0]
    }

    pub fn le(&self, a: ElemId, b: ElemId) -> bool {
        a == b || self.lt(a, b)
    }

    pub fn comparable(&self, a: ElemId, b: ElemId) -> bool {
        self.le(a, b) || self.le(b, a)
    }

    /// Elements with nothing strictly above them.
    pub fn maximal(&self) -> Vec<ElemId> {
        self.elements()
            .filter(|&a| !self.elements().any(|b| self.lt(a, b)))
            .collect()
    }

    /// Linearizes `subset` compatibly with `<`, always emitting the smallest
    /// available identifier first.
    pub fn linearize(&self, subset: &BTreeSet<ElemId>) -> Vec<ElemId> {
        let mut remaining = subset.clone();
        let mut out = Vec::with_capacity(subset.len());
        while let Some(&next) = remaining
            .iter()
            .find(|&&x| !remaining.iter().any(|&y| self.lt(y, x)))
        {
            remaining.remove(&next);
            out.push(next);
        }
        out
    }

    /// A linear order extending `≤` in which `c` precedes every element
    /// incomparable to it.
    pub fn linear_extension_above(&self, c: ElemId) -> Vec<ElemId> {
        let below: BTreeSet<ElemId> = self.elements().filter(|&x| self.lt(x, c)).collect();
        let rest: BTreeSet<ElemId> = self
            .elements()
            .filter(|&x| x != c && !self.lt(x, c))
            .collect();
        let mut order = self.linearize(&below);
        order.push(c);
        order.extend(self.linearize(&rest));
        order
    }

    /// Some `b` with `a < b` for every `a` in `subset` (smallest identifier
    /// first), if one exists.
    pub fn has_strict_upper_bound(&self, subset: &BTreeSet<ElemId>) -> Option<ElemId> {
        self.elements()
            .find(|&b| subset.iter().all(|&a| self.lt(a, b)))
    }
}

/// A poset together with a cofinal subset `R` and the induced ranks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankedPoset {
    poset: Poset,
    cofinal: BTreeSet<ElemId>,
    rank: Vec<usize>,
    top_rank: usize,
}

/// Computes ranks: height within `R` for members of `R`, then for the rest
/// the least rank of a strict upper bound in `R ∪ {top}`.
pub fn compute_ranks(poset: Poset, cofinal: BTreeSet<ElemId>) -> Result<RankedPoset, PosetError> {
    for a in poset.elements() {
        if !cofinal.iter().any(|&r| poset.le(a, r)) {
            return Err(PosetError::NotCofinal(poset.name(a).to_owned()));
        }
    }
    let mut rank = vec![0usize; poset.len()];
    // Every strict predecessor of r has fewer elements below it, so
    // processing R in order of down-set size fixes ranks bottom-up.
    let mut order: Vec<ElemId> = cofinal.iter().copied().collect();
    order.sort_by_key(|&r| (poset.elements().filter(|&x| poset.lt(x, r)).count(), r));
    for &r in &order {
        rank[r.0] = cofinal
            .iter()
            .filter(|&&s| poset.lt(s, r))
            .map(|&s| rank[s.0] + 1)
            .max()
            .unwrap_or(0);
    }
    let top_rank = cofinal.iter().map(|&r| rank[r.0] + 1).max().unwrap_or(0);
    for a in poset.elements() {
        if !cofinal.contains(&a) {
            rank[a.0] = cofinal
                .iter()
                .filter(|&&b| poset.lt(a, b))
                .map(|&b| rank[b.0])
                .chain(std::iter::once(top_rank))
                .min()
                .unwrap_or(top_rank);
        }
    }
    Ok(RankedPoset {
        poset,
        cofinal,
        rank,
        top_rank,
    })
}

impl RankedPoset {
    /// Ranks with `R = Q`.
    pub fn with_full_cofinal(poset: Poset) -> Self {
        let all = poset.elements().collect();
        compute_ranks(poset, all).expect("Q is cofinal in itself")
    }

    pub fn poset(&self) -> &Poset {
        &self.poset
    }

    pub fn cofinal_set(&self) -> &BTreeSet<ElemId> {
        &self.cofinal
    }

    pub fn rank(&self, x: ElemId) -> usize {
        self.rank[x.0]
    }

    pub fn node_rank(&self, x: Node) -> usize {
        match x {
            Node::Elem(e) => self.rank(e),
            Node::Top => self.top_rank,
        }
    }

    pub fn top_rank(&self) -> usize {
        self.top_rank
    }

    /// `x ≪ y`: `x < y` and `rank(x) < rank(y)`.
    pub fn ll(&self, x: ElemId, y: Node) -> bool {
        match y {
            Node::Top => true,
            Node::Elem(y) => self.poset.lt(x, y) && self.rank(x) < self.rank(y),
        }
    }

    /// `Q_y = {x ∈ Q : x ≪ y}`.
    pub fn down_set(&self, y: Node) -> BTreeSet<ElemId> {
        self.poset.elements().filter(|&x| self.ll(x, y)).collect()
    }

    /// `{x : x ≤ b, rank(x) = rank(b)}`, linearized so that `b` comes last.
    pub fn same_rank_down_closure(&self, b: ElemId) -> Vec<ElemId> {
        let set: BTreeSet<ElemId> = self
            .poset
            .elements()
            .filter(|&x| self.poset.le(x, b) && self.rank(x) == self.rank(b))
            .collect();
        self.poset.linearize(&set)
    }

    /// Looks up `name`, accepting `"top"` only when no element uses it.
    pub fn node(&self, name: &str) -> Result<Node, PosetError> {
        match self.poset.id(name) {
            Ok(id) => Ok(Node::Elem(id)),
            Err(_) if name == TOP_NAME => Ok(Node::Top),
            Err(e) => Err(e),
        }
    }

    pub fn node_name(&self, x: Node) -> &str {
        match x {
            Node::Elem(e) => self.poset.name(e),
            Node::Top => TOP_NAME,
        }
    }

    /// Element names mapped to ranks, for reports.
    pub fn rank_table(&self) -> BTreeMap<String, usize> {
        self.poset
            .elements()
            .map(|e| (self.poset.name(e).to_owned(), self.rank(e)))
            .collect()
    }
}

pub const TOP_NAME: &str = "top";

impl fmt::Display for RankedPoset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in self.poset.elements() {
            let marker = if self.cofinal.contains(&e) {
                ""
            } else {
                " (not in R)"
            };
            writeln!(f, "{}: rank {}{}", self.poset.name(e), self.rank(e), marker)?;
        }
        write!(f, "{}: rank {}", TOP_NAME, self.top_rank)
    }
}

/// Poset file contents.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PosetSpec {
    pub elements: Vec<String>,
    #[serde(default)]
    pub relations: Vec<(String, String)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cofinal_set: Option<Vec<String>>,
}

impl PosetSpec {
    pub fn build(&self) -> Result<RankedPoset, PosetError> {
        let poset = Poset::new(&self.elements, &self.relations)?;
        let cofinal = match &self.cofinal_set {
            None => poset.elements().collect(),
            Some(names) => names
                .iter()
                .map(|n| poset.id(n))
                .collect::<Result<BTreeSet<_>, _>>()?,
        };
        compute_ranks(poset, cofinal)
    }
}
