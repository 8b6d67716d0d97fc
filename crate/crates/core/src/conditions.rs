//! Forcing conditions: finite supports carrying Cohen prefixes per rank and,
//! per coordinate, an increasing sequence `t_b` together with a name for a
//! function that `t_b` must dominate block-wise.
//!
//! Names come from four families whose values are decidable from a condition
//! and a Cohen prefix: each name has a *determined prefix* that only grows
//! as the condition and the Cohen prefix grow.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::blocks::{contains_block, BitSeq};
use crate::engine::ladder_extend;
use crate::generators::{BitGen, SeqGen};
use crate::poset::{ElemId, Node, RankedPoset};

/// Upper bound on advance rounds in a single resolution.
const ADVANCE_LIMIT: usize = 100_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConditionError {
    #[error("name cannot advance: {0}")]
    CannotAdvance(String),
    #[error("element `{0}` is not in the support")]
    NotInSupport(String),
    #[error("ladder coordinates must share one rank")]
    MixedRanks,
}

/// A name for a function in `ω^{↑ω}` over the two-step extension below a
/// coordinate.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Name {
    /// A sequence from the ground model.
    Ground(SeqGen),
    /// The dominating real being built at a lower coordinate.
    Coordinate(ElemId),
    /// Enumeration of `{j : c(j) ≠ x(j)}` for the Cohen real `c` of `rank`.
    Diagonal { real: BitGen, rank: usize },
    /// Coarsest sequence whose blocks each hold a block of both children.
    Merge(Arc<Name>, Arc<Name>),
}

impl Name {
    pub fn default_ground() -> Arc<Name> {
        Arc::new(Name::Ground(SeqGen::IDENTITY))
    }

    /// Determined prefix under `(cond, cohen)`, restricted to values
    /// `≤ bound`. Ground names are infinite, so `bound` must be finite in
    /// practice.
    pub fn determined(&self, cond: &Condition, cohen: &BitSeq, bound: u64) -> Vec<u64> {
        match self {
            Name::Ground(g) => g.up_to(bound),
            Name::Coordinate(a) => cond
                .t(*a)
                .map(|t| t.iter().copied().take_while(|&v| v <= bound).collect())
                .unwrap_or_default(),
            Name::Diagonal { real, .. } => disagreements(cohen, real)
                .take_while(|&j| j <= bound)
                .collect(),
            Name::Merge(l, r) => merge_blocks(
                &l.determined(cond, cohen, bound),
                &r.determined(cond, cohen, bound),
            ),
        }
    }

    pub fn describe(&self, rp: &RankedPoset) -> NameDescriptor {
        match self {
            Name::Ground(g) => NameDescriptor::Ground(g.clone()),
            Name::Coordinate(a) => NameDescriptor::Coordinate(rp.poset().name(*a).to_owned()),
            Name::Diagonal { real, rank } => NameDescriptor::Diagonal {
                real: real.clone(),
                rank: *rank,
            },
            Name::Merge(l, r) => {
                NameDescriptor::Merge(Box::new(l.describe(rp)), Box::new(r.describe(rp)))
            }
        }
    }
}

/// Serializable form of a [`Name`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NameDescriptor {
    Ground(SeqGen),
    Coordinate(String),
    Diagonal { real: BitGen, rank: usize },
    Merge(Box<NameDescriptor>, Box<NameDescriptor>),
}

fn disagreements<'a>(cohen: &'a BitSeq, real: &'a BitGen) -> impl Iterator<Item = u64> + 'a {
    cohen
        .iter()
        .enumerate()
        .filter(move |&(j, &c)| c != real.bit(j))
        .map(|(j, _)| j as u64)
}

/// Greedy coarsening: starting at the smaller first value, each block ends
/// where both children have completed a block that started inside it.
pub fn merge_blocks(left: &[u64], right: &[u64]) -> Vec<u64> {
    let (Some(&l0), Some(&r0)) = (left.first(), right.first()) else {
        return Vec::new();
    };
    let end_of_first_block_from = |s: &[u64], from: u64| {
        let k = s.partition_point(|&v| v < from);
        s.get(k + 1).copied()
    };
    let mut out = vec![l0.min(r0)];
    loop {
        let cur = *out.last().unwrap();
        match (
            end_of_first_block_from(left, cur),
            end_of_first_block_from(right, cur),
        ) {
            (Some(a), Some(b)) => out.push(a.max(b)),
            _ => return out,
        }
    }
}

/// Index `k` of the first block `[h(k), h(k+1))` with `h(k) ≥ from`.
pub fn first_block_from(h: &[u64], from: u64) -> Option<usize> {
    let k = h.partition_point(|&v| v < from);
    (k + 1 < h.len()).then_some(k)
}

/// One coordinate of a condition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coordinate {
    pub t: Vec<u64>,
    pub name: Arc<Name>,
}

/// A condition `({s_α : α ∈ F̄}, {(t_b, ḟ_b) : b ∈ F})`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Condition {
    cohen: BTreeMap<usize, BitSeq>,
    coords: BTreeMap<ElemId, Coordinate>,
}

impl Condition {
    pub fn empty() -> Self {
        Condition::default()
    }

    /// Every element of `support` installed with an empty `t`, the identity
    /// ground name, and an empty Cohen prefix at its rank.
    pub fn with_support(rp: &RankedPoset, support: impl IntoIterator<Item = ElemId>) -> Self {
        let mut c = Condition::empty();
        for b in support {
            c.insert_coordinate(rp, b, Vec::new(), Name::default_ground());
        }
        c
    }

    /// Adds or replaces coordinate `b`, creating the Cohen slot for its rank
    /// if missing.
    pub fn insert_coordinate(&mut self, rp: &RankedPoset, b: ElemId, t: Vec<u64>, name: Arc<Name>) {
        self.cohen.entry(rp.rank(b)).or_default();
        self.coords.insert(b, Coordinate { t, name });
    }

    pub fn set_cohen(&mut self, rank: usize, bits: BitSeq) {
        self.cohen.insert(rank, bits);
    }

    pub fn support(&self) -> impl Iterator<Item = ElemId> + '_ {
        self.coords.keys().copied()
    }

    pub fn contains(&self, b: ElemId) -> bool {
        self.coords.contains_key(&b)
    }

    pub fn coordinate(&self, b: ElemId) -> Option<&Coordinate> {
        self.coords.get(&b)
    }

    pub fn t(&self, b: ElemId) -> Option<&[u64]> {
        self.coords.get(&b).map(|c| c.t.as_slice())
    }

    pub fn name(&self, b: ElemId) -> Option<&Arc<Name>> {
        self.coords.get(&b).map(|c| &c.name)
    }

    pub fn cohen(&self, rank: usize) -> Option<&BitSeq> {
        self.cohen.get(&rank)
    }

    pub fn cohen_ranks(&self) -> impl Iterator<Item = usize> + '_ {
        self.cohen.keys().copied()
    }

    pub(crate) fn push_t(&mut self, b: ElemId, value: u64) {
        let coord = self.coords.get_mut(&b).expect("coordinate in support");
        debug_assert!(coord.t.last().is_none_or(|&l| l < value));
        coord.t.push(value);
    }

    pub(crate) fn set_name(&mut self, b: ElemId, name: Arc<Name>) {
        self.coords.get_mut(&b).expect("coordinate in support").name = name;
    }

    /// Copies every coordinate and Cohen prefix of `w` into `self`.
    pub(crate) fn absorb(&mut self, w: Condition) {
        self.cohen.extend(w.cohen);
        self.coords.extend(w.coords);
    }

    pub fn view(&self, rp: &RankedPoset) -> ConditionView {
        ConditionView {
            support: self
                .support()
                .map(|b| rp.poset().name(b).to_owned())
                .collect(),
            cohen: self
                .cohen
                .iter()
                .map(|(&r, s)| (r, s.to_string()))
                .collect(),
            coordinates: self
                .coords
                .iter()
                .map(|(&b, c)| {
                    (
                        rp.poset().name(b).to_owned(),
                        CoordinateView {
                            t: c.t.clone(),
                            name: c.name.describe(rp),
                        },
                    )
                })
                .collect(),
        }
    }
}

/// JSON form of a condition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConditionView {
    pub support: Vec<String>,
    pub cohen: BTreeMap<usize, String>,
    pub coordinates: BTreeMap<String, CoordinateView>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoordinateView {
    pub t: Vec<u64>,
    pub name: NameDescriptor,
}

/// `p↾b`: coordinates in `Q_b` and the Cohen prefixes at their ranks.
pub fn restrict(p: &Condition, b: Node, rp: &RankedPoset) -> Condition {
    let coords: BTreeMap<ElemId, Coordinate> = p
        .coords
        .iter()
        .filter(|(&c, _)| rp.ll(c, b))
        .map(|(&c, coord)| (c, coord.clone()))
        .collect();
    let ranks: BTreeSet<usize> = coords.keys().map(|&c| rp.rank(c)).collect();
    let cohen = p
        .cohen
        .iter()
        .filter(|(r, _)| ranks.contains(r))
        .map(|(&r, s)| (r, s.clone()))
        .collect();
    Condition { cohen, coords }
}

/// What a resolution must make determined.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Demand {
    /// At least this many values.
    Len(usize),
    /// A whole block starting at or after this value.
    BlockFrom(u64),
}

impl Demand {
    fn met_by(self, h: &[u64]) -> bool {
        match self {
            Demand::Len(n) => h.len() >= n,
            Demand::BlockFrom(x) => first_block_from(h, x).is_some(),
        }
    }
}

/// Extends `(below, cohen)` until the name's determined prefix `h` has at
/// least `target_len` values. Returns the stronger pair and `h`.
pub fn resolve_name(
    name: &Name,
    rp: &RankedPoset,
    below: Condition,
    cohen: BitSeq,
    target_len: usize,
) -> Result<(Condition, BitSeq, Vec<u64>), ConditionError> {
    resolve(name, rp, below, cohen, Demand::Len(target_len))
}

/// As [`resolve_name`] for an arbitrary [`Demand`].
pub fn resolve(
    name: &Name,
    rp: &RankedPoset,
    below: Condition,
    cohen: BitSeq,
    demand: Demand,
) -> Result<(Condition, BitSeq, Vec<u64>), ConditionError> {
    match name {
        Name::Ground(g) => {
            let h = match demand {
                Demand::Len(n) => g.take(n),
                Demand::BlockFrom(x) => g.through_block_from(x),
            }
            .ok_or_else(|| ConditionError::CannotAdvance(format!("{g:?} is exhausted")))?;
            Ok((below, cohen, h))
        }
        Name::Coordinate(a) => {
            let a = *a;
            let Some(t) = below.t(a) else {
                return Err(ConditionError::NotInSupport(rp.poset().name(a).to_owned()));
            };
            if demand.met_by(t) {
                let h = t.to_vec();
                return Ok((below, cohen, h));
            }
            let coords: Vec<ElemId> = rp
                .same_rank_down_closure(a)
                .into_iter()
                .filter(|&x| below.contains(x))
                .collect();
            let floor = match demand {
                Demand::BlockFrom(x) => Some(x),
                Demand::Len(_) => None,
            };
            let mut w = below;
            for _ in 0..ADVANCE_LIMIT {
                w = ladder_extend(w, &coords, rp, floor)?;
                let t = w.t(a).expect("ladder keeps the support");
                if demand.met_by(t) {
                    let h = t.to_vec();
                    return Ok((w, cohen, h));
                }
            }
            Err(ConditionError::CannotAdvance(format!(
                "coordinate {} did not reach {demand:?}",
                rp.poset().name(a)
            )))
        }
        Name::Diagonal { real, .. } => {
            let mut v = cohen;
            let mut h: Vec<u64> = disagreements(&v, real).collect();
            if let Demand::BlockFrom(x) = demand {
                while (v.len() as u64) < x {
                    let j = v.len();
                    v.push(!real.bit(j));
                    h.push(j as u64);
                }
            }
            while !demand.met_by(&h) {
                let j = v.len();
                v.push(!real.bit(j));
                h.push(j as u64);
            }
            Ok((below, v, h))
        }
        Name::Merge(l, r) => {
            let (mut w, mut v) = (below, cohen);
            let mut hl = Vec::new();
            let mut hr = Vec::new();
            for _ in 0..ADVANCE_LIMIT {
                let h = merge_blocks(&hl, &hr);
                if demand.met_by(&h) {
                    return Ok((w, v, h));
                }
                let cur = h.last().copied().unwrap_or(0);
                let from = match demand {
                    Demand::BlockFrom(x) => cur.max(x),
                    Demand::Len(_) => cur,
                };
                if first_block_from(&hl, from).is_none() {
                    (w, v, hl) = resolve(l, rp, w, v, Demand::BlockFrom(from))?;
                }
                if first_block_from(&hr, from).is_none() {
                    (w, v, hr) = resolve(r, rp, w, v, Demand::BlockFrom(from))?;
                }
            }
            Err(ConditionError::CannotAdvance(format!(
                "merge did not reach {demand:?}"
            )))
        }
    }
}

/// How a coordinate's name was allowed to change between two conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateKind {
    Identical,
    MergeCoarsening,
}

/// Decidable evidence that every block of `new_name` contains a block of
/// `old_name`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RefinementCertificate {
    pub old_name: Arc<Name>,
    pub new_name: Arc<Name>,
    pub kind: CertificateKind,
}

impl RefinementCertificate {
    pub fn is_well_formed(&self) -> bool {
        match self.kind {
            CertificateKind::Identical => self.old_name == self.new_name,
            CertificateKind::MergeCoarsening => {
                matches!(&*self.new_name, Name::Merge(l, _) if *l == self.old_name)
            }
        }
    }
}

/// Whether `new` is reachable from `old` through well-formed certificates.
pub fn certified(old: &Arc<Name>, new: &Arc<Name>, certs: &[RefinementCertificate]) -> bool {
    if Arc::ptr_eq(old, new) || old == new {
        return true;
    }
    certs.iter().any(|c| {
        c.is_well_formed()
            && c.kind == CertificateKind::MergeCoarsening
            && c.new_name == *new
            && certified(old, &c.old_name, certs)
    })
}

/// One failed clause of the order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "clause", rename_all = "snake_case")]
pub enum Violation {
    /// Clause 1: `F^q ⊆ F^p`.
    Support { element: String },
    /// Clause 2: `s^q_α ⊆ s^p_α`.
    Cohen { rank: usize },
    /// Clause 3: `t^q_b ⊆ t^p_b`.
    TExtension { element: String },
    /// Clause 3(a): the name changed with no certificate.
    MissingCertificate { element: String },
    /// Clause 3(b): the new block at `index` holds no block of the name.
    NameBlock { element: String, index: usize },
    /// Clause 4: the new block of `upper` at `index` holds no block of `lower`.
    SameRankNesting {
        lower: String,
        upper: String,
        index: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct LeqReport {
    pub violations: Vec<Violation>,
}

impl LeqReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks `p ≤ q` clause by clause.
pub fn leq_check(
    p: &Condition,
    q: &Condition,
    rp: &RankedPoset,
    certs: &[RefinementCertificate],
) -> LeqReport {
    let name = |b: ElemId| rp.poset().name(b).to_owned();
    let mut violations = Vec::new();
    let empty = BitSeq::default();

    for &b in q.coords.keys() {
        if !p.contains(b) {
            violations.push(Violation::Support { element: name(b) });
        }
    }
    for (&rank, sq) in &q.cohen {
        if !p.cohen(rank).is_some_and(|sp| sq.is_prefix_of(sp)) {
            violations.push(Violation::Cohen { rank });
        }
    }
    for (&b, cq) in &q.coords {
        let Some(cp) = p.coordinate(b) else { continue };
        if !cp.t.starts_with(&cq.t) {
            violations.push(Violation::TExtension { element: name(b) });
            continue;
        }
        if !certified(&cq.name, &cp.name, certs) {
            violations.push(Violation::MissingCertificate { element: name(b) });
        }
        let first_new = cq.t.len().max(1);
        if first_new < cp.t.len() {
            let below = restrict(p, Node::Elem(b), rp);
            let cohen = p.cohen(rp.rank(b)).unwrap_or(&empty);
            let h = cq.name.determined(&below, cohen, *cp.t.last().unwrap());
            for n in first_new..cp.t.len() {
                if !contains_block(&h, cp.t[n - 1], cp.t[n]) {
                    violations.push(Violation::NameBlock {
                        element: name(b),
                        index: n,
                    });
                }
            }
        }
    }
    for (&c, cq) in &q.coords {
        let Some(cp) = p.coordinate(c) else { continue };
        let first_new = cq.t.len().max(1);
        for &b in q.coords.keys() {
            if !(rp.poset().lt(b, c) && rp.rank(b) == rp.rank(c)) {
                continue;
            }
            let tb = p.t(b).unwrap_or(&[]);
            for n in first_new..cp.t.len() {
                if !contains_block(tb, cp.t[n - 1], cp.t[n]) {
                    violations.push(Violation::SameRankNesting {
                        lower: name(b),
                        upper: name(c),
                        index: n,
                    });
                }
            }
        }
    }
    LeqReport { violations }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct ValidationReport {
    pub failures: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Checks that `p` is a condition of the forcing at `ambient`.
pub fn validate(p: &Condition, rp: &RankedPoset, ambient: Node) -> ValidationReport {
    let mut failures = Vec::new();
    let name = |b: ElemId| rp.poset().name(b).to_owned();
    for (&b, coord) in &p.coords {
        if !rp.ll(b, ambient) {
            failures.push(format!(
                "{} is not in the down-set of {}",
                name(b),
                rp.node_name(ambient)
            ));
        }
        if let Some(i) = coord.t.windows(2).position(|w| w[0] >= w[1]) {
            failures.push(format!(
                "t_{} is not strictly increasing at {}",
                name(b),
                i + 1
            ));
        }
        check_name(&coord.name, b, rp, &mut failures);
    }
    let ranks: BTreeSet<usize> = p.coords.keys().map(|&b| rp.rank(b)).collect();
    let keys: BTreeSet<usize> = p.cohen.keys().copied().collect();
    if ranks != keys {
        failures.push(format!(
            "Cohen prefixes are keyed by {keys:?}, support ranks are {ranks:?}"
        ));
    }
    ValidationReport { failures }
}

fn check_name(name: &Name, owner: ElemId, rp: &RankedPoset, failures: &mut Vec<String>) {
    match name {
        Name::Ground(_) => {}
        Name::Coordinate(a) => {
            if !rp.ll(*a, Node::Elem(owner)) {
                failures.push(format!(
                    "name of {} reads {}, which is not ≪ it",
                    rp.poset().name(owner),
                    rp.poset().name(*a)
                ));
            }
        }
        Name::Diagonal { rank, .. } => {
            if *rank != rp.rank(owner) {
                failures.push(format!(
                    "diagonal name of {} reads Cohen rank {rank}, expected {}",
                    rp.poset().name(owner),
                    rp.rank(owner)
                ));
            }
        }
        Name::Merge(l, r) => {
            check_name(l, owner, rp, failures);
            check_name(r, owner, rp, failures);
        }
    }
}
