//! Finite generic runs: a descending chain of conditions built by meeting an
//! explicit list of dense goals, and the reals read off that chain.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::blocks::BitSeq;
use crate::conditions::{
    first_block_from, leq_check, resolve, restrict, CertificateKind, Condition, ConditionError,
    Demand, LeqReport, Name, RefinementCertificate,
};
use crate::generators::BitGen;
use crate::poset::{ElemId, Node, RankedPoset};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error(transparent)]
    Condition(#[from] ConditionError),
    #[error("`{a}` ≤ `{b}`, no incomparability block can be forced")]
    NotIncomparable { a: String, b: String },
    #[error("goal is malformed: {0}")]
    BadGoal(String),
    #[error("resolution exhausted after {steps} steps; unmet goals: {}", unmet.join(", "))]
    ResolutionExhausted { steps: usize, unmet: Vec<String> },
    #[error("chain link {index} fails the order: {report:?}")]
    ChainUnsound { index: usize, report: LeqReport },
}

/// Extends the `t`'s at `coords` (all of one rank, linearized compatibly with
/// `<`) along the carry cascade: `coords[0]` is extended twice, then
/// `coords[1]` once, and so on, each coordinate being extended after every
/// two fresh values at its predecessor. The cascade stops after the first
/// extension of the last coordinate, so every listed coordinate gains at
/// least one value.
///
/// Each new value exceeds every value already present at `coords`, is at
/// least `floor`, and closes a block that contains a block of the
/// coordinate's name.
pub fn ladder_extend(
    q: Condition,
    coords: &[ElemId],
    rp: &RankedPoset,
    floor: Option<u64>,
) -> Result<Condition, ConditionError> {
    let Some(&first) = coords.first() else {
        return Ok(q);
    };
    let rank = rp.rank(first);
    if coords.iter().any(|&b| rp.rank(b) != rank) {
        return Err(ConditionError::MixedRanks);
    }
    if let Some(&b) = coords.iter().find(|&&b| !q.contains(b)) {
        return Err(ConditionError::NotInSupport(rp.poset().name(b).to_owned()));
    }
    let mut r = q;
    let mut fresh = vec![0u8; coords.len()];
    let mut i = 0;
    loop {
        extend_once(&mut r, coords[i], coords, rank, rp, floor)?;
        if i + 1 == coords.len() {
            return Ok(r);
        }
        fresh[i] += 1;
        if fresh[i] == 2 {
            fresh[i] = 0;
            i += 1;
        } else {
            i = 0;
        }
    }
}

/// The sequence of positions (into `coords`) that [`ladder_extend`] visits
/// for `n` coordinates.
pub fn ladder_schedule(n: usize) -> Vec<usize> {
    let mut out = Vec::new();
    if n == 0 {
        return out;
    }
    let mut fresh = vec![0u8; n];
    let mut i = 0;
    loop {
        out.push(i);
        if i + 1 == n {
            return out;
        }
        fresh[i] += 1;
        if fresh[i] == 2 {
            fresh[i] = 0;
            i += 1;
        } else {
            i = 0;
        }
    }
}

fn extend_once(
    r: &mut Condition,
    b: ElemId,
    coords: &[ElemId],
    rank: usize,
    rp: &RankedPoset,
    floor: Option<u64>,
) -> Result<(), ConditionError> {
    let mut value = coords
        .iter()
        .filter_map(|&c| r.t(c).and_then(|t| t.last().copied()))
        .max()
        .unwrap_or(0)
        .max(floor.unwrap_or(0));
    if let Some(&last) = r.t(b).and_then(|t| t.last()) {
        let name = r.name(b).expect("support checked").clone();
        let below = restrict(r, Node::Elem(b), rp);
        let cohen = r.cohen(rank).cloned().unwrap_or_default();
        let (w, v, h) = resolve(&name, rp, below, cohen, Demand::BlockFrom(last))?;
        let k = first_block_from(&h, last).expect("resolution met its demand");
        value = value.max(h[k + 1]).max(last + 1);
        r.absorb(w);
        r.set_cohen(rank, v);
    }
    r.push_t(b, value);
    Ok(())
}

/// Extends every coordinate of the support, lowest rank first.
pub fn extend_all(q: Condition, rp: &RankedPoset) -> Result<Condition, ConditionError> {
    let mut by_rank: BTreeMap<usize, Vec<ElemId>> = BTreeMap::new();
    for b in q.support() {
        by_rank.entry(rp.rank(b)).or_default().push(b);
    }
    let mut r = q;
    for coords in by_rank.into_values() {
        let coords = rp.poset().linearize(&coords.into_iter().collect());
        r = ladder_extend(r, &coords, rp, None)?;
    }
    Ok(r)
}

/// Forces a block of `t_b` that contains no value of `t_a`, for `a ≰ b`.
/// Returns the stronger condition and the block index `M`.
pub fn incomparability_extend(
    q: Condition,
    a: ElemId,
    b: ElemId,
    beyond: usize,
    rp: &RankedPoset,
) -> Result<(Condition, usize), EngineError> {
    let poset = rp.poset();
    if poset.le(a, b) {
        return Err(EngineError::NotIncomparable {
            a: poset.name(a).to_owned(),
            b: poset.name(b).to_owned(),
        });
    }
    let mut r = q;
    for x in [a, b] {
        if !r.contains(x) {
            r.insert_coordinate(rp, x, Vec::new(), Name::default_ground());
        }
    }
    let t_len = |r: &Condition, x: ElemId| r.t(x).map_or(0, <[u64]>::len);
    let m = beyond.max(t_len(&r, b));
    let ta_before = r.t(a).unwrap().to_vec();

    let below_b: Vec<ElemId> = closure_in_support(&r, b, rp);
    let floor_b = ta_before.last().map(|&v| v + 1);
    while t_len(&r, b) < m + 2 {
        r = ladder_extend(r, &below_b, rp, floor_b)?;
    }
    debug_assert_eq!(r.t(a).unwrap(), ta_before.as_slice());

    let below_a: Vec<ElemId> = closure_in_support(&r, a, rp);
    let floor_a = r.t(b).unwrap()[m + 1] + 1;
    r = ladder_extend(r, &below_a, rp, Some(floor_a))?;
    Ok((r, m))
}

fn closure_in_support(r: &Condition, b: ElemId, rp: &RankedPoset) -> Vec<ElemId> {
    rp.same_rank_down_closure(b)
        .into_iter()
        .filter(|&x| r.contains(x))
        .collect()
}

/// `merge(current, target)` and the certificate that the merge coarsens
/// `current`.
pub fn make_dominating_name(
    current: &Arc<Name>,
    target: &Arc<Name>,
) -> (Arc<Name>, RefinementCertificate) {
    let merged = Arc::new(Name::Merge(current.clone(), target.clone()));
    let cert = RefinementCertificate {
        old_name: current.clone(),
        new_name: merged.clone(),
        kind: CertificateKind::MergeCoarsening,
    };
    (merged, cert)
}

/// A dense set the run must meet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DenseGoal {
    /// `|t_b| ≥ n`.
    Length { b: ElemId, n: usize },
    /// `c_rank` differs from `real` somewhere at or after `beyond`.
    CohenDisagree {
        rank: usize,
        real: BitGen,
        beyond: usize,
    },
    /// Every later block of `t_b` contains a block of `target`.
    Dominate { b: ElemId, target: Arc<Name> },
    /// A block of `t_b` at index `≥ beyond` free of `t_a` values.
    Incomparable { a: ElemId, b: ElemId, beyond: usize },
}

impl DenseGoal {
    fn priority(&self) -> u8 {
        match self {
            DenseGoal::Dominate { .. } => 0,
            DenseGoal::CohenDisagree { .. } => 1,
            DenseGoal::Incomparable { .. } => 2,
            DenseGoal::Length { .. } => 3,
        }
    }

    pub fn describe(&self, rp: &RankedPoset) -> GoalDescriptor {
        let n = |x: ElemId| rp.poset().name(x).to_owned();
        match self {
            DenseGoal::Length { b, n: len } => GoalDescriptor::Length {
                element: n(*b),
                length: *len,
            },
            DenseGoal::CohenDisagree { rank, real, beyond } => GoalDescriptor::CohenDisagree {
                rank: *rank,
                real: real.clone(),
                beyond: *beyond,
            },
            DenseGoal::Dominate { b, target } => GoalDescriptor::Dominate {
                element: n(*b),
                target: target.describe(rp),
            },
            DenseGoal::Incomparable { a, b, beyond } => GoalDescriptor::Incomparable {
                a: n(*a),
                b: n(*b),
                beyond: *beyond,
            },
        }
    }

    fn check_well_formed(&self, rp: &RankedPoset) -> Result<(), EngineError> {
        let bad = |msg: String| Err(EngineError::BadGoal(msg));
        match self {
            DenseGoal::Dominate { b, target } => {
                let mut failures = Vec::new();
                let mut probe = Condition::empty();
                probe.insert_coordinate(rp, *b, Vec::new(), target.clone());
                failures.extend(crate::conditions::validate(&probe, rp, Node::Top).failures);
                if failures.is_empty() {
                    Ok(())
                } else {
                    bad(failures.join("; "))
                }
            }
            DenseGoal::Incomparable { a, b, .. } if rp.poset().le(*a, *b) => {
                bad(format!("{} ≤ {}", rp.poset().name(*a), rp.poset().name(*b)))
            }
            DenseGoal::CohenDisagree { rank, .. } if *rank >= rp.top_rank() => {
                bad(format!("rank {rank} is not below the top rank"))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GoalDescriptor {
    Length {
        element: String,
        length: usize,
    },
    CohenDisagree {
        rank: usize,
        real: BitGen,
        beyond: usize,
    },
    Dominate {
        element: String,
        target: crate::conditions::NameDescriptor,
    },
    Incomparable {
        a: String,
        b: String,
        beyond: usize,
    },
}

/// What a met goal left behind, for re-checking.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GoalEvidence {
    Length {
        length: usize,
    },
    CohenDisagree {
        position: usize,
    },
    /// Blocks of `d_b` from `threshold` on contain blocks of the target.
    Dominate {
        threshold: usize,
    },
    /// `[d_b(block), d_b(block + 1))` holds no value of `d_a`.
    Incomparable {
        block: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LedgerEntry {
    pub goal: DenseGoal,
    /// Chain index of the first condition meeting the goal.
    pub met_at: usize,
    pub evidence: GoalEvidence,
}

/// One step of the chain: the certificates that justify it and the goal it
/// served.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Link {
    pub goal: usize,
    pub certificates: Vec<RefinementCertificate>,
}

/// `c_α` per rank and `d_a` per element.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DerivedReals {
    pub cohen: BTreeMap<usize, BitSeq>,
    pub dominating: BTreeMap<ElemId, Vec<u64>>,
}

impl DerivedReals {
    pub fn d(&self, a: ElemId) -> &[u64] {
        self.dominating.get(&a).map_or(&[], Vec::as_slice)
    }

    pub fn c(&self, rank: usize) -> BitSeq {
        self.cohen.get(&rank).cloned().unwrap_or_default()
    }
}

#[derive(Debug, Clone)]
pub struct GenericRun {
    pub ranked_poset: RankedPoset,
    pub goals: Vec<DenseGoal>,
    pub chain: Vec<Condition>,
    /// `links[i]` leads from `chain[i]` to `chain[i + 1]`.
    pub links: Vec<Link>,
    pub ledger: Vec<LedgerEntry>,
    pub seed: u64,
    pub steps: usize,
    pub derived: DerivedReals,
}

impl GenericRun {
    pub fn certificates(&self) -> Vec<RefinementCertificate> {
        self.links
            .iter()
            .flat_map(|l| l.certificates.iter().cloned())
            .collect()
    }

    pub fn final_condition(&self) -> &Condition {
        self.chain
            .last()
            .expect("chain starts with the initial condition")
    }

    /// Ledger entries for goal index `goal`.
    pub fn entry(&self, goal: usize) -> Option<&LedgerEntry> {
        self.ledger.iter().find(|e| e.goal == self.goals[goal])
    }
}

/// The initial condition: every element installed.
pub fn initial_condition(rp: &RankedPoset) -> Condition {
    Condition::with_support(rp, rp.poset().elements())
}

/// Builds a descending chain from the full-support empty condition, serving
/// goals round-robin (dominations first, then Cohen, incomparability, and
/// length goals, each group in a seeded order) until all are met or
/// `resolution` handler steps have been spent.
pub fn build_generic(
    rp: &RankedPoset,
    goals: Vec<DenseGoal>,
    resolution: usize,
    seed: u64,
) -> Result<GenericRun, EngineError> {
    for g in &goals {
        g.check_well_formed(rp)?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..goals.len()).collect();
    order.shuffle(&mut rng);
    order.sort_by_key(|&i| goals[i].priority());

    let mut run = GenericRun {
        ranked_poset: rp.clone(),
        goals: goals.clone(),
        chain: vec![initial_condition(rp)],
        links: Vec::new(),
        ledger: Vec::new(),
        seed,
        steps: 0,
        derived: DerivedReals::default(),
    };
    let mut pending = order;
    while !pending.is_empty() {
        let mut still = Vec::new();
        for gi in pending {
            let goal = &goals[gi];
            let current = run.final_condition();
            if let Some(evidence) = already_met(goal, current) {
                run.ledger.push(LedgerEntry {
                    goal: goal.clone(),
                    met_at: run.chain.len() - 1,
                    evidence,
                });
                continue;
            }
            if run.steps == resolution {
                still.push(gi);
                continue;
            }
            let (next, certs, evidence) = apply(goal, current.clone(), rp)?;
            let report = leq_check(&next, current, rp, &certs);
            if !report.holds() {
                return Err(EngineError::ChainUnsound {
                    index: run.chain.len(),
                    report,
                });
            }
            run.chain.push(next);
            run.links.push(Link {
                goal: gi,
                certificates: certs,
            });
            run.steps += 1;
            match evidence {
                Some(evidence) => run.ledger.push(LedgerEntry {
                    goal: goal.clone(),
                    met_at: run.chain.len() - 1,
                    evidence,
                }),
                None => still.push(gi),
            }
        }
        if run.steps == resolution && !still.is_empty() {
            // Anything met without a step was recorded above; what remains
            // needs steps we no longer have.
            let unmet: Vec<String> = still
                .iter()
                .filter(|&&gi| already_met(&goals[gi], run.final_condition()).is_none())
                .map(|&gi| format!("{:?}", goals[gi].describe(rp)))
                .collect();
            if !unmet.is_empty() {
                return Err(EngineError::ResolutionExhausted {
                    steps: run.steps,
                    unmet,
                });
            }
        }
        pending = still;
    }
    run.derived = extract_reals(&run.chain);
    Ok(run)
}

/// Evidence for goals that hold without any further step.
fn already_met(goal: &DenseGoal, p: &Condition) -> Option<GoalEvidence> {
    match goal {
        DenseGoal::Length { b, n } => {
            let len = p.t(*b).map_or(0, <[u64]>::len);
            (len >= *n).then_some(GoalEvidence::Length { length: len })
        }
        DenseGoal::CohenDisagree { rank, real, beyond } => p
            .cohen(*rank)
            .and_then(|s| (*beyond..s.len()).find(|&j| s[j] != real.bit(j)))
            .map(|position| GoalEvidence::CohenDisagree { position }),
        DenseGoal::Dominate { .. } | DenseGoal::Incomparable { .. } => None,
    }
}

type Step = (Condition, Vec<RefinementCertificate>, Option<GoalEvidence>);

fn apply(goal: &DenseGoal, q: Condition, rp: &RankedPoset) -> Result<Step, EngineError> {
    match goal {
        DenseGoal::Length { b, n } => {
            let coords = closure_in_support(&q, *b, rp);
            let p = ladder_extend(q, &coords, rp, None)?;
            let evidence = already_met(goal, &p);
            debug_assert!(evidence.is_some() || p.t(*b).map_or(0, <[u64]>::len) < *n);
            Ok((p, Vec::new(), evidence))
        }
        DenseGoal::CohenDisagree { rank, real, beyond } => {
            let mut p = q;
            let mut s = p.cohen(*rank).cloned().unwrap_or_default();
            let end = s.len().max(*beyond);
            for j in s.len()..=end {
                s.push(!real.bit(j));
            }
            p.set_cohen(*rank, s);
            let evidence = already_met(goal, &p);
            Ok((p, Vec::new(), evidence))
        }
        DenseGoal::Dominate { b, target } => {
            let current = q.name(*b).expect("support is all of Q").clone();
            let threshold = q.t(*b).map_or(0, |t| t.len().saturating_sub(1));
            let (merged, cert) = make_dominating_name(&current, target);
            let mut p = q;
            p.set_name(*b, merged);
            let coords = closure_in_support(&p, *b, rp);
            let p = ladder_extend(p, &coords, rp, None)?;
            Ok((p, vec![cert], Some(GoalEvidence::Dominate { threshold })))
        }
        DenseGoal::Incomparable { a, b, beyond } => {
            let (p, block) = incomparability_extend(q, *a, *b, *beyond, rp)?;
            Ok((p, Vec::new(), Some(GoalEvidence::Incomparable { block })))
        }
    }
}

/// Unions of the `s_α` and `t_a` along the chain.
pub fn extract_reals(chain: &[Condition]) -> DerivedReals {
    let mut out = DerivedReals::default();
    for p in chain {
        for rank in p.cohen_ranks() {
            let s = p.cohen(rank).unwrap();
            let slot = out.cohen.entry(rank).or_default();
            debug_assert!(slot.is_prefix_of(s) || s.is_prefix_of(slot));
            if s.len() > slot.len() {
                *slot = s.clone();
            }
        }
        for b in p.support() {
            let t = p.t(b).unwrap();
            let slot = out.dominating.entry(b).or_default();
            debug_assert!(t.starts_with(slot) || slot.starts_with(t));
            if t.len() > slot.len() {
                *slot = t.to_vec();
            }
        }
    }
    out
}

/// Re-checks a ledger entry against the chain element it names and, for
/// persistent evidence, against the final condition.
pub fn recheck_entry(run: &GenericRun, entry: &LedgerEntry) -> Result<(), String> {
    let rp = &run.ranked_poset;
    let p = run
        .chain
        .get(entry.met_at)
        .ok_or_else(|| format!("met_at {} is past the chain", entry.met_at))?;
    match (&entry.goal, &entry.evidence) {
        (DenseGoal::Length { b, n }, GoalEvidence::Length { .. }) => {
            let len = p.t(*b).map_or(0, <[u64]>::len);
            (len >= *n)
                .then_some(())
                .ok_or(format!("length {len} < {n}"))
        }
        (
            DenseGoal::CohenDisagree { rank, real, beyond },
            GoalEvidence::CohenDisagree { position },
        ) => {
            let s = p.cohen(*rank).ok_or("no Cohen prefix")?;
            (position >= beyond && *position < s.len() && s[*position] != real.bit(*position))
                .then_some(())
                .ok_or(format!("no disagreement at {position}"))
        }
        (DenseGoal::Dominate { b, target }, GoalEvidence::Dominate { .. }) => {
            let name = p.name(*b).ok_or("not in support")?;
            contains_child(name, target)
                .then_some(())
                .ok_or_else(|| "target not merged into the name".to_owned())
        }
        (DenseGoal::Incomparable { a, b, .. }, GoalEvidence::Incomparable { block }) => {
            for cond in [p, run.final_condition()] {
                let (ta, tb) = (cond.t(*a).unwrap_or(&[]), cond.t(*b).unwrap_or(&[]));
                if block + 1 >= tb.len() {
                    return Err(format!("t_{} too short", rp.poset().name(*b)));
                }
                let (lo, hi) = (tb[*block], tb[block + 1]);
                if ta.iter().any(|&v| lo <= v && v < hi) {
                    return Err(format!(
                        "value of t_{} inside [{lo}, {hi})",
                        rp.poset().name(*a)
                    ));
                }
                if ta.last().is_none_or(|&v| v < hi) {
                    return Err("block not covered by t_a".to_owned());
                }
            }
            Ok(())
        }
        _ => Err("evidence does not match goal kind".to_owned()),
    }
}

fn contains_child(name: &Arc<Name>, target: &Arc<Name>) -> bool {
    match &**name {
        Name::Merge(l, r) => r == target || contains_child(l, target),
        _ => false,
    }
}

/// Soundness audit of a finished run.
#[derive(Debug, Clone, Default, Serialize)]
pub struct AuditReport {
    pub adjacent_pairs: usize,
    pub adjacent_failures: Vec<(usize, LeqReport)>,
    pub restriction_checks: usize,
    pub restriction_failures: Vec<(usize, String)>,
    pub triples: usize,
    pub transitivity_failures: Vec<(usize, usize, usize)>,
    pub ledger_failures: Vec<String>,
}

impl AuditReport {
    pub fn is_clean(&self) -> bool {
        self.adjacent_failures.is_empty()
            && self.restriction_failures.is_empty()
            && self.transitivity_failures.is_empty()
            && self.ledger_failures.is_empty()
    }
}

impl fmt::Display for AuditReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} adjacent pairs ({} bad), {} restriction checks ({} bad), {} triples ({} bad), {} ledger failures",
            self.adjacent_pairs,
            self.adjacent_failures.len(),
            self.restriction_checks,
            self.restriction_failures.len(),
            self.triples,
            self.transitivity_failures.len(),
            self.ledger_failures.len()
        )
    }
}

/// Re-checks every adjacent pair of the chain, restriction of every adjacent
/// pair to every element, `samples` random triples for transitivity, and
/// every ledger entry.
pub fn audit(run: &GenericRun, samples: usize, seed: u64) -> AuditReport {
    let rp = &run.ranked_poset;
    let mut report = AuditReport::default();
    for (i, pair) in run.chain.windows(2).enumerate() {
        let certs = &run.links[i].certificates;
        report.adjacent_pairs += 1;
        let r = leq_check(&pair[1], &pair[0], rp, certs);
        if !r.holds() {
            report.adjacent_failures.push((i, r));
        }
        for b in rp.poset().elements() {
            report.restriction_checks += 1;
            let (p, q) = (
                restrict(&pair[1], Node::Elem(b), rp),
                restrict(&pair[0], Node::Elem(b), rp),
            );
            let r = leq_check(&p, &q, rp, certs);
            if !r.holds() {
                report
                    .restriction_failures
                    .push((i, format!("{}: {:?}", rp.poset().name(b), r.violations)));
            }
        }
    }
    let certs = run.certificates();
    let n = run.chain.len();
    if n >= 3 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..samples {
            let mut idx = [
                rng.gen_range(0..n),
                rng.gen_range(0..n),
                rng.gen_range(0..n),
            ];
            idx.sort_unstable();
            let [i, j, k] = idx;
            report.triples += 1;
            let chain = &run.chain;
            let holds =
                |hi: usize, lo: usize| leq_check(&chain[hi], &chain[lo], rp, &certs).holds();
            if holds(j, i) && holds(k, j) && !holds(k, i) {
                report.transitivity_failures.push((i, j, k));
            }
        }
    }
    for e in &run.ledger {
        if let Err(msg) = recheck_entry(run, e) {
            report
                .ledger_failures
                .push(format!("{:?}: {msg}", e.goal.describe(rp)));
        }
    }
    report
}
