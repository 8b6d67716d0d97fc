//! Scenario runner: turns a poset and a goal plan into a generic run, then
//! certifies each cell of the inclusion matrix `E_a ⊆ E_b` through the
//! block-domination reductions and checks coverage of the registered ground
//! reals.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::blocks::{
    agreeing_blocks, e_member, judged_blocks, non_subset_witness, refines_at, BitSeq, Window,
};
use crate::conditions::{ConditionView, Name};
use crate::engine::{
    build_generic, DenseGoal, DerivedReals, EngineError, GenericRun, GoalDescriptor, GoalEvidence,
};
use crate::generators::BitGen;
use crate::poset::{ElemId, Node, PosetError, PosetSpec, RankedPoset};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("cannot read {path}: {msg}")]
    Io { path: PathBuf, msg: String },
    #[error("malformed JSON in {path}: {msg}")]
    Parse { path: PathBuf, msg: String },
    #[error(transparent)]
    Poset(#[from] PosetError),
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

impl HarnessError {
    /// Input problems are distinguished from failed verification.
    pub fn is_input_error(&self) -> bool {
        !matches!(self, HarnessError::Engine(_))
    }
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::Io {
        path: path.to_owned(),
        msg: e.to_string(),
    })?;
    serde_json::from_str(&text).map_err(|e| HarnessError::Parse {
        path: path.to_owned(),
        msg: e.to_string(),
    })
}

/// Either a path to a poset file (relative to the scenario file) or the
/// poset itself.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PosetRef {
    Path(PathBuf),
    Inline(PosetSpec),
}

fn yes() -> bool {
    true
}

/// How many goals of each kind to schedule.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GoalPlan {
    /// Minimum length of every `t_a`.
    pub min_length: usize,
    /// Cohen disagreement goals per guarded ground real and rank.
    pub disagreements: usize,
    /// Incomparability blocks per ordered pair `a ≰ b`.
    pub violations: usize,
    /// Schedule `Dominate(b, coordinate(a))` for `a ≪ b` and
    /// `Dominate(b, diagonal(x))` for guarded ground reals.
    #[serde(default = "yes")]
    pub dominate: bool,
    /// Ground reals that stay registered for coverage but get no Cohen or
    /// diagonal goals.
    #[serde(default)]
    pub omit_goals_for: Vec<BitGen>,
    /// Read the matrix as if Cohen reals were indexed by elements instead of
    /// ranks; cells that then lose their certification route are reported.
    #[serde(default)]
    pub cohen_per_element: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scenario {
    pub poset: PosetRef,
    pub resolution: usize,
    pub seed: u64,
    #[serde(default)]
    pub ground_reals: Vec<BitGen>,
    pub goals: GoalPlan,
}

impl Scenario {
    pub fn load(path: &Path) -> Result<(Scenario, RankedPoset), HarnessError> {
        let sc: Scenario = read_json(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        let rp = sc.ranked_poset(base)?;
        Ok((sc, rp))
    }

    pub fn ranked_poset(&self, base: &Path) -> Result<RankedPoset, HarnessError> {
        let spec = match &self.poset {
            PosetRef::Inline(spec) => spec.clone(),
            PosetRef::Path(p) => read_json(&base.join(p))?,
        };
        Ok(spec.build()?)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let g = &self.goals;
        if self.resolution < 1 {
            return Err(HarnessError::InvalidScenario(
                "resolution must be ≥ 1".into(),
            ));
        }
        if g.min_length < 1 || g.disagreements < 1 || g.violations < 1 {
            return Err(HarnessError::InvalidScenario(
                "goal counts must be ≥ 1".into(),
            ));
        }
        if let Some(x) = g
            .omit_goals_for
            .iter()
            .find(|x| !self.ground_reals.contains(x))
        {
            return Err(HarnessError::InvalidScenario(format!(
                "omit_goals_for lists {x}, which is not a ground real"
            )));
        }
        Ok(())
    }

    fn guarded(&self, x: &BitGen) -> bool {
        !self.goals.omit_goals_for.contains(x)
    }
}

/// Spacing between successive Cohen disagreement positions.
const DISAGREEMENT_STRIDE: usize = 4;
/// Spacing between successive incomparability thresholds.
const VIOLATION_STRIDE: usize = 2;

/// The goal list a scenario asks for.
pub fn plan_goals(sc: &Scenario, rp: &RankedPoset) -> Vec<DenseGoal> {
    let poset = rp.poset();
    let plan = &sc.goals;
    let mut goals = Vec::new();
    let guarded: Vec<&BitGen> = sc.ground_reals.iter().filter(|x| sc.guarded(x)).collect();
    if plan.dominate {
        for b in poset.elements() {
            for a in rp.down_set(Node::Elem(b)) {
                goals.push(DenseGoal::Dominate {
                    b,
                    target: Arc::new(Name::Coordinate(a)),
                });
            }
            for x in &guarded {
                goals.push(DenseGoal::Dominate {
                    b,
                    target: diagonal(x, rp.rank(b)),
                });
            }
        }
    }
    let mut ranks: Vec<usize> = poset.elements().map(|a| rp.rank(a)).collect();
    ranks.sort_unstable();
    ranks.dedup();
    for x in &guarded {
        for &rank in &ranks {
            for k in 0..plan.disagreements {
                goals.push(DenseGoal::CohenDisagree {
                    rank,
                    real: (*x).clone(),
                    beyond: k * DISAGREEMENT_STRIDE,
                });
            }
        }
    }
    for a in poset.elements() {
        for b in poset.elements() {
            if !poset.le(a, b) {
                for k in 0..plan.violations {
                    goals.push(DenseGoal::Incomparable {
                        a,
                        b,
                        beyond: k * VIOLATION_STRIDE,
                    });
                }
            }
        }
    }
    for b in poset.elements() {
        goals.push(DenseGoal::Length {
            b,
            n: plan.min_length,
        });
    }
    goals
}

fn diagonal(x: &BitGen, rank: usize) -> Arc<Name> {
    Arc::new(Name::Diagonal {
        real: x.clone(),
        rank,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    SubsetCertified,
    NonSubsetCertified,
    Undetermined,
}

/// Evidence behind one matrix cell, re-checkable from the derived reals.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "route", rename_all = "snake_case")]
pub enum CellEvidence {
    Reflexive,
    /// `a < b` at equal rank: `d_a ⊑ d_b` with a shared Cohen real.
    SameRank {
        window: Window,
        judged: usize,
        violations: Vec<usize>,
    },
    /// `a ≪ b`: `d_b` was made to dominate the coordinate name of `a`.
    Dominated {
        goal_met_at: Option<usize>,
        window: Window,
        judged: usize,
        violations: Vec<usize>,
    },
    /// `a ≰ b`: forced blocks of `d_b` free of `d_a`, plus a witness point.
    Incomparable {
        blocks: Vec<usize>,
        violations: Vec<usize>,
        selected: Vec<usize>,
        f_side_member: bool,
        y_blocks_matched: usize,
    },
    NotCovered {
        reason: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Cell {
    pub a: String,
    pub b: String,
    pub verdict: Verdict,
    pub evidence: CellEvidence,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct IsomorphismReport {
    pub elements: Vec<String>,
    pub cells: Vec<Vec<Cell>>,
    /// Cells left open by the per-element Cohen reading.
    pub variant_undetermined: Vec<(String, String)>,
}

impl IsomorphismReport {
    /// Covered cells whose verdict differs from the input order, with
    /// undetermined cells counted as mismatches.
    pub fn mismatches(&self, rp: &RankedPoset) -> Vec<(String, String)> {
        let poset = rp.poset();
        let ids: Vec<ElemId> = poset.elements().collect();
        let mut out = Vec::new();
        for (i, row) in self.cells.iter().enumerate() {
            for (j, cell) in row.iter().enumerate() {
                if self
                    .variant_undetermined
                    .contains(&(cell.a.clone(), cell.b.clone()))
                {
                    continue;
                }
                let expected = if poset.le(ids[i], ids[j]) {
                    Verdict::SubsetCertified
                } else {
                    Verdict::NonSubsetCertified
                };
                if cell.verdict != expected {
                    out.push((cell.a.clone(), cell.b.clone()));
                }
            }
        }
        out
    }

    pub fn undetermined(&self) -> Vec<(String, String)> {
        self.cells
            .iter()
            .flatten()
            .filter(|c| c.verdict == Verdict::Undetermined)
            .map(|c| (c.a.clone(), c.b.clone()))
            .collect()
    }
}

/// Fills the inclusion matrix from a finished run.
pub fn build_matrix(run: &GenericRun, sc: &Scenario) -> IsomorphismReport {
    let rp = &run.ranked_poset;
    let poset = rp.poset();
    let reals = &run.derived;
    let n = poset.len();
    let mut cells = Vec::with_capacity(n);
    let mut variant_undetermined = Vec::new();
    for a in poset.elements() {
        let mut row = Vec::with_capacity(n);
        for b in poset.elements() {
            let (verdict, evidence) = if a == b {
                (Verdict::SubsetCertified, CellEvidence::Reflexive)
            } else if poset.lt(a, b) && rp.rank(a) == rp.rank(b) {
                if sc.goals.cohen_per_element {
                    variant_undetermined.push((poset.name(a).to_owned(), poset.name(b).to_owned()));
                    (
                        Verdict::Undetermined,
                        CellEvidence::NotCovered {
                            reason: "equal ranks but distinct Cohen reals: block refinement \
                                     alone does not give inclusion"
                                .into(),
                        },
                    )
                } else {
                    same_rank_cell(reals.d(a), reals.d(b))
                }
            } else if rp.ll(a, Node::Elem(b)) {
                dominated_cell(run, sc, a, b)
            } else {
                incomparable_cell(run, sc, a, b)
            };
            row.push(Cell {
                a: poset.name(a).to_owned(),
                b: poset.name(b).to_owned(),
                verdict,
                evidence,
            });
        }
        cells.push(row);
    }
    IsomorphismReport {
        elements: poset.elements().map(|e| poset.name(e).to_owned()).collect(),
        cells,
        variant_undetermined,
    }
}

fn same_rank_cell(da: &[u64], db: &[u64]) -> (Verdict, CellEvidence) {
    let window = Window::from(0);
    let judged = judged_blocks(da, db, window).len();
    let violations = refines_at(da, db, window).unwrap_or_default();
    let verdict = if judged > 0 && violations.is_empty() {
        Verdict::SubsetCertified
    } else {
        Verdict::Undetermined
    };
    (
        verdict,
        CellEvidence::SameRank {
            window,
            judged,
            violations,
        },
    )
}

fn dominated_cell(
    run: &GenericRun,
    sc: &Scenario,
    a: ElemId,
    b: ElemId,
) -> (Verdict, CellEvidence) {
    if !sc.goals.dominate {
        return (
            Verdict::Undetermined,
            CellEvidence::NotCovered {
                reason: "domination goals disabled".into(),
            },
        );
    }
    let goal = DenseGoal::Dominate {
        b,
        target: Arc::new(Name::Coordinate(a)),
    };
    let entry = run.ledger.iter().find(|e| e.goal == goal);
    let threshold = match entry.map(|e| &e.evidence) {
        Some(GoalEvidence::Dominate { threshold }) => *threshold,
        _ => 0,
    };
    let window = Window::from(threshold as u64);
    let (da, db) = (run.derived.d(a), run.derived.d(b));
    let judged = judged_blocks(da, db, window).len();
    let violations = refines_at(da, db, window).unwrap_or_default();
    let verdict = if entry.is_some() && judged > 0 && violations.is_empty() {
        Verdict::SubsetCertified
    } else {
        Verdict::Undetermined
    };
    (
        verdict,
        CellEvidence::Dominated {
            goal_met_at: entry.map(|e| e.met_at),
            window,
            judged,
            violations,
        },
    )
}

/// Cohen prefix at `rank`, completed with zeros to `len` bits. The witness
/// statement holds for every completion.
fn cohen_completed(reals: &DerivedReals, rank: usize, len: usize) -> BitSeq {
    reals.c(rank).padded(len, false)
}

fn incomparable_cell(
    run: &GenericRun,
    sc: &Scenario,
    a: ElemId,
    b: ElemId,
) -> (Verdict, CellEvidence) {
    let rp = &run.ranked_poset;
    let blocks: Vec<usize> = run
        .ledger
        .iter()
        .filter_map(|e| match (&e.goal, &e.evidence) {
            (
                DenseGoal::Incomparable { a: ga, b: gb, .. },
                GoalEvidence::Incomparable { block },
            ) if *ga == a && *gb == b => Some(*block),
            _ => None,
        })
        .collect();
    let (da, db) = (run.derived.d(a), run.derived.d(b));
    let window = Window::from(0);
    let violations = refines_at(da, db, window).unwrap_or_default();
    let len = da.last().copied().max(db.last().copied()).unwrap_or(0) as usize;
    let x = cohen_completed(&run.derived, rp.rank(a), len);
    let y = cohen_completed(&run.derived, rp.rank(b), len);
    let (selected, f_side_member, y_blocks_matched) =
        match non_subset_witness(&x, &y, da, db, window) {
            Ok(w) => {
                let member = e_member(&w.z, &x, da, 0, window).unwrap_or(false);
                let matched = agreeing_blocks(&w.z, &y, db, &w.selected).len();
                (w.selected, member, matched)
            }
            Err(_) => (Vec::new(), false, 0),
        };
    let certified = blocks.len() >= sc.goals.violations
        && blocks.iter().all(|m| violations.contains(m))
        && f_side_member
        && y_blocks_matched >= 2;
    (
        if certified {
            Verdict::NonSubsetCertified
        } else {
            Verdict::Undetermined
        },
        CellEvidence::Incomparable {
            blocks,
            violations,
            selected,
            f_side_member,
            y_blocks_matched,
        },
    )
}

/// Re-validates every cell's evidence against the derived reals using only
/// the block-level checks. Returns a description of each disagreement.
pub fn recheck_matrix(
    report: &IsomorphismReport,
    reals: &DerivedReals,
    rp: &RankedPoset,
) -> Vec<String> {
    let mut problems = Vec::new();
    let id = |n: &str| rp.poset().id(n).expect("report names come from the poset");
    for cell in report.cells.iter().flatten() {
        let (a, b) = (id(&cell.a), id(&cell.b));
        let (da, db) = (reals.d(a), reals.d(b));
        let ok = match &cell.evidence {
            CellEvidence::Reflexive => a == b,
            CellEvidence::SameRank {
                window, violations, ..
            }
            | CellEvidence::Dominated {
                window, violations, ..
            } => {
                refines_at(da, db, *window).ok().as_ref() == Some(violations)
                    && (cell.verdict != Verdict::SubsetCertified || violations.is_empty())
            }
            CellEvidence::Incomparable {
                blocks,
                selected,
                f_side_member,
                ..
            } => {
                let blocks_free = blocks.iter().all(|&m| {
                    m + 1 < db.len()
                        && !da.iter().any(|&v| db[m] <= v && v < db[m + 1])
                        && da.last().is_some_and(|&v| v >= db[m + 1])
                });
                let separated = selected.windows(2).all(|w| w[1] > w[0] + 1);
                let needs = cell.verdict != Verdict::NonSubsetCertified
                    || (blocks_free && separated && *f_side_member && selected.len() >= 2);
                blocks_free && needs
            }
            CellEvidence::NotCovered { .. } => cell.verdict == Verdict::Undetermined,
        };
        if !ok {
            problems.push(format!(
                "cell ({}, {}) evidence does not re-check",
                cell.a, cell.b
            ));
        }
    }
    problems
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoverageEntry {
    pub real: BitGen,
    pub element: String,
    /// Whether the plan scheduled Cohen and diagonal goals for this real.
    pub guarded: bool,
    /// First block index judged.
    pub threshold: usize,
    pub blocks_checked: usize,
    /// Blocks `[d(n), d(n+1))` with no position where the real and the Cohen
    /// prefix are both defined and differ.
    pub misses: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct CoverageReport {
    pub entries: Vec<CoverageEntry>,
}

impl CoverageReport {
    /// No misses for any real the plan guarded.
    pub fn is_clean(&self) -> bool {
        self.entries
            .iter()
            .all(|e| !e.guarded || e.misses.is_empty())
    }

    pub fn total_misses(&self) -> usize {
        self.entries.iter().map(|e| e.misses.len()).sum()
    }
}

/// For every registered ground real `x` and maximal element `a`, checks that
/// `{j : x(j) ≠ c_rank(a)(j)}` meets every block of `d_a` from the
/// domination threshold on.
pub fn check_coverage(run: &GenericRun, sc: &Scenario) -> CoverageReport {
    let rp = &run.ranked_poset;
    let mut entries = Vec::new();
    for x in &sc.ground_reals {
        for a in rp.poset().maximal() {
            let rank = rp.rank(a);
            let goal = DenseGoal::Dominate {
                b: a,
                target: diagonal(x, rank),
            };
            let threshold = run
                .ledger
                .iter()
                .find(|e| e.goal == goal)
                .and_then(|e| match e.evidence {
                    GoalEvidence::Dominate { threshold } => Some(threshold),
                    _ => None,
                })
                .unwrap_or(0);
            let c = run.derived.c(rank);
            let xs = x.prefix(c.len());
            let d = run.derived.d(a);
            let blocks: Vec<usize> = (threshold..d.len().saturating_sub(1)).collect();
            let misses = blocks
                .iter()
                .copied()
                .filter(|&n| {
                    let (lo, hi) = (d[n] as usize, (d[n + 1] as usize).min(c.len()));
                    !(lo..hi).any(|j| c[j] != xs[j])
                })
                .collect();
            entries.push(CoverageEntry {
                real: x.clone(),
                element: rp.poset().name(a).to_owned(),
                guarded: sc.guarded(x),
                threshold,
                blocks_checked: blocks.len(),
                misses,
            });
        }
    }
    CoverageReport { entries }
}

pub struct ScenarioOutcome {
    pub run: GenericRun,
    pub matrix: IsomorphismReport,
    pub coverage: CoverageReport,
}

impl ScenarioOutcome {
    pub fn passed(&self) -> bool {
        self.matrix.mismatches(&self.run.ranked_poset).is_empty() && self.coverage.is_clean()
    }
}

pub fn run_scenario(sc: &Scenario, rp: &RankedPoset) -> Result<ScenarioOutcome, HarnessError> {
    sc.validate()?;
    let goals = plan_goals(sc, rp);
    let run = build_generic(rp, goals, sc.resolution, sc.seed)?;
    let matrix = build_matrix(&run, sc);
    let coverage = check_coverage(&run, sc);
    Ok(ScenarioOutcome {
        run,
        matrix,
        coverage,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LedgerView {
    pub goal: GoalDescriptor,
    pub met_at: usize,
    pub evidence: GoalEvidence,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DerivedView {
    pub cohen: BTreeMap<usize, String>,
    pub dominating: BTreeMap<String, Vec<u64>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerdictView {
    pub passed: bool,
    pub mismatches: Vec<(String, String)>,
    pub undetermined: Vec<(String, String)>,
    pub coverage_clean: bool,
    pub coverage_misses: usize,
}

/// The JSON report written by `run`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Report {
    pub ranks: BTreeMap<String, usize>,
    pub top_rank: usize,
    pub cofinal_set: Vec<String>,
    pub seed: u64,
    pub resolution: usize,
    pub chain_length: usize,
    pub steps: usize,
    pub matrix: Vec<Vec<Cell>>,
    pub elements: Vec<String>,
    pub variant_undetermined: Vec<(String, String)>,
    pub coverage: Vec<CoverageEntry>,
    pub goals: Vec<LedgerView>,
    pub derived: DerivedView,
    pub final_condition: ConditionView,
    pub verdict: VerdictView,
}

impl Report {
    pub fn new(sc: &Scenario, outcome: &ScenarioOutcome) -> Report {
        let run = &outcome.run;
        let rp = &run.ranked_poset;
        let name = |e: ElemId| rp.poset().name(e).to_owned();
        Report {
            ranks: rp.rank_table(),
            top_rank: rp.top_rank(),
            cofinal_set: rp.cofinal_set().iter().map(|&e| name(e)).collect(),
            seed: run.seed,
            resolution: sc.resolution,
            chain_length: run.chain.len(),
            steps: run.steps,
            matrix: outcome.matrix.cells.clone(),
            elements: outcome.matrix.elements.clone(),
            variant_undetermined: outcome.matrix.variant_undetermined.clone(),
            coverage: outcome.coverage.entries.clone(),
            goals: run
                .ledger
                .iter()
                .map(|e| LedgerView {
                    goal: e.goal.describe(rp),
                    met_at: e.met_at,
                    evidence: e.evidence.clone(),
                })
                .collect(),
            derived: DerivedView {
                cohen: run
                    .derived
                    .cohen
                    .iter()
                    .map(|(&r, s)| (r, s.to_string()))
                    .collect(),
                dominating: run
                    .derived
                    .dominating
                    .iter()
                    .map(|(&e, d)| (name(e), d.clone()))
                    .collect(),
            },
            final_condition: run.final_condition().view(rp),
            verdict: VerdictView {
                passed: outcome.passed(),
                mismatches: outcome.matrix.mismatches(rp),
                undetermined: outcome.matrix.undetermined(),
                coverage_clean: outcome.coverage.is_clean(),
                coverage_misses: outcome.coverage.total_misses(),
            },
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scenario(spec: PosetSpec, reals: &[&str]) -> Scenario {
        Scenario {
            poset: PosetRef::Inline(spec),
            resolution: 5_000,
            seed: 11,
            ground_reals: reals.iter().map(|s| s.parse().unwrap()).collect(),
            goals: GoalPlan {
                min_length: 12,
                disagreements: 2,
                violations: 3,
                dominate: true,
                omit_goals_for: Vec::new(),
                cohen_per_element: false,
            },
        }
    }

    fn spec(elements: &[&str], relations: &[(&str, &str)]) -> PosetSpec {
        PosetSpec {
            elements: elements.iter().map(|s| s.to_string()).collect(),
            relations: relations
                .iter()
                .map(|(a, b)| (a.to_string(), b.to_string()))
                .collect(),
            cofinal_set: None,
        }
    }

    fn run(sc: &Scenario) -> ScenarioOutcome {
        let rp = sc.ranked_poset(Path::new(".")).unwrap();
        run_scenario(sc, &rp).unwrap()
    }

    #[test]
    fn two_chain() {
        let sc = scenario(spec(&["a", "b"], &[("a", "b")]), &["zeros"]);
        let out = run(&sc);
        let m = &out.matrix;
        assert_eq!(m.cells[0][1].verdict, Verdict::SubsetCertified);
        assert_eq!(m.cells[1][0].verdict, Verdict::NonSubsetCertified);
        assert!(out.passed());
        assert!(recheck_matrix(m, &out.run.derived, &out.run.ranked_poset).is_empty());
    }

    #[test]
    fn antichain_shares_cohen_coordinate() {
        let sc = scenario(spec(&["a", "b"], &[]), &["zeros"]);
        let out = run(&sc);
        assert_eq!(out.matrix.cells[0][1].verdict, Verdict::NonSubsetCertified);
        assert_eq!(out.matrix.cells[1][0].verdict, Verdict::NonSubsetCertified);
        assert_eq!(out.run.derived.cohen.keys().collect::<Vec<_>>(), vec![&0]);
        assert!(out.passed());
    }

    #[test]
    fn singleton() {
        let sc = scenario(spec(&["a"], &[]), &[]);
        let out = run(&sc);
        assert_eq!(out.matrix.cells.len(), 1);
        assert_eq!(out.matrix.cells[0][0].verdict, Verdict::SubsetCertified);
        assert!(out.coverage.entries.is_empty());
    }

    #[test]
    fn per_element_cohen_variant_reports_open_cells() {
        // a < b at equal rank (R = {b}).
        let mut s = spec(&["a", "b"], &[("a", "b")]);
        s.cofinal_set = Some(vec!["b".into()]);
        let mut sc = scenario(s, &[]);
        sc.goals.cohen_per_element = true;
        let out = run(&sc);
        assert_eq!(
            out.matrix.variant_undetermined,
            vec![("a".into(), "b".into())]
        );
        assert_eq!(out.matrix.cells[0][1].verdict, Verdict::Undetermined);
        assert!(out.matrix.mismatches(&out.run.ranked_poset).is_empty());
    }

    #[test]
    fn invalid_scenarios() {
        let mut sc = scenario(spec(&["a"], &[]), &[]);
        sc.goals.violations = 0;
        assert!(matches!(
            sc.validate(),
            Err(HarnessError::InvalidScenario(_))
        ));
        let mut sc = scenario(spec(&["a"], &[]), &["zeros"]);
        sc.goals.omit_goals_for = vec![BitGen::Ones];
        assert!(sc.validate().is_err());
    }

    #[test]
    fn tiny_resolution_exhausts() {
        let mut sc = scenario(spec(&["a"], &[]), &[]);
        sc.resolution = 1;
        let rp = sc.ranked_poset(Path::new(".")).unwrap();
        let err = run_scenario(&sc, &rp).err().unwrap();
        assert!(matches!(
            err,
            HarnessError::Engine(EngineError::ResolutionExhausted { .. })
        ));
        assert!(!err.is_input_error());
    }
}
