mod common;

use std::collections::BTreeSet;
use std::sync::Arc;

use meager_core::blocks::{
    agreeing_blocks, e_member, judged_blocks, non_subset_witness, refines_at, star_dominates_at,
    BitSeq, Window,
};
use meager_core::conditions::{leq_check, resolve_name, restrict, validate, Name};
use meager_core::engine::{
    audit, build_generic, extend_all, initial_condition, DenseGoal, GoalEvidence,
};
use meager_core::generators::{BitGen, SeqGen};
use meager_core::harness::plan_goals;
use meager_core::poset::{compute_ranks, Node, PosetSpec, RankedPoset};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::*;

fn poset_from(seed: u64, max: usize) -> PosetSpec {
    random_poset(&mut ChaCha8Rng::seed_from_u64(seed), max)
}

fn inc(bound: u64, max_len: usize) -> impl Strategy<Value = Vec<u64>> {
    prop::collection::btree_set(0..bound, 2..max_len).prop_map(|s| s.into_iter().collect())
}

fn bits(len: usize) -> impl Strategy<Value = Vec<bool>> {
    prop::collection::vec(any::<bool>(), len)
}

/// Brute-force `⊑` scan over all `(n, k)` pairs.
fn refines_oracle(f: &[u64], g: &[u64], w: Window) -> Vec<usize> {
    let f_last = *f.last().unwrap();
    let mut out = Vec::new();
    for n in 0..g.len().saturating_sub(1) {
        if (n as u64) < w.threshold || g[n + 1] > w.limit.min(f_last) {
            continue;
        }
        let mut inside = false;
        for k in 0..f.len() - 1 {
            if g[n] <= f[k] && f[k + 1] <= g[n + 1] {
                inside = true;
            }
        }
        if !inside {
            out.push(n);
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn linear_extension_respects_order(seed in any::<u64>(), pick in any::<prop::sample::Index>()) {
        let rp = poset_from(seed, 6).build().unwrap();
        let p = rp.poset();
        let elems: Vec<_> = p.elements().collect();
        let c = elems[pick.index(elems.len())];
        let order = p.linear_extension_above(c);
        let pos = |x| order.iter().position(|&y| y == x).unwrap();
        prop_assert_eq!(order.iter().collect::<BTreeSet<_>>().len(), elems.len());
        prop_assert_eq!(order.len(), elems.len());
        for &a in &elems {
            for &b in &elems {
                if p.lt(a, b) {
                    prop_assert!(pos(a) < pos(b));
                }
            }
            if !p.comparable(a, c) {
                prop_assert!(pos(c) < pos(a));
            }
        }
    }

    #[test]
    fn ranks_survive_relabeling(seed in any::<u64>()) {
        let spec = poset_from(seed, 6);
        let rename = |s: &str| format!("z{}", 100 - s[1..].parse::<usize>().unwrap());
        let relabeled = PosetSpec {
            elements: spec.elements.iter().map(|s| rename(s)).collect(),
            relations: spec.relations.iter().map(|(a, b)| (rename(a), rename(b))).collect(),
            cofinal_set: None,
        };
        let r1 = spec.build().unwrap().rank_table();
        let r2 = relabeled.build().unwrap().rank_table();
        for (name, rank) in r1 {
            prop_assert_eq!(r2[&rename(&name)], rank);
        }
    }

    #[test]
    fn ranks_increase_along_cofinal_set(seed in any::<u64>(), extra in any::<u64>()) {
        let base = poset_from(seed, 6).build().unwrap();
        let p = base.poset().clone();
        // Maximal elements plus a random selection keep the set cofinal.
        let mut r: BTreeSet<_> = p.maximal().into_iter().collect();
        for (i, e) in p.elements().enumerate() {
            if extra >> (i % 64) & 1 == 1 {
                r.insert(e);
            }
        }
        let rp = compute_ranks(p, r.clone()).unwrap();
        let p = rp.poset();
        for &a in &r {
            for &b in &r {
                if p.lt(a, b) {
                    prop_assert!(rp.rank(a) < rp.rank(b));
                }
            }
        }
        for a in p.elements() {
            prop_assert!(rp.ll(a, Node::Top));
            prop_assert!(rp.rank(a) < rp.top_rank());
            for b in p.elements() {
                if rp.ll(a, Node::Elem(b)) {
                    prop_assert!(p.lt(a, b));
                }
            }
        }
    }

    #[test]
    fn refines_matches_double_loop(f in inc(64, 24), g in inc(64, 24), m in 0u64..4, lim in 8u64..70) {
        let w = Window::new(m, lim.max(m)).unwrap();
        prop_assert_eq!(refines_at(&f, &g, w).unwrap(), refines_oracle(&f, &g, w));
        let judged = judged_blocks(&f, &g, w);
        prop_assert!(refines_oracle(&f, &g, w).iter().all(|n| judged.contains(n)));
    }

    #[test]
    fn star_matches_scan(f in prop::collection::vec(0u64..50, 12), g in prop::collection::vec(0u64..50, 12), m in 0u64..6) {
        let w = Window::new(m, 12).unwrap();
        let scan: Vec<usize> = (m as usize..12).filter(|&n| f[n] > g[n]).collect();
        prop_assert_eq!(star_dominates_at(&f, &g, w).unwrap(), scan);
    }

    #[test]
    fn e_member_matches_scan_and_is_monotone(
        f in inc(40, 16), z in bits(40), x in bits(40), m in 0usize..8, dm in 0usize..8,
    ) {
        let w = Window::from(0);
        let member = e_member(&z, &x, &f, m, w).unwrap();
        prop_assert_eq!(member, differs_on_every_block(&z, &x, &f, m, u64::MAX));
        if member {
            prop_assert!(e_member(&z, &x, &f, m + dm, w).unwrap());
        }
    }

    #[test]
    fn refinement_is_transitive(f in inc(48, 30), g in inc(48, 16), h in inc(48, 10)) {
        // Judge on the range all three cover.
        let lim = *f.last().unwrap().min(g.last().unwrap()).min(h.last().unwrap());
        let w = Window::new(0, lim).unwrap();
        if refines_at(&f, &g, w).unwrap().is_empty() && refines_at(&g, &h, w).unwrap().is_empty() {
            prop_assert!(refines_at(&f, &h, w).unwrap().is_empty());
        }
    }

    #[test]
    fn witness_separates(f in inc(64, 12), g in inc(64, 40), x in bits(65), y in bits(65)) {
        let w = Window::from(0);
        if let Ok(wit) = non_subset_witness(&x, &y, &f, &g, w) {
            prop_assert!(wit.selected.len() >= 2);
            prop_assert!(wit.selected.windows(2).all(|p| p[1] > p[0] + 1));
            prop_assert!(wit.selected.iter().all(|n| wit.violations.contains(n)));
            prop_assert!(e_member(&wit.z, &x, &f, 0, w).unwrap());
            prop_assert!(differs_on_every_block(&wit.z, &x, &f, 0, u64::MAX));
            prop_assert_eq!(agreeing_blocks(&wit.z, &y, &g, &wit.selected), wit.selected.clone());
        }
    }

    #[test]
    fn resolution_is_prefix_monotone(seed in any::<u64>(), k1 in 1usize..8, dk in 0usize..8, which in 0usize..4) {
        let rp = poset_from(seed, 4).build().unwrap();
        let top = rp.poset().maximal()[0];
        let q = initial_condition(&rp);
        let a = rp.poset().elements().next().unwrap();
        let name = match which {
            0 => Name::Ground(SeqGen::Affine { slope: 3, offset: 1 }),
            1 => Name::Coordinate(a),
            2 => Name::Diagonal { real: BitGen::SeededRandom(seed), rank: rp.rank(top) },
            _ => Name::Merge(
                Arc::new(Name::Ground(SeqGen::Affine { slope: 2, offset: 0 })),
                Arc::new(Name::Coordinate(a)),
            ),
        };
        let r1 = resolve_name(&name, &rp, q.clone(), BitSeq::zeros(0), k1);
        let r2 = resolve_name(&name, &rp, q, BitSeq::zeros(0), k1 + dk);
        if let (Ok((_, _, h1)), Ok((_, _, h2))) = (r1, r2) {
            prop_assert!(h1.len() >= k1 && h2.len() >= k1 + dk);
            let n = h1.len().min(h2.len());
            prop_assert_eq!(&h1[..n], &h2[..n]);
        }
    }
}

fn small_run(seed: u64) -> (RankedPoset, meager_core::engine::GenericRun) {
    let spec = poset_from(seed, 5);
    let rp = spec.build().unwrap();
    let mut sc = scenario(spec, &["zeros", "periodic:01"], seed);
    sc.goals.min_length = 8;
    let goals = plan_goals(&sc, &rp);
    let run = build_generic(&rp, goals, sc.resolution, seed).unwrap();
    (rp, run)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn engine_chains_are_sound(seed in any::<u64>()) {
        let (rp, run) = small_run(seed);
        let report = audit(&run, 50, seed);
        prop_assert!(report.is_clean(), "{}", report);
        let certs = run.certificates();
        for p in &run.chain {
            prop_assert!(validate(p, &rp, Node::Top).is_valid());
            prop_assert!(leq_check(p, p, &rp, &certs).holds());
            for b in rp.poset().elements() {
                let r = restrict(p, Node::Elem(b), &rp);
                prop_assert!(validate(&r, &rp, Node::Elem(b)).is_valid());
            }
        }
    }

    #[test]
    fn ladder_lengthens_every_coordinate(seed in any::<u64>()) {
        let (rp, run) = small_run(seed);
        let q = run.final_condition().clone();
        let p = extend_all(q.clone(), &rp).unwrap();
        for b in q.support() {
            prop_assert!(p.t(b).unwrap().len() > q.t(b).unwrap().len());
        }
        prop_assert!(leq_check(&p, &q, &rp, &run.certificates()).holds());
    }

    #[test]
    fn incomparability_blocks_persist(seed in any::<u64>()) {
        let (_, run) = small_run(seed);
        for e in &run.ledger {
            if let (DenseGoal::Incomparable { a, b, .. }, GoalEvidence::Incomparable { block }) = (&e.goal, &e.evidence) {
                for p in &run.chain[e.met_at..] {
                    let (ta, tb) = (p.t(*a).unwrap(), p.t(*b).unwrap());
                    let (lo, hi) = (tb[*block], tb[*block + 1]);
                    prop_assert!(!ta.iter().any(|&v| lo <= v && v < hi));
                }
            }
        }
    }

    #[test]
    fn runs_are_deterministic(seed in any::<u64>()) {
        let (_, r1) = small_run(seed);
        let (_, r2) = small_run(seed);
        prop_assert_eq!(r1.chain, r2.chain);
        prop_assert_eq!(r1.ledger, r2.ledger);
    }
}
