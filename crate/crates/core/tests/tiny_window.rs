//! Brute force over all of `2^16` confirms the block-level reductions on
//! sequences taken from real runs.

mod common;

use meager_core::blocks::{judged_blocks, refines_at, Window};
use meager_core::harness::{run_scenario, Verdict};
use std::path::Path;

use common::*;

const L: u64 = 16;

fn every_block(z: u32, x: &[bool], s: &[u64], m: usize, limit: u64) -> bool {
    let bits: Vec<bool> = (0..L).map(|j| z >> j & 1 == 1).collect();
    differs_on_every_block(&bits, x, s, m, limit)
}

fn agrees_on_block(z: u32, y: &[bool], lo: u64, hi: u64) -> bool {
    (lo..hi).all(|j| (z >> j & 1 == 1) == y[j as usize])
}

#[test]
fn reductions_hold_exhaustively_on_small_prefixes() {
    let mut same_rank_checked = 0;
    let mut separated_checked = 0;
    for (i, mut s) in [
        spec(&["a", "b", "c"], &[("a", "b")]),
        spec(&["a", "b", "c"], &[("a", "b"), ("b", "c")]),
        spec(&["a", "b", "c", "d"], &[("a", "b"), ("c", "d")]),
    ]
    .into_iter()
    .enumerate()
    {
        s.cofinal_set = Some(s.elements.iter().filter(|e| *e != "a").cloned().collect());
        let sc = scenario(s, &["ones"], i as u64);
        let rp = sc.ranked_poset(Path::new(".")).unwrap();
        let out = run_scenario(&sc, &rp).unwrap();
        let derived = &out.run.derived;
        let p = rp.poset();
        for a in p.elements() {
            for b in p.elements() {
                let (da, db) = (derived.d(a), derived.d(b));
                let limit = L.min(*da.last().unwrap());
                let w = Window::new(0, limit).unwrap();
                let x = derived.c(rp.rank(a)).padded(L as usize, false);
                let y = derived.c(rp.rank(b)).padded(L as usize, false);
                let cell = out.matrix.cells[a.index()][b.index()].verdict;
                if a != b && p.lt(a, b) && rp.rank(a) == rp.rank(b) {
                    assert_eq!(cell, Verdict::SubsetCertified);
                    assert!(refines_at(da, db, w).unwrap().is_empty());
                    let Some(&m) = judged_blocks(da, db, w).first() else {
                        continue;
                    };
                    same_rank_checked += 1;
                    for z in 0u32..1 << L {
                        if every_block(z, &x, da, 0, limit) {
                            assert!(every_block(z, &x, db, m, limit), "z={z:b}");
                        }
                    }
                } else if !p.le(a, b) {
                    assert_eq!(cell, Verdict::NonSubsetCertified);
                    let free: Vec<usize> = refines_at(da, db, w).unwrap();
                    let ok = free.iter().any(|&m| free.iter().any(|&n| n > m + 1));
                    if !ok {
                        continue;
                    }
                    separated_checked += 1;
                    // Some point of E_{x,d_a} copies y on two whole free d_b-blocks.
                    let found = (0u32..1 << L).any(|z| {
                        every_block(z, &x, da, 0, limit)
                            && free
                                .iter()
                                .filter(|&&n| agrees_on_block(z, &y, db[n], db[n + 1]))
                                .count()
                                >= 2
                    });
                    assert!(
                        found,
                        "no separating point for ({}, {})",
                        p.name(a),
                        p.name(b)
                    );
                }
            }
        }
    }
    assert!(same_rank_checked > 0);
    assert!(separated_checked > 0);
}
