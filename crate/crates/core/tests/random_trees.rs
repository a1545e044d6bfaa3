mod common;

use std::collections::{BTreeMap, BTreeSet};

use resolvedk_core::deloc::{assemble_complex, deloc_cohomology, les_of_pruning, single_node_cohomology};
use resolvedk_core::ktheory::compare_ranks;
use resolvedk_core::model::materialize_windows;
use resolvedk_core::SectionChoice;

use common::{pruning_steps, random_action};

#[test]
fn geometric_random_actions_compare() {
    let mut seen = 0;
    for seed in 0..200 {
        let r = random_action(seed);
        if !r.geometric {
            continue;
        }
        seen += 1;
        let a = &r.action;
        let m = (seed % 3) as usize;
        let w = materialize_windows(&a.tree, &BTreeMap::new(), m).unwrap();
        let mut s = SectionChoice::canonical(&a.tree).unwrap();
        s.prepare(&a.tree, &w).unwrap();
        let report = compare_ranks(a, &s, &w, &BTreeSet::new()).unwrap_or_else(|e| panic!("seed {seed}: {e}"));
        let h = deloc_cohomology(&assemble_complex(a, &s, &w, &BTreeSet::new()).unwrap());
        assert_eq!((report.global.even, report.global.odd), (h.even, h.odd), "seed {seed}");
    }
    assert!(seen >= 5, "only {seen} geometric samples");
}

#[test]
fn node_ranks_match_hand_counts() {
    for seed in 0..40 {
        let r = random_action(seed);
        for (id, (abs, rel)) in &r.node_ranks {
            assert_eq!(single_node_cohomology(&r.action, id, false).unwrap(), *abs, "seed {seed} node {id}");
            assert_eq!(single_node_cohomology(&r.action, id, true).unwrap(), *rel, "seed {seed} node {id}");
        }
    }
}

#[test]
fn every_pruning_step_is_exact() {
    for seed in 0..20 {
        let r = random_action(seed);
        let a = &r.action;
        let w = materialize_windows(&a.tree, &BTreeMap::new(), 1).unwrap();
        let mut s = SectionChoice::canonical(&a.tree).unwrap();
        s.prepare(&a.tree, &w).unwrap();
        for (p, alpha) in pruning_steps(a) {
            let les = les_of_pruning(a, &s, &w, &p, &alpha).unwrap();
            assert!(les.verdict.is_exact(), "seed {seed} prune {alpha} after {p:?}: {:?}", les.instance);
        }
    }
}
