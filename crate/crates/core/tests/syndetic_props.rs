use std::collections::BTreeSet;
use std::sync::Arc;

use proptest::prelude::*;

use regseq_core::syndetic::{cover_check, gap_runs, CoverReport, EnumerableSet};
use regseq_core::{Exec, SequenceHandle, SequenceSpec};

fn handle(spec: SequenceSpec) -> Arc<SequenceHandle> {
    Arc::new(SequenceHandle::new(spec).unwrap())
}

fn specs() -> Vec<SequenceSpec> {
    vec![SequenceSpec::power(2), SequenceSpec::power(3), SequenceSpec::fibonacci(), SequenceSpec::Factorial]
}

/// k-fold sums (repetition allowed) of the sequence terms up to `n`.
fn sums(terms: &[u64], k: usize, n: u64) -> BTreeSet<u64> {
    let mut cur: BTreeSet<u64> = [0].into();
    for _ in 0..k {
        cur = cur
            .iter()
            .flat_map(|s| terms.iter().map(move |t| s + t))
            .filter(|&x| x <= n)
            .collect();
    }
    cur
}

fn terms_below(h: &SequenceHandle, n: u64) -> Vec<u64> {
    (0..)
        .map(|i| u64::try_from(h.eval(i).unwrap()).unwrap_or(u64::MAX))
        .take_while(|&x| x <= n)
        .collect()
}

fn longest(sorted: &[u64], d: u64) -> usize {
    let (mut best, mut cur) = (0, 0);
    for i in 0..sorted.len() {
        cur = if i > 0 && sorted[i] - sorted[i - 1] <= d { cur + 1 } else { 1 };
        best = best.max(cur);
    }
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn gap_runs_match_direct_count(which in 0usize..4, k in 1usize..=3, n in 10u64..20_000, d in 1u64..40) {
        let h = handle(specs()[which].clone());
        let want: Vec<u64> = sums(&terms_below(&h, n), k, n).into_iter().collect();
        let report = gap_runs(&EnumerableSet::sums_of(h, k), n, d).unwrap();
        prop_assert_eq!(report.count, want.len());
        prop_assert_eq!(report.longest_run, longest(&want, d));
    }

    #[test]
    fn longest_run_is_monotone(which in 0usize..4, n in 10u64..5_000, d in 1u64..30, dn in 0u64..5_000, dd in 0u64..10) {
        let set = EnumerableSet::sums_of(handle(specs()[which].clone()), 2);
        let base = gap_runs(&set, n, d).unwrap().longest_run;
        prop_assert!(gap_runs(&set, n + dn, d).unwrap().longest_run >= base);
        prop_assert!(gap_runs(&set, n, d + dd).unwrap().longest_run >= base);
    }

    #[test]
    fn cover_witnesses_are_valid(a in 0u64..20, d in 1u64..12, n in 50u64..3_000, pick in proptest::collection::vec(0usize..4, 1..=2)) {
        let hs: Vec<Arc<SequenceHandle>> = pick.iter().map(|&i| handle(specs()[i].clone())).collect();
        let images: Vec<EnumerableSet> = hs.iter().map(|h| EnumerableSet::sums_of(h.clone(), 1)).collect();
        let members: Vec<BTreeSet<u64>> = hs.iter().map(|h| terms_below(h, n).into_iter().collect()).collect();
        match cover_check(a, d, &images, n, Exec::default()).unwrap() {
            CoverReport::Witness { witness, .. } => {
                prop_assert!(witness >= a && (witness - a) % d == 0 && witness <= n);
                prop_assert!(members.iter().all(|s| !s.contains(&witness)));
                prop_assert!((a..witness).step_by(d as usize).all(|x| members.iter().any(|s| s.contains(&x))));
            }
            CoverReport::Covered { .. } => {
                prop_assert!((a..=n).step_by(d as usize).all(|x| members.iter().any(|s| s.contains(&x))));
            }
        }
    }
}
