use std::collections::BTreeSet;

use gpc_core::{downward_close, is_monotone, minkowski_sum, total_degree_set, MonotoneSet, MultiIndex};
use proptest::prelude::*;

fn dense_index(dims: usize, max_exp: u32) -> impl Strategy<Value = MultiIndex> {
    prop::collection::vec(0..=max_exp, dims).prop_map(|e| MultiIndex::from_dense(&e))
}

fn index_family() -> impl Strategy<Value = Vec<MultiIndex>> {
    (1usize..=4).prop_flat_map(|dims| prop::collection::vec(dense_index(dims, 3), 0..6))
}

fn monotone_set() -> impl Strategy<Value = MonotoneSet> {
    index_family().prop_map(|v| downward_close(v.iter()))
}

fn brute_force_is_monotone(set: &BTreeSet<MultiIndex>) -> bool {
    set.contains(&MultiIndex::zero())
        && set.iter().all(|nu| nu.support().all(|j| set.contains(&nu.decremented(j).unwrap())))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn closure_is_minimal_monotone_superset(gens in index_family()) {
        let closed = downward_close(gens.iter());
        prop_assert!(is_monotone(closed.iter()));
        prop_assert!(brute_force_is_monotone(closed.members()));
        for g in &gens {
            prop_assert!(closed.contains(g));
        }
        // Minimal: every member lies below some generator (or is the root).
        for nu in closed.iter() {
            prop_assert!(nu.is_zero() || gens.iter().any(|g| nu.le(g)));
        }
        prop_assert_eq!(downward_close(closed.iter()), closed);
    }

    #[test]
    fn is_monotone_matches_definition(gens in index_family()) {
        let set: BTreeSet<MultiIndex> = gens.into_iter().collect();
        prop_assert_eq!(is_monotone(set.iter()), brute_force_is_monotone(&set));
        prop_assert_eq!(is_monotone(set.iter()), downward_close(set.iter()).members() == &set);
    }

    #[test]
    fn minkowski_sum_is_monotone_and_exact(a in monotone_set(), b in monotone_set()) {
        let sum = minkowski_sum(&a, &b);
        prop_assert!(is_monotone(sum.iter()));
        let brute: BTreeSet<MultiIndex> = a.iter().flat_map(|x| b.iter().map(move |y| x.add(y))).collect();
        prop_assert_eq!(sum.members(), &brute);
        prop_assert!(sum.len() >= a.len().max(b.len()));
        prop_assert!(sum.len() <= a.len() * b.len());
        for x in a.iter() {
            prop_assert!(sum.contains(x));
        }
    }

    #[test]
    fn display_round_trips(nu in dense_index(5, 4)) {
        let text = nu.to_string();
        prop_assert_eq!(text.parse::<MultiIndex>().unwrap(), nu);
    }

    #[test]
    fn canonical_order_is_degree_then_lexicographic(a in dense_index(3, 3), b in dense_index(3, 3)) {
        if a.degree() != b.degree() {
            prop_assert_eq!(a.cmp(&b), a.degree().cmp(&b.degree()));
        }
        prop_assert_eq!(a.cmp(&b).reverse(), b.cmp(&a));
    }
}

#[test]
fn total_degree_set_matches_enumeration() {
    for dims in 1..=3usize {
        for deg in 0..=4u32 {
            let w = vec![1.0; dims];
            let set = total_degree_set(dims, deg as f64, &w, 10_000).unwrap();
            let mut brute = BTreeSet::new();
            let side = deg as usize + 1;
            for flat in 0..side.pow(dims as u32) {
                let mut f = flat;
                let exps: Vec<u32> = (0..dims)
                    .map(|_| {
                        let e = (f % side) as u32;
                        f /= side;
                        e
                    })
                    .collect();
                if exps.iter().sum::<u32>() <= deg {
                    brute.insert(MultiIndex::from_dense(&exps));
                }
            }
            assert_eq!(set.members(), &brute, "dims {dims} degree {deg}");
            assert!(is_monotone(set.iter()));
        }
    }
}

#[test]
fn total_degree_set_cost_guard() {
    assert!(total_degree_set(10, 10.0, &[1.0; 10], 100).is_err());
}
