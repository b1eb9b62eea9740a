use std::collections::BTreeSet;

use compident_core::ident::{is_identifiable, RankConfig};
use compident_core::sweep::{configurations, sweep, Family};
use compident_core::CompartmentalModel;
use proptest::prelude::*;

type Config = (BTreeSet<usize>, BTreeSet<usize>, BTreeSet<usize>);

/// Orbit count by brute force: collect every configuration's whole orbit.
fn orbit_count(n: usize, maps: &[Box<dyn Fn(usize) -> usize>]) -> usize {
    let sets: Vec<BTreeSet<usize>> =
        (0u32..1 << n).map(|m| (1..=n).filter(|&i| m & (1 << (i - 1)) != 0).collect()).collect();
    let mut seen: BTreeSet<Config> = BTreeSet::new();
    let mut orbits = 0;
    for i in sets.iter().filter(|s| !s.is_empty()) {
        for o in sets.iter().filter(|s| !s.is_empty()) {
            for l in &sets {
                let c = (i.clone(), o.clone(), l.clone());
                if seen.contains(&c) {
                    continue;
                }
                orbits += 1;
                for f in maps {
                    let img = |s: &BTreeSet<usize>| s.iter().map(|&x| f(x)).collect::<BTreeSet<_>>();
                    seen.insert((img(&c.0), img(&c.1), img(&c.2)));
                }
            }
        }
    }
    orbits
}

fn rotations(n: usize) -> Vec<Box<dyn Fn(usize) -> usize>> {
    (0..n).map(|r| Box::new(move |i: usize| (i - 1 + r) % n + 1) as Box<dyn Fn(usize) -> usize>).collect()
}

#[test]
fn three_cycle_class_count() {
    assert_eq!(configurations(Family::Cycle, 3, None).unwrap().len(), 132);
    for n in 3..=5 {
        assert_eq!(configurations(Family::Cycle, n, None).unwrap().len(), orbit_count(n, &rotations(n)));
    }
}

#[test]
fn catenary_class_count() {
    for n in 1..=5 {
        let maps: Vec<Box<dyn Fn(usize) -> usize>> =
            vec![Box::new(|i| i), Box::new(move |i| n + 1 - i)];
        assert_eq!(configurations(Family::Catenary, n, None).unwrap().len(), orbit_count(n, &maps));
    }
}

#[test]
fn catenary_sweep_follows_tree_law() {
    for n in 1..=4 {
        let rep = sweep(Family::Catenary, n, None, &RankConfig::default()).unwrap();
        assert!(rep.disagreements().next().is_none(), "n={n}");
    }
}

#[test]
fn max_leaks_filter() {
    let all = configurations(Family::Cycle, 4, None).unwrap();
    let few = configurations(Family::Cycle, 4, Some(1)).unwrap();
    assert!(few.len() < all.len());
    assert!(few.iter().all(|c| c.2.len() <= 1));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn verdict_is_rotation_invariant(
        n in 3usize..=5,
        masks in (1u32..32, 1u32..32, 0u32..32),
        r in 0usize..5,
    ) {
        let pick = |m: u32| (1..=n).filter(|&i| m & (1 << (i - 1)) != 0).collect::<Vec<_>>();
        let (i, o, l) = (pick(masks.0), pick(masks.1), pick(masks.2));
        prop_assume!(!i.is_empty() && !o.is_empty());
        let rot = |s: &[usize]| s.iter().map(|&x| (x - 1 + r) % n + 1).collect::<Vec<_>>();
        let cfg = RankConfig::default();
        let a = is_identifiable(&CompartmentalModel::cycle(n, i.clone(), o.clone(), l.clone()).unwrap(), &cfg).unwrap();
        let b = is_identifiable(&CompartmentalModel::cycle(n, rot(&i), rot(&o), rot(&l)).unwrap(), &cfg).unwrap();
        prop_assert_eq!(a.identifiable, b.identifiable);
        prop_assert_eq!(a.generic_rank, b.generic_rank);
    }
}
