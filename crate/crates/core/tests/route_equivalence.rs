//! The determinant, forest and closed-form routes give identical coefficients.

use compident_core::catenary::{catenary_coefficient_map, catenary_coefficient_map_any};
use compident_core::cycle::cycle_coefficient_map;
use compident_core::forests::{coeff_via_forests, coefficient_map_via_forests};
use compident_core::ioeq::{coefficient_map, io_equation};
use compident_core::CompartmentalModel;

fn subsets(n: usize) -> impl Iterator<Item = Vec<usize>> {
    (0u32..1 << n).map(move |mask| (1..=n).filter(|&i| mask & (1 << (i - 1)) != 0).collect())
}

fn check_forests(m: &CompartmentalModel, i: usize, j: usize) {
    let eq = io_equation(m, i).unwrap();
    let fc = coeff_via_forests(m, i, j).unwrap();
    assert_eq!(eq.lhs, fc.lhs, "lhs of {}", m.to_json());
    assert_eq!(eq.rhs[&j], fc.rhs, "rhs of {}", m.to_json());
}

#[test]
fn cycles_three_routes() {
    for n in 3..=5 {
        for leaks in subsets(n) {
            for input in 1..=n {
                for output in 1..=n {
                    let m = CompartmentalModel::cycle(n, [input], [output], leaks.clone()).unwrap();
                    check_forests(&m, output, input);
                    let det = coefficient_map(&m);
                    let closed = cycle_coefficient_map(&m).unwrap();
                    assert!(det.same_polynomials(&closed), "closed form differs for {}", m.to_json());
                    assert!(det.diff(&closed).is_empty(), "labels differ for {}", m.to_json());
                }
            }
        }
    }
}

#[test]
fn catenaries_three_routes() {
    for n in 1..=5 {
        for leaks in subsets(n) {
            for input in 1..=n {
                for output in 1..=n {
                    let m = CompartmentalModel::catenary(n, [input], [output], leaks.clone()).unwrap();
                    check_forests(&m, output, input);
                    let det = coefficient_map(&m);
                    let closed = if input <= output {
                        catenary_coefficient_map(&m).unwrap()
                    } else {
                        catenary_coefficient_map_any(&m).unwrap()
                    };
                    assert!(det.diff(&closed).is_empty(), "closed form differs for {}: {:?}", m.to_json(), det.diff(&closed));
                }
            }
        }
    }
}

#[test]
fn multi_io_forest_map_matches_determinant_map() {
    let m = CompartmentalModel::cycle(4, [1, 3], [2, 4], [1, 2]).unwrap();
    assert_eq!(coefficient_map(&m), coefficient_map_via_forests(&m));
    let c = CompartmentalModel::catenary(4, [1, 4], [2, 3], [3]).unwrap();
    assert_eq!(coefficient_map(&c), coefficient_map_via_forests(&c));
}
