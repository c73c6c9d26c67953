mod common;

use common::*;
use mppdp::milp::{brute_force_solve, OracleLimits};

#[test]
fn checker_and_rows_accept_the_same_solutions() {
    let mut feasible = 0;
    let mut total = 0;
    for seed in 0..8 {
        let inst = random_small_instance(seed, 2 + (seed as usize % 2));
        let m = model(&inst);
        let mut sols = single_route_solutions(&inst, 20_000);
        sols.extend(random_two_route_solutions(&inst, 500, seed));
        for sol in &sols {
            total += 1;
            match agree(&inst, &m, sol) {
                Ok(true) => feasible += 1,
                Ok(false) => {}
                Err(msg) => panic!("seed {seed}: {msg}"),
            }
        }
    }
    assert!(feasible > 0);
    println!("{feasible} feasible of {total}");
}

#[test]
fn oracle_solution_satisfies_rows() {
    for seed in 0..10 {
        let inst = random_small_instance(100 + seed, 3);
        let out = brute_force_solve(&inst, OracleLimits::default()).unwrap();
        assert_eq!(
            agree(&inst, &model(&inst), &out.solution),
            Ok(true),
            "seed {seed}"
        );
    }
}
