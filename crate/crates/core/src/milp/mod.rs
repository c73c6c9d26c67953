//! Mixed-integer model export, solver output import and an exact oracle for
//! small instances.

mod assign;
mod import;
mod lp;
mod model;
mod oracle;

pub use assign::assignment;
pub use import::{import_solution, parse_values, solution_from_values, VarName};
pub use lp::write_lp;
pub use model::{build_model, MilpModel, Row, Sense, Var, VarIndex, VarKind, DEFAULT_NODE_CAP};
pub use oracle::{brute_force_solve, OracleLimits, OracleResult};

use crate::instance::Instance;
use crate::Error;

/// Builds the model and renders it in LP format.
pub fn export_lp(inst: &Instance, node_cap: usize) -> Result<String, Error> {
    Ok(write_lp(&build_model(inst, node_cap)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{
        CostParams, DepotSpec, FleetParams, RequestKind, RequestSpec, ServiceDepotSpec,
    };
    use crate::scenario::poc_instance;
    use crate::solution::{evaluate, route_cost, Route, Solution};

    fn one_request(alpha_ud: f64) -> Instance {
        Instance::build(
            vec![RequestSpec::new(
                RequestKind::Passenger,
                [1.0, 0.0],
                [2.0, 0.0],
            )],
            vec![DepotSpec::at([0.0, 0.0])],
            vec![],
            FleetParams {
                kappa: 1,
                ..FleetParams::default()
            },
            CostParams {
                alpha_ud,
                ..CostParams::default()
            },
        )
        .unwrap()
    }

    #[test]
    fn variable_count_formula() {
        let inst = one_request(1000.0);
        let m = build_model(&inst, DEFAULT_NODE_CAP).unwrap();
        let n = inst.n_nodes();
        let (kappa, modules) = (1, 2);
        assert_eq!(n, 4);
        assert_eq!(
            m.vars.len(),
            n * n * kappa + n * n * modules + kappa * n + n * kappa + n
        );
        // Every variable appears in some row.
        let mut used = vec![false; m.vars.len()];
        for row in &m.rows {
            for &(v, _) in &row.terms {
                used[v] = true;
            }
        }
        assert!(used.iter().all(|&u| u));
    }

    #[test]
    fn node_cap_is_enforced() {
        let inst = one_request(1000.0);
        assert!(matches!(build_model(&inst, 3), Err(Error::Guard(_))));
    }

    #[test]
    fn lp_text_is_deterministic() {
        let inst = poc_instance(1).unwrap();
        let a = export_lp(&inst, DEFAULT_NODE_CAP).unwrap();
        let b = export_lp(&inst, DEFAULT_NODE_CAP).unwrap();
        assert_eq!(a, b);
        assert!(a.starts_with("\\ nodes"));
        assert!(a.contains("\nSubject To\n") && a.ends_with("End\n"));
        assert!(a.contains(" c21_1_2_1:"));
        assert!(a.contains(" gpair_"));
    }

    #[test]
    fn import_empty_and_broken_outputs() {
        let inst = poc_instance(0).unwrap();
        let sol = import_solution(&inst, "# header\nx_1_2_1 0\ns_1_1 3.5\n").unwrap();
        assert_eq!(sol, Solution::empty(&inst));
        let l = inst.layout();
        let p = l.pickup(0);
        let d = l.dropoff(0);
        let text = format!("x_{p}_{d}_1 1\n");
        assert!(matches!(
            import_solution(&inst, &text),
            Err(Error::Import(_))
        ));
        let text = format!("x_{p}_{d}_1 0.5\n");
        assert!(matches!(
            import_solution(&inst, &text),
            Err(Error::Import(_))
        ));
    }

    #[test]
    fn import_round_trip() {
        let inst = poc_instance(1).unwrap();
        let sol = brute_force_solve(&inst, OracleLimits::default())
            .unwrap()
            .solution;
        let m = build_model(&inst, DEFAULT_NODE_CAP).unwrap();
        let v = assignment(&inst, &m, &sol);
        let text: String = m
            .vars
            .iter()
            .zip(&v)
            .map(|(var, x)| format!("{} {x}\n", var.name))
            .collect();
        assert_eq!(import_solution(&inst, &text).unwrap(), sol);
    }

    #[test]
    fn no_requests_costs_nothing() {
        let inst = Instance::build(
            vec![],
            vec![DepotSpec::at([0.0, 0.0])],
            vec![],
            FleetParams {
                kappa: 2,
                ..FleetParams::default()
            },
            CostParams::default(),
        )
        .unwrap();
        let out = brute_force_solve(&inst, OracleLimits::default()).unwrap();
        assert_eq!(out.objective.total, 0.0);
        assert!(out.solution.routes.is_empty());
    }

    #[test]
    fn single_request_closed_form() {
        for alpha_ud in [10.0, 10_000.0] {
            let inst = one_request(alpha_ud);
            let l = inst.layout();
            let visits = [1, l.pickup(0), l.dropoff(0), l.destination_of(1)];
            let expected = route_cost(&inst, &visits).min(alpha_ud);
            let out = brute_force_solve(&inst, OracleLimits::default()).unwrap();
            assert!((out.objective.total - expected).abs() < 1e-9);
        }
    }

    #[test]
    fn reference_network_optima() {
        let conv = brute_force_solve(&poc_instance(0).unwrap(), OracleLimits::default()).unwrap();
        assert_eq!(conv.objective.b1, 2);
        assert!((conv.objective.b4 / 60.0 - 190.0).abs() < 1e-6);
        let multi = brute_force_solve(&poc_instance(1).unwrap(), OracleLimits::default()).unwrap();
        assert_eq!(
            (multi.objective.b1, multi.objective.b2, multi.objective.b5),
            (1, 2, 1)
        );
        assert!((multi.objective.b4 / 60.0 - 140.0).abs() < 1e-6);
    }

    #[test]
    fn oracle_solution_satisfies_rows_and_prices_alike() {
        for inst in [poc_instance(0).unwrap(), poc_instance(1).unwrap()] {
            let sol = brute_force_solve(&inst, OracleLimits::default())
                .unwrap()
                .solution;
            let m = build_model(&inst, DEFAULT_NODE_CAP).unwrap();
            let v = assignment(&inst, &m, &sol);
            assert_eq!(m.violations(&v, 1e-6), Vec::<String>::new());
            let total = evaluate(&inst, &sol).total;
            assert!((m.objective_value(&v) - total).abs() < 1e-6 * total.max(1.0));
        }
    }

    #[test]
    fn rows_reject_a_module_mix_without_service_depot() {
        let inst = poc_instance(1).unwrap();
        let l = *inst.layout();
        let visits = vec![
            1,
            l.pickup(1),
            l.dropoff(1),
            l.pickup(0),
            l.dropoff(0),
            l.destination_of(1),
        ];
        let sol = Solution {
            routes: vec![Route::new(1, visits)],
            unserved: Default::default(),
        };
        let m = build_model(&inst, DEFAULT_NODE_CAP).unwrap();
        assert!(!m.violations(&assignment(&inst, &m, &sol), 1e-6).is_empty());
    }

    #[test]
    fn oracle_guards() {
        let reqs = (0..6)
            .map(|i| RequestSpec::new(RequestKind::Freight, [i as f64, 0.0], [i as f64, 1.0]))
            .collect();
        let inst = Instance::build(
            reqs,
            vec![DepotSpec::at([0.0, 0.0])],
            vec![ServiceDepotSpec::at([1.0, 1.0])],
            FleetParams::default(),
            CostParams::default(),
        )
        .unwrap();
        assert!(matches!(
            brute_force_solve(&inst, OracleLimits::default()),
            Err(Error::Guard(_))
        ));
    }
}
