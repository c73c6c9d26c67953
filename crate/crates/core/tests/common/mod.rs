#![allow(dead_code)]

use std::collections::BTreeSet;

use mppdp::milp::{assignment, build_model, MilpModel, DEFAULT_NODE_CAP};
use mppdp::solution::compute_schedule;
use mppdp::{
    check_feasibility, CostParams, DepotSpec, FleetParams, Instance, InstanceSpec, RequestKind,
    RequestSpec, Route, ServiceDepotSpec, Solution, TimeWindow,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Small random instance in a 6 km square: one depot, mixed request kinds,
/// random windows, small capacities and sometimes a binding range.
pub fn random_small_instance(seed: u64, n_requests: usize) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pt = |rng: &mut ChaCha8Rng| [rng.gen_range(0.0..6.0), rng.gen_range(0.0..6.0)];
    let requests = (0..n_requests)
        .map(|_| {
            let kind = if rng.gen_bool(0.5) {
                RequestKind::Passenger
            } else {
                RequestKind::Freight
            };
            let (p, d) = (pt(&mut rng), pt(&mut rng));
            let mut r = RequestSpec::new(kind, p, d);
            r.demand = rng.gen_range(1..=2);
            r.service = [rng.gen_range(0.0..120.0), rng.gen_range(0.0..120.0)];
            if rng.gen_bool(0.5) {
                let open = rng.gen_range(0.0..3600.0);
                r.tw_pickup = TimeWindow {
                    open,
                    close: open + rng.gen_range(600.0..2400.0),
                };
                let open = open + rng.gen_range(0.0..2400.0);
                r.tw_dropoff = TimeWindow {
                    open,
                    close: open + rng.gen_range(600.0..3600.0),
                };
            }
            r
        })
        .collect();
    let n_sd = rng.gen_range(0..=1);
    let service_depots = (0..n_sd)
        .map(|_| ServiceDepotSpec::at(pt(&mut rng)))
        .collect();
    let fleet = FleetParams {
        kappa: rng.gen_range(1..=2),
        vartheta: rng.gen_range(1..=2),
        gamma_p: rng.gen_range(1..=3),
        gamma_f: rng.gen_range(1..=3),
        eta: if rng.gen_bool(0.3) {
            rng.gen_range(8.0..20.0)
        } else {
            100.0
        },
        mu_p: if rng.gen_bool(0.2) { Some(1) } else { None },
        ..FleetParams::default()
    };
    InstanceSpec {
        requests,
        depots: vec![DepotSpec::at(pt(&mut rng))],
        service_depots,
        fleet,
        cost: CostParams::default(),
        distances: None,
    }
    .build()
    .expect("generated instance is valid")
}

fn closed_solution(inst: &Instance, routes: Vec<Route>) -> Solution {
    let l = inst.layout();
    let served: BTreeSet<usize> = routes
        .iter()
        .flat_map(|r| {
            r.visits
                .iter()
                .filter(|&&v| l.is_pickup(v))
                .filter_map(|&v| l.request_of(v))
        })
        .collect();
    Solution {
        routes,
        unserved: (0..inst.n_requests())
            .filter(|r| !served.contains(r))
            .collect(),
    }
}

fn single_route(inst: &Instance, body: &[usize]) -> Route {
    let o = inst.layout().origin(0, 0);
    let mut visits = vec![o];
    visits.extend_from_slice(body);
    visits.push(inst.layout().destination_of(o));
    Route::new(1, visits)
}

/// Every single-route solution whose route visits both nodes of a request or
/// neither, in every order, with service-depot duplicates used in index order,
/// plus the empty solution. Stops after `cap` solutions.
pub fn single_route_solutions(inst: &Instance, cap: usize) -> Vec<Solution> {
    let l = *inst.layout();
    let movable: Vec<usize> = l
        .pickups()
        .chain(l.dropoffs())
        .chain(l.service_depots())
        .collect();
    let mut out = vec![Solution::empty(inst)];
    let mut seq = Vec::new();
    let mut used = vec![false; inst.n_nodes() + 1];
    fn rec(
        inst: &Instance,
        movable: &[usize],
        seq: &mut Vec<usize>,
        used: &mut Vec<bool>,
        out: &mut Vec<Solution>,
        cap: usize,
    ) {
        if out.len() >= cap {
            return;
        }
        let l = inst.layout();
        let closed = seq.iter().all(|&v| match l.request_of(v) {
            Some(r) => seq.contains(&l.pickup(r)) && seq.contains(&l.dropoff(r)),
            None => true,
        });
        if closed {
            out.push(closed_solution(inst, vec![single_route(inst, seq)]));
        }
        for &v in movable {
            if used[v] {
                continue;
            }
            if let Some(site) = l.site_of(v) {
                let dup = v - l.service_depot(site, 0);
                if dup > 0 && !used[v - 1] {
                    continue;
                }
            }
            used[v] = true;
            seq.push(v);
            rec(inst, movable, seq, used, out, cap);
            seq.pop();
            used[v] = false;
        }
    }
    rec(inst, &movable, &mut seq, &mut used, &mut out, cap);
    out
}

/// Random two-route solutions (distinct platforms and origins when κ ≥ 2).
pub fn random_two_route_solutions(inst: &Instance, n: usize, seed: u64) -> Vec<Solution> {
    let l = *inst.layout();
    if l.kappa < 2 {
        return Vec::new();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let mut bodies: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
        for r in 0..l.h_r {
            let slot = rng.gen_range(0..3);
            if slot < 2 {
                bodies[slot].push(l.pickup(r));
                bodies[slot].push(l.dropoff(r));
            }
        }
        for v in l.service_depots() {
            let slot = rng.gen_range(0..3);
            if slot < 2 {
                bodies[slot].push(v);
            }
        }
        let mut routes = Vec::new();
        for (k, body) in bodies.iter_mut().enumerate() {
            body.shuffle(&mut rng);
            if body.is_empty() && rng.gen_bool(0.7) {
                continue;
            }
            let o = l.origin(0, k);
            let mut visits = vec![o];
            visits.extend(body.iter().copied());
            visits.push(l.destination_of(o));
            routes.push(Route::new(k + 1, visits));
        }
        out.push(closed_solution(inst, routes));
    }
    out
}

/// Checker verdict versus model-row verdict for one solution.
pub fn agree(inst: &Instance, model: &MilpModel, sol: &Solution) -> Result<bool, String> {
    let checker = check_feasibility(inst, sol);
    let rows = model.violations(&assignment(inst, model, sol), 1e-6);
    if checker.is_feasible() == rows.is_empty() {
        Ok(checker.is_feasible())
    } else {
        Err(format!(
            "routes {:?}: checker {:?}, rows {:?}",
            sol.routes.iter().map(|r| &r.visits).collect::<Vec<_>>(),
            checker.constraints(),
            &rows[..rows.len().min(5)]
        ))
    }
}

pub fn model(inst: &Instance) -> MilpModel {
    build_model(inst, DEFAULT_NODE_CAP).expect("small instance fits the cap")
}

/// Objective recomputed from the schedule, node by node.
pub fn naive_total(inst: &Instance, sol: &Solution) -> f64 {
    let l = inst.layout();
    let (mut b2, mut b3, mut b4, mut b5) = (0, 0.0, 0.0, 0);
    for r in &sol.routes {
        let sd = r.visits.iter().filter(|&&v| l.is_service_depot(v)).count();
        b2 += 1 + sd;
        b5 += sd;
        for w in r.visits.windows(2) {
            b3 += inst.dist(w[0], w[1]);
        }
        b4 += compute_schedule(inst, &r.visits).unwrap().duration;
    }
    let c = inst.cost();
    c.alpha_ps * sol.routes.len() as f64
        + c.alpha_ms * b2 as f64
        + c.alpha_td * (b3 / 1000.0)
        + c.alpha_tt * (b4 / 3600.0)
        + c.alpha_mc * b5 as f64
        + c.alpha_ud * sol.unserved.len() as f64
}
