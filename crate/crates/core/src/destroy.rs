//! Destroy heuristics and the removal-count rule.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::instance::Instance;
use crate::repair::prune_solution;
use crate::solution::{compute_schedule, route_cost, RouteEvaluator, Solution, Strictness};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RemovalParams {
    pub iota: usize,
    pub xi: f64,
    pub phi: f64,
    pub chi: f64,
    pub psi: f64,
    pub rho: f64,
    pub rho_worst: f64,
}

impl Default for RemovalParams {
    fn default() -> Self {
        Self {
            iota: 1,
            xi: 0.32,
            phi: 9.0,
            chi: 3.0,
            psi: 2.0,
            rho: 6.0,
            rho_worst: 3.0,
        }
    }
}

impl RemovalParams {
    pub fn validate(&self) -> Result<(), String> {
        if self.iota < 1 {
            return Err("iota must be >= 1".into());
        }
        if !(self.xi > 0.0 && self.xi <= 1.0) {
            return Err("xi must be in (0, 1]".into());
        }
        if !(self.rho >= 1.0 && self.rho_worst >= 1.0) {
            return Err("rho and rho_worst must be >= 1".into());
        }
        if [self.phi, self.chi, self.psi].iter().any(|w| !(*w >= 0.0)) {
            return Err("relatedness weights must be non-negative".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DestroyOperator {
    Random,
    Module,
    Platform,
    ServiceDepot,
    Shaw,
    Worst,
}

impl DestroyOperator {
    pub const ALL: [DestroyOperator; 6] = [
        DestroyOperator::Random,
        DestroyOperator::Module,
        DestroyOperator::Platform,
        DestroyOperator::ServiceDepot,
        DestroyOperator::Shaw,
        DestroyOperator::Worst,
    ];

    pub fn id(self) -> usize {
        self as usize
    }

    pub fn from_id(id: usize) -> Option<Self> {
        Self::ALL.get(id).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            DestroyOperator::Random => "random",
            DestroyOperator::Module => "module",
            DestroyOperator::Platform => "platform",
            DestroyOperator::ServiceDepot => "service_depot",
            DestroyOperator::Shaw => "shaw",
            DestroyOperator::Worst => "worst",
        }
    }

    /// Draws the removal count and applies the operator.
    pub fn apply<R: Rng + ?Sized>(
        self,
        inst: &Instance,
        sol: Solution,
        params: &RemovalParams,
        rng: &mut R,
    ) -> Solution {
        let n_r = inst.n_requests();
        match self {
            DestroyOperator::Random => {
                let k = removal_count(sol.served_count(inst), n_r, params, rng);
                random_removal(inst, sol, k, rng)
            }
            DestroyOperator::Module => {
                let k = removal_count(module_count(inst, &sol), n_r, params, rng);
                module_removal(inst, sol, k, rng)
            }
            DestroyOperator::Platform => platform_removal(inst, sol, rng),
            DestroyOperator::ServiceDepot => {
                let visits = sol
                    .routes
                    .iter()
                    .map(|r| r.service_depot_visits(inst))
                    .sum();
                let k = removal_count(visits, n_r, params, rng);
                service_depot_removal(inst, sol, k, rng)
            }
            DestroyOperator::Shaw => {
                let k = removal_count(sol.served_count(inst), n_r, params, rng);
                shaw_removal(inst, sol, k, params, rng)
            }
            DestroyOperator::Worst => {
                let k = removal_count(sol.served_count(inst), n_r, params, rng);
                worst_removal(inst, sol, k, params, rng)
            }
        }
    }
}

/// Uniform draw from `{iota, ..., max(iota, floor(min(n_served, n_r·xi)))}`, or 0
/// when nothing is served.
pub fn removal_count<R: Rng + ?Sized>(
    n_served: usize,
    n_r: usize,
    params: &RemovalParams,
    rng: &mut R,
) -> usize {
    if n_served == 0 {
        return 0;
    }
    let cap = (n_served as f64).min(n_r as f64 * params.xi).floor() as usize;
    let hi = cap.max(params.iota);
    rng.gen_range(params.iota..=hi)
}

fn served(inst: &Instance, sol: &Solution) -> Vec<usize> {
    let mut out: Vec<usize> = sol.routes.iter().flat_map(|r| r.requests(inst)).collect();
    out.sort_unstable();
    out
}

fn module_count(inst: &Instance, sol: &Solution) -> usize {
    sol.routes
        .iter()
        .map(|r| r.segments(inst).iter().filter(|s| s.kind.is_some()).count())
        .sum()
}

/// Takes the given requests off their routes, marks them unserved and prunes
/// service depots that became redundant.
pub fn remove_requests(inst: &Instance, sol: &mut Solution, requests: &[usize]) {
    let l = *inst.layout();
    let mut drop = vec![false; inst.n_nodes() + 1];
    for &r in requests {
        drop[l.pickup(r)] = true;
        drop[l.dropoff(r)] = true;
        sol.unserved.insert(r);
    }
    for route in &mut sol.routes {
        route.visits.retain(|&v| !drop[v]);
    }
    prune_solution(inst, sol);
}

/// Removes `k` uniformly chosen served requests.
pub fn random_removal<R: Rng + ?Sized>(
    inst: &Instance,
    mut sol: Solution,
    k: usize,
    rng: &mut R,
) -> Solution {
    let pool = served(inst, &sol);
    let chosen: Vec<usize> = pool
        .choose_multiple(rng, k.min(pool.len()))
        .copied()
        .collect();
    remove_requests(inst, &mut sol, &chosen);
    sol
}

/// Removes `k` randomly chosen modules (route segments) with all their requests.
/// Service depots bounding a removed segment disappear through pruning.
pub fn module_removal<R: Rng + ?Sized>(
    inst: &Instance,
    mut sol: Solution,
    k: usize,
    rng: &mut R,
) -> Solution {
    let l = *inst.layout();
    let mut modules = Vec::new();
    for (ri, route) in sol.routes.iter().enumerate() {
        for seg in route.segments(inst) {
            if seg.kind.is_some() {
                modules.push((ri, seg.start, seg.end));
            }
        }
    }
    let chosen: Vec<(usize, usize, usize)> = modules
        .choose_multiple(rng, k.min(modules.len()))
        .copied()
        .collect();
    let mut requests = Vec::new();
    for (ri, start, end) in chosen {
        requests.extend(
            sol.routes[ri].visits[start..end]
                .iter()
                .filter(|&&v| l.is_pickup(v))
                .map(|&v| v - l.h_d - 1),
        );
    }
    remove_requests(inst, &mut sol, &requests);
    sol
}

/// Dissolves one uniformly chosen route.
pub fn platform_removal<R: Rng + ?Sized>(
    inst: &Instance,
    mut sol: Solution,
    rng: &mut R,
) -> Solution {
    if sol.routes.is_empty() {
        return sol;
    }
    let ri = rng.gen_range(0..sol.routes.len());
    let route = sol.routes.remove(ri);
    sol.unserved.extend(route.requests(inst));
    sol
}

/// Removes up to `k` service-depot visits, each only if its route stays
/// feasible without it.
pub fn service_depot_removal<R: Rng + ?Sized>(
    inst: &Instance,
    mut sol: Solution,
    k: usize,
    rng: &mut R,
) -> Solution {
    let l = *inst.layout();
    let mut visits: Vec<usize> = sol
        .routes
        .iter()
        .flat_map(|r| r.visits.iter().copied().filter(|&v| l.is_service_depot(v)))
        .collect();
    visits.shuffle(rng);
    let mut ev = RouteEvaluator::new(inst);
    let mut removed = 0;
    for node in visits {
        if removed == k {
            break;
        }
        let ri = sol
            .routes
            .iter()
            .position(|r| r.visits.contains(&node))
            .expect("service depot on a route");
        let candidate: Vec<usize> = sol.routes[ri]
            .visits
            .iter()
            .copied()
            .filter(|&v| v != node)
            .collect();
        if ev.is_feasible(inst, &candidate, Strictness::Relaxed) {
            sol.routes[ri].visits = candidate;
            removed += 1;
        }
    }
    prune_solution(inst, &mut sol);
    sol
}

/// Arrival time at every node of the solution (NaN for unvisited nodes).
fn arrival_table(inst: &Instance, sol: &Solution) -> Vec<f64> {
    let mut s = vec![f64::NAN; inst.n_nodes() + 1];
    for route in &sol.routes {
        if let Ok(sched) = compute_schedule(inst, &route.visits) {
            for (&v, &t) in route.visits.iter().zip(&sched.arrivals) {
                s[v] = t;
            }
        }
    }
    s
}

fn relatedness_with(inst: &Instance, s: &[f64], params: &RemovalParams, i: usize, j: usize) -> f64 {
    let l = inst.layout();
    let (ai, bi, aj, bj) = (l.pickup(i), l.dropoff(i), l.pickup(j), l.dropoff(j));
    let qi = inst.node(ai).demand;
    let qj = inst.node(aj).demand;
    params.phi * (inst.dist(ai, aj) + inst.dist(bi, bj))
        + params.chi * ((s[ai] - s[aj]).abs() + (s[bi] - s[bj]).abs())
        + params.psi * f64::from((qi - qj).abs())
}

/// Relatedness of two served requests: weighted sum of pickup and drop-off
/// distances, arrival-time gaps and demand difference. `None` if either request
/// is unserved.
pub fn relatedness(
    inst: &Instance,
    sol: &Solution,
    params: &RemovalParams,
    i: usize,
    j: usize,
) -> Option<f64> {
    let s = arrival_table(inst, sol);
    let l = inst.layout();
    if s[l.pickup(i)].is_nan() || s[l.pickup(j)].is_nan() {
        return None;
    }
    Some(relatedness_with(inst, &s, params, i, j))
}

/// Rank selection `floor(u^p · n)`.
pub fn power_rank<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> usize {
    let u: f64 = rng.gen();
    ((u.powf(p) * n as f64).floor() as usize).min(n - 1)
}

/// Removes a uniformly chosen seed request and then requests related to
/// already removed ones, picked by power-law rank on ascending relatedness.
pub fn shaw_removal<R: Rng + ?Sized>(
    inst: &Instance,
    mut sol: Solution,
    k: usize,
    params: &RemovalParams,
    rng: &mut R,
) -> Solution {
    let mut pool = served(inst, &sol);
    let k = k.min(pool.len());
    if k == 0 {
        return sol;
    }
    let s = arrival_table(inst, &sol);
    let seed = pool.swap_remove(rng.gen_range(0..pool.len()));
    pool.sort_unstable();
    let mut removed = vec![seed];
    while removed.len() < k {
        let anchor = removed[rng.gen_range(0..removed.len())];
        let mut ranked: Vec<(f64, usize)> = pool
            .iter()
            .map(|&j| (relatedness_with(inst, &s, params, anchor, j), j))
            .collect();
        ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let pick = ranked[power_rank(ranked.len(), params.rho, rng)].1;
        pool.retain(|&j| j != pick);
        removed.push(pick);
    }
    remove_requests(inst, &mut sol, &removed);
    sol
}

/// Objective saving from removing each served request (route cost before minus
/// route cost after pruning, minus the unserved penalty), sorted descending.
pub fn removal_deltas(inst: &Instance, sol: &Solution) -> Vec<(f64, usize)> {
    let l = *inst.layout();
    let penalty = inst.cost().alpha_ud;
    let mut out = Vec::new();
    for route in &sol.routes {
        let before = route_cost(inst, &route.visits);
        for r in route.requests(inst) {
            let (p, d) = (l.pickup(r), l.dropoff(r));
            let rest: Vec<usize> = route
                .visits
                .iter()
                .copied()
                .filter(|&v| v != p && v != d)
                .collect();
            let pruned = crate::repair::prune_visits(inst, &rest);
            let after = if pruned.len() > 2 {
                route_cost(inst, &pruned)
            } else {
                0.0
            };
            out.push((before - after - penalty, r));
        }
    }
    out.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    out
}

/// Removes `k` requests one at a time, each drawn by power-law rank from the
/// list of current removal savings, recomputed after every removal.
pub fn worst_removal<R: Rng + ?Sized>(
    inst: &Instance,
    mut sol: Solution,
    k: usize,
    params: &RemovalParams,
    rng: &mut R,
) -> Solution {
    for _ in 0..k {
        let deltas = removal_deltas(inst, &sol);
        if deltas.is_empty() {
            break;
        }
        let r = deltas[power_rank(deltas.len(), params.rho_worst, rng)].1;
        remove_requests(inst, &mut sol, &[r]);
    }
    sol
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{
        CostParams, DepotSpec, FleetParams, RequestKind, RequestSpec, ServiceDepotSpec,
    };
    use crate::solution::{check_feasibility, evaluate, Route};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn setup() -> (Instance, Solution) {
        use RequestKind::*;
        let kinds = [Freight, Passenger, Passenger, Freight];
        let requests = kinds
            .iter()
            .enumerate()
            .map(|(i, &k)| RequestSpec::new(k, [i as f64, 1.0], [i as f64 + 0.5, 1.5]))
            .collect();
        let inst = Instance::build(
            requests,
            vec![DepotSpec::at([0.0, 0.0])],
            vec![ServiceDepotSpec::at([2.0, 2.0])],
            FleetParams {
                kappa: 2,
                vartheta: 2,
                ..FleetParams::default()
            },
            CostParams::default(),
        )
        .unwrap();
        let l = *inst.layout();
        let sd = l.service_depot(0, 0);
        let sol = Solution {
            routes: vec![
                Route::new(
                    1,
                    vec![
                        1,
                        l.pickup(0),
                        l.dropoff(0),
                        sd,
                        l.pickup(1),
                        l.dropoff(1),
                        l.pickup(2),
                        l.dropoff(2),
                        l.destination_of(1),
                    ],
                ),
                Route::new(2, vec![2, l.pickup(3), l.dropoff(3), l.destination_of(2)]),
            ],
            unserved: Default::default(),
        };
        assert_eq!(sol.routes[0].visits[8], l.destination_of(1));
        assert!(
            check_feasibility(&inst, &sol).is_feasible(),
            "{}",
            check_feasibility(&inst, &sol)
        );
        (inst, sol)
    }

    #[test]
    fn removal_count_ranges() {
        let p = RemovalParams::default();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(removal_count(0, 100, &p, &mut rng), 0);
        let mut seen = [false; 33];
        for _ in 0..5000 {
            let k = removal_count(80, 100, &p, &mut rng);
            assert!((1..=32).contains(&k));
            seen[k] = true;
        }
        assert!(seen[1..].iter().all(|&s| s));
        for _ in 0..200 {
            assert!((1..=2).contains(&removal_count(2, 100, &p, &mut rng)));
        }
    }

    #[test]
    fn module_removal_prunes_service_depot() {
        let (inst, sol) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        // Remove only the first segment of route 0 by calling remove_requests as module removal does.
        let mut partial = sol.clone();
        remove_requests(&inst, &mut partial, &[0]);
        let l = *inst.layout();
        assert_eq!(
            partial.routes[0].visits,
            vec![
                1,
                l.pickup(1),
                l.dropoff(1),
                l.pickup(2),
                l.dropoff(2),
                l.destination_of(1)
            ]
        );
        assert!(check_feasibility(&inst, &partial).is_feasible());
        let all = module_removal(&inst, sol, 10, &mut rng);
        assert!(all.routes.is_empty());
        assert_eq!(all.unserved.len(), 4);
    }

    #[test]
    fn platform_removal_dissolves_one_route() {
        let (inst, sol) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let out = platform_removal(&inst, sol.clone(), &mut rng);
        assert_eq!(out.routes.len(), 1);
        assert!(sol.routes.contains(&out.routes[0]));
        let empty = platform_removal(&inst, Solution::empty(&inst), &mut rng);
        assert_eq!(empty, Solution::empty(&inst));
    }

    #[test]
    fn service_depot_removal_keeps_required_change() {
        let (inst, sol) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let out = service_depot_removal(&inst, sol.clone(), 3, &mut rng);
        assert_eq!(out, sol);
    }

    #[test]
    fn relatedness_identity_and_symmetry() {
        let (inst, sol) = setup();
        let p = RemovalParams::default();
        assert_eq!(relatedness(&inst, &sol, &p, 1, 1), Some(0.0));
        assert_eq!(
            relatedness(&inst, &sol, &p, 1, 2),
            relatedness(&inst, &sol, &p, 2, 1)
        );
        let mut partial = sol.clone();
        remove_requests(&inst, &mut partial, &[3]);
        assert_eq!(relatedness(&inst, &partial, &p, 1, 3), None);
    }

    #[test]
    fn worst_delta_of_lone_request_covers_platform() {
        let (inst, sol) = setup();
        let deltas = removal_deltas(&inst, &sol);
        let lone = deltas.iter().find(|d| d.1 == 3).unwrap().0;
        assert!(lone + inst.cost().alpha_ud >= inst.cost().alpha_ps);
        let mut without = sol.clone();
        remove_requests(&inst, &mut without, &[3]);
        let direct = evaluate(&inst, &sol).total - evaluate(&inst, &without).total;
        assert!((direct - lone).abs() < 1e-9);
    }

    #[test]
    fn destroy_counts_match() {
        let (inst, sol) = setup();
        let p = RemovalParams::default();
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for op in DestroyOperator::ALL {
                let out = op.apply(&inst, sol.clone(), &p, &mut rng);
                assert!(
                    check_feasibility(&inst, &out).is_feasible(),
                    "{}",
                    op.name()
                );
                assert_eq!(out.unserved.len() + out.served_count(&inst), 4);
            }
            assert_eq!(
                shaw_removal(&inst, sol.clone(), 1, &p, &mut rng)
                    .unserved
                    .len(),
                1
            );
            assert_eq!(
                worst_removal(&inst, sol.clone(), 4, &p, &mut rng)
                    .unserved
                    .len(),
                4
            );
            assert_eq!(random_removal(&inst, sol.clone(), 0, &mut rng), sol);
        }
    }
}
