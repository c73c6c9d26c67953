//! Repair heuristics, service-depot insertion rules and redundancy pruning.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::instance::{Instance, RequestKind};
use crate::solution::{route_cost, Route, RouteEvaluator, Solution, Strictness};

/// Remembers the platform each request was last served by.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RemovalMemory {
    platform: Vec<Option<usize>>,
}

impl RemovalMemory {
    pub fn new(inst: &Instance) -> Self {
        Self {
            platform: vec![None; inst.n_requests()],
        }
    }

    /// Records the current platform of every served request.
    pub fn record(&mut self, inst: &Instance, sol: &Solution) {
        let l = inst.layout();
        for route in &sol.routes {
            for &v in &route.visits {
                if l.is_pickup(v) {
                    self.platform[v - l.h_d - 1] = Some(route.platform);
                }
            }
        }
    }

    pub fn set(&mut self, request: usize, platform: usize) {
        self.platform[request] = Some(platform);
    }

    pub fn platform_of(&self, request: usize) -> Option<usize> {
        self.platform[request]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RepairOperator {
    FirstFit,
    InterRoute,
    BestInsert,
}

impl RepairOperator {
    pub const ALL: [RepairOperator; 3] = [
        RepairOperator::FirstFit,
        RepairOperator::InterRoute,
        RepairOperator::BestInsert,
    ];

    pub fn id(self) -> usize {
        self as usize
    }

    pub fn from_id(id: usize) -> Option<Self> {
        Self::ALL.get(id).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            RepairOperator::FirstFit => "first_fit",
            RepairOperator::InterRoute => "inter_route",
            RepairOperator::BestInsert => "best_insert",
        }
    }

    pub fn apply<R: Rng + ?Sized>(
        self,
        inst: &Instance,
        partial: Solution,
        memory: &RemovalMemory,
        rng: &mut R,
    ) -> Solution {
        match self {
            RepairOperator::FirstFit => first_fit_insert(inst, partial, rng),
            RepairOperator::InterRoute => inter_route_insert(inst, partial, memory, rng),
            RepairOperator::BestInsert => best_insert(inst, partial, rng),
        }
    }
}

/// A way to serve one request.
#[derive(Debug, Clone, PartialEq)]
pub struct InsertionCandidate {
    /// Index into `Solution::routes`; `None` opens a new route.
    pub route: Option<usize>,
    /// Platform of the route (new or existing).
    pub platform: usize,
    /// Positions of the pickup and drop-off in the resulting visit list.
    pub pickup_pos: usize,
    pub dropoff_pos: usize,
    /// Accompanying service-depot node and its position in the resulting visit list.
    pub service_depot: Option<(usize, usize)>,
    /// Change of the objective, including the avoided unserved-request penalty.
    pub delta: f64,
    pub visits: Vec<usize>,
}

/// Removes redundant service-depot visits: those before the first or after the
/// last request node, and surplus visits in a run of consecutive service depots.
/// A run between two segments of the same module type is removed entirely; a run
/// between different types keeps the single visit with the shortest detour.
/// Since only visits are dropped, time windows and range stay satisfied under
/// metric travel times.
pub fn prune_visits(inst: &Instance, visits: &[usize]) -> Vec<usize> {
    let l = inst.layout();
    let n = visits.len();
    if n < 3 {
        return visits.to_vec();
    }
    let is_req = |v: usize| l.is_pickup(v) || l.is_dropoff(v);
    let Some(first_req) = (1..n - 1).find(|&p| is_req(visits[p])) else {
        return vec![visits[0], visits[n - 1]];
    };
    let last_req = (1..n - 1).rev().find(|&p| is_req(visits[p])).unwrap();
    let mut out = Vec::with_capacity(n);
    out.push(visits[0]);
    let mut pos = first_req;
    while pos <= last_req {
        let v = visits[pos];
        if !l.is_service_depot(v) {
            out.push(v);
            pos += 1;
            continue;
        }
        let run_start = pos;
        while l.is_service_depot(visits[pos]) {
            pos += 1;
        }
        let before = visits[run_start - 1];
        let after = visits[pos];
        let kb = inst.node(before).class.kind();
        let ka = inst.node(after).class.kind();
        if kb != ka {
            let keep = (run_start..pos)
                .min_by(|&a, &b| {
                    let da = inst.dist(before, visits[a]) + inst.dist(visits[a], after);
                    let db = inst.dist(before, visits[b]) + inst.dist(visits[b], after);
                    da.total_cmp(&db)
                })
                .unwrap();
            out.push(visits[keep]);
        }
    }
    out.push(visits[n - 1]);
    out
}

pub fn prune_redundant_service_depots(inst: &Instance, route: &Route) -> Route {
    Route::new(route.platform, prune_visits(inst, &route.visits))
}

/// Prunes every route and drops routes left without requests.
pub fn prune_solution(inst: &Instance, sol: &mut Solution) {
    for route in &mut sol.routes {
        route.visits = prune_visits(inst, &route.visits);
    }
    sol.routes.retain(|r| r.visits.len() > 2);
}

/// Insertion indices allowed for a service depot by the three placement
/// principles: right after the origin, right before the destination, or between
/// a drop-off and a pickup of different request kinds.
pub fn service_depot_slots(inst: &Instance, visits: &[usize]) -> Vec<usize> {
    let n = visits.len();
    if n < 2 {
        return Vec::new();
    }
    let mut out = vec![1];
    for p in 2..n - 1 {
        let a = inst.node(visits[p - 1]).class;
        let b = inst.node(visits[p]).class;
        if a.is_dropoff() && b.is_pickup() && a.kind() != b.kind() {
            out.push(p);
        }
    }
    if n - 1 > 1 {
        out.push(n - 1);
    }
    out
}

/// Free duplicate node for each physical service depot that still has one.
fn free_service_depots(inst: &Instance, sol: &Solution) -> Vec<(usize, usize)> {
    let l = inst.layout();
    let mut used = vec![false; inst.n_nodes() + 1];
    for r in &sol.routes {
        for &v in &r.visits {
            used[v] = true;
        }
    }
    (0..l.n_sd)
        .filter_map(|site| {
            (0..l.vartheta)
                .map(|d| l.service_depot(site, d))
                .find(|&node| !used[node])
                .map(|node| (site, node))
        })
        .collect()
}

/// Positions of `route` where a service depot with a free duplicate can be
/// inserted without breaking the route (window, range and module rules are
/// checked on the intermediate, relaxed route).
pub fn feasible_service_depot_positions(
    inst: &Instance,
    sol: &Solution,
    route: usize,
) -> Vec<usize> {
    let free = free_service_depots(inst, sol);
    let mut ev = RouteEvaluator::new(inst);
    let visits = &sol.routes[route].visits;
    let mut buf = Vec::with_capacity(visits.len() + 1);
    service_depot_slots(inst, visits)
        .into_iter()
        .filter(|&p| {
            free.iter().any(|&(_, node)| {
                insert_at(&mut buf, visits, p, node);
                ev.is_feasible(inst, &buf, Strictness::Relaxed)
            })
        })
        .collect()
}

fn insert_at(buf: &mut Vec<usize>, visits: &[usize], pos: usize, node: usize) {
    buf.clear();
    buf.extend_from_slice(&visits[..pos]);
    buf.push(node);
    buf.extend_from_slice(&visits[pos..]);
}

/// Route with pickup inserted before index `i` of `visits` and drop-off before
/// index `j` of the intermediate list (`j > i`).
fn insert_pair(buf: &mut Vec<usize>, visits: &[usize], i: usize, j: usize, p: usize, d: usize) {
    buf.clear();
    buf.extend_from_slice(&visits[..i]);
    buf.push(p);
    buf.extend_from_slice(&visits[i..j - 1]);
    buf.push(d);
    buf.extend_from_slice(&visits[j - 1..]);
}

/// Insertion index ranges `(i, j_max)` whose segment admits a request of `kind`:
/// the pickup goes before index `i` and the drop-off may follow it up to the end
/// of the same segment.
fn pair_positions(inst: &Instance, visits: &[usize], kind: RequestKind) -> Vec<(usize, usize)> {
    let l = inst.layout();
    let n = visits.len();
    let mut out = Vec::new();
    let mut seg_start = 1;
    for p in 1..n {
        let v = visits[p];
        if l.is_service_depot(v) || p == n - 1 {
            let seg_kind = visits[seg_start..p]
                .iter()
                .find_map(|&u| inst.node(u).class.kind());
            if seg_kind.is_none() || seg_kind == Some(kind) {
                for i in seg_start..=p {
                    out.push((i, p + 1));
                }
            }
            seg_start = p + 1;
        }
    }
    out
}

/// Per-route insertion search with reusable buffers.
struct Inserter<'a> {
    inst: &'a Instance,
    ev: RouteEvaluator,
    buf: Vec<usize>,
    mode: Strictness,
}

impl<'a> Inserter<'a> {
    fn new(inst: &'a Instance, mode: Strictness) -> Self {
        Self {
            inst,
            ev: RouteEvaluator::new(inst),
            buf: Vec::new(),
            mode,
        }
    }

    fn cost(&mut self, visits: &[usize]) -> Option<f64> {
        self.ev
            .evaluate(self.inst, visits, self.mode)
            .map(|s| s.cost(self.inst))
    }

    /// First feasible pair position on the route.
    fn first_fit(&mut self, visits: &[usize], r: usize) -> Option<Vec<usize>> {
        let l = self.inst.layout();
        let (p, d) = (l.pickup(r), l.dropoff(r));
        for (i, j_max) in pair_positions(self.inst, visits, self.inst.request_kind(r)) {
            for j in i + 1..=j_max {
                insert_pair(&mut self.buf, visits, i, j, p, d);
                if self.ev.is_feasible(self.inst, &self.buf, self.mode) {
                    return Some(self.buf.clone());
                }
            }
        }
        None
    }

    /// Cheapest pair position on the route; ties keep the earliest position.
    /// Returns (cost after insertion, pickup pos, drop-off pos).
    fn best_pair(&mut self, visits: &[usize], r: usize) -> Option<(f64, usize, usize)> {
        let l = self.inst.layout();
        let (p, d) = (l.pickup(r), l.dropoff(r));
        let mut best: Option<(f64, usize, usize)> = None;
        for (i, j_max) in pair_positions(self.inst, visits, self.inst.request_kind(r)) {
            for j in i + 1..=j_max {
                insert_pair(&mut self.buf, visits, i, j, p, d);
                if let Some(c) = self.cost_of_buf() {
                    if best.is_none_or(|b| c < b.0) {
                        best = Some((c, i, j));
                    }
                }
            }
        }
        best
    }

    fn cost_of_buf(&mut self) -> Option<f64> {
        self.ev
            .evaluate(self.inst, &self.buf, self.mode)
            .map(|s| s.cost(self.inst))
    }

    /// Cheapest insertion of the request as its own segment next to a module
    /// change at a newly visited service depot.
    fn best_coupled(
        &mut self,
        visits: &[usize],
        r: usize,
        free: &[(usize, usize)],
    ) -> Option<(f64, Vec<usize>, usize, usize, (usize, usize))> {
        let l = *self.inst.layout();
        let kind = self.inst.request_kind(r);
        let (p, d) = (l.pickup(r), l.dropoff(r));
        let mut best: Option<(f64, Vec<usize>, usize, usize, (usize, usize))> = None;
        for pos in 1..visits.len() {
            let prev = self.inst.node(visits[pos - 1]).class;
            let next = self.inst.node(visits[pos]).class;
            let before = prev.is_dropoff() && prev.kind() != Some(kind);
            let after = next.is_pickup() && next.kind() != Some(kind);
            for (sd_first, allowed) in [(true, before), (false, after)] {
                if !allowed {
                    continue;
                }
                for &(_, node) in free {
                    self.buf.clear();
                    self.buf.extend_from_slice(&visits[..pos]);
                    let (pp, sp) = if sd_first {
                        self.buf.extend_from_slice(&[node, p, d]);
                        (pos + 1, pos)
                    } else {
                        self.buf.extend_from_slice(&[p, d, node]);
                        (pos, pos + 2)
                    };
                    self.buf.extend_from_slice(&visits[pos..]);
                    if let Some(c) = self.cost_of_buf() {
                        if best.as_ref().is_none_or(|b| c < b.0) {
                            best = Some((c, self.buf.clone(), pp, pp + 1, (node, sp)));
                        }
                    }
                }
            }
        }
        best
    }

    /// Cheapest position for a service depot on the route among the placement slots.
    fn best_service_depot(&mut self, visits: &[usize], node: usize) -> Option<(f64, usize)> {
        let mut best: Option<(f64, usize)> = None;
        for p in service_depot_slots(self.inst, visits) {
            insert_at(&mut self.buf, visits, p, node);
            if let Some(c) = self.cost_of_buf() {
                if best.is_none_or(|b| c < b.0) {
                    best = Some((c, p));
                }
            }
        }
        best
    }
}

#[derive(Debug, Clone, Copy)]
enum Item {
    Request(usize),
    ServiceSite(usize),
}

fn shuffled_items<R: Rng + ?Sized>(inst: &Instance, sol: &Solution, rng: &mut R) -> Vec<Item> {
    let mut items: Vec<Item> = sol.unserved.iter().map(|&r| Item::Request(r)).collect();
    items.extend(
        free_service_depots(inst, sol)
            .into_iter()
            .map(|(site, _)| Item::ServiceSite(site)),
    );
    items.shuffle(rng);
    items
}

fn free_site_node(inst: &Instance, sol: &Solution, site: usize) -> Option<usize> {
    sol.free_service_depot(inst, site)
}

/// Opens a new single-request route from the first depot (in `depots` order)
/// with a free origin duplicate where the route is feasible.
fn open_route(
    inst: &Instance,
    sol: &Solution,
    ev: &mut RouteEvaluator,
    r: usize,
    depots: &[usize],
) -> Option<Route> {
    let platform = sol.free_platform(inst)?;
    let l = inst.layout();
    for &depot in depots {
        if let Some(o) = sol.free_origin(inst, depot) {
            let visits = vec![o, l.pickup(r), l.dropoff(r), l.destination_of(o)];
            if ev.is_feasible(inst, &visits, Strictness::Strict) {
                return Some(Route::new(platform, visits));
            }
        }
    }
    None
}

fn finish(inst: &Instance, mut sol: Solution) -> Solution {
    prune_solution(inst, &mut sol);
    sol.normalize();
    sol
}

/// Inserts each unserved request, and each service depot with a free
/// duplicate, at the first feasible location over shuffled routes. Requests that
/// fit nowhere open a new route while platforms remain.
pub fn first_fit_insert<R: Rng + ?Sized>(
    inst: &Instance,
    mut sol: Solution,
    rng: &mut R,
) -> Solution {
    let items = shuffled_items(inst, &sol, rng);
    let mut order: Vec<usize> = (0..sol.routes.len()).collect();
    order.shuffle(rng);
    let mut depots: Vec<usize> = (0..inst.n_depots()).collect();
    depots.shuffle(rng);
    let mut ins = Inserter::new(inst, Strictness::Relaxed);
    for item in items {
        match item {
            Item::Request(r) => {
                let mut placed = false;
                for &ri in &order {
                    if let Some(v) = ins.first_fit(&sol.routes[ri].visits, r) {
                        sol.routes[ri].visits = v;
                        placed = true;
                        break;
                    }
                }
                if !placed {
                    if let Some(route) = open_route(inst, &sol, &mut ins.ev, r, &depots) {
                        order.push(sol.routes.len());
                        sol.routes.push(route);
                        placed = true;
                    }
                }
                if placed {
                    sol.unserved.remove(&r);
                }
            }
            Item::ServiceSite(site) => {
                let Some(node) = free_site_node(inst, &sol, site) else {
                    continue;
                };
                'routes: for &ri in &order {
                    let visits = sol.routes[ri].visits.clone();
                    for p in service_depot_slots(inst, &visits) {
                        insert_at(&mut ins.buf, &visits, p, node);
                        if ins.ev.is_feasible(inst, &ins.buf, Strictness::Relaxed) {
                            sol.routes[ri].visits = ins.buf.clone();
                            break 'routes;
                        }
                    }
                }
            }
        }
    }
    finish(inst, sol)
}

/// Inserts each item at its cheapest feasible location within one route: the
/// route of the platform that last served the request, or a random route if
/// that platform is idle or the request was never served.
pub fn inter_route_insert<R: Rng + ?Sized>(
    inst: &Instance,
    mut sol: Solution,
    memory: &RemovalMemory,
    rng: &mut R,
) -> Solution {
    let items = shuffled_items(inst, &sol, rng);
    let mut depots: Vec<usize> = (0..inst.n_depots()).collect();
    depots.shuffle(rng);
    let mut ins = Inserter::new(inst, Strictness::Relaxed);
    for item in items {
        match item {
            Item::Request(r) => {
                if sol.routes.is_empty() {
                    if let Some(route) = open_route(inst, &sol, &mut ins.ev, r, &depots) {
                        sol.routes.push(route);
                        sol.unserved.remove(&r);
                    }
                    continue;
                }
                let ri = memory
                    .platform_of(r)
                    .and_then(|k| sol.routes.iter().position(|route| route.platform == k))
                    .unwrap_or_else(|| rng.gen_range(0..sol.routes.len()));
                let visits = sol.routes[ri].visits.clone();
                if let Some((_, i, j)) = ins.best_pair(&visits, r) {
                    let l = inst.layout();
                    insert_pair(&mut ins.buf, &visits, i, j, l.pickup(r), l.dropoff(r));
                    sol.routes[ri].visits = ins.buf.clone();
                    sol.unserved.remove(&r);
                }
            }
            Item::ServiceSite(site) => {
                if sol.routes.is_empty() {
                    continue;
                }
                let Some(node) = free_site_node(inst, &sol, site) else {
                    continue;
                };
                let ri = rng.gen_range(0..sol.routes.len());
                let visits = sol.routes[ri].visits.clone();
                if let Some((_, p)) = ins.best_service_depot(&visits, node) {
                    insert_at(&mut ins.buf, &visits, p, node);
                    sol.routes[ri].visits = ins.buf.clone();
                }
            }
        }
    }
    finish(inst, sol)
}

/// Cheapest way to serve request `r` in the (strictly feasible) solution,
/// over all routes, coupled service-depot insertions and a new route. With
/// `only_route` set, only that route is searched. Ties go to the lowest route
/// index, then the earliest position; a new route is considered last.
pub fn best_request_insertion(
    inst: &Instance,
    sol: &Solution,
    r: usize,
    only_route: Option<usize>,
) -> Option<InsertionCandidate> {
    let mut ins = Inserter::new(inst, Strictness::Strict);
    let free = free_service_depots(inst, sol);
    best_candidate(inst, sol, &mut ins, &free, r, only_route)
}

fn best_candidate(
    inst: &Instance,
    sol: &Solution,
    ins: &mut Inserter<'_>,
    free: &[(usize, usize)],
    r: usize,
    only_route: Option<usize>,
) -> Option<InsertionCandidate> {
    let l = *inst.layout();
    let (p, d) = (l.pickup(r), l.dropoff(r));
    let penalty = inst.cost().alpha_ud;
    let mut best: Option<InsertionCandidate> = None;
    let routes: Vec<usize> = match only_route {
        Some(ri) => vec![ri],
        None => (0..sol.routes.len()).collect(),
    };
    for ri in routes {
        let route = &sol.routes[ri];
        let Some(before) = ins.cost(&route.visits) else {
            continue;
        };
        if let Some((c, i, j)) = ins.best_pair(&route.visits, r) {
            let delta = c - before - penalty;
            if best.as_ref().is_none_or(|b| delta < b.delta) {
                insert_pair(&mut ins.buf, &route.visits, i, j, p, d);
                best = Some(InsertionCandidate {
                    route: Some(ri),
                    platform: route.platform,
                    pickup_pos: i,
                    dropoff_pos: j,
                    service_depot: None,
                    delta,
                    visits: ins.buf.clone(),
                });
            }
        }
        if let Some((c, visits, pp, dp, sd)) = ins.best_coupled(&route.visits, r, free) {
            let delta = c - before - penalty;
            if best.as_ref().is_none_or(|b| delta < b.delta) {
                best = Some(InsertionCandidate {
                    route: Some(ri),
                    platform: route.platform,
                    pickup_pos: pp,
                    dropoff_pos: dp,
                    service_depot: Some(sd),
                    delta,
                    visits,
                });
            }
        }
    }
    if only_route.is_none() {
        if let Some(platform) = sol.free_platform(inst) {
            for depot in 0..inst.n_depots() {
                let Some(o) = sol.free_origin(inst, depot) else {
                    continue;
                };
                let visits = vec![o, p, d, l.destination_of(o)];
                if let Some(c) = ins.cost(&visits) {
                    let delta = c - penalty;
                    if best.as_ref().is_none_or(|b| delta < b.delta) {
                        best = Some(InsertionCandidate {
                            route: None,
                            platform,
                            pickup_pos: 1,
                            dropoff_pos: 2,
                            service_depot: None,
                            delta,
                            visits,
                        });
                    }
                }
            }
        }
    }
    best
}

/// Applies a candidate produced for `r` to the solution.
pub fn apply_candidate(sol: &mut Solution, r: usize, cand: InsertionCandidate) {
    match cand.route {
        Some(ri) => sol.routes[ri].visits = cand.visits,
        None => sol.routes.push(Route::new(cand.platform, cand.visits)),
    }
    sol.unserved.remove(&r);
}

/// Inserts each unserved request (shuffled) at its globally cheapest feasible
/// candidate, including candidates with one accompanying service-depot visit
/// and new routes. A request whose cheapest candidate would raise the
/// objective stays unserved.
pub fn best_insert<R: Rng + ?Sized>(inst: &Instance, mut sol: Solution, rng: &mut R) -> Solution {
    let mut requests: Vec<usize> = sol.unserved.iter().copied().collect();
    requests.shuffle(rng);
    let mut ins = Inserter::new(inst, Strictness::Strict);
    for r in requests {
        let free = free_service_depots(inst, &sol);
        if let Some(cand) = best_candidate(inst, &sol, &mut ins, &free, r, None) {
            if cand.delta <= 0.0 {
                apply_candidate(&mut sol, r, cand);
            }
        }
    }
    finish(inst, sol)
}

/// Difference in route cost from inserting, ignoring the unserved penalty.
pub fn route_delta(inst: &Instance, before: &[usize], after: &[usize]) -> f64 {
    route_cost(inst, after) - route_cost(inst, before)
}
