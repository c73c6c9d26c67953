//! Exact solver for small instances.
//!
//! Every strictly feasible route is a sequence of non-empty segments of
//! alternating module type, joined by single service-depot visits with an
//! empty module. Routes are enumerated per physical depot by a label-setting
//! search over (picked, on board, last node, module type) with Pareto labels;
//! the best route per request subset is then combined by a set-partition
//! recursion under the platform, service-depot and module limits.

use std::collections::{BTreeMap, HashMap};

use crate::instance::{Instance, RequestKind, EPS};
use crate::solution::{check_feasibility, evaluate, ObjectiveBreakdown, Route, Solution};
use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleLimits {
    pub max_requests: usize,
    pub max_platforms: usize,
}

impl Default for OracleLimits {
    fn default() -> Self {
        Self {
            max_requests: 5,
            max_platforms: 3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct OracleResult {
    pub solution: Solution,
    pub objective: ObjectiveBreakdown,
    /// Distinct (depot, request subset, resource use) routes kept.
    pub routes_enumerated: usize,
}

/// Arrival time at the last node as `max(c, t0 + t)` for a departure `t0 <= l`.
#[derive(Debug, Clone, Copy)]
struct Label {
    cost: f64,
    dist: f64,
    c: f64,
    t: f64,
    l: f64,
    node: usize,
    parent: usize,
}

impl Label {
    fn dominates(&self, o: &Label) -> bool {
        self.cost <= o.cost
            && self.dist <= o.dist
            && self.c <= o.c
            && self.t <= o.t
            && self.l >= o.l
    }

    fn duration(&self) -> f64 {
        self.t.max(self.c - self.l)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Key {
    picked: u32,
    onboard: u32,
    last: usize,
    kind: u8,
    res: Vec<u8>,
}

struct Ctx<'a> {
    inst: &'a Instance,
    track_sd: bool,
    track_mod: bool,
    n_sites: usize,
    range: f64,
}

impl Ctx<'_> {
    fn extend(&self, lab: &Label, parent: usize, j: usize) -> Option<Label> {
        let inst = self.inst;
        let i = lab.node;
        let w = inst.node(j).window;
        let dist = lab.dist + inst.dist(i, j);
        if dist > self.range + EPS {
            return None;
        }
        let tt = inst.t(i, j);
        let c = w.open.max(lab.c + tt);
        if c > w.close + EPS {
            return None;
        }
        let t = lab.t + tt;
        Some(Label {
            cost: lab.cost + inst.cost().alpha_td * inst.dist(i, j) / 1000.0,
            dist,
            c,
            t,
            l: lab.l.min(w.close - t),
            node: j,
            parent,
        })
    }

    fn kind_res(&self, res: &mut [u8], kind: RequestKind) {
        if self.track_mod {
            let at = if self.track_sd { self.n_sites } else { 0 };
            res[at + usize::from(kind == RequestKind::Freight)] += 1;
        }
    }
}

fn kind_code(k: RequestKind) -> u8 {
    match k {
        RequestKind::Passenger => 1,
        RequestKind::Freight => 2,
    }
}

/// Best routes of one depot: (picked mask, resources) -> (cost, node sequence).
fn depot_routes(
    ctx: &Ctx<'_>,
    depot: usize,
    res_len: usize,
) -> HashMap<(u32, Vec<u8>), (f64, Vec<usize>)> {
    let inst = ctx.inst;
    let l = inst.layout();
    let h = l.h_r;
    let cost = inst.cost();
    let fleet = inst.fleet();
    let origin = l.origin(depot, 0);
    let dest = l.destination_of(origin);
    let ow = inst.node(origin).window;

    let mut arena = vec![Label {
        cost: 0.0,
        dist: 0.0,
        c: ow.open,
        t: 0.0,
        l: ow.close,
        node: origin,
        parent: usize::MAX,
    }];
    let mut levels: Vec<HashMap<Key, Vec<usize>>> = vec![HashMap::new(); 2 * h + 1];
    levels[0].insert(
        Key {
            picked: 0,
            onboard: 0,
            last: origin,
            kind: 0,
            res: vec![0; res_len],
        },
        vec![0],
    );
    let mut best: HashMap<(u32, Vec<u8>), (f64, usize)> = HashMap::new();

    fn push(
        levels: &mut [HashMap<Key, Vec<usize>>],
        arena: &mut Vec<Label>,
        level: usize,
        key: Key,
        lab: Label,
    ) {
        let set = levels[level].entry(key).or_default();
        if set.iter().any(|&id| arena[id].dominates(&lab)) {
            return;
        }
        set.retain(|&id| !lab.dominates(&arena[id]));
        arena.push(lab);
        set.push(arena.len() - 1);
    }

    for level in 0..=2 * h {
        let states: Vec<(Key, Vec<usize>)> =
            std::mem::take(&mut levels[level]).into_iter().collect();
        for (key, ids) in states {
            let load: i32 = (0..h)
                .filter(|r| key.onboard & (1 << r) != 0)
                .map(|r| inst.node(l.pickup(r)).demand)
                .sum();
            for id in ids {
                let lab = arena[id];
                // Close the route.
                if key.onboard == 0 && key.picked != 0 {
                    if let Some(end) = ctx.extend(&lab, id, dest) {
                        let total = cost.alpha_ps
                            + cost.alpha_ms
                            + end.cost
                            + cost.alpha_tt * end.duration() / 3600.0;
                        arena.push(end);
                        let eid = arena.len() - 1;
                        let slot = best
                            .entry((key.picked, key.res.clone()))
                            .or_insert((f64::INFINITY, 0));
                        if total < slot.0 {
                            *slot = (total, eid);
                        }
                    }
                }
                // Deliver.
                for r in (0..h).filter(|r| key.onboard & (1 << r) != 0) {
                    if let Some(next) = ctx.extend(&lab, id, l.dropoff(r)) {
                        let k = Key {
                            onboard: key.onboard & !(1 << r),
                            last: l.dropoff(r),
                            ..key.clone()
                        };
                        push(&mut levels, &mut arena, level + 1, k, next);
                    }
                }
                // Pick up within the current segment (or open the first one).
                for r in (0..h).filter(|r| key.picked & (1 << r) == 0) {
                    let kind = inst.request_kind(r);
                    if key.kind != 0 && key.kind != kind_code(kind) {
                        continue;
                    }
                    let p = l.pickup(r);
                    if load + inst.node(p).demand > fleet.capacity(kind) as i32 {
                        continue;
                    }
                    let mut res = key.res.clone();
                    if key.kind == 0 {
                        ctx.kind_res(&mut res, kind);
                    }
                    if let Some(next) = ctx.extend(&lab, id, p) {
                        let k = Key {
                            picked: key.picked | (1 << r),
                            onboard: key.onboard | (1 << r),
                            last: p,
                            kind: kind_code(kind),
                            res,
                        };
                        push(&mut levels, &mut arena, level + 1, k, next);
                    }
                }
                // Change module at a service depot, then pick up a request of
                // the other type.
                if key.onboard == 0 && key.kind != 0 && l.is_dropoff(key.last) {
                    let other = if key.kind == 1 {
                        RequestKind::Freight
                    } else {
                        RequestKind::Passenger
                    };
                    for site in 0..ctx.n_sites {
                        let mut res = key.res.clone();
                        if ctx.track_sd {
                            if usize::from(res[site]) >= l.vartheta {
                                continue;
                            }
                            res[site] += 1;
                        }
                        ctx.kind_res(&mut res, other);
                        let sd = l.service_depot(site, 0);
                        let Some(mut at_sd) = ctx.extend(&lab, id, sd) else {
                            continue;
                        };
                        at_sd.cost += cost.alpha_ms + cost.alpha_mc;
                        arena.push(at_sd);
                        let sid = arena.len() - 1;
                        for r in (0..h).filter(|r| key.picked & (1 << r) == 0) {
                            if inst.request_kind(r) != other {
                                continue;
                            }
                            let p = l.pickup(r);
                            if inst.node(p).demand > fleet.capacity(other) as i32 {
                                continue;
                            }
                            if let Some(next) = ctx.extend(&at_sd, sid, p) {
                                let k = Key {
                                    picked: key.picked | (1 << r),
                                    onboard: 1 << r,
                                    last: p,
                                    kind: kind_code(other),
                                    res: res.clone(),
                                };
                                push(&mut levels, &mut arena, level + 1, k, next);
                            }
                        }
                    }
                }
            }
        }
    }

    best.into_iter()
        .map(|(k, (c, mut id))| {
            let mut nodes = Vec::new();
            while id != usize::MAX {
                nodes.push(arena[id].node);
                id = arena[id].parent;
            }
            nodes.reverse();
            (k, (c, nodes))
        })
        .collect()
}

/// Globally optimal solution by exhaustive search. Fails with `Error::Guard`
/// beyond the given limits.
pub fn brute_force_solve(inst: &Instance, limits: OracleLimits) -> Result<OracleResult, Error> {
    let l = *inst.layout();
    let h = l.h_r;
    if h > limits.max_requests || h > 31 {
        return Err(Error::Guard(format!(
            "{h} requests exceed the oracle limit of {}",
            limits.max_requests
        )));
    }
    if l.kappa > limits.max_platforms {
        return Err(Error::Guard(format!(
            "{} platforms exceed the oracle limit of {}",
            l.kappa, limits.max_platforms
        )));
    }
    let (mu_p, mu_f) = inst.module_supply();
    // In a strict route every segment serves a request, so a solution has at
    // most `h` segments and at most `h - 1` service-depot visits.
    let track_sd = l.n_sd > 0 && l.vartheta + 1 < h;
    let track_mod = mu_p < h || mu_f < h;
    let n_sites = l.n_sd;
    let res_len = if track_sd { n_sites } else { 0 } + if track_mod { 2 } else { 0 };
    let mut caps: Vec<usize> = Vec::new();
    if track_sd {
        caps.extend(std::iter::repeat(l.vartheta).take(n_sites));
    }
    if track_mod {
        caps.extend([mu_p, mu_f]);
    }
    let ctx = Ctx {
        inst,
        track_sd,
        track_mod,
        n_sites,
        range: inst.range_m(),
    };

    // Best option per (mask, resources) over all depots.
    let mut options: HashMap<(u32, Vec<u8>), (f64, usize, Vec<usize>)> = HashMap::new();
    for depot in 0..l.n_depots {
        for (key, (c, nodes)) in depot_routes(&ctx, depot, res_len) {
            let slot = options.entry(key).or_insert((f64::INFINITY, 0, Vec::new()));
            if c < slot.0 {
                *slot = (c, depot, nodes);
            }
        }
    }
    let routes_enumerated = options.len();
    let mut by_low: Vec<Vec<(u32, &Vec<u8>, f64)>> = vec![Vec::new(); h];
    for ((mask, res), (c, _, _)) in &options {
        by_low[mask.trailing_zeros() as usize].push((*mask, res, *c));
    }
    for list in &mut by_low {
        list.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(b.1)));
    }

    // Decide requests in index order: unserved, or the lowest request of a new route.
    type State = (u32, usize, Vec<u8>);
    let full: u32 = if h == 0 { 0 } else { (1u32 << h) - 1 };
    let alpha_ud = inst.cost().alpha_ud;
    let mut open: BTreeMap<State, (f64, Option<(State, u32, Vec<u8>)>)> = BTreeMap::new();
    let mut seen: HashMap<State, (f64, Option<(State, u32, Vec<u8>)>)> = HashMap::new();
    open.insert((0, 0, vec![0; res_len]), (0.0, None));
    let mut best_final: Option<(f64, State)> = None;
    // Successors decide a strict superset of requests, so states leave the
    // queue in increasing mask order with their final cost.
    while let Some((state, (cost, back))) = open.pop_first() {
        seen.insert(state.clone(), (cost, back));
        let (decided, routes, res) = state.clone();
        if decided == full {
            if best_final.as_ref().map_or(true, |(c, _)| cost < *c - 1e-9) {
                best_final = Some((cost, state));
            }
            continue;
        }
        let low = (!decided).trailing_zeros() as usize;
        let mut relax = |s: State, c: f64, via: (State, u32, Vec<u8>)| {
            let e = open.entry(s).or_insert((f64::INFINITY, None));
            if c < e.0 {
                *e = (c, Some(via));
            }
        };
        relax(
            (decided | (1 << low), routes, res.clone()),
            cost + alpha_ud,
            (state.clone(), 0, Vec::new()),
        );
        if routes < l.kappa {
            for &(mask, ores, oc) in &by_low[low] {
                if mask & decided != 0 {
                    continue;
                }
                let sum: Vec<u8> = res.iter().zip(ores).map(|(a, b)| a + b).collect();
                if sum.iter().zip(&caps).any(|(&s, &cap)| usize::from(s) > cap) {
                    continue;
                }
                relax(
                    (decided | mask, routes + 1, sum),
                    cost + oc,
                    (state.clone(), mask, ores.clone()),
                );
            }
        }
    }
    let (_, mut state) = best_final.expect("the all-unserved solution is always reachable");

    // Rebuild the chosen routes.
    let mut chosen = Vec::new();
    while let Some((_, Some((prev, mask, ores)))) = seen.get(&state).cloned() {
        if mask != 0 {
            chosen.push(options[&(mask, ores)].clone());
        }
        state = prev;
    }
    chosen.sort_by(|a, b| a.2.cmp(&b.2));
    let mut used_origins = vec![0usize; l.n_depots];
    let mut used_sd = vec![0usize; l.n_sd];
    let mut routes = Vec::new();
    for (n, (_, depot, nodes)) in chosen.into_iter().enumerate() {
        let origin = l.origin(depot, used_origins[depot]);
        used_origins[depot] += 1;
        let visits: Vec<usize> = nodes
            .into_iter()
            .map(|v| {
                if l.is_origin(v) {
                    origin
                } else if l.is_destination(v) {
                    l.destination_of(origin)
                } else if let Some(site) = l.site_of(v) {
                    used_sd[site] += 1;
                    l.service_depot(site, used_sd[site] - 1)
                } else {
                    v
                }
            })
            .collect();
        routes.push(Route::new(n + 1, visits));
    }
    let served: std::collections::BTreeSet<usize> = routes
        .iter()
        .flat_map(|r| {
            r.visits.iter().filter_map(|&v| {
                if l.is_pickup(v) {
                    l.request_of(v)
                } else {
                    None
                }
            })
        })
        .collect();
    let solution = Solution {
        routes,
        unserved: (0..h).filter(|r| !served.contains(r)).collect(),
    };
    let report = check_feasibility(inst, &solution);
    if !report.is_feasible() {
        return Err(Error::Infeasible(report));
    }
    Ok(OracleResult {
        objective: evaluate(inst, &solution),
        solution,
        routes_enumerated,
    })
}
