//! Candidate solutions, objective evaluation and feasibility checking.

mod eval;
mod feasibility;
mod schedule;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::instance::{Instance, RequestKind};

pub use eval::{RouteEvaluator, RouteStats, Strictness};
pub use feasibility::{check_feasibility, ConstraintId, FeasibilityReport, Violation};
pub use schedule::{compute_loads, compute_schedule, LoadViolation, Schedule, TimeViolation};

pub(crate) use schedule::min_duration;

/// One platform tour: origin depot, request and service-depot visits, paired destination.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Route {
    /// Platform id in `1..=kappa`.
    pub platform: usize,
    pub visits: Vec<usize>,
}

/// Maximal run of visits between depot / service-depot boundaries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    /// Visit positions `start..end` inside the route (boundaries excluded).
    pub start: usize,
    pub end: usize,
    /// Module type; `None` for an empty segment.
    pub kind: Option<RequestKind>,
}

impl Route {
    pub fn new(platform: usize, visits: Vec<usize>) -> Self {
        Self { platform, visits }
    }

    pub fn origin(&self) -> usize {
        self.visits[0]
    }

    pub fn service_depot_visits(&self, inst: &Instance) -> usize {
        let l = inst.layout();
        self.visits
            .iter()
            .filter(|&&v| l.is_service_depot(v))
            .count()
    }

    /// Requests whose pickup is on this route.
    pub fn requests<'a>(&'a self, inst: &'a Instance) -> impl Iterator<Item = usize> + 'a {
        let l = *inst.layout();
        self.visits
            .iter()
            .filter(move |&&v| l.is_pickup(v))
            .map(move |&v| v - l.h_d - 1)
    }

    pub fn n_requests(&self, inst: &Instance) -> usize {
        self.requests(inst).count()
    }

    /// Segments split at service-depot visits. The kind of a segment is the kind of
    /// its first request node.
    pub fn segments(&self, inst: &Instance) -> Vec<Segment> {
        let l = inst.layout();
        let mut out = Vec::new();
        if self.visits.len() < 2 {
            return out;
        }
        let last = self.visits.len() - 1;
        let mut start = 1;
        let mut kind = None;
        for pos in 1..last {
            let v = self.visits[pos];
            if l.is_service_depot(v) {
                out.push(Segment {
                    start,
                    end: pos,
                    kind,
                });
                start = pos + 1;
                kind = None;
            } else if kind.is_none() {
                kind = inst.node(v).class.kind();
            }
        }
        out.push(Segment {
            start,
            end: last,
            kind,
        });
        out
    }

    /// Segment kinds with empty segments filled in by alternation where possible.
    pub fn segment_kinds(&self, inst: &Instance) -> Vec<Option<RequestKind>> {
        let segs = self.segments(inst);
        let mut kinds: Vec<Option<RequestKind>> = segs.iter().map(|s| s.kind).collect();
        if let Some(anchor) = kinds.iter().position(Option::is_some) {
            let k0 = kinds[anchor].unwrap();
            for (i, slot) in kinds.iter_mut().enumerate() {
                if slot.is_none() {
                    let parity = (i as isize - anchor as isize).rem_euclid(2) == 0;
                    *slot = Some(if parity { k0 } else { k0.other() });
                }
            }
        }
        kinds
    }
}

/// A set of platform routes plus the unserved requests.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Solution {
    pub routes: Vec<Route>,
    pub unserved: BTreeSet<usize>,
}

impl Solution {
    /// Every request unserved, no routes.
    pub fn empty(inst: &Instance) -> Self {
        Self {
            routes: Vec::new(),
            unserved: (0..inst.n_requests()).collect(),
        }
    }

    pub fn served_count(&self, inst: &Instance) -> usize {
        self.routes.iter().map(|r| r.n_requests(inst)).sum()
    }

    /// Route index serving request `r`, if any.
    pub fn route_of(&self, inst: &Instance, r: usize) -> Option<usize> {
        let p = inst.layout().pickup(r);
        self.routes
            .iter()
            .position(|route| route.visits.contains(&p))
    }

    /// Lowest platform id not used by any route.
    pub fn free_platform(&self, inst: &Instance) -> Option<usize> {
        (1..=inst.fleet().kappa).find(|k| self.routes.iter().all(|r| r.platform != *k))
    }

    /// Origin duplicates of physical depot `depot` that no route uses.
    pub fn free_origin(&self, inst: &Instance, depot: usize) -> Option<usize> {
        inst.layout()
            .depot_group(depot)
            .find(|o| self.routes.iter().all(|r| r.origin() != *o))
    }

    /// Unused duplicate of physical service depot `site`.
    pub fn free_service_depot(&self, inst: &Instance, site: usize) -> Option<usize> {
        let l = inst.layout();
        (0..l.vartheta)
            .map(|d| l.service_depot(site, d))
            .find(|node| self.routes.iter().all(|r| !r.visits.contains(node)))
    }

    /// Sorts routes by platform id so that equal solutions serialize identically.
    pub fn normalize(&mut self) {
        self.routes.sort_by_key(|r| r.platform);
    }

    pub fn to_file(&self, inst: &Instance) -> SolutionFile {
        SolutionFile {
            routes: self
                .routes
                .iter()
                .map(|r| {
                    let kinds = r.segment_kinds(inst);
                    RouteFile {
                        platform: r.platform,
                        visits: r.visits.clone(),
                        segments: r
                            .segments(inst)
                            .iter()
                            .zip(kinds)
                            .map(|(s, kind)| SegmentFile {
                                module_type: kind,
                                visits: r.visits[s.start..s.end].to_vec(),
                            })
                            .collect(),
                    }
                })
                .collect(),
            unserved: self.unserved.iter().copied().collect(),
        }
    }

    pub fn to_json(&self, inst: &Instance) -> String {
        serde_json::to_string_pretty(&self.to_file(inst)).expect("solution serializes")
    }

    /// Parses a solution file. Node and request ids are validated against the
    /// instance; segments are informational and re-derived from the visits.
    pub fn from_json(inst: &Instance, text: &str) -> Result<Self, crate::Error> {
        let file: SolutionFile = serde_json::from_str(text)?;
        Self::from_file(inst, file)
    }

    pub fn from_file(inst: &Instance, file: SolutionFile) -> Result<Self, crate::Error> {
        let n = inst.n_nodes();
        let mut routes = Vec::with_capacity(file.routes.len());
        for (idx, r) in file.routes.into_iter().enumerate() {
            if let Some(bad) = r.visits.iter().find(|&&v| v == 0 || v > n) {
                return Err(crate::Error::Schema(format!(
                    "route {idx}: unknown node id {bad} (instance has nodes 1..={n})"
                )));
            }
            if r.visits.is_empty() {
                return Err(crate::Error::Schema(format!("route {idx} has no visits")));
            }
            routes.push(Route::new(r.platform, r.visits));
        }
        if let Some(bad) = file.unserved.iter().find(|&&u| u >= inst.n_requests()) {
            return Err(crate::Error::Schema(format!("unknown request id {bad}")));
        }
        Ok(Self {
            routes,
            unserved: file.unserved.into_iter().collect(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentFile {
    pub module_type: Option<RequestKind>,
    pub visits: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouteFile {
    pub platform: usize,
    pub visits: Vec<usize>,
    #[serde(default)]
    pub segments: Vec<SegmentFile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionFile {
    pub routes: Vec<RouteFile>,
    #[serde(default)]
    pub unserved: Vec<usize>,
}

/// The six objective terms and their weighted total.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveBreakdown {
    /// Platforms used.
    pub b1: usize,
    /// Modules used.
    pub b2: usize,
    /// Total distance in metres.
    pub b3: f64,
    /// Total trip duration in seconds.
    pub b4: f64,
    /// Module changes (service-depot visits).
    pub b5: usize,
    /// Unserved requests.
    pub b6: usize,
    /// EUR.
    pub total: f64,
}

impl ObjectiveBreakdown {
    pub fn from_terms(
        inst: &Instance,
        b1: usize,
        b2: usize,
        b3: f64,
        b4: f64,
        b5: usize,
        b6: usize,
    ) -> Self {
        let c = inst.cost();
        let total = c.alpha_ps * b1 as f64
            + c.alpha_ms * b2 as f64
            + c.alpha_td * (b3 / 1000.0)
            + c.alpha_tt * (b4 / 3600.0)
            + c.alpha_mc * b5 as f64
            + c.alpha_ud * b6 as f64;
        Self {
            b1,
            b2,
            b3,
            b4,
            b5,
            b6,
            total,
        }
    }

    /// Module changes per platform.
    pub fn changes_per_platform(&self) -> f64 {
        if self.b1 == 0 {
            0.0
        } else {
            self.b5 as f64 / self.b1 as f64
        }
    }
}

/// Objective of a solution. Total over any structurally readable solution;
/// window violations do not stop the computation.
pub fn evaluate(inst: &Instance, sol: &Solution) -> ObjectiveBreakdown {
    let l = inst.layout();
    let mut b2 = 0;
    let mut b3 = 0.0;
    let mut b4 = 0.0;
    let mut b5 = 0;
    let mut served = BTreeSet::new();
    for route in &sol.routes {
        let sd = route.service_depot_visits(inst);
        b2 += 1 + sd;
        b5 += sd;
        for w in route.visits.windows(2) {
            b3 += inst.dist(w[0], w[1]);
        }
        b4 += min_duration(inst, &route.visits);
        served.extend(route.visits.iter().filter(|&&v| l.is_pickup(v)).copied());
    }
    ObjectiveBreakdown::from_terms(
        inst,
        sol.routes.len(),
        b2,
        b3,
        b4,
        b5,
        inst.n_requests() - served.len().min(inst.n_requests()),
    )
}

/// Cost of a single route (platform, modules, distance, duration, changes)
/// without any feasibility check. Agrees bit-exactly with `RouteStats::cost`.
pub fn route_cost(inst: &Instance, visits: &[usize]) -> f64 {
    if visits.len() < 2 {
        return 0.0;
    }
    let l = inst.layout();
    let mut distance = 0.0;
    for w in visits.windows(2) {
        distance += inst.dist(w[0], w[1]);
    }
    RouteStats {
        distance,
        duration: min_duration(inst, visits),
        service_depots: visits.iter().filter(|&&v| l.is_service_depot(v)).count(),
        passenger_segments: 0,
        freight_segments: 0,
        requests: 0,
    }
    .cost(inst)
}

/// Time spent driving or servicing with nothing on board, per solution.
pub fn empty_time(inst: &Instance, sol: &Solution) -> f64 {
    let mut total = 0.0;
    for route in &sol.routes {
        let Ok(loads) = compute_loads(inst, &route.visits) else {
            continue;
        };
        for (pos, w) in route.visits.windows(2).enumerate() {
            if loads[pos] == 0 {
                total += inst.t(w[0], w[1]);
            }
        }
    }
    total
}
