use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::instance::{Instance, RequestKind, EPS};

use super::schedule::{compute_loads, compute_schedule, LoadViolation};
use super::{Route, Solution};

/// Constraint families of the routing model. Where the constraint comes from a
/// numbered model row, `equation()` returns that number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstraintId {
    VisitOnce,
    ModuleType,
    SameModule,
    Flow,
    ModuleAlternation,
    StartAtOrigin,
    EndAtDestination,
    Precedence,
    TimeWindow,
    Range,
    Capacity,
    LoadConservation,
    DepotGroup,
    ConsecutiveServiceDepots,
    OriginToServiceDepot,
    ServiceDepotToDestination,
    /// A platform leaving its depot only to return immediately.
    EmptyRoute,
    /// Aggregate passenger / freight module supply.
    ModuleSupply,
    /// Every request must be either on a route or listed as unserved, not both.
    Coverage,
    /// Node id outside the instance.
    UnknownNode,
}

impl ConstraintId {
    pub fn equation(self) -> Option<u32> {
        use ConstraintId::*;
        Some(match self {
            VisitOnce => 8,
            ModuleType => 10,
            SameModule => 12,
            Flow => 14,
            ModuleAlternation => 17,
            StartAtOrigin => 19,
            EndAtDestination => 20,
            Precedence => 22,
            TimeWindow => 24,
            Range => 25,
            Capacity => 26,
            LoadConservation => 28,
            DepotGroup => 31,
            ConsecutiveServiceDepots => 40,
            OriginToServiceDepot => 42,
            ServiceDepotToDestination => 43,
            EmptyRoute | ModuleSupply | Coverage | UnknownNode => return None,
        })
    }

    pub fn name(self) -> &'static str {
        use ConstraintId::*;
        match self {
            VisitOnce => "visit-once",
            ModuleType => "module type",
            SameModule => "same module",
            Flow => "flow",
            ModuleAlternation => "module alternation",
            StartAtOrigin => "start at origin",
            EndAtDestination => "end at destination",
            Precedence => "precedence",
            TimeWindow => "time window",
            Range => "range",
            Capacity => "capacity",
            LoadConservation => "load conservation",
            DepotGroup => "depot group",
            ConsecutiveServiceDepots => "consecutive service depots",
            OriginToServiceDepot => "origin to service depot",
            ServiceDepotToDestination => "service depot to destination",
            EmptyRoute => "empty route",
            ModuleSupply => "module supply",
            Coverage => "coverage",
            UnknownNode => "unknown node",
        }
    }

    /// Short label: `c<eq>` for numbered rows, the name otherwise.
    pub fn label(self) -> String {
        match self.equation() {
            Some(eq) => format!("c{eq}"),
            None => self.name().replace(' ', "-"),
        }
    }
}

impl fmt::Display for ConstraintId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.label(), self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub constraint: ConstraintId,
    /// Index into `Solution::routes`.
    pub route: Option<usize>,
    pub node: Option<usize>,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.constraint)?;
        if let Some(r) = self.route {
            write!(f, " route {r}")?;
        }
        if let Some(n) = self.node {
            write!(f, " node {n}")?;
        }
        write!(f, ": {}", self.detail)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct FeasibilityReport {
    pub violations: Vec<Violation>,
}

impl FeasibilityReport {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn contains(&self, id: ConstraintId) -> bool {
        self.violations.iter().any(|v| v.constraint == id)
    }

    pub fn constraints(&self) -> BTreeSet<ConstraintId> {
        self.violations.iter().map(|v| v.constraint).collect()
    }

    fn push(
        &mut self,
        constraint: ConstraintId,
        route: Option<usize>,
        node: Option<usize>,
        detail: impl Into<String>,
    ) {
        self.violations.push(Violation {
            constraint,
            route,
            node,
            detail: detail.into(),
        });
    }
}

impl fmt::Display for FeasibilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return f.write_str("feasible");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Full diagnostic check of a solution. Collects every violation instead of
/// stopping at the first one.
pub fn check_feasibility(inst: &Instance, sol: &Solution) -> FeasibilityReport {
    let mut rep = FeasibilityReport::default();
    let l = *inst.layout();
    let n = inst.n_nodes();

    let mut seen = vec![0usize; n + 1];
    let mut platforms = BTreeSet::new();
    let mut unknown = false;
    for (ri, route) in sol.routes.iter().enumerate() {
        if route.platform == 0 || route.platform > l.kappa {
            rep.push(
                ConstraintId::DepotGroup,
                Some(ri),
                None,
                format!("platform id {} outside 1..={}", route.platform, l.kappa),
            );
        } else if !platforms.insert(route.platform) {
            rep.push(
                ConstraintId::DepotGroup,
                Some(ri),
                None,
                format!("platform {} departs more than once", route.platform),
            );
        }
        for &v in &route.visits {
            if v == 0 || v > n {
                rep.push(
                    ConstraintId::UnknownNode,
                    Some(ri),
                    Some(v),
                    format!("instance has nodes 1..={n}"),
                );
                unknown = true;
            } else {
                seen[v] += 1;
                if seen[v] == 2 {
                    rep.push(
                        ConstraintId::VisitOnce,
                        Some(ri),
                        Some(v),
                        "node visited more than once",
                    );
                }
            }
        }
    }
    if unknown {
        return rep;
    }

    for r in 0..inst.n_requests() {
        let served = seen[l.pickup(r)] > 0;
        let listed = sol.unserved.contains(&r);
        if served == listed {
            rep.push(
                ConstraintId::Coverage,
                None,
                Some(l.pickup(r)),
                if served {
                    format!("request {r} is served and listed as unserved")
                } else {
                    format!("request {r} is neither served nor listed as unserved")
                },
            );
        }
    }
    if let Some(&bad) = sol.unserved.iter().find(|&&u| u >= inst.n_requests()) {
        rep.push(
            ConstraintId::Coverage,
            None,
            None,
            format!("unknown request id {bad} in unserved list"),
        );
    }

    let mut modules = [0usize; 2];
    for (ri, route) in sol.routes.iter().enumerate() {
        check_route(inst, ri, route, &mut rep, &mut modules);
    }

    let (mu_p, mu_f) = inst.module_supply();
    for (kind, used, cap) in [
        (RequestKind::Passenger, modules[0], mu_p),
        (RequestKind::Freight, modules[1], mu_f),
    ] {
        if used > cap {
            rep.push(
                ConstraintId::ModuleSupply,
                None,
                None,
                format!("{used} {kind} modules used, {cap} available"),
            );
        }
    }
    rep
}

fn check_route(
    inst: &Instance,
    ri: usize,
    route: &Route,
    rep: &mut FeasibilityReport,
    modules: &mut [usize; 2],
) {
    let l = *inst.layout();
    let v = &route.visits;
    let r = Some(ri);
    if v.len() < 2 {
        rep.push(
            ConstraintId::StartAtOrigin,
            r,
            None,
            "route has fewer than two visits",
        );
        return;
    }
    let first = v[0];
    let last = v[v.len() - 1];
    let mut structural = true;
    if !l.is_origin(first) {
        rep.push(
            ConstraintId::StartAtOrigin,
            r,
            Some(first),
            "route does not start at an origin depot",
        );
        structural = false;
    } else if last != l.destination_of(first) {
        rep.push(
            ConstraintId::EndAtDestination,
            r,
            Some(last),
            format!("route must end at destination {}", l.destination_of(first)),
        );
        structural = false;
    }
    if v.len() == 2 && structural {
        rep.push(
            ConstraintId::EmptyRoute,
            r,
            Some(first),
            "route serves no request",
        );
    }
    for (pos, &node) in v.iter().enumerate().skip(1).take(v.len().saturating_sub(2)) {
        if l.is_origin(node) || l.is_destination(node) {
            rep.push(
                ConstraintId::Flow,
                r,
                Some(node),
                format!("depot node at interior position {pos}"),
            );
            structural = false;
        }
    }

    // Adjacency rules for service depots.
    for w in v.windows(2) {
        let (a, b) = (w[0], w[1]);
        if l.is_service_depot(b) && l.is_origin(a) {
            rep.push(
                ConstraintId::OriginToServiceDepot,
                r,
                Some(b),
                "service depot directly after the origin",
            );
        }
        if l.is_service_depot(a) && l.is_destination(b) {
            rep.push(
                ConstraintId::ServiceDepotToDestination,
                r,
                Some(a),
                "service depot directly before the destination",
            );
        }
        if l.is_service_depot(a) && l.is_service_depot(b) {
            rep.push(
                ConstraintId::ConsecutiveServiceDepots,
                r,
                Some(b),
                "two service depots in a row",
            );
        }
    }

    // Pairing, precedence and segment membership.
    let mut pos_of = std::collections::HashMap::new();
    let mut segment_of = Vec::with_capacity(v.len());
    let mut seg = 0usize;
    for (pos, &node) in v.iter().enumerate() {
        if l.is_service_depot(node) {
            seg += 1;
        }
        segment_of.push(seg);
        pos_of.entry(node).or_insert(pos);
    }
    for (pos, &node) in v.iter().enumerate() {
        if l.is_pickup(node) {
            let d = node + l.h_r;
            match pos_of.get(&d) {
                None => rep.push(
                    ConstraintId::SameModule,
                    r,
                    Some(node),
                    format!("drop-off {d} is not on the same route"),
                ),
                Some(&dp) => {
                    if dp < pos {
                        rep.push(
                            ConstraintId::Precedence,
                            r,
                            Some(d),
                            format!("drop-off {d} visited before pickup {node}"),
                        );
                    } else if segment_of[dp] != segment_of[pos] {
                        rep.push(
                            ConstraintId::SameModule,
                            r,
                            Some(node),
                            format!(
                                "pickup {node} and drop-off {d} are served by different modules"
                            ),
                        );
                    }
                }
            }
        } else if l.is_dropoff(node) && !pos_of.contains_key(&(node - l.h_r)) {
            rep.push(
                ConstraintId::SameModule,
                r,
                Some(node),
                format!("pickup {} is not on the same route", node - l.h_r),
            );
        }
    }

    // Module typing and alternation.
    let segments = route.segments(inst);
    for s in &segments {
        if let Some(kind) = s.kind {
            modules[kind as usize] += 1;
            for &node in &v[s.start..s.end] {
                if let Some(k) = inst.node(node).class.kind() {
                    if k != kind {
                        rep.push(
                            ConstraintId::ModuleType,
                            r,
                            Some(node),
                            format!("{k} node on a {kind} module"),
                        );
                    }
                }
            }
        }
    }
    for pair in segments.windows(2) {
        if let (Some(a), Some(b)) = (pair[0].kind, pair[1].kind) {
            if a == b {
                rep.push(
                    ConstraintId::ModuleAlternation,
                    r,
                    Some(v[pair[0].end]),
                    format!("{a} module followed by another {b} module"),
                );
            }
        }
    }

    if !structural {
        return;
    }

    let mut distance = 0.0;
    for w in v.windows(2) {
        distance += inst.dist(w[0], w[1]);
    }
    if distance > inst.range_m() + EPS {
        rep.push(
            ConstraintId::Range,
            r,
            None,
            format!("{:.1} m driven, range is {:.1} m", distance, inst.range_m()),
        );
    }
    if let Err(e) = compute_schedule(inst, v) {
        rep.push(ConstraintId::TimeWindow, r, Some(e.node), e.to_string());
    }
    match compute_loads(inst, v) {
        Ok(_) => {}
        Err(e @ LoadViolation::Capacity { node, .. }) => {
            rep.push(ConstraintId::Capacity, r, Some(node), e.to_string())
        }
        Err(e @ LoadViolation::Negative { node, .. }) => {
            rep.push(ConstraintId::LoadConservation, r, Some(node), e.to_string())
        }
    }
}
