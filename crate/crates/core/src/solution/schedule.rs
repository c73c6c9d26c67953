//! Arrival times and load profiles along a single route.

use thiserror::Error;

use crate::instance::{Instance, NodeClass, RequestKind, EPS};

#[derive(Debug, Clone, PartialEq, Error)]
#[error("time window closes at {close} s but node {node} (position {position}) is reached at {arrival} s")]
pub struct TimeViolation {
    pub position: usize,
    pub node: usize,
    pub arrival: f64,
    pub close: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LoadViolation {
    #[error("{kind} module over capacity at node {node} (load {load} > {capacity})")]
    Capacity {
        position: usize,
        node: usize,
        kind: RequestKind,
        load: i32,
        capacity: u32,
    },
    #[error("negative load {load} at node {node}")]
    Negative {
        position: usize,
        node: usize,
        load: i32,
    },
}

/// Arrival time per visit position plus the resulting trip duration.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pub arrivals: Vec<f64>,
    pub duration: f64,
}

impl Schedule {
    pub fn departure(&self) -> f64 {
        self.arrivals[0]
    }
}

/// Earliest arrival at the last visit when leaving the first one at its window opening.
/// Windows are not enforced here.
#[inline]
pub(crate) fn earliest_end(inst: &Instance, visits: &[usize]) -> f64 {
    let mut time = inst.node(visits[0]).window.open;
    for w in visits.windows(2) {
        time = inst.node(w[1]).window.open.max(time + inst.t(w[0], w[1]));
    }
    time
}

/// Latest departure from the first visit that still reaches the last visit by `end`,
/// clamped to the first window opening.
#[inline]
pub(crate) fn latest_start(inst: &Instance, visits: &[usize], end: f64) -> f64 {
    let mut latest = end;
    for pos in (0..visits.len() - 1).rev() {
        let node = visits[pos];
        latest = inst
            .node(node)
            .window
            .close
            .min(latest - inst.t(node, visits[pos + 1]));
    }
    latest.max(inst.node(visits[0]).window.open)
}

/// Minimum trip duration for a fixed visit order (windows not enforced).
pub(crate) fn min_duration(inst: &Instance, visits: &[usize]) -> f64 {
    if visits.len() < 2 {
        return 0.0;
    }
    let end = earliest_end(inst, visits);
    end - latest_start(inst, visits, end)
}

/// Computes arrival times for a route: an earliest-time forward pass, then the
/// departure is postponed as far as possible without delaying the return, which
/// yields the minimum trip duration for this visit order.
pub fn compute_schedule(inst: &Instance, visits: &[usize]) -> Result<Schedule, TimeViolation> {
    if visits.is_empty() {
        return Ok(Schedule {
            arrivals: vec![],
            duration: 0.0,
        });
    }
    let mut time = inst.node(visits[0]).window.open;
    for (pos, w) in visits.windows(2).enumerate() {
        let node = inst.node(w[1]);
        time = node.window.open.max(time + inst.t(w[0], w[1]));
        if time > node.window.close + EPS {
            return Err(TimeViolation {
                position: pos + 1,
                node: w[1],
                arrival: time,
                close: node.window.close,
            });
        }
    }
    let end = time;
    let start = latest_start(inst, visits, end);
    let mut arrivals = Vec::with_capacity(visits.len());
    let mut time = start;
    arrivals.push(time);
    for w in visits.windows(2) {
        time = inst.node(w[1]).window.open.max(time + inst.t(w[0], w[1]));
        arrivals.push(time);
    }
    Ok(Schedule {
        arrivals,
        duration: end - start,
    })
}

/// Load on board after service at each visit. The load resets to zero at
/// depots and service depots.
pub fn compute_loads(inst: &Instance, visits: &[usize]) -> Result<Vec<i32>, LoadViolation> {
    let mut loads = Vec::with_capacity(visits.len());
    let mut load = 0i32;
    let mut active: Option<RequestKind> = None;
    for (position, &node) in visits.iter().enumerate() {
        let data = inst.node(node);
        match data.class {
            NodeClass::DepotOrigin | NodeClass::ServiceDepot => {
                load = 0;
                active = None;
            }
            NodeClass::DepotDestination => {}
            class => {
                let kind = class.kind().expect("request node has a kind");
                let kind = *active.get_or_insert(kind);
                load += data.demand;
                if load < 0 {
                    return Err(LoadViolation::Negative {
                        position,
                        node,
                        load,
                    });
                }
                let capacity = inst.fleet().capacity(kind);
                if load > capacity as i32 {
                    return Err(LoadViolation::Capacity {
                        position,
                        node,
                        kind,
                        load,
                        capacity,
                    });
                }
            }
        }
        loads.push(load);
    }
    Ok(loads)
}
