use crate::instance::{Instance, NodeClass, RequestKind, EPS};

use super::schedule::latest_start;

/// How service-depot placement is judged.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strictness {
    /// Every constraint of the model, including the ban on service depots directly
    /// after the origin, directly before the destination, or back to back.
    Strict,
    /// Intermediate repair state: redundant service depots are tolerated (empty
    /// segments take whichever module type alternation asks for).
    Relaxed,
}

/// Cost-relevant figures of one feasible route.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RouteStats {
    /// Metres.
    pub distance: f64,
    /// Seconds.
    pub duration: f64,
    pub service_depots: usize,
    pub passenger_segments: usize,
    pub freight_segments: usize,
    pub requests: usize,
}

impl RouteStats {
    /// Contribution of this route to the objective (platform, modules, distance,
    /// time and module changes).
    pub fn cost(&self, inst: &Instance) -> f64 {
        let c = inst.cost();
        c.alpha_ps
            + c.alpha_ms * (1 + self.service_depots) as f64
            + c.alpha_td * (self.distance / 1000.0)
            + c.alpha_tt * (self.duration / 3600.0)
            + c.alpha_mc * self.service_depots as f64
    }
}

/// Single-pass route feasibility check with reusable scratch space. Used on the
/// hot path of the operators; the diagnostic checker lives in `feasibility`.
#[derive(Debug, Clone)]
pub struct RouteEvaluator {
    seen: Vec<u32>,
    segment_of: Vec<u32>,
    stamp: u32,
}

impl RouteEvaluator {
    pub fn new(inst: &Instance) -> Self {
        Self {
            seen: vec![0; inst.n_nodes() + 1],
            segment_of: vec![0; inst.n_nodes() + 1],
            stamp: 0,
        }
    }

    fn next_stamp(&mut self) -> u32 {
        self.stamp = self.stamp.wrapping_add(1);
        if self.stamp == 0 {
            self.seen.iter_mut().for_each(|s| *s = 0);
            self.stamp = 1;
        }
        self.stamp
    }

    /// Returns the route figures if the route is feasible on its own (windows,
    /// capacity, range, pairing, module typing), `None` otherwise.
    pub fn evaluate(
        &mut self,
        inst: &Instance,
        visits: &[usize],
        mode: Strictness,
    ) -> Option<RouteStats> {
        let l = inst.layout();
        let n = visits.len();
        if n < 2 {
            return None;
        }
        let origin = visits[0];
        if !l.is_origin(origin) || visits[n - 1] != l.destination_of(origin) {
            return None;
        }
        if mode == Strictness::Strict && n == 2 {
            return None;
        }
        let stamp = self.next_stamp();
        let strict = mode == Strictness::Strict;

        let mut time = inst.node(origin).window.open;
        let mut distance = 0.0;
        let mut load = 0i32;
        let mut segment = 0u32;
        let mut seg_kind: Option<RequestKind> = None;
        let mut last_filled: Option<(u32, RequestKind)> = None;
        let mut service_depots = 0;
        let mut counts = [0usize; 2];
        let mut open_requests = 0usize;
        let mut requests = 0;

        for pos in 1..n {
            let prev = visits[pos - 1];
            let node = visits[pos];
            let data = inst.node(node);
            distance += inst.dist(prev, node);
            time = data.window.open.max(time + inst.t(prev, node));
            if time > data.window.close + EPS {
                return None;
            }
            match data.class {
                NodeClass::PickupPassenger | NodeClass::PickupFreight => {
                    let kind = data.class.kind().unwrap();
                    if self.seen[node] == stamp {
                        return None;
                    }
                    self.seen[node] = stamp;
                    match seg_kind {
                        Some(k) if k != kind => return None,
                        Some(_) => {}
                        None => {
                            if let Some((idx, k0)) = last_filled {
                                if ((segment - idx) % 2 == 0) != (k0 == kind) {
                                    return None;
                                }
                            }
                            seg_kind = Some(kind);
                        }
                    }
                    load += data.demand;
                    if load > inst.fleet().capacity(kind) as i32 {
                        return None;
                    }
                    self.segment_of[node] = segment;
                    open_requests += 1;
                    requests += 1;
                }
                NodeClass::DropoffPassenger | NodeClass::DropoffFreight => {
                    let pickup = node - l.h_r;
                    if self.seen[node] == stamp
                        || self.seen[pickup] != stamp
                        || self.segment_of[pickup] != segment
                    {
                        return None;
                    }
                    self.seen[node] = stamp;
                    load += data.demand;
                    open_requests -= 1;
                }
                NodeClass::ServiceDepot => {
                    if self.seen[node] == stamp || load != 0 {
                        return None;
                    }
                    self.seen[node] = stamp;
                    if strict {
                        let next = visits[pos + 1];
                        if l.is_origin(prev)
                            || l.is_service_depot(prev)
                            || l.is_service_depot(next)
                            || l.is_destination(next)
                        {
                            return None;
                        }
                    }
                    if let Some(k) = seg_kind {
                        last_filled = Some((segment, k));
                        counts[k as usize] += 1;
                    }
                    segment += 1;
                    seg_kind = None;
                    service_depots += 1;
                }
                NodeClass::DepotDestination => {
                    if pos != n - 1 {
                        return None;
                    }
                }
                NodeClass::DepotOrigin => return None,
            }
        }
        if open_requests != 0 || distance > inst.range_m() + EPS {
            return None;
        }
        if let Some(k) = seg_kind {
            counts[k as usize] += 1;
        }
        let start = latest_start(inst, visits, time);
        Some(RouteStats {
            distance,
            duration: time - start,
            service_depots,
            passenger_segments: counts[RequestKind::Passenger as usize],
            freight_segments: counts[RequestKind::Freight as usize],
            requests,
        })
    }

    pub fn is_feasible(&mut self, inst: &Instance, visits: &[usize], mode: Strictness) -> bool {
        self.evaluate(inst, visits, mode).is_some()
    }
}
