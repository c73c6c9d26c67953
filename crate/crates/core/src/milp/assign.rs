use crate::instance::{Instance, RequestKind};
use crate::solution::Solution;

use super::model::MilpModel;

/// Variable values describing `sol`. Continuous values are the smallest ones
/// consistent with the visit order (earliest arrivals, running loads clamped
/// at zero), so if these violate a row no other completion of the same arcs
/// satisfies it.
pub fn assignment(inst: &Instance, model: &MilpModel, sol: &Solution) -> Vec<f64> {
    let l = inst.layout();
    let ix = &model.index;
    let mut v = vec![0.0; ix.count()];

    for i in l.all() {
        for k in 1..=ix.kappa {
            // Unused depot pairs contribute zero trip time.
            v[ix.s(i, k)] = if l.is_destination(i) {
                inst.node(l.origin_of(i)).window.close
            } else if l.is_origin(i) {
                inst.node(i).window.close
            } else {
                inst.node(i).window.open
            };
        }
    }

    let mut next_p = 1;
    let mut next_f = ix.mu_p + 1;
    let mut module_for = |kind: RequestKind| match kind {
        RequestKind::Passenger => {
            let m = next_p;
            next_p = if next_p >= ix.mu_p { 1 } else { next_p + 1 };
            m
        }
        RequestKind::Freight => {
            let m = next_f;
            next_f = if next_f >= ix.mu_p + ix.mu_f {
                ix.mu_p + 1
            } else {
                next_f + 1
            };
            m
        }
    };

    for route in &sol.routes {
        let k = route.platform;
        if k == 0 || k > ix.kappa {
            continue;
        }
        let visits = &route.visits;
        if visits.iter().any(|&n| n == 0 || n > ix.n) {
            continue;
        }
        // Arcs, modules and segment counters.
        let segments = route.segments(inst);
        let mut seg_module = Vec::with_capacity(segments.len());
        for s in &segments {
            seg_module.push(module_for(s.kind.unwrap_or(RequestKind::Passenger)));
        }
        let mut seg = 0;
        let mut g = 0.0;
        for w in visits.windows(2) {
            let (i, j) = (w[0], w[1]);
            v[ix.x(i, j, k)] = 1.0;
            let m = seg_module[seg.min(seg_module.len() - 1)];
            v[ix.y(i, j, m)] = 1.0;
            if l.is_service_depot(j) {
                seg += 1;
                g += 1.0;
            }
            if ix.has_g {
                v[ix.g(j)] = g;
            }
        }
        let departures = visits
            .iter()
            .take(visits.len().saturating_sub(1))
            .filter(|&&n| l.is_origin(n) || l.is_service_depot(n))
            .count();
        if departures >= 1 && departures <= ix.n {
            v[ix.e(k, departures)] = 1.0;
        }

        // Earliest arrivals from the earliest departure; with feasible windows
        // use the minimum-duration schedule instead.
        match crate::solution::compute_schedule(inst, visits) {
            Ok(sched) => {
                for (&n, &a) in visits.iter().zip(&sched.arrivals) {
                    v[ix.s(n, k)] = a;
                }
            }
            Err(_) => {
                let mut time = inst.node(visits[0]).window.open;
                v[ix.s(visits[0], k)] = time;
                for w in visits.windows(2) {
                    time = inst.node(w[1]).window.open.max(time + inst.t(w[0], w[1]));
                    v[ix.s(w[1], k)] = time;
                }
            }
        }

        let mut load = 0.0f64;
        for &n in visits {
            let d = inst.node(n);
            if d.class.is_request() {
                load = (load + f64::from(d.demand)).max(0.0);
            } else {
                load = 0.0;
            }
            v[ix.c(n)] = load;
        }
    }
    v
}
