//! Synthetic scenario generation and the two-request reference instance.
//!
//! Geometry is a square box (20 km by default) with two fixed depots and an
//! ordered list of five service-depot sites near the centre. All positions are
//! synthetic stand-ins declared as constants below.

use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::instance::{
    CostParams, DepotSpec, FleetParams, Instance, InstanceError, InstanceSpec, Point, RequestKind,
    RequestSpec, ServiceDepotSpec, TimeWindow, DAY,
};

/// Depot sites as fractions of the box side.
pub const DEPOT_SITES: [[f64; 2]; 2] = [[0.15, 0.5], [0.85, 0.5]];

/// Service-depot sites in the order they are added, as fractions of the box side.
pub const SERVICE_DEPOT_SITES: [[f64; 2]; 5] =
    [[0.5, 0.5], [0.4, 0.6], [0.6, 0.4], [0.4, 0.4], [0.6, 0.6]];

/// Cluster centres for the clustered pattern, as fractions of the box side.
pub const CLUSTER_CENTRES: [[f64; 2]; 4] = [[0.25, 0.25], [0.75, 0.25], [0.25, 0.75], [0.75, 0.75]];

/// Width of one drop-off bin in the tight regime, seconds.
pub const TIGHT_BIN: f64 = 1200.0;
/// First passenger bin of the morning peak.
pub const TIGHT_PASSENGER_AM_START: f64 = 24_600.0;
pub const TIGHT_PASSENGER_AM: [usize; 8] = [2, 3, 5, 6, 5, 3, 1, 1];
pub const TIGHT_FREIGHT_START: f64 = 34_200.0;
pub const TIGHT_FREIGHT: [usize; 18] = [1, 1, 1, 1, 2, 4, 4, 5, 6, 6, 5, 4, 4, 2, 1, 1, 1, 1];
pub const TIGHT_PASSENGER_PM_START: f64 = 55_800.0;
pub const TIGHT_PASSENGER_PM: [usize; 7] = [1, 2, 3, 5, 6, 5, 2];

pub const PEAK_PASSENGER: [TimeWindow; 2] = [
    TimeWindow::new(28_800.0, 43_200.0),
    TimeWindow::new(50_400.0, 64_800.0),
];
pub const PEAK_FREIGHT: TimeWindow = TimeWindow::new(36_000.0, 57_600.0);
pub const OPEN_WINDOW: TimeWindow = TimeWindow::new(1.0, DAY);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spatial {
    Central,
    Distributed,
    Clustered,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TwRegime {
    None,
    Peak,
    Tight,
}

impl fmt::Display for Spatial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Spatial::Central => "central",
            Spatial::Distributed => "distributed",
            Spatial::Clustered => "clustered",
        })
    }
}

impl fmt::Display for TwRegime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TwRegime::None => "none",
            TwRegime::Peak => "peak",
            TwRegime::Tight => "tight",
        })
    }
}

fn default_requests() -> usize {
    50
}
fn default_box() -> f64 {
    20.0
}
fn default_clusters() -> usize {
    4
}
fn default_radius() -> f64 {
    2.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub spatial: Spatial,
    pub tw: TwRegime,
    #[serde(default)]
    pub n_service_depots: usize,
    #[serde(default = "default_requests")]
    pub n_passenger: usize,
    #[serde(default = "default_requests")]
    pub n_freight: usize,
    /// Side of the square service area, km.
    #[serde(default = "default_box")]
    pub box_km: f64,
    #[serde(default = "default_clusters")]
    pub n_clusters: usize,
    #[serde(default = "default_radius")]
    pub cluster_radius_km: f64,
    pub rng_seed: u64,
    #[serde(default)]
    pub fleet: FleetParams,
    #[serde(default)]
    pub cost: CostParams,
}

impl ScenarioConfig {
    pub fn new(spatial: Spatial, tw: TwRegime, n_service_depots: usize, rng_seed: u64) -> Self {
        Self {
            spatial,
            tw,
            n_service_depots,
            n_passenger: default_requests(),
            n_freight: default_requests(),
            box_km: default_box(),
            n_clusters: default_clusters(),
            cluster_radius_km: default_radius(),
            rng_seed,
            fleet: FleetParams::default(),
            cost: CostParams::default(),
        }
    }

    pub fn with_requests(mut self, n_passenger: usize, n_freight: usize) -> Self {
        self.n_passenger = n_passenger;
        self.n_freight = n_freight;
        self
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.n_service_depots > SERVICE_DEPOT_SITES.len() {
            return Err(format!(
                "n_service_depots must be at most {}",
                SERVICE_DEPOT_SITES.len()
            ));
        }
        if !(self.box_km > 0.0) {
            return Err("box_km must be positive".into());
        }
        if self.spatial == Spatial::Clustered
            && !(1..=CLUSTER_CENTRES.len()).contains(&self.n_clusters)
        {
            return Err(format!(
                "n_clusters must be in 1..={}",
                CLUSTER_CENTRES.len()
            ));
        }
        if !(self.cluster_radius_km > 0.0) {
            return Err("cluster_radius_km must be positive".into());
        }
        Ok(())
    }

    /// Position in the 54-scenario grid (1-based), if the config is a grid cell.
    pub fn grid_id(&self) -> usize {
        let s = match self.spatial {
            Spatial::Central => 0,
            Spatial::Distributed => 1,
            Spatial::Clustered => 2,
        };
        let t = match self.tw {
            TwRegime::None => 0,
            TwRegime::Peak => 1,
            TwRegime::Tight => 2,
        };
        18 * s + 6 * t + self.n_service_depots + 1
    }

    fn scale(&self, frac: [f64; 2]) -> Point {
        [frac[0] * self.box_km, frac[1] * self.box_km]
    }
}

fn uniform_in<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> Point {
    [rng.gen_range(lo..hi), rng.gen_range(lo..hi)]
}

fn in_disc<R: Rng + ?Sized>(rng: &mut R, centre: Point, radius: f64) -> Point {
    let r = radius * rng.gen::<f64>().sqrt();
    let a = rng.gen::<f64>() * std::f64::consts::TAU;
    [centre[0] + r * a.cos(), centre[1] + r * a.sin()]
}

fn draw_point<R: Rng + ?Sized>(cfg: &ScenarioConfig, kind: RequestKind, rng: &mut R) -> Point {
    let b = cfg.box_km;
    match cfg.spatial {
        Spatial::Distributed => uniform_in(rng, 0.0, b),
        Spatial::Central => match kind {
            RequestKind::Passenger => uniform_in(rng, 0.0, b),
            RequestKind::Freight => uniform_in(rng, b / 3.0, 2.0 * b / 3.0),
        },
        Spatial::Clustered => {
            let c = CLUSTER_CENTRES[rng.gen_range(0..cfg.n_clusters)];
            in_disc(rng, cfg.scale(c), cfg.cluster_radius_km)
        }
    }
}

/// Splits `total` over bins proportionally to `weights` with largest-remainder
/// rounding; equal remainders favour the lower bin index.
pub fn largest_remainder(weights: &[usize], total: usize) -> Vec<usize> {
    let sum: usize = weights.iter().sum();
    if sum == 0 {
        return vec![0; weights.len()];
    }
    let mut out: Vec<usize> = weights.iter().map(|&w| w * total / sum).collect();
    let assigned: usize = out.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = weights[a] * total % sum;
        let rb = weights[b] * total % sum;
        rb.cmp(&ra).then(a.cmp(&b))
    });
    for &i in order.iter().take(total - assigned) {
        out[i] += 1;
    }
    out
}

/// Drop-off bins of the tight regime for one request kind: `(window, count)`.
pub fn tight_bins(kind: RequestKind, n: usize) -> Vec<(TimeWindow, usize)> {
    let mut windows = Vec::new();
    let mut weights = Vec::new();
    let mut push = |start: f64, counts: &[usize]| {
        for (b, &c) in counts.iter().enumerate() {
            let open = start + b as f64 * TIGHT_BIN;
            windows.push(TimeWindow::new(open, open + TIGHT_BIN));
            weights.push(c);
        }
    };
    match kind {
        RequestKind::Passenger => {
            push(TIGHT_PASSENGER_AM_START, &TIGHT_PASSENGER_AM);
            push(TIGHT_PASSENGER_PM_START, &TIGHT_PASSENGER_PM);
        }
        RequestKind::Freight => push(TIGHT_FREIGHT_START, &TIGHT_FREIGHT),
    }
    windows
        .into_iter()
        .zip(largest_remainder(&weights, n))
        .collect()
}

/// Assigns time windows in place. Bins are handed to uniformly shuffled
/// requests of each kind.
pub fn assign_time_windows<R: Rng + ?Sized>(
    requests: &mut [RequestSpec],
    regime: TwRegime,
    rng: &mut R,
) {
    for kind in [RequestKind::Passenger, RequestKind::Freight] {
        let mut idx: Vec<usize> = (0..requests.len())
            .filter(|&i| requests[i].kind == kind)
            .collect();
        idx.shuffle(rng);
        let n = idx.len();
        let slots: Vec<(TimeWindow, TimeWindow)> = match (regime, kind) {
            (TwRegime::None, _) => vec![(OPEN_WINDOW, OPEN_WINDOW); n],
            (TwRegime::Peak, RequestKind::Passenger) => largest_remainder(&[25, 25], n)
                .into_iter()
                .zip(PEAK_PASSENGER)
                .flat_map(|(c, w)| std::iter::repeat_n((w, w), c))
                .collect(),
            (TwRegime::Peak, RequestKind::Freight) => vec![(PEAK_FREIGHT, PEAK_FREIGHT); n],
            (TwRegime::Tight, k) => tight_bins(k, n)
                .into_iter()
                .flat_map(|(w, c)| std::iter::repeat_n((OPEN_WINDOW, w), c))
                .collect(),
        };
        for (&i, (p, d)) in idx.iter().zip(slots) {
            requests[i].tw_pickup = p;
            requests[i].tw_dropoff = d;
        }
    }
}

/// Generates the instance description of a scenario. Request geometry and
/// windows depend only on the seed, spatial pattern and regime, so scenarios
/// that differ only in the number of service depots share their requests.
pub fn generate_scenario(cfg: &ScenarioConfig) -> Result<InstanceSpec, String> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let kinds = std::iter::repeat_n(RequestKind::Passenger, cfg.n_passenger)
        .chain(std::iter::repeat_n(RequestKind::Freight, cfg.n_freight));
    let mut requests: Vec<RequestSpec> = kinds
        .map(|k| {
            let p = draw_point(cfg, k, &mut rng);
            let d = draw_point(cfg, k, &mut rng);
            RequestSpec::new(k, p, d)
        })
        .collect();
    assign_time_windows(&mut requests, cfg.tw, &mut rng);

    let depots: Vec<DepotSpec> = DEPOT_SITES
        .iter()
        .map(|&s| DepotSpec::at(cfg.scale(s)))
        .collect();
    let mut service_depots: Vec<ServiceDepotSpec> = SERVICE_DEPOT_SITES[..cfg.n_service_depots]
        .iter()
        .map(|&s| ServiceDepotSpec::at(cfg.scale(s)))
        .collect();
    if cfg.n_service_depots > 0 {
        service_depots.extend(depots.iter().map(|d| ServiceDepotSpec::at(d.location)));
    }
    Ok(InstanceSpec {
        requests,
        depots,
        service_depots,
        fleet: cfg.fleet,
        cost: cfg.cost,
        distances: None,
    })
}

/// The 54 grid cells (spatial × regime × 0..=5 service depots) in grid order.
pub fn scenario_grid(rng_seed: u64, n_passenger: usize, n_freight: usize) -> Vec<ScenarioConfig> {
    let mut out = Vec::with_capacity(54);
    for spatial in [Spatial::Central, Spatial::Distributed, Spatial::Clustered] {
        for tw in [TwRegime::None, TwRegime::Peak, TwRegime::Tight] {
            for n_sd in 0..=SERVICE_DEPOT_SITES.len() {
                out.push(
                    ScenarioConfig::new(spatial, tw, n_sd, rng_seed)
                        .with_requests(n_passenger, n_freight),
                );
            }
        }
    }
    out
}

pub const MANIFEST_HEADER: &str = "scenario_id,spatial,tw,n_sd,seed,file";

pub fn manifest_row(cfg: &ScenarioConfig, id: usize, file: &str) -> String {
    format!(
        "{},{},{},{},{},{}",
        id, cfg.spatial, cfg.tw, cfg.n_service_depots, cfg.rng_seed, file
    )
}

/// Arc times of the two-request reference network, minutes.
const POC_EDGES: [(usize, usize, f64); 8] = [
    // sites: 0 depot, 1 passenger pickup, 2 freight pickup, 3 passenger drop-off,
    // 4 freight drop-off, 5 service depot
    (0, 2, 30.0),
    (2, 4, 20.0),
    (4, 0, 40.0),
    (0, 1, 30.0),
    (1, 3, 50.0),
    (3, 0, 20.0),
    (4, 5, 10.0),
    (5, 1, 10.0),
];

/// Penalty per unserved request in the reference instance. With the default
/// cost table, leaving both requests unserved would be cheaper than any tour.
pub const POC_UNSERVED_PENALTY: f64 = 10_000.0;

/// One depot, one passenger and one freight request, and optionally one
/// service depot. Distances are shortest paths over the labelled arc times at
/// 20 km/h; service durations are zero and windows are open. All demand must
/// be served, enforced by a prohibitive unserved-request penalty.
pub fn poc_instance(n_service_depots: usize) -> Result<Instance, InstanceError> {
    assert!(
        n_service_depots <= 1,
        "the reference instance has one service depot site"
    );
    let speed_m_per_min = 20_000.0 / 60.0;
    let n = 6;
    let mut m = vec![vec![f64::INFINITY; n]; n];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = 0.0;
    }
    for &(a, b, minutes) in &POC_EDGES {
        m[a][b] = minutes;
        m[b][a] = minutes;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if m[i][k] + m[k][j] < m[i][j] {
                    m[i][j] = m[i][k] + m[k][j];
                }
            }
        }
    }
    let keep = 5 + n_service_depots;
    let distances: Vec<Vec<f64>> = m[..keep]
        .iter()
        .map(|row| {
            row[..keep]
                .iter()
                .map(|&min| min * speed_m_per_min)
                .collect()
        })
        .collect();
    let request = |kind| RequestSpec {
        service: [0.0, 0.0],
        tw_pickup: TimeWindow::full_day(),
        tw_dropoff: TimeWindow::full_day(),
        ..RequestSpec::new(kind, [0.0, 0.0], [0.0, 0.0])
    };
    let service_depots = (0..n_service_depots)
        .map(|_| ServiceDepotSpec {
            location: [0.0, 0.0],
            service: 0.0,
            tw: TimeWindow::full_day(),
        })
        .collect();
    InstanceSpec {
        requests: vec![
            request(RequestKind::Passenger),
            request(RequestKind::Freight),
        ],
        depots: vec![DepotSpec::at([0.0, 0.0])],
        service_depots,
        fleet: FleetParams {
            kappa: 2,
            ..FleetParams::default()
        },
        cost: CostParams {
            alpha_ud: POC_UNSERVED_PENALTY,
            ..CostParams::default()
        },
        distances: Some(distances),
    }
    .build()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn largest_remainder_examples() {
        assert_eq!(largest_remainder(&[25, 25], 7), vec![4, 3]);
        let half = largest_remainder(&TIGHT_FREIGHT, 25);
        assert_eq!(half.iter().sum::<usize>(), 25);
        for (h, w) in half.iter().zip(TIGHT_FREIGHT) {
            assert!((*h as f64 - w as f64 / 2.0).abs() <= 0.5 + 1e-12);
        }
    }

    #[test]
    fn tight_bins_at_full_scale() {
        let p = tight_bins(RequestKind::Passenger, 50);
        let bin = p.iter().find(|(w, _)| w.open == 28_200.0).unwrap();
        assert_eq!(bin.0.close, 29_400.0);
        assert_eq!(bin.1, 6);
        assert_eq!(p.iter().map(|b| b.1).sum::<usize>(), 50);
        let f = tight_bins(RequestKind::Freight, 50);
        assert_eq!(
            f.iter().map(|b| b.1).collect::<Vec<_>>(),
            TIGHT_FREIGHT.to_vec()
        );
        assert_eq!(f.last().unwrap().0.close, 55_800.0);
        assert_eq!(p.last().unwrap().0.close, 64_200.0);
    }

    #[test]
    fn central_freight_stays_central() {
        let cfg = ScenarioConfig::new(Spatial::Central, TwRegime::None, 0, 3);
        let spec = generate_scenario(&cfg).unwrap();
        for r in &spec.requests {
            for p in [r.pickup, r.dropoff] {
                assert!(p.iter().all(|&c| (0.0..=20.0).contains(&c)));
                if r.kind == RequestKind::Freight {
                    assert!(p.iter().all(|&c| (20.0 / 3.0..=40.0 / 3.0).contains(&c)));
                }
            }
            assert_eq!(r.tw_pickup, OPEN_WINDOW);
            assert_eq!(r.tw_dropoff, OPEN_WINDOW);
        }
        assert!(spec.service_depots.is_empty());
    }

    #[test]
    fn service_depot_count_adds_depot_sites() {
        let base = ScenarioConfig::new(Spatial::Clustered, TwRegime::Tight, 0, 11);
        let three = ScenarioConfig {
            n_service_depots: 3,
            ..base.clone()
        };
        let a = generate_scenario(&base).unwrap();
        let b = generate_scenario(&three).unwrap();
        assert_eq!(a.requests, b.requests);
        assert_eq!(b.service_depots.len(), 5);
        assert_eq!(b.service_depots[0].location, [10.0, 10.0]);
        assert_eq!(b.service_depots[3].location, a.depots[0].location);
    }

    #[test]
    fn grid_order_and_ids() {
        let grid = scenario_grid(1, 2, 2);
        assert_eq!(grid.len(), 54);
        for (i, c) in grid.iter().enumerate() {
            assert_eq!(c.grid_id(), i + 1);
        }
        assert_eq!(grid[48].spatial, Spatial::Clustered);
        assert_eq!(grid[48].tw, TwRegime::Tight);
    }

    #[test]
    fn poc_arc_minutes() {
        let inst = poc_instance(1).unwrap();
        let l = *inst.layout();
        let minutes = |i: usize, j: usize| (inst.t(i, j) / 60.0 * 1e6).round() / 1e6;
        let (pp, fp, pd, fd) = (l.pickup(0), l.pickup(1), l.dropoff(0), l.dropoff(1));
        let sd = l.service_depot(0, 0);
        assert_eq!(minutes(1, fp), 30.0);
        assert_eq!(minutes(fp, fd), 20.0);
        assert_eq!(minutes(fd, 1), 40.0);
        assert_eq!(minutes(pp, pd), 50.0);
        assert_eq!(minutes(pd, 1), 20.0);
        assert_eq!(minutes(fd, sd), 10.0);
        assert_eq!(minutes(sd, pp), 10.0);
    }
}
