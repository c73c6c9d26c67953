//! Instance data model on the expanded node graph.
//!
//! Node ids are 1-based and follow the set ordering
//! `N⁺_d | N⁺_r | N⁻_r | N⁻_d | N_sd`: every physical depot is duplicated
//! `kappa` times (origin and destination), every physical service depot
//! `vartheta` times. A request pickup `i` pairs with drop-off `i + h_r`, an
//! origin depot `i` with destination `i + h_d + 2·h_r`.

use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Planar coordinates in kilometres.
pub type Point = [f64; 2];

/// One day in seconds.
pub const DAY: f64 = 86_400.0;

/// Absolute tolerance (seconds / metres) used by every time and range comparison.
pub const EPS: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InstanceError {
    #[error("instance has no depot")]
    EmptyDepots,
    #[error("kappa must be at least 1")]
    NonPositiveKappa,
    #[error("invalid fleet parameter: {0}")]
    InvalidFleet(&'static str),
    #[error("cost parameter {0} is negative")]
    NegativeCost(&'static str),
    #[error("request {request}: {reason}")]
    InvalidRequest { request: usize, reason: String },
    #[error("invalid time window [{open}, {close}] at {what}")]
    InvalidWindow { what: String, open: f64, close: f64 },
    #[error("node index {0} out of range")]
    NodeOutOfRange(usize),
    #[error("explicit distance matrix: {0}")]
    InvalidMatrix(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RequestKind {
    Passenger,
    Freight,
}

impl RequestKind {
    pub fn other(self) -> Self {
        match self {
            RequestKind::Passenger => RequestKind::Freight,
            RequestKind::Freight => RequestKind::Passenger,
        }
    }
}

impl fmt::Display for RequestKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RequestKind::Passenger => f.write_str("passenger"),
            RequestKind::Freight => f.write_str("freight"),
        }
    }
}

/// Closed time window `[open, close]` in seconds, serialized as `[a, b]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct TimeWindow {
    pub open: f64,
    pub close: f64,
}

impl TimeWindow {
    pub const fn new(open: f64, close: f64) -> Self {
        Self { open, close }
    }

    pub const fn full_day() -> Self {
        Self::new(0.0, DAY)
    }

    fn validate(&self, what: impl FnOnce() -> String) -> Result<(), InstanceError> {
        if !(self.open.is_finite() && self.close.is_finite()) || self.open > self.close {
            return Err(InstanceError::InvalidWindow {
                what: what(),
                open: self.open,
                close: self.close,
            });
        }
        Ok(())
    }
}

impl From<[f64; 2]> for TimeWindow {
    fn from(v: [f64; 2]) -> Self {
        Self::new(v[0], v[1])
    }
}

impl From<TimeWindow> for [f64; 2] {
    fn from(w: TimeWindow) -> Self {
        [w.open, w.close]
    }
}

/// Cost coefficients of the six objective terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CostParams {
    /// EUR per hour of trip time.
    pub alpha_tt: f64,
    /// EUR per platform.
    pub alpha_ps: f64,
    /// EUR per module.
    pub alpha_ms: f64,
    /// EUR per kilometre.
    pub alpha_td: f64,
    /// EUR per module change.
    pub alpha_mc: f64,
    /// EUR per unserved request.
    pub alpha_ud: f64,
}

impl Default for CostParams {
    fn default() -> Self {
        Self {
            alpha_tt: 6.9,
            alpha_ps: 313.67,
            alpha_ms: 156.84,
            alpha_td: 0.1,
            alpha_mc: 8.8,
            alpha_ud: 470.52,
        }
    }
}

impl CostParams {
    fn validate(&self) -> Result<(), InstanceError> {
        let fields = [
            ("alpha_tt", self.alpha_tt),
            ("alpha_ps", self.alpha_ps),
            ("alpha_ms", self.alpha_ms),
            ("alpha_td", self.alpha_td),
            ("alpha_mc", self.alpha_mc),
            ("alpha_ud", self.alpha_ud),
        ];
        for (name, v) in fields {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(InstanceError::NegativeCost(name));
            }
        }
        Ok(())
    }
}

/// Fleet and vehicle limits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FleetParams {
    /// Maximum number of platforms.
    pub kappa: usize,
    /// Passenger module supply; `None` means non-binding (`kappa + vartheta·n_sd`).
    pub mu_p: Option<usize>,
    /// Freight module supply; `None` means non-binding.
    pub mu_f: Option<usize>,
    /// Range per platform in kilometres.
    pub eta: f64,
    /// Visits allowed per physical service depot.
    pub vartheta: usize,
    pub gamma_p: u32,
    pub gamma_f: u32,
    /// Travel speed in km/h.
    pub v: f64,
}

impl Default for FleetParams {
    fn default() -> Self {
        Self {
            kappa: 10,
            mu_p: None,
            mu_f: None,
            eta: 100.0,
            vartheta: 5,
            gamma_p: 16,
            gamma_f: 16,
            v: 20.0,
        }
    }
}

impl FleetParams {
    fn validate(&self) -> Result<(), InstanceError> {
        if self.kappa == 0 {
            return Err(InstanceError::NonPositiveKappa);
        }
        if self.gamma_p == 0 || self.gamma_f == 0 {
            return Err(InstanceError::InvalidFleet(
                "module capacities must be >= 1",
            ));
        }
        if !(self.eta > 0.0) {
            return Err(InstanceError::InvalidFleet("eta must be > 0"));
        }
        if !(self.v > 0.0 && self.v.is_finite()) {
            return Err(InstanceError::InvalidFleet("speed must be > 0"));
        }
        Ok(())
    }

    pub fn capacity(&self, kind: RequestKind) -> u32 {
        match kind {
            RequestKind::Passenger => self.gamma_p,
            RequestKind::Freight => self.gamma_f,
        }
    }
}

fn default_demand() -> u32 {
    1
}

fn default_request_service() -> [f64; 2] {
    [60.0, 60.0]
}

fn default_sd_service() -> f64 {
    1800.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RequestSpec {
    pub pickup: Point,
    pub dropoff: Point,
    pub kind: RequestKind,
    #[serde(default = "default_demand")]
    pub demand: u32,
    /// Service durations `[pickup, drop-off]` in seconds.
    #[serde(default = "default_request_service")]
    pub service: [f64; 2],
    #[serde(default = "TimeWindow::full_day")]
    pub tw_pickup: TimeWindow,
    #[serde(default = "TimeWindow::full_day")]
    pub tw_dropoff: TimeWindow,
}

impl RequestSpec {
    /// Request with unit demand, 60 s service at both ends and full-day windows.
    pub fn new(kind: RequestKind, pickup: Point, dropoff: Point) -> Self {
        Self {
            pickup,
            dropoff,
            kind,
            demand: 1,
            service: default_request_service(),
            tw_pickup: TimeWindow::full_day(),
            tw_dropoff: TimeWindow::full_day(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DepotSpec {
    pub location: Point,
    #[serde(default)]
    pub service: f64,
    #[serde(default = "TimeWindow::full_day")]
    pub tw: TimeWindow,
}

impl DepotSpec {
    pub fn at(location: Point) -> Self {
        Self {
            location,
            service: 0.0,
            tw: TimeWindow::full_day(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServiceDepotSpec {
    pub location: Point,
    #[serde(default = "default_sd_service")]
    pub service: f64,
    #[serde(default = "TimeWindow::full_day")]
    pub tw: TimeWindow,
}

impl ServiceDepotSpec {
    pub fn at(location: Point) -> Self {
        Self {
            location,
            service: default_sd_service(),
            tw: TimeWindow::full_day(),
        }
    }
}

/// Serialized instance. `distances`, when present, is a square matrix in
/// metres over the physical sites ordered `depots, pickups, drop-offs,
/// service depots`; otherwise Euclidean distances are used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub requests: Vec<RequestSpec>,
    pub depots: Vec<DepotSpec>,
    #[serde(default)]
    pub service_depots: Vec<ServiceDepotSpec>,
    #[serde(default)]
    pub fleet: FleetParams,
    #[serde(default)]
    pub cost: CostParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distances: Option<Vec<Vec<f64>>>,
}

impl InstanceSpec {
    pub fn build(&self) -> Result<Instance, InstanceError> {
        Instance::from_spec(self.clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeClass {
    PickupPassenger,
    PickupFreight,
    DropoffPassenger,
    DropoffFreight,
    DepotOrigin,
    DepotDestination,
    ServiceDepot,
}

impl NodeClass {
    pub fn is_pickup(self) -> bool {
        matches!(self, NodeClass::PickupPassenger | NodeClass::PickupFreight)
    }

    pub fn is_dropoff(self) -> bool {
        matches!(
            self,
            NodeClass::DropoffPassenger | NodeClass::DropoffFreight
        )
    }

    pub fn is_request(self) -> bool {
        self.is_pickup() || self.is_dropoff()
    }

    pub fn kind(self) -> Option<RequestKind> {
        match self {
            NodeClass::PickupPassenger | NodeClass::DropoffPassenger => {
                Some(RequestKind::Passenger)
            }
            NodeClass::PickupFreight | NodeClass::DropoffFreight => Some(RequestKind::Freight),
            _ => None,
        }
    }
}

/// Index arithmetic of the expanded graph. All ranges are half-open over 1-based ids.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeIndexLayout {
    pub h_r: usize,
    /// `kappa · n_depots`.
    pub h_d: usize,
    pub n_depots: usize,
    pub kappa: usize,
    /// Physical service depots.
    pub n_sd: usize,
    pub vartheta: usize,
}

impl NodeIndexLayout {
    pub fn new(h_r: usize, n_depots: usize, kappa: usize, n_sd: usize, vartheta: usize) -> Self {
        Self {
            h_r,
            h_d: kappa * n_depots,
            n_depots,
            kappa,
            n_sd,
            vartheta,
        }
    }

    pub fn n_nodes(&self) -> usize {
        2 * self.h_d + 2 * self.h_r + self.vartheta * self.n_sd
    }

    pub fn origins(&self) -> Range<usize> {
        1..self.h_d + 1
    }

    pub fn pickups(&self) -> Range<usize> {
        self.h_d + 1..self.h_d + self.h_r + 1
    }

    pub fn dropoffs(&self) -> Range<usize> {
        self.h_d + self.h_r + 1..self.h_d + 2 * self.h_r + 1
    }

    pub fn destinations(&self) -> Range<usize> {
        self.h_d + 2 * self.h_r + 1..2 * self.h_d + 2 * self.h_r + 1
    }

    pub fn service_depots(&self) -> Range<usize> {
        2 * self.h_d + 2 * self.h_r + 1..self.n_nodes() + 1
    }

    pub fn all(&self) -> Range<usize> {
        1..self.n_nodes() + 1
    }

    pub fn contains(&self, node: usize) -> bool {
        (1..=self.n_nodes()).contains(&node)
    }

    pub fn is_origin(&self, node: usize) -> bool {
        self.origins().contains(&node)
    }

    pub fn is_destination(&self, node: usize) -> bool {
        self.destinations().contains(&node)
    }

    pub fn is_pickup(&self, node: usize) -> bool {
        self.pickups().contains(&node)
    }

    pub fn is_dropoff(&self, node: usize) -> bool {
        self.dropoffs().contains(&node)
    }

    pub fn is_service_depot(&self, node: usize) -> bool {
        self.service_depots().contains(&node)
    }

    /// Pickup node of request `r` (0-based request id).
    pub fn pickup(&self, r: usize) -> usize {
        self.h_d + 1 + r
    }

    pub fn dropoff(&self, r: usize) -> usize {
        self.h_d + self.h_r + 1 + r
    }

    /// Request id of a pickup or drop-off node.
    pub fn request_of(&self, node: usize) -> Option<usize> {
        if self.is_pickup(node) {
            Some(node - self.h_d - 1)
        } else if self.is_dropoff(node) {
            Some(node - self.h_d - self.h_r - 1)
        } else {
            None
        }
    }

    pub fn destination_of(&self, origin: usize) -> usize {
        origin + self.h_d + 2 * self.h_r
    }

    pub fn origin_of(&self, destination: usize) -> usize {
        destination - self.h_d - 2 * self.h_r
    }

    /// Origin node of duplicate `k` (0-based) of physical depot `l`.
    pub fn origin(&self, depot: usize, k: usize) -> usize {
        1 + depot * self.kappa + k
    }

    /// Physical depot of an origin or destination node.
    pub fn depot_of(&self, node: usize) -> Option<usize> {
        if self.is_origin(node) {
            Some((node - 1) / self.kappa)
        } else if self.is_destination(node) {
            Some((self.origin_of(node) - 1) / self.kappa)
        } else {
            None
        }
    }

    /// Node of duplicate `dup` of physical service depot `site`.
    pub fn service_depot(&self, site: usize, dup: usize) -> usize {
        2 * self.h_d + 2 * self.h_r + 1 + site * self.vartheta + dup
    }

    pub fn site_of(&self, node: usize) -> Option<usize> {
        if self.is_service_depot(node) {
            Some((node - 2 * self.h_d - 2 * self.h_r - 1) / self.vartheta)
        } else {
            None
        }
    }

    /// `G_l`: the duplicate origin nodes of physical depot `l`.
    pub fn depot_group(&self, depot: usize) -> Range<usize> {
        let first = self.origin(depot, 0);
        first..first + self.kappa
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeData {
    pub location: Point,
    pub demand: i32,
    pub service: f64,
    pub window: TimeWindow,
    pub class: NodeClass,
}

/// Immutable problem instance over the expanded graph.
#[derive(Debug, Clone)]
pub struct Instance {
    spec: InstanceSpec,
    layout: NodeIndexLayout,
    nodes: Vec<NodeData>,
    dist: Vec<f64>,
    travel: Vec<f64>,
    n: usize,
}

impl Instance {
    pub fn build(
        requests: Vec<RequestSpec>,
        depots: Vec<DepotSpec>,
        service_depots: Vec<ServiceDepotSpec>,
        fleet: FleetParams,
        cost: CostParams,
    ) -> Result<Self, InstanceError> {
        Self::from_spec(InstanceSpec {
            requests,
            depots,
            service_depots,
            fleet,
            cost,
            distances: None,
        })
    }

    pub fn from_spec(spec: InstanceSpec) -> Result<Self, InstanceError> {
        if spec.depots.is_empty() {
            return Err(InstanceError::EmptyDepots);
        }
        spec.fleet.validate()?;
        spec.cost.validate()?;
        for (r, req) in spec.requests.iter().enumerate() {
            if req.demand == 0 {
                return Err(InstanceError::InvalidRequest {
                    request: r,
                    reason: "demand must be positive".into(),
                });
            }
            if req.service.iter().any(|s| !(*s >= 0.0 && s.is_finite())) {
                return Err(InstanceError::InvalidRequest {
                    request: r,
                    reason: "service durations must be non-negative".into(),
                });
            }
            req.tw_pickup.validate(|| format!("request {r} pickup"))?;
            req.tw_dropoff
                .validate(|| format!("request {r} drop-off"))?;
        }
        for (l, d) in spec.depots.iter().enumerate() {
            d.tw.validate(|| format!("depot {l}"))?;
        }
        for (s, d) in spec.service_depots.iter().enumerate() {
            d.tw.validate(|| format!("service depot {s}"))?;
        }

        let fleet = spec.fleet;
        let n_sd = if fleet.vartheta == 0 {
            0
        } else {
            spec.service_depots.len()
        };
        let layout = NodeIndexLayout::new(
            spec.requests.len(),
            spec.depots.len(),
            fleet.kappa,
            n_sd,
            fleet.vartheta,
        );
        let n = layout.n_nodes();

        // node -> (data, physical site index used for explicit matrices)
        let n_dep = spec.depots.len();
        let h_r = layout.h_r;
        let mut nodes = Vec::with_capacity(n);
        let mut sites = Vec::with_capacity(n);
        for l in 0..n_dep {
            let d = &spec.depots[l];
            for _ in 0..fleet.kappa {
                nodes.push(NodeData {
                    location: d.location,
                    demand: 0,
                    service: d.service,
                    window: d.tw,
                    class: NodeClass::DepotOrigin,
                });
                sites.push(l);
            }
        }
        for (r, req) in spec.requests.iter().enumerate() {
            nodes.push(NodeData {
                location: req.pickup,
                demand: req.demand as i32,
                service: req.service[0],
                window: req.tw_pickup,
                class: match req.kind {
                    RequestKind::Passenger => NodeClass::PickupPassenger,
                    RequestKind::Freight => NodeClass::PickupFreight,
                },
            });
            sites.push(n_dep + r);
        }
        for (r, req) in spec.requests.iter().enumerate() {
            nodes.push(NodeData {
                location: req.dropoff,
                demand: -(req.demand as i32),
                service: req.service[1],
                window: req.tw_dropoff,
                class: match req.kind {
                    RequestKind::Passenger => NodeClass::DropoffPassenger,
                    RequestKind::Freight => NodeClass::DropoffFreight,
                },
            });
            sites.push(n_dep + h_r + r);
        }
        for l in 0..n_dep {
            let d = &spec.depots[l];
            for _ in 0..fleet.kappa {
                nodes.push(NodeData {
                    location: d.location,
                    demand: 0,
                    service: d.service,
                    window: d.tw,
                    class: NodeClass::DepotDestination,
                });
                sites.push(l);
            }
        }
        for s in 0..n_sd {
            let d = &spec.service_depots[s];
            for _ in 0..fleet.vartheta {
                nodes.push(NodeData {
                    location: d.location,
                    demand: 0,
                    service: d.service,
                    window: d.tw,
                    class: NodeClass::ServiceDepot,
                });
                sites.push(n_dep + 2 * h_r + s);
            }
        }
        debug_assert_eq!(nodes.len(), n);

        let n_sites = n_dep + 2 * h_r + spec.service_depots.len();
        let mut dist = vec![0.0; n * n];
        match &spec.distances {
            Some(m) => {
                if m.len() != n_sites || m.iter().any(|row| row.len() != n_sites) {
                    return Err(InstanceError::InvalidMatrix(format!(
                        "expected a {n_sites}x{n_sites} matrix"
                    )));
                }
                for (i, row) in m.iter().enumerate() {
                    for (j, &v) in row.iter().enumerate() {
                        if !(v >= 0.0 && v.is_finite()) {
                            return Err(InstanceError::InvalidMatrix(format!(
                                "entry ({i},{j}) must be finite and non-negative"
                            )));
                        }
                    }
                }
                for i in 0..n {
                    for j in 0..n {
                        dist[i * n + j] = if i == j { 0.0 } else { m[sites[i]][sites[j]] };
                    }
                }
            }
            None => {
                for i in 0..n {
                    for j in 0..n {
                        if i != j {
                            let [x1, y1] = nodes[i].location;
                            let [x2, y2] = nodes[j].location;
                            dist[i * n + j] = (x1 - x2).hypot(y1 - y2) * 1000.0;
                        }
                    }
                }
            }
        }

        let speed = fleet.v / 3.6; // m/s
        let mut travel = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                travel[i * n + j] = dist[i * n + j] / speed + nodes[i].service;
            }
        }

        let inst = Self {
            spec,
            layout,
            nodes,
            dist,
            travel,
            n,
        };
        if inst.spec.distances.is_some() {
            inst.check_triangle()?;
        }
        Ok(inst)
    }

    /// Explicit matrices must keep travel times metric so that the direct
    /// pickup-to-drop-off precedence bound is implied by the route chain.
    fn check_triangle(&self) -> Result<(), InstanceError> {
        let n = self.n;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if i == j || j == k || i == k {
                        continue;
                    }
                    let direct = self.travel[i * n + k];
                    let via = self.travel[i * n + j] + self.travel[j * n + k];
                    if direct > via + EPS {
                        return Err(InstanceError::InvalidMatrix(format!(
                            "travel times violate the triangle inequality on nodes {} -> {} -> {}",
                            i + 1,
                            j + 1,
                            k + 1
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn spec(&self) -> &InstanceSpec {
        &self.spec
    }

    pub fn layout(&self) -> &NodeIndexLayout {
        &self.layout
    }

    pub fn cost(&self) -> &CostParams {
        &self.spec.cost
    }

    pub fn fleet(&self) -> &FleetParams {
        &self.spec.fleet
    }

    pub fn n_nodes(&self) -> usize {
        self.n
    }

    pub fn n_requests(&self) -> usize {
        self.layout.h_r
    }

    /// Physical service depots present in the expanded graph.
    pub fn n_service_sites(&self) -> usize {
        self.layout.n_sd
    }

    pub fn n_depots(&self) -> usize {
        self.layout.n_depots
    }

    pub fn node(&self, i: usize) -> &NodeData {
        &self.nodes[i - 1]
    }

    pub fn try_node(&self, i: usize) -> Result<&NodeData, InstanceError> {
        if self.layout.contains(i) {
            Ok(&self.nodes[i - 1])
        } else {
            Err(InstanceError::NodeOutOfRange(i))
        }
    }

    pub fn request(&self, r: usize) -> &RequestSpec {
        &self.spec.requests[r]
    }

    pub fn request_kind(&self, r: usize) -> RequestKind {
        self.spec.requests[r].kind
    }

    /// Distance `w[i][j]` in metres (unchecked).
    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.dist[(i - 1) * self.n + (j - 1)]
    }

    /// Travel time `t[i][j] = w[i][j]/v + o_i` in seconds (unchecked).
    #[inline]
    pub fn t(&self, i: usize, j: usize) -> f64 {
        self.travel[(i - 1) * self.n + (j - 1)]
    }

    pub fn travel_time(&self, i: usize, j: usize) -> Result<f64, InstanceError> {
        self.try_node(i)?;
        self.try_node(j)?;
        Ok(self.t(i, j))
    }

    pub fn distance(&self, i: usize, j: usize) -> Result<f64, InstanceError> {
        self.try_node(i)?;
        self.try_node(j)?;
        Ok(self.dist(i, j))
    }

    pub fn node_class(&self, i: usize) -> Result<NodeClass, InstanceError> {
        self.try_node(i).map(|d| d.class)
    }

    /// `ζ = max_{i,j} (b_i + t_ij − a_j)`.
    pub fn big_m(&self) -> f64 {
        let mut zeta = f64::NEG_INFINITY;
        for i in self.layout.all() {
            let b_i = self.node(i).window.close;
            for j in self.layout.all() {
                zeta = zeta.max(b_i + self.t(i, j) - self.node(j).window.open);
            }
        }
        zeta
    }

    /// `G_l` for every physical depot.
    pub fn depot_groups(&self) -> Vec<Range<usize>> {
        (0..self.layout.n_depots)
            .map(|l| self.layout.depot_group(l))
            .collect()
    }

    /// Passenger / freight module supply after applying the non-binding default.
    pub fn module_supply(&self) -> (usize, usize) {
        let default = self.layout.kappa + self.layout.vartheta * self.layout.n_sd;
        (
            self.spec.fleet.mu_p.unwrap_or(default),
            self.spec.fleet.mu_f.unwrap_or(default),
        )
    }

    /// Range limit in metres.
    pub fn range_m(&self) -> f64 {
        self.spec.fleet.eta * 1000.0
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.spec).expect("instance spec serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, crate::Error> {
        let spec: InstanceSpec = serde_json::from_str(text)?;
        Ok(Self::from_spec(spec)?)
    }
}
