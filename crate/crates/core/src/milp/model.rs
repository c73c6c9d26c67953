use crate::instance::{Instance, NodeClass};
use crate::Error;

/// Default cap on the expanded node count for model construction.
pub const DEFAULT_NODE_CAP: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Binary,
    Continuous,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Var {
    pub name: String,
    pub kind: VarKind,
    pub lb: f64,
    pub ub: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub name: String,
    /// Model equation number, `None` for the tightening rows.
    pub equation: Option<u32>,
    pub terms: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Row {
    pub fn activity(&self, values: &[f64]) -> f64 {
        self.terms.iter().map(|&(v, a)| a * values[v]).sum()
    }

    pub fn satisfied(&self, values: &[f64], tol: f64) -> bool {
        let lhs = self.activity(values);
        match self.sense {
            Sense::Le => lhs <= self.rhs + tol,
            Sense::Ge => lhs >= self.rhs - tol,
            Sense::Eq => (lhs - self.rhs).abs() <= tol,
        }
    }
}

/// Index arithmetic of the variable registry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VarIndex {
    pub n: usize,
    pub kappa: usize,
    /// Passenger module ids are `1..=mu_p`, freight ids follow.
    pub mu_p: usize,
    pub mu_f: usize,
    /// Whether segment counters `g_i` exist (only with service depots).
    pub has_g: bool,
}

impl VarIndex {
    pub fn n_modules(&self) -> usize {
        self.mu_p + self.mu_f
    }

    fn n_x(&self) -> usize {
        self.n * self.n * self.kappa
    }

    fn n_y(&self) -> usize {
        self.n * self.n * self.n_modules()
    }

    pub fn x(&self, i: usize, j: usize, k: usize) -> usize {
        ((i - 1) * self.n + (j - 1)) * self.kappa + (k - 1)
    }

    pub fn y(&self, i: usize, j: usize, m: usize) -> usize {
        self.n_x() + ((i - 1) * self.n + (j - 1)) * self.n_modules() + (m - 1)
    }

    pub fn e(&self, k: usize, u: usize) -> usize {
        self.n_x() + self.n_y() + (k - 1) * self.n + (u - 1)
    }

    pub fn s(&self, i: usize, k: usize) -> usize {
        self.n_x() + self.n_y() + self.kappa * self.n + (i - 1) * self.kappa + (k - 1)
    }

    pub fn c(&self, i: usize) -> usize {
        self.n_x() + self.n_y() + 2 * self.kappa * self.n + (i - 1)
    }

    pub fn g(&self, i: usize) -> usize {
        assert!(self.has_g);
        self.n_x() + self.n_y() + 2 * self.kappa * self.n + self.n + (i - 1)
    }

    pub fn count(&self) -> usize {
        self.n_x()
            + self.n_y()
            + 2 * self.kappa * self.n
            + self.n
            + if self.has_g { self.n } else { 0 }
    }

    pub fn passenger_modules(&self) -> std::ops::RangeInclusive<usize> {
        1..=self.mu_p
    }

    pub fn freight_modules(&self) -> std::ops::RangeInclusive<usize> {
        self.mu_p + 1..=self.mu_p + self.mu_f
    }

    pub fn modules(&self) -> std::ops::RangeInclusive<usize> {
        1..=self.n_modules()
    }
}

/// The full routing model: variables, objective and tagged constraint rows.
#[derive(Debug, Clone)]
pub struct MilpModel {
    pub index: VarIndex,
    pub vars: Vec<Var>,
    /// Sparse objective, one entry per variable with a non-zero coefficient.
    pub objective: Vec<(usize, f64)>,
    pub objective_constant: f64,
    pub rows: Vec<Row>,
    /// Time big-M.
    pub zeta: f64,
    /// Big-M of the load propagation rows.
    pub load_m: f64,
    /// Big-M of the segment counter rows.
    pub segment_m: f64,
}

impl MilpModel {
    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective_constant
            + self
                .objective
                .iter()
                .map(|&(v, a)| a * values[v])
                .sum::<f64>()
    }

    /// Rows violated by `values`, plus bound and integrality violations reported
    /// as pseudo-rows named after the variable.
    pub fn violations(&self, values: &[f64], tol: f64) -> Vec<String> {
        let mut out = Vec::new();
        for (v, var) in self.vars.iter().enumerate() {
            let x = values[v];
            if x < var.lb - tol || x > var.ub + tol {
                out.push(format!("bound {}", var.name));
            } else if var.kind == VarKind::Binary && (x - x.round()).abs() > tol {
                out.push(format!("integrality {}", var.name));
            }
        }
        out.extend(
            self.rows
                .iter()
                .filter(|r| !r.satisfied(values, tol))
                .map(|r| r.name.clone()),
        );
        out
    }
}

struct Builder<'a> {
    inst: &'a Instance,
    ix: VarIndex,
    rows: Vec<Row>,
}

impl Builder<'_> {
    fn row(
        &mut self,
        eq: Option<u32>,
        name: String,
        terms: Vec<(usize, f64)>,
        sense: Sense,
        rhs: f64,
    ) {
        self.rows.push(Row {
            name,
            equation: eq,
            terms,
            sense,
            rhs,
        });
    }

    fn all(&self) -> std::ops::Range<usize> {
        self.inst.layout().all()
    }

    fn ks(&self) -> std::ops::RangeInclusive<usize> {
        1..=self.ix.kappa
    }

    /// Σ_k x_ijk
    fn x_sum(&self, i: usize, j: usize) -> Vec<(usize, f64)> {
        self.ks().map(|k| (self.ix.x(i, j, k), 1.0)).collect()
    }

    /// Σ_j x_ijk
    fn x_out(&self, i: usize, k: usize, coef: f64) -> Vec<(usize, f64)> {
        self.all().map(|j| (self.ix.x(i, j, k), coef)).collect()
    }

    fn x_in(&self, j: usize, k: usize, coef: f64) -> Vec<(usize, f64)> {
        self.all().map(|i| (self.ix.x(i, j, k), coef)).collect()
    }

    fn y_out(
        &self,
        i: usize,
        ms: impl Iterator<Item = usize> + Clone,
        coef: f64,
    ) -> Vec<(usize, f64)> {
        let mut t = Vec::new();
        for j in self.all() {
            for m in ms.clone() {
                t.push((self.ix.y(i, j, m), coef));
            }
        }
        t
    }

    fn y_in(
        &self,
        j: usize,
        ms: impl Iterator<Item = usize> + Clone,
        coef: f64,
    ) -> Vec<(usize, f64)> {
        let mut t = Vec::new();
        for i in self.all() {
            for m in ms.clone() {
                t.push((self.ix.y(i, j, m), coef));
            }
        }
        t
    }

    /// `x_ijk = 0` for every `k` (one row per platform) and `y_ijm = 0` for every
    /// module, for the arc classes the model excludes.
    fn forbid_x(&mut self, eq: u32, i: usize, j: usize) {
        for k in self.ks() {
            self.row(
                Some(eq),
                format!("c{eq}_{i}_{j}_{k}"),
                vec![(self.ix.x(i, j, k), 1.0)],
                Sense::Eq,
                0.0,
            );
        }
    }

    fn forbid_y(&mut self, eq: u32, i: usize, j: usize) {
        for m in self.ix.modules() {
            self.row(
                Some(eq),
                format!("c{eq}_{i}_{j}_{m}"),
                vec![(self.ix.y(i, j, m), 1.0)],
                Sense::Eq,
                0.0,
            );
        }
    }
}

/// Builds the model. Fails if the expanded graph has more than `node_cap` nodes.
pub fn build_model(inst: &Instance, node_cap: usize) -> Result<MilpModel, Error> {
    let l = *inst.layout();
    let n = inst.n_nodes();
    if n > node_cap {
        return Err(Error::Guard(format!(
            "expanded graph has {n} nodes, model export is capped at {node_cap}"
        )));
    }
    let (mu_p, mu_f) = inst.module_supply();
    let ix = VarIndex {
        n,
        kappa: l.kappa,
        mu_p,
        mu_f,
        has_g: l.n_sd > 0,
    };
    let zeta = inst.big_m();
    let fleet = inst.fleet();
    let q_max = (1..=n)
        .map(|i| inst.node(i).demand.abs())
        .max()
        .unwrap_or(0) as f64;
    let load_m = zeta.max(f64::from(fleet.gamma_p.max(fleet.gamma_f)) + q_max);
    let g_max = (l.vartheta * l.n_sd) as f64;
    let segment_m = g_max + 1.0;

    // Registry.
    let mut vars = Vec::with_capacity(ix.count());
    let bin = |name: String| Var {
        name,
        kind: VarKind::Binary,
        lb: 0.0,
        ub: 1.0,
    };
    let cont = |name: String, ub: f64| Var {
        name,
        kind: VarKind::Continuous,
        lb: 0.0,
        ub,
    };
    for i in 1..=n {
        for j in 1..=n {
            for k in 1..=ix.kappa {
                vars.push(bin(format!("x_{i}_{j}_{k}")));
            }
        }
    }
    for i in 1..=n {
        for j in 1..=n {
            for m in ix.modules() {
                vars.push(bin(format!("y_{i}_{j}_{m}")));
            }
        }
    }
    for k in 1..=ix.kappa {
        for u in 1..=n {
            vars.push(bin(format!("e_{k}_{u}")));
        }
    }
    for i in 1..=n {
        for k in 1..=ix.kappa {
            vars.push(cont(format!("s_{i}_{k}"), f64::INFINITY));
        }
    }
    for i in 1..=n {
        vars.push(cont(format!("c_{i}"), f64::INFINITY));
    }
    if ix.has_g {
        for i in 1..=n {
            vars.push(cont(format!("g_{i}"), g_max));
        }
    }
    debug_assert_eq!(vars.len(), ix.count());

    // Objective.
    let c = inst.cost();
    let mut obj = vec![0.0; ix.count()];
    for i in 1..=n {
        for j in 1..=n {
            for k in 1..=ix.kappa {
                let v = ix.x(i, j, k);
                obj[v] += c.alpha_td * inst.dist(i, j) / 1000.0;
                if l.is_origin(i) && (l.is_pickup(j) || l.is_dropoff(j)) {
                    obj[v] += c.alpha_ps;
                }
                if l.is_service_depot(j) {
                    obj[v] += c.alpha_mc;
                }
                if l.is_pickup(i) {
                    obj[v] -= c.alpha_ud;
                }
            }
        }
    }
    for k in 1..=ix.kappa {
        for u in 1..=n {
            obj[ix.e(k, u)] += c.alpha_ms * u as f64;
        }
    }
    for o in l.origins() {
        for k in 1..=ix.kappa {
            obj[ix.s(l.destination_of(o), k)] += c.alpha_tt / 3600.0;
            obj[ix.s(o, k)] -= c.alpha_tt / 3600.0;
        }
    }
    let objective: Vec<(usize, f64)> = obj
        .iter()
        .enumerate()
        .filter(|(_, &a)| a != 0.0)
        .map(|(v, &a)| (v, a))
        .collect();
    let objective_constant = c.alpha_ud * l.h_r as f64;

    let mut b = Builder {
        inst,
        ix,
        rows: Vec::new(),
    };
    let ks = 1..=ix.kappa;

    // (8) each node left at most once.
    for i in b.all() {
        let mut t = Vec::new();
        for j in b.all() {
            t.extend(b.x_sum(i, j));
        }
        b.row(Some(8), format!("c8_{i}"), t, Sense::Le, 1.0);
    }
    // (9) platform and module arcs coincide; (10)/(11) module type follows request type.
    for i in b.all() {
        for j in b.all() {
            let mut t = b.x_sum(i, j);
            t.extend(ix.modules().map(|m| (ix.y(i, j, m), -1.0)));
            b.row(Some(9), format!("c9_{i}_{j}"), t, Sense::Eq, 0.0);
        }
    }
    for i in l.pickups().chain(l.dropoffs()) {
        let (eq, ms) = match inst.node(i).class.kind() {
            Some(crate::instance::RequestKind::Passenger) => (10, ix.passenger_modules()),
            _ => (11, ix.freight_modules()),
        };
        for j in b.all() {
            let mut t = b.x_sum(i, j);
            t.extend(ms.clone().map(|m| (ix.y(i, j, m), -1.0)));
            b.row(Some(eq), format!("c{eq}_{i}_{j}"), t, Sense::Eq, 0.0);
        }
    }
    // (12)/(13) pickup and drop-off share platform and module.
    for i in l.pickups() {
        for k in ks.clone() {
            let mut t = b.x_out(i, k, 1.0);
            t.extend(b.x_out(i + l.h_r, k, -1.0));
            b.row(Some(12), format!("c12_{i}_{k}"), t, Sense::Eq, 0.0);
        }
        for m in ix.modules() {
            let mut t = b.y_out(i, m..=m, 1.0);
            t.extend(b.y_out(i + l.h_r, m..=m, -1.0));
            b.row(Some(13), format!("c13_{i}_{m}"), t, Sense::Eq, 0.0);
        }
    }
    // (14)/(15) flow conservation at request nodes; (16) at service depots.
    for i in l.pickups().chain(l.dropoffs()) {
        for k in ks.clone() {
            let mut t = b.x_in(i, k, 1.0);
            t.extend(b.x_out(i, k, -1.0));
            b.row(Some(14), format!("c14_{i}_{k}"), t, Sense::Eq, 0.0);
        }
        for m in ix.modules() {
            let mut t = b.y_in(i, m..=m, 1.0);
            t.extend(b.y_out(i, m..=m, -1.0));
            b.row(Some(15), format!("c15_{i}_{m}"), t, Sense::Eq, 0.0);
        }
    }
    for i in l.service_depots() {
        for k in ks.clone() {
            let mut t = b.x_in(i, k, 1.0);
            t.extend(b.x_out(i, k, -1.0));
            b.row(Some(16), format!("c16_{i}_{k}"), t, Sense::Eq, 0.0);
        }
        // (17)/(18) the module type changes at a service depot.
        let mut t = b.y_in(i, ix.passenger_modules(), 1.0);
        t.extend(b.y_out(i, ix.freight_modules(), -1.0));
        b.row(Some(17), format!("c17_{i}"), t, Sense::Eq, 0.0);
        let mut t = b.y_in(i, ix.freight_modules(), 1.0);
        t.extend(b.y_out(i, ix.passenger_modules(), -1.0));
        b.row(Some(18), format!("c18_{i}"), t, Sense::Eq, 0.0);
    }
    // (19) each origin used at most once; (20) tours end at the paired destination.
    for i in l.origins() {
        let mut t = Vec::new();
        for k in ks.clone() {
            t.extend(b.x_out(i, k, 1.0));
        }
        b.row(Some(19), format!("c19_{i}"), t, Sense::Le, 1.0);
        for k in ks.clone() {
            let mut t = b.x_out(i, k, 1.0);
            t.extend(b.x_in(l.destination_of(i), k, -1.0));
            b.row(Some(20), format!("c20_{i}_{k}"), t, Sense::Eq, 0.0);
        }
    }
    // (21) time propagation along used arcs.
    for i in b.all() {
        for j in b.all() {
            if i == j {
                continue;
            }
            for k in ks.clone() {
                b.row(
                    Some(21),
                    format!("c21_{i}_{j}_{k}"),
                    vec![(ix.s(i, k), 1.0), (ix.s(j, k), -1.0), (ix.x(i, j, k), zeta)],
                    Sense::Le,
                    zeta - inst.t(i, j),
                );
            }
        }
    }
    // (22) pickup before drop-off.
    for i in l.pickups() {
        let d = i + l.h_r;
        for k in ks.clone() {
            let mut t = vec![(ix.s(i, k), 1.0), (ix.s(d, k), -1.0)];
            t.extend(b.x_out(i, k, zeta));
            b.row(
                Some(22),
                format!("c22_{i}_{k}"),
                t,
                Sense::Le,
                zeta - inst.t(i, d),
            );
        }
    }
    // (23)/(24) time windows.
    for i in b.all() {
        let w = inst.node(i).window;
        for k in ks.clone() {
            b.row(
                Some(23),
                format!("c23_{i}_{k}"),
                vec![(ix.s(i, k), 1.0)],
                Sense::Ge,
                w.open,
            );
            b.row(
                Some(24),
                format!("c24_{i}_{k}"),
                vec![(ix.s(i, k), 1.0)],
                Sense::Le,
                w.close,
            );
        }
    }
    // (25) range, in metres.
    for k in ks.clone() {
        let mut t = Vec::new();
        for i in b.all() {
            for j in b.all() {
                let w = inst.dist(i, j);
                if w != 0.0 {
                    t.push((ix.x(i, j, k), w));
                }
            }
        }
        if t.is_empty() {
            t.push((ix.x(1, 1, k), 0.0));
        }
        b.row(Some(25), format!("c25_{k}"), t, Sense::Le, inst.range_m());
    }
    // (26)/(27) capacities.
    for i in l.pickups().chain(l.dropoffs()) {
        let (eq, cap) = match inst.node(i).class {
            NodeClass::PickupPassenger | NodeClass::DropoffPassenger => (26, fleet.gamma_p),
            _ => (27, fleet.gamma_f),
        };
        b.row(
            Some(eq),
            format!("c{eq}_{i}"),
            vec![(ix.c(i), 1.0)],
            Sense::Le,
            f64::from(cap),
        );
    }
    // (28) load propagation.
    for i in b.all() {
        for j in l.pickups().chain(l.dropoffs()) {
            let q = f64::from(inst.node(j).demand);
            for m in ix.modules() {
                b.row(
                    Some(28),
                    format!("c28_{i}_{j}_{m}"),
                    vec![(ix.c(j), 1.0), (ix.c(i), -1.0), (ix.y(i, j, m), -load_m)],
                    Sense::Ge,
                    q - load_m,
                );
            }
        }
    }
    // (29) empty modules at origins and service depots.
    for i in l.origins().chain(l.service_depots()) {
        b.row(
            Some(29),
            format!("c29_{i}"),
            vec![(ix.c(i), 1.0)],
            Sense::Eq,
            0.0,
        );
    }
    // (30) modules per platform = departures from origins and service depots.
    for k in ks.clone() {
        let mut t: Vec<(usize, f64)> = (1..=n).map(|u| (ix.e(k, u), u as f64)).collect();
        for i in l.origins().chain(l.service_depots()) {
            t.extend(b.x_out(i, k, -1.0));
        }
        b.row(Some(30), format!("c30_{k}"), t, Sense::Eq, 0.0);
    }
    // (31) a platform leaves each physical depot at most once.
    for depot in 0..l.n_depots {
        for k in ks.clone() {
            let mut t = Vec::new();
            for o in l.depot_group(depot) {
                t.extend(b.x_out(o, k, 1.0));
            }
            b.row(
                Some(31),
                format!("c31_{}_{k}", depot + 1),
                t,
                Sense::Le,
                1.0,
            );
        }
    }
    // (32)/(33) no loops.
    for i in b.all() {
        b.forbid_x(32, i, i);
        b.forbid_y(33, i, i);
    }
    // (34)/(35) nothing leaves a destination.
    for i in l.destinations() {
        let mut t = Vec::new();
        for k in ks.clone() {
            t.extend(b.x_out(i, k, 1.0));
        }
        b.row(Some(34), format!("c34_{i}"), t, Sense::Eq, 0.0);
        let t = b.y_out(i, ix.modules(), 1.0);
        b.row(Some(35), format!("c35_{i}"), t, Sense::Eq, 0.0);
    }
    // (36)-(43) excluded arc classes.
    for i in l.pickups() {
        for j in l.service_depots().chain(l.destinations()) {
            b.forbid_x(36, i, j);
            b.forbid_y(37, i, j);
        }
    }
    for i in l.service_depots().chain(l.origins()) {
        for j in l.dropoffs() {
            b.forbid_x(38, i, j);
            b.forbid_y(39, i, j);
        }
    }
    for i in l.service_depots() {
        for j in l.service_depots() {
            b.forbid_x(40, i, j);
            b.forbid_y(41, i, j);
        }
    }
    for i in l.origins() {
        for j in l.service_depots() {
            b.forbid_x(42, i, j);
        }
    }
    for i in l.service_depots() {
        for j in l.destinations() {
            b.forbid_y(43, i, j);
        }
    }
    // (44) unused destinations do not add trip time.
    for i in l.destinations() {
        let bo = inst.node(l.origin_of(i)).window.close;
        for k in ks.clone() {
            let mut t = vec![(ix.s(i, k), 1.0)];
            t.extend(b.x_in(i, k, zeta));
            b.row(Some(44), format!("c44_{i}_{k}"), t, Sense::Ge, bo);
        }
    }

    // Tightening rows that make the model accept exactly the routes of the
    // route-based representation.
    for k in ks.clone() {
        let mut t = Vec::new();
        for o in l.origins() {
            t.extend(b.x_out(o, k, 1.0));
        }
        b.row(None, format!("tour_{k}"), t, Sense::Le, 1.0);
    }
    for o in l.origins() {
        for j in b.all() {
            b.row(None, format!("into_{j}_{o}"), b.x_sum(j, o), Sense::Eq, 0.0);
        }
        let d = l.destination_of(o);
        b.row(None, format!("empty_{o}"), b.x_sum(o, d), Sense::Eq, 0.0);
    }
    let starts: Vec<usize> = l.origins().chain(l.service_depots()).collect();
    for (name, ms, cap) in [
        ("supply_p", ix.passenger_modules(), mu_p),
        ("supply_f", ix.freight_modules(), mu_f),
    ] {
        let mut t = Vec::new();
        for &i in &starts {
            t.extend(b.y_out(i, ms.clone(), 1.0));
        }
        if !t.is_empty() {
            b.row(None, name.to_string(), t, Sense::Le, cap as f64);
        }
    }
    if ix.has_g {
        for i in b.all() {
            for j in b.all() {
                if i == j || l.is_origin(j) {
                    continue;
                }
                let delta = if l.is_service_depot(j) { 1.0 } else { 0.0 };
                let mut up = vec![(ix.g(j), 1.0), (ix.g(i), -1.0)];
                up.extend(b.x_sum(i, j).into_iter().map(|(v, _)| (v, segment_m)));
                b.row(
                    None,
                    format!("gup_{i}_{j}"),
                    up,
                    Sense::Le,
                    delta + segment_m,
                );
                let mut lo = vec![(ix.g(j), 1.0), (ix.g(i), -1.0)];
                lo.extend(b.x_sum(i, j).into_iter().map(|(v, _)| (v, -segment_m)));
                b.row(
                    None,
                    format!("glo_{i}_{j}"),
                    lo,
                    Sense::Ge,
                    delta - segment_m,
                );
            }
        }
        for i in l.pickups() {
            b.row(
                None,
                format!("gpair_{i}"),
                vec![(ix.g(i), 1.0), (ix.g(i + l.h_r), -1.0)],
                Sense::Eq,
                0.0,
            );
        }
    }

    Ok(MilpModel {
        index: ix,
        vars,
        objective,
        objective_constant,
        rows: b.rows,
        zeta,
        load_m,
        segment_m,
    })
}
