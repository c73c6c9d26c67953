use std::collections::{BTreeMap, BTreeSet};

use crate::instance::Instance;
use crate::solution::{Route, Solution};
use crate::Error;

const ROUND_TOL: f64 = 1e-5;

/// A parsed variable name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum VarName {
    X(usize, usize, usize),
    Y(usize, usize, usize),
    E(usize, usize),
    S(usize, usize),
    C(usize),
    G(usize),
}

impl VarName {
    pub fn parse(s: &str) -> Option<Self> {
        let mut parts = s.split('_');
        let head = parts.next()?;
        let idx: Vec<usize> = parts.map(|p| p.parse().ok()).collect::<Option<_>>()?;
        match (head, idx.as_slice()) {
            ("x", &[i, j, k]) => Some(Self::X(i, j, k)),
            ("y", &[i, j, m]) => Some(Self::Y(i, j, m)),
            ("e", &[k, u]) => Some(Self::E(k, u)),
            ("s", &[i, k]) => Some(Self::S(i, k)),
            ("c", &[i]) => Some(Self::C(i)),
            ("g", &[i]) => Some(Self::G(i)),
            _ => None,
        }
    }

    fn is_binary(self) -> bool {
        matches!(self, Self::X(..) | Self::Y(..) | Self::E(..))
    }
}

/// Reads `name value` lines from solver output. Lines that do not have this
/// shape, or whose name is not a model variable, are skipped.
pub fn parse_values(text: &str) -> Result<BTreeMap<VarName, f64>, Error> {
    let mut out = BTreeMap::new();
    for line in text.lines() {
        let mut tok = line.split_whitespace();
        let (Some(name), Some(value)) = (tok.next(), tok.next()) else {
            continue;
        };
        let (Some(var), Ok(value)) = (VarName::parse(name), value.parse::<f64>()) else {
            continue;
        };
        let value = if var.is_binary() {
            let r = value.round();
            if (value - r).abs() > ROUND_TOL || !(r == 0.0 || r == 1.0) {
                return Err(Error::Import(format!("{name} = {value} is not binary")));
            }
            r
        } else {
            value
        };
        out.insert(var, value);
    }
    Ok(out)
}

/// Rebuilds a route-based solution from the arc variables `x`.
pub fn solution_from_values(
    inst: &Instance,
    values: &BTreeMap<VarName, f64>,
) -> Result<Solution, Error> {
    let l = inst.layout();
    let n = inst.n_nodes();
    // (platform, from) -> to
    let mut succ: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for (&var, &v) in values {
        let VarName::X(i, j, k) = var else { continue };
        if v != 1.0 {
            continue;
        }
        if i == 0 || j == 0 || i > n || j > n || k == 0 || k > l.kappa {
            return Err(Error::Import(format!("arc x_{i}_{j}_{k} is out of range")));
        }
        if succ.insert((k, i), j).is_some() {
            return Err(Error::Import(format!(
                "node {i} is left twice by platform {k}"
            )));
        }
    }
    let mut routes = Vec::new();
    let mut used = BTreeSet::new();
    for k in 1..=l.kappa {
        for o in l.origins() {
            if !succ.contains_key(&(k, o)) {
                continue;
            }
            let mut visits = vec![o];
            let mut at = o;
            used.insert((k, o));
            while let Some(&next) = succ.get(&(k, at)) {
                if visits.contains(&next) {
                    return Err(Error::Import(format!("platform {k} revisits node {next}")));
                }
                visits.push(next);
                if l.is_destination(next) {
                    break;
                }
                used.insert((k, next));
                at = next;
            }
            if !l.is_destination(*visits.last().unwrap()) {
                return Err(Error::Import(format!(
                    "tour of platform {k} from {o} does not end at a destination"
                )));
            }
            routes.push(Route::new(k, visits));
        }
    }
    if let Some(&(k, i)) = succ.keys().find(|key| !used.contains(key)) {
        return Err(Error::Import(format!(
            "arc from node {i} of platform {k} is not connected to an origin"
        )));
    }
    let visited: BTreeSet<usize> = routes
        .iter()
        .flat_map(|r| r.visits.iter().copied())
        .collect();
    let unserved = (0..inst.n_requests())
        .filter(|&r| !visited.contains(&l.pickup(r)))
        .collect();
    let mut sol = Solution { routes, unserved };
    sol.normalize();
    Ok(sol)
}

/// Parses solver output and rebuilds the solution.
pub fn import_solution(inst: &Instance, text: &str) -> Result<Solution, Error> {
    solution_from_values(inst, &parse_values(text)?)
}
