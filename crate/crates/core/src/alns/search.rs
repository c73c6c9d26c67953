use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::bank::{sa_accept, OperatorBank, OperatorList};
use super::config::{AlnsParams, SearchConfig};
use crate::destroy::DestroyOperator;
use crate::instance::Instance;
use crate::repair::{first_fit_insert, RemovalMemory, RepairOperator};
use crate::solution::{check_feasibility, evaluate, ObjectiveBreakdown, Solution};
use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Score {
    NewBest,
    Improved,
    Accepted,
    Rejected,
}

impl Score {
    pub fn value(self, cfg: &SearchConfig) -> f64 {
        match self {
            Score::NewBest => cfg.sigma1,
            Score::Improved => cfg.sigma2,
            Score::Accepted => cfg.sigma3,
            Score::Rejected => cfg.sigma4,
        }
    }

    /// Outcome of one iteration given the objectives involved.
    pub fn classify<R: Rng + ?Sized>(
        best: f64,
        current: f64,
        candidate: f64,
        temperature: f64,
        rng: &mut R,
    ) -> Score {
        if candidate < best {
            Score::NewBest
        } else if sa_accept(current, candidate, temperature, rng) {
            if candidate < current {
                Score::Improved
            } else {
                Score::Accepted
            }
        } else {
            Score::Rejected
        }
    }

    pub fn accepted(self) -> bool {
        self != Score::Rejected
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub iteration: usize,
    /// Current objective after the accept step.
    pub z: f64,
    pub best: f64,
    pub temperature: f64,
    pub destroy: usize,
    pub repair: usize,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SearchTrace {
    /// Objective of the initial solution.
    pub z0: f64,
    pub rows: Vec<TraceRow>,
}

impl SearchTrace {
    pub const CSV_HEADER: &'static str = "iteration,z,best,temperature,destroy,repair,accepted";

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(64 * (self.rows.len() + 1));
        out.push_str(Self::CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.iteration,
                r.z,
                r.best,
                r.temperature,
                r.destroy,
                r.repair,
                u8::from(r.accepted)
            );
        }
        out
    }

    /// `z_0, z_1, …, z_i`.
    pub fn objectives(&self) -> Vec<f64> {
        std::iter::once(self.z0)
            .chain(self.rows.iter().map(|r| r.z))
            .collect()
    }
}

/// Convergence test after `i` completed iterations, `z[j]` being the objective
/// after iteration `j` (`z[0]` initial). Stops at `lambda`, or from `lambda_min`
/// on once the relative change between the windows `[i−2ω, i−ω]` and `[i−ω, i]`
/// (both inclusive) is at most `epsilon`.
pub fn should_terminate(z: &[f64], cfg: &SearchConfig, i: usize) -> bool {
    if i >= cfg.lambda {
        return true;
    }
    if i < cfg.lambda_min || i < 2 * cfg.omega {
        return false;
    }
    let w = cfg.omega;
    let old: f64 = z[i - 2 * w..=i - w].iter().sum();
    let new: f64 = z[i - w..=i].iter().sum();
    old / new - 1.0 <= cfg.epsilon
}

/// What an observer sees after each iteration.
pub struct IterationInfo<'a> {
    pub iteration: usize,
    pub current: &'a Solution,
    pub current_obj: f64,
    pub best_obj: f64,
    pub score: Score,
    pub temperature: f64,
}

#[derive(Debug, Clone)]
pub struct AlnsOutcome {
    pub best: Solution,
    pub objective: ObjectiveBreakdown,
    pub trace: SearchTrace,
    pub iterations: usize,
    /// Iteration at which the returned best was found (0 for the initial solution).
    pub best_iteration: usize,
    pub bank: OperatorBank,
}

/// Builds a feasible start by first-fit insertion into the all-unserved solution.
pub fn initial_solution<R: Rng + ?Sized>(inst: &Instance, rng: &mut R) -> Solution {
    first_fit_insert(inst, Solution::empty(inst), rng)
}

/// Seeds the generator from the configuration and runs the search, starting
/// from `init` or from a first-fit construction.
pub fn solve(
    inst: &Instance,
    params: &AlnsParams,
    init: Option<Solution>,
) -> Result<AlnsOutcome, Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(params.search.rng_seed);
    let init = match init {
        Some(s) => s,
        None => initial_solution(inst, &mut rng),
    };
    run_alns(inst, params, init, &mut rng)
}

pub fn run_alns<R: Rng + ?Sized>(
    inst: &Instance,
    params: &AlnsParams,
    init: Solution,
    rng: &mut R,
) -> Result<AlnsOutcome, Error> {
    run_alns_observed(inst, params, init, rng, |_| {})
}

/// The search loop with a callback after every iteration.
pub fn run_alns_observed<R, F>(
    inst: &Instance,
    params: &AlnsParams,
    init: Solution,
    rng: &mut R,
    mut observer: F,
) -> Result<AlnsOutcome, Error>
where
    R: Rng + ?Sized,
    F: FnMut(&IterationInfo<'_>),
{
    let report = check_feasibility(inst, &init);
    if !report.is_feasible() {
        return Err(Error::Infeasible(report));
    }
    let cfg = &params.search;
    let mut bank = OperatorBank::new(DestroyOperator::ALL.len(), RepairOperator::ALL.len());
    let mut memory = RemovalMemory::new(inst);

    let mut current = init;
    current.normalize();
    let mut current_obj = evaluate(inst, &current).total;
    let mut best = current.clone();
    let mut best_obj = current_obj;
    let mut best_iteration = 0;
    let mut temperature = cfg.t_start;
    let mut z = vec![current_obj];
    let mut trace = SearchTrace {
        z0: current_obj,
        rows: Vec::new(),
    };

    let mut i = 0;
    while !should_terminate(&z, cfg, i) {
        i += 1;
        let d = bank.select(OperatorList::Destroy, rng);
        let r = bank.select(OperatorList::Repair, rng);
        memory.record(inst, &current);
        let partial = DestroyOperator::ALL[d].apply(inst, current.clone(), &params.removal, rng);
        let candidate = RepairOperator::ALL[r].apply(inst, partial, &memory, rng);
        let cand_obj = evaluate(inst, &candidate).total;

        let score = Score::classify(best_obj, current_obj, cand_obj, temperature, rng);
        if score.accepted() {
            current = candidate;
            current_obj = cand_obj;
        }
        if score == Score::NewBest {
            best = current.clone();
            best_obj = current_obj;
            best_iteration = i;
        }
        let s = score.value(cfg);
        bank.update(OperatorList::Destroy, d, s, cfg.delta);
        bank.update(OperatorList::Repair, r, s, cfg.delta);

        z.push(current_obj);
        trace.rows.push(TraceRow {
            iteration: i,
            z: current_obj,
            best: best_obj,
            temperature,
            destroy: d,
            repair: r,
            accepted: score.accepted(),
        });
        observer(&IterationInfo {
            iteration: i,
            current: &current,
            current_obj,
            best_obj,
            score,
            temperature,
        });
        temperature = (temperature * cfg.nu).max(cfg.t_end);
    }

    Ok(AlnsOutcome {
        objective: evaluate(inst, &best),
        best,
        trace,
        iterations: i,
        best_iteration,
        bank,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{CostParams, DepotSpec, FleetParams, RequestKind, RequestSpec};

    fn cfg(lambda: usize, lambda_min: usize, omega: usize) -> SearchConfig {
        SearchConfig {
            lambda,
            lambda_min,
            omega,
            ..SearchConfig::default()
        }
    }

    #[test]
    fn termination_rule() {
        let c = cfg(100, 20, 5);
        let flat = vec![3.0; 101];
        assert!(!should_terminate(&flat, &c, 19));
        assert!(should_terminate(&flat, &c, 20));
        let falling: Vec<f64> = (0..101).map(|j| 1000.0 * 0.9f64.powi(j)).collect();
        assert!(!should_terminate(&falling, &c, 50));
        assert!(should_terminate(&falling, &c, 100));
        let short = cfg(100, 5, 5);
        assert!(!should_terminate(&flat, &short, 9));
        assert!(should_terminate(&flat, &short, 10));
    }

    #[test]
    fn score_branches() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(
            Score::classify(10.0, 12.0, 9.0, 1.0, &mut rng),
            Score::NewBest
        );
        assert_eq!(
            Score::classify(10.0, 12.0, 11.0, 1.0, &mut rng),
            Score::Improved
        );
        assert_eq!(
            Score::classify(10.0, 12.0, 12.0, 1.0, &mut rng),
            Score::Accepted
        );
        assert_eq!(
            Score::classify(10.0, 10.0, 10.0, 1.0, &mut rng),
            Score::Accepted
        );
        assert_eq!(
            Score::classify(10.0, 12.0, 1e6, 1e-3, &mut rng),
            Score::Rejected
        );
        let c = SearchConfig::default();
        assert_eq!(
            [
                Score::NewBest,
                Score::Improved,
                Score::Accepted,
                Score::Rejected
            ]
            .map(|s| s.value(&c)),
            [7.0, 2.0, 9.0, 1.0]
        );
    }

    fn tiny() -> Instance {
        let requests = (0..4)
            .map(|i| {
                let kind = if i % 2 == 0 {
                    RequestKind::Passenger
                } else {
                    RequestKind::Freight
                };
                RequestSpec::new(kind, [i as f64, 1.0], [i as f64, 3.0])
            })
            .collect();
        Instance::build(
            requests,
            vec![DepotSpec::at([0.0, 0.0])],
            vec![],
            FleetParams {
                kappa: 3,
                ..FleetParams::default()
            },
            CostParams::default(),
        )
        .unwrap()
    }

    #[test]
    fn zero_budget_returns_init() {
        let inst = tiny();
        let mut params = AlnsParams::default();
        params.search.lambda = 0;
        params.search.lambda_min = 0;
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let init = initial_solution(&inst, &mut rng);
        let out = run_alns(&inst, &params, init.clone(), &mut rng).unwrap();
        assert_eq!(out.best, init);
        assert_eq!(out.iterations, 0);
        assert!(out.trace.rows.is_empty());
    }

    #[test]
    fn best_is_monotone_and_reproducible() {
        let inst = tiny();
        let mut params = AlnsParams::default();
        params.search.lambda = 300;
        params.search.lambda_min = 100;
        params.search.omega = 50;
        params.search.rng_seed = 9;
        let a = solve(&inst, &params, None).unwrap();
        let b = solve(&inst, &params, None).unwrap();
        assert_eq!(a.trace, b.trace);
        assert_eq!(a.best, b.best);
        for w in a.trace.rows.windows(2) {
            assert!(w[1].best <= w[0].best);
        }
        assert!(a.objective.total <= a.trace.z0);
    }

    #[test]
    fn infeasible_start_is_rejected() {
        let inst = tiny();
        let mut bad = Solution::empty(&inst);
        bad.unserved.clear();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(
            run_alns(&inst, &AlnsParams::default(), bad, &mut rng),
            Err(Error::Infeasible(_))
        ));
    }
}
