//! Independent seeded searches over one shared instance.

use std::time::{Duration, Instant};

use crate::alns::{solve, AlnsOutcome, AlnsParams};
use crate::instance::Instance;
use crate::solution::{check_feasibility, Solution};
use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    /// Runs on a thread pool when built with the `parallel` feature,
    /// sequentially otherwise.
    #[default]
    Parallel,
    Sequential,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EnsembleConfig {
    pub runs: usize,
    /// Upper bound on concurrent runs; `None` uses all cores.
    pub jobs: Option<usize>,
    pub execution: Execution,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub run: usize,
    pub seed: u64,
    pub outcome: AlnsOutcome,
    pub wall: Duration,
}

fn one_run(
    inst: &Instance,
    params: &AlnsParams,
    init: Option<&Solution>,
    run: usize,
) -> Result<RunResult, Error> {
    let mut p = *params;
    p.search.rng_seed = params.search.rng_seed.wrapping_add(run as u64);
    let start = Instant::now();
    let outcome = solve(inst, &p, init.cloned())?;
    Ok(RunResult {
        run,
        seed: p.search.rng_seed,
        outcome,
        wall: start.elapsed(),
    })
}

/// Runs `cfg.runs` searches with seeds `rng_seed + run`. Results are ordered by
/// run index whatever the completion order.
pub fn run_ensemble(
    inst: &Instance,
    params: &AlnsParams,
    init: Option<&Solution>,
    cfg: EnsembleConfig,
) -> Result<Vec<RunResult>, Error> {
    params.validate()?;
    if let Some(init) = init {
        let report = check_feasibility(inst, init);
        if !report.is_feasible() {
            return Err(Error::Infeasible(report));
        }
    }
    match cfg.execution {
        Execution::Sequential => (0..cfg.runs)
            .map(|r| one_run(inst, params, init, r))
            .collect(),
        Execution::Parallel => parallel(inst, params, init, cfg),
    }
}

#[cfg(feature = "parallel")]
fn parallel(
    inst: &Instance,
    params: &AlnsParams,
    init: Option<&Solution>,
    cfg: EnsembleConfig,
) -> Result<Vec<RunResult>, Error> {
    use rayon::prelude::*;
    let work = || {
        (0..cfg.runs)
            .into_par_iter()
            .map(|r| one_run(inst, params, init, r))
            .collect::<Result<Vec<_>, _>>()
    };
    match cfg.jobs {
        Some(jobs) => rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build()
            .map_err(|e| Error::Schema(format!("thread pool: {e}")))?
            .install(work),
        None => work(),
    }
}

#[cfg(not(feature = "parallel"))]
fn parallel(
    inst: &Instance,
    params: &AlnsParams,
    init: Option<&Solution>,
    cfg: EnsembleConfig,
) -> Result<Vec<RunResult>, Error> {
    (0..cfg.runs)
        .map(|r| one_run(inst, params, init, r))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::poc_instance;

    #[test]
    fn parallel_matches_sequential() {
        let inst = poc_instance(1).unwrap();
        let mut params = AlnsParams::default();
        params.search.lambda = 200;
        params.search.lambda_min = 50;
        params.search.omega = 20;
        params.search.rng_seed = 5;
        let cfg = |execution, jobs| EnsembleConfig {
            runs: 6,
            jobs,
            execution,
        };
        let a = run_ensemble(&inst, &params, None, cfg(Execution::Sequential, None)).unwrap();
        let b = run_ensemble(&inst, &params, None, cfg(Execution::Parallel, Some(3))).unwrap();
        assert_eq!(a.len(), 6);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.run, y.run);
            assert_eq!(x.seed, 5 + x.run as u64);
            assert_eq!(x.outcome.trace, y.outcome.trace);
            assert_eq!(x.outcome.best, y.outcome.best);
        }
    }
}
