use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};

use mppdp::alns::AlnsParams;
use mppdp::ensemble::{run_ensemble, EnsembleConfig, Execution};
use mppdp::milp::{brute_force_solve, export_lp, import_solution, OracleLimits, DEFAULT_NODE_CAP};
use mppdp::report::{compare, compare_csv, parse_manifest, parse_rows, report_csv};
use mppdp::scenario::{
    generate_scenario, manifest_row, scenario_grid, ScenarioConfig, MANIFEST_HEADER,
};
use mppdp::{check_feasibility, evaluate, Instance, Solution};

#[derive(Parser)]
#[command(
    name = "mppdp",
    version,
    about = "Multi-purpose pickup and delivery solver"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate scenario instances and a manifest.
    Generate(GenerateArgs),
    /// Run the search, optionally as a seeded ensemble.
    Solve(SolveArgs),
    /// Check a solution and print its objective.
    Verify {
        instance: PathBuf,
        solution: PathBuf,
    },
    /// Write the mixed-integer model in LP format.
    ExportMilp {
        instance: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = DEFAULT_NODE_CAP)]
        node_cap: usize,
    },
    /// Read `name value` solver output back into a solution.
    ImportSolution {
        instance: PathBuf,
        values: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve a small instance exactly.
    Oracle {
        instance: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = OracleLimits::default().max_requests)]
        max_requests: usize,
        #[arg(long, default_value_t = OracleLimits::default().max_platforms)]
        max_platforms: usize,
    },
    /// Aggregate run reports per (spatial, tw, n_sd) cell.
    Compare {
        #[arg(long)]
        manifest: PathBuf,
        /// Report CSV files written by `solve`.
        #[arg(required = true)]
        reports: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct GenerateArgs {
    /// Scenario config JSON.
    #[arg(long, required_unless_present = "grid", conflicts_with = "grid")]
    config: Option<PathBuf>,
    /// Generate the full 54-cell grid instead of one scenario.
    #[arg(long)]
    grid: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 50)]
    passengers: usize,
    #[arg(long, default_value_t = 50)]
    freight: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SolveArgs {
    instance: PathBuf,
    /// JSON object overriding search or removal parameters by name.
    #[arg(long)]
    params: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 1)]
    ensemble: usize,
    /// Maximum concurrent runs.
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    warm_start: Option<PathBuf>,
    /// Trace CSV; with an ensemble each run writes `<stem>.run<k>.<ext>`.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long)]
    max_iterations: Option<usize>,
    /// Best solution of the ensemble.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report CSV; printed to stdout when absent.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Scenario id written in the report (defaults to the file stem).
    #[arg(long)]
    scenario_id: Option<String>,
}

/// Exit status 1: infeasible input or failed verification. 2: usage or schema.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        let error = e.into();
        let code = match error.downcast_ref::<mppdp::Error>() {
            Some(mppdp::Error::Infeasible(_)) => 1,
            _ => 2,
        };
        Self { code, error }
    }
}

type Result<T> = std::result::Result<T, Failure>;

fn read(path: &Path) -> Result<String> {
    Ok(fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?)
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    Ok(fs::write(path, text).with_context(|| format!("writing {}", path.display()))?)
}

fn load_instance(path: &Path) -> Result<Instance> {
    Ok(
        Instance::from_json(&read(path)?)
            .with_context(|| format!("instance {}", path.display()))?,
    )
}

fn load_solution(inst: &Instance, path: &Path) -> Result<Solution> {
    Ok(Solution::from_json(inst, &read(path)?)
        .with_context(|| format!("solution {}", path.display()))?)
}

fn generate(a: &GenerateArgs) -> Result<()> {
    let configs = if a.grid {
        scenario_grid(a.seed, a.passengers, a.freight)
    } else {
        let path = a
            .config
            .as_ref()
            .expect("clap enforces --config without --grid");
        let cfg: ScenarioConfig = serde_json::from_str(&read(path)?)
            .with_context(|| format!("scenario config {}", path.display()))?;
        vec![cfg]
    };
    let mut manifest = format!("{MANIFEST_HEADER}\n");
    for cfg in &configs {
        let id = cfg.grid_id();
        let spec = generate_scenario(cfg).map_err(|e| anyhow!("scenario config: {e}"))?;
        let inst = spec.build()?;
        let file = format!("scenario_{id:02}.json");
        write(&a.out.join(&file), &inst.to_json())?;
        manifest.push_str(&manifest_row(cfg, id, &file));
        manifest.push('\n');
    }
    write(&a.out.join("manifest.csv"), &manifest)?;
    eprintln!("wrote {} instance(s) to {}", configs.len(), a.out.display());
    Ok(())
}

fn run_trace_path(base: &Path, run: usize, runs: usize) -> PathBuf {
    if runs == 1 {
        return base.to_path_buf();
    }
    let stem = base
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let name = match base.extension() {
        Some(ext) => format!("{stem}.run{run}.{}", ext.to_string_lossy()),
        None => format!("{stem}.run{run}"),
    };
    base.with_file_name(name)
}

fn solve(a: &SolveArgs) -> Result<()> {
    let inst = load_instance(&a.instance)?;
    let mut params = AlnsParams::default();
    if let Some(p) = &a.params {
        params = params
            .with_overrides(&read(p)?)
            .with_context(|| format!("parameters {}", p.display()))?;
    }
    if let Some(seed) = a.seed {
        params.search.rng_seed = seed;
    }
    if let Some(max) = a.max_iterations {
        params.search.lambda = max;
        params.search.lambda_min = params.search.lambda_min.min(max);
    }
    params.validate()?;
    if a.ensemble == 0 {
        return Err(anyhow!("--ensemble must be at least 1").into());
    }
    let init = match &a.warm_start {
        Some(path) => {
            let sol = load_solution(&inst, path)?;
            let report = check_feasibility(&inst, &sol);
            if !report.is_feasible() {
                return Err(Failure {
                    code: 1,
                    error: anyhow!("warm start {} is infeasible:\n{report}", path.display()),
                });
            }
            Some(sol)
        }
        None => None,
    };
    let runs = run_ensemble(
        &inst,
        &params,
        init.as_ref(),
        EnsembleConfig {
            runs: a.ensemble,
            jobs: a.jobs,
            execution: Execution::Parallel,
        },
    )?;
    if let Some(base) = &a.trace {
        for r in &runs {
            write(
                &run_trace_path(base, r.run, runs.len()),
                &r.outcome.trace.to_csv(),
            )?;
        }
    }
    if let Some(out) = &a.out {
        let best = runs
            .iter()
            .min_by(|x, y| {
                x.outcome
                    .objective
                    .total
                    .total_cmp(&y.outcome.objective.total)
            })
            .expect("at least one run");
        write(out, &best.outcome.best.to_json(&inst))?;
    }
    let id = a.scenario_id.clone().unwrap_or_else(|| {
        a.instance
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default()
    });
    let csv = report_csv(&id, &runs);
    match &a.report {
        Some(path) => write(path, &csv)?,
        None => print!("{csv}"),
    }
    Ok(())
}

fn verify(instance: &Path, solution: &Path) -> Result<()> {
    let inst = load_instance(instance)?;
    let sol = load_solution(&inst, solution)?;
    let report = check_feasibility(&inst, &sol);
    println!("{}", serde_json::to_string_pretty(&evaluate(&inst, &sol))?);
    if report.is_feasible() {
        println!("feasible");
        Ok(())
    } else {
        Err(Failure {
            code: 1,
            error: anyhow!("infeasible:\n{report}"),
        })
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate(a) => generate(&a),
        Command::Solve(a) => solve(&a),
        Command::Verify { instance, solution } => verify(&instance, &solution),
        Command::ExportMilp {
            instance,
            out,
            node_cap,
        } => {
            let inst = load_instance(&instance)?;
            write(&out, &export_lp(&inst, node_cap)?)
        }
        Command::ImportSolution {
            instance,
            values,
            out,
        } => {
            let inst = load_instance(&instance)?;
            let sol = import_solution(&inst, &read(&values)?)?;
            write(&out, &sol.to_json(&inst))?;
            let report = check_feasibility(&inst, &sol);
            if report.is_feasible() {
                Ok(())
            } else {
                Err(Failure {
                    code: 1,
                    error: anyhow!("imported solution is infeasible:\n{report}"),
                })
            }
        }
        Command::Oracle {
            instance,
            out,
            max_requests,
            max_platforms,
        } => {
            let inst = load_instance(&instance)?;
            let res = brute_force_solve(
                &inst,
                OracleLimits {
                    max_requests,
                    max_platforms,
                },
            )?;
            println!("{}", serde_json::to_string_pretty(&res.objective)?);
            if let Some(out) = out {
                write(&out, &res.solution.to_json(&inst))?;
            }
            Ok(())
        }
        Command::Compare {
            manifest,
            reports,
            out,
        } => {
            let manifest = parse_manifest(&read(&manifest)?)?;
            let mut rows = Vec::new();
            for r in &reports {
                rows.extend(
                    parse_rows(&read(r)?).with_context(|| format!("report {}", r.display()))?,
                );
            }
            let csv = compare_csv(&compare(&manifest, &rows)?);
            match out {
                Some(path) => write(&path, &csv),
                None => {
                    print!("{csv}");
                    Ok(())
                }
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
