use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand};
use ssmp::{format_amount, generate_one, Instance, Solution};
use ssmp_cli::{
    aggregate, aggregate_csv, build_jobs, exit_code, load_suite, make_record, parse_stem, run_jobs,
    run_solver, runs_csv, RunStatus, SolverEntry, SolverSpec,
};

#[derive(Parser)]
#[command(
    name = "ssmp",
    version,
    about = "Subset-sum matching: generate benchmarks, run solvers, verify solutions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate instance files from the [[configs]] entries of a suite file
    Gen {
        /// Suite TOML
        #[arg(long)]
        config: PathBuf,
        /// Directory for the instance JSON files
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Run one solver on one instance file; prints a run record as JSON
    Solve {
        /// Instance JSON file
        #[arg(long)]
        instance: PathBuf,
        /// greedy-search | greedy-dp | exact | oracle
        #[arg(long)]
        solver: String,
        /// Cache split for greedy-search (defaults to a balanced split)
        #[arg(long)]
        r: Option<usize>,
        /// Scaling numerator for greedy-dp (defaults per instance)
        #[arg(long)]
        rho: Option<i64>,
        /// none | dp; dp runs greedy-dp first and floors the exact solver
        #[arg(long, default_value = "none")]
        warm_start: String,
        /// Wall-clock budget in seconds
        #[arg(long)]
        time_limit: Option<f64>,
        /// Also write the solution JSON here
        #[arg(long)]
        solution_out: Option<PathBuf>,
    },
    /// Run every (instance, solver) pair of a suite and write result tables
    Bench {
        /// Suite TOML with [[configs]] and [[solvers]]
        #[arg(long)]
        config: PathBuf,
        /// Directory for records.jsonl, runs.csv, aggregate.csv, meta.json
        #[arg(long)]
        out_dir: PathBuf,
        /// Worker threads; bare --parallel uses all cores. Runs contend for
        /// cores, so keep the sequential default when timings matter.
        #[arg(long, value_name = "WORKERS", num_args = 0..=1, default_missing_value = "0")]
        parallel: Option<usize>,
        /// Override the suite's per-run time limit
        #[arg(long)]
        time_limit: Option<f64>,
    },
    /// Check a solution file against its instance
    Verify {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        solution: PathBuf,
        /// Weight of the match count in the reported objective
        #[arg(long, default_value_t = 1)]
        k_weight: i64,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Gen { config, out_dir } => gen(&config, &out_dir),
        Command::Solve { instance, solver, r, rho, warm_start, time_limit, solution_out } => {
            solve(&instance, &solver, r, rho, &warm_start, time_limit, solution_out.as_deref())
        }
        Command::Bench { config, out_dir, parallel, time_limit } => {
            bench(&config, &out_dir, parallel, time_limit)
        }
        Command::Verify { instance, solution, k_weight } => verify(&instance, &solution, k_weight),
    }
}

fn read(path: &std::path::Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn gen(config: &std::path::Path, out_dir: &std::path::Path) -> Result<u8> {
    let suite = load_suite(&read(config)?)?;
    if suite.configs.is_empty() {
        bail!("suite has no [[configs]] entries");
    }
    fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let mut written = 0;
    for cfg in &suite.configs {
        for i in 0..cfg.count {
            let path = out_dir.join(format!("{}.json", cfg.file_stem(i)));
            fs::write(&path, generate_one(cfg, i).to_json())
                .with_context(|| format!("writing {}", path.display()))?;
            written += 1;
        }
    }
    println!("wrote {written} instances to {}", out_dir.display());
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn solve(
    instance_path: &std::path::Path,
    solver: &str,
    r: Option<usize>,
    rho: Option<i64>,
    warm_start: &str,
    time_limit: Option<f64>,
    solution_out: Option<&std::path::Path>,
) -> Result<u8> {
    let instance =
        Instance::from_json(&read(instance_path)?).map_err(|e| anyhow!("bad instance: {e}"))?;
    let spec = SolverSpec::from_entry(&SolverEntry {
        name: solver.to_string(),
        label: None,
        r,
        rho,
        warm_start: Some(warm_start.to_string()),
        time_limit,
    })?;
    let stem = instance_path.file_stem().and_then(|s| s.to_str()).unwrap_or("instance").to_string();
    let (family, param, seed) = match parse_stem(&stem) {
        Some((family, _, _, param, seed, _)) => (family, param, Some(seed)),
        None => ("-".to_string(), "-".to_string(), None),
    };
    let outcome = run_solver(&instance, &spec, None);
    let record = make_record(
        &stem,
        &family,
        instance.m(),
        instance.n(),
        &param,
        &format_amount(instance.epsilon(), instance.digits()),
        seed,
        &spec,
        None,
        &outcome,
    );
    println!("{}", serde_json::to_string(&record)?);
    if let Some(path) = solution_out {
        match &outcome.solution {
            Some(s) => fs::write(path, s.to_json())
                .with_context(|| format!("writing {}", path.display()))?,
            None => eprintln!("no solution produced; {} not written", path.display()),
        }
    }
    Ok(exit_code(&outcome) as u8)
}

fn bench(
    config: &std::path::Path,
    out_dir: &std::path::Path,
    parallel: Option<usize>,
    time_limit: Option<f64>,
) -> Result<u8> {
    let mut suite = load_suite(&read(config)?)?;
    if let Some(limit) = time_limit {
        suite.time_limit = Some(limit);
    }
    if suite.configs.is_empty() || suite.solvers.is_empty() {
        bail!("a bench suite needs both [[configs]] and [[solvers]] entries");
    }
    let workers = match parallel {
        None => 1,
        Some(0) => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
        Some(n) => n,
    };
    fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;

    let jobs = build_jobs(&suite);
    let records = run_jobs(&suite, &jobs, workers);

    let mut jsonl = String::new();
    for record in &records {
        jsonl.push_str(&serde_json::to_string(record)?);
        jsonl.push('\n');
    }
    fs::write(out_dir.join("records.jsonl"), jsonl)?;
    fs::write(out_dir.join("runs.csv"), runs_csv(&records))?;
    let labels: Vec<String> = suite.solvers.iter().map(|s| s.label.clone()).collect();
    fs::write(
        out_dir.join("aggregate.csv"),
        aggregate_csv(&aggregate(&records, &labels), &labels),
    )?;
    let meta = serde_json::json!({
        "jobs": jobs.len(),
        "workers": workers,
        "time_limit": suite.time_limit,
        "solvers": labels,
        "note": if workers > 1 {
            "parallel runs contend for cores; treat runtimes as indicative"
        } else {
            "sequential run; runtimes are directly comparable"
        },
    });
    fs::write(out_dir.join("meta.json"), serde_json::to_string_pretty(&meta)?)?;

    let timed_out = records.iter().filter(|r| r.status == RunStatus::TimedOut).count();
    let failed = records.iter().filter(|r| r.status == RunStatus::Failed).count();
    println!(
        "{} runs ({timed_out} timed out, {failed} failed) -> {}",
        records.len(),
        out_dir.display()
    );
    Ok(0)
}

fn verify(instance: &std::path::Path, solution: &std::path::Path, k_weight: i64) -> Result<u8> {
    let instance =
        Instance::from_json(&read(instance)?).map_err(|e| anyhow!("bad instance: {e}"))?;
    let sol = Solution::from_json(&read(solution)?, instance.m(), instance.n())
        .map_err(|e| anyhow!("bad solution: {e}"))?;
    match instance.check_solution(&sol) {
        Ok(()) => {
            let objective =
                instance.objective(&sol, k_weight).expect("checked solutions have an objective");
            println!("ok: {} matches, objective {objective}", sol.matches.len());
            Ok(0)
        }
        Err(violation) => {
            println!("invalid: {violation}");
            Ok(1)
        }
    }
}
