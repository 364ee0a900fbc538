//! Suite configs, solver dispatch, run records, and result tables for the
//! `ssmp` binary. Kept in a library so the pieces are unit-testable without
//! spawning the binary.

use std::collections::BTreeMap;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};
use ssmp::{
    format_amount, greedy_solve, optimal_oracle, parse_amount, solve_exact, Deadline,
    DecisionOutcome, DecisionSolver, DpConfig, DpSolver, ExactConfig, ExactStatus, Family,
    GenConfig, GreedyStatus, Instance, SearchConfig, SearchSolver, Solution, SolveError,
};

/// Suite file as written by the user: a list of instance configs crossed
/// with a list of solver entries.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteFile {
    /// Per-run wall-clock budget in seconds; solver entries may override.
    pub time_limit: Option<f64>,
    #[serde(default)]
    pub configs: Vec<ConfigEntry>,
    #[serde(default)]
    pub solvers: Vec<SolverEntry>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigEntry {
    pub m: usize,
    pub n: usize,
    /// Decimal string, e.g. "0.0001"; interpreted at the family's digits.
    pub epsilon: String,
    pub seed: u64,
    #[serde(default = "default_count")]
    pub count: usize,
    pub family: FamilyEntry,
}

fn default_count() -> usize {
    1
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum FamilyEntry {
    Integer { gamma: i64 },
    Real { low: String, high: String, digits: u32 },
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverEntry {
    pub name: String,
    /// Column label; defaults to `name`. Needed when the same solver
    /// appears twice with different knobs.
    pub label: Option<String>,
    pub r: Option<usize>,
    pub rho: Option<i64>,
    pub warm_start: Option<String>,
    pub time_limit: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolverKind {
    GreedySearch,
    GreedyDp,
    Exact,
    Oracle,
}

impl SolverKind {
    pub fn parse(name: &str) -> Result<Self> {
        Ok(match name {
            "greedy-search" => SolverKind::GreedySearch,
            "greedy-dp" => SolverKind::GreedyDp,
            "exact" => SolverKind::Exact,
            "oracle" => SolverKind::Oracle,
            other => bail!(
                "unknown solver {other:?}; expected greedy-search, greedy-dp, exact, or oracle"
            ),
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            SolverKind::GreedySearch => "greedy-search",
            SolverKind::GreedyDp => "greedy-dp",
            SolverKind::Exact => "exact",
            SolverKind::Oracle => "oracle",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WarmStart {
    None,
    /// Run greedy-dp first and hand its solution to the exact solver.
    Dp,
}

#[derive(Clone, Debug)]
pub struct SolverSpec {
    pub kind: SolverKind,
    pub label: String,
    pub r: Option<usize>,
    pub rho: Option<i64>,
    pub warm_start: WarmStart,
    pub time_limit: Option<f64>,
}

impl SolverSpec {
    pub fn from_entry(entry: &SolverEntry) -> Result<Self> {
        let kind = SolverKind::parse(&entry.name)?;
        let warm_start = match entry.warm_start.as_deref() {
            None | Some("none") => WarmStart::None,
            Some("dp") => WarmStart::Dp,
            Some(other) => bail!("unknown warm start {other:?}; expected none or dp"),
        };
        if warm_start != WarmStart::None && kind != SolverKind::Exact {
            bail!("warm_start only applies to the exact solver");
        }
        if entry.r.is_some() && kind != SolverKind::GreedySearch {
            bail!("r only applies to greedy-search");
        }
        if entry.rho.is_some() && !matches!(kind, SolverKind::GreedyDp | SolverKind::Exact) {
            bail!("rho only applies to greedy-dp (and exact warm starts)");
        }
        Ok(SolverSpec {
            kind,
            label: entry.label.clone().unwrap_or_else(|| entry.name.clone()),
            r: entry.r,
            rho: entry.rho,
            warm_start,
            time_limit: entry.time_limit,
        })
    }
}

/// A fully resolved suite: generator configs plus solver specs.
#[derive(Debug)]
pub struct Suite {
    pub time_limit: Option<f64>,
    pub configs: Vec<GenConfig>,
    pub solvers: Vec<SolverSpec>,
}

pub fn load_suite(text: &str) -> Result<Suite> {
    let file: SuiteFile = toml::from_str(text).context("suite file is not valid TOML")?;
    let mut configs = Vec::new();
    for entry in &file.configs {
        configs.push(gen_config(entry)?);
    }
    let mut solvers = Vec::new();
    for entry in &file.solvers {
        solvers.push(SolverSpec::from_entry(entry)?);
    }
    for (i, s) in solvers.iter().enumerate() {
        if solvers[..i].iter().any(|t| t.label == s.label) {
            bail!("duplicate solver label {:?}; set label = \"...\" to disambiguate", s.label);
        }
    }
    Ok(Suite { time_limit: file.time_limit, configs, solvers })
}

fn gen_config(entry: &ConfigEntry) -> Result<GenConfig> {
    let family = match &entry.family {
        FamilyEntry::Integer { gamma } => Family::Integer { gamma: *gamma },
        FamilyEntry::Real { low, high, digits } => Family::Real {
            low: parse_amount(low, *digits).context("bad family low")?,
            high: parse_amount(high, *digits).context("bad family high")?,
            digits: *digits,
        },
    };
    let cfg = GenConfig {
        m: entry.m,
        n: entry.n,
        family,
        epsilon: parse_amount(&entry.epsilon, entry.family_digits()).context("bad epsilon")?,
        seed: entry.seed,
        count: entry.count,
    };
    cfg.validate().map_err(|e| anyhow!("bad config: {e}"))?;
    Ok(cfg)
}

impl ConfigEntry {
    fn family_digits(&self) -> u32 {
        match &self.family {
            FamilyEntry::Integer { .. } => 0,
            FamilyEntry::Real { digits, .. } => *digits,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Completed,
    TimedOut,
    Failed,
}

impl RunStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RunStatus::Completed => "completed",
            RunStatus::TimedOut => "timed_out",
            RunStatus::Failed => "failed",
        }
    }
}

pub struct RunOutcome {
    pub status: RunStatus,
    /// Measure of the best solution in hand. Absent when the run produced
    /// nothing usable (failure, or a timeout before any solution).
    pub measure: Option<i64>,
    pub solution: Option<Solution>,
    pub error: Option<String>,
    pub runtime_s: f64,
}

/// Run one solver on one instance under an optional wall-clock budget.
pub fn run_solver(
    instance: &Instance,
    spec: &SolverSpec,
    default_limit: Option<f64>,
) -> RunOutcome {
    let limit = spec.time_limit.or(default_limit);
    let deadline = match limit {
        Some(secs) => Deadline::after_secs(secs),
        None => Deadline::none(),
    };
    let start = Instant::now();
    let (status, measure, solution, error) = dispatch(instance, spec, &deadline);
    RunOutcome { status, measure, solution, error, runtime_s: start.elapsed().as_secs_f64() }
}

/// Greedy wrapper around the search solver. Residual instances shrink as
/// matches are removed, so a pinned split is treated as a hint and clamped
/// to the current long side rather than erroring out mid-run.
struct ClampedSearch {
    r: Option<usize>,
}

impl DecisionSolver for ClampedSearch {
    fn solve_decision(
        &self,
        instance: &Instance,
        deadline: &Deadline,
    ) -> Result<DecisionOutcome, SolveError> {
        let long = instance.m().max(instance.n());
        let solver = SearchSolver::new(SearchConfig {
            r: self.r.map(|r| r.min(long)),
            ..SearchConfig::default()
        });
        solver.solve_decision(instance, deadline)
    }

    fn name(&self) -> &'static str {
        "search"
    }
}

fn dispatch(
    instance: &Instance,
    spec: &SolverSpec,
    deadline: &Deadline,
) -> (RunStatus, Option<i64>, Option<Solution>, Option<String>) {
    match spec.kind {
        SolverKind::GreedySearch => {
            let solver = ClampedSearch { r: spec.r };
            greedy_outcome(instance, greedy_solve(instance, &solver, deadline))
        }
        SolverKind::GreedyDp => {
            let solver = DpSolver::new(dp_config(instance, spec));
            greedy_outcome(instance, greedy_solve(instance, &solver, deadline))
        }
        SolverKind::Oracle => match optimal_oracle(instance, 1) {
            Ok((psi, solution)) => (RunStatus::Completed, Some(psi), Some(solution), None),
            Err(e) => (RunStatus::Failed, None, None, Some(e.to_string())),
        },
        SolverKind::Exact => {
            let warm = match spec.warm_start {
                WarmStart::None => None,
                WarmStart::Dp => {
                    let solver = DpSolver::new(dp_config(instance, spec));
                    match greedy_solve(instance, &solver, deadline) {
                        Ok(r) => Some(r.solution),
                        Err(e) => return (RunStatus::Failed, None, None, Some(e.to_string())),
                    }
                }
            };
            match solve_exact(instance, &ExactConfig::from_env(), deadline, warm.as_ref()) {
                Ok(r) => match r.status {
                    ExactStatus::Optimal => {
                        (RunStatus::Completed, Some(r.psi), Some(r.solution), None)
                    }
                    ExactStatus::FeasibleIncumbent => {
                        (RunStatus::TimedOut, Some(r.psi), Some(r.solution), None)
                    }
                    ExactStatus::TimedOutNoIncumbent => (RunStatus::TimedOut, None, None, None),
                },
                Err(SolveError::TimedOut) => (RunStatus::TimedOut, None, None, None),
                Err(e) => (RunStatus::Failed, None, None, Some(e.to_string())),
            }
        }
    }
}

fn dp_config(instance: &Instance, spec: &SolverSpec) -> DpConfig {
    DpConfig {
        rho: spec.rho.unwrap_or_else(|| DpConfig::default_rho(instance)),
        ..DpConfig::default()
    }
}

fn greedy_outcome(
    instance: &Instance,
    result: Result<ssmp::GreedyResult, SolveError>,
) -> (RunStatus, Option<i64>, Option<Solution>, Option<String>) {
    match result {
        Ok(r) => {
            let psi = instance.psi(&r.solution).expect("greedy solutions are valid");
            match r.status {
                GreedyStatus::Completed => {
                    (RunStatus::Completed, Some(psi), Some(r.solution), None)
                }
                // A timed-out greedy pass never finished scanning, so its
                // measure would not be comparable; keep the partial
                // solution but report no measure.
                GreedyStatus::TimedOut => (RunStatus::TimedOut, None, Some(r.solution), None),
            }
        }
        Err(SolveError::TimedOut) => (RunStatus::TimedOut, None, None, None),
        Err(e) => (RunStatus::Failed, None, None, Some(e.to_string())),
    }
}

/// Process exit code for a single solve: 0 when a usable result exists,
/// 3 when the run timed out empty-handed, 2 on solver failure.
pub fn exit_code(outcome: &RunOutcome) -> i32 {
    match outcome.status {
        RunStatus::Completed => 0,
        RunStatus::Failed => 2,
        RunStatus::TimedOut => {
            let has_result = outcome.measure.is_some()
                || outcome.solution.as_ref().is_some_and(|s| !s.matches.is_empty());
            if has_result {
                0
            } else {
                3
            }
        }
    }
}

/// One line of the raw JSONL log.
#[derive(Debug, Serialize, Deserialize)]
pub struct RunRecord {
    /// Instance file stem, e.g. `int_M4_N6_g20_s7_3`.
    pub instance: String,
    pub family: String,
    pub m: usize,
    pub n: usize,
    /// Family parameter tag as used in file names (`g10000`, `e0.0001`).
    pub param: String,
    pub epsilon: String,
    pub solver: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warm_start: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub time_limit: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub measure: Option<i64>,
    pub runtime_s: f64,
    pub status: RunStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solution: Option<serde_json::Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

pub fn make_record(
    stem: &str,
    cfg_family: &str,
    m: usize,
    n: usize,
    param: &str,
    epsilon: &str,
    seed: Option<u64>,
    spec: &SolverSpec,
    limit: Option<f64>,
    outcome: &RunOutcome,
) -> RunRecord {
    RunRecord {
        instance: stem.to_string(),
        family: cfg_family.to_string(),
        m,
        n,
        param: param.to_string(),
        epsilon: epsilon.to_string(),
        solver: spec.label.clone(),
        seed,
        r: spec.r,
        rho: spec.rho,
        warm_start: match spec.warm_start {
            WarmStart::None => None,
            WarmStart::Dp => Some("dp".to_string()),
        },
        time_limit: spec.time_limit.or(limit),
        measure: outcome.measure,
        runtime_s: outcome.runtime_s,
        status: outcome.status,
        solution: outcome
            .solution
            .as_ref()
            .map(|s| serde_json::from_str(&s.to_json()).expect("solutions serialize to json")),
        error: outcome.error.clone(),
    }
}

/// Parse a generated file stem back into (family, m, n, param, seed, index).
pub fn parse_stem(stem: &str) -> Option<(String, usize, usize, String, u64, usize)> {
    let parts: Vec<&str> = stem.split('_').collect();
    if parts.len() != 6 {
        return None;
    }
    let family = parts[0].to_string();
    let m = parts[1].strip_prefix('M')?.parse().ok()?;
    let n = parts[2].strip_prefix('N')?.parse().ok()?;
    let param = parts[3].to_string();
    let seed = parts[4].strip_prefix('s')?.parse().ok()?;
    let index = parts[5].parse().ok()?;
    Some((family, m, n, param, seed, index))
}

/// Fixed-column per-run table.
pub fn runs_csv(records: &[RunRecord]) -> String {
    let mut out = String::from("family,M,N,param,epsilon,solver,seed,measure,runtime_s,status\n");
    for r in records {
        let seed = r.seed.map(|s| s.to_string()).unwrap_or_default();
        let measure = r.measure.map(|m| m.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{:.6},{}\n",
            r.family,
            r.m,
            r.n,
            r.param,
            r.epsilon,
            r.solver,
            seed,
            measure,
            r.runtime_s,
            r.status.as_str()
        ));
    }
    out
}

/// Per-solver summary statistics for one instance config.
#[derive(Debug, PartialEq)]
pub struct SolverStats {
    pub label: String,
    pub runs: usize,
    /// Mean/std over runs that produced a measure; sample std (n-1).
    pub mean_measure: Option<f64>,
    pub std_measure: Option<f64>,
    pub mean_runtime_s: Option<f64>,
    pub std_runtime_s: Option<f64>,
    /// True when any run timed out or failed.
    pub timed_out: bool,
}

/// One aggregate row per instance config, solvers side by side.
#[derive(Debug, PartialEq)]
pub struct AggregateRow {
    pub family: String,
    pub m: usize,
    pub n: usize,
    pub param: String,
    pub epsilon: String,
    pub per_solver: Vec<SolverStats>,
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 {
        xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var.sqrt())
}

/// Group records by config (first-appearance order) and summarize each
/// solver label within the group. Pure function of the records, so rerunning
/// it over a saved JSONL file reproduces the table.
pub fn aggregate(records: &[RunRecord], labels: &[String]) -> Vec<AggregateRow> {
    let mut order: Vec<(String, usize, usize, String, String)> = Vec::new();
    for r in records {
        let key = (r.family.clone(), r.m, r.n, r.param.clone(), r.epsilon.clone());
        if !order.contains(&key) {
            order.push(key);
        }
    }
    order
        .into_iter()
        .map(|key| {
            let group: Vec<&RunRecord> = records
                .iter()
                .filter(|r| {
                    (&r.family, r.m, r.n, &r.param, &r.epsilon)
                        == (&key.0, key.1, key.2, &key.3, &key.4)
                })
                .collect();
            let per_solver = labels
                .iter()
                .map(|label| {
                    let runs: Vec<&&RunRecord> =
                        group.iter().filter(|r| &r.solver == label).collect();
                    let measured: Vec<&&&RunRecord> =
                        runs.iter().filter(|r| r.measure.is_some()).collect();
                    let measures: Vec<f64> =
                        measured.iter().map(|r| r.measure.unwrap() as f64).collect();
                    let times: Vec<f64> = measured.iter().map(|r| r.runtime_s).collect();
                    let (mean_measure, std_measure, mean_runtime_s, std_runtime_s) =
                        if measures.is_empty() {
                            (None, None, None, None)
                        } else {
                            let (mm, sm) = mean_std(&measures);
                            let (mt, st) = mean_std(&times);
                            (Some(mm), Some(sm), Some(mt), Some(st))
                        };
                    SolverStats {
                        label: label.clone(),
                        runs: runs.len(),
                        mean_measure,
                        std_measure,
                        mean_runtime_s,
                        std_runtime_s,
                        timed_out: runs.iter().any(|r| r.status != RunStatus::Completed),
                    }
                })
                .collect();
            AggregateRow {
                family: key.0,
                m: key.1,
                n: key.2,
                param: key.3,
                epsilon: key.4,
                per_solver,
            }
        })
        .collect()
}

pub fn aggregate_csv(rows: &[AggregateRow], labels: &[String]) -> String {
    let mut out = String::from("family,M,N,param,epsilon");
    for label in labels {
        for col in
            ["runs", "mean_measure", "std_measure", "mean_runtime_s", "std_runtime_s", "timeout"]
        {
            out.push_str(&format!(",{label}_{col}"));
        }
    }
    out.push('\n');
    let cell = |x: Option<f64>, prec: usize| match x {
        Some(v) => format!("{v:.prec$}"),
        None => String::new(),
    };
    for row in rows {
        out.push_str(&format!("{},{},{},{},{}", row.family, row.m, row.n, row.param, row.epsilon));
        for s in &row.per_solver {
            out.push_str(&format!(
                ",{},{},{},{},{},{}",
                s.runs,
                cell(s.mean_measure, 1),
                cell(s.std_measure, 1),
                cell(s.mean_runtime_s, 3),
                cell(s.std_runtime_s, 3),
                if s.timed_out { "*" } else { "" }
            ));
        }
        out.push('\n');
    }
    out
}

/// Everything `bench` knows about one scheduled run, precomputed so jobs can
/// execute in any order.
pub struct Job {
    pub cfg_index: usize,
    pub instance: Instance,
    pub stem: String,
    pub spec_index: usize,
}

pub fn build_jobs(suite: &Suite) -> Vec<Job> {
    let mut jobs = Vec::new();
    for (ci, cfg) in suite.configs.iter().enumerate() {
        for i in 0..cfg.count {
            let instance = ssmp::generate_one(cfg, i);
            for si in 0..suite.solvers.len() {
                jobs.push(Job {
                    cfg_index: ci,
                    instance: instance.clone(),
                    stem: cfg.file_stem(i),
                    spec_index: si,
                });
            }
        }
    }
    jobs
}

pub fn record_for_job(suite: &Suite, job: &Job) -> RunRecord {
    let cfg = &suite.configs[job.cfg_index];
    let spec = &suite.solvers[job.spec_index];
    let outcome = run_solver(&job.instance, spec, suite.time_limit);
    make_record(
        &job.stem,
        cfg.family.name(),
        cfg.m,
        cfg.n,
        &cfg.param_tag(),
        &format_amount(cfg.epsilon, cfg.family.digits()),
        Some(cfg.seed),
        spec,
        suite.time_limit,
        &outcome,
    )
}

/// Run all jobs on `workers` threads; records come back in job order either
/// way, so parallel output is byte-identical apart from the timings.
pub fn run_jobs(suite: &Suite, jobs: &[Job], workers: usize) -> Vec<RunRecord> {
    if workers <= 1 {
        return jobs.iter().map(|j| record_for_job(suite, j)).collect();
    }
    let next = std::sync::atomic::AtomicUsize::new(0);
    let done = std::sync::Mutex::new(BTreeMap::new());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                if i >= jobs.len() {
                    break;
                }
                let record = record_for_job(suite, &jobs[i]);
                done.lock().unwrap().insert(i, record);
            });
        }
    });
    done.into_inner().unwrap().into_values().collect()
}
