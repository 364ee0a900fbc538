//! Python view of the toolkit: `Instance` plus solver and generator calls.
//! Amounts cross the boundary as decimal strings so no caller ever touches
//! raw fixed-point units.

use std::time::Instant;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use ssmp::{
    format_amount, greedy_solve, optimal_oracle, parse_amount, solve_exact, Deadline,
    DecisionOutcome, DecisionSolver, DpConfig, DpSolver, ExactConfig, ExactStatus, Family,
    GenConfig, GreedyStatus, Match, SearchConfig, SearchSolver, Solution, SolveError, Subset,
};

#[pyclass(frozen)]
struct Instance {
    inner: ssmp::Instance,
}

type PyMatches = Vec<(Vec<usize>, Vec<usize>)>;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn solution_from(inner: &ssmp::Instance, matches: &PyMatches) -> PyResult<Solution> {
    let build = |len: usize, idx: &[usize]| -> PyResult<Subset> {
        let mut s = Subset::empty(len);
        for &i in idx {
            if i >= len {
                return Err(value_err(format!("index {i} out of range for a side of {len}")));
            }
            s.insert(i);
        }
        Ok(s)
    };
    let matches = matches
        .iter()
        .map(|(w, v)| Ok(Match { w: build(inner.m(), w)?, v: build(inner.n(), v)? }))
        .collect::<PyResult<Vec<_>>>()?;
    Ok(Solution { matches })
}

fn matches_of(solution: &Solution) -> PyMatches {
    solution.matches.iter().map(|m| (m.w.indices().collect(), m.v.indices().collect())).collect()
}

/// Outcome of `Instance.solve`.
#[pyclass(frozen, get_all)]
struct SolveResult {
    /// "completed", "timed_out", or "failed".
    status: String,
    /// Solution measure; `None` when the run produced nothing usable.
    measure: Option<i64>,
    /// Matches as `(w_indices, v_indices)` pairs.
    matches: PyMatches,
    runtime_s: f64,
    error: Option<String>,
}

#[pymethods]
impl SolveResult {
    fn __repr__(&self) -> String {
        format!(
            "SolveResult(status={:?}, measure={:?}, matches={}, runtime_s={:.3})",
            self.status,
            self.measure,
            self.matches.len(),
            self.runtime_s
        )
    }
}

/// Greedy front end over the search solver: residuals shrink, so a pinned
/// split is clamped to the current long side instead of failing mid-run.
struct ClampedSearch {
    r: Option<usize>,
}

impl DecisionSolver for ClampedSearch {
    fn solve_decision(
        &self,
        instance: &ssmp::Instance,
        deadline: &Deadline,
    ) -> Result<DecisionOutcome, SolveError> {
        let long = instance.m().max(instance.n());
        SearchSolver::new(SearchConfig {
            r: self.r.map(|r| r.min(long)),
            ..SearchConfig::default()
        })
        .solve_decision(instance, deadline)
    }

    fn name(&self) -> &'static str {
        "search"
    }
}

#[pymethods]
impl Instance {
    /// Amounts and tolerance are decimal strings with at most `digits`
    /// fractional digits, e.g. `Instance(["1.25"], ["1.30"], "0.05", 2)`.
    #[new]
    #[pyo3(signature = (a, b, epsilon = String::new(), digits = 0))]
    fn new(a: Vec<String>, b: Vec<String>, epsilon: String, digits: u32) -> PyResult<Self> {
        let parse_list = |xs: &[String]| -> PyResult<Vec<i64>> {
            xs.iter().map(|s| parse_amount(s, digits).map_err(value_err)).collect()
        };
        let epsilon = if epsilon.is_empty() {
            0
        } else {
            parse_amount(&epsilon, digits).map_err(value_err)?
        };
        if a.is_empty() || b.is_empty() {
            return Err(value_err("both sides need at least one amount"));
        }
        let inner = ssmp::Instance::new(parse_list(&a)?, parse_list(&b)?, epsilon, digits)
            .map_err(value_err)?;
        Ok(Instance { inner })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Instance { inner: ssmp::Instance::from_json(text).map_err(value_err)? })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.m()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn digits(&self) -> u32 {
        self.inner.digits()
    }

    #[getter]
    fn epsilon(&self) -> String {
        format_amount(self.inner.epsilon(), self.inner.digits())
    }

    #[getter]
    fn a(&self) -> Vec<String> {
        self.inner.a().iter().map(|&x| format_amount(x, self.inner.digits())).collect()
    }

    #[getter]
    fn b(&self) -> Vec<String> {
        self.inner.b().iter().map(|&x| format_amount(x, self.inner.digits())).collect()
    }

    /// Check a set of matches and return its objective value; raises
    /// `ValueError` describing the first violation otherwise.
    #[pyo3(signature = (matches, k_weight = 1))]
    fn verify(&self, matches: PyMatches, k_weight: i64) -> PyResult<i64> {
        let solution = solution_from(&self.inner, &matches)?;
        self.inner.check_solution(&solution).map_err(value_err)?;
        Ok(self.inner.objective(&solution, k_weight).expect("solution was just checked"))
    }

    /// Run a solver. `solver` is one of "greedy-search", "greedy-dp",
    /// "exact", or "oracle"; `warm_start` is "none" or "dp" (exact only).
    #[pyo3(signature = (solver = "greedy-dp", r = None, rho = None, warm_start = "none", time_limit = None))]
    fn solve(
        &self,
        py: Python<'_>,
        solver: &str,
        r: Option<usize>,
        rho: Option<i64>,
        warm_start: &str,
        time_limit: Option<f64>,
    ) -> PyResult<SolveResult> {
        match warm_start {
            "none" | "dp" => {}
            other => return Err(value_err(format!("unknown warm start {other:?}"))),
        }
        if warm_start == "dp" && solver != "exact" {
            return Err(value_err("warm_start only applies to the exact solver"));
        }
        let inner = self.inner.clone();
        let warm_dp = warm_start == "dp";
        let solver = solver.to_string();
        py.detach(move || run(&inner, &solver, r, rho, warm_dp, time_limit))
    }

    fn __repr__(&self) -> String {
        format!(
            "Instance(m={}, n={}, epsilon=\"{}\", digits={})",
            self.inner.m(),
            self.inner.n(),
            self.epsilon(),
            self.inner.digits()
        )
    }
}

fn run(
    instance: &ssmp::Instance,
    solver: &str,
    r: Option<usize>,
    rho: Option<i64>,
    warm_dp: bool,
    time_limit: Option<f64>,
) -> PyResult<SolveResult> {
    let deadline = match time_limit {
        Some(secs) => Deadline::after_secs(secs),
        None => Deadline::none(),
    };
    let dp = || {
        DpSolver::new(DpConfig {
            rho: rho.unwrap_or_else(|| DpConfig::default_rho(instance)),
            ..DpConfig::default()
        })
    };
    let start = Instant::now();
    let (status, measure, solution, error) = match solver {
        "greedy-search" => greedy(instance, &ClampedSearch { r }, &deadline),
        "greedy-dp" => greedy(instance, &dp(), &deadline),
        "oracle" => match optimal_oracle(instance, 1) {
            Ok((psi, solution)) => ("completed", Some(psi), Some(solution), None),
            Err(e) => ("failed", None, None, Some(e.to_string())),
        },
        "exact" => {
            let warm = if warm_dp {
                match greedy_solve(instance, &dp(), &deadline) {
                    Ok(r) => Some(r.solution),
                    Err(e) => return Err(value_err(e)),
                }
            } else {
                None
            };
            match solve_exact(instance, &ExactConfig::from_env(), &deadline, warm.as_ref()) {
                Ok(r) => match r.status {
                    ExactStatus::Optimal => ("completed", Some(r.psi), Some(r.solution), None),
                    ExactStatus::FeasibleIncumbent => {
                        ("timed_out", Some(r.psi), Some(r.solution), None)
                    }
                    ExactStatus::TimedOutNoIncumbent => ("timed_out", None, None, None),
                },
                Err(SolveError::TimedOut) => ("timed_out", None, None, None),
                Err(e) => ("failed", None, None, Some(e.to_string())),
            }
        }
        other => {
            return Err(value_err(format!(
                "unknown solver {other:?}; expected greedy-search, greedy-dp, exact, or oracle"
            )))
        }
    };
    Ok(SolveResult {
        status: status.to_string(),
        measure,
        matches: solution.as_ref().map(matches_of).unwrap_or_default(),
        runtime_s: start.elapsed().as_secs_f64(),
        error,
    })
}

fn greedy(
    instance: &ssmp::Instance,
    solver: &dyn DecisionSolver,
    deadline: &Deadline,
) -> (&'static str, Option<i64>, Option<Solution>, Option<String>) {
    match greedy_solve(instance, solver, deadline) {
        Ok(r) => {
            let psi = instance.psi(&r.solution).expect("greedy solutions are valid");
            match r.status {
                GreedyStatus::Completed => ("completed", Some(psi), Some(r.solution), None),
                GreedyStatus::TimedOut => ("timed_out", None, Some(r.solution), None),
            }
        }
        Err(SolveError::TimedOut) => ("timed_out", None, None, None),
        Err(e) => ("failed", None, None, Some(e.to_string())),
    }
}

/// Integer-family instances: amounts uniform in `[-gamma, gamma]` without
/// zero. Regenerating with the same arguments gives the same instances.
#[pyfunction]
#[pyo3(signature = (m, n, gamma, epsilon = String::new(), seed = 0, count = 1))]
fn generate_integer(
    m: usize,
    n: usize,
    gamma: i64,
    epsilon: String,
    seed: u64,
    count: usize,
) -> PyResult<Vec<Instance>> {
    let epsilon =
        if epsilon.is_empty() { 0 } else { parse_amount(&epsilon, 0).map_err(value_err)? };
    generate(GenConfig { m, n, family: Family::Integer { gamma }, epsilon, seed, count })
}

/// Real-family instances: fixed-point amounts with `digits` fractional
/// digits, uniform in `[low, high]` without zero.
#[pyfunction]
#[pyo3(signature = (m, n, low, high, digits, epsilon = String::new(), seed = 0, count = 1))]
#[allow(clippy::too_many_arguments)]
fn generate_real(
    m: usize,
    n: usize,
    low: String,
    high: String,
    digits: u32,
    epsilon: String,
    seed: u64,
    count: usize,
) -> PyResult<Vec<Instance>> {
    let family = Family::Real {
        low: parse_amount(&low, digits).map_err(value_err)?,
        high: parse_amount(&high, digits).map_err(value_err)?,
        digits,
    };
    let epsilon =
        if epsilon.is_empty() { 0 } else { parse_amount(&epsilon, digits).map_err(value_err)? };
    generate(GenConfig { m, n, family, epsilon, seed, count })
}

fn generate(cfg: GenConfig) -> PyResult<Vec<Instance>> {
    cfg.validate().map_err(value_err)?;
    Ok(ssmp::generate(&cfg).into_iter().map(|inner| Instance { inner }).collect())
}

#[pymodule]
fn ssmp_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Instance>()?;
    m.add_class::<SolveResult>()?;
    m.add_function(wrap_pyfunction!(generate_integer, m)?)?;
    m.add_function(wrap_pyfunction!(generate_real, m)?)?;
    Ok(())
}
