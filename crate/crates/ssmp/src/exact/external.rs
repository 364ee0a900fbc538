//! Driving an external MILP solver process.
//!
//! The executable is named by `SSMP_MILP_BACKEND`; its argument list comes
//! from `SSMP_MILP_BACKEND_ARGS`, a whitespace-split template where `{lp}`,
//! `{sol}`, `{mst}` and `{limit}` expand to the model file, the expected
//! solution file, the warm-start file, and the time budget in seconds.
//! Arguments mentioning `{mst}` are dropped when there is no warm start.
//! The default template is `{lp} {sol} {limit} {mst}`.
//!
//! The solution file holds an optional `status optimal|feasible` line and
//! `name value` pairs; missing variables read as 0.

use std::process::{Command, Stdio};
use std::time::Duration;

use super::model::{parse_solution_listing, write_mst, MilpModel};
use crate::deadline::{Deadline, SolveError};

pub const BACKEND_ENV: &str = "SSMP_MILP_BACKEND";
pub const BACKEND_ARGS_ENV: &str = "SSMP_MILP_BACKEND_ARGS";

#[derive(Clone, Debug)]
pub struct ExternalBackend {
    pub command: String,
    pub args: Vec<String>,
}

impl ExternalBackend {
    pub fn new(command: impl Into<String>, args_template: Option<&str>) -> Self {
        let args = args_template
            .unwrap_or("{lp} {sol} {limit} {mst}")
            .split_whitespace()
            .map(String::from)
            .collect();
        ExternalBackend { command: command.into(), args }
    }

    /// Backend named by the environment, if any.
    pub fn from_env() -> Option<Self> {
        let command = std::env::var(BACKEND_ENV).ok()?;
        if command.trim().is_empty() {
            return None;
        }
        let args = std::env::var(BACKEND_ARGS_ENV).ok();
        Some(ExternalBackend::new(command, args.as_deref()))
    }

    /// Run the solver on `model`. `Ok(None)` means the process finished (or
    /// was cut off) without producing a solution file; that is "no incumbent",
    /// not a failure.
    pub(crate) fn run(
        &self,
        model: &MilpModel,
        warm: Option<&[u8]>,
        deadline: &Deadline,
    ) -> Result<Option<(bool, Vec<u8>)>, SolveError> {
        let fail = |msg: String| SolveError::Backend(msg);
        let dir = tempfile::tempdir().map_err(|e| fail(format!("tempdir: {e}")))?;
        let lp_path = dir.path().join("model.lp");
        let sol_path = dir.path().join("solution.txt");
        let mst_path = dir.path().join("start.mst");
        std::fs::write(&lp_path, model.write_lp()).map_err(|e| fail(format!("write lp: {e}")))?;
        if let Some(assignment) = warm {
            std::fs::write(&mst_path, write_mst(model, assignment))
                .map_err(|e| fail(format!("write mst: {e}")))?;
        }
        let limit = deadline.remaining_secs().unwrap_or(1e9).max(0.0);

        let mut args = Vec::new();
        for template in &self.args {
            if template.contains("{mst}") && warm.is_none() {
                continue;
            }
            args.push(
                template
                    .replace("{lp}", &lp_path.to_string_lossy())
                    .replace("{sol}", &sol_path.to_string_lossy())
                    .replace("{mst}", &mst_path.to_string_lossy())
                    .replace("{limit}", &format!("{limit:.3}")),
            );
        }

        let mut child = Command::new(&self.command)
            .args(&args)
            .stdin(Stdio::null())
            .stdout(Stdio::null())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| fail(format!("spawn {}: {e}", self.command)))?;
        let mut killed = false;
        let status = loop {
            match child.try_wait().map_err(|e| fail(format!("wait: {e}")))? {
                Some(status) => break status,
                None => {
                    if deadline.expired() {
                        let _ = child.kill();
                        killed = true;
                        break child.wait().map_err(|e| fail(format!("wait: {e}")))?;
                    }
                    std::thread::sleep(Duration::from_millis(5));
                }
            }
        };

        if !status.success() && !killed {
            let mut stderr = String::new();
            if let Some(mut pipe) = child.stderr.take() {
                use std::io::Read;
                let _ = pipe.read_to_string(&mut stderr);
            }
            return Err(fail(format!("{} exited with {status}: {}", self.command, stderr.trim())));
        }

        let text = match std::fs::read_to_string(&sol_path) {
            Ok(text) => text,
            Err(_) => return Ok(None),
        };
        match parse_solution_listing(model, &text) {
            Ok(parsed) => Ok(Some(parsed)),
            // a killed process may leave a torn file behind; that is still
            // just "no incumbent"
            Err(_) if killed => Ok(None),
            Err(e) => Err(e),
        }
    }
}
