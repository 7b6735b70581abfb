//! Bridge to an external SMT-LIB2 solver process.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};

use crate::error::{Error, Result};
use crate::formula::BoolFormula;

use super::smtlib::{parse_response, to_smtlib_in};
use super::{Backend, SolveResult};

/// Runs a solver binary with the script on standard input.
///
/// `args` default to `-in`, which z3 needs to read standard input; other
/// solvers read it without flags and can be configured with
/// [`ExternalSolver::with_args`].
#[derive(Clone, Debug)]
pub struct ExternalSolver {
    program: PathBuf,
    args: Vec<String>,
}

impl ExternalSolver {
    pub fn new(program: impl Into<PathBuf>) -> Self {
        let program = program.into();
        let is_z3 = program
            .file_stem()
            .is_some_and(|s| s.to_string_lossy().starts_with("z3"));
        let args = if is_z3 { vec!["-in".to_string()] } else { Vec::new() };
        Self { program, args }
    }

    pub fn with_args(mut self, args: impl IntoIterator<Item = String>) -> Self {
        self.args = args.into_iter().collect();
        self
    }

    pub fn program(&self) -> &Path {
        &self.program
    }

    /// Locate `name` on `PATH`.
    pub fn find(name: &str) -> Option<Self> {
        let paths = std::env::var_os("PATH")?;
        std::env::split_paths(&paths)
            .map(|dir| dir.join(name))
            .find(|p| p.is_file())
            .map(Self::new)
    }

    /// Run a raw script and return standard output.
    pub fn run_script(&self, script: &str) -> Result<String> {
        let mut child = Command::new(&self.program)
            .args(&self.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| Error::External(format!("cannot start {}: {e}", self.program.display())))?;
        child
            .stdin
            .take()
            .expect("piped stdin")
            .write_all(script.as_bytes())?;
        let out = child.wait_with_output()?;
        let stdout = String::from_utf8_lossy(&out.stdout).into_owned();
        if stdout.trim().is_empty() {
            let stderr = String::from_utf8_lossy(&out.stderr);
            return Err(Error::External(format!("no output ({})", stderr.trim())));
        }
        Ok(stdout)
    }
}

impl Backend for ExternalSolver {
    fn solve(&self, f: &BoolFormula, dim: usize) -> Result<SolveResult> {
        let script = to_smtlib_in(f, dim);
        let out = self.run_script(&script)?;
        let result = parse_response(&out, dim.max(f.var_count()))?;
        if let SolveResult::Sat(m) = &result {
            if !f.eval(m.values()) {
                return Err(Error::External(format!("returned model does not satisfy {f}")));
            }
        }
        Ok(result)
    }
}
