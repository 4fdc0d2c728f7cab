use std::collections::HashMap;
use std::path::PathBuf;
use std::process::Command;

use highs::{HighsModelStatus, HighsSolutionStatus, RowProblem, Sense};

use super::{export_mps, ConstraintSense, Model, Solution, SolveStatus, VarKind};
use crate::error::{Error, Result};

/// Environment variable naming the solver binary used by the `external` backend.
pub const EXTERNAL_SOLVER_ENV: &str = "CFCUC_SOLVER_BIN";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub time_limit_s: f64,
    /// Relative MIP gap.
    pub mip_gap: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            time_limit_s: 1800.0,
            mip_gap: 1e-6,
        }
    }
}

/// Anything that can turn a [`Model`] into a [`Solution`].
pub trait SolverBackend: Send + Sync {
    fn name(&self) -> &str;
    fn solve(&self, model: &Model, opts: &SolveOptions) -> Result<Solution>;
}

pub fn solve(model: &Model, backend: &dyn SolverBackend, opts: &SolveOptions) -> Result<Solution> {
    backend.solve(model, opts)
}

/// `"highs"` (in-process) or `"external"` (binary from [`EXTERNAL_SOLVER_ENV`]).
pub fn backend_by_name(name: &str) -> Result<Box<dyn SolverBackend>> {
    match name {
        "highs" => Ok(Box::new(HighsBackend)),
        "external" => Ok(Box::new(ExternalBackend::from_env()?)),
        other => Err(Error::Solver {
            backend: other.into(),
            message: "unknown backend (expected `highs` or `external`)".into(),
        }),
    }
}

/// In-process HiGHS, single-threaded for reproducible runs.
#[derive(Debug, Clone, Copy, Default)]
pub struct HighsBackend;

impl SolverBackend for HighsBackend {
    fn name(&self) -> &str {
        "highs"
    }

    fn solve(&self, model: &Model, opts: &SolveOptions) -> Result<Solution> {
        let fail = |message: String| Error::Solver {
            backend: "highs".into(),
            message,
        };
        if model.num_vars() == 0 {
            let empty_ok = model.constraints().iter().all(|c| match c.sense {
                ConstraintSense::Le => 0.0 <= c.rhs,
                ConstraintSense::Ge => 0.0 >= c.rhs,
                ConstraintSense::Eq => c.rhs == 0.0,
            });
            let status = if empty_ok { SolveStatus::Optimal } else { SolveStatus::Infeasible };
            return Ok(Solution::new(status, 0.0, Vec::new(), Some(0.0)));
        }

        let mut cost = vec![0.0; model.num_vars()];
        for (v, c) in model.objective() {
            cost[v.index()] += c;
        }
        let mut pb = RowProblem::default();
        let cols: Vec<_> = model
            .vars()
            .iter()
            .zip(&cost)
            .map(|(v, &c)| pb.add_column_with_integrality(c, v.lo..=v.hi, v.kind == VarKind::Binary))
            .collect();
        for row in model.constraints() {
            let terms = row.terms.iter().map(|(v, c)| (cols[v.index()], *c));
            match row.sense {
                ConstraintSense::Le => pb.add_row(..=row.rhs, terms),
                ConstraintSense::Ge => pb.add_row(row.rhs.., terms),
                ConstraintSense::Eq => pb.add_row(row.rhs..=row.rhs, terms),
            }
        }

        let mut hm = pb.try_optimise(Sense::Minimise).map_err(|s| fail(format!("{s:?}")))?;
        hm.make_quiet();
        hm.set_option("threads", 1);
        hm.set_option("random_seed", 0);
        hm.set_option("time_limit", opts.time_limit_s);
        hm.set_option("mip_rel_gap", opts.mip_gap);
        hm.set_option("primal_feasibility_tolerance", 1e-9);
        hm.set_option("mip_feasibility_tolerance", 1e-9);
        let solved = hm.try_solve().map_err(|s| fail(format!("{s:?}")))?;

        let has_int = model.has_integers();
        let has_primal = || solved.primal_solution_status() == HighsSolutionStatus::Feasible;
        let status = match solved.status() {
            HighsModelStatus::Optimal => SolveStatus::Optimal,
            HighsModelStatus::Infeasible | HighsModelStatus::UnboundedOrInfeasible => {
                SolveStatus::Infeasible
            }
            HighsModelStatus::ReachedTimeLimit if has_primal() => SolveStatus::Feasible,
            HighsModelStatus::ReachedTimeLimit => SolveStatus::TimeLimit,
            other => return Err(fail(format!("model status {other:?}"))),
        };
        let gap = match (status, has_int) {
            (SolveStatus::Optimal, false) => Some(0.0),
            (s, true) if s.has_values() => Some(solved.mip_gap()),
            _ => None,
        };
        let values = if status.has_values() {
            solved.get_solution().columns().to_vec()
        } else {
            Vec::new()
        };
        let objective = if status.has_values() {
            model.objective_value(&values)
        } else {
            f64::NAN
        };
        Ok(Solution::new(status, objective, values, gap))
    }
}

/// Runs an external solver binary on an exported MPS file.
///
/// The binary is called with the HiGHS command-line convention:
///
/// ```text
/// <bin> [args..] --model_file model.mps --options_file options.txt
///       --solution_file model.sol --time_limit <s>
/// ```
///
/// `options.txt` carries `mip_rel_gap` and `threads = 1`. The solution file
/// must use the HiGHS text layout (see [`parse_highs_solution`]).
#[derive(Debug, Clone)]
pub struct ExternalBackend {
    pub program: PathBuf,
    pub args: Vec<String>,
}

impl ExternalBackend {
    pub fn new(program: impl Into<PathBuf>) -> Self {
        Self {
            program: program.into(),
            args: Vec::new(),
        }
    }

    pub fn with_args(mut self, args: impl IntoIterator<Item = impl Into<String>>) -> Self {
        self.args = args.into_iter().map(Into::into).collect();
        self
    }

    pub fn from_env() -> Result<Self> {
        match std::env::var_os(EXTERNAL_SOLVER_ENV) {
            Some(p) if !p.is_empty() => Ok(Self::new(p)),
            _ => Err(Error::Solver {
                backend: "external".into(),
                message: format!("set {EXTERNAL_SOLVER_ENV} to the solver binary"),
            }),
        }
    }
}

impl SolverBackend for ExternalBackend {
    fn name(&self) -> &str {
        "external"
    }

    fn solve(&self, model: &Model, opts: &SolveOptions) -> Result<Solution> {
        let fail = |message: String| Error::Solver {
            backend: self.program.display().to_string(),
            message,
        };
        let dir = tempfile::tempdir().map_err(|e| fail(e.to_string()))?;
        let mps = dir.path().join("model.mps");
        let sol = dir.path().join("model.sol");
        let options = dir.path().join("options.txt");
        std::fs::write(&mps, export_mps(model)).map_err(|e| Error::io(&mps, e))?;
        std::fs::write(&options, format!("mip_rel_gap = {}\nthreads = 1\n", opts.mip_gap))
            .map_err(|e| Error::io(&options, e))?;
        let output = Command::new(&self.program)
            .args(&self.args)
            .arg("--model_file")
            .arg(&mps)
            .arg("--options_file")
            .arg(&options)
            .arg("--solution_file")
            .arg(&sol)
            .arg("--time_limit")
            .arg(opts.time_limit_s.to_string())
            .output()
            .map_err(|e| fail(e.to_string()))?;
        if !output.status.success() {
            let mut msg = String::from_utf8_lossy(&output.stderr).trim().to_string();
            if msg.is_empty() {
                msg = String::from_utf8_lossy(&output.stdout).trim().to_string();
            }
            return Err(fail(msg));
        }
        let text = std::fs::read_to_string(&sol).map_err(|e| Error::io(&sol, e))?;
        parse_highs_solution(&text, model).map_err(|e| match e {
            Error::Solver { message, .. } => fail(message),
            other => other,
        })
    }
}

/// Parses a HiGHS-style solution file against the model's column names.
///
/// ```text
/// Model status
/// Optimal
///
/// # Primal solution values
/// Feasible
/// Objective 1
/// # Columns 1
/// x 1
/// ...
/// ```
pub fn parse_highs_solution(text: &str, model: &Model) -> Result<Solution> {
    let bad = |message: String| Error::Solver {
        backend: "external".into(),
        message,
    };
    let lines: Vec<&str> = text.lines().map(str::trim).collect();
    let after = |header: &str| -> Option<usize> {
        lines.iter().position(|l| *l == header).map(|k| k + 1)
    };
    let model_status = after("Model status")
        .and_then(|k| lines.get(k))
        .copied()
        .ok_or_else(|| bad("solution file has no `Model status` section".into()))?;
    let primal_at = after("# Primal solution values");
    let primal_feasible = primal_at
        .and_then(|k| lines.get(k))
        .is_some_and(|s| *s == "Feasible");

    let status = match model_status {
        "Optimal" => SolveStatus::Optimal,
        "Infeasible" | "Unbounded or infeasible" => SolveStatus::Infeasible,
        "Time limit reached" if primal_feasible => SolveStatus::Feasible,
        "Time limit reached" => SolveStatus::TimeLimit,
        other => return Err(bad(format!("model status `{other}`"))),
    };
    if !status.has_values() {
        return Ok(Solution::new(status, f64::NAN, Vec::new(), None));
    }
    let start = primal_at.ok_or_else(|| bad("missing primal solution section".into()))?;
    let mut objective = None;
    let mut values = vec![f64::NAN; model.num_vars()];
    let index: HashMap<&str, usize> = model
        .vars()
        .iter()
        .enumerate()
        .map(|(k, v)| (v.name.as_str(), k))
        .collect();
    let mut k = start + 1;
    while k < lines.len() {
        let line = lines[k];
        if let Some(v) = line.strip_prefix("Objective ") {
            objective = Some(v.trim().parse::<f64>().map_err(|e| bad(format!("objective: {e}")))?);
        } else if let Some(n) = line.strip_prefix("# Columns ") {
            let n: usize = n.trim().parse().map_err(|e| bad(format!("column count: {e}")))?;
            for j in 0..n {
                let entry = lines
                    .get(k + 1 + j)
                    .ok_or_else(|| bad("solution file ends inside the column list".into()))?;
                let mut parts = entry.split_whitespace();
                let (Some(name), Some(val)) = (parts.next(), parts.next()) else {
                    return Err(bad(format!("malformed column line `{entry}`")));
                };
                let col = *index
                    .get(name)
                    .ok_or_else(|| bad(format!("unknown column `{name}`")))?;
                values[col] = val.parse().map_err(|e| bad(format!("value of `{name}`: {e}")))?;
            }
            break;
        }
        k += 1;
    }
    if let Some(missing) = values.iter().position(|v| v.is_nan()) {
        return Err(bad(format!("no value for column `{}`", model.vars()[missing].name)));
    }
    let objective = objective.unwrap_or_else(|| model.objective_value(&values));
    let gap = (status == SolveStatus::Optimal && !model.has_integers()).then_some(0.0);
    Ok(Solution::new(status, objective, values, gap))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_var() -> (Model, super::super::VarHandle) {
        let mut m = Model::new("t");
        let x = m.add_continuous("x", 0.0, 10.0).unwrap();
        m.add_constraint("c1", &[(x, 1.0)], ConstraintSense::Ge, 1.0).unwrap();
        m.set_objective(&[(x, 1.0)]).unwrap();
        (m, x)
    }

    #[test]
    fn lp_solves_with_zero_gap() {
        let (m, x) = one_var();
        let s = HighsBackend.solve(&m, &SolveOptions::default()).unwrap();
        assert_eq!(s.status, SolveStatus::Optimal);
        assert!((s.objective - 1.0).abs() < 1e-9);
        assert!((s.value(x).unwrap() - 1.0).abs() < 1e-9);
        assert_eq!(s.gap, Some(0.0));
    }

    #[test]
    fn infeasible_detected() {
        let mut m = Model::new("inf");
        let x = m.add_continuous("x", f64::NEG_INFINITY, f64::INFINITY).unwrap();
        m.add_constraint("lo", &[(x, 1.0)], ConstraintSense::Ge, 1.0).unwrap();
        m.add_constraint("hi", &[(x, 1.0)], ConstraintSense::Le, 0.0).unwrap();
        let s = HighsBackend.solve(&m, &SolveOptions::default()).unwrap();
        assert_eq!(s.status, SolveStatus::Infeasible);
        assert!(s.values().is_empty());
    }

    #[test]
    fn small_milp() {
        // max x1 + 0.64 x2 s.t. 50 x1 + 31 x2 <= 250, 3 x1 - 2 x2 >= -4, binaries scaled
        let mut m = Model::new("knap");
        let a = m.add_binary("a").unwrap();
        let b = m.add_binary("b").unwrap();
        let c = m.add_binary("c").unwrap();
        m.add_constraint("cap", &[(a, 3.0), (b, 4.0), (c, 2.0)], ConstraintSense::Le, 6.0)
            .unwrap();
        m.set_objective(&[(a, -4.0), (b, -5.0), (c, -3.0)]).unwrap();
        let s = HighsBackend.solve(&m, &SolveOptions::default()).unwrap();
        assert_eq!(s.status, SolveStatus::Optimal);
        assert!((s.objective + 8.0).abs() < 1e-9);
        assert!(s.gap.unwrap() <= 1e-6);
    }

    #[test]
    fn parses_highs_solution_text() {
        let (m, x) = one_var();
        let text = "Model status\nOptimal\n\n# Primal solution values\nFeasible\nObjective 1\n# Columns 1\nx 1\n# Rows 1\nc1 1\n";
        let s = parse_highs_solution(text, &m).unwrap();
        assert_eq!(s.status, SolveStatus::Optimal);
        assert_eq!(s.value(x), Some(1.0));
        assert_eq!(s.objective, 1.0);

        let s = parse_highs_solution("Model status\nInfeasible\n", &m).unwrap();
        assert_eq!(s.status, SolveStatus::Infeasible);

        let err = parse_highs_solution("Model status\nNumerical trouble\n", &m).unwrap_err();
        assert!(err.to_string().contains("Numerical trouble"));
        let err = parse_highs_solution(
            "Model status\nOptimal\n# Primal solution values\nFeasible\nObjective 1\n# Columns 1\nzz 1\n",
            &m,
        )
        .unwrap_err();
        assert!(err.to_string().contains("zz"));
    }

    #[test]
    fn external_failure_surfaces_message() {
        let (m, _) = one_var();
        let backend = ExternalBackend::new("sh").with_args(["-c", "echo 'license expired' >&2; exit 3", "solver"]);
        let err = backend.solve(&m, &SolveOptions::default()).unwrap_err();
        assert!(err.to_string().contains("license expired"), "{err}");
    }

    #[test]
    fn unknown_backend() {
        assert!(backend_by_name("gurobi").is_err());
        assert_eq!(backend_by_name("highs").unwrap().name(), "highs");
    }
}
