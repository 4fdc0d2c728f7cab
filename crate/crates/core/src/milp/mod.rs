//! Solver-agnostic MILP representation.
//!
//! Variables and constraints keep insertion order, and every name is chosen
//! by the caller, so building the same model twice produces the same MPS
//! bytes. Backends consume a [`Model`] and return a [`Solution`].

mod backend;
mod mps;

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use backend::{
    backend_by_name, parse_highs_solution, solve, ExternalBackend, HighsBackend, SolveOptions,
    SolverBackend, EXTERNAL_SOLVER_ENV,
};
pub use mps::export_mps;

/// Opaque handle to a model column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarHandle(usize);

impl VarHandle {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Continuous,
    Binary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarInfo {
    pub name: String,
    pub kind: VarKind,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintSense {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ConstraintHandle(usize);

/// `sum(coef * var) <sense> rhs`, with duplicate variables merged.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearConstraint {
    pub name: String,
    pub terms: Vec<(VarHandle, f64)>,
    pub sense: ConstraintSense,
    pub rhs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Optimal,
    Feasible,
    Infeasible,
    TimeLimit,
}

impl SolveStatus {
    pub fn has_values(self) -> bool {
        matches!(self, SolveStatus::Optimal | SolveStatus::Feasible)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub status: SolveStatus,
    pub objective: f64,
    /// Column values in handle order; empty unless the status carries values.
    values: Vec<f64>,
    /// Relative MIP gap when the backend reports one (0 for LPs).
    pub gap: Option<f64>,
}

impl Solution {
    pub fn new(status: SolveStatus, objective: f64, values: Vec<f64>, gap: Option<f64>) -> Self {
        let values = if status.has_values() { values } else { Vec::new() };
        Self {
            status,
            objective,
            values,
            gap,
        }
    }

    pub fn value(&self, var: VarHandle) -> Option<f64> {
        self.values.get(var.0).copied()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// A minimisation MILP under construction.
#[derive(Debug, Clone, Default)]
pub struct Model {
    name: String,
    vars: Vec<VarInfo>,
    constraints: Vec<LinearConstraint>,
    objective: Vec<(VarHandle, f64)>,
    frozen: bool,
    var_names: HashSet<String>,
    row_names: HashSet<String>,
}

impl Model {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    fn check_open(&self) -> Result<()> {
        if self.frozen {
            Err(Error::Model("model is frozen".into()))
        } else {
            Ok(())
        }
    }

    fn check_name(name: &str, taken: &HashSet<String>, what: &str) -> Result<()> {
        if !crate::sysmodel::valid_name(name) {
            return Err(Error::Model(format!("invalid {what} name `{name}`")));
        }
        if taken.contains(name) {
            return Err(Error::Model(format!("duplicate {what} name `{name}`")));
        }
        Ok(())
    }

    pub fn add_var(&mut self, name: impl Into<String>, kind: VarKind, lo: f64, hi: f64) -> Result<VarHandle> {
        self.check_open()?;
        let name = name.into();
        Self::check_name(&name, &self.var_names, "variable")?;
        if lo.is_nan() || hi.is_nan() || lo > hi || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
            return Err(Error::Model(format!("bad bounds [{lo}, {hi}] for `{name}`")));
        }
        if kind == VarKind::Binary && (lo < 0.0 || hi > 1.0) {
            return Err(Error::Model(format!("binary `{name}` bounds outside [0, 1]")));
        }
        self.var_names.insert(name.clone());
        self.vars.push(VarInfo { name, kind, lo, hi });
        Ok(VarHandle(self.vars.len() - 1))
    }

    pub fn add_binary(&mut self, name: impl Into<String>) -> Result<VarHandle> {
        self.add_var(name, VarKind::Binary, 0.0, 1.0)
    }

    pub fn add_continuous(&mut self, name: impl Into<String>, lo: f64, hi: f64) -> Result<VarHandle> {
        self.add_var(name, VarKind::Continuous, lo, hi)
    }

    fn canonical_terms(&self, terms: &[(VarHandle, f64)], owner: &str) -> Result<Vec<(VarHandle, f64)>> {
        let mut merged: Vec<(VarHandle, f64)> = Vec::with_capacity(terms.len());
        let mut slot: HashMap<VarHandle, usize> = HashMap::new();
        for &(v, c) in terms {
            if v.0 >= self.vars.len() {
                return Err(Error::Model(format!("`{owner}` references unknown variable {}", v.0)));
            }
            if !c.is_finite() {
                return Err(Error::Model(format!(
                    "`{owner}` has non-finite coefficient {c} on `{}`",
                    self.vars[v.0].name
                )));
            }
            match slot.get(&v) {
                Some(&k) => merged[k].1 += c,
                None => {
                    slot.insert(v, merged.len());
                    merged.push((v, c));
                }
            }
        }
        merged.retain(|(_, c)| *c != 0.0);
        Ok(merged)
    }

    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        terms: &[(VarHandle, f64)],
        sense: ConstraintSense,
        rhs: f64,
    ) -> Result<ConstraintHandle> {
        self.check_open()?;
        let name = name.into();
        Self::check_name(&name, &self.row_names, "constraint")?;
        if !rhs.is_finite() {
            return Err(Error::Model(format!("`{name}` has non-finite rhs {rhs}")));
        }
        let terms = self.canonical_terms(terms, &name)?;
        self.row_names.insert(name.clone());
        self.constraints.push(LinearConstraint {
            name,
            terms,
            sense,
            rhs,
        });
        Ok(ConstraintHandle(self.constraints.len() - 1))
    }

    /// Replaces the (minimisation) objective.
    pub fn set_objective(&mut self, terms: &[(VarHandle, f64)]) -> Result<()> {
        self.check_open()?;
        self.objective = self.canonical_terms(terms, "objective")?;
        Ok(())
    }

    /// Rejects any further modification.
    pub fn freeze(&mut self) {
        self.frozen = true;
    }

    pub fn is_frozen(&self) -> bool {
        self.frozen
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn vars(&self) -> &[VarInfo] {
        &self.vars
    }

    pub fn var(&self, v: VarHandle) -> &VarInfo {
        &self.vars[v.0]
    }

    pub fn constraints(&self) -> &[LinearConstraint] {
        &self.constraints
    }

    pub fn constraint(&self, c: ConstraintHandle) -> &LinearConstraint {
        &self.constraints[c.0]
    }

    pub fn objective(&self) -> &[(VarHandle, f64)] {
        &self.objective
    }

    pub fn has_integers(&self) -> bool {
        self.vars.iter().any(|v| v.kind == VarKind::Binary)
    }

    /// Copy of the model with the given columns fixed to values and turned
    /// continuous. Used to dispatch a fixed commitment as an LP.
    pub fn with_fixed(&self, fixes: &[(VarHandle, f64)]) -> Result<Model> {
        let mut m = self.clone();
        for &(v, x) in fixes {
            let info = m
                .vars
                .get_mut(v.0)
                .ok_or_else(|| Error::Model(format!("unknown variable {}", v.0)))?;
            if !x.is_finite() {
                return Err(Error::Model(format!("cannot fix `{}` to {x}", info.name)));
            }
            info.kind = VarKind::Continuous;
            info.lo = x;
            info.hi = x;
        }
        Ok(m)
    }

    /// Handle of the column called `name`.
    pub fn find_var(&self, name: &str) -> Option<VarHandle> {
        self.vars.iter().position(|v| v.name == name).map(VarHandle)
    }

    /// Number of rows whose name starts with `prefix`.
    pub fn count_rows_with_prefix(&self, prefix: &str) -> usize {
        self.constraints.iter().filter(|c| c.name.starts_with(prefix)).count()
    }

    /// Objective value of a full assignment.
    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective.iter().map(|(v, c)| c * values[v.0]).sum()
    }

    /// Largest violation of any row or bound under `values`.
    pub fn max_violation(&self, values: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (info, x) in self.vars.iter().zip(values) {
            worst = worst.max(info.lo - x).max(x - info.hi);
        }
        for c in &self.constraints {
            let lhs: f64 = c.terms.iter().map(|(v, k)| k * values[v.0]).sum();
            let viol = match c.sense {
                ConstraintSense::Le => lhs - c.rhs,
                ConstraintSense::Ge => c.rhs - lhs,
                ConstraintSense::Eq => (lhs - c.rhs).abs(),
            };
            worst = worst.max(viol);
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn add_binary_makes_a_column() {
        let mut m = Model::new("t");
        let x = m.add_binary("b_x").unwrap();
        assert_eq!(m.num_vars(), 1);
        assert_eq!(m.var(x).kind, VarKind::Binary);
    }

    #[test]
    fn duplicate_terms_are_summed() {
        let mut m = Model::new("t");
        let x = m.add_continuous("x", 0.0, 1.0).unwrap();
        let y = m.add_continuous("y", 0.0, 1.0).unwrap();
        let c = m
            .add_constraint("c", &[(x, 1.0), (y, 2.0), (x, 0.5), (y, -2.0)], ConstraintSense::Le, 1.0)
            .unwrap();
        assert_eq!(m.constraint(c).terms, vec![(x, 1.5)]);
    }

    #[test]
    fn nan_coefficient_rejected() {
        let mut m = Model::new("t");
        let x = m.add_continuous("x", 0.0, 1.0).unwrap();
        assert!(m.add_constraint("c", &[(x, f64::NAN)], ConstraintSense::Le, 1.0).is_err());
        assert!(m.add_constraint("c", &[(x, 1.0)], ConstraintSense::Le, f64::INFINITY).is_err());
        assert!(m.set_objective(&[(x, f64::NAN)]).is_err());
    }

    #[test]
    fn frozen_model_rejects_changes() {
        let mut m = Model::new("t");
        let x = m.add_continuous("x", 0.0, 1.0).unwrap();
        m.freeze();
        assert!(m.add_binary("y").is_err());
        assert!(m.add_constraint("c", &[(x, 1.0)], ConstraintSense::Ge, 0.0).is_err());
        assert!(m.set_objective(&[(x, 1.0)]).is_err());
    }

    #[test]
    fn names_and_bounds_checked() {
        let mut m = Model::new("t");
        m.add_continuous("x", 0.0, 1.0).unwrap();
        assert!(m.add_continuous("x", 0.0, 1.0).is_err());
        assert!(m.add_continuous("has space", 0.0, 1.0).is_err());
        assert!(m.add_continuous("z", 2.0, 1.0).is_err());
        assert!(m.add_var("b", VarKind::Binary, 0.0, 2.0).is_err());
    }

    #[test]
    fn solution_values_only_when_feasible() {
        let s = Solution::new(SolveStatus::Infeasible, 0.0, vec![1.0], None);
        assert!(s.values().is_empty());
        let s = Solution::new(SolveStatus::Optimal, 0.0, vec![1.0], Some(0.0));
        assert_eq!(s.value(VarHandle(0)), Some(1.0));
    }
}
