use std::collections::{BTreeMap, HashSet};

use super::model::{merge_terms, Constraint, LinearModel, Sense, VarId};
use super::MilpError;

/// Result of [`fix_binaries`]: the reduced LP and how its columns relate to
/// the original model.
#[derive(Debug, Clone)]
pub struct FixedLp {
    pub lp: LinearModel,
    /// Original variable -> LP variable (`None` for fixed integer columns).
    pub map: Vec<Option<VarId>>,
    pub assignment: BTreeMap<VarId, f64>,
}

impl FixedLp {
    /// Expands an LP solution back to the original variable space.
    pub fn restore(&self, lp_values: &[f64]) -> Vec<f64> {
        self.map
            .iter()
            .enumerate()
            .map(|(i, m)| match m {
                Some(v) => lp_values[v.0],
                None => self.assignment[&VarId(i)],
            })
            .collect()
    }

    pub fn lp_var(&self, original: VarId) -> Option<VarId> {
        self.map[original.0]
    }
}

/// Replaces every integer variable of `model` by the value in `assignment`,
/// folding it into row right-hand sides and the objective constant.
pub fn fix_binaries(model: &LinearModel, assignment: &BTreeMap<VarId, f64>) -> Result<FixedLp, MilpError> {
    for (&v, &val) in assignment {
        let var = model
            .variables
            .get(v.0)
            .ok_or_else(|| MilpError::InvalidAssignment(format!("{v} is not a variable of the model")))?;
        if !var.kind.is_integer() {
            return Err(MilpError::InvalidAssignment(format!("{} is continuous", var.name)));
        }
        if val.fract() != 0.0 || val < var.lower || val > var.upper {
            return Err(MilpError::InvalidAssignment(format!(
                "{} = {val} is outside its integer domain",
                var.name
            )));
        }
    }
    if let Some(missing) = model.integer_vars().find(|v| !assignment.contains_key(v)) {
        return Err(MilpError::InvalidAssignment(format!(
            "integer variable {} has no value",
            model.var(missing).name
        )));
    }

    let mut lp = LinearModel::new();
    let map: Vec<Option<VarId>> = model
        .variables
        .iter()
        .map(|v| (!v.kind.is_integer()).then(|| lp.add_var(v.name.clone(), v.lower, v.upper, v.kind)))
        .collect();

    for c in &model.constraints {
        let mut rhs = c.rhs;
        let mut terms = Vec::with_capacity(c.terms.len());
        for &(v, a) in &c.terms {
            match map[v.0] {
                Some(nv) => terms.push((nv, a)),
                None => rhs -= a * assignment[&v],
            }
        }
        lp.constraints.push(Constraint { name: c.name.clone(), terms: merge_terms(terms), sense: c.sense, rhs });
    }
    for &(v, a) in &model.objective {
        match map[v.0] {
            Some(nv) => lp.objective.push((nv, a)),
            None => lp.objective_constant += a * assignment[&v],
        }
    }
    lp.objective_constant += model.objective_constant;
    lp.objective = merge_terms(lp.objective);
    Ok(FixedLp { lp, map, assignment: assignment.clone() })
}

/// Turns single-column rows into bounds and folds fixed columns (`lower ==
/// upper`) into right-hand sides, until nothing changes. Columns in `keep`
/// are never folded or bounded. Column indices are preserved; emptied rows
/// that hold are dropped.
pub fn fold_singletons(lp: &LinearModel, keep: &[VarId]) -> LinearModel {
    let keep: HashSet<VarId> = keep.iter().copied().collect();
    let mut out = lp.clone();
    loop {
        let mut changed = false;
        let mut rows = Vec::with_capacity(out.constraints.len());
        for mut c in std::mem::take(&mut out.constraints) {
            let before = c.terms.len();
            let vars = &out.variables;
            c.terms.retain(|&(v, a)| {
                let var = &vars[v.0];
                if !keep.contains(&v) && var.lower == var.upper {
                    c.rhs -= a * var.lower;
                    false
                } else {
                    true
                }
            });
            changed |= c.terms.len() != before;
            match c.terms.as_slice() {
                [] if c.violation(&[]) <= 1e-9 => changed = true,
                &[(v, a)] if !keep.contains(&v) => {
                    let bound = c.rhs / a;
                    let var = &mut out.variables[v.0];
                    let upper = matches!((c.sense, a > 0.0), (Sense::Le, true) | (Sense::Ge, false)) || c.sense == Sense::Eq;
                    let lower = matches!((c.sense, a > 0.0), (Sense::Ge, true) | (Sense::Le, false)) || c.sense == Sense::Eq;
                    if upper {
                        var.upper = var.upper.min(bound);
                    }
                    if lower {
                        var.lower = var.lower.max(bound);
                    }
                    if var.lower > var.upper && var.lower - var.upper <= 1e-9 * var.lower.abs().max(1.0) {
                        var.upper = var.lower;
                    }
                    changed = true;
                }
                _ => rows.push(c),
            }
        }
        out.constraints = rows;
        if !changed {
            return out;
        }
    }
}

/// Reads the integer part of a solution as an assignment (values rounded).
pub fn integer_assignment(model: &LinearModel, values: &[f64]) -> BTreeMap<VarId, f64> {
    model.integer_vars().map(|v| (v, values[v.0].round())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::{solve, LinExpr, Sense, SolveOptions};

    fn gated() -> (LinearModel, VarId, VarId) {
        let mut m = LinearModel::new();
        let u = m.binary("u");
        let p = m.continuous("p", 0.0, f64::INFINITY);
        m.add_constraint("cap", LinExpr::var(p) - LinExpr::term(u, 10.0), Sense::Le, 0.0);
        m.add_objective(&(LinExpr::term(p, -1.0) + LinExpr::term(u, 3.0)));
        (m, u, p)
    }

    #[test]
    fn fixing_on_and_off() {
        let (m, u, p) = gated();
        let on = fix_binaries(&m, &BTreeMap::from([(u, 1.0)])).unwrap();
        assert!(!on.lp.is_mip());
        assert_eq!(on.lp.constraints[0].rhs, 10.0);
        assert_eq!(on.lp.objective_constant, 3.0);
        let off = fix_binaries(&m, &BTreeMap::from([(u, 0.0)])).unwrap();
        assert_eq!(off.lp.constraints[0].rhs, 0.0);
        let r = solve(&on.lp, &SolveOptions::exact()).unwrap();
        let full = on.restore(&r.values);
        assert_eq!(full[u.0], 1.0);
        assert!((full[p.0] - 10.0).abs() < 1e-9);
    }

    #[test]
    fn singletons_become_bounds_and_fixed_columns_vanish() {
        let mut m = LinearModel::new();
        let x = m.continuous("x", 0.0, f64::INFINITY);
        let y = m.continuous("y", 0.0, f64::INFINITY);
        let p = m.continuous("p", 0.0, 5.0);
        m.add_constraint("x_off", LinExpr::var(x), Sense::Le, 0.0);
        m.add_constraint("pair", LinExpr::var(x) + y, Sense::Le, 4.0);
        m.add_constraint("neg", LinExpr::term(y, -2.0), Sense::Le, -2.0);
        m.add_constraint("param", LinExpr::var(y) - p, Sense::Le, 0.0);
        m.add_objective(&LinExpr::var(y));
        let r = fold_singletons(&m, &[p]);
        assert_eq!((r.var(x).lower, r.var(x).upper), (0.0, 0.0));
        assert_eq!((r.var(y).lower, r.var(y).upper), (1.0, 4.0));
        assert_eq!(r.constraints.len(), 1);
        assert_eq!(r.constraints[0].name, "param");
        let a = solve(&m, &SolveOptions::exact()).unwrap();
        let b = solve(&r, &SolveOptions::exact()).unwrap();
        assert!((a.objective - b.objective).abs() < 1e-12);
    }

    #[test]
    fn violated_empty_rows_are_kept() {
        let mut m = LinearModel::new();
        let x = m.continuous("x", 1.0, 1.0);
        m.add_constraint("bad", LinExpr::var(x), Sense::Ge, 2.0);
        let r = fold_singletons(&m, &[]);
        assert_eq!(r.constraints.len(), 1);
        assert!(!solve(&r, &SolveOptions::exact()).unwrap().is_optimal());
    }

    #[test]
    fn rejects_bad_assignments() {
        let (m, u, p) = gated();
        assert!(fix_binaries(&m, &BTreeMap::new()).is_err());
        assert!(fix_binaries(&m, &BTreeMap::from([(u, 1.0), (p, 1.0)])).is_err());
        assert!(fix_binaries(&m, &BTreeMap::from([(u, 0.5)])).is_err());
    }
}
