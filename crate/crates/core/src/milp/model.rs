//! Solver-agnostic linear / mixed-integer model.
//!
//! Every model is a minimization. Constraints are stored row-wise as sparse
//! term lists; the constant part of each side is folded into `rhs` when the
//! constraint is added through [`LinearModel::add_constraint`].

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use super::MilpError;

/// Index of a variable inside one [`LinearModel`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub struct VarId(pub usize);

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Continuous,
    Binary,
    Integer,
}

impl VarKind {
    pub fn is_integer(self) -> bool {
        !matches!(self, VarKind::Continuous)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub kind: VarKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sense::Le => "<=",
            Sense::Eq => "=",
            Sense::Ge => ">=",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(VarId, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Constraint {
    pub fn activity(&self, values: &[f64]) -> f64 {
        self.terms.iter().map(|&(v, a)| a * values[v.0]).sum()
    }

    /// Amount by which `values` violates this row (zero when satisfied).
    pub fn violation(&self, values: &[f64]) -> f64 {
        let lhs = self.activity(values);
        match self.sense {
            Sense::Le => (lhs - self.rhs).max(0.0),
            Sense::Ge => (self.rhs - lhs).max(0.0),
            Sense::Eq => (lhs - self.rhs).abs(),
        }
    }
}

/// Affine expression `Σ a_k x_k + constant`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinExpr {
    pub terms: Vec<(VarId, f64)>,
    pub constant: f64,
}

impl LinExpr {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        Self { terms: Vec::new(), constant: c }
    }

    pub fn var(v: VarId) -> Self {
        Self::term(v, 1.0)
    }

    pub fn term(v: VarId, coef: f64) -> Self {
        Self { terms: vec![(v, coef)], constant: 0.0 }
    }

    pub fn add_term(&mut self, v: VarId, coef: f64) -> &mut Self {
        if coef != 0.0 {
            self.terms.push((v, coef));
        }
        self
    }

    pub fn add_expr(&mut self, other: &LinExpr, scale: f64) -> &mut Self {
        for &(v, a) in &other.terms {
            self.add_term(v, a * scale);
        }
        self.constant += other.constant * scale;
        self
    }

    pub fn is_constant(&self) -> bool {
        self.terms.iter().all(|&(_, a)| a == 0.0)
    }

    pub fn eval(&self, values: &[f64]) -> f64 {
        self.constant + self.terms.iter().map(|&(v, a)| a * values[v.0]).sum::<f64>()
    }

    /// Merges duplicate variables and drops zero coefficients.
    pub fn compact(mut self) -> Self {
        self.terms = merge_terms(self.terms);
        self
    }

    pub fn sum<I: IntoIterator<Item = VarId>>(vars: I) -> Self {
        let mut e = Self::new();
        for v in vars {
            e.add_term(v, 1.0);
        }
        e
    }
}

pub(crate) fn merge_terms(terms: Vec<(VarId, f64)>) -> Vec<(VarId, f64)> {
    let mut acc: Vec<(VarId, f64)> = Vec::with_capacity(terms.len());
    let mut pos: HashMap<VarId, usize> = HashMap::with_capacity(terms.len());
    for (v, a) in terms {
        match pos.get(&v) {
            Some(&k) => acc[k].1 += a,
            None => {
                pos.insert(v, acc.len());
                acc.push((v, a));
            }
        }
    }
    acc.retain(|&(_, a)| a != 0.0);
    acc
}

impl From<VarId> for LinExpr {
    fn from(v: VarId) -> Self {
        LinExpr::var(v)
    }
}

impl From<f64> for LinExpr {
    fn from(c: f64) -> Self {
        LinExpr::constant(c)
    }
}

impl<T: Into<LinExpr>> Add<T> for LinExpr {
    type Output = LinExpr;
    fn add(mut self, rhs: T) -> LinExpr {
        self += rhs;
        self
    }
}

impl<T: Into<LinExpr>> AddAssign<T> for LinExpr {
    fn add_assign(&mut self, rhs: T) {
        let rhs = rhs.into();
        self.add_expr(&rhs, 1.0);
    }
}

impl<T: Into<LinExpr>> Sub<T> for LinExpr {
    type Output = LinExpr;
    fn sub(mut self, rhs: T) -> LinExpr {
        self -= rhs;
        self
    }
}

impl<T: Into<LinExpr>> SubAssign<T> for LinExpr {
    fn sub_assign(&mut self, rhs: T) {
        let rhs = rhs.into();
        self.add_expr(&rhs, -1.0);
    }
}

impl Mul<f64> for LinExpr {
    type Output = LinExpr;
    fn mul(mut self, k: f64) -> LinExpr {
        for t in &mut self.terms {
            t.1 *= k;
        }
        self.constant *= k;
        self
    }
}

impl Neg for LinExpr {
    type Output = LinExpr;
    fn neg(self) -> LinExpr {
        self * -1.0
    }
}

/// A minimization model `min c'x + c0  s.t.  rows, bounds, integrality`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinearModel {
    pub variables: Vec<Variable>,
    pub constraints: Vec<Constraint>,
    pub objective: Vec<(VarId, f64)>,
    pub objective_constant: f64,
}

impl LinearModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn add_var(&mut self, name: impl Into<String>, lower: f64, upper: f64, kind: VarKind) -> VarId {
        let (lower, upper) = match kind {
            VarKind::Binary => (lower.max(0.0), upper.min(1.0)),
            _ => (lower, upper),
        };
        self.variables.push(Variable { name: name.into(), lower, upper, kind });
        VarId(self.variables.len() - 1)
    }

    pub fn continuous(&mut self, name: impl Into<String>, lower: f64, upper: f64) -> VarId {
        self.add_var(name, lower, upper, VarKind::Continuous)
    }

    pub fn binary(&mut self, name: impl Into<String>) -> VarId {
        self.add_var(name, 0.0, 1.0, VarKind::Binary)
    }

    pub fn var(&self, v: VarId) -> &Variable {
        &self.variables[v.0]
    }

    /// Adds `lhs (sense) rhs`; constants on both sides are moved to the right.
    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        lhs: impl Into<LinExpr>,
        sense: Sense,
        rhs: impl Into<LinExpr>,
    ) -> usize {
        let mut e = lhs.into();
        e -= rhs.into();
        let rhs = -e.constant;
        self.constraints.push(Constraint {
            name: name.into(),
            terms: merge_terms(e.terms),
            sense,
            rhs,
        });
        self.constraints.len() - 1
    }

    pub fn add_objective(&mut self, expr: &LinExpr) {
        self.objective.extend(expr.terms.iter().copied());
        self.objective_constant += expr.constant;
    }

    pub fn objective_expr(&self) -> LinExpr {
        LinExpr { terms: merge_terms(self.objective.clone()), constant: self.objective_constant }
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective_expr().eval(values)
    }

    pub fn integer_vars(&self) -> impl Iterator<Item = VarId> + '_ {
        self.variables
            .iter()
            .enumerate()
            .filter(|(_, v)| v.kind.is_integer())
            .map(|(i, _)| VarId(i))
    }

    pub fn is_mip(&self) -> bool {
        self.variables.iter().any(|v| v.kind.is_integer())
    }

    pub fn find_var(&self, name: &str) -> Option<VarId> {
        self.variables.iter().position(|v| v.name == name).map(VarId)
    }

    /// Checks the structural invariants of the model.
    pub fn validate(&self) -> Result<(), MilpError> {
        let n = self.variables.len();
        for v in &self.variables {
            if v.lower.is_nan() || v.upper.is_nan() || v.lower > v.upper {
                return Err(MilpError::InvalidModel(format!(
                    "variable {} has bounds [{}, {}]",
                    v.name, v.lower, v.upper
                )));
            }
        }
        for c in &self.constraints {
            for &(v, a) in &c.terms {
                if v.0 >= n {
                    return Err(MilpError::InvalidModel(format!(
                        "constraint {} references undeclared variable {}",
                        c.name, v
                    )));
                }
                if !a.is_finite() {
                    return Err(MilpError::InvalidModel(format!(
                        "constraint {} has non-finite coefficient on {}",
                        c.name, self.variables[v.0].name
                    )));
                }
            }
            if c.rhs.is_nan() {
                return Err(MilpError::InvalidModel(format!("constraint {} has NaN rhs", c.name)));
            }
        }
        for &(v, a) in &self.objective {
            if v.0 >= n {
                return Err(MilpError::InvalidModel(format!("objective references undeclared {v}")));
            }
            if !a.is_finite() {
                return Err(MilpError::InvalidModel(format!(
                    "objective coefficient on {} is not finite",
                    self.variables[v.0].name
                )));
            }
        }
        if !self.objective_constant.is_finite() {
            return Err(MilpError::InvalidModel("objective constant is not finite".into()));
        }
        Ok(())
    }

    /// Largest scaled violation of rows, bounds and integrality at `values`.
    ///
    /// Row violations are divided by `max(1, |rhs|, max_k |a_k x_k|)`.
    pub fn max_violation(&self, values: &[f64]) -> (f64, Option<String>) {
        let mut worst = 0.0;
        let mut at = None;
        for c in &self.constraints {
            let scale = c
                .terms
                .iter()
                .map(|&(v, a)| (a * values[v.0]).abs())
                .fold(c.rhs.abs().max(1.0), f64::max);
            let viol = c.violation(values) / scale;
            if viol > worst {
                worst = viol;
                at = Some(c.name.clone());
            }
        }
        for (var, &x) in self.variables.iter().zip(values) {
            let scale = x.abs().max(1.0);
            let viol = ((var.lower - x).max(0.0) + (x - var.upper).max(0.0)) / scale;
            if viol > worst {
                worst = viol;
                at = Some(var.name.clone());
            }
            if var.kind.is_integer() {
                let frac = (x - x.round()).abs();
                if frac > worst {
                    worst = frac;
                    at = Some(var.name.clone());
                }
            }
        }
        (worst, at)
    }

    /// Copies every variable and row of `other` into `self`.
    ///
    /// Variables listed in `shared` are not duplicated; references to them are
    /// redirected to the given variable of `self`. New names are prefixed.
    /// The objective of `other` is not copied. Returns the variable map.
    pub fn append(&mut self, other: &LinearModel, prefix: &str, shared: &HashMap<VarId, VarId>) -> Vec<VarId> {
        let map: Vec<VarId> = other
            .variables
            .iter()
            .enumerate()
            .map(|(i, v)| match shared.get(&VarId(i)) {
                Some(&target) => target,
                None => self.add_var(format!("{prefix}{}", v.name), v.lower, v.upper, v.kind),
            })
            .collect();
        for c in &other.constraints {
            self.constraints.push(Constraint {
                name: format!("{prefix}{}", c.name),
                terms: merge_terms(c.terms.iter().map(|&(v, a)| (map[v.0], a)).collect()),
                sense: c.sense,
                rhs: c.rhs,
            });
        }
        map
    }

    /// Translates an expression over `other`'s variables through `map`.
    pub fn remap(expr: &LinExpr, map: &[VarId]) -> LinExpr {
        LinExpr {
            terms: expr.terms.iter().map(|&(v, a)| (map[v.0], a)).collect(),
            constant: expr.constant,
        }
    }
}

/// Variable and row counts of a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ModelStats {
    pub binaries: usize,
    pub integers: usize,
    pub continuous: usize,
    pub rows: usize,
    pub nonzeros: usize,
}

impl LinearModel {
    pub fn stats(&self) -> ModelStats {
        let mut s = ModelStats { rows: self.constraints.len(), ..Default::default() };
        for v in &self.variables {
            match v.kind {
                VarKind::Binary => s.binaries += 1,
                VarKind::Integer => s.integers += 1,
                VarKind::Continuous => s.continuous += 1,
            }
        }
        s.nonzeros = self.constraints.iter().map(|c| c.terms.len()).sum();
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_move_to_rhs() {
        let mut m = LinearModel::new();
        let x = m.continuous("x", 0.0, 10.0);
        let y = m.continuous("y", 0.0, 10.0);
        let lhs = LinExpr::var(x) * 2.0 + 3.0;
        let rhs = LinExpr::var(y) + 7.0;
        m.add_constraint("c", lhs, Sense::Le, rhs);
        let c = &m.constraints[0];
        assert_eq!(c.rhs, 4.0);
        assert_eq!(c.terms, vec![(x, 2.0), (y, -1.0)]);
    }

    #[test]
    fn duplicate_terms_merge() {
        let mut m = LinearModel::new();
        let x = m.continuous("x", 0.0, 1.0);
        let e = LinExpr::var(x) + LinExpr::var(x) - LinExpr::term(x, 2.0);
        m.add_constraint("c", e, Sense::Eq, 0.0);
        assert!(m.constraints[0].terms.is_empty());
    }

    #[test]
    fn validate_rejects_bad_bounds_and_refs() {
        let mut m = LinearModel::new();
        m.continuous("x", 2.0, 1.0);
        assert!(m.validate().is_err());

        let mut m = LinearModel::new();
        let x = m.continuous("x", 0.0, 1.0);
        m.add_constraint("c", LinExpr::var(VarId(x.0 + 5)), Sense::Le, 1.0);
        assert!(m.validate().is_err());
    }

    #[test]
    fn append_shares_and_prefixes() {
        let mut inner = LinearModel::new();
        let a = inner.continuous("a", 0.0, 1.0);
        let p = inner.continuous("p", 0.0, 1.0);
        inner.add_constraint("r", LinExpr::var(a) + LinExpr::var(p), Sense::Le, 1.0);

        let mut outer = LinearModel::new();
        let q = outer.continuous("q", 0.0, 5.0);
        let shared = HashMap::from([(p, q)]);
        let map = outer.append(&inner, "blk.", &shared);
        assert_eq!(map[p.0], q);
        assert_eq!(outer.var(map[a.0]).name, "blk.a");
        assert_eq!(outer.constraints[0].terms, vec![(map[a.0], 1.0), (q, 1.0)]);
    }
}
