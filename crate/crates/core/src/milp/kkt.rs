//! KKT reformulation of a parametric LP.
//!
//! The LP `min c'y s.t. rows(y, p), bounds(y)` is rewritten as the system
//!
//! ```text
//!   h(y, p) = 0,  g(y, p) <= 0                      primal feasibility
//!   c + Jh' mu + Jg' nu = 0                         stationarity (one row per y_j)
//!   0 <= nu <= M_d * delta,  -g <= M_p (1 - delta)  complementarity, delta binary
//! ```
//!
//! `p` are parameter columns: they appear in rows but are decided outside the
//! LP, so they get no stationarity row. Variable bounds of `y` are turned into
//! explicit inequalities so that every active bound carries a multiplier.

use std::collections::HashSet;

use serde::Serialize;

use super::model::{LinExpr, LinearModel, Sense, VarId, VarKind};
use super::MilpError;

pub const DEFAULT_BIG_M: f64 = 1e5;

/// Tolerance used to decide that a Big-M bound is binding.
pub const BIG_M_BINDING_TOL: f64 = 1e-4;

#[derive(Debug, Clone)]
pub struct KktOptions {
    pub big_m_primal: f64,
    pub big_m_dual: f64,
    pub parameters: Vec<VarId>,
}

impl Default for KktOptions {
    fn default() -> Self {
        Self { big_m_primal: DEFAULT_BIG_M, big_m_dual: DEFAULT_BIG_M, parameters: Vec::new() }
    }
}

/// Where an inequality of the normal form came from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum RowOrigin {
    Row(usize),
    LowerBound(VarId),
    UpperBound(VarId),
}

#[derive(Debug, Clone)]
pub struct ComplementarityPair {
    pub origin: RowOrigin,
    pub dual: VarId,
    pub indicator: VarId,
    /// `-g`, nonnegative when the inequality holds.
    pub slack: LinExpr,
}

#[derive(Debug, Clone)]
pub struct KktSystem {
    /// Feasibility model over `[lp columns.., mu.., nu.., delta..]`; columns of
    /// the source LP keep their indices.
    pub model: LinearModel,
    pub inner: Vec<VarId>,
    pub parameters: Vec<VarId>,
    pub eq_duals: Vec<(RowOrigin, VarId)>,
    pub pairs: Vec<ComplementarityPair>,
    pub stationarity_rows: Vec<usize>,
    /// LP objective over the KKT columns.
    pub objective: LinExpr,
    pub big_m_primal: f64,
    pub big_m_dual: f64,
}

/// A complementarity pair whose Big-M bound is (nearly) active.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BindingBigM {
    pub origin: RowOrigin,
    pub dual_value: f64,
    pub slack_value: f64,
}

impl KktSystem {
    /// Pairs whose dual or slack sits within `tol` (relative to M) of its
    /// Big-M bound at `values` (KKT-model column values).
    pub fn binding_big_m(&self, values: &[f64], tol: f64) -> Vec<BindingBigM> {
        self.pairs
            .iter()
            .filter_map(|p| {
                let nu = values[p.dual.0];
                let s = p.slack.eval(values);
                let hit = nu >= self.big_m_dual * (1.0 - tol) || s >= self.big_m_primal * (1.0 - tol);
                hit.then(|| BindingBigM { origin: p.origin.clone(), dual_value: nu, slack_value: s })
            })
            .collect()
    }

    /// Largest complementarity product `nu * slack` at `values`.
    pub fn complementarity_residual(&self, values: &[f64]) -> f64 {
        self.pairs
            .iter()
            .map(|p| (values[p.dual.0] * p.slack.eval(values)).abs())
            .fold(0.0, f64::max)
    }
}

/// Derives the KKT system of the pure LP `lp`.
pub fn derive_kkt(lp: &LinearModel, opts: &KktOptions) -> Result<KktSystem, MilpError> {
    if let Some(v) = lp.integer_vars().next() {
        return Err(MilpError::NotAnLp(lp.var(v).name.clone()));
    }
    lp.validate()?;
    let params: HashSet<VarId> = opts.parameters.iter().copied().collect();
    let inner: Vec<VarId> = (0..lp.num_vars()).map(VarId).filter(|v| !params.contains(v)).collect();

    let mut kkt = LinearModel::new();
    for v in &lp.variables {
        kkt.add_var(v.name.clone(), v.lower, v.upper, v.kind);
    }
    // primal feasibility: rows copied verbatim, bounds kept as column bounds
    kkt.constraints = lp.constraints.clone();

    let n = lp.num_vars();
    // stationarity accumulators, one per column (only inner ones become rows)
    let mut grad: Vec<LinExpr> = vec![LinExpr::new(); n];
    for &(v, c) in &lp.objective {
        grad[v.0].constant += c;
    }

    let mut eq_duals = Vec::new();
    let mut ineqs: Vec<(RowOrigin, LinExpr)> = Vec::new(); // g <= 0
    for (r, c) in lp.constraints.iter().enumerate() {
        if !c.terms.iter().any(|(v, a)| *a != 0.0 && !params.contains(v)) {
            continue;
        }
        let row = LinExpr { terms: c.terms.clone(), constant: -c.rhs };
        match c.sense {
            Sense::Eq => {
                let mu = kkt.continuous(format!("mu[{}]", c.name), f64::NEG_INFINITY, f64::INFINITY);
                for &(v, a) in &c.terms {
                    grad[v.0].add_term(mu, a);
                }
                eq_duals.push((RowOrigin::Row(r), mu));
            }
            Sense::Le => ineqs.push((RowOrigin::Row(r), row)),
            Sense::Ge => ineqs.push((RowOrigin::Row(r), -row)),
        }
    }
    for &v in &inner {
        let var = lp.var(v);
        if var.lower == var.upper {
            let mu = kkt.continuous(format!("mu[fix:{}]", var.name), f64::NEG_INFINITY, f64::INFINITY);
            grad[v.0].add_term(mu, 1.0);
            eq_duals.push((RowOrigin::LowerBound(v), mu));
            continue;
        }
        if var.lower.is_finite() {
            ineqs.push((RowOrigin::LowerBound(v), LinExpr::constant(var.lower) - v));
        }
        if var.upper.is_finite() {
            ineqs.push((RowOrigin::UpperBound(v), LinExpr::var(v) - var.upper));
        }
    }

    let mut pairs = Vec::with_capacity(ineqs.len());
    for (k, (origin, g)) in ineqs.into_iter().enumerate() {
        let label = match &origin {
            RowOrigin::Row(r) => lp.constraints[*r].name.clone(),
            RowOrigin::LowerBound(v) => format!("lb:{}", lp.var(*v).name),
            RowOrigin::UpperBound(v) => format!("ub:{}", lp.var(*v).name),
        };
        let nu = kkt.add_var(format!("nu[{label}]"), 0.0, f64::INFINITY, VarKind::Continuous);
        let delta = kkt.add_var(format!("delta[{label}]"), 0.0, 1.0, VarKind::Binary);
        for &(v, a) in &g.terms {
            grad[v.0].add_term(nu, a);
        }
        kkt.add_constraint(
            format!("comp_dual[{k}:{label}]"),
            LinExpr::var(nu) - LinExpr::term(delta, opts.big_m_dual),
            Sense::Le,
            0.0,
        );
        let slack = -g.clone();
        kkt.add_constraint(
            format!("comp_primal[{k}:{label}]"),
            slack.clone() + LinExpr::term(delta, opts.big_m_primal),
            Sense::Le,
            opts.big_m_primal,
        );
        pairs.push(ComplementarityPair { origin, dual: nu, indicator: delta, slack });
    }

    let mut stationarity_rows = Vec::with_capacity(inner.len());
    for &v in &inner {
        let g = std::mem::take(&mut grad[v.0]);
        let idx = kkt.add_constraint(format!("stat[{}]", lp.var(v).name), g, Sense::Eq, 0.0);
        stationarity_rows.push(idx);
    }

    Ok(KktSystem {
        model: kkt,
        inner,
        parameters: opts.parameters.clone(),
        eq_duals,
        pairs,
        stationarity_rows,
        objective: lp.objective_expr(),
        big_m_primal: opts.big_m_primal,
        big_m_dual: opts.big_m_dual,
    })
}
