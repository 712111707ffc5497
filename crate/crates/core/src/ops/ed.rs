//! Hindsight economic dispatch against realized RES and load.
//!
//! The day-ahead plan enters as expressions, so the same builder serves a
//! fixed plan (constants) and a plan that is itself being optimized (UC
//! columns of the same model). The only nonlinear term, `R^nr* · I^ed,qs`,
//! is replaced by an auxiliary column bounded above by both factors; it only
//! ever relaxes an upper bound on output, so the upper envelope is exact at
//! any optimum.

use crate::data::{Matrix, PowerSystem};
use crate::milp::{LinExpr, LinearModel, Sense, VarId};

use super::plan::CommitmentPlan;
use super::uc::{flow_expr, UcVars};
use super::{OpsError, Penalties};

/// Day-ahead quantities seen by the dispatch, `[t][unit]`.
#[derive(Debug, Clone)]
pub struct PlanRef {
    pub i: Vec<Vec<LinExpr>>,
    pub o: Vec<Vec<LinExpr>>,
    pub p: Vec<Vec<LinExpr>>,
    pub rsr: Vec<Vec<LinExpr>>,
    pub rnr: Vec<Vec<LinExpr>>,
}

impl PlanRef {
    pub fn fixed(plan: &CommitmentPlan) -> Self {
        let flag = |m: &[Vec<bool>]| -> Vec<Vec<LinExpr>> {
            m.iter().map(|r| r.iter().map(|&b| LinExpr::constant(if b { 1.0 } else { 0.0 })).collect()).collect()
        };
        let num = |m: &Matrix| -> Vec<Vec<LinExpr>> {
            m.iter().map(|r| r.iter().map(|&v| LinExpr::constant(v)).collect()).collect()
        };
        PlanRef { i: flag(&plan.i), o: flag(&plan.o), p: num(&plan.p), rsr: num(&plan.rsr), rnr: num(&plan.rnr) }
    }

    pub fn variable(vars: &UcVars) -> Self {
        let of = |m: &[Vec<VarId>]| -> Vec<Vec<LinExpr>> {
            m.iter().map(|r| r.iter().map(|&v| LinExpr::var(v)).collect()).collect()
        };
        let p = (0..vars.i.len()).map(|t| (0..vars.i[t].len()).map(|i| vars.p(t, i)).collect()).collect();
        PlanRef { i: of(&vars.i), o: of(&vars.o), p, rsr: of(&vars.rsr), rnr: of(&vars.rnr) }
    }
}

#[derive(Debug, Clone)]
pub struct EdVars {
    pub i_ed: Vec<Vec<VarId>>,
    pub i_qs: Vec<Vec<VarId>>,
    pub u_qs: Vec<Vec<VarId>>,
    pub d_qs: Vec<Vec<VarId>>,
    pub psg: Vec<Vec<Vec<VarId>>>,
    pub w: Vec<Vec<VarId>>,
    pub s1: Vec<VarId>,
    pub s2: Vec<VarId>,
    pub s3: Vec<Vec<VarId>>,
    pub s4: Vec<Vec<VarId>>,
    /// Product columns created for a variable plan.
    pub products: Vec<VarId>,
    pub quickstart_cost: LinExpr,
    pub generation_cost: LinExpr,
    pub slack_cost: LinExpr,
}

impl EdVars {
    pub fn p(&self, t: usize, i: usize) -> LinExpr {
        LinExpr::sum(self.psg[t][i].iter().copied())
    }

    /// `d'z`.
    pub fn cost(&self) -> LinExpr {
        self.quickstart_cost.clone() + self.generation_cost.clone() + self.slack_cost.clone()
    }
}

#[derive(Debug, Clone)]
pub struct EdModel {
    pub model: LinearModel,
    pub vars: EdVars,
}

pub fn build_ed(
    system: &PowerSystem,
    plan: &CommitmentPlan,
    actual_res: &Matrix,
    actual_load: &Matrix,
    penalties: &Penalties,
) -> Result<EdModel, OpsError> {
    plan.check(system)?;
    let mut model = LinearModel::new();
    let vars = build_ed_into(&mut model, system, &PlanRef::fixed(plan), actual_res, actual_load, penalties)?;
    model.add_objective(&vars.cost());
    Ok(EdModel { model, vars })
}

/// Adds ED columns and rows for `plan` to `model`; the objective is untouched.
pub fn build_ed_into(
    model: &mut LinearModel,
    system: &PowerSystem,
    plan: &PlanRef,
    actual_res: &Matrix,
    actual_load: &Matrix,
    penalties: &Penalties,
) -> Result<EdVars, OpsError> {
    let nt = system.horizon();
    let ni = system.num_units();
    let dims_ok = actual_res.len() == nt
        && actual_res.iter().all(|r| r.len() == system.num_res())
        && actual_load.len() == nt
        && actual_load.iter().all(|r| r.len() == system.num_loads())
        && [&plan.i, &plan.o, &plan.p, &plan.rsr, &plan.rnr].iter().all(|m| m.len() == nt && m.iter().all(|r| r.len() == ni));
    if !dims_ok {
        return Err(OpsError::Dimension("ED inputs do not match the system horizon or unit counts".into()));
    }
    if actual_res.iter().chain(actual_load).flatten().any(|v| *v < 0.0) {
        return Err(OpsError::NegativeInput("realized RES and load must be nonnegative".into()));
    }
    let units = &system.thermal_units;
    let inf = f64::INFINITY;

    let bins = |model: &mut LinearModel, name: &str| -> Vec<Vec<VarId>> {
        (0..nt).map(|t| units.iter().map(|g| model.binary(format!("{name}[{},{}]", g.id, t + 1))).collect()).collect()
    };
    let i_ed = bins(model, "Ied");
    let i_qs = bins(model, "Iedqs");
    let u_qs = bins(model, "Uedqs");
    let d_qs = bins(model, "Dedqs");
    let psg: Vec<Vec<Vec<VarId>>> = (0..nt)
        .map(|t| {
            units
                .iter()
                .map(|g| {
                    (0..g.segments.len())
                        .map(|k| model.continuous(format!("Pedsg[{},{},{}]", g.id, t + 1, k + 1), 0.0, inf))
                        .collect()
                })
                .collect()
        })
        .collect();
    let w: Vec<Vec<VarId>> = (0..nt)
        .map(|t| {
            system
                .res_units
                .iter()
                .enumerate()
                .map(|(j, r)| model.continuous(format!("Wed[{},{}]", r.id, t + 1), 0.0, actual_res[t][j]))
                .collect()
        })
        .collect();
    let s1: Vec<VarId> = (0..nt).map(|t| model.continuous(format!("S1[{}]", t + 1), 0.0, inf)).collect();
    let s2: Vec<VarId> = (0..nt).map(|t| model.continuous(format!("S2[{}]", t + 1), 0.0, inf)).collect();
    let branch_slack = |model: &mut LinearModel, name: &str| -> Vec<Vec<VarId>> {
        (0..nt)
            .map(|t| system.branches.iter().map(|b| model.continuous(format!("{name}[{},{}]", b.id, t + 1), 0.0, inf)).collect())
            .collect()
    };
    let s3 = branch_slack(model, "S3");
    let s4 = branch_slack(model, "S4");

    let p = |t: usize, i: usize| LinExpr::sum(psg[t][i].iter().copied());
    let mut quickstart_cost = LinExpr::new();
    let mut generation_cost = LinExpr::new();
    let mut products = Vec::new();

    for (i, g) in units.iter().enumerate() {
        for t in 0..nt {
            let tag = format!("{},{}", g.id, t + 1);
            let (ied, iqs) = (i_ed[t][i], i_qs[t][i]);
            quickstart_cost.add_term(u_qs[t][i], g.startup_cost).add_term(iqs, g.noload_cost);

            model.add_constraint(format!("ed_status[{tag}]"), LinExpr::var(ied) - iqs - plan.i[t][i].clone(), Sense::Eq, 0.0);
            model.add_constraint(format!("ed_qs_nr[{tag}]"), LinExpr::var(iqs) - plan.o[t][i].clone(), Sense::Le, 0.0);
            let prev_qs = if t == 0 { LinExpr::new() } else { LinExpr::var(i_qs[t - 1][i]) };
            model.add_constraint(
                format!("ed_qs_logic[{tag}]"),
                LinExpr::var(u_qs[t][i]) - d_qs[t][i] - iqs + prev_qs,
                Sense::Eq,
                0.0,
            );
            for (k, s) in g.segments.iter().enumerate() {
                let v = psg[t][i][k];
                generation_cost.add_term(v, s.cost_per_mwh);
                model.add_constraint(
                    format!("ed_seg[{tag},{}]", k + 1),
                    LinExpr::var(v) - LinExpr::term(ied, s.width_mw),
                    Sense::Le,
                    0.0,
                );
            }
            model.add_constraint(format!("ed_pmin[{tag}]"), p(t, i) - LinExpr::term(ied, g.p_min), Sense::Ge, 0.0);

            let rnr = &plan.rnr[t][i];
            let nr_part = if rnr.is_constant() {
                LinExpr::term(iqs, rnr.constant)
            } else {
                let a = model.continuous(format!("RnrIqs[{tag}]"), 0.0, inf);
                products.push(a);
                model.add_constraint(format!("ed_prod_bin[{tag}]"), LinExpr::var(a) - LinExpr::term(iqs, g.nr_max), Sense::Le, 0.0);
                model.add_constraint(format!("ed_prod_val[{tag}]"), LinExpr::var(a) - rnr.clone(), Sense::Le, 0.0);
                LinExpr::var(a)
            };
            model.add_constraint(
                format!("ed_pmax[{tag}]"),
                p(t, i) - plan.i[t][i].clone() * g.p_max - nr_part,
                Sense::Le,
                0.0,
            );

            // R^sr* I* = R^sr* because spinning reserve is zero on offline units
            let shift = p(t, i) - plan.p[t][i].clone();
            model.add_constraint(format!("ed_band_lo[{tag}]"), shift.clone() + plan.rsr[t][i].clone(), Sense::Ge, 0.0);
            model.add_constraint(
                format!("ed_band_hi[{tag}]"),
                shift - plan.rsr[t][i].clone() - LinExpr::term(iqs, g.p_max),
                Sense::Le,
                0.0,
            );

            let prev_i = if t == 0 { LinExpr::constant(if g.initial_status.committed { 1.0 } else { 0.0 }) } else { LinExpr::var(i_ed[t - 1][i]) };
            let prev_p = if t == 0 { LinExpr::constant(g.initial_status.output_mw) } else { p(t - 1, i) };
            let cur_i = LinExpr::var(ied);
            model.add_constraint(
                format!("ed_ramp_up[{tag}]"),
                p(t, i) - prev_p.clone()
                    - (LinExpr::constant(g.p_max) - cur_i.clone() * g.p_max)
                    - prev_i.clone() * g.ramp_up
                    - (cur_i.clone() - prev_i.clone()) * g.startup_ramp,
                Sense::Le,
                0.0,
            );
            model.add_constraint(
                format!("ed_ramp_down[{tag}]"),
                prev_p - p(t, i)
                    - (LinExpr::constant(g.p_max) - prev_i.clone() * g.p_max)
                    - cur_i.clone() * g.ramp_down
                    - (prev_i - cur_i) * g.shutdown_ramp,
                Sense::Le,
                0.0,
            );
        }
    }

    let mut slack_cost = LinExpr::new();
    for t in 0..nt {
        let h = t + 1;
        slack_cost.add_term(s1[t], penalties.shortfall).add_term(s2[t], penalties.surplus);
        let gen = (0..ni).fold(LinExpr::sum(w[t].iter().copied()), |acc, i| acc + p(t, i));
        let load: f64 = actual_load[t].iter().sum();
        model.add_constraint(format!("ed_balance[{h}]"), gen + s1[t] - s2[t], Sense::Eq, load);
        for (b, br) in system.branches.iter().enumerate() {
            slack_cost.add_term(s3[t][b], penalties.flow).add_term(s4[t][b], penalties.flow);
            let flow = flow_expr(system, br.sensitivity(), |i| p(t, i), |j| w[t][j].into(), &actual_load[t]);
            model.add_constraint(format!("ed_flow_hi[{},{h}]", br.id), flow.clone() - s3[t][b], Sense::Le, br.capacity_mw);
            model.add_constraint(format!("ed_flow_lo[{},{h}]", br.id), flow + s4[t][b], Sense::Ge, -br.capacity_mw);
        }
    }

    Ok(EdVars { i_ed, i_qs, u_qs, d_qs, psg, w, s1, s2, s3, s4, products, quickstart_cost, generation_cost, slack_cost })
}
