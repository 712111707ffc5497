//! Deterministic day-ahead unit commitment.
//!
//! Total output `P_it` is not a column: it is always the sum of the segment
//! outputs, so every row that mentions `P` uses that sum directly.

use crate::data::{Matrix, PowerSystem, ReserveRequirement};
use crate::milp::{LinExpr, LinearModel, Sense, VarId};

use super::OpsError;

/// Right-hand sides that depend on predictions. Entries are expressions so
/// that predictors can be decision variables of an enclosing model.
#[derive(Debug, Clone)]
pub struct UcInputs {
    /// `[t][j]` available RES power.
    pub res_cap: Vec<Vec<LinExpr>>,
    /// `[t]` spinning requirement.
    pub sr_req: Vec<LinExpr>,
    /// `[t]` non-spinning requirement.
    pub nr_req: Vec<LinExpr>,
    /// `[t][q]` load forecast.
    pub load: Matrix,
}

impl UcInputs {
    pub fn constant(res: &Matrix, reserve: &[ReserveRequirement], load: &Matrix) -> Self {
        Self {
            res_cap: res.iter().map(|r| r.iter().map(|&v| LinExpr::constant(v)).collect()).collect(),
            sr_req: reserve.iter().map(|r| LinExpr::constant(r.sr)).collect(),
            nr_req: reserve.iter().map(|r| LinExpr::constant(r.nr)).collect(),
            load: load.clone(),
        }
    }

    pub(crate) fn check(&self, system: &PowerSystem) -> Result<(), OpsError> {
        let t = system.horizon();
        let ok = self.res_cap.len() == t
            && self.res_cap.iter().all(|r| r.len() == system.num_res())
            && self.sr_req.len() == t
            && self.nr_req.len() == t
            && self.load.len() == t
            && self.load.iter().all(|r| r.len() == system.num_loads());
        if !ok {
            return Err(OpsError::Dimension("UC inputs do not match the system horizon or unit counts".into()));
        }
        let constants = self.res_cap.iter().flatten().chain(&self.sr_req).chain(&self.nr_req);
        if constants.filter(|e| e.is_constant()).any(|e| e.constant < 0.0) || self.load.iter().flatten().any(|v| *v < 0.0) {
            return Err(OpsError::NegativeInput("UC predictions must be nonnegative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct UcOptions {
    /// Emit the system reserve adequacy rows.
    pub reserve_rows: bool,
    /// Penalty ($/MW) for nonnegative slacks on balance, flow and reserve
    /// rows; `None` keeps the rows hard.
    pub system_slack: Option<f64>,
}

impl Default for UcOptions {
    fn default() -> Self {
        Self { reserve_rows: true, system_slack: None }
    }
}

/// Columns of one UC block, indexed `[t][i]`, `[t][i][k]` or `[t][j]`.
#[derive(Debug, Clone)]
pub struct UcVars {
    pub i: Vec<Vec<VarId>>,
    pub u: Vec<Vec<VarId>>,
    pub d: Vec<Vec<VarId>>,
    pub o: Vec<Vec<VarId>>,
    pub psg: Vec<Vec<Vec<VarId>>>,
    pub rsr: Vec<Vec<VarId>>,
    pub rnr: Vec<Vec<VarId>>,
    pub w: Vec<Vec<VarId>>,
    pub slacks: Vec<VarId>,
    /// `b'x`: startup plus no-load cost.
    pub commitment_cost: LinExpr,
    /// `c'y`: segment generation cost.
    pub generation_cost: LinExpr,
    /// Penalty on `slacks` (zero without system slack).
    pub slack_cost: LinExpr,
}

impl UcVars {
    pub fn p(&self, t: usize, i: usize) -> LinExpr {
        LinExpr::sum(self.psg[t][i].iter().copied())
    }

    /// All binary columns in a fixed order (I, U, D, O per hour and unit).
    pub fn binaries(&self) -> Vec<VarId> {
        let mut out = Vec::new();
        for t in 0..self.i.len() {
            for i in 0..self.i[t].len() {
                out.extend([self.i[t][i], self.u[t][i], self.d[t][i], self.o[t][i]]);
            }
        }
        out
    }

    /// `b'x + c'y`.
    pub fn anticipated_cost(&self) -> LinExpr {
        self.commitment_cost.clone() + self.generation_cost.clone()
    }
}

/// A standalone UC model with objective `b'x + c'y` (+ slack penalty).
#[derive(Debug, Clone)]
pub struct UcModel {
    pub model: LinearModel,
    pub vars: UcVars,
}

pub fn build_uc(system: &PowerSystem, inputs: &UcInputs, opts: UcOptions) -> Result<UcModel, OpsError> {
    let mut model = LinearModel::new();
    let vars = build_uc_into(&mut model, system, inputs, opts)?;
    let obj = vars.anticipated_cost() + vars.slack_cost.clone();
    model.add_objective(&obj);
    Ok(UcModel { model, vars })
}

/// Adds the UC columns and rows to `model` without touching its objective.
pub fn build_uc_into(
    model: &mut LinearModel,
    system: &PowerSystem,
    inputs: &UcInputs,
    opts: UcOptions,
) -> Result<UcVars, OpsError> {
    inputs.check(system)?;
    let nt = system.horizon();
    let units = &system.thermal_units;
    let inf = f64::INFINITY;

    let grid = |model: &mut LinearModel, name: &str, bin: bool, ub: &dyn Fn(usize) -> f64| -> Vec<Vec<VarId>> {
        (0..nt)
            .map(|t| {
                units
                    .iter()
                    .enumerate()
                    .map(|(i, g)| {
                        let n = format!("{name}[{},{}]", g.id, t + 1);
                        if bin {
                            model.binary(n)
                        } else {
                            model.continuous(n, 0.0, ub(i))
                        }
                    })
                    .collect()
            })
            .collect()
    };
    let vi = grid(model, "I", true, &|_| 1.0);
    let vu = grid(model, "U", true, &|_| 1.0);
    let vd = grid(model, "D", true, &|_| 1.0);
    let vo = grid(model, "O", true, &|_| 1.0);
    let psg: Vec<Vec<Vec<VarId>>> = (0..nt)
        .map(|t| {
            units
                .iter()
                .map(|g| {
                    (0..g.segments.len())
                        .map(|k| model.continuous(format!("Psg[{},{},{}]", g.id, t + 1, k + 1), 0.0, inf))
                        .collect()
                })
                .collect()
        })
        .collect();
    let rsr = grid(model, "Rsr", false, &|_| inf);
    let rnr = grid(model, "Rnr", false, &|_| inf);
    let w: Vec<Vec<VarId>> = (0..nt)
        .map(|t| system.res_units.iter().map(|r| model.continuous(format!("W[{},{}]", r.id, t + 1), 0.0, inf)).collect())
        .collect();

    let p = |t: usize, i: usize| LinExpr::sum(psg[t][i].iter().copied());
    let mut commitment_cost = LinExpr::new();
    let mut generation_cost = LinExpr::new();

    for (i, g) in units.iter().enumerate() {
        let id = &g.id;
        for t in 0..nt {
            let tag = format!("{id},{}", t + 1);
            let (it, ut, dt, ot) = (vi[t][i], vu[t][i], vd[t][i], vo[t][i]);
            commitment_cost.add_term(ut, g.startup_cost).add_term(it, g.noload_cost);

            model.add_constraint(
                format!("gen_lo[{tag}]"),
                p(t, i) - rsr[t][i] - LinExpr::term(it, g.p_min),
                Sense::Ge,
                0.0,
            );
            model.add_constraint(
                format!("gen_hi[{tag}]"),
                p(t, i) + rsr[t][i] - LinExpr::term(it, g.p_max),
                Sense::Le,
                0.0,
            );
            for (k, s) in g.segments.iter().enumerate() {
                let v = psg[t][i][k];
                generation_cost.add_term(v, s.cost_per_mwh);
                model.add_constraint(
                    format!("seg[{tag},{}]", k + 1),
                    LinExpr::var(v) - LinExpr::term(it, s.width_mw),
                    Sense::Le,
                    0.0,
                );
            }
            model.add_constraint(format!("sr_cap[{tag}]"), LinExpr::var(rsr[t][i]) - LinExpr::term(it, g.sr_max), Sense::Le, 0.0);
            model.add_constraint(format!("nr_lo[{tag}]"), LinExpr::var(rnr[t][i]) - LinExpr::term(ot, g.p_min), Sense::Ge, 0.0);
            model.add_constraint(format!("nr_hi[{tag}]"), LinExpr::var(rnr[t][i]) - LinExpr::term(ot, g.nr_max), Sense::Le, 0.0);

            // status logic; I_{i,0} is a constant
            let prev_i = if t == 0 { LinExpr::constant(f64::from(u8::from(g.initial_status.committed))) } else { vi[t - 1][i].into() };
            model.add_constraint(
                format!("status[{tag}]"),
                LinExpr::var(ut) - dt - it + prev_i.clone(),
                Sense::Eq,
                0.0,
            );

            let lo_up = (t + 1).saturating_sub(g.min_up);
            model.add_constraint(
                format!("min_up[{tag}]"),
                LinExpr::sum((lo_up..=t).map(|s| vu[s][i])) - it,
                Sense::Le,
                0.0,
            );
            let lo_dn = (t + 1).saturating_sub(g.min_down);
            model.add_constraint(
                format!("min_down[{tag}]"),
                LinExpr::sum((lo_dn..=t).map(|s| vd[s][i])) + it,
                Sense::Le,
                1.0,
            );

            let prev_p = if t == 0 { LinExpr::constant(g.initial_status.output_mw) } else { p(t - 1, i) };
            let cur_i = LinExpr::var(it);
            model.add_constraint(
                format!("ramp_up[{tag}]"),
                p(t, i) - prev_p.clone()
                    - (LinExpr::constant(g.p_max) - cur_i.clone() * g.p_max)
                    - prev_i.clone() * g.ramp_up
                    - (cur_i.clone() - prev_i.clone()) * g.startup_ramp,
                Sense::Le,
                0.0,
            );
            model.add_constraint(
                format!("ramp_down[{tag}]"),
                prev_p - p(t, i)
                    - (LinExpr::constant(g.p_max) - prev_i.clone() * g.p_max)
                    - cur_i.clone() * g.ramp_down
                    - (prev_i - cur_i) * g.shutdown_ramp,
                Sense::Le,
                0.0,
            );

            model.add_constraint(format!("nr_excl[{tag}]"), LinExpr::var(ot) + it, Sense::Le, 1.0);
            if !g.quick_start {
                model.add_constraint(format!("nr_ns[{tag}]"), ot, Sense::Eq, 0.0);
            }
        }
    }

    let mut slacks = Vec::new();
    let mut slack_cost = LinExpr::new();
    let mut slack = |model: &mut LinearModel, name: String| -> LinExpr {
        match opts.system_slack {
            Some(pen) => {
                let s = model.continuous(name, 0.0, inf);
                slacks.push(s);
                slack_cost.add_term(s, pen);
                LinExpr::var(s)
            }
            None => LinExpr::new(),
        }
    };

    for t in 0..nt {
        let h = t + 1;
        for (j, _) in system.res_units.iter().enumerate() {
            model.add_constraint(
                format!("res_cap[{},{h}]", system.res_units[j].id),
                LinExpr::var(w[t][j]) - inputs.res_cap[t][j].clone(),
                Sense::Le,
                0.0,
            );
        }
        let gen = (0..units.len()).fold(LinExpr::sum(w[t].iter().copied()), |acc, i| acc + p(t, i));
        let load: f64 = inputs.load[t].iter().sum();
        let up = slack(model, format!("slack_bal_up[{h}]"));
        let dn = slack(model, format!("slack_bal_dn[{h}]"));
        model.add_constraint(format!("balance[{h}]"), gen + up - dn, Sense::Eq, load);

        for br in &system.branches {
            let flow = flow_expr(system, br.sensitivity(), |i| p(t, i), |j| w[t][j].into(), &inputs.load[t]);
            let s_hi = slack(model, format!("slack_flow_hi[{},{h}]", br.id));
            let s_lo = slack(model, format!("slack_flow_lo[{},{h}]", br.id));
            model.add_constraint(format!("flow_hi[{},{h}]", br.id), flow.clone() - s_hi, Sense::Le, br.capacity_mw);
            model.add_constraint(format!("flow_lo[{},{h}]", br.id), flow + s_lo, Sense::Ge, -br.capacity_mw);
        }

        if opts.reserve_rows {
            let sr_sum = LinExpr::sum(rsr[t].iter().copied());
            let all = sr_sum.clone() + LinExpr::sum(rnr[t].iter().copied());
            let s1 = slack(model, format!("slack_sr[{h}]"));
            let s2 = slack(model, format!("slack_res[{h}]"));
            model.add_constraint(format!("sr_req[{h}]"), sr_sum - inputs.sr_req[t].clone() + s1, Sense::Ge, 0.0);
            model.add_constraint(
                format!("reserve_req[{h}]"),
                all - inputs.sr_req[t].clone() - inputs.nr_req[t].clone() + s2,
                Sense::Ge,
                0.0,
            );
        }
    }

    Ok(UcVars {
        i: vi,
        u: vu,
        d: vd,
        o: vo,
        psg,
        rsr,
        rnr,
        w,
        slacks,
        commitment_cost,
        generation_cost,
        slack_cost,
    })
}

/// Branch flow `Σ_n s_n · (injection at n)` for one hour.
pub(crate) fn flow_expr(
    system: &PowerSystem,
    row: &[f64],
    p: impl Fn(usize) -> LinExpr,
    w: impl Fn(usize) -> LinExpr,
    load: &[f64],
) -> LinExpr {
    let mut f = LinExpr::new();
    for (i, g) in system.thermal_units.iter().enumerate() {
        f.add_expr(&p(i), row[g.bus]);
    }
    for (j, r) in system.res_units.iter().enumerate() {
        f.add_expr(&w(j), row[r.bus]);
    }
    for (q, &bus) in system.load_buses.iter().enumerate() {
        f.constant -= row[bus] * load[q];
    }
    f
}
