use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::data::{Matrix, PowerSystem};

use super::ed::EdVars;
use super::uc::UcVars;
use super::OpsError;

type Flags = Vec<Vec<bool>>;

fn flags(values: &[f64], ids: &[Vec<crate::milp::VarId>]) -> Flags {
    ids.iter().map(|r| r.iter().map(|v| values[v.0] > 0.5).collect()).collect()
}

fn mw(values: &[f64], ids: &[Vec<crate::milp::VarId>]) -> Matrix {
    ids.iter().map(|r| r.iter().map(|v| values[v.0].max(0.0)).collect()).collect()
}

fn on(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// Day-ahead decisions; all matrices are `[t][unit]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommitmentPlan {
    pub i: Flags,
    pub u: Flags,
    pub d: Flags,
    pub o: Flags,
    pub p: Matrix,
    pub psg: Vec<Matrix>,
    pub w: Matrix,
    pub rsr: Matrix,
    pub rnr: Matrix,
    pub cost_startup: f64,
    pub cost_noload: f64,
    pub cost_generation: f64,
}

impl CommitmentPlan {
    /// Reads a plan from a solution of a model containing the block `vars`.
    /// Costs are recomputed from the rounded binaries and the segment outputs.
    pub fn from_solution(system: &PowerSystem, vars: &UcVars, values: &[f64]) -> Self {
        let i = flags(values, &vars.i);
        let u = flags(values, &vars.u);
        let psg: Vec<Matrix> = vars.psg.iter().map(|row| mw(values, row)).collect();
        let p = psg.iter().map(|row| row.iter().map(|segs| segs.iter().sum()).collect()).collect();
        let (mut su, mut nl, mut gen) = (0.0, 0.0, 0.0);
        for t in 0..i.len() {
            for (k, g) in system.thermal_units.iter().enumerate() {
                su += g.startup_cost * on(u[t][k]);
                nl += g.noload_cost * on(i[t][k]);
                gen += g.segments.iter().zip(&psg[t][k]).map(|(s, x)| s.cost_per_mwh * x).sum::<f64>();
            }
        }
        CommitmentPlan {
            d: flags(values, &vars.d),
            o: flags(values, &vars.o),
            w: mw(values, &vars.w),
            rsr: mw(values, &vars.rsr),
            rnr: mw(values, &vars.rnr),
            i,
            u,
            p,
            psg,
            cost_startup: su,
            cost_noload: nl,
            cost_generation: gen,
        }
    }

    /// `b'x`.
    pub fn commitment_cost(&self) -> f64 {
        self.cost_startup + self.cost_noload
    }

    /// `b'x + c'y`.
    pub fn anticipated_cost(&self) -> f64 {
        self.commitment_cost() + self.cost_generation
    }

    pub fn horizon(&self) -> usize {
        self.i.len()
    }

    /// Checks status logic, `P = Σ P^sg`, `O + I <= 1` and `O = 0` for
    /// non-quick-start units.
    pub fn check(&self, system: &PowerSystem) -> Result<(), OpsError> {
        for t in 0..self.horizon() {
            for (k, g) in system.thermal_units.iter().enumerate() {
                let prev = if t == 0 { g.initial_status.committed } else { self.i[t - 1][k] };
                if on(self.u[t][k]) - on(self.d[t][k]) != on(self.i[t][k]) - on(prev) {
                    return Err(OpsError::InvalidPlan(format!("status logic broken for {} at hour {}", g.id, t + 1)));
                }
                if self.o[t][k] && (self.i[t][k] || !g.quick_start) {
                    return Err(OpsError::InvalidPlan(format!("{} cannot hold NR at hour {}", g.id, t + 1)));
                }
                let sum: f64 = self.psg[t][k].iter().sum();
                if (sum - self.p[t][k]).abs() > 1e-6 {
                    return Err(OpsError::InvalidPlan(format!("P differs from its segments for {}", g.id)));
                }
            }
        }
        Ok(())
    }
}

/// Recourse decisions of the hindsight dispatch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispatchOutcome {
    pub i_ed: Flags,
    pub i_qs: Flags,
    pub u_qs: Flags,
    pub d_qs: Flags,
    pub p: Matrix,
    pub psg: Vec<Matrix>,
    pub w: Matrix,
    /// Load shortfall per hour.
    pub s1: Vec<f64>,
    /// Generation surplus per hour.
    pub s2: Vec<f64>,
    /// Flow overload above / below the limit, `[t][b]`.
    pub s3: Matrix,
    pub s4: Matrix,
    pub cost_qs_startup: f64,
    pub cost_qs_noload: f64,
    pub cost_generation: f64,
    pub cost_slack: f64,
}

impl DispatchOutcome {
    pub fn from_solution(system: &PowerSystem, vars: &EdVars, values: &[f64], penalties: &super::Penalties) -> Self {
        let col = |ids: &[crate::milp::VarId]| ids.iter().map(|v| values[v.0].max(0.0)).collect::<Vec<f64>>();
        let i_qs = flags(values, &vars.i_qs);
        let u_qs = flags(values, &vars.u_qs);
        let psg: Vec<Matrix> = vars.psg.iter().map(|row| mw(values, row)).collect();
        let p = psg.iter().map(|row| row.iter().map(|segs| segs.iter().sum()).collect()).collect();
        let s1 = col(&vars.s1);
        let s2 = col(&vars.s2);
        let s3: Matrix = vars.s3.iter().map(|r| col(r)).collect();
        let s4: Matrix = vars.s4.iter().map(|r| col(r)).collect();
        let (mut su, mut nl, mut gen) = (0.0, 0.0, 0.0);
        for t in 0..i_qs.len() {
            for (k, g) in system.thermal_units.iter().enumerate() {
                su += g.startup_cost * on(u_qs[t][k]);
                nl += g.noload_cost * on(i_qs[t][k]);
                gen += g.segments.iter().zip(&psg[t][k]).map(|(s, x)| s.cost_per_mwh * x).sum::<f64>();
            }
        }
        let slack = penalties.shortfall * s1.iter().sum::<f64>()
            + penalties.surplus * s2.iter().sum::<f64>()
            + penalties.flow * (s3.iter().flatten().sum::<f64>() + s4.iter().flatten().sum::<f64>());
        DispatchOutcome {
            i_ed: flags(values, &vars.i_ed),
            d_qs: flags(values, &vars.d_qs),
            w: mw(values, &vars.w),
            i_qs,
            u_qs,
            p,
            psg,
            s1,
            s2,
            s3,
            s4,
            cost_qs_startup: su,
            cost_qs_noload: nl,
            cost_generation: gen,
            cost_slack: slack,
        }
    }

    /// `d'z`.
    pub fn ed_cost(&self) -> f64 {
        self.cost_qs_startup + self.cost_qs_noload + self.cost_generation + self.cost_slack
    }
}

/// Actual system cost of one day and its breakdown, in dollars.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CostReport {
    pub startup: f64,
    pub noload: f64,
    pub ed_startup: f64,
    pub ed_noload: f64,
    pub generation: f64,
    pub slack: f64,
}

impl CostReport {
    pub fn new(plan: &CommitmentPlan, outcome: &DispatchOutcome) -> Self {
        CostReport {
            startup: plan.cost_startup,
            noload: plan.cost_noload,
            ed_startup: outcome.cost_qs_startup,
            ed_noload: outcome.cost_qs_noload,
            generation: outcome.cost_generation,
            slack: outcome.cost_slack,
        }
    }

    pub fn actual_uc_cost(&self) -> f64 {
        self.startup + self.noload
    }

    pub fn hindsight_ed_cost(&self) -> f64 {
        self.ed_startup + self.ed_noload + self.generation + self.slack
    }

    /// `c^act`; always the sum of the two stage costs above.
    pub fn total(&self) -> f64 {
        self.actual_uc_cost() + self.hindsight_ed_cost()
    }

    pub const CSV_HEADER: [&'static str; 7] = ["startup", "noload", "ed_startup", "ed_noload", "generation", "slack", "total"];

    pub fn csv_fields(&self) -> [f64; 7] {
        [self.startup, self.noload, self.ed_startup, self.ed_noload, self.generation, self.slack, self.total()]
    }
}

/// Writes `(label, report)` rows as CSV with the cost columns above.
pub fn write_cost_csv<W: Write>(out: W, rows: &[(String, CostReport)]) -> Result<(), OpsError> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["day"];
    header.extend(CostReport::CSV_HEADER);
    w.write_record(&header).map_err(|e| OpsError::Io(e.to_string()))?;
    for (label, r) in rows {
        let mut rec = vec![label.clone()];
        rec.extend(r.csv_fields().iter().map(|v| format!("{v:.6}")));
        w.write_record(&rec).map_err(|e| OpsError::Io(e.to_string()))?;
    }
    w.flush().map_err(|e| OpsError::Io(e.to_string()))?;
    Ok(())
}
