//! Seeded LP corpus and the KKT-equivalence check run on it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::kkt::{derive_kkt, KktOptions, BIG_M_BINDING_TOL};
use super::model::{LinExpr, LinearModel, Sense};
use super::solver::{solve, SolveOptions, SolveStatus};
use super::MilpError;

/// A feasible, bounded LP with 2 to 10 boxed columns and 1 to 15 rows. Rows
/// hold at a hidden interior point; about one row in six is an equality
/// through it.
pub fn random_lp(seed: u64) -> LinearModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..=10);
    let m = rng.gen_range(1..=15);
    let mut lp = LinearModel::new();
    let vars: Vec<_> = (0..n).map(|j| lp.continuous(format!("x{j}"), 0.0, 10.0)).collect();
    let point: Vec<f64> = (0..n).map(|_| rng.gen_range(1.0..9.0)).collect();
    for r in 0..m {
        let mut row = LinExpr::new();
        let mut at = 0.0;
        for (j, &v) in vars.iter().enumerate() {
            if rng.gen_bool(0.6) {
                let a = (rng.gen_range(-5.0f64..5.0) * 4.0).round() / 4.0;
                if a != 0.0 {
                    row.add_term(v, a);
                    at += a * point[j];
                }
            }
        }
        if row.terms.is_empty() {
            row.add_term(vars[r % n], 1.0);
            at += point[r % n];
        }
        match rng.gen_range(0..6) {
            0 => lp.add_constraint(format!("r{r}"), row, Sense::Eq, at),
            1 | 2 => lp.add_constraint(format!("r{r}"), row, Sense::Ge, at - rng.gen_range(0.0..6.0)),
            _ => lp.add_constraint(format!("r{r}"), row, Sense::Le, at + rng.gen_range(0.0..6.0)),
        };
    }
    let objective = vars.iter().fold(LinExpr::new(), |acc, &v| acc + LinExpr::term(v, rng.gen_range(-4.0..4.0)));
    lp.add_objective(&objective);
    lp
}

/// `min 2x + 3y s.t. x + y >= 10, 0 <= x <= 4, 0 <= y <= 20`: optimum 26 at
/// (4, 6) with multiplier 3 on the covering row, so any Big-M below 3 cuts
/// the optimum off.
pub fn big_m_sentinel_lp() -> LinearModel {
    let mut lp = LinearModel::new();
    let x = lp.continuous("x", 0.0, 4.0);
    let y = lp.continuous("y", 0.0, 20.0);
    lp.add_constraint("cover", LinExpr::var(x) + y, Sense::Ge, 10.0);
    lp.add_objective(&(LinExpr::term(x, 2.0) + LinExpr::term(y, 3.0)));
    lp
}

#[derive(Debug, Clone, Serialize)]
pub struct KktCheck {
    pub direct: f64,
    /// Largest LP objective over the KKT system; `None` if it is infeasible.
    pub embedded: Option<f64>,
    pub relative_difference: f64,
    pub binding_big_m: usize,
}

impl KktCheck {
    pub fn passed(&self, tol: f64) -> bool {
        self.embedded.is_some() && self.relative_difference <= tol && self.binding_big_m == 0
    }
}

/// Solves `lp` directly, then maximizes its objective over the KKT system.
/// A sound KKT system admits only optimal points, so both values agree.
pub fn kkt_equivalence(lp: &LinearModel, big_m: f64) -> Result<KktCheck, MilpError> {
    let exact = SolveOptions::exact();
    let direct = solve(lp, &exact)?.require_optimal("corpus LP")?.objective;
    let kkt = derive_kkt(lp, &KktOptions { big_m_primal: big_m, big_m_dual: big_m, parameters: vec![] })?;
    let mut model = kkt.model.clone();
    model.add_objective(&-kkt.objective.clone());
    let r = solve(&model, &exact)?;
    let (embedded, binding) = match r.status {
        SolveStatus::Optimal => (Some(kkt.objective.eval(&r.values)), kkt.binding_big_m(&r.values, BIG_M_BINDING_TOL).len()),
        SolveStatus::Infeasible => (None, 0),
        s => return Err(MilpError::NotSolved { what: "KKT system".into(), status: s }),
    };
    let relative_difference = embedded.map_or(f64::INFINITY, |e| (e - direct).abs() / direct.abs().max(1.0));
    Ok(KktCheck { direct, embedded, relative_difference, binding_big_m: binding })
}
