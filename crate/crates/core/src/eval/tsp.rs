//! Scenario-based two-stage stochastic commitment and its scenario sets.
//!
//! The first stage carries no reserve adequacy rows; reserves only matter
//! through the per-scenario dispatch, which reuses the full ED block on the
//! first-stage columns.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{Matrix, PowerSystem, ReserveRequirement};
use crate::milp::{solve, LinearModel, SolveOptions, SolveStatus};
use crate::ops::{build_ed_into, build_uc_into, solve_ed, CommitmentPlan, OpsError, Penalties, PlanRef, UcInputs, UcOptions};

use super::EvalError;

/// One joint realization of RES availability and load, `[t][j]` / `[t][q]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Realization {
    pub res: Matrix,
    pub load: Matrix,
}

impl Realization {
    fn flat(&self) -> Vec<f64> {
        self.res.iter().chain(&self.load).flatten().copied().collect()
    }
}

/// Realizations with probabilities: nonnegative, summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UncertaintyScenarioSet {
    realizations: Vec<Realization>,
    probabilities: Vec<f64>,
}

impl UncertaintyScenarioSet {
    pub fn new(realizations: Vec<Realization>, probabilities: Vec<f64>) -> Result<Self, EvalError> {
        if realizations.is_empty() || realizations.len() != probabilities.len() {
            return Err(EvalError::Invalid("a scenario set needs one probability per realization".into()));
        }
        if probabilities.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(EvalError::Invalid("scenario probabilities must be nonnegative".into()));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(EvalError::Invalid(format!("scenario probabilities sum to {total}, not 1")));
        }
        let shape = |r: &Realization| (r.res.len(), r.res.first().map_or(0, Vec::len), r.load.first().map_or(0, Vec::len));
        let first = shape(&realizations[0]);
        let ragged = |r: &Realization| r.res.iter().any(|x| x.len() != first.1) || r.load.iter().any(|x| x.len() != first.2);
        if realizations.iter().any(|r| shape(r) != first || r.load.len() != first.0 || ragged(r)) {
            return Err(EvalError::Invalid("realizations differ in shape".into()));
        }
        if realizations.iter().flat_map(|r| r.res.iter().chain(&r.load)).flatten().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(EvalError::Invalid("realizations must be finite and nonnegative".into()));
        }
        Ok(Self { realizations, probabilities })
    }

    /// Equiprobable set.
    pub fn uniform(realizations: Vec<Realization>) -> Result<Self, EvalError> {
        let n = realizations.len().max(1);
        Self::new(realizations, vec![1.0 / n as f64; n])
    }

    pub fn len(&self) -> usize {
        self.realizations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.realizations.is_empty()
    }

    pub fn realizations(&self) -> &[Realization] {
        &self.realizations
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Realization, f64)> {
        self.realizations.iter().zip(self.probabilities.iter().copied())
    }
}

#[derive(Debug, Clone)]
pub struct TspSolution {
    pub plan: CommitmentPlan,
    /// `b'x + c'y + Σ p_h d'z_h` at the returned point.
    pub objective: f64,
    pub best_bound: f64,
    /// The solver stopped on a limit; `plan` is its incumbent.
    pub limit_reached: bool,
}

pub fn solve_tsp(
    system: &PowerSystem,
    res_prediction: &Matrix,
    load_prediction: &Matrix,
    set: &UncertaintyScenarioSet,
    penalties: &Penalties,
    opts: &SolveOptions,
) -> Result<TspSolution, EvalError> {
    let no_reserve = vec![ReserveRequirement::default(); system.horizon()];
    let inputs = UcInputs::constant(res_prediction, &no_reserve, load_prediction);
    let mut model = LinearModel::new();
    let uc = build_uc_into(&mut model, system, &inputs, UcOptions { reserve_rows: false, system_slack: None })?;
    let plan_ref = PlanRef::variable(&uc);
    let mut objective = uc.anticipated_cost();
    for (h, p) in set.iter() {
        let ed = build_ed_into(&mut model, system, &plan_ref, &h.res, &h.load, penalties)?;
        objective.add_expr(&ed.cost(), p);
    }
    model.add_objective(&objective);
    let r = solve(&model, opts)?;
    match r.status {
        SolveStatus::Infeasible => Err(OpsError::UcInfeasible("no first-stage commitment meets the predicted load".into()).into()),
        _ if r.has_solution() => Ok(TspSolution {
            plan: CommitmentPlan::from_solution(system, &uc, &r.values),
            objective: r.objective,
            best_bound: r.best_bound,
            limit_reached: r.status == SolveStatus::LimitReached,
        }),
        s => Err(crate::milp::MilpError::NotSolved { what: "stochastic commitment".into(), status: s }.into()),
    }
}

/// The stochastic objective of a fixed first-stage plan.
pub fn tsp_value_of_plan(
    system: &PowerSystem,
    plan: &CommitmentPlan,
    set: &UncertaintyScenarioSet,
    penalties: &Penalties,
    opts: &SolveOptions,
) -> Result<f64, EvalError> {
    let mut total = plan.anticipated_cost();
    for (h, p) in set.iter() {
        total += p * solve_ed(system, plan, &h.res, &h.load, penalties, opts)?.ed_cost();
    }
    Ok(total)
}

/// Per-entry lower and upper bounds of the sampled realizations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioBounds {
    pub res_lower: Matrix,
    pub res_upper: Matrix,
    pub load_lower: Matrix,
    pub load_upper: Matrix,
}

impl ScenarioBounds {
    fn pairs(&self) -> Result<Vec<(f64, f64)>, EvalError> {
        let zip = |lo: &Matrix, hi: &Matrix| -> Result<Vec<(f64, f64)>, EvalError> {
            if lo.len() != hi.len() || lo.iter().zip(hi).any(|(a, b)| a.len() != b.len()) {
                return Err(EvalError::Invalid("lower and upper bounds differ in shape".into()));
            }
            Ok(lo.iter().flatten().copied().zip(hi.iter().flatten().copied()).collect())
        };
        let mut out = zip(&self.res_lower, &self.res_upper)?;
        out.extend(zip(&self.load_lower, &self.load_upper)?);
        if out.iter().any(|(a, b)| !(a.is_finite() && b.is_finite() && 0.0 <= *a && a <= b)) {
            return Err(EvalError::Invalid("bounds must be finite with 0 <= lower <= upper".into()));
        }
        Ok(out)
    }

    fn unflatten(&self, flat: &[f64]) -> Realization {
        let mut it = flat.iter().copied();
        let mut take = |shape: &Matrix| -> Matrix {
            shape.iter().map(|r| r.iter().map(|_| it.next().expect("sample length")).collect()).collect()
        };
        let res = take(&self.res_lower);
        let load = take(&self.load_lower);
        Realization { res, load }
    }
}

/// `count` equiprobable Latin hypercube draws within `bounds`.
pub fn generate_scenarios(bounds: &ScenarioBounds, count: usize, seed: u64) -> Result<UncertaintyScenarioSet, EvalError> {
    if count == 0 {
        return Err(EvalError::Invalid("at least one scenario must be drawn".into()));
    }
    let dims = bounds.pairs()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = vec![vec![0.0; dims.len()]; count];
    let mut strata: Vec<usize> = (0..count).collect();
    for (d, &(lo, hi)) in dims.iter().enumerate() {
        strata.shuffle(&mut rng);
        for (k, &s) in strata.iter().enumerate() {
            let u: f64 = rng.gen();
            samples[k][d] = lo + (hi - lo) * (s as f64 + u) / count as f64;
        }
    }
    UncertaintyScenarioSet::uniform(samples.iter().map(|s| bounds.unflatten(s)).collect())
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Subset counts up to which the reduction enumerates every medoid set.
const EXHAUSTIVE_SUBSETS: u128 = 20_000;

fn binomial(n: usize, k: usize) -> u128 {
    (0..k).fold(1u128, |acc, i| acc.saturating_mul((n - i) as u128) / (i as u128 + 1))
}

/// Lexicographically first `k`-subset of `0..n` minimizing `cost`.
fn best_subset(n: usize, k: usize, cost: impl Fn(&[usize]) -> f64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..k).collect();
    let mut best = (cost(&idx), idx.clone());
    loop {
        let Some(pos) = (0..k).rev().find(|&j| idx[j] < n - k + j) else {
            return best.1;
        };
        idx[pos] += 1;
        for j in pos + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
        let c = cost(&idx);
        if c < best.0 - 1e-12 * best.0.abs().max(1e-300) {
            best = (c, idx.clone());
        }
    }
}

/// Probability-weighted k-medoids on Euclidean distance. Exact by
/// enumeration when there are at most 20 000 candidate medoid sets,
/// otherwise a greedy build followed by best-swap descent. Each kept
/// realization carries the probability of the points nearest to it; ties go
/// to the lower original index.
pub fn reduce_scenarios(set: &UncertaintyScenarioSet, ns: usize) -> Result<UncertaintyScenarioSet, EvalError> {
    let n = set.len();
    if ns < 1 || ns > n {
        return Err(EvalError::Invalid(format!("cannot reduce {n} scenarios to {ns}")));
    }
    let points: Vec<Vec<f64>> = set.realizations.iter().map(Realization::flat).collect();
    let p = &set.probabilities;
    let dist: Vec<Vec<f64>> = points.iter().map(|a| points.iter().map(|b| distance(a, b)).collect()).collect();

    let assigned = |medoids: &[usize]| -> f64 {
        (0..n).map(|i| p[i] * medoids.iter().map(|&m| dist[m][i]).fold(f64::INFINITY, f64::min)).sum()
    };
    let medoids = if binomial(n, ns) <= EXHAUSTIVE_SUBSETS {
        best_subset(n, ns, assigned)
    } else {
        swap_descent(&dist, p, ns)
    };
    finish(set, &dist, medoids)
}

fn swap_descent(dist: &[Vec<f64>], p: &[f64], ns: usize) -> Vec<usize> {
    let n = p.len();
    let mut medoids: Vec<usize> = Vec::with_capacity(ns);
    let mut near = vec![f64::INFINITY; n];
    while medoids.len() < ns {
        let best = (0..n)
            .filter(|c| !medoids.contains(c))
            .map(|c| (c, (0..n).map(|i| p[i] * near[i].min(dist[c][i])).sum::<f64>()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("ns <= n")
            .0;
        medoids.push(best);
        for i in 0..n {
            near[i] = near[i].min(dist[best][i]);
        }
    }

    let scale = (0..n).map(|i| p[i] * near[i]).sum::<f64>().max(1e-300);
    for _ in 0..10 * n {
        // nearest medoid slot and nearest / second-nearest distances
        let mut slot = vec![0usize; n];
        let mut d1 = vec![f64::INFINITY; n];
        let mut d2 = vec![f64::INFINITY; n];
        for i in 0..n {
            for (k, &m) in medoids.iter().enumerate() {
                let d = dist[m][i];
                if d < d1[i] {
                    d2[i] = d1[i];
                    d1[i] = d;
                    slot[i] = k;
                } else if d < d2[i] {
                    d2[i] = d;
                }
            }
        }
        let mut best = (0.0, 0usize, 0usize);
        for o in (0..n).filter(|o| !medoids.contains(o)) {
            let mut common = 0.0;
            let mut own = vec![0.0; ns];
            for i in 0..n {
                let d = dist[o][i];
                let keep = p[i] * (d.min(d1[i]) - d1[i]);
                common += keep;
                own[slot[i]] += p[i] * (d.min(d2[i]) - d1[i]) - keep;
            }
            for (k, delta) in own.iter().enumerate() {
                if common + delta < best.0 {
                    best = (common + delta, k, o);
                }
            }
        }
        if best.0 >= -1e-12 * scale {
            break;
        }
        medoids[best.1] = best.2;
    }
    medoids
}

fn finish(set: &UncertaintyScenarioSet, dist: &[Vec<f64>], mut medoids: Vec<usize>) -> Result<UncertaintyScenarioSet, EvalError> {
    let (n, ns, p) = (set.len(), medoids.len(), &set.probabilities);
    medoids.sort_unstable();
    let mut weight = vec![0.0; ns];
    for i in 0..n {
        let k = (0..ns).min_by(|&a, &b| dist[medoids[a]][i].total_cmp(&dist[medoids[b]][i])).expect("ns >= 1");
        weight[k] += p[i];
    }
    let total: f64 = weight.iter().sum();
    let realizations = medoids.iter().map(|&m| set.realizations[m].clone()).collect();
    UncertaintyScenarioSet::new(realizations, weight.iter().map(|w| w / total).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar(v: f64) -> Realization {
        Realization { res: vec![vec![v]], load: vec![vec![0.0]] }
    }

    #[test]
    fn probabilities_are_validated() {
        assert!(UncertaintyScenarioSet::new(vec![scalar(1.0), scalar(2.0)], vec![0.5, 0.6]).is_err());
        assert!(UncertaintyScenarioSet::new(vec![scalar(1.0)], vec![-0.0 - 1.0]).is_err());
        assert!(UncertaintyScenarioSet::new(vec![], vec![]).is_err());
        assert!(UncertaintyScenarioSet::new(vec![scalar(1.0), scalar(2.0)], vec![0.25, 0.75]).is_ok());
    }

    #[test]
    fn large_sets_find_one_medoid_per_cluster() {
        let centers = [0.0, 100.0, 200.0, 300.0];
        let pts: Vec<Realization> = (0..60).map(|k| scalar(centers[k % 4] + (k / 4) as f64 * 0.1)).collect();
        assert!(binomial(60, 4) > EXHAUSTIVE_SUBSETS);
        let reduced = reduce_scenarios(&UncertaintyScenarioSet::uniform(pts).unwrap(), 4).unwrap();
        let kept: Vec<f64> = reduced.realizations().iter().map(|r| r.res[0][0]).collect();
        for (c, k) in centers.iter().zip(&kept) {
            assert!((k - c - 0.7).abs() < 1e-9, "{kept:?}");
        }
        assert!(reduced.probabilities().iter().all(|p| (p - 0.25).abs() < 1e-12));
    }

    #[test]
    fn latin_hypercube_fills_every_stratum() {
        let bounds = ScenarioBounds {
            res_lower: vec![vec![10.0], vec![0.0]],
            res_upper: vec![vec![20.0], vec![5.0]],
            load_lower: vec![vec![50.0], vec![50.0]],
            load_upper: vec![vec![60.0], vec![50.0]],
        };
        let n = 16;
        let set = generate_scenarios(&bounds, n, 3).unwrap();
        let mut hits = vec![false; n];
        for r in set.realizations() {
            let v = r.res[0][0];
            assert!((10.0..20.0).contains(&v));
            hits[((v - 10.0) / 10.0 * n as f64) as usize] = true;
            assert_eq!(r.load[1][0], 50.0);
        }
        assert!(hits.iter().all(|h| *h));
        assert_eq!(set, generate_scenarios(&bounds, n, 3).unwrap());
    }
}
