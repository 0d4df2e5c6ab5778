//! Desk-scale solvers: zero-sum LP values, support enumeration for approximate
//! Nash equilibria, smoothed best-response dynamics and fixed-point search.

use crate::bimatrix::BimatrixGame;
use crate::error::{Error, Result};
use crate::games::{action_values, classify_equilibrium, EquilibriumReport, MixedProfile, SuccinctGame};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::time::{Duration, Instant};

/// Constant in the support-size cap `⌈c · ln n / ε²⌉`.
pub const SUPPORT_CAP_CONSTANT: f64 = 12.0;
const PIVOT_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverBudget {
    /// Overrides the support-size cap when set.
    pub max_support: Option<usize>,
    /// Smallest step of the fixed-point pattern search.
    pub grid_resolution: f64,
    pub iterations: usize,
    pub wall_clock_secs: f64,
    /// Candidate profiles support enumeration may test.
    pub max_candidates: u64,
    pub seed: u64,
}

impl Default for SolverBudget {
    fn default() -> Self {
        Self {
            max_support: None,
            grid_resolution: 1e-9,
            iterations: 10_000,
            wall_clock_secs: 60.0,
            max_candidates: 50_000_000,
            seed: 0,
        }
    }
}

impl SolverBudget {
    pub fn validate(&self) -> Result<()> {
        if self.max_support == Some(0)
            || !(self.grid_resolution > 0.0)
            || self.iterations == 0
            || !(self.wall_clock_secs > 0.0)
            || self.max_candidates == 0
        {
            return Err(Error::Argument("solver budget fields must be positive".into()));
        }
        Ok(())
    }

    fn deadline(&self) -> Instant {
        Instant::now() + Duration::from_secs_f64(self.wall_clock_secs)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverReport {
    pub profile: Option<MixedProfile>,
    pub regrets: Vec<f64>,
    pub residual: Option<f64>,
    pub queries: u64,
    pub iterations: u64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub value: f64,
    /// Maximizing row strategy.
    pub row: Vec<f64>,
    /// Minimizing column strategy.
    pub col: Vec<f64>,
}

/// Value and optimal strategies of the zero-sum game where the row player
/// receives `m[i][j]`.
pub fn lp_value(m: &[Vec<f64>]) -> Result<LpSolution> {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    if rows == 0 || cols == 0 || m.iter().any(|r| r.len() != cols || r.iter().any(|v| !v.is_finite())) {
        return Err(Error::Argument("matrix must be finite and rectangular".into()));
    }
    // Shift so every entry is at least 1; then max 1ᵀv s.t. Mv ≤ 1, v ≥ 0.
    let lo = m.iter().flatten().copied().fold(f64::INFINITY, f64::min);
    let shift = 1.0 - lo;
    let width = cols + rows + 1;
    let mut t: Vec<Vec<f64>> = (0..rows)
        .map(|i| {
            let mut r = vec![0.0; width];
            for j in 0..cols {
                r[j] = m[i][j] + shift;
            }
            r[cols + i] = 1.0;
            r[width - 1] = 1.0;
            r
        })
        .collect();
    let mut obj = vec![0.0; width];
    obj[..cols].iter_mut().for_each(|v| *v = -1.0);
    let mut basis: Vec<usize> = (cols..cols + rows).collect();
    loop {
        let Some(enter) = (0..width - 1).find(|&j| obj[j] < -PIVOT_TOL) else { break };
        let mut leave: Option<(usize, f64)> = None;
        for (i, r) in t.iter().enumerate() {
            if r[enter] > PIVOT_TOL {
                let ratio = r[width - 1] / r[enter];
                let better = match leave {
                    None => true,
                    Some((l, best)) => ratio < best - PIVOT_TOL || (ratio <= best + PIVOT_TOL && basis[i] < basis[l]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let (pr, _) = leave.ok_or_else(|| Error::Construction("unbounded program".into()))?;
        let p = t[pr][enter];
        t[pr].iter_mut().for_each(|v| *v /= p);
        let pivot_row = t[pr].clone();
        for (i, r) in t.iter_mut().enumerate() {
            if i != pr && r[enter] != 0.0 {
                let f = r[enter];
                r.iter_mut().zip(&pivot_row).for_each(|(v, q)| *v -= f * q);
            }
        }
        let f = obj[enter];
        obj.iter_mut().zip(&pivot_row).for_each(|(v, q)| *v -= f * q);
        basis[pr] = enter;
    }
    let total = obj[width - 1];
    let mut col = vec![0.0; cols];
    for (i, &b) in basis.iter().enumerate() {
        if b < cols {
            col[b] = t[i][width - 1] / total;
        }
    }
    let row: Vec<f64> = (0..rows).map(|i| obj[cols + i].max(0.0) / total).collect();
    Ok(LpSolution { value: 1.0 / total - shift, row, col })
}

/// Support-size cap `min(n, ⌈c · ln n / ε²⌉)`, at least 1.
pub fn support_cap(n: usize, eps: f64) -> usize {
    let c = (SUPPORT_CAP_CONSTANT * (n as f64).ln() / (eps * eps)).ceil();
    (c.max(1.0) as usize).min(n).max(1)
}

/// Nondecreasing index sequences of length `size` over `0..n`, lexicographic.
pub fn multisets(n: usize, size: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0usize; size];
    loop {
        out.push(cur.clone());
        let Some(pos) = (0..size).rev().find(|&p| cur[p] + 1 < n) else { return out };
        let v = cur[pos] + 1;
        cur[pos..].iter_mut().for_each(|c| *c = v);
    }
}

fn mixture(ms: &[usize], n: usize) -> Vec<f64> {
    let mut p = vec![0.0; n];
    for &i in ms {
        p[i] += 1.0 / ms.len() as f64;
    }
    p
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupportSearch {
    pub profile: MixedProfile,
    pub kappa: usize,
    pub cap: usize,
    pub candidates: u64,
    pub report: EquilibriumReport,
}

impl SupportSearch {
    pub fn to_report(&self, seed: u64) -> SolverReport {
        SolverReport {
            profile: Some(self.profile.clone()),
            regrets: self.report.regrets.clone(),
            residual: None,
            queries: self.candidates,
            iterations: self.kappa as u64,
            seed,
        }
    }
}

/// First pair of uniform multiset mixtures, by size then lexicographically,
/// that verifies as an ε-ANE. Payoffs are expected in `[0, 1]`.
pub fn support_enumeration_ane(g: &BimatrixGame, eps: f64, budget: &SolverBudget) -> Result<SupportSearch> {
    budget.validate()?;
    if !(eps > 0.0) {
        return Err(Error::Argument("epsilon must be positive".into()));
    }
    let (rows, cols) = (g.rows(), g.cols());
    let cap = budget.max_support.unwrap_or_else(|| support_cap(rows.max(cols), eps));
    let succinct = g.to_succinct();
    let deadline = budget.deadline();
    let mut candidates: u64 = 0;
    for kappa in 1..=cap {
        let xs = multisets(rows, kappa);
        let ys = multisets(cols, kappa);
        // Row values against each column mixture, column values against each row mixture.
        let ry: Vec<(Vec<f64>, f64)> = ys
            .iter()
            .map(|y| {
                let v = g.row_values(&mixture(y, cols));
                let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                (v, m)
            })
            .collect();
        let xc: Vec<(Vec<f64>, f64)> = xs
            .iter()
            .map(|x| {
                let v = g.col_values(&mixture(x, rows));
                let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                (v, m)
            })
            .collect();
        for (xi, x) in xs.iter().enumerate() {
            if Instant::now() > deadline {
                return Err(Error::Budget(format!("wall clock exhausted at support {kappa}")));
            }
            for (yi, y) in ys.iter().enumerate() {
                candidates += 1;
                if candidates > budget.max_candidates {
                    return Err(Error::Budget(format!("{} candidates tried", budget.max_candidates)));
                }
                let (rv, rmax) = &ry[yi];
                let ra = rmax - x.iter().map(|&i| rv[i]).sum::<f64>() / kappa as f64;
                if ra > eps {
                    continue;
                }
                let (cv, cmax) = &xc[xi];
                let rb = cmax - y.iter().map(|&j| cv[j]).sum::<f64>() / kappa as f64;
                if rb > eps {
                    continue;
                }
                let profile = MixedProfile { probs: vec![mixture(x, rows), mixture(y, cols)] };
                let report = classify_equilibrium(&succinct, &profile, eps, 0.0)?;
                if report.ane {
                    return Ok(SupportSearch { profile, kappa, cap, candidates, report });
                }
            }
        }
    }
    Err(Error::Budget(format!("no {eps}-ANE with support up to {cap}")))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DynamicsOutcome {
    /// Visited profile with the fewest players above `target_epsilon`, then
    /// the smallest maximum regret.
    pub best: MixedProfile,
    pub report: EquilibriumReport,
    /// Final iterate, a running average of smoothed best responses.
    pub average: MixedProfile,
    pub iterations: u64,
}

fn softmax(v: &[f64], temp: f64) -> Vec<f64> {
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = v.iter().map(|x| ((x - m) / temp).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|x| x / s).collect()
}

/// Smoothed fictitious play from a seeded interior start, with logit
/// responses at a temperature shrinking like `1/√t`.
pub fn regret_dynamics(game: &SuccinctGame, budget: &SolverBudget, target_epsilon: f64) -> Result<DynamicsOutcome> {
    budget.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
    let n = game.players();
    let mut x = MixedProfile {
        probs: game
            .action_counts()
            .iter()
            .map(|&k| {
                let w: Vec<f64> = (0..k).map(|_| 1.0 + rng.gen::<f64>()).collect();
                let s: f64 = w.iter().sum();
                w.into_iter().map(|v| v / s).collect()
            })
            .collect(),
    };
    let span = (game.range().1 - game.range().0).max(1e-12);
    let deadline = budget.deadline();
    let mut best: Option<((usize, f64), MixedProfile)> = None;
    let mut iterations = 0;
    for t in 0..budget.iterations {
        iterations = t as u64 + 1;
        let values: Vec<Vec<f64>> = (0..n).map(|i| action_values(game, &x, i).values).collect();
        let regrets: Vec<f64> = values
            .iter()
            .zip(&x.probs)
            .map(|(v, p)| {
                let b = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                b - v.iter().zip(p).map(|(a, q)| a * q).sum::<f64>()
            })
            .collect();
        let key = (
            regrets.iter().filter(|&&r| r > target_epsilon).count(),
            regrets.iter().copied().fold(0.0, f64::max),
        );
        if best.as_ref().map_or(true, |(k, _)| key.0 < k.0 || (key.0 == k.0 && key.1 < k.1)) {
            best = Some((key, x.clone()));
        }
        if key.1 == 0.0 || Instant::now() > deadline {
            break;
        }
        let temp = 0.05 * span / ((t + 1) as f64).sqrt();
        let step = 1.0 / (t as f64 + 2.0);
        for (p, v) in x.probs.iter_mut().zip(&values) {
            let br = softmax(v, temp);
            p.iter_mut().zip(&br).for_each(|(a, b)| *a = (1.0 - step) * *a + step * b);
        }
    }
    let (_, best) = best.expect("at least one iteration");
    let report = classify_equilibrium(game, &best, target_epsilon, 0.0)?;
    Ok(DynamicsOutcome { best, report, average: x, iterations })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FixedPointResult {
    pub x: Vec<f64>,
    pub residual: f64,
    pub evaluations: u64,
    pub restarts: usize,
    /// Best residual so far after each restart.
    pub best_history: Vec<f64>,
}

/// `sqrt(mean((f(x) − x)²))`.
pub fn residual_of(f: &dyn Fn(&[f64]) -> Vec<f64>, x: &[f64]) -> f64 {
    let fx = f(x);
    (fx.iter().zip(x).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / x.len() as f64).sqrt()
}

/// Multi-start coordinate pattern search on the residual over `[lo, hi]^dim`,
/// starting at each hint and then at `random_starts` uniform points. Stops
/// early once the residual reaches `target`.
#[allow(clippy::too_many_arguments)]
pub fn fixed_point_search(
    f: &dyn Fn(&[f64]) -> Vec<f64>,
    dim: usize,
    (lo, hi): (f64, f64),
    hints: &[Vec<f64>],
    random_starts: usize,
    initial_step: f64,
    target: f64,
    budget: &SolverBudget,
) -> Result<FixedPointResult> {
    budget.validate()?;
    if dim == 0 || !(lo < hi) || !(initial_step > 0.0) {
        return Err(Error::Argument("need a nonempty box and a positive step".into()));
    }
    if let Some(h) = hints.iter().find(|h| h.len() != dim) {
        return Err(Error::Width { expected: dim, got: h.len() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
    let mut starts: Vec<Vec<f64>> = hints.iter().map(|h| h.iter().map(|v| v.clamp(lo, hi)).collect()).collect();
    starts.extend((0..random_starts).map(|_| (0..dim).map(|_| rng.gen_range(lo..=hi)).collect::<Vec<f64>>()));
    let deadline = budget.deadline();
    let max_evals = budget.iterations as u64;
    let mut evals: u64 = 0;
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut history = Vec::new();
    let mut restarts = 0;
    'starts: for start in starts {
        restarts += 1;
        let mut x = start;
        let mut r = residual_of(f, &x);
        evals += 1;
        let mut step = initial_step;
        while step >= budget.grid_resolution && r > target {
            let mut improved = false;
            for i in 0..dim {
                for dir in [1.0, -1.0] {
                    if evals >= max_evals || Instant::now() > deadline {
                        break;
                    }
                    let old = x[i];
                    x[i] = (old + dir * step).clamp(lo, hi);
                    if x[i] == old {
                        continue;
                    }
                    let rn = residual_of(f, &x);
                    evals += 1;
                    if rn < r {
                        r = rn;
                        improved = true;
                        break;
                    }
                    x[i] = old;
                }
            }
            if !improved {
                step /= 2.0;
            }
            if evals >= max_evals || Instant::now() > deadline {
                break;
            }
        }
        if best.as_ref().map_or(true, |(_, b)| r < *b) {
            best = Some((x, r));
        }
        history.push(best.as_ref().unwrap().1);
        if best.as_ref().unwrap().1 <= target || evals >= max_evals || Instant::now() > deadline {
            break 'starts;
        }
    }
    let (x, residual) = best.ok_or_else(|| Error::Argument("no starting points".into()))?;
    Ok(FixedPointResult { x, residual, evaluations: evals, restarts, best_history: history })
}
