//! Succinct multiplayer games, approximate-equilibrium checkers and the
//! imitation-game constructions over a Brouwer function.

use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

/// Support-product size up to which expectations are exact.
pub const EXACT_BUDGET: u64 = 1_000_000;
pub const MC_SAMPLES: usize = 100_000;
pub const MC_SEED: u64 = 0x5eed;
/// Probabilities at or below this count as outside the support.
pub const SUPPORT_TOL: f64 = 1e-12;
/// Slack in flag comparisons against ε.
pub const FLAG_TOL: f64 = 1e-12;

pub type PayoffFn = dyn Fn(usize, &[usize]) -> f64 + Send + Sync;
pub type ActionValuesFn = dyn Fn(usize, &MixedProfile) -> Vec<f64> + Send + Sync;
pub type UnitMap = dyn Fn(&[f64]) -> Vec<f64> + Send + Sync;

#[derive(Clone)]
pub struct SuccinctGame {
    actions: Vec<usize>,
    payoff: Arc<PayoffFn>,
    fast: Option<Arc<ActionValuesFn>>,
    range: (f64, f64),
    /// `(scale, offset)` applied to the raw payoffs.
    pub affine: (f64, f64),
}

impl fmt::Debug for SuccinctGame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SuccinctGame")
            .field("players", &self.actions.len())
            .field("range", &self.range)
            .field("affine", &self.affine)
            .finish()
    }
}

impl SuccinctGame {
    pub fn new(actions: Vec<usize>, range: (f64, f64), payoff: Arc<PayoffFn>) -> Result<Self> {
        if actions.is_empty() || actions.contains(&0) || !(range.0 <= range.1) {
            return Err(Error::Argument("every player needs an action and range must be ordered".into()));
        }
        Ok(Self { actions, payoff, fast: None, range, affine: (1.0, 0.0) })
    }

    /// Attaches an oracle returning `E[u_i(a, x_{-i})]` for every action `a`.
    pub fn with_action_values(mut self, fast: Arc<ActionValuesFn>) -> Self {
        self.fast = Some(fast);
        self
    }

    pub fn players(&self) -> usize {
        self.actions.len()
    }

    pub fn action_counts(&self) -> &[usize] {
        &self.actions
    }

    pub fn range(&self) -> (f64, f64) {
        self.range
    }

    pub fn payoff(&self, player: usize, profile: &[usize]) -> f64 {
        (self.payoff)(player, profile)
    }

    /// The same game with payoffs mapped affinely onto `[0, 1]`.
    pub fn shifted_to_unit(&self) -> Self {
        let (lo, hi) = self.range;
        let scale = if hi > lo { 1.0 / (hi - lo) } else { 1.0 };
        let offset = -lo * scale;
        let raw = self.payoff.clone();
        let fast = self.fast.clone().map(|f| {
            Arc::new(move |i: usize, p: &MixedProfile| f(i, p).into_iter().map(|v| v * scale + offset).collect())
                as Arc<ActionValuesFn>
        });
        Self {
            actions: self.actions.clone(),
            payoff: Arc::new(move |i, p| raw(i, p) * scale + offset),
            fast,
            range: (0.0, (hi - lo) * scale),
            affine: (self.affine.0 * scale, self.affine.1 * scale + offset),
        }
    }
}

/// Counts payoff-oracle reads: distinct `(player, profile)` pairs and raw calls.
#[derive(Debug, Default)]
pub struct QueryCounter {
    seen: Mutex<HashSet<(usize, Vec<usize>)>>,
    raw: AtomicU64,
}

impl QueryCounter {
    pub fn distinct(&self) -> u64 {
        self.seen.lock().unwrap().len() as u64
    }

    pub fn raw(&self) -> u64 {
        self.raw.load(Ordering::SeqCst)
    }

    fn record(&self, player: usize, profile: &[usize]) {
        self.raw.fetch_add(1, Ordering::SeqCst);
        self.seen.lock().unwrap().insert((player, profile.to_vec()));
    }
}

/// Wraps `game` so every payoff read is counted; fast paths are dropped.
pub fn counting_oracle(game: &SuccinctGame) -> (SuccinctGame, Arc<QueryCounter>) {
    let counter = Arc::new(QueryCounter::default());
    let (inner, c) = (game.payoff.clone(), counter.clone());
    let wrapped = SuccinctGame {
        actions: game.actions.clone(),
        payoff: Arc::new(move |i, p| {
            c.record(i, p);
            inner(i, p)
        }),
        fast: None,
        range: game.range,
        affine: game.affine,
    };
    (wrapped, counter)
}

#[derive(Clone, Debug, PartialEq)]
pub struct MixedProfile {
    pub probs: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct PlayerJson {
    actions: Vec<usize>,
    probs: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct ProfileJson {
    players: Vec<PlayerJson>,
}

impl Serialize for MixedProfile {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ProfileJson {
            players: self
                .probs
                .iter()
                .map(|p| PlayerJson { actions: (0..p.len()).collect(), probs: p.clone() })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for MixedProfile {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = ProfileJson::deserialize(d)?;
        let mut probs = Vec::with_capacity(raw.players.len());
        for p in raw.players {
            if p.actions.len() != p.probs.len() {
                return Err(serde::de::Error::custom("actions and probs differ in length"));
            }
            let n = p.actions.iter().max().map_or(0, |m| m + 1);
            let mut dense = vec![0.0; n];
            for (a, q) in p.actions.into_iter().zip(p.probs) {
                dense[a] += q;
            }
            probs.push(dense);
        }
        Ok(MixedProfile { probs })
    }
}

impl MixedProfile {
    pub fn pure(choice: &[usize], counts: &[usize]) -> Self {
        let probs = choice
            .iter()
            .zip(counts)
            .map(|(&a, &n)| (0..n).map(|b| if a == b { 1.0 } else { 0.0 }).collect())
            .collect();
        Self { probs }
    }

    pub fn uniform(counts: &[usize]) -> Self {
        Self { probs: counts.iter().map(|&n| vec![1.0 / n as f64; n]).collect() }
    }

    pub fn validate(&self, game: &SuccinctGame) -> Result<()> {
        if self.probs.len() != game.players() {
            return Err(Error::Width { expected: game.players(), got: self.probs.len() });
        }
        for (i, (p, &n)) in self.probs.iter().zip(&game.actions).enumerate() {
            let sum: f64 = p.iter().sum();
            if p.len() != n || p.iter().any(|&q| !(q >= -1e-12)) || (sum - 1.0).abs() > 1e-9 {
                return Err(Error::Argument(format!("player {i} has an invalid distribution")));
            }
        }
        Ok(())
    }

    pub fn support(&self, player: usize) -> Vec<(usize, f64)> {
        self.probs[player].iter().copied().enumerate().filter(|&(_, q)| q > SUPPORT_TOL).collect()
    }

    pub fn mean_action(&self, player: usize) -> f64 {
        self.probs[player].iter().enumerate().map(|(a, q)| a as f64 * q).sum()
    }
}

/// Calls `visit(profile, probability)` for every pure profile in the product of supports.
pub fn for_each_profile(supports: &[Vec<(usize, f64)>], mut visit: impl FnMut(&[usize], f64)) {
    if supports.iter().any(|s| s.is_empty()) {
        return;
    }
    let mut idx = vec![0usize; supports.len()];
    let mut cur: Vec<usize> = supports.iter().map(|s| s[0].0).collect();
    loop {
        let p: f64 = idx.iter().zip(supports).map(|(&k, s)| s[k].1).product();
        visit(&cur, p);
        let mut j = 0;
        loop {
            if j == supports.len() {
                return;
            }
            idx[j] += 1;
            if idx[j] < supports[j].len() {
                cur[j] = supports[j][idx[j]].0;
                break;
            }
            idx[j] = 0;
            cur[j] = supports[j][0].0;
            j += 1;
        }
    }
}

fn support_product(profile: &MixedProfile, skip: Option<usize>) -> u64 {
    let mut prod: u64 = 1;
    for i in 0..profile.probs.len() {
        if Some(i) != skip {
            prod = prod.saturating_mul(profile.support(i).len() as u64);
        }
    }
    prod
}

fn sample_action(probs: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let mut u: f64 = rng.gen();
    for (a, &q) in probs.iter().enumerate() {
        if u < q {
            return a;
        }
        u -= q;
    }
    probs.iter().rposition(|&q| q > 0.0).unwrap_or(0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Expectation {
    pub value: f64,
    /// Zero when exact; otherwise the reported Monte Carlo half-width.
    pub half_width: f64,
}

/// `E[u_i(a, x_{-i})]` for every action `a`.
pub fn action_values(game: &SuccinctGame, profile: &MixedProfile, player: usize) -> ActionValues {
    if let Some(f) = &game.fast {
        return ActionValues { values: f(player, profile), half_width: 0.0 };
    }
    let n_act = game.actions[player];
    let mut supports: Vec<Vec<(usize, f64)>> = (0..game.players()).map(|i| profile.support(i)).collect();
    if support_product(profile, Some(player)) <= EXACT_BUDGET {
        supports[player] = vec![(0, 1.0)];
        let mut values = vec![0.0; n_act];
        for_each_profile(&supports, |p, w| {
            let mut q = p.to_vec();
            for (a, v) in values.iter_mut().enumerate() {
                q[player] = a;
                *v += w * game.payoff(player, &q);
            }
        });
        ActionValues { values, half_width: 0.0 }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(MC_SEED ^ player as u64);
        let mut values = vec![0.0; n_act];
        let mut q = vec![0usize; game.players()];
        for _ in 0..MC_SAMPLES {
            for (i, slot) in q.iter_mut().enumerate() {
                if i != player {
                    *slot = sample_action(&profile.probs[i], &mut rng);
                }
            }
            for (a, v) in values.iter_mut().enumerate() {
                q[player] = a;
                *v += game.payoff(player, &q);
            }
        }
        values.iter_mut().for_each(|v| *v /= MC_SAMPLES as f64);
        let width = (game.range.1 - game.range.0) * 1.36 / (MC_SAMPLES as f64).sqrt();
        ActionValues { values, half_width: width }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ActionValues {
    pub values: Vec<f64>,
    pub half_width: f64,
}

/// Expected utility of `player`, for a fixed action or for the profile's own mix.
pub fn expected_utility(game: &SuccinctGame, profile: &MixedProfile, player: usize, action: Option<usize>) -> Expectation {
    let av = action_values(game, profile, player);
    let value = match action {
        Some(a) => av.values[a],
        None => profile.probs[player].iter().zip(&av.values).map(|(q, v)| q * v).sum(),
    };
    Expectation { value, half_width: av.half_width }
}

/// Expected utility by sampling every player, exact budget ignored.
pub fn sampled_utility(game: &SuccinctGame, profile: &MixedProfile, player: usize, samples: usize, seed: u64) -> Expectation {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut q = vec![0usize; game.players()];
    let mut sum = 0.0;
    for _ in 0..samples {
        for (i, slot) in q.iter_mut().enumerate() {
            *slot = sample_action(&profile.probs[i], &mut rng);
        }
        sum += game.payoff(player, &q);
    }
    let width = (game.range.1 - game.range.0) * 1.36 / (samples as f64).sqrt();
    Expectation { value: sum / samples as f64, half_width: width }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumReport {
    pub epsilon: f64,
    pub delta: f64,
    /// Best-response value minus the profile's value, per player.
    pub regrets: Vec<f64>,
    /// Best-response value minus the worst supported action, per player.
    pub support_regrets: Vec<f64>,
    pub max_regret: f64,
    pub max_support_regret: f64,
    pub ane: bool,
    pub wsne: bool,
    pub weak_nash: bool,
    pub ws_weak_nash: bool,
    pub exact: bool,
    pub half_width: f64,
}

impl EquilibriumReport {
    /// Players whose regret exceeds `eps`.
    pub fn failing(&self, eps: f64) -> usize {
        self.regrets.iter().filter(|&&r| r > eps + FLAG_TOL).count()
    }
}

pub fn classify_equilibrium(game: &SuccinctGame, profile: &MixedProfile, eps: f64, delta: f64) -> Result<EquilibriumReport> {
    profile.validate(game)?;
    let n = game.players();
    let mut regrets = Vec::with_capacity(n);
    let mut support_regrets = Vec::with_capacity(n);
    let mut half_width: f64 = 0.0;
    for i in 0..n {
        let av = action_values(game, profile, i);
        half_width = half_width.max(av.half_width);
        let best = av.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let current: f64 = profile.probs[i].iter().zip(&av.values).map(|(q, v)| q * v).sum();
        let worst_supported = profile
            .support(i)
            .iter()
            .map(|&(a, _)| av.values[a])
            .fold(f64::INFINITY, f64::min);
        regrets.push((best - current).max(0.0));
        support_regrets.push((best - worst_supported).max(0.0));
    }
    Ok(report_from(regrets, support_regrets, eps, delta, half_width))
}

pub fn report_from(regrets: Vec<f64>, support_regrets: Vec<f64>, eps: f64, delta: f64, half_width: f64) -> EquilibriumReport {
    let n = regrets.len() as f64;
    let fail = regrets.iter().filter(|&&r| r > eps + FLAG_TOL).count() as f64;
    let ws_fail = support_regrets.iter().filter(|&&r| r > eps + FLAG_TOL).count() as f64;
    let max_regret = regrets.iter().copied().fold(0.0, f64::max);
    let max_support_regret = support_regrets.iter().copied().fold(0.0, f64::max);
    EquilibriumReport {
        epsilon: eps,
        delta,
        ane: fail == 0.0,
        wsne: ws_fail == 0.0,
        weak_nash: fail <= delta * n + 1e-9,
        ws_weak_nash: ws_fail <= delta * n + 1e-9,
        regrets,
        support_regrets,
        max_regret,
        max_support_regret,
        exact: half_width == 0.0,
        half_width,
    }
}

fn grid_value(a: usize, k: usize) -> f64 {
    a as f64 / k as f64
}

/// Nearest grid index to `v` on `{0, 1/k, ..., 1}`.
pub fn grid_round(v: f64, k: usize) -> usize {
    (v.clamp(0.0, 1.0) * k as f64).round() as usize
}

/// Imitation game: player `i < n` copies player `n + i`; player `n + j`
/// copies `f_j` of the first group's actions. Actions are `{0, 1/k, ..., 1}`.
pub fn build_grid_game(f: Arc<UnitMap>, n: usize, k: usize) -> Result<SuccinctGame> {
    if n == 0 || k < 2 {
        return Err(Error::Argument("need n >= 1 and k >= 2".into()));
    }
    let eval = f.clone();
    let payoff = Arc::new(move |i: usize, p: &[usize]| -> f64 {
        if i < n {
            let d = grid_value(p[i], k) - grid_value(p[n + i], k);
            -d * d
        } else {
            let a: Vec<f64> = p[..n].iter().map(|&x| grid_value(x, k)).collect();
            let d = eval(&a)[i - n] - grid_value(p[i], k);
            -d * d
        }
    });
    let game = SuccinctGame::new(vec![k + 1; 2 * n], (-1.0, 0.0), payoff)?;
    let cache: Arc<Mutex<Option<(Vec<Vec<f64>>, Vec<(f64, Vec<f64>)>)>>> = Arc::new(Mutex::new(None));
    let fast = Arc::new(move |i: usize, prof: &MixedProfile| -> Vec<f64> {
        let grid: Vec<f64> = (0..=k).map(|a| grid_value(a, k)).collect();
        if i < n {
            // E[-(a - b)^2] over the partner's mix.
            let partner = &prof.probs[n + i];
            return grid
                .iter()
                .map(|&a| -partner.iter().enumerate().map(|(b, q)| q * (a - grid[b]).powi(2)).sum::<f64>())
                .collect();
        }
        let first: Vec<Vec<f64>> = prof.probs[..n].to_vec();
        let mut guard = cache.lock().unwrap();
        let outcomes = match guard.as_ref() {
            Some((key, outs)) if *key == first => outs.clone(),
            _ => {
                let supports: Vec<Vec<(usize, f64)>> = (0..n).map(|j| prof.support(j)).collect();
                let mut outs = Vec::new();
                for_each_profile(&supports, |p, w| {
                    let a: Vec<f64> = p.iter().map(|&x| grid_value(x, k)).collect();
                    outs.push((w, f(&a)));
                });
                *guard = Some((first, outs.clone()));
                outs
            }
        };
        grid.iter()
            .map(|&b| -outcomes.iter().map(|(w, fa)| w * (fa[i - n] - b).powi(2)).sum::<f64>())
            .collect()
    });
    Ok(game.with_action_values(fast))
}

/// Max-norm Lipschitz constant of [`cyclic_quadratic`].
pub const TOY_LIPSCHITZ: f64 = 1.2;

/// `f_j(x) = 0.2 + 0.6·x_{j+1}²`, indices mod `n`; maps the unit cube into itself.
pub fn cyclic_quadratic(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    (0..n).map(|j| 0.2 + 0.6 * x[(j + 1) % n].powi(2)).collect()
}

/// The fixed point of [`cyclic_quadratic`] in the unit cube.
pub fn cyclic_quadratic_fixed_point(n: usize) -> Vec<f64> {
    vec![(1.0 - 0.52f64.sqrt()) / 1.2; n]
}

/// Pure grid-game profile with both groups at the grid rounding of `x`.
pub fn fixed_point_witness(x: &[f64], k: usize) -> MixedProfile {
    let a: Vec<usize> = x.iter().map(|&v| grid_round(v, k)).collect();
    let choice: Vec<usize> = a.iter().chain(&a).copied().collect();
    MixedProfile::pure(&choice, &vec![k + 1; 2 * x.len()])
}

/// Regret bound for [`fixed_point_witness`] given a Lipschitz constant and the
/// largest per-coordinate residual at `x`.
pub fn witness_bound(k: usize, lipschitz: f64, residual: f64) -> f64 {
    let k = k as f64;
    2.0 / (k * k) + 2.0 * lipschitz / k + residual
}

/// Per-coordinate expectation of the second group's actions.
pub fn decode_grid_profile(profile: &MixedProfile, n: usize, k: usize) -> (Vec<f64>, Vec<f64>) {
    let mean = |i: usize| profile.mean_action(i) / k as f64;
    ((0..n).map(mean).collect(), (n..2 * n).map(mean).collect())
}

pub const PLUS: usize = 0;
pub const MINUS: usize = 1;

/// Largest grid level whose player plays `+`; 0 if none does.
pub fn realized_value(block: &[usize]) -> f64 {
    let k = block.len() - 1;
    block.iter().rposition(|&a| a == PLUS).map_or(0.0, |x| grid_value(x, k))
}

/// Distribution of the realized value of a block of independent players.
pub fn realized_distribution(block: &[Vec<f64>]) -> Vec<(f64, f64)> {
    let k = block.len() - 1;
    let mut out = Vec::new();
    let mut none_above = 1.0;
    for x in (0..=k).rev() {
        let plus = block[x][PLUS];
        let p = if x == 0 { none_above } else { none_above * plus };
        if p > 0.0 {
            out.push((grid_value(x, k), p));
        }
        none_above *= 1.0 - plus;
    }
    out
}

/// Binary-action imitation game: `k + 1` two-action players per coordinate
/// per side; index `(side·n + i)·(k+1) + x`.
pub fn build_binary_game(f: Arc<UnitMap>, n: usize, k: usize) -> Result<SuccinctGame> {
    if n == 0 || k < 2 {
        return Err(Error::Argument("need n >= 1 and k >= 2".into()));
    }
    let w = k + 1;
    let step = 1.0 / k as f64;
    let eval = f.clone();
    let payoff = Arc::new(move |pl: usize, p: &[usize]| -> f64 {
        let (block, x) = (pl / w, pl % w);
        let shift = if p[pl] == PLUS { step } else { -step };
        let target = if block < n {
            realized_value(&p[(n + block) * w..(n + block + 1) * w])
        } else {
            let r: Vec<f64> = (0..n).map(|i| realized_value(&p[i * w..(i + 1) * w])).collect();
            eval(&r)[block - n]
        };
        -(grid_value(x, k) + shift - target).powi(2)
    });
    let lo = -(1.0 + step).powi(2);
    let game = SuccinctGame::new(vec![2; 2 * n * w], (lo, 0.0), payoff)?;
    let fast = Arc::new(move |pl: usize, prof: &MixedProfile| -> Vec<f64> {
        let (block, x) = (pl / w, pl % w);
        let targets: Vec<(f64, f64)> = if block < n {
            realized_distribution(&prof.probs[(n + block) * w..(n + block + 1) * w])
        } else {
            let dists: Vec<Vec<(usize, f64)>> = (0..n)
                .map(|i| {
                    realized_distribution(&prof.probs[i * w..(i + 1) * w])
                        .into_iter()
                        .map(|(v, p)| ((v * k as f64).round() as usize, p))
                        .collect()
                })
                .collect();
            let mut acc: BTreeMap<u64, f64> = BTreeMap::new();
            for_each_profile(&dists, |r, p| {
                let r: Vec<f64> = r.iter().map(|&v| grid_value(v, k)).collect();
                *acc.entry(f(&r)[block - n].to_bits()).or_insert(0.0) += p;
            });
            acc.into_iter().map(|(b, p)| (f64::from_bits(b), p)).collect()
        };
        [step, -step]
            .iter()
            .map(|s| -targets.iter().map(|(t, p)| p * (grid_value(x, k) + s - t).powi(2)).sum::<f64>())
            .collect()
    });
    Ok(game.with_action_values(fast))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pennies() -> SuccinctGame {
        // Player 0 wins on a match, player 1 on a mismatch.
        SuccinctGame::new(
            vec![2, 2],
            (0.0, 1.0),
            Arc::new(|i, p: &[usize]| {
                let m = (p[0] == p[1]) as u8 as f64;
                if i == 0 {
                    m
                } else {
                    1.0 - m
                }
            }),
        )
        .unwrap()
    }

    #[test]
    fn matching_pennies() {
        let g = pennies();
        let r = classify_equilibrium(&g, &MixedProfile::uniform(&[2, 2]), 0.0, 0.0).unwrap();
        assert!(r.ane && r.wsne && r.exact);
        let p = MixedProfile { probs: vec![vec![1.0, 0.0], vec![0.5, 0.5]] };
        let r = classify_equilibrium(&g, &p, 0.1, 0.0).unwrap();
        assert_eq!(r.regrets, vec![0.0, 0.5]);
    }

    #[test]
    fn bilinear_form() {
        let g = pennies();
        let p = MixedProfile { probs: vec![vec![0.3, 0.7], vec![0.6, 0.4]] };
        let e = expected_utility(&g, &p, 0, None).value;
        assert!((e - (0.3 * 0.6 + 0.7 * 0.4)).abs() < 1e-15);
        assert_eq!(expected_utility(&g, &MixedProfile::pure(&[1, 1], &[2, 2]), 1, None).value, 0.0);
    }

    #[test]
    fn counting_two_by_two() {
        let (g, c) = counting_oracle(&pennies());
        assert_eq!(c.distinct(), 0);
        classify_equilibrium(&g, &MixedProfile::uniform(&[2, 2]), 0.0, 0.0).unwrap();
        assert_eq!(c.distinct(), 8);
        assert_eq!(c.raw(), 8);
        classify_equilibrium(&g, &MixedProfile::uniform(&[2, 2]), 0.0, 0.0).unwrap();
        assert_eq!((c.distinct(), c.raw()), (8, 16));
    }

    #[test]
    fn realized_values() {
        assert_eq!(realized_value(&[PLUS; 5]), 1.0);
        assert_eq!(realized_value(&[PLUS, MINUS, MINUS, MINUS, MINUS]), 0.0);
        assert_eq!(realized_value(&[MINUS; 5]), 0.0);
        assert_eq!(realized_value(&[MINUS, PLUS, PLUS, MINUS, MINUS]), 0.5);
    }

    #[test]
    fn realized_distribution_sums_to_one() {
        let block = vec![vec![0.2, 0.8], vec![0.5, 0.5], vec![0.0, 1.0]];
        let d = realized_distribution(&block);
        assert!((d.iter().map(|x| x.1).sum::<f64>() - 1.0).abs() < 1e-15);
        assert_eq!(d, vec![(0.5, 0.5), (0.0, 0.5)]);
    }

    #[test]
    fn profile_json_round_trip() {
        let p = MixedProfile { probs: vec![vec![0.25, 0.75], vec![1.0, 0.0, 0.0]] };
        let back: MixedProfile = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
        assert_eq!(back, p);
    }
}
