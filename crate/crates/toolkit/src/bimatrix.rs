//! Bimatrix games, Althöfer gadgets, composition of a bipartite polymatrix
//! game into one bimatrix game, and the WeakNash to well-supported transform.

use crate::error::{Error, Result};
use crate::games::{classify_equilibrium, EquilibriumReport, MixedProfile, SuccinctGame};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Largest composed matrix (cells) [`compose`] will build.
pub const COMPOSE_BUDGET: usize = 10_000_000;
/// Largest gadget column count [`althofer`] will build.
pub const GADGET_BUDGET: usize = 1 << 20;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BimatrixGame {
    pub shape: [usize; 2],
    /// Row player's payoffs, row-major.
    pub row: Vec<f64>,
    /// Column player's payoffs, row-major.
    pub col: Vec<f64>,
}

impl BimatrixGame {
    pub fn new(row: Vec<Vec<f64>>, col: Vec<Vec<f64>>) -> Result<Self> {
        let r = row.len();
        let c = row.first().map_or(0, |x| x.len());
        if r == 0 || c == 0 || col.len() != r || row.iter().chain(&col).any(|x| x.len() != c) {
            return Err(Error::Argument("payoff matrices must share a nonempty shape".into()));
        }
        Self::from_flat([r, c], row.concat(), col.concat())
    }

    pub fn from_flat(shape: [usize; 2], row: Vec<f64>, col: Vec<f64>) -> Result<Self> {
        let cells = shape[0] * shape[1];
        if cells == 0 || row.len() != cells || col.len() != cells {
            return Err(Error::Width { expected: cells, got: row.len().min(col.len()) });
        }
        if row.iter().chain(&col).any(|v| !v.is_finite()) {
            return Err(Error::Argument("payoffs must be finite".into()));
        }
        Ok(Self { shape, row, col })
    }

    pub fn random(rows: usize, cols: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rows * cols;
        let row = (0..n).map(|_| rng.gen()).collect();
        let col = (0..n).map(|_| rng.gen()).collect();
        Self { shape: [rows, cols], row, col }
    }

    pub fn rows(&self) -> usize {
        self.shape[0]
    }

    pub fn cols(&self) -> usize {
        self.shape[1]
    }

    pub fn r(&self, i: usize, j: usize) -> f64 {
        self.row[i * self.shape[1] + j]
    }

    pub fn c(&self, i: usize, j: usize) -> f64 {
        self.col[i * self.shape[1] + j]
    }

    /// Row player's value of each row against column mix `y`.
    pub fn row_values(&self, y: &[f64]) -> Vec<f64> {
        (0..self.rows()).map(|i| (0..self.cols()).map(|j| self.r(i, j) * y[j]).sum()).collect()
    }

    /// Column player's value of each column against row mix `x`.
    pub fn col_values(&self, x: &[f64]) -> Vec<f64> {
        (0..self.cols()).map(|j| (0..self.rows()).map(|i| self.c(i, j) * x[i]).sum()).collect()
    }

    /// Smallest and largest entry over both matrices.
    pub fn payoff_range(&self) -> (f64, f64) {
        let it = self.row.iter().chain(&self.col);
        (it.clone().copied().fold(f64::INFINITY, f64::min), it.copied().fold(f64::NEG_INFINITY, f64::max))
    }

    /// Both matrices scaled by `1/scale`.
    pub fn scaled(&self, scale: f64) -> Self {
        Self {
            shape: self.shape,
            row: self.row.iter().map(|v| v / scale).collect(),
            col: self.col.iter().map(|v| v / scale).collect(),
        }
    }

    pub fn to_succinct(&self) -> SuccinctGame {
        let g = Arc::new(self.clone());
        let (lo, hi) = self.payoff_range();
        let payoff = g.clone();
        SuccinctGame::new(
            vec![self.rows(), self.cols()],
            (lo, hi),
            Arc::new(move |i, p: &[usize]| if i == 0 { payoff.r(p[0], p[1]) } else { payoff.c(p[0], p[1]) }),
        )
        .expect("shape is nonempty")
        .with_action_values(Arc::new(move |i, prof: &MixedProfile| {
            if i == 0 {
                g.row_values(&prof.probs[1])
            } else {
                g.col_values(&prof.probs[0])
            }
        }))
    }
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

fn lex_subsets(items: &[usize], size: usize) -> Vec<Vec<usize>> {
    if size == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for (pos, &first) in items.iter().enumerate() {
        if items.len() - pos < size {
            break;
        }
        for mut rest in lex_subsets(&items[pos + 1..], size - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

/// Half-size subsets of `0..k` in gadget column order: the subsets holding 0
/// in lexicographic order, then their complements in the same order.
pub fn gadget_subsets(k: usize) -> Result<Vec<Vec<usize>>> {
    if k < 2 || k % 2 == 1 {
        return Err(Error::Argument(format!("gadget size must be even and at least 2, got {k}")));
    }
    if binomial(k, k / 2) > GADGET_BUDGET {
        return Err(Error::Budget(format!("C({k}, {}) columns", k / 2)));
    }
    let rest: Vec<usize> = (1..k).collect();
    let with_zero: Vec<Vec<usize>> = lex_subsets(&rest, k / 2 - 1)
        .into_iter()
        .map(|mut s| {
            s.insert(0, 0);
            s
        })
        .collect();
    let complements: Vec<Vec<usize>> =
        with_zero.iter().map(|s| (0..k).filter(|i| !s.contains(i)).collect()).collect();
    Ok(with_zero.into_iter().chain(complements).collect())
}

/// Althöfer's one-sum gadget: `R[i][S] = [i ∈ S]`, `C = 1 − R`.
pub fn althofer(k: usize) -> Result<BimatrixGame> {
    let cols = gadget_subsets(k)?;
    let row: Vec<Vec<f64>> =
        (0..k).map(|i| cols.iter().map(|s| if s.contains(&i) { 1.0 } else { 0.0 }).collect()).collect();
    let col = row.iter().map(|r| r.iter().map(|v| 1.0 - v).collect()).collect();
    BimatrixGame::new(row, col)
}

/// One bimatrix subgame between A-vertex `i` and B-vertex `j`, indexed `[s][t]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Subgame {
    pub alice: Vec<Vec<f64>>,
    pub bob: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BipartitePolymatrix {
    pub actions_a: Vec<usize>,
    pub actions_b: Vec<usize>,
    /// `subgames[i][j]` for A-vertex `i`, B-vertex `j`.
    pub subgames: Vec<Vec<Subgame>>,
}

impl BipartitePolymatrix {
    pub fn new(actions_a: Vec<usize>, actions_b: Vec<usize>, subgames: Vec<Vec<Subgame>>) -> Result<Self> {
        let p = Self { actions_a, actions_b, subgames };
        p.validate()?;
        Ok(p)
    }

    pub fn n_a(&self) -> usize {
        self.actions_a.len()
    }

    pub fn n_b(&self) -> usize {
        self.actions_b.len()
    }

    pub fn players(&self) -> usize {
        self.n_a() + self.n_b()
    }

    pub fn action_counts(&self) -> Vec<usize> {
        self.actions_a.iter().chain(&self.actions_b).copied().collect()
    }

    pub fn validate(&self) -> Result<()> {
        let (na, nb) = (self.n_a(), self.n_b());
        if na == 0 || nb == 0 || self.actions_a.iter().chain(&self.actions_b).any(|&a| a == 0) {
            return Err(Error::Argument("both sides need vertices with actions".into()));
        }
        if self.subgames.len() != na || self.subgames.iter().any(|r| r.len() != nb) {
            return Err(Error::Argument("subgame grid does not match the rosters".into()));
        }
        let tol = 1e-12;
        for (i, row) in self.subgames.iter().enumerate() {
            for (j, g) in row.iter().enumerate() {
                let shape_ok = |m: &Vec<Vec<f64>>| {
                    m.len() == self.actions_a[i] && m.iter().all(|r| r.len() == self.actions_b[j])
                };
                if !shape_ok(&g.alice) || !shape_ok(&g.bob) {
                    return Err(Error::Argument(format!("subgame ({i}, {j}) has the wrong shape")));
                }
                let ra = g.alice.iter().flatten().all(|&v| (-tol..=1.0 / nb as f64 + tol).contains(&v));
                let rb = g.bob.iter().flatten().all(|&v| (-tol..=1.0 / na as f64 + tol).contains(&v));
                if !ra || !rb {
                    return Err(Error::Argument(format!("subgame ({i}, {j}) leaves its payoff range")));
                }
            }
        }
        Ok(())
    }

    pub fn random(n_a: usize, n_b: usize, max_actions: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let actions_a: Vec<usize> = (0..n_a).map(|_| rng.gen_range(2..=max_actions.max(2))).collect();
        let actions_b: Vec<usize> = (0..n_b).map(|_| rng.gen_range(2..=max_actions.max(2))).collect();
        let mut mat = |r: usize, c: usize, scale: f64| -> Vec<Vec<f64>> {
            (0..r).map(|_| (0..c).map(|_| rng.gen::<f64>() * scale).collect()).collect()
        };
        let subgames = (0..n_a)
            .map(|i| {
                (0..n_b)
                    .map(|j| Subgame {
                        alice: mat(actions_a[i], actions_b[j], 1.0 / n_b as f64),
                        bob: mat(actions_a[i], actions_b[j], 1.0 / n_a as f64),
                    })
                    .collect()
            })
            .collect();
        Self { actions_a, actions_b, subgames }
    }

    /// Coordination instance: matching strategies pay the full share, mismatches
    /// pay at most `noise` of it. Every constant profile is a strict pure
    /// equilibrium in which all vertices earn the same.
    pub fn coordination(n_a: usize, n_b: usize, actions: usize, noise: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut side = |share: f64| -> Vec<Vec<f64>> {
            (0..actions)
                .map(|s| (0..actions).map(|t| if s == t { share } else { share * noise * rng.gen::<f64>() }).collect())
                .collect()
        };
        let subgames = (0..n_a)
            .map(|_| (0..n_b).map(|_| Subgame { alice: side(1.0 / n_b as f64), bob: side(1.0 / n_a as f64) }).collect())
            .collect();
        Self { actions_a: vec![actions; n_a], actions_b: vec![actions; n_b], subgames }
    }

    /// Pads each odd side with one single-action zero-payoff vertex, rescaling
    /// real payoffs to the new range convention.
    pub fn pad_even(&self) -> Self {
        let (na, nb) = (self.n_a(), self.n_b());
        let (pa, pb) = (na + na % 2, nb + nb % 2);
        let (sa, sb) = (nb as f64 / pb as f64, na as f64 / pa as f64);
        let mut actions_a = self.actions_a.clone();
        let mut actions_b = self.actions_b.clone();
        actions_a.resize(pa, 1);
        actions_b.resize(pb, 1);
        let subgames = (0..pa)
            .map(|i| {
                (0..pb)
                    .map(|j| {
                        if i < na && j < nb {
                            let g = &self.subgames[i][j];
                            let scale = |m: &Vec<Vec<f64>>, s: f64| m.iter().map(|r| r.iter().map(|v| v * s).collect()).collect();
                            Subgame { alice: scale(&g.alice, sa), bob: scale(&g.bob, sb) }
                        } else {
                            let zeros = vec![vec![0.0; actions_b[j]]; actions_a[i]];
                            Subgame { alice: zeros.clone(), bob: zeros }
                        }
                    })
                    .collect()
            })
            .collect();
        Self { actions_a, actions_b, subgames }
    }

    /// Each player's expected payoff for every own action; A-vertices first.
    pub fn action_values(&self, profile: &MixedProfile, player: usize) -> Vec<f64> {
        let na = self.n_a();
        if player < na {
            let i = player;
            (0..self.actions_a[i])
                .map(|s| {
                    (0..self.n_b())
                        .map(|j| self.subgames[i][j].alice[s].iter().zip(&profile.probs[na + j]).map(|(u, q)| u * q).sum::<f64>())
                        .sum()
                })
                .collect()
        } else {
            let j = player - na;
            (0..self.actions_b[j])
                .map(|t| {
                    (0..na)
                        .map(|i| {
                            let g = &self.subgames[i][j].bob;
                            profile.probs[i].iter().enumerate().map(|(s, q)| g[s][t] * q).sum::<f64>()
                        })
                        .sum()
                })
                .collect()
        }
    }

    pub fn to_succinct(&self) -> SuccinctGame {
        let na = self.n_a();
        let me = Arc::new(self.clone());
        let oracle = me.clone();
        SuccinctGame::new(
            self.action_counts(),
            (0.0, 1.0),
            Arc::new(move |v, p: &[usize]| {
                if v < na {
                    (0..oracle.n_b()).map(|j| oracle.subgames[v][j].alice[p[v]][p[na + j]]).sum()
                } else {
                    let j = v - na;
                    (0..na).map(|i| oracle.subgames[i][j].bob[p[i]][p[v]]).sum()
                }
            }),
        )
        .expect("validated polymatrix")
        .with_action_values(Arc::new(move |v, prof: &MixedProfile| me.action_values(prof, v)))
    }

    pub fn classify(&self, profile: &MixedProfile, eps: f64, delta: f64) -> Result<EquilibriumReport> {
        classify_equilibrium(&self.to_succinct(), profile, eps, delta)
    }
}

/// A pure action of the composed game.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComposedAction {
    pub vertex: usize,
    pub strategy: usize,
    /// Half-size subset of the opposite roster.
    pub subset: Vec<usize>,
    /// Position of `subset` in [`gadget_subsets`] order.
    pub subset_rank: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComposedGame {
    pub lambda: f64,
    pub game: BimatrixGame,
    /// Alice's actions; index = (strategy offset of vertex + strategy) · #subsets + rank.
    pub alice: Vec<ComposedAction>,
    pub bob: Vec<ComposedAction>,
}

impl ComposedGame {
    /// The game scaled into `[0, 1]`.
    pub fn normalized(&self) -> BimatrixGame {
        self.game.scaled(2.0 + self.lambda)
    }

    /// Probability each side puts on each of its vertices.
    pub fn vertex_marginals(&self, alice: &[f64], bob: &[f64], n_a: usize, n_b: usize) -> (Vec<f64>, Vec<f64>) {
        let mut ma = vec![0.0; n_a];
        let mut mb = vec![0.0; n_b];
        for (a, p) in self.alice.iter().zip(alice) {
            ma[a.vertex] += p;
        }
        for (b, q) in self.bob.iter().zip(bob) {
            mb[b.vertex] += q;
        }
        (ma, mb)
    }
}

fn side_actions(actions: &[usize], subsets: &[Vec<usize>]) -> Vec<ComposedAction> {
    let mut out = Vec::new();
    for (vertex, &n) in actions.iter().enumerate() {
        for strategy in 0..n {
            for (rank, s) in subsets.iter().enumerate() {
                out.push(ComposedAction { vertex, strategy, subset: s.clone(), subset_rank: rank });
            }
        }
    }
    out
}

/// Composes the polymatrix main game (scaled by `λ·n_B`, `λ·n_A`) with a primal
/// gadget where Alice's vertex is the row and a dual gadget where Bob's vertex
/// is the column. Alice gets `[i ∈ S] + [j ∈ T]`, Bob the complements.
pub fn compose(poly: &BipartitePolymatrix, lambda: f64) -> Result<ComposedGame> {
    poly.validate()?;
    if !(lambda >= 0.0) {
        return Err(Error::Argument("lambda must be nonnegative".into()));
    }
    let (na, nb) = (poly.n_a(), poly.n_b());
    if na % 2 == 1 || nb % 2 == 1 {
        return Err(Error::Argument("rosters must be even; pad first".into()));
    }
    let subsets_b = gadget_subsets(nb)?;
    let subsets_a = gadget_subsets(na)?;
    let alice = side_actions(&poly.actions_a, &subsets_b);
    let bob = side_actions(&poly.actions_b, &subsets_a);
    let cells = alice.len().saturating_mul(bob.len());
    if cells > COMPOSE_BUDGET {
        return Err(Error::Budget(format!("composed game has {cells} cells")));
    }
    let mut row = Vec::with_capacity(cells);
    let mut col = Vec::with_capacity(cells);
    for a in &alice {
        for b in &bob {
            let g = &poly.subgames[a.vertex][b.vertex];
            let primal = if b.subset.contains(&a.vertex) { 1.0 } else { 0.0 };
            let dual = if a.subset.contains(&b.vertex) { 1.0 } else { 0.0 };
            row.push(lambda * nb as f64 * g.alice[a.strategy][b.strategy] + primal + dual);
            col.push(lambda * na as f64 * g.bob[a.strategy][b.strategy] + (1.0 - primal) + (1.0 - dual));
        }
    }
    let game = BimatrixGame::from_flat([alice.len(), bob.len()], row, col)?;
    Ok(ComposedGame { lambda, game, alice, bob })
}

/// Per-vertex conditional strategies; never-picked vertices play uniformly.
pub fn decompose_profile(poly: &BipartitePolymatrix, composed: &ComposedGame, alice: &[f64], bob: &[f64]) -> Result<MixedProfile> {
    if alice.len() != composed.alice.len() {
        return Err(Error::Width { expected: composed.alice.len(), got: alice.len() });
    }
    if bob.len() != composed.bob.len() {
        return Err(Error::Width { expected: composed.bob.len(), got: bob.len() });
    }
    let mut probs: Vec<Vec<f64>> = poly.action_counts().iter().map(|&n| vec![0.0; n]).collect();
    let na = poly.n_a();
    for (a, p) in composed.alice.iter().zip(alice) {
        probs[a.vertex][a.strategy] += p;
    }
    for (b, q) in composed.bob.iter().zip(bob) {
        probs[na + b.vertex][b.strategy] += q;
    }
    for dist in &mut probs {
        let total: f64 = dist.iter().sum();
        if total > 0.0 {
            dist.iter_mut().for_each(|v| *v /= total);
        } else {
            let n = dist.len() as f64;
            dist.iter_mut().for_each(|v| *v = 1.0 / n);
        }
    }
    Ok(MixedProfile { probs })
}

/// Half the L1 distance to the uniform distribution.
pub fn tv_from_uniform(p: &[f64]) -> f64 {
    let u = 1.0 / p.len() as f64;
    0.5 * p.iter().map(|v| (v - u).abs()).sum::<f64>()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransformOutcome {
    pub profile: MixedProfile,
    pub k: f64,
    /// `Σ_s |x̂_s − x_s|` per player.
    pub moved_mass: Vec<f64>,
    pub target_epsilon: f64,
    pub input: EquilibriumReport,
    pub output: EquilibriumReport,
}

/// `√ε(√ε + 5)`.
pub fn ws_epsilon(eps: f64) -> f64 {
    eps.sqrt() * (eps.sqrt() + 5.0)
}

/// Prunes, for each ε-optimal player, every strategy more than `εk` below
/// its best response (`k = 1 + 1/√ε`) and renormalizes. Other players keep
/// their strategies.
pub fn weaknash_to_wswn(poly: &BipartitePolymatrix, profile: &MixedProfile, eps: f64, delta: f64) -> Result<TransformOutcome> {
    if !(eps > 0.0) {
        return Err(Error::Argument("epsilon must be positive".into()));
    }
    let input = poly.classify(profile, eps, delta)?;
    let k = 1.0 + 1.0 / eps.sqrt();
    let mut out = profile.clone();
    let mut moved = vec![0.0; poly.players()];
    for v in 0..poly.players() {
        if input.regrets[v] > eps + crate::games::FLAG_TOL {
            continue;
        }
        let values = poly.action_values(profile, v);
        let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let keep: Vec<bool> = values.iter().map(|&u| u >= best - eps * k).collect();
        let z: f64 = profile.probs[v].iter().zip(&keep).filter(|(_, &k)| !k).map(|(p, _)| p).sum();
        if z >= 1.0 - 1e-15 {
            return Err(Error::Contract(format!("player {v} is ε-optimal yet has no mass near its best response")));
        }
        if z == 0.0 {
            continue;
        }
        for (s, x) in out.probs[v].iter_mut().enumerate() {
            *x = if keep[s] { *x / (1.0 - z) } else { 0.0 };
        }
        moved[v] = out.probs[v].iter().zip(&profile.probs[v]).map(|(a, b)| (a - b).abs()).sum();
    }
    let target = ws_epsilon(eps);
    let output = poly.classify(&out, target, delta)?;
    Ok(TransformOutcome { profile: out, k, moved_mass: moved, target_epsilon: target, input, output })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniformityVerdict {
    /// Sum of the largest half of the deviations from uniform.
    pub top_half: f64,
    pub total_deviation: f64,
    pub premise_met: bool,
    /// `None` when the premise fails.
    pub holds: Option<bool>,
}

/// With `a_i = p_i − 1/k` sorted descending and the top-half sum at most `θ`,
/// checks `Σ|a_i| ≤ 4θ`.
pub fn uniformity_check(p: &[f64], theta: f64) -> Result<UniformityVerdict> {
    let sum: f64 = p.iter().sum();
    if p.is_empty() || p.iter().any(|&v| !(v >= 0.0)) || (sum - 1.0).abs() > 1e-9 {
        return Err(Error::Argument("not a distribution".into()));
    }
    let u = 1.0 / p.len() as f64;
    let mut a: Vec<f64> = p.iter().map(|v| v - u).collect();
    a.sort_by(|x, y| y.total_cmp(x));
    let top_half: f64 = a[..p.len() / 2].iter().sum();
    let total_deviation: f64 = a.iter().map(|v| v.abs()).sum();
    let premise_met = top_half <= theta + 1e-15;
    let holds = premise_met.then(|| total_deviation <= 4.0 * theta + 1e-12);
    Ok(UniformityVerdict { top_half, total_deviation, premise_met, holds })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_gadgets() {
        let g = althofer(2).unwrap();
        assert_eq!(g.row, vec![1.0, 0.0, 0.0, 1.0]);
        assert!(althofer(3).is_err());
        assert!(althofer(0).is_err());
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(4, 2), 6);
        assert_eq!(binomial(10, 5), 252);
        assert_eq!(binomial(3, 5), 0);
    }

    #[test]
    fn subset_order_is_a_bijection() {
        for k in [2, 4, 6, 8] {
            let s = gadget_subsets(k).unwrap();
            assert_eq!(s.len(), binomial(k, k / 2));
            let set: std::collections::BTreeSet<_> = s.iter().cloned().collect();
            assert_eq!(set.len(), s.len());
        }
    }

    #[test]
    fn padding_keeps_ranges() {
        let p = BipartitePolymatrix::random(3, 1, 3, 0).pad_even();
        assert_eq!((p.n_a(), p.n_b()), (4, 2));
        p.validate().unwrap();
        assert_eq!(p.actions_a[3], 1);
    }

    #[test]
    fn uniformity_examples() {
        let v = uniformity_check(&[0.25; 4], 0.0).unwrap();
        assert_eq!(v.total_deviation, 0.0);
        let t = 0.1;
        let v = uniformity_check(&[0.5 + t, 0.5 - t], t).unwrap();
        assert!((v.total_deviation - 2.0 * t).abs() < 1e-15);
        assert_eq!(v.holds, Some(true));
        let v = uniformity_check(&[0.9, 0.1], 0.1).unwrap();
        assert!(!v.premise_met && v.holds.is_none());
    }
}
