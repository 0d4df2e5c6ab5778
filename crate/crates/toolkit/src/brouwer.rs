//! Brouwer-function embedding of an END-OF-A-LINE graph.
//!
//! Points live in `[-1, 2]^{4m}` split into four blocks of `m` coordinates:
//! current vertex, next vertex, compute-vs-copy flag, and the special
//! direction. Norms and dot products are normalized (means over coordinates).
//! Each edge `u -> v` becomes a chain of four axis-block segments between
//! code-encoded hypercube vertices, and the path from `0^n` is fed by a
//! segment coming down from the top point `(0_{3m}, 2·1_m)`.

use crate::codes::LinearCode;
use crate::eol::{from_bits, to_bits, EolInstance, EolSolution, EXHAUSTIVE_BUDGET};
use crate::error::{check_width, Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

pub const LO: f64 = -1.0;
pub const HI: f64 = 2.0;

/// `ĝ` is `LIPSCHITZ_C0 · δ/h`-Lipschitz in the normalized 2-norm; the
/// truncated `g` is `1 + LIPSCHITZ_C0 · δ/h`-Lipschitz.
pub const LIPSCHITZ_C0: f64 = 4.0;

/// `‖g(x)‖ ≥ DISPLACEMENT_FLOOR · δ` outside `2√h`-balls around path ends
/// and the top point.
pub const DISPLACEMENT_FLOOR: f64 = 0.25;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BrouwerParams {
    /// Block length; points have `4m` coordinates.
    pub m: usize,
    pub delta: f64,
    pub h: f64,
    pub eta: f64,
}

impl BrouwerParams {
    /// `h = 0.01`, `delta = h²/100`, `eta = δ_code/4`.
    pub fn defaults(m: usize) -> Self {
        let h = 0.01;
        Self { m, delta: h * h / 100.0, h, eta: crate::codes::DELTA_CODE / 4.0 }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.m > 0
            && self.delta > 0.0
            && self.h > 0.0
            && self.h <= 0.01 + 1e-15
            && self.delta <= self.h * self.h / 100.0 * (1.0 + 1e-12)
            && self.eta > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Argument(format!("need 0 < delta <= h^2/100, h <= 1/100, eta > 0: {self:?}")))
        }
    }

    pub fn dim(&self) -> usize {
        4 * self.m
    }

    pub fn sqrt_h(&self) -> f64 {
        self.h.sqrt()
    }

    /// Lipschitz bound of the untruncated displacement.
    pub fn lipschitz_hat(&self) -> f64 {
        LIPSCHITZ_C0 * self.delta / self.h
    }

    /// Lipschitz bound of the truncated displacement.
    pub fn lipschitz(&self) -> f64 {
        1.0 + self.lipschitz_hat()
    }
}

/// Normalized dot product.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() / a.len() as f64
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    (a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / a.len() as f64).sqrt()
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn lerp(a: &[f64], b: &[f64], t: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect()
}

/// Affine position of `x` along `s -> t`: 0 at `s`, 1 at `t`.
pub fn beta(s: &[f64], t: &[f64], x: &[f64]) -> Result<f64> {
    check_width(s.len(), t.len())?;
    check_width(s.len(), x.len())?;
    let d = sub(t, s);
    let l2 = dot(&d, &d);
    if l2 == 0.0 {
        return Err(Error::Argument("segment endpoints coincide".into()));
    }
    Ok(dot(&d, &sub(x, s)) / l2)
}

/// Brouwer vertex: `(E(a), E(b), c·1_m, 0_m)`, or the top start point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum VertexKey {
    Grid { a: u64, b: u64, c: bool },
    Top,
}

impl VertexKey {
    fn rest(v: u64) -> Self {
        VertexKey::Grid { a: v, b: v, c: false }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Segment {
    pub s: VertexKey,
    pub t: VertexKey,
    /// No segment precedes `s`: the field is extended past `s` as a capsule.
    pub open_start: bool,
    /// No segment follows `t`.
    pub open_end: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Corner {
    pub s: VertexKey,
    pub y: VertexKey,
    pub t: VertexKey,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum RegionClassification {
    FarInsidePicture,
    NearLine { s: Vec<f64>, t: Vec<f64>, beta: f64, z: Vec<f64>, dist: f64 },
    NearVertex {
        s: Vec<f64>,
        y: Vec<f64>,
        t: Vec<f64>,
        delta_sy: f64,
        delta_yt: f64,
        alpha: f64,
        z: Vec<f64>,
        dist: f64,
    },
    OutsidePicture { theta: f64, dist: f64 },
}

impl RegionClassification {
    pub fn tag(&self) -> &'static str {
        match self {
            RegionClassification::FarInsidePicture => "far",
            RegionClassification::NearLine { .. } => "line",
            RegionClassification::NearVertex { .. } => "vertex",
            RegionClassification::OutsidePicture { .. } => "outside",
        }
    }
}

/// Path endpoint and the source solution it stands for.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Endpoint {
    pub key: VertexKey,
    pub point: Vec<f64>,
    /// Unit direction of the adjacent segment, pointing along the path.
    pub direction: Vec<f64>,
    pub is_end: bool,
    pub solution: EolSolution,
}

/// Displacement profile across a tube: `a` on the axis, `tow` at distance
/// `h`, `-a` at `2h` and `d` from `3h` on.
fn profile(r: f64, a: f64, tow: f64, d: f64) -> f64 {
    if r <= 1.0 {
        (1.0 - r) * a + r * tow
    } else if r <= 2.0 {
        (2.0 - r) * tow - (r - 1.0) * a
    } else if r <= 3.0 {
        -(3.0 - r) * a + (r - 2.0) * d
    } else {
        d
    }
}

#[derive(Clone, Debug)]
pub struct PathEmbedding {
    inst: EolInstance,
    code: LinearCode,
    params: BrouwerParams,
}

impl PathEmbedding {
    pub fn embed(inst: &EolInstance, code: &LinearCode, params: BrouwerParams) -> Result<Self> {
        params.validate()?;
        if code.n_block() != params.m {
            return Err(Error::Construction(format!(
                "code block length {} differs from m = {}",
                code.n_block(),
                params.m
            )));
        }
        check_width(inst.n(), code.n_msg())?;
        // Distinct codewords must keep segments on different rest values 2·eta apart.
        let sep = (code.min_distance() as f64 / params.dim() as f64).sqrt();
        if sep < 2.0 * params.eta || 2 * code.min_distance() < 4 {
            return Err(Error::Construction(format!(
                "code distance {} too small for eta = {}",
                code.min_distance(),
                params.eta
            )));
        }
        Ok(Self { inst: inst.clone(), code: code.clone(), params })
    }

    pub fn params(&self) -> &BrouwerParams {
        &self.params
    }

    pub fn instance(&self) -> &EolInstance {
        &self.inst
    }

    pub fn code(&self) -> &LinearCode {
        &self.code
    }

    pub fn dim(&self) -> usize {
        self.params.dim()
    }

    pub fn top(&self) -> Vec<f64> {
        let m = self.params.m;
        (0..4 * m).map(|i| if i >= 3 * m { 2.0 } else { 0.0 }).collect()
    }

    pub fn point(&self, key: VertexKey) -> Vec<f64> {
        let m = self.params.m;
        match key {
            VertexKey::Top => self.top(),
            VertexKey::Grid { a, b, c } => {
                let (ea, eb) = (self.code.encode_word(a), self.code.encode_word(b));
                let mut p = vec![0.0; 4 * m];
                for j in 0..m {
                    p[j] = ((ea >> j) & 1) as f64;
                    p[m + j] = ((eb >> j) & 1) as f64;
                    p[2 * m + j] = c as u8 as f64;
                }
                p
            }
        }
    }

    fn out_edge(&self, w: u64) -> Option<u64> {
        let n = self.inst.n();
        let x = to_bits(w, n);
        let v = self.inst.succ(&x).ok()?;
        (v != x && self.inst.pred(&v).ok()? == x).then(|| from_bits(&v))
    }

    fn in_edge(&self, w: u64) -> Option<u64> {
        let n = self.inst.n();
        let x = to_bits(w, n);
        let u = self.inst.pred(&x).ok()?;
        (u != x && self.inst.succ(&u).ok()? == x).then(|| from_bits(&u))
    }

    /// The five Brouwer vertices of edge `u -> v`.
    pub fn edge_chain(u: u64, v: u64) -> [VertexKey; 5] {
        [
            VertexKey::Grid { a: u, b: u, c: false },
            VertexKey::Grid { a: u, b: v, c: false },
            VertexKey::Grid { a: u, b: v, c: true },
            VertexKey::Grid { a: v, b: v, c: true },
            VertexKey::Grid { a: v, b: v, c: false },
        ]
    }

    fn down_segment(&self) -> Segment {
        Segment { s: VertexKey::Top, t: VertexKey::rest(0), open_start: false, open_end: self.out_edge(0).is_none() }
    }

    fn edge_segments(&self, u: u64, v: u64) -> Vec<Segment> {
        let chain = Self::edge_chain(u, v);
        let open_start = u != 0 && self.in_edge(u).is_none();
        let open_end = self.out_edge(v).is_none();
        (0..4)
            .map(|k| Segment {
                s: chain[k],
                t: chain[k + 1],
                open_start: k == 0 && open_start,
                open_end: k == 3 && open_end,
            })
            .collect()
    }

    fn edge_corners(u: u64, v: u64) -> Vec<Corner> {
        let c = Self::edge_chain(u, v);
        (1..4).map(|k| Corner { s: c[k - 1], y: c[k], t: c[k + 1] }).collect()
    }

    /// Corner where an edge into `w` meets the edge out of `w`.
    fn junction(&self, w: u64) -> Option<Corner> {
        let next = self.out_edge(w)?;
        let s = if w == 0 {
            VertexKey::Top
        } else {
            let prev = self.in_edge(w)?;
            Self::edge_chain(prev, w)[3]
        };
        Some(Corner { s, y: VertexKey::rest(w), t: Self::edge_chain(w, next)[1] })
    }

    /// Vertices whose code words are nearest to the current and next blocks.
    pub fn decode_point(&self, x: &[bool]) -> Option<u64> {
        self.code.decode(x).map(|(u, _)| from_bits(&u))
    }

    fn decode_block(&self, x: &[f64], block: usize) -> Option<u64> {
        let m = self.params.m;
        let bits: Vec<bool> = x[block * m..(block + 1) * m].iter().map(|&v| v > 0.5).collect();
        self.decode_point(&bits)
    }

    /// Decoded `(current, next, flag)` neighborhood of `x`.
    pub fn neighborhood(&self, x: &[f64]) -> (Option<u64>, Option<u64>, bool) {
        let m = self.params.m;
        let flag = x[2 * m..3 * m].iter().sum::<f64>() / m as f64 > 0.5;
        (self.decode_block(x, 0), self.decode_block(x, 1), flag)
    }

    /// Segments and corners that can influence the field near `x`.
    pub fn local_structure(&self, x: &[f64]) -> (Vec<Segment>, Vec<Corner>) {
        let (a, b, _) = self.neighborhood(x);
        let mut edges = BTreeSet::new();
        for w in [a, b].into_iter().flatten() {
            if let Some(v) = self.out_edge(w) {
                edges.insert((w, v));
            }
            if let Some(u) = self.in_edge(w) {
                edges.insert((u, w));
            }
        }
        if let Some(v) = self.out_edge(0) {
            edges.insert((0, v));
        }
        let mut segs = vec![self.down_segment()];
        let mut corners = BTreeSet::new();
        for &(u, v) in &edges {
            segs.extend(self.edge_segments(u, v));
            corners.extend(Self::edge_corners(u, v));
            corners.extend(self.junction(u));
            corners.extend(self.junction(v));
        }
        (segs, corners.into_iter().collect())
    }

    /// All edges of the source graph, by enumeration.
    pub fn edges(&self) -> Result<Vec<(u64, u64)>> {
        let n = self.inst.n();
        if n > EXHAUSTIVE_BUDGET {
            return Err(Error::Budget(format!("n = {n} too large to list edges")));
        }
        let all: Vec<(u64, u64)> = (0..1u64 << n).filter_map(|u| self.out_edge(u).map(|v| (u, v))).collect();
        let next: BTreeMap<u64, u64> = all.iter().copied().collect();
        let heads: BTreeSet<u64> = all.iter().map(|e| e.1).collect();
        // Path from 0 first, then other paths from their starts, then cycles.
        let starts = std::iter::once(0).chain(all.iter().map(|e| e.0).filter(|u| *u != 0 && !heads.contains(u)));
        let mut out = Vec::with_capacity(all.len());
        let mut seen = BTreeSet::new();
        for u in starts.chain(all.iter().map(|e| e.0)) {
            let mut w = u;
            while let Some(&v) = next.get(&w) {
                if !seen.insert(w) {
                    break;
                }
                out.push((w, v));
                w = v;
            }
        }
        Ok(out)
    }

    pub fn segments(&self) -> Result<Vec<Segment>> {
        let mut out = vec![self.down_segment()];
        for (u, v) in self.edges()? {
            out.extend(self.edge_segments(u, v));
        }
        Ok(out)
    }

    pub fn corners(&self) -> Result<Vec<Corner>> {
        let mut out = BTreeSet::new();
        for (u, v) in self.edges()? {
            out.extend(Self::edge_corners(u, v));
            out.extend(self.junction(u));
            out.extend(self.junction(v));
        }
        Ok(out.into_iter().collect())
    }

    /// Open ends and open starts of embedded paths with their solutions.
    pub fn endpoints(&self) -> Result<Vec<Endpoint>> {
        let mut out = Vec::new();
        for seg in self.segments()? {
            for (is_end, open) in [(true, seg.open_end), (false, seg.open_start)] {
                if !open {
                    continue;
                }
                let key = if is_end { seg.t } else { seg.s };
                let VertexKey::Grid { a, .. } = key else { continue };
                let solution = self
                    .inst
                    .check_solution(&to_bits(a, self.inst.n()))?
                    .ok_or_else(|| Error::Contract("open path end is not a solution".into()))?;
                let (ps, pt) = (self.point(seg.s), self.point(seg.t));
                let l = dist(&ps, &pt);
                let direction = sub(&pt, &ps).into_iter().map(|v| v / l).collect();
                out.push(Endpoint { key, point: self.point(key), direction, is_end, solution });
            }
        }
        Ok(out)
    }

    /// Source solution of a point whose neighborhood decodes to a rest vertex.
    pub fn locate_solution(&self, x: &[f64]) -> Option<EolSolution> {
        let (a, b, _) = self.neighborhood(x);
        let a = a?;
        if b != Some(a) {
            return None;
        }
        self.inst.check_solution(&to_bits(a, self.inst.n())).ok()?
    }

    pub fn theta(&self, x: &[f64]) -> f64 {
        let m = self.params.m;
        x[3 * m..].iter().sum::<f64>() / m as f64
    }

    pub fn classify(&self, x: &[f64]) -> RegionClassification {
        let p = &self.params;
        let theta = self.theta(x);
        if theta >= 0.5 {
            let z = self.z_theta(theta);
            return RegionClassification::OutsidePicture { theta, dist: dist(x, &z) };
        }
        let sh = p.sqrt_h();
        let (segs, corners) = self.local_structure(x);
        let mut best_vertex: Option<(f64, RegionClassification)> = None;
        for c in corners {
            let (s, y, t) = (self.point(c.s), self.point(c.y), self.point(c.t));
            let (l1, l2) = (dist(&s, &y), dist(&y, &t));
            let delta_sy = beta(&s, &y, x).unwrap() * l1 - (l1 - sh);
            let delta_yt = sh - beta(&y, &t, x).unwrap() * l2;
            if delta_sy < 0.0 || delta_yt < 0.0 {
                continue;
            }
            let alpha = delta_yt / (delta_yt + delta_sy);
            let zsy = lerp(&y, &s, sh / l1);
            let zyt = lerp(&y, &t, sh / l2);
            let z = lerp(&zyt, &zsy, alpha);
            let d = dist(x, &z);
            if d < 3.0 * p.h && best_vertex.as_ref().map_or(true, |b| d < b.0) {
                best_vertex = Some((
                    d,
                    RegionClassification::NearVertex { s, y, t, delta_sy, delta_yt, alpha, z, dist: d },
                ));
            }
        }
        if let Some((_, c)) = best_vertex {
            return c;
        }
        let mut best_line: Option<(f64, RegionClassification)> = None;
        for seg in segs {
            let (s, t) = (self.point(seg.s), self.point(seg.t));
            let l = dist(&s, &t);
            let b = beta(&s, &t, x).unwrap();
            let along = b * l;
            let lower = if seg.open_start { f64::NEG_INFINITY } else { sh };
            let upper = if seg.open_end { f64::INFINITY } else { l - sh };
            if along < lower || along > upper {
                continue;
            }
            let z = lerp(&s, &t, b.clamp(0.0, 1.0));
            let d = dist(x, &z);
            if d < 3.0 * p.h && best_line.as_ref().map_or(true, |bl| d < bl.0) {
                best_line = Some((d, RegionClassification::NearLine { s, t, beta: b, z, dist: d }));
            }
        }
        match best_line {
            Some((_, c)) => c,
            None => RegionClassification::FarInsidePicture,
        }
    }

    fn z_theta(&self, theta: f64) -> Vec<f64> {
        let m = self.params.m;
        (0..4 * m).map(|i| if i >= 3 * m { theta } else { 0.0 }).collect()
    }

    fn special(&self, i: usize) -> bool {
        i >= 3 * self.params.m
    }

    /// Untruncated displacement, evaluated on whole vectors.
    pub fn displacement_hat(&self, x: &[f64]) -> Vec<f64> {
        let p = &self.params;
        let (dl, h) = (p.delta, p.h);
        let default: Vec<f64> = (0..x.len()).map(|i| if self.special(i) { dl } else { 0.0 }).collect();
        let tube = |axis: &[f64], z: &[f64], d: f64| -> Vec<f64> {
            let r = d / h;
            (0..x.len())
                .map(|i| profile(r, axis[i], dl * (z[i] - x[i]) / h, default[i]))
                .collect::<Vec<f64>>()
        };
        match self.classify(x) {
            RegionClassification::FarInsidePicture => default,
            RegionClassification::NearLine { s, t, z, dist: d, .. } => {
                let l = dist(&s, &t);
                let axis: Vec<f64> = sub(&t, &s).iter().map(|v| dl * v / l).collect();
                tube(&axis, &z, d)
            }
            RegionClassification::NearVertex { s, y, t, alpha, z, dist: d, .. } => {
                let (l1, l2) = (dist(&s, &y), dist(&y, &t));
                let axis: Vec<f64> = (0..x.len())
                    .map(|i| dl * (alpha * (y[i] - s[i]) / l1 + (1.0 - alpha) * (t[i] - y[i]) / l2))
                    .collect();
                tube(&axis, &z, d)
            }
            RegionClassification::OutsidePicture { theta, dist: d } => {
                let z = self.z_theta(theta);
                let w = ((theta - 0.5) / 1.5).clamp(0.0, 1.0);
                let r = d / h;
                (0..x.len())
                    .map(|i| {
                        let down = if self.special(i) { -2.0 * dl } else { 0.0 };
                        let pull = dl * (z[i] - x[i]) / h.max(d);
                        let far = (1.0 - w) * default[i] + w * pull;
                        profile(r, down, dl * (z[i] - x[i]) / h, far)
                    })
                    .collect()
            }
        }
    }

    /// Truncated displacement: `x + g(x)` stays in the hypercube.
    pub fn displacement(&self, x: &[f64]) -> Vec<f64> {
        let gh = self.displacement_hat(x);
        x.iter().zip(&gh).map(|(&xi, &gi)| (xi + gi).clamp(LO, HI) - xi).collect()
    }

    pub fn f(&self, x: &[f64]) -> Vec<f64> {
        let g = self.displacement(x);
        x.iter().zip(&g).map(|(a, b)| a + b).collect()
    }

    pub fn residual(&self, x: &[f64]) -> f64 {
        norm(&self.displacement(x))
    }

    /// `f_i(x)` from `x_i` and region metadata only.
    pub fn local_eval(&self, i: usize, meta: &RegionClassification, xi: f64) -> Result<f64> {
        let p = &self.params;
        if i >= p.dim() {
            return Err(Error::Contract(format!("coordinate {i} out of range")));
        }
        let (dl, h) = (p.delta, p.h);
        let default = if self.special(i) { dl } else { 0.0 };
        let gi = match meta {
            RegionClassification::FarInsidePicture => default,
            RegionClassification::NearLine { s, t, z, dist: d, .. } => {
                let l = dist(s, t);
                if l == 0.0 || z.len() != p.dim() {
                    return Err(Error::Contract("inconsistent line metadata".into()));
                }
                profile(d / h, dl * (t[i] - s[i]) / l, dl * (z[i] - xi) / h, default)
            }
            RegionClassification::NearVertex { s, y, t, alpha, z, dist: d, .. } => {
                let (l1, l2) = (dist(s, y), dist(y, t));
                if l1 == 0.0 || l2 == 0.0 || !(0.0..=1.0).contains(alpha) {
                    return Err(Error::Contract("inconsistent vertex metadata".into()));
                }
                let axis = dl * (alpha * (y[i] - s[i]) / l1 + (1.0 - alpha) * (t[i] - y[i]) / l2);
                profile(d / h, axis, dl * (z[i] - xi) / h, default)
            }
            RegionClassification::OutsidePicture { theta, dist: d } => {
                if *theta < 0.5 - 1e-9 || *d < 0.0 {
                    return Err(Error::Contract("inconsistent outside-picture metadata".into()));
                }
                let zi = if self.special(i) { *theta } else { 0.0 };
                let down = if self.special(i) { -2.0 * dl } else { 0.0 };
                let w = ((theta - 0.5) / 1.5).clamp(0.0, 1.0);
                let far = (1.0 - w) * default + w * dl * (zi - xi) / h.max(*d);
                profile(d / h, down, dl * (zi - xi) / h, far)
            }
        };
        Ok((xi + gi).clamp(LO, HI))
    }

    /// Random point at normalized distance `r` from `center`, clipped to the cube.
    pub fn offset_point(&self, center: &[f64], r: f64, rng: &mut impl Rng) -> Vec<f64> {
        let dir: Vec<f64> = (0..center.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let n = norm(&dir).max(1e-300);
        center.iter().zip(&dir).map(|(c, d)| (c + r * d / n).clamp(LO, HI)).collect()
    }

    /// Points drawn from the strata: uniform, near a segment, near a corner,
    /// around the picture boundary, and near the cube faces.
    pub fn stratified_samples(&self, count: usize, seed: u64) -> Result<Vec<(Stratum, Vec<f64>)>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let segs = self.segments()?;
        let corners = self.corners()?;
        let h = self.params.h;
        let dim = self.dim();
        let m = self.params.m;
        let mut out = Vec::with_capacity(count);
        for k in 0..count {
            let stratum = Stratum::ALL[k % Stratum::ALL.len()];
            let x = match stratum {
                Stratum::Uniform => (0..dim).map(|_| rng.gen_range(LO..=HI)).collect(),
                Stratum::NearLine => {
                    let seg = segs[rng.gen_range(0..segs.len())];
                    let (s, t) = (self.point(seg.s), self.point(seg.t));
                    let c = lerp(&s, &t, rng.gen_range(-0.05..1.05));
                    self.offset_point(&c, rng.gen_range(0.0..4.0 * h), &mut rng)
                }
                Stratum::NearVertex if !corners.is_empty() => {
                    let c = corners[rng.gen_range(0..corners.len())];
                    let y = self.point(c.y);
                    self.offset_point(&y, rng.gen_range(0.0..2.0 * self.params.sqrt_h()), &mut rng)
                }
                Stratum::NearVertex | Stratum::PictureBoundary => {
                    let mut x: Vec<f64> = (0..dim).map(|_| rng.gen_range(LO..=HI)).collect();
                    let target = 0.5 + rng.gen_range(-4.0 * h..4.0 * h);
                    for v in &mut x[3 * m..] {
                        *v = rng.gen_range(target - 1.0..target + 1.0);
                    }
                    let shift = target - self.theta(&x);
                    for v in &mut x[3 * m..] {
                        *v += shift;
                    }
                    x
                }
                Stratum::Faces => (0..dim)
                    .map(|_| match rng.gen_range(0..3) {
                        0 => LO + rng.gen_range(0.0..2.0 * self.params.delta),
                        1 => HI - rng.gen_range(0.0..2.0 * self.params.delta),
                        _ => rng.gen_range(LO..=HI),
                    })
                    .collect(),
            };
            out.push((stratum, x));
        }
        Ok(out)
    }

    /// Smallest distance from `x` to an open path end or to the top point.
    pub fn distance_to_ends(&self, x: &[f64]) -> Result<f64> {
        let mut best = dist(x, &self.top());
        for e in self.endpoints()? {
            best = best.min(dist(x, &e.point));
        }
        Ok(best)
    }

    /// Export with Brouwer vertices as hex-coded `3m`-bit strings.
    pub fn export(&self) -> Result<EmbeddingExport> {
        let hexkey = |k: VertexKey| match k {
            VertexKey::Top => "top".to_string(),
            VertexKey::Grid { a, b, c } => {
                let m = self.params.m;
                let mut bits = self.code.encode_word(a) as u128;
                bits |= (self.code.encode_word(b) as u128) << m;
                if c {
                    bits |= ((1u128 << m) - 1) << (2 * m);
                }
                let bytes = (3 * m).div_ceil(8);
                hex::encode(&bits.to_be_bytes()[16 - bytes..])
            }
        };
        let mut chains = vec![vec![hexkey(VertexKey::Top), hexkey(VertexKey::rest(0))]];
        for (u, v) in self.edges()? {
            chains.push(Self::edge_chain(u, v).iter().map(|&k| hexkey(k)).collect());
        }
        Ok(EmbeddingExport {
            params: self.params,
            code: self.code.clone().into(),
            edges: self.edges()?,
            chains,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Stratum {
    Uniform,
    NearLine,
    NearVertex,
    PictureBoundary,
    Faces,
}

impl Stratum {
    pub const ALL: [Stratum; 5] =
        [Stratum::Uniform, Stratum::NearLine, Stratum::NearVertex, Stratum::PictureBoundary, Stratum::Faces];
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EmbeddingExport {
    pub params: BrouwerParams,
    pub code: crate::codes::CodeRecord,
    pub edges: Vec<(u64, u64)>,
    pub chains: Vec<Vec<String>>,
}

/// Affine bridge `[0,1]^d <-> [-1,2]^d`.
pub fn to_unit(x: &[f64]) -> Vec<f64> {
    x.iter().map(|v| (v + 1.0) / 3.0).collect()
}

pub fn from_unit(y: &[f64]) -> Vec<f64> {
    y.iter().map(|v| 3.0 * v - 1.0).collect()
}

/// `f` conjugated onto the unit cube.
pub fn rescale_to_unit(emb: &PathEmbedding) -> impl Fn(&[f64]) -> Vec<f64> + '_ {
    move |y: &[f64]| to_unit(&emb.f(&from_unit(y)))
}

/// Per-region counts, for reports.
pub fn region_histogram<'a>(emb: &PathEmbedding, pts: impl IntoIterator<Item = &'a Vec<f64>>) -> BTreeMap<String, usize> {
    let mut out = BTreeMap::new();
    for x in pts {
        *out.entry(emb.classify(x).tag().to_string()).or_insert(0) += 1;
    }
    out
}


#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LipschitzAudit {
    pub samples: usize,
    pub pairs: usize,
    /// Samples whose image leaves `[-1, 2]^{4m}`.
    pub containment_violations: usize,
    pub max_ratio_hat: f64,
    pub max_ratio: f64,
    pub bound_hat: f64,
    pub bound: f64,
    pub violations_hat: usize,
    pub violations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FloorAudit {
    pub samples: usize,
    /// Samples skipped for lying within `2√h` of an end or the top point.
    pub excluded: usize,
    /// Smallest `‖g(x)‖ / δ` over the kept samples.
    pub min_ratio: f64,
    pub floor: f64,
}

impl PathEmbedding {
    /// Containment of `f` on stratified samples, and difference quotients of
    /// `ĝ` and `g` on pairs: one far partner per four samples, otherwise a
    /// partner at log-uniform distance in `[1e-7, 10^-1.5]`.
    pub fn lipschitz_audit(&self, count: usize, seed: u64) -> Result<LipschitzAudit> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x11b5);
        let samples = self.stratified_samples(count, seed)?;
        let p = self.params;
        let mut out = LipschitzAudit {
            samples: samples.len(),
            pairs: 0,
            containment_violations: 0,
            max_ratio_hat: 0.0,
            max_ratio: 0.0,
            bound_hat: p.lipschitz_hat(),
            bound: p.lipschitz(),
            violations_hat: 0,
            violations: 0,
        };
        for (k, (_, x)) in samples.iter().enumerate() {
            if self.f(x).iter().any(|v| !(LO..=HI).contains(v)) {
                out.containment_violations += 1;
            }
            let y = if k % 4 == 0 {
                samples[rng.gen_range(0..samples.len())].1.clone()
            } else {
                self.offset_point(x, 10f64.powf(rng.gen_range(-7.0..-1.5)), &mut rng)
            };
            let d = dist(x, &y);
            if d == 0.0 {
                continue;
            }
            out.pairs += 1;
            let hat = dist(&self.displacement_hat(x), &self.displacement_hat(&y)) / d;
            let full = dist(&self.displacement(x), &self.displacement(&y)) / d;
            out.max_ratio_hat = out.max_ratio_hat.max(hat);
            out.max_ratio = out.max_ratio.max(full);
            out.violations_hat += (hat > out.bound_hat) as usize;
            out.violations += (full > out.bound) as usize;
        }
        Ok(out)
    }

    /// Smallest displacement on stratified samples away from the ends.
    pub fn floor_audit(&self, count: usize, seed: u64) -> Result<FloorAudit> {
        let p = self.params;
        let mut out = FloorAudit { samples: 0, excluded: 0, min_ratio: f64::INFINITY, floor: DISPLACEMENT_FLOOR };
        for (_, x) in self.stratified_samples(count, seed)? {
            out.samples += 1;
            if self.distance_to_ends(&x)? < 2.0 * p.sqrt_h() {
                out.excluded += 1;
                continue;
            }
            out.min_ratio = out.min_ratio.min(self.residual(&x) / p.delta);
        }
        Ok(out)
    }
}
