//! λ-biased multisets over `GF(2^ℓ)^t` and an exhaustive check of the
//! line-sampling bound.
//!
//! Characters are `χ_a(y) = (-1)^{Tr(<a, y>)}`. The trace form is
//! nondegenerate, so as `a` ranges over nonzero vectors these are exactly the
//! nonzero Walsh characters on the `ℓ·t` packed coefficient bits, and the bias
//! of a multiset is one fast Walsh–Hadamard transform away.

use crate::error::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Largest `|G|^t` certified exhaustively.
pub const CERTIFY_BUDGET: u64 = 1 << 16;

/// Constant in `|S| = ⌈c·t·log2|G|/λ²⌉`.
pub const SIZE_CONSTANT: f64 = 8.0;

pub const MAX_RETRIES: u32 = 16;

/// Irreducible polynomials for degrees 1..=8, bit `k` = coefficient of `z^k`.
const IRREDUCIBLE: [u32; 9] = [0, 0x3, 0x7, 0xB, 0x13, 0x25, 0x43, 0x83, 0x11B];

pub type FieldElem = u32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GaloisField {
    degree: u32,
    modulus: u32,
}

impl GaloisField {
    pub fn new(degree: u32) -> Result<Self> {
        if !(1..=8).contains(&degree) {
            return Err(Error::Argument(format!("field degree {degree} outside 1..=8")));
        }
        Ok(Self { degree, modulus: IRREDUCIBLE[degree as usize] })
    }

    /// Field modulo a caller-supplied polynomial, checked for irreducibility.
    pub fn with_modulus(degree: u32, modulus: u32) -> Result<Self> {
        if !(1..=8).contains(&degree) || modulus >> degree != 1 {
            return Err(Error::Argument(format!("modulus {modulus:#x} is not of degree {degree}")));
        }
        let f = Self { degree, modulus };
        if (1..f.order() as u32).any(|a| (1..f.order() as u32).all(|b| f.mul(a, b) != 1)) {
            return Err(Error::Argument(format!("modulus {modulus:#x} is reducible")));
        }
        Ok(f)
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    pub fn order(&self) -> u64 {
        1 << self.degree
    }

    pub fn add(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        a ^ b
    }

    pub fn mul(&self, a: FieldElem, b: FieldElem) -> FieldElem {
        let mut prod = 0u32;
        for k in 0..self.degree {
            if (b >> k) & 1 == 1 {
                prod ^= a << k;
            }
        }
        for k in (self.degree..2 * self.degree).rev() {
            if (prod >> k) & 1 == 1 {
                prod ^= self.modulus << (k - self.degree);
            }
        }
        prod
    }

    pub fn pow(&self, a: FieldElem, mut e: u64) -> FieldElem {
        let (mut base, mut acc) = (a, 1);
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: FieldElem) -> Option<FieldElem> {
        (a != 0).then(|| self.pow(a, self.order() - 2))
    }

    /// Absolute trace `a + a^2 + ... + a^{2^{ℓ-1}}`, an element of `{0, 1}`.
    pub fn trace(&self, a: FieldElem) -> u32 {
        let mut acc = 0;
        let mut p = a;
        for _ in 0..self.degree {
            acc ^= p;
            p = self.mul(p, p);
        }
        debug_assert!(acc <= 1);
        acc
    }

    /// `(-1)^{Tr(<a, y>)}`.
    pub fn character(&self, a: &[FieldElem], y: &[FieldElem]) -> f64 {
        let ip = a.iter().zip(y).fold(0, |acc, (&ai, &yi)| acc ^ self.mul(ai, yi));
        if self.trace(ip) == 0 {
            1.0
        } else {
            -1.0
        }
    }

    fn space_size(&self, t: usize) -> Result<u64> {
        let bits = self.degree as u64 * t as u64;
        if bits > 16 {
            return Err(Error::Budget(format!("|G|^t = 2^{bits} exceeds 2^16")));
        }
        Ok(1 << bits)
    }

    /// Packs a vector into an integer, `ℓ` bits per coordinate.
    pub fn pack(&self, y: &[FieldElem]) -> u64 {
        y.iter().enumerate().fold(0, |acc, (j, &v)| acc | (v as u64) << (j as u32 * self.degree))
    }

    pub fn unpack(&self, idx: u64, t: usize) -> Vec<FieldElem> {
        let mask = (1u64 << self.degree) - 1;
        (0..t).map(|j| ((idx >> (j as u32 * self.degree)) & mask) as FieldElem).collect()
    }
}

/// In-place fast Walsh–Hadamard transform.
pub fn fwht(v: &mut [f64]) {
    let mut len = 1;
    while len < v.len() {
        for block in v.chunks_mut(2 * len) {
            let (lo, hi) = block.split_at_mut(len);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        len *= 2;
    }
}

/// Largest `|E_{y∈S} χ(y)|` over nontrivial characters.
pub fn bias(field: &GaloisField, t: usize, set: &[Vec<FieldElem>]) -> Result<f64> {
    let size = field.space_size(t)?;
    if set.is_empty() {
        return Err(Error::Argument("empty multiset".into()));
    }
    let mut counts = vec![0.0; size as usize];
    for y in set {
        if y.len() != t || y.iter().any(|&v| v as u64 >= field.order()) {
            return Err(Error::Argument("element outside G^t".into()));
        }
        counts[field.pack(y) as usize] += 1.0;
    }
    fwht(&mut counts);
    Ok(counts[1..].iter().fold(0.0f64, |m, c| m.max(c.abs())) / set.len() as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BiasedSet {
    pub degree: u32,
    pub modulus: u32,
    pub t: usize,
    pub lambda: f64,
    pub seed: u64,
    pub size_constant: f64,
    /// Draws used, the last one certified.
    pub attempts: u32,
    pub bias: f64,
    /// Each vector as `t` coefficient-packed field elements.
    pub elements: Vec<Vec<FieldElem>>,
}

impl BiasedSet {
    pub fn field(&self) -> Result<GaloisField> {
        GaloisField::with_modulus(self.degree, self.modulus)
    }
}

pub fn set_size(field: &GaloisField, t: usize, lambda: f64) -> usize {
    (SIZE_CONSTANT * t as f64 * field.degree() as f64 / (lambda * lambda)).ceil() as usize
}

/// Uniform multiset of the prescribed size, redrawn until its bias is at most `lambda`.
pub fn sample_biased_set(field: &GaloisField, t: usize, lambda: f64, seed: u64) -> Result<BiasedSet> {
    if !(lambda > 0.0 && lambda <= 1.0) || t == 0 {
        return Err(Error::Argument(format!("need t >= 1 and lambda in (0, 1], got t = {t}, lambda = {lambda}")));
    }
    let size = set_size(field, t, lambda);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for attempt in 1..=MAX_RETRIES {
        let elements: Vec<Vec<FieldElem>> =
            (0..size).map(|_| (0..t).map(|_| rng.gen_range(0..field.order()) as FieldElem).collect()).collect();
        let b = bias(field, t, &elements)?;
        if b <= lambda {
            return Ok(BiasedSet {
                degree: field.degree(),
                modulus: field.modulus(),
                t,
                lambda,
                seed,
                size_constant: SIZE_CONSTANT,
                attempts: attempt,
                bias: b,
                elements,
            });
        }
    }
    Err(Error::Construction(format!("no {lambda}-biased set after {MAX_RETRIES} draws")))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplingReport {
    pub failure_rate: f64,
    pub bound: f64,
    pub mean: f64,
    pub holds: bool,
}

/// Exhaustive `Pr_{x, y∈S}[|E_β B(x + βy) − E B| > ε]` against
/// `(1/|G| + λ)·E[B]/ε²`, with `λ` the set's exact bias.
pub fn sampling_check(
    field: &GaloisField,
    t: usize,
    set: &[Vec<FieldElem>],
    b: &dyn Fn(&[FieldElem]) -> f64,
    eps: f64,
) -> Result<SamplingReport> {
    let size = field.space_size(t)?;
    let lambda = bias(field, t, set)?;
    let q = field.order();
    let table: Vec<f64> = (0..size).map(|i| b(&field.unpack(i, t))).collect();
    if table.iter().any(|v| !(0.0..=1.0).contains(v)) {
        return Err(Error::Argument("B must map into [0, 1]".into()));
    }
    let mean = table.iter().sum::<f64>() / size as f64;
    let mut failures = 0u64;
    for xi in 0..size {
        let x = field.unpack(xi, t);
        for y in set {
            let line: f64 = (0..q as FieldElem)
                .map(|beta| {
                    let p: Vec<FieldElem> = x.iter().zip(y).map(|(&a, &c)| a ^ field.mul(beta, c)).collect();
                    table[field.pack(&p) as usize]
                })
                .sum::<f64>()
                / q as f64;
            if (line - mean).abs() > eps {
                failures += 1;
            }
        }
    }
    let failure_rate = failures as f64 / (size as f64 * set.len() as f64);
    let bound = (1.0 / q as f64 + lambda) * mean / (eps * eps);
    Ok(SamplingReport { failure_rate, bound, mean, holds: failure_rate <= bound })
}
