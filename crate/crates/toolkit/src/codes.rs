//! Binary linear codes with certified distance and syndrome decoding.
//!
//! Codes are systematic, `G = [I | A]`, with block length at most 64 so a
//! word fits in a `u64`. Bit `j` of a word is coordinate `j`.

use crate::eol::{from_bits, to_bits};
use crate::error::{check_width, Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// Largest message length whose distance is certified by enumeration.
pub const EXHAUSTIVE_MSG_BITS: usize = 16;

/// Largest redundancy for which a syndrome table is built.
pub const MAX_REDUNDANCY: usize = 20;

/// Default relative distance target.
pub const DELTA_CODE: f64 = 0.25;

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "CodeRecord", into = "CodeRecord")]
pub struct LinearCode {
    n_msg: usize,
    n_block: usize,
    rows: Vec<u64>,
    min_distance: usize,
    certified: bool,
    seed: Option<u64>,
    /// syndrome -> error pattern of weight below d/2.
    table: HashMap<u64, u64>,
}

/// Serialized form: generator rows as big-endian hex, row-major.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CodeRecord {
    pub n_msg: usize,
    pub n_block: usize,
    pub seed: Option<u64>,
    pub min_distance: usize,
    pub certified: bool,
    pub generator: Vec<String>,
}

impl From<LinearCode> for CodeRecord {
    fn from(c: LinearCode) -> Self {
        let bytes = c.n_block.div_ceil(8);
        let generator = c
            .rows
            .iter()
            .map(|r| hex::encode(&r.to_be_bytes()[8 - bytes..]))
            .collect();
        CodeRecord {
            n_msg: c.n_msg,
            n_block: c.n_block,
            seed: c.seed,
            min_distance: c.min_distance,
            certified: c.certified,
            generator,
        }
    }
}

impl TryFrom<CodeRecord> for LinearCode {
    type Error = Error;
    fn try_from(r: CodeRecord) -> Result<Self> {
        let rows = r
            .generator
            .iter()
            .map(|h| {
                let raw = hex::decode(h).map_err(|e| Error::Decode(e.to_string()))?;
                if raw.len() > 8 {
                    return Err(Error::Decode("generator row longer than 64 bits".into()));
                }
                Ok(raw.iter().fold(0u64, |acc, &b| (acc << 8) | b as u64))
            })
            .collect::<Result<Vec<_>>>()?;
        let code = LinearCode::from_generator(r.n_msg, r.n_block, rows, r.seed)?;
        if r.certified && code.certified && code.min_distance != r.min_distance {
            return Err(Error::Decode(format!(
                "declared distance {} but audit finds {}",
                r.min_distance, code.min_distance
            )));
        }
        Ok(code)
    }
}

impl LinearCode {
    /// Builds a code from generator rows, auditing the distance when feasible.
    pub fn from_generator(n_msg: usize, n_block: usize, rows: Vec<u64>, seed: Option<u64>) -> Result<Self> {
        if n_msg == 0 || n_block < n_msg || n_block > 64 {
            return Err(Error::Argument(format!("unsupported code shape {n_msg} -> {n_block}")));
        }
        check_width(n_msg, rows.len())?;
        let mask = if n_block == 64 { u64::MAX } else { (1u64 << n_block) - 1 };
        for (i, &r) in rows.iter().enumerate() {
            if r & !mask != 0 || r & ((1u64 << n_msg) - 1) != 1u64 << i {
                return Err(Error::Argument(format!("row {i} is not in systematic form")));
            }
        }
        if n_block - n_msg > MAX_REDUNDANCY {
            return Err(Error::Argument("redundancy too large for a syndrome table".into()));
        }
        let mut code = Self {
            n_msg,
            n_block,
            rows,
            min_distance: 0,
            certified: false,
            seed,
            table: HashMap::new(),
        };
        let (d, certified) = code.audit_distance(EXHAUSTIVE_MSG_BITS);
        code.min_distance = d;
        code.certified = certified;
        code.build_table();
        Ok(code)
    }

    /// Seeded random systematic code.
    pub fn random(n_msg: usize, n_block: usize, seed: u64) -> Result<Self> {
        if n_block > 64 || n_block < n_msg {
            return Err(Error::Argument(format!("unsupported code shape {n_msg} -> {n_block}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows = (0..n_msg)
            .map(|i| {
                let parity: u64 = if n_block == n_msg { 0 } else { rng.gen::<u64>() >> (64 - (n_block - n_msg)) };
                (1u64 << i) | (parity << n_msg)
            })
            .collect();
        Self::from_generator(n_msg, n_block, rows, Some(seed))
    }

    /// Repeats each message bit `r` times (bit `i` occupies coordinates `i, i+k, ...`).
    pub fn repetition(n_msg: usize, r: usize) -> Result<Self> {
        let rows = (0..n_msg)
            .map(|i| (0..r).fold(0u64, |acc, c| acc | 1u64 << (i + c * n_msg)))
            .collect();
        Self::from_generator(n_msg, n_msg * r, rows, None)
    }

    /// First seed from `start` whose code reaches relative distance `DELTA_CODE`.
    pub fn search(n_msg: usize, n_block: usize, start: u64) -> Result<Self> {
        for seed in start..start + 10_000 {
            let c = Self::random(n_msg, n_block, seed)?;
            if c.certified && c.min_distance as f64 >= DELTA_CODE * n_block as f64 {
                return Ok(c);
            }
        }
        Err(Error::Construction(format!("no {n_msg} -> {n_block} code with relative distance {DELTA_CODE}")))
    }

    /// Shipped code for message length `n_msg`.
    pub fn preset(n_msg: usize) -> Result<Self> {
        let (n_block, seed) = preset_key(n_msg)?;
        let c = Self::random(n_msg, n_block, seed)?;
        debug_assert!(c.min_distance as f64 >= DELTA_CODE * n_block as f64);
        Ok(c)
    }

    pub fn n_msg(&self) -> usize {
        self.n_msg
    }

    pub fn n_block(&self) -> usize {
        self.n_block
    }

    pub fn min_distance(&self) -> usize {
        self.min_distance
    }

    pub fn certified(&self) -> bool {
        self.certified
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn rows(&self) -> &[u64] {
        &self.rows
    }

    pub fn rate(&self) -> f64 {
        self.n_msg as f64 / self.n_block as f64
    }

    pub fn encode_word(&self, u: u64) -> u64 {
        self.rows
            .iter()
            .enumerate()
            .filter(|(i, _)| (u >> i) & 1 == 1)
            .fold(0, |acc, (_, r)| acc ^ r)
    }

    pub fn encode(&self, u: &[bool]) -> Result<Vec<bool>> {
        check_width(self.n_msg, u.len())?;
        Ok(to_bits(self.encode_word(from_bits(u)), self.n_block))
    }

    fn syndrome(&self, w: u64) -> u64 {
        let msg = w & ((1u64 << self.n_msg) - 1);
        (self.encode_word(msg) ^ w) >> self.n_msg
    }

    fn build_table(&mut self) {
        let radius = self.min_distance.saturating_sub(1) / 2;
        let mut table = HashMap::new();
        let mut pattern = Vec::new();
        self.fill_table(0, radius, &mut pattern, &mut table);
        self.table = table;
    }

    fn fill_table(&self, from: usize, left: usize, chosen: &mut Vec<usize>, table: &mut HashMap<u64, u64>) {
        let e = chosen.iter().fold(0u64, |acc, &j| acc | 1 << j);
        table.insert(self.syndrome(e), e);
        if left == 0 {
            return;
        }
        for j in from..self.n_block {
            chosen.push(j);
            self.fill_table(j + 1, left - 1, chosen, table);
            chosen.pop();
        }
    }

    /// Decodes a word within the unique decoding radius.
    pub fn decode_word(&self, w: u64) -> Option<(u64, usize)> {
        let e = *self.table.get(&self.syndrome(w))?;
        let c = w ^ e;
        Some((c & ((1u64 << self.n_msg) - 1), e.count_ones() as usize))
    }

    /// Returns `(u, flips)` when `w` lies at distance below `d/2` from `E(u)`.
    pub fn decode(&self, w: &[bool]) -> Option<(Vec<bool>, usize)> {
        if w.len() != self.n_block {
            return None;
        }
        self.decode_word(from_bits(w))
            .map(|(u, e)| (to_bits(u, self.n_msg), e))
    }

    /// Minimum nonzero codeword weight; the flag is false when the message
    /// space exceeds `budget` bits and the declared distance is returned.
    pub fn audit_distance(&self, budget: usize) -> (usize, bool) {
        if self.n_msg > budget {
            return (self.min_distance, false);
        }
        let d = (1..1u64 << self.n_msg)
            .map(|u| self.encode_word(u).count_ones() as usize)
            .min()
            .unwrap_or(self.n_block);
        (d, true)
    }
}

impl PartialEq for LinearCode {
    fn eq(&self, other: &Self) -> bool {
        self.n_msg == other.n_msg && self.n_block == other.n_block && self.rows == other.rows
    }
}

/// Registry of shipped presets: message length -> (block length, seed).
pub fn preset_key(n_msg: usize) -> Result<(usize, u64)> {
    PRESETS
        .iter()
        .find(|p| p.0 == n_msg)
        .map(|p| (p.1, p.2))
        .ok_or_else(|| Error::Argument(format!("no preset for message length {n_msg}")))
}

/// `(n_msg, n_block, seed)` found by [`LinearCode::search`] from seed 0.
pub const PRESETS: &[(usize, usize, u64)] = &[
    (1, 16, 0),
    (2, 16, 0),
    (3, 16, 0),
    (4, 16, 0),
    (5, 16, 0),
    (6, 16, 0),
];
