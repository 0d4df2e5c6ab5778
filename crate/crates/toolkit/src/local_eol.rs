//! Reduction from END-OF-A-LINE to its local variant.
//!
//! A configuration holds four copies of the source circuits (`S1`, `P1`, `S2`,
//! `P2`), two bits per line: `00` inactive, `10` value 0, `11` value 1. Every
//! step activates or deactivates one line, following a fixed schedule whose
//! position (the counter) is read off the active/inactive pattern.

use crate::eol::{BooleanCircuit, EolInstance, EolSolution, GateKind};
use crate::error::{check_width, Error, Result};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, HashMap};

/// Most input bits any output bit of a step may depend on.
pub const DEPENDENCY_BOUND: usize = 2;

/// Most bits a single step may change.
pub const CHANGE_BOUND: usize = 2;

const INACTIVE: u8 = 0b00;
const ZERO: u8 = 0b10;
const ONE: u8 = 0b11;

fn code(v: bool) -> u8 {
    if v {
        ONE
    } else {
        ZERO
    }
}

fn value(c: u8) -> Option<bool> {
    match c {
        ZERO => Some(false),
        ONE => Some(true),
        _ => None,
    }
}

/// Copies of the source circuits, in layout order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Copy {
    S1,
    P1,
    S2,
    P2,
}

const COPIES: [Copy; 4] = [Copy::S1, Copy::P1, Copy::S2, Copy::P2];

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Configuration {
    lines: Vec<u8>,
}

impl Configuration {
    pub fn line_count(&self) -> usize {
        self.lines.len()
    }

    pub fn line(&self, l: usize) -> Option<bool> {
        value(self.lines[l])
    }

    pub fn is_active(&self, l: usize) -> bool {
        self.lines[l] & 0b10 != 0
    }

    /// Flat bit view: bit `2l` is line `l`'s activity, bit `2l+1` its value.
    pub fn bits(&self) -> Vec<bool> {
        self.lines.iter().flat_map(|&c| [c & 0b10 != 0, c & 0b01 != 0]).collect()
    }

    pub fn from_bits(bits: &[bool]) -> Result<Self> {
        if bits.len() % 2 != 0 {
            return Err(Error::Argument("bit string length must be even".into()));
        }
        let lines = bits.chunks(2).map(|p| ((p[0] as u8) << 1) | p[1] as u8).collect();
        Ok(Self { lines })
    }

    pub fn bit(&self, i: usize) -> bool {
        let c = self.lines[i / 2];
        if i % 2 == 0 {
            c & 0b10 != 0
        } else {
            c & 0b01 != 0
        }
    }

    pub fn toggle_bit(&mut self, i: usize) {
        self.lines[i / 2] ^= if i % 2 == 0 { 0b10 } else { 0b01 };
    }

    pub fn hamming(&self, other: &Configuration) -> usize {
        self.lines
            .iter()
            .zip(&other.lines)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum()
    }

    /// Packs four lines per byte, first line in the high bits.
    pub fn to_hex(&self) -> String {
        let bytes: Vec<u8> = self
            .lines
            .chunks(4)
            .map(|ch| ch.iter().enumerate().fold(0u8, |acc, (j, &c)| acc | c << (6 - 2 * j)))
            .collect();
        hex::encode(bytes)
    }

    pub fn from_hex(text: &str, line_count: usize) -> Result<Self> {
        let bytes = hex::decode(text).map_err(|e| Error::Decode(e.to_string()))?;
        check_width(line_count.div_ceil(4), bytes.len())?;
        let lines = (0..line_count).map(|l| (bytes[l / 4] >> (6 - 2 * (l % 4))) & 0b11).collect();
        Ok(Self { lines })
    }
}

/// JSON wrapper for a configuration.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfigurationRecord {
    pub m: usize,
    pub schedule_index: Option<usize>,
    pub bits: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    pub line: usize,
    pub activate: bool,
}

/// How a line's value is computed when it is (re)activated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Rule {
    kind: GateKind,
    srcs: [usize; 2],
}

impl Rule {
    fn copy(src: usize) -> Self {
        Rule { kind: GateKind::Copy, srcs: [src, src] }
    }

    fn arity(&self) -> usize {
        self.kind.arity()
    }

    fn eval(&self, u: &Configuration) -> u8 {
        let a = u.line(self.srcs[0]).unwrap_or(false);
        let b = u.line(self.srcs[1]).unwrap_or(false);
        code(self.kind.apply(a, b))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Stage {
    Compute,
    EraseFirst,
    EraseFirstPred,
    CopyBack,
    EraseSecond,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalityReport {
    pub sampled_states: usize,
    pub max_dependency: usize,
    pub max_hamming_change: usize,
    pub min_hamming_change: usize,
    pub declared_dependency: usize,
    pub declared_change: usize,
}

impl LocalityReport {
    pub fn within_declared(&self) -> bool {
        self.max_dependency <= self.declared_dependency
            && self.max_hamming_change <= self.declared_change
            && self.min_hamming_change >= 1
    }
}

#[derive(Clone, Debug)]
pub struct LocalEolInstance {
    source: EolInstance,
    s: BooleanCircuit,
    p: BooleanCircuit,
    offsets: [usize; 4],
    schedule: Vec<Step>,
    rules: Vec<Rule>,
    patterns: HashMap<Vec<bool>, usize>,
    u0: Configuration,
    q_critical: usize,
}

impl LocalEolInstance {
    /// Builds the local instance; circuits are normalized to fan-out 2 first.
    pub fn reduce(source: &EolInstance) -> Self {
        let norm = |c: &BooleanCircuit| if c.is_normalized() { c.clone() } else { c.normalize() };
        let s = norm(source.s());
        let p = norm(source.p());
        let (ns, np) = (s.wire_count(), p.wire_count());
        let offsets = [0, ns, ns + np, 2 * ns + np];
        let mut inst = Self {
            source: source.clone(),
            s,
            p,
            offsets,
            schedule: Vec::new(),
            rules: Vec::new(),
            patterns: HashMap::new(),
            u0: Configuration { lines: Vec::new() },
            q_critical: 0,
        };
        inst.build_schedule();
        inst.u0 = inst.rest_configuration(&vec![false; source.n()]);
        inst.q_critical = (0..inst.m()).map(|c| inst.natural_critical(c).len()).max().unwrap_or(0);
        inst
    }

    fn circuit(&self, k: Copy) -> &BooleanCircuit {
        match k {
            Copy::S1 | Copy::S2 => &self.s,
            Copy::P1 | Copy::P2 => &self.p,
        }
    }

    fn line(&self, k: Copy, w: usize) -> usize {
        self.offsets[k as usize] + w
    }

    fn out(&self, k: Copy, i: usize) -> usize {
        self.line(k, self.circuit(k).outputs()[i])
    }

    fn gate_rule(&self, k: Copy, w: usize) -> Rule {
        let c = self.circuit(k);
        let g = &c.gates()[w - c.input_count()];
        let src = |j: usize| g.inputs.get(j).or(g.inputs.first()).map_or(0, |&x| self.line(k, x));
        Rule { kind: g.kind, srcs: [src(0), src(1)] }
    }

    fn build_schedule(&mut self) {
        let n = self.source.n();
        let lines = |k: Copy| 0..self.circuit(k).wire_count();
        let mut steps: Vec<(Step, Rule)> = Vec::new();
        // Copy S1's output into S2's input, then compute S2 and P2.
        for i in 0..n {
            steps.push((Step { line: self.line(Copy::S2, i), activate: true }, Rule::copy(self.out(Copy::S1, i))));
        }
        for w in n..self.s.wire_count() {
            steps.push((Step { line: self.line(Copy::S2, w), activate: true }, self.gate_rule(Copy::S2, w)));
        }
        for w in lines(Copy::P2) {
            let rule = if w < n { Rule::copy(self.out(Copy::S2, w)) } else { self.gate_rule(Copy::P2, w) };
            steps.push((Step { line: self.line(Copy::P2, w), activate: true }, rule));
        }
        // Erase S1 then P1, outputs first.
        for w in lines(Copy::S1).rev() {
            let rule = if w < n { Rule::copy(self.out(Copy::P1, w)) } else { self.gate_rule(Copy::S1, w) };
            steps.push((Step { line: self.line(Copy::S1, w), activate: false }, rule));
        }
        for w in lines(Copy::P1).rev() {
            let rule = if w < n { Rule::copy(self.line(Copy::S2, w)) } else { self.gate_rule(Copy::P1, w) };
            steps.push((Step { line: self.line(Copy::P1, w), activate: false }, rule));
        }
        // Copy S2, P2 back in the erase order, then erase S2, P2 in compute
        // order. P1's first line is copied only after S2 is erased so that the
        // all-active pattern occurs once per cycle.
        for w in lines(Copy::S1).rev() {
            steps.push((Step { line: self.line(Copy::S1, w), activate: true }, Rule::copy(self.line(Copy::S2, w))));
        }
        for w in lines(Copy::P1).rev().filter(|&w| w != 0) {
            steps.push((Step { line: self.line(Copy::P1, w), activate: true }, Rule::copy(self.line(Copy::P2, w))));
        }
        for w in lines(Copy::S2) {
            steps.push((Step { line: self.line(Copy::S2, w), activate: false }, Rule::copy(self.line(Copy::S1, w))));
        }
        steps.push((Step { line: self.line(Copy::P1, 0), activate: true }, Rule::copy(self.line(Copy::P2, 0))));
        for w in lines(Copy::P2) {
            steps.push((Step { line: self.line(Copy::P2, w), activate: false }, Rule::copy(self.line(Copy::P1, w))));
        }
        let total = self.offsets[3] + self.p.wire_count();
        let mut pattern = vec![false; total];
        for l in 0..self.offsets[2] {
            pattern[l] = true;
        }
        for (c, (step, _)) in steps.iter().enumerate() {
            let prev = self.patterns.insert(pattern.clone(), c);
            assert!(prev.is_none(), "activity patterns must be distinct");
            pattern[step.line] = step.activate;
        }
        assert!(pattern[..self.offsets[2]].iter().all(|&a| a) && pattern[self.offsets[2]..].iter().all(|&a| !a));
        let (schedule, rules) = steps.into_iter().unzip();
        self.schedule = schedule;
        self.rules = rules;
    }

    /// Number of configuration bits, four per line pair of the two circuits.
    pub fn m(&self) -> usize {
        4 * (self.s.wire_count() + self.p.wire_count())
    }

    pub fn line_count(&self) -> usize {
        self.m() / 2
    }

    pub fn schedule(&self) -> &[Step] {
        &self.schedule
    }

    pub fn source(&self) -> &EolInstance {
        &self.source
    }

    pub fn u0(&self) -> &Configuration {
        &self.u0
    }

    pub fn q_critical(&self) -> usize {
        self.q_critical
    }

    /// Line range `(start, len)` of a copy.
    pub fn copy_range(&self, k: Copy) -> (usize, usize) {
        (self.offsets[k as usize], self.circuit(k).wire_count())
    }

    /// Rest state of vertex `x`: `S1` computes `S(x)`, `P1` computes `P(S(x))`.
    pub fn rest_configuration(&self, x: &[bool]) -> Configuration {
        let sw = self.s.eval_wires(x).expect("width checked by caller");
        let sx: Vec<bool> = self.s.outputs().iter().map(|&o| sw[o]).collect();
        let pw = self.p.eval_wires(&sx).expect("same width");
        let mut lines = vec![INACTIVE; self.line_count()];
        for (w, &v) in sw.iter().enumerate() {
            lines[self.line(Copy::S1, w)] = code(v);
        }
        for (w, &v) in pw.iter().enumerate() {
            lines[self.line(Copy::P1, w)] = code(v);
        }
        Configuration { lines }
    }

    fn stage(&self, c: usize) -> Stage {
        let (ns, np) = (self.s.wire_count(), self.p.wire_count());
        if c < ns + np {
            Stage::Compute
        } else if c < 2 * ns + np {
            Stage::EraseFirst
        } else if c < 2 * (ns + np) {
            Stage::EraseFirstPred
        } else if c + 1 < 3 * (ns + np) {
            Stage::CopyBack
        } else {
            Stage::EraseSecond
        }
    }

    pub fn counter_of(&self, u: &Configuration) -> Result<usize> {
        check_width(self.line_count(), u.line_count())?;
        let pattern: Vec<bool> = (0..u.line_count()).map(|l| u.is_active(l)).collect();
        self.patterns
            .get(&pattern)
            .copied()
            .ok_or_else(|| Error::Decode("activity pattern is not a schedule state".into()))
    }

    fn vertex(&self, u: &Configuration, k: Copy) -> Option<Vec<bool>> {
        (0..self.source.n()).map(|i| u.line(self.line(k, i))).collect()
    }

    fn legal(&self, c: usize, u: &Configuration) -> bool {
        let n = self.source.n();
        let eq = |a: usize, b: usize| match (u.line(a), u.line(b)) {
            (Some(x), Some(y)) => x == y,
            _ => true,
        };
        let gates_ok = |k: Copy| {
            let circ = self.circuit(k);
            (circ.input_count()..circ.wire_count()).all(|w| {
                let l = self.line(k, w);
                let Some(v) = u.line(l) else { return true };
                let r = self.gate_rule(k, w);
                if r.srcs[..r.arity()].iter().any(|&s| !u.is_active(s)) {
                    return true;
                }
                code(v) == r.eval(u)
            })
        };
        let same = |a: Copy, b: Copy| {
            let (sa, len) = self.copy_range(a);
            let sb = self.copy_range(b).0;
            (0..len).all(|w| eq(sa + w, sb + w))
        };
        let zero = |k: Copy| (0..n).all(|i| u.line(self.line(k, i)) == Some(false));
        let first_ok = || {
            gates_ok(Copy::S1)
                && gates_ok(Copy::P1)
                && (0..n).all(|i| {
                    eq(self.line(Copy::P1, i), self.out(Copy::S1, i))
                        && eq(self.line(Copy::S1, i), self.out(Copy::P1, i))
                })
        };
        let second_ok = || {
            gates_ok(Copy::S2)
                && gates_ok(Copy::P2)
                && (0..n).all(|i| {
                    eq(self.line(Copy::P2, i), self.out(Copy::S2, i))
                        && eq(self.line(Copy::S2, i), self.out(Copy::P2, i))
                })
        };
        match self.stage(c) {
            Stage::Compute => {
                first_ok() && second_ok() && (0..n).all(|i| eq(self.line(Copy::S2, i), self.out(Copy::S1, i)))
            }
            Stage::EraseFirst => {
                second_ok()
                    && !zero(Copy::S2)
                    && first_ok()
                    && (0..n).all(|i| {
                        eq(self.line(Copy::P1, i), self.line(Copy::S2, i))
                            && eq(self.out(Copy::S1, i), self.line(Copy::S2, i))
                    })
            }
            Stage::EraseFirstPred => {
                second_ok()
                    && !zero(Copy::S2)
                    && gates_ok(Copy::P1)
                    && (0..n).all(|i| eq(self.line(Copy::P1, i), self.line(Copy::S2, i)))
            }
            Stage::CopyBack => second_ok() && !zero(Copy::S2) && same(Copy::S1, Copy::S2) && same(Copy::P1, Copy::P2),
            Stage::EraseSecond => {
                first_ok()
                    && !zero(Copy::S1)
                    && gates_ok(Copy::P2)
                    && same(Copy::S2, Copy::S1)
                    && same(Copy::P2, Copy::P1)
                    && (0..n).all(|i| {
                        eq(self.line(Copy::P2, i), self.out(Copy::S1, i))
                            && eq(self.line(Copy::S1, i), self.out(Copy::P2, i))
                    })
            }
        }
    }

    /// `u0`, or a schedule state whose values satisfy the local conditions.
    pub fn membership(&self, u: &Configuration) -> bool {
        if u.line_count() != self.line_count() || u.lines.iter().any(|&c| c == 0b01) {
            return false;
        }
        if *u == self.u0 {
            return true;
        }
        match self.counter_of(u) {
            Ok(c) => self.legal(c, u),
            Err(_) => false,
        }
    }

    /// Line and new code written by the forward step from counter `c`.
    fn forward_delta(&self, c: usize, u: &Configuration) -> (usize, u8) {
        let step = self.schedule[c];
        let v = if step.activate { self.rules[c].eval(u) } else { INACTIVE };
        (step.line, v)
    }

    fn backward_delta(&self, c: usize, u: &Configuration) -> (usize, u8) {
        let prev = (c + self.m() - 1) % self.m();
        let step = self.schedule[prev];
        let v = if step.activate { INACTIVE } else { self.rules[prev].eval(u) };
        (step.line, v)
    }

    fn apply(u: &Configuration, (l, v): (usize, u8)) -> Configuration {
        let mut out = u.clone();
        out.lines[l] = v;
        out
    }

    pub fn step_forward(&self, u: &Configuration) -> Result<Configuration> {
        if !self.membership(u) {
            return Err(Error::Contract("step_forward on a non-member".into()));
        }
        let c = self.counter_of(u)?;
        Ok(Self::apply(u, self.forward_delta(c, u)))
    }

    pub fn step_backward(&self, u: &Configuration) -> Result<Configuration> {
        if !self.membership(u) {
            return Err(Error::Contract("step_backward on a non-member".into()));
        }
        if *u == self.u0 {
            return Ok(u.clone());
        }
        let c = self.counter_of(u)?;
        Ok(Self::apply(u, self.backward_delta(c, u)))
    }

    /// Total successor map: self-loops outside the member set.
    pub fn successor(&self, u: &Configuration) -> Configuration {
        self.step_forward(u).unwrap_or_else(|_| u.clone())
    }

    pub fn predecessor(&self, u: &Configuration) -> Configuration {
        self.step_backward(u).unwrap_or_else(|_| u.clone())
    }

    /// Whether `u` is a member violating the end-of-line or boundary conditions.
    pub fn is_solution(&self, u: &Configuration) -> bool {
        if !self.membership(u) {
            return false;
        }
        let s = self.successor(u);
        if !self.membership(&s) || self.predecessor(&s) != *u {
            return true;
        }
        if *u == self.u0 {
            return false;
        }
        let p = self.predecessor(u);
        !self.membership(&p) || self.successor(&p) != *u
    }

    fn forward_violation(&self, u: &Configuration) -> bool {
        let s = self.successor(u);
        !self.membership(&s) || self.predecessor(&s) != *u
    }

    /// Decodes a local solution into a solution of the source instance.
    pub fn map_back(&self, u: &Configuration) -> Result<EolSolution> {
        if !self.is_solution(u) {
            return Err(Error::Contract("configuration is not a solution".into()));
        }
        let x = if self.forward_violation(u) && self.vertex(u, Copy::S2).is_none() {
            self.vertex(u, Copy::S1)
        } else {
            self.vertex(u, Copy::S2)
        }
        .ok_or_else(|| Error::Decode("no fully active vertex copy".into()))?;
        self.source
            .check_solution(&x)?
            .ok_or_else(|| Error::Contract("decoded vertex is not a source solution".into()))
    }

    /// Walks forward from `start` until a solution; returns it and the step count.
    pub fn walk_to_solution(&self, start: &Configuration, limit: usize) -> Result<(Configuration, usize)> {
        let mut u = start.clone();
        for steps in 0..limit {
            if self.is_solution(&u) {
                return Ok((u, steps));
            }
            u = self.step_forward(&u)?;
        }
        Err(Error::Budget(format!("no solution within {limit} steps")))
    }

    fn natural_critical(&self, c: usize) -> BTreeSet<usize> {
        let mut set = BTreeSet::new();
        let prev = (c + self.m() - 1) % self.m();
        for (idx, read) in [(c, self.schedule[c].activate), (prev, !self.schedule[prev].activate)] {
            let l = self.schedule[idx].line;
            set.insert(2 * l);
            set.insert(2 * l + 1);
            if read {
                let r = self.rules[idx];
                for &s in &r.srcs[..r.arity()] {
                    set.insert(2 * s + 1);
                }
            }
        }
        set
    }

    /// Bit positions that change or are read by the steps around counter `c`,
    /// padded with the lowest unused positions to `q_critical` entries.
    pub fn critical_bits(&self, c: usize) -> Result<Vec<usize>> {
        if c >= self.m() {
            return Err(Error::Decode(format!("counter {c} out of range")));
        }
        let mut set = self.natural_critical(c);
        let mut pad = 0;
        while set.len() < self.q_critical {
            set.insert(pad);
            pad += 1;
        }
        Ok(set.into_iter().collect())
    }

    /// Probes single value-bit toggles of active lines on sampled members.
    pub fn locality_audit(&self, states: &[Configuration], samples: usize, seed: u64) -> LocalityReport {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let picked: Vec<&Configuration> = if states.len() <= samples {
            states.iter().collect()
        } else {
            let mut idx = sample(&mut rng, states.len(), samples).into_vec();
            idx.sort_unstable();
            idx.into_iter().map(|i| &states[i]).collect()
        };
        let mut report = LocalityReport {
            min_hamming_change: usize::MAX,
            declared_dependency: DEPENDENCY_BOUND,
            declared_change: CHANGE_BOUND,
            ..Default::default()
        };
        for u in picked.into_iter().filter(|u| **u != self.u0) {
            let Ok(c) = self.counter_of(u) else { continue };
            report.sampled_states += 1;
            for delta in [Self::forward_delta, Self::backward_delta] {
                let (tl, tv) = delta(self, c, u);
                let change = (u.lines[tl] ^ tv).count_ones() as usize;
                report.max_hamming_change = report.max_hamming_change.max(change);
                report.min_hamming_change = report.min_hamming_change.min(change);
                // Untouched bits copy themselves, so only the target line can
                // depend on more than one input bit.
                let mut deps = [0usize; 2];
                for l in (0..u.line_count()).filter(|&l| u.is_active(l)) {
                    let mut v = u.clone();
                    v.toggle_bit(2 * l + 1);
                    let (_, tv2) = delta(self, c, &v);
                    for (j, mask) in [0b10u8, 0b01].into_iter().enumerate() {
                        if (tv ^ tv2) & mask != 0 {
                            deps[j] += 1;
                        }
                    }
                }
                let identity = 1;
                report.max_dependency = report.max_dependency.max(identity).max(deps[0]).max(deps[1]);
            }
        }
        if report.min_hamming_change == usize::MAX {
            report.min_hamming_change = 0;
        }
        report
    }

    pub fn record(&self, u: &Configuration) -> ConfigurationRecord {
        ConfigurationRecord { m: self.m(), schedule_index: self.counter_of(u).ok(), bits: u.to_hex() }
    }

    pub fn from_record(&self, r: &ConfigurationRecord) -> Result<Configuration> {
        check_width(self.m(), r.m)?;
        Configuration::from_hex(&r.bits, self.line_count())
    }

    /// Active lines of a copy, for inspection.
    pub fn copy_values(&self, u: &Configuration, k: Copy) -> Vec<Option<bool>> {
        let (s, len) = self.copy_range(k);
        (s..s + len).map(|l| u.line(l)).collect()
    }

    pub fn copies() -> [Copy; 4] {
        COPIES
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eol::{generate_path_instance, path_vertices, to_bits};

    #[test]
    fn sizing_and_start() {
        let src = generate_path_instance(2, 0).unwrap();
        let inst = LocalEolInstance::reduce(&src);
        assert_eq!(inst.m(), 4 * (src.s().wire_count() + src.p().wire_count()));
        assert_eq!(inst.schedule().len(), inst.m());
        assert!(inst.membership(inst.u0()));
        assert_eq!(inst.counter_of(inst.u0()).unwrap(), 0);
        assert_eq!(inst.step_backward(inst.u0()).unwrap(), *inst.u0());
        assert_ne!(inst.step_forward(inst.u0()).unwrap(), *inst.u0());
    }

    #[test]
    fn flipping_any_active_line_of_u0_leaves_the_member_set() {
        let inst = LocalEolInstance::reduce(&generate_path_instance(3, 1).unwrap());
        for l in 0..inst.line_count() {
            if inst.u0().is_active(l) {
                let mut u = inst.u0().clone();
                u.toggle_bit(2 * l + 1);
                assert!(!inst.membership(&u), "line {l}");
            }
        }
    }

    #[test]
    fn walk_reaches_path_end() {
        for seed in 0..4 {
            let src = generate_path_instance(2, seed).unwrap();
            let inst = LocalEolInstance::reduce(&src);
            let (end, steps) = inst.walk_to_solution(inst.u0(), 1 << 20).unwrap();
            let path = path_vertices(2, seed);
            assert!(steps >= inst.m() * (path.len() - 2));
            let sol = inst.map_back(&end).unwrap();
            assert_eq!(sol_vertex(&sol), *path.last().unwrap());
            assert_eq!(src.enumerate_solutions().unwrap(), vec![sol]);
        }
    }

    fn sol_vertex(s: &EolSolution) -> u64 {
        crate::eol::from_bits(&s.x)
    }

    #[test]
    fn rest_state_decodes_vertex() {
        let src = generate_path_instance(3, 2).unwrap();
        let inst = LocalEolInstance::reduce(&src);
        let x = to_bits(path_vertices(3, 2)[0], 3);
        assert_eq!(inst.rest_configuration(&x), *inst.u0());
        assert_eq!(inst.vertex(inst.u0(), Copy::S1), Some(x));
    }

    #[test]
    fn hex_round_trip() {
        let inst = LocalEolInstance::reduce(&generate_path_instance(2, 3).unwrap());
        let u = inst.step_forward(inst.u0()).unwrap();
        let rec = inst.record(&u);
        assert_eq!(rec.schedule_index, Some(1));
        assert_eq!(inst.from_record(&rec).unwrap(), u);
        assert_eq!(Configuration::from_bits(&u.bits()).unwrap(), u);
    }

    #[test]
    fn non_solution_cannot_be_mapped_back() {
        let inst = LocalEolInstance::reduce(&generate_path_instance(3, 4).unwrap());
        let u = inst.step_forward(inst.u0()).unwrap();
        assert!(matches!(inst.map_back(&u), Err(Error::Contract(_))));
        let mut bad = inst.u0().clone();
        bad.toggle_bit(1);
        assert!(matches!(inst.step_forward(&bad), Err(Error::Contract(_))));
    }
}
