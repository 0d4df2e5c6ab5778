//! Boolean circuits and the END-OF-A-LINE search problem.
//!
//! A circuit is a topologically ordered gate list. Wire `i < input_count` is
//! input `i`; wire `input_count + g` is the output of gate `g`. Bit strings are
//! `Vec<bool>` with bit `j` of an integer vertex at index `j`.

use crate::error::{check_width, Error, Result};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Largest width for which brute-force enumeration is allowed by default.
pub const EXHAUSTIVE_BUDGET: usize = 20;

/// Longest path drawn by [`generate_path_instance`].
pub const MAX_PATH_LEN: u64 = 64;

pub type Bits = Vec<bool>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum GateKind {
    And,
    Or,
    Not,
    Copy,
    Const0,
    Const1,
}

impl GateKind {
    pub fn arity(self) -> usize {
        match self {
            GateKind::And | GateKind::Or => 2,
            GateKind::Not | GateKind::Copy => 1,
            GateKind::Const0 | GateKind::Const1 => 0,
        }
    }

    /// Applies the gate to already evaluated input values.
    pub fn apply(self, a: bool, b: bool) -> bool {
        match self {
            GateKind::And => a && b,
            GateKind::Or => a || b,
            GateKind::Not => !a,
            GateKind::Copy => a,
            GateKind::Const0 => false,
            GateKind::Const1 => true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gate {
    pub kind: GateKind,
    pub inputs: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawCircuit")]
pub struct BooleanCircuit {
    #[serde(rename = "n")]
    input_count: usize,
    gates: Vec<Gate>,
    outputs: Vec<usize>,
}

#[derive(Deserialize)]
struct RawCircuit {
    n: usize,
    gates: Vec<Gate>,
    outputs: Vec<usize>,
}

impl TryFrom<RawCircuit> for BooleanCircuit {
    type Error = Error;
    fn try_from(r: RawCircuit) -> Result<Self> {
        BooleanCircuit::new(r.n, r.gates, r.outputs)
    }
}

impl BooleanCircuit {
    /// Validates arities and topological order.
    pub fn new(input_count: usize, gates: Vec<Gate>, outputs: Vec<usize>) -> Result<Self> {
        for (g, gate) in gates.iter().enumerate() {
            if gate.inputs.len() != gate.kind.arity() {
                return Err(Error::Instance(format!(
                    "gate {g} ({:?}) has {} inputs",
                    gate.kind,
                    gate.inputs.len()
                )));
            }
            if let Some(&w) = gate.inputs.iter().find(|&&w| w >= input_count + g) {
                return Err(Error::Instance(format!("gate {g} reads later wire {w}")));
            }
        }
        let wires = input_count + gates.len();
        if let Some(&w) = outputs.iter().find(|&&w| w >= wires) {
            return Err(Error::Instance(format!("output refers to missing wire {w}")));
        }
        Ok(Self { input_count, gates, outputs })
    }

    pub fn input_count(&self) -> usize {
        self.input_count
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn outputs(&self) -> &[usize] {
        &self.outputs
    }

    pub fn wire_count(&self) -> usize {
        self.input_count + self.gates.len()
    }

    /// Values of every wire, inputs first.
    pub fn eval_wires(&self, input: &[bool]) -> Result<Bits> {
        check_width(self.input_count, input.len())?;
        let mut w = Vec::with_capacity(self.wire_count());
        w.extend_from_slice(input);
        for gate in &self.gates {
            let a = gate.inputs.first().map_or(false, |&i| w[i]);
            let b = gate.inputs.get(1).map_or(false, |&i| w[i]);
            w.push(gate.kind.apply(a, b));
        }
        Ok(w)
    }

    pub fn eval(&self, input: &[bool]) -> Result<Bits> {
        let w = self.eval_wires(input)?;
        Ok(self.outputs.iter().map(|&o| w[o]).collect())
    }

    /// Number of reads of each wire, counting output references.
    pub fn fanout(&self) -> Vec<usize> {
        let mut uses = vec![0; self.wire_count()];
        for gate in &self.gates {
            for &i in &gate.inputs {
                uses[i] += 1;
            }
        }
        for &o in &self.outputs {
            uses[o] += 1;
        }
        uses
    }

    pub fn is_normalized(&self) -> bool {
        let mut seen = std::collections::HashSet::new();
        self.outputs.iter().all(|&o| o >= self.input_count && seen.insert(o))
            && self.fanout().iter().all(|&u| u <= 2)
    }

    /// Equivalent circuit whose outputs are distinct gate lines and whose
    /// wires are read at most twice, using COPY trees.
    pub fn normalize(&self) -> BooleanCircuit {
        let mut b = Builder::new(self.input_count);
        let mut uses = vec![0usize; self.wire_count()];
        for gate in &self.gates {
            for &i in &gate.inputs {
                uses[i] += 1;
            }
        }
        for &o in &self.outputs {
            uses[o] += 1;
        }
        let mut taps: Vec<Vec<usize>> = Vec::with_capacity(self.wire_count());
        for i in 0..self.input_count {
            taps.push(b.copy_tree(i, uses[i]));
        }
        for (g, gate) in self.gates.iter().enumerate() {
            let ins: Vec<usize> = gate
                .inputs
                .iter()
                .map(|&i| taps[i].pop().expect("tap count matches use count"))
                .collect();
            let w = b.push(gate.kind, &ins);
            taps.push(b.copy_tree(w, uses[self.input_count + g]));
        }
        let outputs: Vec<usize> = self
            .outputs
            .iter()
            .map(|&o| {
                let t = taps[o].pop().expect("tap count matches use count");
                b.push(GateKind::Copy, &[t])
            })
            .collect();
        b.finish(outputs)
    }
}

/// Incremental circuit construction with structural helpers.
#[derive(Clone, Debug)]
pub struct Builder {
    input_count: usize,
    gates: Vec<Gate>,
}

impl Builder {
    pub fn new(input_count: usize) -> Self {
        Self { input_count, gates: Vec::new() }
    }

    pub fn push(&mut self, kind: GateKind, inputs: &[usize]) -> usize {
        self.gates.push(Gate { kind, inputs: inputs.to_vec() });
        self.input_count + self.gates.len() - 1
    }

    pub fn and(&mut self, a: usize, b: usize) -> usize {
        self.push(GateKind::And, &[a, b])
    }

    pub fn or(&mut self, a: usize, b: usize) -> usize {
        self.push(GateKind::Or, &[a, b])
    }

    pub fn not(&mut self, a: usize) -> usize {
        self.push(GateKind::Not, &[a])
    }

    pub fn xor(&mut self, a: usize, b: usize) -> usize {
        let o = self.or(a, b);
        let n = self.and(a, b);
        let nn = self.not(n);
        self.and(o, nn)
    }

    /// Returns `count` wires carrying `w`, each read at most twice in total.
    fn copy_tree(&mut self, w: usize, count: usize) -> Vec<usize> {
        if count <= 2 {
            return vec![w; count];
        }
        let left = self.push(GateKind::Copy, &[w]);
        let right = self.push(GateKind::Copy, &[w]);
        let mut taps = self.copy_tree(left, count.div_ceil(2));
        taps.extend(self.copy_tree(right, count / 2));
        taps
    }

    pub fn finish(self, outputs: Vec<usize>) -> BooleanCircuit {
        BooleanCircuit::new(self.input_count, self.gates, outputs)
            .expect("builder emits gates in topological order")
    }
}

pub fn to_bits(v: u64, n: usize) -> Bits {
    (0..n).map(|j| (v >> j) & 1 == 1).collect()
}

pub fn from_bits(x: &[bool]) -> u64 {
    x.iter().enumerate().fold(0, |acc, (j, &b)| acc | ((b as u64) << j))
}

/// Circuit computing the identity on `n` bits except on the listed points.
pub fn circuit_from_map(n: usize, changes: &BTreeMap<u64, u64>) -> BooleanCircuit {
    let mut b = Builder::new(n);
    let negs: Vec<usize> = (0..n).map(|j| b.not(j)).collect();
    let mut flips: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (&x, &y) in changes {
        let diff = x ^ y;
        if diff == 0 {
            continue;
        }
        let lit = |j: usize| if (x >> j) & 1 == 1 { j } else { negs[j] };
        let mut eq = lit(0);
        for j in 1..n {
            eq = b.and(eq, lit(j));
        }
        for (j, f) in flips.iter_mut().enumerate() {
            if (diff >> j) & 1 == 1 {
                f.push(eq);
            }
        }
    }
    let outputs = (0..n)
        .map(|j| {
            let mut it = flips[j].iter();
            match it.next() {
                None => b.push(GateKind::Copy, &[j]),
                Some(&first) => {
                    let any = it.fold(first, |acc, &e| b.or(acc, e));
                    b.xor(j, any)
                }
            }
        })
        .collect();
    b.finish(outputs).normalize()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawInstance")]
pub struct EolInstance {
    n: usize,
    #[serde(rename = "S")]
    s: BooleanCircuit,
    #[serde(rename = "P")]
    p: BooleanCircuit,
}

#[derive(Deserialize)]
struct RawInstance {
    n: usize,
    #[serde(rename = "S")]
    s: BooleanCircuit,
    #[serde(rename = "P")]
    p: BooleanCircuit,
}

impl TryFrom<RawInstance> for EolInstance {
    type Error = Error;
    fn try_from(r: RawInstance) -> Result<Self> {
        EolInstance::new(r.n, r.s, r.p)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SolutionKind {
    BrokenSuccessor,
    BrokenPredecessor,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EolSolution {
    pub x: Bits,
    pub kind: SolutionKind,
}

impl EolInstance {
    pub fn new(n: usize, s: BooleanCircuit, p: BooleanCircuit) -> Result<Self> {
        for (name, c) in [("S", &s), ("P", &p)] {
            if c.input_count() != n || c.outputs().len() != n {
                return Err(Error::Instance(format!("{name} must map {n} bits to {n} bits")));
            }
        }
        let zero = vec![false; n];
        if p.eval(&zero)? != zero {
            return Err(Error::Instance("P(0) must be 0".into()));
        }
        if s.eval(&zero)? == zero {
            return Err(Error::Instance("S(0) must differ from 0".into()));
        }
        Ok(Self { n, s, p })
    }

    /// Instance whose S and P are the identity except on the given points.
    pub fn from_maps(n: usize, succ: &BTreeMap<u64, u64>, pred: &BTreeMap<u64, u64>) -> Result<Self> {
        Self::new(n, circuit_from_map(n, succ), circuit_from_map(n, pred))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn s(&self) -> &BooleanCircuit {
        &self.s
    }

    pub fn p(&self) -> &BooleanCircuit {
        &self.p
    }

    pub fn succ(&self, x: &[bool]) -> Result<Bits> {
        self.s.eval(x)
    }

    pub fn pred(&self, x: &[bool]) -> Result<Bits> {
        self.p.eval(x)
    }

    /// Whether `u -> v` is an edge of the line graph.
    pub fn has_edge(&self, u: &[bool], v: &[bool]) -> Result<bool> {
        Ok(u != v && self.succ(u)? == v && self.pred(v)? == u)
    }

    pub fn check_solution(&self, x: &[bool]) -> Result<Option<EolSolution>> {
        check_width(self.n, x.len())?;
        if self.pred(&self.succ(x)?)? != x {
            return Ok(Some(EolSolution { x: x.to_vec(), kind: SolutionKind::BrokenSuccessor }));
        }
        if x.iter().any(|&b| b) && self.succ(&self.pred(x)?)? != x {
            return Ok(Some(EolSolution { x: x.to_vec(), kind: SolutionKind::BrokenPredecessor }));
        }
        Ok(None)
    }

    pub fn enumerate_solutions(&self) -> Result<Vec<EolSolution>> {
        self.enumerate_solutions_within(EXHAUSTIVE_BUDGET)
    }

    pub fn enumerate_solutions_within(&self, budget: usize) -> Result<Vec<EolSolution>> {
        if self.n > budget {
            return Err(Error::Budget(format!("n = {} exceeds enumeration budget {budget}", self.n)));
        }
        let mut out = Vec::new();
        for v in 0..1u64 << self.n {
            if let Some(sol) = self.check_solution(&to_bits(v, self.n))? {
                out.push(sol);
            }
        }
        Ok(out)
    }
}

/// Vertices of a seeded path `0 -> v1 -> ... -> vL`, ending at `vL`.
pub fn path_vertices(n: usize, seed: u64) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max_len = ((1u64 << n.min(63)) - 1).min(MAX_PATH_LEN);
    let len = rng.gen_range(1..=max_len) as usize;
    let mut pool: Vec<u64> = if n <= 16 {
        (1..1u64 << n).collect()
    } else {
        let mut seen = std::collections::BTreeSet::new();
        while seen.len() < len {
            seen.insert(rng.gen_range(1..1u64 << n.min(63)));
        }
        seen.into_iter().collect()
    };
    pool.shuffle(&mut rng);
    pool.truncate(len);
    let mut path = vec![0];
    path.extend(pool);
    path
}

/// Seeded single-path instance over `n` bits starting at `0^n`.
pub fn generate_path_instance(n: usize, seed: u64) -> Result<EolInstance> {
    if n == 0 || n > 63 {
        return Err(Error::Argument(format!("n = {n} must lie in 1..=63")));
    }
    let path = path_vertices(n, seed);
    let mut succ = BTreeMap::new();
    let mut pred = BTreeMap::new();
    for w in path.windows(2) {
        succ.insert(w[0], w[1]);
        pred.insert(w[1], w[0]);
    }
    EolInstance::from_maps(n, &succ, &pred)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gate(kind: GateKind, inputs: &[usize]) -> Gate {
        Gate { kind, inputs: inputs.to_vec() }
    }

    #[test]
    fn copy_identity_and_not() {
        let id = BooleanCircuit::new(
            3,
            vec![gate(GateKind::Copy, &[0]), gate(GateKind::Copy, &[1]), gate(GateKind::Copy, &[2])],
            vec![3, 4, 5],
        )
        .unwrap();
        assert_eq!(id.eval(&[true, false, true]).unwrap(), vec![true, false, true]);
        let not = BooleanCircuit::new(1, vec![gate(GateKind::Not, &[0])], vec![1]).unwrap();
        assert_eq!(not.eval(&[false]).unwrap(), vec![true]);
        assert!(matches!(not.eval(&[true, true]), Err(Error::Width { .. })));
    }

    #[test]
    fn nand_truth_table() {
        let c = BooleanCircuit::new(
            2,
            vec![gate(GateKind::And, &[0, 1]), gate(GateKind::Not, &[2])],
            vec![3],
        )
        .unwrap();
        let table = [(false, false, true), (false, true, true), (true, false, true), (true, true, false)];
        for (a, b, want) in table {
            assert_eq!(c.eval(&[a, b]).unwrap(), vec![want]);
        }
    }

    #[test]
    fn rejects_forward_reference() {
        assert!(BooleanCircuit::new(1, vec![gate(GateKind::Not, &[1])], vec![1]).is_err());
        assert!(BooleanCircuit::new(1, vec![gate(GateKind::And, &[0])], vec![1]).is_err());
    }

    fn four_path() -> EolInstance {
        // 00 -> 01 -> 10 -> 11, bit 0 is the low bit.
        let succ = BTreeMap::from([(0, 1), (1, 2), (2, 3)]);
        let pred = BTreeMap::from([(1, 0), (2, 1), (3, 2)]);
        EolInstance::from_maps(2, &succ, &pred).unwrap()
    }

    #[test]
    fn four_vertex_path_solutions() {
        let inst = four_path();
        assert_eq!(inst.succ(&to_bits(3, 2)).unwrap(), to_bits(3, 2));
        assert_eq!(inst.pred(&to_bits(3, 2)).unwrap(), to_bits(2, 2));
        let end = inst.check_solution(&to_bits(3, 2)).unwrap().unwrap();
        assert_eq!(end.kind, SolutionKind::BrokenSuccessor);
        assert_eq!(inst.check_solution(&to_bits(1, 2)).unwrap(), None);
        assert_eq!(inst.check_solution(&to_bits(0, 2)).unwrap(), None);
        assert_eq!(inst.enumerate_solutions().unwrap(), vec![end]);
    }

    #[test]
    fn zero_is_excluded_on_predecessor_side() {
        // S(0) = 1 -> 1 is a sink; S(P(0)) = S(0) = 1 differs from 0 but 0 is exempt.
        let inst =
            EolInstance::from_maps(1, &BTreeMap::from([(0, 1)]), &BTreeMap::from([(1, 0)])).unwrap();
        assert_eq!(inst.check_solution(&[false]).unwrap(), None);
        assert_eq!(
            inst.enumerate_solutions().unwrap(),
            vec![EolSolution { x: vec![true], kind: SolutionKind::BrokenSuccessor }]
        );
    }

    #[test]
    fn cycle_plus_path_has_only_path_end() {
        // Path 0 -> 1 -> 2, cycle 3 -> 5 -> 6 -> 3, vertices 4 and 7 isolated.
        let succ = BTreeMap::from([(0, 1), (1, 2), (3, 5), (5, 6), (6, 3)]);
        let pred = BTreeMap::from([(1, 0), (2, 1), (5, 3), (6, 5), (3, 6)]);
        let inst = EolInstance::from_maps(3, &succ, &pred).unwrap();
        let sols = inst.enumerate_solutions().unwrap();
        assert_eq!(sols.len(), 1);
        assert_eq!(from_bits(&sols[0].x), 2);
    }

    #[test]
    fn validates_instance_invariants() {
        let id = circuit_from_map(2, &BTreeMap::new());
        assert!(EolInstance::new(2, id.clone(), id.clone()).is_err());
        let s = circuit_from_map(2, &BTreeMap::from([(0, 1)]));
        let bad_p = circuit_from_map(2, &BTreeMap::from([(0, 2)]));
        assert!(EolInstance::new(2, s, bad_p).is_err());
    }

    #[test]
    fn generator_is_deterministic_and_single_ended() {
        let a = generate_path_instance(2, 0).unwrap();
        assert_eq!(a, generate_path_instance(2, 0).unwrap());
        assert_eq!(a.enumerate_solutions().unwrap().len(), 1);
        for seed in 0..5 {
            let one = generate_path_instance(1, seed).unwrap();
            assert_eq!(one.succ(&[false]).unwrap(), vec![true]);
        }
    }

    #[test]
    fn json_round_trip() {
        let inst = generate_path_instance(3, 7).unwrap();
        let text = serde_json::to_string(&inst).unwrap();
        let back: EolInstance = serde_json::from_str(&text).unwrap();
        assert_eq!(back, inst);
        assert_eq!(serde_json::to_string(&back).unwrap(), text);
        assert!(text.starts_with("{\"n\":3,\"S\":{\"n\":3,\"gates\":[{\"kind\":"));
    }
}
