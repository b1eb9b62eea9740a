//! Linear compartmental models: graph, inputs, outputs, leaks.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::polynomial::{Polynomial, Var};
use crate::matrix::SymbolicMatrix;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("malformed model spec: {0}")]
    MalformedSpec(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
}

/// A rate parameter. `Edge { from: j, to: i }` is the rate `k_ij` of the edge
/// `j -> i`; `Leak(l)` is the leak rate `k_0l`.
///
/// The derived order (edges by source then target, then leaks) is the
/// canonical column order used everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ParameterId {
    Edge { from: usize, to: usize },
    Leak(usize),
}

impl ParameterId {
    pub fn edge(from: usize, to: usize) -> Self {
        ParameterId::Edge { from, to }
    }

    pub fn var(self) -> Var {
        Var::Param(self)
    }

    pub fn poly(self) -> Polynomial {
        Polynomial::var(Var::Param(self))
    }

    /// `(target, source)` with target 0 for leaks, i.e. the subscript pair of `k`.
    pub fn subscripts(self) -> (usize, usize) {
        match self {
            ParameterId::Edge { from, to } => (to, from),
            ParameterId::Leak(l) => (0, l),
        }
    }

    fn from_subscripts(target: usize, source: usize) -> Option<Self> {
        if source == 0 {
            return None;
        }
        if target == 0 {
            Some(ParameterId::Leak(source))
        } else {
            Some(ParameterId::Edge { from: source, to: target })
        }
    }
}

impl fmt::Display for ParameterId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (a, b) = self.subscripts();
        if a < 10 && b < 10 {
            write!(f, "k{a}{b}")
        } else {
            write!(f, "k{a}_{b}")
        }
    }
}

impl FromStr for ParameterId {
    type Err = ModelError;

    /// Accepts `k21`, `k01`, and the long form `k10_2`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ModelError::MalformedSpec(format!("not a parameter name: {s:?}"));
        let rest = s.strip_prefix('k').ok_or_else(bad)?;
        let (a, b) = if let Some((a, b)) = rest.split_once('_') {
            (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?)
        } else {
            let bytes = rest.as_bytes();
            if bytes.len() != 2 || !bytes.iter().all(u8::is_ascii_digit) {
                return Err(bad());
            }
            ((bytes[0] - b'0') as usize, (bytes[1] - b'0') as usize)
        };
        ParameterId::from_subscripts(a, b).ok_or_else(bad)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    DirectedCycle,
    Catenary,
    BidirectedTree,
    Other,
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Shape::DirectedCycle => "directed_cycle",
            Shape::Catenary => "catenary",
            Shape::BidirectedTree => "bidirected_tree",
            Shape::Other => "other",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ShapeInfo {
    pub shape: Shape,
    pub strongly_connected: bool,
}

/// Wire format of a model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub n: usize,
    pub edges: Vec<[usize; 2]>,
    #[serde(rename = "in")]
    pub inputs: Vec<usize>,
    #[serde(rename = "out")]
    pub outputs: Vec<usize>,
    #[serde(rename = "leak")]
    pub leaks: Vec<usize>,
}

/// A validated model. Compartments are `1..=n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CompartmentalModel {
    n: usize,
    edges: BTreeSet<(usize, usize)>,
    inputs: BTreeSet<usize>,
    outputs: BTreeSet<usize>,
    leaks: BTreeSet<usize>,
}

impl CompartmentalModel {
    /// Builds a model; `edges` are `(from, to)` pairs.
    pub fn new(
        n: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
        inputs: impl IntoIterator<Item = usize>,
        outputs: impl IntoIterator<Item = usize>,
        leaks: impl IntoIterator<Item = usize>,
    ) -> Result<Self, ModelError> {
        let invalid = |m: String| Err(ModelError::InvalidModel(m));
        if n == 0 {
            return invalid("model needs at least one compartment".into());
        }
        let in_range = |v: usize| (1..=n).contains(&v);
        let edges: BTreeSet<_> = edges.into_iter().collect();
        for &(a, b) in &edges {
            if !in_range(a) || !in_range(b) {
                return invalid(format!("edge {a}->{b} leaves compartments 1..={n}"));
            }
            if a == b {
                return invalid(format!("self-loop at compartment {a}"));
            }
        }
        let inputs: BTreeSet<_> = inputs.into_iter().collect();
        let outputs: BTreeSet<_> = outputs.into_iter().collect();
        let leaks: BTreeSet<_> = leaks.into_iter().collect();
        for (name, set) in [("input", &inputs), ("output", &outputs), ("leak", &leaks)] {
            if let Some(v) = set.iter().find(|&&v| !in_range(v)) {
                return invalid(format!("{name} compartment {v} outside 1..={n}"));
            }
        }
        if inputs.is_empty() {
            return invalid("model needs at least one input".into());
        }
        if outputs.is_empty() {
            return invalid("model needs at least one output".into());
        }
        Ok(CompartmentalModel { n, edges, inputs, outputs, leaks })
    }

    pub fn from_spec(spec: &ModelSpec) -> Result<Self, ModelError> {
        CompartmentalModel::new(
            spec.n,
            spec.edges.iter().map(|e| (e[0], e[1])),
            spec.inputs.iter().copied(),
            spec.outputs.iter().copied(),
            spec.leaks.iter().copied(),
        )
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let spec: ModelSpec =
            serde_json::from_str(text).map_err(|e| ModelError::MalformedSpec(e.to_string()))?;
        Self::from_spec(&spec)
    }

    pub fn to_spec(&self) -> ModelSpec {
        ModelSpec {
            n: self.n,
            edges: self.edges.iter().map(|&(a, b)| [a, b]).collect(),
            inputs: self.inputs.iter().copied().collect(),
            outputs: self.outputs.iter().copied().collect(),
            leaks: self.leaks.iter().copied().collect(),
        }
    }

    /// Canonical JSON: sorted edges and sets, fixed key order.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_spec()).expect("model spec serializes")
    }

    /// The directed cycle `1 -> 2 -> ... -> n -> 1`.
    pub fn cycle(
        n: usize,
        inputs: impl IntoIterator<Item = usize>,
        outputs: impl IntoIterator<Item = usize>,
        leaks: impl IntoIterator<Item = usize>,
    ) -> Result<Self, ModelError> {
        if n < 3 {
            return Err(ModelError::InvalidModel("a directed cycle needs n >= 3".into()));
        }
        Self::new(n, (1..=n).map(|i| (i, i % n + 1)), inputs, outputs, leaks)
    }

    /// The bidirected path `1 <-> 2 <-> ... <-> n`.
    pub fn catenary(
        n: usize,
        inputs: impl IntoIterator<Item = usize>,
        outputs: impl IntoIterator<Item = usize>,
        leaks: impl IntoIterator<Item = usize>,
    ) -> Result<Self, ModelError> {
        let edges = (1..n).flat_map(|i| [(i, i + 1), (i + 1, i)]);
        Self::new(n, edges, inputs, outputs, leaks)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &BTreeSet<(usize, usize)> {
        &self.edges
    }

    pub fn inputs(&self) -> &BTreeSet<usize> {
        &self.inputs
    }

    pub fn outputs(&self) -> &BTreeSet<usize> {
        &self.outputs
    }

    pub fn leaks(&self) -> &BTreeSet<usize> {
        &self.leaks
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.edges.contains(&(from, to))
    }

    /// All parameters in canonical order: edges by (source, target), then leaks.
    pub fn parameters(&self) -> Vec<ParameterId> {
        let mut params: Vec<_> =
            self.edges.iter().map(|&(from, to)| ParameterId::Edge { from, to }).collect();
        params.extend(self.leaks.iter().map(|&l| ParameterId::Leak(l)));
        params
    }

    pub fn parameter_count(&self) -> usize {
        self.edges.len() + self.leaks.len()
    }

    pub fn with_io(
        &self,
        inputs: impl IntoIterator<Item = usize>,
        outputs: impl IntoIterator<Item = usize>,
    ) -> Result<Self, ModelError> {
        Self::new(self.n, self.edges.iter().copied(), inputs, outputs, self.leaks.iter().copied())
    }

    pub fn is_strongly_connected(&self) -> bool {
        let reach = |forward: bool| {
            let mut seen = vec![false; self.n + 1];
            let mut queue = VecDeque::from([1usize]);
            seen[1] = true;
            while let Some(v) = queue.pop_front() {
                for &(a, b) in &self.edges {
                    let (src, dst) = if forward { (a, b) } else { (b, a) };
                    if src == v && !seen[dst] {
                        seen[dst] = true;
                        queue.push_back(dst);
                    }
                }
            }
            seen[1..].iter().all(|&s| s)
        };
        reach(true) && reach(false)
    }

    fn is_bidirected(&self) -> bool {
        self.edges.iter().all(|&(a, b)| self.edges.contains(&(b, a)))
    }

    fn is_cycle(&self) -> bool {
        self.n >= 3
            && self.edges.len() == self.n
            && (1..=self.n).all(|i| self.edges.contains(&(i, i % self.n + 1)))
    }

    fn is_catenary(&self) -> bool {
        self.edges.len() == 2 * (self.n - 1)
            && (1..self.n).all(|i| self.has_edge(i, i + 1) && self.has_edge(i + 1, i))
    }

    fn is_bidirected_tree(&self) -> bool {
        self.is_bidirected() && self.edges.len() == 2 * (self.n - 1) && self.is_strongly_connected()
    }

    pub fn shape(&self) -> ShapeInfo {
        let shape = if self.is_cycle() {
            Shape::DirectedCycle
        } else if self.is_catenary() {
            Shape::Catenary
        } else if self.is_bidirected_tree() {
            Shape::BidirectedTree
        } else {
            Shape::Other
        };
        ShapeInfo { shape, strongly_connected: self.is_strongly_connected() }
    }

    /// Undirected hop distance between two compartments, if connected.
    pub fn distance(&self, a: usize, b: usize) -> Option<usize> {
        let mut dist = vec![usize::MAX; self.n + 1];
        dist[a] = 0;
        let mut queue = VecDeque::from([a]);
        while let Some(v) = queue.pop_front() {
            for &(x, y) in &self.edges {
                let w = if x == v {
                    y
                } else if y == v {
                    x
                } else {
                    continue;
                };
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
            }
        }
        (dist[b] != usize::MAX).then_some(dist[b])
    }

    /// Entry `a_ij` of the compartmental matrix `A`.
    pub fn matrix_entry(&self, i: usize, j: usize) -> Polynomial {
        if i == j {
            let mut d = Polynomial::zero();
            if self.leaks.contains(&i) {
                d -= &ParameterId::Leak(i).poly();
            }
            for &(from, to) in &self.edges {
                if from == i {
                    d -= &ParameterId::Edge { from, to }.poly();
                }
            }
            d
        } else if self.has_edge(j, i) {
            ParameterId::Edge { from: j, to: i }.poly()
        } else {
            Polynomial::zero()
        }
    }

    /// The compartmental matrix `A` (row/column 0 corresponds to compartment 1).
    pub fn compartmental_matrix(&self) -> SymbolicMatrix {
        SymbolicMatrix::from_fn(self.n, self.n, |r, c| self.matrix_entry(r + 1, c + 1))
    }

    /// `sI - A` with `s` the differential-operator symbol.
    pub fn characteristic_matrix(&self) -> SymbolicMatrix {
        SymbolicMatrix::from_fn(self.n, self.n, |r, c| {
            let a = self.matrix_entry(r + 1, c + 1);
            if r == c {
                Polynomial::var(Var::S) - a
            } else {
                -a
            }
        })
    }

    /// Renames compartments by `perm` (a bijection on `1..=n`).
    pub fn relabel(&self, perm: impl Fn(usize) -> usize) -> Self {
        let map = |s: &BTreeSet<usize>| s.iter().map(|&v| perm(v)).collect::<Vec<_>>();
        Self::new(
            self.n,
            self.edges.iter().map(|&(a, b)| (perm(a), perm(b))),
            map(&self.inputs),
            map(&self.outputs),
            map(&self.leaks),
        )
        .expect("relabeling by a permutation preserves validity")
    }
}

/// Renames the compartment indices inside a parameter.
pub fn relabel_parameter(p: ParameterId, perm: impl Fn(usize) -> usize) -> ParameterId {
    match p {
        ParameterId::Edge { from, to } => ParameterId::Edge { from: perm(from), to: perm(to) },
        ParameterId::Leak(l) => ParameterId::Leak(perm(l)),
    }
}

/// Cyclic successor on `1..=n`.
pub fn succ(i: usize, n: usize) -> usize {
    i % n + 1
}

/// Cyclic predecessor on `1..=n`.
pub fn pred(i: usize, n: usize) -> usize {
    if i == 1 {
        n
    } else {
        i - 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip_is_canonical() {
        let m = CompartmentalModel::from_json(
            r#"{"n":3,"edges":[[3,1],[1,2],[2,3]],"in":[1],"out":[1],"leak":[3,1]}"#,
        )
        .unwrap();
        assert_eq!(
            m.to_json(),
            r#"{"n":3,"edges":[[1,2],[2,3],[3,1]],"in":[1],"out":[1],"leak":[1,3]}"#
        );
        assert_eq!(CompartmentalModel::from_json(&m.to_json()).unwrap(), m);
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(matches!(
            CompartmentalModel::from_json(r#"{"n":3,"edges":[],"in":[1],"out":[1],"leak":[],"x":1}"#),
            Err(ModelError::MalformedSpec(_))
        ));
        assert!(matches!(
            CompartmentalModel::from_json("not json"),
            Err(ModelError::MalformedSpec(_))
        ));
        for bad in [
            r#"{"n":3,"edges":[[1,4]],"in":[1],"out":[1],"leak":[]}"#,
            r#"{"n":3,"edges":[[2,2]],"in":[1],"out":[1],"leak":[]}"#,
            r#"{"n":3,"edges":[],"in":[],"out":[1],"leak":[]}"#,
            r#"{"n":3,"edges":[],"in":[1],"out":[],"leak":[]}"#,
            r#"{"n":3,"edges":[],"in":[1],"out":[1],"leak":[0]}"#,
            r#"{"n":0,"edges":[],"in":[1],"out":[1],"leak":[]}"#,
        ] {
            assert!(matches!(CompartmentalModel::from_json(bad), Err(ModelError::InvalidModel(_))), "{bad}");
        }
    }

    #[test]
    fn parameter_names() {
        assert_eq!(ParameterId::edge(1, 2).to_string(), "k21");
        assert_eq!(ParameterId::Leak(3).to_string(), "k03");
        assert_eq!(ParameterId::edge(12, 3).to_string(), "k3_12");
        for name in ["k21", "k01", "k3_12", "k0_11"] {
            assert_eq!(name.parse::<ParameterId>().unwrap().to_string(), name);
        }
        assert!("k00".parse::<ParameterId>().is_err());
        assert!("x21".parse::<ParameterId>().is_err());
    }

    #[test]
    fn canonical_parameter_order() {
        let m = CompartmentalModel::cycle(3, [1], [1], [1, 3]).unwrap();
        let names: Vec<_> = m.parameters().iter().map(ToString::to_string).collect();
        assert_eq!(names, ["k21", "k32", "k13", "k01", "k03"]);
    }

    #[test]
    fn shapes() {
        let c = CompartmentalModel::cycle(4, [1], [2], []).unwrap();
        assert_eq!(c.shape(), ShapeInfo { shape: Shape::DirectedCycle, strongly_connected: true });
        let p = CompartmentalModel::catenary(4, [1], [2], []).unwrap();
        assert_eq!(p.shape().shape, Shape::Catenary);
        let star = CompartmentalModel::new(4, [(1, 2), (2, 1), (1, 3), (3, 1), (1, 4), (4, 1)], [1], [1], [])
            .unwrap();
        assert_eq!(star.shape().shape, Shape::BidirectedTree);
        let chain = CompartmentalModel::new(3, [(1, 2), (2, 3)], [1], [1], []).unwrap();
        assert_eq!(chain.shape(), ShapeInfo { shape: Shape::Other, strongly_connected: false });
    }

    #[test]
    fn matrix_rows_follow_sign_pattern() {
        let m = CompartmentalModel::cycle(3, [1], [1], [1]).unwrap();
        assert_eq!(m.matrix_entry(1, 1).to_string(), "-k21 - k01");
        assert_eq!(m.matrix_entry(2, 1).to_string(), "k21");
        assert_eq!(m.matrix_entry(1, 2).to_string(), "0");
    }
}
