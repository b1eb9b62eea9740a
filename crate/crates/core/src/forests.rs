//! Input-output coefficients as sums over spanning incoming forests of the
//! leak-extended graph. Independent of the determinant route in `ioeq`.

use crate::error::{Error, Result};
use crate::model::{CompartmentalModel, ParameterId};
use crate::polynomial::Polynomial;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LabeledEdge {
    pub from: usize,
    /// Target vertex; 0 is the environment.
    pub to: usize,
    pub label: ParameterId,
}

/// The model graph plus an environment vertex 0 receiving one edge per leak.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeakExtendedGraph {
    n: usize,
    /// Outgoing edges per vertex `0..=n`, each list sorted.
    out_edges: Vec<Vec<LabeledEdge>>,
}

impl LeakExtendedGraph {
    pub fn new(model: &CompartmentalModel) -> Self {
        let n = model.n();
        let mut out_edges = vec![Vec::new(); n + 1];
        for &(from, to) in model.edges() {
            out_edges[from].push(LabeledEdge { from, to, label: ParameterId::Edge { from, to } });
        }
        for &l in model.leaks() {
            out_edges[l].push(LabeledEdge { from: l, to: 0, label: ParameterId::Leak(l) });
        }
        for list in &mut out_edges {
            list.sort();
        }
        LeakExtendedGraph { n, out_edges }
    }

    /// The variant with every outgoing edge of `vertex` (leak included) removed.
    pub fn without_outgoing(&self, vertex: usize) -> Self {
        let mut g = self.clone();
        g.out_edges[vertex].clear();
        g
    }

    pub fn vertex_count(&self) -> usize {
        self.n + 1
    }

    pub fn edges(&self) -> impl Iterator<Item = &LabeledEdge> {
        self.out_edges.iter().flatten()
    }
}

pub type Forest = Vec<LabeledEdge>;

/// Union-find with undo, for acyclicity checks during backtracking.
struct Dsu {
    parent: Vec<usize>,
    size: Vec<usize>,
    history: Vec<Option<(usize, usize)>>,
}

impl Dsu {
    fn new(n: usize) -> Self {
        Dsu { parent: (0..n).collect(), size: vec![1; n], history: Vec::new() }
    }

    fn find(&self, mut x: usize) -> usize {
        while self.parent[x] != x {
            x = self.parent[x];
        }
        x
    }

    /// Joins the components of `a` and `b`; false if already joined (a cycle).
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        self.history.push(Some((ra, rb)));
        true
    }

    fn undo(&mut self) {
        if let Some(Some((ra, rb))) = self.history.pop() {
            self.parent[rb] = rb;
            self.size[ra] -= self.size[rb];
        }
    }
}

/// Calls `visit` on every `m`-edge spanning incoming forest of `g`, in
/// lexicographic order of per-vertex edge choices. With `pair = Some((j, i))`
/// only forests joining `j` and `i` in one undirected component are visited.
pub fn visit_incoming_forests(
    g: &LeakExtendedGraph,
    m: usize,
    pair: Option<(usize, usize)>,
    mut visit: impl FnMut(&[LabeledEdge]),
) {
    let vertices = g.vertex_count();
    if m >= vertices {
        return;
    }
    let mut dsu = Dsu::new(vertices);
    let mut chosen = Vec::with_capacity(m);
    search(g, 0, m, pair, &mut dsu, &mut chosen, &mut visit);
}

fn search(
    g: &LeakExtendedGraph,
    v: usize,
    m: usize,
    pair: Option<(usize, usize)>,
    dsu: &mut Dsu,
    chosen: &mut Vec<LabeledEdge>,
    visit: &mut impl FnMut(&[LabeledEdge]),
) {
    if chosen.len() == m {
        if pair.is_none_or(|(j, i)| dsu.find(j) == dsu.find(i)) {
            visit(chosen);
        }
        return;
    }
    if v == g.vertex_count() || g.vertex_count() - v < m - chosen.len() {
        return;
    }
    search(g, v + 1, m, pair, dsu, chosen, visit);
    for &e in &g.out_edges[v] {
        if dsu.union(e.from, e.to) {
            chosen.push(e);
            search(g, v + 1, m, pair, dsu, chosen, visit);
            chosen.pop();
            dsu.undo();
        }
    }
}

/// All `m`-edge spanning incoming forests, collected.
pub fn enumerate_incoming_forests(
    g: &LeakExtendedGraph,
    m: usize,
    pair: Option<(usize, usize)>,
) -> Vec<Forest> {
    let mut out = Vec::new();
    visit_incoming_forests(g, m, pair, |f| out.push(f.to_vec()));
    out
}

/// Sum of label products over the `m`-edge forests.
pub fn forest_polynomial(g: &LeakExtendedGraph, m: usize, pair: Option<(usize, usize)>) -> Polynomial {
    let mut acc = Polynomial::zero();
    visit_incoming_forests(g, m, pair, |f| {
        acc += &f.iter().map(|e| e.label.poly()).product::<Polynomial>();
    });
    acc
}

/// Coefficient lists for output `i` and input `j`, laid out like `IoEquation`:
/// `lhs[t]` multiplies `y_i^(n-t)` and `rhs[t]` multiplies `u_j^(n-1-t)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ForestCoefficients {
    pub lhs: Vec<Polynomial>,
    pub rhs: Vec<Polynomial>,
}

pub fn coeff_via_forests(model: &CompartmentalModel, i: usize, j: usize) -> Result<ForestCoefficients> {
    if !model.outputs().contains(&i) {
        return Err(Error::NotAnOutput(i));
    }
    if !model.inputs().contains(&j) {
        return Err(Error::NotAnInput(j));
    }
    let n = model.n();
    let g = LeakExtendedGraph::new(model);
    let star = g.without_outgoing(i);
    let lhs = (0..=n).map(|t| forest_polynomial(&g, t, None)).collect();
    let rhs = (0..n).map(|t| forest_polynomial(&star, t, Some((j, i)))).collect();
    Ok(ForestCoefficients { lhs, rhs })
}

/// The coefficient map assembled from forest sums, ordered like `ioeq::coefficient_map`.
pub fn coefficient_map_via_forests(model: &CompartmentalModel) -> crate::ioeq::CoefficientMap {
    use crate::ioeq::{CoeffLabel, CoefficientMap};
    let n = model.n();
    let mut cm = CoefficientMap::new();
    for &i in model.outputs() {
        let mut lhs_done = false;
        for &j in model.inputs() {
            let fc = coeff_via_forests(model, i, j).expect("i is an output and j an input");
            if !lhs_done {
                for (t, c) in fc.lhs.into_iter().enumerate() {
                    cm.push(CoeffLabel::lhs(i, n - t), c);
                }
                lhs_done = true;
            }
            for (t, c) in fc.rhs.into_iter().enumerate() {
                cm.push(CoeffLabel::rhs(i, j, n - 1 - t), c);
            }
        }
    }
    cm
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_forest_is_unique() {
        let m = CompartmentalModel::cycle(4, [1], [2], [1, 3]).unwrap();
        let g = LeakExtendedGraph::new(&m);
        assert_eq!(enumerate_incoming_forests(&g, 0, None), vec![Vec::<LabeledEdge>::new()]);
        assert!(enumerate_incoming_forests(&g, 5, None).is_empty());
    }

    #[test]
    fn running_example_three_edge_forests() {
        let m = CompartmentalModel::cycle(3, [1], [2], [1, 3]).unwrap();
        let g = LeakExtendedGraph::new(&m);
        assert_eq!(enumerate_incoming_forests(&g, 3, None).len(), 3);
    }

    #[test]
    fn bidirected_pair_is_not_a_forest() {
        let m = CompartmentalModel::catenary(2, [1], [1], []).unwrap();
        let g = LeakExtendedGraph::new(&m);
        assert_eq!(enumerate_incoming_forests(&g, 2, None).len(), 0);
        assert_eq!(enumerate_incoming_forests(&g, 1, None).len(), 2);
    }

    #[test]
    fn output_edges_removed_in_star_variant() {
        let m = CompartmentalModel::cycle(3, [1], [2], [2]).unwrap();
        let star = LeakExtendedGraph::new(&m).without_outgoing(2);
        assert!(star.edges().all(|e| e.from != 2));
        assert_eq!(star.edges().count(), 2);
    }

    #[test]
    fn input_and_output_errors() {
        let m = CompartmentalModel::cycle(3, [1], [2], []).unwrap();
        assert_eq!(coeff_via_forests(&m, 1, 1), Err(Error::NotAnOutput(1)));
        assert_eq!(coeff_via_forests(&m, 2, 2), Err(Error::NotAnInput(2)));
    }
}
