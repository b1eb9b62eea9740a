//! Catenary models `1 <-> 2 <-> ... <-> n`: closed-form coefficients built
//! from outflow sums and corrections indexed by sets of non-adjacent pairs.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::ioeq::{CoeffLabel, CoefficientMap, Side};
use crate::model::{relabel_parameter, CompartmentalModel, ParameterId, Shape};
use crate::polynomial::{elementary_symmetric, Polynomial, Var};

fn require_catenary(model: &CompartmentalModel) -> Result<usize> {
    if model.shape().shape == Shape::Catenary {
        Ok(model.n())
    } else {
        Err(Error::NotCatenary)
    }
}

/// Nonempty subsets of `{1, ..., n-1}` without two consecutive integers,
/// ordered by size and then lexicographically.
pub fn gamma_sets(n: usize) -> Vec<Vec<usize>> {
    fn extend(next: usize, top: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        for i in next..=top {
            cur.push(i);
            out.push(cur.clone());
            extend(i + 2, top, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if n >= 2 {
        extend(1, n - 1, &mut Vec::new(), &mut out);
    }
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    out
}

/// Sum of the parameters on edges and leaks leaving compartment `l`.
pub fn out_sum(model: &CompartmentalModel, l: usize) -> Result<Polynomial> {
    let n = require_catenary(model)?;
    if !(1..=n).contains(&l) {
        return Err(Error::PreconditionViolated(format!("compartment {l} outside 1..={n}")));
    }
    let mut acc = Polynomial::zero();
    if l > 1 {
        acc += &ParameterId::edge(l, l - 1).poly();
    }
    if l < n {
        acc += &ParameterId::edge(l, l + 1).poly();
    }
    if model.leaks().contains(&l) {
        acc += &ParameterId::Leak(l).poly();
    }
    Ok(acc)
}

/// `kappa_I`: the product of both edge labels of every pair `i <-> i+1`, `i ∈ I`.
pub fn kappa_set(set: &[usize]) -> Polynomial {
    set.iter()
        .map(|&i| &ParameterId::edge(i + 1, i).poly() * &ParameterId::edge(i, i + 1).poly())
        .product()
}

/// `I+ = I ∪ {i + 1 : i ∈ I}`.
pub fn i_plus(set: &[usize]) -> BTreeSet<usize> {
    set.iter().flat_map(|&i| [i, i + 1]).collect()
}

/// Product of edge labels along the path from `from` to `to` (`from <= to`).
pub fn path_product(from: usize, to: usize) -> Polynomial {
    (from..to).map(|q| ParameterId::edge(q, q + 1).poly()).product()
}

fn outflows_except(model: &CompartmentalModel, removed: &BTreeSet<usize>) -> Vec<Polynomial> {
    (1..=model.n())
        .filter(|l| !removed.contains(l))
        .map(|l| out_sum(model, l).expect("compartment in range"))
        .collect()
}

fn e(k: i64, items: &[Polynomial]) -> Polynomial {
    elementary_symmetric(k, items).expect("index is at least -1")
}

/// Inclusion-exclusion sign: subgraphs with several bidirected pairs are
/// otherwise removed once per pair.
fn signed(set: &[usize], p: Polynomial) -> Polynomial {
    if set.len() % 2 == 1 {
        p
    } else {
        -p
    }
}

/// Closed-form coefficients of a one-input one-output catenary with input at
/// or before the output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CatenaryCoefficients {
    pub n: usize,
    pub input: usize,
    pub output: usize,
    /// `a_1, ..., a_n`.
    pub lhs: Vec<Polynomial>,
    /// `ã_d, ..., ã_n` with `d = out - in`.
    pub rhs: Vec<Polynomial>,
}

impl CatenaryCoefficients {
    pub fn d(&self) -> usize {
        self.output - self.input
    }

    /// All `2n - d + 1` entries, left-hand side first.
    pub fn raw(&self) -> Vec<Polynomial> {
        self.lhs.iter().chain(&self.rhs).cloned().collect()
    }

    /// Labeled non-constant entries. `a_i` multiplies `y^(n-i)` and `ã_i`
    /// multiplies `u^(n-i-1)`; `ã_n` has no slot and is always zero.
    pub fn coefficient_map(&self) -> CoefficientMap {
        let mut cm = CoefficientMap::new();
        for (k, a) in self.lhs.iter().enumerate() {
            cm.push(CoeffLabel::lhs(self.output, self.n - (k + 1)), a.clone());
        }
        for (k, a) in self.rhs.iter().enumerate() {
            let i = self.d() + k;
            if i < self.n {
                cm.push(CoeffLabel::rhs(self.output, self.input, self.n - i - 1), a.clone());
            }
        }
        cm
    }
}

pub fn catenary_coefficients(model: &CompartmentalModel) -> Result<CatenaryCoefficients> {
    let n = require_catenary(model)?;
    if model.inputs().len() != 1 || model.outputs().len() != 1 {
        return Err(Error::PreconditionViolated("need exactly one input and one output".into()));
    }
    let input = *model.inputs().first().expect("one input");
    let output = *model.outputs().first().expect("one output");
    if input > output {
        return Err(Error::PreconditionViolated(
            "input must not come after the output; reflect the model first".into(),
        ));
    }
    let gamma = gamma_sets(n);
    let all = outflows_except(model, &BTreeSet::new());
    let lhs = (1..=n)
        .map(|i| {
            let mut a = e(i as i64, &all);
            for set in gamma.iter().filter(|s| 2 * s.len() <= i) {
                let rest = outflows_except(model, &i_plus(set));
                a -= &signed(set, &kappa_set(set) * &e((i - 2 * set.len()) as i64, &rest));
            }
            a
        })
        .collect();
    let d = output - input;
    let path: BTreeSet<usize> = (input..=output).collect();
    let off_path = outflows_except(model, &path);
    let kappa = path_product(input, output);
    let rhs = (d..=n)
        .map(|i| {
            let mut inner = e((i - d) as i64, &off_path);
            for set in gamma.iter().filter(|s| i_plus(s).is_disjoint(&path)) {
                let Some(k) = (i - d).checked_sub(2 * set.len()) else { continue };
                let removed: BTreeSet<usize> = i_plus(set).union(&path).copied().collect();
                let rest = outflows_except(model, &removed);
                inner -= &signed(set, &kappa_set(set) * &e(k as i64, &rest));
            }
            &kappa * &inner
        })
        .collect();
    Ok(CatenaryCoefficients { n, input, output, lhs, rhs })
}

/// The closed-form coefficient map; requires input at or before the output.
pub fn catenary_coefficient_map(model: &CompartmentalModel) -> Result<CoefficientMap> {
    Ok(catenary_coefficients(model)?.coefficient_map())
}

/// The mirror image `i -> n + 1 - i`.
pub fn reflect(model: &CompartmentalModel) -> CompartmentalModel {
    let n = model.n();
    model.relabel(|i| n + 1 - i)
}

/// Renames parameters of a polynomial by the mirror `i -> n + 1 - i`.
pub fn reflect_polynomial(p: &Polynomial, n: usize) -> Polynomial {
    p.map_vars(|v| match v {
        Var::Param(q) => Var::Param(relabel_parameter(q, |i| n + 1 - i)),
        other => other,
    })
}

/// Closed-form map for any one-input one-output catenary, reflecting first
/// when the input comes after the output and mapping the result back.
pub fn catenary_coefficient_map_any(model: &CompartmentalModel) -> Result<CoefficientMap> {
    let n = require_catenary(model)?;
    let (Some(&input), Some(&output)) = (model.inputs().first(), model.outputs().first()) else {
        unreachable!("models have inputs and outputs");
    };
    if input <= output || model.inputs().len() != 1 || model.outputs().len() != 1 {
        return catenary_coefficient_map(model);
    }
    let mirrored = catenary_coefficient_map(&reflect(model))?;
    let mut cm = CoefficientMap::new();
    for (label, p) in mirrored.entries() {
        let side = match label.side {
            Side::Lhs => Side::Lhs,
            Side::Rhs { .. } => Side::Rhs { input },
        };
        cm.push(CoeffLabel { output, side, order: label.order }, reflect_polynomial(p, n));
    }
    Ok(cm)
}
