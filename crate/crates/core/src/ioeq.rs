//! Input-output equations `det(sI - A) y_i = sum_j (-1)^(i+j) det((sI - A)^{j,i}) u_j`
//! and the coefficient map built from them.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::model::CompartmentalModel;
use crate::polynomial::{Polynomial, Var};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IoEquation {
    pub output: usize,
    /// Coefficients of `y^(n)`, ..., `y^(0)`; the first is 1.
    pub lhs: Vec<Polynomial>,
    /// For each input `j`, coefficients of `u_j^(n-1)`, ..., `u_j^(0)` with sign included.
    pub rhs: BTreeMap<usize, Vec<Polynomial>>,
}

/// Coefficients of `p` in `s`, from degree `top` down to 0.
fn descending_in_s(p: &Polynomial, top: usize) -> Vec<Polynomial> {
    let mut by_degree = p.coefficients_in(Var::S);
    assert!(by_degree.len() <= top + 1, "degree in s exceeds {top}");
    by_degree.resize(top + 1, Polynomial::zero());
    by_degree.reverse();
    by_degree
}

/// The input-output equation at output `i`.
pub fn io_equation(model: &CompartmentalModel, i: usize) -> Result<IoEquation> {
    let charpoly = model.characteristic_matrix().determinant();
    io_equation_with_charpoly(model, i, &charpoly)
}

fn io_equation_with_charpoly(
    model: &CompartmentalModel,
    i: usize,
    charpoly: &Polynomial,
) -> Result<IoEquation> {
    if !model.outputs().contains(&i) {
        return Err(Error::NotAnOutput(i));
    }
    let n = model.n();
    let m = model.characteristic_matrix();
    let lhs = descending_in_s(charpoly, n);
    let rhs = model
        .inputs()
        .iter()
        .map(|&j| {
            let minor = m.minor(j - 1, i - 1).determinant();
            let signed = if (i + j).is_multiple_of(2) { minor } else { -minor };
            (j, descending_in_s(&signed, n - 1))
        })
        .collect();
    Ok(IoEquation { output: i, lhs, rhs })
}

/// Input-output equations for every output, in ascending output order.
pub fn io_equations(model: &CompartmentalModel) -> Vec<IoEquation> {
    let charpoly = model.characteristic_matrix().determinant();
    model
        .outputs()
        .iter()
        .map(|&i| io_equation_with_charpoly(model, i, &charpoly).expect("i is an output"))
        .collect()
}

fn derivative(symbol: &str, order: usize) -> String {
    if order == 0 {
        symbol.to_string()
    } else {
        format!("{symbol}^({order})")
    }
}

fn render_side(terms: impl Iterator<Item = (String, Polynomial)>) -> String {
    let parts: Vec<String> = terms
        .filter(|(_, c)| !c.is_zero())
        .map(|(sym, c)| {
            if c == Polynomial::one() {
                sym
            } else if c.num_terms() == 1 {
                format!("{c}·{sym}")
            } else {
                format!("({c})·{sym}")
            }
        })
        .collect();
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join(" + ")
    }
}

impl fmt::Display for IoEquation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.lhs.len() - 1;
        let y = format!("y{}", self.output);
        let lhs = render_side(
            self.lhs.iter().enumerate().map(|(t, c)| (derivative(&y, n - t), c.clone())),
        );
        let rhs = render_side(self.rhs.iter().flat_map(|(j, coeffs)| {
            let u = format!("u{j}");
            coeffs
                .iter()
                .enumerate()
                .map(move |(t, c)| (derivative(&u, n - 1 - t), c.clone()))
                .collect::<Vec<_>>()
        }));
        write!(f, "{lhs} = {rhs}")
    }
}

impl Serialize for Polynomial {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl Serialize for IoEquation {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("IoEquation", 3)?;
        st.serialize_field("output", &self.output)?;
        st.serialize_field("lhs", &self.lhs)?;
        let rhs: BTreeMap<String, &Vec<Polynomial>> =
            self.rhs.iter().map(|(j, v)| (j.to_string(), v)).collect();
        st.serialize_field("rhs", &rhs)?;
        st.end()
    }
}

/// Where a coefficient sits in the input-output equations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    Lhs,
    Rhs { input: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CoeffLabel {
    pub output: usize,
    pub side: Side,
    /// Derivative order of the `y` or `u` term it multiplies.
    pub order: usize,
}

impl CoeffLabel {
    pub fn lhs(output: usize, order: usize) -> Self {
        CoeffLabel { output, side: Side::Lhs, order }
    }

    pub fn rhs(output: usize, input: usize, order: usize) -> Self {
        CoeffLabel { output, side: Side::Rhs { input }, order }
    }
}

impl fmt::Display for CoeffLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.side {
            Side::Lhs => write!(f, "y{}^({})", self.output, self.order),
            Side::Rhs { input } => write!(f, "u{}^({})->y{}", input, self.order, self.output),
        }
    }
}

impl Serialize for CoeffLabel {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Ordered non-constant coefficients of the input-output equations.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CoefficientMap {
    entries: Vec<(CoeffLabel, Polynomial)>,
}

impl CoefficientMap {
    pub fn new() -> Self {
        CoefficientMap::default()
    }

    /// Appends `p` unless it is constant or already present.
    pub fn push(&mut self, label: CoeffLabel, p: Polynomial) -> bool {
        if p.is_constant() || self.entries.iter().any(|(_, q)| *q == p) {
            return false;
        }
        self.entries.push((label, p));
        true
    }

    pub fn from_equations(eqs: &[IoEquation]) -> Self {
        let mut cm = CoefficientMap::new();
        for eq in eqs {
            let n = eq.lhs.len() - 1;
            for (t, c) in eq.lhs.iter().enumerate() {
                cm.push(CoeffLabel::lhs(eq.output, n - t), c.clone());
            }
            for (&j, coeffs) in &eq.rhs {
                for (t, c) in coeffs.iter().enumerate() {
                    cm.push(CoeffLabel::rhs(eq.output, j, n - 1 - t), c.clone());
                }
            }
        }
        cm
    }

    pub fn entries(&self) -> &[(CoeffLabel, Polynomial)] {
        &self.entries
    }

    pub fn polys(&self) -> impl Iterator<Item = &Polynomial> {
        self.entries.iter().map(|(_, p)| p)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, label: &CoeffLabel) -> Option<&Polynomial> {
        self.entries.iter().find(|(l, _)| l == label).map(|(_, p)| p)
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        self.polys().flat_map(Polynomial::vars).collect()
    }

    /// Equal as multisets of polynomials, ignoring labels and order.
    pub fn same_polynomials(&self, other: &CoefficientMap) -> bool {
        let key = |cm: &CoefficientMap| {
            let mut v: Vec<String> = cm.polys().map(ToString::to_string).collect();
            v.sort();
            v
        };
        key(self) == key(other)
    }

    /// Label-matched differences: `(label, ours, theirs)` where they disagree.
    pub fn diff(&self, other: &CoefficientMap) -> Vec<(CoeffLabel, Option<Polynomial>, Option<Polynomial>)> {
        let labels: BTreeSet<CoeffLabel> =
            self.entries.iter().chain(&other.entries).map(|(l, _)| *l).collect();
        labels
            .into_iter()
            .filter_map(|l| {
                let (a, b) = (self.get(&l).cloned(), other.get(&l).cloned());
                (a != b).then_some((l, a, b))
            })
            .collect()
    }
}

impl Serialize for CoefficientMap {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Entry<'a> {
            label: &'a CoeffLabel,
            poly: &'a Polynomial,
        }
        s.collect_seq(self.entries.iter().map(|(label, poly)| Entry { label, poly }))
    }
}

/// The coefficient map of a model via symbolic determinants.
pub fn coefficient_map(model: &CompartmentalModel) -> CoefficientMap {
    CoefficientMap::from_equations(&io_equations(model))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Polynomial {
        s.parse().unwrap()
    }

    fn three_cycle() -> CompartmentalModel {
        CompartmentalModel::cycle(3, [1], [2], [1, 3]).unwrap()
    }

    #[test]
    fn running_example_equation() {
        let eq = io_equation(&three_cycle(), 2).unwrap();
        assert_eq!(eq.lhs[0], Polynomial::one());
        assert_eq!(eq.lhs[1], p("k01 + k03 + k13 + k21 + k32"));
        assert_eq!(eq.lhs[3], p("k01*k03*k32 + k01*k13*k32 + k03*k21*k32"));
        assert_eq!(eq.rhs[&1], vec![p("0"), p("k21"), p("(k03 + k13)*k21")]);
    }

    #[test]
    fn leak_free_cycle_at_first_compartment() {
        let m = CompartmentalModel::cycle(3, [1], [1], []).unwrap();
        let eq = io_equation(&m, 1).unwrap();
        assert!(eq.lhs[3].is_zero());
        assert_eq!(eq.rhs[&1], vec![p("1"), p("k32 + k13"), p("k32*k13")]);
    }

    #[test]
    fn single_compartment() {
        let m = CompartmentalModel::new(1, [], [1], [1], [1]).unwrap();
        let eq = io_equation(&m, 1).unwrap();
        assert_eq!(eq.lhs, vec![p("1"), p("k01")]);
        assert_eq!(eq.rhs[&1], vec![p("1")]);
        let cm = coefficient_map(&m);
        assert_eq!(cm.len(), 1);
        assert_eq!(cm.entries()[0].1, p("k01"));
    }

    #[test]
    fn not_an_output() {
        assert_eq!(io_equation(&three_cycle(), 1), Err(Error::NotAnOutput(1)));
    }

    #[test]
    fn running_example_map_order() {
        let cm = coefficient_map(&three_cycle());
        let got: Vec<_> = cm.polys().cloned().collect();
        assert_eq!(
            got,
            vec![
                p("k01 + k03 + k13 + k21 + k32"),
                p("k01*k03 + k01*k13 + k01*k32 + k03*k21 + k03*k32 + k13*k21 + k13*k32 + k21*k32"),
                p("k01*k03*k32 + k01*k13*k32 + k03*k21*k32"),
                p("k21"),
                p("k03*k21 + k13*k21"),
            ]
        );
    }

    #[test]
    fn rendering() {
        let eq = io_equation(&three_cycle(), 2).unwrap();
        let text = eq.to_string();
        assert!(text.starts_with("y2^(3) + (k21 + k32 + k13 + k01 + k03)·y2^(2)"), "{text}");
        assert!(text.ends_with("= k21·u1^(1) + (k21*k13 + k21*k03)·u1"), "{text}");
    }
}
