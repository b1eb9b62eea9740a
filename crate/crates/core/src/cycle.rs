//! Directed-cycle models `1 -> 2 -> ... -> n -> 1`: the exceptional and
//! leak-interlacing predicates, the combinatorial verdict, closed-form
//! coefficients and minimal leak-interlacing submodels.

use std::collections::BTreeSet;
use std::fmt;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::ident::Verdict;
use crate::ioeq::{CoeffLabel, CoefficientMap};
use crate::matrix::SymbolicMatrix;
use crate::model::{pred, succ, CompartmentalModel, ParameterId, Shape};
use crate::polynomial::{elementary_symmetric, Polynomial};

fn require_cycle(model: &CompartmentalModel) -> Result<usize> {
    if model.shape().shape == Shape::DirectedCycle {
        Ok(model.n())
    } else {
        Err(Error::NotACycle)
    }
}

/// The cycle edge leaving `q`, i.e. `k_{q+1,q}` with `k_{n+1,n} = k_{1n}`.
pub fn cycle_edge(q: usize, n: usize) -> ParameterId {
    ParameterId::Edge { from: q, to: succ(q, n) }
}

/// `k_{q+1,q}`, plus `k_{0q}` when `q` leaks: the total outflow of `q`.
pub fn outflow(model: &CompartmentalModel, q: usize) -> Polynomial {
    let e = cycle_edge(q, model.n()).poly();
    if model.leaks().contains(&q) {
        &e + &ParameterId::Leak(q).poly()
    } else {
        e
    }
}

/// Compartments strictly after `from` and strictly before `to`, walking forward.
fn open_range(from: usize, to: usize, n: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut q = succ(from, n);
    while q != to {
        out.push(q);
        q = succ(q, n);
    }
    out
}

/// Forward distance from `i` to `j` along the cycle.
pub fn cyclic_distance(i: usize, j: usize, n: usize) -> usize {
    (j + n - i) % n
}

/// The set `E` of all compartment outflows.
pub fn outflow_set(model: &CompartmentalModel) -> Vec<Polynomial> {
    (1..=model.n()).map(|q| outflow(model, q)).collect()
}

/// Outflows of the compartments after the output and before the input.
pub fn post_output_set(model: &CompartmentalModel, input: usize, output: usize) -> Vec<Polynomial> {
    open_range(output, input, model.n()).into_iter().map(|q| outflow(model, q)).collect()
}

/// Returns the input/output pair `(i, i-1)` if the model is exceptional.
pub fn is_exceptional(model: &CompartmentalModel) -> Result<Option<(usize, usize)>> {
    let n = require_cycle(model)?;
    if model.inputs().len() != 1 || model.outputs().len() != 1 || model.leaks().len() != 2 {
        return Ok(None);
    }
    let i = *model.inputs().first().expect("one input");
    let o = *model.outputs().first().expect("one output");
    Ok((o == pred(i, n) && model.leaks().contains(&o)).then_some((i, o)))
}

/// True if the model is an exceptional model with at least one extra input or output.
pub fn is_in_exceptional_family(model: &CompartmentalModel) -> Result<bool> {
    let n = require_cycle(model)?;
    if model.leaks().len() != 2 || model.inputs().len() + model.outputs().len() < 3 {
        return Ok(false);
    }
    Ok(model
        .inputs()
        .iter()
        .any(|&i| model.outputs().contains(&pred(i, n)) && model.leaks().contains(&pred(i, n))))
}

/// The stretch of compartments `l_a + 1, ..., l_b` between consecutive leaks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeakArc {
    pub start_leak: usize,
    pub end_leak: usize,
    pub members: Vec<usize>,
}

/// Arcs between cyclically consecutive leaks, in increasing order of the
/// starting leak. Empty with fewer than two leaks.
pub fn leak_arcs(model: &CompartmentalModel) -> Vec<LeakArc> {
    let n = model.n();
    let leaks: Vec<usize> = model.leaks().iter().copied().collect();
    if leaks.len() < 2 {
        return Vec::new();
    }
    (0..leaks.len())
        .map(|a| {
            let (start, end) = (leaks[a], leaks[(a + 1) % leaks.len()]);
            let mut members = open_range(start, end, n);
            members.push(end);
            LeakArc { start_leak: start, end_leak: end, members }
        })
        .collect()
}

/// Leak-interlacing test. The second component is the first arc, as a leak
/// pair, containing neither an input nor an output.
pub fn is_leak_interlacing(model: &CompartmentalModel) -> Result<(bool, Option<(usize, usize)>)> {
    if is_exceptional(model)?.is_some() {
        return Ok((false, None));
    }
    let marked = |q: &usize| model.inputs().contains(q) || model.outputs().contains(q);
    let failing = leak_arcs(model)
        .into_iter()
        .find(|arc| !arc.members.iter().any(marked))
        .map(|arc| (arc.start_leak, arc.end_leak));
    Ok((failing.is_none(), failing))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Witness {
    /// Consecutive leaks whose arc carries no input or output.
    LeakArc(usize, usize),
    /// Input `i` and output `i - 1` of an exceptional model.
    ExceptionalPair { input: usize, output: usize },
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::LeakArc(a, b) => write!(f, "leak arc ({a},{b})"),
            Witness::ExceptionalPair { input, output } => {
                write!(f, "exceptional input {input} / output {output}")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CycleClassification {
    pub is_exceptional: bool,
    pub is_leak_interlacing: bool,
    pub verdict: Verdict,
    pub witness: Option<Witness>,
}

impl Serialize for CycleClassification {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("CycleClassification", 5)?;
        st.serialize_field("exceptional", &self.is_exceptional)?;
        st.serialize_field("leak_interlacing", &self.is_leak_interlacing)?;
        st.serialize_field("verdict", &self.verdict)?;
        let (pair, kind) = match self.witness {
            Some(Witness::LeakArc(a, b)) => (Some([a, b]), Some("leak_arc")),
            Some(Witness::ExceptionalPair { input, output }) => {
                (Some([input, output]), Some("exceptional_io"))
            }
            None => (None, None),
        };
        st.serialize_field("witness", &pair)?;
        st.serialize_field("witness_kind", &kind)?;
        st.end()
    }
}

/// Combinatorial verdict: identifiable exactly when leak-interlacing.
pub fn classify_cycle(model: &CompartmentalModel) -> Result<CycleClassification> {
    let exceptional = is_exceptional(model)?;
    let (interlacing, failing) = is_leak_interlacing(model)?;
    let witness = match (exceptional, failing) {
        (Some((input, output)), _) => Some(Witness::ExceptionalPair { input, output }),
        (None, Some((a, b))) => Some(Witness::LeakArc(a, b)),
        (None, None) => None,
    };
    Ok(CycleClassification {
        is_exceptional: exceptional.is_some(),
        is_leak_interlacing: interlacing,
        verdict: Verdict::from_bool(interlacing),
        witness,
    })
}

/// `kappa(i, j) = k_{i+1,i} k_{i+2,i+1} ... k_{j,j-1}` along the cycle; 1 when `i = j`.
pub fn kappa_path(model: &CompartmentalModel, i: usize, j: usize) -> Result<Polynomial> {
    let n = require_cycle(model)?;
    let mut acc = Polynomial::one();
    let mut q = i;
    while q != j {
        acc = &acc * &cycle_edge(q, n).poly();
        q = succ(q, n);
    }
    Ok(acc)
}

/// `e1*(i, j)`: the sum of outflows of compartments `j+1, ..., i-1`.
pub fn e_star_one(model: &CompartmentalModel, i: usize, j: usize) -> Result<Polynomial> {
    let n = require_cycle(model)?;
    if j == pred(i, n) {
        return Err(Error::UndefinedForAdjacentPair(i, j));
    }
    Ok(post_output_set(model, i, j).into_iter().sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CoefficientType {
    /// `e_1, ..., e_{n-1}` of the outflow set.
    I,
    /// `e_n` minus the product of cycle edges.
    II,
    /// The path product from input to output.
    III,
    /// `e_j` of the post-output outflows times the path product.
    IV,
}

impl fmt::Display for CoefficientType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CoefficientType::I => "I",
            CoefficientType::II => "II",
            CoefficientType::III => "III",
            CoefficientType::IV => "IV",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypedCoefficient {
    pub ty: CoefficientType,
    /// Index of the elementary symmetric polynomial for types I and IV.
    pub index: usize,
    pub label: CoeffLabel,
    pub poly: Polynomial,
}

/// Closed-form coefficients of a one-input one-output cycle model, including
/// constant or zero entries (the path product 1 when input equals output,
/// the type II entry without leaks).
pub fn cycle_coefficients(model: &CompartmentalModel) -> Result<Vec<TypedCoefficient>> {
    let n = require_cycle(model)?;
    if model.inputs().len() != 1 || model.outputs().len() != 1 {
        return Err(Error::PreconditionViolated(
            "closed-form cycle coefficients need exactly one input and one output".into(),
        ));
    }
    let input = *model.inputs().first().expect("one input");
    let output = *model.outputs().first().expect("one output");
    let e = outflow_set(model);
    let mut out = Vec::new();
    for k in 1..n {
        out.push(TypedCoefficient {
            ty: CoefficientType::I,
            index: k,
            label: CoeffLabel::lhs(output, n - k),
            poly: elementary_symmetric(k as i64, &e)?,
        });
    }
    let cycle_product: Polynomial = (1..=n).map(|q| cycle_edge(q, n).poly()).product();
    out.push(TypedCoefficient {
        ty: CoefficientType::II,
        index: n,
        label: CoeffLabel::lhs(output, 0),
        poly: &elementary_symmetric(n as i64, &e)? - &cycle_product,
    });
    let dist = cyclic_distance(input, output, n);
    let kappa = kappa_path(model, input, output)?;
    out.push(TypedCoefficient {
        ty: CoefficientType::III,
        index: 0,
        label: CoeffLabel::rhs(output, input, n - 1 - dist),
        poly: kappa.clone(),
    });
    let e_star = post_output_set(model, input, output);
    for j in 1..=e_star.len() {
        out.push(TypedCoefficient {
            ty: CoefficientType::IV,
            index: j,
            label: CoeffLabel::rhs(output, input, n - 1 - dist - j),
            poly: &elementary_symmetric(j as i64, &e_star)? * &kappa,
        });
    }
    Ok(out)
}

/// The closed-form coefficient map (constants dropped, as in `ioeq`).
pub fn cycle_coefficient_map(model: &CompartmentalModel) -> Result<CoefficientMap> {
    let mut cm = CoefficientMap::new();
    for c in cycle_coefficients(model)? {
        cm.push(c.label, c.poly);
    }
    Ok(cm)
}

/// Leak pairs `(a, b)` for which the column dependence
/// `k_{a+1,a}(J_{k0a} - J_{k_{a+1,a}}) = k_{b+1,b}(J_{k0b} - J_{k_{b+1,b}})`
/// is predicted: both leaks before the output, or both at or after it,
/// counting from the input. Requires one input and one output.
pub fn dependent_leak_pairs(model: &CompartmentalModel) -> Result<Vec<(usize, usize)>> {
    let n = require_cycle(model)?;
    if model.inputs().len() != 1 || model.outputs().len() != 1 {
        return Err(Error::PreconditionViolated("need exactly one input and one output".into()));
    }
    let input = *model.inputs().first().expect("one input");
    let output = *model.outputs().first().expect("one output");
    let pos = |q: usize| cyclic_distance(input, q, n) + 1;
    let p = pos(output);
    let leaks: Vec<usize> = {
        let mut v: Vec<usize> = model.leaks().iter().copied().collect();
        v.sort_by_key(|&q| pos(q));
        v
    };
    let mut pairs = Vec::new();
    for (x, &a) in leaks.iter().enumerate() {
        for &b in &leaks[x + 1..] {
            let (pa, pb) = (pos(a), pos(b));
            if pb <= p.saturating_sub(1) || pa >= p {
                pairs.push((a, b));
            }
        }
    }
    Ok(pairs)
}

/// The column combination `k_{a+1,a}(J_{k0a} - J_{k_{a+1,a}})` of a Jacobian
/// whose columns are `params`.
pub fn leak_column_combination(
    j: &SymbolicMatrix,
    params: &[ParameterId],
    a: usize,
    n: usize,
) -> Vec<Polynomial> {
    let edge = cycle_edge(a, n);
    let col = |p: ParameterId| params.iter().position(|&q| q == p).expect("parameter is a column");
    let (ce, cl) = (col(edge), col(ParameterId::Leak(a)));
    let k = edge.poly();
    (0..j.rows()).map(|r| &k * &(j.get(r, cl) - j.get(r, ce))).collect()
}

/// Minimally leak-interlacing: leak-interlacing, at least two leaks, and every
/// arc holds exactly one marker, which is an input or an output but not both.
pub fn is_minimally_leak_interlacing(model: &CompartmentalModel) -> Result<bool> {
    if model.leaks().len() < 2 || !is_leak_interlacing(model)?.0 {
        return Ok(false);
    }
    Ok(leak_arcs(model).iter().all(|arc| {
        let ins = arc.members.iter().filter(|q| model.inputs().contains(q)).count();
        let outs = arc.members.iter().filter(|q| model.outputs().contains(q)).count();
        ins + outs == 1
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Marker {
    In(usize),
    Out(usize),
}

fn build_submodel(model: &CompartmentalModel, markers: &[Marker]) -> Option<CompartmentalModel> {
    let ins: BTreeSet<usize> =
        markers.iter().filter_map(|m| if let Marker::In(q) = m { Some(*q) } else { None }).collect();
    let outs: BTreeSet<usize> =
        markers.iter().filter_map(|m| if let Marker::Out(q) = m { Some(*q) } else { None }).collect();
    if ins.is_empty() || outs.is_empty() || !ins.is_disjoint(&outs) {
        return None;
    }
    let sub = model.with_io(ins, outs).ok()?;
    is_minimally_leak_interlacing(&sub).ok()?.then_some(sub)
}

/// Lowest-index marker choices following the two-case construction: if every
/// arc has an input, the first arc with an output contributes that output and
/// all other arcs an input; otherwise the first input-free arc contributes an
/// output, the first arc with an input contributes it, and the rest contribute
/// an input when they have one, else an output.
fn direct_selection(model: &CompartmentalModel, arcs: &[LeakArc]) -> Option<Vec<Marker>> {
    let first_in = |arc: &LeakArc| arc.members.iter().copied().filter(|q| model.inputs().contains(q)).min();
    let first_out =
        |arc: &LeakArc| arc.members.iter().copied().filter(|q| model.outputs().contains(q)).min();
    let mut picks: Vec<Option<Marker>> = vec![None; arcs.len()];
    if arcs.iter().all(|a| first_in(a).is_some()) {
        let k = arcs.iter().position(|a| first_out(a).is_some())?;
        picks[k] = Some(Marker::Out(first_out(&arcs[k])?));
        for (x, arc) in arcs.iter().enumerate() {
            if x != k {
                picks[x] = first_in(arc).map(Marker::In);
            }
        }
    } else {
        let k = arcs.iter().position(|a| first_in(a).is_none())?;
        picks[k] = Some(Marker::Out(first_out(&arcs[k])?));
        let m = arcs.iter().position(|a| first_in(a).is_some())?;
        picks[m] = first_in(&arcs[m]).map(Marker::In);
        for (x, arc) in arcs.iter().enumerate() {
            if picks[x].is_none() {
                picks[x] = first_in(arc).map(Marker::In).or_else(|| first_out(arc).map(Marker::Out));
            }
        }
    }
    picks.into_iter().collect()
}

fn exhaustive_selection(
    model: &CompartmentalModel,
    arcs: &[LeakArc],
    chosen: &mut Vec<Marker>,
) -> Option<CompartmentalModel> {
    let Some(arc) = arcs.get(chosen.len()) else {
        return build_submodel(model, chosen);
    };
    for &q in &arc.members {
        for marker in [Marker::In(q), Marker::Out(q)] {
            let present = match marker {
                Marker::In(q) => model.inputs().contains(&q),
                Marker::Out(q) => model.outputs().contains(&q),
            };
            if present {
                chosen.push(marker);
                let found = exhaustive_selection(model, arcs, chosen);
                chosen.pop();
                if found.is_some() {
                    return found;
                }
            }
        }
    }
    None
}

/// A minimally leak-interlacing submodel `(G, In', Out', Leak)` with
/// `In' ⊆ In`, `Out' ⊆ Out`. Uses the two-case construction; for members of
/// the exceptional family, where that construction may land on an exceptional
/// model, the first valid marker selection is returned instead, if any.
pub fn find_minimal_interlacing_submodel(model: &CompartmentalModel) -> Result<CompartmentalModel> {
    require_cycle(model)?;
    if model.leaks().len() < 2 {
        return Err(Error::NotApplicable("fewer than two leaks".into()));
    }
    if !is_leak_interlacing(model)?.0 {
        return Err(Error::NotApplicable("model is not leak-interlacing".into()));
    }
    let arcs = leak_arcs(model);
    if let Some(sub) = direct_selection(model, &arcs).and_then(|m| build_submodel(model, &m)) {
        return Ok(sub);
    }
    exhaustive_selection(model, &arcs, &mut Vec::new()).ok_or_else(|| {
        Error::NotApplicable("no minimally leak-interlacing submodel exists".into())
    })
}
