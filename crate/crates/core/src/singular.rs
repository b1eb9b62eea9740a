//! Singular loci of identifiable models: the polynomial cutting out the
//! parameters where the coefficient-map Jacobian loses rank, hyperplane
//! containment by sampling, and the known hyperplane families for cycles.

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::cycle::{classify_cycle, cycle_edge, outflow};
use crate::error::{Error, Result};
use crate::gcd::{factor_by_candidates, gcd, render_factored};
use crate::ident::{generic_rank, jacobian, rank_at, Point, RankConfig};
use crate::ioeq::coefficient_map;
use crate::matrix::SymbolicMatrix;
use crate::model::{CompartmentalModel, ParameterId, Shape};
use crate::modp;
use crate::polynomial::{Polynomial, Var};

pub const MAX_SQUARE_PARAMS: usize = 12;
pub const MAX_MINOR_PARAMS: usize = 10;
pub const MAX_MINORS: usize = 20_000;

/// The locus `{h = 0}` of a degree-one polynomial.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Hyperplane {
    pub h: Polynomial,
}

impl Hyperplane {
    pub fn new(h: Polynomial) -> Result<Self> {
        if h.total_degree() != 1 {
            return Err(Error::PreconditionViolated(format!("{h} is not of degree one")));
        }
        Ok(Hyperplane { h })
    }

    pub fn coordinate(p: ParameterId) -> Self {
        Hyperplane { h: p.poly() }
    }

    /// `{a = b}`.
    pub fn equal(a: &Polynomial, b: &Polynomial) -> Result<Self> {
        Hyperplane::new(a - b)
    }
}

impl fmt::Display for Hyperplane {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{} = 0}}", self.h)
    }
}

fn model_jacobian(model: &CompartmentalModel) -> Result<(SymbolicMatrix, Vec<ParameterId>)> {
    if !model.is_strongly_connected() {
        return Err(Error::NotStronglyConnected);
    }
    let params = model.parameters();
    let j = jacobian(&coefficient_map(model), &params)?;
    Ok((j, params))
}

fn require_identifiable(j: &SymbolicMatrix, target: usize, cfg: &RankConfig) -> Result<()> {
    if generic_rank(j, cfg) < target {
        Err(Error::NotIdentifiable)
    } else {
        Ok(())
    }
}

/// `k`-subsets of `0..n` in lexicographic order.
fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

fn binomial(n: usize, k: usize) -> u128 {
    (0..k as u128).fold(1, |acc, i| acc * (n as u128 - i) / (i + 1))
}

/// Polynomial defining the singular locus: the Jacobian determinant when
/// square, else the gcd of its maximal minors. Content-free with a positive
/// leading coefficient.
pub fn singular_locus_polynomial(model: &CompartmentalModel, cfg: &RankConfig) -> Result<Polynomial> {
    let (j, params) = model_jacobian(model)?;
    let k = params.len();
    if k > MAX_SQUARE_PARAMS {
        return Err(Error::TooLarge(format!("{k} parameters, limit {MAX_SQUARE_PARAMS}")));
    }
    require_identifiable(&j, k, cfg)?;
    if j.is_square() {
        return Ok(j.determinant().normalized());
    }
    if k > MAX_MINOR_PARAMS {
        return Err(Error::TooLarge(format!(
            "non-square Jacobian with {k} parameters, limit {MAX_MINOR_PARAMS}"
        )));
    }
    let count = binomial(j.rows(), k);
    if count > MAX_MINORS as u128 {
        return Err(Error::TooLarge(format!("{count} maximal minors, limit {MAX_MINORS}")));
    }
    let cols: Vec<usize> = (0..k).collect();
    let minors: Vec<Polynomial> = subsets(j.rows(), k)
        .par_iter()
        .map(|rows| j.select(rows, &cols).determinant())
        .filter(|d| !d.is_zero())
        .collect();
    let g = minors.par_iter().cloned().reduce(Polynomial::zero, |a, b| gcd(&a, &b));
    Ok(g.normalized())
}

/// Outcome of sampling the Jacobian rank on a hyperplane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct HyperplaneEvidence {
    /// True when every sample was rank-deficient. False is certain; true is
    /// probabilistic evidence.
    pub contained: bool,
    pub samples: usize,
    pub deficient: usize,
}

/// Random points of GF(p) on `{h = 0}`: the first variable of `h` with a
/// unit coefficient is solved for, the others are uniform.
pub fn points_on_hyperplane(
    h: &Hyperplane,
    vars: &[Var],
    samples: usize,
    cfg: &RankConfig,
) -> Result<Vec<Point>> {
    let p = cfg.prime;
    for v in h.h.vars() {
        if !vars.contains(&v) {
            return Err(Error::UncoveredVariable(v.to_string()));
        }
    }
    let linear = |v: Var| h.h.partial(v).constant_value().map(|c| modp::reduce_bigint(&c, p));
    let solved = h
        .h
        .vars()
        .into_iter()
        .find_map(|v| linear(v).filter(|&c| c != 0).and_then(|c| modp::inv(c, p)).map(|inv| (v, inv)))
        .ok_or_else(|| Error::UnsolvableConstraint(h.to_string()))?;
    let (x, inv) = solved;
    let free: Vec<Var> = vars.iter().copied().filter(|&v| v != x).collect();
    let rest = h.h.substitute(x, &Polynomial::zero());
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    (0..samples)
        .map(|_| {
            let base = Point::random(&free, p, &mut rng);
            let r = rest.eval_mod(p, |v| base.get(v))?;
            let value = modp::mul(modp::sub(0, r, p), inv, p);
            let mut pairs: Vec<(Var, u64)> = free.iter().map(|&v| (v, base.get(v).expect("free"))).collect();
            pairs.push((x, value));
            Ok(Point::new(pairs))
        })
        .collect()
}

/// Whether the Jacobian is rank-deficient at `samples` random points of `{h = 0}`.
pub fn contains_hyperplane(
    model: &CompartmentalModel,
    h: &Hyperplane,
    samples: usize,
    cfg: &RankConfig,
) -> Result<HyperplaneEvidence> {
    let (j, params) = model_jacobian(model)?;
    require_identifiable(&j, params.len(), cfg)?;
    hyperplane_evidence(&j, &params, h, samples, cfg)
}

fn hyperplane_evidence(
    j: &SymbolicMatrix,
    params: &[ParameterId],
    h: &Hyperplane,
    samples: usize,
    cfg: &RankConfig,
) -> Result<HyperplaneEvidence> {
    let vars: Vec<Var> = params.iter().map(|p| p.var()).collect();
    let points = points_on_hyperplane(h, &vars, samples, cfg)?;
    let deficient =
        points.par_iter().filter(|pt| rank_at(j, pt, cfg.prime) < params.len()).count();
    Ok(HyperplaneEvidence { contained: deficient == samples, samples, deficient })
}

/// A hyperplane with the theorem part (1, 2 or 3) that predicts it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PredictedHyperplane {
    pub part: u8,
    pub hyperplane: Hyperplane,
}

fn require_identifiable_cycle_from_one(model: &CompartmentalModel) -> Result<usize> {
    if model.shape().shape != Shape::DirectedCycle {
        return Err(Error::NotACycle);
    }
    if model.inputs().iter().ne([1].iter()) {
        return Err(Error::PreconditionViolated("need In = {1}".into()));
    }
    if !classify_cycle(model)?.is_leak_interlacing {
        return Err(Error::PreconditionViolated("model is not leak-interlacing".into()));
    }
    Ok(model.n())
}

/// Hyperplanes known to lie in the singular locus of an identifiable cycle
/// model with input 1, tagged by the hypothesis that produces them.
pub fn predicted_hyperplanes(model: &CompartmentalModel) -> Result<Vec<PredictedHyperplane>> {
    let n = require_identifiable_cycle_from_one(model)?;
    let leaks = model.leaks();
    let mut out = Vec::new();
    if leaks.iter().any(|&l| l != 1) {
        out.push(PredictedHyperplane { part: 1, hyperplane: Hyperplane::coordinate(cycle_edge(1, n)) });
    }
    if let Some(&last) = leaks.last() {
        if model.outputs().iter().all(|&p| last >= p) {
            for a in (1..=n).filter(|&a| a != last) {
                out.push(PredictedHyperplane {
                    part: 2,
                    hyperplane: Hyperplane::coordinate(cycle_edge(a, n)),
                });
            }
        }
    }
    if model.outputs().len() == 1 && leaks.len() == 2 {
        let p = *model.outputs().first().expect("one output");
        let q = *leaks.first().expect("two leaks");
        if leaks.contains(&p) && q < p && p < n {
            out.push(PredictedHyperplane {
                part: 3,
                hyperplane: Hyperplane::equal(&outflow(model, q), &outflow(model, p))?,
            });
        }
    }
    Ok(out)
}

/// The closed singular-locus polynomial of the cycle with input, output and
/// single leak layout `In = Out = {1}`, `Leak = {l}`.
pub fn vandermonde_locus(n: usize, l: usize) -> Result<Polynomial> {
    if n < 3 || !(1..=n).contains(&l) {
        return Err(Error::PreconditionViolated(format!("need n >= 3 and 1 <= l <= n, got n={n}, l={l}")));
    }
    let tilde = |i: usize| {
        let e = cycle_edge(i, n).poly();
        if i == l {
            &e + &ParameterId::Leak(l).poly()
        } else {
            e
        }
    };
    let edges: Polynomial = (1..=n).filter(|&i| i != l).map(|i| cycle_edge(i, n).poly()).product();
    let diffs: Polynomial =
        (2..=n).flat_map(|i| (i + 1..=n).map(move |j| (i, j))).map(|(i, j)| &tilde(i) - &tilde(j)).product();
    Ok(&edges * &diffs)
}

/// Sampled evidence for one hyperplane `{k_{l+1,l} + k_{0l} = k_{a+1,a}}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConjectureEvidence {
    pub a: usize,
    pub leak: usize,
    pub hyperplane: Hyperplane,
    #[serde(flatten)]
    pub evidence: HyperplaneEvidence,
}

/// Samples every candidate hyperplane `{k_{l+1,l} + k_{0l} = k_{a+1,a}}` with
/// `a` in `[p]` outside the leaks and `l` a leak in `[p]`.
pub fn explore_conjecture(
    model: &CompartmentalModel,
    samples: usize,
    cfg: &RankConfig,
) -> Result<Vec<ConjectureEvidence>> {
    let n = require_identifiable_cycle_from_one(model)?;
    if model.outputs().len() != 1 {
        return Err(Error::PreconditionViolated("need exactly one output".into()));
    }
    let p = *model.outputs().first().expect("one output");
    let leaks = model.leaks();
    let pairs: Vec<(usize, usize)> = (1..=p)
        .filter(|a| !leaks.contains(a))
        .flat_map(|a| leaks.iter().filter(|&&l| l <= p).map(move |&l| (a, l)))
        .collect();
    if pairs.is_empty() {
        return Ok(Vec::new());
    }
    let (j, params) = model_jacobian(model)?;
    pairs
        .into_iter()
        .map(|(a, l)| {
            let hyperplane = Hyperplane::equal(&outflow(model, l), &cycle_edge(a, n).poly())?;
            let evidence = hyperplane_evidence(&j, &params, &hyperplane, samples, cfg)?;
            Ok(ConjectureEvidence { a, leak: l, hyperplane, evidence })
        })
        .collect()
}

/// Linear forms tried when factoring a locus polynomial: every parameter,
/// and for cycles and catenaries the differences of outflow sums and edges.
pub fn candidate_linear_forms(model: &CompartmentalModel) -> Vec<Polynomial> {
    let mut forms: Vec<Polynomial> = model.parameters().into_iter().map(ParameterId::poly).collect();
    let mut sums: Vec<Polynomial> = Vec::new();
    match model.shape().shape {
        Shape::DirectedCycle => {
            for q in 1..=model.n() {
                sums.push(cycle_edge(q, model.n()).poly());
                if model.leaks().contains(&q) {
                    sums.push(outflow(model, q));
                }
            }
        }
        Shape::Catenary => {
            for q in 1..=model.n() {
                sums.push(crate::catenary::out_sum(model, q).expect("catenary compartment"));
            }
        }
        _ => {}
    }
    for (x, a) in sums.iter().enumerate() {
        for b in &sums[x + 1..] {
            let d = a - b;
            if d.total_degree() == 1 && !forms.contains(&d) {
                forms.push(d);
            }
        }
    }
    forms
}

/// The locus polynomial as a product of candidate linear forms, if it splits
/// completely into them up to an integer unit.
pub fn factored_locus(model: &CompartmentalModel, poly: &Polynomial) -> Option<String> {
    let (factors, rest) = factor_by_candidates(poly, &candidate_linear_forms(model));
    rest.is_constant().then(|| render_factored(&factors, &rest))
}
