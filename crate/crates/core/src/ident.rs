//! Generic local identifiability from the rank of the coefficient-map
//! Jacobian at random points over GF(p).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::ser::{SerializeMap, SerializeStruct};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::ioeq::{coefficient_map, CoeffLabel, CoefficientMap};
use crate::matrix::SymbolicMatrix;
use crate::model::{CompartmentalModel, ParameterId};
use crate::modp;
use crate::polynomial::{Polynomial, Var};

pub const DEFAULT_TRIALS: usize = 5;
pub const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RankConfig {
    pub trials: usize,
    pub prime: u64,
    pub seed: u64,
}

impl Default for RankConfig {
    fn default() -> Self {
        RankConfig { trials: DEFAULT_TRIALS, prime: modp::DEFAULT_PRIME, seed: DEFAULT_SEED }
    }
}

impl RankConfig {
    pub fn with_seed(seed: u64) -> Self {
        RankConfig { seed, ..Default::default() }
    }
}

/// A point of GF(p)^k keyed by variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Point {
    vars: Vec<Var>,
    values: Vec<u64>,
}

impl Point {
    pub fn new(mut pairs: Vec<(Var, u64)>) -> Self {
        pairs.sort();
        let (vars, values) = pairs.into_iter().unzip();
        Point { vars, values }
    }

    pub fn get(&self, v: Var) -> Option<u64> {
        self.vars.binary_search(&v).ok().map(|k| self.values[k])
    }

    pub fn random(vars: &[Var], p: u64, rng: &mut impl Rng) -> Self {
        Point::new(vars.iter().map(|&v| (v, rng.gen_range(1..p))).collect())
    }
}

fn matrix_vars(j: &SymbolicMatrix) -> Vec<Var> {
    let mut vars = std::collections::BTreeSet::new();
    for r in 0..j.rows() {
        for e in j.row(r) {
            vars.extend(e.vars());
        }
    }
    vars.into_iter().collect()
}

/// `trials` random points, drawn sequentially from a ChaCha stream seeded by `seed`.
pub fn random_points(vars: &[Var], cfg: &RankConfig) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    (0..cfg.trials).map(|_| Point::random(vars, cfg.prime, &mut rng)).collect()
}

pub fn rank_at(j: &SymbolicMatrix, point: &Point, p: u64) -> usize {
    let values = j.eval_mod(p, |v| point.get(v)).expect("point assigns every matrix variable");
    modp::rank(values, p)
}

/// Partial derivatives of `cm` with respect to `params`, one row per coefficient.
pub fn jacobian(cm: &CoefficientMap, params: &[ParameterId]) -> Result<SymbolicMatrix> {
    jacobian_of(cm.polys(), params)
}

fn jacobian_of<'a>(
    polys: impl Iterator<Item = &'a Polynomial>,
    params: &[ParameterId],
) -> Result<SymbolicMatrix> {
    let polys: Vec<_> = polys.collect();
    for p in &polys {
        if let Some(v) = p.vars().into_iter().find(|v| !matches!(v, Var::Param(q) if params.contains(q)))
        {
            return Err(Error::UncoveredVariable(v.to_string()));
        }
    }
    Ok(SymbolicMatrix::from_fn(polys.len(), params.len(), |r, c| polys[r].partial(params[c].var())))
}

/// Maximum rank over `cfg.trials` random points of GF(p).
pub fn generic_rank(j: &SymbolicMatrix, cfg: &RankConfig) -> usize {
    let vars = matrix_vars(j);
    random_points(&vars, cfg).par_iter().map(|pt| rank_at(j, pt, cfg.prime)).max().unwrap_or(0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Identifiable,
    Unidentifiable,
}

impl Verdict {
    pub fn from_bool(identifiable: bool) -> Self {
        if identifiable {
            Verdict::Identifiable
        } else {
            Verdict::Unidentifiable
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Identifiable => "identifiable",
            Verdict::Unidentifiable => "unidentifiable",
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamStatus {
    LocallyIdentifiable,
    NonIdentifiable,
}

impl ParamStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            ParamStatus::LocallyIdentifiable => "local",
            ParamStatus::NonIdentifiable => "non",
        }
    }
}

fn with_unit_row(j: &SymbolicMatrix, col: usize) -> SymbolicMatrix {
    SymbolicMatrix::from_fn(j.rows() + 1, j.cols(), |r, c| {
        if r < j.rows() {
            j.get(r, c).clone()
        } else if c == col {
            Polynomial::one()
        } else {
            Polynomial::zero()
        }
    })
}

/// A parameter is locally identifiable when its coordinate direction lies in
/// the row space of `j` at every sampled point where `j` attains its maximal rank.
pub fn per_param_flags(
    j: &SymbolicMatrix,
    params: &[ParameterId],
    cfg: &RankConfig,
) -> Vec<(ParameterId, ParamStatus)> {
    let vars = matrix_vars(j);
    let points = random_points(&vars, cfg);
    let ranks: Vec<usize> = points.par_iter().map(|pt| rank_at(j, pt, cfg.prime)).collect();
    let best = ranks.iter().copied().max().unwrap_or(0);
    let generic: Vec<&Point> =
        points.iter().zip(&ranks).filter(|(_, &r)| r == best).map(|(pt, _)| pt).collect();
    params
        .par_iter()
        .enumerate()
        .map(|(c, &param)| {
            let aug = with_unit_row(j, c);
            let inside = generic.iter().all(|pt| rank_at(&aug, pt, cfg.prime) == best);
            let status =
                if inside { ParamStatus::LocallyIdentifiable } else { ParamStatus::NonIdentifiable };
            (param, status)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JacobianAnalysis {
    pub param_order: Vec<ParameterId>,
    pub coeff_labels: Vec<CoeffLabel>,
    pub generic_rank: usize,
    pub full_rank_target: usize,
    pub identifiable: bool,
    pub per_param: Vec<(ParameterId, ParamStatus)>,
    pub trials: usize,
    pub field_prime: u64,
    pub seed: u64,
}

impl JacobianAnalysis {
    pub fn verdict(&self) -> Verdict {
        Verdict::from_bool(self.identifiable)
    }

    pub fn status(&self, p: ParameterId) -> Option<ParamStatus> {
        self.per_param.iter().find(|(q, _)| *q == p).map(|&(_, s)| s)
    }

    pub fn params_with(&self, status: ParamStatus) -> Vec<ParameterId> {
        self.per_param.iter().filter(|(_, s)| *s == status).map(|&(p, _)| p).collect()
    }
}

struct PerParam<'a>(&'a [(ParameterId, ParamStatus)]);

impl Serialize for PerParam<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(self.0.len()))?;
        for (p, status) in self.0 {
            map.serialize_entry(&p.to_string(), status.as_str())?;
        }
        map.end()
    }
}

impl Serialize for JacobianAnalysis {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("JacobianAnalysis", 9)?;
        st.serialize_field("rank", &self.generic_rank)?;
        st.serialize_field("target", &self.full_rank_target)?;
        st.serialize_field("identifiable", &self.identifiable)?;
        st.serialize_field("per_param", &PerParam(&self.per_param))?;
        st.serialize_field("seed", &self.seed)?;
        st.serialize_field("prime", &self.field_prime)?;
        st.serialize_field("trials", &self.trials)?;
        let params: Vec<String> = self.param_order.iter().map(ToString::to_string).collect();
        st.serialize_field("params", &params)?;
        st.serialize_field("coefficients", &self.coeff_labels)?;
        st.end()
    }
}

/// Rank analysis of an explicit coefficient map for `model`'s parameters.
pub fn analyze_map(
    model: &CompartmentalModel,
    cm: &CoefficientMap,
    cfg: &RankConfig,
) -> Result<JacobianAnalysis> {
    let params = model.parameters();
    let j = jacobian(cm, &params)?;
    let per_param = per_param_flags(&j, &params, cfg);
    let generic_rank = generic_rank(&j, cfg);
    let full_rank_target = model.parameter_count();
    Ok(JacobianAnalysis {
        coeff_labels: cm.entries().iter().map(|(l, _)| *l).collect(),
        param_order: params,
        generic_rank,
        full_rank_target,
        identifiable: generic_rank == full_rank_target,
        per_param,
        trials: cfg.trials,
        field_prime: cfg.prime,
        seed: cfg.seed,
    })
}

/// Decides generic local identifiability of a strongly connected model.
pub fn is_identifiable(model: &CompartmentalModel, cfg: &RankConfig) -> Result<JacobianAnalysis> {
    if !model.is_strongly_connected() {
        return Err(Error::NotStronglyConnected);
    }
    analyze_map(model, &coefficient_map(model), cfg)
}

/// A coefficient map whose entries may be quotients of polynomials.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalCoefficientMap {
    entries: Vec<(Polynomial, Polynomial)>,
}

impl From<&CoefficientMap> for RationalCoefficientMap {
    fn from(cm: &CoefficientMap) -> Self {
        RationalCoefficientMap { entries: cm.polys().map(|p| (p.clone(), Polynomial::one())).collect() }
    }
}

impl RationalCoefficientMap {
    pub fn from_polys(polys: impl IntoIterator<Item = Polynomial>) -> Self {
        RationalCoefficientMap { entries: polys.into_iter().map(|p| (p, Polynomial::one())).collect() }
    }

    pub fn entries(&self) -> &[(Polynomial, Polynomial)] {
        &self.entries
    }

    /// Replaces entry `i` by entry `i` divided by entry `j` (0-based).
    pub fn quotient_transform(&self, i: usize, j: usize) -> Result<Self> {
        if i == j || i >= self.entries.len() || j >= self.entries.len() {
            return Err(Error::QuotientIndex(i, j));
        }
        let (ni, di) = &self.entries[i];
        let (nj, dj) = &self.entries[j];
        if nj.is_zero() {
            return Err(Error::ZeroDivisorCoefficient(j));
        }
        let mut out = self.clone();
        out.entries[i] = (ni * dj, di * nj);
        Ok(out)
    }

    fn vars(&self) -> Vec<Var> {
        let mut vars = std::collections::BTreeSet::new();
        for (n, d) in &self.entries {
            vars.extend(n.vars());
            vars.extend(d.vars());
        }
        vars.into_iter().collect()
    }

    /// Jacobian values at a point, or `None` if a denominator vanishes there.
    fn jacobian_at(&self, params: &[ParameterId], point: &Point, p: u64) -> Option<Vec<Vec<u64>>> {
        let ev = |q: &Polynomial| q.eval_mod(p, |v| point.get(v)).expect("point covers map variables");
        self.entries
            .iter()
            .map(|(num, den)| {
                let (nv, dv) = (ev(num), ev(den));
                let inv_d2 = modp::inv(modp::mul(dv, dv, p), p)?;
                Some(
                    params
                        .iter()
                        .map(|&param| {
                            let x = param.var();
                            let top = modp::sub(
                                modp::mul(ev(&num.partial(x)), dv, p),
                                modp::mul(nv, ev(&den.partial(x)), p),
                                p,
                            );
                            modp::mul(top, inv_d2, p)
                        })
                        .collect(),
                )
            })
            .collect()
    }

    /// Maximum Jacobian rank over `cfg.trials` random points avoiding the denominators' zeros.
    pub fn generic_rank(&self, params: &[ParameterId], cfg: &RankConfig) -> usize {
        let mut vars = self.vars();
        vars.extend(params.iter().map(|p| p.var()));
        vars.sort();
        vars.dedup();
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let mut best = 0;
        let mut done = 0;
        while done < cfg.trials {
            let pt = Point::random(&vars, cfg.prime, &mut rng);
            if let Some(values) = self.jacobian_at(params, &pt, cfg.prime) {
                best = best.max(modp::rank(values, cfg.prime));
                done += 1;
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn three_cycle() -> CompartmentalModel {
        CompartmentalModel::cycle(3, [1], [2], [1, 3]).unwrap()
    }

    #[test]
    fn running_example_is_identifiable() {
        let a = is_identifiable(&three_cycle(), &RankConfig::default()).unwrap();
        assert_eq!((a.generic_rank, a.full_rank_target), (5, 5));
        assert!(a.identifiable);
        assert!(a.per_param.iter().all(|(_, s)| *s == ParamStatus::LocallyIdentifiable));
    }

    #[test]
    fn zero_matrix_has_rank_zero() {
        let z = SymbolicMatrix::from_fn(3, 2, |_, _| Polynomial::zero());
        assert_eq!(generic_rank(&z, &RankConfig::default()), 0);
    }

    #[test]
    fn single_compartment_leak() {
        let m = CompartmentalModel::new(1, [], [1], [1], [1]).unwrap();
        let a = is_identifiable(&m, &RankConfig::default()).unwrap();
        assert!(a.identifiable);
        assert_eq!(a.status(ParameterId::Leak(1)), Some(ParamStatus::LocallyIdentifiable));
        let j = jacobian(&coefficient_map(&m), &[ParameterId::Leak(1)]).unwrap();
        assert_eq!(j.get(0, 0), &Polynomial::one());
    }

    #[test]
    fn uncovered_variable() {
        let cm = coefficient_map(&three_cycle());
        assert!(matches!(jacobian(&cm, &[ParameterId::edge(1, 2)]), Err(Error::UncoveredVariable(_))));
    }

    #[test]
    fn refuses_disconnected_models() {
        let m = CompartmentalModel::new(2, [(1, 2)], [1], [2], []).unwrap();
        assert_eq!(is_identifiable(&m, &RankConfig::default()), Err(Error::NotStronglyConnected));
    }

    #[test]
    fn quotient_keeps_rank_and_rejects_bad_indices() {
        let m = three_cycle();
        let rcm = RationalCoefficientMap::from(&coefficient_map(&m));
        let q = rcm.quotient_transform(4, 3).unwrap();
        assert_eq!(q.generic_rank(&m.parameters(), &RankConfig::default()), 5);
        assert_eq!(rcm.quotient_transform(2, 2), Err(Error::QuotientIndex(2, 2)));
        let z = RationalCoefficientMap::from_polys([Polynomial::one(), Polynomial::zero()]);
        assert_eq!(z.quotient_transform(0, 1), Err(Error::ZeroDivisorCoefficient(1)));
    }

    #[test]
    fn analysis_json_shape() {
        let a = is_identifiable(&three_cycle(), &RankConfig::default()).unwrap();
        let v: serde_json::Value = serde_json::to_value(&a).unwrap();
        assert_eq!(v["rank"], 5);
        assert_eq!(v["per_param"]["k21"], "local");
        assert_eq!(v["prime"], modp::DEFAULT_PRIME);
    }
}
