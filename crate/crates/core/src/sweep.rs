//! Exhaustive sweeps over input/output/leak configurations of cycle and
//! catenary models, comparing the combinatorial verdict with the rank verdict.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::cycle::classify_cycle;
use crate::error::{Error, Result};
use crate::ident::{is_identifiable, ParamStatus, RankConfig, Verdict};
use crate::model::{CompartmentalModel, ParameterId, Shape};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Cycle,
    Catenary,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::Cycle => "cycle",
            Family::Catenary => "catenary",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cycle" => Ok(Family::Cycle),
            "catenary" => Ok(Family::Catenary),
            other => Err(Error::PreconditionViolated(format!("unknown family {other:?}"))),
        }
    }
}

type Config = (Vec<usize>, Vec<usize>, Vec<usize>);

fn subsets(n: usize) -> Vec<Vec<usize>> {
    (0u64..1 << n).map(|m| (1..=n).filter(|&i| m & (1 << (i - 1)) != 0).collect()).collect()
}

fn image(set: &[usize], f: impl Fn(usize) -> usize) -> Vec<usize> {
    let mut v: Vec<usize> = set.iter().map(|&i| f(i)).collect();
    v.sort_unstable();
    v
}

fn apply(c: &Config, f: impl Fn(usize) -> usize + Copy) -> Config {
    (image(&c.0, f), image(&c.1, f), image(&c.2, f))
}

/// Smallest image of `c` under the symmetries of the family: rotations for
/// cycles, the mirror `i -> n + 1 - i` for catenaries.
pub fn canonical(family: Family, n: usize, c: &Config) -> Config {
    match family {
        Family::Cycle => (0..n).map(|r| apply(c, |i| (i - 1 + r) % n + 1)).min().expect("n >= 1"),
        Family::Catenary => c.clone().min(apply(c, |i| n + 1 - i)),
    }
}

/// One representative per symmetry class of (In, Out, Leak) with nonempty In
/// and Out and at most `max_leaks` leaks, in canonical order.
pub fn configurations(family: Family, n: usize, max_leaks: Option<usize>) -> Result<Vec<Config>> {
    let min_n = match family {
        Family::Cycle => 3,
        Family::Catenary => 1,
    };
    if n < min_n || n > 16 {
        return Err(Error::PreconditionViolated(format!("{family} sweep needs {min_n} <= n <= 16")));
    }
    let all = subsets(n);
    let nonempty: Vec<&Vec<usize>> = all.iter().filter(|s| !s.is_empty()).collect();
    let leaks: Vec<&Vec<usize>> =
        all.iter().filter(|s| max_leaks.is_none_or(|l| s.len() <= l)).collect();
    let mut out = Vec::new();
    for &i in &nonempty {
        for &o in &nonempty {
            for &l in &leaks {
                let c = (i.clone(), o.clone(), l.clone());
                if canonical(family, n, &c) == c {
                    out.push(c);
                }
            }
        }
    }
    out.sort();
    Ok(out)
}

pub fn build_model(family: Family, n: usize, c: &Config) -> Result<CompartmentalModel> {
    let (i, o, l) = c.clone();
    Ok(match family {
        Family::Cycle => CompartmentalModel::cycle(n, i, o, l)?,
        Family::Catenary => CompartmentalModel::catenary(n, i, o, l)?,
    })
}

/// Combinatorial verdict: leak-interlacing for cycles; for one-input one-output
/// bidirected trees, at most one leak and input-output distance at most one.
/// `None` where no classification applies.
pub fn combinatorial_verdict(model: &CompartmentalModel) -> Result<Option<Verdict>> {
    match model.shape().shape {
        Shape::DirectedCycle => Ok(Some(classify_cycle(model)?.verdict)),
        Shape::Catenary | Shape::BidirectedTree
            if model.inputs().len() == 1 && model.outputs().len() == 1 =>
        {
            let (&i, &o) = (model.inputs().first().expect("one"), model.outputs().first().expect("one"));
            let near = model.distance(i, o).is_some_and(|d| d <= 1);
            Ok(Some(Verdict::from_bool(model.leaks().len() <= 1 && near)))
        }
        _ => Ok(None),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepRow {
    pub model: CompartmentalModel,
    pub shape: Shape,
    pub verdict_comb: Option<Verdict>,
    pub verdict_rank: Verdict,
    pub params_local: Vec<ParameterId>,
    pub params_non: Vec<ParameterId>,
    /// False only when both verdicts exist and differ.
    pub agree: bool,
}

fn row_key(m: &CompartmentalModel) -> (usize, Vec<usize>, Vec<usize>, Vec<usize>) {
    let v = |s: &std::collections::BTreeSet<usize>| s.iter().copied().collect::<Vec<_>>();
    (m.n(), v(m.inputs()), v(m.outputs()), v(m.leaks()))
}

impl PartialOrd for SweepRow {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for SweepRow {
    fn cmp(&self, other: &Self) -> Ordering {
        row_key(&self.model).cmp(&row_key(&other.model)).then_with(|| {
            self.model.edges().iter().cmp(other.model.edges().iter())
        })
    }
}

/// Rank-route analysis of one model, paired with its combinatorial verdict.
pub fn analyze_row(model: CompartmentalModel, cfg: &RankConfig) -> Result<SweepRow> {
    let analysis = is_identifiable(&model, cfg)?;
    let verdict_comb = combinatorial_verdict(&model)?;
    let verdict_rank = analysis.verdict();
    Ok(SweepRow {
        shape: model.shape().shape,
        verdict_comb,
        verdict_rank,
        params_local: analysis.params_with(ParamStatus::LocallyIdentifiable),
        params_non: analysis.params_with(ParamStatus::NonIdentifiable),
        agree: verdict_comb.is_none_or(|c| c == verdict_rank),
        model,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    pub seed: u64,
    pub prime: u64,
    pub trials: usize,
    pub version: String,
}

impl SweepReport {
    pub fn empty(cfg: &RankConfig) -> Self {
        SweepReport {
            rows: Vec::new(),
            seed: cfg.seed,
            prime: cfg.prime,
            trials: cfg.trials,
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    pub fn disagreements(&self) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter(|r| !r.agree)
    }
}

/// Analyzes every configuration of the family, in parallel, sorted canonically.
pub fn sweep(family: Family, n: usize, max_leaks: Option<usize>, cfg: &RankConfig) -> Result<SweepReport> {
    let models = configurations(family, n, max_leaks)?
        .iter()
        .map(|c| build_model(family, n, c))
        .collect::<Result<Vec<_>>>()?;
    sweep_models(models, cfg)
}

pub fn sweep_models(models: Vec<CompartmentalModel>, cfg: &RankConfig) -> Result<SweepReport> {
    let mut rows = models.into_par_iter().map(|m| analyze_row(m, cfg)).collect::<Result<Vec<_>>>()?;
    rows.sort();
    Ok(SweepReport { rows, ..SweepReport::empty(cfg) })
}
