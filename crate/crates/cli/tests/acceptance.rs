//! Acceptance checks, one PASS/FAIL line per criterion. Exits nonzero if any fails.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use compident_cli::{closed_form_map, cross_check_model};
use compident_core::cycle::{classify_cycle, dependent_leak_pairs, leak_column_combination};
use compident_core::forests::coefficient_map_via_forests;
use compident_core::ident::{
    generic_rank, is_identifiable, jacobian, RankConfig, RationalCoefficientMap, Verdict,
};
use compident_core::ioeq::{coefficient_map, io_equation};
use compident_core::polynomial::elementary_symmetric;
use compident_core::singular::{predicted_hyperplanes, singular_locus_polynomial, vandermonde_locus};
use compident_core::sweep::{combinatorial_verdict, sweep, Family, SweepRow};
use compident_core::{CompartmentalModel, Monomial, Polynomial, SymbolicMatrix, Var};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

type Check = Result<String, String>;
type CheckFn<'a> = Box<dyn Fn() -> Check + 'a>;

fn p(s: &str) -> Polynomial {
    s.parse().unwrap()
}

fn subsets(n: usize) -> Vec<Vec<usize>> {
    (0u32..1 << n).map(|m| (1..=n).filter(|&i| m & (1 << (i - 1)) != 0).collect()).collect()
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t = Instant::now();
    let v = f();
    (v, t.elapsed())
}

fn three_cycle() -> CompartmentalModel {
    CompartmentalModel::cycle(3, [1], [2], [1, 3]).unwrap()
}

fn four_cycle() -> CompartmentalModel {
    CompartmentalModel::cycle(4, [1], [3], [1, 3]).unwrap()
}

fn ac1() -> Check {
    let m = three_cycle();
    let (eq, t) = timed(|| io_equation(&m, 2).unwrap());
    let lhs = [
        "1",
        "k01 + k03 + k13 + k21 + k32",
        "k01*k03 + k01*k13 + k01*k32 + k03*k21 + k03*k32 + k13*k21 + k13*k32 + k21*k32",
        "k01*k03*k32 + k01*k13*k32 + k03*k21*k32",
    ];
    let rhs = ["0", "k21", "(k03 + k13)*k21"];
    let want_lhs: Vec<Polynomial> = lhs.iter().map(|s| p(s)).collect();
    let want_rhs: Vec<Polynomial> = rhs.iter().map(|s| p(s)).collect();
    ensure(eq.lhs == want_lhs, || format!("lhs {:?}", eq.lhs.iter().map(|q| q.to_string()).collect::<Vec<_>>()))?;
    ensure(eq.rhs.len() == 1 && eq.rhs.get(&1) == Some(&want_rhs), || format!("rhs {:?}", eq.rhs))?;
    ensure(t < Duration::from_secs(1), || format!("took {t:?}"))?;
    Ok(format!("6 coefficients exact in {t:.2?}"))
}

fn ac2() -> Check {
    let cfg = RankConfig::default();
    let cases = [
        (three_cycle(), p("k21^2*k32*(k01 + k21 - k32)")),
        (
            four_cycle(),
            p("k14*k21^2*k32^3*(k32 - k43 - k03)*(k21 - k43 + k01 - k03)*(k21 - k32 + k01)"),
        ),
    ];
    let mut times = Vec::new();
    for (m, want) in cases {
        let (det, t) = timed(|| {
            let j = jacobian(&coefficient_map(&m), &m.parameters()).unwrap();
            j.determinant()
        });
        ensure(det == want || det == -want.clone(), || format!("{} gave {det}", m.to_json()))?;
        ensure(t < Duration::from_secs(5), || format!("{} took {t:?}", m.to_json()))?;
        let locus = singular_locus_polynomial(&m, &cfg).map_err(|e| e.to_string())?;
        ensure(locus == want.normalized(), || format!("locus {locus}"))?;
        times.push(format!("{t:.2?}"));
    }
    Ok(format!("both determinants exact ({})", times.join(", ")))
}

fn ac3(rows: &[SweepRow]) -> Check {
    let mut counts = Vec::new();
    for n in 3..=5 {
        let sub: Vec<&SweepRow> = rows.iter().filter(|r| r.model.n() == n).collect();
        ensure(!sub.is_empty(), || format!("no rows for n={n}"))?;
        for r in &sub {
            ensure(r.verdict_comb == Some(r.verdict_rank), || {
                format!("{} comb {:?} rank {}", r.model.to_json(), r.verdict_comb, r.verdict_rank)
            })?;
        }
        counts.push(format!("n={n}: {}", sub.len()));
    }
    Ok(format!("all agree ({})", counts.join(", ")))
}

fn ac4(rows: &[SweepRow]) -> Check {
    let both = |r: &SweepRow, v: Verdict| r.verdict_rank == v && r.verdict_comb == Some(v);
    let (mut a, mut b, mut c) = (0, 0, 0);
    for r in rows {
        let m = &r.model;
        let leaks = m.leaks().len();
        if leaks <= 1 {
            ensure(both(r, Verdict::Identifiable), || format!("(i) {}", m.to_json()))?;
            a += 1;
        }
        if m.inputs().len() == 1 && m.outputs().len() == 1 {
            let (i, o) = (*m.inputs().first().unwrap(), *m.outputs().first().unwrap());
            if o == if i == 1 { m.n() } else { i - 1 } {
                ensure(both(r, Verdict::from_bool(leaks <= 1)), || format!("(ii) {}", m.to_json()))?;
                b += 1;
            }
            if leaks >= 3 {
                ensure(both(r, Verdict::Unidentifiable), || format!("(iii) {}", m.to_json()))?;
                c += 1;
            }
        }
    }
    ensure(a > 0 && b > 0 && c > 0, || "a row family is empty".into())?;
    Ok(format!("rows (i) {a}, (ii) {b}, (iii) {c}"))
}

fn ac5() -> Check {
    let mut models = Vec::new();
    for n in 3..=5 {
        for i in 1..=n {
            for o in 1..=n {
                for l in subsets(n) {
                    models.push(CompartmentalModel::cycle(n, [i], [o], l).unwrap());
                }
            }
        }
    }
    for n in 1..=5 {
        for i in 1..=n {
            for o in i..=n {
                for l in subsets(n) {
                    models.push(CompartmentalModel::catenary(n, [i], [o], l).unwrap());
                }
            }
        }
    }
    let mut closed = 0;
    for m in &models {
        let found = cross_check_model(m);
        ensure(found.is_empty(), || format!("{} {:?}", m.to_json(), found[0]))?;
        let det = coefficient_map(m);
        let multiset = |cm: &compident_core::CoefficientMap| {
            let mut v: Vec<String> = cm.polys().map(|q| q.to_string()).collect();
            v.sort();
            v
        };
        let cf = closed_form_map(m).map_err(|e| format!("{}: {e}", m.to_json()))?;
        ensure(multiset(&det) == multiset(&cf), || format!("closed form {}", m.to_json()))?;
        ensure(multiset(&det) == multiset(&coefficient_map_via_forests(m)), || {
            format!("forests {}", m.to_json())
        })?;
        closed += 1;
    }
    Ok(format!("{closed} models, three routes identical"))
}

fn ac6() -> Check {
    let cfg = RankConfig::default();
    let mut vander = 0;
    for n in 3..=5 {
        for l in 1..=n {
            let m = CompartmentalModel::cycle(n, [1], [1], [l]).unwrap();
            let locus = singular_locus_polynomial(&m, &cfg).map_err(|e| e.to_string())?;
            let v = vandermonde_locus(n, l).map_err(|e| e.to_string())?;
            ensure(locus == v.normalized(), || format!("n={n} l={l}: {locus} vs {v}"))?;
            vander += 1;
        }
    }
    let mut divided = 0;
    for n in 3..=4 {
        for outs in subsets(n).into_iter().filter(|s| !s.is_empty()) {
            for leaks in subsets(n) {
                let m = CompartmentalModel::cycle(n, [1], outs.clone(), leaks).unwrap();
                if !classify_cycle(&m).unwrap().is_leak_interlacing
                    || coefficient_map(&m).len() != m.parameter_count()
                {
                    continue;
                }
                let locus = singular_locus_polynomial(&m, &cfg).map_err(|e| e.to_string())?;
                for h in predicted_hyperplanes(&m).map_err(|e| e.to_string())? {
                    ensure(locus.div_exact(&h.hyperplane.h).is_some(), || {
                        format!("{} does not divide the locus of {}", h.hyperplane, m.to_json())
                    })?;
                    divided += 1;
                }
            }
        }
    }
    ensure(divided > 0, || "no predicted hyperplanes".into())?;
    Ok(format!("{vander} Vandermonde loci, {divided} hyperplane divisions"))
}

fn ac7() -> Check {
    let mut identities = 0;
    for n in 3..=5 {
        for i in 1..=n {
            for o in 1..=n {
                for leaks in subsets(n) {
                    let m = CompartmentalModel::cycle(n, [i], [o], leaks).unwrap();
                    let c = classify_cycle(&m).unwrap();
                    let pairs = dependent_leak_pairs(&m).map_err(|e| e.to_string())?;
                    let expect = !c.is_exceptional && !c.is_leak_interlacing;
                    ensure(pairs.is_empty() != expect, || format!("pairs {pairs:?} for {}", m.to_json()))?;
                    if pairs.is_empty() {
                        continue;
                    }
                    let params = m.parameters();
                    let j = jacobian(&coefficient_map(&m), &params).unwrap();
                    for (a, b) in pairs {
                        let lhs = leak_column_combination(&j, &params, a, n);
                        let rhs = leak_column_combination(&j, &params, b, n);
                        ensure(lhs == rhs, || format!("({a},{b}) fails for {}", m.to_json()))?;
                        identities += 1;
                    }
                }
            }
        }
    }
    Ok(format!("{identities} column identities hold"))
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for rest in permutations(n - 1) {
        for pos in 0..=rest.len() {
            let mut v = rest.clone();
            v.insert(pos, n);
            out.push(v);
        }
    }
    out
}

/// Undirected edges of the labeled tree with Prüfer sequence `seq`.
fn prufer_tree(n: usize, seq: &[usize]) -> Vec<(usize, usize)> {
    let mut degree = vec![1; n + 1];
    for &x in seq {
        degree[x] += 1;
    }
    let mut edges = Vec::new();
    for &x in seq {
        let leaf = (1..=n).find(|&v| degree[v] == 1).unwrap();
        edges.push((leaf.min(x), leaf.max(x)));
        degree[leaf] -= 1;
        degree[x] -= 1;
    }
    let last: Vec<usize> = (1..=n).filter(|&v| degree[v] == 1).collect();
    if last.len() == 2 {
        edges.push((last[0], last[1]));
    }
    edges
}

fn labeled_trees(n: usize) -> Vec<Vec<(usize, usize)>> {
    if n <= 2 {
        return vec![if n == 2 { vec![(1, 2)] } else { vec![] }];
    }
    let mut out = Vec::new();
    let total = n.pow(n as u32 - 2);
    for mut code in 0..total {
        let mut seq = Vec::new();
        for _ in 0..n - 2 {
            seq.push(code % n + 1);
            code /= n;
        }
        out.push(prufer_tree(n, &seq));
    }
    out
}

type TreeConfig = (Vec<(usize, usize)>, usize, usize, Vec<usize>);

fn ac8() -> Check {
    let cfg = RankConfig::default();
    let mut checked = 0;
    for n in 1..=5 {
        let perms = permutations(n);
        let mut classes: BTreeSet<TreeConfig> = BTreeSet::new();
        let mut shapes = BTreeSet::new();
        for tree in labeled_trees(n) {
            let canon_tree = perms
                .iter()
                .map(|pi| {
                    let mut e: Vec<_> =
                        tree.iter().map(|&(a, b)| (pi[a - 1].min(pi[b - 1]), pi[a - 1].max(pi[b - 1]))).collect();
                    e.sort();
                    e
                })
                .min()
                .unwrap();
            shapes.insert(canon_tree.clone());
        }
        for tree in &shapes {
            for i in 1..=n {
                for o in 1..=n {
                    for l in subsets(n) {
                        let key = perms
                            .iter()
                            .filter_map(|pi| {
                                let mut e: Vec<_> = tree
                                    .iter()
                                    .map(|&(a, b)| (pi[a - 1].min(pi[b - 1]), pi[a - 1].max(pi[b - 1])))
                                    .collect();
                                e.sort();
                                if &e != tree {
                                    return None;
                                }
                                let mut lk: Vec<usize> = l.iter().map(|&x| pi[x - 1]).collect();
                                lk.sort();
                                Some((e, pi[i - 1], pi[o - 1], lk))
                            })
                            .min()
                            .unwrap();
                        classes.insert(key);
                    }
                }
            }
        }
        for (tree, i, o, l) in &classes {
            let edges: Vec<(usize, usize)> = tree.iter().flat_map(|&(a, b)| [(a, b), (b, a)]).collect();
            let m = CompartmentalModel::new(n, edges, [*i], [*o], l.clone()).unwrap();
            let rank = is_identifiable(&m, &cfg).map_err(|e| e.to_string())?;
            let dist = m.distance(*i, *o).unwrap();
            let law = Verdict::from_bool(l.len() <= 1 && dist <= 1);
            ensure(rank.verdict() == law, || format!("rank {} law {law} for {}", rank.verdict(), m.to_json()))?;
            let comb = combinatorial_verdict(&m).map_err(|e| e.to_string())?;
            ensure(comb == Some(law), || format!("classifier {comb:?} for {}", m.to_json()))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} tree configurations match"))
}

fn poly_from_terms(terms: &[(i64, u32, u32, u32)]) -> Polynomial {
    let mut acc = Polynomial::zero();
    for &(c, a, b, d) in terms {
        let m = Monomial::from_powers([(Var::X(1), a), (Var::X(2), b), (Var::X(3), d)]);
        acc += &Polynomial::term(c, m);
    }
    acc
}

fn x_rank(polys: &[Polynomial], n: u32, cfg: &RankConfig) -> usize {
    let vars: Vec<Var> = (1..=n).map(Var::X).collect();
    let j = SymbolicMatrix::from_fn(polys.len(), vars.len(), |r, c| polys[r].partial(vars[c]));
    generic_rank(&j, cfg)
}

fn ac9() -> Check {
    let mut runner = TestRunner::new(Config { cases: 128, failure_persistence: None, ..Config::default() });
    let poly = || prop::collection::vec((-5i64..=5, 0u32..3, 0u32..3, 0u32..2), 0..5).prop_map(|t| poly_from_terms(&t));
    runner
        .run(&(poly(), poly(), poly()), |(a, b, c)| {
            prop_assert_eq!(&a + &b, &b + &a);
            prop_assert_eq!(&a * &b, &b * &a);
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
            prop_assert_eq!(&(&a + &b) - &b, a.clone());
            Ok(())
        })
        .map_err(|e| format!("ring axioms: {e}"))?;
    const Q: u64 = 1_000_003;
    runner
        .run(&(poly(), poly(), prop::array::uniform3(0u64..Q)), |(a, b, pt)| {
            let ev = |q: &Polynomial| {
                q.eval_mod(Q, |v| match v {
                    Var::X(i @ 1..=3) => Some(pt[i as usize - 1]),
                    _ => None,
                })
                .unwrap()
            };
            prop_assert_eq!(ev(&(&a + &b)), (ev(&a) + ev(&b)) % Q);
            prop_assert_eq!(ev(&(&a * &b)), ev(&a) * ev(&b) % Q);
            Ok(())
        })
        .map_err(|e| format!("evaluation: {e}"))?;
    let cfg = RankConfig::default();
    for n in 1..=6u32 {
        let xs: Vec<Polynomial> = (1..=n).map(|i| Polynomial::var(Var::X(i))).collect();
        let e: Vec<Polynomial> = (1..=n as i64).map(|k| elementary_symmetric(k, &xs).unwrap()).collect();
        ensure(x_rank(&e, n, &cfg) == n as usize, || format!("e_1..e_{n} not full rank"))?;
        for k in 1..n {
            let mut polys = e[..n as usize - 1].to_vec();
            polys.push(xs[..k as usize].iter().cloned().sum());
            ensure(x_rank(&polys, n, &cfg) == n as usize, || format!("partial sum n={n} k={k}"))?;
        }
    }
    let fifty = RankConfig { trials: 50, ..RankConfig::default() };
    let models = [three_cycle(), four_cycle(), CompartmentalModel::catenary(4, [1], [2], [3]).unwrap()];
    let mut quotients = 0;
    for m in &models {
        let cm = coefficient_map(m);
        let params = m.parameters();
        let base = RationalCoefficientMap::from(&cm);
        let direct = generic_rank(&jacobian(&cm, &params).unwrap(), &fifty);
        for i in 0..cm.len() {
            for j in (0..cm.len()).filter(|&j| j != i) {
                let q = base.quotient_transform(i, j).map_err(|e| e.to_string())?;
                ensure(q.generic_rank(&params, &fifty) == direct, || {
                    format!("quotient ({i},{j}) changes rank for {}", m.to_json())
                })?;
                quotients += 1;
            }
        }
    }
    Ok(format!("ring/eval {} cases each, e_k witnesses n<=6, {quotients} quotients at 50 points", 128))
}

fn ac10() -> Check {
    let exe = env!("CARGO_BIN_EXE_compident");
    let spec = four_cycle().to_json();
    let runs: [&[&str]; 2] = [&["analyze", &spec, "--seed", "11"], &["sweep", "--family", "cycle", "--n", "4", "--seed", "11"]];
    for args in runs {
        let once = || Command::new(exe).args(args).env_remove("COMPIDENT_SEED").output().unwrap();
        let (a, b) = (once(), once());
        ensure(a.status.success() && b.status.success(), || format!("{} failed", args[0]))?;
        ensure(a.stdout == b.stdout && a.stderr == b.stderr, || format!("{} output differs", args[0]))?;
        ensure(!a.stdout.is_empty(), || format!("{} printed nothing", args[0]))?;
    }
    Ok("analyze and sweep byte-identical".into())
}

fn main() {
    let cfg = RankConfig::default();
    let mut rows = Vec::new();
    let mut sweep_error = None;
    let started = Instant::now();
    for n in 3..=5 {
        match sweep(Family::Cycle, n, None, &cfg) {
            Ok(r) => rows.extend(r.rows),
            Err(e) => sweep_error = Some(e.to_string()),
        }
    }
    println!("cycle sweeps n=3..5: {} rows in {:.1?}", rows.len(), started.elapsed());
    let with_rows = |f: fn(&[SweepRow]) -> Check| {
        let rows = &rows;
        let err = sweep_error.clone();
        move || match &err {
            Some(e) => Err(format!("sweep failed: {e}")),
            None => f(rows),
        }
    };
    let checks: Vec<(&str, CheckFn)> = vec![
        ("AC1", Box::new(ac1)),
        ("AC2", Box::new(ac2)),
        ("AC3", Box::new(with_rows(ac3))),
        ("AC4", Box::new(with_rows(ac4))),
        ("AC5", Box::new(ac5)),
        ("AC6", Box::new(ac6)),
        ("AC7", Box::new(ac7)),
        ("AC8", Box::new(ac8)),
        ("AC9", Box::new(ac9)),
        ("AC10", Box::new(ac10)),
    ];
    let mut failed = 0;
    for (name, check) in &checks {
        let (result, t) = timed(|| catch_unwind(AssertUnwindSafe(check)));
        match result {
            Ok(Ok(detail)) => println!("{name} PASS {detail} [{t:.1?}]"),
            Ok(Err(why)) => {
                failed += 1;
                println!("{name} FAIL {why}");
            }
            Err(_) => {
                failed += 1;
                println!("{name} FAIL panicked");
            }
        }
    }
    if failed > 0 {
        println!("{failed} of {} criteria failed", checks.len());
        std::process::exit(1);
    }
    println!("all {} criteria passed", checks.len());
}
