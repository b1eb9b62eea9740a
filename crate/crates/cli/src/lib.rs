//! Command-line front end: argument parsing, subcommand dispatch and report
//! emission. `run` is the whole program; `main` only wires up stdio.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use compident_core::catenary::catenary_coefficient_map_any;
use compident_core::cycle::{classify_cycle, cycle_coefficient_map};
use compident_core::forests::{coefficient_map_via_forests, visit_incoming_forests, LeakExtendedGraph};
use compident_core::ident::{is_identifiable, RankConfig, DEFAULT_SEED, DEFAULT_TRIALS};
use compident_core::ioeq::{coefficient_map, io_equation, io_equations};
use compident_core::singular::{explore_conjecture, factored_locus, singular_locus_polynomial};
use compident_core::sweep::{build_model, combinatorial_verdict, configurations, sweep, Family, SweepReport, SweepRow};
use compident_core::{CoefficientMap, CompartmentalModel, Error, Shape};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
/// A disagreement between two routes or between the two verdicts.
pub const EXIT_DISCREPANCY: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Route {
    Determinant,
    ClosedForm,
    Forests,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FamilyArg {
    Cycle,
    Catenary,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Cycle => Family::Cycle,
            FamilyArg::Catenary => Family::Catenary,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "compident", version, about = "Structural identifiability of linear compartmental models")]
struct Cli {
    /// Output format; each subcommand has its own default.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct RankArgs {
    /// Random evaluation points per rank estimate.
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    trials: usize,
    #[arg(long, env = "COMPIDENT_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,
}

impl RankArgs {
    fn config(&self) -> RankConfig {
        RankConfig { trials: self.trials.max(1), seed: self.seed, ..RankConfig::default() }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse and validate a model spec.
    Validate { spec: String },
    /// Input-output equations.
    IoEq {
        spec: String,
        #[arg(long)]
        output: Option<usize>,
    },
    /// The coefficient map by a chosen route.
    CoeffMap {
        spec: String,
        #[arg(long, value_enum, default_value = "determinant")]
        route: Route,
        /// Compare against the determinant route; exit 2 on any mismatch.
        #[arg(long)]
        diff: bool,
    },
    /// Jacobian rank analysis.
    Analyze {
        spec: String,
        #[command(flatten)]
        rank: RankArgs,
    },
    /// Combinatorial verdict for cycles and one-input one-output bidirected trees.
    Classify { spec: String },
    /// Singular-locus polynomial of an identifiable model.
    SingularLocus {
        spec: String,
        #[command(flatten)]
        rank: RankArgs,
    },
    /// Sampled evidence for the conjectured singular-locus hyperplanes.
    Conjecture {
        spec: String,
        #[arg(long, default_value_t = 50)]
        samples: usize,
        #[command(flatten)]
        rank: RankArgs,
    },
    /// Spanning incoming forests of the leak-extended graph.
    Forests {
        spec: String,
        /// Only forests with this many edges.
        #[arg(short)]
        m: Option<usize>,
        #[arg(long)]
        emit_edges: bool,
    },
    /// Analyze every configuration of a family; exit 2 if the verdicts disagree.
    Sweep {
        #[arg(long, value_enum)]
        family: FamilyArg,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        max_leaks: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        rank: RankArgs,
    },
    /// Compare the determinant, forest and closed-form routes on a family.
    CrossCheck {
        #[arg(long, value_enum)]
        family: FamilyArg,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        max_leaks: Option<usize>,
    },
}

/// Failures surfaced as `{"error": kind, "message": ...}`.
#[derive(Debug)]
pub enum CliError {
    Core(Error),
    Io(String),
    Usage(String),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.kind(),
            CliError::Io(_) => "IoFailure",
            CliError::Usage(_) => "UsageError",
        }
    }

    pub fn message(&self) -> String {
        match self {
            CliError::Core(e) => e.to_string(),
            CliError::Io(m) | CliError::Usage(m) => m.clone(),
        }
    }

    fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            _ => EXIT_ERROR,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<compident_core::ModelError> for CliError {
    fn from(e: compident_core::ModelError) -> Self {
        CliError::Core(e.into())
    }
}

type CliResult<T> = Result<T, CliError>;

/// What a subcommand produced: the document and its exit status.
struct Outcome {
    document: String,
    code: i32,
}

impl Outcome {
    fn ok(document: String) -> Self {
        Outcome { document, code: EXIT_OK }
    }
}

/// Runs the program on `argv` (including the program name), writing the
/// document to `out` and diagnostics to `err`. Returns the exit status.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{}", e.render());
                    report_error(err, &CliError::Usage(e.kind().to_string()))
                }
            };
        }
    };
    match dispatch(&cli, err) {
        Ok(outcome) => match out.write_all(outcome.document.as_bytes()) {
            Ok(()) => outcome.code,
            Err(e) => report_error(err, &CliError::from(e)),
        },
        Err(e) => report_error(err, &e),
    }
}

fn report_error(err: &mut dyn Write, e: &CliError) -> i32 {
    let doc = json!({ "error": e.kind(), "message": e.message() });
    let _ = writeln!(err, "{doc}");
    e.exit_code()
}

fn read_spec(spec: &str) -> CliResult<CompartmentalModel> {
    let text = if spec.trim_start().starts_with('{') {
        spec.to_string()
    } else if spec == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        s
    } else {
        std::fs::read_to_string(spec).map_err(|e| CliError::Io(format!("{spec}: {e}")))?
    };
    Ok(CompartmentalModel::from_json(&text)?)
}

fn to_json(value: &impl Serialize) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn unsupported(format: Format, command: &str) -> CliError {
    CliError::Usage(format!("{command} does not support --format {format:?}").to_lowercase())
}

fn dispatch(cli: &Cli, err: &mut dyn Write) -> CliResult<Outcome> {
    let fmt = |default: Format| cli.format.unwrap_or(default);
    match &cli.command {
        Command::Validate { spec } => validate(&read_spec(spec)?, fmt(Format::Json)),
        Command::IoEq { spec, output } => io_eq(&read_spec(spec)?, *output, fmt(Format::Text)),
        Command::CoeffMap { spec, route, diff } => {
            coeff_map_cmd(&read_spec(spec)?, *route, *diff, fmt(Format::Json))
        }
        Command::Analyze { spec, rank } => analyze(&read_spec(spec)?, &rank.config(), fmt(Format::Json)),
        Command::Classify { spec } => classify(&read_spec(spec)?, fmt(Format::Json)),
        Command::SingularLocus { spec, rank } => {
            singular(&read_spec(spec)?, &rank.config(), fmt(Format::Json))
        }
        Command::Conjecture { spec, samples, rank } => {
            conjecture(&read_spec(spec)?, *samples, &rank.config(), fmt(Format::Csv))
        }
        Command::Forests { spec, m, emit_edges } => {
            forests(&read_spec(spec)?, *m, *emit_edges, fmt(Format::Text))
        }
        Command::Sweep { family, n, max_leaks, out, rank } => {
            let report = sweep((*family).into(), *n, *max_leaks, &rank.config())?;
            let format = fmt(Format::Csv);
            if format == Format::Text {
                return Err(unsupported(format, "sweep"));
            }
            let doc = emit_report(&report, format)?;
            let _ = writeln!(
                err,
                "# seed={} prime={} trials={} version={} rows={}",
                report.seed,
                report.prime,
                report.trials,
                report.version,
                report.rows.len()
            );
            let code = if report.disagreements().next().is_some() {
                for row in report.disagreements() {
                    let _ = writeln!(err, "DISCREPANCY {}", row.model.to_json());
                }
                EXIT_DISCREPANCY
            } else {
                EXIT_OK
            };
            match out {
                Some(path) => {
                    std::fs::write(path, doc).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
                    Ok(Outcome { document: String::new(), code })
                }
                None => Ok(Outcome { document: doc, code }),
            }
        }
        Command::CrossCheck { family, n, max_leaks } => {
            cross_check((*family).into(), *n, *max_leaks, fmt(Format::Text))
        }
    }
}

fn join<T: ToString>(items: impl IntoIterator<Item = T>) -> String {
    items.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join(";")
}

fn validate(m: &CompartmentalModel, format: Format) -> CliResult<Outcome> {
    let shape = m.shape();
    let params: Vec<String> = m.parameters().iter().map(ToString::to_string).collect();
    Ok(Outcome::ok(match format {
        Format::Json => to_json(&json!({
            "valid": true,
            "model": m.to_spec(),
            "shape": shape.shape,
            "strongly_connected": shape.strongly_connected,
            "parameters": params,
        })),
        Format::Text => format!(
            "valid: n={} shape={} strongly_connected={} parameters={}\n",
            m.n(),
            shape.shape,
            shape.strongly_connected,
            params.join(",")
        ),
        Format::Csv => return Err(unsupported(format, "validate")),
    }))
}

fn io_eq(m: &CompartmentalModel, output: Option<usize>, format: Format) -> CliResult<Outcome> {
    let eqs = match output {
        Some(i) => vec![io_equation(m, i)?],
        None => io_equations(m),
    };
    Ok(Outcome::ok(match format {
        Format::Json => to_json(&eqs),
        Format::Text => eqs.iter().map(|e| format!("{e}\n")).collect(),
        Format::Csv => return Err(unsupported(format, "io-eq")),
    }))
}

/// The closed-form map where one applies: one-input one-output cycles and catenaries.
pub fn closed_form_map(m: &CompartmentalModel) -> Result<CoefficientMap, Error> {
    match m.shape().shape {
        Shape::DirectedCycle => cycle_coefficient_map(m),
        Shape::Catenary => catenary_coefficient_map_any(m),
        other => Err(Error::NotApplicable(format!("no closed form for shape {other}"))),
    }
}

pub fn route_map(m: &CompartmentalModel, route: Route) -> Result<CoefficientMap, Error> {
    match route {
        Route::Determinant => Ok(coefficient_map(m)),
        Route::Forests => Ok(coefficient_map_via_forests(m)),
        Route::ClosedForm => closed_form_map(m),
    }
}

fn opt(p: &Option<compident_core::Polynomial>) -> String {
    p.as_ref().map_or("-".into(), ToString::to_string)
}

fn coeff_map_cmd(m: &CompartmentalModel, route: Route, diff: bool, format: Format) -> CliResult<Outcome> {
    let cm = route_map(m, route)?;
    let mismatches = if diff { coefficient_map(m).diff(&cm) } else { Vec::new() };
    let code = if mismatches.is_empty() { EXIT_OK } else { EXIT_DISCREPANCY };
    let document = match format {
        Format::Json if diff => {
            let rows: Vec<_> = mismatches
                .iter()
                .map(|(l, a, b)| json!({ "label": l, "determinant": a, "route": b }))
                .collect();
            to_json(&json!({ "coefficients": cm, "mismatches": rows }))
        }
        Format::Json => to_json(&cm),
        Format::Text => {
            let mut s = String::new();
            for (label, p) in cm.entries() {
                let _ = writeln!(s, "{label}: {p}");
            }
            for (l, a, b) in &mismatches {
                let _ = writeln!(s, "MISMATCH {l}: determinant {} vs route {}", opt(a), opt(b));
            }
            s
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["label", "polynomial"]).map_err(csv_err)?;
            for (label, p) in cm.entries() {
                w.write_record([label.to_string(), p.to_string()]).map_err(csv_err)?;
            }
            finish_csv(w)?
        }
    };
    Ok(Outcome { document, code })
}

fn analyze(m: &CompartmentalModel, cfg: &RankConfig, format: Format) -> CliResult<Outcome> {
    let a = is_identifiable(m, cfg)?;
    Ok(Outcome::ok(match format {
        Format::Json => to_json(&a),
        Format::Text => {
            let mut s = format!("{} (rank {} of {})\n", a.verdict(), a.generic_rank, a.full_rank_target);
            for (p, status) in &a.per_param {
                let _ = writeln!(s, "{p}: {}", status.as_str());
            }
            s
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["parameter", "status"]).map_err(csv_err)?;
            for (p, status) in &a.per_param {
                w.write_record([p.to_string(), status.as_str().to_string()]).map_err(csv_err)?;
            }
            finish_csv(w)?
        }
    }))
}

fn classify(m: &CompartmentalModel, format: Format) -> CliResult<Outcome> {
    let (value, text) = match m.shape().shape {
        Shape::DirectedCycle => {
            let c = classify_cycle(m)?;
            let text = match c.witness {
                Some(w) => format!("{} ({w})", c.verdict),
                None => c.verdict.to_string(),
            };
            (serde_json::to_value(c).expect("serializable"), text)
        }
        _ => match combinatorial_verdict(m)? {
            Some(v) => (json!({ "law": "bidirected_tree", "verdict": v }), v.to_string()),
            None => {
                return Err(Error::NotApplicable(
                    "no combinatorial classification for this model".into(),
                )
                .into())
            }
        },
    };
    Ok(Outcome::ok(match format {
        Format::Json => to_json(&value),
        Format::Text => format!("{text}\n"),
        Format::Csv => return Err(unsupported(format, "classify")),
    }))
}

fn singular(m: &CompartmentalModel, cfg: &RankConfig, format: Format) -> CliResult<Outcome> {
    let poly = singular_locus_polynomial(m, cfg)?;
    let factored = factored_locus(m, &poly);
    Ok(Outcome::ok(match format {
        Format::Json => to_json(&json!({
            "polynomial": poly,
            "factored": factored,
            "square": coefficient_map(m).len() == m.parameter_count(),
        })),
        Format::Text => format!("{}\n", factored.unwrap_or_else(|| poly.to_string())),
        Format::Csv => return Err(unsupported(format, "singular-locus")),
    }))
}

fn conjecture(m: &CompartmentalModel, samples: usize, cfg: &RankConfig, format: Format) -> CliResult<Outcome> {
    let rows = explore_conjecture(m, samples, cfg)?;
    Ok(Outcome::ok(match format {
        Format::Json => to_json(&rows),
        Format::Csv | Format::Text => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["a", "leak", "hyperplane", "samples", "deficient", "supported"])
                .map_err(csv_err)?;
            for r in &rows {
                w.write_record([
                    r.a.to_string(),
                    r.leak.to_string(),
                    r.hyperplane.to_string(),
                    r.evidence.samples.to_string(),
                    r.evidence.deficient.to_string(),
                    r.evidence.contained.to_string(),
                ])
                .map_err(csv_err)?;
            }
            finish_csv(w)?
        }
    }))
}

fn forests(m: &CompartmentalModel, only: Option<usize>, emit_edges: bool, format: Format) -> CliResult<Outcome> {
    let g = LeakExtendedGraph::new(m);
    let sizes: Vec<usize> = match only {
        Some(k) => vec![k],
        None => (0..=m.n()).collect(),
    };
    let mut counts = Vec::new();
    let mut listed: Vec<(usize, Vec<String>)> = Vec::new();
    for &k in &sizes {
        let mut count = 0usize;
        visit_incoming_forests(&g, k, None, |f| {
            count += 1;
            if emit_edges {
                let edges = f.iter().map(|e| format!("{}->{}", e.from, e.to)).collect::<Vec<_>>();
                listed.push((k, edges));
            }
        });
        counts.push((k, count));
    }
    Ok(Outcome::ok(match format {
        Format::Json => {
            let c: Vec<_> = counts.iter().map(|(k, c)| json!({ "m": k, "count": c })).collect();
            if emit_edges {
                let f: Vec<_> = listed.iter().map(|(k, e)| json!({ "m": k, "edges": e })).collect();
                to_json(&json!({ "counts": c, "forests": f }))
            } else {
                to_json(&json!({ "counts": c }))
            }
        }
        Format::Text => {
            let mut s = String::new();
            for (k, c) in &counts {
                let _ = writeln!(s, "m={k}: {c}");
            }
            for (k, e) in &listed {
                let _ = writeln!(s, "[{k}] {}", e.join(" "));
            }
            s
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            if emit_edges {
                w.write_record(["m", "edges"]).map_err(csv_err)?;
                for (k, e) in &listed {
                    w.write_record([k.to_string(), e.join(" ")]).map_err(csv_err)?;
                }
            } else {
                w.write_record(["m", "count"]).map_err(csv_err)?;
                for (k, c) in &counts {
                    w.write_record([k.to_string(), c.to_string()]).map_err(csv_err)?;
                }
            }
            finish_csv(w)?
        }
    }))
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Io(e.to_string())
}

fn finish_csv(w: csv::Writer<Vec<u8>>) -> CliResult<String> {
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
}

pub const REPORT_COLUMNS: [&str; 11] = [
    "n",
    "edges",
    "in",
    "out",
    "leak",
    "shape",
    "verdict_comb",
    "verdict_rank",
    "params_local",
    "params_non",
    "agree",
];

fn row_fields(r: &SweepRow) -> [String; 11] {
    let m = &r.model;
    [
        m.n().to_string(),
        join(m.edges().iter().map(|(a, b)| format!("{a}>{b}"))),
        join(m.inputs()),
        join(m.outputs()),
        join(m.leaks()),
        r.shape.to_string(),
        r.verdict_comb.map_or("na".to_string(), |v| v.to_string()),
        r.verdict_rank.to_string(),
        join(&r.params_local),
        join(&r.params_non),
        r.agree.to_string(),
    ]
}

/// The report as CSV (header plus one line per row) or JSON (metadata plus rows).
pub fn emit_report(report: &SweepReport, format: Format) -> CliResult<String> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(REPORT_COLUMNS).map_err(csv_err)?;
            for r in &report.rows {
                w.write_record(row_fields(r)).map_err(csv_err)?;
            }
            finish_csv(w)
        }
        Format::Json => {
            let rows: Vec<serde_json::Value> = report
                .rows
                .iter()
                .map(|r| {
                    let m = &r.model;
                    json!({
                        "n": m.n(),
                        "edges": m.to_spec().edges,
                        "in": m.inputs(),
                        "out": m.outputs(),
                        "leak": m.leaks(),
                        "shape": r.shape,
                        "verdict_comb": r.verdict_comb.map_or("na".to_string(), |v| v.to_string()),
                        "verdict_rank": r.verdict_rank,
                        "params_local": r.params_local.iter().map(ToString::to_string).collect::<Vec<_>>(),
                        "params_non": r.params_non.iter().map(ToString::to_string).collect::<Vec<_>>(),
                        "agree": r.agree,
                    })
                })
                .collect();
            Ok(to_json(&json!({
                "metadata": {
                    "seed": report.seed,
                    "prime": report.prime,
                    "trials": report.trials,
                    "version": report.version,
                },
                "rows": rows,
            })))
        }
        Format::Text => Err(unsupported(format, "report")),
    }
}

/// One model where two routes disagree.
#[derive(Debug, Clone, Serialize)]
pub struct RouteDiscrepancy {
    pub model: String,
    pub route: &'static str,
    pub label: String,
    pub determinant: Option<String>,
    pub other: Option<String>,
}

/// Compares the forest route (always) and the closed form (where it applies)
/// against the determinant route.
pub fn cross_check_model(m: &CompartmentalModel) -> Vec<RouteDiscrepancy> {
    let det = coefficient_map(m);
    let mut out = Vec::new();
    let mut push = |route: &'static str, other: &CoefficientMap| {
        for (l, a, b) in det.diff(other) {
            out.push(RouteDiscrepancy {
                model: m.to_json(),
                route,
                label: l.to_string(),
                determinant: a.map(|p| p.to_string()),
                other: b.map(|p| p.to_string()),
            });
        }
    };
    push("forests", &coefficient_map_via_forests(m));
    if m.inputs().len() == 1 && m.outputs().len() == 1 {
        if let Ok(closed) = closed_form_map(m) {
            push("closed-form", &closed);
        }
    }
    out
}

fn cross_check(family: Family, n: usize, max_leaks: Option<usize>, format: Format) -> CliResult<Outcome> {
    let mut checked = 0usize;
    let mut closed = 0usize;
    let mut found = Vec::new();
    for c in configurations(family, n, max_leaks)? {
        let m = build_model(family, n, &c)?;
        checked += 1;
        if m.inputs().len() == 1 && m.outputs().len() == 1 {
            closed += 1;
        }
        found.extend(cross_check_model(&m));
    }
    let code = if found.is_empty() { EXIT_OK } else { EXIT_DISCREPANCY };
    let document = match format {
        Format::Json => to_json(&json!({
            "family": family.as_str(),
            "n": n,
            "models": checked,
            "closed_form_models": closed,
            "discrepancies": found,
        })),
        Format::Text => {
            let mut s = format!(
                "{family} n={n}: {checked} models, {closed} with closed form, {} discrepancies\n",
                found.len()
            );
            for d in &found {
                let _ = writeln!(
                    s,
                    "{} {} {}: {} vs {}",
                    d.model,
                    d.route,
                    d.label,
                    d.determinant.as_deref().unwrap_or("-"),
                    d.other.as_deref().unwrap_or("-")
                );
            }
            s
        }
        Format::Csv => return Err(unsupported(format, "cross-check")),
    };
    Ok(Outcome { document, code })
}

