//! `eschubert`: class tables, verification campaigns, the reference corpus
//! and coordinate charts from the command line.

mod render;

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use eschubert_core::chart::Chart;
use eschubert_core::classes::bs_table;
use eschubert_core::corpus::{self, builtin_entries, cross_check, parse_corpus, CorpusEntry};
use eschubert_core::elliptic::{
    retry_singular, sample_point, Backend, ComplexBackend, ExactBackend, Var, DEFAULT_Q, DEFAULT_QORDER,
};
use eschubert_core::verify::{self, point_rng, CampaignKind, CampaignReport};
use eschubert_core::weyl::parse_word;
use eschubert_core::{Error, Result, RootSystem, WeylGroup};
use num_complex::Complex64;
use serde_json::{json, Value as Json};

#[derive(Parser)]
#[command(name = "eschubert", version, about = "Local elliptic classes of Schubert varieties and their dual symmetry")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the classes of one Schubert variety at every fixed point.
    Table(TableArgs),
    /// Run a residual campaign over every pair of Weyl group elements.
    Verify(VerifyArgs),
    /// Check the built-in (or given) reference tables against the engine.
    Corpus(CorpusArgs),
    /// Show a coordinate chart and its duality substitution.
    Chart(ChartArgs),
}

#[derive(Args, Clone)]
struct EngineArgs {
    /// Arithmetic: exact truncated q-series or complex floating point.
    #[arg(long, value_enum, default_value_t = BackendKind::Exact)]
    backend: BackendKind,
    /// Truncation order of the exact backend.
    #[arg(long, env = "ESCHUBERT_QORDER", default_value_t = DEFAULT_QORDER)]
    qorder: usize,
    /// Real nome of the complex backend.
    #[arg(long, default_value_t = DEFAULT_Q, allow_negative_numbers = true)]
    q: f64,
    /// Seed for the random evaluation points.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct TableArgs {
    /// Cartan type, e.g. A2, B2, G2.
    #[arg(long = "type")]
    type_label: String,
    /// Word of simple reflections, `1,2`, `12`, `id`, or `w0` for the longest element.
    #[arg(long, default_value = "id")]
    word: String,
    /// Sample canonical variables directly even when a chart exists.
    #[arg(long)]
    no_chart: bool,
    #[command(flatten)]
    engine: EngineArgs,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(value_enum)]
    kind: KindArg,
    #[arg(long = "type")]
    type_label: String,
    /// Random points per campaign.
    #[arg(long, default_value_t = 3)]
    points: usize,
    #[command(flatten)]
    engine: EngineArgs,
}

#[derive(Args)]
struct CorpusArgs {
    /// Corpus files to check instead of the built-in tables.
    #[arg(long = "file")]
    files: Vec<PathBuf>,
    /// Random points per entry.
    #[arg(long, default_value_t = 3)]
    points: usize,
    #[command(flatten)]
    engine: EngineArgs,
}

#[derive(Args)]
struct ChartArgs {
    #[arg(long = "type")]
    type_label: String,
    #[arg(long, value_enum, default_value_t = Format::Pretty)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BackendKind {
    Exact,
    Complex,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Pretty,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Duality,
    Recursions,
    Normalization,
    DoubleDual,
}

impl From<KindArg> for CampaignKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Duality => CampaignKind::Duality,
            KindArg::Recursions => CampaignKind::Recursions,
            KindArg::Normalization => CampaignKind::Normalization,
            KindArg::DoubleDual => CampaignKind::DoubleDual,
        }
    }
}

/// What a command produced: text for stdout, failure lines for stderr.
struct Outcome {
    stdout: String,
    failures: Vec<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Table(a) => engine(&a.engine).and_then(|e| e.table(a)),
        Command::Verify(a) => engine(&a.engine).and_then(|e| e.verify(a)),
        Command::Corpus(a) => engine(&a.engine).and_then(|e| e.corpus(a)),
        Command::Chart(a) => chart_cmd(a),
    };
    match result {
        Ok(out) => {
            print!("{}", out.stdout);
            if out.failures.is_empty() {
                ExitCode::SUCCESS
            } else {
                eprintln!("{} check(s) failed:", out.failures.len());
                for f in &out.failures {
                    eprintln!("FAIL {f}");
                }
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

/// Object-safe face of a backend, so commands are written once for both.
trait Engine {
    fn table(&self, a: &TableArgs) -> Result<Outcome>;
    fn verify(&self, a: &VerifyArgs) -> Result<Outcome>;
    fn corpus(&self, a: &CorpusArgs) -> Result<Outcome>;
}

struct Using<B>(B);

impl<B: Backend> Engine for Using<B> {
    fn table(&self, a: &TableArgs) -> Result<Outcome> {
        run_table(&self.0, a)
    }

    fn verify(&self, a: &VerifyArgs) -> Result<Outcome> {
        run_verify(&self.0, a)
    }

    fn corpus(&self, a: &CorpusArgs) -> Result<Outcome> {
        run_corpus(&self.0, a)
    }
}

fn engine(args: &EngineArgs) -> Result<Box<dyn Engine>> {
    Ok(match args.backend {
        BackendKind::Exact => Box::new(Using(ExactBackend::new(args.qorder)?)),
        BackendKind::Complex => Box::new(Using(ComplexBackend::new(Complex64::new(args.q, 0.0))?)),
    })
}

fn ok(stdout: String) -> Result<Outcome> {
    Ok(Outcome { stdout, failures: Vec::new() })
}

fn parse_table_word(weyl: &WeylGroup, word: &str) -> Result<Vec<usize>> {
    let letters = match word.trim() {
        "w0" | "longest" => weyl.reduced_word(weyl.longest()),
        w => parse_word(w)?,
    };
    if let Some(&s) = letters.iter().find(|&&s| s >= weyl.rank()) {
        return Err(Error::IndexOutOfRange { index: s + 1, rank: weyl.rank() });
    }
    Ok(letters)
}

fn run_table<B: Backend>(b: &B, a: &TableArgs) -> Result<Outcome> {
    let rs = RootSystem::from_label_str(&a.type_label)?;
    let weyl = WeylGroup::new(&rs)?;
    let word = parse_table_word(&weyl, &a.word)?;
    let chart = if a.no_chart { None } else { Chart::for_label(rs.label()) };
    let mut rng = point_rng(a.engine.seed, 0);
    let (table, point, chart_values) = retry_singular(&mut rng, |rng| {
        let (point, chart_values) = match &chart {
            Some(c) => {
                let values = c.sample(b, rng);
                (c.to_point(b, &values)?, Some(values))
            }
            None => (sample_point(b, rs.rank(), rng), None),
        };
        Ok((bs_table(b, &weyl, &word, &point)?, point, chart_values))
    })?;
    let mut doc = verify::table_document(b, &weyl, &table, &point);
    let variables: Vec<String> = (0..point.values().len()).map(|i| Var::from_slot(i, rs.rank()).name()).collect();
    doc["variables"] = json!(variables);
    if let (Some(c), Some(values)) = (&chart, &chart_values) {
        let coords: serde_json::Map<String, Json> =
            c.var_names().into_iter().zip(values).map(|(n, v)| (n, b.value_to_json(v))).collect();
        doc["chart"] = json!({ "name": c.name(), "values": coords });
    }
    let entries = doc["entries"].as_array().cloned().unwrap_or_default();
    let stdout = match a.engine.format {
        Format::Json => serde_json::to_string_pretty(&doc).expect("serializable") + "\n",
        Format::Csv => {
            let rows = entries.iter().map(|e| vec![e["sigma_word"].as_str().unwrap_or("").to_string(), render::scalar(&e["value"])]);
            render::csv(&["sigma_word", "value"], rows)
        }
        Format::Pretty => {
            let mut s = format!("{} word {} ({})\n", doc["type"].as_str().unwrap_or(""), doc["word"].as_str().unwrap_or(""), backend_note(b));
            if let (Some(c), Some(values)) = (&chart, &chart_values) {
                let parts: Vec<String> = c
                    .var_names()
                    .iter()
                    .zip(values)
                    .map(|(k, v)| format!("{k}={}", render::value(&b.value_to_json(v))))
                    .collect();
                let _ = writeln!(s, "chart {}: {}", c.name(), parts.join(" "));
            }
            let parts: Vec<String> = variables
                .iter()
                .zip(doc["point"].as_array().into_iter().flatten())
                .map(|(k, v)| format!("{k}={}", render::value(v)))
                .collect();
            let _ = writeln!(s, "point: {}", parts.join(" "));
            let width = entries.iter().map(|e| e["sigma_word"].as_str().unwrap_or("").len()).max().unwrap_or(0);
            for e in &entries {
                let _ = writeln!(s, "  {:>width$}  {}", e["sigma_word"].as_str().unwrap_or(""), render::scalar(&e["value"]));
            }
            s
        }
    };
    ok(stdout)
}

fn backend_note<B: Backend>(b: &B) -> String {
    match b.context() {
        eschubert_core::elliptic::QContext::ExactSeries { order } => format!("exact, q-order {order}"),
        eschubert_core::elliptic::QContext::Complex { q, .. } => format!("complex, q = {}", q[0]),
    }
}

fn run_verify<B: Backend>(b: &B, a: &VerifyArgs) -> Result<Outcome> {
    if a.points == 0 {
        return Err(Error::InvalidContext("at least one point is needed".into()));
    }
    let rs = RootSystem::from_label_str(&a.type_label)?;
    let kind: CampaignKind = a.kind.into();
    let report = verify::run(kind, b, &rs, a.points, a.engine.seed)?;
    let failures = report
        .failures()
        .map(|r| format!("{} {} omega={} sigma={} point={}", r.type_label, r.check, r.omega_word, r.sigma_word, r.point))
        .collect();
    let stdout = match a.engine.format {
        Format::Json => report.to_json_lines(),
        Format::Csv => verify_csv(&report),
        Format::Pretty => {
            let dual = report.records.first().and_then(|r| r.dual_type.clone());
            let target = match dual {
                Some(d) => format!("{} / {d}", rs.label()),
                None => rs.label().to_string(),
            };
            format!(
                "{} {target} ({}): {}/{} checks pass over {} pairs at {} points\n",
                kind.name(),
                backend_note(b),
                report.passed(),
                report.total(),
                report.pairs(),
                a.points
            )
        }
    };
    Ok(Outcome { stdout, failures })
}

fn verify_csv(report: &CampaignReport) -> String {
    let rows = report.records.iter().map(|r| {
        vec![
            r.type_label.clone(),
            r.check.clone(),
            r.omega_word.clone(),
            r.sigma_word.clone(),
            r.point.to_string(),
            r.pass.to_string(),
            render::scalar(&r.residual),
        ]
    });
    render::csv(&["type", "check", "omega_word", "sigma_word", "point", "pass", "residual"], rows)
}

fn load_corpus(files: &[PathBuf]) -> Result<Vec<CorpusEntry>> {
    if files.is_empty() {
        return builtin_entries();
    }
    let mut all = Vec::new();
    for f in files {
        let text = std::fs::read_to_string(f).map_err(|e| Error::Parse(format!("{}: {e}", f.display())))?;
        let name = f.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        all.extend(parse_corpus(&text, &name)?);
    }
    Ok(all)
}

fn run_corpus<B: Backend>(b: &B, a: &CorpusArgs) -> Result<Outcome> {
    if a.points == 0 {
        return Err(Error::InvalidContext("at least one point is needed".into()));
    }
    let entries = load_corpus(&a.files)?;
    let mut records = Vec::new();
    for (e, checks) in entries.iter().zip(corpus::check_entries(b, &entries, a.points, a.engine.seed)?) {
        for c in checks {
            records.push(json!({
                "check": "entry",
                "source": e.source,
                "type": e.label.to_string(),
                "omega_word": e.omega_word,
                "sigma_word": e.sigma_word,
                "point": c.point,
                "backend": b.name(),
                "engine": b.scalar_to_json(&c.engine),
                "expected": b.scalar_to_json(&c.expected),
                "pass": c.pass,
            }));
        }
    }
    // Each type against its dual, once per unordered pair.
    let mut labels = Vec::new();
    for e in &entries {
        if !labels.contains(&e.label) {
            labels.push(e.label);
        }
    }
    for (k, &label) in labels.iter().enumerate() {
        let dual = label.dual();
        if !labels.contains(&dual) || label.to_string() > dual.to_string() {
            continue;
        }
        let of = |l| entries.iter().filter(|e| e.label == l).cloned().collect::<Vec<_>>();
        let (g, gv) = (of(label), of(dual));
        let mut rng = point_rng(a.engine.seed, 1_000_000 + k);
        for c in cross_check(b, &g, &gv, a.points, &mut rng)? {
            records.push(json!({
                "check": "cross-table",
                "source": g[c.entry].source,
                "dual_source": gv[c.dual_entry].source,
                "type": label.to_string(),
                "dual_type": dual.to_string(),
                "omega_word": g[c.entry].omega_word,
                "sigma_word": g[c.entry].sigma_word,
                "point": c.point,
                "backend": b.name(),
                "engine": b.scalar_to_json(&c.lhs),
                "expected": b.scalar_to_json(&c.rhs),
                "pass": c.pass,
            }));
        }
    }
    let failures: Vec<String> = records
        .iter()
        .filter(|r| r["pass"] == false)
        .map(|r| {
            let dual = r.get("dual_source").and_then(Json::as_str).map(|d| format!(" vs {d}")).unwrap_or_default();
            format!("{} {}{dual} point={}", r["check"].as_str().unwrap_or(""), r["source"].as_str().unwrap_or(""), r["point"])
        })
        .collect();
    let stdout = match a.engine.format {
        Format::Json => records.iter().map(|r| r.to_string() + "\n").collect(),
        Format::Csv => {
            let header = ["check", "source", "type", "omega_word", "sigma_word", "point", "pass"];
            let rows = records.iter().map(|r| {
                header.iter().map(|&k| r[k].as_str().map(str::to_string).unwrap_or_else(|| r[k].to_string())).collect()
            });
            render::csv(&header, rows)
        }
        Format::Pretty => {
            let count = |check: &str| {
                let of: Vec<&Json> = records.iter().filter(|r| r["check"] == check).collect();
                (of.iter().filter(|r| r["pass"] == true).count(), of.len())
            };
            let (ep, et) = count("entry");
            let (cp, ct) = count("cross-table");
            format!(
                "corpus ({}): {} entries, {ep}/{et} entry checks pass, {cp}/{ct} cross-table checks pass\n",
                backend_note(b),
                entries.len()
            )
        }
    };
    Ok(Outcome { stdout, failures })
}

fn chart_cmd(a: &ChartArgs) -> Result<Outcome> {
    let rs = RootSystem::from_label_str(&a.type_label)?;
    let label = rs.label();
    let chart = Chart::for_label(label)
        .ok_or_else(|| Error::InvalidLabel(label.to_string(), "no coordinate chart".into()))?;
    let r = label.rank();
    let canonical: Vec<(String, String)> = (0..2 * r + 1)
        .map(|slot| {
            let v = Var::from_slot(slot, r);
            (v.name(), chart.format_monomial(chart.canonical_image(v)))
        })
        .collect();
    let dual = Chart::for_label(label.dual());
    let substitution: Option<Vec<(String, String)>> = match &dual {
        Some(d) => Some(
            chart
                .var_names()
                .into_iter()
                .zip(chart.dual_substitution(d)?)
                .map(|(n, m)| (n, d.format_monomial(&m)))
                .collect(),
        ),
        None => None,
    };
    let stdout = match a.format {
        Format::Json => {
            let obj = |pairs: &[(String, String)]| -> Json {
                Json::Object(pairs.iter().map(|(k, v)| (k.clone(), json!(v))).collect())
            };
            let mut doc = json!({
                "type": label.to_string(),
                "chart": chart.name(),
                "variables": chart.var_names(),
                "canonical": obj(&canonical),
            });
            if let (Some(d), Some(sub)) = (&dual, &substitution) {
                doc["dual_chart"] = json!(d.name());
                doc["dual_substitution"] = obj(sub);
            }
            serde_json::to_string_pretty(&doc).expect("serializable") + "\n"
        }
        Format::Csv => {
            let rows = canonical
                .iter()
                .map(|(k, v)| vec!["canonical".to_string(), k.clone(), v.clone()])
                .chain(substitution.iter().flatten().map(|(k, v)| vec!["dual".to_string(), k.clone(), v.clone()]));
            render::csv(&["kind", "variable", "monomial"], rows)
        }
        Format::Pretty => {
            let mut s = format!("chart {} for {label}: {}\n", chart.name(), chart.var_names().join(", "));
            for (k, v) in &canonical {
                let _ = writeln!(s, "  {k} = {v}");
            }
            if let (Some(d), Some(sub)) = (&dual, &substitution) {
                let _ = writeln!(s, "duality substitution, right sides in {} coordinates:", d.name());
                for (k, v) in sub {
                    let _ = writeln!(s, "  {k} := {v}");
                }
            }
            s
        }
    };
    ok(stdout)
}
