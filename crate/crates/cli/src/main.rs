use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use homaloidal::catalog;
use homaloidal::graphs::{Graph, GraphSpec};
use homaloidal::mldeg::{self, Gaussian, TrialConfig, DEFAULT_PRIMES};
use homaloidal::models::{chordal_phi, dag_phi, ExplicitModelSpec, ModelFormula};
use homaloidal::numeric::{self, Geometry, LinearSpan, NumSymMatrix};
use homaloidal::pde::{self, Convention};
use homaloidal::poly::{parse, parse_rational, render_poly, render_rational, VarTable};
use homaloidal::symcalc::{det_exact, SymMatrix};
use homaloidal::Error;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "homaloidal", version, about = "Gaussian MLEs of ML degree one")]
struct Cli {
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Trials {
    /// Comma-separated odd primes below 2^32.
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_PRIMES.to_vec())]
    primes: Vec<u64>,
    /// Seeds per prime.
    #[arg(long, default_value_t = 3)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl Trials {
    fn config(&self) -> TrialConfig {
        TrialConfig::new(self.primes.clone(), self.trials, self.seed)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Checks Φ = F∘(−∇ log Φ) exactly.
    CheckPde {
        /// `F` in x1..xn, or in k11, k12, ... with --sym (`det` for the determinant).
        #[arg(long = "F", allow_hyphen_values = true)]
        f: String,
        /// `Φ` in u1..un, or in s11, s12, ... with --sym.
        #[arg(long, allow_hyphen_values = true)]
        phi: String,
        /// Symmetric convention on m × m matrices.
        #[arg(long)]
        sym: Option<usize>,
        /// Number of variables in the generic convention (default: largest index seen).
        #[arg(long)]
        n: Option<usize>,
    },
    /// Closed-form MLE of a chordal graph or a DAG.
    Mle {
        /// Graph JSON file or inline text `{"m": .., "edges": [[i, j], ..], "directed": ..}`.
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        directed: bool,
    },
    /// Certificate for the degree of the gradient map of a form.
    HomaloidalDegree {
        #[arg(long = "F", allow_hyphen_values = true)]
        f: String,
        #[arg(long)]
        n: Option<usize>,
        #[command(flatten)]
        trials: Trials,
    },
    /// ML degree of a hypersurface h(K) = 0 in m × m concentration matrices.
    MlDegree {
        #[arg(long, allow_hyphen_values = true)]
        h: String,
        #[arg(long)]
        m: usize,
        #[command(flatten)]
        trials: Trials,
    },
    /// ED degree of a linear space against x1^2 + ... + xn^2.
    EdDegree {
        /// JSON rows of basis vectors; entries are numbers or strings like "1/2 + i".
        #[arg(long)]
        basis: String,
        #[command(flatten)]
        trials: Trials,
    },
    /// Evaluates the MLE at a sample covariance.
    Estimate {
        /// Graph JSON, explicit model JSON, or `{"row": id}`; a file or inline text.
        #[arg(long)]
        model: PathBuf,
        /// CSV samples, one row per observation.
        #[arg(long, conflicts_with = "cov", required_unless_present = "cov")]
        data: Option<PathBuf>,
        /// Covariance as a JSON array of rows; a file or inline text.
        #[arg(long)]
        cov: Option<PathBuf>,
        /// Also run the iterative optimizer when the model is a linear span.
        #[arg(long)]
        verify: bool,
    },
    /// Rebuilds the catalogued models and reports pass/fail per row.
    Examples {
        #[arg(long)]
        row: Option<String>,
        #[arg(long)]
        json: bool,
    },
}

enum Failure {
    Negative(String),
    Usage(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NotChordal(c) => {
                let cyc: Vec<String> = c.iter().map(|v| (v + 1).to_string()).collect();
                Failure::Negative(format!("graph is not chordal; induced cycle {}", cyc.join(" - ")))
            }
            Error::NearSingular(_)
            | Error::NotPositiveDefinite
            | Error::Singular(_)
            | Error::PdeFailure(_)
            | Error::NotZeroDimensional
            | Error::NonConvergence { .. }
            | Error::Tangency(_)
            | Error::Multiplicity(_)
            | Error::Invariant(_) => Failure::Negative(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

/// Report plus whether the mathematical question was answered positively.
struct Outcome {
    report: Value,
    positive: bool,
}

type Run = std::result::Result<Outcome, Failure>;

fn read(path: &Path) -> std::result::Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

/// A JSON file, or inline JSON when the argument starts with `{` or `[`.
fn json_file(path: &Path) -> std::result::Result<Value, Failure> {
    let arg = path.to_string_lossy();
    let text = if arg.trim_start().starts_with(['{', '[']) { arg.into_owned() } else { read(path)? };
    serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

/// Largest `k` with `prefix` immediately followed by `k` in `text`,
/// ignoring hits inside longer identifiers.
fn max_index(text: &str, prefix: char) -> usize {
    let b = text.as_bytes();
    let mut best = 0;
    for (i, c) in text.char_indices() {
        if c != prefix || (i > 0 && (b[i - 1] as char).is_ascii_alphanumeric()) {
            continue;
        }
        let digits: String = text[i + 1..].chars().take_while(|d| d.is_ascii_digit()).collect();
        if let Ok(k) = digits.parse::<usize>() {
            best = best.max(k);
        }
    }
    best
}

fn generic_n(n: Option<usize>, texts: &[(&str, char)]) -> std::result::Result<usize, Failure> {
    let n = n.unwrap_or_else(|| texts.iter().map(|(t, p)| max_index(t, *p)).max().unwrap_or(0));
    if n == 0 {
        return Err(Failure::Usage("no variables found; pass --n".into()));
    }
    Ok(n)
}

fn check_pde(f: &str, phi: &str, sym: Option<usize>, n: Option<usize>) -> Run {
    let (conv, dual, primal) = match sym {
        Some(m) if m > 0 => (Convention::Symmetric(m), VarTable::symmetric("s", m), VarTable::symmetric("k", m)),
        Some(_) => return Err(Failure::Usage("--sym needs m ≥ 1".into())),
        None => {
            let n = generic_n(n, &[(f, 'x'), (phi, 'u')])?;
            (Convention::Generic, VarTable::indexed("u", n), VarTable::indexed("x", n))
        }
    };
    let fp = if sym.is_some() && f.trim() == "det" {
        det_exact(&SymMatrix::generic(&primal, homaloidal::poly::Domain::Rational)?)
    } else {
        parse(f, &primal)?
    };
    let phi = parse_rational(phi, &dual)?;
    let rep = pde::check(&fp, &phi, conv)?;
    Ok(Outcome { positive: rep.holds, report: rep.to_json(&dual) })
}

fn model_json(mf: &ModelFormula) -> Value {
    let psi: Vec<Value> = mf
        .primal_vars
        .names()
        .iter()
        .zip(mf.psi.coordinates())
        .map(|(name, c)| json!([name, render_rational(&c, &mf.dual_vars)]))
        .collect();
    let eqs: Vec<String> = mf.equations.iter().map(|h| render_poly(h, &mf.primal_vars)).collect();
    json!({
        "kind": mf.kind,
        "phi": render_rational(&mf.phi, &mf.dual_vars),
        "psi": psi,
        "equations": eqs,
        "equations_checked": mf.equations.len(),
    })
}

fn graph_model(g: &Graph) -> homaloidal::Result<(ModelFormula, Geometry)> {
    Ok(match g {
        Graph::Undirected(u) => (chordal_phi(u)?, Geometry::Span(LinearSpan::from_graph(u))),
        Graph::Directed(d) => (dag_phi(d)?, Geometry::Dag(d.clone())),
    })
}

fn mle(graph: &Path, directed: bool) -> Run {
    let mut spec: GraphSpec = serde_json::from_value(json_file(graph)?)
        .map_err(|e| Failure::Usage(format!("graph JSON: {e}")))?;
    spec.directed |= directed;
    let (mf, _) = graph_model(&spec.build()?)?;
    Ok(Outcome { report: model_json(&mf), positive: true })
}

fn certificate(c: mldeg::DegreeCertificate) -> Run {
    Ok(Outcome { positive: c.is_one(), report: c.to_json() })
}

fn ed_basis(text: &str) -> std::result::Result<Vec<Vec<Gaussian>>, Failure> {
    let v: Value = serde_json::from_str(text).map_err(|e| Failure::Usage(format!("basis JSON: {e}")))?;
    let bad = || Failure::Usage("basis must be a JSON array of rows".into());
    let mut out = Vec::new();
    for row in v.as_array().ok_or_else(bad)? {
        let mut r = Vec::new();
        for e in row.as_array().ok_or_else(bad)? {
            let text = match e {
                Value::String(s) => s.clone(),
                Value::Number(n) => n.to_string(),
                _ => return Err(bad()),
            };
            r.push(Gaussian::parse(&text)?);
        }
        out.push(r);
    }
    Ok(out)
}

fn load_model(path: &Path) -> std::result::Result<(ModelFormula, Option<Geometry>), Failure> {
    let v = json_file(path)?;
    if let Some(id) = v.get("row").and_then(Value::as_str) {
        let mf = catalog::model(id)?;
        let geo = catalog::geometry(id).ok().or_else(|| Geometry::of_model(&mf));
        return Ok((mf, geo));
    }
    if v.get("edges").is_some() {
        let g = GraphSpec::from_json(&v.to_string())?;
        let (mf, geo) = graph_model(&g)?;
        return Ok((mf, Some(geo)));
    }
    let spec: ExplicitModelSpec =
        serde_json::from_value(v).map_err(|e| Failure::Usage(format!("model JSON: {e}")))?;
    let mf = spec.build(&Default::default())?;
    let geo = Geometry::of_model(&mf);
    Ok((mf, geo))
}

fn estimate(model: &Path, data: Option<&Path>, cov: Option<&Path>, verify: bool) -> Run {
    let (mf, geo) = load_model(model)?;
    let s = match (data, cov) {
        (Some(d), _) => numeric::sample_covariance(&numeric::parse_csv(&read(d)?)?)?,
        (None, Some(c)) => NumSymMatrix::from_json(&json_file(c)?)?,
        (None, None) => return Err(Failure::Usage("pass --data or --cov".into())),
    };
    let rep = numeric::fit(&mf, geo.as_ref(), &s, verify)?;
    let report = serde_json::to_value(&rep).expect("report serializes");
    Ok(Outcome { positive: rep.pd, report })
}

fn examples(row: Option<&str>) -> Run {
    let ids: Vec<&str> = match row {
        Some(r) => {
            if !catalog::ROWS.iter().any(|x| x.id == r) {
                return Err(Failure::Usage(format!("unknown row `{r}`")));
            }
            vec![r]
        }
        None => catalog::ROWS.iter().map(|r| r.id).collect(),
    };
    let mut reports = Vec::new();
    for id in ids {
        reports.push(catalog::run(id)?);
    }
    let positive = reports.iter().all(|r| r.passed);
    Ok(Outcome { report: serde_json::to_value(&reports).expect("reports serialize"), positive })
}

fn run(cli: &Cli) -> Run {
    match &cli.command {
        Command::CheckPde { f, phi, sym, n } => check_pde(f, phi, *sym, *n),
        Command::Mle { graph, directed } => mle(graph, *directed),
        Command::HomaloidalDegree { f, n, trials } => {
            let n = generic_n(*n, &[(f, 'x')])?;
            certificate(mldeg::homaloidal_degree(&parse(f, &VarTable::indexed("x", n))?, &trials.config())?)
        }
        Command::MlDegree { h, m, trials } => {
            let hp = parse(h, &VarTable::symmetric("k", *m))?;
            certificate(mldeg::ml_degree_hypersurface(&hp, *m, &trials.config())?)
        }
        Command::EdDegree { basis, trials } => {
            let b = ed_basis(basis)?;
            let n = b.first().map_or(0, Vec::len);
            certificate(mldeg::ed_degree_linear(&b, n, &trials.config())?)
        }
        Command::Estimate { model, data, cov, verify } => {
            estimate(model, data.as_deref(), cov.as_deref(), *verify)
        }
        Command::Examples { row, .. } => examples(row.as_deref()),
    }
}

fn emit(cli: &Cli, text: &str) -> std::result::Result<(), String> {
    match &cli.output {
        Some(p) => std::fs::write(p, format!("{text}\n")).map_err(|e| format!("{}: {e}", p.display())),
        None => {
            use std::io::Write;
            match writeln!(std::io::stdout(), "{text}") {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.to_string()),
                _ => Ok(()),
            }
        }
    }
}

fn render(cli: &Cli, out: &Outcome) -> String {
    if let Command::Examples { json: false, .. } = cli.command {
        let rows = out.report.as_array().expect("row reports");
        return rows
            .iter()
            .map(|r| {
                let status = if r["passed"] == true { "PASS" } else { "FAIL" };
                format!("{status} {}: {}", r["id"].as_str().unwrap_or(""), r["detail"].as_str().unwrap_or(""))
            })
            .collect::<Vec<_>>()
            .join("\n");
    }
    serde_json::to_string_pretty(&out.report).expect("JSON renders")
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            if let Err(e) = emit(&cli, &render(&cli, &out)) {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
            ExitCode::from(if out.positive { 0 } else { 1 })
        }
        Err(Failure::Negative(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
