//! `nonloc`: local fractions, hybrid decompositions and full-nonlocality
//! certificates from the command line.
//!
//! Exit status: 0 success, 1 internal failure, 2 input error, 3 cap
//! exceeded, 4 certification FAIL.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use nonloc::certify::{self, Bundle};
use nonloc::epr2::{self, DecompositionProblem, DecompositionResult};
use nonloc::io::{self, AnyBehavior};
use nonloc::polytope::{self, Caps, DEFAULT_NS_TABLE_CAP, DEFAULT_VERTEX_CAP};
use nonloc::stabilizer::Protocol;
use nonloc::{quantum, sample, Behavior, Error, Execution, Scalar, Scenario};

const EXIT_INTERNAL: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_CAP: u8 = 3;
const EXIT_FAIL: u8 = 4;

#[derive(Parser)]
#[command(name = "nonloc", version, about = "EPR-2 decompositions and full-nonlocality certificates")]
struct Cli {
    #[command(flatten)]
    opts: Opts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Opts {
    /// Arithmetic for LP commands; defaults to the input file's mode.
    #[arg(long, global = true, value_enum)]
    mode: Option<Mode>,
    /// Tolerance for floating-point behaviors.
    #[arg(long, global = true, default_value_t = 1e-9)]
    eps: f64,
    /// Largest vertex set an LP may use.
    #[arg(long, global = true, default_value_t = DEFAULT_VERTEX_CAP)]
    vertex_cap: usize,
    /// Largest table dimension handed to no-signaling vertex enumeration.
    #[arg(long, global = true, default_value_t = DEFAULT_NS_TABLE_CAP)]
    ns_table_cap: usize,
    /// Write the artifact here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for randomized commands.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Disable the thread pool.
    #[arg(long, global = true)]
    sequential: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Rational,
    Float,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum VertexKind {
    Local,
    Ns,
}

#[derive(Subcommand)]
enum Command {
    /// Check normalization, nonnegativity and no-signaling of a behavior file.
    Validate { behavior: PathBuf },
    /// Born-rule behavior of a state file under a measurement-family file.
    Born {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        measurements: PathBuf,
    },
    /// Maximal fully local weight p_L.
    LocalFraction { behavior: PathBuf },
    /// p_L across every bipartition.
    CutScan { behavior: PathBuf },
    /// Three-party decomposition into local, hybrid and genuinely nonlocal parts.
    Svetlichny { behavior: PathBuf },
    /// Pair and covering certificates for a graph state.
    CertifyGraph {
        /// Complete graph on this many vertices.
        #[arg(long, required_unless_present = "graph", conflicts_with = "graph")]
        m: Option<usize>,
        /// Adjacency-list JSON file.
        #[arg(long)]
        graph: Option<PathBuf>,
    },
    /// Pair and covering certificates for five shared Smolin copies.
    CertifySmolin,
    /// Singlet local fraction for chained settings N = n-min..=n-max (CSV).
    ChainedSweep {
        #[arg(long)]
        n_max: usize,
        #[arg(long, default_value_t = 2)]
        n_min: usize,
    },
    /// Export a vertex set with its provenance header.
    Vertices {
        #[arg(long, value_delimiter = ',', required = true)]
        settings: Vec<usize>,
        #[arg(long, value_delimiter = ',', required = true)]
        outcomes: Vec<usize>,
        #[arg(long, value_enum, default_value_t = VertexKind::Ns)]
        kind: VertexKind,
    },
    /// Random no-signaling behavior (mixture of polytope vertices; three
    /// binary parties draw from local, hybrid and Svetlichny-type vertices).
    Sample {
        #[arg(long, value_delimiter = ',', required = true)]
        settings: Vec<usize>,
        #[arg(long, value_delimiter = ',', required = true)]
        outcomes: Vec<usize>,
        #[arg(long, default_value_t = 3)]
        terms: usize,
    },
    /// Regenerate the demo input files, or compare them with `--check`.
    Fixtures {
        #[arg(default_value = "fixtures")]
        dir: PathBuf,
        #[arg(long)]
        check: bool,
    },
}

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure { code, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::CapExceeded { .. } => EXIT_CAP,
            Error::Lp(_) => EXIT_INTERNAL,
            _ => EXIT_INPUT,
        };
        Failure::new(code, e.to_string())
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("nonloc: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: &Cli) -> Outcome {
    let o = &cli.opts;
    match &cli.command {
        Command::Validate { behavior } => validate(o, behavior),
        Command::Born { state, measurements } => born(o, state, measurements),
        Command::LocalFraction { behavior } => decompose(o, behavior, Lp::Local),
        Command::CutScan { behavior } => cut_scan(o, behavior),
        Command::Svetlichny { behavior } => decompose(o, behavior, Lp::Svetlichny),
        Command::CertifyGraph { m, graph } => certify_graph(o, *m, graph.as_deref()),
        Command::CertifySmolin => certify_smolin(o),
        Command::ChainedSweep { n_max, n_min } => chained_sweep(o, *n_min, *n_max),
        Command::Vertices { settings, outcomes, kind } => vertices(o, settings, outcomes, *kind),
        Command::Sample { settings, outcomes, terms } => sample_behavior(o, settings, outcomes, *terms),
        Command::Fixtures { dir, check } => fixtures(dir, *check),
    }
}

impl Opts {
    fn caps(&self) -> Caps {
        Caps { vertex_cap: self.vertex_cap, ns_table_cap: self.ns_table_cap }
    }

    fn exec(&self) -> Execution {
        if self.sequential { Execution::Sequential } else { Execution::default() }
    }

    fn emit(&self, text: &str) -> Outcome {
        match &self.out {
            Some(path) => io::write_atomic(path, text).map_err(Failure::from),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }

    fn load_behavior(&self, path: &Path) -> Result<AnyBehavior, Failure> {
        let b = io::parse_behavior(&io::read_file(path)?)?;
        let b = match (self.mode, b) {
            (Some(Mode::Rational), b @ AnyBehavior::Float(_)) => AnyBehavior::Rational(b.to_rational()?),
            (Some(Mode::Float), AnyBehavior::Rational(b)) => AnyBehavior::Float(b.to_f64()),
            (_, b) => b,
        };
        Ok(b.with_tolerance(self.eps))
    }
}

fn validate(o: &Opts, path: &Path) -> Outcome {
    let b = o.load_behavior(path)?;
    let report = b.validate();
    let doc = json!({
        "valid": report.is_valid(),
        "mode": b.mode(),
        "max_residual": report.max_residual(),
        "violations": report.violations,
    });
    o.emit(&io::to_pretty(&doc))?;
    if report.is_valid() {
        Ok(())
    } else {
        Err(Failure::new(
            EXIT_INPUT,
            format!("{} violates {} constraint(s)", path.display(), report.violations.len()),
        ))
    }
}

fn born(o: &Opts, state: &Path, measurements: &Path) -> Outcome {
    let rho = io::parse_state(&io::read_file(state)?)?.density();
    let meas = io::parse_measurements(&io::read_file(measurements)?)?;
    let b = AnyBehavior::Float(quantum::born_table(&rho, &meas)?.with_tolerance(o.eps));
    let text = match o.mode {
        Some(Mode::Rational) => io::behavior_json(&b.to_rational()?),
        _ => b.to_json(),
    };
    o.emit(&text)
}

#[derive(Clone, Copy)]
enum Lp {
    Local,
    Svetlichny,
}

fn solve<S: Scalar + Serialize>(b: &Behavior<S>, lp: Lp, caps: Caps) -> Result<Value, Failure> {
    let (problem, result): (DecompositionProblem<S>, DecompositionResult<S>) = match lp {
        Lp::Local => epr2::local_fraction(b, caps)?,
        Lp::Svetlichny => epr2::svetlichny_decomposition(b, caps)?,
    };
    let verified = problem.check_dual_certificate(&result);
    if !verified {
        return Err(Failure::new(EXIT_INTERNAL, "dual certificate failed re-verification"));
    }
    Ok(io::result_value(&result, verified))
}

fn decompose(o: &Opts, path: &Path, lp: Lp) -> Outcome {
    let doc = match o.load_behavior(path)? {
        AnyBehavior::Rational(b) => solve(&b, lp, o.caps())?,
        AnyBehavior::Float(b) => solve(&b, lp, o.caps())?,
    };
    o.emit(&io::to_pretty(&doc))
}

fn scan<S: Scalar + Serialize>(b: &Behavior<S>, o: &Opts) -> Result<(Value, bool), Failure> {
    let mut per_cut = serde_json::Map::new();
    let mut cuts = Vec::new();
    let mut capped = false;
    for (cut, r) in epr2::cut_scan(b, o.caps(), o.exec())? {
        match r {
            Ok((problem, r)) => {
                let verified = problem.check_dual_certificate(&r);
                per_cut.insert(cut.label(), json!(r.model_weight));
                cuts.push(json!({ "cut": cut.label(), "status": r.status, "result": io::result_value(&r, verified) }));
            }
            Err(e @ Error::CapExceeded { .. }) => {
                capped = true;
                per_cut.insert(cut.label(), Value::Null);
                cuts.push(json!({
                    "cut": cut.label(),
                    "status": "cap-exceeded",
                    "error": e.to_string(),
                    "hint": "use a pair certificate (certify-graph / certify-smolin) for this cut",
                }));
            }
            Err(e) => return Err(e.into()),
        }
    }
    let doc = json!({ "mode": epr2::NumericMode::of::<S>(), "values": { "per_cut": per_cut }, "cuts": cuts });
    Ok((doc, capped))
}

fn cut_scan(o: &Opts, path: &Path) -> Outcome {
    let (doc, capped) = match o.load_behavior(path)? {
        AnyBehavior::Rational(b) => scan(&b, o)?,
        AnyBehavior::Float(b) => scan(&b, o)?,
    };
    o.emit(&io::to_pretty(&doc))?;
    if capped {
        return Err(Failure::new(EXIT_CAP, "some bipartitions exceed the vertex caps"));
    }
    Ok(())
}

fn bundle_doc(subject: &str, bundle: &Bundle, protocols: &[Protocol]) -> Value {
    json!({
        "subject": subject,
        "verdict": if bundle.passed() { "PASS" } else { "FAIL" },
        "theorem2": bundle.covering,
        "pairs": bundle.pairs,
        "protocols": protocols,
    })
}

fn summarize(bundle: &Bundle) {
    for c in &bundle.pairs {
        let (i, j) = c.pair.unwrap_or_default();
        eprintln!("pair ({i},{j}): {:?}, {} leaves", c.verdict, c.leaves.len());
    }
    eprintln!("covering: {:?}, {} bipartitions", bundle.covering.verdict, bundle.covering.covering.len());
}

fn certify_graph(o: &Opts, m: Option<usize>, graph: Option<&Path>) -> Outcome {
    let (adj, subject) = match (m, graph) {
        (Some(m), _) => (nonloc::stabilizer::complete_graph(m), format!("graph:K{m}")),
        (None, Some(path)) => {
            let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            (io::parse_graph(&io::read_file(path)?)?, format!("graph:{stem}"))
        }
        (None, None) => return Err(Failure::new(EXIT_INPUT, "give --m or --graph")),
    };
    let (bundle, protocols) = certify::graph_demo(&adj, &subject, o.exec())?;
    summarize(&bundle);
    o.emit(&io::to_pretty(&bundle_doc(&subject, &bundle, &protocols)))?;
    if bundle.passed() {
        Ok(())
    } else {
        Err(Failure::new(EXIT_FAIL, format!("{subject}: criterion not met")))
    }
}

fn certify_smolin(o: &Opts) -> Outcome {
    let report = certify::smolin_demo(o.exec())?;
    summarize(&report.bundle);
    eprintln!("single-copy control: {:?}", report.negative_control.verdict);
    let mut doc = bundle_doc(certify::SMOLIN_SUBJECT, &report.bundle, &report.protocols);
    doc["verdict"] = json!(if report.passed() { "PASS" } else { "FAIL" });
    doc["negative_control"] = json!(report.negative_control);
    o.emit(&io::to_pretty(&doc))?;
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::new(EXIT_FAIL, "smolin demonstration: criterion not met"))
    }
}

fn chained_sweep(o: &Opts, n_min: usize, n_max: usize) -> Outcome {
    if n_min < 2 || n_max < n_min {
        return Err(Failure::new(EXIT_INPUT, format!("need 2 <= n-min <= n-max, got {n_min}..={n_max}")));
    }
    let ns: Vec<usize> = (n_min..=n_max).collect();
    let rows = certify::chained_sweep(&ns, o.caps(), o.exec())?;
    o.emit(&io::sweep_csv(&rows))
}

fn vertices(o: &Opts, settings: &[usize], outcomes: &[usize], kind: VertexKind) -> Outcome {
    let sc = Scenario::new(settings.to_vec(), outcomes.to_vec())?;
    let vs = match kind {
        VertexKind::Local => polytope::local_deterministic_vertices(&sc, o.caps())?,
        VertexKind::Ns => io::cached_ns_vertices(&sc, o.caps())?,
    };
    o.emit(&io::vertex_set_json(&vs))
}

fn sample_behavior(o: &Opts, settings: &[usize], outcomes: &[usize], terms: usize) -> Outcome {
    let sc = Scenario::new(settings.to_vec(), outcomes.to_vec())?;
    let mut rng = ChaCha8Rng::seed_from_u64(o.seed);
    // three binary parties exceed the default enumeration cap; mix local,
    // hybrid and Svetlichny-type vertices instead
    let b = if sc == Scenario::uniform(3, 2, 2)? && sc.table_len() > o.ns_table_cap {
        sample::random_mixture(&sample::tripartite_pool(o.caps())?, terms, &mut rng)?
    } else {
        sample::random_ns_behavior(&sc, terms, o.caps(), &mut rng)?
    };
    o.emit(&io::behavior_json(&b))
}

fn fixtures(dir: &Path, check: bool) -> Outcome {
    let files = nonloc::fixtures::all()?;
    let mut stale = Vec::new();
    for (rel, text) in &files {
        let path = dir.join(rel);
        if check {
            if std::fs::read_to_string(&path).ok().as_deref() != Some(text.as_str()) {
                stale.push(rel.clone());
            }
        } else {
            io::write_atomic(&path, text)?;
        }
    }
    if !stale.is_empty() {
        return Err(Failure::new(EXIT_INTERNAL, format!("fixtures out of date: {}", stale.join(", "))));
    }
    eprintln!("{} fixture files {}", files.len(), if check { "up to date" } else { "written" });
    Ok(())
}
