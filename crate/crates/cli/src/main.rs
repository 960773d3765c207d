mod input;
mod report;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use entangle_core::verify::{
    additivity_check, derive_seed, locc_monotonicity_check, lu_invariance_check, random_pure_state,
    PropertyCheckResult,
};
use entangle_core::{
    ce, cef, entanglement_combination, subset_entropy, Error, Limits, PartySubset, PureState,
    SystemShape, Tolerances,
};

use input::Format;

/// Entanglement measures for multipartite pure states.
#[derive(Parser)]
#[command(name = "entangle", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Full report: CE, EC and per-block CEF
    Ce(Analyze),
    /// Entanglement combination only
    Ec(Analyze),
    /// Half the sum of all partial entropies of the whole state
    Cef(Analyze),
    /// Partial entropy of one subset of parties
    Entropy {
        #[command(flatten)]
        analyze: Analyze,
        /// 1-based party labels, e.g. 1,3
        #[arg(long, value_delimiter = ',', required = true)]
        subset: Vec<usize>,
    },
    /// Randomized property checks
    Verify(Verify),
}

#[derive(Args)]
struct Analyze {
    /// Input file, or '-' for stdin
    #[arg(default_value = "-")]
    input: String,
    #[command(flatten)]
    opts: Common,
}

#[derive(Args)]
struct Common {
    /// Input format; detected from the first line when omitted
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    json: bool,
    /// Include the partial entropies summed into CE
    #[arg(long)]
    detail: bool,
    /// Relative rank threshold
    #[arg(long = "tol", value_name = "RANK_EPS", default_value_t = 1e-9)]
    rank_eps: f64,
    #[arg(long, value_name = "E", default_value_t = 1e-8)]
    norm_eps: f64,
    /// Reject inputs that are not normalized instead of rescaling them
    #[arg(long)]
    no_normalize: bool,
    /// Worker threads for subset enumeration
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
    threads: u16,
}

#[derive(Clone, Copy, ValueEnum)]
enum Property {
    Lu,
    Additivity,
    Locc,
}

#[derive(Args)]
struct Verify {
    #[arg(value_enum)]
    property: Property,
    /// Input files (two for additivity, one otherwise)
    inputs: Vec<String>,
    /// Draw random qubit states instead of reading inputs
    #[arg(long, requires = "qubits")]
    random: bool,
    #[arg(long, value_parser = clap::value_parser!(u16).range(1..))]
    qubits: Option<u16>,
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u32).range(1..))]
    trials: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Sequential measurements per LOCC trial
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    rounds: u32,
    #[command(flatten)]
    opts: Common,
}

/// An error ready to be reported, with its exit code.
#[derive(Debug)]
pub struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    pub fn usage(message: String) -> Self {
        Failure { code: 1, message }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Parse(_) => 2,
            Error::ZeroState
            | Error::NonFinite
            | Error::InvalidShape(_)
            | Error::SizeLimit { .. }
            | Error::DimensionMismatch { .. }
            | Error::NotNormalized { .. } => 3,
            Error::EigenFailure(_)
            | Error::NegativeEigenvalue(_)
            | Error::NumericalAmbiguity { .. }
            | Error::NotSeparable { .. } => 4,
            Error::InvalidTolerance(_)
            | Error::EmptySubset
            | Error::TrivialSubset
            | Error::PartyOutOfRange { .. } => 1,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<entangle_core::ParseError> for Failure {
    fn from(e: entangle_core::ParseError) -> Self {
        Error::from(e).into()
    }
}

/// Output on success; `violated` selects exit code 5.
struct Report {
    text: String,
    violated: bool,
}

fn limits() -> Result<Limits, Failure> {
    let mut limits = Limits::default();
    if let Ok(v) = std::env::var("ENTANGLE_MAX_DIM") {
        limits.max_dim = v
            .trim()
            .parse()
            .ok()
            .filter(|&d: &usize| d >= 2)
            .ok_or_else(|| {
                Failure::usage(format!(
                    "ENTANGLE_MAX_DIM must be an integer >= 2, got {v:?}"
                ))
            })?;
    }
    Ok(limits)
}

fn tolerances(opts: &Common) -> Result<Tolerances, Failure> {
    Tolerances::new(opts.rank_eps, opts.norm_eps).map_err(|e| Failure::usage(e.to_string()))
}

fn load(
    path: &str,
    opts: &Common,
    tol: &Tolerances,
    limits: Limits,
) -> Result<input::Loaded, Failure> {
    let text = input::read_source(path)?;
    input::parse(&text, opts.format, limits, tol, opts.no_normalize).map_err(|mut f| {
        if f.code == 2 {
            let name = if path == "-" { "<stdin>" } else { path };
            f.message = format!("{name}:{}", f.message);
        }
        f
    })
}

#[derive(Clone, Copy)]
enum Measure {
    Ce,
    Ec,
    Cef,
}

fn run_measure(measure: Measure, a: &Analyze) -> Result<Report, Failure> {
    let tol = tolerances(&a.opts)?;
    let loaded = load(&a.input, &a.opts, &tol, limits()?)?;
    let state = &loaded.state;
    let json = a.opts.json;
    let text = match measure {
        Measure::Ce => {
            let mut r = ce(state, &tol, a.opts.detail)?;
            r.normalized_input = loaded.normalized;
            if json {
                report::ce_json(&r).to_string()
            } else {
                report::ce_human(&r)
            }
        }
        Measure::Ec => {
            report::ec_output(state.dims(), &entanglement_combination(state, &tol)?, json)
        }
        Measure::Cef => {
            let value = cef(state)?;
            match entanglement_combination(state, &tol) {
                Ok(ec) if !ec.is_fully_entangled() => eprintln!(
                    "warning: the state is not fully entangled, EC = {ec}; \
                     ce is the meaningful measure here"
                ),
                Ok(_) => {}
                Err(e) => eprintln!("warning: could not determine EC: {e}"),
            }
            report::scalar_output(state.dims(), "cef", None, value, json)
        }
    };
    Ok(Report {
        text,
        violated: false,
    })
}

fn run_entropy(a: &Analyze, labels: &[usize]) -> Result<Report, Failure> {
    let tol = tolerances(&a.opts)?;
    let loaded = load(&a.input, &a.opts, &tol, limits()?)?;
    let state = &loaded.state;
    let n = state.parties();
    let mut parties = Vec::with_capacity(labels.len());
    for &k in labels {
        if k == 0 || k > n {
            return Err(Failure::usage(format!(
                "party {k} is out of range; labels run from 1 to {n}"
            )));
        }
        parties.push(k - 1);
    }
    let s = PartySubset::from_parties(&parties, n)?;
    if !s.is_nontrivial() {
        return Err(Error::TrivialSubset.into());
    }
    let text = report::scalar_output(
        state.dims(),
        "entropy",
        Some(s),
        subset_entropy(state, s)?,
        a.opts.json,
    );
    Ok(Report {
        text,
        violated: false,
    })
}

fn random_states(v: &Verify, count: usize, limits: Limits) -> Result<Vec<PureState>, Failure> {
    let qubits = v.qubits.map_or(0, usize::from);
    let shape = SystemShape::with_limits(vec![2; qubits], limits)?;
    (0..count)
        .map(|i| Ok(random_pure_state(&shape, derive_seed(v.seed, i as u64))?))
        .collect()
}

fn run_verify(v: &Verify) -> Result<Report, Failure> {
    let tol = tolerances(&v.opts)?;
    let limits = limits()?;
    let trials = v.trials as usize;
    let wanted = match v.property {
        Property::Additivity => 2,
        _ => 1,
    };
    if v.qubits.is_some() && !v.random {
        return Err(Failure::usage(
            "--qubits only applies with --random".to_string(),
        ));
    }
    if v.random && !v.inputs.is_empty() {
        return Err(Failure::usage(
            "--random does not take input files".to_string(),
        ));
    }
    // a single input defaults to stdin, as for the analysis commands
    let inputs = if !v.random && wanted == 1 && v.inputs.is_empty() {
        vec!["-".to_string()]
    } else {
        v.inputs.clone()
    };
    if !v.random && inputs.len() != wanted {
        return Err(Failure::usage(format!(
            "verify {} needs {wanted} input file(s) or --random --qubits N",
            v.property
                .to_possible_value()
                .map(|p| p.get_name().to_owned())
                .unwrap_or_default()
        )));
    }
    if inputs.iter().filter(|p| *p == "-").count() > 1 {
        return Err(Failure::usage("stdin can be read only once".to_string()));
    }
    let load_all = || -> Result<Vec<PureState>, Failure> {
        inputs
            .iter()
            .map(|p| load(p, &v.opts, &tol, limits).map(|l| l.state))
            .collect()
    };
    let results: Vec<PropertyCheckResult> = match v.property {
        Property::Lu => {
            let state = if v.random {
                random_states(v, 1, limits)?.remove(0)
            } else {
                load_all()?.remove(0)
            };
            vec![lu_invariance_check(&state, trials, v.seed, &tol)?]
        }
        Property::Locc => {
            let state = if v.random {
                random_states(v, 1, limits)?.remove(0)
            } else {
                load_all()?.remove(0)
            };
            report::locc_results(locc_monotonicity_check(
                &state,
                v.rounds as usize,
                trials,
                v.seed,
                &tol,
            )?)
        }
        Property::Additivity => {
            let pairs: Vec<(PureState, PureState)> = if v.random {
                let mut states = random_states(v, 2 * trials, limits)?.into_iter();
                (0..trials)
                    .map(|_| (states.next().unwrap(), states.next().unwrap()))
                    .collect()
            } else {
                let mut states = load_all()?.into_iter();
                vec![(states.next().unwrap(), states.next().unwrap())]
            };
            let mut worst: Option<PropertyCheckResult> = None;
            let mut mismatches = 0;
            for (a, b) in &pairs {
                let r = additivity_check(a, b, &tol)?;
                mismatches += r.ec_mismatches;
                if worst
                    .as_ref()
                    .is_none_or(|w| r.max_violation > w.max_violation)
                {
                    worst = Some(r);
                }
            }
            let mut r = worst.expect("at least one pair");
            r.trials = pairs.len();
            r.ec_mismatches = mismatches;
            r.passed = r.max_violation <= r.tolerance && mismatches == 0;
            r.seed = v.seed;
            vec![r]
        }
    };
    let violated = results.iter().any(|r| !r.passed);
    if violated {
        for r in results.iter().filter(|r| !r.passed) {
            eprintln!(
                "property violated: {} (max violation {:e})",
                r.property, r.max_violation
            );
        }
    }
    Ok(Report {
        text: report::checks_output(&results, v.opts.json),
        violated,
    })
}

fn run(cli: Cli) -> Result<Report, Failure> {
    let threads = match &cli.command {
        Command::Ce(a) | Command::Ec(a) | Command::Cef(a) => a.opts.threads,
        Command::Entropy { analyze, .. } => analyze.opts.threads,
        Command::Verify(v) => v.opts.threads,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.into())
        .build()
        .map_err(|e| Failure::usage(format!("cannot start worker threads: {e}")))?;
    pool.install(|| match &cli.command {
        Command::Ce(a) => run_measure(Measure::Ce, a),
        Command::Ec(a) => run_measure(Measure::Ec, a),
        Command::Cef(a) => run_measure(Measure::Cef, a),
        Command::Entropy { analyze, subset } => run_entropy(analyze, subset),
        Command::Verify(v) => run_verify(v),
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(report) => {
            let text = report.text.trim_end();
            println!("{text}");
            if report.violated {
                ExitCode::from(5)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
