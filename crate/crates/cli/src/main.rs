mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};

use report::Outcome;

/// Worker threads for parallel commands; unset means one per core.
pub const WORKERS_ENV: &str = "TIGHTCYCLE_WORKERS";

fn build_info() -> String {
    format!(
        "{} (library {}, {} build, {}-{})",
        env!("CARGO_PKG_VERSION"),
        tightcycle::VERSION,
        if cfg!(debug_assertions) {
            "debug"
        } else {
            "release"
        },
        std::env::consts::ARCH,
        std::env::consts::OS,
    )
}

#[derive(Parser, Debug)]
#[command(name = "tightcycle", version = build_info(), about = "Tight Hamiltonian cycle experiments on uniform hypergraphs")]
struct Cli {
    /// Append JSON-lines reports to this file instead of standard output.
    #[arg(long, global = true)]
    report: Option<PathBuf>,
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Family {
    #[value(name = "construction_a", alias = "construction-a")]
    ConstructionA,
    #[value(name = "construction_b", alias = "construction-b")]
    ConstructionB,
    Random,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Brute,
    Pipeline,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ScanMethod {
    Brute,
    Pipeline,
    /// Brute force up to 16 vertices, the pipeline above.
    Auto,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Lemma {
    #[value(name = "F41")]
    F41,
    #[value(name = "NB3")]
    Nb3,
    #[value(name = "L35")]
    L35,
    #[value(name = "F41analog")]
    F41analog,
    #[value(name = "NCT")]
    Nct,
    #[value(name = "NB4")]
    Nb4,
    #[value(name = "L36")]
    L36,
    #[value(name = "blakley-roy")]
    BlakleyRoy,
}

/// Where a verifier instance comes from.
#[derive(Args, Debug, Clone)]
pub struct InstanceArgs {
    /// Hypergraph file; a random instance is drawn when absent.
    #[arg(long)]
    pub file: Option<PathBuf>,
    /// Vertices of the random instance.
    #[arg(long, default_value_t = 12)]
    pub n: usize,
    /// Edge probability of the random instance.
    #[arg(long, default_value_t = 0.9)]
    pub p: f64,
    #[arg(long, default_value_t = 0.1)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    pub mu: f64,
    #[arg(long, default_value_t = 0.01)]
    pub beta: f64,
    #[arg(long, default_value_t = 3)]
    pub ell: usize,
    #[arg(long, default_value_t = 0.1)]
    pub zeta: f64,
}

/// Robustness parameters for commands that build link families.
#[derive(Args, Debug, Clone)]
pub struct FamilyArgs {
    #[arg(long, default_value_t = 0.1)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    pub mu: f64,
    #[arg(long, default_value_t = 0.01)]
    pub beta: f64,
    #[arg(long, default_value_t = 3)]
    pub ell: usize,
    /// Connectability threshold as a fraction of n.
    #[arg(long, default_value_t = 0.1)]
    pub zeta: f64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a hypergraph file and a JSON sidecar describing it.
    Gen {
        #[arg(value_enum)]
        family: Family,
        n: usize,
        /// Edge probability for `random`.
        #[arg(long, default_value_t = 0.9)]
        p: f64,
        /// Uniformity for `random`.
        #[arg(long, default_value_t = 4)]
        k: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Minimum j-degree and a set attaining it.
    Degree { file: PathBuf, j: usize },
    /// Search for a tight Hamiltonian cycle.
    FindCycle {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::Pipeline)]
        method: Method,
        /// TOML file with pipeline settings; unknown keys are rejected.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Node budget of the brute-force search.
        #[arg(long, default_value_t = 2_000_000_000)]
        budget: u64,
        /// Write the cycle here when one is found.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a counting lemma on one instance.
    Verify {
        #[arg(long, value_enum)]
        lemma: Lemma,
        #[command(flatten)]
        instance: InstanceArgs,
    },
    /// Connect two tuples by a tight path with a prescribed inner count.
    Connect {
        file: PathBuf,
        /// Start tuple, comma separated (pair for 3-uniform, triple for 4-uniform).
        from: String,
        /// End tuple, comma separated.
        to: String,
        /// Residue class of the inner vertex count modulo k.
        #[arg(long, conflicts_with = "inner")]
        residue: Option<usize>,
        /// Exact number of inner vertices.
        #[arg(long)]
        inner: Option<usize>,
        /// Vertices the path may use inside; all others by default.
        #[arg(long)]
        allowed: Option<String>,
        #[arg(long, default_value_t = 200_000)]
        budget: u64,
        #[command(flatten)]
        family: FamilyArgs,
    },
    /// Find vertex-disjoint absorbers and report them.
    Absorbers {
        file: PathBuf,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long, default_value_t = 100_000)]
        budget: u64,
        #[command(flatten)]
        family: FamilyArgs,
    },
    /// Lower-tail bound against its exact and sampled values.
    Janson {
        /// JSON weight system: {"ground": n, "p": p, "sets": [{"set": [..], "weight": w}]}.
        #[arg(long, conflicts_with = "preset")]
        spec: Option<PathBuf>,
        #[arg(long, value_enum)]
        preset: Option<commands::Preset>,
        /// Deviations t, comma separated; defaults to an even grid over [0, EX].
        #[arg(long)]
        t_grid: Option<String>,
        /// Points of the default grid.
        #[arg(long, default_value_t = 5)]
        points: usize,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
    },
    /// Hamiltonicity outcomes over a grid of instances, as CSV.
    Scan {
        #[arg(long, value_enum)]
        family: Family,
        /// Vertex counts: `a..b` (inclusive), `a..b:step` or a comma list.
        #[arg(long)]
        n: String,
        /// Edge probabilities, comma separated.
        #[arg(long, default_value = "0.9")]
        p: String,
        /// Seeds per cell, starting at --seed.
        #[arg(long, default_value_t = 1)]
        seeds: u64,
        #[arg(long, value_enum, default_value_t = ScanMethod::Auto)]
        method: ScanMethod,
        #[arg(long, default_value_t = 50_000_000)]
        budget: u64,
        /// CSV destination; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Extract a robust subgraph from a graph or a link.
    Robust {
        file: PathBuf,
        /// Use the link of this vertex (3-uniform input).
        #[arg(long)]
        vertex: Option<usize>,
        /// Use the link of this pair, `u,v` (4-uniform input).
        #[arg(long)]
        pair: Option<String>,
        #[arg(long, default_value_t = 0.1)]
        alpha: f64,
        #[arg(long, default_value_t = 1.0)]
        mu: f64,
        #[arg(long, default_value_t = 0.01)]
        beta: f64,
        #[arg(long, default_value_t = 3)]
        ell: usize,
    },
}

fn configure_workers() -> Result<(), String> {
    let Ok(raw) = std::env::var(WORKERS_ENV) else {
        return Ok(());
    };
    let workers: usize = raw
        .trim()
        .parse()
        .map_err(|_| format!("{WORKERS_ENV}={raw:?} is not a worker count"))?;
    if workers == 0 {
        return Err(format!("{WORKERS_ENV} must be positive"));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let parsed = Cli::command().try_get_matches().and_then(|m| {
        Cli::from_arg_matches(&m)
            .map(|cli| (cli, m.subcommand_name().unwrap_or_default().to_string()))
    });
    let (cli, subcommand) = match parsed {
        Ok(x) => x,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    if let Err(e) = configure_workers() {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let mut sink = match report::Sink::open(cli.report.as_deref(), argv, subcommand) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let seed = cli.seed;
    let outcome = match cli.command {
        Command::Gen {
            family,
            n,
            p,
            k,
            out,
        } => commands::gen(&mut sink, seed, family, n, p, k, &out),
        Command::Degree { file, j } => commands::degree(&mut sink, seed, &file, j),
        Command::FindCycle {
            file,
            method,
            config,
            budget,
            out,
        } => commands::find_cycle(
            &mut sink,
            seed,
            &file,
            method,
            config.as_deref(),
            budget,
            out.as_deref(),
        ),
        Command::Verify { lemma, instance } => commands::verify(&mut sink, seed, lemma, &instance),
        Command::Connect {
            file,
            from,
            to,
            residue,
            inner,
            allowed,
            budget,
            family,
        } => commands::connect(
            &mut sink,
            seed,
            commands::ConnectRequest {
                file: &file,
                from: &from,
                to: &to,
                residue,
                inner,
                allowed: allowed.as_deref(),
                budget,
                family: &family,
            },
        ),
        Command::Absorbers {
            file,
            count,
            budget,
            family,
        } => commands::absorbers(&mut sink, seed, &file, count, budget, &family),
        Command::Janson {
            spec,
            preset,
            t_grid,
            points,
            trials,
        } => commands::janson(
            &mut sink,
            seed,
            spec.as_deref(),
            preset,
            t_grid.as_deref(),
            points,
            trials,
        ),
        Command::Scan {
            family,
            n,
            p,
            seeds,
            method,
            budget,
            out,
        } => commands::scan(
            &mut sink,
            seed,
            family,
            &n,
            &p,
            seeds,
            method,
            budget,
            out.as_deref(),
        ),
        Command::Robust {
            file,
            vertex,
            pair,
            alpha,
            mu,
            beta,
            ell,
        } => commands::robust(
            &mut sink,
            seed,
            &file,
            vertex,
            pair.as_deref(),
            [alpha, mu, beta],
            ell,
        ),
    };
    match outcome {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::Failure) => ExitCode::from(2),
        Err(e) => {
            let _ = sink.error(seed, &e);
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
