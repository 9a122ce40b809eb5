use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use chaos_certs::bounds::BoundQuery;
use chaos_certs::commands::{
    default_observable, run_constants, run_renewal_verify, run_shift, run_toral, BundleChoice, ConstantsRequest,
    ParamsInput, RenewalRequest, ShiftAction, ShiftRequest, ToralRequest, ToralSource, DEFAULT_SEED,
};
use chaos_certs::optimize::{Objective, DEFAULT_MARGIN};
use chaos_certs::precision::Precision;
use chaos_certs::report::VerificationReport;
use chaos_certs::shift::{ModelFile, ObservableFile};
use chaos_certs::toral::MatrixFile;
use chaos_certs::{Error, Result};

#[derive(Parser)]
#[command(name = "chaos-certs", version, about = "Certified constants for limit theorems of Markov shifts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Working precision in decimal digits (overrides CHAOS_CERTS_PRECISION).
    #[arg(long, global = true)]
    precision: Option<u32>,
    /// Record wall-clock time in the report (makes output run-dependent).
    #[arg(long, global = true)]
    timing: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Goal {
    Rate,
    BoundAtN,
}

#[derive(Subcommand)]
enum Command {
    /// Admissible constants, an optimized or given bundle, and the four bounds.
    Constants {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        bundle: BundleArgs,
        #[command(flatten)]
        query: QueryArgs,
    },
    /// Renewal-chain verification of the key inequality.
    RenewalVerify {
        #[command(flatten)]
        params: ParamArgs,
        #[command(flatten)]
        bundle: BundleArgs,
        #[arg(long, default_value_t = 10_000)]
        kmax: usize,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 100_000)]
        paths: u64,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Exact and Monte Carlo checks on a finite Markov shift model.
    Shift {
        #[arg(long)]
        model: PathBuf,
        /// Observable file; defaults to the model's own entry, else the
        /// centred indicator of the first symbol being 0.
        #[arg(long)]
        observable: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Goal::Rate)]
        optimize: Goal,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[command(subcommand)]
        action: ShiftCommand,
    },
    /// The toral automorphism pipeline.
    Toral {
        #[arg(long, conflicts_with = "matrix", required_unless_present = "matrix")]
        d: Option<usize>,
        #[arg(long)]
        matrix: Option<PathBuf>,
        #[arg(long, default_value = "1")]
        phi_norm: f64,
        #[arg(long, value_enum, default_value_t = Goal::Rate)]
        optimize: Goal,
        #[command(flatten)]
        query: QueryArgs,
    },
}

#[derive(Subcommand)]
enum ShiftCommand {
    Verify {
        #[arg(long, default_value_t = 200)]
        n_max: usize,
        /// Horizon of the martingale decomposition.
        #[arg(long, default_value_t = 50)]
        horizon: usize,
        #[arg(long, default_value_t = 100)]
        pairs: usize,
    },
    Clt {
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long, default_value_t = 4096)]
        n: usize,
    },
    Ldp {
        #[arg(long, default_value_t = 0.2)]
        u: f64,
        #[arg(long, default_value_t = 1000)]
        n: usize,
    },
    Lln {
        #[arg(long, default_value_t = 0.49)]
        delta: f64,
        #[arg(long, default_value_t = 10_000)]
        horizon: usize,
    },
}

#[derive(Args)]
struct ParamArgs {
    #[arg(long)]
    theta: String,
    #[arg(long)]
    phi_p_norm: String,
    #[arg(long, default_value = "1")]
    phi_norm: String,
}

#[derive(Args)]
struct BundleArgs {
    #[arg(long, requires = "z0", conflicts_with = "optimize")]
    epsilon: Option<String>,
    #[arg(long, requires = "epsilon")]
    z0: Option<String>,
    #[arg(long, value_enum)]
    optimize: Option<Goal>,
    #[arg(long, default_value_t = DEFAULT_MARGIN)]
    margin: f64,
}

#[derive(Args)]
struct QueryArgs {
    #[arg(long, default_value_t = 100)]
    n: u64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    t: f64,
    #[arg(long, default_value_t = 0.1)]
    u: f64,
    #[arg(long, default_value_t = 0.25)]
    delta: f64,
}

impl QueryArgs {
    fn query(&self) -> BoundQuery {
        BoundQuery {
            n: self.n,
            t: self.t,
            u: self.u,
            delta: self.delta,
        }
    }
}

fn objective(goal: Goal, n: u64) -> Objective {
    match goal {
        Goal::Rate => Objective::AsymptoticRate,
        Goal::BoundAtN => Objective::BoundAtN(n),
    }
}

impl BundleArgs {
    fn choice(&self, n: u64) -> BundleChoice {
        match (&self.epsilon, &self.z0) {
            (Some(e), Some(z)) => BundleChoice::Explicit {
                epsilon: e.clone(),
                z0: z.clone(),
            },
            _ => BundleChoice::Optimize {
                objective: objective(self.optimize.unwrap_or(Goal::Rate), n),
                margin: self.margin,
            },
        }
    }
}

impl ParamArgs {
    fn input(&self) -> ParamsInput {
        ParamsInput {
            theta: self.theta.clone(),
            phi_p_norm: self.phi_p_norm.clone(),
            phi_norm: self.phi_norm.clone(),
        }
    }
}

fn run(cli: &Cli) -> Result<VerificationReport> {
    let precision = match cli.precision {
        Some(d) => Precision::new(d)?,
        None => Precision::from_env()?,
    };
    match &cli.command {
        Command::Constants { params, bundle, query } => run_constants(
            &ConstantsRequest {
                params: params.input(),
                bundle: bundle.choice(query.n),
                query: query.query(),
            },
            precision,
        ),
        Command::RenewalVerify {
            params,
            bundle,
            kmax,
            tol,
            paths,
            seed,
        } => run_renewal_verify(
            &RenewalRequest {
                params: params.input(),
                bundle: bundle.choice(100),
                kmax: *kmax,
                tol: *tol,
                paths: *paths,
                seed: *seed,
            },
            precision,
        ),
        Command::Shift {
            model,
            observable,
            optimize,
            trials,
            seed,
            action,
        } => {
            let file = ModelFile::load(model)?;
            let m = file.build()?;
            let obs_file = match observable {
                Some(p) => Some(load_observable(p)?),
                None => file.observable.clone(),
            };
            let phi = match obs_file {
                Some(o) => {
                    let f = o.build(m.alphabet_size())?;
                    if o.center {
                        chaos_certs::shift::center(&chaos_certs::shift::equilibrium_measure(&m)?, &f)
                    } else {
                        f
                    }
                }
                None => default_observable(&m)?,
            };
            let (action, n) = match *action {
                ShiftCommand::Verify { n_max, horizon, pairs } => (ShiftAction::Verify { n_max, horizon, pairs }, n_max),
                ShiftCommand::Clt { t, n } => (ShiftAction::Clt { t, n }, n),
                ShiftCommand::Ldp { u, n } => (ShiftAction::Ldp { u, n }, n),
                ShiftCommand::Lln { delta, horizon } => (ShiftAction::Lln { delta, horizon }, horizon),
            };
            run_shift(
                &ShiftRequest {
                    model: m,
                    observable: phi,
                    source: model.display().to_string(),
                    action,
                    objective: objective(*optimize, n as u64),
                    trials: *trials,
                    seed: *seed,
                },
                precision,
            )
        }
        Command::Toral {
            d,
            matrix,
            phi_norm,
            optimize,
            query,
        } => {
            let source = match (d, matrix) {
                (Some(d), _) => ToralSource::Family(*d),
                (None, Some(p)) => ToralSource::Matrix(MatrixFile::load(p)?),
                (None, None) => return Err(Error::InvalidInput("either --d or --matrix is required".into())),
            };
            run_toral(
                &ToralRequest {
                    source,
                    phi_norm: *phi_norm,
                    objective: objective(*optimize, query.n),
                    query: query.query(),
                },
                precision,
            )
        }
    }
}

fn load_observable(path: &PathBuf) -> Result<ObservableFile> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    Error::from_json(&text, "observable")
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let mut report = match run(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    if cli.timing {
        report.wall_clock_seconds = Some(start.elapsed().as_secs_f64());
    }
    let text = match cli.format {
        Format::Json => report.to_json(),
        Format::Csv => match report.to_csv() {
            Ok(t) => t,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
        },
    };
    let written = match &cli.out {
        Some(p) => std::fs::write(p, text).map_err(Error::from),
        None => {
            print!("{text}");
            Ok(())
        }
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    if report.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
