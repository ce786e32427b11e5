use std::io::Read;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use markov_induce::app::commands::{
    self, GkChoice, GreenKuboArgs, HitMethod, LatticeHitArgs, McOptions, Suite, Tau3Args,
};
use markov_induce::app::{Format, ModelFile, Report};
use markov_induce::invariants::HChoice;

/// Induced Markov chains, Poisson equations, Green-Kubo and τ³ invariants.
#[derive(Parser)]
#[command(name = "induce", version)]
struct Cli {
    /// Model file (JSON); `-` reads standard input.
    #[arg(long, global = true)]
    model: Option<String>,
    #[arg(long, global = true, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Json)]
    format: OutputFormat,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Json,
    Csv,
    Table,
}

#[derive(Args)]
struct Mc {
    /// Number of trajectories.
    #[arg(long, default_value_t = 1000)]
    paths: usize,
    /// Steps (or excursions, for induced estimates) per trajectory, burn-in included.
    #[arg(long, default_value_t = 10_000)]
    horizon: usize,
    #[arg(long, default_value_t = 0)]
    burn_in: usize,
    /// Worker threads; results do not depend on it.
    #[arg(long, default_value_t = 1)]
    workers: usize,
}

impl Mc {
    fn options(&self) -> McOptions {
        McOptions {
            paths: self.paths,
            horizon: self.horizon,
            burn_in: self.burn_in,
            workers: self.workers,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Stationary measure of the kernel.
    Stationary,
    /// Induced kernel and return-time law on a subset.
    Induce {
        #[arg(long, value_delimiter = ',')]
        subset: Option<Vec<String>>,
        /// Largest return time tabulated.
        #[arg(long, default_value_t = 20)]
        horizon: usize,
    },
    /// Solve (I - P) f = g and check the induced equation.
    Poisson {
        #[arg(long)]
        g: String,
        #[arg(long, value_delimiter = ',')]
        subset: Option<Vec<String>>,
        /// Treat g off the subset as an error instead of computing the correction.
        #[arg(long)]
        strict: bool,
    },
    /// Green-Kubo form σ²(f, g).
    GreenKubo {
        #[arg(long)]
        f: String,
        #[arg(long)]
        g: Option<String>,
        #[arg(long, value_delimiter = ',')]
        subset: Option<Vec<String>>,
        #[arg(long, value_enum, default_value_t = GkMethodArg::All)]
        method: GkMethodArg,
        #[command(flatten)]
        mc: Mc,
    },
    /// Trilinear form τ³(f, g, h) and, on a one-state subset, its quasi-invariance.
    Tau3 {
        #[arg(long)]
        f: String,
        #[arg(long)]
        g: Option<String>,
        #[arg(long)]
        h: Option<String>,
        #[arg(long, value_delimiter = ',')]
        subset: Option<Vec<String>>,
        #[arg(long, value_enum, default_value_t = HArg::ReturnTime)]
        h_choice: HArg,
    },
    /// The geometric example with its closed forms.
    BernoulliDemo {
        #[arg(long, default_value_t = 0.3)]
        p: f64,
    },
    /// Randomized property trials.
    Verify {
        #[arg(long, value_enum)]
        suite: SuiteArg,
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
    /// Lattice random walks.
    Lattice {
        #[command(subcommand)]
        command: LatticeCommand,
    },
}

#[derive(Subcommand)]
enum LatticeCommand {
    /// Probability of reaching p before returning to the origin (`--model srw` for the simple walk).
    Hit {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        p: Vec<i64>,
        #[arg(long, value_enum, default_value_t = HitArg::All)]
        method: HitArg,
        #[arg(long, default_value_t = 2000)]
        radius: usize,
        /// Terms of the potential series.
        #[arg(long, default_value_t = 100_000)]
        n_max: usize,
        #[arg(long, default_value_t = 1_000_000)]
        step_cap: usize,
        #[arg(long, default_value_t = 100_000)]
        paths: usize,
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum GkMethodArg {
    All,
    Resolvent,
    Series,
    Excursion,
    Mc,
}

#[derive(Clone, Copy, ValueEnum)]
enum HArg {
    ReturnTime,
    Indicator,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Poisson,
    Gk,
    Tau3,
    Duality,
    Lattice,
}

#[derive(Clone, Copy, ValueEnum)]
enum HitArg {
    All,
    Series,
    Exact,
    Mc,
}

fn read_model(source: Option<&str>) -> Result<ModelFile, String> {
    let text = match source {
        None | Some("-") => {
            let mut s = String::new();
            std::io::stdin().read_to_string(&mut s).map_err(|e| e.to_string())?;
            s
        }
        Some(path) => std::fs::read_to_string(path).map_err(|e| format!("{path}: {e}"))?,
    };
    ModelFile::parse(&text).map_err(|e| e.to_string())
}

fn dispatch(cli: &Cli) -> Report {
    let tol = cli.tol;
    let model = || read_model(cli.model.as_deref());
    let with_model = |name: &str, f: &dyn Fn(&ModelFile) -> Report| match model() {
        Ok(m) => f(&m),
        Err(e) => Report::input_error(name, &e),
    };
    match &cli.command {
        Command::Stationary => with_model("stationary", &|m| commands::stationary(m, tol)),
        Command::Induce { subset, horizon } => {
            with_model("induce", &|m| commands::induce(m, subset.as_deref(), *horizon, tol))
        }
        Command::Poisson { g, subset, strict } => {
            with_model("poisson", &|m| commands::poisson(m, g, subset.as_deref(), *strict, tol))
        }
        Command::GreenKubo { f, g, subset, method, mc } => with_model("green-kubo", &|m| {
            let method = match method {
                GkMethodArg::All => GkChoice::All,
                GkMethodArg::Resolvent => GkChoice::Resolvent,
                GkMethodArg::Series => GkChoice::Series,
                GkMethodArg::Excursion => GkChoice::Excursion,
                GkMethodArg::Mc => GkChoice::Mc,
            };
            let args = GreenKuboArgs {
                f,
                g: g.as_deref(),
                subset: subset.as_deref(),
                method,
                tol,
                seed: cli.seed,
                mc: mc.options(),
            };
            commands::green_kubo(m, &args)
        }),
        Command::Tau3 { f, g, h, subset, h_choice } => with_model("tau3", &|m| {
            let args = Tau3Args {
                f,
                g: g.as_deref(),
                h: h.as_deref(),
                subset: subset.as_deref(),
                h_choice: match h_choice {
                    HArg::ReturnTime => HChoice::ReturnTime,
                    HArg::Indicator => HChoice::NormalizedIndicator,
                },
                tol,
            };
            commands::tau3(m, &args)
        }),
        Command::BernoulliDemo { p } => commands::bernoulli_demo(*p),
        Command::Verify { suite, trials } => {
            let suite = match suite {
                SuiteArg::Poisson => Suite::Poisson,
                SuiteArg::Gk => Suite::Gk,
                SuiteArg::Tau3 => Suite::Tau3,
                SuiteArg::Duality => Suite::Duality,
                SuiteArg::Lattice => Suite::Lattice,
            };
            match cli.model.as_deref().map(|_| model()).transpose() {
                Ok(m) => commands::verify(m.as_ref(), suite, *trials, cli.seed),
                Err(e) => Report::input_error("verify", &e),
            }
        }
        Command::Lattice {
            command: LatticeCommand::Hit { p, method, radius, n_max, step_cap, paths, workers },
        } => {
            let args = LatticeHitArgs {
                p,
                method: match method {
                    HitArg::All => HitMethod::All,
                    HitArg::Series => HitMethod::Series,
                    HitArg::Exact => HitMethod::Exact,
                    HitArg::Mc => HitMethod::Mc,
                },
                radius: *radius,
                tol,
                n_max: *n_max,
                step_cap: *step_cap,
                seed: cli.seed,
                mc: McOptions {
                    paths: *paths,
                    horizon: 1,
                    burn_in: 0,
                    workers: *workers,
                },
            };
            match cli.model.as_deref() {
                Some("srw") => commands::lattice_hit(None, &args),
                _ => match model() {
                    Ok(m) => commands::lattice_hit(Some(&m), &args),
                    Err(e) => Report::input_error("lattice hit", &e),
                },
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            print!("{}", Report::input_error("usage", &e.kind().to_string()).render(Format::Json));
            return ExitCode::from(2);
        }
    };
    let report = dispatch(&cli);
    let format = match cli.format {
        OutputFormat::Json => Format::Json,
        OutputFormat::Csv => Format::Csv,
        OutputFormat::Table => Format::Table,
    };
    print!("{}", report.render(format));
    ExitCode::from(report.exit_code() as u8)
}
