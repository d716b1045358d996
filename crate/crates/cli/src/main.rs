use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use wnfi_core::fixture::{emit, Fixture, Template, BASIS_WARN};
use wnfi_core::suite::{run_suite, Suite, SuiteFlags};
use wnfi_core::{Error, Mode};

const FIXTURE_DIR_ENV: &str = "WNFI_FIXTURE_DIR";

#[derive(Parser)]
#[command(name = "wnfi", version, about = "Finite-truncation checks of chronological products, Fresnel measures and harmonic analysis on R mod 4pi x SU(2)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a verification suite against a fixture.
    Verify(VerifyArgs),
    /// Write a template fixture file.
    EmitFixture {
        template: TemplateArg,
        path: PathBuf,
        /// Replace the positive orbit, e.g. `0:0,1:0,1:1` as `n:2l` pairs.
        #[arg(long, value_delimiter = ',')]
        orbit: Vec<String>,
    },
    /// List the built-in templates.
    Templates,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Pairings,
    Chrono,
    Symbols,
    Measure,
    Support,
    Harmonics,
    All,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::Pairings => Suite::Pairings,
            SuiteArg::Chrono => Suite::Chrono,
            SuiteArg::Symbols => Suite::Symbols,
            SuiteArg::Measure => Suite::Measure,
            SuiteArg::Support => Suite::Support,
            SuiteArg::Harmonics => Suite::Harmonics,
            SuiteArg::All => Suite::All,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum TemplateArg {
    MassiveScalarSmall,
    TwoMode,
    HalfintegerL,
}

impl From<TemplateArg> for Template {
    fn from(t: TemplateArg) -> Self {
        match t {
            TemplateArg::MassiveScalarSmall => Template::MassiveScalarSmall,
            TemplateArg::TwoMode => Template::TwoMode,
            TemplateArg::HalfintegerL => Template::HalfIntegerL,
        }
    }
}

#[derive(Args)]
struct VerifyArgs {
    suite: SuiteArg,
    /// Fixture path, a name inside the fixture directory, or a template name.
    #[arg(long, default_value = "massive-scalar-small")]
    fixture: String,
    /// Directory searched for `<name>.toml` when the fixture is not a path.
    #[arg(long, env = FIXTURE_DIR_ENV)]
    fixture_dir: Option<PathBuf>,
    /// Overrides every default comparison tolerance.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, default_value_t = SuiteFlags::default().seed)]
    seed: u64,
    #[arg(long, default_value_t = SuiteFlags::default().max_order)]
    max_order: u32,
    /// Total-occupation cutoff; defaults to the fixture's.
    #[arg(long)]
    cutoff: Option<u32>,
    #[arg(long, default_value_t = SuiteFlags::default().epsilon_levels)]
    epsilon_levels: usize,
    /// Random symbol samples per field, also used for growth fits.
    #[arg(long, default_value_t = SuiteFlags::default().samples)]
    samples: usize,
    /// Growth-fit p values.
    #[arg(long, value_delimiter = ',', default_values_t = SuiteFlags::default().p)]
    p: Vec<f64>,
    /// Growth-fit ε values.
    #[arg(long, value_delimiter = ',', default_values_t = SuiteFlags::default().epsilon)]
    epsilon: Vec<f64>,
    /// Monte Carlo cross-check: sample count and seed.
    #[arg(long, num_args = 2, value_names = ["SAMPLES", "SEED"])]
    mc: Option<Vec<u64>>,
    /// Write the report as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Write plot series (error profile, Fresnel convergence) into this directory.
    #[arg(long)]
    plot_data: Option<PathBuf>,
    /// Suppress the summary.
    #[arg(long)]
    quiet: bool,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::GridTooSmall(_) | Error::IllConditioned(_) | Error::SizeLimit { .. } => 3,
        _ => 2,
    }
}

fn resolve_fixture(name: &str, dir: Option<&Path>) -> Result<Fixture, Error> {
    let direct = Path::new(name);
    if direct.is_file() {
        return Fixture::load(direct);
    }
    if let Some(dir) = dir {
        for candidate in [dir.join(name), dir.join(format!("{name}.toml"))] {
            if candidate.is_file() {
                return Fixture::load(&candidate);
            }
        }
    }
    match Template::parse(name) {
        Ok(t) => Fixture::from_raw(t.raw()),
        Err(_) => Err(Error::Validation(format!(
            "fixture '{name}' is neither a file, an entry of the fixture directory, nor a template"
        ))),
    }
}

fn parse_mode(s: &str) -> Result<Mode, Error> {
    let bad = || Error::Validation(format!("orbit mode '{s}' must look like n:2l"));
    let (n, l) = s.split_once(':').ok_or_else(bad)?;
    Ok(Mode::new(n.trim().parse().map_err(|_| bad())?, l.trim().parse().map_err(|_| bad())?))
}

fn verify(args: VerifyArgs) -> Result<bool, Error> {
    let fixture = resolve_fixture(&args.fixture, args.fixture_dir.as_deref())?;
    let defaults = SuiteFlags::default();
    let mc = match args.mc.as_deref() {
        Some([n, s]) => Some((*n as usize, *s)),
        _ => None,
    };
    let flags = SuiteFlags {
        tol: args.tol,
        seed: args.seed,
        max_order: args.max_order,
        cutoff: args.cutoff,
        epsilon_levels: args.epsilon_levels,
        samples: args.samples,
        p: if args.p.is_empty() { defaults.p } else { args.p },
        epsilon: if args.epsilon.is_empty() { defaults.epsilon } else { args.epsilon },
        mc,
    };
    if flags.epsilon_levels == 0 {
        return Err(Error::Validation("--epsilon-levels must be at least 1".into()));
    }
    match fixture.predicted_basis(flags.cutoff) {
        Some(d) if d > BASIS_WARN => {
            eprintln!("warning: truncated Fock basis has {d} states (above {BASIS_WARN}); runs may be slow")
        }
        None => eprintln!("warning: truncated Fock basis size overflows"),
        _ => {}
    }

    let start = Instant::now();
    let outcome = run_suite(&fixture, args.suite.into(), &flags)?;
    let report = &outcome.report;
    if let Some(path) = &args.csv {
        std::fs::write(path, report.to_csv()?)?;
    }
    if let Some(dir) = &args.plot_data {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("exp_error_profile.csv"), outcome.plot.exp_error_profile_csv())?;
        std::fs::write(dir.join("fresnel_convergence.csv"), outcome.plot.fresnel_convergence_csv())?;
    }
    if !args.quiet {
        print!("{}", report.render_summary());
        println!("  config sha256 {}  ({:.2} s)", report.provenance.config_hash, start.elapsed().as_secs_f64());
    }
    Ok(report.passed())
}

fn run(cli: Cli) -> Result<bool, Error> {
    match cli.command {
        Command::Verify(args) => verify(args),
        Command::EmitFixture { template, path, orbit } => {
            let t: Template = template.into();
            let text = if orbit.is_empty() {
                t.text()
            } else {
                let plus = orbit.iter().map(|s| parse_mode(s)).collect::<Result<Vec<_>, _>>()?;
                emit(&t.with_orbit(&plus)?)
            };
            std::fs::write(&path, text)?;
            Ok(true)
        }
        Command::Templates => {
            for t in Template::ALL {
                let raw = t.raw();
                println!("{:<22} {}", t.name(), raw.description);
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match std::panic::catch_unwind(|| run(cli)) {
        Ok(Ok(true)) => ExitCode::SUCCESS,
        Ok(Ok(false)) => ExitCode::from(1),
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
        Err(_) => ExitCode::from(3),
    }
}
