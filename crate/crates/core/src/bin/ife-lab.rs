use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ife_lab::study::{self, read_config, StudyConfig};
use ife_lab::Error;

#[derive(Parser)]
#[command(name = "ife-lab", version, about = "Nonconforming immersed finite element convergence studies")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Interpolation and/or Galerkin error study on the circle benchmark.
    Study(StudyArgs),
}

#[derive(clap::Args)]
struct StudyArgs {
    /// key = value file with defaults for any of the flags below
    #[arg(long)]
    config: Option<PathBuf>,
    /// tri | rect
    #[arg(long)]
    mesh: Option<String>,
    /// cr | rq1
    #[arg(long)]
    family: Option<String>,
    /// curve | line
    #[arg(long)]
    partition: Option<String>,
    /// curve-mid | line-mid
    #[arg(long)]
    flux: Option<String>,
    #[arg(long = "beta-minus")]
    beta_minus: Option<String>,
    #[arg(long = "beta-plus")]
    beta_plus: Option<String>,
    /// number of refinement levels
    #[arg(long)]
    levels: Option<String>,
    /// cells per side on the coarsest level
    #[arg(long)]
    n0: Option<String>,
    /// interp | solve | both
    #[arg(long)]
    mode: Option<String>,
    /// CSV output; `both` writes <stem>_interp.csv and <stem>_solve.csv
    #[arg(long)]
    out: Option<String>,
    /// only `circle` is available
    #[arg(long)]
    curve: Option<String>,
    #[arg(long)]
    r0: Option<String>,
}

impl StudyArgs {
    fn settings(&self) -> BTreeMap<String, String> {
        [
            ("mesh", &self.mesh),
            ("family", &self.family),
            ("partition", &self.partition),
            ("flux", &self.flux),
            ("beta-minus", &self.beta_minus),
            ("beta-plus", &self.beta_plus),
            ("levels", &self.levels),
            ("n0", &self.n0),
            ("mode", &self.mode),
            ("out", &self.out),
            ("curve", &self.curve),
            ("r0", &self.r0),
        ]
        .into_iter()
        .filter_map(|(k, v)| v.clone().map(|v| (k.to_string(), v)))
        .collect()
    }
}

fn run(args: &StudyArgs) -> Result<(), Error> {
    let mut settings = match &args.config {
        Some(path) => read_config(path)?,
        None => BTreeMap::new(),
    };
    settings.extend(args.settings());
    let mut config = StudyConfig::default();
    config.apply(&settings)?;
    if config.out.is_none() {
        return Err(Error::Config("--out is required".into()));
    }
    study::run_study_with(&config, |level, n, errors| {
        let show = |name: &str, e: Option<(f64, f64)>| {
            if let Some((l2, h1)) = e {
                eprintln!("level {level} n={n} {name}: L2 {l2:.4e} H1 {h1:.4e}");
            }
        };
        show("interp", errors.interp);
        show("solve", errors.solve);
    })?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let Command::Study(args) = cli.command;
    match run(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ife-lab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
