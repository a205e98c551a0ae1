use std::io::IsTerminal;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use igstqa::codec::{self, RRPayload};
use igstqa::distort::DistortionSpec;
use igstqa::eval::{self, Database};
use igstqa::io::{load_image, save_image};
use igstqa::{Boundary, Config, DomainSelection, Error};

#[derive(Parser)]
#[command(name = "igstqa", version, about = "Reduced-reference quality index for synthesized textures")]
struct Cli {
    #[command(flatten)]
    config: ConfigArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Wavelet decomposition levels.
    #[arg(long, global = true, default_value_t = igstqa::DEFAULT_LEVELS)]
    levels: usize,
    /// Pooling constant.
    #[arg(long, global = true, default_value_t = igstqa::DEFAULT_ALPHA)]
    alpha: f64,
    #[arg(long, global = true, value_enum, default_value_t = Domains::Both)]
    domains: Domains,
    /// Border handling; periodic is meant for shift experiments.
    #[arg(long, global = true, value_enum, default_value_t = BoundaryArg::Symmetric)]
    boundary: BoundaryArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum Domains {
    Both,
    Spatial,
    Gradient,
}

#[derive(Clone, Copy, ValueEnum)]
enum BoundaryArg {
    Symmetric,
    Periodic,
}

#[derive(Clone, Copy, ValueEnum)]
enum DatabaseArg {
    Syntex,
    Parametric,
}

#[derive(Subcommand)]
enum Command {
    /// Extract reference features into an .igstqa.json payload.
    Extract { image: PathBuf, out: PathBuf },
    /// Score a synthesized image against a reference image or payload.
    Score {
        reference: PathBuf,
        synth: PathBuf,
    },
    /// Score a `pair_id,ref,syn,dmos` manifest and report PLCC/SROCC/RMSE.
    Evaluate {
        manifest: PathBuf,
        /// JSON report path; the table goes next to it with a .txt extension.
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Add the published results for this database to the report.
        #[arg(long, value_enum)]
        database: Option<DatabaseArg>,
    },
    /// Apply a `kind:magnitude[:seed]` degradation (blur, tile_shuffle, misalign).
    Distort {
        image: PathBuf,
        spec: String,
        out: PathBuf,
    },
}

impl ConfigArgs {
    fn to_config(&self) -> Config {
        Config {
            levels: self.levels,
            alpha: self.alpha,
            domains: match self.domains {
                Domains::Both => DomainSelection::Both,
                Domains::Spatial => DomainSelection::Spatial,
                Domains::Gradient => DomainSelection::Gradient,
            },
            boundary: match self.boundary {
                BoundaryArg::Symmetric => Boundary::Symmetric,
                BoundaryArg::Periodic => Boundary::Periodic,
            },
        }
    }
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Row { source, .. } => exit_code(source),
        Error::FeatureSetMismatch(_) | Error::InvalidConfig(_) | Error::InvalidAlpha | Error::TooManyLevels => 3,
        Error::InsufficientData { .. } | Error::DegenerateRanking | Error::DegenerateInput => 4,
        Error::Numerical(_) | Error::NonFiniteFeature | Error::DegenerateSubband => 5,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = cli.config.to_config();
    let result = config.validate().and_then(|_| run(cli.command, &config));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("igstqa: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn run(command: Command, config: &Config) -> igstqa::Result<()> {
    match command {
        Command::Extract { image, out } => {
            let img = load_image(&image)?.image;
            let payload = RRPayload::from_image(&img, config)?;
            let bytes = codec::encode(&payload)?;
            std::fs::write(&out, &bytes)?;
            println!("{} scalars, {} bytes -> {}", payload.scalar_count(), bytes.len(), out.display());
        }
        Command::Score { reference, synth } => {
            println!("{}", eval::score_paths(&reference, &synth, config)?);
        }
        Command::Evaluate {
            manifest,
            report,
            jobs,
            database,
        } => {
            let database = database.map(|d| match d {
                DatabaseArg::Syntex => Database::SyntexGranularity,
                DatabaseArg::Parametric => Database::ParametricQa,
            });
            let outcome = eval::run_benchmark(&manifest, config, jobs, database)?;
            let report_path = report.unwrap_or_else(|| default_report_path(&manifest));
            std::fs::write(&report_path, outcome.report.to_json()?)?;
            std::fs::write(report_path.with_extension("txt"), outcome.report.render_table(false))?;
            let styled = std::env::var_os("IGSTQA_NO_COLOR").is_none() && std::io::stdout().is_terminal();
            print!("{}", outcome.report.render_table(styled));
            eprintln!("report written to {}", report_path.display());
        }
        Command::Distort { image, spec, out } => {
            let spec: DistortionSpec = spec.parse()?;
            let loaded = load_image(&image)?;
            save_image(&out, &spec.apply(&loaded.image)?, loaded.depth)?;
        }
    }
    Ok(())
}

fn default_report_path(manifest: &Path) -> PathBuf {
    manifest.with_extension("report.json")
}
