use std::error::Error as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mlnet::commands::{self, RunOptions};

#[derive(Parser)]
#[command(name = "mlnet", version, about = "Spectral statistics of multilayer networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Output root; artifacts go to <out>/<experiment-name>/.
    #[arg(long, env = "MLNET_OUT", default_value = "out")]
    out: PathBuf,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Override the experiment's master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Use the full figure dimensions from the experiment's paper_scale block.
    #[arg(long)]
    paper_scale: bool,
    /// Also write SVG plots.
    #[arg(long)]
    svg: bool,
}

impl Common {
    fn options(&self) -> RunOptions {
        RunOptions {
            out: self.out.clone(),
            jobs: self.jobs,
            seed: self.seed,
            paper_scale: self.paper_scale,
            svg: self.svg,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate density and cumulative distribution for each alpha.
    Analytic {
        #[arg(long, value_delimiter = ',', default_value = "1,2,4,8")]
        alpha: Vec<f64>,
        #[arg(long, default_value_t = 5.0)]
        rmax: f64,
        #[arg(long, default_value_t = 0.01)]
        step: f64,
        /// Read alphas and grid from an analytic experiment file instead.
        #[arg(long, conflicts_with_all = ["alpha", "rmax", "step"])]
        experiment: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Run an ensemble experiment.
    Simulate {
        #[arg(long)]
        experiment: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Run a crossover (gamma) sweep.
    Crossover {
        #[arg(long)]
        experiment: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Run a protein threshold sweep.
    Protein {
        #[arg(long)]
        experiment: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Analytic {
            alpha,
            rmax,
            step,
            experiment,
            common,
        } => match experiment {
            Some(path) => commands::cmd_analytic_file(path, &common.options()),
            None => commands::cmd_analytic(alpha, *rmax, *step, &common.options()),
        },
        Command::Simulate { experiment, common } => commands::cmd_simulate(experiment, &common.options()),
        Command::Crossover { experiment, common } => commands::cmd_crossover(experiment, &common.options()),
        Command::Protein { experiment, common } => commands::cmd_protein(experiment, &common.options()),
    };
    match result {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = e.source();
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::FAILURE
        }
    }
}
