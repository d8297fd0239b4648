use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use holocorr::correspondence::IterateBudget;
use holocorr::poly::write_polynomial;
use holocorr_cli::{
    eval_points, load_correspondence, run, CliError, CliResult, ExperimentConfig, ExperimentKind, StrategyName,
};

#[derive(Parser)]
#[command(name = "holocorr", version, about = "Experiments with holomorphic correspondences on P1")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Forward (or backward) fiber of a point; omit the coordinates for infinity.
    Eval {
        correspondence: String,
        re: Option<f64>,
        im: Option<f64>,
        #[arg(long)]
        backward: bool,
    },
    /// Graph of `f o g` (first g, then f) in the polynomial text format.
    Compose { f: String, g: String },
    /// Graph of the n-th iterate in the polynomial text format.
    Iterate { correspondence: String, n: u32 },
    /// Backward and forward equilibrium clouds with moments.
    Equilibrium(Overrides),
    /// Pairing of normalized graph currents against test forms, with rate fit.
    Pair(Overrides),
    /// Periodic points of the n-th iterate and their multipliers.
    Periodic(Overrides),
    /// Operator-norm estimates for the normalized pushforward on (1,0)-forms.
    Contraction(Overrides),
    /// Fourier shell sums and tail bounds for the cutoff kernel.
    Fourier(Overrides),
    /// Timing table over every experiment kind.
    Bench(Overrides),
}

#[derive(Args)]
struct Overrides {
    /// Builtin name or polynomial file; overrides the config.
    correspondence: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    strategy: Option<StrategyName>,
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    nmax: Option<usize>,
}

impl Overrides {
    fn config(self, kind: ExperimentKind) -> CliResult<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::from_json(
                &std::fs::read_to_string(p)
                    .map_err(|e| CliError::Validation { field: "config", msg: format!("{}: {e}", p.display()) })?,
            )?,
            None => ExperimentConfig::default(),
        };
        cfg.kind = kind;
        if let Some(c) = self.correspondence {
            cfg.correspondence = c;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(o) = self.out {
            cfg.out = o;
        }
        if let Some(s) = self.strategy {
            cfg.strategy = s;
        }
        if let Some(g) = self.grid {
            cfg.grid = g;
        }
        if let Some(n) = self.nmax {
            cfg.n_max = n;
        }
        Ok(cfg)
    }
}

fn experiment(o: Overrides, kind: ExperimentKind) -> CliResult<()> {
    let cfg = o.config(kind)?;
    for f in run(&cfg)?.files {
        println!("{}", f.display());
    }
    Ok(())
}

fn dispatch(cli: Cli) -> CliResult<()> {
    match cli.cmd {
        Command::Eval { correspondence, re, im, backward } => {
            let f = load_correspondence(&correspondence)?;
            let z = re.map(|r| (r, im.unwrap_or(0.0)));
            println!("{}", serde_json::to_string_pretty(&eval_points(&f, z, backward)?).expect("json"));
        }
        Command::Compose { f, g } => {
            let (f, g) = (load_correspondence(&f)?, load_correspondence(&g)?);
            let h = f.compose(&g)?;
            if !h.report.removed.is_empty() {
                eprintln!("stripped {} fiber factor(s)", h.report.removed.len());
            }
            print!("{}", write_polynomial(None, h.correspondence.graph()));
        }
        Command::Iterate { correspondence, n } => {
            let f = load_correspondence(&correspondence)?;
            let g = f.iterate(n, &IterateBudget::default())?;
            print!("{}", write_polynomial(g.name(), g.graph()));
        }
        Command::Equilibrium(o) => experiment(o, ExperimentKind::Equilibrium)?,
        Command::Pair(o) => experiment(o, ExperimentKind::Pair)?,
        Command::Periodic(o) => experiment(o, ExperimentKind::Periodic)?,
        Command::Contraction(o) => experiment(o, ExperimentKind::Contraction)?,
        Command::Fourier(o) => experiment(o, ExperimentKind::Fourier)?,
        Command::Bench(o) => experiment(o, ExperimentKind::Bench)?,
    }
    Ok(())
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
