use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use heisur::harness::{run_experiment, ExperimentConfig, Mode};

#[derive(Parser)]
#[command(name = "heisur", version, about = "Quantitative rectifiability experiments in the Heisenberg group")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run invariant suites (algebra, projections, monotonicity, measure, cubes, angles, all).
    Verify(Common),
    /// Non-monotonicity and width of the packaged region around the surface anchor.
    Nm(Common),
    /// Dyadic width-Carleson sums against R^(2k+1)/eps.
    WidthCarleson(Common),
    /// Packing sums of β-numbers over David cubes.
    Bwgl(Common),
    /// Direction-averaged vertical projection measures.
    Favard(Common),
    /// Greedy cone-separated subsets of a surface cloud.
    Extract(Common),
    /// Paired width and bilateral β over a 20-probe design.
    Flatness(Common),
}

#[derive(Args, Clone)]
struct Common {
    /// Key = value configuration file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    surface: Option<String>,
    #[arg(long)]
    eps: Option<f64>,
    /// Comma-separated radii.
    #[arg(long)]
    radii: Option<String>,
    #[arg(long)]
    n_lines: Option<usize>,
    #[arg(long)]
    n_dirs: Option<usize>,
    #[arg(long)]
    delta: Option<f64>,
    /// Output directory for CSV tables and the JSON summary.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    suite: Option<String>,
    #[arg(long)]
    cases: Option<usize>,
    #[arg(long)]
    cloud_size: Option<usize>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    scales: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    top_level: Option<i32>,
    #[arg(long, allow_hyphen_values = true)]
    bottom_level: Option<i32>,
    /// Worker threads (defaults to all cores); outputs do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
}

impl Common {
    fn config(&self) -> heisur::Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::read(p)?,
            None => ExperimentConfig::default(),
        };
        let mut set = |key: &str, v: Option<String>| -> heisur::Result<()> {
            match v {
                Some(v) => cfg.set(key, &v),
                None => Ok(()),
            }
        };
        set("k", self.k.map(|x| x.to_string()))?;
        set("seed", self.seed.map(|x| x.to_string()))?;
        set("surface", self.surface.clone())?;
        set("eps", self.eps.map(|x| x.to_string()))?;
        set("radii", self.radii.clone())?;
        set("n_lines", self.n_lines.map(|x| x.to_string()))?;
        set("n_dirs", self.n_dirs.map(|x| x.to_string()))?;
        set("delta", self.delta.map(|x| x.to_string()))?;
        set("out", self.out.as_ref().map(|p| p.display().to_string()))?;
        set("suite", self.suite.clone())?;
        set("cases", self.cases.map(|x| x.to_string()))?;
        set("cloud_size", self.cloud_size.map(|x| x.to_string()))?;
        set("gamma", self.gamma.map(|x| x.to_string()))?;
        set("scales", self.scales.map(|x| x.to_string()))?;
        set("top_level", self.top_level.map(|x| x.to_string()))?;
        set("bottom_level", self.bottom_level.map(|x| x.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (mode, common) = match cli.command {
        Command::Verify(c) => (Mode::Verify, c),
        Command::Nm(c) => (Mode::Nm, c),
        Command::WidthCarleson(c) => (Mode::WidthCarleson, c),
        Command::Bwgl(c) => (Mode::Bwgl, c),
        Command::Favard(c) => (Mode::Favard, c),
        Command::Extract(c) => (Mode::Extract, c),
        Command::Flatness(c) => (Mode::Flatness, c),
    };
    if let Some(n) = common.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global() {
            eprintln!("error: could not configure {n} threads: {e}");
            return ExitCode::from(2);
        }
    }
    let cfg = match common.config() {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let report = match run_experiment(&cfg, mode) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if cfg.out.is_none() {
        for t in &report.results {
            println!("# {}", t.name);
            print!("{}", t.to_csv());
        }
    }
    for v in &report.verdicts {
        println!("{} {}: {}", if v.passed { "PASS" } else { "FAIL" }, v.check, v.detail);
    }
    if let Some(dir) = &cfg.out {
        println!("wrote {} tables and {}.json to {}", report.results.len(), report.experiment, dir.display());
    }
    eprintln!("wall clock: {:.3} s", report.wall_clock.as_secs_f64());
    if report.all_passed() { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
