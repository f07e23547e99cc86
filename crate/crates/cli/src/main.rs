use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use fiolab::lab::{self, ExperimentConfig, ExperimentKind, Report, Verdict};

#[derive(Parser)]
#[command(name = "fiolab", version, about = "Maximal-function experiments on periodic lattices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// JSON configuration; defaults apply to every absent key.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory for CSV and SVG reports.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Print nothing but errors.
    #[arg(long)]
    quiet: bool,
}

#[derive(Args)]
struct FileArgs {
    /// Report CSV files.
    #[arg(required = true)]
    csv: Vec<PathBuf>,
    /// Output directory; next to each input when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Maximal function against the HPFIO norm across shells.
    Sweep(RunArgs),
    /// Lower-bound growth from tubes and Knapp sums.
    Sharpness(RunArgs),
    /// HPFIO norms against Sobolev norms.
    Embedding(RunArgs),
    /// Uniformity of the packet flow constant.
    Flow(RunArgs),
    /// Tube measures and the tube lower bound.
    Tube(RunArgs),
    /// Rate of pointwise convergence as t -> 0.
    Converge(RunArgs),
    /// Spectral means against direct quadrature.
    Oracle(RunArgs),
    /// Recompute the checks of report CSVs and rewrite them.
    Fit(FileArgs),
    /// Render report CSVs as SVG.
    Plot(FileArgs),
}

fn main() -> ExitCode {
    match real_main() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn real_main() -> Result<bool> {
    let cli = Cli::parse();
    let (kind, args) = match cli.command {
        Command::Sweep(a) => (ExperimentKind::UpperBoundSweep, a),
        Command::Sharpness(a) => (ExperimentKind::KnappSharpness, a),
        Command::Embedding(a) => (ExperimentKind::Embedding, a),
        Command::Flow(a) => (ExperimentKind::FlowLemma, a),
        Command::Tube(a) => (ExperimentKind::TubeBound, a),
        Command::Converge(a) => (ExperimentKind::Convergence, a),
        Command::Oracle(a) => (ExperimentKind::MeanOracle, a),
        Command::Fit(a) => return fit(&a),
        Command::Plot(a) => return plot(&a),
    };
    run(kind, &args)
}

fn run(kind: ExperimentKind, args: &RunArgs) -> Result<bool> {
    let mut cfg = match &args.config {
        Some(path) => ExperimentConfig::load(path).with_context(|| format!("reading {}", path.display()))?,
        None => ExperimentConfig::default(),
    };
    match cfg.experiment {
        Some(k) if k != kind => bail!("configuration is for {}, not {}", k.tag(), kind.tag()),
        _ => cfg.experiment = Some(kind),
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let out = args
        .out
        .clone()
        .or_else(|| cfg.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("results"));
    let reports = lab::run(&cfg)?;
    let written = lab::write_reports(&reports, &out)?;
    if !args.quiet {
        for (r, path) in reports.iter().zip(&written) {
            summarize(r, path);
        }
    }
    Ok(reports.iter().all(Report::passed))
}

fn load(path: &Path) -> Result<Report> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Report::from_csv(&text).with_context(|| format!("parsing {}", path.display()))
}

fn target(args: &FileArgs, input: &Path, ext: &str) -> Result<PathBuf> {
    let name = input
        .file_stem()
        .with_context(|| format!("{} has no file name", input.display()))?;
    let dir = match &args.out {
        Some(d) => {
            std::fs::create_dir_all(d)?;
            d.clone()
        }
        None => input.parent().map(Path::to_path_buf).unwrap_or_default(),
    };
    // stems may contain dots, so append rather than replace the extension
    let mut file = name.to_os_string();
    file.push(format!(".{ext}"));
    Ok(dir.join(file))
}

fn fit(args: &FileArgs) -> Result<bool> {
    let mut ok = true;
    for path in &args.csv {
        let r = load(path)?.refit();
        let dest = target(args, path, "csv")?;
        std::fs::write(&dest, r.to_csv()?)?;
        if !args.quiet {
            summarize(&r, &dest);
        }
        ok &= r.passed();
    }
    Ok(ok)
}

fn plot(args: &FileArgs) -> Result<bool> {
    for path in &args.csv {
        let r = load(path)?;
        let dest = target(args, path, "svg")?;
        std::fs::write(&dest, lab::render_svg(&r))?;
        if !args.quiet {
            println!("{}", dest.display());
        }
    }
    Ok(true)
}

fn summarize(r: &Report, path: &Path) {
    println!("{}", path.display());
    for c in &r.checks {
        let v = match c.verdict() {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Na => "info",
        };
        println!(
            "  {v:4}  {:<24} observed {:>10.4}  predicted {:>8.4}  tol {:.3}",
            c.name, c.observed, c.predicted, c.tolerance
        );
    }
}
