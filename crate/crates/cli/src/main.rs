mod plot;

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use kquad::experiments::{
    run_baseline_comparison, run_convergence, run_density_curves, run_ridge_bounds,
    spectrum_table, write_spectrum_csv,
};
use kquad::randfeat::{feature_count, Regime};
use kquad::{Error, Experiment, ExperimentConfig};

use plot::{line_chart, Scale, Series};

#[derive(Parser)]
#[command(name = "kquad", version, about = "Kernel quadrature experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Table of m*(λ), d(λ) and γ for reference spectra
    Spectrum(Common),
    /// Worst-case error of kernel quadrature against n
    Convergence(Common),
    /// Kernel quadrature against Simpson, Gauss-Legendre, Sobol and Monte Carlo
    Compare(Common),
    /// Optimized sampling densities for the spatial and Fourier expansions
    Density(Common),
    /// Ridge-fit error and weight-norm tail fractions, and feature counts
    Randfeat(Common),
}

#[derive(Args)]
struct Common {
    /// Configuration file with `key = value` lines
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    replicates: Option<usize>,
    /// Also write SVG charts next to the CSV files
    #[arg(long)]
    svg: bool,
}

enum Failure {
    Config(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_config_error() {
            Failure::Config(e.to_string())
        } else {
            Failure::Numerical(e.to_string())
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Config(format!("cannot write output: {e}"))
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Numerical(m) => m,
        }
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (experiment, common) = match &cli.command {
        Command::Spectrum(c) => (Experiment::Spectrum, c),
        Command::Convergence(c) => (Experiment::Convergence, c),
        Command::Compare(c) => (Experiment::Compare, c),
        Command::Density(c) => (Experiment::Density, c),
        Command::Randfeat(c) => (Experiment::Randfeat, c),
    };
    let result = load_config(experiment, common).and_then(|config| {
        fs::create_dir_all(&config.out)?;
        match experiment {
            Experiment::Spectrum => spectrum(&config),
            Experiment::Convergence => convergence(&config, common.svg),
            Experiment::Compare => compare(&config, common.svg),
            Experiment::Density => density(&config, common.svg),
            Experiment::Randfeat => randfeat(&config),
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            ExitCode::from(failure.code())
        }
    }
}

fn load_config(experiment: Experiment, common: &Common) -> Result<ExperimentConfig, Failure> {
    let mut config = match &common.config {
        Some(path) => ExperimentConfig::from_path(experiment, path)?,
        None => ExperimentConfig::defaults(experiment),
    };
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    if let Some(out) = &common.out {
        config.out = out.clone();
    }
    if let Some(r) = common.replicates {
        config.replicates = r;
    }
    config.validate()?;
    Ok(config)
}

fn create(dir: &Path, name: &str) -> std::io::Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn svg(path: PathBuf, title: &str, axes: ((&str, Scale), (&str, Scale)), series: &[Series]) -> Outcome {
    line_chart(&path, title, axes, series)
        .map_err(|e| Failure::Config(format!("cannot write {}: {e}", path.display())))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn as_f64(ns: &[usize]) -> Vec<f64> {
    ns.iter().map(|&n| n as f64).collect()
}

fn spectrum(config: &ExperimentConfig) -> Outcome {
    let rows = spectrum_table(&config.lambdas)?;
    let mut out = create(&config.out, "spectrum.csv")?;
    write_spectrum_csv(&rows, &mut out)?;
    out.flush()?;
    println!("{:<14} {:>8} {:>8} {:>12} {:>8} {:>12}", "family", "lambda", "m*", "d(lambda)", "m*/2", "(1+g)m*");
    for r in &rows {
        let m = r.m_star as f64;
        println!(
            "{:<14} {:>8.0e} {:>8} {:>12.4} {:>8.1} {:>12.4}",
            r.family,
            r.lambda,
            r.m_star,
            r.dof,
            m / 2.0,
            (1.0 + r.certified_gamma) * m
        );
    }
    Ok(())
}

fn convergence(config: &ExperimentConfig, want_svg: bool) -> Outcome {
    let r = run_convergence(config)?;
    let stem = format!("convergence_s{}_t{}", r.s, r.t);
    let mut out = create(&config.out, &format!("{stem}.csv"))?;
    r.write_csv(&mut out)?;
    out.flush()?;
    let mut out = create(&config.out, &format!("{stem}_fit.csv"))?;
    r.write_fit_csv(&mut out)?;
    out.flush()?;
    println!(
        "s={} t={}: u={:.3} log_c={:.3} residual={:.3} (fit over n >= {})",
        r.s,
        r.t,
        r.fit.u,
        r.fit.log_c(),
        r.fit.residual,
        r.fit_min_n
    );
    if want_svg {
        let ns = as_f64(&r.ns);
        let fitted: Vec<f64> = ns.iter().map(|n| r.fit.c * n.powf(-r.fit.u)).collect();
        svg(
            config.out.join(format!("{stem}.svg")),
            &format!("s={}, t={}: u={:.2}", r.s, r.t, r.fit.u),
            (("n", Scale::Log10), ("mean squared error", Scale::Log10)),
            &[
                Series::new("worst case", &ns, &r.mean_sq_error),
                Series::new("test functions", &ns, &r.mean_sq_test_error),
                Series::new("fit", &ns, &fitted),
            ],
        )?;
    }
    Ok(())
}

fn compare(config: &ExperimentConfig, want_svg: bool) -> Outcome {
    let r = run_baseline_comparison(config)?;
    let stem = format!("compare_s{}", r.s);
    let mut out = create(&config.out, &format!("{stem}.csv"))?;
    r.write_csv(&mut out)?;
    out.flush()?;
    let mut out = create(&config.out, &format!("{stem}_fit.csv"))?;
    r.write_fit_csv(&mut out)?;
    out.flush()?;
    for m in &r.series {
        println!("s={} {:<15} u={:.3} residual={:.3}", r.s, m.method, m.fit.u, m.fit.residual);
    }
    if want_svg {
        let series: Vec<Series> = r
            .series
            .iter()
            .map(|m| Series::new(format!("{} (u={:.2})", m.method, m.fit.u), &as_f64(&m.nodes), &m.mean_sq_error))
            .collect();
        svg(
            config.out.join(format!("{stem}.svg")),
            &format!("s={}", r.s),
            (("n", Scale::Log10), ("squared worst-case error", Scale::Log10)),
            &series,
        )?;
    }
    Ok(())
}

fn density(config: &ExperimentConfig, want_svg: bool) -> Outcome {
    let r = run_density_curves(config)?;
    let mut out = create(&config.out, "density_spatial.csv")?;
    r.spatial.write_csv(&mut out)?;
    out.flush()?;
    let mut out = create(&config.out, "density_fourier.csv")?;
    r.fourier.write_csv(&mut out)?;
    out.flush()?;
    for (i, lambda) in r.spatial.lambdas.iter().enumerate() {
        println!(
            "lambda={lambda:.0e}: spatial max/min {:.4}, Fourier counting max/min {:.4}",
            kquad::leverage::max_min_ratio(&r.spatial.wrt_input[i]),
            kquad::leverage::max_min_ratio(&r.fourier.wrt_counting[i])
        );
    }
    if want_svg {
        let label = |l: &f64| format!("lambda={l:.0e}");
        let spatial: Vec<Series> = r
            .spatial
            .lambdas
            .iter()
            .zip(&r.spatial.wrt_input)
            .map(|(l, q)| Series::new(label(l), &r.spatial.x, q))
            .collect();
        svg(
            config.out.join("density_spatial.svg"),
            "optimized density, quadrature features",
            (("x", Scale::Linear), ("density w.r.t. input", Scale::Log10)),
            &spatial,
        )?;
        let ks: Vec<f64> = r.fourier.k.iter().map(|&k| k as f64).collect();
        for (name, curves, axis) in [
            ("input", &r.fourier.wrt_input, "density w.r.t. input"),
            ("counting", &r.fourier.wrt_counting, "density w.r.t. counting"),
        ] {
            let series: Vec<Series> = r
                .fourier
                .lambdas
                .iter()
                .zip(curves)
                .map(|(l, q)| Series::new(label(l), &ks, q))
                .collect();
            svg(
                config.out.join(format!("density_fourier_{name}.svg")),
                "optimized density, Fourier features",
                (("k", Scale::Linear), (axis, Scale::Log10)),
                &series,
            )?;
        }
    }
    Ok(())
}

fn randfeat(config: &ExperimentConfig) -> Outcome {
    let r = run_ridge_bounds(config)?;
    let mut out = create(&config.out, "randfeat.csv")?;
    r.write_csv(&mut out)?;
    out.flush()?;
    println!(
        "lambda={:.0e} d={:.3} n={} terms={}: P(error > 4 lambda)={:.3}, P(|beta|^2 > 4/n)={:.3}",
        r.lambda, r.dof, r.n, r.terms, r.fraction_error_exceeds, r.fraction_beta_exceeds
    );
    let s = config.s as f64;
    println!("{:>10} {:>12} {:>14} {:>10}", "m", "worst_case", format!("polynomial:{s}"), "geometric");
    for m in [100u64, 1_000, 10_000, 1_000_000] {
        println!(
            "{m:>10} {:>12} {:>14} {:>10}",
            feature_count(Regime::WorstCase, m)?,
            feature_count(Regime::Polynomial { s }, m)?,
            feature_count(Regime::Geometric, m)?
        );
    }
    Ok(())
}
