use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, ValueEnum};
use stokes_treecode::harness::{self, Mode, ReportFormat, RunConfig, TestCase};
use stokes_treecode::testcases::{CubeCaseConfig, SphereCaseConfig, CUBE_DENSITY};
use stokes_treecode::{KernelSelection, TreecodeParams};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TestCaseArg {
    Sphere,
    Cube,
    File,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ShrinkArg {
    Auto,
    On,
    Off,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Tree,
    Direct,
    Both,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum KernelsArg {
    Stokeslet,
    Stresslet,
    Both,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Human,
}

/// Treecode for Stokeslet and stresslet sums, with direct-sum comparison.
#[derive(Debug, Parser)]
#[command(name = "stokes-treecode", version)]
struct Cli {
    /// Particle source.
    #[arg(long, value_enum, default_value = "sphere")]
    testcase: TestCaseArg,
    /// Particle count for the cube case.
    #[arg(long, default_value_t = 10_000)]
    n: usize,
    /// Refinement level for the sphere case (N = 20 * 4^L).
    #[arg(long, default_value_t = 3)]
    levels: u32,
    /// Number density for the cube case.
    #[arg(long, default_value_t = CUBE_DENSITY)]
    density: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Particle file for `--testcase file`.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Taylor orders; several values (comma separated) produce one row each.
    #[arg(long, value_delimiter = ',', default_value = "6")]
    order: Vec<usize>,
    /// MAC parameters, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "0.5")]
    theta: Vec<f64>,
    /// Leaf capacity.
    #[arg(long, default_value_t = 2000)]
    n0: usize,
    /// Shrink cluster boxes; `auto` is on for the sphere and off otherwise.
    #[arg(long, value_enum, default_value = "auto")]
    shrink: ShrinkArg,
    #[arg(long, value_enum, default_value = "both")]
    mode: ModeArg,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Kernels to sum. Defaults to both for particles carrying dipoles and
    /// to the Stokeslet otherwise.
    #[arg(long, value_enum)]
    kernels: Option<KernelsArg>,
    /// Evaluate the direct sum at this many targets and extrapolate its time.
    #[arg(long)]
    direct_samples: Option<usize>,
    /// Report destination; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "human")]
    format: FormatArg,
    /// Also save the generated particles in the text particle format.
    #[arg(long)]
    write_particles: Option<PathBuf>,
    /// Print peak resident memory to stderr when done.
    #[arg(long)]
    report_memory: bool,
}

fn build_config(cli: &Cli) -> anyhow::Result<RunConfig> {
    let wants_stresslet = matches!(cli.kernels, Some(KernelsArg::Stresslet | KernelsArg::Both));
    let testcase = match cli.testcase {
        TestCaseArg::Sphere => TestCase::Sphere(SphereCaseConfig::new(cli.levels, cli.seed)),
        TestCaseArg::Cube => {
            let mut cfg = CubeCaseConfig::new(cli.n, cli.seed);
            cfg.density = cli.density;
            if wants_stresslet {
                cfg = cfg.with_stresslets();
            }
            TestCase::Cube(cfg)
        }
        TestCaseArg::File => match &cli.input {
            Some(path) => TestCase::File(path.clone()),
            None => bail!("--testcase file needs --input <path>"),
        },
    };
    let mode = match cli.mode {
        ModeArg::Tree => Mode::Tree,
        ModeArg::Direct => Mode::Direct,
        ModeArg::Both => Mode::Both,
    };
    let mut config = RunConfig::new(mode, testcase);
    config.params = TreecodeParams {
        order: cli.order[0],
        theta: cli.theta[0],
        leaf_capacity: cli.n0,
        shrink: match cli.shrink {
            ShrinkArg::On => true,
            ShrinkArg::Off => false,
            ShrinkArg::Auto => matches!(cli.testcase, TestCaseArg::Sphere),
        },
        kernels: KernelSelection::STOKESLET,
        workers: cli.workers,
    };
    config.orders = cli.order.clone();
    config.thetas = cli.theta.clone();
    config.direct_samples = cli.direct_samples;
    config.output = cli.out.clone();
    config.format = match cli.format {
        FormatArg::Csv => ReportFormat::Csv,
        FormatArg::Human => ReportFormat::Human,
    };
    Ok(config)
}

fn main() -> ExitCode {
    match real_main() {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn real_main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    let mut config = build_config(&cli)?;
    let particles = config.particles().context("preparing particles")?;
    config.params.kernels = match cli.kernels {
        Some(KernelsArg::Stokeslet) => KernelSelection::STOKESLET,
        Some(KernelsArg::Stresslet) => KernelSelection::STRESSLET,
        Some(KernelsArg::Both) => KernelSelection::BOTH,
        None if particles.has_stresslets() => KernelSelection::BOTH,
        None => KernelSelection::STOKESLET,
    };
    if let Some(path) = &cli.write_particles {
        harness::write_particles(path, &particles)
            .with_context(|| format!("writing {}", path.display()))?;
    }
    let report = harness::run_on(&config, &particles)?;
    harness::write_report(&config, &report)?;
    if cli.report_memory {
        match harness::peak_rss_kib() {
            Some(kib) => eprintln!("peak resident memory: {} MiB", kib / 1024),
            None => eprintln!("peak resident memory: unavailable on this platform"),
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn defaults_follow_the_headline_configuration() {
        let cli = Cli::parse_from(["stokes-treecode"]);
        let cfg = build_config(&cli).unwrap();
        assert_eq!(cfg.params.order, 6);
        assert_eq!(cfg.params.theta, 0.5);
        assert_eq!(cfg.params.leaf_capacity, 2000);
        assert_eq!(cfg.params.workers, 1);
        assert!(cfg.params.shrink);

        let cube = Cli::parse_from(["stokes-treecode", "--testcase", "cube"]);
        assert!(!build_config(&cube).unwrap().params.shrink);
    }

    #[test]
    fn sweeps_parse_as_lists() {
        let cli = Cli::parse_from(["stokes-treecode", "--order", "0,2,4", "--theta", "0.8,0.2"]);
        let cfg = build_config(&cli).unwrap();
        assert_eq!(cfg.parameter_grid().len(), 6);
    }

    #[test]
    fn file_case_needs_input() {
        let cli = Cli::parse_from(["stokes-treecode", "--testcase", "file"]);
        assert!(build_config(&cli).is_err());
    }
}
