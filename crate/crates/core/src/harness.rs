//! Benchmark driver: error metric, particle files, timed runs and reports.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::engine::{Treecode, TreecodeParams};
use crate::error::{Result, TreecodeError};
use crate::kernel;
use crate::particles::{KernelSelection, ParticleSet, SourceArrays, Vec3};
use crate::testcases::{cube_particles, sphere_particles, CubeCaseConfig, SphereCaseConfig};

/// Relative L2 error `sqrt(sum |u_d - u_t|^2 / sum |u_d|^2)`.
pub fn relative_error(direct: &[Vec3], approx: &[Vec3]) -> Result<f64> {
    if direct.len() != approx.len() || direct.is_empty() {
        return Err(TreecodeError::Usage(format!(
            "error needs two non-empty fields of equal length, got {} and {}",
            direct.len(),
            approx.len()
        )));
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for (d, t) in direct.iter().zip(approx) {
        for c in 0..3 {
            num += (d[c] - t[c]) * (d[c] - t[c]);
            den += d[c] * d[c];
        }
    }
    if den == 0.0 {
        return Err(TreecodeError::InvalidParticles(
            "reference velocity field is identically zero".into(),
        ));
    }
    Ok((num / den).sqrt())
}

// ---------------------------------------------------------------------------
// Particle files
// ---------------------------------------------------------------------------

/// Writes the whitespace-separated particle format: a header naming the
/// column blocks (`x f` or `x f h nu`), then one row per particle with every
/// value printed to 17 significant digits.
pub fn write_particles(path: &Path, particles: &ParticleSet) -> Result<()> {
    let io_err = |source| TreecodeError::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = File::create(path).map_err(io_err)?;
    let mut w = BufWriter::new(file);
    format_particles(particles, &mut w).map_err(io_err)?;
    w.flush().map_err(io_err)
}

pub fn format_particles(particles: &ParticleSet, w: &mut impl Write) -> io::Result<()> {
    let stress = match (&particles.dipoles, &particles.normals) {
        (Some(h), Some(nu)) => Some((h, nu)),
        _ => None,
    };
    writeln!(w, "{}", if stress.is_some() { "x f h nu" } else { "x f" })?;
    let mut line = String::new();
    for i in 0..particles.len() {
        line.clear();
        let mut blocks = vec![particles.positions[i], particles.forces[i]];
        if let Some((h, nu)) = stress {
            blocks.push(h[i]);
            blocks.push(nu[i]);
        }
        for (k, v) in blocks.iter().flatten().enumerate() {
            if k > 0 {
                line.push(' ');
            }
            write!(line, "{v:.16e}").expect("writing to a String cannot fail");
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}

pub fn read_particles(path: &Path) -> Result<ParticleSet> {
    let file = File::open(path).map_err(|source| TreecodeError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_particles(file, path)
}

/// Parses the particle format from any reader; `name` is used in errors.
pub fn parse_particles(reader: impl Read, name: &Path) -> Result<ParticleSet> {
    let parse_err = |line: usize, message: String| TreecodeError::Parse {
        path: name.to_path_buf(),
        line,
        message,
    };
    let mut lines = BufReader::new(reader).lines();
    let header = match lines.next() {
        Some(line) => line.map_err(|source| TreecodeError::Io {
            path: name.to_path_buf(),
            source,
        })?,
        None => return Err(parse_err(1, "missing header line".into())),
    };
    let blocks: Vec<&str> = header.split_whitespace().collect();
    let stress = match blocks.as_slice() {
        ["x", "f"] => false,
        ["x", "f", "h", "nu"] => true,
        _ => {
            return Err(parse_err(
                1,
                format!("header must be `x f` or `x f h nu`, found `{header}`"),
            ))
        }
    };
    let width = if stress { 12 } else { 6 };

    let mut positions = Vec::new();
    let mut forces = Vec::new();
    let mut dipoles = Vec::new();
    let mut normals = Vec::new();
    for (k, line) in lines.enumerate() {
        let number = k + 2;
        let line = line.map_err(|source| TreecodeError::Io {
            path: name.to_path_buf(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let values = line
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>()
                    .map_err(|e| parse_err(number, format!("bad number `{tok}`: {e}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        if values.len() != width {
            return Err(parse_err(
                number,
                format!("expected {width} fields, found {}", values.len()),
            ));
        }
        let v = |b: usize| [values[3 * b], values[3 * b + 1], values[3 * b + 2]];
        positions.push(v(0));
        forces.push(v(1));
        if stress {
            dipoles.push(v(2));
            normals.push(v(3));
        }
    }
    Ok(if stress {
        ParticleSet::with_stresslets(positions, forces, dipoles, normals)
    } else {
        ParticleSet::new(positions, forces)
    })
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

/// One benchmark row. Direct-sum columns are empty in tree-only runs and
/// treecode columns are empty in direct-only runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    #[serde(rename = "N")]
    pub n: usize,
    pub p: usize,
    pub theta: f64,
    pub n0: usize,
    pub workers: usize,
    pub time_direct_s: Option<f64>,
    pub time_tree_s: Option<f64>,
    pub speedup: Option<f64>,
    #[serde(rename = "error_E")]
    pub error: Option<f64>,
    pub farfield_evals: Option<u64>,
    pub direct_evals: Option<u64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    pub fn write_csv(&self, w: impl Write) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        if self.rows.is_empty() {
            out.write_record([
                "N",
                "p",
                "theta",
                "n0",
                "workers",
                "time_direct_s",
                "time_tree_s",
                "speedup",
                "error_E",
                "farfield_evals",
                "direct_evals",
            ])?;
        }
        for row in &self.rows {
            out.serialize(row)?;
        }
        out.flush().map_err(|e| TreecodeError::Csv(e.into()))?;
        Ok(())
    }

    pub fn read_csv(r: impl Read) -> Result<Self> {
        let mut reader = csv::Reader::from_reader(r);
        let rows = reader.deserialize().collect::<std::result::Result<_, _>>()?;
        Ok(Self { rows })
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    /// Fixed-width table for terminals.
    pub fn to_human(&self) -> String {
        let opt = |v: Option<f64>, prec: usize| v.map_or("-".to_string(), |x| format!("{x:.prec$}"));
        let sci = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.1e}"));
        let int = |v: Option<u64>| v.map_or("-".to_string(), |x| x.to_string());
        let mut s = format!(
            "{:>9} {:>3} {:>5} {:>6} {:>3} {:>11} {:>11} {:>8} {:>9} {:>12} {:>12}\n",
            "N", "p", "theta", "n0", "np", "direct [s]", "tree [s]", "d/t", "E", "far-field", "direct"
        );
        for r in &self.rows {
            s.push_str(&format!(
                "{:>9} {:>3} {:>5} {:>6} {:>3} {:>11} {:>11} {:>8} {:>9} {:>12} {:>12}\n",
                r.n,
                r.p,
                r.theta,
                r.n0,
                r.workers,
                opt(r.time_direct_s, 3),
                opt(r.time_tree_s, 3),
                opt(r.speedup, 2),
                sci(r.error),
                int(r.farfield_evals),
                int(r.direct_evals),
            ));
        }
        s
    }
}

// ---------------------------------------------------------------------------
// Runs
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Tree,
    Direct,
    Both,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TestCase {
    Sphere(SphereCaseConfig),
    Cube(CubeCaseConfig),
    File(PathBuf),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Human,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    pub testcase: TestCase,
    /// Shared treecode settings. `params.order` and `params.theta` are used
    /// when `orders` / `thetas` are empty.
    pub params: TreecodeParams,
    /// Orders to sweep; one report row per `(theta, order)` pair.
    pub orders: Vec<usize>,
    pub thetas: Vec<f64>,
    /// Evaluate the direct sum at this many evenly spaced targets only and
    /// scale its time to all `N` targets. The error is then measured at
    /// those targets.
    pub direct_samples: Option<usize>,
    pub output: Option<PathBuf>,
    pub format: ReportFormat,
}

impl RunConfig {
    pub fn new(mode: Mode, testcase: TestCase) -> Self {
        Self {
            mode,
            testcase,
            params: TreecodeParams::default(),
            orders: Vec::new(),
            thetas: Vec::new(),
            direct_samples: None,
            output: None,
            format: ReportFormat::Csv,
        }
    }

    /// Treecode parameter sets in report order: theta-major, then order.
    pub fn parameter_grid(&self) -> Vec<TreecodeParams> {
        let orders = if self.orders.is_empty() { vec![self.params.order] } else { self.orders.clone() };
        let thetas = if self.thetas.is_empty() { vec![self.params.theta] } else { self.thetas.clone() };
        thetas
            .iter()
            .flat_map(|&theta| {
                orders.iter().map(move |&order| TreecodeParams {
                    order,
                    theta,
                    ..self.params
                })
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        for p in self.parameter_grid() {
            p.validate()?;
        }
        if self.direct_samples == Some(0) {
            return Err(TreecodeError::InvalidParams("direct samples must be at least 1".into()));
        }
        if let TestCase::Cube(c) = &self.testcase {
            if c.n == 0 || !(c.density > 0.0 && c.density.is_finite()) {
                return Err(TreecodeError::InvalidParams(
                    "cube case needs N >= 1 and a positive density".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn particles(&self) -> Result<ParticleSet> {
        Ok(match &self.testcase {
            TestCase::Sphere(cfg) => sphere_particles(cfg),
            TestCase::Cube(cfg) => cube_particles(cfg),
            TestCase::File(path) => read_particles(path)?,
        })
    }
}

/// Direct-sum velocities at a subset of targets and the time they took.
#[derive(Debug, Clone)]
pub struct DirectRun {
    /// Target indices, ascending.
    pub targets: Vec<usize>,
    pub velocities: Vec<Vec3>,
    /// Measured wall time of the summation loop.
    pub elapsed: Duration,
    /// `elapsed` scaled to all `N` targets.
    pub full_time: Duration,
}

/// Times the contracted direct sum at `samples` evenly spaced targets (all
/// targets when `None` or not smaller than `N`). Only the summation loop is
/// timed.
pub fn timed_direct(
    particles: &ParticleSet,
    kernels: KernelSelection,
    workers: usize,
    samples: Option<usize>,
) -> Result<DirectRun> {
    particles.validate(kernels)?;
    if workers == 0 {
        return Err(TreecodeError::InvalidParams("workers must be at least 1".into()));
    }
    let n = particles.len();
    let targets: Vec<usize> = match samples {
        Some(m) if m < n => (0..m).map(|i| i * n / m).collect(),
        _ => (0..n).collect(),
    };
    let order: Vec<usize> = (0..n).collect();
    let sources = SourceArrays::gather(particles, kernels, &order);
    let mut velocities = vec![[0.0; 3]; targets.len()];
    let start = Instant::now();
    crate::engine::for_each_segment(&mut velocities, workers, |offset, chunk| {
        for (k, u) in chunk.iter_mut().enumerate() {
            *u = kernel::direct_sum(&sources, 0..n, targets[offset + k], kernels);
        }
    });
    let elapsed = start.elapsed();
    let full_time = elapsed.mul_f64(n as f64 / targets.len() as f64);
    Ok(DirectRun {
        targets,
        velocities,
        elapsed,
        full_time,
    })
}

/// Generates or loads the particles, runs the selected modes and collects
/// one report row per treecode parameter set.
pub fn run(config: &RunConfig) -> Result<BenchReport> {
    config.validate()?;
    let particles = config.particles()?;
    run_on(config, &particles)
}

/// [`run`] on particles the caller already holds.
pub fn run_on(config: &RunConfig, particles: &ParticleSet) -> Result<BenchReport> {
    config.validate()?;
    let base = config.params;
    particles.validate(base.kernels)?;
    let n = particles.len();

    let direct = match config.mode {
        Mode::Direct | Mode::Both => Some(timed_direct(
            particles,
            base.kernels,
            base.workers,
            config.direct_samples,
        )?),
        Mode::Tree => None,
    };

    let mut rows = Vec::new();
    if config.mode == Mode::Direct {
        rows.push(BenchRow {
            n,
            p: base.order,
            theta: base.theta,
            n0: base.leaf_capacity,
            workers: base.workers,
            time_direct_s: direct.as_ref().map(|d| d.full_time.as_secs_f64()),
            time_tree_s: None,
            speedup: None,
            error: None,
            farfield_evals: None,
            direct_evals: None,
        });
        return Ok(BenchReport { rows });
    }

    for params in config.parameter_grid() {
        let treecode = Treecode::new(particles, &params)?;
        let result = treecode.evaluate(params.workers);
        let time_tree = result.stats.total_time().as_secs_f64();
        let (time_direct, speedup, error) = match &direct {
            Some(d) => {
                let approx: Vec<Vec3> = d.targets.iter().map(|&i| result.velocities[i]).collect();
                let td = d.full_time.as_secs_f64();
                (
                    Some(td),
                    Some(td / time_tree.max(f64::MIN_POSITIVE)),
                    Some(relative_error(&d.velocities, &approx)?),
                )
            }
            None => (None, None, None),
        };
        rows.push(BenchRow {
            n,
            p: params.order,
            theta: params.theta,
            n0: params.leaf_capacity,
            workers: params.workers,
            time_direct_s: time_direct,
            time_tree_s: Some(time_tree),
            speedup,
            error,
            farfield_evals: Some(result.stats.farfield_evals),
            direct_evals: Some(result.stats.direct_evals),
        });
    }
    Ok(BenchReport { rows })
}

/// Writes `report` in the configured format to `config.output`, or to
/// standard output.
pub fn write_report(config: &RunConfig, report: &BenchReport) -> Result<()> {
    let text = match config.format {
        ReportFormat::Csv => report.to_csv_string()?,
        ReportFormat::Human => report.to_human(),
    };
    match &config.output {
        Some(path) => std::fs::write(path, text).map_err(|source| TreecodeError::Io {
            path: path.clone(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Peak resident set size in KiB, where the platform reports it.
pub fn peak_rss_kib() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    status
        .lines()
        .find_map(|l| l.strip_prefix("VmHWM:"))
        .and_then(|v| v.trim().trim_end_matches("kB").trim().parse().ok())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn error_examples() {
        let d = vec![[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
        assert_eq!(relative_error(&d, &d).unwrap(), 0.0);
        assert_eq!(relative_error(&d, &[[0.0; 3]; 2]).unwrap(), 1.0);
        let t = vec![[1.1, 0.0, 0.0], [0.0, 1.0, 0.0]];
        let e = relative_error(&d, &t).unwrap();
        assert!((e - 0.1 / 2f64.sqrt()).abs() < 1e-15);
        assert!((e - 0.0707107).abs() < 1e-7);
    }

    #[test]
    fn error_rejects_bad_fields() {
        assert!(relative_error(&[[0.0; 3]], &[[1.0; 3]]).is_err());
        assert!(relative_error(&[], &[]).is_err());
        assert!(relative_error(&[[1.0; 3]], &[]).is_err());
    }

    proptest! {
        #[test]
        fn error_is_scale_invariant(
            d in prop::collection::vec(prop::array::uniform3(-10.0f64..10.0), 1..20),
            noise in prop::collection::vec(prop::array::uniform3(-0.1f64..0.1), 20),
            scale in prop::sample::select(vec![-3.0, 1e-3, 2.0, 1e6]),
        ) {
            prop_assume!(d.iter().flatten().any(|&c| c.abs() > 1e-6));
            let t: Vec<Vec3> = d.iter().zip(&noise).map(|(a, b)| [a[0] + b[0], a[1] + b[1], a[2] + b[2]]).collect();
            let e1 = relative_error(&d, &t).unwrap();
            let ds: Vec<Vec3> = d.iter().map(|v| v.map(|c| c * scale)).collect();
            let ts: Vec<Vec3> = t.iter().map(|v| v.map(|c| c * scale)).collect();
            let e2 = relative_error(&ds, &ts).unwrap();
            prop_assert!(e1 >= 0.0);
            prop_assert!((e1 - e2).abs() <= 1e-12 * e1.max(1e-300) + 1e-300);
        }

        #[test]
        fn particle_text_round_trips(
            rows in prop::collection::vec(prop::array::uniform12(-1e3f64..1e3), 1..30),
            stress in any::<bool>(),
        ) {
            let pick = |b: usize| rows.iter().map(|r| [r[3 * b], r[3 * b + 1], r[3 * b + 2]]).collect::<Vec<_>>();
            let p = if stress {
                ParticleSet::with_stresslets(pick(0), pick(1), pick(2), pick(3))
            } else {
                ParticleSet::new(pick(0), pick(1))
            };
            let mut buf = Vec::new();
            format_particles(&p, &mut buf).unwrap();
            let q = parse_particles(&buf[..], Path::new("mem")).unwrap();
            prop_assert_eq!(&p, &q);
            let mut again = Vec::new();
            format_particles(&q, &mut again).unwrap();
            prop_assert_eq!(buf, again);
        }
    }

    #[test]
    fn header_selects_blocks() {
        let text = "x f\n0 0 0 1 0 0\n1 0 0 1 0 0\n";
        let p = parse_particles(text.as_bytes(), Path::new("mem")).unwrap();
        assert_eq!(p.len(), 2);
        assert!(!p.has_stresslets());
    }

    #[test]
    fn malformed_rows_name_the_line() {
        let text = "x f\n0 0 0 1 0 0\n1 0 0 1 0\n";
        match parse_particles(text.as_bytes(), Path::new("in.txt")) {
            Err(TreecodeError::Parse { line, message, .. }) => {
                assert_eq!(line, 3);
                assert!(message.contains("expected 6 fields, found 5"), "{message}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
        let bad_header = "x y z\n";
        assert!(matches!(
            parse_particles(bad_header.as_bytes(), Path::new("h")),
            Err(TreecodeError::Parse { line: 1, .. })
        ));
        let bad_number = "x f\n0 0 0 1 0 zero\n";
        assert!(matches!(
            parse_particles(bad_number.as_bytes(), Path::new("n")),
            Err(TreecodeError::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn csv_round_trip() {
        let report = BenchReport {
            rows: vec![
                BenchRow {
                    n: 1000,
                    p: 6,
                    theta: 0.5,
                    n0: 2000,
                    workers: 1,
                    time_direct_s: Some(0.123456789),
                    time_tree_s: Some(0.1 + 0.2),
                    speedup: Some(1.0 / 3.0),
                    error: Some(5.2e-5),
                    farfield_evals: Some(12),
                    direct_evals: Some(99),
                },
                BenchRow {
                    n: 1,
                    p: 0,
                    theta: 0.8,
                    n0: 1,
                    workers: 4,
                    time_direct_s: None,
                    time_tree_s: Some(1e-9),
                    speedup: None,
                    error: None,
                    farfield_evals: Some(0),
                    direct_evals: Some(1),
                },
            ],
        };
        let text = report.to_csv_string().unwrap();
        assert!(text.starts_with(
            "N,p,theta,n0,workers,time_direct_s,time_tree_s,speedup,error_E,farfield_evals,direct_evals\n"
        ));
        assert_eq!(BenchReport::read_csv(text.as_bytes()).unwrap(), report);
        let empty = BenchReport::default().to_csv_string().unwrap();
        assert!(empty.starts_with("N,p,theta"));
    }

    #[test]
    fn parameter_grid_is_theta_major() {
        let mut cfg = RunConfig::new(Mode::Tree, TestCase::Cube(CubeCaseConfig::new(10, 0)));
        cfg.orders = vec![0, 2];
        cfg.thetas = vec![0.8, 0.5];
        let grid: Vec<(f64, usize)> = cfg.parameter_grid().iter().map(|p| (p.theta, p.order)).collect();
        assert_eq!(grid, vec![(0.8, 0), (0.8, 2), (0.5, 0), (0.5, 2)]);
        cfg.thetas = vec![1.0];
        assert!(cfg.validate().is_err());
    }
}
