//! Timed comparison of the three planar inverters on one configuration.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, ErrorKind, Result};
use crate::forward::{radon_forward, Sinogram, SinogramSpec};
use crate::inversion::{
    invert_helgason, invert_m2_fourier, invert_radon_circle_mean, reconstruction_error,
    CircleMeanParams, ErrorNorm, SpectralParams,
};
use crate::io;
use crate::phasespace::{Field, GaussianTerm, GridSpec, Phantom};
use crate::quadrature::QuadratureSpec;

/// Tag written at the top of every text report.
pub const REPORT_FORMAT: &str = "symrad-bench/1";

pub const CSV_HEADER: &str = "method,max_abs,l2,median_seconds,A,M,N,L,X_max";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    M2,
    CircleMean,
    Helgason,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::M2, Method::CircleMean, Method::Helgason];

    pub fn name(self) -> &'static str {
        match self {
            Method::M2 => "m2",
            Method::CircleMean => "circle-mean",
            Method::Helgason => "helgason",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Method::ALL.into_iter().find(|m| m.name() == name)
    }

    /// Runs this inverter on a sinogram.
    pub fn invert(
        self,
        sg: &Sinogram,
        grid: &GridSpec,
        spectral: &SpectralParams,
        circle: &CircleMeanParams,
    ) -> Result<Field> {
        match self {
            Method::M2 => invert_m2_fourier(sg, grid, spectral),
            Method::CircleMean => invert_radon_circle_mean(sg, grid, circle),
            Method::Helgason => invert_helgason(sg, grid, spectral),
        }
    }
}

/// Where the phantom comes from: a phantom file or inline terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PhantomSource {
    File { file: PathBuf },
    Inline { terms: Vec<GaussianTerm> },
}

impl PhantomSource {
    /// Relative file paths are taken relative to `base`.
    pub fn load(&self, base: &Path) -> Result<Phantom> {
        match self {
            PhantomSource::File { file } => io::read_phantom(base.join(file)),
            PhantomSource::Inline { terms } => {
                let dims = terms.first().map_or(2, |t| t.center.len());
                Phantom::new(dims, terms.clone())
            }
        }
    }
}

fn default_repetitions() -> usize {
    3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub phantom: PhantomSource,
    pub sinogram: SinogramSpec,
    pub grid: GridSpec,
    #[serde(default)]
    pub quadrature: QuadratureSpec,
    pub methods: Vec<Method>,
    #[serde(default)]
    pub circle_mean: CircleMeanParams,
    #[serde(default)]
    pub spectral: SpectralParams,
    #[serde(default = "default_repetitions")]
    pub repetitions: usize,
    /// Field files go here when set, one per method.
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            return Err(Error::invalid("method list is empty"));
        }
        for (i, m) in self.methods.iter().enumerate() {
            if self.methods[..i].contains(m) {
                return Err(Error::invalid(format!("method {} listed twice", m.name())));
            }
        }
        if self.repetitions < 3 {
            return Err(Error::invalid(format!(
                "repetitions must be >= 3, got {}",
                self.repetitions
            )));
        }
        self.sinogram.validate()?;
        self.grid.validate()?;
        self.quadrature.validate()?;
        self.spectral.validate()?;
        self.circle_mean.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Completed {
        max_abs: f64,
        l2: f64,
        median_seconds: f64,
    },
    Failed {
        kind: ErrorKind,
        message: String,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodResult {
    pub method: Method,
    pub outcome: Outcome,
    /// Field file written for this method, if any.
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkReport {
    pub format: &'static str,
    pub sinogram: SinogramSpec,
    pub grid: GridSpec,
    pub repetitions: usize,
    pub results: Vec<MethodResult>,
}

fn median(samples: &mut [f64]) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len();
    if n % 2 == 1 {
        samples[n / 2]
    } else {
        0.5 * (samples[n / 2 - 1] + samples[n / 2])
    }
}

/// Field file name for a method's reconstruction.
pub fn field_file_name(method: Method) -> String {
    format!("{}.field", method.name())
}

fn run_method(
    method: Method,
    cfg: &ExperimentConfig,
    ph: &Phantom,
    sg: &Sinogram,
    out_dir: Option<&Path>,
) -> Result<(Outcome, Option<PathBuf>)> {
    let mut times = Vec::with_capacity(cfg.repetitions);
    let mut field = None;
    for _ in 0..cfg.repetitions {
        let start = Instant::now();
        let f = method.invert(sg, &cfg.grid, &cfg.spectral, &cfg.circle_mean)?;
        times.push(start.elapsed().as_secs_f64());
        field = Some(f);
    }
    let field = field.expect("at least one repetition");
    let max_abs = reconstruction_error(&field, ph, ErrorNorm::MaxAbs)?;
    let l2 = reconstruction_error(&field, ph, ErrorNorm::L2CellWeighted)?;
    let output = match out_dir {
        Some(dir) => {
            let path = dir.join(field_file_name(method));
            io::write_field(&field, &path)?;
            Some(path)
        }
        None => None,
    };
    Ok((
        Outcome::Completed {
            max_abs,
            l2,
            median_seconds: median(&mut times),
        },
        output,
    ))
}

/// Projects the phantom once, then times every requested inverter. A failing
/// method is recorded in the report and the others still run; only errors
/// before the first method (bad config, unreadable phantom) abort.
pub fn run_benchmark(cfg: &ExperimentConfig, base: &Path) -> Result<BenchmarkReport> {
    cfg.validate()?;
    let ph = cfg.phantom.load(base)?;
    let sg = radon_forward(&ph, &cfg.sinogram, &cfg.quadrature)?;
    let out_dir = cfg.output_dir.as_ref().map(|d| base.join(d));
    if let Some(dir) = &out_dir {
        std::fs::create_dir_all(dir)?;
    }
    let results = cfg
        .methods
        .iter()
        .map(|&method| {
            log::info!("benchmarking {}", method.name());
            let (outcome, output) = match run_method(method, cfg, &ph, &sg, out_dir.as_deref()) {
                Ok(r) => r,
                Err(e) => {
                    log::warn!("{} failed: {e}", method.name());
                    (
                        Outcome::Failed {
                            kind: e.kind(),
                            message: e.to_string(),
                        },
                        None,
                    )
                }
            };
            MethodResult {
                method,
                outcome,
                output,
            }
        })
        .collect();
    Ok(BenchmarkReport {
        format: REPORT_FORMAT,
        sinogram: cfg.sinogram,
        grid: cfg.grid,
        repetitions: cfg.repetitions,
        results,
    })
}

impl BenchmarkReport {
    /// One row per method in the fixed column order of [`CSV_HEADER`]; the
    /// numeric cells of a failed method are left empty.
    pub fn to_csv(&self) -> String {
        let mut out = format!("{CSV_HEADER}\n");
        let s = &self.sinogram;
        let g = &self.grid;
        for r in &self.results {
            let cells = match &r.outcome {
                Outcome::Completed {
                    max_abs,
                    l2,
                    median_seconds,
                } => format!("{max_abs:e},{l2:e},{median_seconds:e}"),
                Outcome::Failed { .. } => ",,".to_string(),
            };
            let _ = writeln!(
                out,
                "{},{cells},{},{},{},{},{}",
                r.method.name(),
                s.n_angles,
                s.n_offsets,
                g.samples,
                g.half_width,
                s.offset_halfwidth
            );
        }
        out
    }

    pub fn to_table(&self) -> String {
        let s = &self.sinogram;
        let g = &self.grid;
        let mut out = format!(
            "# {REPORT_FORMAT}\n# A={} M={} X_max={} N={} L={} repetitions={}\n",
            s.n_angles, s.n_offsets, s.offset_halfwidth, g.samples, g.half_width, self.repetitions
        );
        let _ = writeln!(
            out,
            "{:<12} {:>12} {:>12} {:>14}",
            "method", "max_abs", "l2", "median_s"
        );
        for r in &self.results {
            match &r.outcome {
                Outcome::Completed {
                    max_abs,
                    l2,
                    median_seconds,
                } => {
                    let _ = writeln!(
                        out,
                        "{:<12} {:>12.3e} {:>12.3e} {:>14.4}",
                        r.method.name(),
                        max_abs,
                        l2,
                        median_seconds
                    );
                }
                Outcome::Failed { kind, message } => {
                    let _ = writeln!(out, "{:<12} failed ({kind}): {message}", r.method.name());
                }
            }
        }
        out
    }

    pub fn result(&self, method: Method) -> Option<&MethodResult> {
        self.results.iter().find(|r| r.method == method)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> ExperimentConfig {
        toml::from_str(
            r#"
            methods = ["m2", "helgason", "circle-mean"]
            phantom = { terms = [{ weight = 1.0, alpha = 1.0, center = [0.0, 0.0] }] }
            sinogram = { n_angles = 64, n_offsets = 64, offset_halfwidth = 6.0 }
            grid = { dims = 2, half_width = 4.0, samples = 16 }
            circle_mean = { epsilon_schedule = [0.04, 0.02], r_max = 1.5, n_r = 64, n_theta = 64 }
            "#,
        )
        .unwrap()
    }

    #[test]
    fn config_defaults() {
        let cfg = small_config();
        assert_eq!(cfg.repetitions, 3);
        assert_eq!(cfg.spectral, SpectralParams::default());
        assert_eq!(cfg.quadrature, QuadratureSpec::default());
        assert!(cfg.validate().is_ok());
        let mut bad = cfg.clone();
        bad.repetitions = 2;
        assert!(bad.validate().is_err());
        bad = cfg.clone();
        bad.methods = vec![Method::M2, Method::M2];
        assert!(bad.validate().is_err());
        bad.methods.clear();
        assert!(bad.validate().is_err());
    }

    #[test]
    fn failures_are_recorded_per_method() {
        // 2.83 + 1.5 > X_max = 4 at the grid corners: circle-mean fails on support
        let mut cfg = small_config();
        cfg.sinogram.offset_halfwidth = 4.0;
        cfg.grid.half_width = 2.0;
        let report = run_benchmark(&cfg, Path::new(".")).unwrap();
        assert_eq!(report.results.len(), 3);
        assert!(matches!(
            report.result(Method::M2).unwrap().outcome,
            Outcome::Completed { .. }
        ));
        assert!(matches!(
            report.result(Method::CircleMean).unwrap().outcome,
            Outcome::Failed {
                kind: ErrorKind::OutOfSupport,
                ..
            }
        ));
        let csv = report.to_csv();
        assert!(csv.starts_with(CSV_HEADER));
        assert!(csv.contains("\ncircle-mean,,,,64,64,16,2,4\n"), "{csv}");
        assert!(report.to_table().starts_with("# symrad-bench/1"));
    }

    #[test]
    fn medians() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
