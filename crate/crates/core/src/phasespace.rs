//! Grids, Gaussian phantoms and sampled fields.
//!
//! Phantoms are weighted sums of normalized isotropic Gaussians
//!
//! ```text
//! f(x) = sum_k w_k (alpha_k^2 / pi)^(n/2) exp(-alpha_k^2 |x - c_k|^2)
//! ```
//!
//! which keeps every forward transform in closed form. For `n = 2` and a
//! single centered term this is the harmonic-oscillator ground state
//! `(alpha^2/pi) exp(-alpha^2 (q^2 + p^2))`.

use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{check_dims, Error, Result};

/// Boundary-to-peak ratio above which sampling a phantom logs a truncation
/// warning.
pub const TAIL_WARNING_RATIO: f64 = 1e-9;

/// Cell-centered Cartesian grid over `[-L, L]^dims` with `N` samples per axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub dims: usize,
    pub half_width: f64,
    pub samples: usize,
}

impl GridSpec {
    pub fn new(dims: usize, half_width: f64, samples: usize) -> Result<Self> {
        let spec = GridSpec {
            dims,
            half_width,
            samples,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dims < 2 {
            return Err(Error::invalid(format!(
                "grid dims must be >= 2, got {}",
                self.dims
            )));
        }
        if !(self.half_width > 0.0 && self.half_width.is_finite()) {
            return Err(Error::invalid(format!(
                "grid half-width must be positive, got {}",
                self.half_width
            )));
        }
        if self.samples < 8 || !self.samples.is_multiple_of(2) {
            return Err(Error::invalid(format!(
                "samples per axis must be even and >= 8, got {}",
                self.samples
            )));
        }
        Ok(())
    }

    /// Distance between neighbouring samples along an axis.
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.samples as f64
    }

    /// Coordinate of sample `j` along any axis.
    pub fn coord(&self, j: usize) -> f64 {
        -self.half_width + (j as f64 + 0.5) * self.spacing()
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dims as i32)
    }

    /// Total number of samples, `N^dims`.
    pub fn len(&self) -> usize {
        self.samples.pow(self.dims as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Writes the coordinates of the sample at row-major `index` into `out`.
    pub fn point(&self, index: usize, out: &mut [f64]) {
        let mut rest = index;
        for axis in (0..self.dims).rev() {
            out[axis] = self.coord(rest % self.samples);
            rest /= self.samples;
        }
    }

    /// Largest distance from the origin to any sample.
    pub fn max_radius(&self) -> f64 {
        let c = self.coord(self.samples - 1);
        c * (self.dims as f64).sqrt()
    }
}

/// One normalized isotropic Gaussian of a [`Phantom`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianTerm {
    pub weight: f64,
    pub alpha: f64,
    pub center: Vec<f64>,
}

impl GaussianTerm {
    fn normalizer(&self, dims: usize) -> f64 {
        (self.alpha * self.alpha / PI).powf(dims as f64 / 2.0)
    }

    fn eval(&self, dims: usize, x: &[f64]) -> f64 {
        let r2: f64 = x
            .iter()
            .zip(&self.center)
            .map(|(xi, ci)| (xi - ci) * (xi - ci))
            .sum();
        self.weight * self.normalizer(dims) * (-self.alpha * self.alpha * r2).exp()
    }

    /// Line-integral profile `(alpha/sqrt(pi)) exp(-alpha^2 (X - <omega,c>)^2)`
    /// along the unit direction `omega`; independent of the dimension.
    pub(crate) fn projection(&self, omega: &[f64], offset: f64) -> f64 {
        let shift: f64 = omega.iter().zip(&self.center).map(|(o, c)| o * c).sum();
        let d = offset - shift;
        self.weight * self.alpha / PI.sqrt() * (-self.alpha * self.alpha * d * d).exp()
    }
}

/// Weighted sum of isotropic Gaussians with closed-form transforms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Phantom {
    dims: usize,
    terms: Vec<GaussianTerm>,
}

impl Phantom {
    pub fn new(dims: usize, terms: Vec<GaussianTerm>) -> Result<Self> {
        if dims < 1 {
            return Err(Error::invalid("phantom dims must be positive"));
        }
        for (k, t) in terms.iter().enumerate() {
            check_dims(dims, t.center.len())?;
            if !(t.alpha > 0.0 && t.alpha.is_finite()) {
                return Err(Error::invalid(format!(
                    "term {k}: alpha must be positive, got {}",
                    t.alpha
                )));
            }
            if !t.weight.is_finite() || t.center.iter().any(|c| !c.is_finite()) {
                return Err(Error::invalid(format!(
                    "term {k}: non-finite weight or center"
                )));
            }
        }
        Ok(Phantom { dims, terms })
    }

    /// Phantom with no terms; evaluates to zero everywhere.
    pub fn empty(dims: usize) -> Self {
        Phantom {
            dims,
            terms: Vec::new(),
        }
    }

    /// Single unit-mass Gaussian at the origin.
    pub fn centered_gaussian(dims: usize, alpha: f64) -> Result<Self> {
        Phantom::new(
            dims,
            vec![GaussianTerm {
                weight: 1.0,
                alpha,
                center: vec![0.0; dims],
            }],
        )
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn terms(&self) -> &[GaussianTerm] {
        &self.terms
    }

    /// Total mass, `sum_k w_k`.
    pub fn mass(&self) -> f64 {
        self.terms.iter().map(|t| t.weight).sum()
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        check_dims(self.dims, x.len())?;
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|t| t.eval(self.dims, x)).sum()
    }

    /// Samples the phantom at every cell center of `spec`.
    pub fn to_field(&self, spec: &GridSpec) -> Result<Field> {
        check_dims(spec.dims, self.dims)?;
        spec.validate()?;
        self.warn_on_truncation(spec);
        let mut point = vec![0.0; spec.dims];
        let values = (0..spec.len())
            .map(|i| {
                spec.point(i, &mut point);
                self.eval_unchecked(&point)
            })
            .collect();
        Field::new(*spec, values)
    }

    /// Logs a warning for every term whose tail at the window boundary exceeds
    /// [`TAIL_WARNING_RATIO`] of its peak. Returns the number of such terms.
    pub fn warn_on_truncation(&self, spec: &GridSpec) -> usize {
        let mut flagged = 0;
        for (k, t) in self.terms.iter().enumerate() {
            if t.weight == 0.0 {
                continue;
            }
            let gap = t
                .center
                .iter()
                .map(|c| spec.half_width - c.abs())
                .fold(f64::INFINITY, f64::min);
            let ratio = if gap <= 0.0 {
                1.0
            } else {
                (-t.alpha * t.alpha * gap * gap).exp()
            };
            if ratio > TAIL_WARNING_RATIO {
                log::warn!(
                    "phantom term {k} is truncated by the window [-{L}, {L}]: boundary/peak ratio {ratio:.3e}",
                    L = spec.half_width
                );
                flagged += 1;
            }
        }
        flagged
    }

    /// Closed-form Radon transform for `dims == 2`:
    /// `sum_k w_k (alpha_k/sqrt(pi)) exp(-alpha_k^2 (X - <omega, c_k>)^2)`.
    pub fn radon(&self, theta: f64, offset: f64) -> Result<f64> {
        check_dims(2, self.dims)?;
        let omega = [theta.cos(), theta.sin()];
        Ok(self.projection(&omega, offset))
    }

    /// Closed-form M2 tomogram `f^{M2}(mu, nu, X)` for `dims == 2`.
    pub fn m2(&self, mu: f64, nu: f64, offset: f64) -> Result<f64> {
        check_dims(2, self.dims)?;
        let r2 = mu * mu + nu * nu;
        if r2 == 0.0 {
            return Err(Error::SingularDirection);
        }
        Ok(self
            .terms
            .iter()
            .map(|t| {
                let d = offset - mu * t.center[0] - nu * t.center[1];
                t.weight * t.alpha / (PI * r2).sqrt() * (-t.alpha * t.alpha * d * d / r2).exp()
            })
            .sum())
    }

    /// Closed-form projection onto a unit direction in any dimension. The
    /// `(n-1)`-dimensional integral of a normalized Gaussian over a hyperplane
    /// leaves the same one-dimensional profile for every `n`.
    pub fn projection(&self, omega: &[f64], offset: f64) -> f64 {
        self.terms.iter().map(|t| t.projection(omega, offset)).sum()
    }

    /// Parses the plain-text phantom format: one term per line,
    /// `weight alpha c1 ... cn`, `#` starts a comment. An optional `dims n`
    /// line fixes the dimension (needed for empty phantoms, which otherwise
    /// default to 2).
    pub fn parse(text: &str) -> Result<Self> {
        let mut dims: Option<usize> = None;
        let mut terms = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let tokens: Vec<&str> = line.split_whitespace().collect();
            if tokens[0] == "dims" {
                let n = tokens
                    .get(1)
                    .and_then(|t| t.parse::<usize>().ok())
                    .filter(|n| *n >= 1 && tokens.len() == 2)
                    .ok_or_else(|| Error::parse(line_no, "expected `dims <n>`"))?;
                if dims.is_some_and(|d| d != n) {
                    return Err(Error::parse(
                        line_no,
                        "dims directive conflicts with earlier terms",
                    ));
                }
                dims = Some(n);
                continue;
            }
            let nums = tokens
                .iter()
                .map(|t| t.parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::parse(line_no, format!("invalid number: {e}")))?;
            if nums.len() < 3 {
                return Err(Error::parse(
                    line_no,
                    "expected `weight alpha c1 ... cn` with at least one center coordinate",
                ));
            }
            let n = nums.len() - 2;
            match dims {
                Some(d) if d != n => {
                    return Err(Error::parse(
                        line_no,
                        format!("expected {d} center coordinates, found {n}"),
                    ))
                }
                _ => dims = Some(n),
            }
            if !(nums[1] > 0.0) {
                return Err(Error::parse(
                    line_no,
                    format!("alpha must be positive, got {}", nums[1]),
                ));
            }
            terms.push(GaussianTerm {
                weight: nums[0],
                alpha: nums[1],
                center: nums[2..].to_vec(),
            });
        }
        Phantom::new(dims.unwrap_or(2), terms)
    }

    /// Inverse of [`Phantom::parse`]; numbers use the shortest round-trip
    /// decimal representation.
    pub fn to_text(&self) -> String {
        let mut out = String::from("# weight alpha c1 ... cn\n");
        let _ = writeln!(out, "dims {}", self.dims);
        for t in &self.terms {
            let _ = write!(out, "{} {}", t.weight, t.alpha);
            for c in &t.center {
                let _ = write!(out, " {c}");
            }
            out.push('\n');
        }
        out
    }
}

/// Real-valued samples on a [`GridSpec`], row-major in axis order.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    spec: GridSpec,
    values: Vec<f64>,
}

impl Field {
    pub fn new(spec: GridSpec, values: Vec<f64>) -> Result<Self> {
        spec.validate()?;
        if values.len() != spec.len() {
            return Err(Error::invalid(format!(
                "expected {} values, got {}",
                spec.len(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "non-finite field value at index {i}"
            )));
        }
        Ok(Field { spec, values })
    }

    pub fn zeros(spec: GridSpec) -> Self {
        Field {
            spec,
            values: vec![0.0; spec.len()],
        }
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Cell-volume-weighted sum of the samples.
    pub fn total_mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.spec.cell_volume()
    }

    /// Multilinear interpolation, treating the field as zero beyond the
    /// outermost cell centers.
    pub fn interpolate(&self, x: &[f64]) -> Result<f64> {
        check_dims(self.spec.dims, x.len())?;
        Ok(self.interpolate_unchecked(x))
    }

    pub(crate) fn interpolate_unchecked(&self, x: &[f64]) -> f64 {
        let dims = self.spec.dims;
        let n = self.spec.samples as isize;
        let h = self.spec.spacing();
        let mut base = [0isize; 8];
        let mut frac = [0.0f64; 8];
        assert!(dims <= 8, "interpolation supports up to 8 axes");
        for axis in 0..dims {
            let u = (x[axis] + self.spec.half_width) / h - 0.5;
            if !(u > -1.0 && u < n as f64) {
                return 0.0;
            }
            let b = u.floor();
            base[axis] = b as isize;
            frac[axis] = u - b;
        }
        let mut acc = 0.0;
        for corner in 0..(1usize << dims) {
            let mut weight = 1.0;
            let mut index = 0usize;
            let mut inside = true;
            for axis in 0..dims {
                let hi = (corner >> axis) & 1 == 1;
                let j = base[axis] + hi as isize;
                if j < 0 || j >= n {
                    inside = false;
                    break;
                }
                weight *= if hi { frac[axis] } else { 1.0 - frac[axis] };
                index = index * self.spec.samples + j as usize;
            }
            if inside && weight != 0.0 {
                acc += weight * self.values[index];
            }
        }
        acc
    }

    /// Element-wise sum of two fields on the same grid.
    pub fn add(&self, other: &Field) -> Result<Field> {
        if self.spec != other.spec {
            return Err(Error::invalid("fields live on different grids"));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + b)
            .collect();
        Field::new(self.spec, values)
    }

    pub(crate) fn from_raw(spec: GridSpec, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), spec.len());
        Field { spec, values }
    }
}
