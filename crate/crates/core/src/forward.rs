//! Forward transforms: sinograms by line-integral quadrature and M2 lookups
//! through the homogeneity bijection.
//!
//! The delta-function definition of the Radon transform is never
//! discretized. Each sample integrates the phantom (or an interpolated field)
//! along the parametrized line `s -> X omega + s omega_perp` with
//! `omega = (cos t, sin t)` and `omega_perp = (-sin t, cos t)`, i.e. the set
//! `{x : <omega, x> = X}`.
//!
//! M2 tomograms are never stored: `f^{M2}(mu, X) = f#(mu/|mu|, X/|mu|) / |mu|`
//! is evaluated against the sinogram on demand.

use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_dims, Error, Result};
use crate::phasespace::{Field, Phantom};
use crate::quadrature::QuadratureSpec;
use crate::spectral::catmull_rom_weights;

/// Fractional-index distance below which a lookup snaps onto a sample.
const SNAP: f64 = 1e-9;

/// Uniform (angle x offset) sampling: `theta_a = 2 pi a / A`, offsets
/// cell-centered in `[-X_max, X_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SinogramSpec {
    pub n_angles: usize,
    pub n_offsets: usize,
    pub offset_halfwidth: f64,
}

impl SinogramSpec {
    pub fn new(n_angles: usize, n_offsets: usize, offset_halfwidth: f64) -> Result<Self> {
        let s = SinogramSpec {
            n_angles,
            n_offsets,
            offset_halfwidth,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_angles < 4 {
            return Err(Error::invalid(format!(
                "need at least 4 angles, got {}",
                self.n_angles
            )));
        }
        if self.n_offsets < 8 || !self.n_offsets.is_multiple_of(2) {
            return Err(Error::invalid(format!(
                "offset count must be even and >= 8, got {}",
                self.n_offsets
            )));
        }
        if !(self.offset_halfwidth > 0.0 && self.offset_halfwidth.is_finite()) {
            return Err(Error::invalid("offset half-width must be positive"));
        }
        Ok(())
    }

    pub fn angle(&self, a: usize) -> f64 {
        TAU * a as f64 / self.n_angles as f64
    }

    pub fn offset_spacing(&self) -> f64 {
        2.0 * self.offset_halfwidth / self.n_offsets as f64
    }

    pub fn offset(&self, m: usize) -> f64 {
        -self.offset_halfwidth + (m as f64 + 0.5) * self.offset_spacing()
    }

    pub fn len(&self) -> usize {
        self.n_angles * self.n_offsets
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Sampled Radon transform `f#(theta, X)`, angle-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Sinogram {
    spec: SinogramSpec,
    values: Vec<f64>,
}

impl Sinogram {
    pub fn new(spec: SinogramSpec, values: Vec<f64>) -> Result<Self> {
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
                "non-finite sinogram value at index {i}"
            )));
        }
        Ok(Sinogram { spec, values })
    }

    pub fn zeros(spec: SinogramSpec) -> Self {
        Sinogram {
            spec,
            values: vec![0.0; spec.len()],
        }
    }

    pub fn spec(&self) -> &SinogramSpec {
        &self.spec
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, a: usize) -> &[f64] {
        let m = self.spec.n_offsets;
        &self.values[a * m..(a + 1) * m]
    }

    pub fn get(&self, a: usize, m: usize) -> f64 {
        self.values[a * self.spec.n_offsets + m]
    }

    /// `sum_m values[a, m] * dX` for row `a`.
    pub fn row_mass(&self, a: usize) -> f64 {
        self.row(a).iter().sum::<f64>() * self.spec.offset_spacing()
    }

    /// Row masses averaged over all angles.
    pub fn mean_mass(&self) -> f64 {
        (0..self.spec.n_angles)
            .map(|a| self.row_mass(a))
            .sum::<f64>()
            / self.spec.n_angles as f64
    }

    pub fn add(&self, other: &Sinogram) -> Result<Sinogram> {
        if self.spec != other.spec {
            return Err(Error::invalid("sinograms have different shapes"));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + b)
            .collect();
        Sinogram::new(self.spec, values)
    }

    /// Linear interpolation along row `a`, zero beyond the outermost samples.
    #[inline]
    pub(crate) fn row_lookup(&self, a: usize, x: f64) -> f64 {
        lookup_linear(
            self.row(a),
            self.spec.offset_halfwidth,
            self.spec.offset_spacing(),
            x,
        )
    }

    /// Catmull-Rom interpolation along row `a`, zero beyond the outermost
    /// samples. Unlike [`Sinogram::row_lookup`] it is not flat between the
    /// two samples straddling an even row's center, which matters for
    /// derivatives of circle means at small radii.
    #[inline]
    pub(crate) fn row_lookup_cubic(&self, a: usize, x: f64) -> f64 {
        lookup_cubic(
            self.row(a),
            self.spec.offset_halfwidth,
            self.spec.offset_spacing(),
            x,
        )
    }

    #[inline]
    pub(crate) fn angle_bracket(&self, theta: f64) -> (usize, usize, f64) {
        angle_bracket(self.spec.n_angles, theta)
    }

    /// Bilinear lookup in `(theta, X)` with periodic wrap in the angle.
    pub fn sample(&self, theta: f64, x: f64) -> Result<f64> {
        self.check_offset(x)?;
        Ok(self.sample_unchecked(theta, x))
    }

    #[inline]
    pub(crate) fn sample_unchecked(&self, theta: f64, x: f64) -> f64 {
        let (lo, hi, w) = self.angle_bracket(theta);
        let v0 = self.row_lookup(lo, x);
        if w == 0.0 {
            return v0;
        }
        v0 + w * (self.row_lookup(hi, x) - v0)
    }

    pub(crate) fn check_offset(&self, x: f64) -> Result<()> {
        let limit = self.spec.offset_halfwidth;
        if x.is_finite() && x.abs() <= limit {
            Ok(())
        } else {
            Err(Error::OutOfSupport { offset: x, limit })
        }
    }
}

#[inline]
fn snap(u: f64) -> f64 {
    let r = u.round();
    if (u - r).abs() < SNAP {
        r
    } else {
        u
    }
}

/// Fractional sample index of offset `x` in a cell-centered row.
#[inline]
fn offset_index(halfwidth: f64, spacing: f64, x: f64) -> (isize, f64) {
    let u = snap((x + halfwidth) / spacing - 0.5);
    let base = u.floor();
    (base as isize, u - base)
}

#[inline]
fn sample_at(row: &[f64], j: isize) -> f64 {
    if j >= 0 && (j as usize) < row.len() {
        row[j as usize]
    } else {
        0.0
    }
}

/// Linear interpolation in a cell-centered row over `[-halfwidth, halfwidth]`,
/// zero beyond the outermost samples.
#[inline]
pub(crate) fn lookup_linear(row: &[f64], halfwidth: f64, spacing: f64, x: f64) -> f64 {
    let (j, t) = offset_index(halfwidth, spacing, x);
    let lo = sample_at(row, j);
    if t == 0.0 {
        return lo;
    }
    lo + t * (sample_at(row, j + 1) - lo)
}

/// Catmull-Rom counterpart of [`lookup_linear`].
#[inline]
pub(crate) fn lookup_cubic(row: &[f64], halfwidth: f64, spacing: f64, x: f64) -> f64 {
    let (j, t) = offset_index(halfwidth, spacing, x);
    if t == 0.0 {
        return sample_at(row, j);
    }
    let w = catmull_rom_weights(t);
    (0..4)
        .map(|i| w[i] * sample_at(row, j - 1 + i as isize))
        .sum()
}

/// Splits an angle into the two bracketing rows of `n_angles` uniform angles
/// and the weight of the upper one, wrapping periodically.
#[inline]
pub(crate) fn angle_bracket(n_angles: usize, theta: f64) -> (usize, usize, f64) {
    let t = snap(theta.rem_euclid(TAU) / TAU * n_angles as f64);
    let base = t.floor();
    let lo = (base as usize) % n_angles;
    (lo, (lo + 1) % n_angles, t - base)
}

fn project_rows<F>(sspec: &SinogramSpec, quad: &QuadratureSpec, integrand: F) -> Vec<f64>
where
    F: Fn(&[f64; 2]) -> f64 + Sync,
{
    let (nodes, weights) = quad.nodes();
    let m_count = sspec.n_offsets;
    let mut values = vec![0.0; sspec.len()];
    values
        .par_chunks_mut(m_count)
        .enumerate()
        .for_each(|(a, row)| {
            let (sin, cos) = sspec.angle(a).sin_cos();
            for (m, out) in row.iter_mut().enumerate() {
                let x = sspec.offset(m);
                let mut acc = 0.0;
                for (s, w) in nodes.iter().zip(&weights) {
                    let p = [x * cos - s * sin, x * sin + s * cos];
                    acc += w * integrand(&p);
                }
                *out = acc;
            }
        });
    values
}

/// Samples `f#(theta_a, X_m)` of an analytic phantom by quadrature along each
/// line.
pub fn radon_forward(
    ph: &Phantom,
    sspec: &SinogramSpec,
    quad: &QuadratureSpec,
) -> Result<Sinogram> {
    check_dims(2, ph.dims())?;
    sspec.validate()?;
    quad.validate()?;
    let values = project_rows(sspec, quad, |p| ph.eval_unchecked(p));
    Sinogram::new(*sspec, values)
}

/// Same line integrals for a gridded field, bilinearly interpolated and zero
/// outside its window.
pub fn radon_forward_field(
    f: &Field,
    sspec: &SinogramSpec,
    quad: &QuadratureSpec,
) -> Result<Sinogram> {
    check_dims(2, f.spec().dims)?;
    sspec.validate()?;
    quad.validate()?;
    let values = project_rows(sspec, quad, |p| f.interpolate_unchecked(p));
    Sinogram::new(*sspec, values)
}

/// `f^{M2}(mu, nu, X) = f#(atan2(nu, mu), X / r) / r` with `r = |(mu, nu)|`.
pub fn m2_evaluate(sg: &Sinogram, mu: f64, nu: f64, x: f64) -> Result<f64> {
    let mut r = mu.hypot(nu);
    if r == 0.0 || !r.is_finite() {
        return Err(Error::SingularDirection);
    }
    // (cos t, sin t) rarely has a norm of exactly 1.0 in floating point
    if (r - 1.0).abs() <= 4.0 * f64::EPSILON {
        r = 1.0;
    }
    let xr = x / r;
    sg.check_offset(xr)?;
    Ok(sg.sample_unchecked(nu.atan2(mu), xr) / r)
}

/// Coefficient of `delta(X)` in `f^{M2}(0, X)`: the total mass.
pub fn m2_mass_at_origin(ph: &Phantom) -> f64 {
    ph.mass()
}
