//! Helgason's route: backproject, then apply `(1/4 pi) (-Delta)^{1/2}`.

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::FftDirection;
use serde::{Deserialize, Serialize};

use super::SpectralParams;
use crate::error::{check_dims, Error, Result};
use crate::forward::Sinogram;
use crate::phasespace::{Field, GridSpec};
use crate::spectral::{fft_nd, signed_index};

/// Frequency multiplier used for `(-Delta)^{order/2}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Multiplier {
    /// `|k|^order`, the fractional Laplacian proper.
    #[default]
    Modulus,
    /// `(k_1 + ... + k_n)^{order/2}` on the principal branch, real part of the
    /// result kept. Not rotation invariant; a debugging aid only.
    PrintedSum,
}

impl Multiplier {
    #[inline]
    fn apply(self, xi: &[f64], order: f64) -> Complex64 {
        match self {
            Multiplier::Modulus => {
                let k2: f64 = xi.iter().map(|v| v * v).sum();
                Complex64::new(k2.powf(0.5 * order), 0.0)
            }
            Multiplier::PrintedSum => Complex64::new(xi.iter().sum(), 0.0).powf(0.5 * order),
        }
    }
}

/// Backprojection `B(x) = sum_a f#(theta_a, <omega_a, x>) 2 pi / A` at
/// `gspec`'s cell centers, with cubic lookups along each row. Lookups past
/// the outermost offset read zero.
fn backproject_unchecked(sg: &Sinogram, gspec: &GridSpec) -> Vec<f64> {
    let s = sg.spec();
    let dirs: Vec<(f64, f64)> = (0..s.n_angles)
        .map(|a| {
            let t = s.angle(a);
            (t.cos(), t.sin())
        })
        .collect();
    let weight = TAU / s.n_angles as f64;
    let n = gspec.samples;
    (0..n * n)
        .into_par_iter()
        .map(|idx| {
            let (q, p) = (gspec.coord(idx / n), gspec.coord(idx % n));
            let sum: f64 = dirs
                .iter()
                .enumerate()
                .map(|(a, &(c, s))| sg.row_lookup_cubic(a, q * c + p * s))
                .sum();
            sum * weight
        })
        .collect()
}

pub fn backproject(sg: &Sinogram, gspec: &GridSpec) -> Result<Field> {
    check_dims(2, gspec.dims)?;
    gspec.validate()?;
    let limit = sg.spec().offset_halfwidth;
    let reach = gspec.max_radius();
    if reach > limit {
        return Err(Error::OutOfSupport {
            offset: reach,
            limit,
        });
    }
    Ok(Field::from_raw(*gspec, backproject_unchecked(sg, gspec)))
}

/// Applies `mult(k)` to the periodic spectrum of an `np^dims` array with
/// spacing `h`, zero frequency mapped to `dc`. Returns the real part.
fn apply_multiplier(
    data: Vec<f64>,
    np: usize,
    dims: usize,
    h: f64,
    order: f64,
    mult: Multiplier,
) -> Vec<f64> {
    let mut buf: Vec<Complex64> = data.into_iter().map(|v| Complex64::new(v, 0.0)).collect();
    fft_nd(&mut buf, np, dims, FftDirection::Forward);
    let dxi = TAU / (np as f64 * h);
    let total = buf.len();
    buf.par_iter_mut().enumerate().for_each(|(idx, v)| {
        let mut xi = [0.0; 8];
        let mut rest = idx;
        for d in (0..dims).rev() {
            xi[d] = signed_index(rest % np, np) as f64 * dxi;
            rest /= np;
        }
        *v *= mult.apply(&xi[..dims], order);
    });
    buf[0] = Complex64::new(0.0, 0.0);
    fft_nd(&mut buf, np, dims, FftDirection::Inverse);
    let norm = 1.0 / total as f64;
    buf.into_iter().map(|v| v.re * norm).collect()
}

/// Copies an `n^dims` block into the corner of a zeroed `np^dims` array, or
/// back out of it.
fn embed(src: &[f64], n: usize, np: usize, dims: usize, offset: usize) -> Vec<f64> {
    let mut out = vec![0.0; np.pow(dims as u32)];
    for (i, &v) in src.iter().enumerate() {
        out[padded_index(i, n, np, dims, offset)] = v;
    }
    out
}

fn crop(src: &[f64], n: usize, np: usize, dims: usize, offset: usize) -> Vec<f64> {
    (0..n.pow(dims as u32))
        .map(|i| src[padded_index(i, n, np, dims, offset)])
        .collect()
}

#[inline]
fn padded_index(i: usize, n: usize, np: usize, dims: usize, offset: usize) -> usize {
    let mut rest = i;
    let mut idx = 0;
    let mut stride = 1;
    for _ in 0..dims {
        idx += (rest % n + offset) * stride;
        rest /= n;
        stride *= np;
    }
    idx
}

pub fn fractional_laplacian(f: &Field, order: f64, sp: &SpectralParams) -> Result<Field> {
    fractional_laplacian_with(f, order, sp, Multiplier::Modulus)
}

/// `(-Delta)^{order/2}` of a field, zero-padded by `sp.pad_factor` and
/// cropped back.
pub fn fractional_laplacian_with(
    f: &Field,
    order: f64,
    sp: &SpectralParams,
    mult: Multiplier,
) -> Result<Field> {
    sp.validate()?;
    let spec = *f.spec();
    if !(order > 0.0 && order < spec.dims as f64) {
        return Err(Error::invalid(format!(
            "order must lie in (0, {}), got {order}",
            spec.dims
        )));
    }
    if spec.dims > 8 {
        return Err(Error::Unsupported(format!("{} dimensions", spec.dims)));
    }
    let n = spec.samples;
    let np = sp.pad_factor * n;
    let padded = embed(f.values(), n, np, spec.dims, 0);
    let out = apply_multiplier(padded, np, spec.dims, spec.spacing(), order, mult);
    Field::new(spec, crop(&out, n, np, spec.dims, 0))
}

pub fn invert_helgason(sg: &Sinogram, gspec: &GridSpec, sp: &SpectralParams) -> Result<Field> {
    invert_helgason_with(sg, gspec, sp, Multiplier::Modulus)
}

/// `f = (1/4 pi) (-Delta)^{1/2} B`.
///
/// `B` decays only like `1/|x|`, so cutting it off at the grid edge and
/// zero-padding would put a kink into the data that the filter turns into
/// edge artifacts. Instead `B` is evaluated on the whole `pad N` lattice and
/// filtered periodically; the lost zero-frequency content is restored from
/// the sinogram mass.
pub fn invert_helgason_with(
    sg: &Sinogram,
    gspec: &GridSpec,
    sp: &SpectralParams,
    mult: Multiplier,
) -> Result<Field> {
    check_dims(2, gspec.dims)?;
    gspec.validate()?;
    sp.validate()?;
    let limit = sg.spec().offset_halfwidth;
    let reach = gspec.max_radius();
    if reach > limit {
        return Err(Error::OutOfSupport {
            offset: reach,
            limit,
        });
    }
    let n = gspec.samples;
    let np = sp.pad_factor * n;
    let h = gspec.spacing();
    let extended = GridSpec::new(2, sp.pad_factor as f64 * gspec.half_width, np)?;
    let b = backproject_unchecked(sg, &extended);
    let filtered = apply_multiplier(b, np, 2, h, 1.0, mult);
    let dc = sg.mean_mass() / (np as f64 * h).powi(2);
    let scale = 1.0 / (4.0 * PI);
    let offset = (np - n) / 2;
    let values = crop(&filtered, n, np, 2, offset)
        .into_iter()
        .map(|v| v * scale + dc)
        .collect();
    Field::new(*gspec, values)
}
