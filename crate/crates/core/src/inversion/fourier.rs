//! M2 inversion `f(x) = (2 pi)^-2 integral f^{M2}(mu, X) exp(i(X - <mu, x>)) dX dmu`.
//!
//! Fast path: integrating out `X` leaves a plain inverse Fourier transform of
//! the 2-D spectrum of `f`, and by the dilation identity each sinogram row's
//! 1-D spectrum is a radial slice of that spectrum. Slices are resampled onto a Cartesian frequency
//! lattice and inverted with one FFT.
//!
//! Slow path: the same triple integral by brute-force quadrature over a
//! `(mu, nu, X)` box, reading `f^{M2}` through [`m2_evaluate`]. It exists to
//! pin the fast path to the formula.

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::FftDirection;

use super::{SliceInterp, SpectralParams};
use crate::error::{check_dims, Error, Result};
use crate::forward::{m2_evaluate, Sinogram};
use crate::phasespace::{Field, GridSpec};
use crate::spectral::{catmull_rom_weights, fft_nd, signed_index, RowSpectra};

/// Zero-padded length of each sinogram row before its FFT; sets the radial
/// spacing `dk` of the polar samples. Slice interpolation error goes like
/// `dk^2`, so the padding grows with the image size `n` as well; otherwise
/// refining the grid leaves the error on a plateau.
pub(crate) fn row_fft_len(n_offsets: usize, n: usize, pad_factor: usize) -> usize {
    (pad_factor * n_offsets * (n / 8).max(4)).next_power_of_two()
}

pub(crate) fn check_support(x_max: f64, gspec: &GridSpec) -> Result<()> {
    let needed = (gspec.dims as f64).sqrt() * gspec.half_width;
    if x_max < needed {
        return Err(Error::InsufficientSupport(format!(
            "offset half-width {x_max} is smaller than sqrt({})*L = {needed}",
            gspec.dims
        )));
    }
    Ok(())
}

pub fn invert_m2_fourier(sg: &Sinogram, gspec: &GridSpec, sp: &SpectralParams) -> Result<Field> {
    check_dims(2, gspec.dims)?;
    gspec.validate()?;
    sp.validate()?;
    let s = sg.spec();
    check_support(s.offset_halfwidth, gspec)?;

    let spectra = RowSpectra::compute(
        sg.values(),
        s.n_offsets,
        s.offset_spacing(),
        s.offset(0),
        row_fft_len(s.n_offsets, gspec.samples, sp.pad_factor),
    );
    let n_angles = s.n_angles;
    let dc = sg.mean_mass();
    let interp = sp.slice_interp;
    let slice = |k: f64, unit: &[f64]| -> Complex64 {
        let t = unit[1].atan2(unit[0]).rem_euclid(TAU) / TAU * n_angles as f64;
        let base = t.floor();
        let w = t - base;
        let a0 = base as usize % n_angles;
        match interp {
            SliceInterp::Linear => {
                let a1 = (a0 + 1) % n_angles;
                spectra.linear(a0, k) * (1.0 - w) + spectra.linear(a1, k) * w
            }
            SliceInterp::Cubic => {
                let wa = catmull_rom_weights(w);
                (0..4)
                    .map(|i| {
                        let a = (a0 + n_angles + i - 1) % n_angles;
                        spectra.cubic(a, k) * wa[i]
                    })
                    .sum()
            }
        }
    };
    Ok(assemble_and_invert(
        gspec,
        sp.pad_factor,
        spectra.k_max(),
        dc,
        slice,
    ))
}

/// Fills the Cartesian frequency lattice of `gspec` (any dimension) from
/// `slice(k, unit)`, the spectrum at radius `k` along the unit vector
/// `unit`; anchors the zero frequency to `dc` and inverts onto the cell
/// centers.
pub(crate) fn assemble_and_invert<S>(
    gspec: &GridSpec,
    pad: usize,
    k_max: f64,
    dc: f64,
    slice: S,
) -> Field
where
    S: Fn(f64, &[f64]) -> Complex64 + Sync,
{
    let dims = gspec.dims;
    let n = gspec.samples;
    let np = pad * n;
    let h = gspec.spacing();
    let dxi = TAU / (np as f64 * h);
    let x0 = gspec.coord(0);

    let mut spectrum = vec![Complex64::new(0.0, 0.0); np.pow(dims as u32)];
    spectrum
        .par_chunks_mut(np)
        .enumerate()
        .for_each(|(line, row)| {
            let mut xi = vec![0.0; dims];
            let mut rest = line;
            for d in (0..dims - 1).rev() {
                xi[d] = signed_index(rest % np, np) as f64 * dxi;
                rest /= np;
            }
            let mut unit = vec![0.0; dims];
            for (i_last, out) in row.iter_mut().enumerate() {
                xi[dims - 1] = signed_index(i_last, np) as f64 * dxi;
                let k = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
                let value = if k == 0.0 {
                    Complex64::new(dc, 0.0)
                } else if k > k_max {
                    continue;
                } else {
                    for (u, v) in unit.iter_mut().zip(&xi) {
                        *u = v / k;
                    }
                    slice(k, &unit)
                };
                *out = value * Complex64::from_polar(1.0, xi.iter().sum::<f64>() * x0);
            }
        });
    fft_nd(&mut spectrum, np, dims, FftDirection::Inverse);

    let scale = (dxi / TAU).powi(dims as i32);
    let values = (0..n.pow(dims as u32))
        .map(|i| {
            let mut rest = i;
            let mut idx = 0;
            let mut stride = 1;
            for _ in 0..dims {
                idx += (rest % n) * stride;
                rest /= n;
                stride *= np;
            }
            spectrum[idx].re * scale
        })
        .collect();
    Field::from_raw(*gspec, values)
}

/// Brute-force quadrature of the M2 inversion formula. Cost grows as
/// `(pad N)^2 M`; meant for small grids.
pub fn invert_m2_fourier_direct(
    sg: &Sinogram,
    gspec: &GridSpec,
    sp: &SpectralParams,
) -> Result<Field> {
    check_dims(2, gspec.dims)?;
    gspec.validate()?;
    sp.validate()?;
    let s = *sg.spec();
    check_support(s.offset_halfwidth, gspec)?;

    let n = gspec.samples;
    let h = gspec.spacing();
    let n_mu = sp.pad_factor * n;
    let k_box = PI / h;
    let dmu = 2.0 * k_box / n_mu as f64;
    let mus: Vec<f64> = (0..n_mu).map(|i| -k_box + (i as f64 + 0.5) * dmu).collect();
    let dy = s.offset_spacing();

    // G(mu, nu) = integral f^{M2}(mu, nu, X) e^{iX} dX over |X| <= |mu| X_max,
    // with nodes X = |mu| Y_m at the dilated offsets.
    let g: Vec<Complex64> = (0..n_mu * n_mu)
        .into_par_iter()
        .map(|idx| -> Result<Complex64> {
            let (mu, nu) = (mus[idx / n_mu], mus[idx % n_mu]);
            let r = mu.hypot(nu);
            let mut acc = Complex64::new(0.0, 0.0);
            for m in 0..s.n_offsets {
                let x = r * s.offset(m);
                acc += Complex64::from_polar(m2_evaluate(sg, mu, nu, x)?, x);
            }
            Ok(acc * (r * dy))
        })
        .collect::<Result<_>>()?;

    // f(q, p) = (2 pi)^-2 sum G(mu, nu) e^{-i(mu q + nu p)} dmu dnu
    let coords: Vec<f64> = (0..n).map(|j| gspec.coord(j)).collect();
    let mut partial = vec![Complex64::new(0.0, 0.0); n_mu * n];
    for i in 0..n_mu {
        for (jp, &p) in coords.iter().enumerate() {
            partial[i * n + jp] = (0..n_mu)
                .map(|l| g[i * n_mu + l] * Complex64::from_polar(1.0, -mus[l] * p))
                .sum();
        }
    }
    let scale = dmu * dmu / (4.0 * PI * PI);
    let mut values = vec![0.0; n * n];
    for (jq, &q) in coords.iter().enumerate() {
        for jp in 0..n {
            let v: Complex64 = (0..n_mu)
                .map(|i| partial[i * n + jp] * Complex64::from_polar(1.0, -mus[i] * q))
                .sum();
            values[jq * n + jp] = v.re * scale;
        }
    }
    Field::new(*gspec, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::{radon_forward, SinogramSpec};
    use crate::inversion::{reconstruction_error, ErrorNorm};
    use crate::phasespace::{GaussianTerm, Phantom};
    use crate::quadrature::QuadratureSpec;

    fn sino(ph: &Phantom, a: usize, m: usize, x_max: f64) -> Sinogram {
        radon_forward(
            ph,
            &SinogramSpec::new(a, m, x_max).unwrap(),
            &QuadratureSpec::default(),
        )
        .unwrap()
    }

    #[test]
    fn reconstructs_centered_gaussian() {
        let ph = Phantom::centered_gaussian(2, 1.0).unwrap();
        let grid = GridSpec::new(2, 5.0, 128).unwrap();
        let f = invert_m2_fourier(&sino(&ph, 180, 256, 8.0), &grid, &SpectralParams::default())
            .unwrap();
        let err = reconstruction_error(&f, &ph, ErrorNorm::MaxAbs).unwrap();
        assert!(err <= 1e-2, "max-abs {err:e}");
        let center = f.values()[64 * 128 + 64];
        assert!((center - 1.0 / PI).abs() < 1e-2);
    }

    #[test]
    fn zero_sinogram_gives_zero_field() {
        let grid = GridSpec::new(2, 5.0, 32).unwrap();
        let sg = Sinogram::zeros(SinogramSpec::new(16, 64, 8.0).unwrap());
        let f = invert_m2_fourier(&sg, &grid, &SpectralParams::default()).unwrap();
        assert!(f.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn two_gaussians() {
        let ph = Phantom::new(
            2,
            vec![
                GaussianTerm {
                    weight: 0.6,
                    alpha: 1.0,
                    center: vec![1.0, -0.5],
                },
                GaussianTerm {
                    weight: 0.4,
                    alpha: 1.5,
                    center: vec![-1.0, 1.0],
                },
            ],
        )
        .unwrap();
        let grid = GridSpec::new(2, 5.0, 128).unwrap();
        let f = invert_m2_fourier(&sino(&ph, 180, 256, 8.0), &grid, &SpectralParams::default())
            .unwrap();
        let err = reconstruction_error(&f, &ph, ErrorNorm::MaxAbs).unwrap();
        assert!(err <= 2e-2, "max-abs {err:e}");
    }

    #[test]
    fn insufficient_support() {
        let grid = GridSpec::new(2, 6.0, 32).unwrap();
        let sg = Sinogram::zeros(SinogramSpec::new(16, 64, 8.0).unwrap());
        let err = invert_m2_fourier(&sg, &grid, &SpectralParams::default()).unwrap_err();
        assert!(matches!(err, Error::InsufficientSupport(_)));
    }

    #[test]
    fn direct_quadrature_pins_fast_path() {
        let ph = Phantom::centered_gaussian(2, 1.0).unwrap();
        let grid = GridSpec::new(2, 5.0, 32).unwrap();
        let sg = sino(&ph, 90, 128, 8.0);
        let sp = SpectralParams::default();
        let fast = invert_m2_fourier(&sg, &grid, &sp).unwrap();
        let slow = invert_m2_fourier_direct(&sg, &grid, &sp).unwrap();
        let diff = fast
            .values()
            .iter()
            .zip(slow.values())
            .fold(0.0f64, |acc, (a, b)| acc.max((a - b).abs()));
        assert!(diff <= 1e-3, "fast vs slow {diff:e}");
    }
}
