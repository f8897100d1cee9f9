//! The three reconstruction routes: M2/Fourier (central slice), Radon's
//! circle-mean singular integral, and Helgason's backprojection followed by a
//! fractional Laplacian.

mod circle_mean;
pub(crate) mod fourier;
mod helgason;

pub use circle_mean::{
    circle_mean, circle_mean_limit, invert_radon_circle_mean, CircleMeanParams, EpsilonSequence,
};
pub use fourier::{invert_m2_fourier, invert_m2_fourier_direct};
pub use helgason::{
    backproject, fractional_laplacian, fractional_laplacian_with, invert_helgason,
    invert_helgason_with, Multiplier,
};

use serde::{Deserialize, Serialize};

use crate::error::{check_dims, Error, Result};
use crate::phasespace::{Field, Phantom};

/// Polar-to-Cartesian frequency interpolation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SliceInterp {
    #[default]
    Linear,
    Cubic,
}

/// Zero-padding multiplier and slice interpolation for the spectral steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralParams {
    pub pad_factor: usize,
    pub slice_interp: SliceInterp,
}

impl SpectralParams {
    pub fn new(pad_factor: usize, slice_interp: SliceInterp) -> Result<Self> {
        let sp = SpectralParams {
            pad_factor,
            slice_interp,
        };
        sp.validate()?;
        Ok(sp)
    }

    pub fn validate(&self) -> Result<()> {
        if matches!(self.pad_factor, 1 | 2 | 4) {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "pad factor must be 1, 2 or 4, got {}",
                self.pad_factor
            )))
        }
    }
}

impl Default for SpectralParams {
    fn default() -> Self {
        SpectralParams {
            pad_factor: 2,
            slice_interp: SliceInterp::Linear,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorNorm {
    MaxAbs,
    L2CellWeighted,
}

/// Distance between a reconstruction and a phantom sampled on the same grid.
pub fn reconstruction_error(f: &Field, reference: &Phantom, norm: ErrorNorm) -> Result<f64> {
    check_dims(f.spec().dims, reference.dims())?;
    let spec = f.spec();
    let mut point = vec![0.0; spec.dims];
    let diffs = f.values().iter().enumerate().map(|(i, v)| {
        spec.point(i, &mut point);
        v - reference.eval_unchecked(&point)
    });
    Ok(match norm {
        ErrorNorm::MaxAbs => diffs.fold(0.0, |acc: f64, d| acc.max(d.abs())),
        ErrorNorm::L2CellWeighted => {
            (diffs.map(|d| d * d).sum::<f64>() * spec.cell_volume()).sqrt()
        }
    })
}
