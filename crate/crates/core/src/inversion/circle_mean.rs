//! Radon's original inversion through circle means.
//!
//! `F_x(r)` averages the sinogram over all lines tangent to the circle of
//! radius `r` around `x`; then `f(x) = -(1/pi) lim_{eps->0} int_eps^inf F'(r)/r dr`.
//! The limit is taken numerically: the integral is evaluated for a decreasing
//! schedule of cutoffs and extrapolated with the model `a + b sqrt(eps)`.

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_dims, Error, Result};
use crate::forward::Sinogram;
use crate::phasespace::{Field, GridSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircleMeanParams {
    /// Strictly decreasing positive cutoffs.
    pub epsilon_schedule: Vec<f64>,
    /// Upper truncation of the radial integral.
    pub r_max: f64,
    /// Radial cells between 0 and the truncation radius.
    pub n_r: usize,
    /// Angular trapezoid nodes for each circle mean.
    pub n_theta: usize,
    /// Shrink the truncation radius at each point to the sinogram support
    /// (`X_max - |x|`) instead of rejecting points where `|x| + r_max > X_max`.
    #[serde(default)]
    pub clip_to_support: bool,
}

impl CircleMeanParams {
    pub fn validate(&self) -> Result<()> {
        let eps = &self.epsilon_schedule;
        if eps.len() < 2 {
            return Err(Error::invalid(
                "epsilon schedule needs at least two cutoffs",
            ));
        }
        if eps.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
            return Err(Error::invalid("epsilon cutoffs must be positive"));
        }
        if eps.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::invalid(
                "epsilon schedule must be strictly decreasing",
            ));
        }
        if !(self.r_max > eps[0]) {
            return Err(Error::invalid(format!(
                "r_max {} must exceed the largest cutoff {}",
                self.r_max, eps[0]
            )));
        }
        if self.n_r < 64 {
            return Err(Error::invalid(format!(
                "n_r must be >= 64, got {}",
                self.n_r
            )));
        }
        if self.n_theta < 64 {
            return Err(Error::invalid(format!(
                "n_theta must be >= 64, got {}",
                self.n_theta
            )));
        }
        Ok(())
    }
}

impl Default for CircleMeanParams {
    fn default() -> Self {
        CircleMeanParams {
            epsilon_schedule: vec![0.04, 0.02, 0.01, 0.005, 0.0025],
            r_max: 6.5,
            n_r: 256,
            n_theta: 180,
            clip_to_support: false,
        }
    }
}

/// Circle-mean estimates for each cutoff and their extrapolated limit.
#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonSequence {
    pub epsilons: Vec<f64>,
    pub estimates: Vec<f64>,
    pub limit: f64,
}

impl EpsilonSequence {
    /// Least-squares fit of `a + b sqrt(eps)` over the whole sequence;
    /// returns `(a, b, max |residual|)`.
    pub fn sqrt_fit(&self) -> (f64, f64, f64) {
        let n = self.epsilons.len() as f64;
        let s: Vec<f64> = self.epsilons.iter().map(|e| e.sqrt()).collect();
        let sx: f64 = s.iter().sum();
        let sy: f64 = self.estimates.iter().sum();
        let sxx: f64 = s.iter().map(|x| x * x).sum();
        let sxy: f64 = s.iter().zip(&self.estimates).map(|(x, y)| x * y).sum();
        let det = n * sxx - sx * sx;
        let b = (n * sxy - sx * sy) / det;
        let a = (sy - b * sx) / n;
        let worst = s
            .iter()
            .zip(&self.estimates)
            .map(|(x, y)| (y - a - b * x).abs())
            .fold(0.0, f64::max);
        (a, b, worst)
    }

    /// Largest fit residual relative to the spread of the estimates.
    pub fn residual_ratio(&self) -> f64 {
        let (lo, hi) = self
            .estimates
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
        let span = hi - lo;
        if span == 0.0 {
            return 0.0;
        }
        self.sqrt_fit().2 / span
    }
}

/// Angular nodes `theta_i = 2 pi i / n` with their sinogram row brackets.
struct CircleNodes {
    nodes: Vec<(f64, f64, usize, usize, f64)>,
}

impl CircleNodes {
    fn new(sg: &Sinogram, n_theta: usize) -> Self {
        let nodes = (0..n_theta)
            .map(|i| {
                let theta = TAU * i as f64 / n_theta as f64;
                let (lo, hi, w) = sg.angle_bracket(theta);
                (theta.cos(), theta.sin(), lo, hi, w)
            })
            .collect();
        CircleNodes { nodes }
    }

    /// `(1/2 pi) int f#(t, q cos t + p sin t + r) dt` by the trapezoid rule.
    /// The caller guarantees every offset stays inside the sinogram window.
    #[inline]
    fn mean(&self, sg: &Sinogram, q: f64, p: f64, r: f64) -> f64 {
        let mut acc = 0.0;
        for &(c, s, lo, hi, w) in &self.nodes {
            let x = q * c + p * s + r;
            let v0 = sg.row_lookup_cubic(lo, x);
            acc += if w == 0.0 {
                v0
            } else {
                v0 + w * (sg.row_lookup_cubic(hi, x) - v0)
            };
        }
        acc / self.nodes.len() as f64
    }
}

fn check_circle_support(sg: &Sinogram, q: f64, p: f64, r: f64) -> Result<()> {
    let limit = sg.spec().offset_halfwidth;
    let reach = q.hypot(p) + r.abs();
    if reach <= limit {
        Ok(())
    } else {
        Err(Error::OutOfSupport {
            offset: reach,
            limit,
        })
    }
}

/// Mean of the sinogram over all lines tangent to the circle of radius `r`
/// centred at `(q, p)`.
pub fn circle_mean(sg: &Sinogram, q: f64, p: f64, r: f64, n_theta: usize) -> Result<f64> {
    if n_theta == 0 {
        return Err(Error::invalid("n_theta must be positive"));
    }
    check_circle_support(sg, q, p, r)?;
    Ok(CircleNodes::new(sg, n_theta).mean(sg, q, p, r))
}

/// Integral `-(1/pi) int_eps^{r_top} F'(r)/r dr` for every cutoff, from
/// `F` sampled at `r_i = i * r_top / n_r`.
///
/// On each radial cell the derivative is the central difference about the
/// cell midpoint, and the integrand is evaluated there (midpoint rule). The
/// cell holding `eps` contributes only its part above `eps`.
fn epsilon_estimates(profile: &[f64], r_top: f64, schedule: &[f64]) -> Vec<f64> {
    let n_r = profile.len() - 1;
    let dr = r_top / n_r as f64;
    schedule
        .iter()
        .map(|&eps| {
            let first = ((eps / dr).floor() as usize).min(n_r - 1);
            let mut acc = 0.0;
            for i in first..n_r {
                let slope = (profile[i + 1] - profile[i]) / dr;
                let lo = (i as f64 * dr).max(eps);
                let hi = (i + 1) as f64 * dr;
                if hi <= lo {
                    continue;
                }
                acc += slope * (hi - lo) / (0.5 * (lo + hi));
            }
            -acc / PI
        })
        .collect()
}

/// Fits `a + b sqrt(eps)` through the two smallest cutoffs and returns `a`.
fn extrapolate(schedule: &[f64], estimates: &[f64]) -> f64 {
    let n = schedule.len();
    let (e1, e2) = (schedule[n - 2], schedule[n - 1]);
    let (v1, v2) = (estimates[n - 2], estimates[n - 1]);
    let b = (v1 - v2) / (e1.sqrt() - e2.sqrt());
    v2 - b * e2.sqrt()
}

fn point_sequence(
    sg: &Sinogram,
    nodes: &CircleNodes,
    q: f64,
    p: f64,
    r_top: f64,
    cp: &CircleMeanParams,
) -> EpsilonSequence {
    let dr = r_top / cp.n_r as f64;
    let profile: Vec<f64> = (0..=cp.n_r)
        .map(|i| nodes.mean(sg, q, p, i as f64 * dr))
        .collect();
    let estimates = epsilon_estimates(&profile, r_top, &cp.epsilon_schedule);
    let limit = extrapolate(&cp.epsilon_schedule, &estimates);
    EpsilonSequence {
        epsilons: cp.epsilon_schedule.clone(),
        estimates,
        limit,
    }
}

/// Truncation radius used at a point at distance `rho` from the origin.
fn truncation_radius(sg: &Sinogram, rho: f64, cp: &CircleMeanParams) -> Result<f64> {
    let limit = sg.spec().offset_halfwidth;
    let available = limit - rho;
    if cp.r_max <= available {
        return Ok(cp.r_max);
    }
    if !cp.clip_to_support {
        return Err(Error::OutOfSupport {
            offset: rho + cp.r_max,
            limit,
        });
    }
    if available <= cp.epsilon_schedule[0] {
        return Err(Error::InsufficientSupport(format!(
            "point at radius {rho} leaves only {available} of radial room inside X_max = {limit}, \
             not more than the largest cutoff {}",
            cp.epsilon_schedule[0]
        )));
    }
    Ok(available)
}

/// The cutoff sequence and its limit at a single point.
pub fn circle_mean_limit(
    sg: &Sinogram,
    q: f64,
    p: f64,
    cp: &CircleMeanParams,
) -> Result<EpsilonSequence> {
    cp.validate()?;
    let r_top = truncation_radius(sg, q.hypot(p), cp)?;
    let nodes = CircleNodes::new(sg, cp.n_theta);
    Ok(point_sequence(sg, &nodes, q, p, r_top, cp))
}

/// Circle-mean reconstruction at every cell center of `gspec`.
pub fn invert_radon_circle_mean(
    sg: &Sinogram,
    gspec: &GridSpec,
    cp: &CircleMeanParams,
) -> Result<Field> {
    check_dims(2, gspec.dims)?;
    gspec.validate()?;
    cp.validate()?;
    let nodes = CircleNodes::new(sg, cp.n_theta);
    let n = gspec.samples;
    let values = (0..n * n)
        .into_par_iter()
        .map(|idx| {
            let (q, p) = (gspec.coord(idx / n), gspec.coord(idx % n));
            let r_top = truncation_radius(sg, q.hypot(p), cp)?;
            Ok(point_sequence(sg, &nodes, q, p, r_top, cp).limit)
        })
        .collect::<Result<Vec<f64>>>()?;
    Field::new(*gspec, values)
}
