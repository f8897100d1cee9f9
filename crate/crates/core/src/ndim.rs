//! Radon and M2 transforms of functions on `R^n`, with the M2 Fourier
//! inversion at `n = 3`.
//!
//! Projections are taken along a fixed [`DirectionSet`]; M2 values are read
//! back through `f^{M2}(mu, X) = f#(mu/|mu|, X/|mu|) / |mu|` just as in the
//! plane. At `n = 3` the one-sided row spectra are scattered onto the
//! Cartesian frequency lattice by inverse-distance weighting over the nearest
//! directions on the sphere (both `omega` and `-omega`, since
//! `P(-omega, k) = conj P(omega, k)`).

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_dims, Error, Result};
use crate::forward::{angle_bracket, lookup_linear, Sinogram, SinogramSpec};
use crate::inversion::{fourier, SliceInterp, SpectralParams};
use crate::phasespace::{Field, GridSpec, Phantom};
use crate::quadrature::QuadratureSpec;
use crate::spectral::RowSpectra;

/// Largest dimension and grid size accepted by [`invert_m2_fourier_nd`].
pub const MAX_DIMS: usize = 3;
pub const MAX_SAMPLES_ND: usize = 64;

/// Directions blended per frequency sample at `n = 3`.
const IDW_NEIGHBORS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DirectionScheme {
    /// `omega_a = (cos 2 pi a / A, sin 2 pi a / A)`, the plane.
    UniformAngles,
    /// Golden-angle spiral on the unit sphere in `R^3`.
    FibonacciSphere,
}

impl DirectionScheme {
    pub fn dims(self) -> usize {
        match self {
            DirectionScheme::UniformAngles => 2,
            DirectionScheme::FibonacciSphere => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            DirectionScheme::UniformAngles => "uniform-angles",
            DirectionScheme::FibonacciSphere => "fibonacci-sphere",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "uniform-angles" => Some(DirectionScheme::UniformAngles),
            "fibonacci-sphere" => Some(DirectionScheme::FibonacciSphere),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DirectionSet {
    scheme: DirectionScheme,
    coords: Vec<f64>,
}

impl DirectionSet {
    pub fn new(scheme: DirectionScheme, count: usize) -> Result<Self> {
        if count < 4 {
            return Err(Error::invalid(format!(
                "need at least 4 directions, got {count}"
            )));
        }
        let coords = match scheme {
            DirectionScheme::UniformAngles => (0..count)
                .flat_map(|a| {
                    let t = TAU * a as f64 / count as f64;
                    [t.cos(), t.sin()]
                })
                .collect(),
            DirectionScheme::FibonacciSphere => {
                let golden = PI * (3.0 - 5f64.sqrt());
                (0..count)
                    .flat_map(|i| {
                        let z = 1.0 - (2 * i + 1) as f64 / count as f64;
                        let rho = (1.0 - z * z).sqrt();
                        let (s, c) = (golden * i as f64).sin_cos();
                        [rho * c, rho * s, z]
                    })
                    .collect()
            }
        };
        Ok(DirectionSet { scheme, coords })
    }

    pub fn uniform_angles(count: usize) -> Result<Self> {
        DirectionSet::new(DirectionScheme::UniformAngles, count)
    }

    pub fn fibonacci(count: usize) -> Result<Self> {
        DirectionSet::new(DirectionScheme::FibonacciSphere, count)
    }

    pub fn scheme(&self) -> DirectionScheme {
        self.scheme
    }

    pub fn dims(&self) -> usize {
        self.scheme.dims()
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dims()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn direction(&self, i: usize) -> &[f64] {
        let d = self.dims();
        &self.coords[i * d..(i + 1) * d]
    }
}

/// Shape of an n-dimensional tomogram.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TomogramSpec {
    pub scheme: DirectionScheme,
    pub n_directions: usize,
    pub n_offsets: usize,
    pub offset_halfwidth: f64,
}

impl TomogramSpec {
    pub fn new(
        scheme: DirectionScheme,
        n_directions: usize,
        n_offsets: usize,
        offset_halfwidth: f64,
    ) -> Result<Self> {
        let spec = TomogramSpec {
            scheme,
            n_directions,
            n_offsets,
            offset_halfwidth,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_directions < 4 {
            return Err(Error::invalid(format!(
                "need at least 4 directions, got {}",
                self.n_directions
            )));
        }
        // offsets follow the plane's rules
        SinogramSpec {
            n_angles: 4,
            n_offsets: self.n_offsets,
            offset_halfwidth: self.offset_halfwidth,
        }
        .validate()
    }

    pub fn dims(&self) -> usize {
        self.scheme.dims()
    }

    pub fn offset_spacing(&self) -> f64 {
        2.0 * self.offset_halfwidth / self.n_offsets as f64
    }

    pub fn offset(&self, m: usize) -> f64 {
        -self.offset_halfwidth + (m as f64 + 0.5) * self.offset_spacing()
    }

    pub fn len(&self) -> usize {
        self.n_directions * self.n_offsets
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Samples `f#(omega_d, X_m)`, one row per direction.
#[derive(Debug, Clone, PartialEq)]
pub struct TomogramND {
    spec: TomogramSpec,
    dirs: DirectionSet,
    values: Vec<f64>,
}

impl TomogramND {
    pub fn new(spec: TomogramSpec, values: Vec<f64>) -> Result<Self> {
        spec.validate()?;
        if values.len() != spec.len() {
            return Err(Error::invalid(format!(
                "expected {} values, got {}",
                spec.len(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("tomogram values must be finite"));
        }
        let dirs = DirectionSet::new(spec.scheme, spec.n_directions)?;
        Ok(TomogramND { spec, dirs, values })
    }

    pub fn zeros(spec: TomogramSpec) -> Result<Self> {
        TomogramND::new(spec, vec![0.0; spec.len()])
    }

    pub fn from_sinogram(sg: &Sinogram) -> Self {
        let s = sg.spec();
        let spec = TomogramSpec {
            scheme: DirectionScheme::UniformAngles,
            n_directions: s.n_angles,
            n_offsets: s.n_offsets,
            offset_halfwidth: s.offset_halfwidth,
        };
        TomogramND {
            spec,
            dirs: DirectionSet::uniform_angles(s.n_angles).expect("sinogram has at least 4 angles"),
            values: sg.values().to_vec(),
        }
    }

    /// The plane case as a [`Sinogram`]; only for uniform angles.
    pub fn to_sinogram(&self) -> Result<Sinogram> {
        if self.spec.scheme != DirectionScheme::UniformAngles {
            return Err(Error::Unsupported(format!(
                "{} tomograms have no sinogram form",
                self.spec.scheme.name()
            )));
        }
        let spec = SinogramSpec::new(
            self.spec.n_directions,
            self.spec.n_offsets,
            self.spec.offset_halfwidth,
        )?;
        Sinogram::new(spec, self.values.clone())
    }

    pub fn spec(&self) -> &TomogramSpec {
        &self.spec
    }

    pub fn directions(&self) -> &DirectionSet {
        &self.dirs
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, d: usize) -> &[f64] {
        let m = self.spec.n_offsets;
        &self.values[d * m..(d + 1) * m]
    }

    /// `sum_m f#(omega_d, X_m) dX`, the mass seen along direction `d`.
    pub fn row_mass(&self, d: usize) -> f64 {
        self.row(d).iter().sum::<f64>() * self.spec.offset_spacing()
    }

    pub fn mean_mass(&self) -> f64 {
        (0..self.spec.n_directions)
            .map(|d| self.row_mass(d))
            .sum::<f64>()
            / self.spec.n_directions as f64
    }

    pub fn add(&self, other: &TomogramND) -> Result<TomogramND> {
        if self.spec != other.spec {
            return Err(Error::invalid("tomograms have different shapes"));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + b)
            .collect();
        TomogramND::new(self.spec, values)
    }

    #[inline]
    fn lookup(&self, d: usize, x: f64) -> f64 {
        lookup_linear(
            self.row(d),
            self.spec.offset_halfwidth,
            self.spec.offset_spacing(),
            x,
        )
    }
}

/// Closed-form tomogram of a Gaussian phantom: every normalized term
/// projects to `(alpha/sqrt pi) exp(-alpha^2 (X - <omega, c>)^2)` in any
/// dimension.
pub fn radon_forward_nd(ph: &Phantom, tspec: &TomogramSpec) -> Result<TomogramND> {
    tspec.validate()?;
    check_dims(tspec.dims(), ph.dims())?;
    let dirs = DirectionSet::new(tspec.scheme, tspec.n_directions)?;
    let m = tspec.n_offsets;
    let mut values = vec![0.0; tspec.len()];
    values.par_chunks_mut(m).enumerate().for_each(|(d, row)| {
        let omega = dirs.direction(d);
        for (j, out) in row.iter_mut().enumerate() {
            *out = ph.projection(omega, tspec.offset(j));
        }
    });
    TomogramND::new(*tspec, values)
}

/// Orthonormal basis of the hyperplane perpendicular to `omega` (n = 2, 3).
fn perpendicular_basis(omega: &[f64]) -> Vec<Vec<f64>> {
    if omega.len() == 2 {
        return vec![vec![-omega[1], omega[0]]];
    }
    // start from the axis least aligned with omega
    let axis = (0..3)
        .min_by(|&a, &b| omega[a].abs().total_cmp(&omega[b].abs()))
        .unwrap();
    let mut e = [0.0; 3];
    e[axis] = 1.0;
    let dot: f64 = e.iter().zip(omega).map(|(a, b)| a * b).sum();
    let mut u: Vec<f64> = e.iter().zip(omega).map(|(a, b)| a - dot * b).collect();
    let norm = u.iter().map(|v| v * v).sum::<f64>().sqrt();
    u.iter_mut().for_each(|v| *v /= norm);
    let v = vec![
        omega[1] * u[2] - omega[2] * u[1],
        omega[2] * u[0] - omega[0] * u[2],
        omega[0] * u[1] - omega[1] * u[0],
    ];
    vec![u, v]
}

/// Hyperplane integrals of a gridded field (multilinear interpolation, zero
/// outside the window) by a tensor-product rule on `quad`'s nodes.
pub fn radon_forward_nd_field(
    f: &Field,
    tspec: &TomogramSpec,
    quad: &QuadratureSpec,
) -> Result<TomogramND> {
    tspec.validate()?;
    quad.validate()?;
    check_dims(tspec.dims(), f.spec().dims)?;
    let dirs = DirectionSet::new(tspec.scheme, tspec.n_directions)?;
    let (nodes, weights) = quad.nodes();
    let n = tspec.dims();
    let m = tspec.n_offsets;
    let mut values = vec![0.0; tspec.len()];
    values.par_chunks_mut(m).enumerate().for_each(|(d, row)| {
        let omega = dirs.direction(d);
        let basis = perpendicular_basis(omega);
        let mut point = vec![0.0; n];
        for (j, out) in row.iter_mut().enumerate() {
            let x = tspec.offset(j);
            let mut acc = 0.0;
            if n == 2 {
                for (s, w) in nodes.iter().zip(&weights) {
                    for i in 0..2 {
                        point[i] = x * omega[i] + s * basis[0][i];
                    }
                    acc += w * f.interpolate_unchecked(&point);
                }
            } else {
                for (s, ws) in nodes.iter().zip(&weights) {
                    for (t, wt) in nodes.iter().zip(&weights) {
                        for i in 0..3 {
                            point[i] = x * omega[i] + s * basis[0][i] + t * basis[1][i];
                        }
                        acc += ws * wt * f.interpolate_unchecked(&point);
                    }
                }
            }
            *out = acc;
        }
    });
    TomogramND::new(*tspec, values)
}

/// `f^{M2}(mu, X) = f#(mu/|mu|, X/|mu|) / |mu|`.
///
/// In the plane the lookup is bilinear with periodic wrap in the angle. On
/// the sphere it takes the nearest stored direction (or its antipode, using
/// `f#(-omega, X) = f#(omega, -X)`) and interpolates linearly in `X`.
pub fn m2_evaluate_nd(tg: &TomogramND, mu: &[f64], x: f64) -> Result<f64> {
    check_dims(tg.spec.dims(), mu.len())?;
    let mut r = mu.iter().map(|v| v * v).sum::<f64>().sqrt();
    if r == 0.0 || !r.is_finite() {
        return Err(Error::SingularDirection);
    }
    if (r - 1.0).abs() <= 16.0 * f64::EPSILON {
        r = 1.0;
    }
    let xr = x / r;
    let limit = tg.spec.offset_halfwidth;
    if !(xr.abs() <= limit) {
        return Err(Error::OutOfSupport { offset: xr, limit });
    }
    let value = match tg.spec.scheme {
        DirectionScheme::UniformAngles => {
            let (lo, hi, w) = angle_bracket(tg.spec.n_directions, mu[1].atan2(mu[0]));
            let v0 = tg.lookup(lo, xr);
            if w == 0.0 {
                v0
            } else {
                v0 + w * (tg.lookup(hi, xr) - v0)
            }
        }
        DirectionScheme::FibonacciSphere => {
            let (d, dot) = (0..tg.dirs.len())
                .map(|d| {
                    let dot: f64 = tg
                        .dirs
                        .direction(d)
                        .iter()
                        .zip(mu)
                        .map(|(a, b)| a * b)
                        .sum();
                    (d, dot)
                })
                .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
                .unwrap();
            if dot >= 0.0 {
                tg.lookup(d, xr)
            } else {
                tg.lookup(d, -xr)
            }
        }
    };
    Ok(value / r)
}

/// [`m2_evaluate_nd`] at a fixed `mu` over several offsets.
pub fn m2_row_nd(tg: &TomogramND, mu: &[f64], xs: &[f64]) -> Result<Vec<f64>> {
    xs.iter().map(|&x| m2_evaluate_nd(tg, mu, x)).collect()
}

/// Bucketed nearest-neighbor search over the signed directions `+-omega_d`,
/// keyed by cube-map cells.
struct SphereIndex {
    grid: usize,
    points: Vec<[f64; 3]>,
    cells: Vec<Vec<u32>>,
}

impl SphereIndex {
    fn new(dirs: &DirectionSet) -> Self {
        let points: Vec<[f64; 3]> = (0..dirs.len())
            .flat_map(|d| {
                let w = dirs.direction(d);
                [[w[0], w[1], w[2]], [-w[0], -w[1], -w[2]]]
            })
            .collect();
        let grid = ((points.len() as f64 / 12.0).sqrt().ceil() as usize).max(1);
        let k = IDW_NEIGHBORS.min(points.len());
        let cells = (0..6 * grid * grid)
            .into_par_iter()
            .map(|cell| {
                let center = Self::cell_point(grid, cell, 0.5, 0.5);
                let radius = [
                    (0.0, 0.0),
                    (0.0, 1.0),
                    (1.0, 0.0),
                    (1.0, 1.0),
                    (0.5, 0.0),
                    (0.0, 0.5),
                    (1.0, 0.5),
                    (0.5, 1.0),
                ]
                .iter()
                .map(|&(a, b)| chord(&center, &Self::cell_point(grid, cell, a, b)))
                .fold(0.0, f64::max);
                let dist: Vec<f64> = points.iter().map(|p| chord(&center, p)).collect();
                let mut sorted = dist.clone();
                sorted.sort_by(f64::total_cmp);
                // any query in the cell has its k nearest within d_k + 2 R of
                // the center (triangle inequality)
                let reach = sorted[k - 1] + 2.0 * radius * 1.01 + 1e-12;
                dist.iter()
                    .enumerate()
                    .filter(|(_, d)| **d <= reach)
                    .map(|(i, _)| i as u32)
                    .collect()
            })
            .collect();
        SphereIndex {
            grid,
            points,
            cells,
        }
    }

    /// Unit vector at fractional position `(a, b)` inside `cell`.
    fn cell_point(grid: usize, cell: usize, a: f64, b: f64) -> [f64; 3] {
        let face = cell / (grid * grid);
        let ia = (cell / grid) % grid;
        let ib = cell % grid;
        let u = -1.0 + 2.0 * (ia as f64 + a) / grid as f64;
        let v = -1.0 + 2.0 * (ib as f64 + b) / grid as f64;
        let axis = face / 2;
        let sign = if face.is_multiple_of(2) { 1.0 } else { -1.0 };
        let mut p = [0.0; 3];
        p[axis] = sign;
        p[(axis + 1) % 3] = u;
        p[(axis + 2) % 3] = v;
        let norm = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
        [p[0] / norm, p[1] / norm, p[2] / norm]
    }

    fn cell_of(&self, q: &[f64]) -> usize {
        let axis = (0..3)
            .max_by(|&a, &b| q[a].abs().total_cmp(&q[b].abs()))
            .unwrap();
        let face = 2 * axis + usize::from(q[axis] < 0.0);
        let m = q[axis].abs();
        let g = self.grid as f64;
        let bin = |t: f64| (((t / m + 1.0) * 0.5 * g).floor().max(0.0) as usize).min(self.grid - 1);
        face * self.grid * self.grid + bin(q[(axis + 1) % 3]) * self.grid + bin(q[(axis + 2) % 3])
    }

    /// Up to `IDW_NEIGHBORS` nearest signed directions as `(index, chord)`.
    fn nearest(&self, q: &[f64], out: &mut Vec<(usize, f64)>) {
        out.clear();
        for &i in &self.cells[self.cell_of(q)] {
            let d = chord(q, &self.points[i as usize]);
            if out.len() < IDW_NEIGHBORS {
                out.push((i as usize, d));
            } else if d < out[IDW_NEIGHBORS - 1].1 {
                out[IDW_NEIGHBORS - 1] = (i as usize, d);
            } else {
                continue;
            }
            out.sort_by(|a, b| a.1.total_cmp(&b.1));
        }
    }
}

#[inline]
fn chord(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// M2 Fourier inversion in `n` dimensions. The plane delegates to
/// [`crate::inversion::invert_m2_fourier`].
pub fn invert_m2_fourier_nd(
    tg: &TomogramND,
    gspec: &GridSpec,
    sp: &SpectralParams,
) -> Result<Field> {
    gspec.validate()?;
    sp.validate()?;
    if gspec.dims > MAX_DIMS {
        return Err(Error::Unsupported(format!(
            "{} dimensions (at most {MAX_DIMS})",
            gspec.dims
        )));
    }
    check_dims(tg.spec.dims(), gspec.dims)?;
    if gspec.dims == 2 {
        return crate::inversion::invert_m2_fourier(&tg.to_sinogram()?, gspec, sp);
    }
    if gspec.samples > MAX_SAMPLES_ND {
        return Err(Error::Unsupported(format!(
            "{} samples per axis in {} dimensions (at most {MAX_SAMPLES_ND})",
            gspec.samples, gspec.dims
        )));
    }
    let s = tg.spec;
    fourier::check_support(s.offset_halfwidth, gspec)?;

    let spectra = RowSpectra::compute(
        &tg.values,
        s.n_offsets,
        s.offset_spacing(),
        s.offset(0),
        fourier::row_fft_len(s.n_offsets, gspec.samples, sp.pad_factor),
    );
    let index = SphereIndex::new(&tg.dirs);
    let interp = sp.slice_interp;
    let slice = |k: f64, unit: &[f64]| -> Complex64 {
        let mut near = Vec::with_capacity(IDW_NEIGHBORS);
        index.nearest(unit, &mut near);
        let value_of = |i: usize| {
            let v = match interp {
                SliceInterp::Linear => spectra.linear(i / 2, k),
                SliceInterp::Cubic => spectra.cubic(i / 2, k),
            };
            if i.is_multiple_of(2) {
                v
            } else {
                v.conj()
            }
        };
        if near[0].1 < 1e-12 {
            return value_of(near[0].0);
        }
        let mut total = Complex64::new(0.0, 0.0);
        let mut weight = 0.0;
        for &(i, d) in &near {
            let w = 1.0 / (d * d);
            total += value_of(i) * w;
            weight += w;
        }
        total / weight
    };
    Ok(fourier::assemble_and_invert(
        gspec,
        sp.pad_factor,
        spectra.k_max(),
        tg.mean_mass(),
        slice,
    ))
}
