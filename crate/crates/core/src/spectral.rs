//! FFT plumbing shared by the spectral inversions.

use rustfft::num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};

/// In-place unnormalized transform of a row-major `n^dims` array along every
/// axis.
pub(crate) fn fft_nd(data: &mut [Complex64], n: usize, dims: usize, direction: FftDirection) {
    debug_assert_eq!(data.len(), n.pow(dims as u32));
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft(n, direction);
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    for axis in 0..dims {
        let stride = n.pow((dims - 1 - axis) as u32);
        if stride == 1 {
            fft.process_with_scratch(data, &mut scratch);
            continue;
        }
        let block = stride * n;
        for start in (0..data.len()).step_by(block) {
            for inner in 0..stride {
                let base = start + inner;
                for (k, v) in line.iter_mut().enumerate() {
                    *v = data[base + k * stride];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for (k, v) in line.iter().enumerate() {
                    data[base + k * stride] = *v;
                }
            }
        }
    }
}

/// Signed frequency index of FFT bin `i` out of `n`.
#[inline]
pub(crate) fn signed_index(i: usize, n: usize) -> isize {
    if i < n.div_ceil(2) {
        i as isize
    } else {
        i as isize - n as isize
    }
}

/// One-sided spectra `P_a(k_j) = integral p_a(X) exp(-i k_j X) dX` of real
/// rows sampled at cell-centered offsets, for `k_j = j dk`, `j = 0..=len/2`.
#[derive(Debug, Clone)]
pub(crate) struct RowSpectra {
    pub dk: f64,
    pub n_k: usize,
    pub data: Vec<Complex64>,
}

impl RowSpectra {
    /// `rows` holds `n_rows` rows of `m` samples spaced `dx`, the first at
    /// `x0`. Rows are zero-padded to `len` before transforming.
    pub fn compute(rows: &[f64], m: usize, dx: f64, x0: f64, len: usize) -> Self {
        let n_rows = rows.len() / m;
        let n_k = len / 2 + 1;
        let dk = std::f64::consts::TAU / (len as f64 * dx);
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(len);
        let mut buf = vec![Complex64::new(0.0, 0.0); len];
        let mut data = Vec::with_capacity(n_rows * n_k);
        for row in rows.chunks(m) {
            buf.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
            for (b, &v) in buf.iter_mut().zip(row) {
                b.re = v;
            }
            fft.process(&mut buf);
            for (j, v) in buf.iter().take(n_k).enumerate() {
                let phase = Complex64::from_polar(dx, -(j as f64) * dk * x0);
                data.push(v * phase);
            }
        }
        RowSpectra { dk, n_k, data }
    }

    #[inline]
    pub fn row(&self, a: usize) -> &[Complex64] {
        &self.data[a * self.n_k..(a + 1) * self.n_k]
    }

    /// Largest radius covered by the samples.
    pub fn k_max(&self) -> f64 {
        (self.n_k - 1) as f64 * self.dk
    }

    /// Radial sample `j` of row `a`, using `P(-k) = conj P(k)` below zero and
    /// zero past the last sample.
    #[inline]
    pub fn at(&self, a: usize, j: isize) -> Complex64 {
        if j < 0 {
            let jj = (-j) as usize;
            if jj < self.n_k {
                self.row(a)[jj].conj()
            } else {
                Complex64::new(0.0, 0.0)
            }
        } else if (j as usize) < self.n_k {
            self.row(a)[j as usize]
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    /// Linear interpolation in `k >= 0` along row `a`.
    #[inline]
    pub fn linear(&self, a: usize, k: f64) -> Complex64 {
        let u = k / self.dk;
        let base = u.floor();
        let t = u - base;
        let j = base as isize;
        self.at(a, j) * (1.0 - t) + self.at(a, j + 1) * t
    }

    /// Catmull-Rom interpolation in `k >= 0` along row `a`.
    #[inline]
    pub fn cubic(&self, a: usize, k: f64) -> Complex64 {
        let u = k / self.dk;
        let base = u.floor();
        let t = u - base;
        let j = base as isize;
        let w = catmull_rom_weights(t);
        (0..4).map(|i| self.at(a, j - 1 + i as isize) * w[i]).sum()
    }
}

#[inline]
pub(crate) fn catmull_rom_weights(t: f64) -> [f64; 4] {
    let t2 = t * t;
    let t3 = t2 * t;
    [
        0.5 * (-t3 + 2.0 * t2 - t),
        0.5 * (3.0 * t3 - 5.0 * t2 + 2.0),
        0.5 * (-3.0 * t3 + 4.0 * t2 + t),
        0.5 * (t3 - t2),
    ]
}
