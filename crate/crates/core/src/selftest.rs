//! Quick closed-form oracle suite, runnable from the command line.

use std::f64::consts::{PI, TAU};

use crate::forward::{m2_evaluate, radon_forward, SinogramSpec};
use crate::inversion::{
    fractional_laplacian, invert_m2_fourier, reconstruction_error, ErrorNorm, SliceInterp,
    SpectralParams,
};
use crate::io;
use crate::phasespace::{GridSpec, Phantom};
use crate::quadrature::QuadratureSpec;
use crate::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    /// Measured deviation next to its tolerance.
    pub detail: String,
}

fn check(name: &'static str, measured: f64, tolerance: f64) -> Check {
    Check {
        name,
        passed: measured <= tolerance,
        detail: format!("{measured:.3e} <= {tolerance:.0e}"),
    }
}

fn max_dev(pairs: impl Iterator<Item = (f64, f64)>) -> f64 {
    pairs.fold(0.0, |acc, (a, b)| acc.max((a - b).abs()))
}

/// Deterministic probe values in `[lo, hi)`.
fn probes(count: usize, lo: f64, hi: f64, seed: f64) -> impl Iterator<Item = f64> {
    (0..count).map(move |i| lo + (hi - lo) * ((i as f64 + seed) * 0.618_033_988_749_894_9).fract())
}

pub fn run() -> Result<Vec<Check>> {
    let ph = Phantom::centered_gaussian(2, 1.0)?;
    let inv_sqrt_pi = 1.0 / PI.sqrt();
    let mut checks = Vec::new();

    let radon_dev = max_dev(
        probes(20, 0.0, TAU, 0.1)
            .zip(probes(20, -4.0, 4.0, 0.7))
            .map(|(t, x)| (ph.radon(t, x).unwrap(), inv_sqrt_pi * (-x * x).exp())),
    );
    checks.push(check("analytic radon closed form", radon_dev, 1e-12));

    let m2_dev = max_dev(
        probes(20, -3.0, 3.0, 0.3)
            .zip(probes(20, 0.2, 3.0, 0.9))
            .zip(probes(20, -4.0, 4.0, 0.5))
            .map(|((mu, nu), x)| {
                let r2 = mu * mu + nu * nu;
                (
                    ph.m2(mu, nu, x).unwrap(),
                    (-x * x / r2).exp() / (PI * r2).sqrt(),
                )
            }),
    );
    checks.push(check("analytic m2 closed form", m2_dev, 1e-12));

    let sspec = SinogramSpec::new(90, 128, 8.0)?;
    let sg = radon_forward(&ph, &sspec, &QuadratureSpec::default())?;
    let forward_dev = max_dev((0..sspec.n_angles).flat_map(|a| {
        let (sg, ph) = (&sg, &ph);
        (0..sspec.n_offsets).map(move |m| {
            (
                sg.get(a, m),
                ph.radon(sspec.angle(a), sspec.offset(m)).unwrap(),
            )
        })
    }));
    checks.push(check("numerical radon vs closed form", forward_dev, 1e-8));

    let mass_dev = max_dev((0..sspec.n_angles).map(|a| (sg.row_mass(a), 1.0)));
    checks.push(check("mass per angle", mass_dev, 1e-4));

    // theta + pi is angle a + A/2; -X_m is offset M - 1 - m
    let half = sspec.n_angles / 2;
    let reflect_dev = max_dev((0..half).flat_map(|a| {
        let sg = &sg;
        (0..sspec.n_offsets).map(move |m| (sg.get(a + half, sspec.n_offsets - 1 - m), sg.get(a, m)))
    }));
    checks.push(check(
        "reflection f#(t+pi, -X) = f#(t, X)",
        reflect_dev,
        1e-10,
    ));

    let mut homog = 0.0f64;
    for ((mu, nu), (x, lambda)) in probes(200, -2.0, 2.0, 0.2)
        .zip(probes(200, 0.3, 2.0, 0.4))
        .zip(probes(200, -3.0, 3.0, 0.6).zip(probes(200, 0.25, 4.0, 0.8)))
    {
        let base = m2_evaluate(&sg, mu, nu, x)?;
        let scaled = m2_evaluate(&sg, lambda * mu, lambda * nu, lambda * x)? * lambda;
        homog = homog.max((scaled - base).abs());
    }
    checks.push(check("m2 homogeneity of degree -1", homog, 1e-12));

    let mut restriction_exact = true;
    for a in (0..sspec.n_angles).step_by(7) {
        let (s, c) = sspec.angle(a).sin_cos();
        for m in (0..sspec.n_offsets).step_by(5) {
            restriction_exact &= m2_evaluate(&sg, c, s, sspec.offset(m))? == sg.get(a, m);
        }
    }
    checks.push(Check {
        name: "m2 restricted to |mu| = 1 is the sinogram",
        passed: restriction_exact,
        detail: if restriction_exact {
            "bitwise".into()
        } else {
            "mismatch".into()
        },
    });

    let grid = GridSpec::new(2, 5.0, 64)?;
    let f = invert_m2_fourier(&sg, &grid, &SpectralParams::default())?;
    let recon = reconstruction_error(&f, &ph, ErrorNorm::MaxAbs)?;
    checks.push(check("m2 fourier reconstruction", recon, 1e-2));

    let exact = ph.to_field(&grid)?;
    let sp1 = SpectralParams::new(1, SliceInterp::Linear)?;
    let twice = fractional_laplacian(&fractional_laplacian(&exact, 0.5, &sp1)?, 0.5, &sp1)?;
    let once = fractional_laplacian(&exact, 1.0, &sp1)?;
    let compose = max_dev(
        twice
            .values()
            .iter()
            .copied()
            .zip(once.values().iter().copied()),
    );
    checks.push(check("fractional laplacian composition", compose, 1e-8));

    let back = io::decode_field(&io::encode_field(&f))?;
    let bitwise = back.spec() == f.spec()
        && back
            .values()
            .iter()
            .zip(f.values())
            .all(|(a, b)| a.to_bits() == b.to_bits());
    checks.push(Check {
        name: "field file round trip",
        passed: bitwise,
        detail: if bitwise {
            "bitwise".into()
        } else {
            "mismatch".into()
        },
    });

    Ok(checks)
}
