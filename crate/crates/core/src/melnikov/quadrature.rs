//! Direct quadrature of the Melnikov integral along the unperturbed
//! separatrix, independent of the residue formula.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::melnikov::series::MelnikovSeries;
use crate::phases::Phases;
use crate::quadratic_field::{FrequencyModel, IntVec2};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_0,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for i in 0..7 {
        let x = h * XGK[i];
        let s = f(c - x) + f(c + x);
        k += WGK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Adaptive Gauss-Kronrod (7/15) on `[a, b]` with absolute tolerance.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, abs_tol: f64, max_intervals: usize) -> Result<(f64, f64)> {
    let mut stack = vec![(a, b, abs_tol)];
    let mut total = 0.0;
    let mut err = 0.0;
    let mut count = 0usize;
    while let Some((lo, hi, tol)) = stack.pop() {
        count += 1;
        if count > max_intervals {
            return Err(Error::Quadrature(format!(
                "more than {max_intervals} subintervals on [{a}, {b}]; error estimate {err:.3e}"
            )));
        }
        let (v, e) = gk15(f, lo, hi);
        if e <= tol || hi - lo < 1e-12 * (b - a).abs() {
            total += v;
            err += e;
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((mid, hi, 0.5 * tol));
            stack.push((lo, mid, 0.5 * tol));
        }
    }
    Ok((total, err))
}

/// `4 sum_{|k| > radius} exp(-rho |k|)` over the half lattice: bounds the
/// integral of the truncated part of `f` against `2 sech^2`.
pub fn truncation_bound(model: &FrequencyModel, radius: i64) -> f64 {
    let q = (-model.rho).exp();
    // sum_{m > R} 2m q^m
    let r = radius as f64 + 1.0;
    let s = 2.0 * q.powf(r) * (r / (1.0 - q) + q / (1.0 - q).powi(2));
    4.0 * s
}

/// `L(theta) = int 2 sech^2(t) f(theta + omega t / sqrt(eps)) dt` with `f`
/// truncated to `0 < |k|_1 <= radius`.
pub fn melnikov_quadrature(
    model: &FrequencyModel,
    theta: [f64; 2],
    eps: f64,
    phases: &Phases,
    tol: f64,
    radius: i64,
) -> Result<f64> {
    if !(eps > 0.0 && tol > 0.0) || radius < 1 {
        return Err(domain("quadrature needs eps > 0, tol > 0 and radius >= 1"));
    }
    let mut modes = Vec::new();
    for k2 in 0..=radius {
        for k1 in -radius..=radius {
            let k = IntVec2::new(k1, k2);
            if (k2 == 0 && k1 <= 0) || k.norm1() > radius {
                continue;
            }
            let amp = (-model.rho * k.norm1() as f64).exp();
            let freq = model.bracket_f64(k) / eps.sqrt();
            let phase = k.dot_f64(theta) - phases.sigma(k);
            modes.push((amp, freq, phase));
        }
    }
    integrate_modes(&modes, tol)
}

/// `int 2 sech^2(t) sum amp cos(freq t + phase) dt`.
pub fn integrate_modes(modes: &[(f64, f64, f64)], tol: f64) -> Result<f64> {
    let amp_total: f64 = modes.iter().map(|m| m.0).sum();
    // 2 sech^2 t < 8 exp(-2t): cut where the remaining mass is below tol / 4
    let t_max = (0.5 * (16.0 * amp_total.max(1e-300) / tol).ln()).max(1.0);
    let w_max = modes.iter().map(|m| m.1.abs()).fold(1.0, f64::max);
    let panels = ((2.0 * t_max * w_max / std::f64::consts::PI).ceil() as usize).max(8);
    let f = |t: f64| -> f64 {
        let s = 1.0 / t.cosh();
        let mut acc = 0.0;
        for &(a, w, p) in modes {
            acc += a * (w * t + p).cos();
        }
        2.0 * s * s * acc
    };
    let width = 2.0 * t_max / panels as f64;
    let mut total = 0.0;
    for i in 0..panels {
        let a = -t_max + i as f64 * width;
        let (v, _) = integrate(&f, a, a + width, 0.5 * tol / panels as f64, 10_000)?;
        total += v;
    }
    Ok(total)
}

#[derive(Clone, Debug, Serialize)]
pub struct OracleSample {
    pub theta: [f64; 2],
    pub series: f64,
    pub quadrature: f64,
    pub rel_err: f64,
    pub radius: i64,
}

/// Residue series against quadrature at `samples` uniform angles, with
/// `mu = 1`.
pub fn oracle_samples(model: &FrequencyModel, eps: f64, phases: &Phases, samples: usize, seed: u64) -> Result<Vec<OracleSample>> {
    let s = MelnikovSeries::new(model, eps, 1.0, phases, 1e-13)?;
    let scale = s.ln_scale.exp();
    let mut radius = 4;
    while truncation_bound(model, radius) > 1e-10 * scale {
        radius += 1;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..samples)
        .map(|_| {
            let theta = [rng.gen_range(0.0..2.0 * PI), rng.gen_range(0.0..2.0 * PI)];
            let series = s.evaluate(theta).value * scale;
            let quadrature = melnikov_quadrature(model, theta, eps, phases, 1e-11 * scale, radius)?;
            Ok(OracleSample { theta, series, quadrature, rel_err: ((quadrature - series) / series).abs(), radius })
        })
        .collect()
}
