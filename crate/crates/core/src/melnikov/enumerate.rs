//! Harmonics with exponent below a cap, and a certified bound on the rest.
//!
//! `beta_k <= beta_max` forces both `rho |k| <= beta_max` and
//! `|<k,omega>| <= 2 beta_max sqrt(eps) / pi`, so for each `k2` only the few
//! `k1` next to `-k2 Omega` can qualify.

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::quadratic_field::{FrequencyModel, IntVec2};

#[derive(Clone, Copy, Debug, Serialize)]
pub struct Candidate {
    pub k: IntVec2,
    pub beta: f64,
}

/// Largest radius the enumeration accepts.
pub const MAX_RADIUS: f64 = 5.0e7;

/// Every `k` in the half lattice with `beta_k(eps) <= beta_max`, unsorted.
pub fn candidates(model: &FrequencyModel, eps: f64, beta_max: f64) -> Result<Vec<Candidate>> {
    if !(eps > 0.0) || !beta_max.is_finite() {
        return Err(domain(format!("bad enumeration request eps = {eps}, beta_max = {beta_max}")));
    }
    let rho = model.rho;
    let radius = (beta_max / rho).floor();
    if radius > MAX_RADIUS {
        return Err(Error::RadiusInsufficient(format!(
            "radius {radius} exceeds the enumeration limit {MAX_RADIUS}"
        )));
    }
    let radius = radius as i64;
    let omega = model.omega_f64();
    // widened by a relative margin so float rounding never drops a vector
    let w = 2.0 * beta_max * eps.sqrt() / std::f64::consts::PI * (1.0 + 1e-9) + 1e-9;
    let mut out = Vec::new();
    for k2 in 0..=radius {
        let centre = -(k2 as f64) * omega;
        let lo = (centre - w).ceil() as i64;
        let hi = (centre + w).floor() as i64;
        for k1 in lo..=hi {
            let k = IntVec2::new(k1, k2);
            if k2 == 0 && k1 <= 0 {
                continue;
            }
            if k.norm1() > radius {
                continue;
            }
            let beta = rho * k.norm1() as f64
                + 0.5 * std::f64::consts::PI * model.bracket_f64(k).abs() / eps.sqrt();
            if beta <= beta_max {
                out.push(Candidate { k, beta });
            }
        }
    }
    Ok(out)
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// Log of an upper bound for `sum |k|^power L_k` over all half-lattice `k`
/// with `beta_k > beta_min`.
///
/// Uses `L_k <= 4 (1 + 2u) exp(-rho |k| - u)` with `u = beta_k - rho |k|`,
/// maximized over the admissible `u`, and `2m` vectors on each shell `|k| = m`.
pub fn ln_tail_bound(model: &FrequencyModel, beta_min: f64, power: i32) -> f64 {
    let rho = model.rho;
    let phi = |u: f64| (1.0 + 2.0 * u).ln() - u;
    let shell = |m: f64| -> f64 {
        let u0 = (beta_min - rho * m).max(0.5);
        (8.0f64).ln() + (power as f64 + 1.0) * m.ln() - rho * m + phi(u0)
    };
    let mut acc = f64::NEG_INFINITY;
    let mut m = 1.0f64;
    loop {
        let t = shell(m);
        acc = log_add(acc, t);
        // beyond beta_min / rho the shells decay geometrically
        if rho * m > beta_min + 1.0 {
            let r = ((m + 1.0) / m).powf(power as f64 + 1.0) * (-rho).exp();
            if r < 0.5 && t < acc - 40.0 {
                let rest = t + (r / (1.0 - r)).ln();
                return log_add(acc, rest);
            }
        }
        m += 1.0;
        if m > 1e9 {
            return f64::INFINITY;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::melnikov::harmonic::ln_l_exact;

    fn silver() -> FrequencyModel {
        FrequencyModel::silver(1.0).unwrap()
    }

    fn brute(model: &FrequencyModel, eps: f64, beta_max: f64, r: i64) -> Vec<IntVec2> {
        let mut v = Vec::new();
        for k2 in 0..=r {
            for k1 in -r..=r {
                let k = IntVec2::new(k1, k2);
                if (k2 == 0 && k1 <= 0) || k.norm1() > r {
                    continue;
                }
                let b = model.rho * k.norm1() as f64
                    + 0.5 * std::f64::consts::PI * model.bracket_f64(k).abs() / eps.sqrt();
                if b <= beta_max {
                    v.push(k);
                }
            }
        }
        v.sort();
        v
    }

    #[test]
    fn enumeration_matches_brute_force() {
        let m = silver();
        for (eps, beta_max) in [(0.1, 12.0), (1e-3, 25.0), (1e-5, 60.0), (2.0, 8.0)] {
            let mut got: Vec<IntVec2> = candidates(&m, eps, beta_max).unwrap().iter().map(|c| c.k).collect();
            got.sort();
            assert_eq!(got, brute(&m, eps, beta_max, beta_max as i64 + 1), "eps = {eps}");
        }
    }

    #[test]
    fn tail_bound_dominates_direct_sum() {
        let m = silver();
        let eps: f64 = 0.05;
        let beta_min = 10.0;
        for power in [0, 1, 2] {
            let mut direct = 0.0;
            for k2 in 0..=80i64 {
                for k1 in -80..=80i64 {
                    let k = IntVec2::new(k1, k2);
                    if (k2 == 0 && k1 <= 0) || k.norm1() > 80 {
                        continue;
                    }
                    let b = m.rho * k.norm1() as f64
                        + 0.5 * std::f64::consts::PI * m.bracket_f64(k).abs() / eps.sqrt();
                    if b > beta_min {
                        direct += (k.norm1() as f64).powi(power) * ln_l_exact(&m, eps, k).unwrap().exp();
                    }
                }
            }
            let bound = ln_tail_bound(&m, beta_min, power);
            assert!(direct.ln() <= bound, "power {power}: {} > {bound}", direct.ln());
            assert!(bound < direct.ln() + 12.0);
        }
    }
}
