//! `E(+/-)`, the angles `alpha(+/-)`, and where they vanish.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{domain, Result};
use crate::real::Real;

/// Below this `E(+/-)` the angle is not reported.
pub const DEGENERATE_E: f64 = 1e-15;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct TransversalityData {
    pub e_plus: f64,
    pub e_minus: f64,
    pub e_star: f64,
    pub alpha_plus: Option<f64>,
    pub alpha_minus: Option<f64>,
}

impl TransversalityData {
    pub fn degenerate(&self) -> bool {
        self.alpha_plus.is_none() || self.alpha_minus.is_none()
    }

    /// `E(+)` for points 1, 2 and `E(-)` for points 3, 4.
    pub fn e_for_point(&self, index: usize) -> f64 {
        if index < 2 {
            self.e_plus
        } else {
            self.e_minus
        }
    }

    /// Leading-order positions `(alpha+, 0), (alpha+ + pi, 0), (alpha-, pi), (alpha- + pi, pi)`.
    pub fn seeds(&self) -> Option<[[f64; 2]; 4]> {
        let (a, b) = (self.alpha_plus?, self.alpha_minus?);
        Some([
            [a.wrap_two_pi(), 0.0],
            [(a + PI).wrap_two_pi(), 0.0],
            [b.wrap_two_pi(), PI],
            [(b + PI).wrap_two_pi(), PI],
        ])
    }
}

/// `E(+/-) e^{i alpha(+/-)} = 1 - Q + Q e^{i dtau} +/- Qt e^{i dtau1}`.
pub fn e_vectors<R: Real>(q: &R, qt: &R, d_tau: &R, d_tau1: &R) -> ([R; 2], [R; 2]) {
    let one = q.one_like();
    let px = one - q.clone() + q.clone() * d_tau.cos();
    let py = q.clone() * d_tau.sin();
    let cx = qt.clone() * d_tau1.cos();
    let cy = qt.clone() * d_tau1.sin();
    (
        [px.clone() + cx.clone(), py.clone() + cy.clone()],
        [px - cx, py - cy],
    )
}

pub fn e_values<R: Real>(q: &R, qt: &R, d_tau: &R, d_tau1: &R) -> (R, R) {
    let (p, m) = e_vectors(q, qt, d_tau, d_tau1);
    let norm = |v: [R; 2]| (v[0].clone() * v[0].clone() + v[1].clone() * v[1].clone()).sqrt();
    (norm(p), norm(m))
}

pub fn transversality(q: f64, qt: f64, d_tau: f64, d_tau1: f64) -> TransversalityData {
    let (p, m) = e_vectors(&q, &qt, &d_tau, &d_tau1);
    let e_plus = p[0].hypot(p[1]);
    let e_minus = m[0].hypot(m[1]);
    let angle = |v: [f64; 2], e: f64| (e > DEGENERATE_E).then(|| v[1].atan2(v[0]));
    TransversalityData {
        e_plus,
        e_minus,
        e_star: e_plus.min(e_minus),
        alpha_plus: angle(p, e_plus),
        alpha_minus: angle(m, e_minus),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DegeneracyLocus {
    pub cos_d_tau: f64,
    /// `cos dtau1` making `E(-)` vanish; the negative gives `E(+) = 0`.
    pub cos_d_tau1: f64,
    /// `(dtau, dtau1, sign)` with `sign = -1` where `E(-) = 0`.
    pub pairs: Vec<(f64, f64, i8)>,
}

/// Phase differences with `E* = 0` for the given `Q`, `Qt`, or `None` when
/// `|1 - 2Q| > Qt`.
pub fn degeneracy_locus(q: f64, qt: f64) -> Result<Option<DegeneracyLocus>> {
    if !(q > 0.0 && q < 1.0 && qt > 0.0 && qt < 1.0) {
        return Err(domain(format!("need 0 < Q < 1 and 0 < Qt < 1, got Q = {q}, Qt = {qt}")));
    }
    if (1.0 - 2.0 * q).abs() > qt {
        return Ok(None);
    }
    let c = (-(1.0 - 2.0 * q + 2.0 * q * q - qt * qt) / (2.0 * q * (1.0 - q))).clamp(-1.0, 1.0);
    let c1 = (qt * qt + 1.0 - 2.0 * q) / (2.0 * (1.0 - q) * qt);
    let mut pairs = Vec::new();
    let base = c.acos();
    let mut taus = vec![base];
    if base > 0.0 && base < PI {
        taus.push(-base);
    }
    for t in taus {
        let along = (q * t.sin()).atan2(1.0 - q + q * t.cos());
        pairs.push((t.wrap_pi(), along.wrap_pi(), -1));
        pairs.push((t.wrap_pi(), (along + PI).wrap_pi(), 1));
    }
    Ok(Some(DegeneracyLocus {
        cos_d_tau: c,
        cos_d_tau1: c1,
        pairs,
    }))
}

/// `|dtau| < 2 pi / 3`.
pub fn sufficient_phase_condition(d_tau: f64) -> bool {
    d_tau.wrap_pi().abs() < 2.0 * PI / 3.0
}

/// Lower bound `cos(dtau / 2) - Qt` for `E*`, from the distance of the
/// chord `Q -> 1 - Q + Q e^{i dtau}` to the origin.
pub fn e_star_lower_bound(qt: f64, d_tau: f64) -> f64 {
    (0.5 * d_tau.wrap_pi()).cos() - qt
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn reversible_values() {
        let t = transversality(0.3, 0.4, 0.0, 0.0);
        assert!((t.e_plus - 1.4).abs() < 1e-15);
        assert!((t.e_minus - 0.6).abs() < 1e-15);
        assert_eq!(t.e_star, t.e_minus);
        assert_eq!(t.alpha_plus, Some(0.0));
        let u = transversality(0.3, 1e-300, 0.0, 0.0);
        assert!((u.e_plus - 1.0).abs() < 1e-15 && (u.e_minus - 1.0).abs() < 1e-15);
    }

    #[test]
    fn vanishing_example() {
        let t = transversality(0.5, 0.5, 2.0 * PI / 3.0, PI / 3.0);
        assert!(t.e_minus < 1e-15);
        assert!(t.alpha_minus.is_none());
        assert!(t.degenerate());
    }

    #[test]
    fn locus_examples() {
        let l = degeneracy_locus(0.5, 0.5).unwrap().unwrap();
        assert!((l.cos_d_tau + 0.5).abs() < 1e-15);
        assert!((l.cos_d_tau1.abs() - 0.5).abs() < 1e-15);
        assert!(degeneracy_locus(0.9, 0.2).unwrap().is_none());
        let q = 0.3;
        let t = degeneracy_locus(q, 1.0 - 2.0 * q).unwrap().unwrap();
        assert!((t.cos_d_tau + 1.0).abs() < 1e-12);
        assert!(t.pairs.iter().any(|p| p.1.abs() < 1e-9));
        assert!(degeneracy_locus(0.0, 0.3).is_err());
        assert!(degeneracy_locus(0.5, 1.5).is_err());
    }

    #[test]
    fn locus_pairs_vanish() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(41);
        let mut n = 0;
        while n < 1000 {
            let q: f64 = rng.gen_range(0.01..0.99);
            let qt: f64 = rng.gen_range(0.01..0.5);
            if let Some(l) = degeneracy_locus(q, qt).unwrap() {
                for &(t, t1, _) in &l.pairs {
                    assert!(transversality(q, qt, t, t1).e_star < 1e-10);
                }
                n += 1;
            }
        }
    }

    #[test]
    fn phase_condition() {
        assert!(sufficient_phase_condition(0.0));
        assert!(!sufficient_phase_condition(2.0 * PI / 3.0));
        assert!(sufficient_phase_condition(2.0 * PI / 3.0 - 1e-9));
    }

    proptest! {
        #[test]
        fn unit_angles(q in 0.0f64..1.0, qt in 0.0f64..1.0, a in -PI..PI, b in -PI..PI) {
            let t = transversality(q, qt, a, b);
            for (al, e, s) in [(t.alpha_plus, t.e_plus, 1.0), (t.alpha_minus, t.e_minus, -1.0)] {
                if let Some(al) = al {
                    let cx = (1.0 - q + q * a.cos() + s * qt * b.cos()) / e;
                    let cy = (q * a.sin() + s * qt * b.sin()) / e;
                    prop_assert!((cx * cx + cy * cy - 1.0).abs() < 1e-12);
                    prop_assert!((al.cos() - cx).abs() < 1e-12 && (al.sin() - cy).abs() < 1e-12);
                }
            }
        }

        #[test]
        fn bound_under_phase_condition(q in 0.0f64..1.0, qt in 0.0f64..=0.5, a in -2.0 * PI / 3.0 + 1e-3..2.0 * PI / 3.0 - 1e-3, b in -PI..PI) {
            let t = transversality(q, qt, a, b);
            prop_assert!(t.e_star > 0.0);
            prop_assert!(t.e_star >= e_star_lower_bound(qt, a) - 1e-12);
        }
    }
}
