//! Minimal eigenvalue of the splitting matrix at a critical point.

use serde::Serialize;

use crate::splitting::model::SplittingModel;
use crate::splitting::potential::{PsiPotential, ScaledSystem};

#[derive(Clone, Copy, Debug, Serialize)]
pub struct EigenData {
    /// `ln m*`, smallest `|eigenvalue|` of `A^T D^2 K A`.
    pub ln_m_star: f64,
    pub ln_abs_det: f64,
    pub ln_abs_trace: f64,
    /// `m* / (E* sqrt(eps) L_{S2})`.
    pub c1_ratio: f64,
    /// `m* / (sqrt(eps) L_{S2})`.
    pub c2_ratio: f64,
    /// `|T| / (L_{S1} / sqrt(eps))`.
    pub trace_ratio: f64,
    /// `|D| / (E(+/-) L_{S1} L_{S2})`.
    pub det_ratio: f64,
}

fn gram(sm: &SplittingModel) -> [[f64; 2]; 2] {
    let r = sm.a.rows;
    let dot = |i: usize, j: usize| (r[i][0] * r[j][0] + r[i][1] * r[j][1]) as f64;
    [[dot(0, 0), dot(0, 1)], [dot(1, 0), dot(1, 1)]]
}

/// With `D = B^2 eta d` and `T = B t` the smaller eigenvalue is
/// `2 |D| / (|T| + sqrt(T^2 - 4 D))`, evaluated in logarithms.
pub fn eigen_data(sm: &SplittingModel, sys: &ScaledSystem<f64>, e_branch: f64) -> EigenData {
    let g = gram(sm);
    let j = &sys.j;
    let d = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    let eta = sm.eta;
    let t = eta * j[0][0] * g[0][0] + 2.0 * j[1][0] * g[0][1] + j[1][1] * g[1][1];
    let disc = (t * t - 4.0 * eta * d).max(0.0).sqrt();
    let ln_abs_det = 2.0 * sm.ln_b + sm.ln_eta + d.abs().ln();
    let ln_abs_trace = sm.ln_b + t.abs().ln();
    let ln_m_star = std::f64::consts::LN_2 + sm.ln_b + sm.ln_eta + d.abs().ln() - (t.abs() + disc).ln();
    let half_ln_eps = 0.5 * sm.eps.ln();
    let e_star = sm.transversality.e_star;
    EigenData {
        ln_m_star,
        ln_abs_det,
        ln_abs_trace,
        c1_ratio: (ln_m_star - e_star.ln() - half_ln_eps - sm.ln_l_s2).exp(),
        c2_ratio: (ln_m_star - half_ln_eps - sm.ln_l_s2).exp(),
        trace_ratio: (ln_abs_trace + half_ln_eps - sm.ln_b).exp(),
        det_ratio: (ln_abs_det - e_branch.ln() - sm.ln_b - sm.ln_l_s2).exp(),
    }
}

/// `ln max_theta |grad L(theta)|` over a `grid x grid` sample of the torus.
pub fn ln_max_gradient(sm: &SplittingModel, pot: &PsiPotential<f64>, grid: usize) -> f64 {
    let r = sm.a.rows;
    let step = 2.0 * std::f64::consts::PI / grid as f64;
    let mut best = 0.0f64;
    for i in 0..grid {
        for k in 0..grid {
            let psi = [i as f64 * step, k as f64 * step];
            let s = pot.system(&psi);
            // grad_theta = B A^T (eta F1, F2)
            let g1 = sm.eta * s.f[0];
            let g2 = s.f[1];
            let x = r[0][0] as f64 * g1 + r[1][0] as f64 * g2;
            let y = r[0][1] as f64 * g1 + r[1][1] as f64 * g2;
            best = best.max(x.hypot(y));
        }
    }
    sm.ln_b + best.ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::melnikov::exponents::eps_hat;
    use crate::phases::Phases;
    use crate::quadratic_field::FrequencyModel;
    use crate::splitting::model::build_model;

    #[test]
    fn eigenvalue_matches_direct_diagonalization() {
        let m = FrequencyModel::silver(1.0).unwrap();
        let e = eps_hat(&m, 3) * 1.2;
        let sm = build_model(&m, e, 1.0, &Phases::zero()).unwrap();
        let pot = sm.full_potential();
        let sys = pot.system(&[0.0, 0.0]);
        let ed = eigen_data(&sm, &sys, sm.transversality.e_plus);
        // theta Hessian over B
        let h = [[sm.eta * sys.j[0][0], sys.j[1][0]], [sys.j[1][0], sys.j[1][1]]];
        let a = sm.a.rows;
        let mut th = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                for p in 0..2 {
                    for q in 0..2 {
                        th[i][j] += a[p][i] as f64 * h[p][q] * a[q][j] as f64;
                    }
                }
            }
        }
        let tr = th[0][0] + th[1][1];
        let det = th[0][0] * th[1][1] - th[0][1] * th[1][0];
        let l1 = 0.5 * (tr + (tr * tr - 4.0 * det).sqrt());
        let l2 = 0.5 * (tr - (tr * tr - 4.0 * det).sqrt());
        let small = l1.abs().min(l2.abs());
        // the direct route loses digits to cancellation; the log form does not
        assert!(((ed.ln_m_star - sm.ln_b) - small.ln()).abs() < 1e-3);
        assert!(((ed.ln_abs_trace - sm.ln_b) - tr.abs().ln()).abs() < 1e-9);
    }
}
