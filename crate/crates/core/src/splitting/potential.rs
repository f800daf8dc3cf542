//! The potential `K(psi) / B` and its scaled gradient system.
//!
//! With `F1 = d1 K / (B eta)` and `F2 = d2 K / B` both components are of
//! order one, so the Newton system stays well conditioned however small
//! `eta` is.

use crate::real::Real;

#[derive(Clone, Debug)]
pub struct PotentialTerm<R> {
    pub m: [i64; 2],
    /// `L_k / B`.
    pub r: R,
    /// `L_k / (B eta)`; zero when `m1 = 0`.
    pub r_over_eta: R,
    /// `<m, b> - tau_k`.
    pub phase: R,
}

#[derive(Clone, Debug)]
pub struct PsiPotential<R> {
    pub terms: Vec<PotentialTerm<R>>,
    pub eta: R,
}

/// `F`, its Jacobian `J`, and the scaled Hessian determinant
/// `det D^2 K / (B^2 eta) = J11 J22 - J12 J21`.
#[derive(Clone, Debug)]
pub struct ScaledSystem<R> {
    pub f: [R; 2],
    pub j: [[R; 2]; 2],
}

impl<R: Real> ScaledSystem<R> {
    pub fn det(&self) -> R {
        self.j[0][0].clone() * self.j[1][1].clone() - self.j[0][1].clone() * self.j[1][0].clone()
    }

    /// Newton step `-J^{-1} F`.
    pub fn newton_step(&self) -> Option<[R; 2]> {
        let d = self.det();
        if d.to_f64() == 0.0 || !d.to_f64().is_finite() {
            return None;
        }
        let [f1, f2] = self.f.clone();
        let [[a, b], [c, e]] = self.j.clone();
        let x = (b * f2.clone() - e * f1.clone()) / d.clone();
        let y = (c * f1 - a * f2) / d;
        Some([x, y])
    }

    pub fn residual(&self) -> f64 {
        self.f[0].to_f64().abs().max(self.f[1].to_f64().abs())
    }
}

impl<R: Real> PsiPotential<R> {
    fn angle(&self, t: &PotentialTerm<R>, psi: &[R; 2]) -> R {
        let bits = psi[0].bits();
        R::from_i128(t.m[0] as i128, bits) * psi[0].clone()
            + R::from_i128(t.m[1] as i128, bits) * psi[1].clone()
            + t.phase.clone()
    }

    /// `K / B`.
    pub fn value(&self, psi: &[R; 2]) -> R {
        let mut v = psi[0].zero_like();
        for t in &self.terms {
            v = v + t.r.clone() * self.angle(t, psi).cos();
        }
        v
    }

    pub fn system(&self, psi: &[R; 2]) -> ScaledSystem<R> {
        let z = psi[0].zero_like();
        let bits = z.bits();
        let (mut f1, mut f2) = (z.clone(), z.clone());
        let (mut j11, mut j12, mut j21, mut j22) = (z.clone(), z.clone(), z.clone(), z);
        for t in &self.terms {
            let a = self.angle(t, psi);
            let (s, c) = (a.sin(), a.cos());
            let m1 = R::from_i128(t.m[0] as i128, bits);
            let m2 = R::from_i128(t.m[1] as i128, bits);
            if t.m[0] != 0 {
                let w = t.r_over_eta.clone();
                f1 = f1 - w.clone() * m1.clone() * s.clone();
                j11 = j11 - w.clone() * m1.clone() * m1.clone() * c.clone();
                j12 = j12 - w * m1.clone() * m2.clone() * c.clone();
                j21 = j21 - t.r.clone() * m1 * m2.clone() * c.clone();
            }
            f2 = f2 - t.r.clone() * m2.clone() * s;
            j22 = j22 - t.r.clone() * m2.clone() * m2 * c;
        }
        ScaledSystem {
            f: [f1, f2],
            j: [[j11, j12], [j21, j22]],
        }
    }

    /// Unscaled gradient `grad K / B = (eta F1, F2)`.
    pub fn gradient(&self, psi: &[R; 2]) -> [R; 2] {
        let s = self.system(psi);
        let [f1, f2] = s.f;
        [self.eta.clone() * f1, f2]
    }
}
