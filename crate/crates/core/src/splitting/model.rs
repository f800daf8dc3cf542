//! The splitting potential near a transition value, in the variables
//! `psi = A theta - b`.

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::melnikov::enumerate::{candidates, ln_tail_bound};
use crate::melnikov::exponents::interval_index;
use crate::melnikov::harmonic::{ln_l_exact, ln_l_exact_real};
use crate::phases::Phases;
use crate::quadratic_field::{FrequencyModel, IntMat2, IntVec2};
use crate::real::{MpFloat, Real};
use crate::resonances::{main_secondary_vector, pell_vector};
use crate::splitting::potential::{PotentialTerm, PsiPotential};
use crate::splitting::transversality::{transversality, TransversalityData};

/// Relative truncation error of the binary64 potential.
pub const F64_TAIL_TOL: f64 = 1e-17;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TermRole {
    /// `s0(n)`, coefficient `B`.
    Main,
    /// `s0(n-1)`.
    Previous,
    /// `s0(n+1)`.
    Next,
    /// `s1(n-1)`.
    Secondary,
    Tail,
}

#[derive(Clone, Debug, Serialize)]
pub struct PsiTerm {
    pub k: IntVec2,
    /// `A^{-T} k`.
    pub m: IntVec2,
    /// `ln(L_k / B)`.
    pub ln_r: f64,
    pub tau: f64,
    pub role: TermRole,
}

#[derive(Clone, Debug, Serialize)]
pub struct ModelChecks {
    pub det_a_sign_ok: bool,
    pub q_in_unit_interval: bool,
    /// `Qt <= 1/2 + 1e-6`; does not hold near the point where `Q = 1/2`.
    pub q_tilde_at_most_half: bool,
    /// `eta' < min(Q, Qt)`.
    pub eta_prime_below_weights: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SplittingModel {
    pub n: i64,
    pub eps: f64,
    pub mu: f64,
    pub rho: f64,
    /// `ln B`, `B = L_{s0(n)}`.
    pub ln_b: f64,
    pub ln_eta: f64,
    pub eta: f64,
    pub q: f64,
    pub q_tilde: f64,
    pub d_tau: f64,
    pub d_tau1: f64,
    /// `ln eta'`, largest harmonic outside the model over `B eta`.
    pub ln_eta_prime: f64,
    pub eta_prime_k: Option<IntVec2>,
    /// `ln max(eta, eta eta' / eps)`.
    pub ln_eta_bar: f64,
    pub a: IntMat2,
    pub b: [f64; 2],
    /// `s0(n-1), s0(n), s0(n+1), s1(n-1)`.
    pub vectors: [IntVec2; 4],
    /// Sorted by decreasing coefficient.
    pub terms: Vec<PsiTerm>,
    /// Certified bound on `ln sum |m|^2 L_k / (B eta)` over omitted harmonics.
    pub ln_tail_bound: f64,
    /// `ln L_{S2}`, the largest coefficient after `B`.
    pub ln_l_s2: f64,
    pub transversality: TransversalityData,
    pub checks: ModelChecks,
}

fn log_add(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// l1 operator norm.
fn norm_l1(m: &IntMat2) -> f64 {
    let [[a, b], [c, d]] = m.rows;
    ((a.abs() + c.abs()) as f64).max((b.abs() + d.abs()) as f64)
}

/// Largest exponent among the four model harmonics.
fn model_beta_floor(model: &FrequencyModel, eps: f64, vectors: &[IntVec2; 4]) -> f64 {
    vectors
        .iter()
        .map(|&k| crate::melnikov::exponents::beta_k(model, eps, k))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Picks `beta_max` so that the omitted harmonics contribute less than
/// `exp(ln_tol)` to `sum |m|^2 L_k / (B eta)`.
fn truncation(
    model: &FrequencyModel,
    beta_b: f64,
    ln_b: f64,
    ln_eta: f64,
    mu: f64,
    a_inv_t: &IntMat2,
    ln_tol: f64,
) -> Result<(f64, f64)> {
    let ln_norm = 2.0 * norm_l1(a_inv_t).ln();
    let mut beta_max = beta_b + (-ln_eta).max(0.0) - ln_tol + 10.0;
    for _ in 0..400 {
        let tail = ln_tail_bound(model, beta_max, 2) + mu.ln() + ln_norm - ln_b - ln_eta;
        if tail < ln_tol {
            return Ok((beta_max, tail));
        }
        beta_max += 10.0;
    }
    Err(Error::TailBound(format!("no truncation reaches ln tol = {ln_tol}")))
}

impl SplittingModel {
    pub fn a_inverse_transpose(&self) -> Result<IntMat2> {
        Ok(self.a.inverse_unimodular()?.transpose())
    }

    pub fn eta_prime(&self) -> f64 {
        self.ln_eta_prime.exp()
    }

    pub fn eta_bar(&self) -> f64 {
        self.ln_eta_bar.exp()
    }

    pub fn is_reversible(&self) -> bool {
        self.terms.iter().all(|t| t.tau == 0.0)
    }

    fn potential_from(&self, terms: impl Iterator<Item = (IntVec2, f64, f64)>) -> PsiPotential<f64> {
        let terms = terms
            .map(|(m, ln_r, tau)| PotentialTerm {
                m: [m.k1, m.k2],
                r: ln_r.exp(),
                r_over_eta: if m.k1 != 0 { (ln_r - self.ln_eta).exp() } else { 0.0 },
                phase: m.dot_f64(self.b) - tau,
            })
            .collect();
        PsiPotential { terms, eta: self.eta }
    }

    /// The four-harmonic model `K4 / B`.
    pub fn model_potential(&self) -> PsiPotential<f64> {
        self.potential_from(
            self.terms
                .iter()
                .filter(|t| t.role != TermRole::Tail)
                .map(|t| (t.m, t.ln_r, t.tau)),
        )
    }

    /// The truncated full potential `K / B`.
    pub fn full_potential(&self) -> PsiPotential<f64> {
        self.potential_from(self.terms.iter().map(|t| (t.m, t.ln_r, t.tau)))
    }

    /// `theta = A^{-1} (psi + b)` in `[0, 2 pi)`.
    pub fn theta_of(&self, psi: [f64; 2]) -> Result<[f64; 2]> {
        let inv = self.a.inverse_unimodular()?;
        let t = inv.apply_f64([psi[0] + self.b[0], psi[1] + self.b[1]]);
        Ok([t[0].wrap_two_pi(), t[1].wrap_two_pi()])
    }

    /// `psi = A theta - b` in `[0, 2 pi)`.
    pub fn psi_of(&self, theta: [f64; 2]) -> [f64; 2] {
        let p = self.a.apply_f64(theta);
        [(p[0] - self.b[0]).wrap_two_pi(), (p[1] - self.b[1]).wrap_two_pi()]
    }
}

pub fn build_model(model: &FrequencyModel, eps: f64, mu: f64, phases: &Phases) -> Result<SplittingModel> {
    if !(eps > 0.0 && mu > 0.0) {
        return Err(domain(format!("eps = {eps}, mu = {mu} must be positive")));
    }
    let n = interval_index(model, eps);
    if n < 2 {
        return Err(domain(format!("eps = {eps} lies in interval n = {n}; the model needs n >= 2")));
    }
    let nu = n as u32;
    let vectors = [
        pell_vector(model, nu - 1)?,
        pell_vector(model, nu)?,
        pell_vector(model, nu + 1)?,
        main_secondary_vector(model, nu - 1)?,
    ];
    let a = IntMat2::from_rows(vectors[0], vectors[1]);
    let expected = if (n - 1) % 2 == 0 { 1 } else { -1 };
    let a_inv_t = a.inverse_unimodular()?.transpose();
    let ln_l = |k: IntVec2| ln_l_exact(model, eps, k);
    let l_prev = ln_l(vectors[0])?;
    let l_main = ln_l(vectors[1])?;
    let l_next = ln_l(vectors[2])?;
    let l_sec = ln_l(vectors[3])?;
    let l_pair = log_add(l_prev, l_next);
    let ln_eta = l_pair - l_main;
    let q = 1.0 / (1.0 + (l_prev - l_next).exp());
    let q_tilde = (l_sec - l_pair).exp();
    let tau: Vec<f64> = vectors.iter().map(|&k| phases.sigma(k)).collect();
    let d_tau = (tau[2] - 2.0 * tau[1] - tau[0]).wrap_pi();
    let d_tau1 = (tau[3] - tau[1] - tau[0]).wrap_pi();
    let b = [tau[0], tau[1]];

    let beta_b = model_beta_floor(model, eps, &vectors);
    let ln_mu_b = mu.ln() + l_main;
    let (beta_max, ln_tail) = truncation(model, beta_b, ln_mu_b, ln_eta, mu, &a_inv_t, F64_TAIL_TOL.ln())?;
    let mut terms = Vec::new();
    for c in candidates(model, eps, beta_max)? {
        let role = match vectors.iter().position(|&v| v == c.k) {
            Some(0) => TermRole::Previous,
            Some(1) => TermRole::Main,
            Some(2) => TermRole::Next,
            Some(3) => TermRole::Secondary,
            _ => TermRole::Tail,
        };
        terms.push(PsiTerm {
            k: c.k,
            m: a_inv_t.apply(c.k)?,
            ln_r: ln_l(c.k)? - l_main,
            tau: phases.sigma(c.k),
            role,
        });
    }
    for (i, role) in [TermRole::Previous, TermRole::Main, TermRole::Next, TermRole::Secondary]
        .into_iter()
        .enumerate()
    {
        if !terms.iter().any(|t| t.role == role) {
            return Err(Error::RadiusInsufficient(format!("model harmonic {} missing", vectors[i])));
        }
    }
    terms.sort_by(|x, y| y.ln_r.partial_cmp(&x.ln_r).expect("finite coefficients"));
    let tail_max = terms.iter().find(|t| t.role == TermRole::Tail);
    let (ln_eta_prime, eta_prime_k) = match tail_max {
        Some(t) => (t.ln_r - ln_eta, Some(t.k)),
        None => (ln_tail, None),
    };
    let ln_eta_bar = ln_eta.max(ln_eta + ln_eta_prime - eps.ln());
    let ln_l_s2 = mu.ln()
        + l_main
        + terms
            .iter()
            .filter(|t| t.role != TermRole::Main)
            .map(|t| t.ln_r)
            .fold(f64::NEG_INFINITY, f64::max);
    let tr = transversality(q, q_tilde, d_tau, d_tau1);
    let checks = ModelChecks {
        det_a_sign_ok: a.det() == expected,
        q_in_unit_interval: q > 0.0 && q < 1.0,
        q_tilde_at_most_half: q_tilde <= 0.5 + 1e-6,
        eta_prime_below_weights: ln_eta_prime < q.min(q_tilde).ln(),
    };
    Ok(SplittingModel {
        n,
        eps,
        mu,
        rho: model.rho,
        ln_b: ln_mu_b,
        ln_eta,
        eta: ln_eta.exp(),
        q,
        q_tilde,
        d_tau,
        d_tau1,
        ln_eta_prime,
        eta_prime_k,
        ln_eta_bar,
        a,
        b,
        vectors,
        terms,
        ln_tail_bound: ln_tail,
        ln_l_s2,
        transversality: tr,
        checks,
    })
}

/// Multiprecision version of the model data needed for the determinant law.
#[derive(Clone, Debug)]
pub struct MpModel {
    pub bits: usize,
    pub potential: PsiPotential<MpFloat>,
    pub eta: MpFloat,
    pub e_plus: MpFloat,
    pub e_minus: MpFloat,
}

/// Rebuilds the potential at `bits` bits with a truncation fine enough for
/// that precision; coefficients are recomputed in multiprecision.
pub fn mp_model(model: &FrequencyModel, sm: &SplittingModel, phases: &Phases, bits: usize) -> Result<MpModel> {
    let eps = MpFloat::from_f64(sm.eps, bits);
    let a_inv_t = sm.a_inverse_transpose()?;
    let ln_tol = -(bits as f64) * std::f64::consts::LN_2 - 10.0;
    let beta_b = model_beta_floor(model, sm.eps, &sm.vectors);
    let (beta_max, _) = truncation(model, beta_b, sm.ln_b, sm.ln_eta, sm.mu, &a_inv_t, ln_tol)?;
    let ln_l = |k: IntVec2| ln_l_exact_real::<MpFloat>(model, &eps, k);
    let l_main = ln_l(sm.vectors[1])?;
    let l_prev = ln_l(sm.vectors[0])?;
    let l_next = ln_l(sm.vectors[2])?;
    let l_sec = ln_l(sm.vectors[3])?;
    let r_prev = (l_prev - l_main.clone()).exp();
    let r_next = (l_next - l_main.clone()).exp();
    let eta = r_prev.clone() + r_next.clone();
    let q = r_next / eta.clone();
    let q_tilde = (l_sec - l_main.clone()).exp() / eta.clone();
    let mp = |x: f64| MpFloat::from_f64(x, bits);
    let b = [mp(sm.b[0]), mp(sm.b[1])];
    let mut terms = Vec::new();
    for c in candidates(model, sm.eps, beta_max)? {
        let m = a_inv_t.apply(c.k)?;
        let r = (ln_l(c.k)? - l_main.clone()).exp();
        let phase = MpFloat::from_i128(m.k1 as i128, bits) * b[0].clone()
            + MpFloat::from_i128(m.k2 as i128, bits) * b[1].clone()
            - mp(phases.sigma(c.k));
        terms.push(PotentialTerm {
            m: [m.k1, m.k2],
            r_over_eta: if m.k1 != 0 { r.clone() / eta.clone() } else { mp(0.0) },
            r,
            phase,
        });
    }
    let (e_plus, e_minus) = crate::splitting::transversality::e_values(&q, &q_tilde, &mp(sm.d_tau), &mp(sm.d_tau1));
    Ok(MpModel {
        bits,
        potential: PsiPotential { terms, eta: eta.clone() },
        eta,
        e_plus,
        e_minus,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::melnikov::exponents::{eps_hat, eps_prime};
    use crate::phases::PhaseSource;

    fn silver() -> FrequencyModel {
        FrequencyModel::silver(1.0).unwrap()
    }

    #[test]
    fn reversible_model_at_transition() {
        let m = silver();
        for n in 3..=7 {
            let e = eps_hat(&m, n);
            let sm = build_model(&m, e, e.powf(3.5), &Phases::zero()).unwrap();
            assert_eq!(sm.n, n);
            assert_eq!(sm.d_tau, 0.0);
            assert_eq!(sm.d_tau1, 0.0);
            assert!(sm.checks.det_a_sign_ok);
            // the prefactors |<k,omega>| shift Q away from 1/2 while Qt stays at 1/2
            let l2 = m.lambda_f64().powi(2);
            assert!((sm.q - 1.0 / (1.0 + l2)).abs() < 0.02);
            assert!((sm.q_tilde - 0.5).abs() < 0.02);
            assert!(sm.ln_eta < -10.0);
            assert!(sm.ln_tail_bound < F64_TAIL_TOL.ln());
            let t = sm.transversality;
            assert!((t.e_plus - (1.0 + sm.q_tilde)).abs() < 1e-12);
            assert!((t.e_minus - (1.0 - sm.q_tilde)).abs() < 1e-12);
        }
    }

    #[test]
    fn q_runs_across_the_interval() {
        let m = silver();
        let n = 5;
        let near_upper = eps_prime(&m, n) * (1.0 - 1e-3);
        let near_lower = eps_prime(&m, n + 1) * (1.0 + 1e-3);
        let up = build_model(&m, near_upper, 1.0, &Phases::zero()).unwrap();
        let lo = build_model(&m, near_lower, 1.0, &Phases::zero()).unwrap();
        assert_eq!((up.n, lo.n), (n, n));
        assert!(up.q < 1e-6);
        assert!(lo.q > 1.0 - 1e-6);
        assert!(up.q_tilde < 1e-3 && lo.q_tilde < 1e-3);
    }

    #[test]
    fn model_terms_have_small_psi_frequencies() {
        let m = silver();
        let sm = build_model(&m, eps_hat(&m, 4), 1.0, &Phases::zero()).unwrap();
        let find = |r: TermRole| sm.terms.iter().find(|t| t.role == r).unwrap().m;
        assert_eq!(find(TermRole::Main), IntVec2::new(0, 1));
        assert_eq!(find(TermRole::Previous), IntVec2::new(1, 0));
        assert_eq!(find(TermRole::Next), IntVec2::new(1, 2));
        assert_eq!(find(TermRole::Secondary), IntVec2::new(1, 1));
    }

    #[test]
    fn phase_differences_and_frame() {
        let m = silver();
        let p = Phases::new(&m, PhaseSource::Random { seed: 7, check46: true }).unwrap();
        let e = eps_hat(&m, 5) * 1.3;
        let sm = build_model(&m, e, 1.0, &p).unwrap();
        let dt = p.primary_second_difference(&m, 5).unwrap();
        assert!((sm.d_tau - dt).abs() < 1e-12);
        let pot = sm.full_potential();
        let psi = [0.7, 2.1];
        let th = sm.theta_of(psi).unwrap();
        let back = sm.psi_of(th);
        for i in 0..2 {
            assert!((back[i] - psi[i]).abs() < 1e-9);
        }
        // phases of the model terms reproduce the K4 form
        let k4 = sm.model_potential();
        assert_eq!(k4.terms.len(), 4);
        assert!(pot.terms.len() > 4);
    }

    #[test]
    fn needs_n_at_least_two() {
        let m = silver();
        assert!(build_model(&m, 5.0, 1.0, &Phases::zero()).is_err());
        assert!(build_model(&m, -1.0, 1.0, &Phases::zero()).is_err());
    }
}
