//! Critical points of the model `K4` and of the truncated potential `K`.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::phases::Phases;
use crate::quadratic_field::FrequencyModel;
use crate::real::{MpFloat, Real};
use crate::splitting::eigen::{eigen_data, EigenData};
use crate::splitting::model::{mp_model, SplittingModel};
use crate::splitting::potential::PsiPotential;

#[derive(Clone, Debug, Serialize)]
pub struct SolverOptions {
    /// The solvers require `E* > c * eta` (model) or `E* > c * eta_bar` (full).
    pub hypothesis_c: f64,
    /// Basin scan resolution per axis.
    pub grid: usize,
    pub newton_tol: f64,
    pub max_newton: usize,
    /// Roots closer than this on the torus are the same root.
    pub same_root: f64,
    /// Distinct roots closer than this are reported as merging.
    pub merge_tol: f64,
    /// Scaled determinants below this are reported as degenerate.
    pub degenerate_det: f64,
    /// Fall back to basin-scan seeds when the hypothesis fails.
    pub permissive: bool,
    /// Recompute the determinant law in multiprecision when `eta < 1e-12`.
    pub escalate: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            hypothesis_c: 10.0,
            grid: 64,
            newton_tol: 1e-12,
            max_newton: 60,
            same_root: 1e-6,
            merge_tol: 1e-3,
            degenerate_det: 1e-8,
            permissive: true,
            escalate: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    Plus,
    Minus,
}

#[derive(Clone, Debug, Serialize)]
pub struct CriticalPoint {
    /// 1..=4 in the order `(alpha+, 0), (alpha+ + pi, 0), (alpha-, pi), (alpha- + pi, pi)`.
    pub index: usize,
    pub psi: [f64; 2],
    pub theta: [f64; 2],
    pub branch: Branch,
    pub residual: f64,
    /// `det D^2 K / (B^2 eta)`.
    pub scaled_det: f64,
    pub eigen: EigenData,
    /// `| |det D^2 K| / (B^2 eta) - E(+/-) |`.
    pub det_law_error: f64,
    pub det_law_bits: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SolveFlag {
    /// The basin scan found a number of roots other than four.
    CountMismatch { found: usize },
    /// Two roots closer than the merge tolerance.
    Merge { distance: f64 },
    /// A root with a scaled Hessian determinant below tolerance.
    NearDegenerate { scaled_det: f64 },
    /// Newton from a model seed did not converge.
    NewtonFailure,
    /// `E* <= c eta_bar`; informational, the permissive path was used.
    HypothesisViolated { e_star: f64, eta_bar: f64 },
}

impl SolveFlag {
    /// Whether the flag signals a possible bifurcation.
    pub fn is_bifurcation(&self) -> bool {
        !matches!(self, SolveFlag::HypothesisViolated { .. })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FullSolution {
    pub points: Vec<CriticalPoint>,
    pub basin_roots: usize,
    pub flags: Vec<SolveFlag>,
    /// Largest `|psi - seed| / eta_bar` over points seeded by the model.
    pub seed_deviation_over_eta_bar: Option<f64>,
}

impl FullSolution {
    pub fn bifurcation_flags(&self) -> impl Iterator<Item = &SolveFlag> {
        self.flags.iter().filter(|f| f.is_bifurcation())
    }
}

pub fn torus_distance(a: [f64; 2], b: [f64; 2]) -> f64 {
    let d = |x: f64, y: f64| (x - y).wrap_pi().abs();
    d(a[0], b[0]).hypot(d(a[1], b[1]))
}

/// The two solutions of `sin x = F(x)` near `0` and `pi`, by fixed-point
/// iteration; requires `F^2 + F'^2 < 1`.
pub fn lemma2_roots(f: &dyn Fn(f64) -> f64) -> Result<[f64; 2]> {
    let mut out = [0.0; 2];
    for (slot, base) in [(0usize, 0.0f64), (1, PI)] {
        let mut x = base;
        let mut done = false;
        for _ in 0..2000 {
            let v = f(x);
            if !(v.abs() < 1.0) {
                return Err(Error::Solver(format!("|F| = {} >= 1 in sin x = F(x)", v.abs())));
            }
            let next = if slot == 0 { v.asin() } else { PI - v.asin() };
            if (next - x).abs() <= 1e-13 * (1.0 + x.abs()) {
                x = next;
                done = true;
                break;
            }
            x = next;
        }
        if !done {
            return Err(Error::Solver("fixed point iteration is not contracting".into()));
        }
        out[slot] = x;
    }
    Ok(out)
}

/// Damped Newton on the scaled gradient system; returns the root and its
/// residual when converged.
pub fn newton<R: Real>(pot: &PsiPotential<R>, start: [R; 2], tol: f64, max_iter: usize) -> Option<([R; 2], f64)> {
    let mut x = start;
    for _ in 0..max_iter {
        let s = pot.system(&x);
        let step = s.newton_step()?;
        let (s0, s1) = (step[0].to_f64(), step[1].to_f64());
        if !(s0.is_finite() && s1.is_finite()) {
            return None;
        }
        let size = s0.abs().max(s1.abs());
        let scale = if size > 0.5 { 0.5 / size } else { 1.0 };
        let lift = x[0].lift(scale);
        x = [
            (x[0].clone() + step[0].clone() * lift.clone()).wrap_two_pi(),
            (x[1].clone() + step[1].clone() * lift).wrap_two_pi(),
        ];
        if size < tol {
            let r = pot.system(&x).residual();
            return Some((x, r));
        }
    }
    None
}

fn branch_of(psi: [f64; 2]) -> Branch {
    if psi[1].wrap_pi().abs() < PI / 2.0 {
        Branch::Plus
    } else {
        Branch::Minus
    }
}

/// Critical points of `K4` by the two-stage scheme: `psi2(psi1)` from the
/// fixed point on each branch, then a scalar solve in `psi1`, then Newton.
pub fn solve_model_critical_points(sm: &SplittingModel, opts: &SolverOptions) -> Result<Vec<CriticalPoint>> {
    let t = sm.transversality;
    if !(t.e_star > opts.hypothesis_c * sm.eta) {
        return Err(Error::Hypothesis(format!(
            "E* = {:.3e} is not above {} eta = {:.3e}; use the full solver",
            t.e_star, opts.hypothesis_c, sm.eta
        )));
    }
    let seeds = t.seeds().ok_or_else(|| Error::Hypothesis("E(+/-) vanishes".into()))?;
    let (q, qt, dt, dt1, eta) = (sm.q, sm.q_tilde, sm.d_tau, sm.d_tau1, sm.eta);
    let pot = sm.model_potential();
    let psi2_of = |psi1: f64, plus: bool| -> Result<f64> {
        let f = |y: f64| {
            eta * (-2.0 * q * (psi1 + 2.0 * y - dt).sin() - qt * (psi1 + y - dt1).sin())
        };
        Ok(lemma2_roots(&f)?[if plus { 0 } else { 1 }])
    };
    let mut points = Vec::new();
    for (branch, alpha, e) in [
        (Branch::Plus, seeds[0][0], t.e_plus),
        (Branch::Minus, seeds[2][0], t.e_minus),
    ] {
        let plus = branch == Branch::Plus;
        // F(psi1) = -E sin(psi1 - alpha) + O(eta), so sin x = sin x + F(alpha + x) / E
        let g = |x: f64| -> f64 {
            let p1 = alpha + x;
            match psi2_of(p1, plus) {
                Ok(p2) => x.sin() + pot.system(&[p1, p2]).f[0] / e,
                Err(_) => f64::NAN,
            }
        };
        let roots = lemma2_roots(&g)?;
        for x in roots {
            let p1 = (alpha + x).wrap_two_pi();
            let p2 = psi2_of(p1, plus)?.wrap_two_pi();
            let (psi, residual) = newton(&pot, [p1, p2], opts.newton_tol, opts.max_newton)
                .ok_or_else(|| Error::Solver("Newton polish of a model point failed".into()))?;
            points.push((psi, residual, branch, e));
        }
    }
    let mut out = Vec::new();
    for (i, (psi, residual, branch, e)) in points.into_iter().enumerate() {
        let dev = torus_distance(psi, seeds[i]);
        let bound = 3.0 * eta * (1.0 + 1.0 / e) + 1e-12;
        if dev > bound {
            return Err(Error::Solver(format!(
                "model point {} deviates {dev:.3e} from its leading-order position (bound {bound:.3e})",
                i + 1
            )));
        }
        let sys = pot.system(&psi);
        let d = sys.det();
        out.push(CriticalPoint {
            index: i + 1,
            psi,
            theta: sm.theta_of(psi)?,
            branch,
            residual,
            scaled_det: d,
            eigen: eigen_data(sm, &sys, e),
            det_law_error: (d.abs() - e).abs(),
            det_law_bits: 53,
        });
    }
    Ok(out)
}

/// All roots reached by Newton from a `grid x grid` lattice of starts.
pub fn basin_scan(pot: &PsiPotential<f64>, opts: &SolverOptions) -> Vec<[f64; 2]> {
    let step = 2.0 * PI / opts.grid as f64;
    let mut roots: Vec<[f64; 2]> = Vec::new();
    for i in 0..opts.grid {
        for k in 0..opts.grid {
            let start = [(i as f64 + 0.5) * step, (k as f64 + 0.5) * step];
            if let Some((r, res)) = newton(pot, start, opts.newton_tol, opts.max_newton) {
                if res < 1e-9 && !roots.iter().any(|x| torus_distance(*x, r) < opts.same_root) {
                    roots.push(r);
                }
            }
        }
    }
    roots
}

fn order_roots(pot: &PsiPotential<f64>, roots: &[[f64; 2]]) -> Vec<(usize, [f64; 2])> {
    // index 1/3: maximum along psi1 (J11 < 0); 2/4: minimum
    let mut out: Vec<(usize, [f64; 2])> = roots
        .iter()
        .map(|&r| {
            let j11 = pot.system(&r).j[0][0];
            let base = if branch_of(r) == Branch::Plus { 1 } else { 3 };
            (if j11 < 0.0 { base } else { base + 1 }, r)
        })
        .collect();
    out.sort_by(|a, b| a.0.cmp(&b.0).then(a.1[0].partial_cmp(&b.1[0]).unwrap()));
    out
}

/// Critical points of the truncated potential: Newton from the `K4` points
/// (or basin-scan roots when the hypothesis fails), plus a basin scan that
/// must find nothing else.
pub fn solve_full_critical_points(
    model: &FrequencyModel,
    sm: &SplittingModel,
    phases: &Phases,
    opts: &SolverOptions,
) -> Result<FullSolution> {
    let t = sm.transversality;
    let pot = sm.full_potential();
    let mut flags = Vec::new();
    let eta_bar = sm.eta_bar();
    let hypothesis = t.e_star > opts.hypothesis_c * eta_bar && !t.degenerate();
    let roots = basin_scan(&pot, opts);

    let mut seeded: Vec<(usize, [f64; 2])> = Vec::new();
    let mut deviation = None;
    if hypothesis {
        match solve_model_critical_points(sm, opts) {
            Ok(model_points) => {
                let mut worst = 0.0f64;
                for p in &model_points {
                    match newton(&pot, p.psi, opts.newton_tol, opts.max_newton) {
                        Some((r, _)) => {
                            let seed = t.seeds().expect("nondegenerate")[p.index - 1];
                            worst = worst.max(torus_distance(r, seed) / eta_bar);
                            seeded.push((p.index, r));
                        }
                        None => flags.push(SolveFlag::NewtonFailure),
                    }
                }
                deviation = Some(worst);
            }
            Err(_) => flags.push(SolveFlag::NewtonFailure),
        }
    } else {
        flags.push(SolveFlag::HypothesisViolated {
            e_star: t.e_star,
            eta_bar,
        });
        if !opts.permissive {
            return Err(Error::Hypothesis(format!(
                "E* = {:.3e} is not above {} eta_bar = {eta_bar:.3e}",
                t.e_star, opts.hypothesis_c
            )));
        }
    }
    if seeded.len() != 4 {
        seeded = order_roots(&pot, &roots);
    }
    // every seeded root must be one of the scanned roots and vice versa
    let mut all = roots.clone();
    for (_, r) in &seeded {
        if !all.iter().any(|x| torus_distance(*x, *r) < opts.same_root) {
            all.push(*r);
        }
    }
    if all.len() != 4 {
        flags.push(SolveFlag::CountMismatch { found: all.len() });
    }
    for i in 0..all.len() {
        for j in i + 1..all.len() {
            let d = torus_distance(all[i], all[j]);
            if d < opts.merge_tol {
                flags.push(SolveFlag::Merge { distance: d });
            }
        }
    }

    let mp = if opts.escalate && sm.ln_eta < (1e-12f64).ln() {
        let bits = ((-sm.ln_eta / std::f64::consts::LN_2).ceil() as usize + 96).max(256);
        Some(mp_model(model, sm, phases, bits)?)
    } else {
        None
    };

    let mut points = Vec::new();
    for (index, psi) in seeded {
        let branch = if index <= 2 { Branch::Plus } else { Branch::Minus };
        let e = if index <= 2 { t.e_plus } else { t.e_minus };
        let sys = pot.system(&psi);
        let d = sys.det();
        if d.abs() < opts.degenerate_det {
            flags.push(SolveFlag::NearDegenerate { scaled_det: d });
        }
        let (det_law_error, bits) = match &mp {
            Some(mm) => {
                let bits = mm.bits;
                let start = [MpFloat::from_f64(psi[0], bits), MpFloat::from_f64(psi[1], bits)];
                let tol = (2.0f64).powi(-(bits as i32) + 40).max(f64::MIN_POSITIVE);
                let root = newton(&mm.potential, start.clone(), tol, 40).map(|r| r.0).unwrap_or(start);
                let dm = mm.potential.system(&root).det();
                let em = if index <= 2 { mm.e_plus.clone() } else { mm.e_minus.clone() };
                ((dm.abs() - em).abs().to_f64(), bits)
            }
            None => ((d.abs() - e).abs(), 53),
        };
        points.push(CriticalPoint {
            index,
            psi,
            theta: sm.theta_of(psi)?,
            branch,
            residual: sys.residual(),
            scaled_det: d,
            eigen: eigen_data(sm, &sys, e),
            det_law_error,
            det_law_bits: bits,
        });
    }
    Ok(FullSolution {
        points,
        basin_roots: roots.len(),
        flags,
        seed_deviation_over_eta_bar: deviation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::melnikov::exponents::eps_hat;
    use crate::phases::PhaseSource;
    use crate::splitting::model::build_model;
    use proptest::prelude::*;

    fn silver() -> FrequencyModel {
        FrequencyModel::silver(1.0).unwrap()
    }

    #[test]
    fn reversible_model_points_are_symmetric() {
        let m = silver();
        let e = eps_hat(&m, 4);
        let sm = build_model(&m, e, e.powf(3.5), &Phases::zero()).unwrap();
        let pts = solve_model_critical_points(&sm, &SolverOptions::default()).unwrap();
        let expected = [[0.0, 0.0], [PI, 0.0], [0.0, PI], [PI, PI]];
        for (p, x) in pts.iter().zip(expected) {
            assert!(torus_distance(p.psi, x) < 1e-12);
            assert!(p.residual < 1e-12);
        }
    }

    #[test]
    fn generic_phases_follow_alpha() {
        let m = silver();
        let e = eps_hat(&m, 3) * 1.1;
        let mut sm = build_model(&m, e, 1.0, &Phases::zero()).unwrap();
        // impose dtau = 1.0, dtau1 = 0.3 directly on the model terms
        for t in sm.terms.iter_mut() {
            t.tau = match t.role {
                crate::splitting::model::TermRole::Next => 1.0,
                crate::splitting::model::TermRole::Secondary => 0.3,
                _ => 0.0,
            };
        }
        sm.d_tau = 1.0;
        sm.d_tau1 = 0.3;
        sm.transversality = crate::splitting::transversality::transversality(sm.q, sm.q_tilde, 1.0, 0.3);
        let pts = solve_model_critical_points(&sm, &SolverOptions::default()).unwrap();
        let seeds = sm.transversality.seeds().unwrap();
        let pot = sm.model_potential();
        for p in &pts {
            let g = pot.gradient(&p.psi);
            assert!(g[0].abs() < 1e-12 && g[1].abs() < 1e-12);
            assert!(torus_distance(p.psi, seeds[p.index - 1]) <= 3.0 * sm.eta.max(1e-16) / sm.transversality.e_star);
        }
    }

    #[test]
    fn full_solution_reversible() {
        let m = silver();
        let e = eps_hat(&m, 5);
        let sm = build_model(&m, e, e.powf(3.5), &Phases::zero()).unwrap();
        let opts = SolverOptions { grid: 16, ..SolverOptions::default() };
        let s = solve_full_critical_points(&m, &sm, &Phases::zero(), &opts).unwrap();
        assert_eq!(s.points.len(), 4);
        assert_eq!(s.bifurcation_flags().count(), 0, "{:?}", s.flags);
        for p in &s.points {
            assert!(p.det_law_bits > 53);
            assert!(p.det_law_error < 10.0 * sm.eta_bar(), "{} vs {}", p.det_law_error, sm.eta_bar());
        }
    }

    #[test]
    fn random_phases_give_four_points() {
        let m = silver();
        let p = Phases::new(&m, PhaseSource::Random { seed: 11, check46: true }).unwrap();
        for f in [0.7, 1.0, 1.6] {
            let e = eps_hat(&m, 4) * f;
            let sm = build_model(&m, e, e.powf(3.5), &p).unwrap();
            let opts = SolverOptions { grid: 16, escalate: false, ..SolverOptions::default() };
            let s = solve_full_critical_points(&m, &sm, &p, &opts).unwrap();
            assert_eq!(s.points.len(), 4);
            assert_eq!(s.bifurcation_flags().count(), 0, "{:?}", s.flags);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]
        #[test]
        fn lemma2_finds_two_roots(eta in 1e-6f64..0.3, a in -1.0f64..1.0, b in -1.0f64..1.0, c in 0.0f64..6.3) {
            // F = eta (a sin(x + c) + b cos 2x) keeps F^2 + F'^2 < 1
            let f = |x: f64| eta * (a * (x + c).sin() + 0.5 * b * (2.0 * x).cos());
            let r = lemma2_roots(&f).unwrap();
            for x in r {
                prop_assert!((x.sin() - f(x)).abs() < 1e-13);
            }
            prop_assert!(r[0].abs() < 3.0 * eta);
            prop_assert!((r[1] - PI).abs() < 3.0 * eta);
        }
    }
}
