//! Tracking the four critical points along a log-uniform grid in `eps`.
//!
//! Points are matched in the `psi` frame of the newer grid point: the older
//! points are carried over through `theta`, so the comparison is unaffected
//! by the large entries of `A`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{domain, Result};
use crate::melnikov::exponents::MelnikovConstants;
use crate::phases::Phases;
use crate::quadratic_field::FrequencyModel;
use crate::splitting::eigen::ln_max_gradient;
use crate::splitting::model::{build_model, SplittingModel};
use crate::splitting::solver::{solve_full_critical_points, torus_distance, CriticalPoint, SolveFlag, SolverOptions};

#[derive(Clone, Debug, Serialize)]
pub struct ContinuationOptions {
    pub points: usize,
    /// `mu = eps^p`.
    pub p: f64,
    pub solver: SolverOptions,
    /// Largest accepted displacement between matched points, in `psi`.
    pub jump_tol: f64,
    /// Bisection depth used to resolve a displacement above `jump_tol`.
    pub max_depth: usize,
    /// Resolution of the torus sample for `max |grad|`; zero skips it.
    pub gradient_grid: usize,
}

impl Default for ContinuationOptions {
    fn default() -> Self {
        Self {
            points: 400,
            p: 3.5,
            solver: SolverOptions {
                escalate: false,
                ..SolverOptions::default()
            },
            jump_tol: 0.25,
            max_depth: 12,
            gradient_grid: 48,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TrackFlag {
    Solve { flag: SolveFlag },
    /// Matched points moved more than the jump tolerance after bisection.
    Jump { eps_from: f64, eps_to: f64, distance: f64 },
    /// The number of points changed between neighbours.
    Lost { eps_from: f64, eps_to: f64 },
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepPoint {
    pub eps: f64,
    pub n: i64,
    pub q: f64,
    pub q_tilde: f64,
    pub d_tau: f64,
    pub d_tau1: f64,
    pub e_plus: f64,
    pub e_minus: f64,
    pub e_star: f64,
    pub ln_eta: f64,
    pub ln_eta_bar: f64,
    pub ln_mu: f64,
    /// `ln max_theta |grad (mu L)|`.
    pub ln_max_gradient: Option<f64>,
    /// Critical points in branch order: entry `i` continues entry `i` of the
    /// previous grid point.
    pub points: Vec<CriticalPoint>,
    pub flags: Vec<SolveFlag>,
}

impl SweepPoint {
    pub fn ln_min_abs_det(&self) -> f64 {
        self.points.iter().map(|p| p.eigen.ln_abs_det).fold(f64::INFINITY, f64::min)
    }

    pub fn ln_m_star(&self) -> f64 {
        self.points.iter().map(|p| p.eigen.ln_m_star).fold(f64::INFINITY, f64::min)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ContinuationReport {
    pub grid: Vec<SweepPoint>,
    pub refinements: usize,
    pub flags: Vec<(f64, TrackFlag)>,
    pub branches: usize,
    pub min_e_star: f64,
    pub min_c1: f64,
    pub max_c2: f64,
    /// Largest `|dtau|` met along the sweep and whether it stays below `2 pi / 3`.
    pub phase_condition: (f64, bool),
}

impl ContinuationReport {
    pub fn bifurcation_flags(&self) -> usize {
        self.flags
            .iter()
            .filter(|(_, f)| match f {
                TrackFlag::Solve { flag } => flag.is_bifurcation(),
                _ => true,
            })
            .count()
    }
}

struct Solved {
    sm: SplittingModel,
    point: SweepPoint,
}

fn solve_at(model: &FrequencyModel, eps: f64, phases: &Phases, opts: &ContinuationOptions) -> Result<Solved> {
    let mu = eps.powf(opts.p);
    let sm = build_model(model, eps, mu, phases)?;
    let sol = solve_full_critical_points(model, &sm, phases, &opts.solver)?;
    let t = sm.transversality;
    let ln_max_gradient = (opts.gradient_grid > 0).then(|| ln_max_gradient(&sm, &sm.full_potential(), opts.gradient_grid));
    let point = SweepPoint {
        eps,
        n: sm.n,
        q: sm.q,
        q_tilde: sm.q_tilde,
        d_tau: sm.d_tau,
        d_tau1: sm.d_tau1,
        e_plus: t.e_plus,
        e_minus: t.e_minus,
        e_star: t.e_star,
        ln_eta: sm.ln_eta,
        ln_eta_bar: sm.ln_eta_bar,
        ln_mu: mu.ln(),
        ln_max_gradient,
        points: sol.points,
        flags: sol.flags,
    };
    Ok(Solved { sm, point })
}

/// Best assignment of `new` to `old` (both in the frame of `sm_new`) over
/// all permutations; returns the permutation and its largest distance.
fn best_matching(old: &[[f64; 2]], new: &[[f64; 2]]) -> (Vec<usize>, f64) {
    fn permute(k: usize, used: &mut Vec<bool>, cur: &mut Vec<usize>, old: &[[f64; 2]], new: &[[f64; 2]], best: &mut (Vec<usize>, f64), worst: f64) {
        if worst >= best.1 {
            return;
        }
        if k == old.len() {
            *best = (cur.clone(), worst);
            return;
        }
        for j in 0..new.len() {
            if !used[j] {
                used[j] = true;
                cur.push(j);
                let w = worst.max(torus_distance(old[k], new[j]));
                permute(k + 1, used, cur, old, new, best, w);
                cur.pop();
                used[j] = false;
            }
        }
    }
    let mut best = (Vec::new(), f64::INFINITY);
    permute(0, &mut vec![false; new.len()], &mut Vec::new(), old, new, &mut best, 0.0);
    best
}

/// Positions of `prev` expressed in the `psi` frame of `sm`.
fn carry(prev: &Solved, sm: &SplittingModel) -> Result<Vec<[f64; 2]>> {
    prev.point.points.iter().map(|p| Ok(sm.psi_of(prev.sm.theta_of(p.psi)?))).collect()
}

struct Tracker<'a> {
    model: &'a FrequencyModel,
    phases: &'a Phases,
    opts: &'a ContinuationOptions,
    flags: Vec<(f64, TrackFlag)>,
    refinements: usize,
}

impl Tracker<'_> {
    /// Reorders `next.points` to continue `prev.points`, bisecting the
    /// interval while the displacement exceeds the jump tolerance.
    fn link(&mut self, prev: &Solved, next: &mut Solved, depth: usize) -> Result<()> {
        if prev.point.points.len() != next.point.points.len() {
            self.flags.push((
                next.point.eps,
                TrackFlag::Lost {
                    eps_from: prev.point.eps,
                    eps_to: next.point.eps,
                },
            ));
            return Ok(());
        }
        let old = carry(prev, &next.sm)?;
        let new: Vec<[f64; 2]> = next.point.points.iter().map(|p| p.psi).collect();
        let (perm, dist) = best_matching(&old, &new);
        if dist > self.opts.jump_tol {
            if depth < self.opts.max_depth {
                let mid = (prev.point.eps * next.point.eps).sqrt();
                let mut middle = solve_at(self.model, mid, self.phases, self.opts)?;
                self.refinements += 1;
                self.record(&middle);
                self.link(prev, &mut middle, depth + 1)?;
                return self.link(&middle, next, depth + 1);
            }
            self.flags.push((
                next.point.eps,
                TrackFlag::Jump {
                    eps_from: prev.point.eps,
                    eps_to: next.point.eps,
                    distance: dist,
                },
            ));
        }
        let reordered = perm.iter().map(|&j| next.point.points[j].clone()).collect();
        next.point.points = reordered;
        Ok(())
    }

    fn record(&mut self, s: &Solved) {
        for f in &s.point.flags {
            self.flags.push((s.point.eps, TrackFlag::Solve { flag: f.clone() }));
        }
    }
}

/// Log-uniform grid of `points` values covering `[lo, hi]`, offset by half
/// a step so that neither end point is sampled.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo && points > 0) {
        return Err(domain(format!("bad grid [{lo}, {hi}] with {points} points")));
    }
    let (a, b) = (lo.ln(), hi.ln());
    let h = (b - a) / points as f64;
    Ok((0..points).map(|i| (a + (i as f64 + 0.5) * h).exp()).collect())
}

pub fn continuation_sweep(
    model: &FrequencyModel,
    eps_lo: f64,
    eps_hi: f64,
    phases: &Phases,
    opts: &ContinuationOptions,
) -> Result<ContinuationReport> {
    let grid = log_grid(eps_lo, eps_hi, opts.points)?;
    let solved: Vec<Solved> = grid
        .par_iter()
        .map(|&e| solve_at(model, e, phases, opts))
        .collect::<Result<_>>()?;
    let mut tracker = Tracker {
        model,
        phases,
        opts,
        flags: Vec::new(),
        refinements: 0,
    };
    let mut done: Vec<Solved> = Vec::with_capacity(solved.len());
    for mut s in solved {
        tracker.record(&s);
        if let Some(prev) = done.last() {
            tracker.link(prev, &mut s, 0)?;
        }
        done.push(s);
    }
    let mut worst_dt = 0.0f64;
    let (mut min_e, mut min_c1, mut max_c2) = (f64::INFINITY, f64::INFINITY, 0.0f64);
    for s in &done {
        worst_dt = worst_dt.max(s.point.d_tau.abs());
        min_e = min_e.min(s.point.e_star);
        for p in &s.point.points {
            min_c1 = min_c1.min(p.eigen.c1_ratio);
            max_c2 = max_c2.max(p.eigen.c2_ratio);
        }
    }
    let branches = done.iter().map(|s| s.point.points.len()).min().unwrap_or(0);
    Ok(ContinuationReport {
        grid: done.into_iter().map(|s| s.point).collect(),
        refinements: tracker.refinements,
        flags: tracker.flags,
        branches,
        min_e_star: min_e,
        min_c1,
        max_c2,
        phase_condition: (worst_dt, worst_dt < 2.0 * std::f64::consts::PI / 3.0),
    })
}

/// Offsets of the measured exponents from the predicted shapes at one grid
/// point: `ln max |grad| - [ln(mu / sqrt eps) - C0 h1 / eps^(1/4)]` and
/// `ln m* - [ln(mu eps^(1/4)) - C0 h2 / eps^(1/4)]`.
pub fn exponent_offsets(model: &FrequencyModel, point: &SweepPoint, h1: f64, h2: f64) -> (Option<f64>, f64) {
    let c0 = MelnikovConstants::of(model).c0;
    let le = point.eps.ln();
    let q = (-0.25 * le).exp();
    let grad = point
        .ln_max_gradient
        .map(|g| g - (point.ln_mu - 0.5 * le - c0 * h1 * q));
    let m = point.ln_m_star() - (point.ln_mu + 0.25 * le - c0 * h2 * q);
    (grad, m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::melnikov::exponents::{eps_hat, eps_prime};

    #[test]
    fn grid_is_log_uniform_and_open() {
        let g = log_grid(1e-4, 1e-2, 4).unwrap();
        assert_eq!(g.len(), 4);
        assert!(g[0] > 1e-4 && g[3] < 1e-2);
        let r = g[1] / g[0];
        assert!((g[3] / g[2] - r).abs() < 1e-12);
        assert!(log_grid(1e-2, 1e-4, 4).is_err());
    }

    #[test]
    fn matching_finds_the_permutation() {
        let old = [[0.0, 0.0], [1.0, 0.0], [0.0, 3.0], [1.0, 3.0]];
        let new = [[1.01, 3.0], [0.0, 0.02], [0.99, 0.0], [6.28, 3.0]];
        let (p, d) = best_matching(&old, &new);
        assert_eq!(p, vec![1, 2, 3, 0]);
        assert!(d < 0.03);
    }

    #[test]
    fn short_reversible_sweep_across_a_boundary() {
        let m = FrequencyModel::silver(1.0).unwrap();
        let lo = eps_hat(&m, 4);
        let hi = eps_prime(&m, 4) * 1.5;
        let opts = ContinuationOptions {
            points: 12,
            solver: SolverOptions {
                grid: 16,
                escalate: false,
                ..SolverOptions::default()
            },
            gradient_grid: 8,
            ..ContinuationOptions::default()
        };
        let r = continuation_sweep(&m, lo, hi, &Phases::zero(), &opts).unwrap();
        assert_eq!(r.branches, 4);
        assert_eq!(r.bifurcation_flags(), 0, "{:?}", r.flags);
        assert!(r.grid.iter().any(|p| p.n == 3) && r.grid.iter().any(|p| p.n == 4));
        assert!(r.min_e_star > 0.25);
    }
}
