//! Tables for plotting the exponent functions.

use serde::Serialize;

use crate::error::{domain, Result};
use crate::melnikov::exponents::{g_k, StarTable};
use crate::quadratic_field::FrequencyModel;
use crate::resonances::ResonantSequence;

#[derive(Clone, Debug, Serialize)]
pub struct FigureTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl FigureTable {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }
}

/// `ln eps` in units of the period `4 ln lambda`.
pub fn period_units(model: &FrequencyModel, eps: f64) -> f64 {
    eps.ln() / (4.0 * model.lambda_f64().ln())
}

fn log_points(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo && points >= 2) {
        return Err(domain(format!("bad figure range [{lo}, {hi}] with {points} points")));
    }
    let (a, b) = (lo.ln(), hi.ln());
    Ok((0..points)
        .map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp())
        .collect())
}

/// `h1, h2, h3` from the limit functions `g*`.
pub fn h_curves(model: &FrequencyModel, stars: &StarTable, eps_lo: f64, eps_hi: f64, points: usize) -> Result<FigureTable> {
    let mut rows = Vec::with_capacity(points);
    for eps in log_points(eps_lo, eps_hi, points)? {
        let h = stars.h_star(model, eps, 3)?;
        rows.push(vec![period_units(model, eps), eps.ln(), h[0].g_star, h[1].g_star, h[2].g_star]);
    }
    Ok(FigureTable {
        columns: ["ln_eps_periods", "ln_eps", "h1", "h2", "h3"].map(String::from).to_vec(),
        rows,
    })
}

/// `g*_{s(j,n)}` and the exact `g_k` at `k = s(j,n)` for `j` in `{1, 3}` and
/// the given `n`.
pub fn gk_curves(
    model: &FrequencyModel,
    stars: &StarTable,
    eps_lo: f64,
    eps_hi: f64,
    points: usize,
    ns: std::ops::RangeInclusive<u32>,
) -> Result<FigureTable> {
    let mut series = Vec::new();
    let mut columns = vec!["ln_eps_periods".to_string(), "ln_eps".to_string()];
    for j in [1i64, 3] {
        let mut seq = ResonantSequence::new(model, j)?;
        for n in ns.clone() {
            let k = seq.vector(model, n as usize)?;
            columns.push(format!("gstar_{j}_{n}"));
            columns.push(format!("g_{j}_{n}"));
            series.push((j, n as i64, k));
        }
    }
    let mut rows = Vec::with_capacity(points);
    for eps in log_points(eps_lo, eps_hi, points)? {
        let mut row = vec![period_units(model, eps), eps.ln()];
        for &(j, n, k) in &series {
            row.push(stars.g_star(model, eps, j, n)?);
            row.push(g_k(model, eps, k)?);
        }
        rows.push(row);
    }
    Ok(FigureTable { columns, rows })
}
