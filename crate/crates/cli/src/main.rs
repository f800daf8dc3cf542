use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};

use silversplit::config::{OutputFormat, RunConfig};
use silversplit::melnikov::dominance::{Dominance, DominanceProfile};
use silversplit::melnikov::exponents::{eps_hat, StarTable};
use silversplit::phases::{PhaseSource, Phases};
use silversplit::splitting::continuation::{continuation_sweep, log_grid, ContinuationOptions, SweepPoint};
use silversplit::splitting::{build_model, solve_full_critical_points, SolverOptions};
use silversplit::verify::{Verifier, ALL_CHECKS};
use silversplit::Error;

mod table;
use table::{num, Table};

#[derive(Parser)]
#[command(name = "silversplit", version, about = "Splitting of separatrices for a silver-ratio whiskered torus")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Decay rate of the Fourier coefficients.
    #[arg(long, global = true, default_value_t = 1.0)]
    rho: f64,
    /// Exponent in mu = eps^p.
    #[arg(long, global = true, default_value_t = 3.5)]
    p: f64,
    /// Allow p <= 3.
    #[arg(long, global = true)]
    allow_small_p: bool,
    #[arg(long, global = true, env = "SILVERSPLIT_PRECISION", default_value_t = 256)]
    precision_bits: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Write to this file instead of standard output.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    /// JSON phase file: an array of {"k": [k1, k2], "sigma": s} records or {"mode": "random", ...}.
    #[arg(long, global = true)]
    phases: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Figure {
    HCurves,
    GkCurves,
}

#[derive(Subcommand)]
enum Command {
    /// Resonant sequences s(j, n) with their numerators.
    Resonances {
        #[arg(long, default_value_t = 10)]
        j_max: i64,
        #[arg(long, default_value_t = 12)]
        n_max: u32,
    },
    /// The five dominant harmonics at one eps.
    Dominance {
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 5)]
        depth: usize,
    },
    /// Dominant harmonics over a grid of eps.
    Sweep {
        #[arg(long)]
        eps_min: f64,
        #[arg(long)]
        eps_max: f64,
        #[arg(long, default_value_t = 100)]
        points: usize,
        /// Log-uniform grid (linear otherwise).
        #[arg(long)]
        log: bool,
        #[arg(long, default_value_t = 5)]
        depth: usize,
    },
    /// The four critical points of the splitting potential at one eps.
    CriticalPoints {
        #[arg(long)]
        eps: f64,
        /// Basin scan resolution per axis.
        #[arg(long, default_value_t = 64)]
        grid: usize,
    },
    /// Track the critical points along a log-uniform grid.
    Continue {
        #[arg(long)]
        eps_min: f64,
        #[arg(long)]
        eps_max: f64,
        #[arg(long, default_value_t = 400)]
        points: usize,
    },
    /// Compare the residue series with direct quadrature at random angles.
    Oracle {
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        #[arg(long, default_value_t = 20)]
        samples: usize,
        #[arg(long, default_value_t = 1e-6)]
        tolerance: f64,
    },
    /// Run the acceptance checks.
    Verify {
        /// Comma-separated check numbers (all by default).
        #[arg(long, value_delimiter = ',')]
        only: Vec<u32>,
        /// Where to write the JSON report.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Tables for plotting the exponent functions.
    FigureData {
        #[arg(value_enum)]
        which: Figure,
        /// Defaults to one period centred on eps^_5.
        #[arg(long)]
        eps_min: Option<f64>,
        #[arg(long)]
        eps_max: Option<f64>,
        #[arg(long, default_value_t = 2001)]
        points: usize,
        #[arg(long, default_value_t = 4)]
        n_min: u32,
        #[arg(long, default_value_t = 6)]
        n_max: u32,
    },
}

/// A failed check, as opposed to an error.
struct CheckFailure(String);

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(CheckFailure(msg))) => {
            eprintln!("{msg}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            let config = e
                .downcast_ref::<Error>()
                .is_some_and(|e| matches!(e, Error::Config(_) | Error::Domain(_)));
            ExitCode::from(if config { 2 } else { 1 })
        }
    }
}

fn config(g: &Global) -> anyhow::Result<RunConfig> {
    let cfg = RunConfig {
        rho: g.rho,
        p: g.p,
        allow_small_p: g.allow_small_p,
        precision_bits: g.precision_bits,
        format: match g.format {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        },
        seed: g.seed,
        ..RunConfig::default()
    };
    cfg.validate()?;
    Ok(cfg)
}

fn load_phases(g: &Global, cfg: &RunConfig) -> anyhow::Result<Phases> {
    let model = cfg.model()?;
    match &g.phases {
        None => Ok(Phases::new(&model, PhaseSource::Zero)?),
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
            Ok(Phases::from_json(&model, &text)?)
        }
    }
}

fn emit(g: &Global, csv: Option<Table>, json: serde_json::Value) -> anyhow::Result<()> {
    let mut out: Box<dyn Write> = match &g.output {
        Some(p) => Box::new(std::fs::File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => Box::new(std::io::stdout().lock()),
    };
    match (g.format, csv) {
        (Format::Csv, Some(t)) => t.write_csv(&mut out)?,
        _ => {
            serde_json::to_writer_pretty(&mut out, &json)?;
            writeln!(out)?;
        }
    }
    out.flush()?;
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<Option<CheckFailure>> {
    let g = &cli.global;
    let cfg = config(g)?;
    let model = cfg.model()?;
    match cli.command {
        Command::Resonances { j_max, n_max } => {
            let rows = silversplit::resonances::resonance_table(&model, j_max, n_max)?;
            let mut t = Table::new(["j", "n", "k", "norm", "gamma", "gamma_tilde", "primitive"]);
            for r in &rows {
                t.push(vec![
                    r.j.to_string(),
                    r.n.to_string(),
                    format!("{},{}", r.k1, r.k2),
                    r.norm.to_string(),
                    num(r.gamma),
                    num(r.gamma_tilde),
                    r.primitive.to_string(),
                ]);
            }
            emit(g, Some(t), serde_json::to_value(&rows)?)?;
        }
        Command::Dominance { eps, depth } => {
            let d = dominance(&model, &cfg)?;
            let p = d.profile(eps, cfg.mu(eps), depth)?;
            emit(g, Some(profile_table(&[p.clone()], depth)), serde_json::to_value(&p)?)?;
        }
        Command::Sweep { eps_min, eps_max, points, log, depth } => {
            let grid = if log {
                log_grid(eps_min, eps_max, points)?
            } else {
                linear_grid(eps_min, eps_max, points)?
            };
            let d = dominance(&model, &cfg)?;
            let profiles = d.profiles(&grid, cfg.p, depth)?;
            emit(g, Some(profile_table(&profiles, depth)), serde_json::to_value(&profiles)?)?;
        }
        Command::CriticalPoints { eps, grid } => {
            let phases = load_phases(g, &cfg)?;
            let sm = build_model(&model, eps, cfg.mu(eps), &phases)?;
            let opts = SolverOptions { grid, ..SolverOptions::default() };
            let sol = solve_full_critical_points(&model, &sm, &phases, &opts)?;
            let point = SweepPoint {
                eps,
                n: sm.n,
                q: sm.q,
                q_tilde: sm.q_tilde,
                d_tau: sm.d_tau,
                d_tau1: sm.d_tau1,
                e_plus: sm.transversality.e_plus,
                e_minus: sm.transversality.e_minus,
                e_star: sm.transversality.e_star,
                ln_eta: sm.ln_eta,
                ln_eta_bar: sm.ln_eta_bar,
                ln_mu: cfg.mu(eps).ln(),
                ln_max_gradient: None,
                points: sol.points.clone(),
                flags: sol.flags.clone(),
            };
            emit(
                g,
                Some(points_table(&[point])),
                serde_json::json!({ "model": sm, "solution": sol }),
            )?;
            let bad = sol.bifurcation_flags().count();
            if bad > 0 {
                return Ok(Some(CheckFailure(format!("{bad} bifurcation flags at eps = {eps}"))));
            }
        }
        Command::Continue { eps_min, eps_max, points } => {
            let phases = load_phases(g, &cfg)?;
            let (worst, ok) = phases.check_phase_condition(&model, 40)?;
            if !ok {
                eprintln!("warning: primary phases violate |dtau| < 2 pi / 3 (max {worst:.4}); continuing");
            }
            let opts = ContinuationOptions { points, p: cfg.p, ..ContinuationOptions::default() };
            let rep = continuation_sweep(&model, eps_min, eps_max, &phases, &opts)?;
            emit(g, Some(points_table(&rep.grid)), serde_json::to_value(&rep)?)?;
            eprintln!(
                "branches {}, refinements {}, bifurcation flags {}, min E* {:.4}, c1 {:.3}, c2 {:.3}",
                rep.branches,
                rep.refinements,
                rep.bifurcation_flags(),
                rep.min_e_star,
                rep.min_c1,
                rep.max_c2
            );
            if rep.bifurcation_flags() > 0 || rep.branches != 4 {
                return Ok(Some(CheckFailure("continuation lost or flagged a branch".into())));
            }
        }
        Command::Oracle { eps, samples, tolerance } => {
            let phases = load_phases(g, &cfg)?;
            let rows = silversplit::melnikov::oracle_samples(&model, eps, &phases, samples, cfg.seed)?;
            let mut t = Table::new(["theta1", "theta2", "series", "quadrature", "rel_err"]);
            for r in &rows {
                t.push([r.theta[0], r.theta[1], r.series, r.quadrature, r.rel_err].iter().map(|&x| num(x)).collect());
            }
            emit(g, Some(t), serde_json::to_value(&rows)?)?;
            let worst = rows.iter().map(|r| r.rel_err).fold(0.0, f64::max);
            if !(worst < tolerance) {
                return Ok(Some(CheckFailure(format!("max relative error {worst:.3e} >= {tolerance:e}"))));
            }
        }
        Command::Verify { only, report } => {
            let ids: Vec<u32> = if only.is_empty() { ALL_CHECKS.to_vec() } else { only };
            let v = Verifier::new(cfg.clone())?;
            let mut results = Vec::new();
            for &id in &ids {
                let r = v.run(id);
                if matches!(g.format, Format::Csv) {
                    println!("{}", r.line());
                }
                results.push(r);
            }
            let mut rep = v.report(&[]);
            rep.all_passed = results.iter().all(|r| r.passed);
            rep.checks = results;
            let json = serde_json::to_value(&rep)?;
            if let Some(path) = report {
                std::fs::write(&path, serde_json::to_string_pretty(&json)?)
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            if matches!(g.format, Format::Json) {
                emit(g, None, json)?;
            }
            if !rep.all_passed {
                let failed: Vec<String> = rep.checks.iter().filter(|c| !c.passed).map(|c| c.id.to_string()).collect();
                return Ok(Some(CheckFailure(format!("failed checks: {}", failed.join(", ")))));
            }
        }
        Command::FigureData { which, eps_min, eps_max, points, n_min, n_max } => {
            let half = 2.0 * model.lambda_f64().ln();
            let c = eps_hat(&model, 5);
            let lo = eps_min.unwrap_or(c * (-half).exp());
            let hi = eps_max.unwrap_or(c * half.exp());
            let stars = StarTable::new(&model, 50)?;
            let fig = match which {
                Figure::HCurves => silversplit::figures::h_curves(&model, &stars, lo, hi, points)?,
                Figure::GkCurves => silversplit::figures::gk_curves(&model, &stars, lo, hi, points, n_min..=n_max)?,
            };
            let mut t = Table::new(fig.columns.iter().map(String::as_str));
            for r in &fig.rows {
                t.push(r.iter().map(|&x| num(x)).collect());
            }
            emit(g, Some(t), serde_json::to_value(&fig)?)?;
        }
    }
    Ok(None)
}

fn dominance(model: &silversplit::FrequencyModel, cfg: &RunConfig) -> anyhow::Result<Dominance> {
    let mut d = Dominance::new(model)?;
    d.precision_bits = cfg.precision_bits;
    Ok(d)
}

fn linear_grid(lo: f64, hi: f64, points: usize) -> anyhow::Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo && points > 0) {
        return Err(Error::Config(format!("bad grid [{lo}, {hi}] with {points} points")).into());
    }
    if points == 1 {
        return Ok(vec![lo]);
    }
    Ok((0..points).map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64).collect())
}

fn profile_table(profiles: &[DominanceProfile], depth: usize) -> Table {
    let mut head = vec!["eps".to_string(), "n".to_string()];
    for prefix in ["h", "S", "ln_L_S"] {
        for i in 1..=depth {
            head.push(format!("{prefix}{i}"));
        }
    }
    let mut t = Table::new(head.iter().map(String::as_str));
    for p in profiles {
        let mut row = vec![num(p.eps), p.n_interval.to_string()];
        row.extend(p.ranked.iter().map(|r| num(r.h)));
        row.extend(p.ranked.iter().map(|r| r.k.to_string()));
        row.extend(p.ranked.iter().map(|r| num(r.ln_l)));
        t.push(row);
    }
    t
}

fn points_table(grid: &[SweepPoint]) -> Table {
    let mut head: Vec<String> = ["eps", "n", "Q", "Qt", "dtau", "dtau1", "Eplus", "Eminus", "Estar"]
        .map(String::from)
        .to_vec();
    for j in 1..=4 {
        for c in ["theta1", "theta2", "ln_abs_det", "ln_m_star", "flag"] {
            head.push(format!("{c}_{j}"));
        }
    }
    head.push("flags".into());
    let mut t = Table::new(head.iter().map(String::as_str));
    for s in grid {
        let mut row: Vec<String> = [s.eps, s.n as f64, s.q, s.q_tilde, s.d_tau, s.d_tau1, s.e_plus, s.e_minus, s.e_star]
            .iter()
            .map(|&x| num(x))
            .collect();
        row[1] = s.n.to_string();
        for j in 0..4 {
            match s.points.get(j) {
                Some(p) => {
                    row.push(num(p.theta[0]));
                    row.push(num(p.theta[1]));
                    row.push(num(p.eigen.ln_abs_det));
                    row.push(num(p.eigen.ln_m_star));
                    let degenerate = p.scaled_det.abs() < SolverOptions::default().degenerate_det;
                    row.push(if degenerate { "near-degenerate" } else { "ok" }.to_string());
                }
                None => row.extend(std::iter::repeat(String::new()).take(4).chain(["missing".to_string()])),
            }
        }
        let flags: Vec<String> = s
            .flags
            .iter()
            .map(|f| serde_json::to_value(f).ok().and_then(|v| v["kind"].as_str().map(String::from)).unwrap_or_default())
            .collect();
        row.push(flags.join(";"));
        t.push(row);
    }
    t
}
