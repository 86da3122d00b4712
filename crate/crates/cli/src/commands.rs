//! Command implementations: each produces a Dataset from a RunConfig.

use crate::config::RunConfig;
use crate::dataset::{Cell, Dataset};
use hexaspec_core::edge_solver::dirichlet_spectrum_scan;
use hexaspec_core::graphene::{
    brillouin_to_cartesian, dirac_scan, fermi_classify, solve_sheets_with_table, Quasimomentum,
};
use hexaspec_core::lyapunov::{lyapunov_table, real_line_band_structure, LyapunovTable};
use hexaspec_core::perturbation::{
    assemble_m_eps, perturbed_delta, PerturbationConfig,
};
use hexaspec_core::potential::PeriodicPotential;
use hexaspec_core::validation;
use hexaspec_core::SpectralError;
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Bands,
    Surface,
    Dirac,
    Fermi,
    Perturb,
    Validate,
}

impl CommandKind {
    pub fn name(&self) -> &'static str {
        match self {
            CommandKind::Bands => "bands",
            CommandKind::Surface => "surface",
            CommandKind::Dirac => "dirac",
            CommandKind::Fermi => "fermi",
            CommandKind::Perturb => "perturb",
            CommandKind::Validate => "validate",
        }
    }
}

#[derive(Debug)]
pub enum CommandError {
    Numeric(SpectralError),
    /// `validate` found failing invariants; dataset still produced.
    ValidationFailed(usize),
}

impl std::fmt::Display for CommandError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CommandError::Numeric(e) => write!(f, "numerical failure: {e}"),
            CommandError::ValidationFailed(n) => write!(f, "{n} invariant check(s) failed"),
        }
    }
}

impl std::error::Error for CommandError {}

impl From<SpectralError> for CommandError {
    fn from(e: SpectralError) -> Self {
        CommandError::Numeric(e)
    }
}

pub struct CommandOutcome {
    pub dataset: Dataset,
    /// Set for `validate` when checks failed; the caller exits nonzero.
    pub failure: Option<CommandError>,
}

pub fn run_command(kind: CommandKind, cfg: &RunConfig) -> Result<CommandOutcome, CommandError> {
    let q = PeriodicPotential::new(cfg.potential.cosine.clone())?;
    let dataset = match kind {
        CommandKind::Bands => bands(&q, cfg)?,
        CommandKind::Surface => surface(&q, cfg)?,
        CommandKind::Dirac => dirac(&q, cfg)?,
        CommandKind::Fermi => fermi(&q, cfg)?,
        CommandKind::Perturb => perturb(&q, cfg)?,
        CommandKind::Validate => {
            let checks = validation::run_all();
            let failed = checks.iter().filter(|c| !c.passed).count();
            let mut ds = Dataset::new(vec!["check", "status", "detail"]);
            for c in &checks {
                ds.push(vec![
                    Cell::Str(c.name.to_string()),
                    Cell::Str(if c.passed { "pass" } else { "fail" }.to_string()),
                    Cell::Str(c.detail.clone()),
                ]);
            }
            return Ok(CommandOutcome {
                dataset: ds,
                failure: (failed > 0).then_some(CommandError::ValidationFailed(failed)),
            });
        }
    };
    Ok(CommandOutcome { dataset, failure: None })
}

fn bands(q: &PeriodicPotential, cfg: &RunConfig) -> Result<Dataset, CommandError> {
    let tol = cfg.tolerances.integrator;
    let window = (cfg.lambda.min, cfg.lambda.max);
    let bs = real_line_band_structure(q, window, cfg.lambda.grid, tol)?;
    let flats: Vec<f64> = dirichlet_spectrum_scan(q, cfg.lambda.max, cfg.lambda.grid, tol)?
        .into_iter()
        .filter(|&x| x >= cfg.lambda.min)
        .collect();

    #[derive(Clone)]
    enum Row {
        Band(hexaspec_core::SpectralBand),
        Flat(f64),
    }
    let mut rows: Vec<Row> = bs.bands.iter().copied().map(Row::Band).collect();
    rows.extend(flats.into_iter().map(Row::Flat));
    rows.sort_by(|a, b| {
        let key = |r: &Row| match r {
            Row::Band(band) => (band.lo, 0u8),
            Row::Flat(x) => (*x, 1u8),
        };
        let (ka, kb) = (key(a), key(b));
        ka.0.total_cmp(&kb.0).then(ka.1.cmp(&kb.1))
    });

    let mut ds = Dataset::new(vec!["kind", "lo", "hi", "multiplicity", "edge_kind_lo", "edge_kind_hi"]);
    for row in rows {
        match row {
            Row::Band(b) => ds.push(vec![
                Cell::from("band"),
                Cell::Num(b.lo),
                Cell::Num(b.hi),
                Cell::Str(b.multiplicity.to_string()),
                Cell::from(b.edge_lo.as_str()),
                Cell::from(b.edge_hi.as_str()),
            ]),
            Row::Flat(x) => ds.push(vec![
                Cell::from("flat"),
                Cell::Num(x),
                Cell::Num(x),
                Cell::from("inf"),
                Cell::from("flat"),
                Cell::from("flat"),
            ]),
        }
    }
    Ok(ds)
}

fn theta_axis(points: usize) -> Vec<f64> {
    let pi = std::f64::consts::PI;
    (0..points).map(|i| -pi + 2.0 * pi * i as f64 / (points - 1) as f64).collect()
}

fn surface(q: &PeriodicPotential, cfg: &RunConfig) -> Result<Dataset, CommandError> {
    let tol = cfg.tolerances.integrator;
    let table = lyapunov_table(q, (cfg.lambda.min, cfg.lambda.max), cfg.lambda.grid, tol)?;
    let axis = theta_axis(cfg.theta.grid);

    let per_theta: Vec<Vec<Vec<Cell>>> = axis
        .par_iter()
        .map(|&t1| {
            let mut rows = Vec::new();
            for &t2 in &axis {
                let theta = Quasimomentum::new(t1, t2);
                let (k1, k2) = brillouin_to_cartesian(theta);
                let Ok(mut sheets) = solve_sheets_with_table(q, theta, &table, tol) else {
                    continue;
                };
                sheets.sort_by(|a, b| {
                    sheet_index(a.branch, a.sign)
                        .cmp(&sheet_index(b.branch, b.sign))
                        .then(a.lambda.total_cmp(&b.lambda))
                });
                for s in sheets {
                    rows.push(vec![
                        Cell::Num(t1),
                        Cell::Num(t2),
                        Cell::Num(k1),
                        Cell::Num(k2),
                        Cell::Int(sheet_index(s.branch, s.sign)),
                        Cell::Num(s.lambda),
                    ]);
                }
            }
            rows
        })
        .collect();

    let mut ds = Dataset::new(vec!["theta1", "theta2", "k1", "k2", "sheet_index", "lambda"]);
    for block in per_theta {
        for row in block {
            ds.push(row);
        }
    }
    Ok(ds)
}

/// (branch, sign) ↦ stable sheet index: (1,+)→0, (1,−)→1, (2,+)→2, (2,−)→3.
fn sheet_index(branch: u8, sign: i8) -> i64 {
    ((branch - 1) as i64) * 2 + if sign < 0 { 1 } else { 0 }
}

fn dirac(q: &PeriodicPotential, cfg: &RunConfig) -> Result<Dataset, CommandError> {
    let tol = cfg.tolerances.integrator;
    let points = dirac_scan(q, (cfg.lambda.min, cfg.lambda.max), cfg.lambda.grid, tol)?;
    let mut ds = Dataset::new(vec!["theta1_star", "theta2_star", "lambda_star", "branch", "cone_type"]);
    for p in points {
        ds.push(vec![
            Cell::Num(p.theta_star.theta1),
            Cell::Num(p.theta_star.theta2),
            Cell::Num(p.lambda_star),
            Cell::Int(p.branch as i64),
            Cell::from(p.cone_type.as_str()),
        ]);
    }
    Ok(ds)
}

fn fermi(q: &PeriodicPotential, cfg: &RunConfig) -> Result<Dataset, CommandError> {
    let tol = cfg.tolerances.integrator;
    let n = cfg.lambda.grid;
    let lambdas: Vec<f64> =
        (0..=n).map(|i| cfg.lambda.min + (cfg.lambda.max - cfg.lambda.min) * i as f64 / n as f64).collect();
    let classes: Vec<Option<&'static str>> = lambdas
        .par_iter()
        .map(|&lam| fermi_classify(q, lam, tol).ok().map(|c| c.as_str()))
        .collect();
    let mut ds = Dataset::new(vec!["lambda", "class"]);
    for (lam, class) in lambdas.iter().zip(classes) {
        if let Some(c) = class {
            ds.push(vec![Cell::Num(*lam), Cell::from(c)]);
        }
    }
    Ok(ds)
}

fn perturb(q: &PeriodicPotential, cfg: &RunConfig) -> Result<Dataset, CommandError> {
    let tol = cfg.tolerances.integrator;
    let root_tol = cfg.tolerances.root;
    let pert = PerturbationConfig::new(cfg.perturbation.epsilon, cfg.perturbation.c1)?;
    let table = lyapunov_table(q, (cfg.lambda.min, cfg.lambda.max), cfg.lambda.grid, tol)?;
    let axis = theta_axis(cfg.theta.grid);

    let per_theta: Vec<Vec<Vec<Cell>>> = axis
        .par_iter()
        .map(|&t1| {
            let mut rows = Vec::new();
            for &t2 in &axis {
                let theta = Quasimomentum::new(t1, t2);
                let Ok(seeds) = solve_sheets_with_table(q, theta, &table, tol) else {
                    continue;
                };
                for seed in seeds {
                    let exact = refine_near_seed(seed.lambda, &table, root_tol, |lam| {
                        assemble_m_eps(q, lam, theta, &pert, tol).map(|a| a.determinant.re).ok()
                    });
                    let model = refine_near_seed(seed.lambda, &table, root_tol, |lam| {
                        perturbed_delta(q, lam, theta, &pert, tol).ok().and_then(|p| {
                            let c = hexaspec_core::graphene::s0_norm(theta) / 3.0;
                            let d = if seed.branch == 1 { p.delta1_eps } else { p.delta2_eps };
                            d.map(|d| d - seed.sign as f64 * c)
                        })
                    });
                    if let (Some(le), Some(lm)) = (exact, model) {
                        rows.push(vec![
                            Cell::Num(t1),
                            Cell::Num(t2),
                            Cell::Num(le),
                            Cell::Num(lm),
                            Cell::Num((le - lm).abs()),
                        ]);
                    }
                }
            }
            rows
        })
        .collect();

    let mut ds = Dataset::new(vec!["theta1", "theta2", "lambda_exact", "lambda_first_order", "discrepancy"]);
    for block in per_theta {
        for row in block {
            ds.push(row);
        }
    }
    Ok(ds)
}

/// Refine a root of `f` near an unperturbed seed: expand a bracket over
/// a few table cells around the seed, then bisect. Returns None when no
/// sign change materializes (the root left the neighborhood).
fn refine_near_seed(
    seed: f64,
    table: &LyapunovTable,
    root_tol: f64,
    f: impl Fn(f64) -> Option<f64>,
) -> Option<f64> {
    let lambdas = &table.lambdas;
    let n = lambdas.len();
    let h = (lambdas[n - 1] - lambdas[0]) / (n - 1) as f64;
    let fval = |x: f64| f(x).unwrap_or(f64::NAN);
    for cells in [1usize, 2, 4, 8] {
        let a = (seed - cells as f64 * h).max(lambdas[0]);
        let b = (seed + cells as f64 * h).min(lambdas[n - 1]);
        if b <= a {
            continue;
        }
        let m = 8 * cells;
        let xs: Vec<f64> = (0..=m).map(|i| a + (b - a) * i as f64 / m as f64).collect();
        let vs: Vec<f64> = xs.iter().map(|&x| fval(x)).collect();
        let mut best: Option<f64> = None;
        for i in 0..m {
            if vs[i].is_finite() && vs[i + 1].is_finite() && vs[i] != 0.0 && (vs[i] > 0.0) != (vs[i + 1] > 0.0) {
                let r = hexaspec_core::rootscan::refine_bracket(
                    |x| fval(x),
                    xs[i],
                    xs[i + 1],
                    vs[i],
                    vs[i + 1],
                    root_tol,
                );
                if best.map_or(true, |p: f64| (r - seed).abs() < (p - seed).abs()) {
                    best = Some(r);
                }
            }
        }
        if best.is_some() {
            return best;
        }
    }
    None
}
