//! Convergence-study campaigns: pair scheme runs with spectral references,
//! measure max-norm errors over a mesh-refinement ladder, fit convergence
//! orders, and render the result as CSV or markdown tables.
//!
//! Thirteen bundled presets reproduce the reference experiment grid:
//! presets 1–6 advect with a constant field (4–6 with the cubic relaxation
//! choice), 7–10 with the cosine field, and 11–13 compare long-time
//! stationary states at increasing velocity.

use crate::equiv_pde::{cubic_sigma_prime, pde_coefficients};
use crate::lbm::{run_fixed, run_unsteady, EquilibriumSpec, InitOrder};
use crate::params::{relaxation_rate, SchemeParams, VelocityProfile};
use crate::spectral::{
    assemble_a, assemble_a_infinity, default_mode_count, evolve, project_initial,
    solve_stationary, synthesize_at_mesh, Basis, BasisKind, ProfileSpec, SpectralState,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("density has {lbm} sites but the mesh has {mesh}")]
    LengthMismatch { lbm: usize, mesh: usize },
    #[error("convergence fit needs at least 3 points, got {0}")]
    TooFewPoints(usize),
    #[error("convergence fit needs positive errors, got {0}")]
    NonPositiveError(f64),
    #[error("preset index {0} outside 1..=13")]
    UnknownPreset(usize),
    #[error("config: {0}")]
    Config(String),
}

/// One table column: which equivalent equation to compare against and how
/// the scheme is initialised for it.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
pub struct ColumnSpec {
    pub pde_order: usize,
    pub init_order: u8,
}

/// Full description of a convergence study.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StudyConfig {
    pub label: String,
    pub profile: VelocityProfile,
    pub u_amp: f64,
    pub alpha: f64,
    /// Momentum relaxation, given either as a rate `s` or as `sigma`.
    pub s: Option<f64>,
    pub sigma: Option<f64>,
    /// Energy relaxation: a rate, a `sigma'`, or the cubic choice.
    pub s_prime: Option<f64>,
    pub sigma_prime: Option<f64>,
    #[serde(default)]
    pub cubic: bool,
    pub n_list: Vec<usize>,
    pub columns: Vec<ColumnSpec>,
    /// Finite horizon; absent for stationary studies.
    pub t_final: Option<f64>,
    pub rho0: ProfileSpec,
    #[serde(default)]
    pub modes: Option<usize>,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    #[serde(default = "default_length")]
    pub length: f64,
    /// Horizon for stationary runs, in units of the diffusion time
    /// `1/(kappa k^2)`; 25 leaves the remaining transient far below every
    /// table cell.
    #[serde(default = "default_stationary_efolds")]
    pub stationary_efolds: f64,
}

fn default_lambda() -> f64 {
    1.0
}

fn default_length() -> f64 {
    1.0
}

fn default_stationary_efolds() -> f64 {
    25.0
}

impl StudyConfig {
    pub fn is_stationary(&self) -> bool {
        self.t_final.is_none()
    }

    fn resolve_sigma(&self) -> Result<f64, HarnessError> {
        match (self.sigma, self.s) {
            (Some(sg), None) => Ok(sg),
            (None, Some(s)) => {
                crate::params::henon(s).map_err(|e| HarnessError::Config(e.to_string()))
            }
            _ => Err(HarnessError::Config("give exactly one of `s`, `sigma`".into())),
        }
    }

    fn resolve_sigma_prime(&self, sigma: f64) -> Result<f64, HarnessError> {
        match (self.cubic, self.sigma_prime, self.s_prime) {
            (true, None, None) => cubic_sigma_prime(self.u_amp, self.alpha, sigma)
                .map_err(|e| HarnessError::Config(e.to_string())),
            (false, Some(sp), None) => Ok(sp),
            (false, None, Some(s)) => {
                crate::params::henon(s).map_err(|e| HarnessError::Config(e.to_string()))
            }
            _ => Err(HarnessError::Config(
                "give exactly one of `s_prime`, `sigma_prime`, `cubic = true`".into(),
            )),
        }
    }

    /// Scheme parameters for one rung of the refinement ladder.
    pub fn params_for(&self, n: usize) -> Result<SchemeParams, HarnessError> {
        let sigma = self.resolve_sigma()?;
        let sigma_prime = self.resolve_sigma_prime(sigma)?;
        SchemeParams::new(
            self.lambda,
            self.u_amp,
            self.alpha,
            relaxation_rate(sigma),
            relaxation_rate(sigma_prime),
            n,
            self.length,
            self.t_final.unwrap_or(0.0),
        )
        .map_err(|e| HarnessError::Config(e.to_string()))
    }
}

/// Errors and fitted orders of a completed study.
#[derive(Debug, Clone)]
pub struct ConvergenceReport {
    pub config: StudyConfig,
    /// `cells[row][col]`, rows following `n_list`, columns `columns`.
    pub cells: Vec<Vec<Result<f64, String>>>,
    /// Fitted order per column (absent when the fit was impossible).
    pub fitted: Vec<Option<f64>>,
}

/// Max-norm distance between a mesh density and a spectral state sampled
/// at the same sites.
pub fn max_norm_error(lbm_density: &[f64], state: &SpectralState, n: usize) -> Result<f64, HarnessError> {
    if lbm_density.len() != n {
        return Err(HarnessError::LengthMismatch { lbm: lbm_density.len(), mesh: n });
    }
    let reference = synthesize_at_mesh(state, n);
    Ok(lbm_density
        .iter()
        .zip(&reference)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

/// Least-squares convergence order: the negated slope of `log2(err)`
/// against `log2(N)`.
pub fn fit_convergence_order(points: &[(usize, f64)]) -> Result<f64, HarnessError> {
    if points.len() < 3 {
        return Err(HarnessError::TooFewPoints(points.len()));
    }
    for &(_, e) in points {
        if !(e > 0.0) {
            return Err(HarnessError::NonPositiveError(e));
        }
    }
    let xs: Vec<f64> = points.iter().map(|&(n, _)| (n as f64).log2()).collect();
    let ys: Vec<f64> = points.iter().map(|&(_, e)| e.log2()).collect();
    let m = xs.len() as f64;
    let xm = xs.iter().sum::<f64>() / m;
    let ym = ys.iter().sum::<f64>() / m;
    let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xm) * (y - ym)).sum();
    let den: f64 = xs.iter().map(|x| (x - xm) * (x - xm)).sum();
    Ok(-num / den)
}

/// Fixed stationary horizon in steps: `efolds` diffusion times.
///
/// A per-step-change tolerance `tol` stops at distance `tol/(1-mu)` from
/// the limit, which at fine meshes exceeds the fourth-order table cells;
/// a fixed horizon leaves only an exponentially small transient and is
/// deterministic.
fn stationary_steps(p: &SchemeParams, alpha: f64, efolds: f64) -> usize {
    let kappa = crate::modes::kappa(p, alpha);
    (efolds / (kappa * p.k * p.k * p.dt)).ceil() as usize
}

/// Runs every `(N, column)` cell of a study and fits the per-column orders.
pub fn run_study(config: &StudyConfig) -> ConvergenceReport {
    let eq = EquilibriumSpec { profile: config.profile, alpha: config.alpha };
    let rows: Vec<Vec<Result<f64, String>>> = config
        .n_list
        .par_iter()
        .map(|&n| run_row(config, &eq, n))
        .collect();
    let fitted = (0..config.columns.len())
        .map(|col| {
            let pts: Vec<(usize, f64)> = config
                .n_list
                .iter()
                .zip(&rows)
                .filter_map(|(&n, row)| row[col].as_ref().ok().map(|&e| (n, e)))
                .collect();
            fit_convergence_order(&pts).ok()
        })
        .collect();
    ConvergenceReport { config: config.clone(), cells: rows, fitted }
}

fn run_row(config: &StudyConfig, eq: &EquilibriumSpec, n: usize) -> Vec<Result<f64, String>> {
    let params = match config.params_for(n) {
        Ok(p) => p,
        Err(e) => return vec![Err(e.to_string()); config.columns.len()],
    };
    let modes = config.modes.unwrap_or_else(|| default_mode_count(n));
    let coeffs = pde_coefficients(&params);
    let basis = Basis { kind: BasisKind::for_profile(config.profile), modes, k: params.k };
    let rho_hat = project_initial(&config.rho0, basis);

    if config.is_stationary() {
        let steps = stationary_steps(&params, config.alpha, config.stationary_efolds);
        let lbm = run_fixed(&config.rho0, eq, &params, steps).rho;
        config
            .columns
            .iter()
            .map(|col| {
                let a_inf = assemble_a_infinity(col.pde_order, &coeffs, modes, config.profile, &params);
                let state = solve_stationary(&a_inf, params.length).map_err(|e| e.to_string())?;
                max_norm_error(&lbm, &state, n).map_err(|e| e.to_string())
            })
            .collect()
    } else {
        let steps = params.steps_to(config.t_final.unwrap_or(0.0));
        // one scheme run per distinct initialisation order
        let mut init_orders: Vec<u8> = config.columns.iter().map(|c| c.init_order).collect();
        init_orders.sort_unstable();
        init_orders.dedup();
        let lbm_by_init: Vec<(u8, Result<Vec<f64>, String>)> = init_orders
            .iter()
            .map(|&io| {
                let order = InitOrder::from_index(io)
                    .ok_or_else(|| format!("initialisation order {io} outside 0..=2"));
                let rho = order.map(|o| run_unsteady(&config.rho0, o, eq, &params).rho);
                (io, rho)
            })
            .collect();
        config
            .columns
            .iter()
            .map(|col| {
                let lbm = lbm_by_init
                    .iter()
                    .find(|(io, _)| *io == col.init_order)
                    .map(|(_, r)| r.clone())
                    .unwrap()?;
                let a = assemble_a(col.pde_order, &coeffs, modes, config.profile, &params);
                let state = evolve(&a, params.dt, steps, &rho_hat);
                max_norm_error(&lbm, &state, n).map_err(|e| e.to_string())
            })
            .collect()
    }
}

// ---------------------------------------------------------------------------
// Table rendering.
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Csv,
    Markdown,
}

/// Renders a report with four significant digits per error cell and two
/// decimals on fitted orders; byte-deterministic for a given report.
pub fn emit_table(report: &ConvergenceReport, format: TableFormat) -> String {
    let cols = &report.config.columns;
    let mut out = String::new();
    let cell = |r: &Result<f64, String>| match r {
        Ok(e) => format!("{e:.3e}"),
        Err(_) => "failed".to_string(),
    };
    match format {
        TableFormat::Csv => {
            out.push_str("mesh_points");
            for c in cols {
                out.push_str(&format!(",order{}_init{}", c.pde_order, c.init_order));
            }
            out.push('\n');
            for (i, &n) in report.config.n_list.iter().enumerate() {
                out.push_str(&n.to_string());
                for r in &report.cells[i] {
                    out.push(',');
                    out.push_str(&cell(r));
                }
                out.push('\n');
            }
            out.push_str("fitted_order");
            for f in &report.fitted {
                out.push(',');
                match f {
                    Some(v) => out.push_str(&format!("{v:.2}")),
                    None => out.push_str("n/a"),
                }
            }
            out.push('\n');
        }
        TableFormat::Markdown => {
            out.push_str("| mesh points \\ equation order |");
            for c in cols {
                out.push_str(&format!(" {} |", c.pde_order));
            }
            out.push_str("\n|---|");
            for _ in cols {
                out.push_str("---|");
            }
            out.push('\n');
            out.push_str("| initialization order |");
            for c in cols {
                out.push_str(&format!(" {} |", c.init_order));
            }
            out.push('\n');
            for (i, &n) in report.config.n_list.iter().enumerate() {
                out.push_str(&format!("| {n} |"));
                for r in &report.cells[i] {
                    out.push_str(&format!(" {} |", cell(r)));
                }
                out.push('\n');
            }
            out.push_str("| convergence order |");
            for f in &report.fitted {
                match f {
                    Some(v) => out.push_str(&format!(" {v:.2} |")),
                    None => out.push_str(" n/a |"),
                }
            }
            out.push('\n');
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Bundled presets.
// ---------------------------------------------------------------------------

const PRESETS_TOML: &str = include_str!("presets.toml");

#[derive(Deserialize)]
struct PresetFile {
    table: Vec<StudyConfig>,
}

/// The bundled study presets (indices 1..=13).
pub fn table_preset(index: usize) -> Result<StudyConfig, HarnessError> {
    let file: PresetFile =
        toml::from_str(PRESETS_TOML).expect("bundled preset manifest must parse");
    file.table
        .into_iter()
        .nth(index.wrapping_sub(1))
        .ok_or(HarnessError::UnknownPreset(index))
}

/// Number of bundled presets.
pub fn preset_count() -> usize {
    let file: PresetFile =
        toml::from_str(PRESETS_TOML).expect("bundled preset manifest must parse");
    file.table.len()
}
