//! Global iteration-matrix eigenmode analysis.
//!
//! One scheme step is a linear map on the stacked particle state
//! `(f+, f0, f-)` of all sites; its matrix has the conserved-mass family at
//! eigenvalue one, and the leading remaining eigenvalue `mu` sets the slow
//! relaxation. The scaled value `Gamma = -ln(mu) / (dt kappa k^2)`, with
//! `kappa = lambda dx sigma (alpha+2)/3` the discrete diffusivity, equals 1
//! for the pure diffusion mode.
//!
//! Any eigenvector with nonzero total density must have eigenvalue exactly
//! one (mass is conserved), so the conservation family is excluded by its
//! mass rather than by eigenvalue distance to one: for a forced velocity
//! field the eigenvalue-one eigenvector is the stationary profile, whose
//! density is not uniform.

use crate::fields::ParticleField;
use crate::lbm::{lbm_step, EquilibriumSpec};
use crate::linalg;
use crate::params::SchemeParams;
use ndarray::Array2;
use rayon::prelude::*;
use thiserror::Error;

/// Default cap on mesh size for dense matrix builds (3N columns).
pub const DEFAULT_SITE_CAP: usize = 512;

/// Relative-mass threshold separating the conservation/stationary family
/// from genuinely decaying modes.
const MASS_EPS: f64 = 1e-8;

/// Relative threshold below which a mode counts as having no density
/// signature at all.
const ZERO_DENSITY_EPS: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum ModesError {
    #[error("mesh of {n} sites exceeds the dense-build cap of {cap}")]
    CapExceeded { n: usize, cap: usize },
    #[error("leading non-trivial eigenvalue is a complex pair {re} +/- {im} i")]
    ComplexLeadingPair { re: f64, im: f64 },
    #[error("leading non-trivial eigenvalue {0} is not positive")]
    NonPositiveLeading(f64),
    #[error("no admissible mode after excluding the conservation family")]
    NoAdmissibleMode,
    #[error("Krylov iteration did not converge after {0} restarts")]
    NotConverged(usize),
    #[error(transparent)]
    Linalg(#[from] linalg::LinalgError),
}

/// Dense one-step operator of the full scheme, `3N x 3N`.
pub struct IterationMatrix {
    pub mat: Array2<f64>,
    pub n: usize,
}

impl IterationMatrix {
    pub fn apply(&self, f: &ParticleField) -> ParticleField {
        let v = stack(f);
        let out = self.mat.dot(&ndarray::ArrayView1::from(&v[..]));
        unstack(out.as_slice().unwrap(), self.n)
    }
}

fn stack(f: &ParticleField) -> Vec<f64> {
    let mut v = Vec::with_capacity(3 * f.len());
    v.extend_from_slice(&f.f_plus);
    v.extend_from_slice(&f.f_zero);
    v.extend_from_slice(&f.f_minus);
    v
}

fn unstack(v: &[f64], n: usize) -> ParticleField {
    ParticleField {
        f_plus: v[..n].to_vec(),
        f_zero: v[n..2 * n].to_vec(),
        f_minus: v[2 * n..].to_vec(),
    }
}

/// Builds the one-step matrix column by column: column `j` is the image of
/// the `j`-th unit particle state.
pub fn build_iteration_matrix(
    p: &SchemeParams,
    eq: &EquilibriumSpec,
    cap: Option<usize>,
) -> Result<IterationMatrix, ModesError> {
    let cap = cap.unwrap_or(DEFAULT_SITE_CAP);
    if p.n > cap {
        return Err(ModesError::CapExceeded { n: p.n, cap });
    }
    let n = p.n;
    let dim = 3 * n;
    let cols: Vec<Vec<f64>> = (0..dim)
        .into_par_iter()
        .map(|j| {
            let mut v = vec![0.0; dim];
            v[j] = 1.0;
            let f = unstack(&v, n);
            stack(&lbm_step(&f, eq, p))
        })
        .collect();
    let mut mat = Array2::zeros((dim, dim));
    for (j, col) in cols.iter().enumerate() {
        for (i, &val) in col.iter().enumerate() {
            mat[[i, j]] = val;
        }
    }
    Ok(IterationMatrix { mat, n })
}

/// The slowest admissible eigenmode and its scaled decay rate.
#[derive(Debug, Clone)]
pub struct ModeResult {
    /// Per-step eigenvalue of the iteration matrix.
    pub mu_eig: f64,
    /// Continuous rate `ln(mu)/dt`.
    pub gamma_rate: f64,
    /// `-gamma_rate / (kappa k^2)`.
    pub gamma_scaled: f64,
    /// Density of the mode, unit max-norm, non-negative near `x = 0`.
    pub density: Vec<f64>,
}

/// Discrete equivalent diffusivity `kappa = lambda dx sigma (alpha+2)/3`.
pub fn kappa(p: &SchemeParams, alpha: f64) -> f64 {
    p.lambda * p.dx * p.sigma * (alpha + 2.0) / 3.0
}

/// Density component of a (possibly complex) stacked eigenvector.
struct ModeDensity {
    re: Vec<f64>,
    im: Vec<f64>,
}

impl ModeDensity {
    fn l1(&self) -> f64 {
        self.re.iter().zip(&self.im).map(|(r, i)| (r * r + i * i).sqrt()).sum()
    }

    fn mass(&self) -> f64 {
        let mr: f64 = self.re.iter().sum();
        let mi: f64 = self.im.iter().sum();
        (mr * mr + mi * mi).sqrt()
    }

    fn is_uniform(&self) -> bool {
        let n = self.re.len() as f64;
        let mr = self.re.iter().sum::<f64>() / n;
        let mi = self.im.iter().sum::<f64>() / n;
        let peak = self
            .re
            .iter()
            .zip(&self.im)
            .map(|(r, i)| ((r - mr) * (r - mr) + (i - mi) * (i - mi)).sqrt())
            .fold(0.0f64, f64::max);
        let scale = self.re.iter().zip(&self.im).map(|(r, i)| (r * r + i * i).sqrt()).fold(0.0f64, f64::max);
        peak < 1e-8 * scale
    }
}

fn density_of(re: &[f64], im: Option<&[f64]>, n: usize) -> ModeDensity {
    let mut dr = vec![0.0; n];
    let mut di = vec![0.0; n];
    for i in 0..n {
        dr[i] = re[i] + re[n + i] + re[2 * n + i];
        if let Some(im) = im {
            di[i] = im[i] + im[n + i] + im[2 * n + i];
        }
    }
    ModeDensity { re: dr, im: di }
}

/// Whether a candidate mode should be skipped: no density signature, the
/// conserved-mass family, or a uniform-density shape.
fn excluded(dens: &ModeDensity, vec_scale: f64) -> bool {
    let l1 = dens.l1();
    if l1 < ZERO_DENSITY_EPS * vec_scale {
        return true;
    }
    if dens.mass() > MASS_EPS * l1 {
        return true;
    }
    dens.is_uniform()
}

fn finish_mode(
    mu: f64,
    density: Vec<f64>,
    p: &SchemeParams,
    alpha: f64,
) -> Result<ModeResult, ModesError> {
    if mu <= 0.0 {
        return Err(ModesError::NonPositiveLeading(mu));
    }
    let gamma_rate = mu.ln() / p.dt;
    let gamma_scaled = -gamma_rate / (kappa(p, alpha) * p.k * p.k);
    // unit max-norm, sign fixed so the region around x = 0 is non-negative
    let peak = density.iter().map(|v| v.abs()).fold(0.0f64, f64::max);
    let mut density: Vec<f64> = density.iter().map(|v| v / peak).collect();
    let window = (density.len() / 16).max(1);
    let head: f64 = density[..window].iter().sum();
    if head < 0.0 {
        for v in density.iter_mut() {
            *v = -*v;
        }
    }
    Ok(ModeResult { mu_eig: mu, gamma_rate, gamma_scaled, density })
}

/// Extracts the largest-modulus eigenpair outside the conservation family
/// from the dense spectrum.
pub fn leading_nontrivial_eigen(
    a: &IterationMatrix,
    p: &SchemeParams,
    eq: &EquilibriumSpec,
) -> Result<ModeResult, ModesError> {
    let n = a.n;
    let decomp = linalg::eig(&a.mat)?;
    let mut order: Vec<usize> = (0..decomp.re.len()).collect();
    let modulus = |i: usize| (decomp.re[i] * decomp.re[i] + decomp.im[i] * decomp.im[i]).sqrt();
    order.sort_by(|&i, &j| modulus(j).partial_cmp(&modulus(i)).unwrap());
    let mut idx = 0;
    while idx < order.len() {
        let i = order[idx];
        let is_pair = decomp.im[i] != 0.0;
        let re_col = decomp.vectors.column(if decomp.im[i] < 0.0 { i - 1 } else { i });
        let re_col = re_col.as_slice().map(|s| s.to_vec()).unwrap_or_else(|| re_col.to_vec());
        let im_col: Option<Vec<f64>> = if is_pair {
            let j = if decomp.im[i] < 0.0 { i } else { i + 1 };
            Some(decomp.vectors.column(j).to_vec())
        } else {
            None
        };
        let vec_scale: f64 = re_col.iter().map(|v| v.abs()).sum::<f64>()
            + im_col.as_ref().map(|c| c.iter().map(|v| v.abs()).sum()).unwrap_or(0.0);
        let dens = density_of(&re_col, im_col.as_deref(), n);
        if excluded(&dens, vec_scale) {
            idx += 1;
            continue;
        }
        if is_pair {
            return Err(ModesError::ComplexLeadingPair { re: decomp.re[i], im: decomp.im[i].abs() });
        }
        return finish_mode(decomp.re[i], dens.re, p, eq.alpha);
    }
    Err(ModesError::NoAdmissibleMode)
}

/// Dense-path convenience: build the matrix and extract the leading mode.
pub fn leading_mode(
    p: &SchemeParams,
    eq: &EquilibriumSpec,
    cap: Option<usize>,
) -> Result<ModeResult, ModesError> {
    let a = build_iteration_matrix(p, eq, cap)?;
    leading_nontrivial_eigen(&a, p, eq)
}

// ---------------------------------------------------------------------------
// Krylov path.
// ---------------------------------------------------------------------------

/// Restarted Arnoldi extraction of the same leading mode, matrix-free.
///
/// The one-step map is applied through [`lbm_step`], so meshes beyond the
/// dense cap stay reachable. Cross-checked against the dense path in tests.
pub fn arnoldi_leading(
    p: &SchemeParams,
    eq: &EquilibriumSpec,
    krylov_dim: usize,
    max_restarts: usize,
    tol: f64,
) -> Result<ModeResult, ModesError> {
    let n = p.n;
    let dim = 3 * n;
    let m = krylov_dim.min(dim);
    // deterministic start with both symmetric and asymmetric content
    let mut v0: Vec<f64> = (0..dim)
        .map(|i| {
            let t = i as f64 / dim as f64;
            (2.0 * std::f64::consts::PI * t).sin() + 0.3 * (6.0 * std::f64::consts::PI * t).cos()
        })
        .collect();
    for restart in 0..max_restarts {
        normalize(&mut v0);
        let mut basis: Vec<Vec<f64>> = vec![v0.clone()];
        let mut h = Array2::<f64>::zeros((m + 1, m));
        let mut steps = m;
        for j in 0..m {
            let f = unstack(&basis[j], n);
            let mut w = stack(&lbm_step(&f, eq, p));
            // modified Gram-Schmidt with one re-orthogonalisation pass
            for _ in 0..2 {
                for (i, q) in basis.iter().enumerate() {
                    let c = dot(q, &w);
                    h[[i, j]] += c;
                    axpy(-c, q, &mut w);
                }
            }
            let norm = dot(&w, &w).sqrt();
            h[[j + 1, j]] = norm;
            if norm < 1e-14 {
                steps = j + 1;
                break;
            }
            for v in w.iter_mut() {
                *v /= norm;
            }
            basis.push(w);
        }
        let hm = h.slice(ndarray::s![..steps, ..steps]).to_owned();
        let ritz = linalg::eig(&hm)?;
        let mut order: Vec<usize> = (0..steps).collect();
        let modulus = |i: usize| (ritz.re[i] * ritz.re[i] + ritz.im[i] * ritz.im[i]).sqrt();
        order.sort_by(|&i, &j| modulus(j).partial_cmp(&modulus(i)).unwrap());
        let mut best_vec: Option<Vec<f64>> = None;
        for &i in &order {
            if ritz.im[i] != 0.0 {
                continue; // complex Ritz values never match the target here
            }
            let y = ritz.vectors.column(i);
            let mut v = vec![0.0; dim];
            for (j, q) in basis.iter().take(steps).enumerate() {
                axpy(y[j], q, &mut v);
            }
            let vec_scale: f64 = v.iter().map(|x| x.abs()).sum();
            let dens = density_of(&v, None, n);
            if excluded(&dens, vec_scale) {
                continue;
            }
            let residual = h[[steps, steps - 1]].abs() * y[steps - 1].abs();
            if residual < tol * modulus(i) {
                return finish_mode(ritz.re[i], dens.re, p, eq.alpha);
            }
            best_vec = Some(v);
            break;
        }
        if let Some(v) = best_vec {
            v0 = v;
        }
        if restart == max_restarts - 1 {
            return Err(ModesError::NotConverged(max_restarts));
        }
    }
    Err(ModesError::NotConverged(max_restarts))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(c: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += c * xi;
    }
}

fn normalize(v: &mut [f64]) {
    let norm = dot(v, v).sqrt();
    for x in v.iter_mut() {
        *x /= norm;
    }
}

// ---------------------------------------------------------------------------
// Parameter sweeps.
// ---------------------------------------------------------------------------

/// One cell of a `Gamma(U, N)` sweep.
pub struct GammaCell {
    pub u_amp: f64,
    pub n: usize,
    pub result: Result<ModeResult, ModesError>,
}

/// Scaled leading eigenvalue over a grid of velocities and mesh sizes;
/// per-cell failures are recorded and the sweep continues.
pub fn gamma_surface(
    base: &SchemeParams,
    eq: &EquilibriumSpec,
    u_list: &[f64],
    n_list: &[usize],
    cap: Option<usize>,
) -> Vec<GammaCell> {
    let cells: Vec<(f64, usize)> = u_list
        .iter()
        .flat_map(|&u| n_list.iter().map(move |&n| (u, n)))
        .collect();
    cells
        .into_par_iter()
        .map(|(u_amp, n)| {
            let result = SchemeParams::new(
                base.lambda, u_amp, base.alpha, base.s, base.s_prime, n, base.length, base.t_final,
            )
            .map_err(|_| ModesError::NoAdmissibleMode)
            .and_then(|p| leading_mode(&p, eq, cap));
            GammaCell { u_amp, n, result }
        })
        .collect()
}
