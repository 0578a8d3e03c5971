//! Interlaced Fourier discretisation of the equivalent PDEs.
//!
//! For the cosine velocity field, the operators in play are compositions of
//! the derivative `dx` and the multiplication `m_u` by `U cos(k x)`. Both
//! map between two interlaced trigonometric spaces:
//!
//! * the primal space (odd sines, even cosines, plus the constant):
//!   `a0, sin kx, cos 2kx, sin 3kx, cos 4kx, ...`
//! * the dual space (odd cosines, even sines):
//!   `cos kx, sin 2kx, cos 3kx, sin 4kx, ...`
//!
//! Only primal coefficients are stored; each operator word is realised as an
//! explicit product of factor matrices in its written left-to-right order,
//! the intermediate dual representation staying implicit in the factors.
//!
//! For a constant velocity field the modes decouple per wave number, and the
//! same storage is reinterpreted as (sin, cos) pairs per wave number, every
//! factor acting within the single space.

use crate::equiv_pde::PdeCoefficients;
use crate::linalg;
use crate::params::{SchemeParams, VelocityProfile};
use ndarray::Array2;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Initial density profiles representable exactly in the spectral basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum ProfileSpec {
    /// `rho0(x) = amplitude * sin(k x)`.
    Sine { amplitude: f64 },
    /// `rho0(x) = level`.
    Constant { level: f64 },
}

impl ProfileSpec {
    pub fn eval(&self, k: f64, x: f64) -> f64 {
        match *self {
            ProfileSpec::Sine { amplitude } => amplitude * (k * x).sin(),
            ProfileSpec::Constant { level } => level,
        }
    }
}

/// Which interpretation the stored coefficients carry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisKind {
    /// Interlaced storage for the cosine velocity field.
    Interlaced,
    /// (sin, cos) pairs per wave number for a constant velocity field.
    Pairs,
}

impl BasisKind {
    pub fn for_profile(profile: VelocityProfile) -> Self {
        match profile {
            VelocityProfile::Cosine => BasisKind::Interlaced,
            VelocityProfile::Constant => BasisKind::Pairs,
        }
    }
}

/// Primal holds densities; dual holds images of odd operator words.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Space {
    Primal,
    Dual,
}

/// Mode count and fundamental wave number of a truncated basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Basis {
    pub kind: BasisKind,
    pub modes: usize,
    pub k: f64,
}

/// Default truncation: 30 modes up to 128 mesh points, 60 beyond.
pub fn default_mode_count(n: usize) -> usize {
    if n <= 128 {
        30
    } else {
        60
    }
}

/// Spectral coefficients `(a0, a1..aM)`; `coeffs[0]` is the constant mode.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralState {
    pub coeffs: Vec<f64>,
    pub basis: Basis,
    pub space: Space,
}

impl SpectralState {
    pub fn zeros(basis: Basis) -> Self {
        Self { coeffs: vec![0.0; basis.modes + 1], basis, space: Space::Primal }
    }

    pub fn a0(&self) -> f64 {
        self.coeffs[0]
    }

    /// Evaluates the truncated series at a point.
    pub fn eval(&self, x: f64) -> f64 {
        let k = self.basis.k;
        match (self.basis.kind, self.space) {
            (BasisKind::Interlaced, Space::Primal) => {
                let mut v = self.coeffs[0];
                for (m, &c) in self.coeffs.iter().enumerate().skip(1) {
                    let phase = m as f64 * k * x;
                    v += c * if m % 2 == 1 { phase.sin() } else { phase.cos() };
                }
                v
            }
            (BasisKind::Interlaced, Space::Dual) => {
                let mut v = 0.0;
                for (m, &c) in self.coeffs.iter().enumerate().skip(1) {
                    let phase = m as f64 * k * x;
                    v += c * if m % 2 == 1 { phase.cos() } else { phase.sin() };
                }
                v
            }
            (BasisKind::Pairs, _) => {
                let mut v = self.coeffs[0];
                for m in 1..=self.basis.modes / 2 {
                    let phase = m as f64 * k * x;
                    v += self.coeffs[2 * m - 1] * phase.sin();
                    if 2 * m < self.coeffs.len() {
                        v += self.coeffs[2 * m] * phase.cos();
                    }
                }
                v
            }
        }
    }
}

/// Projects an initial profile onto the basis (exact for both profiles).
pub fn project_initial(rho0: &ProfileSpec, basis: Basis) -> SpectralState {
    let mut state = SpectralState::zeros(basis);
    match *rho0 {
        ProfileSpec::Sine { amplitude } => state.coeffs[1] = amplitude,
        ProfileSpec::Constant { level } => state.coeffs[0] = level,
    }
    state
}

/// Evaluates a state at the `n` mesh sites `x_i = i L / n`.
pub fn synthesize_at_mesh(state: &SpectralState, n: usize) -> Vec<f64> {
    let length = 2.0 * std::f64::consts::PI / state.basis.k;
    let dx = length / n as f64;
    (0..n).map(|i| state.eval(i as f64 * dx)).collect()
}

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("operator expects {expected:?} input, state is in {got:?}")]
    SpaceMismatch { expected: Space, got: Space },
    #[error("stationary operator is ill-conditioned (estimate {cond:.3e})")]
    IllConditioned { cond: f64 },
    #[error(transparent)]
    Linalg(#[from] linalg::LinalgError),
}

/// A truncated operator on the coefficient vector `(a0, a1..aM)`.
///
/// Row 0 (the constant-mode image) is identically zero for every
/// even-word operator: derivatives have zero mean.
#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    pub mat: Array2<f64>,
    pub basis: Basis,
    pub domain: Space,
    pub codomain: Space,
    pub label: String,
}

impl OperatorMatrix {
    /// Applies the operator to a state in the matching space.
    pub fn apply(&self, state: &SpectralState) -> Result<SpectralState, SpectralError> {
        if state.space != self.domain {
            return Err(SpectralError::SpaceMismatch { expected: self.domain, got: state.space });
        }
        let v = self.mat.dot(&ndarray::ArrayView1::from(&state.coeffs[..]));
        Ok(SpectralState { coeffs: v.to_vec(), basis: state.basis, space: self.codomain })
    }
}

// ---------------------------------------------------------------------------
// Factor matrices.
// ---------------------------------------------------------------------------

/// Factors making up operator words: the derivative and the velocity
/// multiplication.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Factor {
    Dx,
    MulU,
}

fn interlaced_dx(modes: usize, k: f64, from: Space) -> Array2<f64> {
    let mut a = Array2::zeros((modes + 1, modes + 1));
    for m in 1..=modes {
        let sign = match (from, m % 2) {
            (Space::Primal, 1) => 1.0,
            (Space::Primal, _) => -1.0,
            (Space::Dual, 1) => -1.0,
            (Space::Dual, _) => 1.0,
        };
        a[[m, m]] = sign * m as f64 * k;
    }
    a
}

fn interlaced_mul_u(modes: usize, u_amp: f64) -> Array2<f64> {
    // primal -> dual: b1 = U a0 + U/2 a2, b_m = U/2 (a_{m-1} + a_{m+1})
    let mut a = Array2::zeros((modes + 1, modes + 1));
    a[[1, 0]] = u_amp;
    if modes >= 2 {
        a[[1, 2]] = u_amp / 2.0;
    }
    for m in 2..=modes {
        if m - 1 >= 1 {
            a[[m, m - 1]] = u_amp / 2.0;
        }
        if m + 1 <= modes {
            a[[m, m + 1]] = u_amp / 2.0;
        }
    }
    a
}

fn pairs_dx(modes: usize, k: f64) -> Array2<f64> {
    let mut a = Array2::zeros((modes + 1, modes + 1));
    for m in 1..=modes / 2 {
        let mk = m as f64 * k;
        if 2 * m <= modes {
            a[[2 * m, 2 * m - 1]] = mk; // d/dx sin -> +mk cos
            a[[2 * m - 1, 2 * m]] = -mk; // d/dx cos -> -mk sin
        }
    }
    a
}

/// Matrix of a single factor together with its output space.
fn factor_matrix(f: Factor, basis: Basis, u_amp: f64, from: Space) -> (Array2<f64>, Space) {
    match basis.kind {
        BasisKind::Interlaced => match f {
            Factor::Dx => {
                let out = if from == Space::Primal { Space::Dual } else { Space::Primal };
                (interlaced_dx(basis.modes, basis.k, from), out)
            }
            Factor::MulU => {
                assert_eq!(from, Space::Primal, "velocity multiplication needs primal input");
                (interlaced_mul_u(basis.modes, u_amp), Space::Dual)
            }
        },
        BasisKind::Pairs => match f {
            Factor::Dx => (pairs_dx(basis.modes, basis.k), from),
            Factor::MulU => (Array2::eye(basis.modes + 1) * u_amp, from),
        },
    }
}

/// Builds the matrix of an operator word (factors in written order, the
/// rightmost applied first), starting from the primal space.
pub fn word_matrix(word: &[Factor], basis: Basis, u_amp: f64) -> OperatorMatrix {
    let mut space = Space::Primal;
    let mut mat = Array2::eye(basis.modes + 1);
    for &f in word.iter().rev() {
        let (fm, out) = factor_matrix(f, basis, u_amp, space);
        mat = fm.dot(&mat);
        space = out;
    }
    OperatorMatrix {
        mat,
        basis,
        domain: Space::Primal,
        codomain: space,
        label: word_label(word),
    }
}

fn word_label(word: &[Factor]) -> String {
    word.iter()
        .map(|f| match f {
            Factor::Dx => "dx",
            Factor::MulU => "mu",
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// The derivative on the primal space (`sin kx -> k cos kx` stored in the
/// dual slots; the constant mode maps to zero).
pub fn derivative_matrix(modes: usize, k: f64) -> OperatorMatrix {
    let basis = Basis { kind: BasisKind::Interlaced, modes, k };
    word_matrix(&[Factor::Dx], basis, 0.0)
}

/// Multiplication by `U cos(k x)`, primal to dual.
pub fn velocity_multiplication_matrix(modes: usize, k: f64, u_amp: f64) -> OperatorMatrix {
    let basis = Basis { kind: BasisKind::Interlaced, modes, k };
    word_matrix(&[Factor::MulU], basis, u_amp)
}

/// The advective derivative `du`: `dx . m_u` for the cosine field,
/// `U dx` for a constant field. Maps primal into primal, never touching
/// the constant mode.
pub fn du_matrix(modes: usize, k: f64, u_amp: f64, profile: VelocityProfile) -> OperatorMatrix {
    let basis = Basis { kind: BasisKind::for_profile(profile), modes, k };
    word_matrix(&[Factor::Dx, Factor::MulU], basis, u_amp)
}

// ---------------------------------------------------------------------------
// Operator assembly.
// ---------------------------------------------------------------------------

use Factor::{Dx as X, MulU as M};

/// Word tables of the evolution operator per order, with the coefficient
/// selector evaluated against [`PdeCoefficients`] (dt factors already
/// folded into the coefficients).
fn a_words(order: usize, c: &PdeCoefficients, lambda: f64) -> Vec<(f64, &'static [Factor])> {
    match order {
        1 => vec![(lambda, &[X, M][..])],
        2 => vec![(-c.mu, &[X, X][..]), (c.mu_u, &[X, M, X, M][..])],
        3 => vec![
            (c.xi_u, &[X, M, X, M, X, M][..]),
            (c.xi_xu, &[X, X, X, M][..]),
            (c.xi_ux, &[X, M, X, X][..]),
        ],
        4 => vec![
            (c.zeta_u4, &[X, M, X, M, X, M, X, M][..]),
            (c.zeta_xxuu, &[X, X, X, M, X, M][..]),
            (c.zeta_uxxu, &[X, M, X, X, X, M][..]),
            (c.zeta_uuxx, &[X, M, X, M, X, X][..]),
            (c.zeta_x4, &[X, X, X, X][..]),
        ],
        _ => panic!("equation order must be 1..=4, got {order}"),
    }
}

/// Same words with the leading derivative stripped: the once-integrated
/// operator whose kernel is the stationary state.
fn a_inf_words(order: usize, c: &PdeCoefficients, lambda: f64) -> Vec<(f64, &'static [Factor])> {
    match order {
        1 => vec![(lambda, &[M][..]), (-c.mu, &[X][..])],
        2 => vec![(c.mu_u, &[M, X, M][..])],
        3 => vec![
            (c.xi_u, &[M, X, M, X, M][..]),
            (c.xi_xu, &[X, X, M][..]),
            (c.xi_ux, &[M, X, X][..]),
        ],
        4 => vec![
            (c.zeta_u4, &[M, X, M, X, M, X, M][..]),
            (c.zeta_xxuu, &[X, X, M, X, M][..]),
            (c.zeta_uxxu, &[M, X, X, X, M][..]),
            (c.zeta_uuxx, &[M, X, M, X, X][..]),
            (c.zeta_x4, &[X, X, X][..]),
        ],
        _ => panic!("equation order must be 1..=4, got {order}"),
    }
}

fn assemble(
    order: usize,
    coeffs: &PdeCoefficients,
    modes: usize,
    profile: VelocityProfile,
    params: &SchemeParams,
    words: fn(usize, &PdeCoefficients, f64) -> Vec<(f64, &'static [Factor])>,
    label: &str,
) -> OperatorMatrix {
    let basis = Basis { kind: BasisKind::for_profile(profile), modes, k: params.k };
    let mut mat = Array2::zeros((modes + 1, modes + 1));
    let mut codomain = Space::Primal;
    for o in 1..=order {
        for (coeff, word) in words(o, coeffs, params.lambda) {
            let wm = word_matrix(word, basis, params.u_amp);
            codomain = wm.codomain;
            mat += &(coeff * &wm.mat);
        }
    }
    OperatorMatrix { mat, basis, domain: Space::Primal, codomain, label: format!("{label}{order}") }
}

/// The truncated evolution operator `A_order` (primal to primal).
pub fn assemble_a(
    order: usize,
    coeffs: &PdeCoefficients,
    modes: usize,
    profile: VelocityProfile,
    params: &SchemeParams,
) -> OperatorMatrix {
    assemble(order, coeffs, modes, profile, params, a_words, "A")
}

/// The once-integrated operator `A_inf_order` whose kernel is the
/// stationary density (primal to dual for the cosine field).
pub fn assemble_a_infinity(
    order: usize,
    coeffs: &PdeCoefficients,
    modes: usize,
    profile: VelocityProfile,
    params: &SchemeParams,
) -> OperatorMatrix {
    assemble(order, coeffs, modes, profile, params, a_inf_words, "Ainf")
}

/// Momentum- and energy-row matrices of the first microscopic correction
/// `beta_1` (momentum lands in the dual space, energy in the primal).
pub fn assemble_beta1(
    modes: usize,
    profile: VelocityProfile,
    params: &SchemeParams,
) -> (OperatorMatrix, OperatorMatrix) {
    let basis = Basis { kind: BasisKind::for_profile(profile), modes, k: params.k };
    let (l, a, u) = (params.lambda, params.alpha, params.u_amp);
    let l2 = l * l;
    let a23 = (a + 2.0) / 3.0;
    let mc_du = word_matrix(&[M, X, M], basis, u);
    let dx = word_matrix(&[X], basis, u);
    let du = word_matrix(&[X, M], basis, u);
    let j = OperatorMatrix {
        mat: l2 * &mc_du.mat - l2 * a23 * &dx.mat,
        basis,
        domain: Space::Primal,
        codomain: mc_du.codomain,
        label: "beta1_J".into(),
    };
    let e = OperatorMatrix {
        mat: l2 * l * (a - 1.0) * &du.mat,
        basis,
        domain: Space::Primal,
        codomain: du.codomain,
        label: "beta1_e".into(),
    };
    (j, e)
}

/// Matrices of the second microscopic correction `beta_2`.
pub fn assemble_beta2(
    modes: usize,
    profile: VelocityProfile,
    params: &SchemeParams,
) -> (OperatorMatrix, OperatorMatrix) {
    let basis = Basis { kind: BasisKind::for_profile(profile), modes, k: params.k };
    let (l, a, u) = (params.lambda, params.alpha, params.u_amp);
    let (sg, sp) = (params.sigma, params.sigma_prime);
    let l3 = l * l * l;
    let a23 = (a + 2.0) / 3.0;
    let w = |word: &[Factor]| word_matrix(word, basis, u);
    let mc_du2 = w(&[M, X, M, X, M]);
    let dx_du = w(&[X, X, M]);
    let mc_dx2 = w(&[M, X, X]);
    let du2 = w(&[X, M, X, M]);
    let dx2 = w(&[X, X]);
    let j = OperatorMatrix {
        mat: l3 * 2.0 * sg * &mc_du2.mat - l3 * (a23 * sg + (a - 1.0) / 3.0 * sp) * &dx_du.mat
            - l3 * a23 * sg * &mc_dx2.mat,
        basis,
        domain: Space::Primal,
        codomain: mc_du2.codomain,
        label: "beta2_J".into(),
    };
    let e = OperatorMatrix {
        mat: l3 * l * (a - 1.0) * ((sg + sp) * &du2.mat - a23 * sg * &dx2.mat),
        basis,
        domain: Space::Primal,
        codomain: du2.codomain,
        label: "beta2_e".into(),
    };
    (j, e)
}

// ---------------------------------------------------------------------------
// Time stepping and stationary solve.
// ---------------------------------------------------------------------------

/// One step of `rho' = -A rho` by the degree-5 Taylor polynomial of the
/// exponential, evaluated in Horner form.
pub fn step_taylor5(a: &OperatorMatrix, dt: f64, state: &SpectralState) -> SpectralState {
    assert_eq!(a.domain, a.codomain, "time stepping needs an endomorphism");
    assert_eq!(state.space, a.domain);
    let v0 = ndarray::Array1::from(state.coeffs.clone());
    let mut w = v0.clone();
    for j in (1..=5).rev() {
        w = &v0 + &(a.mat.dot(&w) * (-dt / j as f64));
    }
    SpectralState { coeffs: w.to_vec(), basis: state.basis, space: state.space }
}

/// Runs `steps` Taylor-5 steps from an initial state.
pub fn evolve(a: &OperatorMatrix, dt: f64, steps: usize, init: &SpectralState) -> SpectralState {
    let mut s = init.clone();
    for _ in 0..steps {
        s = step_taylor5(a, dt, &s);
    }
    s
}

/// Solves `A_inf rho = 0` with the mean pinned to `1/L`.
///
/// The constant column moves to the right-hand side and the remaining
/// square system is solved directly; the solve is rejected when the
/// condition estimate exceeds `1e12`.
pub fn solve_stationary(a_inf: &OperatorMatrix, length: f64) -> Result<SpectralState, SpectralError> {
    let m = a_inf.basis.modes;
    let sub = a_inf.mat.slice(ndarray::s![1.., 1..]).to_owned();
    let cond = linalg::condition_number(&sub)?;
    if cond > 1e12 {
        return Err(SpectralError::IllConditioned { cond });
    }
    let a0 = 1.0 / length;
    let rhs: Vec<f64> = (1..=m).map(|i| -a_inf.mat[[i, 0]] * a0).collect();
    let sol = linalg::solve(&sub, &rhs)?;
    let mut coeffs = Vec::with_capacity(m + 1);
    coeffs.push(a0);
    coeffs.extend_from_slice(&sol);
    Ok(SpectralState { coeffs, basis: a_inf.basis, space: Space::Primal })
}
