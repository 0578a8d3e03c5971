//! The D1Q3 multirelaxation lattice Boltzmann engine.
//!
//! One step is collide-then-stream. Collision relaxes the microscopic
//! moments towards the inhomogeneous equilibrium `Y^eq = E(x) rho` with
//! rates `s` (momentum) and `s'` (energy); streaming shifts the `+lambda`
//! and `-lambda` populations by one site with periodic wraparound.
//!
//! Initialisation fills the microscopic moments with 0, 1 or 2 terms of
//! their asymptotic expansion; the first- and second-order corrections
//! `beta_1 rho0`, `beta_2 rho0` are evaluated through the spectral operator
//! matrices so the initialisation error stays spectrally small.

use crate::fields::{moments_from_particles, particles_from_moments, MomentField, MomentMatrix, ParticleField};
use crate::params::{velocity_at, SchemeParams, VelocityProfile};
use crate::spectral::{
    assemble_beta1, assemble_beta2, default_mode_count, project_initial, synthesize_at_mesh,
    BasisKind, Basis, ProfileSpec,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Inhomogeneous equilibrium: `J^eq = u(x) rho`, `e^eq = lambda^2 alpha rho`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumSpec {
    pub profile: VelocityProfile,
    pub alpha: f64,
}

/// How many expansion terms the microscopic moments start with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum InitOrder {
    /// Equilibrium start, `Y(0) = E(x) rho0`.
    Order0,
    /// Adds `dt S^-1 beta_1 rho0`.
    Order1,
    /// Adds `dt^2 S^-1 beta_2 rho0` on top of order 1.
    Order2,
}

impl InitOrder {
    pub fn from_index(i: u8) -> Option<Self> {
        match i {
            0 => Some(InitOrder::Order0),
            1 => Some(InitOrder::Order1),
            2 => Some(InitOrder::Order2),
            _ => None,
        }
    }

    pub fn index(self) -> u8 {
        match self {
            InitOrder::Order0 => 0,
            InitOrder::Order1 => 1,
            InitOrder::Order2 => 2,
        }
    }
}

#[derive(Debug, Error)]
pub enum LbmError {
    #[error("stationary run did not converge after {steps} steps (last increment {increment:.3e})")]
    NotConverged { steps: u64, increment: f64 },
}

/// Relaxation of the microscopic moments at every site; density unchanged.
pub fn collide(m: &MomentField, eq: &EquilibriumSpec, p: &SchemeParams) -> MomentField {
    let mut out = m.clone();
    let l2a = p.lambda * p.lambda * eq.alpha;
    for i in 0..m.len() {
        let u = velocity_at(eq.profile, p, i as f64 * p.dx);
        out.j[i] = (1.0 - p.s) * m.j[i] + p.s * u * m.rho[i];
        out.e[i] = (1.0 - p.s_prime) * m.e[i] + p.s_prime * l2a * m.rho[i];
    }
    out
}

/// Exact propagation: `f+` shifts one site up, `f-` one site down,
/// `f0` stays, all with periodic wraparound.
pub fn stream(f_star: &ParticleField) -> ParticleField {
    let mut out = f_star.clone();
    out.f_plus.rotate_right(1);
    out.f_minus.rotate_left(1);
    out
}

/// One full collide-and-stream update.
pub fn lbm_step(f: &ParticleField, eq: &EquilibriumSpec, p: &SchemeParams) -> ParticleField {
    let mm = MomentMatrix::new(p.lambda);
    let m = moments_from_particles(f, &mm);
    let m_star = collide(&m, eq, p);
    stream(&particles_from_moments(&m_star, &mm))
}

/// In-place engine for long runs; semantics identical to [`lbm_step`].
pub struct Engine {
    pub params: SchemeParams,
    pub eq: EquilibriumSpec,
    ux: Vec<f64>,
    f: ParticleField,
}

impl Engine {
    pub fn new(f: ParticleField, eq: EquilibriumSpec, params: SchemeParams) -> Self {
        let ux = (0..params.n).map(|i| velocity_at(eq.profile, &params, i as f64 * params.dx)).collect();
        Self { params, eq, ux, f }
    }

    pub fn state(&self) -> &ParticleField {
        &self.f
    }

    pub fn into_state(self) -> ParticleField {
        self.f
    }

    pub fn moments(&self) -> MomentField {
        moments_from_particles(&self.f, &MomentMatrix::new(self.params.lambda))
    }

    pub fn density_into(&self, out: &mut [f64]) {
        for i in 0..self.params.n {
            out[i] = self.f.f_plus[i] + self.f.f_zero[i] + self.f.f_minus[i];
        }
    }

    pub fn step(&mut self) {
        let p = &self.params;
        let (s, sp) = (p.s, p.s_prime);
        let l = p.lambda;
        let l2a = l * l * self.eq.alpha;
        let n = p.n;
        for i in 0..n {
            let fp = self.f.f_plus[i];
            let f0 = self.f.f_zero[i];
            let fm = self.f.f_minus[i];
            let rho = fp + f0 + fm;
            let j = l * (fp - fm);
            let e = l * l * (fp - 2.0 * f0 + fm);
            let j_star = (1.0 - s) * j + s * self.ux[i] * rho;
            let e_star = (1.0 - sp) * e + sp * l2a * rho;
            self.f.f_plus[i] = rho / 3.0 + j_star / (2.0 * l) + e_star / (6.0 * l * l);
            self.f.f_zero[i] = rho / 3.0 - e_star / (3.0 * l * l);
            self.f.f_minus[i] = rho / 3.0 - j_star / (2.0 * l) + e_star / (6.0 * l * l);
        }
        self.f.f_plus.rotate_right(1);
        self.f.f_minus.rotate_left(1);
    }
}

/// Builds the starting particle state for a density profile at the given
/// initialisation order.
pub fn initialize(
    rho0: &ProfileSpec,
    order: InitOrder,
    eq: &EquilibriumSpec,
    p: &SchemeParams,
) -> ParticleField {
    let n = p.n;
    let mut m = MomentField::zeros(n);
    for i in 0..n {
        let x = i as f64 * p.dx;
        let r = rho0.eval(p.k, x);
        m.rho[i] = r;
        m.j[i] = velocity_at(eq.profile, p, x) * r;
        m.e[i] = p.lambda * p.lambda * eq.alpha * r;
    }
    if order >= InitOrder::Order1 {
        let modes = default_mode_count(n).max(8);
        let basis = Basis { kind: BasisKind::for_profile(eq.profile), modes, k: p.k };
        let rho_hat = project_initial(rho0, basis);
        let (b1j, b1e) = assemble_beta1(modes, eq.profile, p);
        let j1 = synthesize_at_mesh(&b1j.apply(&rho_hat).expect("space"), n);
        let e1 = synthesize_at_mesh(&b1e.apply(&rho_hat).expect("space"), n);
        for i in 0..n {
            m.j[i] += p.dt / p.s * j1[i];
            m.e[i] += p.dt / p.s_prime * e1[i];
        }
        if order >= InitOrder::Order2 {
            let (b2j, b2e) = assemble_beta2(modes, eq.profile, p);
            let j2 = synthesize_at_mesh(&b2j.apply(&rho_hat).expect("space"), n);
            let e2 = synthesize_at_mesh(&b2e.apply(&rho_hat).expect("space"), n);
            let dt2 = p.dt * p.dt;
            for i in 0..n {
                m.j[i] += dt2 / p.s * j2[i];
                m.e[i] += dt2 / p.s_prime * e2[i];
            }
        }
    }
    particles_from_moments(&m, &MomentMatrix::new(p.lambda))
}

/// Runs the scheme for `round(t_final / dt)` steps and returns the moments.
pub fn run_unsteady(
    rho0: &ProfileSpec,
    order: InitOrder,
    eq: &EquilibriumSpec,
    p: &SchemeParams,
) -> MomentField {
    let f = initialize(rho0, order, eq, p);
    let mut engine = Engine::new(f, *eq, *p);
    for _ in 0..p.steps_to(p.t_final) {
        engine.step();
    }
    engine.moments()
}

/// Runs exactly `steps` updates from an equilibrium start and returns the
/// moments; the deterministic driver behind fixed-horizon stationary
/// studies.
pub fn run_fixed(
    rho0: &ProfileSpec,
    eq: &EquilibriumSpec,
    p: &SchemeParams,
    steps: usize,
) -> MomentField {
    let f = initialize(rho0, InitOrder::Order0, eq, p);
    let mut engine = Engine::new(f, *eq, *p);
    for _ in 0..steps {
        engine.step();
    }
    engine.moments()
}

/// Result of a stationary run.
#[derive(Debug, Clone)]
pub struct StationaryRun {
    pub moments: MomentField,
    /// Steps taken before the per-step density change dropped below
    /// tolerance (a fixed-point start reports 0).
    pub steps: u64,
}

/// Iterates until the per-step density change falls below
/// `tol * mean(rho)`, or errors out at `max_steps`.
pub fn run_to_stationary(
    rho0: &ProfileSpec,
    eq: &EquilibriumSpec,
    p: &SchemeParams,
    tol: f64,
    max_steps: u64,
) -> Result<StationaryRun, LbmError> {
    assert!(tol > 0.0, "tolerance must be positive");
    let f = initialize(rho0, InitOrder::Order0, eq, p);
    let mean = f.total_mass() / p.n as f64;
    let mut engine = Engine::new(f, *eq, *p);
    let mut prev = vec![0.0; p.n];
    let mut cur = vec![0.0; p.n];
    engine.density_into(&mut prev);
    let threshold = tol * mean.abs();
    let mut increment = f64::INFINITY;
    for step in 1..=max_steps {
        engine.step();
        engine.density_into(&mut cur);
        increment = prev.iter().zip(&cur).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if increment < threshold {
            return Ok(StationaryRun { moments: engine.moments(), steps: step - 1 });
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    Err(LbmError::NotConverged { steps: max_steps, increment })
}
