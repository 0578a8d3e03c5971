//! Scheme parameters, mesh conventions and the velocity field.
//!
//! Units follow acoustic scaling: the lattice speed `lambda = dx/dt` is held
//! fixed under mesh refinement, so `dt` shrinks linearly with `dx`. With the
//! default `lambda = 1`, `L = 1`, a final time `T = 1` means exactly `N` time
//! steps on an `N`-point mesh.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Shape of the advective velocity field `u(x)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VelocityProfile {
    /// `u(x) = lambda * U` everywhere.
    Constant,
    /// `u(x) = lambda * U * cos(k x)` with `k = 2 pi / L`.
    Cosine,
}

#[derive(Debug, Error, PartialEq)]
pub enum ParamError {
    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("relaxation rate {name} = {value} outside the stability range (0, 2)")]
    RelaxationOutOfRange { name: &'static str, value: f64 },
    #[error("mesh needs at least 4 points, got {0}")]
    MeshTooCoarse(usize),
    #[error("cubic parameter undefined: {0}")]
    CubicUndefined(&'static str),
}

/// All physical and numerical constants of a single scheme instance.
///
/// Derived quantities (`dx`, `dt`, `k`, `sigma`, `sigma_prime`) are computed
/// once at construction and the record is immutable afterwards.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeParams {
    /// Lattice speed `lambda = dx/dt`.
    pub lambda: f64,
    /// Dimensionless velocity amplitude `U`.
    pub u_amp: f64,
    /// Dimensionless energy-equilibrium coefficient `alpha`.
    pub alpha: f64,
    /// Relaxation rate of the momentum moment.
    pub s: f64,
    /// Relaxation rate of the energy moment.
    pub s_prime: f64,
    /// Number of mesh points.
    pub n: usize,
    /// Domain length.
    pub length: f64,
    /// Simulation horizon.
    pub t_final: f64,
    /// Mesh spacing `L / N`.
    pub dx: f64,
    /// Time step `dx / lambda`.
    pub dt: f64,
    /// Fundamental wave number `2 pi / L`.
    pub k: f64,
    /// Hénon parameter `1/s - 1/2`.
    pub sigma: f64,
    /// Hénon parameter `1/s' - 1/2`.
    pub sigma_prime: f64,
}

impl SchemeParams {
    /// Builds a parameter record, validating ranges and computing the
    /// derived mesh and relaxation quantities.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        lambda: f64,
        u_amp: f64,
        alpha: f64,
        s: f64,
        s_prime: f64,
        n: usize,
        length: f64,
        t_final: f64,
    ) -> Result<Self, ParamError> {
        if !(lambda > 0.0) {
            return Err(ParamError::NonPositive { name: "lambda", value: lambda });
        }
        if !(length > 0.0) {
            return Err(ParamError::NonPositive { name: "L", value: length });
        }
        if n < 4 {
            return Err(ParamError::MeshTooCoarse(n));
        }
        let dx = length / n as f64;
        Ok(Self {
            lambda,
            u_amp,
            alpha,
            s,
            s_prime,
            n,
            length,
            t_final,
            dx,
            dt: dx / lambda,
            k: 2.0 * std::f64::consts::PI / length,
            sigma: henon(s)?,
            sigma_prime: henon_named(s_prime, "s'")?,
        })
    }

    /// Mesh sites `x_i = i dx`, `i = 0..N-1` (vertex placement, periodic).
    pub fn mesh(&self) -> Vec<f64> {
        (0..self.n).map(|i| i as f64 * self.dx).collect()
    }

    /// Number of time steps covering `t_final` (an exact multiple of `dt`
    /// under the default unit convention).
    pub fn steps_to(&self, t: f64) -> usize {
        (t / self.dt).round() as usize
    }
}

/// Hénon parameter `sigma = 1/s - 1/2` of a relaxation rate.
pub fn henon(s: f64) -> Result<f64, ParamError> {
    henon_named(s, "s")
}

fn henon_named(s: f64, name: &'static str) -> Result<f64, ParamError> {
    if s <= 0.0 || s >= 2.0 {
        return Err(ParamError::RelaxationOutOfRange { name, value: s });
    }
    Ok(1.0 / s - 0.5)
}

/// Inverse of [`henon`]: the relaxation rate with Hénon parameter `sigma`.
pub fn relaxation_rate(sigma: f64) -> f64 {
    1.0 / (sigma + 0.5)
}

/// Advective velocity `u(x)` for the given profile.
pub fn velocity_at(profile: VelocityProfile, params: &SchemeParams, x: f64) -> f64 {
    match profile {
        VelocityProfile::Constant => params.lambda * params.u_amp,
        VelocityProfile::Cosine => params.lambda * params.u_amp * (params.k * x).cos(),
    }
}
