//! D1Q3 lattice Boltzmann scheme for 1-D advection by a cosine velocity
//! field, together with its equivalent partial differential equations at
//! orders 1–4 and an interlaced Fourier spectral reference solver.
//!
//! The crate is organised around the experiment pipeline:
//!
//! * [`params`] — scheme parameters, grids and unit conventions,
//! * [`fields`] — particle populations and moment fields,
//! * [`characteristics`] — exact solution of the advection equation,
//! * [`equiv_pde`] — equivalent-PDE coefficients and the operator recursion,
//! * [`spectral`] — interlaced Fourier discretisation of the equivalent PDEs,
//! * [`lbm`] — the collide-and-stream engine with ordered initialisation,
//! * [`modes`] — global iteration-matrix eigenmode analysis,
//! * [`harness`] — convergence-study campaigns and table output.

pub mod characteristics;
pub mod equiv_pde;
pub mod fields;
pub mod harness;
pub mod lbm;
mod linalg;
pub mod modes;
pub mod params;
pub mod spectral;

pub use equiv_pde::{cubic_sigma_prime, pde_coefficients, PdeCoefficients};
pub use fields::{MomentField, MomentMatrix, ParticleField};
pub use lbm::{EquilibriumSpec, InitOrder};
pub use params::{henon, velocity_at, SchemeParams, VelocityProfile};
pub use spectral::{ProfileSpec, SpectralState};
