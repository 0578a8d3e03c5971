//! Exact solution of the inhomogeneous advection equation
//! `d rho/dt + d/dx (lambda U cos(kx) rho) = 0` by the method of
//! characteristics.
//!
//! Characteristics obey `dX/dt = lambda U cos(k X)`; in cotangent
//! coordinates the flow is the Möbius map
//! `cot(pi X/L) = (tanh(pi t/T) + cot(pi x0/L)) / (1 + tanh(pi t/T) cot(pi x0/L))`
//! with the advective time `T = L/(lambda U)`. The foot map is its exact
//! Möbius inverse, and `rho(x,t) cos(kx)` is conserved along
//! characteristics.

use crate::params::SchemeParams;
use crate::spectral::ProfileSpec;

/// Threshold on `|cos(kx)|` below which the closed-form density loses
/// digits and the ODE fallback integrates along the characteristic instead.
const STAGNATION_EPS: f64 = 1e-8;

/// Bundle describing a single exact-solution configuration.
#[derive(Debug, Clone, Copy)]
pub struct CharacteristicSolution {
    pub params: SchemeParams,
    pub rho0: ProfileSpec,
}

impl CharacteristicSolution {
    pub fn new(params: SchemeParams, rho0: ProfileSpec) -> Self {
        Self { params, rho0 }
    }

    /// Advective time `T = L / (lambda U)` (infinite when `U = 0`).
    pub fn t_char(&self) -> f64 {
        self.params.length / (self.params.lambda * self.params.u_amp)
    }

    pub fn density(&self, x: f64, t: f64) -> f64 {
        exact_density(x, t, &self.rho0, &self.params)
    }
}

/// `acot` with range `(0, pi)`, continuous across zero.
fn acot(c: f64) -> f64 {
    std::f64::consts::FRAC_PI_2 - c.atan()
}

/// Position at time `t` of the characteristic through `x0` at `t = 0`,
/// reduced to `[0, L)`.
pub fn characteristic_position(x0: f64, t: f64, p: &SchemeParams) -> f64 {
    moebius_flow(x0, t, p, false)
}

/// The departure point at `t = 0` of the characteristic reaching `x`
/// at time `t` (exact inverse of [`characteristic_position`]).
pub fn foot_of_characteristic(x: f64, t: f64, p: &SchemeParams) -> f64 {
    moebius_flow(x, t, p, true)
}

fn moebius_flow(x: f64, t: f64, p: &SchemeParams, backward: bool) -> f64 {
    let lu = p.lambda * p.u_amp;
    if lu == 0.0 || t == 0.0 {
        return x;
    }
    let pi = std::f64::consts::PI;
    let length = p.length;
    let tau = (pi * t * lu / length).tanh(); // tanh(pi t / T)
    let phase = pi * x / length;
    let s = phase.sin();
    // x on the lattice seam: cot is infinite, take the Möbius limit.
    if s.abs() < 1e-300 {
        let c_lim = if backward { -1.0 / tau } else { 1.0 / tau };
        let y = length / pi * acot(c_lim);
        return y.rem_euclid(length);
    }
    let c = phase.cos() / s;
    let (num, den) =
        if backward { (c - tau, 1.0 - tau * c) } else { (tau + c, 1.0 + tau * c) };
    if den == 0.0 {
        // image sits exactly on the seam
        return 0.0;
    }
    let y = length / pi * acot(num / den);
    y.rem_euclid(length)
}

/// Exact density at `(x, t)`: `rho0(x0) cos(k x0) / cos(k x)` with `x0`
/// the characteristic foot, switching to the ODE fallback near the
/// stagnation points where the quotient degenerates.
pub fn exact_density(x: f64, t: f64, rho0: &ProfileSpec, p: &SchemeParams) -> f64 {
    if t == 0.0 || p.u_amp == 0.0 {
        return rho0.eval(p.k, x);
    }
    let cx = (p.k * x).cos();
    if cx.abs() < STAGNATION_EPS {
        return density_by_ode(x, t, rho0, p);
    }
    let x0 = foot_of_characteristic(x, t, p);
    rho0.eval(p.k, x0) * (p.k * x0).cos() / cx
}

/// Integrates `(X, rho)` forward along the characteristic from the foot of
/// `(x, t)`: `dX/dt = lambda U cos(kX)`, `drho/dt = lambda U k sin(kX) rho`.
fn density_by_ode(x: f64, t: f64, rho0: &ProfileSpec, p: &SchemeParams) -> f64 {
    let x0 = foot_of_characteristic(x, t, p);
    let lu = p.lambda * p.u_amp;
    let k = p.k;
    // step resolution tied to the advective rate
    let n = (1000.0f64).max((t * lu.abs() * k * 50.0).ceil()) as usize;
    let h = t / n as f64;
    let f = |state: [f64; 2]| [lu * (k * state[0]).cos(), lu * k * (k * state[0]).sin() * state[1]];
    let mut y = [x0, rho0.eval(k, x0)];
    for _ in 0..n {
        let k1 = f(y);
        let k2 = f([y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]]);
        let k3 = f([y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]]);
        let k4 = f([y[0] + h * k3[0], y[1] + h * k3[1]]);
        y[0] += h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
        y[1] += h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
    }
    y[1]
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn params() -> SchemeParams {
        SchemeParams::new(1.0, 0.005, -1.0, 1.5, 1.2, 128, 1.0, 1.0).unwrap()
    }

    /// RK4 oracle on dX/dt = lambda U cos(kX) with a fixed fine step.
    fn rk4_position(x0: f64, t: f64, p: &SchemeParams, n: usize) -> f64 {
        let lu = p.lambda * p.u_amp;
        let h = t / n as f64;
        let f = |x: f64| lu * (p.k * x).cos();
        let mut x = x0;
        for _ in 0..n {
            let k1 = f(x);
            let k2 = f(x + 0.5 * h * k1);
            let k3 = f(x + 0.5 * h * k2);
            let k4 = f(x + h * k3);
            x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        x.rem_euclid(p.length)
    }

    #[test]
    fn initial_condition_identity() {
        let p = params();
        for &x in &[0.0, 0.1, 0.37, 0.99] {
            assert_eq!(characteristic_position(x, 0.0, &p), x);
            assert_eq!(foot_of_characteristic(x, 0.0, &p), x);
        }
    }

    #[test]
    fn stagnation_points_are_fixed() {
        let p = params();
        let t_char = p.length / (p.lambda * p.u_amp);
        for &t in &[0.3 * t_char, 1.7 * t_char] {
            let q = characteristic_position(0.25, t, &p);
            assert!((q - 0.25).abs() < 1e-12);
            let q = characteristic_position(0.75, t, &p);
            assert!((q - 0.75).abs() < 1e-12);
            let q = foot_of_characteristic(0.75, t, &p);
            assert!((q - 0.75).abs() < 1e-12);
        }
    }

    #[test]
    fn position_matches_rk4_oracle() {
        let p = params();
        let t_char = p.length / (p.lambda * p.u_amp);
        let x0 = 0.1 * p.length;
        let t = 0.5 * t_char;
        let oracle = rk4_position(x0, t, &p, 100_000);
        let got = characteristic_position(x0, t, &p);
        assert!((got - oracle).abs() < 1e-10, "{got} vs {oracle}");
    }

    #[test]
    fn foot_matches_backward_rk4_oracle() {
        let p = params();
        let t_char = p.length / (p.lambda * p.u_amp);
        let x = 0.3 * p.length;
        let t = 0.2 * t_char;
        // integrate backwards in time
        let back = {
            let lu = p.lambda * p.u_amp;
            let n = 100_000;
            let h = -t / n as f64;
            let f = |x: f64| lu * (p.k * x).cos();
            let mut y = x;
            for _ in 0..n {
                let k1 = f(y);
                let k2 = f(y + 0.5 * h * k1);
                let k3 = f(y + 0.5 * h * k2);
                let k4 = f(y + h * k3);
                y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            }
            y.rem_euclid(p.length)
        };
        let got = foot_of_characteristic(x, t, &p);
        assert!((got - back).abs() < 1e-10, "{got} vs {back}");
    }

    #[test]
    fn round_trip_thousand_random_points() {
        let p = params();
        let t_char = p.length / (p.lambda * p.u_amp);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let x: f64 = rng.gen_range(0.0..p.length);
            if (p.k * x).cos().abs() < 1e-10 {
                continue;
            }
            let t: f64 = rng.gen_range(0.0..2.0 * t_char);
            let x0 = foot_of_characteristic(x, t, &p);
            let back = characteristic_position(x0, t, &p);
            let d = (back - x).abs().min(p.length - (back - x).abs());
            // The forward map stretches by |cos(kx)/cos(kx0)|; once the foot
            // sits near the repelling stagnation point, the quantisation of
            // x0 itself exceeds 1e-12 L, so the bound scales with the
            // stretch factor there.
            let stretch = ((p.k * x).cos() / (p.k * x0).cos()).abs();
            let allowed = (1e-12 * p.length).max(1e-15 * stretch * p.length);
            assert!(d < allowed, "round trip {x} -> {x0} -> {back} (stretch {stretch:.2e})");
        }
    }

    #[test]
    fn density_initial_and_closed_form() {
        let p = params();
        let rho0 = ProfileSpec::Constant { level: 1.0 };
        for &x in &[0.05, 0.4, 0.8] {
            assert_eq!(exact_density(x, 0.0, &rho0, &p), 1.0);
        }
        // closed form vs characteristic-ODE oracle away from stagnation
        let t_char = p.length / (p.lambda * p.u_amp);
        let t = 0.1 * t_char;
        let x = 0.5 * p.length;
        let closed = exact_density(x, t, &rho0, &p);
        let ode = density_by_ode(x, t, &rho0, &p);
        assert!((closed - ode).abs() <= 1e-9, "{closed} vs {ode}");
    }

    #[test]
    fn density_grows_exponentially_at_attracting_stagnation() {
        let p = params();
        let rho0 = ProfileSpec::Constant { level: 1.0 };
        let lu = p.lambda * p.u_amp;
        for &t in &[3.0, 17.0] {
            let got = exact_density(0.25 * p.length, t, &rho0, &p);
            let want = (lu * p.k * t).exp();
            assert!((got - want).abs() < 1e-6 * want, "{got} vs {want}");
        }
    }

    #[test]
    fn conservation_along_characteristics() {
        let p = params();
        let rho0 = ProfileSpec::Sine { amplitude: 1.0 };
        let t_char = p.length / (p.lambda * p.u_amp);
        let x0 = 0.11 * p.length;
        let c0 = (1.0 + rho0.eval(p.k, x0)) * (p.k * x0).cos();
        // follow rho along the curve using the offset profile 1 + sin
        let shifted = move |x: f64, t: f64| {
            exact_density(x, t, &ProfileSpec::Sine { amplitude: 1.0 }, &p)
                + exact_density(x, t, &ProfileSpec::Constant { level: 1.0 }, &p)
        };
        for &t in &[0.1 * t_char, 0.5 * t_char, 1.3 * t_char] {
            let xt = characteristic_position(x0, t, &p);
            let c = shifted(xt, t) * (p.k * xt).cos();
            assert!((c - c0).abs() < 1e-9, "t={t}: {c} vs {c0}");
        }
    }

    #[test]
    fn mass_is_conserved_on_the_mesh() {
        let p = params();
        let rho0 = ProfileSpec::Sine { amplitude: 0.5 };
        let t_char = p.length / (p.lambda * p.u_amp);
        let mass = |t: f64| -> f64 {
            (0..p.n)
                .map(|i| {
                    exact_density(i as f64 * p.dx, t, &rho0, &p)
                        + exact_density(i as f64 * p.dx, t, &ProfileSpec::Constant { level: 2.0 }, &p)
                })
                .sum::<f64>()
                * p.dx
        };
        let m0 = mass(0.0);
        for &t in &[0.05 * t_char, 0.25 * t_char] {
            assert!((mass(t) - m0).abs() < 1e-6, "t={t}");
        }
    }
}
