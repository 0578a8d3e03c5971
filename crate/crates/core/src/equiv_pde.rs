//! Equivalent-PDE machinery for the D1Q3 advection scheme.
//!
//! The scheme approximates, at order `j` in the time step, the conservation
//! law `d rho/dt + sum_j dt^{j-1} alpha_j rho = 0`, where each `alpha_j` is a
//! polynomial in the two non-commuting operators
//!
//! * `dx`  — the space derivative,
//! * `du`  — advective derivative, `du phi = U dx(cos(k x) phi)` for the
//!   cosine field and `du phi = U dx phi` for a constant field.
//!
//! [`pde_coefficients`] hard-wires the closed-form coefficients of the ten
//! operator words appearing through order 4, with the `dt^{j-1}` factors
//! folded in so downstream operator assembly never rescales.
//! [`RecursionTable`] re-derives the same operators from the generic ABCD
//! block recursion over the word algebra and serves as an independent
//! cross-check of every hard-wired coefficient.

use crate::params::{ParamError, SchemeParams};
use std::collections::BTreeMap;
use std::fmt;

/// Closed-form coefficients of the equivalent PDEs, `dt^{j-1}` folded in.
///
/// Order 2 carries `dt`, order 3 `dt^2`, order 4 `dt^3`:
///
/// ```text
/// dt   * alpha_2 = -mu dx^2 + mu_u du^2
/// dt^2 * alpha_3 = xi_u du^3 + xi_xu dx^2 du + xi_ux du dx^2
/// dt^3 * alpha_4 = zeta_u4 du^4 + zeta_xxuu dx^2 du^2 + zeta_uxxu du dx^2 du
///                  + zeta_uuxx du^2 dx^2 + zeta_x4 dx^4
/// ```
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PdeCoefficients {
    pub mu: f64,
    pub mu_u: f64,
    pub xi_u: f64,
    pub xi_xu: f64,
    pub xi_ux: f64,
    pub zeta_u4: f64,
    pub zeta_xxuu: f64,
    pub zeta_uxxu: f64,
    pub zeta_uuxx: f64,
    pub zeta_x4: f64,
}

/// Evaluates the ten equivalent-PDE coefficients for a parameter set.
pub fn pde_coefficients(p: &SchemeParams) -> PdeCoefficients {
    let (l, a, sg, sp, dt) = (p.lambda, p.alpha, p.sigma, p.sigma_prime, p.dt);
    let a23 = (a + 2.0) / 3.0;
    let l2 = l * l;
    let l3 = l2 * l;
    let l4 = l3 * l;
    PdeCoefficients {
        mu: a23 * l2 * sg * dt,
        mu_u: l2 * sg * dt,
        xi_u: l3 * (2.0 * sg * sg - 1.0 / 6.0) * dt * dt,
        xi_xu: l3 * (a23 * (1.0 / 6.0 - sg * sg) + (a - 1.0) / 3.0 * (1.0 / 12.0 - sg * sp)) * dt * dt,
        xi_ux: -l3 * a23 * sg * sg * dt * dt,
        zeta_u4: l4 * sg * (5.0 * sg * sg - 0.75) * dt.powi(3),
        zeta_xxuu: l4
            * (-2.0 * a23 * sg.powi(3)
                + (1.0 - a) / 3.0 * (2.0 * sg * sg * sp + sg * sp * sp - sp / 4.0)
                + (1.0 + 2.0 * a) / 9.0 * sg)
            * dt.powi(3),
        zeta_uxxu: l4
            * (-2.0 * a23 * sg.powi(3) + (1.0 - a) / 3.0 * sg * sg * sp + (7.0 + 5.0 * a) / 36.0 * sg)
            * dt.powi(3),
        // The du^2 dx^2 word: the block recursion gives sigma(1/6 - 2 sigma^2);
        // cross-checked below against two independent derivation routes.
        zeta_uuxx: l4 * a23 * sg * (1.0 / 6.0 - 2.0 * sg * sg) * dt.powi(3),
        zeta_x4: l4
            * (a + 2.0) / 9.0
            * ((a + 2.0) * sg.powi(3) - (1.0 - a) * sg * sg * sp - a / 4.0 * sg)
            * dt.powi(3),
    }
}

/// Coefficient of `dx^3` in the order-3 operator when the velocity field is
/// constant (`du = U dx` collapses every order-3 word onto `dx^3`).
pub fn alpha3_constant_velocity(p: &SchemeParams) -> f64 {
    let (u, a, sg, sp) = (p.u_amp, p.alpha, p.sigma, p.sigma_prime);
    p.lambda.powi(3) * u / 12.0
        * (-2.0 * (1.0 - 12.0 * sg * sg) * u * u + 4.0 * (1.0 - a) * sg * sp + 1.0 + a
            - 8.0 * (2.0 + a) * sg * sg)
}

/// The cubic parameter: the `sigma'` annihilating the order-3 term of the
/// constant-velocity equivalent PDE, lifting the scheme to third order.
pub fn cubic_sigma_prime(u_amp: f64, alpha: f64, sigma: f64) -> Result<f64, ParamError> {
    if alpha == 1.0 {
        return Err(ParamError::CubicUndefined("alpha = 1"));
    }
    if sigma == 0.0 {
        return Err(ParamError::CubicUndefined("sigma = 0"));
    }
    Ok(
        (2.0 * (1.0 - 12.0 * sigma * sigma) * u_amp * u_amp + 8.0 * (2.0 + alpha) * sigma * sigma
            - (1.0 + alpha))
            / (4.0 * (1.0 - alpha) * sigma),
    )
}

// ---------------------------------------------------------------------------
// Word algebra over the generators {dx, du, mc}.
// ---------------------------------------------------------------------------

/// Generators of the operator word algebra.
///
/// `MulCos` is multiplication by `U cos(k x)` (the velocity over `lambda`).
/// The defining identity `du = dx . mc` is applied as the rewriting rule
/// `Dx MulCos -> Du` when words are normalised; no commutation is applied,
/// so `du dx^2` and `dx^2 du` stay distinct words.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Generator {
    Dx,
    Du,
    MulCos,
}

/// An ordered product of generators.
pub type Word = Vec<Generator>;

/// A finite linear combination of words with scalar coefficients.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct OperatorPoly {
    terms: BTreeMap<Word, f64>,
}

impl OperatorPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    /// Single generator with unit coefficient.
    pub fn generator(g: Generator) -> Self {
        Self::term(1.0, vec![g])
    }

    /// Single term `coeff * word`, normalised.
    pub fn term(coeff: f64, word: Word) -> Self {
        let mut p = Self::zero();
        p.add_term(coeff, word);
        p
    }

    fn add_term(&mut self, coeff: f64, word: Word) {
        let w = normalize(word);
        let slot = self.terms.entry(w).or_insert(0.0);
        *slot += coeff;
        if *slot == 0.0 {
            // keep the map canonical for equality tests
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, f64)> {
        self.terms.iter().map(|(w, &c)| (w, c))
    }

    pub fn coefficient(&self, word: &[Generator]) -> f64 {
        self.terms.get(&normalize(word.to_vec())).copied().unwrap_or(0.0)
    }

    pub fn scale(&self, c: f64) -> Self {
        let mut out = Self::zero();
        for (w, a) in self.terms() {
            out.add_term(c * a, w.clone());
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (w, c) in other.terms() {
            out.add_term(c, w.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    /// Operator composition `self . other` (apply `other` first).
    pub fn compose(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (w1, c1) in self.terms() {
            for (w2, c2) in other.terms() {
                let mut w = w1.clone();
                w.extend_from_slice(w2);
                out.add_term(c1 * c2, w);
            }
        }
        out
    }

    /// Left-composition by a single generator.
    pub fn left(&self, g: Generator) -> Self {
        OperatorPoly::generator(g).compose(self)
    }

    /// Largest absolute coefficient, for relative comparisons.
    pub fn max_coeff(&self) -> f64 {
        self.terms.values().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Maximum absolute coefficient difference against `other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut keys: Vec<&Word> = self.terms.keys().collect();
        keys.extend(other.terms.keys());
        keys.sort();
        keys.dedup();
        keys.into_iter()
            .map(|w| (self.terms.get(w).unwrap_or(&0.0) - other.terms.get(w).unwrap_or(&0.0)).abs())
            .fold(0.0, f64::max)
    }

    /// Substitutes `du -> u_amp * dx` and `mc -> u_amp` (constant field),
    /// collapsing every word onto a power of `dx`; returns coefficients by
    /// derivative order.
    pub fn collapse_constant(&self, u_amp: f64) -> Vec<f64> {
        let mut out = vec![0.0; 1];
        for (w, c) in self.terms() {
            let mut coeff = c;
            let mut order = 0usize;
            for g in w {
                match g {
                    Generator::Dx => order += 1,
                    Generator::Du => {
                        coeff *= u_amp;
                        order += 1;
                    }
                    Generator::MulCos => coeff *= u_amp,
                }
            }
            if out.len() <= order {
                out.resize(order + 1, 0.0);
            }
            out[order] += coeff;
        }
        out
    }
}

impl fmt::Display for OperatorPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (w, c) in self.terms() {
            if c == 0.0 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{c:.6e}")?;
            for g in w {
                let s = match g {
                    Generator::Dx => "dx",
                    Generator::Du => "du",
                    Generator::MulCos => "mc",
                };
                write!(f, " {s}")?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// Applies the rewriting rule `Dx MulCos -> Du` until fixed point.
fn normalize(mut w: Word) -> Word {
    loop {
        let mut changed = false;
        let mut i = 0;
        while i + 1 < w.len() {
            if w[i] == Generator::Dx && w[i + 1] == Generator::MulCos {
                w[i] = Generator::Du;
                w.remove(i + 1);
                changed = true;
            } else {
                i += 1;
            }
        }
        if !changed {
            return w;
        }
    }
}

// ---------------------------------------------------------------------------
// ABCD block recursion.
// ---------------------------------------------------------------------------

/// Scalar parameters entering the operator recursion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatorParams {
    pub lambda: f64,
    pub u_amp: f64,
    pub alpha: f64,
    pub sigma: f64,
    pub sigma_prime: f64,
}

impl From<&SchemeParams> for OperatorParams {
    fn from(p: &SchemeParams) -> Self {
        Self {
            lambda: p.lambda,
            u_amp: p.u_amp,
            alpha: p.alpha,
            sigma: p.sigma,
            sigma_prime: p.sigma_prime,
        }
    }
}

/// The moment-space block decomposition of the advection operator, reduced
/// to the scalar factors multiplying `dx`.
///
/// For D1Q3: `Abar = 0`, `Bbar = (1, 0)`, `Cbar = (2 lambda^2/3, 0)^T`,
/// `Dbar = ((0, 1/3), (lambda^2, 0))`, and the derived products
/// `B2bar = Bbar Dbar = (0, 1/3)`,
/// `D2bar = Cbar Bbar + Dbar^2 = diag(lambda^2, lambda^2/3)`.
#[derive(Debug, Clone, Copy)]
pub struct AbcdBlocks {
    pub lambda: f64,
    pub alpha: f64,
    pub sigma: f64,
    pub sigma_prime: f64,
}

impl AbcdBlocks {
    pub fn new(p: &OperatorParams) -> Self {
        Self { lambda: p.lambda, alpha: p.alpha, sigma: p.sigma, sigma_prime: p.sigma_prime }
    }

    pub fn b2_bar(&self) -> [f64; 2] {
        [0.0, 1.0 / 3.0]
    }

    pub fn d2_bar(&self) -> [[f64; 2]; 2] {
        let l2 = self.lambda * self.lambda;
        [[l2, 0.0], [0.0, l2 / 3.0]]
    }
}

/// A two-component operator (momentum and energy rows of the microscopic
/// moment corrections).
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorPair {
    pub j: OperatorPoly,
    pub e: OperatorPoly,
}

/// All conserved-moment operators `alpha_1..alpha_4` and microscopic
/// correction operators `beta_1..beta_3` produced by the block recursion.
#[derive(Debug, Clone)]
pub struct RecursionTable {
    pub alpha: [OperatorPoly; 4],
    pub beta: [OperatorPair; 3],
}

/// Runs the ABCD recursion over the word algebra.
///
/// Every step is a finite combination of compositions with `dx`, `du`,
/// `mc` and the scalar blocks, so the result is exact up to rounding in the
/// scalar coefficients.
pub fn abcd_recursion(p: &OperatorParams) -> RecursionTable {
    use Generator::{Dx, Du, MulCos};
    let (l, a, sg, sp, _u) = (p.lambda, p.alpha, p.sigma, p.sigma_prime, p.u_amp);
    let blocks = AbcdBlocks::new(p);
    let l2 = l * l;

    let dx = OperatorPoly::generator(Dx);
    let du = OperatorPoly::generator(Du);
    let mc = OperatorPoly::generator(MulCos);

    // delta = (lambda du ; lambda^2 alpha dx), E = (lambda mc ; lambda^2 alpha)
    let delta_j = du.scale(l);
    let delta_e = dx.scale(l2 * a);

    // alpha_1 = Abar dx + Bbar delta = delta_J
    let alpha1 = delta_j.clone();

    // beta_1 = E alpha_1 - (Cbar dx + Dbar delta)
    let beta1 = OperatorPair {
        j: mc.compose(&alpha1).scale(l).sub(&dx.scale(2.0 * l2 / 3.0)).sub(&delta_e.scale(1.0 / 3.0)),
        e: alpha1.scale(l2 * a).sub(&delta_j.scale(l2)),
    };

    // alpha_2 = Bbar Sigma dx beta_1
    let alpha2 = beta1.j.left(Dx).scale(sg);

    // beta_2 = Sigma beta_1 alpha_1 + E alpha_2 - Dbar Sigma dx beta_1
    let beta2 = OperatorPair {
        j: beta1
            .j
            .compose(&alpha1)
            .scale(sg)
            .add(&mc.compose(&alpha2).scale(l))
            .sub(&beta1.e.left(Dx).scale(sp / 3.0)),
        e: beta1
            .e
            .compose(&alpha1)
            .scale(sp)
            .add(&alpha2.scale(l2 * a))
            .sub(&beta1.j.left(Dx).scale(l2 * sg)),
    };

    // alpha_3 = Bbar Sigma dx beta_2 + 1/12 B2bar dx^2 beta_1
    //           - 1/6 Bbar dx beta_1 alpha_1
    let b2 = blocks.b2_bar();
    let alpha3 = beta2
        .j
        .left(Dx)
        .scale(sg)
        .add(&beta1.e.left(Dx).left(Dx).scale(b2[1] / 12.0))
        .sub(&beta1.j.left(Dx).compose(&alpha1).scale(1.0 / 6.0));

    // beta_3 = Sigma beta_1 alpha_2 + E alpha_3 - Dbar Sigma dx beta_2
    //          + Sigma beta_2 alpha_1 + 1/6 Dbar dx beta_1 alpha_1
    //          - 1/12 beta_1 alpha_1^2 - 1/12 D2bar dx^2 beta_1
    let d2 = blocks.d2_bar();
    let alpha1_sq = alpha1.compose(&alpha1);
    let beta3 = OperatorPair {
        j: beta1
            .j
            .compose(&alpha2)
            .scale(sg)
            .add(&mc.compose(&alpha3).scale(l))
            .sub(&beta2.e.left(Dx).scale(sp / 3.0))
            .add(&beta2.j.compose(&alpha1).scale(sg))
            .add(&beta1.e.left(Dx).compose(&alpha1).scale(1.0 / 18.0))
            .sub(&beta1.j.compose(&alpha1_sq).scale(1.0 / 12.0))
            .sub(&beta1.j.left(Dx).left(Dx).scale(d2[0][0] / 12.0)),
        e: beta1
            .e
            .compose(&alpha2)
            .scale(sp)
            .add(&alpha3.scale(l2 * a))
            .sub(&beta2.j.left(Dx).scale(l2 * sg))
            .add(&beta2.e.compose(&alpha1).scale(sp))
            .add(&beta1.j.left(Dx).compose(&alpha1).scale(l2 / 6.0))
            .sub(&beta1.e.compose(&alpha1_sq).scale(1.0 / 12.0))
            .sub(&beta1.e.left(Dx).left(Dx).scale(d2[1][1] / 12.0)),
    };

    // alpha_4 = Bbar Sigma dx beta_3 + 1/4 B2bar dx^2 beta_2
    //           + 1/6 Bbar D2bar Sigma dx^3 beta_1 - 1/6 Abar Bbar dx^2 beta_2
    //           - 1/6 Bbar delta alpha_1 alpha_2 - 1/6 Bbar delta alpha_2 alpha_1
    //           - 1/6 Bbar Sigma dx beta_1 alpha_1^2
    let alpha4 = beta3
        .j
        .left(Dx)
        .scale(sg)
        .add(&beta2.e.left(Dx).left(Dx).scale(b2[1] / 4.0))
        .add(&beta1.j.left(Dx).left(Dx).left(Dx).scale(d2[0][0] * sg / 6.0))
        .sub(&delta_j.compose(&alpha1).compose(&alpha2).scale(1.0 / 6.0))
        .sub(&delta_j.compose(&alpha2).compose(&alpha1).scale(1.0 / 6.0))
        .sub(&beta1.j.left(Dx).compose(&alpha1_sq).scale(sg / 6.0));

    RecursionTable { alpha: [alpha1, alpha2, alpha3, alpha4], beta: [beta1, beta2, beta3] }
}

/// Hard-wired closed form of `alpha_order`, `order` in `1..=4`, as a word
/// polynomial (no `dt` folding; multiply by `dt^{order-1}` to match
/// [`pde_coefficients`]).
pub fn closed_form_alpha(order: usize, p: &OperatorParams) -> OperatorPoly {
    use Generator::{Dx, Du};
    let (l, a, sg, sp) = (p.lambda, p.alpha, p.sigma, p.sigma_prime);
    let a23 = (a + 2.0) / 3.0;
    match order {
        1 => OperatorPoly::term(l, vec![Du]),
        2 => OperatorPoly::term(l * l * sg, vec![Du, Du])
            .add(&OperatorPoly::term(-l * l * sg * a23, vec![Dx, Dx])),
        3 => {
            let l3 = l.powi(3);
            OperatorPoly::term(l3 * (2.0 * sg * sg - 1.0 / 6.0), vec![Du, Du, Du])
                .add(&OperatorPoly::term(
                    l3 * (a23 * (1.0 / 6.0 - sg * sg) + (a - 1.0) / 3.0 * (1.0 / 12.0 - sg * sp)),
                    vec![Dx, Dx, Du],
                ))
                .add(&OperatorPoly::term(-l3 * a23 * sg * sg, vec![Du, Dx, Dx]))
        }
        4 => {
            let l4 = l.powi(4);
            OperatorPoly::term(
                l4 * (a + 2.0) / 9.0 * ((a + 2.0) * sg.powi(3) - (1.0 - a) * sg * sg * sp - a / 4.0 * sg),
                vec![Dx, Dx, Dx, Dx],
            )
            .add(&OperatorPoly::term(
                l4 * (-2.0 * a23 * sg.powi(3)
                    + (1.0 - a) / 3.0 * (2.0 * sg * sg * sp + sg * sp * sp - sp / 4.0)
                    + (1.0 + 2.0 * a) / 9.0 * sg),
                vec![Dx, Dx, Du, Du],
            ))
            .add(&OperatorPoly::term(
                l4 * (-2.0 * a23 * sg.powi(3) + (1.0 - a) / 3.0 * sg * sg * sp + (7.0 + 5.0 * a) / 36.0 * sg),
                vec![Du, Dx, Dx, Du],
            ))
            .add(&OperatorPoly::term(
                l4 * a23 * sg * (1.0 / 6.0 - 2.0 * sg * sg),
                vec![Du, Du, Dx, Dx],
            ))
            .add(&OperatorPoly::term(l4 * sg * (5.0 * sg * sg - 0.75), vec![Du, Du, Du, Du]))
        }
        _ => panic!("equivalent-PDE order must be 1..=4, got {order}"),
    }
}

/// Hard-wired closed form of `beta_j`, `j` in `1..=3`.
pub fn closed_form_beta(j: usize, p: &OperatorParams) -> OperatorPair {
    use Generator::{Dx, Du, MulCos};
    let (l, a, sg, sp) = (p.lambda, p.alpha, p.sigma, p.sigma_prime);
    let a23 = (a + 2.0) / 3.0;
    let l2 = l * l;
    match j {
        1 => OperatorPair {
            j: OperatorPoly::term(l2, vec![MulCos, Du]).add(&OperatorPoly::term(-l2 * a23, vec![Dx])),
            e: OperatorPoly::term(l2 * l * (a - 1.0), vec![Du]),
        },
        2 => {
            let l3 = l2 * l;
            OperatorPair {
                j: OperatorPoly::term(l3 * 2.0 * sg, vec![MulCos, Du, Du])
                    .add(&OperatorPoly::term(-l3 * (a23 * sg + (a - 1.0) / 3.0 * sp), vec![Dx, Du]))
                    .add(&OperatorPoly::term(-l3 * a23 * sg, vec![MulCos, Dx, Dx])),
                e: OperatorPoly::term(l3 * l * (a - 1.0) * (sg + sp), vec![Du, Du])
                    .add(&OperatorPoly::term(-l3 * l * (a - 1.0) * a23 * sg, vec![Dx, Dx])),
            }
        }
        3 => {
            let l4 = l2 * l2;
            let l5 = l4 * l;
            OperatorPair {
                j: OperatorPoly::term(
                    l4 * (a + 2.0) / 9.0 * (-(1.0 - a) * sg * sp + (a + 2.0) * sg * sg + 0.25),
                    vec![Dx, Dx, Dx],
                )
                .add(&OperatorPoly::term(
                    l4 * (-2.0 * a23 * sg * sg + (1.0 - a) / 3.0 * sg * sp + (1.0 + a) / 12.0),
                    vec![MulCos, Dx, Dx, Du],
                ))
                .add(&OperatorPoly::term(-l4 * 2.0 * a23 * sg * sg, vec![MulCos, Du, Dx, Dx]))
                .add(&OperatorPoly::term(
                    l4 * (-2.0 * a23 * sg * sg + (1.0 - a) / 3.0 * (2.0 * sg * sp + sp * sp - 0.25)),
                    vec![Dx, Du, Du],
                ))
                .add(&OperatorPoly::term(l4 * (5.0 * sg * sg - 0.25), vec![MulCos, Du, Du, Du])),
                e: OperatorPoly::term(
                    l5 * (1.0 - a) / 3.0 * ((a + 2.0) * sg * sg + (1.0 + 2.0 * a) * sg * sp - (1.0 + a) / 4.0),
                    vec![Dx, Dx, Du],
                )
                .add(&OperatorPoly::term(l5 * (1.0 - a) * a23 * sg * (sg + sp), vec![Du, Dx, Dx]))
                .add(&OperatorPoly::term(
                    -l5 * (1.0 - a) * (2.0 * sg * sg + 2.0 * sg * sp + sp * sp - 0.25),
                    vec![Du, Du, Du],
                )),
            }
        }
        _ => panic!("microscopic correction order must be 1..=3, got {j}"),
    }
}
