//! Particle populations, moment fields and the moment transform.
//!
//! The three populations travel with velocities `+lambda`, `0`, `-lambda`.
//! Moments are density `rho = f+ + f0 + f-`, momentum `J = lambda (f+ - f-)`
//! and energy `e = lambda^2 (f+ - 2 f0 + f-)`.

/// Per-site particle populations on a periodic mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleField {
    pub f_plus: Vec<f64>,
    pub f_zero: Vec<f64>,
    pub f_minus: Vec<f64>,
}

impl ParticleField {
    pub fn zeros(n: usize) -> Self {
        Self { f_plus: vec![0.0; n], f_zero: vec![0.0; n], f_minus: vec![0.0; n] }
    }

    pub fn len(&self) -> usize {
        self.f_plus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f_plus.is_empty()
    }

    /// Total mass, conserved exactly by collision and streaming.
    pub fn total_mass(&self) -> f64 {
        self.f_plus.iter().chain(&self.f_zero).chain(&self.f_minus).sum()
    }
}

/// Per-site conserved density and microscopic moments.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentField {
    pub rho: Vec<f64>,
    pub j: Vec<f64>,
    pub e: Vec<f64>,
}

impl MomentField {
    pub fn zeros(n: usize) -> Self {
        Self { rho: vec![0.0; n], j: vec![0.0; n], e: vec![0.0; n] }
    }

    pub fn len(&self) -> usize {
        self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho.is_empty()
    }
}

/// The 3x3 moment matrix and its exact inverse.
///
/// Rows of `M` are `(1, 1, 1)`, `(lambda, 0, -lambda)`,
/// `(lambda^2, -2 lambda^2, lambda^2)`; the inverse is computed in closed
/// form so the round trip is exact to rounding.
#[derive(Debug, Clone, Copy)]
pub struct MomentMatrix {
    pub lambda: f64,
}

impl MomentMatrix {
    pub fn new(lambda: f64) -> Self {
        Self { lambda }
    }

    /// `M` by rows.
    pub fn forward(&self) -> [[f64; 3]; 3] {
        let l = self.lambda;
        [[1.0, 1.0, 1.0], [l, 0.0, -l], [l * l, -2.0 * l * l, l * l]]
    }

    /// `M^-1` by rows.
    pub fn inverse(&self) -> [[f64; 3]; 3] {
        let l = self.lambda;
        [
            [1.0 / 3.0, 1.0 / (2.0 * l), 1.0 / (6.0 * l * l)],
            [1.0 / 3.0, 0.0, -1.0 / (3.0 * l * l)],
            [1.0 / 3.0, -1.0 / (2.0 * l), 1.0 / (6.0 * l * l)],
        ]
    }

    #[inline]
    pub fn site_moments(&self, fp: f64, f0: f64, fm: f64) -> (f64, f64, f64) {
        let l = self.lambda;
        (fp + f0 + fm, l * (fp - fm), l * l * (fp - 2.0 * f0 + fm))
    }

    #[inline]
    pub fn site_particles(&self, rho: f64, j: f64, e: f64) -> (f64, f64, f64) {
        let l = self.lambda;
        let fp = rho / 3.0 + j / (2.0 * l) + e / (6.0 * l * l);
        let f0 = rho / 3.0 - e / (3.0 * l * l);
        let fm = rho / 3.0 - j / (2.0 * l) + e / (6.0 * l * l);
        (fp, f0, fm)
    }
}

/// Moments `m = M f`, all sites.
pub fn moments_from_particles(f: &ParticleField, m: &MomentMatrix) -> MomentField {
    let n = f.len();
    let mut out = MomentField::zeros(n);
    for i in 0..n {
        let (rho, j, e) = m.site_moments(f.f_plus[i], f.f_zero[i], f.f_minus[i]);
        out.rho[i] = rho;
        out.j[i] = j;
        out.e[i] = e;
    }
    out
}

/// Particles `f = M^-1 m`, all sites.
pub fn particles_from_moments(m_field: &MomentField, m: &MomentMatrix) -> ParticleField {
    let n = m_field.len();
    let mut out = ParticleField::zeros(n);
    for i in 0..n {
        let (fp, f0, fm) = m.site_particles(m_field.rho[i], m_field.j[i], m_field.e[i]);
        out.f_plus[i] = fp;
        out.f_zero[i] = f0;
        out.f_minus[i] = fm;
    }
    out
}
