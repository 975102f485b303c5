//! Radial log-derivatives through the spherical Hankel three-term recurrence.
//!
//! With `q_k(z) = h_{k-1}(z) / h_k(z)` (`h = h^{(1)}`, `q_0 = i`) the recurrence
//! `h_{k+1} = (2k+1)/z · h_k - h_{k-1}` becomes `q_{k+1} = 1 / ((2k+1)/z - q_k)`.
//! It is forward-stable for the outgoing solution and never forms the huge
//! polynomial coefficients, so it serves every mode the exact coefficients
//! cannot reach in double precision. On the real axis the imaginary part of
//! `q_k` propagates multiplicatively, so the exponentially small phase shifts
//! of high modes keep full relative accuracy.

use num_complex::Complex64;

use super::{sh_dim, BoundaryCondition};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Steps the ratio `q_k` upward in `k` at a fixed argument.
#[derive(Debug, Clone, Copy)]
pub struct HankelRatios {
    z: Complex64,
    k: usize,
    q: Complex64,
}

impl HankelRatios {
    pub fn new(z: Complex64) -> Self {
        Self { z, k: 0, q: I }
    }

    pub fn order(&self) -> usize {
        self.k
    }

    pub fn ratio(&self) -> Complex64 {
        self.q
    }

    pub fn advance(&mut self) {
        let c = (2 * self.k + 1) as f64 / self.z;
        self.q = (c - self.q).inv();
        self.k += 1;
    }

    pub fn advance_to(&mut self, order: usize) {
        while self.k < order {
            self.advance();
        }
    }
}

/// `h_{m-1}(z) / h_m(z)`.
pub fn hankel_ratio(m: usize, z: Complex64) -> Complex64 {
    let mut r = HankelRatios::new(z);
    r.advance_to(m);
    r.ratio()
}

fn mode_constants(d: u32, l: u32) -> (usize, f64, f64) {
    let m = (l + (d - 3) / 2) as usize;
    let a = (l + d - 2) as f64;
    let ang = (l as f64) * (l + d - 2) as f64;
    (m, a, ang)
}

/// `p'(z)/p(z)` for the radial polynomial of mode `l`, from the ratio `q_m`.
fn radial_log_derivative_from(d: u32, l: u32, bc: BoundaryCondition, z: Complex64, q: Complex64) -> Complex64 {
    let (_, a, ang) = mode_constants(d, l);
    match bc {
        // T'/T = u'/u - i + a/z with u'/u = q_m - a/z.
        BoundaryCondition::Dirichlet => q - I,
        // N'/N = u''/u' - i + (a+1)/z; u'' from the radial equation.
        BoundaryCondition::Neumann => {
            let u1_over_u = q - a / z;
            let u2_over_u1 = -((d - 1) as f64) / z - (1.0 - ang / (z * z)) / u1_over_u;
            u2_over_u1 - I + (a + 1.0) / z
        }
    }
}

/// `p'(z)/p(z)` of [`super::RadialPolynomial`] `(d, l, bc)` without using its
/// coefficients.
pub fn radial_log_derivative(d: u32, l: u32, bc: BoundaryCondition, z: Complex64) -> Complex64 {
    let (m, _, _) = mode_constants(d, l);
    radial_log_derivative_from(d, l, bc, z, hankel_ratio(m, z))
}

fn phase_derivative_from(d: u32, l: u32, bc: BoundaryCondition, z: f64, q: Complex64) -> f64 {
    let (_, a, ang) = mode_constants(d, l);
    match bc {
        BoundaryCondition::Dirichlet => -2.0 * q.im,
        BoundaryCondition::Neumann => 2.0 * (1.0 - ang / (z * z)) * (q - a / z).inv().im,
    }
}

/// `θ_l'(z)` where `s_l(z) = e^{iθ_l(z)}` on the real axis, so that
/// `d/dz log s_l = i θ_l'`.
pub fn mode_phase_derivative(d: u32, l: u32, bc: BoundaryCondition, z: f64) -> f64 {
    let (m, _, _) = mode_constants(d, l);
    phase_derivative_from(d, l, bc, z, hankel_ratio(m, Complex64::new(z, 0.0)))
}

/// `Σ_l sh_dim(d,l) θ_l'(z)` summed until the terms are negligible.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseSum {
    pub value: f64,
    /// Highest mode included.
    pub last_mode: u32,
    pub converged: bool,
}

pub fn phase_derivative_sum(d: u32, bc: BoundaryCondition, z: f64, mode_cap: u32) -> PhaseSum {
    let m0 = ((d - 3) / 2) as usize;
    let mut ratios = HankelRatios::new(Complex64::new(z, 0.0));
    ratios.advance_to(m0);
    let mut sum = 0.0;
    let mut quiet = 0;
    for l in 0..=mode_cap {
        if l > 0 {
            ratios.advance();
        }
        let term = sh_dim(d, l) as f64 * phase_derivative_from(d, l, bc, z, ratios.ratio());
        sum += term;
        if (l as f64) > z + 4.0 && term.abs() <= 1e-17 * sum.abs().max(1e-300) {
            quiet += 1;
            if quiet >= 3 {
                return PhaseSum {
                    value: sum,
                    last_mode: l,
                    converged: true,
                };
            }
        } else {
            quiet = 0;
        }
    }
    PhaseSum {
        value: sum,
        last_mode: mode_cap,
        converged: false,
    }
}

/// Newton ratio `p(z)/p'(z)` for polishing radial roots.
pub fn newton_ratio(d: u32, l: u32, bc: BoundaryCondition, z: Complex64) -> Complex64 {
    radial_log_derivative(d, l, bc, z).inv()
}
