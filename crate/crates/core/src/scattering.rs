//! Scattering determinant of the ball: the per-mode closed form and the
//! canonical product over resonances, plus the fit of the one free constant.
//!
//! The product is
//! `s(λ) = e^{i c λ^d} ∏_j (E(-λ/λ_j) / E(λ/λ_j))^{mult_j}` with the genus-`d`
//! elementary factor `E(z) = (1 - z) exp(Σ_{j=1}^{d} z^j / j)`.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::radial::{check_dimension, sh_dim, BoundaryCondition, RadialError, RadialPolynomial, ResonanceSet};
use crate::radial::ScaledPolynomial;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Error)]
pub enum ScatteringError {
    #[error(transparent)]
    Radial(#[from] RadialError),
    #[error("λ = {lambda} is a resonance of mode {mode}")]
    PoleAtResonance { mode: u32, lambda: Complex64 },
    #[error("λ = {lambda} coincides with resonance {resonance}")]
    FactorPole { lambda: Complex64, resonance: Complex64 },
    #[error("mode product not converged by l_max = {l_max} (last |s_l - 1| = {last_defect:.3e})")]
    TruncationNotReached { l_max: u32, last_defect: f64 },
    #[error("phase jump of {jump:.3} rad near λ = {lambda} survives grid refinement")]
    PhaseUnwrapFailure { lambda: f64, jump: f64 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

/// Genus-`d` Weierstrass elementary factor.
pub fn weierstrass_e(z: Complex64, genus: u32) -> Complex64 {
    if z.norm() < 0.5 {
        (-log_e_series(z, genus)).exp()
    } else {
        let mut poly = Complex64::new(0.0, 0.0);
        let mut power = Complex64::new(1.0, 0.0);
        for j in 1..=genus {
            power *= z;
            poly += power / j as f64;
        }
        (1.0 - z) * poly.exp()
    }
}

/// `Σ_{j>genus} z^j / j`, i.e. `-log E(z)`, for `|z| < 1/2`.
fn log_e_series(z: Complex64, genus: u32) -> Complex64 {
    let r = z.norm();
    let mut power = z.powu(genus + 1);
    let mut sum = Complex64::new(0.0, 0.0);
    let mut j = genus + 1;
    loop {
        sum += power / j as f64;
        // Geometric tail bound r^j / (j (1 - r)).
        if power.norm() * r / ((j + 1) as f64 * (1.0 - r)) <= 1e-17 * sum.norm().max(f64::MIN_POSITIVE) {
            break;
        }
        power *= z;
        j += 1;
        if j > 2000 {
            break;
        }
    }
    sum
}

/// `log E(-w) - log E(w)` on the branch that is continuous along every ray
/// through the origin avoiding `±1`: a power series near zero and principal
/// logarithms elsewhere.
pub fn log_factor_ratio(w: Complex64, genus: u32) -> Complex64 {
    let r = w.norm();
    if r < 0.5 {
        let w2 = w * w;
        // First odd exponent above the genus.
        let mut j = if genus % 2 == 0 { genus + 1 } else { genus + 2 };
        let mut power = w.powu(j);
        let mut sum = Complex64::new(0.0, 0.0);
        loop {
            sum += power / j as f64;
            if power.norm() * r * r / ((j + 2) as f64 * (1.0 - r * r)) <= 1e-17 * sum.norm().max(f64::MIN_POSITIVE) {
                break;
            }
            power *= w2;
            j += 2;
            if j > 4000 {
                break;
            }
        }
        2.0 * sum
    } else {
        let mut odd = Complex64::new(0.0, 0.0);
        let mut power = w;
        let w2 = w * w;
        let mut j = 1;
        while j <= genus {
            odd += power / j as f64;
            power *= w2;
            j += 2;
        }
        (1.0 + w).ln() - (1.0 - w).ln() - 2.0 * odd
    }
}

/// Per-mode eigenvalues of the scattering matrix of `B(ρ)`.
///
/// With `P` the radial polynomial and `P*` its coefficient-wise conjugate,
/// `s_l(λ) = σ e^{-2iz} P*(z) / P(z)` at `z = λρ`, where the unit `σ` makes
/// `s_l → 1` as `λ → 0`. Polynomials are built on first use and evaluated in
/// their rescaled monic form, which keeps high modes in range.
#[derive(Debug)]
pub struct DirectDeterminant {
    d: u32,
    radius: f64,
    bc: BoundaryCondition,
    l_max: u32,
    modes: Vec<OnceLock<Option<ScaledPolynomial>>>,
}

/// Value of the truncated mode product with the mode where it stopped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectValue {
    pub value: Complex64,
    pub last_mode: u32,
}

/// Consecutive negligible modes required before the mode product stops.
const QUIET_MODES: u32 = 3;
const MODE_NEGLIGIBLE: f64 = 1e-14;

impl DirectDeterminant {
    pub fn new(d: u32, radius: f64, l_max: u32, bc: BoundaryCondition) -> Result<Self, ScatteringError> {
        check_dimension(d)?;
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(RadialError::InvalidRadius(radius).into());
        }
        Ok(Self {
            d,
            radius,
            bc,
            l_max,
            modes: (0..=l_max).map(|_| OnceLock::new()).collect(),
        })
    }

    pub fn dimension(&self) -> u32 {
        self.d
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn l_max(&self) -> u32 {
        self.l_max
    }

    fn polynomial(&self, l: u32) -> Result<Option<&ScaledPolynomial>, ScatteringError> {
        if l > self.l_max {
            return Err(ScatteringError::InvalidInput(format!("mode {l} above l_max {}", self.l_max)));
        }
        let cell = &self.modes[l as usize];
        if cell.get().is_none() {
            let poly = RadialPolynomial::new(self.d, l, self.bc)?;
            let scaled = (poly.degree() > 0).then(|| poly.scaled());
            let _ = cell.set(scaled);
        }
        Ok(cell.get().and_then(Option::as_ref))
    }

    /// `s_l(λ)`.
    pub fn mode_eigenvalue(&self, l: u32, lambda: Complex64) -> Result<Complex64, ScatteringError> {
        let z = lambda * self.radius;
        let phase = (-2.0 * I * z).exp();
        let Some(scaled) = self.polynomial(l)? else {
            return Ok(phase);
        };
        let w = z / scaled.scale();
        let q = &scaled.poly;
        let denominator = q.eval(w);
        if denominator.norm() <= 1e-13 * q.abs_scale(w) {
            return Err(ScatteringError::PoleAtResonance { mode: l, lambda });
        }
        let conj = q.conjugate_coefficients();
        let q0 = q.coeffs()[0];
        Ok(phase * (q0 / q0.conj()) * conj.eval(w) / denominator)
    }

    /// `∏_l s_l(λ)^{sh_dim(d,l)}`, stopped once `|s_l - 1|` is negligible for
    /// three consecutive modes.
    pub fn evaluate(&self, lambda: Complex64) -> Result<DirectValue, ScatteringError> {
        let mut log = Complex64::new(0.0, 0.0);
        let mut quiet = 0;
        let mut last_defect = f64::INFINITY;
        for l in 0..=self.l_max {
            let s = self.mode_eigenvalue(l, lambda)?;
            let weight = sh_dim(self.d, l) as f64;
            log += weight * s.ln();
            last_defect = (s - 1.0).norm();
            if last_defect < MODE_NEGLIGIBLE {
                quiet += 1;
                if quiet >= QUIET_MODES {
                    return Ok(DirectValue {
                        value: log.exp(),
                        last_mode: l,
                    });
                }
            } else {
                quiet = 0;
            }
        }
        Err(ScatteringError::TruncationNotReached {
            l_max: self.l_max,
            last_defect,
        })
    }
}

/// `s_l(λ)` for `B(ρ)`.
pub fn mode_eigenvalue(
    d: u32,
    radius: f64,
    l: u32,
    lambda: Complex64,
    bc: BoundaryCondition,
) -> Result<Complex64, ScatteringError> {
    DirectDeterminant::new(d, radius, l, bc)?.mode_eigenvalue(l, lambda)
}

/// Scattering determinant of `B(ρ)` from the mode product.
pub fn det_s_direct(
    d: u32,
    radius: f64,
    lambda: Complex64,
    l_max: u32,
    bc: BoundaryCondition,
) -> Result<DirectValue, ScatteringError> {
    DirectDeterminant::new(d, radius, l_max, bc)?.evaluate(lambda)
}

/// Phase polynomial left over by the canonical product for the ball:
/// `log s(λ) = i Σ_k g_k λ^k + Σ_j mult_j log(E(-λ/λ_j) / E(λ/λ_j))`.
///
/// Per mode, `log s_l` minus its own factors is the Taylor part of `log s_l`
/// through order `d`, which is `-2iz + 2 Σ_{odd k ≤ d} z^k S_k / k` with
/// `S_k` the reciprocal root power sums. These vanish for `3 ≤ k ≤ 2l - 1`
/// and `S_1 = i` once the mode has roots, so only a few low modes contribute.
/// Returns `g_0..=g_d`, computed in exact arithmetic and rounded once.
pub fn ball_phase_polynomial(d: u32, radius: f64, bc: BoundaryCondition) -> Result<Vec<f64>, ScatteringError> {
    use num_rational::BigRational;
    use num_traits::{ToPrimitive, Zero};

    check_dimension(d)?;
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(RadialError::InvalidRadius(radius).into());
    }
    let du = d as usize;
    let mut total: Vec<BigRational> = vec![BigRational::zero(); du + 1];
    // Mode (d+1)/2 is the first with every S_k, k ≤ d, forced to the generic
    // value; it is included as a check that it adds nothing.
    for l in 0..=(d + 1) / 2 {
        let poly = RadialPolynomial::new(d, l, bc)?;
        let sums = poly.reciprocal_power_sums(du);
        let weight = BigRational::from_integer(sh_dim(d, l).into());
        for k in (1..=du).step_by(2) {
            // Coefficient of z^k is i times this real number.
            let mut part = &sums[k - 1].im * BigRational::from_integer(2.into()) / BigRational::from_integer(k.into());
            if k == 1 {
                part -= BigRational::from_integer(2.into());
            }
            debug_assert!(sums[k - 1].re.is_zero() || k > 1, "S_1 must be imaginary");
            if l == (d + 1) / 2 && !part.is_zero() {
                return Err(ScatteringError::InvalidInput(format!(
                    "mode {l} contributes to the phase polynomial at order {k}"
                )));
            }
            total[k] += weight.clone() * part;
        }
    }
    Ok(total
        .iter()
        .enumerate()
        .map(|(k, g)| g.to_f64().unwrap_or(f64::NAN) * radius.powi(k as i32))
        .collect())
}

/// The single constant `c` of the product for the Neumann ball, exactly.
/// The lower-order coefficients vanish for Neumann conditions.
pub fn ball_product_constant(d: u32, radius: f64) -> Result<f64, ScatteringError> {
    let g = ball_phase_polynomial(d, radius, BoundaryCondition::Neumann)?;
    Ok(g[d as usize])
}

/// Inputs of the canonical product.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CanonicalProductParams {
    /// Genus of `E`, equal to the dimension.
    pub genus: u32,
    /// Coefficient of `λ^d` in the exponential prefactor (length^d).
    pub c: f64,
    pub resonances: ResonanceSet,
    /// Keep only `|λ_j| ≤ Λ` when set; every entry of the set otherwise.
    pub truncation_radius: Option<f64>,
}

impl CanonicalProductParams {
    pub fn new(resonances: ResonanceSet, c: f64) -> Self {
        Self {
            genus: resonances.dimension,
            c,
            resonances,
            truncation_radius: None,
        }
    }

    pub fn with_truncation(mut self, radius: f64) -> Self {
        self.truncation_radius = Some(radius);
        self
    }

    pub fn with_c(mut self, c: f64) -> Self {
        self.c = c;
        self
    }

    /// Nonzero resonances inside the truncation radius, with multiplicities.
    pub fn kept(&self) -> impl Iterator<Item = (Complex64, f64)> + '_ {
        let cap = self.truncation_radius.unwrap_or(f64::INFINITY);
        self.resonances
            .iter()
            .filter(move |r| r.value.norm() > 0.0 && r.value.norm() <= cap)
            .map(|r| (r.value, r.multiplicity as f64))
    }

    fn effective_radius(&self) -> f64 {
        self.truncation_radius.unwrap_or_else(|| {
            self.resonances
                .iter()
                .map(|r| r.value.norm())
                .fold(0.0, f64::max)
        })
    }
}

/// `Σ_j mult_j log(E(-λ/λ_j) / E(λ/λ_j))`, the product without its
/// exponential prefactor. Continuous in `λ` along the real axis.
pub fn log_product_without_phase(params: &CanonicalProductParams, lambda: Complex64) -> Result<Complex64, ScatteringError> {
    let mut sum = Complex64::new(0.0, 0.0);
    for (rj, mult) in params.kept() {
        let w = lambda / rj;
        if (1.0 - w).norm() < 1e-14 || (1.0 + w).norm() < 1e-14 {
            return Err(ScatteringError::FactorPole {
                lambda,
                resonance: rj,
            });
        }
        sum += mult * log_factor_ratio(w, params.genus);
    }
    Ok(sum)
}

/// `log s(λ)` from the canonical product.
pub fn log_det_s_product(params: &CanonicalProductParams, lambda: Complex64) -> Result<Complex64, ScatteringError> {
    let phase = I * params.c * lambda.powu(params.genus);
    Ok(phase + log_product_without_phase(params, lambda)?)
}

pub fn det_s_product(params: &CanonicalProductParams, lambda: Complex64) -> Result<Complex64, ScatteringError> {
    Ok(log_det_s_product(params, lambda)?.exp())
}

/// Product value with the change seen when the truncation radius is halved.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProductValue {
    pub value: Complex64,
    /// `|log s_Λ - log s_{Λ/2}|`, a bound-style estimate of truncation error.
    pub truncation_estimate: f64,
}

pub fn det_s_product_with_estimate(
    params: &CanonicalProductParams,
    lambda: Complex64,
) -> Result<ProductValue, ScatteringError> {
    let full = log_det_s_product(params, lambda)?;
    let half = params.clone().with_truncation(0.5 * params.effective_radius());
    let coarse = log_det_s_product(&half, lambda)?;
    Ok(ProductValue {
        value: full.exp(),
        truncation_estimate: (full - coarse).norm(),
    })
}

/// `d/dλ log s(λ) = i c d λ^{d-1} + Σ_j mult_j 2 λ^{d+1} / (λ_j^d (λ_j² - λ²))`.
pub fn log_derivative_det(params: &CanonicalProductParams, lambda: f64) -> Result<Complex64, ScatteringError> {
    let d = params.genus;
    let x = Complex64::new(lambda, 0.0);
    let mut sum = I * params.c * d as f64 * lambda.powi(d as i32 - 1);
    let top = 2.0 * lambda.powi(d as i32 + 1);
    for (rj, mult) in params.kept() {
        let gap = rj * rj - x * x;
        if gap.norm() < 1e-14 * rj.norm_sqr() {
            return Err(ScatteringError::FactorPole {
                lambda: x,
                resonance: rj,
            });
        }
        sum += mult * top / (rj.powu(d) * gap);
    }
    Ok(sum)
}

/// Result of fitting `c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantFit {
    pub c: f64,
    /// Largest `|φ(λ) - c λ^d|` over the grid (radians).
    pub residual: f64,
    /// Unwrapped phase `φ = arg(s_direct / product without prefactor)` per grid point.
    pub phases: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitConfig {
    /// Step halvings allowed below the grid spacing while unwrapping.
    pub max_bisections: u32,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self { max_bisections: 16 }
    }
}

pub fn fit_constant_c(
    resonances: &ResonanceSet,
    direct: &(dyn Fn(f64) -> Result<Complex64, ScatteringError> + Sync),
    grid: &[f64],
) -> Result<ConstantFit, ScatteringError> {
    fit_constant_c_with(resonances, direct, grid, &FitConfig::default())
}

/// Least-squares `c` in `φ(λ) ≈ c λ^d`, where `φ` is unwrapped by walking up
/// from `λ = 0` (where both sides equal one) with steps refined until the
/// phase moves by well under `π` per step.
pub fn fit_constant_c_with(
    resonances: &ResonanceSet,
    direct: &(dyn Fn(f64) -> Result<Complex64, ScatteringError> + Sync),
    grid: &[f64],
    config: &FitConfig,
) -> Result<ConstantFit, ScatteringError> {
    if grid.is_empty() || grid.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
        return Err(ScatteringError::InvalidInput("grid must be nonempty and positive".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(ScatteringError::InvalidInput("grid must be increasing".into()));
    }
    let params = CanonicalProductParams::new(resonances.clone(), 0.0);
    let d = params.genus as i32;
    let raw_phase = |x: f64| -> Result<f64, ScatteringError> {
        let lambda = Complex64::new(x, 0.0);
        let ratio = direct(x)? * (-log_product_without_phase(&params, lambda)?).exp();
        Ok(ratio.arg())
    };

    let mut walker = PhaseWalker {
        raw_phase: &raw_phase,
        x: 0.0,
        phi: 0.0,
        slope: 0.0,
        h: grid[0],
    };
    let mut phases = Vec::with_capacity(grid.len());
    for &x in grid {
        phases.push(walker.advance_to(x, config.max_bisections)?);
    }

    let (num, den) = grid
        .iter()
        .zip(&phases)
        .fold((0.0, 0.0), |(n, m), (&x, &phi)| {
            let b = x.powi(d);
            (n + phi * b, m + b * b)
        });
    let c = num / den;
    let residual = grid
        .iter()
        .zip(&phases)
        .map(|(&x, &phi)| (phi - c * x.powi(d)).abs())
        .fold(0.0, f64::max);
    Ok(ConstantFit { c, residual, phases })
}

fn wrap(angle: f64) -> f64 {
    let a = angle.rem_euclid(2.0 * PI);
    if a > PI {
        a - 2.0 * PI
    } else {
        a
    }
}

/// Follows a continuous phase along the real axis from samples known only
/// modulo `2π`. Each step predicts the increment from the current slope and
/// is accepted only if the wrapped correction and the increment itself are
/// small, so a whole turn cannot slip through between two samples.
struct PhaseWalker<'a> {
    raw_phase: &'a dyn Fn(f64) -> Result<f64, ScatteringError>,
    x: f64,
    phi: f64,
    slope: f64,
    h: f64,
}

impl PhaseWalker<'_> {
    fn advance_to(&mut self, target: f64, max_bisections: u32) -> Result<f64, ScatteringError> {
        let min_h = (target - self.x) / f64::powi(2.0, max_bisections as i32);
        while self.x < target {
            let mut h = self.h.min(target - self.x);
            loop {
                let next = if h >= target - self.x { target } else { self.x + h };
                let predicted = self.slope * (next - self.x);
                let correction = wrap((self.raw_phase)(next)? - self.phi - predicted);
                let step = predicted + correction;
                if correction.abs() <= PI / 8.0 && step.abs() <= PI / 2.0 {
                    self.slope = step / (next - self.x);
                    self.h = 2.0 * (next - self.x);
                    self.x = next;
                    self.phi += step;
                    break;
                }
                if 0.5 * h < min_h * (1.0 - 1e-12) {
                    return Err(ScatteringError::PhaseUnwrapFailure {
                        lambda: next,
                        jump: correction,
                    });
                }
                h *= 0.5;
            }
        }
        Ok(self.phi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::ball_resonances;
    use approx::assert_relative_eq;

    fn c64(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn weierstrass_factor_values() {
        assert_eq!(weierstrass_e(c64(0.0, 0.0), 3), c64(1.0, 0.0));
        assert!(weierstrass_e(c64(1.0, 0.0), 3).norm() < 1e-15);
        // Direct formula at a point where cancellation is harmless.
        let z = c64(0.1, 0.0);
        let direct = (1.0 - z) * (z + z * z / 2.0 + z * z * z / 3.0).exp();
        assert_relative_eq!(weierstrass_e(z, 3).re, direct.re, max_relative = 1e-12);
        assert!((weierstrass_e(z, 3).re - (1.0 - 1e-4 / 4.0)).abs() < 1e-5);
    }

    #[test]
    fn series_and_closed_form_agree_across_half() {
        for genus in [3, 5, 7] {
            for &w in &[c64(0.3, 0.2), c64(0.1, -0.45), c64(-0.2, 0.1)] {
                let series = log_factor_ratio(w, genus);
                let mut odd = Complex64::new(0.0, 0.0);
                let mut j = 1;
                while j <= genus {
                    odd += w.powu(j) / j as f64;
                    j += 2;
                }
                let closed = (1.0 + w).ln() - (1.0 - w).ln() - 2.0 * odd;
                // The closed form cancels down to O(w^{genus+2}), so compare absolutely.
                assert!((series - closed).norm() <= 1e-14, "genus {genus} w {w}");
            }
        }
        // Against E itself, away from the series regime.
        let w = c64(0.8, 0.9);
        let ratio = weierstrass_e(-w, 3) / weierstrass_e(w, 3);
        assert!((log_factor_ratio(w, 3).exp() - ratio).norm() < 1e-12 * ratio.norm());
    }

    #[test]
    fn l0_closed_form() {
        for &x in &[0.3, 1.0, 2.7] {
            let z = c64(x, 0.0);
            let expect = (-2.0 * I * z).exp() * (1.0 + I * z) / (1.0 - I * z);
            let got = mode_eigenvalue(3, 1.0, 0, z, BoundaryCondition::Neumann).unwrap();
            assert!((got - expect).norm() < 1e-14);
        }
        let at_one = mode_eigenvalue(3, 1.0, 0, c64(1.0, 0.0), BoundaryCondition::Neumann).unwrap();
        assert!((at_one - Complex64::from_polar(1.0, PI / 2.0 - 2.0)).norm() < 1e-14);
    }

    #[test]
    fn mode_eigenvalue_limits() {
        let dd = DirectDeterminant::new(5, 1.3, 20, BoundaryCondition::Neumann).unwrap();
        for l in [0, 1, 4, 20] {
            let s = dd.mode_eigenvalue(l, c64(1e-6, 0.0)).unwrap();
            assert!((s - 1.0).norm() < 1e-9, "l={l}: {s}");
            let u = dd.mode_eigenvalue(l, c64(2.4, 0.0)).unwrap();
            assert!((u.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn pole_at_resonance() {
        let err = mode_eigenvalue(3, 1.0, 0, c64(0.0, -1.0), BoundaryCondition::Neumann).unwrap_err();
        assert!(matches!(err, ScatteringError::PoleAtResonance { mode: 0, .. }));
        let near = mode_eigenvalue(3, 1.0, 1, c64(1.0, -1.0 + 1e-6), BoundaryCondition::Neumann).unwrap();
        assert!(near.norm() > 1e4);
    }

    #[test]
    fn direct_functional_equation_and_conjugation() {
        let dd = DirectDeterminant::new(3, 1.0, 60, BoundaryCondition::Neumann).unwrap();
        for &x in &[0.05, 0.7, 2.2, 5.0] {
            let plus = dd.evaluate(c64(x, 0.0)).unwrap().value;
            let minus = dd.evaluate(c64(-x, 0.0)).unwrap().value;
            assert!((plus.norm() - 1.0).abs() < 1e-12);
            assert!((plus * minus - 1.0).norm() < 1e-12);
            assert!((plus.conj() - minus).norm() < 1e-12);
        }
    }

    #[test]
    fn truncation_not_reached() {
        let err = det_s_direct(3, 1.0, c64(20.0, 0.0), 3, BoundaryCondition::Neumann).unwrap_err();
        assert!(matches!(err, ScatteringError::TruncationNotReached { l_max: 3, .. }));
    }

    #[test]
    fn flat_at_zero() {
        for d in [3, 5] {
            let dd = DirectDeterminant::new(d, 1.0, 40, BoundaryCondition::Neumann).unwrap();
            let (x1, x2) = (0.02, 0.08);
            let v1 = (dd.evaluate(c64(x1, 0.0)).unwrap().value - 1.0).norm();
            let v2 = (dd.evaluate(c64(x2, 0.0)).unwrap().value - 1.0).norm();
            let slope = (v2 / v1).ln() / (x2 / x1).ln();
            assert!(slope >= (d - 1) as f64 - 0.1, "d={d} slope {slope}");
        }
    }

    #[test]
    fn product_symmetries() {
        let set = ball_resonances(3, 1.0, 6, BoundaryCondition::Neumann).unwrap();
        let params = CanonicalProductParams::new(set, 0.4);
        assert_eq!(det_s_product(&params, c64(0.0, 0.0)).unwrap(), c64(1.0, 0.0));
        for &x in &[0.3, 1.7] {
            let p = det_s_product(&params, c64(x, 0.0)).unwrap();
            let m = det_s_product(&params, c64(-x, 0.0)).unwrap();
            assert!((p * m - 1.0).norm() < 1e-12);
            assert!((p.norm() - 1.0).abs() < 1e-12);
        }
    }

    /// Closed-form oracle for `d = 3, ρ = 1`: modes 0 and 1 have roots `-i`
    /// and `±1 - i`; every higher mode's factors reproduce `s_l` exactly, so
    /// `c = (arg(s_0 s_1³) - arg ∏ factors) / λ³` for any small real `λ`.
    fn c_oracle(x: f64) -> f64 {
        let z = c64(x, 0.0);
        let s0 = (-2.0 * I * z).exp() * (1.0 + I * z) / (1.0 - I * z);
        let n = |z: Complex64| I * z * z - 2.0 * z - 2.0 * I;
        let n_conj = |z: Complex64| -I * z * z - 2.0 * z + 2.0 * I;
        let sigma = n(c64(0.0, 0.0)) / n_conj(c64(0.0, 0.0));
        let s1 = sigma * (-2.0 * I * z).exp() * n_conj(z) / n(z);
        let e = |w: Complex64| (1.0 - w) * (w + w * w / 2.0 + w * w * w / 3.0).exp();
        let factor = |r: Complex64| e(-z / r) / e(z / r);
        let prod = factor(c64(0.0, -1.0)) * (factor(c64(1.0, -1.0)) * factor(c64(-1.0, -1.0))).powu(3);
        ((s0 * s1.powu(3)) / prod).arg() / (x * x * x)
    }

    #[test]
    fn fitted_c_matches_closed_form_oracle() {
        let oracle = c_oracle(0.4);
        assert_relative_eq!(oracle, c_oracle(0.9), max_relative = 1e-9);
        assert_relative_eq!(oracle, 1.0 / 3.0, max_relative = 1e-9);

        let set = ball_resonances(3, 1.0, 30, BoundaryCondition::Neumann).unwrap();
        let dd = DirectDeterminant::new(3, 1.0, 60, BoundaryCondition::Neumann).unwrap();
        let direct = |x: f64| dd.evaluate(c64(x, 0.0)).map(|v| v.value);
        let grid: Vec<f64> = (1..=30).map(|k| 0.1 * k as f64).collect();
        let fit = fit_constant_c(&set, &direct, &grid).unwrap();
        assert_relative_eq!(fit.c, oracle, max_relative = 1e-8);
        assert!(fit.residual < 1e-8);
    }

    #[test]
    fn exact_constant_matches_oracle_and_lemma() {
        let g = ball_phase_polynomial(3, 1.0, BoundaryCondition::Neumann).unwrap();
        assert_eq!(g[0], 0.0);
        assert_eq!(g[1], 0.0);
        assert_relative_eq!(g[3], c_oracle(0.7), max_relative = 1e-9);
        assert_relative_eq!(ball_product_constant(3, 2.0).unwrap(), 8.0 / 3.0, max_relative = 1e-15);
        for d in [5, 7] {
            let g = ball_phase_polynomial(d, 1.0, BoundaryCondition::Neumann).unwrap();
            assert!(g[..d as usize].iter().all(|x| *x == 0.0), "d={d}: {g:?}");
            assert!(g[d as usize] != 0.0);
        }
        // Dirichlet keeps a linear term from the rootless l = 0 mode.
        let g = ball_phase_polynomial(3, 1.0, BoundaryCondition::Dirichlet).unwrap();
        assert_eq!(g[1], -2.0);
    }

    #[test]
    fn fitted_c_matches_exact_constant_in_five_dimensions() {
        let exact = ball_product_constant(5, 1.0).unwrap();
        let set = ball_resonances(5, 1.0, 30, BoundaryCondition::Neumann).unwrap();
        let dd = DirectDeterminant::new(5, 1.0, 60, BoundaryCondition::Neumann).unwrap();
        let direct = |x: f64| dd.evaluate(c64(x, 0.0)).map(|v| v.value);
        let grid: Vec<f64> = (1..=20).map(|k| 0.1 * k as f64).collect();
        let fit = fit_constant_c(&set, &direct, &grid).unwrap();
        assert_relative_eq!(fit.c, exact, max_relative = 1e-6);
    }

    #[test]
    fn c_scales_with_radius_cubed() {
        let grid: Vec<f64> = (1..=20).map(|k| 0.1 * k as f64).collect();
        let fit_at = |rho: f64| {
            let set = ball_resonances(3, rho, 30, BoundaryCondition::Neumann).unwrap();
            let dd = DirectDeterminant::new(3, rho, 80, BoundaryCondition::Neumann).unwrap();
            let direct = |x: f64| dd.evaluate(c64(x, 0.0)).map(|v| v.value);
            fit_constant_c(&set, &direct, &grid).unwrap().c
        };
        assert_relative_eq!(fit_at(2.0) / fit_at(1.0), 8.0, max_relative = 1e-6);
    }

    #[test]
    fn synthetic_round_trip() {
        let set = ball_resonances(3, 1.0, 8, BoundaryCondition::Neumann).unwrap();
        let truth = CanonicalProductParams::new(set.clone(), -0.731);
        let direct = |x: f64| det_s_product(&truth, c64(x, 0.0));
        let grid: Vec<f64> = (1..=40).map(|k| 0.075 * k as f64).collect();
        let fit = fit_constant_c(&set, &direct, &grid).unwrap();
        assert!((fit.c + 0.731).abs() < 1e-10);
    }

    #[test]
    fn unwrap_failure_on_coarse_grid() {
        let set = ResonanceSet::empty(3, BoundaryCondition::Neumann);
        let direct = |x: f64| Ok(Complex64::from_polar(1.0, 40.0 * x * x * x));
        let grid = [1.0, 2.0, 3.0];
        let config = FitConfig { max_bisections: 0 };
        let err = fit_constant_c_with(&set, &direct, &grid, &config).unwrap_err();
        assert!(matches!(err, ScatteringError::PhaseUnwrapFailure { .. }));
        // With refinement the same grid unwraps.
        let fit = fit_constant_c(&set, &direct, &grid).unwrap();
        assert_relative_eq!(fit.c, 40.0, max_relative = 1e-10);
    }

    #[test]
    fn log_derivative_matches_finite_difference() {
        // Toy set {-i} with its own mirror.
        let mut set = ResonanceSet::empty(3, BoundaryCondition::Neumann);
        set.entries.push(crate::Resonance {
            value: c64(0.0, -1.0),
            multiplicity: 1,
            mode: 0,
        });
        let params = CanonicalProductParams::new(set, 0.25);
        assert_eq!(log_derivative_det(&params, 0.0).unwrap(), c64(0.0, 0.0));
        let x = 0.7;
        let h = 1e-5;
        let fd = (log_det_s_product(&params, c64(x + h, 0.0)).unwrap()
            - log_det_s_product(&params, c64(x - h, 0.0)).unwrap())
            / (2.0 * h);
        let exact = log_derivative_det(&params, x).unwrap();
        assert!((fd - exact).norm() < 1e-6 * exact.norm());
        assert!(exact.re.abs() < 1e-12 * exact.norm());
    }

    #[test]
    fn product_estimate_reports_truncation() {
        let set = ball_resonances(3, 1.0, 20, BoundaryCondition::Neumann).unwrap();
        let params = CanonicalProductParams::new(set, 1.0 / 3.0).with_truncation(10.0);
        let v = det_s_product_with_estimate(&params, c64(1.0, 0.0)).unwrap();
        assert!(v.truncation_estimate > 0.0 && v.truncation_estimate.is_finite());
    }
}
