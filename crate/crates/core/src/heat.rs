//! Relative heat traces and their small-time coefficients.
//!
//! The relative trace `Tr(e^{-tΔ_O} - e^{-tΔ_0})` is
//! `(1/2πi) ∫_ℝ e^{-tλ²} (d/dλ) log s(λ) dλ + ½ Σ_{real λ_j} e^{-tλ_j²}`.
//! `d/dλ log s` is even on the real axis, so only `[0, L]` is integrated.
//! Two routes feed the same quadrature: the canonical product over
//! resonances, and the partial-wave phase shifts of the ball.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{sphere_invariants, GeometryError};
use crate::quadrature::GaussLegendre;
use crate::radial::{self, phase_derivative_sum, BoundaryCondition, RadialError, ResonanceSet};
use crate::scattering::{CanonicalProductParams, ScatteringError};

#[derive(Debug, Error)]
pub enum HeatError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("quadrature at t = {t} did not settle (relative change {change:.3e} after refinement)")]
    QuadratureStall { t: f64, change: f64 },
    #[error("trace at t = {t} has imaginary residue {ratio:.3e} relative to its value")]
    ImaginaryResidue { t: f64, ratio: f64 },
    #[error("design matrix condition number {condition:.3e} exceeds {limit:.1e}; shrink the t-range or drop orders")]
    IllConditioned { condition: f64, limit: f64 },
    #[error("fit residual {residual:.3e} exceeds {limit:.1e}")]
    PoorFit { residual: f64, limit: f64 },
    #[error("calibration constant alpha_{index} vanished")]
    ZeroAlpha { index: usize },
    #[error(transparent)]
    Scattering(#[from] ScatteringError),
    #[error(transparent)]
    Radial(#[from] RadialError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeatMethod {
    ResonanceIntegral,
    ModeSum,
}

impl fmt::Display for HeatMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HeatMethod::ResonanceIntegral => "resonance_integral",
            HeatMethod::ModeSum => "mode_sum",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatSamples {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub method: HeatMethod,
    /// `|T_L - T_{L/2}|` per time when the caller asked for it, with the
    /// resonance set cut to half its modes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation_estimates: Option<Vec<f64>>,
}

impl HeatSamples {
    pub fn new(times: Vec<f64>, values: Vec<f64>, method: HeatMethod) -> Result<Self, HeatError> {
        if times.len() != values.len() {
            return Err(HeatError::InvalidInput(format!(
                "{} times but {} values",
                times.len(),
                values.len()
            )));
        }
        if times.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
            return Err(HeatError::InvalidInput("times must be positive and finite".into()));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(HeatError::InvalidInput("times must be increasing".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(HeatError::InvalidInput("trace values must be finite".into()));
        }
        Ok(Self {
            times,
            values,
            method,
            truncation_estimates: None,
        })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// `n` log-spaced times in `[t_min, t_max]`.
pub fn log_time_grid(t_min: f64, t_max: f64, n: usize) -> Vec<f64> {
    assert!(t_min > 0.0 && t_max > t_min && n >= 2, "bad time grid");
    let (a, b) = (t_min.ln(), t_max.ln());
    (0..n)
        .map(|k| (a + (b - a) * k as f64 / (n - 1) as f64).exp())
        .collect()
}

// ---------------------------------------------------------------------------
// Quadrature

const LOW_ORDER: usize = 16;
const HIGH_ORDER: usize = 32;
const QUADRATURE_TOL: f64 = 1e-9;
const MAX_REFINEMENTS: u32 = 4;

/// Integration range `[0, L]`, `L = ceil(8/√t)`, on panels of width `min(1, 1/√t)`.
fn quadrature_layout(t: f64) -> (f64, f64) {
    let root = t.sqrt();
    ((8.0 / root).ceil(), (1.0 / root).min(1.0))
}

/// `∫_0^{L(t)} e^{-tλ²} f(λ) dλ` for every `t`. Times that share a panel
/// width reuse one table of integrand values; each integral is accepted when
/// the 16- and 32-point rules agree, otherwise its panels are halved.
fn gaussian_moments<F>(f: &F, times: &[f64]) -> Result<Vec<Complex64>, HeatError>
where
    F: Fn(f64) -> Complex64 + Sync,
{
    let lo = GaussLegendre::new(LOW_ORDER);
    let hi = GaussLegendre::new(HIGH_ORDER);
    let mut out = vec![Complex64::new(0.0, 0.0); times.len()];

    let mut groups: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
    for (i, &t) in times.iter().enumerate() {
        if !(t > 0.0 && t.is_finite()) {
            return Err(HeatError::InvalidInput(format!("time {t}")));
        }
        groups.entry(quadrature_layout(t).1.to_bits()).or_default().push(i);
    }

    for (width_bits, members) in groups {
        let width = f64::from_bits(width_bits);
        let panels = members
            .iter()
            .map(|&i| panel_count(times[i], width))
            .max()
            .unwrap_or(0);
        let table: Vec<(PanelValues, PanelValues)> = (0..panels)
            .into_par_iter()
            .map(|k| {
                let (a, b) = (k as f64 * width, (k + 1) as f64 * width);
                (PanelValues::new(&lo, a, b, f), PanelValues::new(&hi, a, b, f))
            })
            .collect();
        for &i in &members {
            let t = times[i];
            let used = &table[..panel_count(t, width)];
            let coarse: Complex64 = used.iter().map(|(p, _)| p.moment(t)).sum();
            let fine: Complex64 = used.iter().map(|(_, p)| p.moment(t)).sum();
            out[i] = if settled(coarse, fine) {
                fine
            } else {
                refine(f, t, width, &lo, &hi)?
            };
        }
    }
    Ok(out)
}

fn panel_count(t: f64, width: f64) -> usize {
    (quadrature_layout(t).0 / width).ceil() as usize
}

fn settled(coarse: Complex64, fine: Complex64) -> bool {
    (coarse - fine).norm() <= QUADRATURE_TOL * fine.norm()
}

fn refine<F>(f: &F, t: f64, width: f64, lo: &GaussLegendre, hi: &GaussLegendre) -> Result<Complex64, HeatError>
where
    F: Fn(f64) -> Complex64 + Sync,
{
    let length = quadrature_layout(t).0;
    let mut change = f64::INFINITY;
    for level in 1..=MAX_REFINEMENTS {
        let w = width / f64::powi(2.0, level as i32);
        let panels = (length / w).ceil() as usize;
        let (coarse, fine) = (0..panels)
            .into_par_iter()
            .map(|k| {
                let (a, b) = (k as f64 * w, (k + 1) as f64 * w);
                (
                    PanelValues::new(lo, a, b, f).moment(t),
                    PanelValues::new(hi, a, b, f).moment(t),
                )
            })
            .reduce(
                || (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)),
                |x, y| (x.0 + y.0, x.1 + y.1),
            );
        if settled(coarse, fine) {
            return Ok(fine);
        }
        change = (coarse - fine).norm() / fine.norm();
    }
    Err(HeatError::QuadratureStall { t, change })
}

/// Nodes, weights and integrand values of one panel.
struct PanelValues(Vec<(f64, f64, Complex64)>);

impl PanelValues {
    fn new<F: Fn(f64) -> Complex64>(rule: &GaussLegendre, a: f64, b: f64, f: &F) -> Self {
        Self(rule.mapped(a, b).map(|(x, w)| (x, w, f(x))).collect())
    }

    fn moment(&self, t: f64) -> Complex64 {
        self.0.iter().map(|&(x, w, v)| v * (w * (-t * x * x).exp())).sum()
    }
}

// ---------------------------------------------------------------------------
// Trace from resonances

/// `d/dλ log s` of a canonical product, with per-resonance constants
/// precomputed: `i c d λ^{d-1} + λ^{d+1} Σ_j a_j / (b_j - λ²)`,
/// `a_j = 2 mult_j / λ_j^d`, `b_j = λ_j²`.
#[derive(Debug, Clone)]
pub struct ResonanceHeatTrace {
    d: u32,
    c: f64,
    terms: Vec<(Complex64, Complex64)>,
    /// `(λ_j, mult_j)` on the real axis, for the half-weight sum.
    real: Vec<(f64, f64)>,
}

impl ResonanceHeatTrace {
    pub fn new(params: &CanonicalProductParams) -> Self {
        let d = params.genus;
        let terms = params
            .kept()
            .map(|(rj, mult)| (2.0 * mult / rj.powu(d), rj * rj))
            .collect();
        let real = params
            .resonances
            .iter()
            .filter(|r| r.value.im.abs() <= 1e-12 * (1.0 + r.value.re.abs()))
            .map(|r| (r.value.re, r.multiplicity as f64))
            .collect();
        Self {
            d,
            c: params.c,
            terms,
            real,
        }
    }

    pub fn log_derivative(&self, lambda: f64) -> Complex64 {
        let d = self.d as i32;
        let x2 = lambda * lambda;
        let sum: Complex64 = self.terms.iter().map(|&(a, b)| a / (b - x2)).sum();
        Complex64::new(0.0, self.c * self.d as f64 * lambda.powi(d - 1)) + sum * lambda.powi(d + 1)
    }

    pub fn evaluate(&self, t: f64) -> Result<f64, HeatError> {
        Ok(self.evaluate_many(&[t])?[0])
    }

    pub fn evaluate_many(&self, times: &[f64]) -> Result<Vec<f64>, HeatError> {
        let moments = gaussian_moments(&|x| self.log_derivative(x), times)?;
        times
            .iter()
            .zip(moments)
            .map(|(&t, m)| {
                // (1/πi)(A + iB) = (B - iA)/π
                let value = m.im / PI + self.real_sum(t);
                let imag = -m.re / PI;
                if imag.abs() > 1e-8 * value.abs() {
                    return Err(HeatError::ImaginaryResidue {
                        t,
                        ratio: imag.abs() / value.abs(),
                    });
                }
                Ok(value)
            })
            .collect()
    }

    fn real_sum(&self, t: f64) -> f64 {
        0.5 * self.real.iter().map(|&(x, m)| m * (-t * x * x).exp()).sum::<f64>()
    }
}

/// Relative heat trace at time `t` from the canonical product.
pub fn heat_trace_resonance(params: &CanonicalProductParams, t: f64) -> Result<f64, HeatError> {
    ResonanceHeatTrace::new(params).evaluate(t)
}

/// Samples at every time, optionally with the mode-halving truncation estimate.
pub fn resonance_samples(
    params: &CanonicalProductParams,
    times: &[f64],
    estimate_truncation: bool,
) -> Result<HeatSamples, HeatError> {
    let values = ResonanceHeatTrace::new(params).evaluate_many(times)?;
    let mut samples = HeatSamples::new(times.to_vec(), values, HeatMethod::ResonanceIntegral)?;
    if estimate_truncation {
        let mut half = params.clone();
        half.resonances = params.resonances.truncated_to_mode(params.resonances.l_max / 2);
        let coarse = ResonanceHeatTrace::new(&half).evaluate_many(times)?;
        samples.truncation_estimates = Some(samples.values.iter().zip(coarse).map(|(a, b)| (a - b).abs()).collect());
    }
    Ok(samples)
}

// ---------------------------------------------------------------------------
// Trace from partial waves

fn mode_integrand(d: u32, radius: f64, l_max: u32, bc: BoundaryCondition) -> impl Fn(f64) -> Complex64 + Sync {
    move |x: f64| {
        let sum = phase_derivative_sum(d, bc, x * radius, l_max);
        Complex64::new(sum.value * radius, 0.0)
    }
}

/// Relative heat trace of the ball from the partial-wave phase shifts, modes
/// `0..=l_max`, each summed until its contribution is negligible.
pub fn heat_trace_modes(d: u32, radius: f64, t: f64, l_max: u32, bc: BoundaryCondition) -> Result<f64, HeatError> {
    Ok(mode_samples(d, radius, &[t], l_max, bc)?.values[0])
}

pub fn mode_samples(
    d: u32,
    radius: f64,
    times: &[f64],
    l_max: u32,
    bc: BoundaryCondition,
) -> Result<HeatSamples, HeatError> {
    radial::check_dimension(d)?;
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(RadialError::InvalidRadius(radius).into());
    }
    let moments = gaussian_moments(&mode_integrand(d, radius, l_max, bc), times)?;
    let values = moments.iter().map(|m| m.re / PI).collect();
    HeatSamples::new(times.to_vec(), values, HeatMethod::ModeSum)
}

// ---------------------------------------------------------------------------
// Small-time fit

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatCoefficients {
    pub d: u32,
    /// `a_0..a_{n_max}`; `a_0` also carries the product constant `c`.
    pub a: Vec<f64>,
    /// Covariance of `a`, row-major.
    pub covariance: Vec<Vec<f64>>,
    /// Higher-order coefficients fitted only to keep them out of `a`.
    pub nuisance: Vec<f64>,
    /// Root-mean-square relative residual.
    pub residual: f64,
    /// Condition number of the Gram matrix of the column-equilibrated
    /// weighted design.
    pub condition: f64,
}

impl HeatCoefficients {
    /// `a_0` absorbs `c Γ(d/2) d / 2π`; only `a_1..` are meaningful alone.
    pub fn c_entangled(&self, n: usize) -> bool {
        n == 0
    }

    pub fn std_error(&self, n: usize) -> f64 {
        self.covariance[n][n].max(0.0).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeatFitConfig {
    pub n_max: usize,
    /// Extra orders `n_max+1..=n_max+nuisance_orders` in the basis.
    pub nuisance_orders: usize,
    pub max_condition: f64,
    pub max_residual: f64,
}

impl Default for HeatFitConfig {
    fn default() -> Self {
        Self {
            n_max: 3,
            nuisance_orders: 3,
            max_condition: 1e10,
            max_residual: 1e-6,
        }
    }
}

pub fn fit_heat_coefficients(samples: &HeatSamples, d: u32, n_max: usize) -> Result<HeatCoefficients, HeatError> {
    let config = HeatFitConfig {
        n_max,
        ..HeatFitConfig::default()
    };
    fit_heat_coefficients_with(samples, d, &config)
}

/// Weighted least squares for `T(t) ≈ t^{-d/2} Σ_n a_n t^{n/2}` with relative
/// weights `t^{d/2}`, i.e. a polynomial fit in `√t` to `t^{d/2} T(t)`.
pub fn fit_heat_coefficients_with(
    samples: &HeatSamples,
    d: u32,
    config: &HeatFitConfig,
) -> Result<HeatCoefficients, HeatError> {
    let orders = config.n_max + config.nuisance_orders + 1;
    let m = samples.len();
    if m < 2 * (config.n_max + 1) || m < orders + 1 {
        return Err(HeatError::InvalidInput(format!(
            "{m} samples cannot determine {orders} coefficients"
        )));
    }
    let (t_lo, t_hi) = (samples.times[0], samples.times[m - 1]);
    if (t_hi / t_lo).log10() < 1.5 {
        return Err(HeatError::InvalidInput(format!(
            "times span {:.2} decades, need 1.5",
            (t_hi / t_lo).log10()
        )));
    }

    // Columns u^n with u = √(t / t_hi) in (0, 1], then unit-normalised.
    let half_d = d as f64 / 2.0;
    let mut design = DMatrix::from_fn(m, orders, |i, n| (samples.times[i] / t_hi).sqrt().powi(n as i32));
    let rhs = DVector::from_iterator(
        m,
        samples
            .times
            .iter()
            .zip(&samples.values)
            .map(|(t, v)| t.powf(half_d) * v),
    );
    let norms: Vec<f64> = design.column_iter().map(|c| c.norm()).collect();
    for (n, norm) in norms.iter().enumerate() {
        design.column_mut(n).scale_mut(1.0 / norm);
    }

    let svd = design.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition = (smax / smin).powi(2);
    if !(condition <= config.max_condition) {
        return Err(HeatError::IllConditioned {
            condition,
            limit: config.max_condition,
        });
    }
    let coef = svd
        .solve(&rhs, 0.0)
        .map_err(|e| HeatError::InvalidInput(e.to_string()))?;

    let fitted = &design * &coef;
    let scale = rhs.norm() / (m as f64).sqrt();
    let residual = ((&rhs - &fitted).norm() / (m as f64).sqrt()) / scale.max(f64::MIN_POSITIVE);
    if !(residual <= config.max_residual) {
        return Err(HeatError::PoorFit {
            residual,
            limit: config.max_residual,
        });
    }

    // a_n = coef_n / (norm_n t_hi^{n/2}); covariance maps with the same factors.
    let factor: Vec<f64> = (0..orders)
        .map(|n| 1.0 / (norms[n] * t_hi.sqrt().powi(n as i32)))
        .collect();
    let a_all: Vec<f64> = (0..orders).map(|n| coef[n] * factor[n]).collect();
    let dof = (m - orders).max(1) as f64;
    let sigma2 = (&rhs - &fitted).norm_squared() / dof;
    let v_sigma = svd.v_t.as_ref().expect("svd computed with V").transpose();
    let inv_s2: Vec<f64> = svd.singular_values.iter().map(|s| 1.0 / (s * s)).collect();
    let keep = config.n_max + 1;
    let covariance = (0..keep)
        .map(|i| {
            (0..keep)
                .map(|j| {
                    let mut acc = 0.0;
                    for (k, w) in inv_s2.iter().enumerate() {
                        acc += v_sigma[(i, k)] * v_sigma[(j, k)] * w;
                    }
                    acc * sigma2 * factor[i] * factor[j]
                })
                .collect()
        })
        .collect();

    Ok(HeatCoefficients {
        d,
        a: a_all[..keep].to_vec(),
        covariance,
        nuisance: a_all[keep..].to_vec(),
        residual,
        condition,
    })
}

// ---------------------------------------------------------------------------
// Pipeline and calibration

/// Length unit `ℓ` of the time grid `[t_min, t_max] ℓ²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LengthScale {
    /// `ℓ = 1 / min |λ_j|`, which follows the obstacle under dilation.
    FromResonances,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatPipelineConfig {
    /// Dimensionless time range, multiplied by `ℓ²`.
    pub t_min: f64,
    pub t_max: f64,
    pub nt: usize,
    pub length: LengthScale,
    /// Product constant used for the trace; only `a_0` depends on it.
    pub c: f64,
    pub fit: HeatFitConfig,
    pub estimate_truncation: bool,
}

impl Default for HeatPipelineConfig {
    fn default() -> Self {
        Self {
            t_min: 1e-3,
            t_max: 1e-1,
            nt: 24,
            length: LengthScale::FromResonances,
            c: 0.0,
            fit: HeatFitConfig::default(),
            estimate_truncation: false,
        }
    }
}

impl HeatPipelineConfig {
    pub fn length_for(&self, set: &ResonanceSet) -> Result<f64, HeatError> {
        match self.length {
            LengthScale::Fixed(l) if l > 0.0 && l.is_finite() => Ok(l),
            LengthScale::Fixed(l) => Err(HeatError::InvalidInput(format!("length scale {l}"))),
            LengthScale::FromResonances => set
                .min_modulus()
                .map(|m| 1.0 / m)
                .ok_or_else(|| HeatError::InvalidInput("empty resonance set has no length scale".into())),
        }
    }

    pub fn times(&self, length: f64) -> Vec<f64> {
        log_time_grid(self.t_min * length * length, self.t_max * length * length, self.nt)
    }
}

/// Modes needed so that the set covers the wavenumbers the smallest time
/// sees: `e^{-t λ²}` drops below `e^{-30}` before the missing modes matter.
pub fn required_l_max(radius: f64, t_min: f64) -> u32 {
    (radius * (30.0 / t_min).sqrt()).ceil() as u32 + 10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatPipelineResult {
    pub length_scale: f64,
    pub samples: HeatSamples,
    pub coefficients: HeatCoefficients,
}

pub fn run_heat_pipeline(set: &ResonanceSet, config: &HeatPipelineConfig) -> Result<HeatPipelineResult, HeatError> {
    let length = config.length_for(set)?;
    let times = config.times(length);
    let params = CanonicalProductParams::new(set.clone(), config.c);
    let samples = resonance_samples(&params, &times, config.estimate_truncation)?;
    let coefficients = fit_heat_coefficients_with(&samples, set.dimension, &config.fit)?;
    Ok(HeatPipelineResult {
        length_scale: length,
        samples,
        coefficients,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationConstants {
    pub d: u32,
    /// `α_1, α_2, α_3`
    pub alpha: [f64; 3],
    /// Radius of the ball the constants were read off.
    pub radius: f64,
    pub l_max: u32,
    pub t_min: f64,
    pub t_max: f64,
    pub nt: usize,
}

impl CalibrationConstants {
    pub fn new(d: u32, alpha: [f64; 3]) -> Result<Self, HeatError> {
        if let Some(i) = alpha.iter().position(|a| *a == 0.0 || !a.is_finite()) {
            return Err(HeatError::ZeroAlpha { index: i + 1 });
        }
        Ok(Self {
            d,
            alpha,
            radius: f64::NAN,
            l_max: 0,
            t_min: f64::NAN,
            t_max: f64::NAN,
            nt: 0,
        })
    }
}

/// Calibrates on the unit ball.
pub fn calibrate_alphas(d: u32) -> Result<CalibrationConstants, HeatError> {
    calibrate_alphas_with(d, 1.0, &HeatPipelineConfig::default())
}

pub fn calibrate_alphas_with(d: u32, radius: f64, config: &HeatPipelineConfig) -> Result<CalibrationConstants, HeatError> {
    let l_max = required_l_max(1.0, config.t_min);
    let set = radial::ball_resonances(d, radius, l_max, BoundaryCondition::Neumann)?;
    calibrate_from_set(&set, radius, config)
}

/// Divides the fitted `a_1..a_3` of a Neumann ball of radius `radius` by the
/// sphere's boundary invariants.
pub fn calibrate_from_set(set: &ResonanceSet, radius: f64, config: &HeatPipelineConfig) -> Result<CalibrationConstants, HeatError> {
    if set.bc != BoundaryCondition::Neumann {
        return Err(HeatError::InvalidInput("calibration needs Neumann resonances".into()));
    }
    let run = run_heat_pipeline(set, config)?;
    let sphere = sphere_invariants(set.dimension, radius, 1)?;
    let a = &run.coefficients.a;
    let mut cal = CalibrationConstants::new(set.dimension, [a[1] / sphere.a1, a[2] / sphere.a2, a[3] / sphere.a3])?;
    cal.radius = radius;
    cal.l_max = set.l_max;
    cal.t_min = config.t_min;
    cal.t_max = config.t_max;
    cal.nt = config.nt;
    Ok(cal)
}

// ---------------------------------------------------------------------------
// Literature constants

/// Reference values of `α_1..α_3` per dimension, read from text lines
/// `d = α_1, α_2, α_3` (`#` starts a comment).
///
/// Reference tables use the usual normalisation of the trace, in which the
/// spectral-shift integral runs over `λ > 0`; ours runs over the whole line,
/// so calibrated constants are [`LITERATURE_NORMALIZATION`] times larger.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LiteratureAlphas {
    pub entries: BTreeMap<u32, [f64; 3]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaComparison {
    pub reference: [f64; 3],
    pub relative_difference: [f64; 3],
    pub within_tolerance: bool,
}

/// Ratio of calibrated constants to half-line reference values.
pub const LITERATURE_NORMALIZATION: f64 = 2.0;

impl LiteratureAlphas {
    pub fn parse(text: &str) -> Result<Self, HeatError> {
        let mut entries = BTreeMap::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |msg: &str| HeatError::InvalidInput(format!("line {}: {msg}", no + 1));
            let (key, rest) = line.split_once('=').ok_or_else(|| bad("expected `d = a1, a2, a3`"))?;
            let d: u32 = key.trim().parse().map_err(|_| bad("dimension is not an integer"))?;
            let values: Vec<f64> = rest
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|_| bad("constant is not a number"))?;
            let alpha: [f64; 3] = values.try_into().map_err(|_| bad("need exactly three constants"))?;
            entries.insert(d, alpha);
        }
        Ok(Self { entries })
    }

    pub fn load(path: impl AsRef<Path>) -> crate::Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| crate::Error::io(path, e))?;
        Ok(Self::parse(&text)?)
    }

    pub fn compare(&self, cal: &CalibrationConstants, tolerance: [f64; 3]) -> Option<AlphaComparison> {
        let reference = *self.entries.get(&cal.d)?;
        let mut relative_difference = [0.0; 3];
        for i in 0..3 {
            let expected = LITERATURE_NORMALIZATION * reference[i];
            relative_difference[i] = (cal.alpha[i] - expected).abs() / expected.abs();
        }
        let within_tolerance = (0..3).all(|i| relative_difference[i] <= tolerance[i]);
        Some(AlphaComparison {
            reference,
            relative_difference,
            within_tolerance,
        })
    }
}
