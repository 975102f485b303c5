//! Deciding "disjoint union of `m` equal balls" from `(A1, A2, A3)`.
//!
//! Cauchy–Schwarz gives `A3 A1 ≥ (13 + 2/(d-1)) A2²` with equality exactly
//! when every component is a round sphere of one common radius. On equality
//! the first two invariants fix the radius and the count.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::GeometricInvariants;
use crate::heat::{run_heat_pipeline, CalibrationConstants, HeatError, HeatPipelineConfig, HeatPipelineResult};
use crate::radial::ResonanceSet;
use crate::special::unit_sphere_area;

/// Tolerance for invariants that come out of the heat pipeline.
pub const PIPELINE_TOLERANCE: f64 = 0.05;
/// Tolerance for invariants from closed forms or surface quadrature.
pub const EXACT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum RigidityError {
    #[error("invariant A{index} = {value} must be positive")]
    NonPositiveInvariant { index: usize, value: f64 },
    #[error("tolerance must be positive and finite, got {0}")]
    InvalidTolerance(f64),
    #[error("dimension {0} is not supported here (need d >= 3)")]
    InvalidDimension(u32),
    #[error("calibration is for d = {calibration}, resonances for d = {resonances}")]
    DimensionMismatch { calibration: u32, resonances: u32 },
    #[error(transparent)]
    Heat(#[from] HeatError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentifyResult {
    pub d: u32,
    pub is_union_of_equal_balls: bool,
    /// Set only with a positive verdict.
    pub m: Option<u32>,
    pub rho: Option<f64>,
    /// `A1 / (σ_d ρ̂^{d-1})` before rounding.
    pub m_hat: f64,
    /// `(d-1) A1 / A2`
    pub rho_hat: f64,
    pub cs_defect: f64,
    pub af_defect: Option<f64>,
    /// False unless the invariants carry a convexity guarantee; only then is
    /// `af_defect ≥ 0` backed by the inequality.
    pub af_convexity_verified: bool,
    pub tolerance: f64,
    /// Why the verdict is negative; empty when positive.
    pub reasons: Vec<String>,
}

impl fmt::Display for IdentifyResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "union_of_equal_balls: {}", self.is_union_of_equal_balls)?;
        match (self.m, self.rho) {
            (Some(m), Some(rho)) => write!(f, ", m={m}, rho={rho:.2}±{:.2}", self.tolerance * rho)?,
            _ => write!(f, ", m_hat={:.4}, rho_hat={:.4}", self.m_hat, self.rho_hat)?,
        }
        write!(f, ", cs_defect={:.3e}", self.cs_defect)?;
        if let Some(af) = self.af_defect {
            let note = if self.af_convexity_verified { "" } else { " (convexity not verified)" };
            write!(f, ", af_defect={af:.3e}{note}")?;
        }
        for r in &self.reasons {
            write!(f, "; {r}")?;
        }
        Ok(())
    }
}

/// Runs the equal-ball decision on `inv` with relative tolerance `tol`.
pub fn identify(inv: &GeometricInvariants, tol: f64) -> Result<IdentifyResult, RigidityError> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(RigidityError::InvalidTolerance(tol));
    }
    let d = inv.d;
    if d < 3 {
        return Err(RigidityError::InvalidDimension(d));
    }
    for (i, v) in inv.as_array().into_iter().enumerate() {
        if !(v > 0.0 && v.is_finite()) {
            return Err(RigidityError::NonPositiveInvariant { index: i + 1, value: v });
        }
    }
    let sigma = unit_sphere_area(d);
    let k = (d - 1) as f64;
    let rho_hat = k * inv.a1 / inv.a2;
    let m_hat = inv.a1 / (sigma * rho_hat.powi(d as i32 - 1));
    let cs_defect = inv.cauchy_schwarz_defect();

    let mut reasons = Vec::new();
    if cs_defect > tol {
        reasons.push(format!("Cauchy-Schwarz defect {cs_defect:.3e} exceeds {tol:.1e}"));
    }
    let nearest = m_hat.round();
    let frac = m_hat - m_hat.floor();
    if (frac - 0.5).abs() <= 4.0 * f64::EPSILON * m_hat {
        reasons.push(format!("m_hat = {m_hat} is a half-integer"));
    } else if nearest < 1.0 {
        reasons.push(format!("m_hat = {m_hat:.4} rounds to no ball"));
    } else if (m_hat - nearest).abs() > tol * nearest {
        reasons.push(format!("m_hat = {m_hat:.6} is not within {tol:.1e} of an integer"));
    }
    let verdict = reasons.is_empty();

    Ok(IdentifyResult {
        d,
        is_union_of_equal_balls: verdict,
        m: verdict.then_some(nearest as u32),
        rho: verdict.then_some(rho_hat),
        m_hat,
        rho_hat,
        cs_defect,
        af_defect: Some(alexandrov_fenchel_defect(inv)),
        af_convexity_verified: inv.convex == Some(true),
        tolerance: tol,
        reasons,
    })
}

/// `(A2/((d-1)σ_d))^{1/(d-2)} / (A1/σ_d)^{1/(d-1)} - 1`.
///
/// Scale-free; nonnegative on convex bodies with zero only for the ball. The
/// invariants cannot certify convexity, so that is the caller's claim.
pub fn alexandrov_fenchel_defect(inv: &GeometricInvariants) -> f64 {
    let d = inv.d as f64;
    let sigma = unit_sphere_area(inv.d);
    let mean_width = (inv.a2 / ((d - 1.0) * sigma)).powf(1.0 / (d - 2.0));
    let area_radius = (inv.a1 / sigma).powf(1.0 / (d - 1.0));
    mean_width / area_radius - 1.0
}

/// Boundary invariants read off a resonance set: the heat pipeline's fitted
/// `a_1..a_3` divided by the calibrated constants.
pub fn invariants_from_resonances(
    set: &ResonanceSet,
    cal: &CalibrationConstants,
    config: &HeatPipelineConfig,
) -> Result<GeometricInvariants, RigidityError> {
    Ok(recover_invariants(set, cal, config)?.1)
}

/// Like [`invariants_from_resonances`], also returning the pipeline run.
pub fn recover_invariants(
    set: &ResonanceSet,
    cal: &CalibrationConstants,
    config: &HeatPipelineConfig,
) -> Result<(HeatPipelineResult, GeometricInvariants), RigidityError> {
    if cal.d != set.dimension {
        return Err(RigidityError::DimensionMismatch {
            calibration: cal.d,
            resonances: set.dimension,
        });
    }
    let run = run_heat_pipeline(set, config)?;
    let a = &run.coefficients.a;
    let inv = GeometricInvariants::new(set.dimension, a[1] / cal.alpha[0], a[2] / cal.alpha[1], a[3] / cal.alpha[2]);
    Ok((run, inv))
}
