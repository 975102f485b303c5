//! Gaussian-smoothed resonance wave traces and a scan for where they blow up
//! as the smoothing is removed.

use std::fmt;
use std::io::{self, Write};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::radial::ResonanceSet;

#[derive(Debug, Error)]
pub enum WaveError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

/// Sign of the exponent in `e^{±iλ|t|}`.
///
/// Resonances sit in the lower half plane, so `e^{iλ|t|}` grows like
/// `e^{|Im λ| |t|}` term by term while `e^{-iλ|t|}` decays. The decaying form
/// is the outgoing convention and the default; the other is kept for
/// comparison.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WaveConvention {
    #[default]
    Decaying,
    Literal,
}

impl fmt::Display for WaveConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WaveConvention::Decaying => "decaying",
            WaveConvention::Literal => "literal",
        })
    }
}

/// `Σ_j mult_j e^{-iλ_j|t|} e^{-ε²|λ_j|²/2}`.
pub fn smoothed_wave_trace(set: &ResonanceSet, t: f64, eps: f64) -> Complex64 {
    smoothed_wave_trace_with(set, t, eps, WaveConvention::Decaying)
}

pub fn smoothed_wave_trace_with(set: &ResonanceSet, t: f64, eps: f64, convention: WaveConvention) -> Complex64 {
    let sign = match convention {
        WaveConvention::Decaying => -1.0,
        WaveConvention::Literal => 1.0,
    };
    let phase = Complex64::new(0.0, sign * t.abs());
    set.iter()
        .map(|r| {
            let weight = (-0.5 * eps * eps * r.value.norm_sqr()).exp();
            r.multiplicity as f64 * weight * (phase * r.value).exp()
        })
        .sum()
}

/// Modes needed for a smoothing width `eps` on `B(ρ)`: mode `l` resonances
/// have `|λ| ≳ l/ρ`, and the Gaussian weight is below `e^{-30}` past
/// `|λ| = √60/ε`.
pub fn required_l_max(radius: f64, eps: f64) -> u32 {
    (radius * 60f64.sqrt() / eps).ceil() as u32 + 10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothedTraceTable {
    pub times: Vec<f64>,
    /// Decreasing.
    pub epsilons: Vec<f64>,
    /// `values[i][k] = u_{ε_k}(t_i)`.
    pub values: Vec<Vec<Complex64>>,
    /// Slope of `log|u_ε(t)|` against `log(1/ε)` per time.
    pub growth_exponents: Vec<f64>,
    pub convention: WaveConvention,
}

impl SmoothedTraceTable {
    /// One row per `(t, ε)`, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "t,epsilon,re,im,abs,growth_exponent")?;
        for (i, t) in self.times.iter().enumerate() {
            for (k, eps) in self.epsilons.iter().enumerate() {
                let u = self.values[i][k];
                writeln!(
                    out,
                    "{t:.16e},{eps:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                    u.re,
                    u.im,
                    u.norm(),
                    self.growth_exponents[i]
                )?;
            }
        }
        Ok(())
    }
}

pub fn singular_support_scan(
    set: &ResonanceSet,
    times: &[f64],
    epsilons: &[f64],
) -> Result<SmoothedTraceTable, WaveError> {
    singular_support_scan_with(set, times, epsilons, WaveConvention::Decaying)
}

pub fn singular_support_scan_with(
    set: &ResonanceSet,
    times: &[f64],
    epsilons: &[f64],
    convention: WaveConvention,
) -> Result<SmoothedTraceTable, WaveError> {
    if epsilons.len() < 2 {
        return Err(WaveError::InvalidInput("need at least two widths".into()));
    }
    if epsilons.iter().any(|e| !(*e > 0.0 && e.is_finite())) || epsilons.windows(2).any(|w| w[1] >= w[0]) {
        return Err(WaveError::InvalidInput("widths must be positive and decreasing".into()));
    }
    if times.iter().any(|t| !t.is_finite()) {
        return Err(WaveError::InvalidInput("times must be finite".into()));
    }
    let values: Vec<Vec<Complex64>> = times
        .par_iter()
        .map(|&t| {
            epsilons
                .iter()
                .map(|&e| smoothed_wave_trace_with(set, t, e, convention))
                .collect()
        })
        .collect();
    let growth_exponents = values.iter().map(|row| growth_exponent(epsilons, row)).collect();
    Ok(SmoothedTraceTable {
        times: times.to_vec(),
        epsilons: epsilons.to_vec(),
        values,
        growth_exponents,
        convention,
    })
}

/// Least-squares slope of `log|u|` on `log(1/ε)`, over the nonzero values.
fn growth_exponent(epsilons: &[f64], row: &[Complex64]) -> f64 {
    let pts: Vec<(f64, f64)> = epsilons
        .iter()
        .zip(row)
        .filter(|(_, u)| u.norm() > 0.0)
        .map(|(e, u)| (-e.ln(), u.norm().ln()))
        .collect();
    if pts.len() < 2 {
        return 0.0;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::{BoundaryCondition, Resonance};
    use approx::assert_relative_eq;

    fn set_of(values: &[Complex64]) -> ResonanceSet {
        let mut set = ResonanceSet::empty(3, BoundaryCondition::Neumann);
        set.entries = values
            .iter()
            .map(|&value| Resonance {
                value,
                multiplicity: 1,
                mode: 0,
            })
            .collect();
        set
    }

    #[test]
    fn single_resonance_both_conventions() {
        let set = set_of(&[Complex64::new(0.0, -1.0)]);
        let literal = smoothed_wave_trace_with(&set, 1.0, 0.0, WaveConvention::Literal);
        assert_relative_eq!(literal.re, std::f64::consts::E, max_relative = 1e-15);
        let decaying = smoothed_wave_trace(&set, 1.0, 0.0);
        assert_relative_eq!(decaying.re, (-1.0f64).exp(), max_relative = 1e-15);
        // Even in t.
        assert_eq!(smoothed_wave_trace(&set, -1.0, 0.0), decaying);
    }

    #[test]
    fn mirror_pair_gives_damped_cosine() {
        let set = set_of(&[Complex64::new(1.0, -1.0), Complex64::new(-1.0, -1.0)]);
        for t in [0.3, 1.0, 2.5] {
            let u = smoothed_wave_trace(&set, t, 0.0);
            assert_relative_eq!(u.re, 2.0 * (-t).exp() * t.cos(), max_relative = 1e-14);
            assert!(u.im.abs() < 1e-15);
        }
    }

    #[test]
    fn wide_smoothing_kills_everything() {
        let set = set_of(&[Complex64::new(1.0, -1.0), Complex64::new(-1.0, -1.0)]);
        assert!(smoothed_wave_trace(&set, 1.0, 100.0).norm() < 1e-300);
    }

    #[test]
    fn empty_set_scans_to_zero() {
        let set = ResonanceSet::empty(3, BoundaryCondition::Neumann);
        let table = singular_support_scan(&set, &[0.5, 1.0], &[0.2, 0.1]).unwrap();
        assert!(table.values.iter().flatten().all(|u| *u == Complex64::new(0.0, 0.0)));
        assert_eq!(table.growth_exponents, vec![0.0, 0.0]);
    }

    #[test]
    fn scan_validates_widths() {
        let set = ResonanceSet::empty(3, BoundaryCondition::Neumann);
        assert!(singular_support_scan(&set, &[1.0], &[0.1, 0.2]).is_err());
        assert!(singular_support_scan(&set, &[1.0], &[0.1]).is_err());
        assert!(singular_support_scan(&set, &[1.0], &[0.2, 0.0]).is_err());
    }

    #[test]
    fn exponent_of_a_power_law() {
        let eps = [0.4, 0.2, 0.1];
        let row: Vec<Complex64> = eps.iter().map(|e: &f64| Complex64::new(e.powf(-1.5), 0.0)).collect();
        assert_relative_eq!(growth_exponent(&eps, &row), 1.5, max_relative = 1e-12);
    }

    #[test]
    fn csv_has_header_and_full_precision() {
        let set = set_of(&[Complex64::new(1.0, -1.0)]);
        let table = singular_support_scan(&set, &[1.0], &[0.2, 0.1]).unwrap();
        let mut buf = Vec::new();
        table.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], "t,epsilon,re,im,abs,growth_exponent");
        assert!(lines[1].starts_with("1.0000000000000000e0,2.0000000000000001e-1,"));
    }
}
