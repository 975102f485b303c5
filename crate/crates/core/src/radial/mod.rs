//! Radial data of the ball: resonance polynomials per angular mode, spherical
//! harmonic multiplicities, and assembled resonance sets.

mod hankel;
mod polynomial;

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::polyroot::{self, RootConfig, RootError};

pub use hankel::{
    hankel_ratio, mode_phase_derivative, newton_ratio, phase_derivative_sum, radial_log_derivative,
    HankelRatios, PhaseSum,
};
pub use polynomial::{ExactEvaluator, GaussianRational, RadialPolynomial, ScaledPolynomial};

/// Modes used when no cap is given (d = 3).
pub const DEFAULT_L_MAX: u32 = 60;

#[derive(Debug, Error)]
pub enum RadialError {
    #[error("dimension must be odd and >= 3, got {0}")]
    InvalidDimension(u32),
    #[error("radius must be positive and finite, got {0}")]
    InvalidRadius(f64),
    #[error("root finding failed for mode l={mode}: {source}")]
    ModeSolve {
        mode: u32,
        #[source]
        source: RootError,
    },
    #[error("roots of mode l={mode} failed verification: {reason}")]
    Unverified { mode: u32, reason: String },
}

#[derive(Debug, Default, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryCondition {
    #[default]
    Neumann,
    Dirichlet,
}

impl fmt::Display for BoundaryCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundaryCondition::Neumann => "neumann",
            BoundaryCondition::Dirichlet => "dirichlet",
        })
    }
}

impl FromStr for BoundaryCondition {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "neumann" | "n" => Ok(BoundaryCondition::Neumann),
            "dirichlet" | "d" => Ok(BoundaryCondition::Dirichlet),
            other => Err(format!("unknown boundary condition `{other}`")),
        }
    }
}

pub(crate) fn check_dimension(d: u32) -> Result<(), RadialError> {
    if d < 3 || d % 2 == 0 {
        Err(RadialError::InvalidDimension(d))
    } else {
        Ok(())
    }
}

/// Dimension of the degree-`l` spherical harmonics on `S^{d-1}`.
pub fn sh_dim(d: u32, l: u32) -> u64 {
    if l == 0 {
        return 1;
    }
    let (d, l) = (d as u64, l as u64);
    // (2l+d-2)/(d-2) · C(l+d-3, l) = (2l+d-2) (l+d-3)! / (l! (d-2)!)
    let c = crate::special::binomial(l + d - 3, l);
    let n = c * (2 * l + d - 2) as u128 / (d - 2) as u128;
    u64::try_from(n).expect("spherical harmonic dimension overflows u64")
}

/// One resonance, in wavenumber units (1/length).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Resonance {
    pub value: Complex64,
    pub multiplicity: u64,
    /// Angular mode that produced it.
    pub mode: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResonanceSet {
    pub dimension: u32,
    pub radius: f64,
    pub bc: BoundaryCondition,
    pub l_max: u32,
    pub entries: Vec<Resonance>,
}

impl ResonanceSet {
    pub fn empty(dimension: u32, bc: BoundaryCondition) -> Self {
        Self {
            dimension,
            radius: 1.0,
            bc,
            l_max: 0,
            entries: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Resonance> {
        self.entries.iter()
    }

    pub fn total_multiplicity(&self) -> u64 {
        self.entries.iter().map(|r| r.multiplicity).sum()
    }

    pub fn mode_entries(&self, l: u32) -> impl Iterator<Item = &Resonance> {
        self.entries.iter().filter(move |r| r.mode == l)
    }

    /// Smallest resonance modulus; the natural inverse length of the set.
    pub fn min_modulus(&self) -> Option<f64> {
        self.entries
            .iter()
            .map(|r| r.value.norm())
            .filter(|m| *m > 0.0)
            .min_by(f64::total_cmp)
    }

    /// Largest `|Re λ|` among the top mode: beyond this wavenumber the modes
    /// missing from the set start to matter on the real axis.
    pub fn coverage(&self) -> f64 {
        self.mode_entries(self.l_max)
            .map(|r| r.value.re.abs())
            .fold(0.0, f64::max)
    }

    /// Largest distance from `-conj(λ)` to the nearest resonance with the
    /// same multiplicity; zero for a reflection-closed set.
    pub fn mirror_defect(&self) -> f64 {
        self.entries
            .iter()
            .map(|r| {
                let mirror = -r.value.conj();
                self.entries
                    .iter()
                    .filter(|o| o.multiplicity == r.multiplicity)
                    .map(|o| (o.value - mirror).norm())
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    }

    /// The subset produced by modes `0..=l_max`.
    pub fn truncated_to_mode(&self, l_max: u32) -> Self {
        Self {
            l_max: l_max.min(self.l_max),
            entries: self.entries.iter().filter(|r| r.mode <= l_max).copied().collect(),
            ..self.clone()
        }
    }

    /// Resonances of the obstacle dilated by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        scale_resonances(self, factor)
    }
}

/// Dilates the obstacle: values divide by `factor`, the radius multiplies.
pub fn scale_resonances(set: &ResonanceSet, factor: f64) -> ResonanceSet {
    assert!(factor > 0.0 && factor.is_finite(), "scale factor must be positive");
    ResonanceSet {
        radius: set.radius * factor,
        entries: set
            .entries
            .iter()
            .map(|r| Resonance {
                value: r.value / factor,
                ..*r
            })
            .collect(),
        ..set.clone()
    }
}

/// Roots of one radial polynomial (unit radius), polished and checked.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeRoots {
    pub mode: u32,
    pub roots: Vec<(Complex64, usize)>,
    /// Largest relative Newton correction `|p/p'| / |z|` over the roots,
    /// from exact evaluation.
    pub max_residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallConfig {
    pub root: RootConfig,
    /// Relative step at which refinement stops.
    pub refine_tolerance: f64,
    /// Largest relative Newton correction accepted on a polished root.
    pub residual_tolerance: f64,
    /// Modes up to this one start from the rounded-coefficient solve; higher
    /// ones continue from the mode below.
    pub direct_modes: u32,
}

impl Default for BallConfig {
    fn default() -> Self {
        Self {
            root: RootConfig {
                verify: false,
                ..RootConfig::default()
            },
            refine_tolerance: 1e-12,
            residual_tolerance: 1e-10,
            direct_modes: 32,
        }
    }
}

/// Solves the radial polynomial of mode `l`. Modes above
/// [`BallConfig::direct_modes`] are reached by continuation from that mode,
/// so solving one high mode on its own repeats the chain below it.
pub fn mode_roots(
    d: u32,
    l: u32,
    bc: BoundaryCondition,
    config: &BallConfig,
) -> Result<ModeRoots, RadialError> {
    if l <= config.direct_modes {
        return solve_mode(d, l, bc, config, None);
    }
    let mut previous = solve_mode(d, config.direct_modes, bc, config, None)?;
    for k in config.direct_modes + 1..=l {
        previous = solve_mode(d, k, bc, config, Some(&previous))?;
    }
    Ok(previous)
}

/// Starting points for mode `l` from the roots of mode `l - 1`: the arc of
/// roots is resampled at one more point and stretched by `ν_l / ν_{l-1}`.
fn continued_guess(d: u32, l: u32, previous: &ModeRoots, count: usize) -> Vec<Complex64> {
    let mut arc: Vec<Complex64> = previous.roots.iter().map(|r| r.0).collect();
    arc.sort_by(|a, b| b.arg().total_cmp(&a.arg()));
    let nu = |l: u32| l as f64 + (d as f64 - 2.0) / 2.0;
    let stretch = nu(l) / nu(l - 1).max(0.5);
    if arc.len() < 2 {
        return (0..count)
            .map(|k| Complex64::from_polar(stretch * arc.first().map_or(1.0, |z| z.norm()), -PI * (k as f64 + 0.5) / count as f64))
            .collect();
    }
    (0..count)
        .map(|k| {
            let t = k as f64 * (arc.len() - 1) as f64 / (count - 1).max(1) as f64;
            let i = (t.floor() as usize).min(arc.len() - 2);
            let f = t - i as f64;
            stretch * (arc[i] * (1.0 - f) + arc[i + 1] * f)
        })
        .collect()
}

/// Solves mode `l`, starting from the roots of mode `l - 1` when given.
pub fn solve_mode(
    d: u32,
    l: u32,
    bc: BoundaryCondition,
    config: &BallConfig,
    previous: Option<&ModeRoots>,
) -> Result<ModeRoots, RadialError> {
    let poly = RadialPolynomial::new(d, l, bc)?;
    let n = poly.degree();
    if n == 0 {
        return Ok(ModeRoots {
            mode: l,
            roots: Vec::new(),
            max_residual: 0.0,
        });
    }
    let solve_err = |source| RadialError::ModeSolve { mode: l, source };
    let initial: Vec<Complex64> = match previous {
        Some(prev) if prev.mode + 1 == l && !prev.roots.is_empty() => continued_guess(d, l, prev, n),
        _ => {
            let scaled = poly.scaled();
            let s = scaled.scale();
            let report = polyroot::find_roots_with(scaled.poly.coeffs(), &config.root).map_err(solve_err)?;
            report.expanded().iter().map(|w| w * s).collect()
        }
    };

    // Near the negative imaginary axis every floating-point evaluation of the
    // radial function cancels badly (the Hankel recurrence included), so the
    // refinement evaluates the polynomial exactly.
    let exact = ExactEvaluator::new(&poly);
    let (refined, _) = polyroot::aberth_refine(
        &initial,
        |z| exact.newton_ratio(z),
        config.refine_tolerance,
        config.root.max_iterations,
    )
    .map_err(solve_err)?;

    let mut roots: Vec<(Complex64, usize)> = Vec::with_capacity(n);
    let mut corrections = Vec::with_capacity(n);
    for z in refined {
        // One exact Newton step, whose size is the reported residual.
        let step = exact.newton_ratio(z);
        roots.push((z - step, 1));
        corrections.push(step.norm());
    }
    let max_residual = roots
        .iter()
        .zip(&corrections)
        .map(|((z, _), c)| c / z.norm())
        .fold(0.0, f64::max);
    if !(max_residual <= config.residual_tolerance) {
        return Err(RadialError::Unverified {
            mode: l,
            reason: format!("Newton correction {max_residual:.3e}"),
        });
    }
    if let Err(reason) = certify_isolation(&roots, &corrections) {
        return Err(RadialError::Unverified { mode: l, reason });
    }
    roots.sort_by(|a, b| a.0.re.total_cmp(&b.0.re).then(a.0.im.total_cmp(&b.0.im)));
    Ok(ModeRoots {
        mode: l,
        roots,
        max_residual,
    })
}

/// A degree-`n` polynomial has a root within `n |p(z)/p'(z)|` of any `z`.
/// When these inclusion disks around the `n` reported roots are pairwise
/// disjoint they hold `n` distinct roots, which is then every root.
fn certify_isolation(roots: &[(Complex64, usize)], corrections: &[f64]) -> Result<(), String> {
    let n = roots.len() as f64;
    for (i, (z, _)) in roots.iter().enumerate() {
        for (j, (w, _)) in roots.iter().enumerate().skip(i + 1) {
            let reach = n * (corrections[i] + corrections[j]);
            if !(reach < (z - w).norm()) {
                return Err(format!("inclusion disks around {z} and {w} overlap"));
            }
        }
    }
    Ok(())
}

/// Resonances of `B(ρ)` for modes `0..=l_max`, each radial root repeated
/// `sh_dim(d, l)` times.
pub fn ball_resonances(
    d: u32,
    radius: f64,
    l_max: u32,
    bc: BoundaryCondition,
) -> Result<ResonanceSet, RadialError> {
    ball_resonances_with(d, radius, l_max, bc, &BallConfig::default())
}

pub fn ball_resonances_with(
    d: u32,
    radius: f64,
    l_max: u32,
    bc: BoundaryCondition,
    config: &BallConfig,
) -> Result<ResonanceSet, RadialError> {
    check_dimension(d)?;
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(RadialError::InvalidRadius(radius));
    }
    let direct = l_max.min(config.direct_modes);
    let mut modes: Vec<ModeRoots> = (0..=direct)
        .into_par_iter()
        .map(|l| solve_mode(d, l, bc, config, None))
        .collect::<Result<_, _>>()?;
    for l in direct + 1..=l_max {
        let next = solve_mode(d, l, bc, config, modes.last())?;
        modes.push(next);
    }
    Ok(assemble(d, radius, l_max, bc, &modes))
}

/// Resonance set from per-mode roots of the unit ball.
pub fn assemble(d: u32, radius: f64, l_max: u32, bc: BoundaryCondition, modes: &[ModeRoots]) -> ResonanceSet {
    let entries = modes
        .iter()
        .flat_map(|m| {
            let weight = sh_dim(d, m.mode);
            m.roots.iter().map(move |&(z, mult)| Resonance {
                value: z / radius,
                multiplicity: weight * mult as u64,
                mode: m.mode,
            })
        })
        .collect();
    ResonanceSet {
        dimension: d,
        radius,
        bc,
        l_max,
        entries,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn sh_dim_values() {
        assert_eq!(sh_dim(3, 2), 5);
        assert_eq!(sh_dim(3, 0), 1);
        assert_eq!(sh_dim(7, 0), 1);
        assert_eq!(sh_dim(5, 1), 5);
        // harmonic polynomials of degree 2 in R^5: C(6,2) - 1 = 14
        assert_eq!(sh_dim(5, 2), 14);
    }

    #[test]
    fn unit_ball_mode_zero() {
        let set = ball_resonances(3, 1.0, 0, BoundaryCondition::Neumann).unwrap();
        assert_eq!(set.len(), 1);
        assert!((set.entries[0].value - c(0.0, -1.0)).norm() < 1e-15);
        assert_eq!(set.entries[0].multiplicity, 1);
    }

    #[test]
    fn radius_two_mode_zero() {
        let set = ball_resonances(3, 2.0, 0, BoundaryCondition::Neumann).unwrap();
        assert!((set.entries[0].value - c(0.0, -0.5)).norm() < 1e-15);
    }

    #[test]
    fn unit_ball_modes_up_to_one() {
        let set = ball_resonances(3, 1.0, 1, BoundaryCondition::Neumann).unwrap();
        let want = [(c(-1.0, -1.0), 3), (c(0.0, -1.0), 1), (c(1.0, -1.0), 3)];
        assert_eq!(set.len(), 3);
        for (z, mult) in want {
            let hit = set.entries.iter().find(|r| (r.value - z).norm() < 1e-14).unwrap();
            assert_eq!(hit.multiplicity, mult);
        }
        assert_eq!(set.total_multiplicity(), 7);
    }

    #[test]
    fn dirichlet_l0_has_no_resonances_in_d3() {
        let set = ball_resonances(3, 1.0, 1, BoundaryCondition::Dirichlet).unwrap();
        assert_eq!(set.len(), 1);
        assert!((set.entries[0].value - c(0.0, -1.0)).norm() < 1e-14);
        assert_eq!(set.entries[0].multiplicity, 3);
    }

    #[test]
    fn scaling_examples() {
        let set = ball_resonances(3, 1.0, 0, BoundaryCondition::Neumann).unwrap();
        let half = scale_resonances(&set, 2.0);
        assert!((half.entries[0].value - c(0.0, -0.5)).norm() < 1e-15);
        assert_eq!(half.radius, 2.0);
        assert_eq!(scale_resonances(&set, 1.0), set);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(
            ball_resonances(4, 1.0, 1, BoundaryCondition::Neumann),
            Err(RadialError::InvalidDimension(4))
        ));
        assert!(matches!(
            ball_resonances(3, 0.0, 1, BoundaryCondition::Neumann),
            Err(RadialError::InvalidRadius(_))
        ));
    }

    #[test]
    fn boundary_condition_parsing() {
        assert_eq!("Neumann".parse::<BoundaryCondition>().unwrap(), BoundaryCondition::Neumann);
        assert_eq!("dirichlet".parse::<BoundaryCondition>().unwrap(), BoundaryCondition::Dirichlet);
        assert!("robin".parse::<BoundaryCondition>().is_err());
    }
}
