//! Root finding for moderate-degree complex polynomials.
//!
//! Roots come from Aberth–Ehrlich simultaneous iteration followed by Newton
//! polishing; the argument principle gives an independent count of the roots
//! inside any circle, which [`verify_report`] uses to validate a result.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Offset of the initial Aberth circle, in radians; irrational so that the
/// starting points never line up with a symmetry axis of the polynomial.
const INITIAL_ANGLE: f64 = 0.577_215_664_901_532_9;

#[derive(Debug, Error)]
pub enum RootError {
    #[error("polynomial must have degree >= 1 and a nonzero leading coefficient")]
    Degenerate,
    #[error("polynomial has non-finite coefficients")]
    NonFinite,
    #[error("Aberth iteration did not converge after {iterations} iterations")]
    NonConvergence {
        iterations: usize,
        best_iterate: Vec<Complex64>,
    },
    #[error("a root lies within {distance:.3e} of the contour (center {center}, radius {radius})")]
    ContourTooClose {
        center: Complex64,
        radius: f64,
        distance: f64,
    },
    #[error("invalid contour: {0}")]
    InvalidContour(String),
}

/// Dense complex polynomial, coefficients in ascending degree.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<Complex64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self, RootError> {
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(RootError::NonFinite);
        }
        if coeffs.len() < 2 || coeffs.last().is_some_and(|c| c.norm() == 0.0) {
            return Err(RootError::Degenerate);
        }
        Ok(Self { coeffs })
    }

    pub fn from_real(coeffs: &[f64]) -> Result<Self, RootError> {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// `(p(z), p'(z))` by a single Horner pass.
    pub fn eval_with_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }

    /// `Σ |c_k| |z|^k`, the scale against which `|p(z)|` is judged.
    pub fn abs_scale(&self, z: Complex64) -> f64 {
        let r = z.norm();
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * r + c.norm())
    }

    /// Relative backward error `|p(z)| / Σ |c_k| |z|^k`.
    pub fn backward_error(&self, z: Complex64) -> f64 {
        let scale = self.abs_scale(z);
        if scale == 0.0 {
            0.0
        } else {
            self.eval(z).norm() / scale
        }
    }

    /// The polynomial whose coefficients are the complex conjugates of these.
    pub fn conjugate_coefficients(&self) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| c.conj()).collect(),
        }
    }

    fn leading(&self) -> Complex64 {
        self.coeffs[self.coeffs.len() - 1]
    }
}

/// One reported root.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Root {
    pub value: Complex64,
    pub multiplicity: usize,
    /// Relative backward error of the polynomial at `value`.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RootReport {
    pub roots: Vec<Root>,
    /// Residuals are below the polish tolerance and the argument principle
    /// agrees with every reported multiplicity.
    pub verified: bool,
    pub iterations: usize,
}

impl RootReport {
    pub fn total_multiplicity(&self) -> usize {
        self.roots.iter().map(|r| r.multiplicity).sum()
    }

    /// Every root repeated by its multiplicity.
    pub fn expanded(&self) -> Vec<Complex64> {
        self.roots
            .iter()
            .flat_map(|r| std::iter::repeat_n(r.value, r.multiplicity))
            .collect()
    }
}

/// Circle used by the argument principle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Contour {
    pub center: Complex64,
    pub radius: f64,
    pub samples: usize,
}

impl Contour {
    pub fn new(center: Complex64, radius: f64, samples: usize) -> Result<Self, RootError> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(RootError::InvalidContour(format!("radius {radius}")));
        }
        if samples < 64 || samples % 2 != 0 {
            return Err(RootError::InvalidContour(format!(
                "samples must be even and >= 64, got {samples}"
            )));
        }
        Ok(Self {
            center,
            radius,
            samples,
        })
    }

    pub fn circle(center: Complex64, radius: f64) -> Result<Self, RootError> {
        Self::new(center, radius, 64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootConfig {
    /// Relative size of the last Aberth correction at which a root is final.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Relative distance below which nearby roots are merged, provided the
    /// argument principle confirms the cluster size.
    pub cluster_radius: f64,
    /// Backward error a root must reach for the report to count as verified.
    pub polish_tolerance: f64,
    /// Run the argument-principle validation as part of `find_roots`.
    pub verify: bool,
    /// Also solve the companion-matrix eigenproblem and require agreement.
    pub companion_cross_check: bool,
}

impl Default for RootConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-14,
            max_iterations: 200,
            cluster_radius: 1e-4,
            polish_tolerance: 1e-11,
            verify: true,
            companion_cross_check: false,
        }
    }
}

/// All roots of `coefficients` (ascending degree) with default settings and
/// the given Aberth tolerance.
pub fn find_roots(coefficients: &[Complex64], tolerance: f64) -> Result<RootReport, RootError> {
    let config = RootConfig {
        tolerance,
        ..RootConfig::default()
    };
    find_roots_with(coefficients, &config)
}

pub fn find_roots_with(
    coefficients: &[Complex64],
    config: &RootConfig,
) -> Result<RootReport, RootError> {
    let poly = Polynomial::new(coefficients.to_vec())?;

    // Exact zero roots are split off before scaling.
    let zeros = poly.coeffs.iter().take_while(|c| c.norm() == 0.0).count();
    let deflated = Polynomial::new(poly.coeffs[zeros..].to_vec());

    let (mut values, iterations) = match deflated {
        Ok(rest) => {
            let (scale, scaled) = rescale(&rest);
            let (mut roots, iterations) = aberth(&scaled, config)?;
            for z in &mut roots {
                *z = newton_polish(*z, 3, |w| newton_ratio(&scaled, w));
                *z *= scale;
            }
            (roots, iterations)
        }
        Err(RootError::Degenerate) => (Vec::new(), 0),
        Err(e) => return Err(e),
    };
    values.extend(std::iter::repeat_n(Complex64::new(0.0, 0.0), zeros));

    let mut roots = cluster(&poly, &values, config.cluster_radius);
    for root in &mut roots {
        root.residual = poly.backward_error(root.value);
    }

    let residual_scale = config.polish_tolerance * (poly.degree() as f64).max(1.0);
    let mut verified = roots.iter().all(|r| {
        r.multiplicity > 1 || r.residual <= residual_scale
    });
    let mut report = RootReport {
        roots,
        verified,
        iterations,
    };
    if config.verify && verified {
        verified = verify_report(poly.coeffs(), &report, enclosing_radius(&report));
    }
    if config.companion_cross_check && verified {
        verified = companion_agrees(&poly, &report);
    }
    report.verified = verified;
    Ok(report)
}

/// A circle radius comfortably enclosing every reported root.
pub fn enclosing_radius(report: &RootReport) -> f64 {
    let max = report
        .roots
        .iter()
        .map(|r| r.value.norm())
        .fold(0.0, f64::max);
    1.25 * max + 1e-3
}

/// Number of roots inside `contour`, counted with multiplicity, from the
/// winding number of `p` around it.
pub fn winding_count(coefficients: &[Complex64], contour: &Contour) -> Result<i64, RootError> {
    let poly = Polynomial::new(coefficients.to_vec())?;
    winding_count_poly(&poly, contour)
}

pub(crate) fn winding_count_poly(poly: &Polynomial, contour: &Contour) -> Result<i64, RootError> {
    let guard = 1e-8 * contour.radius.max(1.0);
    let mut samples = contour.samples;
    loop {
        let mut total = 0.0;
        let mut max_step: f64 = 0.0;
        let mut closest = f64::INFINITY;
        let point = |k: usize| {
            let theta = 2.0 * PI * k as f64 / samples as f64;
            contour.center + Complex64::from_polar(contour.radius, theta)
        };
        let mut prev = poly.eval(point(0));
        for k in 1..=samples {
            let z = point(k % samples);
            let (p, dp) = poly.eval_with_derivative(z);
            let distance = if p.norm() == 0.0 {
                0.0
            } else if dp.norm() == 0.0 {
                f64::INFINITY
            } else {
                (p / dp).norm()
            };
            closest = closest.min(distance);
            let step = (p / prev).arg();
            max_step = max_step.max(step.abs());
            total += step;
            prev = p;
        }
        if closest < guard {
            return Err(RootError::ContourTooClose {
                center: contour.center,
                radius: contour.radius,
                distance: closest,
            });
        }
        // Each sample step must resolve the phase unambiguously.
        if max_step < PI / 4.0 {
            return Ok((total / (2.0 * PI)).round() as i64);
        }
        if samples >= 1 << 22 {
            return Err(RootError::ContourTooClose {
                center: contour.center,
                radius: contour.radius,
                distance: closest,
            });
        }
        samples *= 2;
    }
}

/// Validates a report by the argument principle: the count inside
/// `enclosing_radius` must equal the total multiplicity, and a small circle
/// around each root must contain exactly its multiplicity.
pub fn verify_report(coefficients: &[Complex64], report: &RootReport, enclosing_radius: f64) -> bool {
    let Ok(poly) = Polynomial::new(coefficients.to_vec()) else {
        return false;
    };
    verify_report_poly(&poly, report, enclosing_radius, true)
}

pub(crate) fn verify_report_poly(
    poly: &Polynomial,
    report: &RootReport,
    enclosing_radius: f64,
    per_root: bool,
) -> bool {
    let total = report.total_multiplicity();
    if total != poly.degree() {
        return false;
    }
    let samples = 64.max(8 * poly.degree()).next_multiple_of(2);
    let Ok(outer) = Contour::new(Complex64::new(0.0, 0.0), enclosing_radius, samples) else {
        return false;
    };
    match winding_count_poly(poly, &outer) {
        Ok(count) if count == total as i64 => {}
        _ => return false,
    }
    if !per_root {
        return true;
    }
    report.roots.iter().enumerate().all(|(i, root)| {
        let nearest = report
            .roots
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, other)| (other.value - root.value).norm())
            .fold(f64::INFINITY, f64::min);
        let radius = (0.4 * nearest).min(0.1 * (1.0 + root.value.norm()));
        let Ok(small) = Contour::new(root.value, radius, 64) else {
            return false;
        };
        matches!(winding_count_poly(poly, &small), Ok(c) if c == root.multiplicity as i64)
    })
}

/// Newton iteration `z <- z - ratio(z)` with `ratio = p/p'`, stopping once the
/// step stops shrinking.
pub fn newton_polish(
    mut z: Complex64,
    max_steps: usize,
    ratio: impl Fn(Complex64) -> Complex64,
) -> Complex64 {
    let mut last_step = f64::INFINITY;
    for _ in 0..max_steps {
        let step = ratio(z);
        if !(step.re.is_finite() && step.im.is_finite()) {
            break;
        }
        let size = step.norm();
        if size >= last_step {
            break;
        }
        z -= step;
        last_step = size;
        if size <= 4.0 * f64::EPSILON * z.norm() {
            break;
        }
    }
    z
}

/// Aberth iteration driven by a supplied Newton ratio `p/p'` instead of
/// coefficients. Used to refine approximate roots of a function that can be
/// evaluated more accurately than any rounded coefficient vector allows; the
/// mutual repulsion keeps two iterates from settling on the same root.
pub fn aberth_refine(
    initial: &[Complex64],
    ratio: impl Fn(Complex64) -> Complex64,
    tolerance: f64,
    max_iterations: usize,
) -> Result<(Vec<Complex64>, usize), RootError> {
    aberth_refine_masked(initial, &vec![true; initial.len()], ratio, tolerance, max_iterations)
}

/// As [`aberth_refine`], moving only the iterates flagged `active`; the
/// others stay fixed but still repel.
pub fn aberth_refine_masked(
    initial: &[Complex64],
    active: &[bool],
    ratio: impl Fn(Complex64) -> Complex64,
    tolerance: f64,
    max_iterations: usize,
) -> Result<(Vec<Complex64>, usize), RootError> {
    let n = initial.len();
    let mut z = initial.to_vec();
    let mut done: Vec<bool> = active.iter().map(|a| !a).collect();
    for iteration in 1..=max_iterations {
        if done.iter().all(|&d| d) {
            return Ok((z, iteration - 1));
        }
        for k in 0..n {
            if done[k] {
                continue;
            }
            let r = ratio(z[k]);
            // A vanishing or undefined ratio means p'/p blew up: z is a root.
            if r.norm() == 0.0 || !(r.re.is_finite() && r.im.is_finite()) {
                done[k] = true;
                continue;
            }
            let repulsion: Complex64 = (0..n)
                .filter(|&j| j != k)
                .map(|j| (z[k] - z[j]).inv())
                .sum();
            let step = r / (1.0 - r * repulsion);
            if !(step.re.is_finite() && step.im.is_finite()) {
                return Err(RootError::NonFinite);
            }
            z[k] -= step;
            if step.norm() <= tolerance * z[k].norm().max(f64::MIN_POSITIVE) {
                done[k] = true;
            }
        }
    }
    if done.iter().all(|&d| d) {
        return Ok((z, max_iterations));
    }
    Err(RootError::NonConvergence {
        iterations: max_iterations,
        best_iterate: z,
    })
}

/// Winding number of an arbitrary nonvanishing function around a circle,
/// from summed argument increments; samples double until every increment is
/// below `π/4`. Values may be returned in any positive scaling, since only
/// their arguments matter.
pub fn winding_count_fn(f: impl Fn(Complex64) -> Complex64, contour: &Contour) -> Result<i64, RootError> {
    let mut samples = contour.samples;
    while samples <= 1 << 18 {
        let point = |k: usize| {
            let theta = 2.0 * PI * k as f64 / samples as f64;
            contour.center + Complex64::from_polar(contour.radius, theta)
        };
        let first = f(point(0));
        let mut prev = first;
        let mut total = 0.0;
        let mut max_step: f64 = 0.0;
        for k in 1..=samples {
            let value = if k == samples { first } else { f(point(k)) };
            if !(value.norm() > 0.0) {
                break;
            }
            let step = (value / prev).arg();
            max_step = max_step.max(step.abs());
            total += step;
            prev = value;
        }
        if max_step < PI / 4.0 {
            return Ok((total / (2.0 * PI)).round() as i64);
        }
        samples *= 2;
    }
    Err(RootError::ContourTooClose {
        center: contour.center,
        radius: contour.radius,
        distance: 0.0,
    })
}

/// Winding count `(1/2πi)∮ f` of a log-derivative `f = p'/p` around a circle,
/// by the trapezoid rule with sample doubling until the estimate settles on
/// an integer.
pub fn winding_from_log_derivative(
    log_derivative: impl Fn(Complex64) -> Complex64,
    contour: &Contour,
) -> Result<i64, RootError> {
    let mut samples = contour.samples;
    let mut previous: Option<Complex64> = None;
    while samples <= 1 << 16 {
        let sum: Complex64 = (0..samples)
            .map(|k| {
                let offset = Complex64::from_polar(contour.radius, 2.0 * PI * k as f64 / samples as f64);
                log_derivative(contour.center + offset) * offset
            })
            .sum::<Complex64>()
            / samples as f64;
        if !(sum.re.is_finite() && sum.im.is_finite()) {
            break;
        }
        let nearest = sum.re.round();
        if let Some(prev) = previous {
            if (sum - prev).norm() < 1e-3 && (sum.re - nearest).abs() < 1e-3 && sum.im.abs() < 1e-3 {
                return Ok(nearest as i64);
            }
        }
        previous = Some(sum);
        samples *= 2;
    }
    Err(RootError::ContourTooClose {
        center: contour.center,
        radius: contour.radius,
        distance: 0.0,
    })
}

/// Eigenvalues of the companion matrix; an independent route to the roots.
pub fn companion_roots(coefficients: &[Complex64]) -> Result<Vec<Complex64>, RootError> {
    let poly = Polynomial::new(coefficients.to_vec())?;
    let n = poly.degree();
    let lead = poly.leading();
    let mut m = DMatrix::<Complex64>::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    for i in 0..n {
        m[(i, n - 1)] = -poly.coeffs[i] / lead;
    }
    m.schur()
        .eigenvalues()
        .map(|v| v.iter().copied().collect())
        .ok_or(RootError::NonConvergence {
            iterations: 0,
            best_iterate: Vec::new(),
        })
}

fn companion_agrees(poly: &Polynomial, report: &RootReport) -> bool {
    let Ok(mut eig) = companion_roots(poly.coeffs()) else {
        return false;
    };
    report.expanded().iter().all(|z| {
        let Some((idx, dist)) = eig
            .iter()
            .enumerate()
            .map(|(i, e)| (i, (e - z).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
        else {
            return false;
        };
        eig.swap_remove(idx);
        dist <= 1e-6 * (1.0 + z.norm())
    })
}

fn newton_ratio(poly: &Polynomial, z: Complex64) -> Complex64 {
    let (p, dp) = poly.eval_with_derivative(z);
    p / dp
}

/// Monic polynomial in `w = z / s`, with `s` a power of two near the geometric
/// mean of the root moduli.
fn rescale(poly: &Polynomial) -> (f64, Polynomial) {
    let n = poly.degree() as i32;
    let lead = poly.leading();
    let ratio = (poly.coeffs[0] / lead).norm();
    let exponent = if ratio > 0.0 && ratio.is_finite() {
        (ratio.log2() / n as f64).round() as i32
    } else {
        0
    };
    let s = 2f64.powi(exponent);
    let coeffs = poly
        .coeffs
        .iter()
        .enumerate()
        .map(|(k, c)| c / lead * 2f64.powi(exponent * (k as i32 - n)))
        .collect();
    (s, Polynomial { coeffs })
}

/// Positive root of `x^n = Σ_{k<n} |a_k| x^k` for a monic polynomial; every
/// root lies in the closed disc of this radius.
fn cauchy_bound(monic: &Polynomial) -> f64 {
    let n = monic.degree();
    let mags: Vec<f64> = monic.coeffs[..n].iter().map(|c| c.norm()).collect();
    if mags.iter().all(|&m| m == 0.0) {
        return 0.0;
    }
    // g(x) = Σ |a_k| x^{k-n} is decreasing; solve g(x) = 1 by bisection in log x.
    let g = |x: f64| {
        mags.iter()
            .enumerate()
            .map(|(k, m)| m * x.powi(k as i32 - n as i32))
            .sum::<f64>()
    };
    let mut lo = 1e-300f64.ln();
    let mut hi = (1.0 + mags.iter().cloned().fold(0.0, f64::max)).ln();
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid.exp()) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi.exp()
}

fn aberth(poly: &Polynomial, config: &RootConfig) -> Result<(Vec<Complex64>, usize), RootError> {
    let n = poly.degree();
    let radius = cauchy_bound(poly).max(f64::MIN_POSITIVE);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(radius, 2.0 * PI * k as f64 / n as f64 + INITIAL_ANGLE))
        .collect();
    let abs_poly = Polynomial {
        coeffs: poly.coeffs.iter().map(|c| Complex64::new(c.norm(), 0.0)).collect(),
    };
    let mut done = vec![false; n];
    for iteration in 1..=config.max_iterations {
        for k in 0..n {
            if done[k] {
                continue;
            }
            let (p, dp) = poly.eval_with_derivative(z[k]);
            // Below the Horner rounding bound the value carries no information.
            if p.norm() <= 4.0 * n as f64 * f64::EPSILON * abs_poly.eval(Complex64::new(z[k].norm(), 0.0)).re {
                done[k] = true;
                continue;
            }
            let ratio = p / dp;
            let repulsion: Complex64 = (0..n)
                .filter(|&j| j != k)
                .map(|j| (z[k] - z[j]).inv())
                .sum();
            let mut step = ratio / (1.0 - ratio * repulsion);
            if !(step.re.is_finite() && step.im.is_finite()) {
                // p' vanished or two iterates collided: nudge and retry.
                step = Complex64::from_polar(1e-8 * (1.0 + z[k].norm()), iteration as f64);
            }
            z[k] -= step;
            if step.norm() <= config.tolerance * z[k].norm().max(f64::MIN_POSITIVE) {
                done[k] = true;
            }
        }
        if done.iter().all(|&d| d) {
            return Ok((z, iteration));
        }
    }
    Err(RootError::NonConvergence {
        iterations: config.max_iterations,
        best_iterate: z,
    })
}

/// Merges iterates that sit within the cluster radius of each other when the
/// argument principle confirms the cluster holds exactly that many roots.
fn cluster(poly: &Polynomial, values: &[Complex64], cluster_radius: f64) -> Vec<Root> {
    let n = values.len();
    let mut group: Vec<usize> = (0..n).collect();
    fn find(group: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while group[r] != r {
            r = group[r];
        }
        group[i] = r;
        r
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let threshold = cluster_radius * (1.0 + values[i].norm());
            if (values[i] - values[j]).norm() < threshold {
                let (a, b) = (find(&mut group, i), find(&mut group, j));
                group[a.max(b)] = a.min(b);
            }
        }
    }
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        let r = find(&mut group, i);
        members[r].push(i);
    }
    let mut roots = Vec::with_capacity(n);
    for m in members.into_iter().filter(|m| !m.is_empty()) {
        let centroid = m.iter().map(|&i| values[i]).sum::<Complex64>() / m.len() as f64;
        let confirmed = m.len() == 1 || {
            let spread = m
                .iter()
                .map(|&i| (values[i] - centroid).norm())
                .fold(0.0, f64::max);
            let radius = (10.0 * spread).max(cluster_radius * (1.0 + centroid.norm()));
            Contour::new(centroid, radius, 64)
                .ok()
                .and_then(|c| winding_count_poly(poly, &c).ok())
                == Some(m.len() as i64)
        };
        if confirmed {
            roots.push(Root {
                value: centroid,
                multiplicity: m.len(),
                residual: 0.0,
            });
        } else {
            roots.extend(m.iter().map(|&i| Root {
                value: values[i],
                multiplicity: 1,
                residual: 0.0,
            }));
        }
    }
    roots
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sorted(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        v
    }

    #[test]
    fn quadratic_real_roots() {
        let report = find_roots(&[c(-1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)], 1e-14).unwrap();
        assert!(report.verified);
        let roots = sorted(report.expanded());
        assert!((roots[0] - c(-1.0, 0.0)).norm() < 1e-14);
        assert!((roots[1] - c(1.0, 0.0)).norm() < 1e-14);
        assert!(report.roots.iter().all(|r| r.multiplicity == 1));
    }

    #[test]
    fn neumann_l1_quadratic() {
        // i z^2 - 2 z - 2i; quadratic formula gives -i ± 1.
        let report = find_roots(&[c(0.0, -2.0), c(-2.0, 0.0), c(0.0, 1.0)], 1e-14).unwrap();
        assert!(report.verified);
        let roots = sorted(report.expanded());
        assert!((roots[0] - c(-1.0, -1.0)).norm() < 1e-14);
        assert!((roots[1] - c(1.0, -1.0)).norm() < 1e-14);
    }

    #[test]
    fn triple_root_is_clustered() {
        let report = find_roots(&[c(1.0, 0.0), c(3.0, 0.0), c(3.0, 0.0), c(1.0, 0.0)], 1e-14).unwrap();
        assert_eq!(report.roots.len(), 1);
        assert_eq!(report.roots[0].multiplicity, 3);
        assert!((report.roots[0].value - c(-1.0, 0.0)).norm() < 1e-4);
        assert!(report.verified);
    }

    #[test]
    fn zero_roots_are_split_off() {
        // z^2 (z - 2)
        let report = find_roots(&[c(0.0, 0.0), c(0.0, 0.0), c(-2.0, 0.0), c(1.0, 0.0)], 1e-14).unwrap();
        assert_eq!(report.total_multiplicity(), 3);
        let zero = report.roots.iter().find(|r| r.value.norm() < 1e-12).unwrap();
        assert_eq!(zero.multiplicity, 2);
    }

    #[test]
    fn rejects_degenerate_input() {
        assert!(matches!(find_roots(&[c(1.0, 0.0)], 1e-14), Err(RootError::Degenerate)));
        assert!(matches!(
            find_roots(&[c(1.0, 0.0), c(0.0, 0.0)], 1e-14),
            Err(RootError::Degenerate)
        ));
        assert!(matches!(
            find_roots(&[c(f64::NAN, 0.0), c(1.0, 0.0)], 1e-14),
            Err(RootError::NonFinite)
        ));
    }

    #[test]
    fn non_convergence_reports_best_iterate() {
        let config = RootConfig {
            max_iterations: 1,
            ..RootConfig::default()
        };
        let coeffs: Vec<Complex64> = (0..12).map(|k| c(k as f64 + 1.0, 0.5)).collect();
        match find_roots_with(&coeffs, &config) {
            Err(RootError::NonConvergence { best_iterate, .. }) => assert_eq!(best_iterate.len(), 11),
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn winding_examples() {
        let p = [c(-1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)];
        let big = Contour::circle(c(0.0, 0.0), 2.0).unwrap();
        assert_eq!(winding_count(&p, &big).unwrap(), 2);
        let small = Contour::circle(c(1.0, 0.0), 0.5).unwrap();
        assert_eq!(winding_count(&p, &small).unwrap(), 1);
        let neumann = [c(0.0, -2.0), c(-2.0, 0.0), c(0.0, 1.0)];
        let three = Contour::circle(c(0.0, 0.0), 3.0).unwrap();
        assert_eq!(winding_count(&neumann, &three).unwrap(), 2);
    }

    #[test]
    fn contour_through_root_is_rejected() {
        let p = [c(-1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)];
        let through = Contour::circle(c(0.0, 0.0), 1.0).unwrap();
        assert!(matches!(
            winding_count(&p, &through),
            Err(RootError::ContourTooClose { .. })
        ));
    }

    #[test]
    fn contour_validation() {
        assert!(Contour::new(c(0.0, 0.0), 1.0, 63).is_err());
        assert!(Contour::new(c(0.0, 0.0), 1.0, 66).is_ok());
        assert!(Contour::new(c(0.0, 0.0), -1.0, 64).is_err());
    }

    #[test]
    fn verify_detects_missing_root() {
        let p = [c(-1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)];
        let mut report = find_roots(&p, 1e-14).unwrap();
        assert!(verify_report(&p, &report, 2.0));
        report.roots.pop();
        assert!(!verify_report(&p, &report, 2.0));
    }

    #[test]
    fn companion_cross_check_agrees() {
        let coeffs: Vec<Complex64> = (0..9).map(|k| c(1.0 / (k as f64 + 1.0), (k % 3) as f64)).collect();
        let config = RootConfig {
            companion_cross_check: true,
            ..RootConfig::default()
        };
        let report = find_roots_with(&coeffs, &config).unwrap();
        assert!(report.verified);
    }

    #[test]
    fn cauchy_bound_encloses_roots() {
        let p = Polynomial::new(vec![c(-6.0, 0.0), c(11.0, 0.0), c(-6.0, 0.0), c(1.0, 0.0)]).unwrap();
        let bound = cauchy_bound(&p);
        assert!(bound >= 3.0);
        assert!(bound < 20.0);
    }
}
