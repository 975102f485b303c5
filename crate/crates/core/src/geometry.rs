//! Boundary invariants `(A1, A2, A3) = (|∂O|, ∫H, ∫(13H² + 2Σκ²))`.
//!
//! Mean curvature is the plain sum of principal curvatures, measured with the
//! normal pointing out of the obstacle, so spheres have `H = (d-1)/ρ > 0`.

use std::f64::consts::PI;
use std::fmt;
use std::ops::Add;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quadrature::GaussLegendre;
use crate::special::unit_sphere_area;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("degenerate profile: {0}")]
    DegenerateProfile(String),
    #[error("quadrature did not settle: order doubling changed the result by {change:.3e}")]
    NotConverged { change: f64 },
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(u32, u32),
}

/// How `H` is normalised; only one convention exists, but it travels with the
/// numbers so serialized invariants are self-describing.
#[derive(Debug, Default, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurvatureConvention {
    /// `H = Σ κ_j`, outward normal.
    #[default]
    SumOutward,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometricInvariants {
    pub d: u32,
    /// `Vol(∂O)`
    pub a1: f64,
    /// `∫ H`
    pub a2: f64,
    /// `∫ (13 H² + 2 Σ κ_j²)`
    pub a3: f64,
    /// Enclosed volume, when known.
    pub volume: Option<f64>,
    /// `Some(true)` only when the generator knows the body is convex.
    pub convex: Option<bool>,
    #[serde(default)]
    pub convention: CurvatureConvention,
}

impl GeometricInvariants {
    pub fn new(d: u32, a1: f64, a2: f64, a3: f64) -> Self {
        Self {
            d,
            a1,
            a2,
            a3,
            volume: None,
            convex: None,
            convention: CurvatureConvention::SumOutward,
        }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.a1, self.a2, self.a3]
    }

    /// `A3 · A1 / ((13 + 2/(d-1)) A2²) - 1`, nonnegative on every surface.
    pub fn cauchy_schwarz_defect(&self) -> f64 {
        let k = 13.0 + 2.0 / (self.d as f64 - 1.0);
        self.a3 * self.a1 / (k * self.a2 * self.a2) - 1.0
    }

    /// Disjoint union of two bodies.
    pub fn disjoint_union(&self, other: &Self) -> Result<Self, GeometryError> {
        if self.d != other.d {
            return Err(GeometryError::DimensionMismatch(self.d, other.d));
        }
        Ok(*self + *other)
    }
}

impl Add for GeometricInvariants {
    type Output = GeometricInvariants;

    fn add(self, rhs: Self) -> Self {
        assert_eq!(self.d, rhs.d, "cannot add invariants of different dimension");
        GeometricInvariants {
            d: self.d,
            a1: self.a1 + rhs.a1,
            a2: self.a2 + rhs.a2,
            a3: self.a3 + rhs.a3,
            volume: self.volume.zip(rhs.volume).map(|(a, b)| a + b),
            convex: Some(false),
            convention: self.convention,
        }
    }
}

impl fmt::Display for GeometricInvariants {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "A1={:.10} A2={:.10} A3={:.10} (d={})", self.a1, self.a2, self.a3, self.d)
    }
}

/// `m` disjoint balls of radius `ρ` in `R^d`.
pub fn sphere_invariants(d: u32, radius: f64, m: u32) -> Result<GeometricInvariants, GeometryError> {
    if d < 2 {
        return Err(GeometryError::InvalidInput(format!("dimension {d}")));
    }
    if !(radius > 0.0 && radius.is_finite()) || m == 0 {
        return Err(GeometryError::InvalidInput(format!("radius {radius}, count {m}")));
    }
    let sigma = unit_sphere_area(d);
    let k = (d - 1) as f64;
    let count = m as f64;
    Ok(GeometricInvariants {
        d,
        a1: count * sigma * radius.powi(d as i32 - 1),
        a2: count * sigma * k * radius.powi(d as i32 - 2),
        a3: count * sigma * (13.0 * k * k + 2.0 * k) * radius.powi(d as i32 - 3),
        volume: Some(count * sigma / d as f64 * radius.powi(d as i32)),
        convex: Some(m == 1),
        convention: CurvatureConvention::SumOutward,
    })
}

/// Position and first two derivatives of a meridian `(r(u), z(u))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfilePoint {
    pub r: f64,
    pub z: f64,
    pub dr: f64,
    pub dz: f64,
    pub ddr: f64,
    pub ddz: f64,
}

/// Meridian of a surface of revolution about the `z` axis in `R^3`, traced
/// counterclockwise in the `(r, z)` half-plane so the normal `(z', -r')`
/// points out of the body. Open profiles start and end on the axis.
pub trait Profile {
    fn domain(&self) -> (f64, f64);
    fn point(&self, u: f64) -> ProfilePoint;
    fn is_closed(&self) -> bool;
}

/// Sphere of radius `R` centred at height `z0`.
#[derive(Debug, Clone, Copy)]
pub struct CircleProfile {
    pub radius: f64,
    pub z0: f64,
}

impl Profile for CircleProfile {
    fn domain(&self) -> (f64, f64) {
        (0.0, PI)
    }

    fn point(&self, u: f64) -> ProfilePoint {
        let (s, c) = u.sin_cos();
        let r = self.radius;
        ProfilePoint {
            r: r * s,
            z: self.z0 - r * c,
            dr: r * c,
            dz: r * s,
            ddr: -r * s,
            ddz: r * c,
        }
    }

    fn is_closed(&self) -> bool {
        false
    }
}

/// Spheroid with equatorial radius `a` and polar semi-axis `c`.
#[derive(Debug, Clone, Copy)]
pub struct SpheroidProfile {
    pub a: f64,
    pub c: f64,
}

impl Profile for SpheroidProfile {
    fn domain(&self) -> (f64, f64) {
        (0.0, PI)
    }

    fn point(&self, u: f64) -> ProfilePoint {
        let (s, co) = u.sin_cos();
        ProfilePoint {
            r: self.a * s,
            z: -self.c * co,
            dr: self.a * co,
            dz: self.c * s,
            ddr: -self.a * s,
            ddz: self.c * co,
        }
    }

    fn is_closed(&self) -> bool {
        false
    }
}

/// Torus: tube of radius `tube` around a circle of radius `center`.
#[derive(Debug, Clone, Copy)]
pub struct TorusProfile {
    pub center: f64,
    pub tube: f64,
}

impl Profile for TorusProfile {
    fn domain(&self) -> (f64, f64) {
        (0.0, 2.0 * PI)
    }

    fn point(&self, u: f64) -> ProfilePoint {
        let (s, c) = u.sin_cos();
        let t = self.tube;
        ProfilePoint {
            r: self.center + t * c,
            z: t * s,
            dr: -t * s,
            dz: t * c,
            ddr: -t * c,
            ddz: -t * s,
        }
    }

    fn is_closed(&self) -> bool {
        true
    }
}

/// Meridian given by samples, interpolated by a cubic spline in cumulative
/// chord length. Open profiles are continued across the axis by reflection and
/// closed ones by wrap-around, so the spline has no artificial end conditions
/// inside the sampled range.
#[derive(Debug, Clone)]
pub struct SampledProfile {
    closed: bool,
    length: f64,
    r: Spline,
    z: Spline,
}

impl SampledProfile {
    pub fn new(points: &[(f64, f64)]) -> Result<Self, GeometryError> {
        if points.len() < 8 {
            return Err(GeometryError::InvalidInput("profile needs at least 8 samples".into()));
        }
        let scale = points
            .iter()
            .map(|p| p.0.abs().max(p.1.abs()))
            .fold(0.0, f64::max);
        let tol = 1e-9 * scale.max(1.0);
        let first = points[0];
        let last = points[points.len() - 1];
        let closed = (first.0 - last.0).hypot(first.1 - last.1) <= tol;
        let body: Vec<(f64, f64)> = if closed {
            points[..points.len() - 1].to_vec()
        } else {
            points.to_vec()
        };
        if !closed && (first.0.abs() > tol || last.0.abs() > tol) {
            return Err(GeometryError::DegenerateProfile(
                "open profile must start and end on the axis".into(),
            ));
        }
        let interior = if closed { &body[..] } else { &body[1..body.len() - 1] };
        if let Some(p) = interior.iter().find(|p| p.0 <= tol) {
            return Err(GeometryError::DegenerateProfile(format!(
                "radius vanishes away from the axis endpoints at z={}",
                p.1
            )));
        }

        const PAD: usize = 4;
        let n = body.len();
        let mut ext: Vec<(f64, f64)> = Vec::with_capacity(n + 2 * PAD + 1);
        if closed {
            ext.extend((0..PAD).map(|k| body[(n - PAD + k) % n]));
            ext.extend(body.iter().copied());
            ext.extend((0..=PAD).map(|k| body[k % n]));
        } else {
            ext.extend((1..=PAD).rev().map(|k| (-body[k].0, body[k].1)));
            ext.extend(body.iter().copied());
            ext.extend((1..=PAD).map(|k| (-body[n - 1 - k].0, body[n - 1 - k].1)));
        }
        let mut s = vec![0.0; ext.len()];
        for i in 1..ext.len() {
            s[i] = s[i - 1] + (ext[i].0 - ext[i - 1].0).hypot(ext[i].1 - ext[i - 1].1);
        }
        let offset = s[PAD];
        s.iter_mut().for_each(|x| *x -= offset);
        let end_index = if closed { PAD + n } else { PAD + n - 1 };
        let length = s[end_index];
        let rs: Vec<f64> = ext.iter().map(|p| p.0).collect();
        let zs: Vec<f64> = ext.iter().map(|p| p.1).collect();
        Ok(Self {
            closed,
            length,
            r: Spline::natural(&s, &rs),
            z: Spline::natural(&s, &zs),
        })
    }

    /// Reads a profile file: two whitespace-separated columns `r z` per line;
    /// blank lines and lines starting with `#` are skipped.
    pub fn from_file(path: impl AsRef<Path>) -> crate::Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| crate::Error::io(path, e))?;
        let points = parse_profile(&text)?;
        Ok(Self::new(&points)?)
    }
}

pub fn parse_profile(text: &str) -> crate::Result<Vec<(f64, f64)>> {
    let mut points = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut cols = line.split_whitespace().map(str::parse::<f64>);
        match (cols.next(), cols.next(), cols.next()) {
            (Some(Ok(r)), Some(Ok(z)), None) => points.push((r, z)),
            _ => {
                return Err(crate::Error::parse(
                    "profile",
                    format!("line {}: expected two numbers, got `{line}`", lineno + 1),
                ))
            }
        }
    }
    Ok(points)
}

impl Profile for SampledProfile {
    fn domain(&self) -> (f64, f64) {
        (0.0, self.length)
    }

    fn point(&self, u: f64) -> ProfilePoint {
        let (r, dr, ddr) = self.r.eval(u);
        let (z, dz, ddz) = self.z.eval(u);
        ProfilePoint { r, z, dr, dz, ddr, ddz }
    }

    fn is_closed(&self) -> bool {
        self.closed
    }
}

/// Natural cubic spline.
#[derive(Debug, Clone)]
struct Spline {
    x: Vec<f64>,
    y: Vec<f64>,
    /// Second derivatives at the knots.
    m: Vec<f64>,
}

impl Spline {
    fn natural(x: &[f64], y: &[f64]) -> Self {
        let n = x.len();
        let mut m = vec![0.0; n];
        if n > 2 {
            // Thomas algorithm on the interior equations.
            let k = n - 2;
            let mut diag = vec![0.0; k];
            let mut upper = vec![0.0; k];
            let mut rhs = vec![0.0; k];
            for i in 0..k {
                let (h0, h1) = (x[i + 1] - x[i], x[i + 2] - x[i + 1]);
                diag[i] = 2.0 * (h0 + h1);
                upper[i] = h1;
                rhs[i] = 6.0 * ((y[i + 2] - y[i + 1]) / h1 - (y[i + 1] - y[i]) / h0);
            }
            for i in 1..k {
                let lower = x[i + 1] - x[i];
                let w = lower / diag[i - 1];
                diag[i] -= w * upper[i - 1];
                rhs[i] -= w * rhs[i - 1];
            }
            let mut sol = vec![0.0; k];
            for i in (0..k).rev() {
                let next = if i + 1 < k { upper[i] * sol[i + 1] } else { 0.0 };
                sol[i] = (rhs[i] - next) / diag[i];
            }
            m[1..n - 1].copy_from_slice(&sol);
        }
        Self {
            x: x.to_vec(),
            y: y.to_vec(),
            m,
        }
    }

    fn eval(&self, t: f64) -> (f64, f64, f64) {
        let i = match self.x.binary_search_by(|v| v.total_cmp(&t)) {
            Ok(i) => i.min(self.x.len() - 2),
            Err(i) => i.clamp(1, self.x.len() - 1) - 1,
        };
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - t) / h;
        let b = (t - self.x[i]) / h;
        let (m0, m1) = (self.m[i], self.m[i + 1]);
        let (y0, y1) = (self.y[i], self.y[i + 1]);
        let value = a * y0 + b * y1 + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0;
        let slope = (y1 - y0) / h + ((1.0 - 3.0 * a * a) * m0 + (3.0 * b * b - 1.0) * m1) * h / 6.0;
        let curve = a * m0 + b * m1;
        (value, slope, curve)
    }
}

/// Invariants together with the change seen under order doubling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub invariants: GeometricInvariants,
    /// Largest relative change of `(A1, A2, A3)` when the order is doubled.
    pub doubling_change: f64,
}

/// Panels per parameter interval used by the surface quadratures.
const PANELS: usize = 32;

/// Invariants of the surface of revolution generated by `profile` (`d = 3`).
/// Principal curvatures are the meridian curvature
/// `(r'z'' - z'r'') / |γ'|³` and the parallel curvature `z' / (r |γ'|)`.
pub fn revolution_invariants(profile: &dyn Profile, order: usize) -> Result<QuadratureResult, GeometryError> {
    if order == 0 {
        return Err(GeometryError::InvalidInput("quadrature order must be positive".into()));
    }
    let coarse = revolution_sums(profile, order)?;
    let fine = revolution_sums(profile, 2 * order)?;
    let change = relative_change(&coarse, &fine);
    let mut invariants = GeometricInvariants::new(3, fine[0], fine[1], fine[2]);
    invariants.volume = Some(fine[3]);
    Ok(QuadratureResult {
        invariants,
        doubling_change: change,
    })
}

fn revolution_sums(profile: &dyn Profile, order: usize) -> Result<[f64; 4], GeometryError> {
    let gl = GaussLegendre::new(order);
    let (u0, u1) = profile.domain();
    let h = (u1 - u0) / PANELS as f64;
    let mut sums = [0.0; 4];
    for k in 0..PANELS {
        let lo = u0 + h * k as f64;
        for (u, w) in gl.mapped(lo, lo + h) {
            let p = profile.point(u);
            let speed = p.dr.hypot(p.dz);
            if p.r <= 0.0 || speed == 0.0 {
                return Err(GeometryError::DegenerateProfile(format!(
                    "radius {} and speed {} at parameter {u}",
                    p.r, speed
                )));
            }
            let k_meridian = (p.dr * p.ddz - p.dz * p.ddr) / speed.powi(3);
            let k_parallel = p.dz / (p.r * speed);
            let h_sum = k_meridian + k_parallel;
            let da = 2.0 * PI * p.r * speed * w;
            sums[0] += da;
            sums[1] += h_sum * da;
            sums[2] += (13.0 * h_sum * h_sum + 2.0 * (k_meridian.powi(2) + k_parallel.powi(2))) * da;
            // Volume by the divergence theorem on the radial field: V = ∫ π r² dz.
            sums[3] += PI * p.r * p.r * p.dz * w;
        }
    }
    Ok(sums)
}

fn relative_change(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    (0..3)
        .map(|i| (a[i] - b[i]).abs() / b[i].abs().max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max)
}

/// Invariants of the ellipsoid `x²/a² + y²/b² + z²/c² = 1` from the first and
/// second fundamental forms of the angular chart.
pub fn ellipsoid_invariants(a: f64, b: f64, c: f64) -> Result<QuadratureResult, GeometryError> {
    ellipsoid_invariants_with(a, b, c, 8)
}

pub fn ellipsoid_invariants_with(a: f64, b: f64, c: f64, order: usize) -> Result<QuadratureResult, GeometryError> {
    if !(a > 0.0 && b > 0.0 && c > 0.0) || ![a, b, c].iter().all(|x| x.is_finite()) {
        return Err(GeometryError::InvalidInput(format!("semi-axes {a}, {b}, {c}")));
    }
    let coarse = ellipsoid_sums(a, b, c, order);
    let fine = ellipsoid_sums(a, b, c, 2 * order);
    let change = relative_change(&coarse, &fine);
    let mut invariants = GeometricInvariants::new(3, fine[0], fine[1], fine[2]);
    invariants.volume = Some(4.0 * PI * a * b * c / 3.0);
    invariants.convex = Some(true);
    Ok(QuadratureResult {
        invariants,
        doubling_change: change,
    })
}

/// `(H, Σκ², dA/dudv)` of the ellipsoid chart at `(u, v)`.
pub(crate) fn ellipsoid_curvatures(a: f64, b: f64, c: f64, u: f64, v: f64) -> (f64, f64, f64) {
    let (su, cu) = u.sin_cos();
    let (sv, cv) = v.sin_cos();
    let xu = [a * cu * cv, b * cu * sv, -c * su];
    let xv = [-a * su * sv, b * su * cv, 0.0];
    let xuu = [-a * su * cv, -b * su * sv, -c * cu];
    let xuv = [-a * cu * sv, b * cu * cv, 0.0];
    let xvv = [-a * su * cv, -b * su * sv, 0.0];
    let dot = |p: [f64; 3], q: [f64; 3]| p[0] * q[0] + p[1] * q[1] + p[2] * q[2];
    let cross = [
        xu[1] * xv[2] - xu[2] * xv[1],
        xu[2] * xv[0] - xu[0] * xv[2],
        xu[0] * xv[1] - xu[1] * xv[0],
    ];
    let area = dot(cross, cross).sqrt();
    let n = [cross[0] / area, cross[1] / area, cross[2] / area];
    let (e, f, g) = (dot(xu, xu), dot(xu, xv), dot(xv, xv));
    // Measured against the inward normal so convex surfaces come out positive.
    let (l, m, nn) = (-dot(xuu, n), -dot(xuv, n), -dot(xvv, n));
    let det = e * g - f * f;
    let h = (e * nn - 2.0 * f * m + g * l) / det;
    let k = (l * nn - m * m) / det;
    (h, h * h - 2.0 * k, area)
}

fn ellipsoid_sums(a: f64, b: f64, c: f64, order: usize) -> [f64; 4] {
    let gl = GaussLegendre::new(order);
    let hu = PI / PANELS as f64;
    let hv = 2.0 * PI / PANELS as f64;
    let mut sums = [0.0; 4];
    for i in 0..PANELS {
        let u0 = hu * i as f64;
        for (u, wu) in gl.mapped(u0, u0 + hu) {
            for j in 0..PANELS {
                let v0 = hv * j as f64;
                for (v, wv) in gl.mapped(v0, v0 + hv) {
                    let (h, k2, area) = ellipsoid_curvatures(a, b, c, u, v);
                    let da = area * wu * wv;
                    sums[0] += da;
                    sums[1] += h * da;
                    sums[2] += (13.0 * h * h + 2.0 * k2) * da;
                }
            }
        }
    }
    sums
}

/// Ball in `R^d`, `d = center.len()`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

/// A surface the module knows how to measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SurfaceSpec {
    /// Pairwise disjoint balls.
    UnionOfSpheres { balls: Vec<Ball> },
    /// Meridian samples `(r, z)` of a surface of revolution in `R^3`.
    Revolution { samples: Vec<(f64, f64)> },
    Ellipsoid { a: f64, b: f64, c: f64 },
}

/// Gauss–Legendre order used by [`SurfaceSpec::evaluate`]; the result also
/// reports the change under doubling.
pub const DEFAULT_ORDER: usize = 12;

impl SurfaceSpec {
    pub fn dimension(&self) -> u32 {
        match self {
            SurfaceSpec::UnionOfSpheres { balls } => balls.first().map_or(0, |b| b.center.len() as u32),
            _ => 3,
        }
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        match self {
            SurfaceSpec::UnionOfSpheres { balls } => {
                let d = self.dimension();
                if balls.is_empty() || d < 2 {
                    return Err(GeometryError::InvalidInput("need at least one ball in R^d, d >= 2".into()));
                }
                for (i, b) in balls.iter().enumerate() {
                    if b.center.len() as u32 != d {
                        return Err(GeometryError::DimensionMismatch(d, b.center.len() as u32));
                    }
                    if !(b.radius > 0.0 && b.radius.is_finite()) || b.center.iter().any(|x| !x.is_finite()) {
                        return Err(GeometryError::InvalidInput(format!("ball {i}")));
                    }
                    for (j, o) in balls.iter().enumerate().skip(i + 1) {
                        let dist = b.center.iter().zip(&o.center).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
                        if dist <= b.radius + o.radius {
                            return Err(GeometryError::InvalidInput(format!("balls {i} and {j} intersect")));
                        }
                    }
                }
                Ok(())
            }
            SurfaceSpec::Revolution { samples } => SampledProfile::new(samples).map(|_| ()),
            SurfaceSpec::Ellipsoid { a, b, c } => {
                if [a, b, c].iter().all(|x| **x > 0.0 && x.is_finite()) {
                    Ok(())
                } else {
                    Err(GeometryError::InvalidInput(format!("semi-axes {a}, {b}, {c}")))
                }
            }
        }
    }

    pub fn evaluate(&self) -> Result<QuadratureResult, GeometryError> {
        self.validate()?;
        match self {
            SurfaceSpec::UnionOfSpheres { balls } => {
                let d = self.dimension();
                let mut total = sphere_invariants(d, balls[0].radius, 1)?;
                for b in &balls[1..] {
                    total = total.disjoint_union(&sphere_invariants(d, b.radius, 1)?)?;
                }
                Ok(QuadratureResult {
                    invariants: total,
                    doubling_change: 0.0,
                })
            }
            SurfaceSpec::Revolution { samples } => revolution_invariants(&SampledProfile::new(samples)?, DEFAULT_ORDER),
            SurfaceSpec::Ellipsoid { a, b, c } => ellipsoid_invariants_with(*a, *b, *c, DEFAULT_ORDER),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn unit_sphere_closed_form() {
        let inv = sphere_invariants(3, 1.0, 1).unwrap();
        assert_relative_eq!(inv.a1, 4.0 * PI, max_relative = 1e-15);
        assert_relative_eq!(inv.a2, 8.0 * PI, max_relative = 1e-15);
        assert_relative_eq!(inv.a3, 224.0 * PI, max_relative = 1e-15);
    }

    #[test]
    fn two_unit_spheres() {
        let inv = sphere_invariants(3, 1.0, 2).unwrap();
        assert_relative_eq!(inv.a1, 8.0 * PI, max_relative = 1e-15);
        assert_relative_eq!(inv.a2, 16.0 * PI, max_relative = 1e-15);
        assert_relative_eq!(inv.a3, 448.0 * PI, max_relative = 1e-15);
        assert_eq!(inv.convex, Some(false));
    }

    #[test]
    fn a3_is_radius_independent_in_d3() {
        for rho in [0.3, 1.0, 7.5] {
            let inv = sphere_invariants(3, rho, 1).unwrap();
            assert_relative_eq!(inv.a3, 224.0 * PI, max_relative = 1e-14);
        }
    }

    #[test]
    fn sphere_rejects_bad_input() {
        assert!(sphere_invariants(3, -1.0, 1).is_err());
        assert!(sphere_invariants(3, 1.0, 0).is_err());
    }

    #[test]
    fn additivity() {
        let one = sphere_invariants(5, 0.7, 1).unwrap();
        let two = sphere_invariants(5, 0.7, 2).unwrap();
        let sum = one.disjoint_union(&one).unwrap();
        assert_relative_eq!(sum.a1, two.a1, max_relative = 1e-15);
        assert_relative_eq!(sum.a3, two.a3, max_relative = 1e-15);
        let other = sphere_invariants(3, 1.0, 1).unwrap();
        assert!(one.disjoint_union(&other).is_err());
    }

    #[test]
    fn circle_profile_matches_sphere() {
        let res = revolution_invariants(&CircleProfile { radius: 1.0, z0: 0.0 }, 8).unwrap();
        let exact = sphere_invariants(3, 1.0, 1).unwrap();
        assert_relative_eq!(res.invariants.a1, exact.a1, max_relative = 1e-8);
        assert_relative_eq!(res.invariants.a2, exact.a2, max_relative = 1e-8);
        assert_relative_eq!(res.invariants.a3, exact.a3, max_relative = 1e-8);
        assert_relative_eq!(res.invariants.volume.unwrap(), 4.0 * PI / 3.0, max_relative = 1e-8);
        assert!(res.doubling_change < 1e-8);
    }

    #[test]
    fn torus_area_and_mean_curvature() {
        let res = revolution_invariants(&TorusProfile { center: 2.0, tube: 0.5 }, 8).unwrap();
        assert_relative_eq!(res.invariants.a1, 4.0 * PI * PI, max_relative = 1e-10);
        assert_relative_eq!(res.invariants.a2, 4.0 * PI * PI * 2.0, max_relative = 1e-10);
        assert!(res.invariants.cauchy_schwarz_defect() > 0.0);
    }

    #[test]
    fn scaled_circle_exponents() {
        let one = revolution_invariants(&CircleProfile { radius: 1.0, z0: 0.0 }, 8).unwrap().invariants;
        let two = revolution_invariants(&CircleProfile { radius: 2.0, z0: 0.0 }, 8).unwrap().invariants;
        assert_relative_eq!(two.a1 / one.a1, 4.0, max_relative = 1e-10);
        assert_relative_eq!(two.a2 / one.a2, 2.0, max_relative = 1e-10);
        assert_relative_eq!(two.a3 / one.a3, 1.0, max_relative = 1e-10);
    }

    #[test]
    fn spheroid_profile_matches_ellipsoid_chart() {
        let rev = revolution_invariants(&SpheroidProfile { a: 1.0, c: 2.0 }, 8).unwrap().invariants;
        let ell = ellipsoid_invariants(1.0, 1.0, 2.0).unwrap().invariants;
        assert_relative_eq!(rev.a1, ell.a1, max_relative = 1e-9);
        assert_relative_eq!(rev.a2, ell.a2, max_relative = 1e-9);
        assert_relative_eq!(rev.a3, ell.a3, max_relative = 1e-9);
    }

    #[test]
    fn unit_ellipsoid_is_sphere() {
        let res = ellipsoid_invariants(1.0, 1.0, 1.0).unwrap();
        let exact = sphere_invariants(3, 1.0, 1).unwrap();
        assert_relative_eq!(res.invariants.a1, exact.a1, max_relative = 1e-8);
        assert_relative_eq!(res.invariants.a2, exact.a2, max_relative = 1e-8);
        assert_relative_eq!(res.invariants.a3, exact.a3, max_relative = 1e-8);
    }

    #[test]
    fn ellipsoid_curvature_matches_implicit_formula() {
        let (a, b, c) = (1.0, 1.5, 2.5);
        for &(u, v) in &[(0.4, 1.1), (1.7, 4.0), (2.9, 0.2)] {
            let (h, k2, _) = ellipsoid_curvatures(a, b, c, u, v);
            let x = [a * u.sin() * v.cos(), b * u.sin() * v.sin(), c * u.cos()];
            let hess = [2.0 / (a * a), 2.0 / (b * b), 2.0 / (c * c)];
            let g = [x[0] * hess[0], x[1] * hess[1], x[2] * hess[2]];
            let g2: f64 = g.iter().map(|t| t * t).sum();
            let trace: f64 = hess.iter().sum();
            let ghg: f64 = (0..3).map(|i| g[i] * g[i] * hess[i]).sum();
            let h_implicit = (g2 * trace - ghg) / g2.powf(1.5);
            // Gauss curvature of an ellipsoid: 1 / (a²b²c² (Σ x_i²/a_i⁴)²)
            let s = x[0] * x[0] / a.powi(4) + x[1] * x[1] / b.powi(4) + x[2] * x[2] / c.powi(4);
            let k = 1.0 / (a * a * b * b * c * c * s * s);
            assert_relative_eq!(h, h_implicit, max_relative = 1e-12);
            assert_relative_eq!(k2, h_implicit * h_implicit - 2.0 * k, max_relative = 1e-10);
        }
    }

    #[test]
    fn sampled_sphere_profile() {
        let n = 400;
        let points: Vec<(f64, f64)> = (0..=n)
            .map(|k| {
                let u = PI * k as f64 / n as f64;
                (u.sin(), -u.cos())
            })
            .collect();
        let mut points = points;
        points[0].0 = 0.0;
        points[n].0 = 0.0;
        let profile = SampledProfile::new(&points).unwrap();
        let res = revolution_invariants(&profile, 8).unwrap().invariants;
        assert_relative_eq!(res.a1, 4.0 * PI, max_relative = 1e-6);
        assert_relative_eq!(res.a2, 8.0 * PI, max_relative = 1e-5);
        assert_relative_eq!(res.a3, 224.0 * PI, max_relative = 1e-4);
    }

    #[test]
    fn sampled_torus_profile() {
        let n = 360;
        let points: Vec<(f64, f64)> = (0..=n)
            .map(|k| {
                let u = 2.0 * PI * k as f64 / n as f64;
                (2.0 + 0.5 * u.cos(), 0.5 * u.sin())
            })
            .collect();
        let profile = SampledProfile::new(&points).unwrap();
        assert!(profile.is_closed());
        let res = revolution_invariants(&profile, 8).unwrap().invariants;
        assert_relative_eq!(res.a1, 4.0 * PI * PI, max_relative = 1e-6);
    }

    #[test]
    fn degenerate_profiles_are_rejected() {
        // Pinches to the axis halfway up.
        let points: Vec<(f64, f64)> = (0..=20)
            .map(|k| {
                let u = PI * k as f64 / 20.0;
                ((2.0 * u).sin().abs(), -u.cos())
            })
            .collect();
        assert!(matches!(
            SampledProfile::new(&points),
            Err(GeometryError::DegenerateProfile(_))
        ));
        // Open and off the axis.
        let points: Vec<(f64, f64)> = (0..=20).map(|k| (1.0, k as f64)).collect();
        assert!(SampledProfile::new(&points).is_err());
    }

    #[test]
    fn profile_file_parsing() {
        let text = "# r z\n0 -1\n\n1 0\n0 1\n";
        assert_eq!(parse_profile(text).unwrap(), vec![(0.0, -1.0), (1.0, 0.0), (0.0, 1.0)]);
        assert!(parse_profile("1 2 3\n").is_err());
        assert!(parse_profile("1 x\n").is_err());
    }

    #[test]
    fn surface_spec_union_checks_disjointness() {
        let ball = |x: f64, r: f64| Ball { center: vec![x, 0.0, 0.0], radius: r };
        let two = SurfaceSpec::UnionOfSpheres { balls: vec![ball(0.0, 1.0), ball(3.0, 1.0)] };
        let inv = two.evaluate().unwrap().invariants;
        let want = sphere_invariants(3, 1.0, 2).unwrap();
        assert_relative_eq!(inv.a1, want.a1, max_relative = 1e-15);
        assert_relative_eq!(inv.a3, want.a3, max_relative = 1e-15);
        assert_eq!(inv.convex, Some(false));
        let touching = SurfaceSpec::UnionOfSpheres { balls: vec![ball(0.0, 1.0), ball(2.0, 1.0)] };
        assert!(touching.evaluate().is_err());
        let mixed = SurfaceSpec::UnionOfSpheres {
            balls: vec![ball(0.0, 1.0), Ball { center: vec![5.0, 0.0], radius: 1.0 }],
        };
        assert!(matches!(mixed.validate(), Err(GeometryError::DimensionMismatch(3, 2))));
    }

    #[test]
    fn surface_spec_round_trips_through_json() {
        let spec = SurfaceSpec::Ellipsoid { a: 1.0, b: 1.0, c: 2.0 };
        let text = serde_json::to_string(&spec).unwrap();
        assert!(text.contains("\"kind\":\"ellipsoid\""));
        let back: SurfaceSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back, spec);
        let r = back.evaluate().unwrap();
        assert!(r.invariants.cauchy_schwarz_defect() > 0.01);
        assert!(r.doubling_change < 1e-8);
    }

    #[test]
    fn near_sphere_gap_is_second_order() {
        let defect = |eps: f64| {
            ellipsoid_invariants_with(1.0, 1.0, 1.0 + eps, 16)
                .unwrap()
                .invariants
                .cauchy_schwarz_defect()
        };
        let (g1, g2) = (defect(1e-3), defect(2e-3));
        assert!(g1 > 0.0 && g1 < 1e-5, "{g1}");
        assert_relative_eq!(g2 / g1, 4.0, max_relative = 0.01);
    }
}
