//! Exact radial polynomials of the exterior ball problem.
//!
//! For odd `d` and angular momentum `l` put `m = l + (d-3)/2`. The outgoing
//! radial solution `r^{-(d-2)/2} H^{(1)}_{l+(d-2)/2}(λr)` is, up to a constant,
//! `e^{iz} z^{-a} T(z)` with `z = λr`, `a = m + (d-1)/2` and
//!
//! ```text
//! T(z) = Σ_{k=0}^{m} i^k (m+k)! / (k! (m-k)! 2^k) z^{m-k}.
//! ```
//!
//! Its zeros are the Dirichlet resonances (times `ρ`); the zeros of its radial
//! derivative, `N(z) = i z T(z) + z T'(z) - a T(z)`, are the Neumann ones.

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{BoundaryCondition, RadialError};
use crate::polyroot::Polynomial;

/// Complex number with arbitrary-precision rational parts.
pub type GaussianRational = Complex<BigRational>;

#[derive(Debug, Clone, PartialEq)]
pub struct RadialPolynomial {
    dimension: u32,
    mode: u32,
    bc: BoundaryCondition,
    /// Ascending degree.
    coefficients: Vec<GaussianRational>,
}

impl RadialPolynomial {
    pub fn new(dimension: u32, mode: u32, bc: BoundaryCondition) -> Result<Self, RadialError> {
        super::check_dimension(dimension)?;
        let m = (mode + (dimension - 3) / 2) as usize;
        let t = hankel_numerator(m);
        let coefficients = match bc {
            BoundaryCondition::Dirichlet => t,
            BoundaryCondition::Neumann => {
                let a = BigRational::from_integer(BigInt::from(m + (dimension as usize - 1) / 2));
                let i = Complex::new(BigRational::zero(), BigRational::one());
                let mut n = vec![Complex::new(BigRational::zero(), BigRational::zero()); m + 2];
                for (j, tj) in t.iter().enumerate() {
                    // i z T
                    n[j + 1] = &n[j + 1] + &i * tj;
                    // z T' - a T
                    let weight = BigRational::from_integer(BigInt::from(j)) - &a;
                    n[j] = &n[j] + scale(tj, &weight);
                }
                n
            }
        };
        Ok(Self {
            dimension,
            mode,
            bc,
            coefficients,
        })
    }

    /// Exact `Σ_j z_j^{-k}` over the roots, for `k = 1..=k_max` (index `k - 1`),
    /// by Newton's identities on the reversed polynomial. Empty sums are zero.
    pub fn reciprocal_power_sums(&self, k_max: usize) -> Vec<GaussianRational> {
        let zero = || Complex::new(BigRational::zero(), BigRational::zero());
        let n = self.degree();
        let c0 = &self.coefficients[0];
        // Monic reversed polynomial y^n + a_1 y^{n-1} + ... + a_n.
        let a: Vec<GaussianRational> = (1..=n).map(|i| &self.coefficients[i] / c0).collect();
        let mut sums: Vec<GaussianRational> = Vec::with_capacity(k_max);
        for k in 1..=k_max {
            let mut acc = if k <= n {
                scale(&a[k - 1], &BigRational::from_integer(BigInt::from(k)))
            } else {
                zero()
            };
            for i in 1..k.min(n + 1) {
                acc = acc + &a[i - 1] * &sums[k - i - 1];
            }
            sums.push(-acc);
        }
        sums
    }

    pub fn dimension(&self) -> u32 {
        self.dimension
    }

    pub fn mode(&self) -> u32 {
        self.mode
    }

    pub fn boundary_condition(&self) -> BoundaryCondition {
        self.bc
    }

    pub fn coefficients(&self) -> &[GaussianRational] {
        &self.coefficients
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn leading(&self) -> &GaussianRational {
        &self.coefficients[self.degree()]
    }

    /// `±1` when `p(-z̄) = ±conj(p(z))` holds coefficient-wise, `None` otherwise.
    pub fn reflection_sign(&self) -> Option<i8> {
        let mut sign = None;
        for (k, c) in self.coefficients.iter().enumerate() {
            if c.re.is_zero() && c.im.is_zero() {
                continue;
            }
            // c_k (-1)^k must equal s * conj(c_k).
            let lhs = if k % 2 == 0 { c.clone() } else { -c.clone() };
            let conj = c.conj();
            let s = if lhs == conj {
                1
            } else if lhs == -conj {
                -1
            } else {
                return None;
            };
            match sign {
                None => sign = Some(s),
                Some(prev) if prev != s => return None,
                _ => {}
            }
        }
        sign
    }

    /// Coefficients rounded to double precision. Overflows to infinity past
    /// roughly `m = 150`; use [`RadialPolynomial::scaled`] for large modes.
    pub fn to_complex64(&self) -> Vec<Complex64> {
        self.coefficients.iter().map(to_c64).collect()
    }

    /// `log2 |c_k|` for every coefficient (`-inf` for zeros).
    pub fn log2_magnitudes(&self) -> Vec<f64> {
        self.coefficients.iter().map(log2_abs_gaussian).collect()
    }

    /// `log2` of the largest coefficient modulus.
    pub fn log2_max_coefficient(&self) -> f64 {
        self.log2_magnitudes()
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// The monic polynomial `q(w) = p(2^e w) / (lead · 2^{e·deg})`, exactly
    /// rescaled and then rounded, with `e` chosen so the roots of `q` have
    /// geometric-mean modulus near one.
    pub fn scaled(&self) -> ScaledPolynomial {
        let mags = self.log2_magnitudes();
        let n = self.degree();
        let exponent = if n == 0 || !mags[0].is_finite() {
            0
        } else {
            ((mags[0] - mags[n]) / n as f64).round() as i32
        };
        self.scaled_by(exponent)
    }

    pub fn scaled_by(&self, exponent: i32) -> ScaledPolynomial {
        let n = self.degree() as i32;
        let lead = self.leading();
        let lead_norm = &lead.re * &lead.re + &lead.im * &lead.im;
        let inv_lead = Complex::new(&lead.re / &lead_norm, -(&lead.im / &lead_norm));
        let coeffs = self
            .coefficients
            .iter()
            .enumerate()
            .map(|(k, c)| {
                let shift = exponent * (k as i32 - n);
                let factor = pow2(shift);
                to_c64(&scale(&(c * &inv_lead), &factor))
            })
            .collect();
        ScaledPolynomial {
            exponent,
            log2_lead: log2_abs_gaussian(lead),
            poly: Polynomial::new(coeffs).expect("scaled radial polynomial is well formed"),
        }
    }
}

/// Exact evaluation at dyadic points. The coefficients are cleared to
/// Gaussian integers, the point `z` is rounded to `Z / 2^p`, and Horner's rule
/// runs on big integers, so `p(z)/p'(z)` carries no cancellation error however
/// ill-conditioned the evaluation is in floating point.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactEvaluator {
    /// `(re, im)` of the cleared coefficients, ascending.
    value: Vec<(BigInt, BigInt)>,
    derivative: Vec<(BigInt, BigInt)>,
}

impl ExactEvaluator {
    pub fn new(poly: &RadialPolynomial) -> Self {
        let denominator = poly
            .coefficients
            .iter()
            .flat_map(|c| [c.re.denom().clone(), c.im.denom().clone()])
            .fold(BigInt::one(), |acc, d| acc.lcm(&d));
        let cleared: Vec<(BigInt, BigInt)> = poly
            .coefficients
            .iter()
            .map(|c| {
                let re = (&c.re * &denominator).to_integer();
                let im = (&c.im * &denominator).to_integer();
                (re, im)
            })
            .collect();
        let derivative = cleared
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, (re, im))| (re * BigInt::from(k), im * BigInt::from(k)))
            .collect();
        Self {
            value: cleared,
            derivative,
        }
    }

    /// `p(z)` up to a positive factor, exact in direction.
    pub fn direction(&self, z: Complex64) -> Complex64 {
        let (p, x, y) = dyadic(z);
        horner_dyadic(&self.value, &x, &y, p).0
    }

    /// `p(z) / p'(z)`.
    pub fn newton_ratio(&self, z: Complex64) -> Complex64 {
        let top = z.re.abs().max(z.im.abs());
        if top == 0.0 || self.derivative.is_empty() {
            return to_c64_exact(&self.value[0]) / to_c64_exact(self.derivative.first().unwrap_or(&(BigInt::one(), BigInt::zero())));
        }
        let (p, x, y) = dyadic(z);
        let (a, ea) = horner_dyadic(&self.value, &x, &y, p);
        let (b, eb) = horner_dyadic(&self.derivative, &x, &y, p);
        // a = 2^{p n} p(z), b = 2^{p (n-1)} p'(z).
        let ratio = a / b;
        ratio * 2f64.powi((ea - eb - p as i64) as i32)
    }
}

/// `z ≈ (x + i y) / 2^p` with 62 significant bits in the larger component.
fn dyadic(z: Complex64) -> (u64, BigInt, BigInt) {
    let top = z.re.abs().max(z.im.abs()).max(f64::MIN_POSITIVE);
    let p = (62 - top.log2().floor() as i64).max(0) as u64;
    let scale = 2f64.powi(p as i32);
    let x = BigInt::from((z.re * scale).round() as i64);
    let y = BigInt::from((z.im * scale).round() as i64);
    (p, x, y)
}

/// `Σ c_k Z^k 2^{p(n-k)}` by Horner, returned as a mantissa and power of two.
fn horner_dyadic(coeffs: &[(BigInt, BigInt)], x: &BigInt, y: &BigInt, p: u64) -> (Complex64, i64) {
    let n = coeffs.len() - 1;
    let (mut re, mut im) = coeffs[n].clone();
    for k in (0..n).rev() {
        let shift = p * (n - k) as u64;
        let new_re = &re * x - &im * y + (&coeffs[k].0 << shift);
        let new_im = &re * y + &im * x + (&coeffs[k].1 << shift);
        re = new_re;
        im = new_im;
    }
    let bits = re.bits().max(im.bits());
    let shift = bits.saturating_sub(60);
    let mantissa = Complex64::new(
        (re >> shift).to_f64().unwrap_or(f64::NAN),
        (im >> shift).to_f64().unwrap_or(f64::NAN),
    );
    (mantissa, shift as i64)
}

fn to_c64_exact(c: &(BigInt, BigInt)) -> Complex64 {
    Complex64::new(c.0.to_f64().unwrap_or(f64::NAN), c.1.to_f64().unwrap_or(f64::NAN))
}

/// A radial polynomial in the rescaled variable `w = z / 2^e`, made monic.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledPolynomial {
    pub exponent: i32,
    /// `log2 |lead|` of the unscaled polynomial.
    pub log2_lead: f64,
    pub poly: Polynomial,
}

impl ScaledPolynomial {
    pub fn scale(&self) -> f64 {
        2f64.powi(self.exponent)
    }

    /// `log2 |p(z)|` of the unscaled polynomial, without forming `p(z)`.
    pub fn log2_abs_unscaled(&self, z: Complex64) -> f64 {
        let w = z / self.scale();
        self.poly.eval(w).norm().log2()
            + self.log2_lead
            + (self.exponent as f64) * self.poly.degree() as f64
    }
}

/// Coefficients of `T` (ascending degree) for Hankel order `m`.
fn hankel_numerator(m: usize) -> Vec<GaussianRational> {
    let zero = BigRational::zero();
    let mut out = vec![Complex::new(zero.clone(), zero.clone()); m + 1];
    for k in 0..=m {
        let num = factorial(m + k);
        let den = factorial(k) * factorial(m - k) * (BigInt::one() << k);
        let mag = BigRational::new(num, den);
        // i^k
        let c = match k % 4 {
            0 => Complex::new(mag, zero.clone()),
            1 => Complex::new(zero.clone(), mag),
            2 => Complex::new(-mag, zero.clone()),
            _ => Complex::new(zero.clone(), -mag),
        };
        out[m - k] = c;
    }
    out
}

fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

fn scale(c: &GaussianRational, f: &BigRational) -> GaussianRational {
    Complex::new(&c.re * f, &c.im * f)
}

fn pow2(exp: i32) -> BigRational {
    let p = BigInt::one() << exp.unsigned_abs();
    if exp >= 0 {
        BigRational::from_integer(p)
    } else {
        BigRational::new(BigInt::one(), p)
    }
}

fn to_c64(c: &GaussianRational) -> Complex64 {
    Complex64::new(
        c.re.to_f64().unwrap_or(f64::NAN),
        c.im.to_f64().unwrap_or(f64::NAN),
    )
}

fn log2_bigint(n: &BigInt) -> f64 {
    let bits = n.bits();
    if bits == 0 {
        return f64::NEG_INFINITY;
    }
    if bits <= 1000 {
        return n.abs().to_f64().unwrap_or(f64::INFINITY).log2();
    }
    let shift = bits - 64;
    let top: BigInt = n.abs() >> shift;
    top.to_f64().unwrap_or(f64::INFINITY).log2() + shift as f64
}

fn log2_abs_rational(r: &BigRational) -> f64 {
    if r.is_zero() {
        return f64::NEG_INFINITY;
    }
    log2_bigint(r.numer()) - log2_bigint(r.denom())
}

fn log2_abs_gaussian(c: &GaussianRational) -> f64 {
    let a = log2_abs_rational(&c.re);
    let b = log2_abs_rational(&c.im);
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + 0.5 * (1.0 + 2f64.powf(2.0 * (lo - hi))).log2()
}
