//! Small closed forms shared across modules.

use std::f64::consts::PI;

/// `Γ(n/2)` for a positive integer `n`.
pub fn gamma_half(n: u32) -> f64 {
    assert!(n > 0, "gamma_half needs n >= 1");
    let (mut value, mut k) = if n % 2 == 0 { (1.0, 2) } else { (PI.sqrt(), 1) };
    // Γ(x + 1) = x Γ(x), stepping x by one from Γ(1) or Γ(1/2).
    while k < n {
        value *= k as f64 / 2.0;
        k += 2;
    }
    value
}

/// Area of the unit sphere `S^{d-1}` in `R^d`: `2 π^{d/2} / Γ(d/2)`.
pub fn unit_sphere_area(d: u32) -> f64 {
    2.0 * PI.powf(d as f64 / 2.0) / gamma_half(d)
}

/// Binomial coefficient as `u128`; panics on overflow.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc
            .checked_mul((n - i) as u128)
            .expect("binomial overflow")
            / (i as u128 + 1);
    }
    acc
}
