//! Gamma function on the real line, in the logarithmic form the Bessel
//! series needs (orders up to |nu| = 500 overflow `Γ` itself).

use std::f64::consts::PI;

const HALF_LN_TWO_PI: f64 = 0.918_938_533_204_672_8;

/// Stirling threshold. Below it the argument is shifted upwards first.
const STIRLING_MIN: f64 = 10.0;

/// `sin(pi x)` with exact zeros at the integers.
pub fn sin_pi(x: f64) -> f64 {
    let r = x - 2.0 * (x / 2.0).round();
    // r in [-1, 1]
    let (r, sign) = if r < 0.0 { (-r, -1.0) } else { (r, 1.0) };
    let r = if r > 0.5 { 1.0 - r } else { r };
    sign * (PI * r).sin()
}

/// `cos(pi x)` with exact zeros at the half-integers.
pub fn cos_pi(x: f64) -> f64 {
    sin_pi(x + 0.5)
}

/// True when `x` is a non-positive integer (a pole of `Γ`).
pub fn is_gamma_pole(x: f64) -> bool {
    x <= 0.0 && x == x.round()
}

fn ln_gamma_stirling(x: f64) -> f64 {
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    // Bernoulli corrections B_2j / (2j (2j-1) x^(2j-1))
    let series = inv
        * (1.0 / 12.0
            + inv2
                * (-1.0 / 360.0
                    + inv2
                        * (1.0 / 1260.0
                            + inv2
                                * (-1.0 / 1680.0
                                    + inv2
                                        * (1.0 / 1188.0
                                            + inv2
                                                * (-691.0 / 360_360.0
                                                    + inv2 * (1.0 / 156.0 + inv2 * (-3617.0 / 122_400.0))))))));
    (x - 0.5) * x.ln() - x + HALF_LN_TWO_PI + series
}

fn ln_gamma_positive(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    if x >= STIRLING_MIN {
        return ln_gamma_stirling(x);
    }
    let mut shifted = x;
    let mut product = 1.0;
    while shifted < STIRLING_MIN {
        product *= shifted;
        shifted += 1.0;
    }
    ln_gamma_stirling(shifted) - product.ln()
}

/// Returns `(ln|Γ(x)|, sign Γ(x))`. Poles give `(+inf, 0.0)`.
pub fn ln_gamma_signed(x: f64) -> (f64, f64) {
    if is_gamma_pole(x) {
        return (f64::INFINITY, 0.0);
    }
    if x >= 0.5 {
        return (ln_gamma_positive(x), 1.0);
    }
    // Γ(x) Γ(1-x) = π / sin(πx), with Γ(1-x) > 0 here
    let s = sin_pi(x);
    let ln_abs = PI.ln() - s.abs().ln() - ln_gamma_positive(1.0 - x);
    (ln_abs, s.signum())
}

/// `Γ(x)` for moderate arguments; overflows to `±inf` past x ≈ 171.
pub fn gamma(x: f64) -> f64 {
    let (ln_abs, sign) = ln_gamma_signed(x);
    if sign == 0.0 {
        return f64::NAN;
    }
    sign * ln_abs.exp()
}

/// `1/Γ(x)`, zero at the poles.
pub fn rgamma(x: f64) -> f64 {
    let (ln_abs, sign) = ln_gamma_signed(x);
    if sign == 0.0 {
        return 0.0;
    }
    sign * (-ln_abs).exp()
}
