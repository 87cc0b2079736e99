//! Scalar special functions: principal complex powers, Γ, γ(α, 1) and arccosh.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{FkError, Result};

/// Argument of `z` on the principal branch, normalised to (−π, π].
///
/// `atan2` returns −π for a negative real axis approached from `−0.0`; that
/// value is folded onto +π so the branch cut belongs to the upper sheet.
#[inline]
pub fn principal_arg(z: Complex64) -> f64 {
    let theta = z.im.atan2(z.re);
    if theta == -PI {
        PI
    } else {
        theta
    }
}

/// Principal-branch power `z^alpha = exp(alpha (ln|z| + i arg z))`.
///
/// `z = 0` returns 0 for `alpha > 0` and is a domain error otherwise.
pub fn complex_pow(z: Complex64, alpha: f64) -> Result<Complex64> {
    if !(z.re.is_finite() && z.im.is_finite() && alpha.is_finite()) {
        return Err(FkError::domain("complex_pow", format!("non-finite input z={z}, alpha={alpha}")));
    }
    if z.re == 0.0 && z.im == 0.0 {
        return if alpha > 0.0 {
            Ok(Complex64::new(0.0, 0.0))
        } else {
            Err(FkError::domain("complex_pow", format!("0^{alpha} is undefined")))
        };
    }
    Ok(pow_nonzero(z, alpha))
}

/// Same as [`complex_pow`] for callers that have already excluded `z = 0`.
#[inline]
pub(crate) fn pow_nonzero(z: Complex64, alpha: f64) -> Complex64 {
    let log_mod = z.norm().ln();
    let arg = principal_arg(z);
    Complex64::from_polar((alpha * log_mod).exp(), alpha * arg)
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Γ(x) for x > 0.
///
/// Lanczos (g = 7, 9 terms) on [1, 2] with upward recurrence for larger
/// arguments and Γ(x) = Γ(x + 1)/x below 1.
pub fn gamma_fn(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(FkError::domain("gamma_fn", format!("requires x > 0, got {x}")));
    }
    if x < 1.0 {
        return Ok(lanczos_on_unit(x + 1.0) / x);
    }
    // Γ(x) = (x-1)(x-2)…(frac+1) Γ(frac+1) keeps the Lanczos argument in [1, 2).
    let mut y = x;
    let mut acc = 1.0;
    while y >= 2.0 {
        y -= 1.0;
        acc *= y;
    }
    Ok(acc * lanczos_on_unit(y))
}

fn lanczos_on_unit(x: f64) -> f64 {
    let xm1 = x - 1.0;
    let mut series = LANCZOS_COEFFS[0];
    for (i, c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        series += c / (xm1 + i as f64);
    }
    let t = xm1 + LANCZOS_G + 0.5;
    (2.0 * PI).sqrt() * t.powf(xm1 + 0.5) * (-t).exp() * series
}

/// Lower incomplete gamma γ(α, 1) = ∫₀¹ s^{α−1} e^{−s} ds for 0 < α ≤ 1.
///
/// Power series e^{−1} Σₙ 1/(α(α+1)⋯(α+n)), stopped once a term drops
/// below 1e−17.
pub fn lower_incomplete_gamma_at_one(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(FkError::domain(
            "lower_incomplete_gamma_at_one",
            format!("requires 0 < alpha <= 1, got {alpha}"),
        ));
    }
    let mut term = 1.0 / alpha;
    let mut sum = term;
    let mut n = 1.0;
    while term >= 1e-17 {
        term /= alpha + n;
        sum += term;
        n += 1.0;
    }
    Ok(sum * (-1.0f64).exp())
}

/// Inverse hyperbolic cosine for x ≥ 1.
///
/// x < 1 is reported as a domain error; the contour optimiser turns it into
/// an infeasible-geometry error.
pub fn arccosh(x: f64) -> Result<f64> {
    if !(x >= 1.0) {
        return Err(FkError::domain("arccosh", format!("requires x >= 1, got {x}")));
    }
    if x > 1e8 {
        return Ok(x.ln() + std::f64::consts::LN_2);
    }
    let xm1 = x - 1.0;
    Ok((xm1 + (xm1 * (x + 1.0)).sqrt()).ln_1p())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn pow_identity_and_principal_branch() {
        let one = complex_pow(c(1.0, 0.0), 0.5).unwrap();
        assert!((one - c(1.0, 0.0)).norm() < 1e-16);

        let r = complex_pow(c(0.0, 1.0), 0.5).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((r - c(s, s)).norm() < 1e-15);

        // arg = π convention, including the −0.0 imaginary part
        for im in [0.0, -0.0] {
            let r = complex_pow(c(-1.0, im), 0.5).unwrap();
            assert!((r - c(0.0, 1.0)).norm() < 1e-15, "{r}");
        }
    }

    #[test]
    fn pow_at_zero() {
        assert_eq!(complex_pow(c(0.0, 0.0), 0.3).unwrap(), c(0.0, 0.0));
        assert!(matches!(complex_pow(c(0.0, 0.0), 0.0), Err(FkError::Domain { .. })));
        assert!(matches!(complex_pow(c(0.0, 0.0), -0.5), Err(FkError::Domain { .. })));
        assert!(complex_pow(c(f64::NAN, 0.0), 0.5).is_err());
    }

    #[test]
    fn gamma_known_values() {
        assert!((gamma_fn(1.0).unwrap() - 1.0).abs() < 1e-15);
        let sqrt_pi = PI.sqrt();
        assert!((gamma_fn(0.5).unwrap() - sqrt_pi).abs() / sqrt_pi < 1e-14);
        // mpmath, 40 digits
        let g059 = 1.512_590_193_452_317_5;
        assert!((gamma_fn(0.59).unwrap() - g059).abs() / g059 < 1e-14);
        assert!((gamma_fn(5.0).unwrap() - 24.0).abs() / 24.0 < 1e-14);
        assert!(gamma_fn(0.0).is_err());
        assert!(gamma_fn(-1.0).is_err());
    }

    #[test]
    fn incomplete_gamma_known_values() {
        let g1 = lower_incomplete_gamma_at_one(1.0).unwrap();
        assert!((g1 - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
        // sqrt(pi) erf(1)
        let g05 = 1.493_648_265_624_854;
        assert!((lower_incomplete_gamma_at_one(0.5).unwrap() - g05).abs() / g05 < 1e-14);
        // mpmath gammainc(0.82, 0, 1)
        let g082 = 0.811_130_116_973_532_8;
        assert!((lower_incomplete_gamma_at_one(0.82).unwrap() - g082).abs() / g082 < 1e-14);
        assert!(lower_incomplete_gamma_at_one(0.0).is_err());
        assert!(lower_incomplete_gamma_at_one(1.5).is_err());
    }

    #[test]
    fn arccosh_values() {
        assert_eq!(arccosh(1.0).unwrap(), 0.0);
        assert!((arccosh(2.0f64.cosh()).unwrap() - 2.0).abs() < 1e-14);
        assert!((arccosh(2.0).unwrap() - 1.316_957_896_924_816_7).abs() < 1e-15);
        assert!(arccosh(0.999).is_err());
        assert!(arccosh(f64::NAN).is_err());
    }
}
