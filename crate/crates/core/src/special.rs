//! Gamma function, the kernel constant of the integral fractional Laplacian and
//! closed forms for the model problem with right-hand side `f = 1`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Fractional order `s` of the operator, restricted to the open interval (0, 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FracParams {
    s: f64,
}

impl FracParams {
    pub fn new(s: f64) -> Result<Self> {
        if s > 0.0 && s < 1.0 {
            Ok(Self { s })
        } else {
            Err(Error::InvalidArgument(format!(
                "fractional order must lie in (0,1), got {s}"
            )))
        }
    }

    #[inline]
    pub fn s(&self) -> f64 {
        self.s
    }

    /// Exponent `1 + 2s` of the interaction kernel `|x - y|^{-(1+2s)}`.
    #[inline]
    pub fn kernel_exponent(&self) -> f64 {
        1.0 + 2.0 * self.s
    }
}

/// Gamma function via the Lanczos approximation (g = 7, 9 terms), with the
/// reflection formula for arguments below 1/2.
pub fn gamma(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("gamma of non-finite value {x}")));
    }
    if x <= 0.0 && x == x.floor() {
        return Err(Error::Domain(format!("gamma has a pole at {x}")));
    }
    Ok(gamma_unchecked(x))
}

fn gamma_unchecked(x: f64) -> f64 {
    if x < 0.5 {
        PI / ((PI * x).sin() * gamma_unchecked(1.0 - x))
    } else {
        let x = x - 1.0;
        let mut acc = LANCZOS_COEFFS[0];
        for (i, &c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
            acc += c / (x + i as f64);
        }
        let t = x + LANCZOS_G + 0.5;
        (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * acc
    }
}

/// `C(s) = -2^{2s} Γ(s + 1/2) / (√π Γ(-s))`, strictly positive on (0, 1).
pub fn kernel_constant(params: FracParams) -> f64 {
    let s = params.s();
    -(4f64).powf(s) * gamma_unchecked(s + 0.5) / (PI.sqrt() * gamma_unchecked(-s))
}

/// Solution of `(-Δ)^s u = 1` on (-1, 1) with `u = 0` outside.
pub fn exact_solution(params: FracParams, x: f64) -> Result<f64> {
    if !(x.abs() <= 1.0) {
        return Err(Error::Domain(format!("exact solution needs |x| <= 1, got {x}")));
    }
    let s = params.s();
    let prefactor = PI.sqrt() / ((4f64).powf(s) * gamma_unchecked(s + 0.5) * gamma_unchecked(1.0 + s));
    // (1 - x)(1 + x) keeps u(x) == u(-x) bit for bit.
    Ok(prefactor * ((1.0 - x.abs()) * (1.0 + x.abs())).powf(s))
}

/// Energy `a(u, u) = ∫ u dx = 2^{-2s} π / (Γ(s + 1/2) Γ(s + 3/2))` of the exact solution.
pub fn exact_energy(params: FracParams) -> f64 {
    let s = params.s();
    PI / ((4f64).powf(s) * gamma_unchecked(s + 0.5) * gamma_unchecked(s + 1.5))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn gamma_known_values() {
        assert!(rel(gamma(1.0).unwrap(), 1.0) < 1e-14);
        assert!(rel(gamma(0.5).unwrap(), 1.772_453_850_905_516) < 1e-14);
        assert!(rel(gamma(-0.5).unwrap(), -3.544_907_701_811_032) < 1e-14);
        assert!(rel(gamma(5.0).unwrap(), 24.0) < 1e-14);
        assert!(rel(gamma(10.0).unwrap(), 362_880.0) < 1e-13);
    }

    #[test]
    fn gamma_recurrence_on_range() {
        // Γ(x + 1) = x Γ(x) across [-2, 10], away from the poles.
        let mut x: f64 = -1.95;
        while x < 9.0 {
            if (x - x.round()).abs() > 1e-3 {
                let lhs = gamma(x + 1.0).unwrap();
                let rhs = x * gamma(x).unwrap();
                assert!(rel(lhs, rhs) < 1e-13, "x = {x}: {lhs} vs {rhs}");
            }
            x += 0.0371;
        }
    }

    #[test]
    fn gamma_poles_are_errors() {
        for x in [0.0, -1.0, -2.0] {
            assert!(matches!(gamma(x), Err(Error::Domain(_))));
        }
    }

    #[test]
    fn fractional_order_bounds() {
        assert!(FracParams::new(0.0).is_err());
        assert!(FracParams::new(1.0).is_err());
        assert!(FracParams::new(f64::NAN).is_err());
        assert!(FracParams::new(0.3).is_ok());
    }

    #[test]
    fn kernel_constant_half_is_inverse_pi() {
        let c = kernel_constant(FracParams::new(0.5).unwrap());
        assert!((c - 1.0 / PI).abs() < 1e-15);
    }

    #[test]
    fn kernel_constant_quarter() {
        // Reference values from mpmath at 30 digits.
        let c = kernel_constant(FracParams::new(0.25).unwrap());
        assert!(rel(c, 0.199_471_140_200_716_34) < 1e-12, "{c}");
        let c = kernel_constant(FracParams::new(0.75).unwrap());
        assert!(rel(c, 0.299_206_710_301_074_5) < 1e-12, "{c}");
    }

    #[test]
    fn kernel_constant_positive_on_grid() {
        for k in 1..=19 {
            let s = k as f64 / 20.0;
            assert!(kernel_constant(FracParams::new(s).unwrap()) > 0.0);
        }
    }

    #[test]
    fn exact_solution_values() {
        let p = FracParams::new(0.5).unwrap();
        assert!((exact_solution(p, 0.0).unwrap() - 1.0).abs() < 1e-14);
        assert!((exact_solution(p, 0.6).unwrap() - 0.8).abs() < 1e-14);
        for s in [0.1, 0.5, 0.9] {
            let p = FracParams::new(s).unwrap();
            assert_eq!(exact_solution(p, 1.0).unwrap(), 0.0);
            assert_eq!(exact_solution(p, -1.0).unwrap(), 0.0);
        }
        assert!(exact_solution(p, 1.5).is_err());
    }

    #[test]
    fn exact_solution_is_even() {
        let p = FracParams::new(0.37).unwrap();
        for k in 0..50 {
            let x = k as f64 / 50.0;
            assert_eq!(exact_solution(p, x).unwrap(), exact_solution(p, -x).unwrap());
        }
    }

    #[test]
    fn exact_energy_reference_values() {
        // Closed form checked against mpmath quadrature of ∫ u dx.
        let e = exact_energy(FracParams::new(0.25).unwrap());
        assert!(rel(e, 1.972_450_079_459_092_6) < 1e-13);
        let e = exact_energy(FracParams::new(0.75).unwrap());
        assert!(rel(e, 1.081_565_184_107_655_6) < 1e-13);
    }

    #[test]
    fn exact_energy_half() {
        let e = exact_energy(FracParams::new(0.5).unwrap());
        assert!((e - PI / 2.0).abs() < 1e-14);
    }
}
