//! Legendre polynomials, integrated-Legendre bubbles and reference shape tables.
//!
//! The reference element is (0, 1) with local coordinate `ŝ`; Legendre
//! polynomials live on (-1, 1) with `t = 2ŝ - 1`. The local shape functions are
//! ordered `[1 - ŝ, ŝ, φ̂_2, …, φ̂_p]` where the bubble
//! `φ̂_i(ŝ) = ∫_{-1}^{t} P_{i-1} = (P_i(t) - P_{i-2}(t)) / (2i - 1)`.

use crate::error::{Error, Result};

/// Number of local shape functions for degree `p`.
#[inline]
pub fn local_dim(p: usize) -> usize {
    p + 1
}

/// `[P_0(t), …, P_{k_max}(t)]` by the three-term recurrence.
pub fn legendre_values(k_max: usize, t: f64) -> Vec<f64> {
    let mut out = vec![0.0; k_max + 1];
    legendre_into(t, &mut out);
    out
}

fn legendre_into(t: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = 1.0;
    if out.len() > 1 {
        out[1] = t;
    }
    for k in 1..out.len().saturating_sub(1) {
        let kf = k as f64;
        out[k + 1] = ((2.0 * kf + 1.0) * t * out[k] - kf * out[k - 1]) / (kf + 1.0);
    }
}

/// Legendre values at `tb` and divided differences `(P_k(ta) - P_k(tb)) / (ta - tb)`
/// (the derivative when `ta == tb`), without forming the quotient.
///
/// Differencing the recurrence gives
/// `(k+1) D_{k+1} = (2k+1)(ta D_k + P_k(tb)) - k D_{k-1}` with `D_0 = 0`, `D_1 = 1`.
fn legendre_divided_into(ta: f64, tb: f64, values_b: &mut [f64], dd: &mut [f64]) {
    let len = values_b.len();
    legendre_into(tb, values_b);
    dd[0] = 0.0;
    if len > 1 {
        dd[1] = 1.0;
    }
    for k in 1..len.saturating_sub(1) {
        let kf = k as f64;
        dd[k + 1] = ((2.0 * kf + 1.0) * (ta * dd[k] + values_b[k]) - kf * dd[k - 1]) / (kf + 1.0);
    }
}

/// Integrated Legendre bubble `φ̂_i(ŝ)` for `i >= 2`.
pub fn integrated_legendre(i: usize, s_hat: f64) -> Result<f64> {
    if i < 2 {
        return Err(Error::InvalidArgument(format!("bubble index must be >= 2, got {i}")));
    }
    let p = legendre_values(i, 2.0 * s_hat - 1.0);
    Ok((p[i] - p[i - 2]) / (2 * i - 1) as f64)
}

/// Evaluates all `p + 1` local shape functions at `ŝ` into `out`.
pub fn shape_values_into(p: usize, s_hat: f64, out: &mut [f64]) {
    debug_assert_eq!(out.len(), local_dim(p));
    let t = 2.0 * s_hat - 1.0;
    // Legendre values are written into `out` and then combined in place from
    // the top down so that P_{i-2} is still available.
    legendre_into(t, out);
    for i in (2..=p).rev() {
        out[i] = (out[i] - out[i - 2]) / (2 * i - 1) as f64;
    }
    out[0] = 1.0 - s_hat;
    if p >= 1 {
        out[1] = s_hat;
    }
}

/// Scratch space for divided differences of the local shapes.
#[derive(Debug, Clone)]
pub struct DividedDifferences {
    values_b: Vec<f64>,
    dd: Vec<f64>,
}

impl DividedDifferences {
    pub fn new(p: usize) -> Self {
        Self { values_b: vec![0.0; p + 1], dd: vec![0.0; p + 1] }
    }

    /// Writes `(ψ_k(a) - ψ_k(b)) / (a - b)` for every local shape `ψ_k` into
    /// `out` (the derivative at `a` when `a == b`). Exact polynomial identity;
    /// no division by `a - b` takes place.
    pub fn shapes_into(&mut self, a: f64, b: f64, out: &mut [f64]) {
        let p = self.dd.len() - 1;
        debug_assert_eq!(out.len(), p + 1);
        legendre_divided_into(2.0 * a - 1.0, 2.0 * b - 1.0, &mut self.values_b, &mut self.dd);
        out[0] = -1.0;
        if p >= 1 {
            out[1] = 1.0;
        }
        for i in 2..=p {
            // d t / d ŝ = 2.
            out[i] = 2.0 * (self.dd[i] - self.dd[i - 2]) / (2 * i - 1) as f64;
        }
    }
}

/// Value of the local polynomial `Σ c_k ψ_k(ŝ)`.
pub fn evaluate_local(coeffs: &[f64], s_hat: f64) -> f64 {
    if coeffs.is_empty() {
        return 0.0;
    }
    let mut vals = vec![0.0; coeffs.len()];
    shape_values_into(coeffs.len() - 1, s_hat, &mut vals);
    dot(coeffs, &vals)
}

/// Divided difference `(v(a) - v(b)) / (a - b)` of the local polynomial
/// `v = Σ c_k ψ_k`.
pub fn divided_difference_local(coeffs: &[f64], a: f64, b: f64) -> f64 {
    if coeffs.is_empty() {
        return 0.0;
    }
    let p = coeffs.len() - 1;
    let mut scratch = DividedDifferences::new(p);
    let mut out = vec![0.0; p + 1];
    scratch.shapes_into(a, b, &mut out);
    dot(coeffs, &out)
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Values of the `p + 1` reference shape functions at a fixed set of points.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeTable {
    p: usize,
    points: Vec<f64>,
    /// Row-major, `(p + 1) × points.len()`.
    values: Vec<f64>,
}

impl ShapeTable {
    pub fn p(&self) -> usize {
        self.p
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Values of shape `k` at all points.
    pub fn row(&self, k: usize) -> &[f64] {
        let m = self.points.len();
        &self.values[k * m..(k + 1) * m]
    }

    pub fn value(&self, k: usize, point: usize) -> f64 {
        self.values[k * self.points.len() + point]
    }
}

/// Tabulates the reference shapes at `points` in `O(p · #points)`.
pub fn shape_table(p: usize, points: &[f64]) -> ShapeTable {
    let m = points.len();
    let mut values = vec![0.0; (p + 1) * m];
    let mut col = vec![0.0; p + 1];
    for (j, &x) in points.iter().enumerate() {
        shape_values_into(p, x, &mut col);
        for (k, v) in col.iter().enumerate() {
            values[k * m + j] = *v;
        }
    }
    ShapeTable { p, points: points.to_vec(), values }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::gauss_legendre;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Explicit Legendre polynomials P_0..P_5.
    fn legendre_explicit(k: usize, t: f64) -> f64 {
        match k {
            0 => 1.0,
            1 => t,
            2 => (3.0 * t * t - 1.0) / 2.0,
            3 => (5.0 * t.powi(3) - 3.0 * t) / 2.0,
            4 => (35.0 * t.powi(4) - 30.0 * t * t + 3.0) / 8.0,
            5 => (63.0 * t.powi(5) - 70.0 * t.powi(3) + 15.0 * t) / 8.0,
            _ => unreachable!(),
        }
    }

    #[test]
    fn legendre_examples() {
        assert_eq!(legendre_values(2, 1.0), vec![1.0, 1.0, 1.0]);
        assert_eq!(legendre_values(2, 0.0), vec![1.0, 0.0, -0.5]);
        let v = legendre_values(5, 0.3);
        for (k, vk) in v.iter().enumerate() {
            assert!((vk - legendre_explicit(k, 0.3)).abs() < 1e-15);
        }
    }

    #[test]
    fn bubble_examples() {
        assert_eq!(integrated_legendre(2, 0.0).unwrap(), 0.0);
        assert!(integrated_legendre(2, 1.0).unwrap().abs() < 1e-15);
        assert!((integrated_legendre(2, 0.5).unwrap() + 0.5).abs() < 1e-15);
        // ∫_{-1}^{0} (3t^2 - 1)/2 dt = [t^3/2 - t/2]_{-1}^{0} = 0.
        assert!(integrated_legendre(3, 0.5).unwrap().abs() < 1e-15);
        // ∫_{-1}^{-0.5} P_2 = [t^3/2 - t/2] = (-1/16 + 1/4) - 0 = 3/16.
        assert!((integrated_legendre(3, 0.25).unwrap() - 3.0 / 16.0).abs() < 1e-15);
        assert!(integrated_legendre(1, 0.5).is_err());
    }

    #[test]
    fn bubbles_vanish_at_endpoints() {
        for i in 2..=20 {
            assert!(integrated_legendre(i, 0.0).unwrap().abs() < 1e-14);
            assert!(integrated_legendre(i, 1.0).unwrap().abs() < 1e-14);
        }
    }

    #[test]
    fn antiderivative_identity_by_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let step = 1e-6;
        for i in 2..=10 {
            for _ in 0..20 {
                let s: f64 = rng.gen_range(0.01..0.99);
                let fd = (integrated_legendre(i, s + step).unwrap()
                    - integrated_legendre(i, s - step).unwrap())
                    / (2.0 * step);
                let exact = 2.0 * legendre_values(i - 1, 2.0 * s - 1.0)[i - 1];
                assert!((fd - exact).abs() <= 1e-6 * exact.abs().max(1.0), "i={i} s={s}");
            }
        }
    }

    #[test]
    fn shape_table_examples() {
        let t = shape_table(1, &[0.5]);
        assert_eq!(t.row(0), &[0.5]);
        assert_eq!(t.row(1), &[0.5]);
        let t = shape_table(2, &[0.0, 1.0]);
        assert!(t.row(2).iter().all(|v| v.abs() < 1e-14));
        assert_eq!(t.row(0), &[1.0, 0.0]);
        assert_eq!(t.row(1), &[0.0, 1.0]);
    }

    #[test]
    fn shape_table_matches_scalar_evaluators() {
        let rule = gauss_legendre(5).unwrap();
        let t = shape_table(4, rule.nodes());
        for (j, &x) in rule.nodes().iter().enumerate() {
            assert!((t.value(0, j) - (1.0 - x)).abs() < 1e-14);
            assert!((t.value(1, j) - x).abs() < 1e-14);
            for i in 2..=4 {
                assert!((t.value(i, j) - integrated_legendre(i, x).unwrap()).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn derivative_orthogonality() {
        let rule = gauss_legendre(12).unwrap();
        let p = 10;
        let mut dd = DividedDifferences::new(p);
        let derivs: Vec<Vec<f64>> = rule
            .nodes()
            .iter()
            .map(|&x| {
                let mut out = vec![0.0; p + 1];
                dd.shapes_into(x, x, &mut out);
                out
            })
            .collect();
        for i in 2..=p {
            for j in 2..=p {
                let g: f64 = rule.weights().iter().zip(&derivs).map(|(w, d)| w * d[i] * d[j]).sum();
                if i != j {
                    assert!(g.abs() < 1e-12, "({i},{j}) = {g}");
                } else {
                    // ∫_0^1 (2 P_{i-1}(2ŝ-1))^2 dŝ = 4 / (2i - 1).
                    assert!((g - 4.0 / (2 * i - 1) as f64).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn divided_differences_match_quotient_away_from_diagonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for p in 1..=9 {
            let coeffs: Vec<f64> = (0..=p).map(|_| rng.gen_range(-1.0..1.0)).collect();
            for _ in 0..20 {
                let a: f64 = rng.gen_range(0.0..1.0);
                let b: f64 = rng.gen_range(0.0..1.0);
                if (a - b).abs() < 0.05 {
                    continue;
                }
                let q = (evaluate_local(&coeffs, a) - evaluate_local(&coeffs, b)) / (a - b);
                let d = divided_difference_local(&coeffs, a, b);
                assert!((q - d).abs() < 1e-11 * (1.0 + q.abs()), "p={p}: {q} vs {d}");
            }
        }
    }

    #[test]
    fn divided_difference_is_symmetric_and_smooth_at_diagonal() {
        let coeffs = [0.3, -0.2, 0.7, 0.1, -0.4, 0.25];
        for &(a, b) in &[(0.2, 0.7), (0.0, 1.0), (0.33, 0.33)] {
            let d1 = divided_difference_local(&coeffs, a, b);
            let d2 = divided_difference_local(&coeffs, b, a);
            assert!((d1 - d2).abs() < 1e-13);
        }
        let x = 0.41;
        let at = divided_difference_local(&coeffs, x, x);
        let near = divided_difference_local(&coeffs, x, x + 1e-9);
        assert!((at - near).abs() < 1e-7);
    }
}
