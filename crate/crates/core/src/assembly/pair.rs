//! Quadrature approximations `Q^n_{T,T'}(v, w)` of the element-pair integrals
//! `I_{T,T'}(v, w) = ∫_T ∫_{T'} (v(x)-v(y))(w(x)-w(y)) |x-y|^{-(1+2s)} dy dx`
//! and of the exterior part `I_{T,Ω^c}(v, w)`.
//!
//! Local functions are coefficient vectors in the reference basis
//! `[1 - ŝ, ŝ, φ̂_2, …]`. Vectors of different lengths are zero-padded.
//! Removable singularities are cancelled with divided differences, so no
//! quotient of two small numbers is ever formed.

use super::OpCounter;
use crate::error::Result;
use crate::mesh::{distance, pair_class, Element, PairClass, Partner};
use crate::polynomials::{dot, shape_values_into, DividedDifferences};
use crate::quadrature::{cached_jacobi, cached_legendre};
use crate::special::FracParams;

/// Restriction of a function to the two elements of a pair.
#[derive(Debug, Clone, Copy)]
pub struct PairLocal<'a> {
    pub first: &'a [f64],
    pub second: &'a [f64],
}

impl<'a> PairLocal<'a> {
    pub fn new(first: &'a [f64], second: &'a [f64]) -> Self {
        Self { first, second }
    }

    fn swapped(self) -> Self {
        Self { first: self.second, second: self.first }
    }
}

/// Evaluation scratch for local functions of degree up to `p`.
pub(crate) struct LocalEval {
    dd: DividedDifferences,
    buf: Vec<f64>,
}

impl LocalEval {
    pub(crate) fn new(p: usize) -> Self {
        Self { dd: DividedDifferences::new(p), buf: vec![0.0; p + 1] }
    }

    pub(crate) fn for_locals(locals: &[&[f64]]) -> Self {
        let p = locals.iter().map(|c| c.len()).max().unwrap_or(1).max(2) - 1;
        Self::new(p)
    }

    /// Number of shapes produced per evaluation.
    pub(crate) fn width(&self) -> usize {
        self.buf.len()
    }

    pub(crate) fn values(&mut self, s_hat: f64) -> &[f64] {
        let p = self.buf.len() - 1;
        shape_values_into(p, s_hat, &mut self.buf);
        &self.buf
    }

    pub(crate) fn divided(&mut self, a: f64, b: f64) -> &[f64] {
        self.dd.shapes_into(a, b, &mut self.buf);
        &self.buf
    }
}

#[inline]
fn sdot(coeffs: &[f64], shapes: &[f64]) -> f64 {
    dot(coeffs, &shapes[..coeffs.len()])
}

/// Identical elements, Duffy transformed:
/// `2 h^{1-2s} GJ^{0,2-2s}_x ∘ GJ^{1-2s,0}_y ( D_v(x, xy) D_w(x, xy) )` with
/// `D_v(a, b) = (v̂(a) - v̂(b)) / (a - b)`.
pub fn q_identical(t: &Element, v: &[f64], w: &[f64], n: usize, params: FracParams) -> Result<f64> {
    q_identical_counted(t, v, w, n, params, &mut OpCounter::default())
}

pub(crate) fn q_identical_counted(
    t: &Element,
    v: &[f64],
    w: &[f64],
    n: usize,
    params: FracParams,
    counter: &mut OpCounter,
) -> Result<f64> {
    let s = params.s();
    let rx = cached_jacobi(n, 0.0, 2.0 - 2.0 * s)?;
    let ry = cached_jacobi(n, 1.0 - 2.0 * s, 0.0)?;
    let mut ev = LocalEval::for_locals(&[v, w]);
    let mut total = 0.0;
    for (x, wx) in rx.iter() {
        let mut inner = 0.0;
        for (y, wy) in ry.iter() {
            let d = ev.divided(x, x * y);
            inner += wy * sdot(v, d) * sdot(w, d);
        }
        total += wx * inner;
    }
    // One divided-difference table and two coefficient contractions per node.
    counter.multiply_adds += (n * n * (ev.width() + v.len() + w.len() + 1)) as u64;
    Ok(2.0 * t.h().powf(1.0 - 2.0 * s) * total)
}

/// Adjacent elements sharing one node. Either order is accepted; the pair is
/// reordered so that `t` is the left neighbour.
pub fn q_adjacent(
    t: &Element,
    t2: &Element,
    v: PairLocal<'_>,
    w: PairLocal<'_>,
    n: usize,
    params: FracParams,
) -> Result<f64> {
    q_adjacent_counted(t, t2, v, w, n, params, &mut OpCounter::default())
}

pub(crate) fn q_adjacent_counted(
    t: &Element,
    t2: &Element,
    v: PairLocal<'_>,
    w: PairLocal<'_>,
    n: usize,
    params: FracParams,
    counter: &mut OpCounter,
) -> Result<f64> {
    if t.index > t2.index {
        return q_adjacent_counted(t2, t, v.swapped(), w.swapped(), n, params, counter);
    }
    let s = params.s();
    let expo = -params.kernel_exponent();
    let (h, h2) = (t.h(), t2.h());
    let gj = cached_jacobi(n, 0.0, 2.0 - 2.0 * s)?;
    let gl = cached_legendre(n)?;
    let mut ev = LocalEval::for_locals(&[v.first, v.second, w.first, w.second]);

    // Jumps across the shared node; zero for continuous functions.
    let jump = |ev: &mut LocalEval, f: &PairLocal<'_>| {
        let a = sdot(f.first, ev.values(1.0));
        a - sdot(f.second, ev.values(0.0))
    };
    let (jv, jw) = (jump(&mut ev, &v), jump(&mut ev, &w));

    // (f_T(1-x) - f_T'(xy)) / x  = -D_T(1-x, 1) - y D_T'(xy, 0) + jump / x
    let mut first = 0.0;
    for (x, wx) in gj.iter() {
        let mut inner = 0.0;
        for (y, wy) in gl.iter() {
            let dt = ev.divided(1.0 - x, 1.0);
            let (vt, wt) = (sdot(v.first, dt), sdot(w.first, dt));
            let dn = ev.divided(x * y, 0.0);
            let (vn, wn) = (sdot(v.second, dn), sdot(w.second, dn));
            let uv = -vt - y * vn + jv / x;
            let uw = -wt - y * wn + jw / x;
            let k = (h + y * h2).powf(expo);
            inner += wy * uv * uw * k;
        }
        first += wx * inner;
    }

    // (f_T(1-xy) - f_T'(y)) / y  = -x D_T(1-xy, 1) - D_T'(y, 0) + jump / y
    let mut second = 0.0;
    for (x, wx) in gl.iter() {
        let mut inner = 0.0;
        for (y, wy) in gj.iter() {
            let dt = ev.divided(1.0 - x * y, 1.0);
            let (vt, wt) = (sdot(v.first, dt), sdot(w.first, dt));
            let dn = ev.divided(y, 0.0);
            let (vn, wn) = (sdot(v.second, dn), sdot(w.second, dn));
            let uv = -x * vt - vn + jv / y;
            let uw = -x * wt - wn + jw / y;
            let k = (x * h + h2).powf(expo);
            inner += wy * uv * uw * k;
        }
        second += wx * inner;
    }
    counter.kernel_evals += (2 * n * n) as u64;
    let per_node = 2 * ev.width() + v.first.len() + v.second.len() + w.first.len() + w.second.len() + 4;
    counter.multiply_adds += (2 * n * n * per_node) as u64;
    Ok(h * h2 * (first + second))
}

/// Separated elements: tensor Gauss-Legendre of the smooth integrand. Either
/// order is accepted.
pub fn q_separated(
    t: &Element,
    t2: &Element,
    v: PairLocal<'_>,
    w: PairLocal<'_>,
    n: usize,
    params: FracParams,
) -> Result<f64> {
    q_separated_counted(t, t2, v, w, n, params, &mut OpCounter::default())
}

pub(crate) fn q_separated_counted(
    t: &Element,
    t2: &Element,
    v: PairLocal<'_>,
    w: PairLocal<'_>,
    n: usize,
    params: FracParams,
    counter: &mut OpCounter,
) -> Result<f64> {
    if t.index > t2.index {
        return q_separated_counted(t2, t, v.swapped(), w.swapped(), n, params, counter);
    }
    let expo = -params.kernel_exponent();
    let (h, h2) = (t.h(), t2.h());
    let dist = distance(t, t2);
    let gl = cached_legendre(n)?;
    let mut ev = LocalEval::for_locals(&[v.first, v.second, w.first, w.second]);

    let mut at_first = Vec::with_capacity(n);
    let mut at_second = Vec::with_capacity(n);
    for &x in gl.nodes() {
        let vals = ev.values(x);
        at_first.push((sdot(v.first, vals), sdot(w.first, vals)));
        at_second.push((sdot(v.second, vals), sdot(w.second, vals)));
    }

    let mut total = 0.0;
    for (i, (x, wx)) in gl.iter().enumerate() {
        let (v1, w1) = at_first[i];
        let mut inner = 0.0;
        for (j, (y, wy)) in gl.iter().enumerate() {
            let (v2, w2) = at_second[j];
            let k = ((1.0 - x) * h + dist + y * h2).powf(expo);
            inner += wy * (v1 - v2) * (w1 - w2) * k;
        }
        total += wx * inner;
    }
    counter.kernel_evals += (n * n) as u64;
    let tabulate = n * (ev.width() + v.first.len() + v.second.len() + w.first.len() + w.second.len());
    counter.multiply_adds += (n * n + tabulate) as u64;
    Ok(h * h2 * total)
}

/// Exterior part `I_{T,Ω^c}`: the inner integral over Ω^c is done in closed
/// form, leaving `h/(2s) ∫ v̂ ŵ [(d_- + x h)^{-2s} + (d_+ + (1-x) h)^{-2s}] dx`
/// with `d_-` and `d_+` the distances to -1 and 1. A side touching the
/// boundary is integrated with Gauss-Jacobi after dividing `v̂ ŵ` by the
/// squared distance in reference coordinates.
pub fn q_complement(t: &Element, v: &[f64], w: &[f64], n: usize, params: FracParams) -> Result<f64> {
    q_complement_counted(t, v, w, n, params, &mut OpCounter::default())
}

pub(crate) fn q_complement_counted(
    t: &Element,
    v: &[f64],
    w: &[f64],
    n: usize,
    params: FracParams,
    counter: &mut OpCounter,
) -> Result<f64> {
    let s = params.s();
    let h = t.h();
    let (d_left, d_right) = (t.left + 1.0, 1.0 - t.right);
    let mut ev = LocalEval::for_locals(&[v, w]);
    let (v0, w0) = {
        let vals = ev.values(0.0);
        (sdot(v, vals), sdot(w, vals))
    };
    let (v1, w1) = {
        let vals = ev.values(1.0);
        (sdot(v, vals), sdot(w, vals))
    };

    let left = if d_left == 0.0 {
        // v̂(x) / x = D_v(x, 0) + v̂(0) / x
        let gj = cached_jacobi(n, 0.0, 2.0 - 2.0 * s)?;
        let mut acc = 0.0;
        for (x, wx) in gj.iter() {
            let d = ev.divided(x, 0.0);
            let qv = sdot(v, d) + v0 / x;
            let qw = sdot(w, d) + w0 / x;
            acc += wx * qv * qw;
        }
        acc * h.powf(-2.0 * s)
    } else {
        let gl = cached_legendre(n)?;
        let mut acc = 0.0;
        for (x, wx) in gl.iter() {
            let vals = ev.values(x);
            let k = (d_left + x * h).powf(-2.0 * s);
            counter.kernel_evals += 1;
            acc += wx * sdot(v, vals) * sdot(w, vals) * k;
        }
        acc
    };

    let right = if d_right == 0.0 {
        // v̂(x) / (1 - x) = v̂(1) / (1 - x) - D_v(x, 1)
        let gj = cached_jacobi(n, 2.0 - 2.0 * s, 0.0)?;
        let mut acc = 0.0;
        for (x, wx) in gj.iter() {
            let d = ev.divided(x, 1.0);
            let qv = v1 / (1.0 - x) - sdot(v, d);
            let qw = w1 / (1.0 - x) - sdot(w, d);
            acc += wx * qv * qw;
        }
        acc * h.powf(-2.0 * s)
    } else {
        let gl = cached_legendre(n)?;
        let mut acc = 0.0;
        for (x, wx) in gl.iter() {
            let vals = ev.values(x);
            let k = (d_right + (1.0 - x) * h).powf(-2.0 * s);
            counter.kernel_evals += 1;
            acc += wx * sdot(v, vals) * sdot(w, vals) * k;
        }
        acc
    };
    counter.multiply_adds += (2 * n * (ev.width() + v.len() + w.len() + 1)) as u64;
    Ok(h / (2.0 * s) * (left + right))
}

/// Dispatches on [`pair_class`]; `Identical` and `Complement` read only the
/// `first` parts of the locals.
pub fn q_pair(
    t: &Element,
    partner: &Partner,
    v: PairLocal<'_>,
    w: PairLocal<'_>,
    n: usize,
    params: FracParams,
) -> Result<f64> {
    let mut counter = OpCounter::default();
    match (pair_class(t, partner), partner) {
        (PairClass::Complement, _) => q_complement_counted(t, v.first, w.first, n, params, &mut counter),
        (PairClass::Identical, _) => q_identical_counted(t, v.first, w.first, n, params, &mut counter),
        (PairClass::Separated, Partner::Element(t2)) => q_separated_counted(t, t2, v, w, n, params, &mut counter),
        (_, Partner::Element(t2)) => q_adjacent_counted(t, t2, v, w, n, params, &mut counter),
        (_, Partner::Complement) => unreachable!("complement partner is classified as such"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::Element;

    fn el(index: usize, left: f64, right: f64) -> Element {
        Element { index, left, right }
    }

    fn params(s: f64) -> FracParams {
        FracParams::new(s).unwrap()
    }

    #[test]
    fn identical_linear_closed_form() {
        // Constant divided difference b: 2 b^2 h^{1-2s} / ((2-2s)(3-2s)).
        let t = el(0, 0.0, 1.0);
        let v = [0.0, 1.0];
        let q = q_identical(&t, &v, &v, 1, params(0.5)).unwrap();
        assert!((q - 1.0).abs() < 1e-14);

        let t = el(3, -0.3, 0.1);
        let v = [0.2, -0.5]; // slope -0.7
        for s in [0.2, 0.5, 0.8] {
            let q = q_identical(&t, &v, &v, 2, params(s)).unwrap();
            let expect = 2.0 * 0.49 * 0.4f64.powf(1.0 - 2.0 * s) / ((2.0 - 2.0 * s) * (3.0 - 2.0 * s));
            assert!((q - expect).abs() < 1e-14 * expect, "s={s}");
        }
    }

    #[test]
    fn identical_constant_is_zero() {
        let t = el(0, -1.0, 0.0);
        let v = [1.0, 1.0];
        let w = [0.3, -0.1, 0.5, 0.2];
        assert!(q_identical(&t, &v, &w, 4, params(0.3)).unwrap().abs() < 1e-15);
    }

    #[test]
    fn adjacent_zero_locals() {
        let t = el(0, -0.5, 0.0);
        let t2 = el(1, 0.0, 0.5);
        let z = [0.0; 3];
        let w = [0.0, 1.0, 0.4];
        let q = q_adjacent(&t, &t2, PairLocal::new(&z, &z), PairLocal::new(&w, &[1.0, 0.0, 0.0]), 4, params(0.5))
            .unwrap();
        assert_eq!(q, 0.0);
    }

    #[test]
    fn adjacent_order_is_irrelevant() {
        let t = el(1, -0.5, 0.0);
        let t2 = el(2, 0.0, 0.25);
        let v1 = [0.1, 0.7, 0.3];
        let v2 = [0.7, -0.2, 0.5, 0.1];
        let a = q_adjacent(&t, &t2, PairLocal::new(&v1, &v2), PairLocal::new(&v1, &v2), 6, params(0.4)).unwrap();
        let b = q_adjacent(&t2, &t, PairLocal::new(&v2, &v1), PairLocal::new(&v2, &v1), 6, params(0.4)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn separated_constants_log_form() {
        // ∫_{-1}^{-1/2} ∫_{1/2}^{1} (y - x)^{-2} dy dx = ln(9/8).
        let t = el(0, -1.0, -0.5);
        let t2 = el(3, 0.5, 1.0);
        let one = [1.0, 1.0];
        let zero = [0.0, 0.0];
        let f = PairLocal::new(&one, &zero);
        let q = q_separated(&t, &t2, f, f, 8, params(0.5)).unwrap();
        assert!((q - (9.0f64 / 8.0).ln()).abs() < 1e-12, "{q}");
        // Reversed order gives the same value.
        let g = PairLocal::new(&zero, &one);
        let q2 = q_separated(&t2, &t, g, g, 8, params(0.5)).unwrap();
        assert!((q - q2).abs() < 1e-15);
    }

    #[test]
    fn separated_high_order_stable() {
        let t = el(0, -1.0, -0.5);
        let t2 = el(3, 0.5, 1.0);
        let v1 = [0.0, 1.0, 0.4, -0.2];
        let v2 = [1.0, 0.0, 0.1, 0.3];
        let f = PairLocal::new(&v1, &v2);
        let a = q_separated(&t, &t2, f, f, 12, params(0.5)).unwrap();
        let b = q_separated(&t, &t2, f, f, 20, params(0.5)).unwrap();
        assert!((a - b).abs() <= 1e-12);
    }

    #[test]
    fn complement_left_boundary_closed_form() {
        // Left part: h^{1-2s} / (2s (3 - 2s)) = 0.5 for h = 1/4, s = 1/2.
        let t = el(0, -1.0, -0.75);
        let v = [0.0, 1.0];
        let s = params(0.5);
        let gl = cached_legendre(8).unwrap();
        let right: f64 = gl.iter().map(|(x, w)| w * x * x / (1.75 + (1.0 - x) * 0.25)).sum::<f64>() * 0.25;
        for n in [2, 4, 8] {
            let q = q_complement(&t, &v, &v, n, s).unwrap();
            let gl = cached_legendre(n).unwrap();
            let right_n: f64 =
                gl.iter().map(|(x, w)| w * x * x / (1.75 + (1.0 - x) * 0.25)).sum::<f64>() * 0.25;
            assert!((q - (0.5 + right_n)).abs() < 1e-14, "n={n}");
        }
        assert!(right > 0.0);
    }

    #[test]
    fn complement_zero_local() {
        let t = el(2, -0.2, 0.3);
        assert_eq!(q_complement(&t, &[0.0; 4], &[0.1, 0.2, 0.3, 0.4], 5, params(0.3)).unwrap(), 0.0);
    }
}
