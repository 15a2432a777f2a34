//! Double-exponential (tanh-sinh) evaluation of the pair integrals.
//!
//! This path shares no quadrature rule with assembly: singular weights are
//! left inside the integrand and resolved by the endpoint clustering of the
//! tanh-sinh nodes. Every node carries both `u` and `1 - u`, so distances to
//! either endpoint are available without cancellation.
//!
//! For the identical case with `s` close to 1 the weight `(x - y)^{1-2s}` is
//! strong enough that the finest level may not reach a tight tolerance; the
//! caller then gets `OracleFailure`.

use std::f64::consts::FRAC_PI_2;

use crate::assembly::PairLocal;
use crate::error::{Error, Result};
use crate::mesh::{distance, pair_class, Element, PairClass, Partner};
use crate::polynomials::{divided_difference_local, evaluate_local};
use crate::special::FracParams;

const FIRST_LEVEL: u32 = 3;
const LAST_LEVEL: u32 = 8;
const T_MAX: f64 = 4.5;

/// Nodes of the tanh-sinh rule on (0, 1) with step `2^-level`, as
/// `(u, 1 - u, weight)`.
fn rule(level: u32) -> Vec<(f64, f64, f64)> {
    let step = (0.5f64).powi(level as i32);
    let half = (T_MAX / step).ceil() as i64;
    (-half..=half)
        .map(|j| {
            let t = j as f64 * step;
            let z = FRAC_PI_2 * t.sinh();
            let u = 1.0 / (1.0 + (-2.0 * z).exp());
            let c = 1.0 / (1.0 + (2.0 * z).exp());
            let w = step * std::f64::consts::PI * t.cosh() * u * c;
            (u, c, w)
        })
        .filter(|&(u, c, w)| u > 0.0 && c > 0.0 && w > 0.0)
        .collect()
}

fn integrate_2d<F: Fn(f64, f64, f64, f64) -> f64>(level: u32, f: &F) -> f64 {
    let r = rule(level);
    let mut total = 0.0;
    for &(x, cx, wx) in &r {
        let mut inner = 0.0;
        for &(y, cy, wy) in &r {
            inner += wy * f(x, cx, y, cy);
        }
        total += wx * inner;
    }
    total
}

fn integrate_1d<F: Fn(f64, f64) -> f64>(level: u32, f: &F) -> f64 {
    rule(level).iter().map(|&(x, cx, w)| w * f(x, cx)).sum()
}

fn converge<F: Fn(u32) -> f64>(tol: f64, f: F) -> Result<f64> {
    let mut previous = f(FIRST_LEVEL);
    for level in FIRST_LEVEL + 1..=LAST_LEVEL {
        let current = f(level);
        if (current - previous).abs() <= tol * current.abs() {
            return Ok(current);
        }
        previous = current;
    }
    Err(Error::OracleFailure(format!("tanh-sinh did not reach relative tolerance {tol}")))
}

/// `I_{T,T'}(v, w)` or `I_{T,Ω^c}(v, w)` by nested tanh-sinh quadrature, to
/// relative tolerance `tol`.
pub fn direct_pair_integral(
    t: &Element,
    partner: &Partner,
    v: PairLocal<'_>,
    w: PairLocal<'_>,
    params: FracParams,
    tol: f64,
) -> Result<f64> {
    let s = params.s();
    let expo = -params.kernel_exponent();
    match (pair_class(t, partner), partner) {
        (PairClass::Identical, _) => {
            // 2 h^{1-2s} ∫_0^1 ∫_0^x D_v D_w (x - y)^{1-2s} dy dx with y = x u.
            let h = t.h();
            let f = |x: f64, _: f64, u: f64, cu: f64| {
                let y = x * u;
                let dv = divided_difference_local(v.first, x, y);
                let dw = divided_difference_local(w.first, x, y);
                x * dv * dw * (x * cu).powf(1.0 - 2.0 * s)
            };
            converge(tol, |level| 2.0 * h.powf(1.0 - 2.0 * s) * integrate_2d(level, &f))
        }
        (PairClass::Complement, _) => {
            let h = t.h();
            let (dl, dr) = (t.left + 1.0, 1.0 - t.right);
            let f = |x: f64, cx: f64| {
                let vw = evaluate_local(v.first, x) * evaluate_local(w.first, x);
                vw * ((dl + x * h).powf(-2.0 * s) + (dr + cx * h).powf(-2.0 * s))
            };
            converge(tol, |level| h / (2.0 * s) * integrate_1d(level, &f))
        }
        (PairClass::Separated, Partner::Element(t2)) => {
            let (a, b, v, w) = if t.index < t2.index { (t, t2, v, w) } else { (t2, t, swap(v), swap(w)) };
            let (h, h2, dist) = (a.h(), b.h(), distance(a, b));
            let f = |x: f64, cx: f64, y: f64, _: f64| {
                let dv = evaluate_local(v.first, x) - evaluate_local(v.second, y);
                let dw = evaluate_local(w.first, x) - evaluate_local(w.second, y);
                dv * dw * (cx * h + dist + y * h2).powf(expo)
            };
            converge(tol, |level| h * h2 * integrate_2d(level, &f))
        }
        (_, Partner::Element(t2)) => {
            let (a, b, v, w) = if t.index < t2.index { (t, t2, v, w) } else { (t2, t, swap(v), swap(w)) };
            let (h, h2) = (a.h(), b.h());
            let jump = |f: &PairLocal<'_>| evaluate_local(f.first, 1.0) - evaluate_local(f.second, 0.0);
            let (jv, jw) = (jump(&v), jump(&w));
            // Distance u from the shared node inside `a`, t inside `b`.
            let diff = |f: &PairLocal<'_>, j: f64, u: f64, t: f64| {
                -u * divided_difference_local(f.first, 1.0 - u, 1.0)
                    - t * divided_difference_local(f.second, t, 0.0)
                    + j
            };
            // Split along t = u q and u = t q so the corner singularity sits on
            // an edge of each triangle.
            let lower = |u: f64, _: f64, q: f64, _: f64| {
                let t = u * q;
                u * diff(&v, jv, u, t) * diff(&w, jw, u, t) * (u * (h + q * h2)).powf(expo)
            };
            let upper = |t: f64, _: f64, q: f64, _: f64| {
                let u = t * q;
                t * diff(&v, jv, u, t) * diff(&w, jw, u, t) * (t * (q * h + h2)).powf(expo)
            };
            converge(tol, |level| h * h2 * (integrate_2d(level, &lower) + integrate_2d(level, &upper)))
        }
        (_, Partner::Complement) => unreachable!("complement partner is classified as such"),
    }
}

fn swap(f: PairLocal<'_>) -> PairLocal<'_> {
    PairLocal::new(f.second, f.first)
}
