//! Element-pair blockwise assembly.
//!
//! Every pair `(T, T')` with `T <= T'` produces one dense block coupling the
//! local shapes of both elements. Values of the shapes and of their divided
//! differences at the composite Duffy points do not depend on the element, so
//! they are tabulated once per assembly. For separated pairs the kernel matrix
//! `k(ξ_i, η_j)` is evaluated once and contracted with the weighted shape
//! vectors in two stages, which keeps the total cost at O(L^5) for
//! `p = n = L` on a geometric mesh.

use rayon::prelude::*;

use super::pair::LocalEval;
use super::OpCounter;
use crate::error::Result;
use crate::mesh::{distance, pair_class, Element, PairClass, Partner, Space};
use crate::quadrature::{cached_jacobi, cached_legendre, QuadratureRule};
use crate::special::{kernel_constant, FracParams};
use std::sync::Arc;

/// A symmetric local block and the global indices of its rows.
struct Block {
    dofs: Vec<Option<usize>>,
    values: Vec<f64>,
    factor: f64,
}

enum Task {
    Identical(usize),
    Pair(usize, usize),
    Complement(usize),
}

/// Element-independent tables on the reference square.
struct Tables {
    n: usize,
    p: usize,
    gl: Arc<QuadratureRule>,
    gj: Arc<QuadratureRule>,
    /// `GJ^{0,2-2s} ∘ GJ^{1-2s,0}` Gram matrix of the divided differences
    /// `D_a(x, xy)`, `(p+1) × (p+1)`.
    identical: Vec<f64>,
    /// Regularized adjacent integrands of the pair-local functions:
    /// first term (x from GJ, y from GL) and second term (x from GL, y from GJ).
    adjacent_first: Vec<f64>,
    adjacent_second: Vec<f64>,
    /// Shape values at the GL nodes, `(p+1) × n`.
    values: Vec<f64>,
    /// `v̂(x)/x` at the GJ^{0,2-2s} nodes and `v̂(x)/(1-x)` at the GJ^{2-2s,0}
    /// nodes, `(p+1) × n` each.
    left_quotient: Vec<f64>,
    right_quotient: Vec<f64>,
    gj_right: Arc<QuadratureRule>,
}

/// Number of pair-local functions on two adjacent elements: three hats and
/// the bubbles of both elements.
fn adjacent_count(p: usize) -> usize {
    2 * p + 1
}

/// Local shape indices `(on T, on T')` of pair-local function `f` for an
/// adjacent pair with `T` on the left.
fn adjacent_parts(p: usize, f: usize) -> (Option<usize>, Option<usize>) {
    match f {
        0 => (Some(0), None),
        1 => (Some(1), Some(0)),
        2 => (None, Some(1)),
        _ if f < p + 2 => (Some(f - 1), None),
        _ => (None, Some(f - p)),
    }
}

impl Tables {
    fn new(p: usize, n: usize, params: FracParams, counter: &mut OpCounter) -> Result<Self> {
        let s = params.s();
        let gl = cached_legendre(n)?;
        let gj = cached_jacobi(n, 0.0, 2.0 - 2.0 * s)?;
        let gjy = cached_jacobi(n, 1.0 - 2.0 * s, 0.0)?;
        let gj_right = cached_jacobi(n, 2.0 - 2.0 * s, 0.0)?;
        let np = p + 1;
        let mut ev = LocalEval::new(p);

        let mut identical = vec![0.0; np * np];
        for (x, wx) in gj.iter() {
            for (y, wy) in gjy.iter() {
                let d = ev.divided(x, x * y);
                let w = wx * wy;
                for a in 0..np {
                    let wa = w * d[a];
                    for b in a..np {
                        identical[a * np + b] += wa * d[b];
                    }
                }
            }
        }
        for a in 0..np {
            for b in 0..a {
                identical[a * np + b] = identical[b * np + a];
            }
        }
        counter.multiply_adds += (n * n * (np + np * (np + 1) / 2)) as u64;

        let nf = adjacent_count(p);
        let nn = n * n;
        let mut adjacent_first = vec![0.0; nf * nn];
        let mut adjacent_second = vec![0.0; nf * nn];
        let mut dt = vec![0.0; np];
        let mut dn = vec![0.0; np];
        for (i, &x) in gj.nodes().iter().enumerate() {
            for (j, &y) in gl.nodes().iter().enumerate() {
                dt.copy_from_slice(ev.divided(1.0 - x, 1.0));
                dn.copy_from_slice(ev.divided(x * y, 0.0));
                for f in 0..nf {
                    let (a, b) = adjacent_parts(p, f);
                    let u = a.map_or(0.0, |a| -dt[a]) + b.map_or(0.0, |b| -y * dn[b]);
                    adjacent_first[f * nn + i * n + j] = u;
                }
            }
        }
        for (i, &x) in gl.nodes().iter().enumerate() {
            for (j, &y) in gj.nodes().iter().enumerate() {
                dt.copy_from_slice(ev.divided(1.0 - x * y, 1.0));
                dn.copy_from_slice(ev.divided(y, 0.0));
                for f in 0..nf {
                    let (a, b) = adjacent_parts(p, f);
                    let u = a.map_or(0.0, |a| -x * dt[a]) + b.map_or(0.0, |b| -dn[b]);
                    adjacent_second[f * nn + i * n + j] = u;
                }
            }
        }
        counter.multiply_adds += (2 * nn * (nf + 2 * np)) as u64;

        let mut values = vec![0.0; np * n];
        let mut left_quotient = vec![0.0; np * n];
        let mut right_quotient = vec![0.0; np * n];
        let v0 = ev.values(0.0).to_vec();
        let v1 = ev.values(1.0).to_vec();
        for i in 0..n {
            let vals = ev.values(gl.nodes()[i]);
            for a in 0..np {
                values[a * n + i] = vals[a];
            }
            let x = gj.nodes()[i];
            let d = ev.divided(x, 0.0);
            for a in 0..np {
                left_quotient[a * n + i] = d[a] + v0[a] / x;
            }
            let x = gj_right.nodes()[i];
            let d = ev.divided(x, 1.0);
            for a in 0..np {
                right_quotient[a * n + i] = v1[a] / (1.0 - x) - d[a];
            }
        }
        counter.multiply_adds += (6 * n * np) as u64;

        Ok(Self { n, p, gl, gj, identical, adjacent_first, adjacent_second, values, left_quotient, right_quotient, gj_right })
    }

    fn value_row(&self, a: usize) -> &[f64] {
        &self.values[a * self.n..(a + 1) * self.n]
    }
}

fn identical_block(t: &Element, tab: &Tables, params: FracParams) -> Vec<f64> {
    let scale = 2.0 * t.h().powf(1.0 - 2.0 * params.s());
    tab.identical.iter().map(|r| scale * r).collect()
}

fn adjacent_block(t: &Element, t2: &Element, tab: &Tables, params: FracParams, counter: &mut OpCounter) -> Vec<f64> {
    let (n, nn) = (tab.n, tab.n * tab.n);
    let expo = -params.kernel_exponent();
    let (h, h2) = (t.h(), t2.h());
    let mut w1 = vec![0.0; nn];
    let mut w2 = vec![0.0; nn];
    let k1: Vec<f64> = tab.gl.nodes().iter().map(|&y| (h + y * h2).powf(expo)).collect();
    let k2: Vec<f64> = tab.gl.nodes().iter().map(|&x| (x * h + h2).powf(expo)).collect();
    for i in 0..n {
        for j in 0..n {
            w1[i * n + j] = tab.gj.weights()[i] * tab.gl.weights()[j] * k1[j];
            w2[i * n + j] = tab.gl.weights()[i] * tab.gj.weights()[j] * k2[i];
        }
    }
    counter.kernel_evals += (2 * n) as u64;
    counter.multiply_adds += (2 * nn) as u64;

    let nf = adjacent_count(tab.p);
    let mut block = vec![0.0; nf * nf];
    let mut weighted = vec![0.0; nn];
    let mut weighted2 = vec![0.0; nn];
    for f in 0..nf {
        let u1f = &tab.adjacent_first[f * nn..(f + 1) * nn];
        let u2f = &tab.adjacent_second[f * nn..(f + 1) * nn];
        for k in 0..nn {
            weighted[k] = w1[k] * u1f[k];
        }
        for k in 0..nn {
            weighted2[k] = w2[k] * u2f[k];
        }
        for g in f..nf {
            let u1g = &tab.adjacent_first[g * nn..(g + 1) * nn];
            let u2g = &tab.adjacent_second[g * nn..(g + 1) * nn];
            let mut first = 0.0;
            let mut second = 0.0;
            for k in 0..nn {
                first += weighted[k] * u1g[k];
                second += weighted2[k] * u2g[k];
            }
            let v = h * h2 * (first + second);
            block[f * nf + g] = v;
            block[g * nf + f] = v;
        }
    }
    counter.multiply_adds += (2 * nn * nf + nn * nf * (nf + 1)) as u64;
    block
}

fn adjacent_dofs(space: &Space, left: usize) -> Vec<Option<usize>> {
    let p = space.degree();
    let dl = space.element_dofs(left);
    let dr = space.element_dofs(left + 1);
    (0..adjacent_count(p))
        .map(|f| match adjacent_parts(p, f) {
            (Some(a), _) => dl[a],
            (None, Some(b)) => dr[b],
            (None, None) => unreachable!(),
        })
        .collect()
}

fn separated_block(t: &Element, t2: &Element, tab: &Tables, params: FracParams, counter: &mut OpCounter) -> Vec<f64> {
    let n = tab.n;
    let np = tab.p + 1;
    let expo = -params.kernel_exponent();
    let (h, h2) = (t.h(), t2.h());
    let dist = distance(t, t2);
    let (nodes, weights) = (tab.gl.nodes(), tab.gl.weights());

    // Kernel matrix, evaluated once per pair.
    let mut kernel = vec![0.0; n * n];
    for i in 0..n {
        let base = (1.0 - nodes[i]) * h + dist;
        for j in 0..n {
            kernel[i * n + j] = (base + nodes[j] * h2).powf(expo);
        }
    }
    counter.kernel_evals += (n * n) as u64;

    // Row and column sums for the diagonal blocks.
    let mut g = vec![0.0; n];
    let mut c = vec![0.0; n];
    for i in 0..n {
        for j in 0..n {
            let k = kernel[i * n + j];
            g[i] += weights[j] * k;
            c[j] += weights[i] * k;
        }
    }
    counter.multiply_adds += (2 * n * n) as u64;

    let weighted: Vec<f64> =
        (0..np).flat_map(|a| tab.value_row(a).iter().zip(weights).map(|(v, w)| v * w)).collect();
    counter.multiply_adds += (np * n) as u64;
    let size = 2 * np;
    let mut block = vec![0.0; size * size];
    let scale = h * h2;

    for a in 0..np {
        let wa = &weighted[a * n..(a + 1) * n];
        for b in a..np {
            let vb = tab.value_row(b);
            let tt: f64 = (0..n).map(|i| wa[i] * g[i] * vb[i]).sum();
            let t2t2: f64 = (0..n).map(|j| wa[j] * c[j] * vb[j]).sum();
            block[a * size + b] = scale * tt;
            block[b * size + a] = scale * tt;
            block[(np + a) * size + np + b] = scale * t2t2;
            block[(np + b) * size + np + a] = scale * t2t2;
        }
    }
    counter.multiply_adds += (np * (np + 1) * n) as u64;

    // Cross terms: first contract the kernel with the weighted shape of T,
    // then one dot product per shape of T'.
    let mut contracted = vec![0.0; n];
    for a in 0..np {
        let wa = &weighted[a * n..(a + 1) * n];
        contracted.iter_mut().for_each(|m| *m = 0.0);
        for i in 0..n {
            let row = &kernel[i * n..(i + 1) * n];
            for j in 0..n {
                contracted[j] += wa[i] * row[j];
            }
        }
        for b in 0..np {
            let wb = &weighted[b * n..(b + 1) * n];
            let cross: f64 = -contracted.iter().zip(wb).map(|(m, w)| m * w).sum::<f64>();
            block[a * size + np + b] = scale * cross;
            block[(np + b) * size + a] = scale * cross;
        }
    }
    counter.multiply_adds += (np * n * n + np * np * n) as u64;
    block
}

fn complement_block(t: &Element, tab: &Tables, params: FracParams, counter: &mut OpCounter) -> Vec<f64> {
    let n = tab.n;
    let np = tab.p + 1;
    let s = params.s();
    let h = t.h();
    let (d_left, d_right) = (t.left + 1.0, 1.0 - t.right);
    let mut block = vec![0.0; np * np];

    let mut gram = |rows: &[f64], weights: &[f64], scale: f64| {
        for a in 0..np {
            let ra = &rows[a * n..(a + 1) * n];
            for b in a..np {
                let rb = &rows[b * n..(b + 1) * n];
                let v: f64 = (0..n).map(|i| weights[i] * ra[i] * rb[i]).sum();
                block[a * np + b] += scale * v;
            }
        }
    };

    // Interior sides share the Gauss-Legendre nodes and are merged into one
    // weight vector.
    let mut merged = vec![0.0; n];
    let mut any_interior = false;
    if d_left == 0.0 {
        gram(&tab.left_quotient, tab.gj.weights(), h.powf(-2.0 * s));
    } else {
        any_interior = true;
        for (i, (x, _)) in tab.gl.iter().enumerate() {
            merged[i] += (d_left + x * h).powf(-2.0 * s);
        }
        counter.kernel_evals += n as u64;
    }
    if d_right == 0.0 {
        gram(&tab.right_quotient, tab.gj_right.weights(), h.powf(-2.0 * s));
    } else {
        any_interior = true;
        for (i, (x, _)) in tab.gl.iter().enumerate() {
            merged[i] += (d_right + (1.0 - x) * h).powf(-2.0 * s);
        }
        counter.kernel_evals += n as u64;
    }
    if any_interior {
        let w: Vec<f64> = tab.gl.weights().iter().zip(&merged).map(|(w, k)| w * k).collect();
        gram(&tab.values, &w, 1.0);
    }
    counter.multiply_adds += (np * (np + 1) * n) as u64;

    let scale = h / (2.0 * s);
    for a in 0..np {
        for b in a..np {
            let v = scale * block[a * np + b];
            block[a * np + b] = v;
            block[b * np + a] = v;
        }
    }
    block
}

fn run_task(space: &Space, tab: &Tables, params: FracParams, task: &Task) -> (Block, OpCounter) {
    let mesh = space.mesh();
    let mut counter = OpCounter::default();
    let block = match *task {
        Task::Identical(k) => {
            let t = mesh.element(k);
            Block { dofs: space.element_dofs(k), values: identical_block(&t, tab, params), factor: 1.0 }
        }
        Task::Pair(k, l) => {
            let (t, t2) = (mesh.element(k), mesh.element(l));
            match pair_class(&t, &Partner::Element(t2)) {
                PairClass::AdjacentLeftRight => Block {
                    dofs: adjacent_dofs(space, k),
                    values: adjacent_block(&t, &t2, tab, params, &mut counter),
                    factor: 2.0,
                },
                PairClass::Separated => {
                    let mut dofs = space.element_dofs(k);
                    dofs.extend(space.element_dofs(l));
                    Block { dofs, values: separated_block(&t, &t2, tab, params, &mut counter), factor: 2.0 }
                }
                _ => unreachable!("pairs are listed with the left element first"),
            }
        }
        Task::Complement(k) => {
            let t = mesh.element(k);
            Block {
                dofs: space.element_dofs(k),
                values: complement_block(&t, tab, params, &mut counter),
                factor: 2.0,
            }
        }
    };
    (block, counter)
}

/// Returns the upper triangle (row-major, full storage) of the matrix.
pub(super) fn assemble(
    space: &Space,
    params: FracParams,
    n: usize,
    parallel: bool,
    counter: &mut OpCounter,
) -> Result<Vec<f64>> {
    let tab = Tables::new(space.degree(), n, params, counter)?;
    let m = space.mesh().num_elements();
    let mut tasks = Vec::with_capacity(m * (m + 3) / 2);
    for k in 0..m {
        tasks.push(Task::Identical(k));
        tasks.extend((k + 1..m).map(|l| Task::Pair(k, l)));
        tasks.push(Task::Complement(k));
    }

    let run = |task: &Task| run_task(space, &tab, params, task);
    let blocks: Vec<(Block, OpCounter)> =
        if parallel { tasks.par_iter().map(run).collect() } else { tasks.iter().map(run).collect() };

    let dim = space.dim();
    let scale = kernel_constant(params) / 2.0;
    let mut entries = vec![0.0; dim * dim];
    for (block, local) in blocks {
        *counter += local;
        let size = block.dofs.len();
        for (a, da) in block.dofs.iter().enumerate() {
            let Some(gi) = *da else { continue };
            for (b, db) in block.dofs.iter().enumerate() {
                match *db {
                    Some(gj) if gi <= gj => {
                        entries[gi * dim + gj] += scale * block.factor * block.values[a * size + b];
                    }
                    _ => {}
                }
            }
        }
        counter.multiply_adds += (size * size) as u64;
    }
    Ok(entries)
}
