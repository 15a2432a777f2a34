//! Gauss-Legendre and Gauss-Jacobi rules on the reference interval (0, 1).
//!
//! Jacobi rules integrate against the weight `(1 - x)^alpha * x^beta`. Both
//! families are built with the Golub-Welsch procedure: the nodes are the
//! eigenvalues of the symmetric tridiagonal matrix of the three-term recurrence
//! of the orthogonal polynomials, and the weights are the squared first
//! components of the normalized eigenvectors times the zeroth moment.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use crate::error::{Error, Result};
use crate::special::gamma;

/// Maximum number of implicit QL sweeps per eigenvalue.
const MAX_SWEEPS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RuleKind {
    Legendre,
    /// Weight `(1 - x)^alpha * x^beta` on (0, 1).
    Jacobi { alpha: f64, beta: f64 },
}

impl RuleKind {
    fn exponents(self) -> (f64, f64) {
        match self {
            RuleKind::Legendre => (0.0, 0.0),
            RuleKind::Jacobi { alpha, beta } => (alpha, beta),
        }
    }
}

/// An `n`-point Gauss rule on (0, 1). Nodes are strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    kind: RuleKind,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn kind(&self) -> RuleKind {
        self.kind
    }

    pub fn n(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `(node, weight)` pairs in increasing node order.
    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }

    /// `Σ ω_i f(ξ_i)`.
    pub fn apply<F: FnMut(f64) -> f64>(&self, f: F) -> f64 {
        apply(self, f)
    }
}

/// Zeroth moment `∫_0^1 (1 - x)^alpha x^beta dx`.
pub fn jacobi_moment(alpha: f64, beta: f64) -> f64 {
    if alpha == 0.0 && beta == 0.0 {
        return 1.0;
    }
    let num = gamma(alpha + 1.0).expect("alpha > -1") * gamma(beta + 1.0).expect("beta > -1");
    num / gamma(alpha + beta + 2.0).expect("alpha + beta > -2")
}

pub fn gauss_legendre(n: usize) -> Result<QuadratureRule> {
    build_rule(n, RuleKind::Legendre)
}

pub fn gauss_jacobi(n: usize, alpha: f64, beta: f64) -> Result<QuadratureRule> {
    if !(alpha > -1.0) || !(beta > -1.0) {
        return Err(Error::InvalidArgument(format!(
            "Jacobi exponents must exceed -1, got alpha = {alpha}, beta = {beta}"
        )));
    }
    build_rule(n, RuleKind::Jacobi { alpha, beta })
}

pub fn apply<F: FnMut(f64) -> f64>(rule: &QuadratureRule, mut f: F) -> f64 {
    rule.iter().map(|(x, w)| w * f(x)).sum()
}

/// `Σ_i Σ_j ω_i ω_j f(ξ_i, η_j)`, summed in node-index order with the `y`
/// sum innermost.
pub fn apply_tensor<F: FnMut(f64, f64) -> f64>(
    rule_x: &QuadratureRule,
    rule_y: &QuadratureRule,
    mut f: F,
) -> f64 {
    let mut total = 0.0;
    for (x, wx) in rule_x.iter() {
        let mut inner = 0.0;
        for (y, wy) in rule_y.iter() {
            inner += wy * f(x, y);
        }
        total += wx * inner;
    }
    total
}

fn build_rule(n: usize, kind: RuleKind) -> Result<QuadratureRule> {
    if n == 0 {
        return Err(Error::InvalidArgument("quadrature order must be positive".into()));
    }
    let (alpha, beta) = kind.exponents();
    let (mut diag, mut offdiag) = jacobi_matrix(n, alpha, beta);
    let mut first = vec![0.0; n];
    first[0] = 1.0;
    tridiagonal_ql(&mut diag, &mut offdiag, &mut first)?;

    let mu0 = jacobi_moment(alpha, beta);
    let mut pairs: Vec<(f64, f64)> = diag
        .into_iter()
        .zip(first)
        .map(|(x, z)| (x, mu0 * z * z))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (nodes, weights) = pairs.into_iter().unzip();
    Ok(QuadratureRule { kind, nodes, weights })
}

/// Recurrence coefficients of the monic polynomials orthogonal for
/// `(1 - x)^alpha x^beta` on (0, 1): diagonal and off-diagonal of the Jacobi
/// matrix. The off-diagonal has length `n` with a trailing zero.
fn jacobi_matrix(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let ab = a + b;
    let mut diag = Vec::with_capacity(n);
    diag.push(0.5 * (1.0 + (b - a) / (ab + 2.0)));
    for k in 1..n {
        let k = k as f64;
        let nab = 2.0 * k + ab;
        diag.push(0.5 * (1.0 + (b * b - a * a) / (nab * (nab + 2.0))));
    }

    let mut offdiag = vec![0.0; n];
    for k in 1..n {
        let beta_k = if k == 1 {
            4.0 * (a + 1.0) * (b + 1.0) / ((ab + 2.0).powi(2) * (ab + 3.0))
        } else {
            let kf = k as f64;
            let nab = 2.0 * kf + ab;
            4.0 * kf * (kf + a) * (kf + b) * (kf + ab) / (nab * nab * (nab + 1.0) * (nab - 1.0))
        };
        // Interval (-1, 1) -> (0, 1) halves the off-diagonal.
        offdiag[k - 1] = 0.5 * beta_k.sqrt();
    }
    (diag, offdiag)
}

/// Implicit QL with Wilkinson-type shifts on a symmetric tridiagonal matrix.
///
/// On return `diag` holds the eigenvalues and `first` the first components of
/// the corresponding normalized eigenvectors (the rotations are applied to the
/// first row of the eigenvector matrix only). `offdiag[i]` couples rows `i`
/// and `i + 1`.
fn tridiagonal_ql(diag: &mut [f64], offdiag: &mut [f64], first: &mut [f64]) -> Result<()> {
    let n = diag.len();
    for l in 0..n {
        let mut sweeps = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let scale = diag[m].abs() + diag[m + 1].abs();
                if offdiag[m].abs() <= f64::EPSILON * 0.5 * scale {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > MAX_SWEEPS {
                return Err(Error::EigenNoConvergence(l));
            }

            let mut g = (diag[l + 1] - diag[l]) / (2.0 * offdiag[l]);
            let mut r = g.hypot(1.0);
            g = diag[m] - diag[l] + offdiag[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            for i in (l..m).rev() {
                let f = s * offdiag[i];
                let b = c * offdiag[i];
                r = f.hypot(g);
                offdiag[i + 1] = r;
                if r == 0.0 {
                    diag[i + 1] -= p;
                    offdiag[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = diag[i + 1] - p;
                r = (diag[i] - g) * s + 2.0 * c * b;
                p = s * r;
                diag[i + 1] = g + p;
                g = c * r - b;

                let z = first[i + 1];
                first[i + 1] = s * first[i] + c * z;
                first[i] = c * first[i] - s * z;
            }
            if deflated {
                continue;
            }
            diag[l] -= p;
            offdiag[l] = g;
            offdiag[m] = 0.0;
        }
    }
    Ok(())
}

type CacheKey = (u64, u64, usize);

fn cache() -> &'static RwLock<HashMap<CacheKey, Arc<QuadratureRule>>> {
    static CACHE: OnceLock<RwLock<HashMap<CacheKey, Arc<QuadratureRule>>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

fn cached(n: usize, kind: RuleKind) -> Result<Arc<QuadratureRule>> {
    let (alpha, beta) = kind.exponents();
    // Legendre is stored under (0, 0); the rule is identical either way.
    let key = (alpha.to_bits(), beta.to_bits(), n);
    if let Some(rule) = cache().read().expect("rule cache poisoned").get(&key) {
        return Ok(Arc::clone(rule));
    }
    let rule = Arc::new(build_rule(n, kind)?);
    let mut map = cache().write().expect("rule cache poisoned");
    Ok(Arc::clone(map.entry(key).or_insert(rule)))
}

/// Shared, lazily built Gauss-Legendre rule.
pub fn cached_legendre(n: usize) -> Result<Arc<QuadratureRule>> {
    cached(n, RuleKind::Legendre)
}

/// Shared, lazily built Gauss-Jacobi rule.
pub fn cached_jacobi(n: usize, alpha: f64, beta: f64) -> Result<Arc<QuadratureRule>> {
    if !(alpha > -1.0) || !(beta > -1.0) {
        return Err(Error::InvalidArgument(format!(
            "Jacobi exponents must exceed -1, got alpha = {alpha}, beta = {beta}"
        )));
    }
    if alpha == 0.0 && beta == 0.0 {
        return cached_legendre(n);
    }
    cached(n, RuleKind::Jacobi { alpha, beta })
}
