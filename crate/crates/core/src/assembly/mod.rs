//! The fully discrete bilinear and linear forms.
//!
//! `ã_n(v, w) = C(s)/2 · (Σ_T Σ_T' Q^n_{T,T'}(v, w) + 2 Σ_T Q^n_{T,Ω^c}(v, w))`
//! and `l̃_n(v) = Σ_T h_T GL_n(v̂ f̂)`.

mod blockwise;
mod naive;
mod pair;

use std::ops::AddAssign;

use crate::error::{Error, Result};
use crate::mesh::Space;
use crate::polynomials::shape_table;
use crate::quadrature::cached_legendre;
use crate::special::FracParams;

pub use pair::{q_adjacent, q_complement, q_identical, q_pair, q_separated, PairLocal};
pub(crate) use pair::{q_adjacent_counted, q_complement_counted, q_identical_counted, q_separated_counted};

/// Operation counts collected during assembly.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OpCounter {
    pub kernel_evals: u64,
    pub multiply_adds: u64,
}

impl AddAssign for OpCounter {
    fn add_assign(&mut self, rhs: Self) {
        self.kernel_evals += rhs.kernel_evals;
        self.multiply_adds += rhs.multiply_adds;
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum AssemblyMode {
    /// Element-pair blocks with shared reference tables and kernel reuse.
    #[default]
    Blockwise,
    /// One entry at a time, every pair integral evaluated from scratch.
    Naive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AssemblyOptions {
    pub mode: AssemblyMode,
    /// Compute element-pair blocks on the rayon pool. The blocks are still
    /// summed in a fixed order, so the result does not depend on this flag.
    pub parallel: bool,
}

impl Default for AssemblyOptions {
    fn default() -> Self {
        Self { mode: AssemblyMode::Blockwise, parallel: true }
    }
}

/// Dense symmetric Galerkin matrix `A_ij = ã_n(φ_j, φ_i)`, stored row-major
/// with the lower triangle mirrored from the upper one.
#[derive(Debug, Clone, PartialEq)]
pub struct StiffnessMatrix {
    n_dim: usize,
    entries: Vec<f64>,
    quad_order: usize,
    s: f64,
}

impl StiffnessMatrix {
    /// Wraps a row-major matrix; fails unless it is square and exactly symmetric.
    pub fn from_entries(n_dim: usize, entries: Vec<f64>, quad_order: usize, s: f64) -> Result<Self> {
        if entries.len() != n_dim * n_dim {
            return Err(Error::DimensionMismatch { expected: n_dim * n_dim, found: entries.len() });
        }
        for i in 0..n_dim {
            for j in 0..i {
                if entries[i * n_dim + j] != entries[j * n_dim + i] {
                    return Err(Error::InvalidArgument(format!("matrix is not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(Self { n_dim, entries, quad_order, s })
    }

    pub fn dim(&self) -> usize {
        self.n_dim
    }

    pub fn quad_order(&self) -> usize {
        self.quad_order
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n_dim + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n_dim..(i + 1) * self.n_dim]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.entries
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n_dim {
            return Err(Error::DimensionMismatch { expected: self.n_dim, found: x.len() });
        }
        Ok((0..self.n_dim).map(|i| crate::polynomials::dot(self.row(i), x)).collect())
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n_dim).all(|i| (0..i).all(|j| self.get(i, j).to_bits() == self.get(j, i).to_bits()))
    }
}

/// Right-hand side `b_i = l̃_n(φ_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadVector {
    entries: Vec<f64>,
}

impl LoadVector {
    pub fn new(entries: Vec<f64>) -> Self {
        Self { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.entries
    }
}

pub fn assemble_load<F: Fn(f64) -> f64>(space: &Space, f: F, n: usize) -> Result<LoadVector> {
    let rule = cached_legendre(n)?;
    let table = shape_table(space.degree(), rule.nodes());
    let mut b = vec![0.0; space.dim()];
    for t in space.mesh().elements() {
        let fw: Vec<f64> = rule.iter().map(|(x, w)| w * f(t.map(x))).collect();
        for (a, dof) in space.element_dofs(t.index).into_iter().enumerate() {
            if let Some(g) = dof {
                b[g] += t.h() * crate::polynomials::dot(table.row(a), &fw);
            }
        }
    }
    Ok(LoadVector::new(b))
}

/// Assembles `A_ij = ã_n(φ_j, φ_i)` with default options.
pub fn assemble_stiffness(
    space: &Space,
    params: FracParams,
    n: usize,
    counter: &mut OpCounter,
) -> Result<StiffnessMatrix> {
    assemble_stiffness_with(space, params, n, AssemblyOptions::default(), counter)
}

pub fn assemble_stiffness_with(
    space: &Space,
    params: FracParams,
    n: usize,
    options: AssemblyOptions,
    counter: &mut OpCounter,
) -> Result<StiffnessMatrix> {
    if n == 0 {
        return Err(Error::InvalidArgument("quadrature order must be positive".into()));
    }
    let upper = match options.mode {
        AssemblyMode::Blockwise => blockwise::assemble(space, params, n, options.parallel, counter)?,
        AssemblyMode::Naive => naive::assemble(space, params, n, options.parallel, counter)?,
    };
    let dim = space.dim();
    let mut entries = upper;
    for i in 0..dim {
        for j in 0..i {
            entries[i * dim + j] = entries[j * dim + i];
        }
    }
    Ok(StiffnessMatrix { n_dim: dim, entries, quad_order: n, s: params.s() })
}
