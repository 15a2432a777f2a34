//! Meshes of Ω = (-1, 1), geometric grading toward both end points, and the
//! hierarchical basis of continuous piecewise polynomials vanishing at ±1.

use crate::error::{Error, Result};

/// Element `T_k = (x_k, x_{k+1})`. Node indices are `index` and `index + 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Element {
    pub index: usize,
    pub left: f64,
    pub right: f64,
}

impl Element {
    #[inline]
    pub fn h(&self) -> f64 {
        self.right - self.left
    }

    #[inline]
    pub fn left_node(&self) -> usize {
        self.index
    }

    #[inline]
    pub fn right_node(&self) -> usize {
        self.index + 1
    }

    /// Affine element map `F_T(ŝ) = x_ℓ + ŝ h_T`.
    #[inline]
    pub fn map(&self, s_hat: f64) -> f64 {
        element_map(self, s_hat)
    }
}

#[inline]
pub fn element_map(element: &Element, s_hat: f64) -> f64 {
    element.left + s_hat * element.h()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh1D {
    nodes: Vec<f64>,
}

impl Mesh1D {
    /// Mesh from strictly increasing nodes `-1 = x_0 < … < x_M = 1`.
    pub fn new(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::InvalidArgument("a mesh needs at least two nodes".into()));
        }
        if nodes[0] != -1.0 || *nodes.last().unwrap() != 1.0 {
            return Err(Error::InvalidArgument("mesh must span [-1, 1]".into()));
        }
        if !nodes.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidArgument("mesh nodes must be strictly increasing".into()));
        }
        Ok(Self { nodes })
    }

    pub fn uniform(elements: usize) -> Result<Self> {
        if elements == 0 {
            return Err(Error::InvalidArgument("uniform mesh needs at least one element".into()));
        }
        let h = 2.0 / elements as f64;
        let mut nodes: Vec<f64> = (0..=elements).map(|i| -1.0 + i as f64 * h).collect();
        nodes[elements] = 1.0;
        Self::new(nodes)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn num_elements(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn element(&self, index: usize) -> Element {
        Element { index, left: self.nodes[index], right: self.nodes[index + 1] }
    }

    pub fn elements(&self) -> impl Iterator<Item = Element> + '_ {
        (0..self.num_elements()).map(|k| self.element(k))
    }

    /// Largest γ with `γ h_i <= h_j` for every pair of neighbouring elements.
    pub fn shape_regularity(&self) -> f64 {
        shape_regularity(self)
    }
}

/// Geometric mesh with `layers` refinement layers toward each end point.
///
/// Nodes: `x_0 = -1`, `x_i = -1 + σ^{L-i+1}` for `i = 1..L`,
/// `x_{i+1} = 1 - σ^{i-L}` for `i = L..2L`, `x_{2L+2} = 1`; that is `2L + 2`
/// elements, symmetric about 0.
pub fn geometric_mesh(layers: usize, sigma: f64) -> Result<Mesh1D> {
    if layers == 0 {
        return Err(Error::InvalidArgument("geometric mesh needs at least one layer".into()));
    }
    if !(sigma > 0.0 && sigma < 1.0) {
        return Err(Error::InvalidArgument(format!("grading factor must lie in (0,1), got {sigma}")));
    }
    let l = layers as i32;
    let mut nodes = Vec::with_capacity(2 * layers + 3);
    nodes.push(-1.0);
    for i in 1..=l {
        nodes.push(-1.0 + sigma.powi(l - i + 1));
    }
    for i in l..=2 * l {
        nodes.push(1.0 - sigma.powi(i - l));
    }
    nodes.push(1.0);
    Mesh1D::new(nodes)
}

pub fn shape_regularity(mesh: &Mesh1D) -> f64 {
    let h: Vec<f64> = mesh.elements().map(|e| e.h()).collect();
    h.windows(2)
        .map(|w| (w[0] / w[1]).min(w[1] / w[0]))
        .fold(1.0, f64::min)
}

/// One function of the hierarchical basis of `S^{p,1}_0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisFunction {
    /// Hat function of the interior node `node ∈ 1..M-1`.
    Hat { node: usize },
    /// Integrated-Legendre bubble of local degree `degree ∈ 2..=p` on `element`.
    Bubble { element: usize, degree: usize },
}

/// The discrete space: mesh, degree and the global basis enumeration
/// (all hats by node index, then bubbles element-major).
#[derive(Debug, Clone, PartialEq)]
pub struct Space {
    mesh: Mesh1D,
    p: usize,
    basis: Vec<BasisFunction>,
}

pub fn build_space(mesh: Mesh1D, p: usize) -> Result<Space> {
    if p == 0 {
        return Err(Error::InvalidArgument("polynomial degree must be at least 1".into()));
    }
    let m = mesh.num_elements();
    let mut basis = Vec::with_capacity(m - 1 + m * (p - 1));
    basis.extend((1..m).map(|node| BasisFunction::Hat { node }));
    for element in 0..m {
        basis.extend((2..=p).map(|degree| BasisFunction::Bubble { element, degree }));
    }
    Ok(Space { mesh, p, basis })
}

impl Space {
    pub fn mesh(&self) -> &Mesh1D {
        &self.mesh
    }

    pub fn degree(&self) -> usize {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[BasisFunction] {
        &self.basis
    }

    fn hat_index(&self, node: usize) -> Option<usize> {
        let m = self.mesh.num_elements();
        (node >= 1 && node < m).then(|| node - 1)
    }

    /// Global index of each local shape on `element` (`None` for the hats of
    /// the boundary nodes ±1, which are not in the space).
    pub fn element_dofs(&self, element: usize) -> Vec<Option<usize>> {
        let m = self.mesh.num_elements();
        let mut dofs = Vec::with_capacity(self.p + 1);
        dofs.push(self.hat_index(element));
        dofs.push(self.hat_index(element + 1));
        let first_bubble = (m - 1) + element * (self.p - 1);
        dofs.extend((0..self.p - 1).map(|k| Some(first_bubble + k)));
        dofs
    }

    /// Elements on which basis function `i` does not vanish identically.
    pub fn support(&self, i: usize) -> Vec<usize> {
        match self.basis[i] {
            BasisFunction::Hat { node } => vec![node - 1, node],
            BasisFunction::Bubble { element, .. } => vec![element],
        }
    }

    /// Local coefficients of basis function `i` restricted to `element`.
    pub fn restriction(&self, i: usize, element: usize) -> Vec<f64> {
        let mut c = vec![0.0; self.p + 1];
        match self.basis[i] {
            BasisFunction::Hat { node } => {
                if node == element {
                    c[0] = 1.0;
                } else if node == element + 1 {
                    c[1] = 1.0;
                }
            }
            BasisFunction::Bubble { element: e, degree } => {
                if e == element {
                    c[degree] = 1.0;
                }
            }
        }
        c
    }

    /// Local coefficients of `Σ x_i φ_i` restricted to `element`.
    pub fn local_coefficients(&self, coeffs: &[f64], element: usize) -> Vec<f64> {
        self.element_dofs(element)
            .into_iter()
            .map(|d| d.map_or(0.0, |g| coeffs[g]))
            .collect()
    }
}

/// Second argument of [`pair_class`]: another element or the exterior Ω^c.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Partner {
    Element(Element),
    Complement,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairClass {
    Identical,
    /// The first element is the left neighbour of the second.
    AdjacentLeftRight,
    /// The first element is the right neighbour of the second.
    AdjacentRightLeft,
    Separated,
    Complement,
}

/// Classifies an element pair by node indices.
pub fn pair_class(element: &Element, partner: &Partner) -> PairClass {
    match partner {
        Partner::Complement => PairClass::Complement,
        Partner::Element(other) => {
            if other.index == element.index {
                PairClass::Identical
            } else if element.right_node() == other.left_node() {
                PairClass::AdjacentLeftRight
            } else if element.left_node() == other.right_node() {
                PairClass::AdjacentRightLeft
            } else {
                PairClass::Separated
            }
        }
    }
}

/// Gap between two elements, measured between the facing end points.
pub fn distance(a: &Element, b: &Element) -> f64 {
    if a.index < b.index {
        b.left - a.right
    } else if b.index < a.index {
        a.left - b.right
    } else {
        0.0
    }
}
