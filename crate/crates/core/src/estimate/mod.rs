//! Energy-norm error estimators for the model problem and reference values
//! for the element-pair integrals.
//!
//! With `a(u, u)` known in closed form, Galerkin orthogonality gives
//! `‖u - ũ‖²_a ≈ a(u, u) - ã(ũ, ũ)`. The three estimators differ in which
//! discrete form is used and in whether a second, more accurate discrete
//! solution is brought in through the triangle inequality.

mod oracle;

pub use oracle::direct_pair_integral;

use crate::assembly::{
    assemble_load, assemble_stiffness_with, q_pair, AssemblyOptions, OpCounter, PairLocal, StiffnessMatrix,
};
use crate::error::{Error, Result};
use crate::mesh::{Element, Partner, Space};
use crate::solver::{cholesky_solve, energy, DiscreteSolution};
use crate::special::{exact_energy, FracParams};

const MAX_REFERENCE_ORDER: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorMethod {
    /// `sqrt(a(u,u) - ã_n(ũ_n, ũ_n))`.
    M1,
    /// `sqrt(a(u,u) - ã_m(ũ_n, ũ_n))` with a finer order `m`.
    M2,
    /// `sqrt(a(u,u) - ã_m(ũ_m, ũ_m)) + sqrt(ã_m(ũ_m - ũ_n, ũ_m - ũ_n))`.
    M3,
}

/// Outcome of one estimator. `value` is `None` when the radicand is negative,
/// i.e. when the quadrature error dominates the discretization error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorReport {
    pub method: ErrorMethod,
    pub value: Option<f64>,
    pub radicand: f64,
}

impl ErrorReport {
    fn from_radicand(method: ErrorMethod, radicand: f64, extra: f64) -> Self {
        let value = (radicand >= 0.0).then(|| radicand.sqrt() + extra);
        Self { method, value, radicand }
    }

    pub fn failed(&self) -> bool {
        self.value.is_none()
    }
}

fn check_exact(a_exact: f64) -> Result<()> {
    if a_exact > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("exact energy must be positive, got {a_exact}")))
    }
}

/// Estimator with the matrix the solution was computed with.
pub fn error_method1(sol: &DiscreteSolution, a_n: &StiffnessMatrix, a_exact: f64) -> Result<ErrorReport> {
    check_exact(a_exact)?;
    let e = energy(a_n, &sol.coeffs, &sol.coeffs)?;
    Ok(ErrorReport::from_radicand(ErrorMethod::M1, a_exact - e, 0.0))
}

/// Same formula with a matrix assembled at a higher order `m`.
pub fn error_method2(sol: &DiscreteSolution, a_m: &StiffnessMatrix, a_exact: f64) -> Result<ErrorReport> {
    let mut report = error_method1(sol, a_m, a_exact)?;
    report.method = ErrorMethod::M2;
    Ok(report)
}

/// Triangle inequality through the order-`m` solution `sol_ref`.
pub fn error_method3(
    sol: &DiscreteSolution,
    sol_ref: &DiscreteSolution,
    a_m: &StiffnessMatrix,
    a_exact: f64,
) -> Result<ErrorReport> {
    check_exact(a_exact)?;
    if sol.coeffs.len() != sol_ref.coeffs.len() {
        return Err(Error::DimensionMismatch { expected: sol_ref.coeffs.len(), found: sol.coeffs.len() });
    }
    let e_ref = energy(a_m, &sol_ref.coeffs, &sol_ref.coeffs)?;
    let delta: Vec<f64> = sol_ref.coeffs.iter().zip(&sol.coeffs).map(|(r, x)| r - x).collect();
    let d = energy(a_m, &delta, &delta)?.max(0.0).sqrt();
    Ok(ErrorReport::from_radicand(ErrorMethod::M3, a_exact - e_ref, d))
}

/// All quantities of one run of the model problem `f = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelRun {
    pub n: usize,
    pub m: usize,
    pub dim: usize,
    pub method1: ErrorReport,
    pub method2: ErrorReport,
    pub method3: ErrorReport,
    /// `ã_m(ũ_n, ũ_n)`.
    pub energy: f64,
    /// Operations of the order-`n` assembly.
    pub counter: OpCounter,
}

/// Solves the model problem at orders `n` and `m` and evaluates all three
/// estimators against the closed-form energy.
pub fn run_model_problem(
    space: &Space,
    params: FracParams,
    n: usize,
    m: usize,
    options: AssemblyOptions,
) -> Result<ModelRun> {
    let a_exact = exact_energy(params);
    let mut counter = OpCounter::default();
    let a_n = assemble_stiffness_with(space, params, n, options, &mut counter)?;
    let sol = cholesky_solve(&a_n, &assemble_load(space, |_| 1.0, n)?)?;
    let a_m = assemble_stiffness_with(space, params, m, options, &mut OpCounter::default())?;
    let sol_ref = cholesky_solve(&a_m, &assemble_load(space, |_| 1.0, m)?)?;
    Ok(ModelRun {
        n,
        m,
        dim: space.dim(),
        method1: error_method1(&sol, &a_n, a_exact)?,
        method2: error_method2(&sol, &a_m, a_exact)?,
        method3: error_method3(&sol, &sol_ref, &a_m, a_exact)?,
        energy: energy(&a_m, &sol.coeffs, &sol.coeffs)?,
        counter,
    })
}

/// `I_{T,T'}(v, w)` (or `I_{T,Ω^c}`) by the assembly quadrature with the
/// order doubled from 8 until two successive values agree to relative
/// tolerance `tol`.
pub fn reference_pair_integral(
    t: &Element,
    partner: &Partner,
    v: PairLocal<'_>,
    w: PairLocal<'_>,
    params: FracParams,
    tol: f64,
) -> Result<f64> {
    if !(tol >= 1e-12) {
        return Err(Error::InvalidArgument(format!("tolerance must be at least 1e-12, got {tol}")));
    }
    let mut n = 8;
    let mut previous = q_pair(t, partner, v, w, n, params)?;
    while n < MAX_REFERENCE_ORDER {
        n *= 2;
        let current = q_pair(t, partner, v, w, n, params)?;
        if (current - previous).abs() <= tol * current.abs() {
            return Ok(current);
        }
        previous = current;
    }
    Err(Error::OracleFailure(format!("no agreement to {tol} up to order {MAX_REFERENCE_ORDER}")))
}

/// `|Q^n - Q^{n_ref}|` for one element pair.
pub fn elementwise_quadrature_error(
    t: &Element,
    partner: &Partner,
    v: PairLocal<'_>,
    w: PairLocal<'_>,
    params: FracParams,
    n: usize,
    n_ref: usize,
) -> Result<f64> {
    let q = q_pair(t, partner, v, w, n, params)?;
    let q_ref = q_pair(t, partner, v, w, n_ref, params)?;
    Ok((q - q_ref).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_space, geometric_mesh};

    fn matrix(n: usize, entries: Vec<f64>) -> StiffnessMatrix {
        StiffnessMatrix::from_entries(n, entries, 1, 0.5).unwrap()
    }

    #[test]
    fn zero_solution_gives_sqrt_exact() {
        let a = matrix(2, vec![2.0, 0.5, 0.5, 1.0]);
        let zero = DiscreteSolution { coeffs: vec![0.0, 0.0], quad_order: 1 };
        let r1 = error_method1(&zero, &a, 4.0).unwrap();
        let r2 = error_method2(&zero, &a, 4.0).unwrap();
        assert_eq!(r1.value, Some(2.0));
        assert_eq!(r2.value, Some(2.0));
        assert_eq!(r2.method, ErrorMethod::M2);
    }

    #[test]
    fn negative_radicand_fails() {
        let a = matrix(1, vec![10.0]);
        let sol = DiscreteSolution { coeffs: vec![1.0], quad_order: 1 };
        let r = error_method1(&sol, &a, 1.0).unwrap();
        assert!(r.failed());
        assert_eq!(r.radicand, -9.0);
        assert!(error_method1(&sol, &a, 0.0).is_err());
    }

    #[test]
    fn method3_reduces_to_method2() {
        let a = matrix(2, vec![2.0, 0.5, 0.5, 1.0]);
        let sol = DiscreteSolution { coeffs: vec![0.3, -0.2], quad_order: 1 };
        let r2 = error_method2(&sol, &a, 3.0).unwrap();
        let r3 = error_method3(&sol, &sol, &a, 3.0).unwrap();
        assert_eq!(r2.value, r3.value);
        let other = DiscreteSolution { coeffs: vec![0.1, -0.2], quad_order: 2 };
        let r3 = error_method3(&sol, &other, &a, 3.0).unwrap();
        let rad = 3.0 - energy(&a, &other.coeffs, &other.coeffs).unwrap();
        let expect = rad.sqrt() + (2.0f64 * 0.04).sqrt();
        assert!((r3.value.unwrap() - expect).abs() < 1e-15);
    }

    #[test]
    fn reference_matches_identical_closed_form() {
        let t = Element { index: 2, left: 0.0, right: 0.5 };
        let lin = [0.0, 2.0];
        let f = PairLocal::new(&lin, &lin);
        let s = 0.3;
        let got = reference_pair_integral(&t, &Partner::Element(t), f, f, FracParams::new(s).unwrap(), 1e-12).unwrap();
        let expect = 2.0 * 4.0 * 0.5f64.powf(1.0 - 2.0 * s) / ((2.0 - 2.0 * s) * (3.0 - 2.0 * s));
        assert!((got - expect).abs() < 1e-13 * expect);
        let zero = [0.0, 0.0];
        let z = PairLocal::new(&zero, &zero);
        assert_eq!(reference_pair_integral(&t, &Partner::Complement, z, z, FracParams::new(s).unwrap(), 1e-12).unwrap(), 0.0);
    }

    #[test]
    fn elementwise_error_vanishes_at_reference_order() {
        let t = Element { index: 0, left: -1.0, right: -0.5 };
        let t2 = Element { index: 1, left: -0.5, right: 0.0 };
        let v = [0.0, 1.0, 0.3];
        let w = [1.0, 0.0, -0.2];
        let f = PairLocal::new(&v, &w);
        let e = elementwise_quadrature_error(&t, &Partner::Element(t2), f, f, FracParams::new(0.5).unwrap(), 12, 12);
        assert_eq!(e.unwrap(), 0.0);
    }

    #[test]
    fn model_run_small() {
        let space = build_space(geometric_mesh(2, 0.25).unwrap(), 2).unwrap();
        let params = FracParams::new(0.5).unwrap();
        let run = run_model_problem(&space, params, 3, 12, AssemblyOptions::default()).unwrap();
        let e3 = run.method3.value.unwrap();
        assert!(e3 > 0.0 && e3 < 1.0);
        assert_eq!(run.dim, space.dim());
    }
}
