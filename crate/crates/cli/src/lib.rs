//! Experiment drivers behind the `hpfl` binary. Every runner returns a
//! [`Table`] whose header row is always present; [`write_csv`] serializes it.

use std::io::Write;
use std::time::Instant;

use hpfl_core::assembly::{assemble_load, q_pair, PairLocal};
use hpfl_core::estimate::{run_model_problem, ErrorReport};
use hpfl_core::mesh::Partner;
use hpfl_core::{
    assemble_stiffness, assemble_stiffness_with, build_space, cholesky_solve, energy, exact_solution,
    geometric_mesh, AssemblyMode, AssemblyOptions, FracParams, OpCounter,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// Order of the reference quadrature in `quadcheck`.
pub const QUADCHECK_REFERENCE_ORDER: usize = 50;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] hpfl_core::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Solve,
    Convergence,
    Quadcheck,
    Complexity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RightHandSide {
    One,
    Exp,
}

impl RightHandSide {
    pub fn eval(self, x: f64) -> f64 {
        match self {
            RightHandSide::One => 1.0,
            RightHandSide::Exp => x.exp(),
        }
    }
}

/// How the quadrature order follows from the degree.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OrderRule {
    /// `n = ⌊λ p⌋`.
    Multiplier(f64),
    Fixed(usize),
}

impl OrderRule {
    pub fn order(self, p: usize) -> usize {
        match self {
            // The small offset keeps products like 1.2 * 5 from rounding down.
            OrderRule::Multiplier(lambda) => ((lambda * p as f64) + 1e-9).floor().max(1.0) as usize,
            OrderRule::Fixed(n) => n,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub command: Command,
    pub s: f64,
    pub sigma: f64,
    pub l_min: usize,
    pub l_max: usize,
    pub n_rule: OrderRule,
    /// `m = m_factor * p` for the reference solution.
    pub m_factor: usize,
    pub f: RightHandSide,
    pub seed: u64,
    pub deterministic: bool,
    pub naive: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            command: Command::Convergence,
            s: 0.5,
            sigma: 0.25,
            l_min: 1,
            l_max: 6,
            n_rule: OrderRule::Multiplier(1.2),
            m_factor: 6,
            f: RightHandSide::One,
            seed: 0,
            deterministic: false,
            naive: false,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<FracParams, CliError> {
        let params = FracParams::new(self.s).map_err(|e| CliError::Config(e.to_string()))?;
        if !(self.sigma > 0.0 && self.sigma < 1.0) {
            return Err(CliError::Config(format!("sigma must lie in (0,1), got {}", self.sigma)));
        }
        match self.n_rule {
            OrderRule::Multiplier(l) if !(l >= 1.0) => {
                return Err(CliError::Config(format!("lambda must be at least 1, got {l}")))
            }
            OrderRule::Fixed(0) => return Err(CliError::Config("n must be positive".into())),
            _ => {}
        }
        if self.m_factor == 0 {
            return Err(CliError::Config("m-factor must be positive".into()));
        }
        Ok(params)
    }

    fn layers(&self) -> impl Iterator<Item = usize> {
        self.l_min.max(1)..=self.l_max
    }

    fn options(&self) -> AssemblyOptions {
        let mode = if self.naive { AssemblyMode::Naive } else { AssemblyMode::Blockwise };
        AssemblyOptions { mode, parallel: true }
    }

    fn wall_ms(&self, start: Instant) -> String {
        if self.deterministic {
            "NA".into()
        } else {
            start.elapsed().as_millis().to_string()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Self { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn column(&self, name: &str) -> Option<Vec<&str>> {
        let k = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[k].as_str()).collect())
    }
}

/// 17 significant digits in scientific notation.
pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_report(r: &ErrorReport) -> String {
    r.value.map_or_else(|| "FAIL".to_string(), fmt_real)
}

pub fn write_csv<W: Write>(table: &Table, out: W) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(&table.header)?;
    for row in &table.rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let k = points.len() as f64;
    let (mx, my) = points.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x.ln() / k, b + y.ln() / k));
    let num: f64 = points.iter().map(|(x, y)| (x.ln() - mx) * (y.ln() - my)).sum();
    let den: f64 = points.iter().map(|(x, _)| (x.ln() - mx).powi(2)).sum();
    Some(num / den)
}

pub const CONVERGENCE_HEADER: [&str; 11] =
    ["L", "p", "n", "m", "N", "err_m1", "err_m2", "err_m3", "energy", "kernel_evals", "wall_ms"];

/// Geometric-mesh sweep with `p = L`, reporting the three error estimators.
pub fn run_convergence(config: &ExperimentConfig) -> Result<Table, CliError> {
    let params = config.validate()?;
    if config.f != RightHandSide::One {
        return Err(CliError::Config("error estimates need the closed-form energy; use --f one".into()));
    }
    let mut table = Table::new(&CONVERGENCE_HEADER);
    for l in config.layers() {
        let start = Instant::now();
        let p = l;
        let n = config.n_rule.order(p);
        let m = config.m_factor * p;
        let space = build_space(geometric_mesh(l, config.sigma)?, p)?;
        let mut row = vec![l.to_string(), p.to_string(), n.to_string(), m.to_string(), space.dim().to_string()];
        match run_model_problem(&space, params, n, m, config.options()) {
            Ok(run) => {
                row.extend([
                    fmt_report(&run.method1),
                    fmt_report(&run.method2),
                    fmt_report(&run.method3),
                    fmt_real(run.energy),
                    run.counter.kernel_evals.to_string(),
                ]);
                eprintln!("L={l} N={} err_m3={}", space.dim(), fmt_report(&run.method3));
            }
            Err(e) => {
                eprintln!("L={l}: {e}");
                row.extend(["ERROR", "ERROR", "ERROR", "NA", "NA"].map(String::from));
            }
        }
        row.push(config.wall_ms(start));
        table.rows.push(row);
    }
    Ok(table)
}

pub const QUADCHECK_HEADER: [&str; 4] = ["case", "sigma", "n", "abs_error"];

/// Element-pair quadrature errors on `geometric_mesh(2, sigma)` against the
/// order-50 rule. `adjacent` and `separated` pair the first element with the
/// second and third, using the degree-6 bubble on the first element and the
/// degree-8 bubble on the other. `identical` uses seeded random polynomials
/// of degree 5 and 7 on the first element.
pub fn run_quadcheck(config: &ExperimentConfig, n_range: std::ops::RangeInclusive<usize>) -> Result<Table, CliError> {
    let params = config.validate()?;
    let mesh = geometric_mesh(2, config.sigma)?;
    let mut v = vec![0.0; 7];
    v[6] = 1.0;
    let mut w = vec![0.0; 9];
    w[8] = 1.0;
    let (zv, zw) = (vec![0.0; 7], vec![0.0; 9]);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let rv: Vec<f64> = (0..6).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let rw: Vec<f64> = (0..8).map(|_| rng.gen_range(-1.0..1.0)).collect();

    let t = mesh.element(0);
    let cases = [
        ("adjacent", Partner::Element(mesh.element(1)), PairLocal::new(&v, &zv), PairLocal::new(&zw, &w)),
        ("separated", Partner::Element(mesh.element(2)), PairLocal::new(&v, &zv), PairLocal::new(&zw, &w)),
        ("identical", Partner::Element(t), PairLocal::new(&rv, &rv), PairLocal::new(&rw, &rw)),
    ];
    let mut table = Table::new(&QUADCHECK_HEADER);
    for (name, partner, f, g) in cases {
        let reference = q_pair(&t, &partner, f, g, QUADCHECK_REFERENCE_ORDER, params)?;
        for n in n_range.clone() {
            let err = (q_pair(&t, &partner, f, g, n, params)? - reference).abs();
            table.rows.push(vec![name.into(), fmt_real(config.sigma), n.to_string(), fmt_real(err)]);
        }
        eprintln!("{name}: reference {}", fmt_real(reference));
    }
    Ok(table)
}

pub const COMPLEXITY_HEADER: [&str; 5] = ["L", "N", "kernel_evals", "multiply_adds", "wall_ms"];

/// Assembly with `p = n = L`, recording operation counts. When at least two
/// layers are run a footer row `slope` holds the log-log slopes of both
/// counters against `L`.
pub fn run_complexity(config: &ExperimentConfig) -> Result<Table, CliError> {
    let params = config.validate()?;
    let mut table = Table::new(&COMPLEXITY_HEADER);
    let mut kernel = Vec::new();
    let mut madds = Vec::new();
    for l in config.layers() {
        let start = Instant::now();
        let space = build_space(geometric_mesh(l, config.sigma)?, l)?;
        let mut c = OpCounter::default();
        assemble_stiffness_with(&space, params, l, config.options(), &mut c)?;
        table.rows.push(vec![
            l.to_string(),
            space.dim().to_string(),
            c.kernel_evals.to_string(),
            c.multiply_adds.to_string(),
            config.wall_ms(start),
        ]);
        kernel.push((l as f64, c.kernel_evals as f64));
        madds.push((l as f64, c.multiply_adds as f64));
        eprintln!("L={l} multiply_adds={}", c.multiply_adds);
    }
    if let (Some(sk), Some(sm)) = (log_log_slope(&kernel), log_log_slope(&madds)) {
        table.rows.push(vec!["slope".into(), String::new(), fmt_real(sk), fmt_real(sm), String::new()]);
    }
    Ok(table)
}

pub const SOLVE_HEADER: [&str; 3] = ["x", "u", "u_exact"];

/// Solves once at `L = l_max` and samples the discrete solution at the mesh
/// nodes and element midpoints. `u_exact` is `NA` unless `f = 1`.
pub fn solve(config: &ExperimentConfig) -> Result<Table, CliError> {
    let params = config.validate()?;
    let l = config.l_max.max(1);
    let space = build_space(geometric_mesh(l, config.sigma)?, l)?;
    let n = config.n_rule.order(l);
    let a = assemble_stiffness(&space, params, n, &mut OpCounter::default())?;
    let b = assemble_load(&space, |x| config.f.eval(x), n)?;
    let sol = cholesky_solve(&a, &b)?;
    eprintln!("L={l} N={} n={n} energy={}", space.dim(), fmt_real(energy(&a, &sol.coeffs, &sol.coeffs)?));

    let mut table = Table::new(&SOLVE_HEADER);
    let mut push = |x: f64, u: f64| -> Result<(), CliError> {
        let exact = match config.f {
            RightHandSide::One => fmt_real(exact_solution(params, x)?),
            RightHandSide::Exp => "NA".into(),
        };
        table.rows.push(vec![fmt_real(x), fmt_real(u), exact]);
        Ok(())
    };
    push(-1.0, 0.0)?;
    for t in space.mesh().elements() {
        let local = space.local_coefficients(&sol.coeffs, t.index);
        push(t.map(0.5), hpfl_core::polynomials::evaluate_local(&local, 0.5))?;
        push(t.right, hpfl_core::polynomials::evaluate_local(&local, 1.0))?;
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_rule() {
        assert_eq!(OrderRule::Multiplier(1.2).order(5), 6);
        assert_eq!(OrderRule::Multiplier(1.2).order(4), 4);
        assert_eq!(OrderRule::Multiplier(1.0).order(7), 7);
        assert_eq!(OrderRule::Fixed(9).order(2), 9);
    }

    #[test]
    fn real_format_has_17_digits() {
        assert_eq!(fmt_real(0.1), "1.0000000000000001e-1");
        assert_eq!(fmt_real(-2.5), "-2.5000000000000000e0");
    }

    #[test]
    fn slope_fit() {
        let pts: Vec<(f64, f64)> = [2.0, 3.0, 5.0].iter().map(|&x: &f64| (x, 7.0 * x.powi(5))).collect();
        assert!((log_log_slope(&pts).unwrap() - 5.0).abs() < 1e-12);
        assert!(log_log_slope(&pts[..1]).is_none());
    }

    #[test]
    fn config_validation() {
        let mut c = ExperimentConfig::default();
        assert!(c.validate().is_ok());
        c.sigma = 1.0;
        assert!(c.validate().is_err());
        c = ExperimentConfig { n_rule: OrderRule::Multiplier(0.5), ..Default::default() };
        assert!(c.validate().is_err());
        c = ExperimentConfig { s: 1.0, ..Default::default() };
        assert!(c.validate().is_err());
    }
}
