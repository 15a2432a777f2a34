use std::process::Command as Process;

use hpfl_cli::*;

fn csv_text(table: &Table) -> String {
    let mut buf = Vec::new();
    write_csv(table, &mut buf).unwrap();
    String::from_utf8(buf).unwrap()
}

fn convergence(l_min: usize, l_max: usize) -> ExperimentConfig {
    ExperimentConfig { s: 0.5, sigma: 0.25, l_min, l_max, deterministic: true, ..Default::default() }
}

#[test]
fn empty_layer_range_writes_header_only() {
    let table = run_convergence(&convergence(4, 3)).unwrap();
    assert!(table.rows.is_empty());
    assert_eq!(csv_text(&table), format!("{}\n", CONVERGENCE_HEADER.join(",")));
}

#[test]
fn convergence_three_layers_decrease() {
    let table = run_convergence(&convergence(1, 3)).unwrap();
    assert_eq!(table.rows.len(), 3);
    let n: Vec<usize> = table.column("n").unwrap().iter().map(|v| v.parse().unwrap()).collect();
    assert_eq!(n, vec![1, 2, 3]);
    let e3: Vec<f64> = table.column("err_m3").unwrap().iter().map(|v| v.parse().unwrap()).collect();
    assert!(e3.windows(2).all(|w| w[1] < w[0]), "{e3:?}");
}

#[test]
fn deterministic_runs_are_byte_identical() {
    let a = csv_text(&run_convergence(&convergence(1, 3)).unwrap());
    let b = csv_text(&run_convergence(&convergence(1, 3)).unwrap());
    assert_eq!(a, b);
    assert!(a.lines().skip(1).all(|l| l.ends_with(",NA")));
}

#[test]
fn convergence_rejects_rhs_without_closed_form() {
    let config = ExperimentConfig { f: RightHandSide::Exp, ..convergence(1, 2) };
    assert!(matches!(run_convergence(&config), Err(CliError::Config(_))));
}

#[test]
fn quadcheck_reference_row_is_zero() {
    let config = ExperimentConfig { sigma: 0.5, ..Default::default() };
    let table = run_quadcheck(&config, 48..=50).unwrap();
    assert_eq!(table.rows.len(), 9);
    for row in table.rows.iter().filter(|r| r[2] == "50") {
        assert_eq!(row[3].parse::<f64>().unwrap(), 0.0);
    }
}

#[test]
fn quadcheck_adjacent_decreases() {
    let config = ExperimentConfig { sigma: 0.5, ..Default::default() };
    let table = run_quadcheck(&config, 5..=12).unwrap();
    let errs: Vec<f64> = table.rows.iter().filter(|r| r[0] == "adjacent").map(|r| r[3].parse().unwrap()).collect();
    assert_eq!(errs.len(), 8);
    assert!(errs.last().unwrap() < &(1e-6 * errs[0]), "{errs:?}");
}

#[test]
fn quadcheck_seed_changes_only_random_case() {
    let a = run_quadcheck(&ExperimentConfig { seed: 1, ..Default::default() }, 5..=6).unwrap();
    let b = run_quadcheck(&ExperimentConfig { seed: 2, ..Default::default() }, 5..=6).unwrap();
    for (x, y) in a.rows.iter().zip(&b.rows) {
        assert_eq!(x[0] != "identical", x == y);
    }
}

#[test]
fn complexity_single_layer_has_no_slope_row() {
    let config = ExperimentConfig { l_min: 3, l_max: 3, deterministic: true, ..Default::default() };
    let table = run_complexity(&config).unwrap();
    assert_eq!(table.rows.len(), 1);
    let config = ExperimentConfig { l_min: 2, l_max: 4, deterministic: true, ..Default::default() };
    let table = run_complexity(&config).unwrap();
    assert_eq!(table.rows.last().unwrap()[0], "slope");
}

#[test]
fn naive_complexity_counts_more_work() {
    let base = ExperimentConfig { l_min: 4, l_max: 4, deterministic: true, ..Default::default() };
    let fast = run_complexity(&base).unwrap();
    let slow = run_complexity(&ExperimentConfig { naive: true, ..base }).unwrap();
    let madds = |t: &Table| t.rows[0][3].parse::<u64>().unwrap();
    assert!(madds(&slow) > madds(&fast));
}

#[test]
fn solve_matches_exact_solution_roughly() {
    let config = ExperimentConfig { l_max: 4, ..Default::default() };
    let table = solve(&config).unwrap();
    assert_eq!(table.header, SOLVE_HEADER);
    for row in &table.rows {
        let u: f64 = row[1].parse().unwrap();
        let exact: f64 = row[2].parse().unwrap();
        assert!((u - exact).abs() < 1e-2, "{row:?}");
    }
}

#[test]
fn invalid_parameters_are_rejected() {
    for config in [
        ExperimentConfig { s: 0.0, ..Default::default() },
        ExperimentConfig { sigma: 1.5, ..Default::default() },
        ExperimentConfig { n_rule: OrderRule::Fixed(0), ..Default::default() },
        ExperimentConfig { m_factor: 0, ..Default::default() },
    ] {
        assert!(run_complexity(&config).is_err());
    }
}

#[test]
fn binary_writes_file_and_reports_errors() {
    let exe = env!("CARGO_BIN_EXE_hpfl");
    let dir = std::env::temp_dir().join(format!("hpfl-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let out = dir.join("conv.csv");
    let status = Process::new(exe)
        .args(["convergence", "--lmin", "1", "--lmax", "2", "--deterministic", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert!(status.status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(!status.stderr.is_empty());

    let bad = Process::new(exe).args(["convergence", "--s", "1.5"]).output().unwrap();
    assert!(!bad.status.success());
    std::fs::remove_dir_all(&dir).unwrap();
}
