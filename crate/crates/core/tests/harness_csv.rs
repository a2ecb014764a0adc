use oscspec::harness::{
    emit_csv, parse_csv, parse_energies, read_csv, run_compare, run_sweep, write_csv,
    ExperimentConfig, MethodChoice, CSV_HEADER,
};

fn small_sweep() -> ExperimentConfig {
    ExperimentConfig {
        lambda: 5.0,
        beta: -1.0,
        energies: parse_energies("1e-4:1e-2:3").unwrap(),
        method: MethodChoice::Both,
        ..ExperimentConfig::default()
    }
}

fn csv_bytes(cfg: &ExperimentConfig) -> Vec<u8> {
    let mut out = Vec::new();
    write_csv(&run_sweep(cfg).unwrap(), &mut out).unwrap();
    out
}

#[test]
fn identical_configs_give_identical_bytes() {
    let cfg = small_sweep();
    assert_eq!(csv_bytes(&cfg), csv_bytes(&cfg));
    let cmp = ExperimentConfig {
        instances: 6,
        seed: 5,
        ..ExperimentConfig::default()
    };
    let bytes = |c: &ExperimentConfig| {
        let mut out = Vec::new();
        write_csv(&run_compare(c).unwrap(), &mut out).unwrap();
        out
    };
    assert_eq!(bytes(&cmp), bytes(&cmp));
}

#[test]
fn csv_round_trips_and_totals_add_up() {
    let rep = run_sweep(&small_sweep()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    emit_csv(&rep, &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().next().unwrap(), CSV_HEADER);
    let rows = parse_csv(&path).unwrap();
    assert_eq!(rows, rep.table());

    for w in rows.windows(2) {
        assert!(w[0].e > w[1].e || (w[0].e == w[1].e && w[0].l <= w[1].l));
    }
    for total in rows.iter().filter(|r| r.l == -1) {
        let sum: u64 = rows
            .iter()
            .filter(|r| r.l >= 0 && r.e == total.e && r.method == total.method)
            .map(|r| r.multiplicity * r.count)
            .sum();
        assert_eq!(sum, total.count);
    }
}

#[test]
fn hydrogen_totals_row() {
    let cfg = ExperimentConfig {
        coulomb: Some(1.0),
        energies: vec![1e-2],
        ..ExperimentConfig::default()
    };
    let mut out = Vec::new();
    write_csv(&run_sweep(&cfg).unwrap(), &mut out).unwrap();
    let rows = read_csv(out.as_slice()).unwrap();
    let total = rows.iter().find(|r| r.l == -1).unwrap();
    assert_eq!(total.count, 30);
    assert_eq!(total.e, 1e-2);
}

#[test]
fn zero_potential_compares_exactly() {
    let cfg = ExperimentConfig {
        energies: parse_energies("1e-5:1e-2:4").unwrap(),
        ..ExperimentConfig::default()
    };
    let s = run_compare(&cfg).unwrap().comparison.unwrap();
    assert_eq!((s.pairs, s.exact), (4, 4));
}

#[test]
fn bad_energy_order_is_a_config_error() {
    let cfg = ExperimentConfig {
        energies: vec![1e-4, 1e-2],
        ..ExperimentConfig::default()
    };
    assert_eq!(run_sweep(&cfg).unwrap_err().exit_code(), 1);
}

#[test]
fn numerical_failure_maps_to_exit_two() {
    let cfg = ExperimentConfig {
        lambda: 1.0,
        beta: 0.5,
        ..ExperimentConfig::default()
    };
    assert_eq!(run_sweep(&cfg).unwrap_err().exit_code(), 2);
}
