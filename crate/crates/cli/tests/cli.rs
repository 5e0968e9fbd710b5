use std::process::{Command, Output};

fn wronsk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wronsk"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Data rows of a CSV with `#` comments, as strings.
fn records(text: &str) -> Vec<Vec<String>> {
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes())
        .records()
        .map(|r| r.unwrap().iter().map(str::to_string).collect())
        .collect()
}

fn column(text: &str, i: usize) -> Vec<f64> {
    records(text)
        .iter()
        .map(|r| r[i].parse().unwrap())
        .collect()
}

#[test]
fn solve_poschl_teller() {
    let o = wronsk(&["solve", "--builtin", "poschl_teller", "--param", "v0=6"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("# command: solve\n"));
    assert!(text.contains("\nn,energy,parity,B_div,residual,bracket_width,low_confidence\n"));
    assert!(!text.contains('\r'));
    let e = column(&text, 1);
    assert_eq!(e.len(), 3);
    for (got, want) in e.iter().zip([-4.5, -2.0, -0.5]) {
        assert!((got - want).abs() < 1e-6);
    }
    let parities: Vec<String> = records(&text).into_iter().map(|r| r[2].clone()).collect();
    assert_eq!(parities, ["even", "odd", "even"]);
}

#[test]
fn solve_gaussian_ground_state() {
    let o = wronsk(&[
        "solve",
        "--builtin",
        "gaussian",
        "--param",
        "v0=5",
        "--brent",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!((column(&stdout(&o), 1)[0] + 3.6077).abs() < 1e-3);
}

#[test]
fn empty_spectrum_is_success() {
    let o = wronsk(&["solve", "--expr", "0*x", "--no-header"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        stdout(&o),
        "n,energy,parity,B_div,residual,bracket_width,low_confidence\n"
    );
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["solve"][..],
        &["solve", "--builtin", "nope"],
        &["solve", "--builtin", "gaussian", "--expr", "x"],
        &["solve", "--expr", "x+"],
        &[
            "solve",
            "--builtin",
            "gaussian",
            "--param",
            "v0=5",
            "--h",
            "0.5",
        ],
        &[
            "solve",
            "--builtin",
            "gaussian",
            "--param",
            "v0=5",
            "--tol",
            "1e-20",
        ],
        &["bogus"],
        &[
            "wavefunction",
            "--builtin",
            "gaussian",
            "--param",
            "v0=5",
            "--energy",
            "-1",
            "--mixture",
            "0,0",
        ],
        &[
            "scan",
            "--mode",
            "x",
            "--builtin",
            "gaussian",
            "--param",
            "v0=5",
        ],
    ] {
        let o = wronsk(args);
        assert_eq!(
            o.status.code(),
            Some(2),
            "{args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
    }
}

#[test]
fn missing_state_exits_one() {
    let o = wronsk(&[
        "wavefunction",
        "--builtin",
        "poschl_teller",
        "--param",
        "v0=6",
        "--state",
        "3",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("only 3 bound states"));
}

#[test]
fn critical_couplings_of_both_wells() {
    let o = wronsk(&[
        "critical",
        "--builtin",
        "poschl_teller",
        "--param",
        "v0=1",
        "--range",
        "0.2:10",
    ]);
    let v = column(&stdout(&o), 1);
    assert_eq!(v.len(), 3);
    for (got, want) in v.iter().zip([1.0, 3.0, 6.0]) {
        assert!((got - want).abs() < 1e-4);
    }
    let o = wronsk(&["critical", "--expr", "-exp(-x^2)"]);
    let v = column(&stdout(&o), 1);
    for (got, want) in v.iter().zip([1.342, 4.325, 8.898]) {
        assert!((got - want).abs() < 5e-3);
    }
    let o = wronsk(&["critical", "--builtin", "gaussian", "--n-scan", "100"]);
    assert_eq!(column(&stdout(&o), 1).len(), 3);
    let o = wronsk(&["critical", "--builtin", "gaussian", "--coupling", "depth"]);
    assert_eq!(o.status.code(), Some(2));
    let o = wronsk(&["critical", "--expr", "0*x"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(records(&stdout(&o)).is_empty());
}

#[test]
fn wavefunction_footer_reports_tail() {
    let o = wronsk(&[
        "wavefunction",
        "--builtin",
        "gaussian",
        "--param",
        "v0=5",
        "--energy",
        "-3.6077",
        "--x-eval",
        "5",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let (_, k, b) = wronsk::export::parse_wavefunction_footer(&stdout(&o)).unwrap();
    assert!((k - 2.686).abs() < 1e-3);
    assert!((5e-7..=5e-6).contains(&b.unwrap()));
}

#[test]
fn ground_state_wavefunction_is_monotone_to_truncation() {
    let o = wronsk(&[
        "wavefunction",
        "--builtin",
        "poschl_teller",
        "--param",
        "v0=6",
        "--state",
        "0",
    ]);
    let text = stdout(&o);
    let (truncation, _, _) = wronsk::export::parse_wavefunction_footer(&text).unwrap();
    let rows: Vec<(f64, f64)> = records(&text)
        .iter()
        .map(|r| (r[0].parse().unwrap(), r[1].parse().unwrap()))
        .filter(|&(x, _): &(f64, f64)| x >= 0.0 && x <= truncation)
        .collect();
    assert!(rows.len() > 100);
    assert!(rows.windows(2).all(|w| w[1].1.abs() <= w[0].1.abs()));
}

#[test]
fn energy_scan_changes_sign_at_exact_levels() {
    let o = wronsk(&[
        "scan",
        "--builtin",
        "poschl_teller",
        "--param",
        "v0=6",
        "--x-eval",
        "5",
    ]);
    let table = wronsk::export::read_scan_table(stdout(&o).as_bytes()).unwrap();
    let mut roots: Vec<(f64, f64)> = table
        .brackets(0)
        .into_iter()
        .chain(table.brackets(1))
        .collect();
    roots.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    assert_eq!(roots.len(), 3);
    for ((lo, hi), e) in roots.iter().zip([-4.5, -2.0, -0.5]) {
        assert!(
            *lo <= e + 1e-4 && e - 1e-4 <= *hi,
            "[{lo}, {hi}] misses {e}"
        );
    }
}

#[test]
fn parallel_output_is_byte_identical() {
    let args = [
        "scan",
        "--mode",
        "coupling",
        "--builtin",
        "gaussian",
        "--param",
        "v0=1",
        "--n-scan",
        "50",
    ];
    let serial = wronsk(&args);
    let mut threaded = args.to_vec();
    threaded.extend(["--jobs", "4"]);
    assert_eq!(serial.stdout, wronsk(&threaded).stdout);
}

#[test]
fn output_file_and_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("levels.csv");
    let o = wronsk(&[
        "oracle",
        "--v0",
        "6",
        "--no-header",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(
        text,
        "n,energy\n0,-4.5000000000000000e0\n1,-2.0000000000000000e0\n2,-5.0000000000000000e-1\n"
    );
}

#[test]
fn x_mode_scan_covers_range() {
    let o = wronsk(&[
        "scan",
        "--mode",
        "x",
        "--builtin",
        "poschl_teller",
        "--param",
        "v0=2.5",
        "--energy",
        "-1",
        "--range",
        "4:5",
    ]);
    let x = column(&stdout(&o), 0);
    assert_eq!(x.len(), 101);
    assert!((x[0] - 4.0).abs() < 1e-9 && (x[100] - 5.0).abs() < 1e-9);
}
