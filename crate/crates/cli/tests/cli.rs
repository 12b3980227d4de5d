use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nlaqkd"))
        .args(args)
        .output()
        .expect("spawn nlaqkd")
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

/// Header plus rows as optional numbers (blank cells become `None`).
fn table(csv: &str) -> (Vec<String>, Vec<Vec<Option<f64>>>) {
    let mut lines = csv.lines();
    let header = lines.next().unwrap().split(',').map(str::to_string).collect();
    let rows = lines.map(|l| l.split(',').map(|c| c.parse().ok()).collect()).collect();
    (header, rows)
}

fn column(csv: &str, name: &str) -> Vec<Option<f64>> {
    let (header, rows) = table(csv);
    let i = header.iter().position(|h| h == name).unwrap();
    rows.into_iter().map(|r| r[i]).collect()
}

fn cell<'a>(csv: &'a str, name: &str) -> &'a str {
    let mut lines = csv.lines();
    let i = lines.next().unwrap().split(',').position(|h| h == name).unwrap();
    lines.next().unwrap().split(',').nth(i).unwrap()
}

#[test]
fn keyrate_examples() {
    let out = stdout(&["keyrate", "--va", "0.25", "--beta", "1", "--loss-db", "0", "--eps", "0"]);
    assert!((cell(&out, "rate").parse::<f64>().unwrap() - 0.134153).abs() < 1e-4);
    assert_eq!(cell(&out, "status"), "Physical");

    let out = stdout(&["keyrate", "--va", "0", "--beta", "0.8", "--loss-db", "3", "--eps", "0"]);
    assert_eq!(cell(&out, "mutual_information").parse::<f64>().unwrap(), 0.0);

    let out = stdout(&[
        "keyrate",
        "--va",
        "0.25",
        "--beta",
        "0.8",
        "--loss-db",
        "1",
        "--eps",
        "0.002",
        "--gain",
        "4",
    ]);
    assert_eq!(cell(&out, "status"), "UnphysicalNlaMapping");
    assert_eq!(cell(&out, "rate"), "");
    assert!(cell(&out, "g_max").parse::<f64>().unwrap() < 4.0);
}

#[test]
fn keyrate_distance_matches_loss() {
    let a = stdout(&["keyrate", "--distance-km", "50"]);
    let b = stdout(&["keyrate", "--loss-db", "10"]);
    assert_eq!(a, b);
}

#[test]
fn output_is_lf_csv_with_header() {
    let out = stdout(&["gmax", "--grid", "0:2:1"]);
    assert!(!out.contains('\r'));
    assert!(out.starts_with("loss_db,g_max\n"));
    assert_eq!(out.lines().count(), 4);
}

#[test]
fn gmax_examples() {
    let g = column(&stdout(&["gmax", "--eps", "0", "--grid", "6.0206:6.0206:1"]), "g_max");
    assert!((g[0].unwrap() - 2.0).abs() < 1e-6);
    let g = column(&stdout(&["gmax", "--grid", "10:10:1"]), "g_max");
    assert!((g[0].unwrap() - 3.134_372_8).abs() < 1e-6);
    let g: Vec<f64> = column(&stdout(&["gmax"]), "g_max")
        .into_iter()
        .map(Option::unwrap)
        .collect();
    assert_eq!(g.len(), 61);
    assert!(g.windows(2).all(|w| w[0] < w[1]));
}

fn first_nonpositive(loss: &[Option<f64>], rate: &[Option<f64>]) -> f64 {
    let mut seen = false;
    for (l, r) in loss.iter().zip(rate) {
        match r {
            Some(x) if *x > 0.0 => seen = true,
            _ if seen => return l.unwrap(),
            _ => {}
        }
    }
    panic!("no crossing")
}

#[test]
fn sweep_shows_amplified_key_past_the_original_cutoff() {
    let out = stdout(&["sweep", "--grid", "0:80:0.25"]);
    let loss = column(&out, "loss_db");
    let orig = column(&out, "rate_original");
    let amp = column(&out, "rate_nla");
    let cut_orig = first_nonpositive(&loss, &orig);
    let cut_amp = first_nonpositive(&loss, &amp);
    assert!((cut_amp - cut_orig - 12.04).abs() < 1.0, "{cut_orig} {cut_amp}");
    let i = loss.iter().position(|l| l.unwrap() >= cut_orig + 6.0).unwrap();
    assert!(orig[i].unwrap() < 0.0 && amp[i].unwrap() > 0.0);
}

#[test]
fn unit_gain_sweep_equals_original() {
    let out = stdout(&["sweep", "--gain", "1", "--grid", "0:60:1.5"]);
    for (a, b) in column(&out, "rate_original").iter().zip(column(&out, "rate_nla")) {
        assert_eq!(*a, b);
    }
}

#[test]
fn sweep_crossings_order_with_gain() {
    let mut cuts = Vec::new();
    for g in ["2", "3", "4"] {
        let out = stdout(&["sweep", "--gain", g, "--grid", "40:80:0.05"]);
        cuts.push(first_nonpositive(&column(&out, "loss_db"), &column(&out, "rate_nla")));
    }
    assert!(cuts[0] < cuts[1] && cuts[1] < cuts[2], "{cuts:?}");
    assert!((cuts[2] - cuts[0] - 20.0 * 2f64.log10()).abs() < 0.5);
    assert!((cuts[1] - cuts[0] - 20.0 * 1.5f64.log10()).abs() < 0.5);
}

#[test]
fn success_probability_is_a_pure_rescaling() {
    let grid = ["--grid", "10:70:2.5"];
    let unit = column(&stdout(&["sweep", "--psuccess", "1", grid[0], grid[1]]), "rate_nla");
    for (flag, p) in [("inverse-g2", 1.0 / 16.0), ("0.3", 0.3)] {
        let scaled = column(&stdout(&["sweep", "--psuccess", flag, grid[0], grid[1]]), "rate_nla");
        for (u, s) in unit.iter().zip(&scaled) {
            match (u, s) {
                (Some(u), Some(s)) => assert!((s - p * u).abs() <= 1e-8 * s.abs(), "{s} vs {p}·{u}"),
                (None, None) => {}
                _ => panic!("definedness differs"),
            }
        }
    }
}

#[test]
fn frontier_dominance_and_cutoff() {
    let out = stdout(&["frontier"]);
    let loss = column(&out, "loss_db");
    let orig = column(&out, "eps_max_original");
    let amp = column(&out, "eps_max_nla");
    for i in 0..loss.len() {
        if let (Some(o), Some(a)) = (orig[i], amp[i]) {
            if o > 0.0 {
                assert!(a >= o, "{:?}", loss[i]);
            }
        }
    }
    let last = loss.len() - 1;
    assert_eq!(loss[last], Some(100.0));
    assert_eq!(orig[last], Some(0.0));
    assert!(amp[last].unwrap() > 0.0);
}

#[test]
fn halving_tolerance_moves_frontier_less_than_tolerance() {
    let a = stdout(&["frontier", "--grid", "20:60:10"]);
    let b = stdout(&["frontier", "--grid", "20:60:10", "--tol", "5e-7"]);
    for name in ["eps_max_original", "eps_max_nla"] {
        for (x, y) in column(&a, name).iter().zip(column(&b, name)) {
            assert!((x.unwrap() - y.unwrap()).abs() < 1e-6);
        }
    }
}

#[test]
fn output_is_deterministic() {
    let args = ["sweep", "--grid", "0:80:0.5"];
    let a = stdout(&args);
    let b = stdout(&args);
    let serial = Command::new(env!("CARGO_BIN_EXE_nlaqkd"))
        .args(args)
        .env("RAYON_NUM_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(a, b);
    assert_eq!(a.as_bytes(), &serial.stdout[..]);
    assert_eq!(stdout(&["frontier"]), stdout(&["frontier"]));
}

#[test]
fn verify_passes_with_defaults() {
    let out = stdout(&["verify"]);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "check,max_deviation,tolerance,status");
    assert!(lines[1..].iter().all(|l| l.ends_with(",pass")), "{out}");
    let z = lines.iter().find(|l| l.starts_with("correlation_z,")).unwrap();
    assert!(z.split(',').nth(1).unwrap().parse::<f64>().unwrap() < 1e-8);
    stdout(&["verify", "--gain", "2", "--lambda2", "0.01"]);
}

#[test]
fn verify_reports_truncation() {
    let out = run(&["verify", "--cutoff", "4", "--alpha2", "1"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("truncation"));
}

#[test]
fn usage_errors_exit_2() {
    let bad: [&[&str]; 10] = [
        &["keyrate", "--beta", "1.5"],
        &["keyrate", "--va", "0.2", "--alpha2", "0.1"],
        &["keyrate", "--loss-db", "1", "--distance-km", "5"],
        &["sweep", "--grid", "10:0:1"],
        &["sweep", "--axis", "time"],
        &["gmax", "--grid", "0:1:0"],
        &["frontier", "--gain", "0.5"],
        &["frontier", "--psuccess", "2"],
        &["verify", "--lambda2", "1"],
        &["nosuch"],
    ];
    for args in bad {
        assert_eq!(run(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn config_file_with_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    std::fs::write(&path, "va = 0.5\neps = 0.01\nloss-db = 10\ngrid = \"0:1:1\"\n").unwrap();
    let cfg = path.to_str().unwrap();

    let from_config = stdout(&["keyrate", "--config", cfg]);
    assert_eq!(
        from_config,
        stdout(&["keyrate", "--va", "0.5", "--eps", "0.01", "--loss-db", "10"])
    );

    let overridden = stdout(&["keyrate", "--config", cfg, "--eps", "0"]);
    assert_eq!(
        overridden,
        stdout(&["keyrate", "--va", "0.5", "--eps", "0", "--loss-db", "10"])
    );

    let swapped = stdout(&["keyrate", "--config", cfg, "--alpha2", "0.125", "--distance-km", "5"]);
    assert_eq!(
        swapped,
        stdout(&["keyrate", "--va", "0.25", "--eps", "0.01", "--loss-db", "1"])
    );

    std::fs::write(&path, "bogus = 1\n").unwrap();
    assert_eq!(run(&["keyrate", "--config", cfg]).status.code(), Some(2));
    assert_eq!(
        run(&["keyrate", "--config", "/nonexistent/cfg.toml"]).status.code(),
        Some(2)
    );
}

#[test]
fn output_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.csv");
    let out = run(&["gmax", "--grid", "0:1:0.5", "--output", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    assert_eq!(
        std::fs::read_to_string(&path).unwrap(),
        stdout(&["gmax", "--grid", "0:1:0.5"])
    );
}
