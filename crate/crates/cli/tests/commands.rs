use std::path::Path;
use std::process::{Command, Output};

fn nlwave(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nlwave")).args(args).output().expect("spawn nlwave")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn field<'a>(text: &'a str, key: &str) -> &'a str {
    text.lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix(" = ")))
        .unwrap_or_else(|| panic!("no {key} in {text}"))
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

fn cubic_config(dir: &Path) -> String {
    let out = dir.join("out");
    write_config(
        dir,
        "cubic.toml",
        &format!(
            "[nonlinearity]\ntaylor = {{ 3 = 1.0 }}\n\n[frequency]\nomega = 1.002\n\n\
             [search]\nn = 1\ndim = 8\npartners = true\n\n[output]\ndir = {:?}\n",
            out.to_str().unwrap()
        ),
    )
}

#[test]
fn analyze_f_reports_the_three_examples() {
    let o = nlwave(&["analyze-f", "--coeffs", "3=1"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert_eq!(field(&s, "case"), "odd");
    assert_eq!(field(&s, "q"), "3");
    assert_eq!(field(&s, "side"), "omega > 1");

    let s = stdout(&nlwave(&["analyze-f", "--coeffs", "2=1"]));
    assert_eq!(field(&s, "case"), "N2");
    assert_eq!(field(&s, "q"), "3");
    assert_eq!(field(&s, "side"), "omega < 1");

    let s = stdout(&nlwave(&["analyze-f", "--coeffs", "2=1,3=0.7"]));
    assert_eq!(field(&s, "case"), "N3");
    assert_eq!(field(&s, "d"), "3");

    let s = stdout(&nlwave(&["analyze-f", "--coeffs", "2:2=1,3=0.7"]));
    assert_eq!(field(&s, "p"), "2");
    assert_eq!(nlwave(&["analyze-f", "--coeffs", "3:2=1,3=0.7"]).status.code(), Some(2));
}

#[test]
fn analyze_f_rejects_bad_coefficients() {
    for bad in ["", "x=1", "1=1", "3=abc", "4:2=1"] {
        assert_eq!(nlwave(&["analyze-f", "--coeffs", bad]).status.code(), Some(2), "{bad:?}");
    }
}

#[test]
fn freq_lists_admissible_indices() {
    let o = nlwave(&["freq", "--omega", "1.0001", "--lmax", "720", "--coeffs", "3=1"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    let ns: Vec<usize> = field(&s, "admissible").split(',').map(|x| x.parse().unwrap()).collect();
    assert!(ns.len() >= 5);
    assert_eq!(ns, (1..=ns.len()).collect::<Vec<_>>());
    assert_eq!(field(&s, "n_omega").parse::<usize>().unwrap(), ns.len());
    assert_eq!(nlwave(&["freq", "--omega", "3.0", "--lmax", "8"]).status.code(), Some(2));
}

#[test]
fn solve_writes_accepted_deterministic_records() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = cubic_config(dir.path());
    let o = nlwave(&["solve", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rec = dir.path().join("out/record_n1.json");
    let first = std::fs::read(&rec).unwrap();
    let doc: serde_json::Value = serde_json::from_slice(&first).unwrap();
    for key in [
        "version", "omega", "eps", "gamma", "n", "q", "case", "xi", "w_coeffs", "h1", "sup", "energy",
        "residual", "phi", "predicted_level", "accepted",
    ] {
        assert!(doc.get(key).is_some(), "missing {key}");
    }
    assert_eq!(doc["accepted"], true);
    assert!(doc["residual"].as_f64().unwrap() <= 1e-8);
    assert!(dir.path().join("out/record_n1_partner.json").exists());

    assert_eq!(nlwave(&["solve", "--config", &cfg]).status.code(), Some(0));
    assert_eq!(std::fs::read(&rec).unwrap(), first);

    let rec = rec.to_str().unwrap();
    let o = nlwave(&["evolve", "--record", rec, "--periods", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let s = stdout(&o);
    assert!(field(&s, "return_error_1").parse::<f64>().unwrap() <= 1e-4);
    assert_eq!(field(&s, "witness"), "true");

    let s = stdout(&nlwave(&["export", "--record", rec, "--format", "csv", "--nt", "4", "--nx", "8"]));
    let mut lines = s.lines();
    assert_eq!(lines.next(), Some("t,x,u"));
    assert_eq!(lines.count(), 4 * 9);
    let s = stdout(&nlwave(&["export", "--record", rec, "--format", "spectrum"]));
    assert_eq!(s.lines().next(), Some("l,j,coeff"));
    let row: Vec<&str> = s.lines().nth(1).unwrap().split(',').collect();
    assert_eq!((row[0], row[1]), ("0", "1"));
    let mantissa = row[2].trim_start_matches('-').split('e').next().unwrap();
    assert_eq!(mantissa.replace('.', "").len(), 17);
}

#[test]
fn resonant_frequency_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "res.toml",
        &format!(
            "[nonlinearity]\ntaylor = {{ 3 = 1.0 }}\n[frequency]\nomega = 1.5\nl_max = 8\n[search]\nn = 1\ndim = 4\n\
             [output]\ndir = {:?}\n",
            dir.path().join("out").to_str().unwrap()
        ),
    );
    let o = nlwave(&["solve", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!String::from_utf8_lossy(&o.stderr).is_empty());
    assert!(!dir.path().join("out").exists());
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "bad.toml",
        "[nonlinearity]\ntaylor = { 3 = 1.0 }\n[frequency]\nomega = 1.01\n[search]\nn = 1\ntolerance = 3\n",
    );
    assert_eq!(nlwave(&["solve", "--config", &cfg]).status.code(), Some(2));
    let missing = dir.path().join("none.toml");
    assert_eq!(nlwave(&["solve", "--config", missing.to_str().unwrap()]).status.code(), Some(2));
    assert_eq!(nlwave(&["bogus"]).status.code(), Some(2));
}

#[test]
fn scan_of_empty_set_is_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "scan.toml",
        "[nonlinearity]\ntaylor = { 3 = 1.0 }\n[frequency]\nomega_range = { start = 0.95, stop = 0.99, count = 3 }\n\
         [search]\nn_max = 3\ndim = 4\n",
    );
    let o = nlwave(&["scan", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        stdout(&o),
        "omega,gamma,n_omega,n,status,h1,sup,energy,residual,phi,predicted_level,accepted\n"
    );
}

#[test]
fn scan_table_is_sorted_and_feeds_loglog_export() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("scan.csv");
    let cfg = write_config(
        dir.path(),
        "scan.toml",
        &format!(
            "[nonlinearity]\ntaylor = {{ 3 = 1.0 }}\n[frequency]\n\
             omega_range = {{ start = 1.004, stop = 1.001, count = 3, spacing = \"geometric\" }}\nl_max = 64\n\
             [search]\nn_max = 2\ndim = 8\n[output]\ntable = {:?}\n",
            table.to_str().unwrap()
        ),
    );
    let o = nlwave(&["scan", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&table).unwrap();
    let rows: Vec<(f64, usize)> = text
        .lines()
        .skip(1)
        .map(|l| {
            let c: Vec<&str> = l.split(',').collect();
            (c[0].parse().unwrap(), c[3].parse().unwrap())
        })
        .collect();
    assert!(rows.len() >= 3);
    assert!(rows.windows(2).all(|w| w[0].0 < w[1].0 || (w[0].0 == w[1].0 && w[0].1 < w[1].1)));

    let o = nlwave(&["export", "--table", table.to_str().unwrap(), "--format", "loglog"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    let pts: Vec<(f64, f64)> = s
        .lines()
        .skip(1)
        .filter(|l| l.starts_with("1,"))
        .map(|l| {
            let c: Vec<&str> = l.split(',').collect();
            (c[3].parse().unwrap(), c[4].parse().unwrap())
        })
        .collect();
    assert_eq!(pts.len(), 3);
    let slope = (pts[2].1 - pts[0].1) / (pts[2].0 - pts[0].0);
    assert!((slope - 0.5).abs() < 0.05, "{slope}");
}

#[test]
fn verify_reports_and_exit_codes() {
    let o = nlwave(&["verify", "--suite", "orthogonality,kappa", "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    let lines: Vec<&str> = s.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[0].starts_with("kappa PASS"));
    assert!(lines[1].starts_with("orthogonality PASS"));
    assert_eq!(stdout(&nlwave(&["verify", "--suite", "orthogonality,kappa", "--seed", "3"])), s);
    assert_eq!(nlwave(&["verify", "--suite", "no_such_check"]).status.code(), Some(2));
}

#[test]
fn export_and_evolve_reject_missing_records() {
    assert_eq!(nlwave(&["export", "--record", "/nonexistent.json", "--format", "csv"]).status.code(), Some(2));
    assert_eq!(nlwave(&["evolve", "--record", "/nonexistent.json"]).status.code(), Some(2));
}
