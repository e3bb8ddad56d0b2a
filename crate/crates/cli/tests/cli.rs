use std::path::Path;
use std::process::{Command, Output};

fn fraclap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fraclap"))
        .args(args)
        .output()
        .expect("spawn fraclap")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn weights_table_is_symmetric_and_carries_the_diagonal() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("w.csv");
    let o = fraclap(&[
        "weights",
        "--sigma",
        "1",
        "--h",
        "0.5",
        "--radius",
        "3",
        "--out",
        p(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "j,kappa");
    assert!(lines.last().unwrap().starts_with("DIAGONAL_MASS,"));
    let kappa: Vec<(i64, f64)> = lines[1..lines.len() - 1]
        .iter()
        .map(|l| {
            let (j, k) = l.split_once(',').unwrap();
            (j.parse().unwrap(), k.parse().unwrap())
        })
        .collect();
    assert_eq!(kappa.len(), 6);
    for &(j, k) in &kappa {
        assert!(k > 0.0);
        let mirror = kappa.iter().find(|m| m.0 == -j).unwrap();
        assert_eq!(mirror.1, k);
    }
}

#[test]
fn apply_reads_a_sampled_function() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("u.csv");
    let out = dir.path().join("lu.csv");
    let mut s = String::from("x,u\n");
    for i in -8..=8 {
        let x = i as f64 * 0.5;
        s.push_str(&format!("{x},{}\n", 1.0 / (1.0 + x * x)));
    }
    std::fs::write(&input, s).unwrap();
    let o = fraclap(&[
        "apply",
        "--sigma",
        "1",
        "--h",
        "0.5",
        "--in",
        p(&input),
        "--out",
        p(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 18);
    // the peak is pulled down
    let mid: f64 = text
        .lines()
        .nth(9)
        .unwrap()
        .split(',')
        .nth(1)
        .unwrap()
        .parse()
        .unwrap();
    assert!(mid < 0.0);
}

#[test]
fn apply_rejects_off_grid_points() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("u.csv");
    std::fs::write(&input, "x,u\n0,1\n0.3,1\n1,1\n").unwrap();
    let o = fraclap(&[
        "apply",
        "--sigma",
        "1",
        "--h",
        "0.5",
        "--in",
        p(&input),
        "--out",
        p(&dir.path().join("o")),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

const CONFIG: &str = "sigma = 1.5
h = 0.125
domain = -4, 4
scheme = explicit
t_final = 0.5
nonlinearity = F2
initial = g1
snapshot_times = 0.25
";

#[test]
fn solve_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, CONFIG).unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for out in [&a, &b] {
        let o = fraclap(&["solve", "--config", p(&cfg), "--out", p(out)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let a = std::fs::read(&a).unwrap();
    assert_eq!(a, std::fs::read(&b).unwrap());
    let text = String::from_utf8(a).unwrap();
    assert!(text.starts_with("t,x,u\n"));
    // the requested snapshot and the final state
    assert_eq!(text.lines().count(), 1 + 2 * 65);
}

#[test]
fn invalid_input_exits_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("w.csv");
    let o = fraclap(&[
        "weights",
        "--sigma",
        "3",
        "--h",
        "0.5",
        "--radius",
        "3",
        "--out",
        p(&out),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!out.exists());

    let cfg = dir.path().join("bad.cfg");
    std::fs::write(
        &cfg,
        CONFIG.replace("scheme = explicit", "scheme = leapfrog"),
    )
    .unwrap();
    let o = fraclap(&["solve", "--config", p(&cfg), "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(2));

    let o = fraclap(&["experiment", "nope"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn blow_up_exits_with_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("blow.cfg");
    std::fs::write(
        &cfg,
        "sigma = 1\nh = 0.5\ndomain = -5, 5\nscheme = explicit\nt_final = 2000\n\
         tau_rule = fixed\ntau = 2\ncfl_override = true\nnonlinearity = F1\ninitial = g2\n",
    )
    .unwrap();
    let o = fraclap(&[
        "solve",
        "--config",
        p(&cfg),
        "--out",
        p(&dir.path().join("o.csv")),
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("non-finite"));
}

#[test]
fn experiment_writes_a_table_that_rates_can_read() {
    let dir = tempfile::tempdir().unwrap();
    let o = fraclap(&["experiment", "exp4b", "--out", p(dir.path())]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let table = dir.path().join("exp4b.csv");
    assert!(table.exists());
    let o = fraclap(&["rates", "--in", p(&table)]);
    assert!(o.status.success());
    let shown = String::from_utf8(o.stdout).unwrap();
    assert!(shown.lines().next().unwrap().contains("rate"));
    // second-order convergence for τ = h²
    let last: f64 = shown
        .lines()
        .last()
        .unwrap()
        .split_whitespace()
        .last()
        .unwrap()
        .parse()
        .unwrap();
    assert!((last - 2.0).abs() < 0.6, "{shown}");
}
