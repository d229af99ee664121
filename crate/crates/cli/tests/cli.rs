use std::path::Path;
use std::process::{Command, Output};

fn haarqmc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_haarqmc")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn generate_verify_and_check_exactness() {
    let dir = tempfile::tempdir().unwrap();
    let net = dir.path().join("faure.txt");
    stdout(&haarqmc(&["net", "gen", "--kind", "faure", "--b", "3", "--m", "2", "--s", "2", "--out", path(&net)]));
    let text = std::fs::read_to_string(&net).unwrap();
    assert!(text.starts_with("3 2 2 9\n"));
    let v = stdout(&haarqmc(&["net", "verify", "--in", path(&net)]));
    assert_eq!(v, "b=3 m=2 s=2 t=0 verified=true\nwitness none\n");
    let e = stdout(&haarqmc(&["exactness", "--in", path(&net), "--t", "0"]));
    assert!(e.starts_with("max_deviation 0 (0)\n"), "{e}");
}

#[test]
fn matrices_generator_and_witness() {
    let dir = tempfile::tempdir().unwrap();
    let mats = dir.path().join("g.txt");
    std::fs::write(&mats, "10\n01\n\n10\n01\n").unwrap();
    let net = dir.path().join("diag.txt");
    stdout(&haarqmc(&["net", "gen", "--kind", "matrices", "--b", "2", "--m", "2", "--s", "2", "--matrices", path(&mats), "--out", path(&net)]));
    let v = stdout(&haarqmc(&["net", "verify", "--in", path(&net), "--t", "0"]));
    assert!(v.starts_with("b=2 m=2 s=2 t=0 verified=false\nwitness j=["), "{v}");
    let e = stdout(&haarqmc(&["exactness", "--in", path(&net), "--t", "0"]));
    assert!(!e.starts_with("max_deviation 0 "), "{e}");
    assert!(!e.contains("witness none"));
}

#[test]
fn csv_values_match_single_shot_commands() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.cfg");
    std::fs::write(
        &cfg,
        "output = rows.csv\n[experiment]\nname = vdc\ngenerator = vdc\nb = 2\nm = 2..6\nalpha = 0.75\np = 2\nq = 2\nmethods = upper, lower, hilbert, discrepancy\n",
    )
    .unwrap();
    let summary = stdout(&haarqmc(&["run", "--config", path(&cfg)]));
    assert!(summary.contains("fit vdc b=2 s=1 alpha=0.75 p=2 q=2 method=hilbert exponent="), "{summary}");
    let csv = std::fs::read_to_string(dir.path().join("rows.csv")).unwrap();
    let again = dir.path().join("again.csv");
    stdout(&haarqmc(&["run", "--config", path(&cfg), "--out", path(&again)]));
    assert_eq!(csv, std::fs::read_to_string(&again).unwrap());

    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("b,s,t,m,N,alpha,p,q,method,value,tail,seconds"));
    let net = dir.path().join("vdc4.txt");
    stdout(&haarqmc(&["net", "gen", "--kind", "vdc", "--b", "2", "--m", "4", "--out", path(&net)]));
    let common = ["--in", path(&net), "--alpha", "0.75", "--p", "2", "--q", "2"];
    for line in lines.filter(|l| l.starts_with("2,1,0,4,16,")) {
        let f: Vec<&str> = line.split(',').collect();
        let (method, value, tail) = (f[8], f[9], f[10]);
        assert_eq!(f[11], "");
        let single = match method {
            "upper" => {
                let out = stdout(&haarqmc(&[&["wce"], &common[..], &["--mode", "upper"]].concat()));
                let parts: Vec<String> = out.split_whitespace().map(str::to_string).collect();
                assert_eq!(parts[1], tail);
                parts[2].clone()
            }
            "lower" | "hilbert" => stdout(&haarqmc(&[&["wce"], &common[..], &["--mode", method]].concat())).trim().to_string(),
            "discrepancy" => {
                let out = stdout(&haarqmc(&[
                    "discrepancy", "--in", path(&net), "--alpha", "0.75", "--pprime", "2", "--qprime", "2", "--method", "warnock",
                ]));
                out.split_whitespace().next().unwrap().to_string()
            }
            other => panic!("unexpected method {other}"),
        };
        assert_eq!(single, value, "{method}");
    }
}

#[test]
fn sharpness_prints_ratio_and_discrepancy() {
    let dir = tempfile::tempdir().unwrap();
    let net = dir.path().join("n.txt");
    stdout(&haarqmc(&["net", "gen", "--kind", "faure", "--b", "2", "--m", "3", "--s", "1", "--out", path(&net)]));
    let out = stdout(&haarqmc(&["sharpness", "--in", path(&net), "--alpha", "0.75", "--p", "2", "--q", "2", "--panels", "64"]));
    let v: Vec<f64> = out.split_whitespace().map(|t| t.parse().unwrap()).collect();
    assert!(v[0] >= 0.99 && v[0] <= 1.0 + 1e-9, "{out}");
    let d = stdout(&haarqmc(&["discrepancy", "--in", path(&net), "--alpha", "0.75", "--pprime", "2", "--qprime", "2", "--method", "warnock"]));
    assert_eq!(d.split_whitespace().next().unwrap().parse::<f64>().unwrap(), v[1]);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "[experiment]\ngenerator = faure\nb = 2\nm = 6..3\nalpha = 1\np = 2\nq = 2\nmethods = upper\n").unwrap();
    let o = haarqmc(&["run", "--config", path(&cfg)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("config line 4"));

    let net = dir.path().join("n.txt");
    stdout(&haarqmc(&["net", "gen", "--kind", "faure", "--b", "2", "--m", "3", "--s", "1", "--out", path(&net)]));
    let o = haarqmc(&["wce", "--in", path(&net), "--alpha", "0.4", "--p", "2", "--q", "inf", "--mode", "hilbert"]);
    assert_eq!(o.status.code(), Some(2));
    let o = haarqmc(&["sharpness", "--in", path(&net), "--alpha", "0.5", "--p", "2", "--q", "2"]);
    assert_eq!(o.status.code(), Some(2));

    let big = dir.path().join("big.txt");
    stdout(&haarqmc(&["net", "gen", "--kind", "faure", "--b", "3", "--m", "6", "--s", "3", "--out", path(&big)]));
    let o = haarqmc(&["discrepancy", "--in", path(&big), "--alpha", "0.75", "--pprime", "2", "--qprime", "2", "--method", "quad"]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));

    let o = haarqmc(&["wce", "--in", path(&dir.path().join("missing.txt")), "--alpha", "1", "--p", "2", "--q", "2"]);
    assert_eq!(o.status.code(), Some(1));
}
