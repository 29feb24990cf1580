use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn inflart(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_inflart"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn synth_then_sweep_cv_report_and_dump() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    let o = inflart(&["synth", "--n-classes", "3", "--n-lexemes", "40", "--n-cells", "3", "--out", path(out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let data = out.join("synthetic.tsv");
    assert!(data.exists() && out.join("synthetic_suffixes.tsv").exists());

    let conf = out.join("run.conf");
    fs::write(
        &conf,
        format!(
            "# synthetic lexicon\ndata = {}\nformat = simple_tsv\nvigilance_min = 0.0\nvigilance-max = 0.2\nvigilance-step = 0.05\npermutations = 2\nfolds = 4\n",
            data.display()
        ),
    )
    .unwrap();
    let sweep_dir = out.join("sweep");
    let o = inflart(&["sweep", "--config", path(&conf), "--out", path(&sweep_dir)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("best vigilance"));
    let detail = fs::read_to_string(sweep_dir.join("sweep_detail.csv")).unwrap();
    assert_eq!(detail.lines().count(), 1 + 5 * 2);
    for f in ["sweep_summary.csv", "sweep_baseline.csv", "sweep_timing.csv", "sweep.svg", "sweep_plot.csv"] {
        assert!(sweep_dir.join(f).exists(), "{f}");
    }

    let cv_dir = out.join("cv");
    let o = inflart(&["cv", "--config", path(&conf), "--vigilance", "0.1", "--out", path(&cv_dir)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let cv = fs::read_to_string(cv_dir.join("cv.csv")).unwrap();
    assert_eq!(cv.lines().count(), 1 + 4);
    assert!(cv_dir.join("cv.svg").exists());

    let rep_dir = out.join("report");
    let o = inflart(&["report", "--config", path(&conf), "--out", path(&rep_dir)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in [
        "composition.csv",
        "composition.svg",
        "features.tsv",
        "features.txt",
        "assignments.tsv",
        "feature_space.tsv",
        "network.art1",
    ] {
        assert!(rep_dir.join(f).exists(), "{f}");
    }

    let dump_dir = out.join("dump");
    let o = inflart(&["dump", "--config", path(&conf), "--out", path(&dump_dir)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).starts_with("40 lexemes, 3 classes"));
    assert_eq!(
        fs::read_to_string(dump_dir.join("samples.tsv")).unwrap(),
        fs::read_to_string(&data).unwrap()
    );
}

#[test]
fn built_in_synthetic_source() {
    let dir = tempfile::tempdir().unwrap();
    let o = inflart(&[
        "sweep",
        "--data",
        "synthetic",
        "--n-lexemes",
        "30",
        "--vigilance-max",
        "0.05",
        "--permutations",
        "1",
        "--no-baseline",
        "--out",
        path(dir.path()),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(!dir.path().join("sweep_baseline.csv").exists());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = path(dir.path());
    // no dataset: config error
    assert_eq!(inflart(&["sweep", "--out", out]).status.code(), Some(2));
    // invalid grid: config error
    assert_eq!(
        inflart(&["sweep", "--data", "synthetic", "--vigilance-step", "0", "--out", out]).status.code(),
        Some(2)
    );
    // unknown config key: config error
    let conf = dir.path().join("bad.conf");
    fs::write(&conf, "colour = blue\n").unwrap();
    assert_eq!(inflart(&["sweep", "--config", path(&conf)]).status.code(), Some(2));
    // unreadable lexicon: I/O error
    let missing = dir.path().join("missing.tsv");
    assert_eq!(
        inflart(&["dump", "--data", path(&missing), "--out", out]).status.code(),
        Some(4)
    );
    // lexicon without the expected columns: data error
    let bad = dir.path().join("bad.tsv");
    fs::write(&bad, "a\tb\n1\t2\n").unwrap();
    assert_eq!(
        inflart(&["dump", "--data", path(&bad), "--format", "simple_tsv", "--out", out]).status.code(),
        Some(3)
    );
}
