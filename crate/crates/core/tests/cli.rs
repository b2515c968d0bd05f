use std::path::Path;
use std::process::{Command, Output};

use symsat::archive::RunArchive;

fn symsat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_symsat")).args(args).output().expect("binary runs")
}

fn text(o: &Output) -> String {
    format!("{}{}", String::from_utf8_lossy(&o.stdout), String::from_utf8_lossy(&o.stderr))
}

fn data(rel: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(rel).display().to_string()
}

#[test]
fn shipped_files_validate() {
    for f in [
        "bernoulli/manifest.json",
        "golden/family.json",
        "golden/target.json",
        "irregular/observable.json",
        "period_two/family.json",
    ] {
        let o = symsat(&["validate", &data(f)]);
        assert_eq!(o.status.code(), Some(0), "{f}: {}", text(&o));
    }
}

#[test]
fn broken_inputs_are_named() {
    let dir = tempfile::tempdir().unwrap();
    let fam = dir.path().join("family.json");
    std::fs::write(
        &fam,
        r#"{"label":"bad","levels":[
            {"alphabet_size":2,"label":"full","transitions":[[1,1],[1,1]]},
            {"alphabet_size":2,"label":"golden","transitions":[[1,1],[1,0]]}]}"#,
    )
    .unwrap();
    let o = symsat(&["validate", fam.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(text(&o).contains("word 11"), "{}", text(&o));

    let p = dir.path().join("p.json");
    std::fs::write(&p, r#"{"type":"markov","P":[[0.5,0.5],[0.3,0.6]]}"#).unwrap();
    let o = symsat(&["validate", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(text(&o).contains("row 1"), "{}", text(&o));
}

#[test]
fn invalid_open_set_exits_with_input_error() {
    let dir = tempfile::tempdir().unwrap();
    for f in ["family.json", "target.json", "manifest.json"] {
        std::fs::copy(data(&format!("period_two/{f}")), dir.path().join(f)).unwrap();
    }
    let m = dir.path().join("manifest.json");
    let s = std::fs::read_to_string(&m).unwrap().replace("\"u\": \"2\"", "\"u\": \"00\"");
    std::fs::write(&m, s).unwrap();
    let out = dir.path().join("run");
    let o = symsat(&["--out-dir", out.to_str().unwrap(), "construct", m.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", text(&o));
    assert!(text(&o).contains("open set"));
}

#[test]
fn entropy_reports_each_level() {
    let o = symsat(&["entropy", &data("golden/family.json"), "-n", "32"]);
    assert_eq!(o.status.code(), Some(0));
    let t = text(&o);
    assert!(t.contains("level 1 (golden-mean): word count, n = 32: 0.486140"), "{t}");
    assert!(t.contains("Parry 0.693147"));
}

#[test]
fn construct_resume_audit_and_fault() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run");
    let r = run.to_str().unwrap();
    let global = ["--out-dir", r, "--horizon", "200000", "--bands", "2"];
    let manifest = data("bernoulli/manifest.json");

    let o = symsat(&[&global[..], &["construct", &manifest, "--stop-after-band", "1"]].concat());
    assert_eq!(o.status.code(), Some(0), "{}", text(&o));
    assert!(text(&o).contains("resumable at band 1"), "{}", text(&o));
    let o = symsat(&[&global[..], &["resume"]].concat());
    assert_eq!(o.status.code(), Some(0), "{}", text(&o));
    assert!(text(&o).contains("complete"));

    let o = symsat(&["--out-dir", r, "audit", "tracking"]);
    assert_eq!(o.status.code(), Some(0), "{}", text(&o));
    let csv = std::fs::read_to_string(run.join("tracking.csv")).unwrap();
    assert!(csv.starts_with("# seed=7\n"));

    let o = symsat(&["--out-dir", r, "--format", "json", "info"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["status"]["complete"], true);

    let a = RunArchive::open(&run).unwrap();
    a.inject_fault(3).unwrap();
    let cp = a.construction().unwrap().schedule().checkpoint(3);
    let o = symsat(&["--out-dir", r, "audit", "tracking"]);
    assert_eq!(o.status.code(), Some(1), "{}", text(&o));
    assert!(text(&o).contains(&format!("checkpoint {cp} (item 3")), "{}", text(&o));
}
