use std::path::PathBuf;
use std::process::{Command, Output};

fn corpus(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "corpus", &format!("{name}.wld")]
        .iter()
        .collect();
    p.to_string_lossy().into_owned()
}

fn welded(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_welded"))
        .args(args)
        .output()
        .expect("run welded")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn eval_unlink() {
    let o = welded(&["eval", &corpus("unlink2")]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o).trim(), "4");
}

#[test]
fn eval_forms_and_families() {
    let hopf = corpus("hopf+");
    let o = welded(&["eval", &hopf, "--mode", "welded", "--nu", "-1"]);
    assert_eq!(
        stdout(&o).trim(),
        "(4*a^4 - 8*a^3*b*r + 8*a^2*b^2 - 8*a*b^3*r + 4*b^4)/(b^2 - a^2)^2"
    );
    let o = welded(&["eval", &hopf, "--mode", "welded", "--nu", "-1", "--set", "r=1"]);
    assert_eq!(
        stdout(&o).trim(),
        "(4*a^4 - 8*a^3*b + 8*a^2*b^2 - 8*a*b^3 + 4*b^4)/(b^2 - a^2)^2"
    );
    let o = welded(&["eval", &corpus("wen_circle"), "--form", "lambda"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o).trim(), "-2*s");
    let o = welded(&["eval", &corpus("trefoil"), "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["value"], "-2");
}

#[test]
fn input_errors_exit_one() {
    let cases: [&[&str]; 6] = [
        &["eval", "/nonexistent.wld"],
        &["eval", &corpus("hopf+"), "--mode", "generic"],
        &["eval", &corpus("hopf+"), "--mode", "welded", "--form", "lambda"],
        &["eval", &corpus("wen_hopf"), "--mode", "welded", "--nu", "-1"],
        &["eval", &corpus("hopf+"), "--set", "q=1"],
        &["frobnicate"],
    ];
    for args in cases {
        let o = welded(args);
        assert_eq!(o.status.code(), Some(1), "{args:?}: {}", stderr(&o));
        assert!(!stderr(&o).is_empty());
    }
    assert_eq!(welded(&["--help"]).status.code(), Some(0));
}

#[test]
fn malformed_file_reports_line() {
    let dir = std::env::temp_dir().join(format!("welded-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join("bad.wld");
    std::fs::write(&p, "X+ 1 2 3 4\nW 1 1\n").unwrap();
    let o = welded(&["info", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("line"), "{}", stderr(&o));
}

#[test]
fn info_reports_counts() {
    let o = welded(&["info", &corpus("vhopf")]);
    let s = stdout(&o);
    assert!(s.contains("writhe: 1"), "{s}");
    assert!(s.contains("virtual crossings: 1 (parity 1)"), "{s}");
    assert!(s.contains("components: 2"), "{s}");
    let o = welded(&["info", &corpus("hopf+"), "--json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["writhe"], 2);
    assert_eq!(v["positive"], 2);
    assert_eq!(v["wens"], 0);
}

#[test]
fn scramble_is_reproducible() {
    let t = corpus("trefoil");
    let kinds = "r1a+,r1a-,r1b+,r1b-,r2+,r2-,r3,v1+,v1-,v2+,v2-,v3,m,f1";
    let a = welded(&["scramble", &t, "--seed", "7", "--moves", "15", "--kinds", kinds]);
    let b = welded(&["scramble", &t, "--seed", "7", "--moves", "15", "--kinds", kinds]);
    let c = welded(&["scramble", &t, "--seed", "8", "--moves", "15", "--kinds", kinds]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(stdout(&a), stdout(&b));
    assert_ne!(stdout(&a), stdout(&c));
    // the output is itself a valid diagram with the same invariant
    let dir = std::env::temp_dir().join(format!("welded-scr-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join("s.wld");
    std::fs::write(&p, stdout(&a)).unwrap();
    let args = ["--mode", "welded"];
    let y0 = welded(&[&["eval", t.as_str()][..], &args].concat());
    let y1 = welded(&[&["eval", p.to_str().unwrap()][..], &args].concat());
    assert_eq!(stdout(&y0), stdout(&y1));
}

#[test]
fn check_invariance_passes_and_catches_crossing_changes() {
    let h = corpus("hopf+");
    let o = welded(&["check-invariance", &h, "--trials", "20", "--mode", "welded"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).starts_with("pass"));
    let o = welded(&[
        "check-invariance", &h, "--trials", "20", "--mode", "welded", "--kinds", "r2+,r3,xchange",
    ]);
    assert_eq!(o.status.code(), Some(2));
    let s = stdout(&o);
    assert!(s.contains("FAIL") && s.contains("xchange"), "{s}");
    let o = welded(&["check-invariance", &h, "--kinds", "r9"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn verify_moves_generic() {
    let o = welded(&["verify-moves", "--mode", "generic"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let s = stdout(&o);
    assert!(s.contains("a*y + b*x = 0"), "{s}");
    assert!(s.contains("a*x + b*y - 1 = 0"), "{s}");
    assert!(s.contains("c = b, t = -2: F1 0 remaining, R3 0 remaining"), "{s}");
    assert!(s.contains("t = 1: F1 0 remaining, R3 0 remaining"), "{s}");
    let f1 = s.lines().find(|l| l.starts_with("F1    +")).unwrap();
    assert!(f1.contains("15") && f1.contains(" 3 "), "{f1}");
}

#[test]
fn verify_moves_solved_families() {
    let o = welded(&["verify-moves", "--mode", "extended"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(!stdout(&o).contains("FAIL"));
    let o = welded(&["verify-moves", "--mode", "welded", "--nu", "-1", "--json"]);
    assert_eq!(o.status.code(), Some(2));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let failing: Vec<&str> = v["moves"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|m| m["pass"] == false)
        .map(|m| m["move"].as_str().unwrap())
        .collect();
    assert_eq!(failing, ["T4", "T4"]);
}

#[test]
fn output_file() {
    let dir = std::env::temp_dir().join(format!("welded-out-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join("y.txt");
    let o = welded(&["eval", &corpus("unlink2"), "-o", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).is_empty());
    assert_eq!(std::fs::read_to_string(p).unwrap().trim(), "4");
}
