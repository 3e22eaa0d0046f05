use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn scenarios() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn evac(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_evac")).args(args).output().unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn run_matches_the_golden_text() {
    let dir = scenarios().join("compiegne-flood");
    let out = evac(&["run", path(&dir)]);
    assert_eq!(out.status.code(), Some(0));
    let golden = std::fs::read_to_string(dir.join("expected.txt")).unwrap();
    assert_eq!(String::from_utf8(out.stdout).unwrap(), golden);
}

#[test]
fn structured_output_and_render_round_trip() {
    let dir = scenarios().join("compiegne-flood");
    let tmp = tempfile::tempdir().unwrap();
    let plan = tmp.path().join("plan.json");
    let out = evac(&["run", path(&dir), "--format", "structured", "-o", path(&plan)]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let json = std::fs::read_to_string(&plan).unwrap();
    assert_eq!(json.trim_end(), std::fs::read_to_string(dir.join("expected.json")).unwrap().trim_end());

    let text = evac(&["render", path(&plan)]);
    assert_eq!(text.stdout, std::fs::read(dir.join("expected.txt")).unwrap());
    let csv = evac(&["render", path(&plan), "--format", "matrix-csv"]);
    let csv = String::from_utf8(csv.stdout).unwrap();
    assert!(!csv.ends_with('\n'));
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(lines[0].split(',').count(), 53);
    let ones = csv.matches(",1").count();
    assert_eq!(ones, 21);
}

#[test]
fn solver_flags_change_the_plan() {
    let dir = scenarios().join("compiegne-flood");
    let greedy = evac(&["run", path(&dir), "--solver", "greedy"]);
    assert_eq!(greedy.status.code(), Some(0));
    assert!(String::from_utf8(greedy.stdout).unwrap().starts_with("Status: heuristic (greedy solver)"));
    let capped = evac(&["run", path(&dir), "--solver", "exact", "--exact-cap", "10"]);
    assert_eq!(capped.status.code(), Some(1));
    let err = String::from_utf8(capped.stderr).unwrap();
    assert!(err.contains("instance_too_large") && err.contains("allocator"), "{err}");
    let bad = evac(&["run", path(&dir), "--solver", "fastest"]);
    assert_eq!(bad.status.code(), Some(1));
    assert_eq!(evac(&["--help"]).status.code(), Some(0));
}

#[test]
fn infeasible_exits_two() {
    let tmp = tempfile::tempdir().unwrap();
    let src = scenarios().join("compiegne-flood");
    for f in ["entities.toml", "graph.txt", "gazetteer.tsv"] {
        std::fs::copy(src.join(f), tmp.path().join(f)).unwrap();
    }
    std::fs::write(
        tmp.path().join("scenario.toml"),
        "entities = \"entities.toml\"\ngraph = \"graph.txt\"\ngazetteer = \"gazetteer.tsv\"\nrequest = \"request.toml\"\n",
    )
    .unwrap();
    std::fs::write(
        tmp.path().join("request.toml"),
        r#"[options]
solver = "auto"
exact_cap = 64

[[points]]
address = "17 Winston Churchill Street, Compiègne"
nb_people = 300
priority = 1

[[points]]
address = "36 Rue Saint-Lazare, Compiègne"
nb_people = 216
priority = 2
"#,
    )
    .unwrap();
    let out = evac(&["run", path(tmp.path())]);
    assert_eq!(out.status.code(), Some(2));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("Status: infeasible"));
    assert!(text.contains("UNSERVED, deficit"));
}

#[test]
fn errors_exit_one() {
    let tmp = tempfile::tempdir().unwrap();
    let out = evac(&["run", path(tmp.path())]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stderr).unwrap().contains("missing_file"));
    let out = evac(&["render", path(&tmp.path().join("none.json"))]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn validate_and_oracle_check() {
    let out = evac(&["validate", path(&scenarios().join("compiegne-flood"))]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8(out.stdout).unwrap().contains("52 moving resources"));

    let trimmed = scenarios().join("compiegne-trimmed");
    let out = evac(&["oracle-check", path(&trimmed)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8(out.stdout).unwrap().starts_with("match:"));
    let out = evac(&["run", path(&trimmed), "--oracle"]);
    assert_eq!(out.status.code(), Some(0));

    // 52 vehicles cannot be enumerated
    let out = evac(&["oracle-check", path(&scenarios().join("compiegne-flood"))]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stderr).unwrap().contains("oracle_too_large"));
}
