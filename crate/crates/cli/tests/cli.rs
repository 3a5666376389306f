use std::process::{Command, Output};

fn mcgn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mcgn")).args(args).output().expect("mcgn runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn klein_bottle_has_one_relator() {
    let o = mcgn(&["present", "--g", "2", "--n", "1"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert!(s.contains("relators (1):"), "{s}");
    assert!(s.contains("y a_1 y^-1 a_1"));
}

#[test]
fn projective_plane_with_one_hole_is_trivial() {
    let o = mcgn(&["present", "--g", "1", "--n", "1", "--format", "algebra-text"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "# M(N_{1,1})\nF := FreeGroup();;\nrels := [\n];;\nG := F / rels;;\n");
}

#[test]
fn structured_output_lists_nine_generators() {
    let o = mcgn(&["present", "--g", "3", "--n", "2", "--format", "structured"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["generators"].as_array().unwrap().len(), 9);
    assert_eq!(v["surface"]["genus"], 3);
}

#[test]
fn invalid_surface_exits_two() {
    for args in [["present", "--g", "0", "--n", "1"], ["verify", "--g", "2", "--n", "-1"]] {
        let o = mcgn(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(String::from_utf8_lossy(&o.stderr).contains("invalid surface"));
    }
    assert_eq!(mcgn(&["extend", "--g", "2", "--n", "1"]).status.code(), Some(2));
    assert_eq!(mcgn(&["verify", "--format", "algebra-text"]).status.code(), Some(2));
}

#[test]
fn verify_reports_are_deterministic() {
    let args = ["verify", "--g", "4", "--n", "3", "--format", "structured", "--jobs", "2"];
    let a = mcgn(&args);
    let b = mcgn(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v: serde_json::Value = serde_json::from_str(&stdout(&a)).unwrap();
    assert_eq!(v["failures"], 0);
    assert_eq!(v["families"]["B5"]["failed"], 0);
}

#[test]
fn abelianization_of_the_klein_bottle_group() {
    let o = mcgn(&["abelianize", "--g", "2", "--n", "1", "--format", "structured", "--seed", "7"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["torsion"], serde_json::json!(["2"]));
    assert_eq!(v["free_rank"], 1);
    assert_eq!(v["tietze_invariant"], true);
}

#[test]
fn extension_matches_the_catalog() {
    let o = mcgn(&["extend", "--g", "2", "--n", "2"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("no differences"));
}

#[test]
fn derivations_replay_and_warn() {
    let o = mcgn(&["check-derivations", "--g", "5", "--n", "4", "--format", "structured"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let reps = v["derivations"].as_array().unwrap();
    assert_eq!(reps.len(), 10);
    assert!(reps.iter().all(|r| r["holds"] == true));
    assert!(v["warnings"].as_array().unwrap().iter().any(|w| w.as_str().unwrap().contains("D1e' m=i+1")));
    assert!(v["tail_mismatches"].as_array().unwrap().is_empty());
}

#[test]
fn subgroup_basis_rank() {
    let o = mcgn(&["subgroup-basis", "--g", "3", "--n", "4", "--format", "structured"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["schreier_rank"], 9);
    assert_eq!(v["isomorphic"], true);
}

#[test]
fn out_flag_writes_a_file() {
    let dir = std::env::temp_dir().join(format!("mcgn-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("p.json");
    let o = mcgn(&["present", "--g", "2", "--n", "2", "--format", "structured", "--out", path.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    let p = mcg_core::serial::from_structured(&text).unwrap();
    assert_eq!(mcg_core::serial::to_structured(&p), text);
    std::fs::remove_dir_all(dir).unwrap();
}
