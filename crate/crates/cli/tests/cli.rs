use std::io::Write;
use std::process::Command;

use resolvedk_core::descriptor::{to_json, ActionDescriptor};
use resolvedk_core::generate_fixture;

fn resolvedk(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_resolvedk")).args(args).output().expect("binary runs");
    (
        out.status.code().expect("exit code"),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn write_temp(text: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

fn sphere_json() -> String {
    to_json(&ActionDescriptor::from_fixture(&generate_fixture("sphere_rotation", None).unwrap()))
}

#[test]
fn validate_sphere_succeeds() {
    let (status, out, _) = resolvedk(&["validate", "--example", "sphere_rotation"]);
    assert_eq!(status, 0);
    assert!(out.contains("valid: 3 nodes"), "{out}");
}

#[test]
fn compare_sphere_window_two() {
    let (status, out, _) = resolvedk(&["compare", "--example", "sphere_rotation", "--window", "2"]);
    assert_eq!(status, 0);
    assert!(out.contains("even 9 = 9"), "{out}");
    assert!(out.contains("odd 0 = 0"), "{out}");
}

#[test]
fn les_pruning_a_pole_is_exact() {
    let (status, out, _) = resolvedk(&["les", "--example", "sphere_rotation", "--prune", "N"]);
    assert_eq!(status, 0);
    assert!(out.contains("exact at all six positions"), "{out}");
}

#[test]
fn example_file_round_trips_through_input() {
    let (status, text, _) = resolvedk(&["example", "--example", "sphere_rotation"]);
    assert_eq!(status, 0);
    let f = write_temp(&text);
    let path = f.path().to_str().unwrap();
    let (status, out, _) = resolvedk(&["deloc", "--input", path, "--window", "2"]);
    assert_eq!(status, 0);
    assert!(out.contains("cohomology even 9 odd 0"), "{out}");
    assert_eq!(text.trim_end(), sphere_json());
}

#[test]
fn json_output_is_parseable_and_deterministic() {
    let args = ["deloc", "--example", "sphere_rotation_speed(2)", "--window", "1", "--format", "json"];
    let (status, a, _) = resolvedk(&args);
    let (_, b, _) = resolvedk(&args);
    assert_eq!(status, 0);
    assert_eq!(a, b);
    let v: serde_json::Value = serde_json::from_str(&a).unwrap();
    assert_eq!(v["even"], 10);
    assert_eq!(v["odd"], 0);
    assert_eq!(v["status"], 0);
}

#[test]
fn unknown_field_is_an_input_error_with_path() {
    let text = sphere_json().replacen("\"group\": {", "\"group\": {\n    \"colour\": \"red\",", 1);
    let f = write_temp(&text);
    let (status, _, err) = resolvedk(&["validate", "--input", f.path().to_str().unwrap()]);
    assert_eq!(status, 2);
    assert!(err.contains("group.colour"), "{err}");
}

#[test]
fn malformed_json_is_an_input_error() {
    let f = write_temp("{\"group\": ");
    let (status, _, _) = resolvedk(&["validate", "--input", f.path().to_str().unwrap()]);
    assert_eq!(status, 2);
    let (status, _, _) = resolvedk(&["validate", "--input", "/nonexistent/descriptor.json"]);
    assert_eq!(status, 2);
    let (status, _, _) = resolvedk(&["validate", "--example", "sphere_rotation_speed(0)"]);
    assert_eq!(status, 2);
}

#[test]
fn inconsistent_bundle_is_a_mathematical_failure() {
    let mut f = generate_fixture("sphere_rotation", None).unwrap();
    let s = &mut f.bundles[0].1;
    s.nodes.get_mut("S").unwrap().entries.insert(vec![0.into()], vec![2.into()]);
    let file = write_temp(&to_json(&ActionDescriptor::from_fixture(&f)));
    let (status, out, _) = resolvedk(&["validate", "--input", file.path().to_str().unwrap()]);
    assert_eq!(status, 1);
    assert!(out.contains("face 0S"), "{out}");
}

#[test]
fn les_without_prune_is_an_input_error() {
    let (status, _, err) = resolvedk(&["les", "--example", "sphere_rotation"]);
    assert_eq!(status, 2);
    assert!(err.contains("--prune"), "{err}");
}

#[test]
fn relative_cohomology_of_the_interval() {
    let (status, out, _) = resolvedk(&["deloc", "--example", "sphere_rotation", "--relative", "0"]);
    assert_eq!(status, 0);
    assert!(out.contains("relative even 0 odd 1"), "{out}");
}

#[test]
fn example_lists_names() {
    let (status, out, _) = resolvedk(&["example"]);
    assert_eq!(status, 0);
    assert!(out.lines().any(|l| l == "projective_plane"));
}
