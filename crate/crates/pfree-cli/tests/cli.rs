//! End-to-end checks of the command-line surface and its exit-code
//! contract: 0 = yes/success, 1 = no/infeasible, 2 = error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn pfree(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pfree"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

struct TempDir(PathBuf);

impl TempDir {
    fn new(tag: &str) -> Self {
        let dir = std::env::temp_dir().join(format!("pfree-cli-{tag}-{}", std::process::id()));
        fs::create_dir_all(&dir).expect("create temp dir");
        TempDir(dir)
    }

    fn path(&self, name: &str) -> PathBuf {
        self.0.join(name)
    }

    fn write(&self, name: &str, contents: &str) -> PathBuf {
        let p = self.path(name);
        fs::write(&p, contents).expect("write temp file");
        p
    }
}

impl Drop for TempDir {
    fn drop(&mut self) {
        let _ = fs::remove_dir_all(&self.0);
    }
}

const PRISON: &str = "5 8\n0 3\n0 4\n1 2\n1 3\n1 4\n2 3\n2 4\n3 4\n";
const K5: &str = "5 10\n0 1\n0 2\n0 3\n0 4\n1 2\n1 3\n1 4\n2 3\n2 4\n3 4\n";
const K4: &str = "4 6\n0 1\n0 2\n0 3\n1 2\n1 3\n2 3\n";

fn arg(p: &Path) -> String {
    p.display().to_string()
}

#[test]
fn check_exit_codes() {
    let dir = TempDir::new("check");
    let k5 = dir.write("k5.txt", K5);
    let out = pfree(&["check", &arg(&k5)]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("prison-free"));

    let prison = dir.write("prison.txt", PRISON);
    let out = pfree(&["check", &arg(&prison)]);
    assert_eq!(code(&out), 1);
    assert!(stdout(&out).contains("0-1"));
    assert!(stdout(&out).contains("0-2"));

    let bad = dir.write("bad.txt", "not a header\n");
    assert_eq!(code(&pfree(&["check", &arg(&bad)])), 2);
}

#[test]
fn check_json_payload() {
    let dir = TempDir::new("check-json");
    let prison = dir.write("prison.txt", PRISON);
    let out = pfree(&["check", "--json", &arg(&prison)]);
    assert_eq!(code(&out), 1);
    let payload: serde_json::Value = serde_json::from_str(&stdout(&out)).expect("valid JSON");
    assert_eq!(payload["prison_free"], serde_json::Value::Bool(false));
    assert_eq!(payload["witness"]["vertices"][0], 0);
}

#[test]
fn enumerate_and_decompose() {
    let dir = TempDir::new("enum");
    let prison = dir.write("prison.txt", PRISON);
    let out = pfree(&["enumerate", "--json", &arg(&prison)]);
    assert_eq!(code(&out), 0);
    let payload: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(payload["count"], 1);

    let k5 = dir.write("k5.txt", K5);
    let out = pfree(&["decompose", "--json", &arg(&k5), "--p", "4"]);
    assert_eq!(code(&out), 0);
    let payload: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(payload["components"].as_array().unwrap().len(), 1);
}

#[test]
fn kernelize_writes_kernel_and_trace() {
    let dir = TempDir::new("kernelize");
    let prison = dir.write("prison.txt", PRISON);
    let out_path = dir.path("kernel.json");
    let trace_path = dir.path("trace.json");
    let out = pfree(&[
        "kernelize",
        &arg(&prison),
        "--k",
        "1",
        "--out",
        &arg(&out_path),
        "--trace",
        &arg(&trace_path),
    ]);
    assert_eq!(code(&out), 0);
    let kernel: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(kernel["k"], 1);
    let trace: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&trace_path).unwrap()).unwrap();
    assert!(trace.as_array().unwrap().iter().any(|e| e["rule"] == "modulator"));
}

#[test]
fn solve_exit_codes() {
    let dir = TempDir::new("solve");
    let prison = dir.write("prison.txt", PRISON);
    let out = pfree(&["solve", &arg(&prison), "--mode", "del", "--k", "1"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("size 1"));

    let out = pfree(&["solve", &arg(&prison), "--mode", "del", "--k", "0"]);
    assert_eq!(code(&out), 1);

    // Prison with both non-edges forbidden: no completion at any budget.
    let blocked = dir.write(
        "blocked.json",
        r#"{"n":5,"edges":[[0,3],[0,4],[1,2],[1,3],[1,4],[2,3],[2,4],[3,4]],
            "forbidden":[[0,1],[0,2]],"named":{},"activation":null,"k":null,"g":null}"#,
    );
    let out = pfree(&["solve", &arg(&blocked), "--mode", "comp", "--k", "5"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn gadget_files() {
    let dir = TempDir::new("gadget");
    let out_path = dir.path("clone.json");
    let out = pfree(&[
        "gadget", "--type", "clone", "--len", "4", "--out", &arg(&out_path),
    ]);
    assert_eq!(code(&out), 0);
    let doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(doc["n"], 12);
    assert_eq!(doc["forbidden"].as_array().unwrap().len(), 4);
    assert_eq!(doc["meta"]["type"], "gadget");

    // The written file parses back as a valid instance.
    let out = pfree(&["check", &arg(&out_path)]);
    assert_eq!(code(&out), 0);
}

#[test]
fn reduce_and_compose_pipeline() {
    let dir = TempDir::new("pipeline");
    let k4 = dir.write("k4.txt", K4);
    let gap = dir.path("gap.json");
    let out = pfree(&[
        "reduce-vc", &arg(&k4), "--t", "3", "--l", "6", "--out", &arg(&gap),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));

    // Chain length 6 is too small for the composition inequality.
    let comp = dir.path("comp.json");
    let out = pfree(&["compose", &arg(&gap), &arg(&gap), "--out", &arg(&comp)]);
    assert_eq!(code(&out), 2);
    assert!(!comp.exists(), "no file on the failure path");

    // Non-cubic input is rejected.
    let k5 = dir.write("k5.txt", K5);
    let out = pfree(&[
        "reduce-vc", &arg(&k5), "--t", "3", "--l", "6",
        "--out", &arg(&dir.path("nope.json")),
    ]);
    assert_eq!(code(&out), 2);
    assert!(!dir.path("nope.json").exists());
}

#[test]
fn verify_gadgets_suite_passes() {
    let out = pfree(&["verify", "--suite", "gadgets"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("PASS"));

    let out = pfree(&["verify", "--suite", "nonsense"]);
    assert_eq!(code(&out), 2);
}
