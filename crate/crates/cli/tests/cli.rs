use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use coarse_cli::codec::{double_to_json, load_double, metric_to_json};
use coarse_core::{compose, generate_space, make_catalog_double, CatalogKind, ComposeOptions, Dist, SpaceKind};
use serde_json::Value;
use tempfile::TempDir;

const B_LINE: &str = "abs(x0-y0)+1";
const C_WEDGE: &str = "abs(x0-y0)+min(x0,y0)+1";
const LEVELS: &str = "[16, 32, 64, 128, 256]";

fn coarse(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_coarse")).current_dir(dir).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stdout)))
}

struct Fixture {
    dir: TempDir,
}

impl Fixture {
    fn new() -> Self {
        let f = Fixture { dir: tempfile::tempdir().unwrap() };
        f.family("bline.toml", "halfline", LEVELS, B_LINE);
        f.family("cwedge.toml", "halfline", LEVELS, C_WEDGE);
        f
    }

    fn path(&self) -> &Path {
        self.dir.path()
    }

    fn file(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn write(&self, name: &str, text: &str) {
        std::fs::write(self.file(name), text).unwrap();
    }

    fn family(&self, name: &str, space: &str, levels: &str, cross: &str) {
        self.write(name, &format!("space = \"{space}\"\nlevels = {levels}\ncross = \"{cross}\"\n"));
    }

    fn run(&self, args: &[&str]) -> Output {
        coarse(self.path(), args)
    }
}

fn focused(point: usize) -> String {
    let base = generate_space(&SpaceKind::Grid { width: 4 }, 16).unwrap();
    double_to_json(&make_catalog_double(base, &CatalogKind::Focused { point, lambda: Dist(1) }).unwrap())
}

#[test]
fn validate_exit_codes() {
    let fx = Fixture::new();
    fx.write("d.json", &focused(3));
    let out = fx.run(&["validate", "--double", "d.json"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["verdict"], "valid");

    fx.write("m.json", &metric_to_json(&generate_space(&SpaceKind::Halfline, 5).unwrap()));
    assert_eq!(code(&fx.run(&["validate", "m.json"])), 0);
    assert_eq!(code(&fx.run(&["validate", "--double", "m.json"])), 1);

    fx.write("bad.json", r#"{"version":1,"kind":"double","base":[[0,1],[1,0]],"cross":[[1,5],[5,1]]}"#);
    let out = fx.run(&["validate", "--double", "bad.json"]);
    assert_eq!(code(&out), 2);
    let report = json(&out);
    assert_eq!(report["verdict"], "invalid");
    assert!(report["metrics"]["cross"]["total_violations"].as_u64().unwrap() > 0);

    fx.write("tri.json", r#"{"version":1,"kind":"metric","dist":[[0,1,5],[1,0,1],[5,1,0]]}"#);
    assert_eq!(code(&fx.run(&["validate", "tri.json"])), 2);

    fx.write("neg.json", r#"{"version":1,"kind":"double","base":[[0,1],[1,0]],"cross":[[1,-1],[2,1]]}"#);
    let out = fx.run(&["validate", "neg.json"]);
    assert_eq!(code(&out), 2);
    assert_eq!(json(&out)["verdict"], "invalid");

    fx.write("v2.json", r#"{"version":2,"kind":"metric","dist":[[0]]}"#);
    let out = fx.run(&["validate", "v2.json"]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("schema version 2"));
    assert_eq!(code(&fx.run(&["validate", "missing.json"])), 1);
}

#[test]
fn compose_writes_the_product() {
    let fx = Fixture::new();
    fx.write("a.json", &focused(0));
    fx.write("b.json", &focused(15));
    let out = fx.run(&["compose", "a.json", "b.json", "--penalty", "1", "-o", "ab.json"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let a = load_double(&fx.file("a.json")).unwrap();
    let b = load_double(&fx.file("b.json")).unwrap();
    let expected = compose(&a, &b, ComposeOptions::with_penalty(1)).unwrap();
    assert_eq!(load_double(&fx.file("ab.json")).unwrap(), expected);

    let stdout = fx.run(&["compose", "a.json", "b.json", "--penalty", "1"]);
    assert_eq!(String::from_utf8(stdout.stdout).unwrap(), double_to_json(&expected));

    let other = generate_space(&SpaceKind::Halfline, 16).unwrap();
    let other = make_catalog_double(other, &CatalogKind::Lambda { lambda: Dist(1) }).unwrap();
    fx.write("c.json", &double_to_json(&other));
    assert_eq!(code(&fx.run(&["compose", "a.json", "c.json"])), 1);
}

#[test]
fn check_order_exit_codes() {
    let fx = Fixture::new();
    let holds = fx.run(&["check-order", "cwedge.toml", "bline.toml"]);
    assert_eq!(code(&holds), 0);
    let report = json(&holds);
    assert_eq!(report["verdict"], "holds");
    assert_eq!(report["certificate"]["tail_slope"], serde_json::json!([1, 1]));

    let fails = fx.run(&["check-order", "bline.toml", "cwedge.toml"]);
    assert_eq!(code(&fails), 2);
    let report = json(&fails);
    assert_eq!(report["witness"]["bound"], 2);
    assert!(report["witness"]["entries"].as_array().unwrap().len() >= 6);

    let short = fx.run(&["check-order", "bline.toml", "cwedge.toml", "--levels", "16,32,64"]);
    assert_eq!(code(&short), 3);

    fx.family("line.toml", "line", LEVELS, B_LINE);
    assert_eq!(code(&fx.run(&["check-order", "bline.toml", "line.toml"])), 1);
}

#[test]
fn check_equiv_exit_codes() {
    let fx = Fixture::new();
    let same = fx.run(&["check-equiv", "cwedge.toml", "cwedge.toml"]);
    assert_eq!(code(&same), 0);
    assert_eq!(json(&same)["verdict"], "equivalent");

    let diff = fx.run(&["check-equiv", "bline.toml", "cwedge.toml"]);
    assert_eq!(code(&diff), 2);
    let report = json(&diff);
    assert_eq!(report["verdict"], "not-equivalent");
    assert_eq!(report["witness"]["direction"], "forward");
    for e in report["witness"]["entries"].as_array().unwrap() {
        assert!(e["f"].as_u64().unwrap() < 2);
    }
    assert!(report.get("certificate").is_none());
}

#[test]
fn witness_exit_codes() {
    let fx = Fixture::new();
    let found = fx.run(&["witness", "bline.toml", "cwedge.toml"]);
    assert_eq!(code(&found), 0);
    let report = json(&found);
    assert_eq!(report["verdict"], "found");
    let xs: Vec<u64> =
        report["metrics"]["sparse"]["points"].as_array().unwrap().iter().map(|p| p["x"].as_u64().unwrap()).collect();
    assert_eq!(xs, [2, 7, 16, 33, 66, 131]);

    assert_eq!(code(&fx.run(&["witness", "cwedge.toml", "bline.toml"])), 1);
    assert_eq!(code(&fx.run(&["witness", "bline.toml", "cwedge.toml", "--levels", "8,16"])), 3);
}

#[test]
fn lemma_main_reports_bounded_diagonal() {
    let fx = Fixture::new();
    let out = fx.run(&["lemma-main", "bline.toml", "cwedge.toml", "--emit-csv", "diag.csv"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&out);
    assert_eq!(report["verdict"], "passed");
    assert!(report["metrics"]["sup_diag_aba"].as_u64().unwrap() <= 6);
    assert_eq!(report["metrics"]["equivalence"], "not-equivalent");
    let csv = std::fs::read_to_string(fx.file("diag.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("k,x,y,diag_aba,diag_aca,closed_form"));
    assert_eq!(lines.count(), report["witness"]["points"].as_array().unwrap().len());

    let penalised = fx.run(&["lemma-main", "bline.toml", "cwedge.toml", "--penalty", "1"]);
    assert_eq!(code(&penalised), 0);
    assert!(json(&penalised)["metrics"]["sup_diag_aba"].as_u64().unwrap() <= 8);

    assert_eq!(code(&fx.run(&["lemma-main", "cwedge.toml", "bline.toml"])), 1);
    assert_eq!(code(&fx.run(&["lemma-main", "bline.toml", "cwedge.toml", "--levels", "16,32"])), 3);
}

#[test]
fn fundamentality_exit_codes() {
    let fx = Fixture::new();
    let out = fx.run(&["fundamentality", "cwedge.toml", "bline.toml"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&out);
    assert_eq!(report["verdict"], "separated");
    assert_eq!(report["metrics"]["failing_direction"], "t-does-not-control-s");

    assert_eq!(code(&fx.run(&["fundamentality", "cwedge.toml", "cwedge.toml"])), 1);
    assert_eq!(code(&fx.run(&["fundamentality", "cwedge.toml", "bline.toml", "--levels", "16,32"])), 3);
}

#[test]
fn eval_dsl_exit_codes() {
    let fx = Fixture::new();
    let out = fx.run(&["eval-dsl", C_WEDGE, "--x", "3", "--y", "5", "--dxy", "2"]);
    assert_eq!((code(&out), String::from_utf8(out.stdout).unwrap()), (0, "6\n".to_string()));
    let out = fx.run(&["eval-dsl", "max(x0,x1)-y0", "--x", "-4,2", "--y", "-1"]);
    assert_eq!((code(&out), String::from_utf8(out.stdout).unwrap()), (0, "3\n".to_string()));
    assert_eq!(code(&fx.run(&["eval-dsl", "x0-y0", "--x", "3", "--y", "5"])), 2);
    assert_eq!(code(&fx.run(&["eval-dsl", "abs(x0"])), 1);
    assert_eq!(code(&fx.run(&["eval-dsl", "x1+1", "--x", "3"])), 1);
}

#[test]
fn bench_checksum_ignores_threads() {
    let fx = Fixture::new();
    let one = json(&fx.run(&["bench", "--n", "96", "--threads", "1", "--seed", "7"]));
    let four = json(&fx.run(&["bench", "--n", "96", "--threads", "4", "--seed", "7"]));
    assert_eq!(one["metrics"]["checksum"], four["metrics"]["checksum"]);
    assert!(one["timings"]["elapsed_ns"].is_u64());
    assert_eq!(code(&fx.run(&["bench", "--n", "5000"])), 1);
}

#[test]
fn usage_errors_exit_one() {
    let fx = Fixture::new();
    assert_eq!(code(&fx.run(&["frobnicate"])), 1);
    assert_eq!(code(&fx.run(&["check-order", "bline.toml"])), 1);
    fx.write("broken.toml", "space = \"halfline\"\nlevels = [16, 8]\ncross = \"dxy+1\"\n");
    assert_eq!(code(&fx.run(&["check-order", "broken.toml", "broken.toml"])), 1);
    assert_eq!(code(&fx.run(&["--help"])), 0);
}

#[test]
fn reports_are_reproducible() {
    let fx = Fixture::new();
    let args = ["lemma-main", "bline.toml", "cwedge.toml"];
    let first = fx.run(&args);
    let second = fx.run(&args);
    assert_eq!(first.stdout, second.stdout);

    let timed = json(&fx.run(&["--timings", "lemma-main", "bline.toml", "cwedge.toml"]));
    let plain = json(&first);
    assert!(timed["timings"]["elapsed_ms"].is_f64());
    assert_eq!(plain["timings"], Value::Null);
    assert_eq!(timed["config_hash"], plain["config_hash"]);

    let other = json(&fx.run(&["lemma-main", "bline.toml", "cwedge.toml", "--penalty", "1"]));
    assert_ne!(other["config_hash"], plain["config_hash"]);
}

#[test]
fn shipped_configs_load() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        let cfg = coarse_cli::config::load_config(&path).unwrap();
        let ladder =
            std::sync::Arc::new(coarse_core::order::Ladder::new(cfg.space.clone(), cfg.levels.clone()).unwrap());
        cfg.build(ladder).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    }
}
