use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use fracpass::sampling::random_smooth_signal;
use fracpass::{Grid, GridSignal};
use fracpass_cli::csvio::{format_number, read_signal, write_signal};
use fracpass_cli::{cmd_check, cmd_constants, RunConfig};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_fracpass");

fn config_text(matrix: &str, potential: &str, forcing: &str, extra: &str) -> String {
    format!(
        "[problem]\nalpha = 0.75\nn = 2\nT = 20.0\nN = 512\n\n[matrix]\n{matrix}\n\n[potential]\n{potential}\n\n[forcing]\n{forcing}\n{extra}"
    )
}

const QUADRATIC: &str = "kind = \"quadratic\"";
const QUARTIC: &str = "kind = \"homogeneous\"\namplitude = 0.1\nmu = 4.0";
const HALF_BUDGET: &str = "kind = \"gaussian\"\nbudget_fraction = 0.5\ndirection = [1.0, 0.0]";

fn admissible_text() -> String {
    config_text(QUADRATIC, QUARTIC, HALF_BUDGET, "")
}

fn write_config(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().unwrap()
}

fn run_with(cmd: &str, config: &Path, rest: &[&str]) -> Output {
    let mut args = vec![cmd, "--config", config.to_str().unwrap()];
    args.extend_from_slice(rest);
    run(&args)
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}", String::from_utf8_lossy(&out.stdout))
    })
}

#[test]
fn malformed_config_reports_location() {
    let dir = TempDir::new().unwrap();
    let path = write_config(&dir, "bad.toml", "[problem]\nalpha = \"oops\"\n");
    let out = run_with("constants", &path, &[]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2") && err.contains("alpha"), "{err}");

    let unknown = admissible_text().replace("n = 2", "n = 2\nbogus = 1");
    let path = write_config(&dir, "unknown.toml", &unknown);
    let out = run_with("check", &path, &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bogus"));

    let out = run(&["check", "--config", "/nonexistent/config.toml"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn constants_report_trivial_fields() {
    let unforced = RunConfig::parse(&config_text(QUADRATIC, QUARTIC, "kind = \"zero\"", "")).unwrap();
    let c = cmd_constants(&unforced).unwrap();
    assert_eq!(c.f_l2_norm, 0.0);

    let identity = RunConfig::parse(&config_text("kind = \"identity\"", QUARTIC, "kind = \"zero\"", "")).unwrap();
    assert_eq!(cmd_constants(&identity).unwrap().c_e, 1.0);

    let half = RunConfig::parse(&config_text("kind = \"scaled_identity\"\nscale = 0.25", QUARTIC, "kind = \"zero\"", ""))
        .unwrap();
    assert_eq!(cmd_constants(&half).unwrap().c_e, 2.0);

    let forced = RunConfig::parse(&admissible_text()).unwrap();
    let c = cmd_constants(&forced).unwrap();
    assert!((c.f_l2_norm - 0.5 * c.forcing_budget()).abs() <= 1e-12);
    assert!((c.beta - 0.5 * c.forcing_budget()).abs() <= 1e-12);
}

#[test]
fn constants_output_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let path = write_config(&dir, "a.toml", &admissible_text());
    let first = run_with("constants", &path, &[]);
    let second = run_with("constants", &path, &[]);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(first.stdout, second.stdout);
    let v = stdout_json(&first);
    for key in ["C_alpha", "C_e", "M", "m", "rho", "beta", "f_l2_norm", "admissible"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn check_accepts_the_admissible_problem() {
    let dir = TempDir::new().unwrap();
    let path = write_config(&dir, "a.toml", &admissible_text());
    let out = run_with("check", &path, &["--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["solver_ready"], true);
    assert!(dir.path().join("o/check.json").exists());
}

fn check_tags(text: &str) -> (Option<i32>, Vec<String>) {
    let dir = TempDir::new().unwrap();
    let path = write_config(&dir, "c.toml", text);
    let out = run_with("check", &path, &[]);
    let v = stdout_json(&out);
    let tags = v["failed"]
        .as_array()
        .unwrap()
        .iter()
        .map(|t| t.as_str().unwrap().to_string())
        .collect();
    (out.status.code(), tags)
}

#[test]
fn broken_hypotheses_fail_with_their_tags() {
    let quadratic_potential = "kind = \"homogeneous\"\namplitude = 0.1\nmu = 2.0";
    let (code, tags) = check_tags(&config_text(QUADRATIC, quadratic_potential, HALF_BUDGET, ""));
    assert_eq!(code, Some(3));
    assert_eq!(tags, ["W1"]);

    let oversized = "kind = \"gaussian\"\namplitude = 5.0";
    let (code, tags) = check_tags(&config_text(QUADRATIC, QUARTIC, oversized, ""));
    assert_eq!(code, Some(3));
    assert_eq!(tags, ["Wf"]);

    let indefinite = "kind = \"coupled\"\nc0 = 1.0\nc1 = 1.0\nkappa = 3.0";
    let (code, tags) = check_tags(&config_text(indefinite, QUARTIC, "kind = \"zero\"", ""));
    assert_eq!(code, Some(3));
    assert!(tags.contains(&"L".to_string()), "{tags:?}");
}

#[test]
fn library_check_matches_binary() {
    let cfg = RunConfig::parse(&admissible_text()).unwrap();
    let outcome = cmd_check(&cfg).unwrap();
    assert!(outcome.ready && outcome.failed.is_empty());
}

#[test]
fn solve_writes_certified_artifacts() {
    let dir = TempDir::new().unwrap();
    let path = write_config(&dir, "a.toml", &admissible_text());
    let out_dir = dir.path().join("run");
    let out = run_with("solve", &path, &["--out", out_dir.to_str().unwrap(), "--trace"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["summary.json", "u_ekeland.csv", "u_mountain.csv", "trace_ekeland.csv", "trace_mp.csv"] {
        assert!(out_dir.join(f).exists(), "{f}");
    }
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["status"], "ok");
    let (c1, c, beta) = (
        summary["c1"].as_f64().unwrap(),
        summary["c"].as_f64().unwrap(),
        summary["constants"]["beta"].as_f64().unwrap(),
    );
    assert!(c1 <= 0.0 && 0.0 < beta && beta <= c);
    assert_eq!(summary["distinct"], true);

    let header = std::fs::read_to_string(out_dir.join("u_ekeland.csv")).unwrap();
    assert!(header.starts_with("t,u_1,u_2\n"));

    for name in ["u_ekeland.csv", "u_mountain.csv"] {
        let out = run_with("residual", &path, &[out_dir.join(name).to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
        let r = stdout_json(&out);
        assert!(r["strong_residual_l2"].as_f64().unwrap() <= 1e-4);
    }

    let again = dir.path().join("again");
    run_with("solve", &path, &["--out", again.to_str().unwrap()]);
    assert_eq!(
        std::fs::read(out_dir.join("summary.json")).unwrap(),
        std::fs::read(again.join("summary.json")).unwrap()
    );
}

#[test]
fn non_convergence_leaves_a_failed_summary() {
    let dir = TempDir::new().unwrap();
    let text = config_text(QUADRATIC, QUARTIC, HALF_BUDGET, "\n[solver]\nmax_iters = 2\n");
    let path = write_config(&dir, "a.toml", &text);
    let out_dir = dir.path().join("run");
    let out = run_with("solve", &path, &["--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
    let summary = std::fs::read_to_string(out_dir.join("summary.json")).unwrap();
    assert!(summary.contains("\"FAILED\""));
    assert!(out_dir.join("u_ekeland.csv").exists());
}

#[test]
fn solve_refuses_a_spec_that_fails_the_audit() {
    let dir = TempDir::new().unwrap();
    let text = config_text(QUADRATIC, QUARTIC, "kind = \"gaussian\"\namplitude = 5.0", "");
    let path = write_config(&dir, "a.toml", &text);
    let out_dir = dir.path().join("run");
    let out = run_with("solve", &path, &["--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    assert!(std::fs::read_to_string(out_dir.join("summary.json")).unwrap().contains("\"FAILED\""));
}

#[test]
fn residual_of_trivial_and_manufactured_profiles() {
    let dir = TempDir::new().unwrap();
    let unforced = write_config(&dir, "z.toml", &config_text(QUADRATIC, QUARTIC, "kind = \"zero\"", ""));
    let cfg = RunConfig::load(&unforced).unwrap();
    let zero = dir.path().join("zero.csv");
    write_signal(&zero, &GridSignal::zeros(cfg.grid().unwrap())).unwrap();
    let r = stdout_json(&run_with("residual", &unforced, &[zero.to_str().unwrap()]));
    assert_eq!(r["strong_residual_l2"].as_f64().unwrap(), 0.0);
    assert_eq!(r["action_value"].as_f64().unwrap(), 0.0);

    let manufactured = write_config(
        &dir,
        "m.toml",
        &config_text(QUADRATIC, QUARTIC, "kind = \"manufactured\"\namplitude = 0.4\nwidth = 1.5", ""),
    );
    let cfg = RunConfig::load(&manufactured).unwrap();
    let star = dir.path().join("star.csv");
    write_signal(&star, &cfg.manufactured_solution().unwrap().unwrap()).unwrap();
    let r = stdout_json(&run_with("residual", &manufactured, &[star.to_str().unwrap()]));
    assert!(r["strong_residual_l2"].as_f64().unwrap() <= 1e-10);
}

#[test]
fn residual_rejects_a_foreign_grid() {
    let dir = TempDir::new().unwrap();
    let path = write_config(&dir, "a.toml", &admissible_text());
    let other = dir.path().join("other.csv");
    write_signal(&other, &GridSignal::zeros(Grid::new(10.0, 512, 2).unwrap())).unwrap();
    let out = run_with("residual", &path, &[other.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    let garbage = dir.path().join("garbage.csv");
    std::fs::write(&garbage, "t,u_1,u_2\n-20,abc,0\n").unwrap();
    let out = run_with("residual", &path, &[garbage.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn forcing_from_file_matches_inline_forcing() {
    let dir = TempDir::new().unwrap();
    let inline = RunConfig::parse(&admissible_text()).unwrap();
    let p = inline.build_problem().unwrap();
    write_signal(&dir.path().join("f.csv"), p.forcing()).unwrap();
    let path = write_config(&dir, "f.toml", &config_text(QUADRATIC, QUARTIC, "kind = \"file\"\npath = \"f.csv\"", ""));
    let from_file = RunConfig::load(&path).unwrap().build_problem().unwrap();
    assert_eq!(from_file.forcing().values(), p.forcing().values());
}

#[test]
fn seed_flag_overrides_config() {
    let mut cfg = RunConfig::parse(&format!("seed = 7\n{}", admissible_text())).unwrap();
    assert_eq!(cfg.solver.seed, 7);
    cfg.set_seed(9);
    assert_eq!((cfg.seed(), cfg.solver.seed), (9, 9));
    assert_eq!(RunConfig::parse(&admissible_text()).unwrap().seed(), 42);
}

#[test]
fn smooth_profiles_round_trip_exactly() {
    let dir = TempDir::new().unwrap();
    let grid = Grid::new(20.0, 512, 3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let u = random_smooth_signal(grid, &mut rng).unwrap();
    let path = dir.path().join("u.csv");
    write_signal(&path, &u).unwrap();
    assert_eq!(read_signal(&path, &grid).unwrap().values(), u.values());
}

proptest! {
    #[test]
    fn numbers_round_trip(x in prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO) {
        prop_assert_eq!(format_number(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
    }

    #[test]
    fn signals_round_trip(values in prop::collection::vec(prop::num::f64::NORMAL, 16)) {
        let dir = TempDir::new().unwrap();
        let grid = Grid::new(3.0, 8, 2).unwrap();
        let u = GridSignal::new(grid, ndarray::Array2::from_shape_vec((8, 2), values).unwrap()).unwrap();
        let path = dir.path().join("u.csv");
        write_signal(&path, &u).unwrap();
        let back = read_signal(&path, &grid).unwrap();
        for (a, b) in back.values().iter().zip(u.values()) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
    }
}
