use std::path::Path;
use std::process::{Command, Output};

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_irs-cep"))
        .args(args)
        .output()
        .expect("spawn CLI")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

const SMALL: &str = r#"
[system]
cells = 2
users = 2
bs_antennas = 4
irs_elements = 3
bs_levels = 4
irs_levels = 4
bs_memory = 2
irs_memory = 2
total_power = 3.0
noise_power = 1e-3
seed = 11
mc_trials = 2

[[schemes]]
kind = "trellis-main"
[[schemes]]
kind = "trellis-low-overhead"
[[schemes]]
kind = "sdr-discrete"
[[schemes]]
kind = "sdr-continuous"
[[schemes]]
kind = "no-irs"
[[schemes]]
kind = "random-phase"
"#;

#[test]
fn simulate_writes_six_rows_per_trial() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "s.toml", SMALL);
    let out = dir.path().join("out.csv");
    let o = cli(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 1 + 2 * 6);
    let schemes: Vec<&str> = lines[1..7].iter().map(|l| l.split(',').nth(2).unwrap()).collect();
    assert_eq!(
        schemes,
        ["trellis-main", "trellis-low-overhead", "sdr-discrete", "sdr-continuous", "no-irs", "random-phase"]
    );
    for line in &lines[1..] {
        for field in line.split(',').skip(9) {
            assert!(field.parse::<f64>().unwrap().is_finite(), "{line}");
        }
    }
}

#[test]
fn single_trial_no_irs_rerun_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let text = SMALL
        .replace("mc_trials = 2", "mc_trials = 1")
        .split("[[schemes]]")
        .next()
        .unwrap()
        .to_string()
        + "[[schemes]]\nkind = \"no-irs\"\n";
    let cfg = write(dir.path(), "s.toml", &text);
    let mut csvs = Vec::new();
    for name in ["a.csv", "b.csv"] {
        let out = dir.path().join(name);
        assert!(cli(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap()]).status.success());
        let t = std::fs::read_to_string(out).unwrap();
        // elapsed_ms is the final column
        csvs.push(t.lines().map(|l| l.rsplit_once(',').unwrap().0.to_string()).collect::<Vec<_>>());
    }
    assert_eq!(csvs[0], csvs[1]);
}

#[test]
fn sweep_overrides_axis() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "s.toml", SMALL);
    let o = cli(&["sweep", "--config", &cfg, "--param", "K", "--values", "1,3", "--trials", "1", "--out", "-"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    let users: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').nth(4).unwrap()).collect();
    assert_eq!(users, [vec!["1"; 6], vec!["3"; 6]].concat());
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = write(dir.path(), "u.toml", &SMALL.replace("seed = 11", "seed = 11\nwobble = 1"));
    let o = cli(&["simulate", "--config", &unknown, "--out", "-"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("wobble"));

    let bad = write(dir.path(), "b.toml", &SMALL.replace("bs_memory = 2", "bs_memory = 9"));
    let o = cli(&["simulate", "--config", &bad, "--out", "-"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bs_memory"));

    let o = cli(&["simulate", "--config", "/nonexistent/x.toml", "--out", "-"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(cli(&["sweep", "--preset", "multicell-desk", "--param", "L", "--values", "2"]).status.code(), Some(2));
}

#[test]
fn unwritable_output_is_an_error() {
    let o = cli(&["simulate", "--preset", "single-cell-small", "--trials", "1", "--out", "/nonexistent/dir/x.csv"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn complexity_prints_reference_rows() {
    let o = cli(&["complexity"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("7424") && text.contains("59392"), "{text}");
    assert!(text.contains("1.394e42") && text.contains("1.646e63"), "{text}");

    let o = cli(&["complexity", "--case", "6,5,6,5,4,4"]);
    assert!(String::from_utf8(o.stdout).unwrap().lines().nth(1).unwrap().contains(" 0 "));
    assert_eq!(cli(&["complexity", "--case", "1,2,3"]).status.code(), Some(2));
}

#[test]
fn validate_passes_with_default_and_loosened_tolerance() {
    let o = cli(&["validate"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("9 of 9 checks passed"), "{text}");
    let o = cli(&["validate", "--seed", "5", "--sdp-tol", "1e-2"]);
    assert_eq!(o.status.code(), Some(0));
}
