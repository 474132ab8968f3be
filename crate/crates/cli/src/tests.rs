//! Command-level tests. Each case parses real arguments and runs the command
//! in-process, capturing what the binary would print.

use std::fs;
use std::path::Path;

use clap::Parser;

use crate::app::{run, Cli};
use crate::config::HIGH_SNR_PRESET;

struct Invocation {
    code: i32,
    stdout: String,
    error: String,
}

fn relaycap(args: &[&str]) -> Invocation {
    let argv = std::iter::once("relaycap").chain(args.iter().copied());
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            return Invocation {
                code: e.exit_code(),
                stdout: String::new(),
                error: e.to_string(),
            }
        }
    };
    let mut out = Vec::new();
    let (code, error) = match run(&cli, &mut out) {
        Ok(code) => (code, String::new()),
        Err(e) => (e.exit_code(), e.to_string()),
    };
    Invocation {
        code,
        stdout: String::from_utf8(out).unwrap(),
        error,
    }
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn path_str(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

#[test]
fn sweep_high_snr_writes_201_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = path_str(dir.path(), "rows.csv");
    let r = relaycap(&["sweep", "--preset", "high-snr", "--out", &out]);
    assert_eq!(r.code, 0, "{}", r.error);
    let csv = fs::read_to_string(&out).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("d_sr_m,gamma_sr"));
    assert_eq!(lines.count(), 201);
    assert!(r.stdout.contains("wrote 201 rows"));
    assert!(r.stdout.contains("AF maximum"));
}

#[test]
fn sweep_output_path_from_config_and_flag() {
    let dir = tempfile::tempdir().unwrap();
    let from_config = path_str(dir.path(), "from-config.csv");
    let text = HIGH_SNR_PRESET.replace("sweep.step = 0.01", "sweep.step = 0.5");
    let conf = write_config(
        dir.path(),
        "run.conf",
        &format!("{text}out.path = {from_config}\n"),
    );

    let r = relaycap(&["sweep", "--config", &conf]);
    assert_eq!(r.code, 0, "{}", r.error);
    assert_eq!(fs::read_to_string(&from_config).unwrap().lines().count(), 6);

    let flag = path_str(dir.path(), "flag.csv");
    let r = relaycap(&["sweep", "--config", &conf, "--out", &flag]);
    assert_eq!(r.code, 0);
    assert!(Path::new(&flag).exists());
}

#[test]
fn verify_defaults_pass() {
    let r = relaycap(&["verify", "--samples", "1000", "--seed", "0"]);
    assert_eq!(r.code, 0, "{}", r.stdout);
    assert!(r.stdout.contains("beta sensitivity"));
    assert!(r.stdout.contains("delta"));
    assert!(r.stdout.contains("predicate agreement"));
    assert!(!r.stdout.contains("FAIL"));
}

#[test]
fn verify_output_is_reproducible() {
    let a = relaycap(&["verify", "--samples", "50", "--seed", "9"]);
    let b = relaycap(&["verify", "--samples", "50", "--seed", "9"]);
    assert_eq!(a.stdout, b.stdout);
    assert!(a.stdout.starts_with("verify: 50 samples, seed 9"));
}

#[test]
fn capacity_with_dead_first_hop_falls_back() {
    let dir = tempfile::tempdir().unwrap();
    let conf = write_config(
        dir.path(),
        "g0.conf",
        &format!("{HIGH_SNR_PRESET}gain.sr = 0\n"),
    );
    let r = relaycap(&["capacity", "--config", &conf]);
    assert_eq!(r.code, 0, "{}", r.error);
    assert!(r.stdout.contains("direct-link fallback"));
    let fields: Vec<&str> = r.stdout.lines().last().unwrap().split(',').collect();
    assert_eq!(fields.len(), 10);
    // direct, MRC, AF and cutset all collapse to the same value.
    assert!(fields[4..8].iter().all(|f| *f == fields[4]));
}

#[test]
fn capacity_prints_block_and_csv_line() {
    let r = relaycap(&["capacity", "--preset", "high-snr", "--d-sr", "-0.25"]);
    assert_eq!(r.code, 0);
    assert!(r.stdout.starts_with("relay at d_sr = -0.25 m"));
    assert!(r.stdout.contains("cutset :"));
    assert!(r
        .stdout
        .lines()
        .last()
        .unwrap()
        .starts_with("-2.500000000e-1,"));
}

#[test]
fn optimize_power_prints_allocation() {
    let dir = tempfile::tempdir().unwrap();
    let conf = write_config(
        dir.path(),
        "hops.conf",
        "geom.d_sd = 1\ngeom.d_r = 0\nbudget.p_s_max = 1 W\nbudget.p_r_max = 2 W\n\
         budget.noise = 1\ngain.sr = 4\ngain.rd = 1\ngain.sd = 0\n",
    );
    let r = relaycap(&["optimize-power", "--config", &conf]);
    assert_eq!(r.code, 0, "{}", r.error);
    assert!(r.stdout.contains("p_s  = 5.000000000e-1 W"), "{}", r.stdout);
    assert!(r.stdout.contains("p_r  = 2.000000000e0 W"));
    assert!(r.stdout.contains("flow = 2.000000000e0 W"));
    assert!(r.stdout.contains("rate = 0.792481250 bits"));
}

#[test]
fn empty_config_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let conf = write_config(dir.path(), "empty.conf", "");
    let r = relaycap(&["capacity", "--config", &conf]);
    assert_eq!(r.code, 2);
    assert!(r.error.contains("missing d_sd"));
}

#[test]
fn domain_and_unknown_key_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = path_str(dir.path(), "never.csv");
    let bad = write_config(
        dir.path(),
        "bad.conf",
        &HIGH_SNR_PRESET.replace("geom.d_r = 0.1", "geom.d_r = -1"),
    );
    let r = relaycap(&["sweep", "--config", &bad, "--out", &out]);
    assert_eq!(r.code, 2);
    assert!(r.error.contains("domain"));
    assert!(!Path::new(&out).exists());

    let unknown = write_config(dir.path(), "unknown.conf", "geom.d_sd = 1\nfoo.bar = 2\n");
    let r = relaycap(&["capacity", "--config", &unknown]);
    assert_eq!(r.code, 2);
    assert!(r.error.contains("line 2"));
}

#[test]
fn fixed_beta_above_limit_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let conf = write_config(
        dir.path(),
        "beta.conf",
        &HIGH_SNR_PRESET.replace("af.beta = max", "af.beta = 1e9"),
    );
    let r = relaycap(&["capacity", "--config", &conf]);
    assert_eq!(r.code, 2);
    assert!(r.error.contains("exceeds the relay power limit"));
}

#[test]
fn bad_arguments_are_usage_errors() {
    assert_eq!(relaycap(&["launch"]).code, 2);
    assert_eq!(relaycap(&["verify", "--samples", "0"]).code, 2);
    assert_eq!(relaycap(&["sweep", "--preset", "mid-snr"]).code, 2);
    assert_eq!(
        relaycap(&["sweep", "--preset", "low-snr", "--config", "x.conf"]).code,
        2
    );
}

#[test]
fn io_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let missing = path_str(dir.path(), "does-not-exist.conf");
    assert_eq!(relaycap(&["capacity", "--config", &missing]).code, 3);
    let unwritable = path_str(dir.path(), "missing-dir/rows.csv");
    let r = relaycap(&["sweep", "--preset", "high-snr", "--out", &unwritable]);
    assert_eq!(r.code, 3);
    assert!(r.error.contains("missing-dir"));
}

#[test]
fn sweep_stdout_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let out = path_str(dir.path(), "a.csv");
    let a = relaycap(&["sweep", "--preset", "low-snr", "--out", &out]);
    let first = fs::read(&out).unwrap();
    let b = relaycap(&["sweep", "--preset", "low-snr", "--out", &out]);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(first, fs::read(&out).unwrap());
}
