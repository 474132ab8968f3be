//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any criterion fails.

use std::fs;
use std::path::Path;
use std::process::{Command, ExitCode};

use relaycap_core::sweep::OrderingKind;
use relaycap_core::verify::{
    allocation_suite, beta_sensitivity, mi_oracle_suite, rho_star_suite, SuiteReport,
    BETA_TOLERANCE,
};
use relaycap_core::{
    af_capacity, analyze_sweep, capacity_of_snr, cutset_bound, direct_capacity, preset, run_sweep,
    Binding, LinkGains, PowerBudget,
};

const SEED: u64 = 0;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    passed: bool,
    summary: String,
    details: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Outcome {
            passed: true,
            summary: String::new(),
            details: Vec::new(),
        }
    }

    fn require(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.passed = false;
            self.details.push(what.into());
        }
    }
}

fn from_suite(report: SuiteReport, limit: &str) -> Outcome {
    let mut o = Outcome::new();
    o.summary = format!(
        "{} samples, worst error {:.3e} (limit {limit})",
        report.samples, report.worst_error
    );
    for failure in report.failures.iter().take(5) {
        o.require(false, failure.to_string());
    }
    if report.failures.len() > 5 {
        o.details
            .push(format!("... {} failures in total", report.failures.len()));
    }
    o
}

fn mi_oracle() -> Outcome {
    from_suite(mi_oracle_suite(1000, SEED), "1e-9 bits")
}

fn rho_star() -> Outcome {
    from_suite(rho_star_suite(1000, SEED), "1e-9 bits")
}

fn allocation() -> Outcome {
    from_suite(allocation_suite(500, SEED), "one lattice step")
}

fn high_snr_shape() -> Outcome {
    let mut o = Outcome::new();
    let rows = run_sweep(&preset("high-snr").unwrap()).unwrap().rows;
    let report = analyze_sweep(&rows).unwrap();
    o.require(
        rows.len() == 201,
        format!("{} rows, expected 201", rows.len()),
    );
    for kind in [
        OrderingKind::DirectAboveMrc,
        OrderingKind::MrcAboveCutset,
        OrderingKind::AfAboveCutset,
    ] {
        let bad: Vec<_> = report
            .violations
            .iter()
            .filter(|v| v.kind == kind)
            .collect();
        if let (Some(first), Some(last)) = (bad.first(), bad.last()) {
            let worst = bad.iter().map(|v| v.excess).fold(0.0, f64::max);
            o.require(
                false,
                format!(
                    "{kind} at {} rows, d_sr from {} to {} m, worst excess {worst:.4e} bits",
                    bad.len(),
                    first.d_sr_axis,
                    last.d_sr_axis
                ),
            );
        }
    }
    o.require(
        (0.2..=0.8).contains(&report.af_argmax),
        format!("AF argmax at {} m, outside [0.2, 0.8]", report.af_argmax),
    );
    let at_source = report.binding_at(0.0);
    let at_destination = report.binding_at(1.0);
    o.require(
        at_source == Some(Binding::Mac),
        format!("binding at d_sr = 0 is {at_source:?}, expected MAC"),
    );
    o.require(
        at_destination == Some(Binding::Bc),
        format!("binding at d_sr = 1 is {at_destination:?}, expected BC"),
    );
    let switches = report.switches_between(0.0, 1.0);
    o.require(
        switches <= 1,
        format!("{switches} MAC/BC switches in [0, 1]"),
    );
    o.summary = format!(
        "{} rows, {} ordering violations, AF argmax {:.2} m, binding {} -> {}, {} switch(es)",
        rows.len(),
        report.violations.len(),
        report.af_argmax,
        at_source.map_or("-", |b| b.as_str()),
        at_destination.map_or("-", |b| b.as_str()),
        switches
    );
    o
}

fn low_snr_shape() -> Outcome {
    let mut o = Outcome::new();
    let spec = preset("low-snr").unwrap();
    let rows = run_sweep(&spec).unwrap().rows;
    let mrc_short = rows.iter().filter(|r| r.rate_mrc < r.rate_af).count();
    let between: Vec<_> = rows
        .iter()
        .filter(|r| r.d_sr_axis > 0.0 && r.d_sr_axis < spec.d_sd)
        .collect();
    let no_gain = between
        .iter()
        .filter(|r| r.rate_cutset.partial_cmp(&r.rate_direct) != Some(std::cmp::Ordering::Greater))
        .count();
    o.require(mrc_short == 0, format!("MRC < AF at {mrc_short} rows"));
    o.require(
        no_gain == 0,
        format!("cutset <= direct at {no_gain} rows between the endpoints"),
    );
    o.summary = format!(
        "{} rows, MRC >= AF everywhere: {}, cutset > direct at {}/{} interior rows",
        rows.len(),
        mrc_short == 0,
        between.len() - no_gain,
        between.len()
    );
    o
}

fn beta_insensitivity() -> Outcome {
    let mut o = Outcome::new();
    let b = beta_sensitivity(&preset("low-snr").unwrap(), BETA_TOLERANCE).unwrap();
    o.require(
        b.passed(),
        format!("relative delta {:.4} exceeds 0.10", b.relative_delta),
    );
    o.summary = format!(
        "d_sr = {} m, delta {:.3}% (limit 10%)",
        b.d_sr_axis,
        100.0 * b.relative_delta
    );
    o
}

fn sweep_csv(preset: &str, dir: &Path, name: &str) -> Result<Vec<u8>, String> {
    let path = dir.join(name);
    let status = Command::new(env!("CARGO_BIN_EXE_relaycap"))
        .args(["sweep", "--preset", preset, "--out"])
        .arg(&path)
        .output()
        .map_err(|e| e.to_string())?;
    if !status.status.success() {
        return Err(format!(
            "sweep --preset {preset} exited with {}",
            status.status
        ));
    }
    fs::read(&path).map_err(|e| e.to_string())
}

fn deterministic_outputs() -> Outcome {
    let mut o = Outcome::new();
    let dir = tempfile::tempdir().unwrap();
    let mut sizes = Vec::new();
    for (preset, rows) in [("high-snr", 201), ("low-snr", 701)] {
        let first = sweep_csv(preset, dir.path(), &format!("{preset}-1.csv"));
        let second = sweep_csv(preset, dir.path(), &format!("{preset}-2.csv"));
        match (first, second) {
            (Ok(a), Ok(b)) => {
                o.require(a == b, format!("{preset}: CSV files differ"));
                let lines = a.iter().filter(|&&c| c == b'\n').count();
                o.require(lines == rows + 1, format!("{preset}: {lines} lines"));
                sizes.push(format!("{preset} {} bytes", a.len()));
            }
            (Err(e), _) | (_, Err(e)) => o.require(false, e),
        }
    }
    o.summary = format!("two runs per preset byte-identical ({})", sizes.join(", "));
    o
}

fn analytic_anchors() -> Outcome {
    let mut o = Outcome::new();
    let c3 = capacity_of_snr(3.0).unwrap();
    o.require((c3 - 1.0).abs() <= 1e-12, format!("C(3) = {c3:?}"));

    let mut worst_beta0 = 0.0f64;
    for spec in [preset("high-snr").unwrap(), preset("low-snr").unwrap()] {
        for row in run_sweep(&spec).unwrap().rows {
            let af = af_capacity(&row.gains, &spec.budget, 0.0).unwrap();
            let direct = direct_capacity(&row.gains, &spec.budget).unwrap();
            worst_beta0 = worst_beta0.max((af - direct).abs());
        }
    }
    o.require(
        worst_beta0 <= 1e-12,
        format!("beta = 0 AF differs from direct by {worst_beta0:e}"),
    );

    let unit = cutset_bound(
        &LinkGains::uniform(1.0).unwrap(),
        &PowerBudget::new(1.0, 1.0, 1.0).unwrap(),
    )
    .unwrap();
    let expected = 0.5 * 3f64.log2();
    o.require(
        unit.rho_star == 0.0,
        format!("symmetric rho* = {}", unit.rho_star),
    );
    o.require(
        (unit.rate - expected).abs() <= 1e-12,
        format!("symmetric cutset {:?} vs {expected:?}", unit.rate),
    );
    o.summary = format!(
        "C(3) = {c3}, max |AF(beta=0) - direct| = {worst_beta0:e}, symmetric rho* = {}, rate = {:.12}",
        unit.rho_star, unit.rate
    );
    o
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("MI oracle equivalence", mi_oracle),
        ("rho* correctness", rho_star),
        ("power allocation optimality", allocation),
        ("high-SNR sweep shape", high_snr_shape),
        ("low-SNR sweep shape", low_snr_shape),
        ("AF beta insensitivity at low SNR", beta_insensitivity),
        ("deterministic sweep outputs", deterministic_outputs),
        ("analytic anchors", analytic_anchors),
    ];
    println!("acceptance criteria (seed {SEED})");
    let mut passed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = run();
        let status = if outcome.passed { "PASS" } else { "FAIL" };
        println!("{status} [{}] {name}: {}", i + 1, outcome.summary);
        for detail in &outcome.details {
            println!("       {detail}");
        }
        passed += outcome.passed as usize;
    }
    println!("acceptance: {passed}/{} criteria passed", criteria.len());
    if passed == criteria.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
