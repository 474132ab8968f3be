//! Relay-position sweeps.
//!
//! The relay moves along a line parallel to the source-destination axis at a
//! fixed perpendicular offset. Every position gets the full set of rates
//! (direct, MRC, AF, cutset) and the rows are written as CSV.

use std::fmt;
use std::io::{self, Write};

use rayon::prelude::*;

use crate::bounds::{
    af_beta_max, af_capacity, cutset_bound, direct_capacity, mrc_capacity, Binding,
};
use crate::error::{check_nonnegative, check_positive, Error, Result};
use crate::link::{gains_from_geometry, LinkGains, NodeGeometry, PathLossParams, PowerBudget};

pub const CSV_HEADER: &str =
    "d_sr_m,gamma_sr,gamma_rd,gamma_sd,rate_direct,rate_mrc,rate_af,rate_cutset,rho_star,binding";

/// Slack (bits) before a rate ordering counts as violated.
pub const ORDERING_TOLERANCE: f64 = 1e-12;

/// How the AF amplification factor is chosen at each position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BetaPolicy {
    /// Largest factor the relay power budget allows.
    Max,
    Fixed(f64),
}

impl BetaPolicy {
    pub fn resolve(&self, gains: &LinkGains, budget: &PowerBudget) -> Result<f64> {
        match *self {
            BetaPolicy::Max => af_beta_max(gains, budget),
            BetaPolicy::Fixed(beta) => Ok(beta),
        }
    }
}

impl fmt::Display for BetaPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BetaPolicy::Max => f.write_str("max"),
            BetaPolicy::Fixed(beta) => write!(f, "{beta}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    /// Source-destination separation, meters.
    pub d_sd: f64,
    /// Perpendicular offset of the relay, meters.
    pub d_r: f64,
    pub axis_start: f64,
    pub axis_end: f64,
    pub axis_step: f64,
    pub budget: PowerBudget,
    pub path: PathLossParams,
    pub beta: BetaPolicy,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        check_positive("d_sd", self.d_sd)?;
        check_nonnegative("d_r", self.d_r)?;
        check_positive("axis_step", self.axis_step)?;
        if !(self.axis_start.is_finite() && self.axis_end.is_finite())
            || self.axis_start > self.axis_end
        {
            return Err(Error::Domain {
                name: "axis_end",
                value: self.axis_end,
                expected: ">= axis_start",
            });
        }
        if let BetaPolicy::Fixed(beta) = self.beta {
            check_nonnegative("beta", beta)?;
        }
        self.budget.validate()?;
        self.path.validate()
    }

    /// Relay positions from `axis_start` to `axis_end` inclusive. The last
    /// step is shortened so the sweep always ends exactly at `axis_end`.
    pub fn positions(&self) -> Vec<f64> {
        let span = self.axis_end - self.axis_start;
        let steps = (span / self.axis_step + 1e-9).floor() as usize;
        // Counting in units of the step keeps grid points such as 0.33 free of
        // the rounding drift that `start + i * step` accumulates.
        let offset = self.axis_start / self.axis_step;
        let mut xs: Vec<f64> = (0..=steps)
            .map(|i| (offset + i as f64) * self.axis_step)
            .collect();
        let last = xs[xs.len() - 1];
        if self.axis_end - last > 1e-9 * self.axis_step {
            xs.push(self.axis_end);
        }
        xs
    }

    pub fn geometry_at(&self, d_sr_axis: f64) -> NodeGeometry {
        NodeGeometry {
            d_sd: self.d_sd,
            d_sr_axis,
            d_r: self.d_r,
        }
    }
}

/// All rates at one relay position.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub d_sr_axis: f64,
    pub gains: LinkGains,
    pub rate_direct: f64,
    pub rate_mrc: f64,
    pub rate_af: f64,
    pub rate_cutset: f64,
    pub rho_star: f64,
    pub binding: Binding,
}

/// Evaluates every strategy for one set of link gains.
pub fn evaluate_gains(
    d_sr_axis: f64,
    gains: &LinkGains,
    budget: &PowerBudget,
    beta: BetaPolicy,
) -> Result<SweepRow> {
    let cutset = cutset_bound(gains, budget)?;
    let beta = beta.resolve(gains, budget)?;
    Ok(SweepRow {
        d_sr_axis,
        gains: *gains,
        rate_direct: direct_capacity(gains, budget)?,
        rate_mrc: mrc_capacity(gains, budget)?,
        rate_af: af_capacity(gains, budget, beta)?,
        rate_cutset: cutset.rate,
        rho_star: cutset.rho_star,
        binding: cutset.binding,
    })
}

/// A position that could not be evaluated because the relay sits on a node.
#[derive(Debug, Clone, PartialEq)]
pub struct SkippedPosition {
    pub d_sr_axis: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutput {
    pub rows: Vec<SweepRow>,
    pub skipped: Vec<SkippedPosition>,
}

enum Outcome {
    Row(SweepRow),
    Skip(SkippedPosition),
}

fn colocation(geom: &NodeGeometry) -> Option<&'static str> {
    if geom.source_relay_distance() == 0.0 {
        Some("relay co-located with source")
    } else if geom.relay_destination_distance() == 0.0 {
        Some("relay co-located with destination")
    } else {
        None
    }
}

/// Evaluates every position of the sweep. Rows come back in position order
/// regardless of how the work was scheduled.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepOutput> {
    spec.validate()?;
    let outcomes: Vec<Result<Outcome>> = spec
        .positions()
        .into_par_iter()
        .map(|x| {
            let geom = spec.geometry_at(x);
            if let Some(reason) = colocation(&geom) {
                return Ok(Outcome::Skip(SkippedPosition {
                    d_sr_axis: x,
                    reason: reason.to_string(),
                }));
            }
            let gains = gains_from_geometry(&geom, &spec.path)?;
            evaluate_gains(x, &gains, &spec.budget, spec.beta).map(Outcome::Row)
        })
        .collect();

    let mut output = SweepOutput {
        rows: Vec::with_capacity(outcomes.len()),
        skipped: Vec::new(),
    };
    for outcome in outcomes {
        match outcome? {
            Outcome::Row(row) => output.rows.push(row),
            Outcome::Skip(skip) => output.skipped.push(skip),
        }
    }
    Ok(output)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    pub name: &'static str,
    pub spec: SweepSpec,
}

/// The two reference scenarios: a 1 m link (high SNR) and a 500 m link (low
/// SNR), both with 100 mW at source and relay and 1 uW of noise.
pub fn preset_scenarios() -> Vec<Scenario> {
    let budget = PowerBudget {
        p_s_max: 0.1,
        p_r_max: 0.1,
        noise: 1e-6,
    };
    vec![
        Scenario {
            name: "high-snr",
            spec: SweepSpec {
                d_sd: 1.0,
                d_r: 0.1,
                axis_start: -0.5,
                axis_end: 1.5,
                axis_step: 0.01,
                budget,
                path: PathLossParams::default(),
                beta: BetaPolicy::Max,
            },
        },
        Scenario {
            name: "low-snr",
            spec: SweepSpec {
                d_sd: 500.0,
                d_r: 10.0,
                axis_start: -100.0,
                axis_end: 600.0,
                axis_step: 1.0,
                budget,
                path: PathLossParams::default(),
                beta: BetaPolicy::Max,
            },
        },
    ]
}

pub fn preset(name: &str) -> Option<SweepSpec> {
    preset_scenarios()
        .into_iter()
        .find(|s| s.name == name)
        .map(|s| s.spec)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderingKind {
    DirectAboveMrc,
    MrcAboveCutset,
    AfAboveCutset,
}

impl fmt::Display for OrderingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OrderingKind::DirectAboveMrc => "direct > MRC",
            OrderingKind::MrcAboveCutset => "MRC > cutset",
            OrderingKind::AfAboveCutset => "AF > cutset",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderingViolation {
    pub d_sr_axis: f64,
    pub kind: OrderingKind,
    /// How far the ordering is exceeded, bits.
    pub excess: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub d_sr_axis: f64,
    pub from: Binding,
    pub to: Binding,
}

/// Curve-shape summary of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeReport {
    pub rows: usize,
    pub af_argmax: f64,
    pub af_max: f64,
    pub violations: Vec<OrderingViolation>,
    /// Binding tag of every row, in position order.
    pub bindings: Vec<(f64, Binding)>,
    /// Positions where the tag differs from the previous row.
    pub transitions: Vec<Transition>,
    /// Number of MAC/BC switches, ignoring EQUAL rows.
    pub mac_bc_switches: usize,
    pub max_cutset_gain: f64,
    pub max_cutset_gain_at: f64,
}

impl ShapeReport {
    pub fn violations_of(&self, kind: OrderingKind) -> usize {
        self.violations.iter().filter(|v| v.kind == kind).count()
    }

    pub fn binding_at(&self, d_sr_axis: f64) -> Option<Binding> {
        self.bindings
            .iter()
            .min_by(|a, b| (a.0 - d_sr_axis).abs().total_cmp(&(b.0 - d_sr_axis).abs()))
            .map(|&(_, b)| b)
    }

    /// MAC/BC switches among rows with `lo <= d_sr_axis <= hi`.
    pub fn switches_between(&self, lo: f64, hi: f64) -> usize {
        count_switches(
            self.bindings
                .iter()
                .filter(|(x, _)| (lo..=hi).contains(x))
                .map(|&(_, b)| b),
        )
    }
}

fn count_switches(tags: impl Iterator<Item = Binding>) -> usize {
    let mut last = None;
    let mut switches = 0;
    for tag in tags.filter(|&b| b != Binding::Equal) {
        if last.is_some_and(|prev| prev != tag) {
            switches += 1;
        }
        last = Some(tag);
    }
    switches
}

/// Position in meters with grid rounding noise removed.
fn position(x: f64) -> String {
    let text = format!("{x:.9}");
    let text = text.trim_end_matches('0').trim_end_matches('.');
    if text == "-0" {
        "0".to_string()
    } else {
        text.to_string()
    }
}

impl fmt::Display for ShapeReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "rows: {}", self.rows)?;
        writeln!(
            f,
            "AF maximum: {:.6} bits at d_sr = {}",
            self.af_max,
            position(self.af_argmax)
        )?;
        writeln!(f, "ordering violations: {}", self.violations.len())?;
        for kind in [
            OrderingKind::DirectAboveMrc,
            OrderingKind::MrcAboveCutset,
            OrderingKind::AfAboveCutset,
        ] {
            let n = self.violations_of(kind);
            if n > 0 {
                let first = self.violations.iter().find(|v| v.kind == kind).unwrap();
                let worst = self
                    .violations
                    .iter()
                    .filter(|v| v.kind == kind)
                    .map(|v| v.excess)
                    .fold(0.0, f64::max);
                writeln!(
                    f,
                    "  {kind}: {n} rows, first at d_sr = {}, worst excess {worst:.3e} bits",
                    position(first.d_sr_axis)
                )?;
            }
        }
        let first = self.bindings.first().map(|b| b.1.as_str()).unwrap_or("-");
        writeln!(
            f,
            "binding: starts {first}, {} transitions, {} MAC/BC switches",
            self.transitions.len(),
            self.mac_bc_switches
        )?;
        for t in &self.transitions {
            writeln!(
                f,
                "  {} -> {} at d_sr = {}",
                t.from,
                t.to,
                position(t.d_sr_axis)
            )?;
        }
        write!(
            f,
            "max cutset gain over direct: {:.6} bits at d_sr = {}",
            self.max_cutset_gain,
            position(self.max_cutset_gain_at)
        )
    }
}

pub fn analyze_sweep(rows: &[SweepRow]) -> Result<ShapeReport> {
    if rows.len() < 3 {
        return Err(Error::TooFewRows(rows.len()));
    }

    let mut violations = Vec::new();
    for r in rows {
        let checks = [
            (OrderingKind::DirectAboveMrc, r.rate_direct - r.rate_mrc),
            (OrderingKind::MrcAboveCutset, r.rate_mrc - r.rate_cutset),
            (OrderingKind::AfAboveCutset, r.rate_af - r.rate_cutset),
        ];
        for (kind, excess) in checks {
            if excess > ORDERING_TOLERANCE {
                violations.push(OrderingViolation {
                    d_sr_axis: r.d_sr_axis,
                    kind,
                    excess,
                });
            }
        }
    }

    let af_best = rows.iter().fold(
        &rows[0],
        |best, r| if r.rate_af > best.rate_af { r } else { best },
    );
    let gain_best = rows.iter().fold(&rows[0], |best, r| {
        if r.rate_cutset - r.rate_direct > best.rate_cutset - best.rate_direct {
            r
        } else {
            best
        }
    });

    let bindings: Vec<(f64, Binding)> = rows.iter().map(|r| (r.d_sr_axis, r.binding)).collect();
    let transitions = bindings
        .windows(2)
        .filter(|w| w[0].1 != w[1].1)
        .map(|w| Transition {
            d_sr_axis: w[1].0,
            from: w[0].1,
            to: w[1].1,
        })
        .collect();

    Ok(ShapeReport {
        rows: rows.len(),
        af_argmax: af_best.d_sr_axis,
        af_max: af_best.rate_af,
        violations,
        mac_bc_switches: count_switches(bindings.iter().map(|&(_, b)| b)),
        bindings,
        transitions,
        max_cutset_gain: gain_best.rate_cutset - gain_best.rate_direct,
        max_cutset_gain_at: gain_best.d_sr_axis,
    })
}

fn sci(x: f64) -> String {
    format!("{x:.9e}")
}

/// One CSV data line (no terminator) in the column order of [`CSV_HEADER`].
pub fn csv_record(row: &SweepRow) -> Vec<String> {
    vec![
        sci(row.d_sr_axis),
        sci(row.gains.gamma_sr),
        sci(row.gains.gamma_rd),
        sci(row.gains.gamma_sd),
        sci(row.rate_direct),
        sci(row.rate_mrc),
        sci(row.rate_af),
        sci(row.rate_cutset),
        sci(row.rho_star),
        row.binding.as_str().to_string(),
    ]
}

/// Writes the header and one line per row; returns the number of bytes written.
pub fn emit_csv<W: Write>(rows: &[SweepRow], mut destination: W) -> io::Result<usize> {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    writer.write_record(CSV_HEADER.split(','))?;
    for row in rows {
        writer.write_record(csv_record(row))?;
    }
    let bytes = writer.into_inner().map_err(|e| e.into_error())?;
    destination.write_all(&bytes)?;
    destination.flush()?;
    Ok(bytes.len())
}
