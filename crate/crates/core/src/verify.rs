//! Seeded cross-checks of the closed forms against independent oracles.
//!
//! Every suite draws its parameter vectors from a ChaCha8 generator seeded
//! from the caller's seed, so a failure can be reproduced from the seed and
//! the sample index alone. Samples are drawn sequentially and then evaluated
//! in parallel, which keeps the reports identical across thread counts.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bounds::{
    af_beta_max, af_capacity, af_mrc_predicates, cutset_bound, cutset_terms, rho_numeric_search,
};
use crate::error::Result;
use crate::gaussian::{assemble_covariance, gaussian_mutual_information, JointGaussianSystem, Var};
use crate::link::{capacity, gains_from_geometry, LinkGains, PowerBudget};
use crate::power::{two_hop_allocate, two_hop_brute_force};
use crate::sweep::SweepSpec;

pub const MI_TOLERANCE: f64 = 1e-9;
pub const RHO_SEARCH_TOLERANCE: f64 = 1e-7;
pub const RATE_TOLERANCE: f64 = 1e-9;
pub const BRUTE_FORCE_GRID: usize = 501;
pub const BALANCE_TOLERANCE: f64 = 1e-9;
pub const BETA_TOLERANCE: f64 = 0.10;

/// One randomly drawn operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub gains: LinkGains,
    pub p_s: f64,
    pub p_r: f64,
    pub rho: f64,
    pub noise: f64,
}

impl Sample {
    pub fn budget(&self) -> PowerBudget {
        PowerBudget {
            p_s_max: self.p_s,
            p_r_max: self.p_r,
            noise: self.noise,
        }
    }
}

impl fmt::Display for Sample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "gamma_sr={:?} gamma_rd={:?} gamma_sd={:?} p_s={:?} p_r={:?} rho={:?} noise={:?}",
            self.gains.gamma_sr,
            self.gains.gamma_rd,
            self.gains.gamma_sd,
            self.p_s,
            self.p_r,
            self.rho,
            self.noise
        )
    }
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.gen_range(lo.ln()..=hi.ln()).exp()
}

/// Draws gains in `[1e-6, 1]` and noise in `[1e-9, 1e-3]` (both log-uniform),
/// powers uniform in `(0, 1]` and `rho` uniform in `[-0.99, 0.99]`.
pub fn draw_sample(rng: &mut ChaCha8Rng) -> Sample {
    let gains = LinkGains {
        gamma_sr: log_uniform(rng, 1e-6, 1.0),
        gamma_rd: log_uniform(rng, 1e-6, 1.0),
        gamma_sd: log_uniform(rng, 1e-6, 1.0),
    };
    // gen::<f64>() lies in [0, 1), so 1 - u lies in (0, 1].
    let p_s = 1.0 - rng.gen::<f64>();
    let p_r = 1.0 - rng.gen::<f64>();
    let rho = rng.gen_range(-0.99..=0.99);
    let noise = log_uniform(rng, 1e-9, 1e-3);
    Sample {
        gains,
        p_s,
        p_r,
        rho,
        noise,
    }
}

/// `count` samples from a generator dedicated to one suite.
pub fn draw_samples(seed: u64, stream: u64, count: usize) -> Vec<Sample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    (0..count).map(|_| draw_sample(&mut rng)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub invariant: &'static str,
    pub index: usize,
    pub sample: Sample,
    pub detail: String,
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} violated at sample {}: {} [{}]",
            self.invariant, self.index, self.detail, self.sample
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub name: &'static str,
    pub samples: usize,
    pub failures: Vec<Failure>,
    /// Largest observed error of the suite's main comparison.
    pub worst_error: f64,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed() { "PASS" } else { "FAIL" };
        write!(
            f,
            "{status} {}: {} samples, {} failures, worst error {:.3e}",
            self.name,
            self.samples,
            self.failures.len(),
            self.worst_error
        )?;
        for failure in &self.failures {
            write!(f, "\n  {failure}")?;
        }
        Ok(())
    }
}

/// Per-sample outcome: the error of the main comparison plus any failures.
type Check = Result<(f64, Vec<(&'static str, String)>)>;

fn run_suite<F>(name: &'static str, samples: Vec<Sample>, check: F) -> SuiteReport
where
    F: Fn(&Sample) -> Check + Sync,
{
    let outcomes: Vec<Check> = samples.par_iter().map(&check).collect();
    let mut report = SuiteReport {
        name,
        samples: samples.len(),
        failures: Vec::new(),
        worst_error: 0.0,
    };
    for (index, (sample, outcome)) in samples.iter().zip(outcomes).enumerate() {
        match outcome {
            Ok((error, failures)) => {
                report.worst_error = report.worst_error.max(error);
                report
                    .failures
                    .extend(failures.into_iter().map(|(invariant, detail)| Failure {
                        invariant,
                        index,
                        sample: *sample,
                        detail,
                    }));
            }
            Err(e) => report.failures.push(Failure {
                invariant: "evaluation succeeds",
                index,
                sample: *sample,
                detail: e.to_string(),
            }),
        }
    }
    report
}

/// Mutual information from the joint covariance against both cut terms.
pub fn mi_oracle_suite(samples: usize, seed: u64) -> SuiteReport {
    run_suite(
        "MI oracle vs closed forms",
        draw_samples(seed, 1, samples),
        |s| {
            let sys = JointGaussianSystem::new(&s.gains, s.p_s, s.p_r, s.rho, s.noise)?;
            let cov = assemble_covariance(&sys)?;
            let g = &s.gains;
            let bc_mi =
                gaussian_mutual_information(&cov, &[Var::Xs], &[Var::Yd, Var::Yr], &[Var::Xr])?;
            let mac_mi = gaussian_mutual_information(&cov, &[Var::Xs, Var::Xr], &[Var::Yd], &[])?;
            let bc = capacity((g.gamma_sd + g.gamma_sr) * s.p_s * (1.0 - s.rho * s.rho) / s.noise);
            let coherent = (g.gamma_sd * s.p_s * g.gamma_rd * s.p_r).sqrt();
            let mac = capacity(
                (g.gamma_sd * s.p_s + g.gamma_rd * s.p_r + 2.0 * s.rho * coherent) / s.noise,
            );

            let (e_bc, e_mac) = ((bc_mi - bc).abs(), (mac_mi - mac).abs());
            let mut failures = Vec::new();
            if !(e_bc <= MI_TOLERANCE) {
                failures.push((
                    "I(Xs; Yd,Yr | Xr) = bc",
                    format!("oracle {bc_mi:?} vs closed {bc:?}"),
                ));
            }
            if !(e_mac <= MI_TOLERANCE) {
                failures.push((
                    "I(Xs,Xr; Yd) = mac",
                    format!("oracle {mac_mi:?} vs closed {mac:?}"),
                ));
            }
            Ok((e_bc.max(e_mac), failures))
        },
    )
}

/// Closed-form correlation against numeric search, plus the crossing property.
pub fn rho_star_suite(samples: usize, seed: u64) -> SuiteReport {
    run_suite(
        "rho* vs numeric search",
        draw_samples(seed, 2, samples),
        |s| {
            let budget = s.budget();
            let closed = cutset_bound(&s.gains, &budget)?;
            let (rho, rate) = rho_numeric_search(&s.gains, &budget, RHO_SEARCH_TOLERANCE)?;
            let error = (closed.rate - rate).abs();
            let mut failures = Vec::new();
            if !(error <= RATE_TOLERANCE) {
                failures.push((
                    "cutset rate = searched rate",
                    format!(
                        "closed {:?} at rho {:?} vs search {rate:?} at rho {rho:?}",
                        closed.rate, closed.rho_star
                    ),
                ));
            }
            let g = &s.gains;
            let delta = (g.gamma_sd + g.gamma_sr) * s.p_s - g.gamma_rd * s.p_r;
            if delta > 0.0 && closed.rho_star > 0.0 && closed.rho_star < 1.0 {
                let (bc, mac) = cutset_terms(g, s.p_s, s.p_r, closed.rho_star, s.noise)?;
                if !((bc - mac).abs() <= RATE_TOLERANCE) {
                    failures.push((
                        "bc(rho*) = mac(rho*)",
                        format!("bc {bc:?} vs mac {mac:?} at rho {:?}", closed.rho_star),
                    ));
                }
            }
            Ok((error, failures))
        },
    )
}

/// Max-flow allocation against an exhaustive lattice scan.
pub fn allocation_suite(samples: usize, seed: u64) -> SuiteReport {
    run_suite(
        "allocation vs brute force",
        draw_samples(seed, 3, samples),
        |s| {
            let budget = s.budget();
            let g = &s.gains;
            let best = two_hop_allocate(g, &budget)?;
            let lattice = two_hop_brute_force(g, &budget, BRUTE_FORCE_GRID)?;
            let last = (BRUTE_FORCE_GRID - 1) as f64;
            let step = (g.gamma_sr * s.p_s / last).max(g.gamma_rd * s.p_r / last);

            let mut failures = Vec::new();
            let shortfall = lattice.flow - best.flow;
            if shortfall > step {
                failures.push((
                    "flow >= lattice flow - one step",
                    format!(
                        "flow {:?} vs lattice {:?} (step {step:?})",
                        best.flow, lattice.flow
                    ),
                ));
            }
            let residual = best.balance_residual(g);
            if !(residual <= BALANCE_TOLERANCE * best.flow) {
                failures.push((
                    "balanced hops",
                    format!("residual {residual:?} at flow {:?}", best.flow),
                ));
            }
            if best.p_s > s.p_s || best.p_r > s.p_r || best.p_s < 0.0 || best.p_r < 0.0 {
                failures.push((
                    "powers within budget",
                    format!("p_s {:?} p_r {:?}", best.p_s, best.p_r),
                ));
            }
            Ok((shortfall.max(0.0) / best.flow, failures))
        },
    )
}

/// How often the closed-form comparison inequality agrees with the rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgreementReport {
    pub samples: usize,
    /// Samples where the inequality and the direct rate comparison agree.
    pub agreements: usize,
    /// Samples where the `beta <= SNR_sr` condition holds.
    pub beta_within_snr_sr: usize,
}

impl AgreementReport {
    pub fn rate(&self) -> f64 {
        self.agreements as f64 / self.samples.max(1) as f64
    }
}

impl fmt::Display for AgreementReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "INFO MRC/AF predicate agreement: {}/{} ({:.1}%), beta <= SNR_sr in {} samples",
            self.agreements,
            self.samples,
            100.0 * self.rate(),
            self.beta_within_snr_sr
        )
    }
}

/// Samples random configurations at a uniformly drawn fraction of the
/// largest admissible amplification factor.
pub fn predicate_agreement(samples: usize, seed: u64) -> Result<AgreementReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(4);
    let draws: Vec<(Sample, f64)> = (0..samples)
        .map(|_| {
            let s = draw_sample(&mut rng);
            (s, rng.gen::<f64>())
        })
        .collect();
    let outcomes: Vec<Result<(bool, bool)>> = draws
        .par_iter()
        .map(|(s, frac)| {
            let budget = s.budget();
            let beta = frac * af_beta_max(&s.gains, &budget)?;
            let p = af_mrc_predicates(&s.gains, &budget, beta)?;
            Ok((
                p.inequality_mrc_better == p.mrc_rate_better,
                p.beta_within_snr_sr,
            ))
        })
        .collect();
    let mut report = AgreementReport {
        samples,
        agreements: 0,
        beta_within_snr_sr: 0,
    };
    for outcome in outcomes {
        let (agree, liu) = outcome?;
        report.agreements += agree as usize;
        report.beta_within_snr_sr += liu as usize;
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaSensitivity {
    pub d_sr_axis: f64,
    pub beta_max: f64,
    pub rate_full: f64,
    pub rate_half: f64,
    /// `|rate_full - rate_half| / rate_full`.
    pub relative_delta: f64,
    pub tolerance: f64,
}

impl BetaSensitivity {
    pub fn passed(&self) -> bool {
        self.relative_delta < self.tolerance
    }
}

impl fmt::Display for BetaSensitivity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed() { "PASS" } else { "FAIL" };
        write!(
            f,
            "{status} AF beta sensitivity at d_sr = {}: rate {:.9} (beta_max {:.6e}) vs {:.9} (beta_max/2), delta {:.3}% (limit {:.0}%)",
            self.d_sr_axis,
            self.rate_full,
            self.beta_max,
            self.rate_half,
            100.0 * self.relative_delta,
            100.0 * self.tolerance
        )
    }
}

/// AF rate at the largest and at half the largest amplification factor,
/// evaluated at the midpoint of the sweep range.
pub fn beta_sensitivity(spec: &SweepSpec, tolerance: f64) -> Result<BetaSensitivity> {
    spec.validate()?;
    let x = 0.5 * (spec.axis_start + spec.axis_end);
    let gains = gains_from_geometry(&spec.geometry_at(x), &spec.path)?;
    let beta_max = af_beta_max(&gains, &spec.budget)?;
    let rate_full = af_capacity(&gains, &spec.budget, beta_max)?;
    let rate_half = af_capacity(&gains, &spec.budget, 0.5 * beta_max)?;
    let relative_delta = if rate_full > 0.0 {
        (rate_full - rate_half).abs() / rate_full
    } else {
        0.0
    };
    Ok(BetaSensitivity {
        d_sr_axis: x,
        beta_max,
        rate_full,
        rate_half,
        relative_delta,
        tolerance,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub suites: Vec<SuiteReport>,
    pub agreement: AgreementReport,
    pub beta: BetaSensitivity,
}

impl VerifyReport {
    /// True when every hard invariant held. The predicate agreement rate is
    /// informational and never fails the run.
    pub fn passed(&self) -> bool {
        self.suites.iter().all(SuiteReport::passed) && self.beta.passed()
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for suite in &self.suites {
            writeln!(f, "{suite}")?;
        }
        writeln!(f, "{}", self.agreement)?;
        write!(f, "{}", self.beta)
    }
}

/// Runs every suite. The beta check uses `beta_spec` only for its geometry
/// and budget. The allocation suite uses half as many samples as the
/// others because each of its samples scans a 501 x 501 lattice.
pub fn run_all(samples: usize, seed: u64, beta_spec: &SweepSpec) -> Result<VerifyReport> {
    let suites = vec![
        mi_oracle_suite(samples, seed),
        rho_star_suite(samples, seed),
        allocation_suite(samples.div_ceil(2), seed),
    ];
    Ok(VerifyReport {
        suites,
        agreement: predicate_agreement(samples, seed)?,
        beta: beta_sensitivity(beta_spec, BETA_TOLERANCE)?,
    })
}
