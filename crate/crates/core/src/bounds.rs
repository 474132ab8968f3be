//! Closed-form outer bounds for the one-relay channel with a direct link.
//!
//! The cutset bound is the larger-is-better minimum of a broadcast term
//! (source to relay and destination, given the relay input) and a
//! multiple-access term (source and relay to destination), maximized over the
//! source/relay input correlation `rho`. Both terms are evaluated at the
//! maximum powers. Negative correlation lowers both terms, so only
//! `rho` in `[0, 1]` is searched.

use std::fmt;

use crate::error::{check_nonnegative, check_positive, Error, Result};
use crate::link::{capacity, LinkGains, PowerBudget};
use crate::search::golden_section_max;

/// Two rates closer than this (bits) are treated as equal.
pub const EQUAL_TOLERANCE: f64 = 1e-9;

/// Relative slack allowed on the amplification limit.
const BETA_SLACK: f64 = 1e-12;

/// Which cut limits the rate when the inputs are uncorrelated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Binding {
    /// Broadcast cut. Correlation cannot help; the optimum sits at `rho = 0`.
    Bc,
    /// Multiple-access cut. Correlation raises it until it meets the broadcast cut.
    Mac,
    /// Both cuts coincide at `rho = 0`.
    Equal,
}

impl Binding {
    pub fn as_str(&self) -> &'static str {
        match self {
            Binding::Bc => "BC",
            Binding::Mac => "MAC",
            Binding::Equal => "EQUAL",
        }
    }
}

impl fmt::Display for Binding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutsetResult {
    pub rate: f64,
    pub rho_star: f64,
    /// Broadcast term at `rho_star`.
    pub bc_rate: f64,
    /// Multiple-access term at `rho_star`.
    pub mac_rate: f64,
    pub binding: Binding,
}

/// Amplify-and-forward operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AfResult {
    pub beta: f64,
    pub rate: f64,
}

/// Outcome of the three AF/MRC comparisons. None of them is used to pick a
/// strategy; they are reported side by side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AfMrcPredicates {
    /// `SNR_sr SNR_sd / (SNR_sr + SNR_sd) < beta^2 gamma_rd`, the published
    /// closed-form condition for MRC beating AF.
    pub inequality_mrc_better: bool,
    /// `beta <= SNR_sr`, the condition under which AF is claimed to beat MRC.
    /// It compares an amplitude factor with a power ratio and is evaluated literally.
    pub beta_within_snr_sr: bool,
    /// Direct comparison of the two rates.
    pub mrc_rate_better: bool,
}

fn check_rho(rho: f64) -> Result<()> {
    if (-1.0..=1.0).contains(&rho) {
        Ok(())
    } else {
        Err(Error::Domain {
            name: "rho",
            value: rho,
            expected: "in [-1, 1]",
        })
    }
}

/// Unchecked broadcast and multiple-access terms.
fn terms(gains: &LinkGains, p_s: f64, p_r: f64, rho: f64, noise: f64) -> (f64, f64) {
    let coherent = (gains.gamma_sd * p_s * gains.gamma_rd * p_r).sqrt();
    let bc = (gains.gamma_sd + gains.gamma_sr) * p_s * (1.0 - rho * rho) / noise;
    let mac = (gains.gamma_sd * p_s + gains.gamma_rd * p_r + 2.0 * rho * coherent) / noise;
    (capacity(bc.max(0.0)), capacity(mac.max(0.0)))
}

/// Broadcast and multiple-access terms of the cutset bound at correlation `rho`.
pub fn cutset_terms(
    gains: &LinkGains,
    p_s: f64,
    p_r: f64,
    rho: f64,
    noise: f64,
) -> Result<(f64, f64)> {
    gains.validate()?;
    check_nonnegative("p_s", p_s)?;
    check_nonnegative("p_r", p_r)?;
    check_positive("noise", noise)?;
    check_rho(rho)?;
    Ok(terms(gains, p_s, p_r, rho, noise))
}

/// Crossing point of the two terms before clamping to `[0, 1]`.
///
/// Returns 0 when the broadcast term already binds at `rho = 0`, and may
/// return a non-finite value for degenerate inputs.
fn rho_crossing(gains: &LinkGains, p_s: f64, p_r: f64) -> Result<f64> {
    gains.validate()?;
    check_nonnegative("p_r", p_r)?;
    if !(p_s > 0.0) {
        return Err(Error::DegenerateSource);
    }
    let direct = gains.gamma_sd * p_s;
    let first_hop = gains.gamma_sr * p_s;
    let second_hop = gains.gamma_rd * p_r;
    let delta = direct + first_hop - second_hop;
    if delta <= 0.0 {
        return Ok(0.0);
    }
    // Positive root of (g_sr + g_sd) P_s r^2 + 2 sqrt(g_sd P_s g_rd P_r) r
    // + (g_rd P_r - g_sr P_s) = 0, rationalized so that nothing cancels when
    // the root is near zero.
    let numerator = first_hop - second_hop;
    if numerator <= 0.0 {
        return Ok(0.0);
    }
    Ok(numerator / ((direct * second_hop).sqrt() + (first_hop * delta).sqrt()))
}

/// Correlation that maximizes the cutset bound at powers `p_s`, `p_r`.
pub fn rho_star(gains: &LinkGains, p_s: f64, p_r: f64) -> Result<f64> {
    Ok(rho_crossing(gains, p_s, p_r)?.clamp(0.0, 1.0))
}

fn binding_at_zero(gains: &LinkGains, budget: &PowerBudget) -> Binding {
    let (bc, mac) = terms(gains, budget.p_s_max, budget.p_r_max, 0.0, budget.noise);
    if (bc - mac).abs() <= EQUAL_TOLERANCE {
        Binding::Equal
    } else if mac < bc {
        Binding::Mac
    } else {
        Binding::Bc
    }
}

/// Cutset bound at maximum powers, optimized over `rho` in `[0, 1]`.
pub fn cutset_bound(gains: &LinkGains, budget: &PowerBudget) -> Result<CutsetResult> {
    budget.validate()?;
    let (p_s, p_r) = (budget.p_s_max, budget.p_r_max);
    let crossing = rho_crossing(gains, p_s, p_r)?;
    let rho = if crossing.is_finite() && crossing <= 1.0 + BETA_SLACK {
        crossing.clamp(0.0, 1.0)
    } else {
        rho_numeric_search(gains, budget, 1e-12)?.0
    };
    let (bc_rate, mac_rate) = terms(gains, p_s, p_r, rho, budget.noise);
    Ok(CutsetResult {
        rate: bc_rate.min(mac_rate),
        rho_star: rho,
        bc_rate,
        mac_rate,
        binding: binding_at_zero(gains, budget),
    })
}

/// Numeric maximization of `min(bc, mac)` over `rho` in `[0, 1]`.
///
/// Golden-section search narrows the bracket to `tolerance`; the kink where
/// the two terms cross is then located by bisection on the sign of
/// `bc - mac` inside that bracket, and the endpoints 0 and 1 are considered
/// as candidates. Returns `(rho, rate)`.
pub fn rho_numeric_search(
    gains: &LinkGains,
    budget: &PowerBudget,
    tolerance: f64,
) -> Result<(f64, f64)> {
    gains.validate()?;
    budget.validate()?;
    check_positive("tolerance", tolerance)?;
    let (p_s, p_r, noise) = (budget.p_s_max, budget.p_r_max, budget.noise);
    let objective = |rho: f64| {
        let (bc, mac) = terms(gains, p_s, p_r, rho, noise);
        bc.min(mac)
    };
    let gap = |rho: f64| {
        let (bc, mac) = terms(gains, p_s, p_r, rho, noise);
        bc - mac
    };

    let coarse = golden_section_max(objective, 0.0, 1.0, tolerance);
    let mut candidates = vec![
        (coarse.x, coarse.value),
        (0.0, objective(0.0)),
        (1.0, objective(1.0)),
    ];

    let (mut lo, mut hi) = (coarse.lo, coarse.hi);
    if gap(lo) > 0.0 && gap(hi) < 0.0 {
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if gap(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        candidates.push((lo, objective(lo)));
        candidates.push((hi, objective(hi)));
    }

    let best = candidates
        .into_iter()
        .fold((f64::NAN, f64::NEG_INFINITY), |best, c| {
            if c.1 > best.1 || (c.1 == best.1 && c.0 < best.0) {
                c
            } else {
                best
            }
        });
    Ok(best)
}

/// Largest amplification factor the relay can afford:
/// `sqrt(p_r_max / (noise + gamma_sr p_s_max))`.
pub fn af_beta_max(gains: &LinkGains, budget: &PowerBudget) -> Result<f64> {
    gains.validate()?;
    budget.validate()?;
    Ok((budget.p_r_max / (budget.noise + gains.gamma_sr * budget.p_s_max)).sqrt())
}

pub fn af_capacity(gains: &LinkGains, budget: &PowerBudget, beta: f64) -> Result<f64> {
    let limit = af_beta_max(gains, budget)?;
    check_nonnegative("beta", beta)?;
    if beta > limit * (1.0 + BETA_SLACK) {
        return Err(Error::PowerViolation { beta, limit });
    }
    // (sqrt(g_sd) + beta sqrt(g_sr g_rd))^2 expanded so that beta = 0 gives
    // exactly the direct-link SNR.
    let relayed = gains.gamma_sr * gains.gamma_rd;
    let power_gain =
        gains.gamma_sd + 2.0 * beta * (gains.gamma_sd * relayed).sqrt() + beta * beta * relayed;
    let received = power_gain * budget.p_s_max;
    let noise = (1.0 + beta * beta * gains.gamma_rd) * budget.noise;
    Ok(capacity(received / noise))
}

/// AF rate with the relay at its full power budget.
pub fn af_at_max_beta(gains: &LinkGains, budget: &PowerBudget) -> Result<AfResult> {
    let beta = af_beta_max(gains, budget)?;
    Ok(AfResult {
        beta,
        rate: af_capacity(gains, budget, beta)?,
    })
}

struct Snrs {
    sd: f64,
    sr: f64,
    rd: f64,
}

fn snrs(gains: &LinkGains, budget: &PowerBudget) -> Result<Snrs> {
    gains.validate()?;
    budget.validate()?;
    Ok(Snrs {
        sd: gains.gamma_sd * budget.p_s_max / budget.noise,
        sr: gains.gamma_sr * budget.p_s_max / budget.noise,
        rd: gains.gamma_rd * budget.p_r_max / budget.noise,
    })
}

fn harmonic(a: f64, b: f64) -> f64 {
    if a + b == 0.0 {
        0.0
    } else {
        a * b / (a + b)
    }
}

pub fn mrc_capacity(gains: &LinkGains, budget: &PowerBudget) -> Result<f64> {
    let s = snrs(gains, budget)?;
    Ok(capacity(s.sd + harmonic(s.sr, s.rd)))
}

pub fn direct_capacity(gains: &LinkGains, budget: &PowerBudget) -> Result<f64> {
    let s = snrs(gains, budget)?;
    Ok(capacity(s.sd))
}

pub fn af_mrc_predicates(
    gains: &LinkGains,
    budget: &PowerBudget,
    beta: f64,
) -> Result<AfMrcPredicates> {
    let af = af_capacity(gains, budget, beta)?;
    let mrc = mrc_capacity(gains, budget)?;
    let s = snrs(gains, budget)?;
    Ok(AfMrcPredicates {
        inequality_mrc_better: harmonic(s.sr, s.sd) < beta * beta * gains.gamma_rd,
        beta_within_snr_sr: beta <= s.sr,
        mrc_rate_better: mrc > af,
    })
}
