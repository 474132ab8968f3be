//! Power allocation for the two-hop chain without a direct link.
//!
//! End-to-end capacity is limited by the weaker hop, so the best operating
//! point balances the received powers, `gamma_sr * p_s = gamma_rd * p_r`, at
//! the largest value both power limits allow.

use crate::error::{Error, Result};
use crate::link::{capacity, LinkGains, PowerBudget};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AllocationResult {
    pub p_s: f64,
    pub p_r: f64,
    /// Received power on the bottleneck hop, `min(gamma_sr * p_s, gamma_rd * p_r)`.
    pub flow: f64,
    pub rate: f64,
}

impl AllocationResult {
    /// `|gamma_sr * p_s - gamma_rd * p_r|`.
    pub fn balance_residual(&self, gains: &LinkGains) -> f64 {
        (gains.gamma_sr * self.p_s - gains.gamma_rd * self.p_r).abs()
    }
}

fn check_hops(gains: &LinkGains, budget: &PowerBudget) -> Result<()> {
    gains.validate()?;
    budget.validate()?;
    if gains.gamma_sr <= 0.0 || gains.gamma_rd <= 0.0 {
        return Err(Error::InfeasibleRelay {
            gamma_sr: gains.gamma_sr,
            gamma_rd: gains.gamma_rd,
        });
    }
    Ok(())
}

/// Max-flow allocation: the node on the weaker hop transmits at full power
/// and the other backs off until the hops balance.
pub fn two_hop_allocate(gains: &LinkGains, budget: &PowerBudget) -> Result<AllocationResult> {
    check_hops(gains, budget)?;
    let source_side = gains.gamma_sr * budget.p_s_max;
    let relay_side = gains.gamma_rd * budget.p_r_max;
    let (p_s, p_r, flow) = if source_side == relay_side {
        (budget.p_s_max, budget.p_r_max, source_side)
    } else if source_side < relay_side {
        (budget.p_s_max, source_side / gains.gamma_rd, source_side)
    } else {
        (relay_side / gains.gamma_sr, budget.p_r_max, relay_side)
    };
    Ok(AllocationResult {
        p_s,
        p_r,
        flow,
        rate: capacity(flow / budget.noise),
    })
}

/// Exhaustive scan of a `grid x grid` power lattice, keeping pairs whose hop
/// powers differ by less than one lattice step times the larger gain.
///
/// Used to audit [`two_hop_allocate`]; ties keep the lowest source power.
pub fn two_hop_brute_force(
    gains: &LinkGains,
    budget: &PowerBudget,
    grid: usize,
) -> Result<AllocationResult> {
    check_hops(gains, budget)?;
    if grid < 2 {
        return Err(Error::Domain {
            name: "grid",
            value: grid as f64,
            expected: ">= 2",
        });
    }
    let last = (grid - 1) as f64;
    let step_s = budget.p_s_max / last;
    let step_r = budget.p_r_max / last;
    let slack = step_s.max(step_r) * gains.gamma_sr.max(gains.gamma_rd);

    let mut best = AllocationResult {
        p_s: 0.0,
        p_r: 0.0,
        flow: 0.0,
        rate: 0.0,
    };
    for i in 0..grid {
        let p_s = budget.p_s_max * (i as f64 / last);
        let source_side = gains.gamma_sr * p_s;
        for j in 0..grid {
            let p_r = budget.p_r_max * (j as f64 / last);
            let relay_side = gains.gamma_rd * p_r;
            if (source_side - relay_side).abs() >= slack && slack > 0.0 {
                continue;
            }
            let flow = source_side.min(relay_side);
            if flow > best.flow {
                best = AllocationResult {
                    p_s,
                    p_r,
                    flow,
                    rate: 0.0,
                };
            }
        }
    }
    best.rate = capacity(best.flow / budget.noise);
    Ok(best)
}
