//! Fixtures shared by the benchmarks.

use relaycap_core::{gains_from_geometry, preset, LinkGains, PowerBudget, SweepSpec};

pub fn high_snr() -> SweepSpec {
    preset("high-snr").expect("built-in preset")
}

/// Gains and budget with the relay at `d_sr_axis` in the high-SNR scenario.
pub fn high_snr_point(d_sr_axis: f64) -> (LinkGains, PowerBudget) {
    let spec = high_snr();
    let gains =
        gains_from_geometry(&spec.geometry_at(d_sr_axis), &spec.path).expect("relay off the axis");
    (gains, spec.budget)
}
