//! Physical-layer arithmetic: far-field path gain, node geometry, SNR and
//! the Shannon capacity function.
//!
//! The path gain model is `G_tx * G_rx * (lambda / 4 pi)^2 * d^-alpha`, with
//! an extra `base_gain` factor so that unit-gain scenarios can be rescaled.

use std::f64::consts::{LN_2, PI};

use crate::error::{check_nonnegative, check_positive, Error, Result};

/// Parameters of the inverse-power-law path gain model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathLossParams {
    pub tx_gain: f64,
    pub rx_gain: f64,
    /// Carrier wavelength in meters.
    pub wavelength: f64,
    pub exponent: f64,
    pub base_gain: f64,
}

impl Default for PathLossParams {
    fn default() -> Self {
        Self {
            tx_gain: 1.0,
            rx_gain: 1.0,
            wavelength: 0.12,
            exponent: 2.0,
            base_gain: 1.0,
        }
    }
}

impl PathLossParams {
    pub fn validate(&self) -> Result<()> {
        check_positive("tx_gain", self.tx_gain)?;
        check_positive("rx_gain", self.rx_gain)?;
        check_positive("wavelength", self.wavelength)?;
        check_positive("exponent", self.exponent)?;
        check_positive("base_gain", self.base_gain)
    }
}

/// Planar layout: source at the origin, destination at `(d_sd, 0)`, relay at
/// `(d_sr_axis, d_r)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeGeometry {
    pub d_sd: f64,
    pub d_sr_axis: f64,
    pub d_r: f64,
}

impl NodeGeometry {
    pub fn new(d_sd: f64, d_sr_axis: f64, d_r: f64) -> Result<Self> {
        let geom = Self {
            d_sd,
            d_sr_axis,
            d_r,
        };
        geom.validate()?;
        Ok(geom)
    }

    pub fn validate(&self) -> Result<()> {
        check_positive("d_sd", self.d_sd)?;
        check_nonnegative("d_r", self.d_r)?;
        if !self.d_sr_axis.is_finite() {
            return Err(Error::Domain {
                name: "d_sr_axis",
                value: self.d_sr_axis,
                expected: "finite",
            });
        }
        Ok(())
    }

    pub fn source_relay_distance(&self) -> f64 {
        self.d_sr_axis.hypot(self.d_r)
    }

    pub fn relay_destination_distance(&self) -> f64 {
        (self.d_sd - self.d_sr_axis).hypot(self.d_r)
    }
}

/// Dimensionless power gains of the three links.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LinkGains {
    pub gamma_sr: f64,
    pub gamma_rd: f64,
    pub gamma_sd: f64,
}

impl LinkGains {
    pub fn new(gamma_sr: f64, gamma_rd: f64, gamma_sd: f64) -> Result<Self> {
        let gains = Self {
            gamma_sr,
            gamma_rd,
            gamma_sd,
        };
        gains.validate()?;
        Ok(gains)
    }

    pub fn validate(&self) -> Result<()> {
        check_nonnegative("gamma_sr", self.gamma_sr)?;
        check_nonnegative("gamma_rd", self.gamma_rd)?;
        check_nonnegative("gamma_sd", self.gamma_sd)
    }

    /// Same gain on every link.
    pub fn uniform(gamma: f64) -> Result<Self> {
        Self::new(gamma, gamma, gamma)
    }
}

/// Per-node power limits and the receiver noise power, all in watts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerBudget {
    pub p_s_max: f64,
    pub p_r_max: f64,
    pub noise: f64,
}

impl PowerBudget {
    pub fn new(p_s_max: f64, p_r_max: f64, noise: f64) -> Result<Self> {
        let budget = Self {
            p_s_max,
            p_r_max,
            noise,
        };
        budget.validate()?;
        Ok(budget)
    }

    // Zero powers are allowed: a silent relay is a meaningful corner case.
    pub fn validate(&self) -> Result<()> {
        check_nonnegative("p_s_max", self.p_s_max)?;
        check_nonnegative("p_r_max", self.p_r_max)?;
        check_positive("noise", self.noise)
    }
}

/// Far-field power gain at `distance` meters.
pub fn path_gain(distance: f64, params: &PathLossParams) -> Result<f64> {
    params.validate()?;
    check_positive("distance", distance)?;
    let aperture = params.wavelength / (4.0 * PI);
    Ok(params.base_gain
        * params.tx_gain
        * params.rx_gain
        * aperture
        * aperture
        * distance.powf(-params.exponent))
}

pub fn gains_from_geometry(geom: &NodeGeometry, params: &PathLossParams) -> Result<LinkGains> {
    geom.validate()?;
    Ok(LinkGains {
        gamma_sr: path_gain(geom.source_relay_distance(), params)?,
        gamma_rd: path_gain(geom.relay_destination_distance(), params)?,
        gamma_sd: path_gain(geom.d_sd, params)?,
    })
}

pub fn snr(gain: f64, power: f64, noise: f64) -> Result<f64> {
    check_positive("noise", noise)?;
    check_nonnegative("gain", gain)?;
    check_nonnegative("power", power)?;
    Ok(gain * power / noise)
}

/// `0.5 * log2(1 + s)` in bits per channel use.
pub fn capacity_of_snr(s: f64) -> Result<f64> {
    check_nonnegative("snr", s)?;
    Ok(capacity(s))
}

/// Unchecked Shannon capacity for internal callers that already hold a valid SNR.
#[inline]
pub(crate) fn capacity(s: f64) -> f64 {
    0.5 * s.ln_1p() / LN_2
}
