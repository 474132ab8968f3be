//! Run configuration: a flat `key = value` document with dotted sections.
//!
//! ```text
//! # comment
//! budget.p_s_max = 100 mW
//! geom.d_sd = 1
//! af.beta = max
//! ```
//!
//! Power values (`budget.*`) accept `W`, `mW` and `uW` suffixes and are
//! stored in watts. Every other value is a bare number in SI units.

use std::collections::HashMap;
use std::path::PathBuf;

use relaycap_core::{BetaPolicy, LinkGains, NodeGeometry, PathLossParams, PowerBudget, SweepSpec};
use thiserror::Error;

pub const HIGH_SNR_PRESET: &str = include_str!("../presets/high-snr.conf");
pub const LOW_SNR_PRESET: &str = include_str!("../presets/low-snr.conf");

pub const DEFAULT_SAMPLES: usize = 1000;

const KEYS: &[&str] = &[
    "budget.p_s_max",
    "budget.p_r_max",
    "budget.noise",
    "geom.d_sd",
    "geom.d_r",
    "geom.d_sr",
    "sweep.start",
    "sweep.end",
    "sweep.step",
    "pathloss.lambda0",
    "pathloss.alpha",
    "pathloss.base_gain",
    "gain.sr",
    "gain.rd",
    "gain.sd",
    "af.beta",
    "out.path",
    "verify.samples",
    "verify.seed",
];

/// Keys without a default, in the order they are reported when absent.
const REQUIRED: &[&str] = &[
    "geom.d_sd",
    "geom.d_r",
    "budget.p_s_max",
    "budget.p_r_max",
    "budget.noise",
];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, found `{text}`")]
    Syntax { line: usize, text: String },

    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },

    #[error("line {line}: `{key}` is set twice (first on line {first})")]
    Duplicate {
        line: usize,
        key: String,
        first: usize,
    },

    #[error("missing {name} (required key `{key}`)")]
    Missing {
        key: &'static str,
        name: &'static str,
    },

    #[error("line {line}: `{key}` = `{value}` is not a valid value: {reason}")]
    Value {
        line: usize,
        key: String,
        value: String,
        reason: String,
    },

    #[error("line {line}: domain error: `{key}` = {value} must be {expected}")]
    Domain {
        line: usize,
        key: &'static str,
        value: f64,
        expected: &'static str,
    },
}

/// Link gains that replace the geometry-derived values when present.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct GainOverrides {
    pub sr: Option<f64>,
    pub rd: Option<f64>,
    pub sd: Option<f64>,
}

impl GainOverrides {
    pub fn is_empty(&self) -> bool {
        self.sr.is_none() && self.rd.is_none() && self.sd.is_none()
    }

    pub fn apply(&self, gains: LinkGains) -> LinkGains {
        LinkGains {
            gamma_sr: self.sr.unwrap_or(gains.gamma_sr),
            gamma_rd: self.rd.unwrap_or(gains.gamma_rd),
            gamma_sd: self.sd.unwrap_or(gains.gamma_sd),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub budget: PowerBudget,
    pub d_sd: f64,
    pub d_r: f64,
    /// Relay position along the axis for `capacity` and `optimize-power`.
    pub d_sr: f64,
    pub sweep_start: f64,
    pub sweep_end: f64,
    pub sweep_step: f64,
    pub path: PathLossParams,
    pub gains: GainOverrides,
    pub beta: BetaPolicy,
    pub out_path: Option<PathBuf>,
    pub samples: usize,
    pub seed: u64,
}

impl RunConfig {
    pub fn geometry(&self) -> NodeGeometry {
        NodeGeometry {
            d_sd: self.d_sd,
            d_sr_axis: self.d_sr,
            d_r: self.d_r,
        }
    }

    pub fn sweep_spec(&self) -> SweepSpec {
        SweepSpec {
            d_sd: self.d_sd,
            d_r: self.d_r,
            axis_start: self.sweep_start,
            axis_end: self.sweep_end,
            axis_step: self.sweep_step,
            budget: self.budget,
            path: self.path,
            beta: self.beta,
        }
    }
}

struct Entry<'a> {
    line: usize,
    value: &'a str,
}

struct Entries<'a>(HashMap<&'a str, Entry<'a>>);

impl<'a> Entries<'a> {
    fn line(&self, key: &str) -> usize {
        self.0.get(key).map_or(0, |e| e.line)
    }

    fn number(&self, key: &'static str) -> Result<Option<f64>, ConfigError> {
        let Some(entry) = self.0.get(key) else {
            return Ok(None);
        };
        parse_number(entry.value)
            .map(Some)
            .map_err(|reason| value_error(key, entry, reason))
    }

    fn power(&self, key: &'static str) -> Result<Option<f64>, ConfigError> {
        let Some(entry) = self.0.get(key) else {
            return Ok(None);
        };
        parse_power(entry.value)
            .map(Some)
            .map_err(|reason| value_error(key, entry, reason))
    }

    fn integer(&self, key: &'static str) -> Result<Option<u64>, ConfigError> {
        let Some(entry) = self.0.get(key) else {
            return Ok(None);
        };
        entry
            .value
            .parse::<u64>()
            .map(Some)
            .map_err(|e| value_error(key, entry, e.to_string()))
    }

    fn check(
        &self,
        key: &'static str,
        value: f64,
        ok: bool,
        expected: &'static str,
    ) -> Result<(), ConfigError> {
        if ok && value.is_finite() {
            Ok(())
        } else {
            Err(ConfigError::Domain {
                line: self.line(key),
                key,
                value,
                expected,
            })
        }
    }
}

fn value_error(key: &str, entry: &Entry, reason: String) -> ConfigError {
    ConfigError::Value {
        line: entry.line,
        key: key.to_string(),
        value: entry.value.to_string(),
        reason,
    }
}

fn parse_number(text: &str) -> Result<f64, String> {
    text.parse::<f64>()
        .map_err(|_| "expected a number".to_string())
}

fn parse_power(text: &str) -> Result<f64, String> {
    let (number, divisor) = if let Some(n) = text.strip_suffix("mW") {
        (n, 1e3)
    } else if let Some(n) = text.strip_suffix("uW").or_else(|| text.strip_suffix("µW")) {
        (n, 1e6)
    } else if let Some(n) = text.strip_suffix('W') {
        (n, 1.0)
    } else {
        (text, 1.0)
    };
    parse_number(number.trim())
        .map(|v| v / divisor)
        .map_err(|_| "expected a power such as `0.1`, `100 mW` or `1 uW`".to_string())
}

fn split_lines(text: &str) -> Result<Entries<'_>, ConfigError> {
    let mut entries: HashMap<&str, Entry> = HashMap::new();
    for (index, raw) in text.lines().enumerate() {
        let line = index + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(ConfigError::Syntax {
                line,
                text: content.to_string(),
            });
        };
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || value.is_empty() {
            return Err(ConfigError::Syntax {
                line,
                text: content.to_string(),
            });
        }
        if !KEYS.contains(&key) {
            return Err(ConfigError::UnknownKey {
                line,
                key: key.to_string(),
            });
        }
        if let Some(first) = entries.get(key) {
            return Err(ConfigError::Duplicate {
                line,
                key: key.to_string(),
                first: first.line,
            });
        }
        entries.insert(key, Entry { line, value });
    }
    Ok(Entries(entries))
}

fn short_name(key: &'static str) -> &'static str {
    key.rsplit('.').next().unwrap_or(key)
}

/// Parses and validates a configuration document, filling defaults.
///
/// Defaults: relay at the midpoint, sweep from `-0.5 d_sd` to `1.5 d_sd` in
/// steps of `d_sd / 100`, wavelength 0.12 m, exponent 2, unit antenna and
/// base gains, `af.beta = max`, 1000 verify samples and seed 0.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let entries = split_lines(text)?;
    for &key in REQUIRED {
        if !entries.0.contains_key(key) {
            return Err(ConfigError::Missing {
                key,
                name: short_name(key),
            });
        }
    }

    let d_sd = entries.number("geom.d_sd")?.unwrap();
    entries.check("geom.d_sd", d_sd, d_sd > 0.0, "> 0")?;
    let d_r = entries.number("geom.d_r")?.unwrap();
    entries.check("geom.d_r", d_r, d_r >= 0.0, ">= 0")?;
    let d_sr = entries.number("geom.d_sr")?.unwrap_or(0.5 * d_sd);
    entries.check("geom.d_sr", d_sr, true, "finite")?;

    let p_s_max = entries.power("budget.p_s_max")?.unwrap();
    entries.check("budget.p_s_max", p_s_max, p_s_max > 0.0, "> 0")?;
    let p_r_max = entries.power("budget.p_r_max")?.unwrap();
    entries.check("budget.p_r_max", p_r_max, p_r_max >= 0.0, ">= 0")?;
    let noise = entries.power("budget.noise")?.unwrap();
    entries.check("budget.noise", noise, noise > 0.0, "> 0")?;

    let sweep_start = entries.number("sweep.start")?.unwrap_or(-0.5 * d_sd);
    entries.check("sweep.start", sweep_start, true, "finite")?;
    let sweep_end = entries.number("sweep.end")?.unwrap_or(1.5 * d_sd);
    entries.check(
        "sweep.end",
        sweep_end,
        sweep_end >= sweep_start,
        ">= sweep.start",
    )?;
    let sweep_step = entries.number("sweep.step")?.unwrap_or(d_sd / 100.0);
    entries.check("sweep.step", sweep_step, sweep_step > 0.0, "> 0")?;

    let defaults = PathLossParams::default();
    let wavelength = entries
        .number("pathloss.lambda0")?
        .unwrap_or(defaults.wavelength);
    entries.check("pathloss.lambda0", wavelength, wavelength > 0.0, "> 0")?;
    let exponent = entries
        .number("pathloss.alpha")?
        .unwrap_or(defaults.exponent);
    entries.check("pathloss.alpha", exponent, exponent > 0.0, "> 0")?;
    let base_gain = entries
        .number("pathloss.base_gain")?
        .unwrap_or(defaults.base_gain);
    entries.check("pathloss.base_gain", base_gain, base_gain > 0.0, "> 0")?;

    let mut gains = GainOverrides::default();
    for (key, slot) in [
        ("gain.sr", &mut gains.sr),
        ("gain.rd", &mut gains.rd),
        ("gain.sd", &mut gains.sd),
    ] {
        if let Some(g) = entries.number(key)? {
            entries.check(key, g, g >= 0.0, ">= 0")?;
            *slot = Some(g);
        }
    }

    let beta = match entries.0.get("af.beta") {
        None => BetaPolicy::Max,
        Some(e) if e.value.eq_ignore_ascii_case("max") => BetaPolicy::Max,
        Some(_) => {
            let b = entries.number("af.beta")?.unwrap();
            entries.check("af.beta", b, b >= 0.0, ">= 0 or `max`")?;
            BetaPolicy::Fixed(b)
        }
    };

    let samples = entries
        .integer("verify.samples")?
        .unwrap_or(DEFAULT_SAMPLES as u64);
    if samples == 0 {
        return Err(ConfigError::Domain {
            line: entries.line("verify.samples"),
            key: "verify.samples",
            value: 0.0,
            expected: ">= 1",
        });
    }

    Ok(RunConfig {
        budget: PowerBudget {
            p_s_max,
            p_r_max,
            noise,
        },
        d_sd,
        d_r,
        d_sr,
        sweep_start,
        sweep_end,
        sweep_step,
        path: PathLossParams {
            wavelength,
            exponent,
            base_gain,
            ..defaults
        },
        gains,
        beta,
        out_path: entries.0.get("out.path").map(|e| PathBuf::from(e.value)),
        samples: samples as usize,
        seed: entries.integer("verify.seed")?.unwrap_or(0),
    })
}
