//! Run configuration: a TOML file plus command-line overrides, resolved into
//! per-case [`LinkParams`].
//!
//! Decibel inputs are accepted only here and converted once to linear SI
//! units. Every key is optional; missing keys take the near-link operating
//! point used throughout the examples (`W = 10 kHz`, `d = 10 m`,
//! `N_f = 10 dB`, `P_c = 188 mW`).

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::channel::{db_to_linear, mean_gain_from_distance, ExpectationMethod, ExpectationSpec, GainModel};
use crate::circuit::CircuitPowerModel;
use crate::error::{Error, Result};
use crate::min_power::CaseSelector;
use crate::optimizer::{LinkParams, DEFAULT_C_MAX, DEFAULT_DELTA};

pub const DEFAULT_BANDWIDTH_HZ: f64 = 1e4;
pub const DEFAULT_NOISE_PSD_DBM_PER_HZ: f64 = -170.0;
pub const DEFAULT_NOISE_FIGURE_DB: f64 = 10.0;
pub const DEFAULT_PA_EFFICIENCY: f64 = 0.4;
pub const DEFAULT_KAPPA: f64 = 9e-8;
pub const DEFAULT_P_STATIC_W: f64 = 0.188;
pub const DEFAULT_DISTANCE_M: f64 = 10.0;
pub const DEFAULT_G0_DB: f64 = -70.0;
pub const DEFAULT_NAKAGAMI_M: f64 = 1.0;

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    bandwidth_hz: Option<f64>,
    noise_psd_dbm_per_hz: Option<f64>,
    noise_figure_db: Option<f64>,
    noise_power_w: Option<f64>,
    pa_efficiency: Option<f64>,
    kappa: Option<f64>,
    p_static_w: Option<f64>,
    circuit_power: Option<CircuitPowerModel>,
    delta: Option<f64>,
    doubling_cap: Option<f64>,
    cases: Option<Vec<String>>,
    output: Option<PathBuf>,
    #[serde(default)]
    channel: RawChannel,
    expectation: Option<ExpectationSpec>,
}

#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawChannel {
    case: Option<String>,
    gain: Option<GainModel>,
    distance_m: Option<f64>,
    g0_db: Option<f64>,
    path_exp: Option<f64>,
    nakagami_m: Option<f64>,
}

/// Values given on the command line; each replaces the file value.
#[derive(Debug, Default, Clone, PartialEq)]
pub struct Overrides {
    pub bandwidth_hz: Option<f64>,
    pub noise_psd_dbm_per_hz: Option<f64>,
    pub noise_figure_db: Option<f64>,
    pub noise_power_w: Option<f64>,
    pub pa_efficiency: Option<f64>,
    pub kappa: Option<f64>,
    pub p_static_w: Option<f64>,
    /// Power-law exponent; replaces `circuit_power`.
    pub alpha: Option<f64>,
    pub delta: Option<f64>,
    pub doubling_cap: Option<f64>,
    pub cases: Option<Vec<String>>,
    pub output: Option<PathBuf>,
    pub distance_m: Option<f64>,
    pub g0_db: Option<f64>,
    pub path_exp: Option<f64>,
    pub nakagami_m: Option<f64>,
    pub quadrature_order: Option<usize>,
}

/// Source of the receiver noise power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseConfig {
    /// `sigma^2 = W N0 N_f` from a noise density and a noise figure.
    Derived { psd_dbm_per_hz: f64, figure_db: f64 },
    /// `sigma^2` in Watts.
    Explicit(f64),
}

/// Source of the channel gain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChannelConfig {
    /// Gain model given directly. A Nakagami model is reduced to its mean for
    /// the static case.
    Explicit(GainModel),
    /// Mean gain `G0 d^(-path_exp)`, Nakagami-m fading for the fading cases.
    Distance {
        distance_m: f64,
        g0_db: f64,
        path_exp: f64,
        nakagami_m: f64,
    },
}

/// Fully resolved run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub bandwidth_hz: f64,
    pub noise: NoiseConfig,
    pub pa_efficiency: f64,
    pub kappa: f64,
    pub p_static_w: f64,
    pub circuit: CircuitPowerModel,
    pub channel: ChannelConfig,
    pub expectation: ExpectationSpec,
    pub cases: Vec<CaseSelector>,
    pub delta: f64,
    pub doubling_cap: f64,
    pub output: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig::resolve(RawConfig::default()).expect("defaults are valid")
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        Self::from_toml_str_with(text, &Overrides::default())
    }

    pub fn from_toml_str_with(text: &str, overrides: &Overrides) -> Result<Self> {
        let mut raw: RawConfig = toml::from_str(text).map_err(|e| {
            let key = e.message().split('`').nth(1).unwrap_or("").to_string();
            Error::config(key, e.to_string().trim_end().to_string())
        })?;
        raw.apply(overrides)?;
        Self::resolve(raw)
    }

    pub fn load(path: &Path, overrides: &Overrides) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::config("--config", format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str_with(&text, overrides)
    }

    fn resolve(raw: RawConfig) -> Result<Self> {
        let bandwidth_hz = raw.bandwidth_hz.unwrap_or(DEFAULT_BANDWIDTH_HZ);
        let noise = match raw.noise_power_w {
            Some(w) => {
                if raw.noise_figure_db.is_some() || raw.noise_psd_dbm_per_hz.is_some() {
                    return Err(Error::config(
                        "noise_power_w",
                        "give either noise_power_w or noise_psd_dbm_per_hz/noise_figure_db, not both",
                    ));
                }
                NoiseConfig::Explicit(w)
            }
            None => NoiseConfig::Derived {
                psd_dbm_per_hz: raw.noise_psd_dbm_per_hz.unwrap_or(DEFAULT_NOISE_PSD_DBM_PER_HZ),
                figure_db: raw.noise_figure_db.unwrap_or(DEFAULT_NOISE_FIGURE_DB),
            },
        };
        let ch = raw.channel;
        let channel = match ch.gain {
            Some(gain) => {
                let stray = [
                    ("channel.distance_m", ch.distance_m),
                    ("channel.g0_db", ch.g0_db),
                    ("channel.path_exp", ch.path_exp),
                    ("channel.nakagami_m", ch.nakagami_m),
                ];
                if let Some((key, _)) = stray.iter().find(|(_, v)| v.is_some()) {
                    return Err(Error::config(*key, "cannot be combined with channel.gain"));
                }
                ChannelConfig::Explicit(gain)
            }
            None => ChannelConfig::Distance {
                distance_m: ch.distance_m.unwrap_or(DEFAULT_DISTANCE_M),
                g0_db: ch.g0_db.unwrap_or(DEFAULT_G0_DB),
                path_exp: ch.path_exp.unwrap_or(crate::channel::DEFAULT_PATH_EXPONENT),
                nakagami_m: ch.nakagami_m.unwrap_or(DEFAULT_NAKAGAMI_M),
            },
        };
        let cases = match (raw.cases, ch.case) {
            (Some(_), Some(_)) => return Err(Error::config("channel.case", "give either cases or channel.case")),
            (Some(list), None) => parse_cases(&list)?,
            (None, Some(one)) => vec![parse_case("channel.case", &one)?],
            (None, None) => CaseSelector::ALL.to_vec(),
        };
        let cfg = RunConfig {
            bandwidth_hz,
            noise,
            pa_efficiency: raw.pa_efficiency.unwrap_or(DEFAULT_PA_EFFICIENCY),
            kappa: raw.kappa.unwrap_or(DEFAULT_KAPPA),
            p_static_w: raw.p_static_w.unwrap_or(DEFAULT_P_STATIC_W),
            circuit: raw.circuit_power.unwrap_or_default(),
            channel,
            expectation: raw.expectation.unwrap_or_default(),
            cases,
            delta: raw.delta.unwrap_or(DEFAULT_DELTA),
            doubling_cap: raw.doubling_cap.unwrap_or(DEFAULT_C_MAX),
            output: raw.output,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks every key and that each case resolves to valid link parameters.
    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::config(
                "delta",
                format!("must lie in (0, 1), got {}", self.delta),
            ));
        }
        if !(self.doubling_cap >= 1.0) || !self.doubling_cap.is_finite() {
            return Err(Error::config(
                "doubling_cap",
                format!("must be finite and >= 1, got {}", self.doubling_cap),
            ));
        }
        if self.cases.is_empty() {
            return Err(Error::config("cases", "at least one case is required"));
        }
        for &case in &self.cases {
            self.link_params(case)?.validate().map_err(|e| self.keyed(e))?;
        }
        Ok(())
    }

    /// `sigma^2` in Watts.
    pub fn noise_power(&self) -> f64 {
        match self.noise {
            NoiseConfig::Explicit(w) => w,
            NoiseConfig::Derived {
                psd_dbm_per_hz,
                figure_db,
            } => self.bandwidth_hz * db_to_linear(psd_dbm_per_hz - 30.0) * db_to_linear(figure_db),
        }
    }

    /// Mean channel gain shared by all cases.
    pub fn mean_gain(&self) -> Result<f64> {
        match self.channel {
            ChannelConfig::Explicit(g) => Ok(g.mean_gain()),
            ChannelConfig::Distance {
                distance_m,
                g0_db,
                path_exp,
                ..
            } => mean_gain_from_distance(distance_m, db_to_linear(g0_db), path_exp)
                .map_err(|e| Error::config("channel.distance_m", e.to_string())),
        }
    }

    /// Gain model used for `case`: the static case sees a fixed gain equal to
    /// the mean, the fading cases see the distribution.
    pub fn gain_for(&self, case: CaseSelector) -> Result<GainModel> {
        let gain = match (self.channel, case) {
            (ChannelConfig::Explicit(g), CaseSelector::StaticCsit) => GainModel::fixed(g.mean_gain()),
            (ChannelConfig::Explicit(g), _) => Ok(g),
            (ChannelConfig::Distance { .. }, CaseSelector::StaticCsit) => GainModel::fixed(self.mean_gain()?),
            (ChannelConfig::Distance { nakagami_m, .. }, _) => GainModel::nakagami(nakagami_m, self.mean_gain()?),
        };
        gain.map_err(|e| self.keyed(e))
    }

    pub fn link_params(&self, case: CaseSelector) -> Result<LinkParams> {
        Ok(LinkParams {
            bandwidth: self.bandwidth_hz,
            noise_power: self.noise_power(),
            pa_efficiency: self.pa_efficiency,
            kappa: self.kappa,
            p_static: self.p_static_w,
            case,
            gain: self.gain_for(case)?,
            circuit: self.circuit,
            expectation: self.expectation,
        })
    }

    /// Maps a parameter rejection to the config key it came from.
    fn keyed(&self, e: Error) -> Error {
        let Error::InvalidParameter { name, value, reason } = &e else {
            return e;
        };
        let key = match *name {
            "bandwidth" => "bandwidth_hz",
            "noise_power" => match self.noise {
                NoiseConfig::Explicit(_) => "noise_power_w",
                NoiseConfig::Derived { .. } => "noise_figure_db",
            },
            "pa_efficiency" => "pa_efficiency",
            "kappa" => "kappa",
            "p_static" => "p_static_w",
            "m" => match self.channel {
                ChannelConfig::Explicit(_) => "channel.gain",
                ChannelConfig::Distance { .. } => "channel.nakagami_m",
            },
            "gain" | "mean_gain" => match self.channel {
                ChannelConfig::Explicit(_) => "channel.gain",
                ChannelConfig::Distance { .. } => "channel.g0_db",
            },
            "order" | "samples" | "rel_tol" => "expectation",
            _ => return e,
        };
        Error::config(key, format!("{value}: {reason}"))
    }

    /// Writes a human-readable one-line description of the resolved inputs.
    pub fn describe(&self) -> String {
        let circuit = match self.circuit {
            CircuitPowerModel::Linear => "linear".to_string(),
            CircuitPowerModel::PowerLaw { alpha } => format!("R^{alpha}"),
        };
        let method = match self.expectation.method {
            ExpectationMethod::Quadrature { order } => format!("quadrature({order})"),
            ExpectationMethod::MonteCarlo { samples, seed } => format!("monte_carlo({samples}, seed {seed})"),
        };
        format!(
            "W = {} Hz, sigma^2 = {:e} W, xi = {}, kappa = {:e}, P_c = {} W, phi = {circuit}, mean gain = {:e}, {method}",
            self.bandwidth_hz,
            self.noise_power(),
            self.pa_efficiency,
            self.kappa,
            self.p_static_w,
            self.mean_gain().unwrap_or(f64::NAN),
        )
    }
}

impl RawConfig {
    fn apply(&mut self, o: &Overrides) -> Result<()> {
        fn set<T: Clone>(slot: &mut Option<T>, v: &Option<T>) {
            if v.is_some() {
                slot.clone_from(v);
            }
        }
        set(&mut self.bandwidth_hz, &o.bandwidth_hz);
        set(&mut self.pa_efficiency, &o.pa_efficiency);
        set(&mut self.kappa, &o.kappa);
        set(&mut self.p_static_w, &o.p_static_w);
        set(&mut self.delta, &o.delta);
        set(&mut self.doubling_cap, &o.doubling_cap);
        set(&mut self.output, &o.output);
        if o.noise_power_w.is_some() {
            self.noise_figure_db = None;
            self.noise_psd_dbm_per_hz = None;
            self.noise_power_w = o.noise_power_w;
        }
        if o.noise_figure_db.is_some() || o.noise_psd_dbm_per_hz.is_some() {
            self.noise_power_w = None;
            set(&mut self.noise_figure_db, &o.noise_figure_db);
            set(&mut self.noise_psd_dbm_per_hz, &o.noise_psd_dbm_per_hz);
        }
        if let Some(alpha) = o.alpha {
            let model =
                CircuitPowerModel::power_law(alpha).map_err(|e| Error::config("circuit_power.alpha", e.to_string()))?;
            self.circuit_power = Some(model);
        }
        if o.cases.is_some() {
            self.cases.clone_from(&o.cases);
            self.channel.case = None;
        }
        let ch = &mut self.channel;
        let distance_given = [o.distance_m, o.g0_db, o.path_exp, o.nakagami_m]
            .iter()
            .any(Option::is_some);
        if distance_given {
            ch.gain = None;
        }
        set(&mut ch.distance_m, &o.distance_m);
        set(&mut ch.g0_db, &o.g0_db);
        set(&mut ch.path_exp, &o.path_exp);
        set(&mut ch.nakagami_m, &o.nakagami_m);
        if let Some(order) = o.quadrature_order {
            let rel_tol = self.expectation.map_or(crate::channel::DEFAULT_REL_TOL, |s| s.rel_tol);
            self.expectation = Some(ExpectationSpec {
                method: ExpectationMethod::Quadrature { order },
                rel_tol,
            });
        }
        Ok(())
    }
}

fn parse_case(key: &str, s: &str) -> Result<CaseSelector> {
    s.parse().map_err(|_| {
        Error::config(
            key,
            format!("unknown case {s:?} (expected static_csit, fading_cdit or fading_csit)"),
        )
    })
}

/// Parses case names, rejecting an empty list and duplicates.
pub fn parse_cases(list: &[String]) -> Result<Vec<CaseSelector>> {
    if list.is_empty() {
        return Err(Error::config("cases", "at least one case is required"));
    }
    let mut out = Vec::with_capacity(list.len());
    for (i, s) in list.iter().enumerate() {
        let case = parse_case(&format!("cases[{i}]"), s)?;
        if out.contains(&case) {
            return Err(Error::config(format!("cases[{i}]"), format!("duplicate case {case}")));
        }
        out.push(case);
    }
    Ok(out)
}
