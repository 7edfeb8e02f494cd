//! Batch runs over a [`RunConfig`]: single-point optimization, tradeoff
//! curves and one-parameter sweeps, with CSV rendering.
//!
//! Points are evaluated in parallel; rows always come out in input order.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;

use crate::channel::GainModel;
use crate::config::{ChannelConfig, NoiseConfig, RunConfig};
use crate::error::{Error, Result};
use crate::min_power::CaseSelector;
use crate::optimizer::{EeSePoint, OptimumResult};

/// Parameter varied by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    Kappa,
    NoiseFigureDb,
    PStatic,
    DistanceM,
    NakagamiM,
}

impl SweepParam {
    pub const ALL: [SweepParam; 5] = [
        SweepParam::Kappa,
        SweepParam::NoiseFigureDb,
        SweepParam::PStatic,
        SweepParam::DistanceM,
        SweepParam::NakagamiM,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepParam::Kappa => "kappa",
            SweepParam::NoiseFigureDb => "noise_figure_db",
            SweepParam::PStatic => "p_static",
            SweepParam::DistanceM => "distance_m",
            SweepParam::NakagamiM => "nakagami_m",
        }
    }

    /// Copy of `cfg` with this parameter set to `value`.
    pub fn apply(self, cfg: &RunConfig, value: f64) -> Result<RunConfig> {
        let mut out = cfg.clone();
        match self {
            SweepParam::Kappa => out.kappa = value,
            SweepParam::PStatic => out.p_static_w = value,
            SweepParam::NoiseFigureDb => match &mut out.noise {
                NoiseConfig::Derived { figure_db, .. } => *figure_db = value,
                NoiseConfig::Explicit(_) => {
                    return Err(Error::config(
                        "--param",
                        "noise_figure_db sweep needs a derived noise power, not noise_power_w",
                    ))
                }
            },
            SweepParam::DistanceM => match &mut out.channel {
                ChannelConfig::Distance { distance_m, .. } => *distance_m = value,
                ChannelConfig::Explicit(_) => {
                    return Err(Error::config(
                        "--param",
                        "distance_m sweep needs the distance keys, not channel.gain",
                    ))
                }
            },
            SweepParam::NakagamiM => match &mut out.channel {
                ChannelConfig::Distance { nakagami_m, .. } => *nakagami_m = value,
                ChannelConfig::Explicit(GainModel::Nakagami { m, .. }) => *m = value,
                ChannelConfig::Explicit(GainModel::Fixed { .. }) => {
                    return Err(Error::config("--param", "nakagami_m sweep needs a fading channel"))
                }
            },
        }
        out.validate()?;
        Ok(out)
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "kappa" => Ok(SweepParam::Kappa),
            "noise_figure_db" | "noise_figure" | "nf" => Ok(SweepParam::NoiseFigureDb),
            "p_static" | "p_static_w" | "pc" => Ok(SweepParam::PStatic),
            "distance_m" | "distance" | "d" => Ok(SweepParam::DistanceM),
            "nakagami_m" | "m" => Ok(SweepParam::NakagamiM),
            _ => Err(Error::config(
                "--param",
                format!("unknown sweep parameter {s:?} (expected kappa, noise_figure_db, p_static, distance_m or nakagami_m)"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scale {
    #[default]
    Linear,
    Log,
}

/// Values of one swept parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    pub param: SweepParam,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    pub scale: Scale,
}

impl SweepSpec {
    pub fn new(param: SweepParam, start: f64, stop: f64, points: usize, scale: Scale) -> Result<Self> {
        let spec = SweepSpec {
            param,
            start,
            stop,
            points,
            scale,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.start.is_finite() && self.stop.is_finite() && self.start < self.stop) {
            return Err(Error::config(
                "--stop",
                format!("need start < stop, got {} and {}", self.start, self.stop),
            ));
        }
        if self.points < 2 {
            return Err(Error::config("--points", "need at least 2 points"));
        }
        if self.scale == Scale::Log && !(self.start > 0.0) {
            return Err(Error::config("--start", "log scale needs start > 0"));
        }
        Ok(())
    }

    /// Grid values, with both end points exact.
    pub fn values(&self) -> Vec<f64> {
        let n = self.points;
        let last = (n - 1) as f64;
        (0..n)
            .map(|k| {
                if k == 0 {
                    return self.start;
                }
                if k == n - 1 {
                    return self.stop;
                }
                let s = k as f64 / last;
                match self.scale {
                    Scale::Linear => self.start + s * (self.stop - self.start),
                    Scale::Log => (self.start.ln() + s * (self.stop.ln() - self.start.ln())).exp(),
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizeRow {
    pub case: CaseSelector,
    pub result: OptimumResult,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TradeoffRow {
    pub case: CaseSelector,
    pub point: EeSePoint,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub case: CaseSelector,
    pub param: SweepParam,
    pub value: f64,
    pub c_star: f64,
    pub ee_star: f64,
}

fn in_case(case: CaseSelector) -> impl Fn(Error) -> Error {
    move |e| match e {
        Error::Config { .. } => e,
        other => Error::InCase {
            case: case.label(),
            source: Box::new(other),
        },
    }
}

fn optimize_case(cfg: &RunConfig, case: CaseSelector) -> Result<OptimumResult> {
    let link = cfg.link_params(case)?.link().map_err(in_case(case))?;
    link.optimize_with(cfg.delta, cfg.doubling_cap).map_err(in_case(case))
}

/// One optimum per configured case.
pub fn run_optimize(cfg: &RunConfig) -> Result<Vec<OptimizeRow>> {
    cfg.validate()?;
    cfg.cases
        .par_iter()
        .map(|&case| optimize_case(cfg, case).map(|result| OptimizeRow { case, result }))
        .collect::<Vec<_>>()
        .into_iter()
        .collect()
}

/// `points` evenly spaced samples of the curve on `[c_min, c_max]` per case.
pub fn run_tradeoff(cfg: &RunConfig, c_min: f64, c_max: f64, points: usize) -> Result<Vec<TradeoffRow>> {
    cfg.validate()?;
    if !(c_min >= 0.0 && c_min < c_max && c_max.is_finite()) {
        return Err(Error::config(
            "--c-max",
            format!("need 0 <= c_min < c_max, got {c_min} and {c_max}"),
        ));
    }
    if points < 2 {
        return Err(Error::config("--points", "need at least 2 points"));
    }
    let grid = SweepSpec::new(SweepParam::Kappa, c_min, c_max, points, Scale::Linear)?.values();
    let mut rows = Vec::with_capacity(grid.len() * cfg.cases.len());
    for &case in &cfg.cases {
        let link = cfg.link_params(case)?.link().map_err(in_case(case))?;
        let curve = link.tradeoff_curve(&grid).map_err(in_case(case))?;
        rows.extend(curve.into_iter().map(|point| TradeoffRow { case, point }));
    }
    Ok(rows)
}

/// Optimum for every (sweep value, case) pair. The first failing value in
/// sweep order aborts the run.
pub fn run_sweep(cfg: &RunConfig, spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    spec.validate()?;
    let values = spec.values();
    let configs: Vec<RunConfig> = values
        .iter()
        .map(|&v| spec.param.apply(cfg, v).map_err(|e| sweep_error(spec, v, e)))
        .collect::<Result<_>>()?;
    let jobs: Vec<(usize, CaseSelector)> = (0..values.len())
        .flat_map(|i| cfg.cases.iter().map(move |&c| (i, c)))
        .collect();
    jobs.par_iter()
        .map(|&(i, case)| {
            let r = optimize_case(&configs[i], case).map_err(|e| sweep_error(spec, values[i], e))?;
            Ok(SweepRow {
                case,
                param: spec.param,
                value: values[i],
                c_star: r.c_star,
                ee_star: r.ee_star,
            })
        })
        .collect::<Vec<Result<SweepRow>>>()
        .into_iter()
        .collect()
}

fn sweep_error(spec: &SweepSpec, value: f64, e: Error) -> Error {
    Error::SweepPoint {
        param: spec.param.name(),
        value,
        source: Box::new(e),
    }
}

/// 17 significant digits, `inf` / `-inf` / `nan` for non-finite values.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{x:.16e}")
    }
}

pub const OPTIMIZE_HEADER: [&str; 5] = ["case", "c_star", "ee_star", "iterations", "final_bracket_width"];
pub const TRADEOFF_HEADER: [&str; 5] = ["case", "C", "total_power_w", "ee_j_per_bit", "gamma_w"];
pub const SWEEP_HEADER: [&str; 5] = ["case", "sweep_param", "sweep_value", "c_star", "ee_star"];

pub fn write_optimize_csv<W: Write>(out: W, rows: &[OptimizeRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(OPTIMIZE_HEADER)?;
    for r in rows {
        w.write_record([
            r.case.label().to_string(),
            format_float(r.result.c_star),
            format_float(r.result.ee_star),
            r.result.iterations.to_string(),
            format_float(r.result.final_bracket_width),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_tradeoff_csv<W: Write>(out: W, rows: &[TradeoffRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRADEOFF_HEADER)?;
    for r in rows {
        let p = &r.point;
        w.write_record([
            r.case.label().to_string(),
            format_float(p.c),
            format_float(p.total_power),
            format_float(p.ee),
            format_float(p.gamma),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_sweep_csv<W: Write>(out: W, rows: &[SweepRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_HEADER)?;
    for r in rows {
        w.write_record([
            r.case.label().to_string(),
            r.param.name().to_string(),
            format_float(r.value),
            format_float(r.c_star),
            format_float(r.ee_star),
        ])?;
    }
    w.flush()?;
    Ok(())
}
