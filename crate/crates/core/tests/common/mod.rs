#![allow(dead_code)]

use eeopt::config::{ChannelConfig, NoiseConfig, RunConfig};
use eeopt::{CaseSelector, CircuitPowerModel, Link};
use rand::Rng;

pub const DELTA: f64 = 1e-8;

/// Near-link operating point: d = 10 m, N_f = 10 dB, P_c = 188 mW.
pub fn near_link() -> RunConfig {
    RunConfig::default()
}

pub fn link(cfg: &RunConfig, case: CaseSelector) -> Link {
    cfg.link_params(case).unwrap().link().unwrap()
}

pub fn with_kappa(cfg: &RunConfig, kappa: f64) -> RunConfig {
    RunConfig { kappa, ..cfg.clone() }
}

pub fn with_distance(cfg: &RunConfig, d: f64) -> RunConfig {
    let mut out = cfg.clone();
    if let ChannelConfig::Distance { distance_m, .. } = &mut out.channel {
        *distance_m = d;
    }
    out
}

pub fn with_m(cfg: &RunConfig, m: f64) -> RunConfig {
    let mut out = cfg.clone();
    if let ChannelConfig::Distance { nakagami_m, .. } = &mut out.channel {
        *nakagami_m = m;
    }
    out
}

pub fn with_noise_figure(cfg: &RunConfig, nf_db: f64) -> RunConfig {
    let mut out = cfg.clone();
    if let NoiseConfig::Derived { figure_db, .. } = &mut out.noise {
        *figure_db = nf_db;
    }
    out
}

fn log_uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..hi.ln())).exp()
}

/// A configuration drawn over the simulated ranges: kappa in
/// [7e-8, 1e-7], N_f in [10, 30] dB, P_c in [0.1, 0.3] W, d in [10, 160] m,
/// m in [1, 4], linear or R^1.3 circuit power.
pub fn random_config<R: Rng>(rng: &mut R) -> RunConfig {
    let mut cfg = near_link();
    cfg.kappa = log_uniform(rng, 7e-8, 1e-7);
    cfg.p_static_w = log_uniform(rng, 0.1, 0.3);
    // log-uniform noise figure in linear units is uniform in dB
    cfg = with_noise_figure(&cfg, rng.random_range(10.0..30.0));
    cfg = with_distance(&cfg, log_uniform(rng, 10.0, 160.0));
    cfg = with_m(&cfg, log_uniform(rng, 1.0, 4.0));
    if rng.random_bool(0.5) {
        cfg.circuit = CircuitPowerModel::power_law(1.3).unwrap();
    }
    cfg
}
