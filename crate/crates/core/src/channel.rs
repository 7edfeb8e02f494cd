//! Channel power gain models and the expectation engine over `G = |h|^2`.
//!
//! Under Nakagami-m fading the power gain is Gamma distributed with shape `m`
//! and scale `mean_gain / m`. Expectations are taken in the normalized
//! variable `t = G m / mean_gain` so that node placement does not depend on
//! the absolute gain scale.
//!
//! The quadrature substitutes `t = t0 + e^x` and applies the trapezoidal
//! rule in `x`. The transformed integrand is analytic in a strip around the
//! real axis and decays on both ends, so the rule converges geometrically in
//! the step size. Unlike a fixed Gauss-Laguerre rule it keeps full accuracy
//! when the integrand varies on scales much smaller than the mean gain
//! (`log2(1 + G p)` at high SNR), and the shifted form integrates the
//! water-filling pieces above their breakpoint without seeing the kink.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Distribution of the channel power gain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGain", into = "RawGain")]
pub enum GainModel {
    /// Deterministic gain.
    Fixed { gain: f64 },
    /// `|h|` Nakagami-m with `E[|h|^2] = mean_gain`.
    Nakagami { m: f64, mean_gain: f64 },
}

impl GainModel {
    pub fn fixed(gain: f64) -> Result<Self> {
        positive("gain", gain)?;
        Ok(GainModel::Fixed { gain })
    }

    pub fn nakagami(m: f64, mean_gain: f64) -> Result<Self> {
        if !(m >= 0.5) || !m.is_finite() {
            return Err(Error::InvalidParameter {
                name: "m",
                value: m,
                reason: "Nakagami shape must be finite and >= 0.5".into(),
            });
        }
        positive("mean_gain", mean_gain)?;
        Ok(GainModel::Nakagami { m, mean_gain })
    }

    /// Rayleigh fading of `|h|`, i.e. Nakagami with `m = 1`.
    pub fn rayleigh(mean_gain: f64) -> Result<Self> {
        Self::nakagami(1.0, mean_gain)
    }

    pub fn mean_gain(&self) -> f64 {
        match *self {
            GainModel::Fixed { gain } => gain,
            GainModel::Nakagami { mean_gain, .. } => mean_gain,
        }
    }

    pub fn is_fixed(&self) -> bool {
        matches!(self, GainModel::Fixed { .. })
    }

    fn validate(self) -> Result<Self> {
        match self {
            GainModel::Fixed { gain } => Self::fixed(gain),
            GainModel::Nakagami { m, mean_gain } => Self::nakagami(m, mean_gain),
        }
    }
}

fn positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite and > 0".into(),
        })
    }
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
enum RawGain {
    Fixed(f64),
    Nakagami { m: f64, mean_gain: f64 },
}

impl TryFrom<RawGain> for GainModel {
    type Error = Error;

    fn try_from(raw: RawGain) -> Result<Self> {
        match raw {
            RawGain::Fixed(gain) => GainModel::fixed(gain),
            RawGain::Nakagami { m, mean_gain } => GainModel::nakagami(m, mean_gain),
        }
    }
}

impl From<GainModel> for RawGain {
    fn from(g: GainModel) -> Self {
        match g {
            GainModel::Fixed { gain } => RawGain::Fixed(gain),
            GainModel::Nakagami { m, mean_gain } => RawGain::Nakagami { m, mean_gain },
        }
    }
}

/// How an expectation over the gain distribution is evaluated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExpectationMethod {
    /// Deterministic quadrature. `order` is the node density: the step in
    /// log-gain is `24 / order`, and the node count grows with the range the
    /// distribution needs (about 230 nodes for Rayleigh at order 128).
    Quadrature { order: usize },
    /// Seeded Monte Carlo over `samples` draws.
    MonteCarlo { samples: usize, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec", into = "RawSpec")]
pub struct ExpectationSpec {
    pub method: ExpectationMethod,
    /// Relative tolerance of the inner root solves built on top of the
    /// expectations (transmit power, water level).
    pub rel_tol: f64,
}

pub const DEFAULT_QUADRATURE_ORDER: usize = 128;
pub const DEFAULT_REL_TOL: f64 = 1e-12;

impl Default for ExpectationSpec {
    fn default() -> Self {
        ExpectationSpec {
            method: ExpectationMethod::Quadrature {
                order: DEFAULT_QUADRATURE_ORDER,
            },
            rel_tol: DEFAULT_REL_TOL,
        }
    }
}

impl ExpectationSpec {
    pub fn quadrature(order: usize) -> Result<Self> {
        Self {
            method: ExpectationMethod::Quadrature { order },
            rel_tol: DEFAULT_REL_TOL,
        }
        .validate()
    }

    pub fn monte_carlo(samples: usize, seed: u64) -> Result<Self> {
        Self {
            method: ExpectationMethod::MonteCarlo { samples, seed },
            rel_tol: DEFAULT_REL_TOL,
        }
        .validate()
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Result<Self> {
        self.rel_tol = rel_tol;
        self.validate()
    }

    pub fn validate(self) -> Result<Self> {
        match self.method {
            ExpectationMethod::Quadrature { order } if order < 8 => {
                return Err(Error::InvalidParameter {
                    name: "order",
                    value: order as f64,
                    reason: "quadrature order must be >= 8".into(),
                })
            }
            ExpectationMethod::MonteCarlo { samples, .. } if samples < 1000 => {
                return Err(Error::InvalidParameter {
                    name: "samples",
                    value: samples as f64,
                    reason: "Monte Carlo needs at least 1000 samples".into(),
                })
            }
            _ => {}
        }
        if !(self.rel_tol > 0.0 && self.rel_tol < 1e-2) {
            return Err(Error::InvalidParameter {
                name: "rel_tol",
                value: self.rel_tol,
                reason: "must lie in (0, 1e-2)".into(),
            });
        }
        Ok(self)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    #[serde(default = "default_method")]
    method: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    order: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(default = "default_rel_tol")]
    rel_tol: f64,
}

fn default_method() -> String {
    "quadrature".into()
}

fn default_rel_tol() -> f64 {
    DEFAULT_REL_TOL
}

impl TryFrom<RawSpec> for ExpectationSpec {
    type Error = Error;

    fn try_from(raw: RawSpec) -> Result<Self> {
        let method = match raw.method.as_str() {
            "quadrature" => ExpectationMethod::Quadrature {
                order: raw.order.unwrap_or(DEFAULT_QUADRATURE_ORDER),
            },
            "monte_carlo" | "montecarlo" => ExpectationMethod::MonteCarlo {
                samples: raw.samples.unwrap_or(1_000_000),
                seed: raw
                    .seed
                    .ok_or_else(|| Error::config("expectation.seed", "Monte Carlo requires an explicit seed"))?,
            },
            other => {
                return Err(Error::config(
                    "expectation.method",
                    format!("unknown method {other:?} (expected \"quadrature\" or \"monte_carlo\")"),
                ))
            }
        };
        ExpectationSpec {
            method,
            rel_tol: raw.rel_tol,
        }
        .validate()
    }
}

impl From<ExpectationSpec> for RawSpec {
    fn from(s: ExpectationSpec) -> Self {
        match s.method {
            ExpectationMethod::Quadrature { order } => RawSpec {
                method: "quadrature".into(),
                order: Some(order),
                samples: None,
                seed: None,
                rel_tol: s.rel_tol,
            },
            ExpectationMethod::MonteCarlo { samples, seed } => RawSpec {
                method: "monte_carlo".into(),
                order: None,
                samples: Some(samples),
                seed: Some(seed),
                rel_tol: s.rel_tol,
            },
        }
    }
}

/// `G0 * d^(-path_exponent)`.
pub fn mean_gain_from_distance(distance_m: f64, g0: f64, path_exponent: f64) -> Result<f64> {
    if !(distance_m > 0.0) || !distance_m.is_finite() {
        return Err(Error::Domain {
            what: "mean_gain_from_distance",
            value: distance_m,
            reason: "distance must be positive",
        });
    }
    if !(g0 > 0.0) {
        return Err(Error::Domain {
            what: "mean_gain_from_distance",
            value: g0,
            reason: "reference gain must be positive",
        });
    }
    Ok(g0 * distance_m.powf(-path_exponent))
}

pub const DEFAULT_PATH_EXPONENT: f64 = 3.5;

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Mean and standard error of a Monte Carlo estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
}

/// `E_G[f(G)]` under `model`, evaluated as `spec` prescribes.
pub fn expect(model: &GainModel, f: impl Fn(f64) -> f64, spec: &ExpectationSpec) -> Result<f64> {
    Expectation::new(model, spec)?.expect(f)
}

/// Seeded Monte Carlo estimate with its standard error.
pub fn monte_carlo(model: &GainModel, f: impl Fn(f64) -> f64, samples: usize, seed: u64) -> Result<Estimate> {
    let spec = ExpectationSpec::monte_carlo(samples, seed)?;
    let engine = Expectation::new(model, &spec)?;
    match &engine.kind {
        Kind::PointMass(g) => Ok(Estimate {
            mean: f(*g),
            std_error: 0.0,
        }),
        Kind::MonteCarlo(draws) => {
            let n = draws.len() as f64;
            let (mut sum, mut sum_sq) = (0.0, 0.0);
            for &g in draws {
                let v = f(g);
                sum += v;
                sum_sq += v * v;
            }
            let mean = sum / n;
            let var = ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
            Ok(Estimate {
                mean,
                std_error: (var / n).sqrt(),
            })
        }
        Kind::Quadrature(_) => unreachable!("monte carlo spec always builds draws"),
    }
}

/// Prepared expectation operator for one gain model and spec.
///
/// Construction does all setup (node generation or sampling); evaluation is
/// a weighted sum and is bit-reproducible for a given model and spec.
#[derive(Debug, Clone)]
pub struct Expectation {
    kind: Kind,
}

#[derive(Debug, Clone)]
enum Kind {
    PointMass(f64),
    Quadrature(GammaRule),
    MonteCarlo(Vec<f64>),
}

impl Expectation {
    pub fn new(model: &GainModel, spec: &ExpectationSpec) -> Result<Self> {
        let model = model.validate()?;
        let spec = spec.validate()?;
        let kind = match (model, spec.method) {
            (GainModel::Fixed { gain }, _) => Kind::PointMass(gain),
            (GainModel::Nakagami { m, mean_gain }, ExpectationMethod::Quadrature { order }) => {
                Kind::Quadrature(GammaRule::new(m, mean_gain, order))
            }
            (GainModel::Nakagami { m, mean_gain }, ExpectationMethod::MonteCarlo { samples, seed }) => {
                let dist = Gamma::new(m, mean_gain / m).map_err(|e| Error::InvalidParameter {
                    name: "m",
                    value: m,
                    reason: e.to_string(),
                })?;
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                Kind::MonteCarlo((0..samples).map(|_| dist.sample(&mut rng)).collect())
            }
        };
        Ok(Expectation { kind })
    }

    /// The gain if the distribution is a point mass.
    pub fn point_mass(&self) -> Option<f64> {
        match self.kind {
            Kind::PointMass(g) => Some(g),
            _ => None,
        }
    }

    /// Number of integrand evaluations per expectation over the full support.
    pub fn node_count(&self) -> usize {
        match &self.kind {
            Kind::PointMass(_) => 1,
            Kind::Quadrature(rule) => rule.nodes.len(),
            Kind::MonteCarlo(d) => d.len(),
        }
    }

    pub fn expect(&self, f: impl Fn(f64) -> f64) -> Result<f64> {
        self.expect_n("integrand", |g| [f(g)]).map(|[v]| v)
    }

    /// Several expectations sharing one pass over the nodes.
    pub fn expect_n<const N: usize>(&self, name: &'static str, f: impl Fn(f64) -> [f64; N]) -> Result<[f64; N]> {
        let acc = match &self.kind {
            Kind::PointMass(g) => f(*g),
            Kind::Quadrature(rule) => {
                let mut acc = weighted_sum(rule.nodes.iter().zip(&rule.weights).map(|(&g, &w)| (g, w)), &f);
                acc.iter_mut().for_each(|a| *a /= rule.total);
                acc
            }
            Kind::MonteCarlo(draws) => {
                let w = 1.0 / draws.len() as f64;
                weighted_sum(draws.iter().map(|&g| (g, w)), &f)
            }
        };
        self.check(name, acc, None, &f)
    }

    /// `E[f(G) ; G > threshold]`: the expectation restricted to gains above
    /// `threshold` (the mass below it contributes zero).
    pub fn expect_above_n<const N: usize>(
        &self,
        name: &'static str,
        threshold: f64,
        f: impl Fn(f64) -> [f64; N],
    ) -> Result<[f64; N]> {
        let acc = match &self.kind {
            Kind::PointMass(g) => {
                if *g > threshold {
                    f(*g)
                } else {
                    [0.0; N]
                }
            }
            Kind::Quadrature(rule) => {
                if threshold <= 0.0 {
                    return self.expect_n(name, f);
                }
                let mut acc = weighted_sum(rule.tail_nodes(threshold), &f);
                acc.iter_mut().for_each(|a| *a /= rule.total);
                acc
            }
            Kind::MonteCarlo(draws) => {
                let w = 1.0 / draws.len() as f64;
                weighted_sum(draws.iter().filter(|&&g| g > threshold).map(|&g| (g, w)), &f)
            }
        };
        self.check(name, acc, Some(threshold), &f)
    }

    fn check<const N: usize>(
        &self,
        name: &'static str,
        acc: [f64; N],
        threshold: Option<f64>,
        f: &impl Fn(f64) -> [f64; N],
    ) -> Result<[f64; N]> {
        if acc.iter().all(|v| v.is_finite()) {
            return Ok(acc);
        }
        // locate the offending node for the diagnostic
        let nodes: Vec<f64> = match (&self.kind, threshold) {
            (Kind::PointMass(g), _) => vec![*g],
            (Kind::Quadrature(rule), None) => rule.nodes.clone(),
            (Kind::Quadrature(rule), Some(t)) => rule.tail_nodes(t).map(|(g, _)| g).collect(),
            (Kind::MonteCarlo(d), t) => d
                .iter()
                .copied()
                .filter(|&g| g > t.unwrap_or(f64::NEG_INFINITY))
                .collect(),
        };
        for g in nodes {
            if let Some(v) = f(g).into_iter().find(|v| !v.is_finite()) {
                return Err(Error::NonFinite {
                    integrand: name,
                    node: g,
                    value: v,
                });
            }
        }
        let value = acc.into_iter().find(|v| !v.is_finite()).unwrap_or(f64::NAN);
        Err(Error::NonFinite {
            integrand: name,
            node: f64::NAN,
            value,
        })
    }
}

fn weighted_sum<const N: usize>(pairs: impl Iterator<Item = (f64, f64)>, f: &impl Fn(f64) -> [f64; N]) -> [f64; N] {
    let mut acc = [0.0; N];
    for (g, w) in pairs {
        if w == 0.0 {
            continue;
        }
        let v = f(g);
        for (a, v) in acc.iter_mut().zip(v) {
            *a += w * v;
        }
    }
    acc
}

/// ln(1e-17): truncated tail mass of the rule.
const LN_TAIL_EPS: f64 = -39.143_946_580_898_78;
/// Step in log-gain is STEP_SPAN / order, shrunk by sqrt(4 / m) for
/// concentrated distributions whose log-gain peak narrows as 1 / sqrt(m).
const STEP_SPAN: f64 = 24.0;
/// Depth of the shifted rule below `min(t0, 1)`, in e-folds. The integrand
/// behaves like `e^x` down there, so the first weight absorbs the missing
/// geometric tail and the truncation error is of order `e^(-2 depth)`.
const BREAKPOINT_DEPTH: f64 = 20.0;

#[derive(Debug, Clone)]
struct GammaRule {
    m: f64,
    scale: f64,
    ln_gamma_m: f64,
    step: f64,
    x_hi: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    /// Sum of `weights`; expectations divide by it so constants are exact.
    total: f64,
}

impl GammaRule {
    fn new(m: f64, mean_gain: f64, order: usize) -> Self {
        let scale = mean_gain / m;
        let ln_gamma_m = ln_gamma(m);
        let step = STEP_SPAN / order as f64 * (2.0 / m.sqrt()).min(1.0);
        // P(t < e^x) ~ e^{m x} / Gamma(m + 1) below the lower end
        let x_lo = (LN_TAIL_EPS + ln_gamma(m + 1.0)) / m;
        let x_hi = (m + 10.0 * m.sqrt() + 45.0).ln();
        let (xs, h) = grid(x_lo, x_hi, step);
        let mut weights: Vec<f64> = xs.iter().map(|&x| h * (m * x - x.exp() - ln_gamma_m).exp()).collect();
        trapezoid_ends(&mut weights);
        let total = weights.iter().sum();
        let nodes = xs.iter().map(|&x| scale * x.exp()).collect();
        GammaRule {
            m,
            scale,
            ln_gamma_m,
            step,
            x_hi,
            nodes,
            weights,
            total,
        }
    }

    /// Nodes and weights of the rule for `G > threshold`, via `t = t0 + e^x`.
    fn tail_nodes(&self, threshold: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let t0 = threshold / self.scale;
        let lo = t0.ln().min(0.0) - BREAKPOINT_DEPTH;
        let (xs, h) = if lo < self.x_hi {
            grid(lo, self.x_hi, self.step)
        } else {
            (Vec::new(), 0.0)
        };
        let last = xs.len().saturating_sub(1);
        let m = self.m;
        let ln_gamma_m = self.ln_gamma_m;
        let scale = self.scale;
        xs.into_iter().enumerate().map(move |(i, x)| {
            let ex = x.exp();
            let t = t0 + ex;
            let mut w = h * (x + (m - 1.0) * t.ln() - t - ln_gamma_m).exp();
            if i == 0 {
                w /= -(-h).exp_m1();
            } else if i == last {
                w *= 0.5;
            }
            (scale * t, w)
        })
    }
}

fn grid(lo: f64, hi: f64, step: f64) -> (Vec<f64>, f64) {
    let n = ((hi - lo) / step).ceil().max(1.0) as usize + 1;
    let h = (hi - lo) / (n - 1) as f64;
    ((0..n).map(|i| lo + h * i as f64).collect(), h)
}

fn trapezoid_ends(w: &mut [f64]) {
    if let Some(first) = w.first_mut() {
        *first *= 0.5;
    }
    if let Some(last) = w.last_mut() {
        *last *= 0.5;
    }
}
