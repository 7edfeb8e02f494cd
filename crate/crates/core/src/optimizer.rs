//! Energy efficiency of a link as a function of spectral efficiency, and the
//! bisection search for its unique minimizer.
//!
//! Total power is `P(C) = kappa phi(W C) + (sigma^2 / xi) psi(C) + P_c` and
//! the energy per bit is `EE(C) = P(C) / (W C)`. The optimum is the unique
//! root of the decision function
//! `Gamma(C) = kappa g(W C) + (sigma^2 / xi) f(C) - P_c`, which is negative
//! below the optimum and positive above it.

use rayon::prelude::*;

use crate::channel::{ExpectationSpec, GainModel};
use crate::circuit::CircuitPowerModel;
use crate::error::{Error, Result};
use crate::min_power::{CaseSelector, MinPowerEngine};

/// Default bisection tolerance in bits/s/Hz.
pub const DEFAULT_DELTA: f64 = 1e-8;
/// Default upper limit for bracket doubling in bits/s/Hz.
pub const DEFAULT_C_MAX: f64 = 64.0;
/// `|Gamma| <= ZERO_TOL * P_c` counts as an exact root.
const ZERO_TOL: f64 = 1e-14;

/// Complete parameter set of one link.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkParams {
    /// Bandwidth `W` in Hz.
    pub bandwidth: f64,
    /// Receiver noise power `sigma^2` in Watts.
    pub noise_power: f64,
    /// Power amplifier efficiency `xi` in (0, 1].
    pub pa_efficiency: f64,
    /// Rate-dependent circuit power coefficient `kappa`.
    pub kappa: f64,
    /// Static circuit power `P_c` in Watts.
    pub p_static: f64,
    pub case: CaseSelector,
    pub gain: GainModel,
    pub circuit: CircuitPowerModel,
    pub expectation: ExpectationSpec,
}

impl LinkParams {
    pub fn validate(&self) -> Result<()> {
        positive("bandwidth", self.bandwidth)?;
        positive("noise_power", self.noise_power)?;
        if !(self.pa_efficiency > 0.0 && self.pa_efficiency <= 1.0) {
            return Err(invalid("pa_efficiency", self.pa_efficiency, "must lie in (0, 1]"));
        }
        if !(self.kappa >= 0.0) || self.kappa.is_infinite() {
            return Err(invalid("kappa", self.kappa, "must be finite and >= 0"));
        }
        positive("p_static", self.p_static)?;
        self.expectation.validate()?;
        self.case.check_gain(&self.gain)
    }

    /// Validates the parameters and prepares the expectation rule.
    pub fn link(&self) -> Result<Link> {
        Link::new(self.clone())
    }
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(name, v, "must be finite and > 0"))
    }
}

fn invalid(name: &'static str, value: f64, reason: &str) -> Error {
    Error::InvalidParameter {
        name,
        value,
        reason: reason.into(),
    }
}

/// One sample of the tradeoff curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EeSePoint {
    /// Spectral efficiency in bits/s/Hz.
    pub c: f64,
    /// Total consumed power in Watts.
    pub total_power: f64,
    /// Energy per bit in Joules; `+inf` at `c = 0`.
    pub ee: f64,
    /// Decision function value in Watts.
    pub gamma: f64,
}

/// Result of the bisection search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimumResult {
    pub c_star: f64,
    pub ee_star: f64,
    /// Decision function evaluations (doublings plus bisection steps).
    pub iterations: u32,
    pub doublings: u32,
    pub final_bracket_width: f64,
}

/// Which argument the noise-free limit applies the circuit term to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NoiseLimitArgument {
    /// Solve `kappa g(W C) = P_c`, consistent with the decision function.
    #[default]
    Scaled,
    /// Solve `kappa g(C) = P_c` with the spectral efficiency used directly
    /// as the rate argument.
    Bare,
}

struct Bracketed {
    root: f64,
    iterations: u32,
    doublings: u32,
    width: f64,
}

/// A validated link with its expectation rule prepared.
#[derive(Debug, Clone)]
pub struct Link {
    params: LinkParams,
    engine: MinPowerEngine,
}

impl Link {
    pub fn new(params: LinkParams) -> Result<Self> {
        params.validate()?;
        let engine = MinPowerEngine::new(params.case, params.gain, &params.expectation)?;
        Ok(Link { params, engine })
    }

    pub fn params(&self) -> &LinkParams {
        &self.params
    }

    pub fn engine(&self) -> &MinPowerEngine {
        &self.engine
    }

    /// `sigma^2 / xi`.
    pub fn noise_scale(&self) -> f64 {
        self.params.noise_power / self.params.pa_efficiency
    }

    fn rate(&self, c: f64) -> f64 {
        self.params.bandwidth * c
    }

    pub fn total_power(&self, c: f64) -> Result<f64> {
        let psi = self.engine.psi(c)?;
        Ok(
            self.params.kappa * self.params.circuit.phi(self.rate(c))?
                + self.noise_scale() * psi
                + self.params.p_static,
        )
    }

    /// Energy per bit; `+inf` at zero rate.
    pub fn ee(&self, c: f64) -> Result<f64> {
        let p = self.total_power(c)?;
        Ok(if c == 0.0 { f64::INFINITY } else { p / self.rate(c) })
    }

    pub fn gamma(&self, c: f64) -> Result<f64> {
        let f = self.engine.f(c)?;
        Ok(self.params.kappa * self.params.circuit.g(self.rate(c))? + self.noise_scale() * f - self.params.p_static)
    }

    /// Power, energy per bit and decision function from one inner solve.
    pub fn point(&self, c: f64) -> Result<EeSePoint> {
        let mp = self.engine.evaluate(c)?;
        let p = &self.params;
        let r = self.rate(c);
        let total_power = p.kappa * p.circuit.phi(r)? + self.noise_scale() * mp.psi + p.p_static;
        let gamma = p.kappa * p.circuit.g(r)? + self.noise_scale() * mp.f - p.p_static;
        let ee = if c == 0.0 { f64::INFINITY } else { total_power / r };
        Ok(EeSePoint {
            c,
            total_power,
            ee,
            gamma,
        })
    }

    pub fn optimize(&self, delta: f64) -> Result<OptimumResult> {
        self.optimize_with(delta, DEFAULT_C_MAX)
    }

    /// Bisection on the sign of `Gamma` starting from `[0, 1]`, doubling the
    /// upper end while `Gamma < 0` but never beyond `c_max`.
    pub fn optimize_with(&self, delta: f64, c_max: f64) -> Result<OptimumResult> {
        let b = self.bracketed_root(delta, c_max, |c| self.gamma(c))?;
        Ok(OptimumResult {
            c_star: b.root,
            ee_star: self.ee(b.root)?,
            iterations: b.iterations,
            doublings: b.doublings,
            final_bracket_width: b.width,
        })
    }

    /// Optimum in the limit `kappa -> 0`: the root of
    /// `(sigma^2 / xi) f(C) = P_c`.
    pub fn limit_se_kappa_zero(&self) -> Result<f64> {
        let scale = self.noise_scale();
        let pc = self.params.p_static;
        self.bracketed_root(DEFAULT_DELTA, DEFAULT_C_MAX, |c| Ok(scale * self.engine.f(c)? - pc))
            .map(|b| b.root)
    }

    /// Optimum in the limit `sigma^2 -> 0`: the root of `kappa g(R) = P_c`,
    /// with `R = W C` or `R = C` depending on `arg`. Only exists for a
    /// strictly convex circuit model and `kappa > 0`.
    pub fn limit_se_noise_zero(&self, arg: NoiseLimitArgument) -> Result<f64> {
        let p = &self.params;
        if p.kappa == 0.0 {
            return Err(Error::NoRoot("kappa is zero, so the circuit term never reaches P_c"));
        }
        let r = p.circuit.g_inverse(p.p_static / p.kappa)?;
        Ok(match arg {
            NoiseLimitArgument::Scaled => r / p.bandwidth,
            NoiseLimitArgument::Bare => r,
        })
    }

    /// Samples the curve on a nonnegative, strictly increasing grid.
    pub fn tradeoff_curve(&self, grid: &[f64]) -> Result<Vec<EeSePoint>> {
        check_grid(grid)?;
        grid.par_iter().map(|&c| self.point(c)).collect()
    }

    /// Exhaustive minimum of `EE` over `{step, 2 step, ..., c_max}`.
    /// Returns `(c_best, ee_best)`; ties go to the smaller `C`.
    pub fn grid_oracle(&self, c_max: f64, step: f64) -> Result<(f64, f64)> {
        if !(step > 0.0) || !(c_max > step) || !c_max.is_finite() {
            return Err(Error::Domain {
                what: "grid oracle",
                value: step,
                reason: "need 0 < step < c_max",
            });
        }
        let n = (c_max / step * (1.0 + 1e-12)).floor() as usize;
        let values: Vec<(f64, f64)> = (1..=n)
            .into_par_iter()
            .map(|k| {
                let c = k as f64 * step;
                self.ee(c).map(|ee| (c, ee))
            })
            .collect::<Result<_>>()?;
        Ok(values
            .into_iter()
            .fold((f64::NAN, f64::INFINITY), |best, v| if v.1 < best.1 { v } else { best }))
    }

    fn bracketed_root(&self, delta: f64, c_max: f64, h: impl Fn(f64) -> Result<f64>) -> Result<Bracketed> {
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(invalid("delta", delta, "must be finite and > 0"));
        }
        if !(c_max >= 1.0) {
            return Err(invalid("c_max", c_max, "must be >= 1"));
        }
        let zero = ZERO_TOL * self.params.p_static;
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        let mut iterations = 0;
        let mut doublings = 0;
        loop {
            let v = h(hi)?;
            iterations += 1;
            if v.abs() <= zero {
                return Ok(Bracketed {
                    root: hi,
                    iterations,
                    doublings,
                    width: 0.0,
                });
            }
            if v > 0.0 {
                break;
            }
            if 2.0 * hi > c_max {
                return Err(Error::UnboundedRoot {
                    cap: c_max,
                    last_value: v,
                });
            }
            lo = hi;
            hi *= 2.0;
            doublings += 1;
        }
        while hi - lo > delta {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let v = h(mid)?;
            iterations += 1;
            if v.abs() <= zero {
                return Ok(Bracketed {
                    root: mid,
                    iterations,
                    doublings,
                    width: hi - lo,
                });
            }
            if v < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(Bracketed {
            root: 0.5 * (lo + hi),
            iterations,
            doublings,
            width: hi - lo,
        })
    }
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if let Some(&bad) = grid.iter().find(|c| !(**c >= 0.0) || c.is_infinite()) {
        return Err(Error::Domain {
            what: "tradeoff grid",
            value: bad,
            reason: "values must be finite and >= 0",
        });
    }
    if let Some(w) = grid.windows(2).find(|w| w[1] <= w[0]) {
        return Err(Error::Domain {
            what: "tradeoff grid",
            value: w[1],
            reason: "values must be strictly increasing",
        });
    }
    Ok(())
}
