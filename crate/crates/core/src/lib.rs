//! Energy-efficiency / spectral-efficiency tradeoff of a flat-fading link
//! whose circuit power grows with the transmission rate.
//!
//! The energy per bit `EE(C) = P(C) / (W C)` is strictly quasiconvex in the
//! spectral efficiency `C`, and the sign of the decision function
//! `Gamma(C) = kappa g(W C) + (sigma^2 / xi) f(C) - P_c` tells on which side
//! of the optimum a given `C` lies. [`Link::optimize`] brackets and bisects
//! on that sign.
//!
//! Three channel-knowledge cases are supported, see [`CaseSelector`].

// `!(x > 0.0)` is used on purpose so that NaN fails every range check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod circuit;
pub mod config;
pub mod error;
pub mod min_power;
pub mod optimizer;
pub mod sweep;

mod roots;

pub use channel::{mean_gain_from_distance, ExpectationMethod, ExpectationSpec, GainModel};
pub use circuit::CircuitPowerModel;
pub use error::{Error, Result};
pub use min_power::{CaseSelector, MinPowerEngine, WaterFillingSolution};
pub use optimizer::{EeSePoint, Link, LinkParams, NoiseLimitArgument, OptimumResult};
