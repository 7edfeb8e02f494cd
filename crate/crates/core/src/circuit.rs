//! Rate-dependent circuit power.
//!
//! The circuit draws `kappa * phi(R)` Watts on top of the static circuit
//! power when transmitting at `R` bits/second. `phi` must vanish at zero and
//! be increasing and convex; the auxiliary function
//! `g(R) = R phi'(R) - phi(R)` is zero for the linear model and strictly
//! increasing for strictly convex models.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Shape of the rate-dependent circuit power `phi(R)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "RawCircuit", into = "RawCircuit")]
pub enum CircuitPowerModel {
    /// `phi(R) = R`.
    #[default]
    Linear,
    /// `phi(R) = R^alpha` with `alpha >= 1`.
    PowerLaw { alpha: f64 },
}

impl CircuitPowerModel {
    pub fn linear() -> Self {
        CircuitPowerModel::Linear
    }

    /// Power-law model; rejects exponents that would make `phi` non-convex.
    pub fn power_law(alpha: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha < 1.0 {
            return Err(Error::InvalidParameter {
                name: "alpha",
                value: alpha,
                reason: "power-law exponent must be finite and >= 1".into(),
            });
        }
        Ok(CircuitPowerModel::PowerLaw { alpha })
    }

    /// Whether `g` is strictly increasing (and therefore invertible).
    pub fn is_strictly_convex(&self) -> bool {
        matches!(*self, CircuitPowerModel::PowerLaw { alpha } if alpha > 1.0)
    }

    pub fn phi(&self, rate: f64) -> Result<f64> {
        check_rate(rate)?;
        Ok(match *self {
            CircuitPowerModel::Linear => rate,
            CircuitPowerModel::PowerLaw { alpha } => rate.powf(alpha),
        })
    }

    pub fn phi_prime(&self, rate: f64) -> Result<f64> {
        check_rate(rate)?;
        Ok(match *self {
            CircuitPowerModel::Linear => 1.0,
            CircuitPowerModel::PowerLaw { alpha } => alpha * rate.powf(alpha - 1.0),
        })
    }

    /// `R phi'(R) - phi(R)`, evaluated in closed form.
    pub fn g(&self, rate: f64) -> Result<f64> {
        check_rate(rate)?;
        Ok(match *self {
            CircuitPowerModel::Linear => 0.0,
            CircuitPowerModel::PowerLaw { alpha } => (alpha - 1.0) * rate.powf(alpha),
        })
    }

    /// Inverse of `g` on `[0, inf)`: the rate at which `g(R) = level`.
    pub fn g_inverse(&self, level: f64) -> Result<f64> {
        match *self {
            CircuitPowerModel::PowerLaw { alpha } if alpha > 1.0 => {
                if !(level >= 0.0) {
                    return Err(Error::Domain {
                        what: "g_inverse",
                        value: level,
                        reason: "level must be nonnegative",
                    });
                }
                Ok((level / (alpha - 1.0)).powf(1.0 / alpha))
            }
            _ => Err(Error::NoRoot("g is identically zero for a linear circuit model")),
        }
    }
}

fn check_rate(rate: f64) -> Result<()> {
    if rate >= 0.0 {
        Ok(())
    } else {
        Err(Error::Domain {
            what: "circuit power",
            value: rate,
            reason: "rate must be nonnegative",
        })
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum RawCircuit {
    Linear,
    #[serde(rename = "powerlaw", alias = "power_law")]
    PowerLaw {
        alpha: f64,
    },
}

impl TryFrom<RawCircuit> for CircuitPowerModel {
    type Error = Error;

    fn try_from(raw: RawCircuit) -> Result<Self> {
        match raw {
            RawCircuit::Linear => Ok(CircuitPowerModel::Linear),
            RawCircuit::PowerLaw { alpha } => CircuitPowerModel::power_law(alpha),
        }
    }
}

impl From<CircuitPowerModel> for RawCircuit {
    fn from(m: CircuitPowerModel) -> Self {
        match m {
            CircuitPowerModel::Linear => RawCircuit::Linear,
            CircuitPowerModel::PowerLaw { alpha } => RawCircuit::PowerLaw { alpha },
        }
    }
}
