//! Run configuration shared by the command line and the verification suite.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::melnikov::dominance::precision_bits_from_env;
use crate::phases::PhaseSource;
use crate::quadratic_field::FrequencyModel;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunConfig {
    pub rho: f64,
    /// `mu = eps^p`.
    pub p: f64,
    /// Accept `p <= 3`.
    pub allow_small_p: bool,
    pub precision_bits: usize,
    pub eps_min: f64,
    pub eps_max: f64,
    pub points: usize,
    pub format: OutputFormat,
    pub phases: PhaseSource,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            rho: 1.0,
            p: 3.5,
            allow_small_p: false,
            precision_bits: precision_bits_from_env(),
            eps_min: 1e-6,
            eps_max: 1e-3,
            points: 100,
            format: OutputFormat::Csv,
            phases: PhaseSource::Zero,
            seed: 1,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return Err(Error::Config(format!("rho = {} must be positive", self.rho)));
        }
        if !self.p.is_finite() {
            return Err(Error::Config("p must be finite".into()));
        }
        if self.p <= 3.0 && !self.allow_small_p {
            return Err(Error::Config(format!(
                "p = {} is not above 3; the four-harmonic model is only meaningful for mu = eps^p with p > 3 (pass the override flag to run anyway)",
                self.p
            )));
        }
        if self.precision_bits < 53 {
            return Err(Error::Config(format!("precision_bits = {} is below 53", self.precision_bits)));
        }
        if !(self.eps_min > 0.0 && self.eps_max > self.eps_min) {
            return Err(Error::Config(format!(
                "need 0 < eps_min < eps_max, got [{}, {}]",
                self.eps_min, self.eps_max
            )));
        }
        if self.points == 0 {
            return Err(Error::Config("points must be positive".into()));
        }
        Ok(())
    }

    pub fn model(&self) -> Result<FrequencyModel> {
        FrequencyModel::silver(self.rho).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn mu(&self, eps: f64) -> f64 {
        eps.powf(self.p)
    }
}
