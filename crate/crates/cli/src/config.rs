//! Tolerances and caps, read from one TOML file. Command-line flags override
//! individual keys.

use std::path::Path;

use blockade::floquet::{Convergence, Integrator, PropagatorConfig};
use blockade::{EnumerationLimits, MedianTestOptions};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// Time steps per drive period.
    pub steps: usize,
    /// `cf4` or `midpoint`.
    pub integrator: String,
    /// Double the step count until successive propagators agree.
    pub converge: bool,
    pub converge_tolerance: f64,
    pub max_steps: usize,
    /// Largest `‖U v - e^{-iε} v‖` accepted for a Floquet eigenpair.
    pub eigen_residual_tolerance: f64,
    /// Slack above `ln 2` allowed for clock-chain eigenstate entropies.
    pub entropy_slack: f64,
    pub max_vars: usize,
    pub max_states: usize,
    pub median_max_vertices: usize,
    /// Worker threads; 0 uses every available core.
    pub threads: usize,
}

impl Default for Config {
    fn default() -> Self {
        let conv = Convergence::default();
        let limits = EnumerationLimits::default();
        Config {
            steps: PropagatorConfig::default().steps,
            integrator: Integrator::default().name().to_string(),
            converge: false,
            converge_tolerance: conv.tolerance,
            max_steps: conv.max_steps,
            eigen_residual_tolerance: 1e-8,
            entropy_slack: 1e-9,
            max_vars: limits.max_vars,
            max_states: limits.max_states,
            median_max_vertices: MedianTestOptions::default().max_vertices,
            threads: 0,
        }
    }
}

impl Config {
    pub fn parse(text: &str) -> CliResult<Self> {
        let config: Config = toml::from_str(text).map_err(|e| CliError::Usage(format!("config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path.display(), e))?;
        Config::parse(&text)
    }

    pub fn validate(&self) -> CliResult<()> {
        let positive = |x: f64| x.is_finite() && x > 0.0;
        if self.steps == 0 || self.max_steps < self.steps {
            return Err(CliError::Usage("config: need 0 < steps <= max_steps".into()));
        }
        if !(positive(self.converge_tolerance) && positive(self.eigen_residual_tolerance)) {
            return Err(CliError::Usage("config: tolerances must be positive".into()));
        }
        if !(self.entropy_slack.is_finite() && self.entropy_slack >= 0.0) {
            return Err(CliError::Usage("config: entropy_slack must be non-negative".into()));
        }
        self.integrator()?;
        Ok(())
    }

    pub fn integrator(&self) -> CliResult<Integrator> {
        Ok(Integrator::parse(&self.integrator)?)
    }

    pub fn propagator(&self) -> CliResult<PropagatorConfig> {
        Ok(PropagatorConfig {
            steps: self.steps,
            integrator: self.integrator()?,
            time_origin: 0.0,
            converge: self.converge.then_some(Convergence {
                tolerance: self.converge_tolerance,
                max_steps: self.max_steps,
            }),
        })
    }

    pub fn limits(&self) -> EnumerationLimits {
        EnumerationLimits {
            max_vars: self.max_vars,
            max_states: self.max_states,
        }
    }

    pub fn median(&self) -> MedianTestOptions {
        MedianTestOptions {
            max_vertices: self.median_max_vertices,
            ..MedianTestOptions::default()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_toml() {
        let text = toml::to_string(&Config::default()).unwrap();
        assert_eq!(Config::parse(&text).unwrap(), Config::default());
    }

    #[test]
    fn partial_file_keeps_other_defaults() {
        let c = Config::parse("steps = 512\nintegrator = \"midpoint\"\n").unwrap();
        assert_eq!(c.steps, 512);
        assert_eq!(c.integrator().unwrap(), Integrator::Midpoint);
        assert_eq!(c.entropy_slack, 1e-9);
    }

    #[test]
    fn bad_files_are_rejected() {
        assert!(Config::parse("stepz = 3").is_err());
        assert!(Config::parse("steps = 0").is_err());
        assert!(Config::parse("integrator = \"rk4\"").is_err());
        assert!(Config::parse("eigen_residual_tolerance = -1.0").is_err());
    }

    #[test]
    fn convergence_only_when_enabled() {
        let mut c = Config::default();
        assert!(c.propagator().unwrap().converge.is_none());
        c.converge = true;
        assert_eq!(c.propagator().unwrap().converge.unwrap().max_steps, c.max_steps);
    }
}
