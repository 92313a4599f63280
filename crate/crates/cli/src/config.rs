//! Run configuration: a TOML document with flat sections, every key optional.

use std::path::PathBuf;

use rld_core::analysis::SectionConfig;
use rld_core::chaoskit::{ChaosConfig, FnnConfig};
use rld_core::{CircuitParams, DriveWaveform, ExpDiodeParams, IntegrationConfig, State, ThresholdMode};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Waveform {
    Cosine,
    Sine,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Threshold {
    PaperLiteral,
    ForwardOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Svg,
}

/// Circuit parameters in SI units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CircuitSection {
    pub resistance: f64,
    pub inductance: f64,
    pub drive_amplitude: f64,
    pub drive_frequency: f64,
    pub drive_waveform: Waveform,
    pub threshold_voltage: f64,
    pub charge_offset: f64,
    pub cap_region1: f64,
    pub cap_region2: f64,
    pub cond_region1: f64,
    pub cond_region2: f64,
    pub threshold_mode: Threshold,
}

impl Default for CircuitSection {
    fn default() -> Self {
        let p = CircuitParams::<f64>::default();
        Self {
            resistance: p.resistance,
            inductance: p.inductance,
            drive_amplitude: p.drive_amplitude,
            drive_frequency: p.drive_frequency,
            drive_waveform: Waveform::Cosine,
            threshold_voltage: p.threshold_voltage,
            charge_offset: p.charge_offset,
            cap_region1: p.cap_region1,
            cap_region2: p.cap_region2,
            cond_region1: p.cond_region1,
            cond_region2: p.cond_region2,
            threshold_mode: Threshold::PaperLiteral,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExponentialSection {
    pub saturation_current: f64,
    pub emission_coefficient: f64,
    pub thermal_voltage: f64,
}

impl Default for ExponentialSection {
    fn default() -> Self {
        let d = ExpDiodeParams::<f64>::default();
        Self {
            saturation_current: d.saturation_current,
            emission_coefficient: d.emission_coefficient,
            thermal_voltage: d.thermal_voltage,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegrationSection {
    pub steps_per_period: usize,
    /// Total simulated drive periods for `simulate` and `compare-exponential`.
    pub cycles: usize,
    /// Event bracket width as a fraction of the step.
    pub event_tolerance: f64,
    pub max_event_iterations: usize,
    /// `q - q0` at `t = 0`.
    pub initial_excess_charge: f64,
    pub initial_current: f64,
}

impl Default for IntegrationSection {
    fn default() -> Self {
        let a = AnalysisSection::default();
        Self {
            steps_per_period: 1000,
            cycles: a.transient_cycles + a.record_cycles,
            event_tolerance: 1e-10,
            max_event_iterations: 64,
            initial_excess_charge: 0.0,
            initial_current: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisSection {
    pub transient_cycles: usize,
    pub record_cycles: usize,
    pub epsilon: f64,
    pub max_period: usize,
}

impl Default for AnalysisSection {
    fn default() -> Self {
        let s = SectionConfig::<f64>::default();
        Self {
            transient_cycles: s.transient_cycles,
            record_cycles: s.record_cycles,
            epsilon: s.epsilon,
            max_period: s.max_period,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub e_min: f64,
    pub e_max: f64,
    pub steps: usize,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            e_min: 0.1,
            e_max: 10.0,
            steps: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ChaosSection {
    /// Post-transient periods simulated for an internal `lyapunov` run.
    pub record_cycles: usize,
    /// Keep every n-th integration sample of the resistor voltage.
    pub sample_stride: usize,
    /// Sample spacing for a single-column input CSV, seconds.
    pub input_dt: f64,
    pub bins: usize,
    pub max_delay: usize,
    pub m_max: usize,
    pub r_tol: f64,
    pub a_tol: f64,
    pub fnn_noise_floor: f64,
    pub fnn_threshold: f64,
    pub fnn_max_points: usize,
    pub follow_steps: usize,
    pub replace_threshold: f64,
    pub min_separation: f64,
    /// Fixed embedding; the pipeline chooses when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delay: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dimension: Option<usize>,
    /// Defaults to `dimension * delay`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theiler_window: Option<usize>,
}

impl Default for ChaosSection {
    fn default() -> Self {
        let c = ChaosConfig::<f64>::default();
        Self {
            record_cycles: 400,
            sample_stride: 20,
            input_dt: 1.0,
            bins: c.bins,
            max_delay: c.max_delay,
            m_max: c.m_max,
            r_tol: c.fnn.r_tol,
            a_tol: c.fnn.a_tol,
            fnn_noise_floor: c.fnn.noise_floor,
            fnn_threshold: c.fnn_threshold,
            fnn_max_points: c.fnn_max_points,
            follow_steps: c.follow_steps,
            replace_threshold: c.replace_threshold,
            min_separation: c.min_separation,
            delay: None,
            dimension: None,
            theiler_window: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
    pub formats: Vec<Format>,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            formats: vec![Format::Csv, Format::Svg],
        }
    }
}

impl OutputSection {
    pub fn wants(&self, format: Format) -> bool {
        self.formats.contains(&format)
    }

    pub fn set(&mut self, format: Format, on: bool) {
        self.formats.retain(|f| *f != format);
        if on {
            self.formats.push(format);
        }
        self.formats.sort();
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub circuit: CircuitSection,
    pub exponential: ExponentialSection,
    pub integration: IntegrationSection,
    pub analysis: AnalysisSection,
    pub sweep: SweepSection,
    pub chaos: ChaosSection,
    pub output: OutputSection,
}

impl RunConfig {
    /// Parses and validates a config document. Missing keys take defaults.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Validation(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// The fully resolved document; parses back to an equal config.
    pub fn echo(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let invalid = |msg: String| Err(CliError::Validation(msg));
        self.circuit_params()
            .validate()
            .map_err(|e| CliError::Validation(format!("circuit: {e}")))?;
        self.exp_params()
            .validate()
            .map_err(|e| CliError::Validation(format!("exponential: {e}")))?;

        let i = &self.integration;
        if i.steps_per_period < 4 {
            return invalid(format!(
                "integration.steps_per_period must be >= 4 (got {})",
                i.steps_per_period
            ));
        }
        if i.cycles < 1 {
            return invalid("integration.cycles must be >= 1".into());
        }
        if !(i.event_tolerance > 0.0 && i.event_tolerance < 1.0) {
            return invalid(format!(
                "integration.event_tolerance must lie in (0, 1) (got {})",
                i.event_tolerance
            ));
        }
        if !(i.initial_excess_charge.is_finite() && i.initial_current.is_finite()) {
            return invalid("integration initial state must be finite".into());
        }
        self.integration_config(self.integration.cycles)
            .validate()
            .map_err(|e| CliError::Validation(format!("integration: {e}")))?;

        let a = &self.analysis;
        if !(a.epsilon > 0.0 && a.epsilon < 1.0) {
            return invalid(format!("analysis.epsilon must lie in (0, 1) (got {})", a.epsilon));
        }
        if a.max_period < 1 {
            return invalid("analysis.max_period must be >= 1".into());
        }
        let needed = (4 * a.max_period).max(rld_core::analysis::MIN_SECTION_CYCLES);
        if a.record_cycles < needed {
            return invalid(format!(
                "analysis.record_cycles must be >= {needed} (got {})",
                a.record_cycles
            ));
        }

        let s = &self.sweep;
        if !(s.e_min.is_finite() && s.e_max.is_finite() && s.e_min >= 0.0 && s.e_max > s.e_min) {
            return invalid(format!(
                "sweep range must satisfy 0 <= e_min < e_max (got {} .. {})",
                s.e_min, s.e_max
            ));
        }
        if s.steps < 2 {
            return invalid(format!("sweep.steps must be >= 2 (got {})", s.steps));
        }

        let c = &self.chaos;
        if c.sample_stride < 1 || c.record_cycles < 1 {
            return invalid("chaos.sample_stride and chaos.record_cycles must be >= 1".into());
        }
        if !(c.input_dt.is_finite() && c.input_dt > 0.0) {
            return invalid(format!("chaos.input_dt must be > 0 (got {})", c.input_dt));
        }
        if c.bins < 2 || c.max_delay < 2 || c.m_max < 2 || c.follow_steps < 1 {
            return invalid("chaos: bins, max_delay and m_max must be >= 2, follow_steps >= 1".into());
        }
        for (name, v) in [
            ("r_tol", c.r_tol),
            ("a_tol", c.a_tol),
            ("replace_threshold", c.replace_threshold),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return invalid(format!("chaos.{name} must be > 0 (got {v})"));
            }
        }
        for (name, v) in [
            ("fnn_noise_floor", c.fnn_noise_floor),
            ("min_separation", c.min_separation),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return invalid(format!("chaos.{name} must be >= 0 (got {v})"));
            }
        }
        if !(c.fnn_threshold >= 0.0 && c.fnn_threshold <= 1.0) {
            return invalid(format!(
                "chaos.fnn_threshold must lie in [0, 1] (got {})",
                c.fnn_threshold
            ));
        }
        if c.delay == Some(0) || c.dimension == Some(0) {
            return invalid("chaos.delay and chaos.dimension must be >= 1".into());
        }
        if self.output.formats.is_empty() {
            return invalid("output.formats must name at least one of csv, svg".into());
        }
        Ok(())
    }

    pub fn circuit_params(&self) -> CircuitParams<f64> {
        let c = &self.circuit;
        CircuitParams {
            resistance: c.resistance,
            inductance: c.inductance,
            drive_amplitude: c.drive_amplitude,
            drive_frequency: c.drive_frequency,
            drive_waveform: match c.drive_waveform {
                Waveform::Cosine => DriveWaveform::Cosine,
                Waveform::Sine => DriveWaveform::Sine,
            },
            threshold_voltage: c.threshold_voltage,
            charge_offset: c.charge_offset,
            cap_region1: c.cap_region1,
            cap_region2: c.cap_region2,
            cond_region1: c.cond_region1,
            cond_region2: c.cond_region2,
            threshold_mode: match c.threshold_mode {
                Threshold::PaperLiteral => ThresholdMode::PaperLiteral,
                Threshold::ForwardOnly => ThresholdMode::ForwardOnly,
            },
        }
    }

    pub fn exp_params(&self) -> ExpDiodeParams<f64> {
        let e = &self.exponential;
        ExpDiodeParams {
            saturation_current: e.saturation_current,
            emission_coefficient: e.emission_coefficient,
            thermal_voltage: e.thermal_voltage,
        }
    }

    /// Grid of `cycles` drive periods from `t = 0`.
    pub fn integration_config(&self, cycles: usize) -> IntegrationConfig<f64> {
        let i = &self.integration;
        let mut cfg = IntegrationConfig::for_drive(&self.circuit_params(), cycles, i.steps_per_period);
        cfg.event_tolerance = cfg.step_size * i.event_tolerance;
        cfg.max_event_iterations = i.max_event_iterations;
        cfg
    }

    pub fn initial_state(&self) -> State<f64> {
        State::new(
            self.circuit.charge_offset + self.integration.initial_excess_charge,
            self.integration.initial_current,
        )
    }

    pub fn section_config(&self) -> SectionConfig<f64> {
        let a = &self.analysis;
        SectionConfig {
            transient_cycles: a.transient_cycles,
            record_cycles: a.record_cycles,
            epsilon: a.epsilon,
            max_period: a.max_period,
        }
    }

    pub fn chaos_config(&self) -> ChaosConfig<f64> {
        let c = &self.chaos;
        ChaosConfig {
            bins: c.bins,
            max_delay: c.max_delay,
            m_max: c.m_max,
            fnn: FnnConfig {
                r_tol: c.r_tol,
                a_tol: c.a_tol,
                noise_floor: c.fnn_noise_floor,
            },
            fnn_threshold: c.fnn_threshold,
            fnn_max_points: c.fnn_max_points,
            theiler_window: c.theiler_window,
            follow_steps: c.follow_steps,
            replace_threshold: c.replace_threshold,
            min_separation: c.min_separation,
            delay: c.delay,
            dimension: c.dimension,
        }
    }
}
