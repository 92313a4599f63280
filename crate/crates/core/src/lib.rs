//! Simulation and chaos analysis of the sinusoidally driven series
//! resistor-inductor-diode (RLD) circuit.
//!
//! The diode is modelled as a two-region piecewise-linear capacitance and
//! conductance pair. The crate integrates the resulting switched linear
//! system with event-located RK4 steps, classifies the long-term response by
//! stroboscopic sampling, sweeps the drive amplitude to expose the
//! period-doubling route, and estimates the maximal Lyapunov exponent from
//! the resistor-voltage time series.
//!
//! All numeric code is generic over [`Scalar`] (`f32` or `f64`); the `*64`
//! aliases below name the double-precision instantiations used by the CLI.

// Negated comparisons are how NaN inputs get rejected alongside range checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod chaoskit;
pub mod integrator;
pub mod model;
pub mod scalar;

pub use analysis::{
    bifurcation_sweep, classify_period, portrait, stroboscopic_section, BifurcationDiagram, PeriodClass, SectionConfig,
    StroboscopicSection,
};
pub use integrator::{
    integrate, integrate_exponential, IntegrationConfig, IntegrationError, ScalarTrajectory, Trajectory,
};
pub use model::{
    region_of, resistor_voltage, vector_field, CircuitParams, DriveWaveform, ExpDiodeParams, RegionId, State,
    ThresholdMode,
};
pub use scalar::Scalar;

pub type CircuitParams64 = model::CircuitParams<f64>;
pub type CircuitParams32 = model::CircuitParams<f32>;
pub type ExpDiodeParams64 = model::ExpDiodeParams<f64>;
pub type State64 = model::State<f64>;
pub type IntegrationConfig64 = integrator::IntegrationConfig<f64>;
pub type Trajectory64 = integrator::Trajectory<f64>;
pub type ScalarTrajectory64 = integrator::ScalarTrajectory<f64>;
pub type SectionConfig64 = analysis::SectionConfig<f64>;
pub type StroboscopicSection64 = analysis::StroboscopicSection<f64>;
pub type BifurcationDiagram64 = analysis::BifurcationDiagram<f64>;
pub type ScalarSeries64 = chaoskit::ScalarSeries<f64>;
pub type ChaosConfig64 = chaoskit::ChaosConfig<f64>;
pub type LyapunovReport64 = chaoskit::LyapunovReport<f64>;
