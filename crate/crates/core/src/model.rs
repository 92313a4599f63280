//! Piecewise-linear RLD circuit model.
//!
//! The diode is replaced by a parallel conductance/capacitance pair whose
//! values depend on the operating region. With `x = (q - q0, i)` the loop
//! obeys
//!
//! ```text
//! dq/dt = -(G_k / C_k) (q - q0) + i
//! di/dt = -(q - q0) / (L C_k) - (R / L) i + (E w(wt) - V_i) / L
//! ```
//!
//! where `k` is the region selected by the sign of `q - q0`. An exponential
//! (Shockley) diode baseline is provided alongside for comparison.

use thiserror::Error;

use crate::scalar::Scalar;

/// Two-component column vector.
pub type Vector2<T> = [T; 2];

/// Row-major 2x2 matrix.
pub type Matrix2<T> = [[T; 2]; 2];

/// Time derivative of a [`State`]: `(dq/dt, di/dt)`.
pub type StateDerivative<T> = Vector2<T>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("{name} must be finite")]
    NonFinite { name: &'static str },
    #[error("{name} must be strictly positive (got {value})")]
    NotPositive { name: &'static str, value: f64 },
    #[error("{name} must be non-negative (got {value})")]
    Negative { name: &'static str, value: f64 },
    #[error("cap_region2 ({c2}) must exceed cap_region1 ({c1})")]
    CapacitanceOrdering { c1: f64, c2: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    /// The exponential diode law is undefined for `i <= -I_s`.
    #[error("diode current {current} A is at or below -I_s = {limit} A (logarithm undefined)")]
    LogDomain { current: f64, limit: f64 },
}

/// Shape of the sinusoidal source.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum DriveWaveform {
    #[default]
    Cosine,
    Sine,
}

impl DriveWaveform {
    #[inline]
    pub fn eval<T: Scalar>(self, phase: T) -> T {
        match self {
            DriveWaveform::Cosine => phase.cos(),
            DriveWaveform::Sine => phase.sin(),
        }
    }
}

/// Where the threshold term `-V_i / L` enters the current equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ThresholdMode {
    /// Present in both regions, exactly as the state-space forcing vector is written.
    #[default]
    PaperLiteral,
    /// Present only while the diode is forward biased (Region2).
    ForwardOnly,
}

/// Operating region of the piecewise-linear diode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RegionId {
    /// Below threshold: junction capacitance `C1`, conductance `G1`.
    Region1,
    /// Above threshold: diffusion capacitance `C2`, conductance `G2`.
    Region2,
}

impl RegionId {
    /// 1 or 2, as printed in CSV output.
    pub fn index(self) -> u8 {
        match self {
            RegionId::Region1 => 1,
            RegionId::Region2 => 2,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            RegionId::Region1 => RegionId::Region2,
            RegionId::Region2 => RegionId::Region1,
        }
    }
}

/// Physical and model parameters of the driven RLD loop (SI units).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircuitParams<T> {
    pub resistance: T,
    pub inductance: T,
    pub drive_amplitude: T,
    pub drive_frequency: T,
    pub drive_waveform: DriveWaveform,
    pub threshold_voltage: T,
    pub charge_offset: T,
    pub cap_region1: T,
    pub cap_region2: T,
    pub cond_region1: T,
    pub cond_region2: T,
    pub threshold_mode: ThresholdMode,
}

impl<T: Scalar> Default for CircuitParams<T> {
    /// R = 10 ohm, L = 1 mH, f = 100 kHz, E = 9 V with a diode whose reverse
    /// capacitance resonates with L at the drive frequency.
    fn default() -> Self {
        let inductance = T::lit(1e-3);
        let drive_frequency = T::lit(1e5);
        let omega = T::TAU() * drive_frequency;
        let cap_region1 = T::one() / (omega * omega * inductance);
        Self {
            resistance: T::lit(10.0),
            inductance,
            drive_amplitude: T::lit(9.0),
            drive_frequency,
            drive_waveform: DriveWaveform::Cosine,
            threshold_voltage: T::lit(1.0),
            charge_offset: T::zero(),
            cap_region1,
            cap_region2: T::lit(100.0) * cap_region1,
            cond_region1: T::zero(),
            cond_region2: T::lit(0.07),
            threshold_mode: ThresholdMode::PaperLiteral,
        }
    }
}

impl<T: Scalar> CircuitParams<T> {
    pub fn validate(&self) -> Result<(), ParamError> {
        let fields = [
            ("resistance", self.resistance),
            ("inductance", self.inductance),
            ("drive_amplitude", self.drive_amplitude),
            ("drive_frequency", self.drive_frequency),
            ("threshold_voltage", self.threshold_voltage),
            ("charge_offset", self.charge_offset),
            ("cap_region1", self.cap_region1),
            ("cap_region2", self.cap_region2),
            ("cond_region1", self.cond_region1),
            ("cond_region2", self.cond_region2),
        ];
        for (name, value) in fields {
            if !value.is_finite() {
                return Err(ParamError::NonFinite { name });
            }
        }
        for (name, value) in [
            ("resistance", self.resistance),
            ("inductance", self.inductance),
            ("cap_region1", self.cap_region1),
            ("cap_region2", self.cap_region2),
            ("drive_frequency", self.drive_frequency),
        ] {
            if value <= T::zero() {
                return Err(ParamError::NotPositive {
                    name,
                    value: value.as_f64(),
                });
            }
        }
        for (name, value) in [("cond_region1", self.cond_region1), ("cond_region2", self.cond_region2)] {
            if value < T::zero() {
                return Err(ParamError::Negative {
                    name,
                    value: value.as_f64(),
                });
            }
        }
        if self.cap_region2 <= self.cap_region1 {
            return Err(ParamError::CapacitanceOrdering {
                c1: self.cap_region1.as_f64(),
                c2: self.cap_region2.as_f64(),
            });
        }
        Ok(())
    }

    #[inline]
    pub fn angular_frequency(&self) -> T {
        T::TAU() * self.drive_frequency
    }

    #[inline]
    pub fn drive_period(&self) -> T {
        T::one() / self.drive_frequency
    }

    /// Source voltage `E w(wt)`.
    #[inline]
    pub fn drive_voltage(&self, t: T) -> T {
        self.drive_amplitude * self.drive_waveform.eval(self.angular_frequency() * t)
    }

    #[inline]
    pub fn capacitance(&self, region: RegionId) -> T {
        match region {
            RegionId::Region1 => self.cap_region1,
            RegionId::Region2 => self.cap_region2,
        }
    }

    #[inline]
    pub fn conductance(&self, region: RegionId) -> T {
        match region {
            RegionId::Region1 => self.cond_region1,
            RegionId::Region2 => self.cond_region2,
        }
    }

    /// Weight of the `-V_i / L` term in `region`.
    #[inline]
    fn threshold_weight(&self, region: RegionId) -> T {
        match (self.threshold_mode, region) {
            (ThresholdMode::PaperLiteral, _) | (ThresholdMode::ForwardOnly, RegionId::Region2) => T::one(),
            (ThresholdMode::ForwardOnly, RegionId::Region1) => T::zero(),
        }
    }
}

/// Capacitor charge and loop current.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct State<T> {
    pub charge: T,
    pub current: T,
}

impl<T: Scalar> State<T> {
    pub fn new(charge: T, current: T) -> Self {
        Self { charge, current }
    }

    pub fn is_finite(&self) -> bool {
        self.charge.is_finite() && self.current.is_finite()
    }

    /// The shifted state `(q - q0, i)`.
    #[inline]
    pub fn shifted(&self, params: &CircuitParams<T>) -> Vector2<T> {
        [self.charge - params.charge_offset, self.current]
    }

    #[inline]
    pub fn to_array(self) -> Vector2<T> {
        [self.charge, self.current]
    }

    #[inline]
    pub fn from_array(x: Vector2<T>) -> Self {
        Self {
            charge: x[0],
            current: x[1],
        }
    }
}

/// Region2 iff `q - q0 > 0`; the boundary itself belongs to Region1.
#[inline]
pub fn region_of<T: Scalar>(state: &State<T>, params: &CircuitParams<T>) -> RegionId {
    if state.charge - params.charge_offset > T::zero() {
        RegionId::Region2
    } else {
        RegionId::Region1
    }
}

/// Right-hand side with the region chosen by [`region_of`].
#[inline]
pub fn vector_field<T: Scalar>(t: T, state: &State<T>, params: &CircuitParams<T>) -> StateDerivative<T> {
    vector_field_in_region(region_of(state, params), t, state, params)
}

/// Right-hand side with an explicitly frozen region.
#[inline]
pub fn vector_field_in_region<T: Scalar>(
    region: RegionId,
    t: T,
    state: &State<T>,
    params: &CircuitParams<T>,
) -> StateDerivative<T> {
    let c = params.capacitance(region);
    let g = params.conductance(region);
    let l = params.inductance;
    let dq = state.charge - params.charge_offset;
    let i = state.current;
    let dq_dt = -(g / c) * dq + i;
    let di_dt = -dq / (l * c) - (params.resistance / l) * i
        + (params.drive_voltage(t) - params.threshold_voltage * params.threshold_weight(region)) / l;
    [dq_dt, di_dt]
}

/// `A_k = [[-G_k/C_k, 1], [-1/(L C_k), -R/L]]`.
pub fn system_matrix<T: Scalar>(region: RegionId, params: &CircuitParams<T>) -> Matrix2<T> {
    let c = params.capacitance(region);
    let g = params.conductance(region);
    let l = params.inductance;
    [[-g / c, T::one()], [-T::one() / (l * c), -params.resistance / l]]
}

/// `b_k(t) = [0, (E w(wt) - theta V_i) / L]`.
pub fn forcing<T: Scalar>(t: T, region: RegionId, params: &CircuitParams<T>) -> Vector2<T> {
    let v = params.drive_voltage(t) - params.threshold_voltage * params.threshold_weight(region);
    [T::zero(), v / params.inductance]
}

/// `A x + b`.
pub fn affine_apply<T: Scalar>(a: &Matrix2<T>, x: &Vector2<T>, b: &Vector2<T>) -> Vector2<T> {
    [
        a[0][0] * x[0] + a[0][1] * x[1] + b[0],
        a[1][0] * x[0] + a[1][1] * x[1] + b[1],
    ]
}

#[inline]
pub fn resistor_voltage<T: Scalar>(state: &State<T>, params: &CircuitParams<T>) -> T {
    params.resistance * state.current
}

/// Diode voltage reconstructed from the charge: `(q - q0)/C_k + V_i [k = 2]`.
///
/// This is a plotting convention; the state equations never use it.
pub fn diode_voltage<T: Scalar>(state: &State<T>, params: &CircuitParams<T>) -> T {
    let region = region_of(state, params);
    let dq = state.charge - params.charge_offset;
    let base = dq / params.capacitance(region);
    match region {
        RegionId::Region1 => base,
        RegionId::Region2 => base + params.threshold_voltage,
    }
}

/// Stored energy `(q - q0)^2 / (2 C_k) + L i^2 / 2`, plus `V_i (q - q0)` in
/// Region2 under [`ThresholdMode::ForwardOnly`].
///
/// With `E = 0`, `G1 = 0` and forward-only threshold this is continuous across
/// the switching surface and non-increasing along trajectories:
/// `dW/dt = -R i^2` in Region1 and
/// `-R i^2 - G2 dq (dq / C2 + V_i) / C2` in Region2.
pub fn storage_energy<T: Scalar>(state: &State<T>, params: &CircuitParams<T>) -> T {
    let region = region_of(state, params);
    let dq = state.charge - params.charge_offset;
    let half = T::lit(0.5);
    let mut w = half * dq * dq / params.capacitance(region) + half * params.inductance * state.current * state.current;
    if region == RegionId::Region2 && params.threshold_mode == ThresholdMode::ForwardOnly {
        w = w + params.threshold_voltage * dq;
    }
    w
}

/// Shockley diode parameters for the exponential baseline model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpDiodeParams<T> {
    pub saturation_current: T,
    pub emission_coefficient: T,
    pub thermal_voltage: T,
}

impl<T: Scalar> Default for ExpDiodeParams<T> {
    fn default() -> Self {
        Self {
            saturation_current: T::lit(1e-9),
            emission_coefficient: T::lit(1.7),
            thermal_voltage: T::lit(0.02585),
        }
    }
}

impl<T: Scalar> ExpDiodeParams<T> {
    pub fn validate(&self) -> Result<(), ParamError> {
        for (name, value) in [
            ("saturation_current", self.saturation_current),
            ("emission_coefficient", self.emission_coefficient),
            ("thermal_voltage", self.thermal_voltage),
        ] {
            if !value.is_finite() {
                return Err(ParamError::NonFinite { name });
            }
            if value <= T::zero() {
                return Err(ParamError::NotPositive {
                    name,
                    value: value.as_f64(),
                });
            }
        }
        Ok(())
    }

    /// `n V_T`.
    #[inline]
    pub fn slope_voltage(&self) -> T {
        self.emission_coefficient * self.thermal_voltage
    }

    /// `v_D(i) = n V_T ln(i / I_s + 1)`.
    pub fn diode_voltage(&self, current: T) -> Result<T, ModelError> {
        let ratio = current / self.saturation_current;
        if !(ratio > -T::one()) {
            return Err(ModelError::LogDomain {
                current: current.as_f64(),
                limit: -self.saturation_current.as_f64(),
            });
        }
        Ok(self.slope_voltage() * ratio.ln_1p())
    }

    /// Inverse law `i(v) = I_s (exp(v / n V_T) - 1)`.
    pub fn diode_current(&self, voltage: T) -> T {
        self.saturation_current * (voltage / self.slope_voltage()).exp_m1()
    }
}

/// `di/dt = (E w(wt) - R i - v_D(i)) / L` for the exponential diode.
pub fn exponential_vector_field<T: Scalar>(
    t: T,
    current: T,
    params: &CircuitParams<T>,
    exp_params: &ExpDiodeParams<T>,
) -> Result<T, ModelError> {
    let vd = exp_params.diode_voltage(current)?;
    Ok((params.drive_voltage(t) - params.resistance * current - vd) / params.inductance)
}
