//! Fixed-step integration of the circuit models.
//!
//! The piecewise-linear model is advanced with classical RK4 using the region
//! frozen at the start of each step. When a step ends in the other region the
//! switching instant is bracketed by bisection, the state is moved just past
//! the surface and the step resumes from there. Samples land on a uniform grid
//! `t0 + n h` regardless of the event substeps taken in between.

use thiserror::Error;

use crate::model::{region_of, vector_field_in_region, CircuitParams, ExpDiodeParams, ModelError, State};
use crate::scalar::Scalar;

/// Maximum number of region flips inside a single grid step before the step
/// is declared to be chattering.
const MAX_EVENTS_PER_STEP: usize = 16;

/// Maximum number of times an implicit exponential-model step is halved.
pub const MAX_STEP_HALVINGS: u32 = 40;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntegrationError {
    #[error("invalid integration config: {0}")]
    InvalidConfig(String),
    #[error("non-finite stage value at t = {t} s")]
    NonFinite { t: f64 },
    #[error("state diverged; last finite state at t = {last_good_t} s")]
    Diverged { last_good_t: f64 },
    #[error("crossing bracket invalid: surface has the same sign at both ends")]
    BracketInvalid,
    #[error("event location failed near t = {t} s after {iterations} iterations")]
    EventFailure { t: f64, iterations: usize },
    #[error("step rejected at t = {t} s after {halvings} halvings: {reason}")]
    StepRejected { t: f64, halvings: u32, reason: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationConfig<T> {
    pub step_size: T,
    pub t_start: T,
    pub t_end: T,
    /// Width below which the bisection bracket around a switching time stops shrinking.
    pub event_tolerance: T,
    pub max_event_iterations: usize,
}

impl<T: Scalar> IntegrationConfig<T> {
    /// `steps_per_period` samples per drive period over `cycles` periods
    /// starting at `t = 0`. Event tolerance is `1e-10 h`.
    pub fn for_drive(params: &CircuitParams<T>, cycles: usize, steps_per_period: usize) -> Self {
        let period = params.drive_period();
        let h = period / T::count(steps_per_period);
        Self {
            step_size: h,
            t_start: T::zero(),
            t_end: period * T::count(cycles),
            event_tolerance: h * T::lit(1e-10),
            max_event_iterations: 64,
        }
    }

    pub fn validate(&self) -> Result<(), IntegrationError> {
        let bad = |msg: &str| Err(IntegrationError::InvalidConfig(msg.to_string()));
        if !(self.step_size.is_finite() && self.t_start.is_finite() && self.t_end.is_finite()) {
            return bad("step_size, t_start and t_end must be finite");
        }
        if !(self.step_size > T::zero()) {
            return bad("step_size must be > 0");
        }
        if !(self.t_end > self.t_start) {
            return bad("t_end must exceed t_start");
        }
        if !(self.event_tolerance > T::zero() && self.event_tolerance < self.step_size) {
            return bad("event_tolerance must lie in (0, step_size)");
        }
        if self.max_event_iterations < 20 {
            return bad("max_event_iterations must be >= 20");
        }
        Ok(())
    }

    /// `floor((t_end - t_start) / h) + 1`, treating ratios within 1e-9 of an
    /// integer as exact so period-aligned spans do not lose their last sample.
    pub fn sample_count(&self) -> usize {
        let ratio = ((self.t_end - self.t_start) / self.step_size).as_f64();
        let nearest = ratio.round();
        let steps = if (ratio - nearest).abs() <= 1e-9 * nearest.max(1.0) {
            nearest
        } else {
            ratio.floor()
        };
        steps as usize + 1
    }
}

/// Uniformly sampled piecewise-linear trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    pub t0: T,
    pub dt: T,
    pub states: Vec<State<T>>,
    /// Strictly increasing switching-surface crossing times.
    pub switch_times: Vec<T>,
}

impl<T: Scalar> Trajectory<T> {
    #[inline]
    pub fn time(&self, index: usize) -> T {
        self.t0 + self.dt * T::count(index)
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn t_end(&self) -> T {
        self.time(self.states.len().saturating_sub(1))
    }

    pub fn resistor_voltages(&self, params: &CircuitParams<T>) -> Vec<T> {
        self.states.iter().map(|s| params.resistance * s.current).collect()
    }
}

/// Uniformly sampled current of the exponential-diode model.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarTrajectory<T> {
    pub t0: T,
    pub dt: T,
    pub values: Vec<T>,
    /// Diode voltage at each sample. Kept alongside the current because deep
    /// reverse bias rounds the current to `-I_s`, where it no longer
    /// determines the voltage.
    pub diode_voltages: Vec<T>,
}

impl<T: Scalar> ScalarTrajectory<T> {
    #[inline]
    pub fn time(&self, index: usize) -> T {
        self.t0 + self.dt * T::count(index)
    }
}

/// A located switching event.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing<T, const N: usize> {
    pub time: T,
    pub state: [T; N],
}

#[inline]
fn axpy<T: Scalar, const N: usize>(x: &[T; N], a: T, k: &[T; N]) -> [T; N] {
    let mut out = *x;
    for (o, ki) in out.iter_mut().zip(k) {
        *o = *o + a * *ki;
    }
    out
}

fn check_finite<T: Scalar, const N: usize>(v: &[T; N], t: T) -> Result<(), IntegrationError> {
    if v.iter().all(|c| c.is_finite()) {
        Ok(())
    } else {
        Err(IntegrationError::NonFinite { t: t.as_f64() })
    }
}

/// One classical fourth-order Runge-Kutta step of size `h` from `(t, x)`.
pub fn rk4_step<T, const N: usize, F>(mut field: F, t: T, x: &[T; N], h: T) -> Result<[T; N], IntegrationError>
where
    T: Scalar,
    F: FnMut(T, &[T; N]) -> [T; N],
{
    let half = h * T::lit(0.5);
    let k1 = field(t, x);
    check_finite(&k1, t)?;
    let k2 = field(t + half, &axpy(x, half, &k1));
    check_finite(&k2, t + half)?;
    let k3 = field(t + half, &axpy(x, half, &k2));
    check_finite(&k3, t + half)?;
    let k4 = field(t + h, &axpy(x, h, &k3));
    check_finite(&k4, t + h)?;
    let sixth = h / T::lit(6.0);
    let two = T::lit(2.0);
    let mut out = *x;
    for j in 0..N {
        out[j] = out[j] + sixth * (k1[j] + two * k2[j] + two * k3[j] + k4[j]);
    }
    Ok(out)
}

/// Bisects `[0, span]` for the first offset at which `crossed` holds, starting
/// from a point where it does not. Each probe re-integrates from `x_lo` with a
/// single RK4 step. Returns the upper end of the final bracket, which is the
/// earliest probe found on the far side.
#[allow(clippy::too_many_arguments)]
fn bisect_transition<T, const N: usize, F, P>(
    mut field: F,
    crossed: P,
    t_lo: T,
    x_lo: &[T; N],
    span: T,
    x_span: [T; N],
    tol: T,
    max_iterations: usize,
) -> Result<Crossing<T, N>, IntegrationError>
where
    T: Scalar,
    F: FnMut(T, &[T; N]) -> [T; N],
    P: Fn(&[T; N]) -> bool,
{
    let mut lo = T::zero();
    let mut hi = span;
    let mut x_hi = x_span;
    let mut iterations = 0;
    while hi - lo >= tol {
        if iterations >= max_iterations {
            return Err(IntegrationError::EventFailure {
                t: (t_lo + lo).as_f64(),
                iterations,
            });
        }
        iterations += 1;
        let mid = lo + (hi - lo) * T::lit(0.5);
        if mid <= lo || mid >= hi {
            break;
        }
        let x_mid = rk4_step(&mut field, t_lo, x_lo, mid)?;
        if crossed(&x_mid) {
            hi = mid;
            x_hi = x_mid;
        } else {
            lo = mid;
        }
    }
    Ok(Crossing {
        time: t_lo + hi,
        state: x_hi,
    })
}

/// Locates where `surface` changes sign on the RK4 step `[t_lo, t_hi]` from `x_lo`.
///
/// The returned state is the first bisection probe lying on the far side of
/// the surface (or on it), and the bracket around the returned time is
/// narrower than `tol`.
pub fn locate_crossing<T, const N: usize, F, S>(
    mut field: F,
    surface: S,
    t_lo: T,
    t_hi: T,
    x_lo: [T; N],
    tol: T,
    max_iterations: usize,
) -> Result<Crossing<T, N>, IntegrationError>
where
    T: Scalar,
    F: FnMut(T, &[T; N]) -> [T; N],
    S: Fn(&[T; N]) -> T,
{
    let s_lo = surface(&x_lo);
    if s_lo == T::zero() {
        return Ok(Crossing {
            time: t_lo,
            state: x_lo,
        });
    }
    let span = t_hi - t_lo;
    let x_hi = rk4_step(&mut field, t_lo, &x_lo, span)?;
    let s_hi = surface(&x_hi);
    if s_hi != T::zero() && s_hi.signum() == s_lo.signum() {
        return Err(IntegrationError::BracketInvalid);
    }
    let sign_lo = s_lo.signum();
    bisect_transition(
        field,
        |x: &[T; N]| {
            let s = surface(x);
            s == T::zero() || s.signum() != sign_lo
        },
        t_lo,
        &x_lo,
        span,
        x_hi,
        tol,
        max_iterations,
    )
}

/// Integrates the piecewise-linear model on the grid described by `cfg`.
pub fn integrate<T: Scalar>(
    params: &CircuitParams<T>,
    x0: State<T>,
    cfg: &IntegrationConfig<T>,
) -> Result<Trajectory<T>, IntegrationError> {
    cfg.validate()?;
    if !x0.is_finite() {
        return Err(IntegrationError::InvalidConfig("initial state must be finite".into()));
    }
    let count = cfg.sample_count();
    let h = cfg.step_size;
    let mut states = Vec::with_capacity(count);
    let mut switch_times: Vec<T> = Vec::new();
    states.push(x0);
    let mut x = x0.to_array();
    let mut t = cfg.t_start;

    for n in 1..count {
        let t_next = cfg.t_start + h * T::count(n);
        let mut events = 0;
        while t < t_next {
            let region = region_of(&State::from_array(x), params);
            let field = |tt: T, y: &[T; 2]| vector_field_in_region(region, tt, &State::from_array(*y), params);
            let span = t_next - t;
            let x_end = rk4_step(field, t, &x, span).map_err(|_| IntegrationError::Diverged {
                last_good_t: t.as_f64(),
            })?;
            if region_of(&State::from_array(x_end), params) == region {
                x = x_end;
                break;
            }
            events += 1;
            if events > MAX_EVENTS_PER_STEP {
                return Err(IntegrationError::EventFailure {
                    t: t.as_f64(),
                    iterations: events,
                });
            }
            let crossing = bisect_transition(
                field,
                |y: &[T; 2]| region_of(&State::from_array(*y), params) != region,
                t,
                &x,
                span,
                x_end,
                cfg.event_tolerance,
                cfg.max_event_iterations,
            )?;
            match switch_times.last() {
                Some(&last) if crossing.time <= last => {
                    // Two flips that round to the same instant cancel out.
                    switch_times.pop();
                }
                _ => switch_times.push(crossing.time),
            }
            x = crossing.state;
            t = crossing.time;
        }
        t = t_next;
        let s = State::from_array(x);
        if !s.is_finite() {
            return Err(IntegrationError::Diverged {
                last_good_t: (t_next - h).as_f64(),
            });
        }
        states.push(s);
    }

    Ok(Trajectory {
        t0: cfg.t_start,
        dt: h,
        states,
        switch_times,
    })
}

/// Monotone solve of `g(s) = 0` where `g` is strictly increasing. Newton with
/// a bisection safeguard inside an expanding bracket.
fn solve_increasing<T: Scalar, G>(g: G, guess: T) -> Option<T>
where
    G: Fn(T) -> (T, T),
{
    let (g0, _) = g(guess);
    if !g0.is_finite() {
        return None;
    }
    if g0 == T::zero() {
        return Some(guess);
    }
    // Expand a bracket [lo, hi] with g(lo) < 0 < g(hi).
    let mut width = T::one();
    let (mut lo, mut hi);
    if g0 < T::zero() {
        lo = guess;
        hi = guess + width;
        let mut expansions = 0;
        loop {
            let (gh, _) = g(hi);
            if gh.is_finite() && gh >= T::zero() {
                break;
            }
            if !gh.is_finite() {
                // Overflowed; root lies between lo and hi.
                break;
            }
            lo = hi;
            width = width + width;
            hi = hi + width;
            expansions += 1;
            if expansions > 200 {
                return None;
            }
        }
    } else {
        hi = guess;
        lo = guess - width;
        let mut expansions = 0;
        while g(lo).0 > T::zero() {
            hi = lo;
            width = width + width;
            lo = lo - width;
            expansions += 1;
            if expansions > 200 {
                return None;
            }
        }
    }
    let mut s = if g0 < T::zero() { lo } else { hi };
    let tol = T::lit(64.0) * T::epsilon();
    for _ in 0..200 {
        let (gs, dg) = g(s);
        if !gs.is_finite() {
            s = lo + (hi - lo) * T::lit(0.5);
            continue;
        }
        if gs == T::zero() {
            return Some(s);
        }
        if gs < T::zero() {
            lo = s;
        } else {
            hi = s;
        }
        let newton = s - gs / dg;
        let next = if newton > lo && newton < hi && newton.is_finite() {
            newton
        } else {
            lo + (hi - lo) * T::lit(0.5)
        };
        if (next - s).abs() <= tol * T::one().max(s.abs()) || hi - lo <= tol * T::one().max(s.abs()) {
            return Some(next);
        }
        s = next;
    }
    None
}

/// One L-stable TR-BDF2 step for the exponential-diode model, carried in the
/// log-domain variable `u = v_D / (n V_T)` so reverse-bias currents arbitrarily
/// close to `-I_s` stay representable.
fn exp_trbdf2_step<T: Scalar>(t: T, u: T, h: T, params: &CircuitParams<T>, diode: &ExpDiodeParams<T>) -> Option<T> {
    let gamma = T::lit(2.0) - T::SQRT_2();
    let l = params.inductance;
    let r = params.resistance;
    let nvt = diode.slope_voltage();
    let is = diode.saturation_current;
    let current = |u: T| is * u.exp_m1();
    let rhs = |tt: T, u: T| (params.drive_voltage(tt) - r * current(u) - nvt * u) / l;

    // Solves i(u) - a - c f(t1, u) = 0 for u.
    let implicit = |a: T, c: T, t1: T, guess: T| {
        let drive = params.drive_voltage(t1);
        let k = T::one() + c * r / l;
        solve_increasing(
            |u: T| {
                let e = u.exp();
                let g = is * (e - T::one()) * k + c * nvt * u / l - a - c * drive / l;
                let dg = is * e * k + c * nvt / l;
                (g, dg)
            },
            guess,
        )
    };

    let i_n = current(u);
    let f_n = rhs(t, u);
    let half = T::lit(0.5);
    // Trapezoidal stage to t + gamma h.
    let c1 = gamma * h * half;
    let u_g = implicit(i_n + c1 * f_n, c1, t + gamma * h, u)?;
    let i_g = current(u_g);
    // BDF2 stage to t + h.
    let denom = gamma * (T::lit(2.0) - gamma);
    let one_m = T::one() - gamma;
    let a2 = i_g / denom - one_m * one_m / denom * i_n;
    let c2 = one_m / (T::lit(2.0) - gamma) * h;
    let u_next = implicit(a2, c2, t + h, u_g)?;
    u_next.is_finite().then_some(u_next)
}

fn exp_advance<T: Scalar>(
    t: T,
    u: T,
    h: T,
    params: &CircuitParams<T>,
    diode: &ExpDiodeParams<T>,
    depth: u32,
) -> Result<T, IntegrationError> {
    if let Some(next) = exp_trbdf2_step(t, u, h, params, diode) {
        return Ok(next);
    }
    if depth >= MAX_STEP_HALVINGS {
        return Err(IntegrationError::StepRejected {
            t: t.as_f64(),
            halvings: depth,
            reason: "implicit stage did not converge".into(),
        });
    }
    let half = h * T::lit(0.5);
    let mid = exp_advance(t, u, half, params, diode, depth + 1)?;
    exp_advance(t + half, mid, half, params, diode, depth + 1)
}

/// Integrates the one-dimensional exponential-diode model from current `i0`.
///
/// The field is smooth, so no events are needed, but it is violently stiff
/// under reverse bias (the contraction rate grows like `1 / (i + I_s)`); steps
/// use an L-stable implicit scheme and are halved up to
/// [`MAX_STEP_HALVINGS`] times if an implicit stage fails to converge.
pub fn integrate_exponential<T: Scalar>(
    params: &CircuitParams<T>,
    diode: &ExpDiodeParams<T>,
    i0: T,
    cfg: &IntegrationConfig<T>,
) -> Result<ScalarTrajectory<T>, IntegrationError> {
    cfg.validate()?;
    let mut u = diode.diode_voltage(i0)? / diode.slope_voltage();
    let count = cfg.sample_count();
    let h = cfg.step_size;
    let mut values = Vec::with_capacity(count);
    let mut diode_voltages = Vec::with_capacity(count);
    values.push(i0);
    diode_voltages.push(u * diode.slope_voltage());
    for n in 1..count {
        let t = cfg.t_start + h * T::count(n - 1);
        u = exp_advance(t, u, h, params, diode, 0)?;
        let v = u * diode.slope_voltage();
        let i = diode.diode_current(v);
        if !i.is_finite() {
            return Err(IntegrationError::Diverged {
                last_good_t: t.as_f64(),
            });
        }
        values.push(i);
        diode_voltages.push(v);
    }
    Ok(ScalarTrajectory {
        t0: cfg.t_start,
        dt: h,
        values,
        diode_voltages,
    })
}
