//! Partial-wave resummation into scattering amplitudes.
//!
//! For spin projection `s` the amplitude is
//!
//! ```text
//! f_s(phi) = (2 pi i k)^(-1/2) * sum_m (exp(2 i delta_{m,s}) - 1) exp(i m phi)
//! ```
//!
//! The series is only conditionally convergent. Beyond the cutoff every
//! channel has reached its saturated value `exp(-i pi alpha)` (m > 0) or
//! `exp(+i pi alpha)` (m < 0), so the two tails are geometric and are summed
//! in closed form (Abel summation) instead of being truncated.

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::filament::{is_integer_flux, limit_phase_shift, Channel, Prescription, RadiusSchedule, Spin};
use crate::specfun::gamma::{cos_pi, sin_pi};
use nalgebra::Matrix2;
use num_complex::Complex64;
use std::f64::consts::PI;

/// Half-width of the excluded forward cone, radians.
pub const FORWARD_CONE: f64 = 1e-3;
/// Smallest accepted partial-wave cutoff.
pub const MIN_M_MAX: u32 = 50;
/// Largest tolerated deviation of `S_{+-m_max}` from the saturated tail value.
pub const TAIL_BUDGET: f64 = 1e-10;

/// Wrap an angle into `(-pi, pi]`.
pub fn wrap_angle(phi: f64) -> f64 {
    let w = (phi + PI).rem_euclid(2.0 * PI) - PI;
    if w == -PI {
        PI
    } else {
        w
    }
}

fn check_angle(phi: f64) -> Result<f64> {
    if !phi.is_finite() {
        return Err(Error::InvalidInput(format!("angle {phi} is not finite")));
    }
    let w = wrap_angle(phi);
    if w.abs() < FORWARD_CONE {
        return Err(Error::ForwardSingularity(phi, FORWARD_CONE));
    }
    Ok(w)
}

fn check_wavenumber(k: f64) -> Result<()> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::InvalidInput(format!("wavenumber {k} must be positive and finite")));
    }
    Ok(())
}

/// Uniform grid of scattering angles, endpoints included.
///
/// Angles are in radians, measured from the forward direction, inside
/// `(-pi, pi]` and outside the forward cone.
pub fn angle_grid(count: usize, min: f64, max: f64) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(Error::EmptyGrid("angle count must be positive".into()));
    }
    if !min.is_finite() || !max.is_finite() {
        return Err(Error::InvalidInput("grid bounds must be finite".into()));
    }
    if min <= -PI || max > PI {
        return Err(Error::InvalidInput(format!("grid [{min}, {max}] must lie inside (-pi, pi]")));
    }
    if count > 1 && !(max > min) {
        return Err(Error::InvalidInput(format!("grid max {max} must exceed min {min}")));
    }
    let grid: Vec<f64> = if count == 1 {
        vec![min]
    } else {
        let step = (max - min) / (count - 1) as f64;
        (0..count).map(|i| if i + 1 == count { max } else { min + step * i as f64 }).collect()
    };
    if let Some(&bad) = grid.iter().find(|p| p.abs() < FORWARD_CONE) {
        return Err(Error::ForwardSingularity(bad, FORWARD_CONE));
    }
    Ok(grid)
}

/// `R -> 0` phase shift and S-matrix element of one channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseShiftEntry {
    pub phase_shift: f64,
    pub s_matrix: Complex64,
    pub singular_survives: bool,
    pub critical: bool,
}

/// Phase shifts of every channel `|m| <= m_max`, both spin projections.
///
/// Immutable once built; shareable across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseShiftTable {
    alpha: f64,
    prescription: Prescription,
    m_max: u32,
    up: Vec<PhaseShiftEntry>,
    down: Vec<PhaseShiftEntry>,
}

impl PhaseShiftTable {
    /// Solve every channel with the filament matching and extrapolate.
    pub fn build(
        alpha: f64,
        prescription: Prescription,
        m_max: u32,
        schedule: &RadiusSchedule,
        exec: Execution,
    ) -> Result<Self> {
        if !alpha.is_finite() {
            return Err(Error::InvalidInput(format!("flux {alpha} is not finite")));
        }
        if m_max < MIN_M_MAX {
            return Err(Error::InsufficientCutoff(format!("m_max = {m_max} is below {MIN_M_MAX}")));
        }
        if (m_max as f64) < alpha.abs() + 1.0 {
            return Err(Error::InsufficientCutoff(format!(
                "m_max = {m_max} does not reach the saturated tail for alpha = {alpha}"
            )));
        }
        let m_max_i = m_max as i32;
        let channels: Vec<Channel> = Spin::BOTH
            .iter()
            .flat_map(|&s| (-m_max_i..=m_max_i).map(move |m| Channel::new(m, s)))
            .collect();
        let solved = exec.try_map(&channels, |&ch| limit_phase_shift(alpha, schedule, ch, 1.0, prescription))?;

        let mut entries: Vec<PhaseShiftEntry> = solved
            .iter()
            .map(|l| PhaseShiftEntry {
                phase_shift: l.phase_shift,
                s_matrix: l.s_matrix,
                singular_survives: l.singular_survives,
                critical: l.is_critical(),
            })
            .collect();
        let critical: Vec<Channel> = solved.iter().filter(|l| l.is_critical()).map(|l| l.channel).collect();
        if critical.len() > 1 {
            return Err(Error::Consistency(format!(
                "more than one critical channel for alpha = {alpha}: {critical:?}"
            )));
        }
        let down = entries.split_off(channels.len() / 2);
        Ok(Self {
            alpha,
            prescription,
            m_max,
            up: entries,
            down,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn prescription(&self) -> Prescription {
        self.prescription
    }

    pub fn m_max(&self) -> u32 {
        self.m_max
    }

    fn half(&self, spin: Spin) -> &[PhaseShiftEntry] {
        match spin {
            Spin::Up => &self.up,
            Spin::Down => &self.down,
        }
    }

    pub fn get(&self, ch: Channel) -> Option<&PhaseShiftEntry> {
        let idx = ch.m.checked_add(self.m_max as i32)?;
        usize::try_from(idx).ok().and_then(|i| self.half(ch.spin).get(i))
    }

    /// Rows in deterministic order: `m` ascending, spin up first.
    pub fn rows(&self) -> impl Iterator<Item = (Channel, &PhaseShiftEntry)> {
        let m_max = self.m_max as i32;
        (-m_max..=m_max).flat_map(move |m| {
            Spin::BOTH
                .into_iter()
                .map(move |s| (Channel::new(m, s), self.get(Channel::new(m, s)).expect("m within table")))
        })
    }

    pub fn critical_channel(&self) -> Option<Channel> {
        self.rows().find(|(_, e)| e.critical).map(|(ch, _)| ch)
    }
}

/// Saturated tail S-matrix elements `(S_{m > m_max}, S_{m < -m_max})`.
fn tail_s_matrix(alpha: f64) -> (Complex64, Complex64) {
    let (c, s) = (cos_pi(alpha), sin_pi(alpha));
    (Complex64::new(c, -s), Complex64::new(c, s))
}

fn prefactor(k: f64) -> Complex64 {
    // (2 pi i k)^(-1/2) = exp(-i pi/4) / sqrt(2 pi k)
    Complex64::from_polar(1.0 / (2.0 * PI * k).sqrt(), -0.25 * PI)
}

/// Scattering amplitude for spin projection `spin` at angle `phi`.
pub fn scattering_amplitude(table: &PhaseShiftTable, spin: Spin, phi: f64, k: f64) -> Result<Complex64> {
    let phi = check_angle(phi)?;
    check_wavenumber(k)?;
    if is_integer_flux(table.alpha) {
        // pure gauge: all scattering is confined to the forward direction
        return Ok(Complex64::new(0.0, 0.0));
    }
    let (tail_plus, tail_minus) = tail_s_matrix(table.alpha);
    let half = table.half(spin);
    let edge_error = (half[half.len() - 1].s_matrix - tail_plus)
        .norm()
        .max((half[0].s_matrix - tail_minus).norm());
    if edge_error > TAIL_BUDGET {
        return Err(Error::InsufficientCutoff(format!(
            "channels at |m| = {} deviate from the saturated tail by {edge_error:.3e}",
            table.m_max
        )));
    }

    let m_max = table.m_max as i32;
    let one = Complex64::new(1.0, 0.0);
    let mut head = Complex64::new(0.0, 0.0);
    for (entry, m) in half.iter().zip(-m_max..=m_max) {
        head += (entry.s_matrix - one) * Complex64::from_polar(1.0, m as f64 * phi);
    }

    let z = Complex64::from_polar(1.0, phi);
    let z_edge = Complex64::from_polar(1.0, (m_max + 1) as f64 * phi);
    let tail = (tail_plus - one) * z_edge / (one - z) + (tail_minus - one) * z_edge.conj() / (one - z.conj());

    let f = prefactor(k) * (head + tail);
    if !f.re.is_finite() || !f.im.is_finite() {
        return Err(Error::NonFiniteAmplitude);
    }
    Ok(f)
}

/// Unpolarized Aharonov-Bohm cross section
/// `sin^2(pi alpha) / (2 pi k sin^2(phi/2))`.
pub fn ab_cross_section_closed_form(alpha: f64, k: f64, phi: f64) -> Result<f64> {
    if !alpha.is_finite() {
        return Err(Error::InvalidInput(format!("flux {alpha} is not finite")));
    }
    let phi = check_angle(phi)?;
    check_wavenumber(k)?;
    let s = sin_pi(alpha);
    let h = (0.5 * phi).sin();
    Ok(s * s / (2.0 * PI * k * h * h))
}

/// Diagonal spin amplitude matrix `diag(f_plus, f_minus)` in the basis of
/// spin projections on the flux axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinAmplitude {
    pub f_plus: Complex64,
    pub f_minus: Complex64,
    pub phi: f64,
    pub k: f64,
}

impl SpinAmplitude {
    pub fn matrix(&self) -> Matrix2<Complex64> {
        let zero = Complex64::new(0.0, 0.0);
        Matrix2::new(self.f_plus, zero, zero, self.f_minus)
    }

    /// `(|f_+|^2 + |f_-|^2) / 2`.
    pub fn unpolarized_cross_section(&self) -> f64 {
        0.5 * (self.f_plus.norm_sqr() + self.f_minus.norm_sqr())
    }
}

pub fn spin_amplitude(table: &PhaseShiftTable, phi: f64, k: f64) -> Result<SpinAmplitude> {
    Ok(SpinAmplitude {
        f_plus: scattering_amplitude(table, Spin::Up, phi, k)?,
        f_minus: scattering_amplitude(table, Spin::Down, phi, k)?,
        phi,
        k,
    })
}

/// Build the phase-shift table with the default radius schedule and
/// evaluate both amplitudes at one angle.
pub fn spin_amplitude_matrix(
    alpha: f64,
    k: f64,
    phi: f64,
    prescription: Prescription,
    m_max: u32,
) -> Result<SpinAmplitude> {
    check_angle(phi)?;
    check_wavenumber(k)?;
    let table = PhaseShiftTable::build(alpha, prescription, m_max, &RadiusSchedule::default(), Execution::default())?;
    spin_amplitude(&table, phi, k)
}

/// Amplitudes over an angle grid, in grid order.
pub fn spin_amplitude_curve(
    table: &PhaseShiftTable,
    angles: &[f64],
    k: f64,
    exec: Execution,
) -> Result<Vec<SpinAmplitude>> {
    exec.try_map(angles, |&phi| spin_amplitude(table, phi, k))
}

/// Minimum grid size accepted by [`spin_dependence_metric`].
pub const MIN_METRIC_GRID: usize = 32;

/// `max |f_+ - f_-| / (|f_+| + |f_-| + 1e-300)` over the grid.
pub fn spin_dependence_metric(amplitudes: &[SpinAmplitude]) -> Result<f64> {
    if amplitudes.is_empty() {
        return Err(Error::EmptyGrid("no amplitudes".into()));
    }
    if amplitudes.len() < MIN_METRIC_GRID {
        return Err(Error::EmptyGrid(format!(
            "{} angles, need at least {MIN_METRIC_GRID}",
            amplitudes.len()
        )));
    }
    let mut worst = 0.0_f64;
    for a in amplitudes {
        check_angle(a.phi)?;
        let d = (a.f_plus - a.f_minus).norm() / (a.f_plus.norm() + a.f_minus.norm() + 1e-300);
        worst = worst.max(d);
    }
    Ok(worst)
}
