//! Polarized differential cross section.
//!
//! Two angle conventions meet here. Amplitudes and the unpolarized cross
//! section use the scattering angle `phi`, zero in the forward direction.
//! The polarization bracket is written for a beam incident from the right
//! (travelling along `-x`), with its angle the lab azimuth of the outgoing
//! beam; that azimuth is `phi + pi`. [`bracket`] and [`corotated_detector`]
//! take the lab azimuth, [`polarized_cross_section`] takes the scattering angle
//! and converts.

use crate::amplitude::{ab_cross_section_closed_form, spin_amplitude, wrap_angle, PhaseShiftTable, SpinAmplitude};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::filament::Prescription;
use nalgebra::{Matrix2, Rotation3, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub const UNIT_TOL: f64 = 1e-12;

/// Sign connecting the solver's scattering angle to the bracket: the spin
/// amplitudes at `ANGLE_SIGN * phi` reproduce the bracket at `phi`.
/// The solver's spin precesses opposite to the orientation assumed by the
/// bracket.
pub const ANGLE_SIGN: f64 = -1.0;

pub fn z_hat() -> Vector3<f64> {
    Vector3::z()
}

fn check_unit(v: &Vector3<f64>) -> Result<()> {
    let norm = v.norm();
    if !norm.is_finite() || (norm - 1.0).abs() > UNIT_TOL {
        return Err(Error::NonUnitVector(norm));
    }
    Ok(())
}

/// Normalize a vector given by its components; rejects zero and non-finite input.
pub fn unit_vector(x: f64, y: f64, z: f64) -> Result<Vector3<f64>> {
    let v = Vector3::new(x, y, z);
    let norm = v.norm();
    if !norm.is_finite() || norm == 0.0 {
        return Err(Error::NonUnitVector(norm));
    }
    Ok(v / norm)
}

/// Incident polarization `n` and detector acceptance `n_prime`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSetup", into = "RawSetup")]
pub struct PolarizationSetup {
    n: Vector3<f64>,
    n_prime: Vector3<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawSetup {
    n: [f64; 3],
    n_prime: [f64; 3],
}

impl TryFrom<RawSetup> for PolarizationSetup {
    type Error = Error;
    fn try_from(raw: RawSetup) -> Result<Self> {
        Self::new(Vector3::from(raw.n), Vector3::from(raw.n_prime))
    }
}

impl From<PolarizationSetup> for RawSetup {
    fn from(s: PolarizationSetup) -> Self {
        RawSetup {
            n: s.n.into(),
            n_prime: s.n_prime.into(),
        }
    }
}

impl PolarizationSetup {
    pub fn new(n: Vector3<f64>, n_prime: Vector3<f64>) -> Result<Self> {
        check_unit(&n)?;
        check_unit(&n_prime)?;
        Ok(Self { n, n_prime })
    }

    pub fn n(&self) -> Vector3<f64> {
        self.n
    }

    pub fn n_prime(&self) -> Vector3<f64> {
        self.n_prime
    }
}

/// `1/2 [1 + (n.z)(n'.z) - (n x z).(n' x z) cos(phi) - z.(n x n') sin(phi)]`
/// with `phi` the lab azimuth of the outgoing beam.
pub fn bracket(setup: &PolarizationSetup, phi: f64) -> f64 {
    let z = z_hat();
    let (n, np) = (setup.n, setup.n_prime);
    0.5 * (1.0 + n.dot(&z) * np.dot(&z) - n.cross(&z).dot(&np.cross(&z)) * phi.cos() - z.dot(&n.cross(&np)) * phi.sin())
}

/// Same quantity through the polar angles of `n` and `n'` about `z`.
pub fn bracket_spherical(setup: &PolarizationSetup, phi: f64) -> f64 {
    let (t, p) = polar_angles(&setup.n);
    let (tp, pp) = polar_angles(&setup.n_prime);
    0.5 * (1.0 + t.cos() * tp.cos() - t.sin() * tp.sin() * (pp - p - phi).cos())
}

fn polar_angles(v: &Vector3<f64>) -> (f64, f64) {
    (v.z.clamp(-1.0, 1.0).acos(), v.y.atan2(v.x))
}

/// Lab azimuth of the outgoing beam for scattering angle `phi`.
pub fn lab_azimuth(phi: f64) -> f64 {
    wrap_angle(phi + PI)
}

/// Detector vector oriented relative to the outgoing beam (lab azimuth
/// `phi`) as `n` is oriented relative to the incident beam.
pub fn corotated_detector(n: &Vector3<f64>, phi: f64) -> Result<Vector3<f64>> {
    check_unit(n)?;
    Ok(Rotation3::from_axis_angle(&Vector3::z_axis(), phi + PI) * n)
}

/// Unpolarized AB cross section times the bracket at the lab azimuth of
/// scattering angle `phi`.
pub fn polarized_cross_section(setup: &PolarizationSetup, phi: f64, alpha: f64, k: f64) -> Result<f64> {
    let ab = ab_cross_section_closed_form(alpha, k, phi)?;
    Ok(ab * bracket(setup, lab_azimuth(phi)))
}

fn pauli() -> [Matrix2<Complex64>; 3] {
    let o = Complex64::new(0.0, 0.0);
    let r = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    [Matrix2::new(o, r, r, o), Matrix2::new(o, -i, i, o), Matrix2::new(r, o, o, -r)]
}

/// `(I + v.sigma) / 2`.
fn projector(v: &Vector3<f64>) -> Matrix2<Complex64> {
    let s = pauli();
    let mut m = Matrix2::identity();
    for (c, si) in v.iter().zip(s.iter()) {
        m += si * Complex64::new(*c, 0.0);
    }
    m * Complex64::new(0.5, 0.0)
}

fn scattered_density(n: &Vector3<f64>, amp: &SpinAmplitude) -> Result<Matrix2<Complex64>> {
    let f = amp.matrix();
    if f.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFiniteAmplitude);
    }
    Ok(f * projector(n) * f.adjoint())
}

/// `Tr[Pi(n') F rho(n) F^dagger]`.
pub fn cross_section_oracle(setup: &PolarizationSetup, amp: &SpinAmplitude) -> Result<f64> {
    let out = scattered_density(&setup.n, amp)?;
    Ok((projector(&setup.n_prime) * out).trace().re)
}

/// `Tr[F rho(n) F^dagger]`: intensity seen by a detector accepting both spin states.
pub fn unpolarized_detector_intensity(n: &Vector3<f64>, amp: &SpinAmplitude) -> Result<f64> {
    check_unit(n)?;
    Ok(scattered_density(n, amp)?.trace().re)
}

/// Bloch vector of the scattered beam.
pub fn scattered_polarization(n: &Vector3<f64>, amp: &SpinAmplitude) -> Result<Vector3<f64>> {
    check_unit(n)?;
    let out = scattered_density(n, amp)?;
    let intensity = out.trace().re;
    if !(intensity > 0.0) {
        return Err(Error::ZeroIntensity);
    }
    let s = pauli();
    Ok(Vector3::new(
        (s[0] * out).trace().re,
        (s[1] * out).trace().re,
        (s[2] * out).trace().re,
    ) / intensity)
}

/// Oracle cross section from the solver, with the calibrated angle sign.
pub fn cross_section_from_solver(setup: &PolarizationSetup, table: &PhaseShiftTable, phi: f64, k: f64) -> Result<f64> {
    let amp = spin_amplitude(table, ANGLE_SIGN * phi, k)?;
    cross_section_oracle(setup, &amp)
}

/// One row of a cross-section curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossSectionPoint {
    pub phi: f64,
    pub polarized: f64,
    pub oracle: f64,
    pub ab: f64,
    pub bracket: f64,
}

/// Polarized cross section over an angle grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossSectionCurve {
    pub alpha: f64,
    pub k: f64,
    pub prescription: Prescription,
    pub setup: PolarizationSetup,
    pub points: Vec<CrossSectionPoint>,
}

impl CrossSectionCurve {
    pub fn compute(
        setup: PolarizationSetup,
        table: &PhaseShiftTable,
        angles: &[f64],
        k: f64,
        exec: Execution,
    ) -> Result<Self> {
        if angles.is_empty() {
            return Err(Error::EmptyGrid("no angles".into()));
        }
        if angles.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput("angles must be strictly increasing".into()));
        }
        let alpha = table.alpha();
        let points = exec.try_map(angles, |&phi| {
            let ab = ab_cross_section_closed_form(alpha, k, phi)?;
            let b = bracket(&setup, lab_azimuth(phi));
            Ok(CrossSectionPoint {
                phi,
                polarized: ab * b,
                // the trace is nonnegative; clip rounding below zero
                oracle: cross_section_from_solver(&setup, table, phi, k)?.max(0.0),
                ab,
                bracket: b,
            })
        })?;
        Ok(Self {
            alpha,
            k,
            prescription: table.prescription(),
            setup,
            points,
        })
    }
}
