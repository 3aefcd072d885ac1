//! Radial matching for a flux tube of radius `R` whose entire magnetic
//! field sits on its surface.
//!
//! Inside the tube the particle is free (no field, no vector potential), so
//! the radial function is `J_|m|(kr)`. Outside it carries the full flux and
//! the centrifugal order becomes `nu = |m + alpha|`, with the general
//! solution `a J_nu(kr) + b J_{-nu}(kr)`. The spin-field coupling is a
//! delta shell at `r = R`: `u` is continuous and `u'` jumps by
//! `(gamma / R) u(R)` with `gamma = -s alpha`.
//!
//! With the interior normalized to `u(R) = 1` the matching conditions
//! become the well-scaled 2x2 system
//!
//! ```text
//! [ 1      1     ] [a J_nu(kR)   ]   [ 1                ]
//! [ L_nu   L_-nu ] [b J_-nu(kR)  ] = [ L_|m| + gamma     ]
//! ```
//!
//! where `L_mu = x J'_mu(x) / J_mu(x)` is a log-derivative. Everything is
//! carried in logarithms, so the coefficient ratio `b/a ~ (kR)^(2 nu)` is
//! available for any order without under- or overflow.
//!
//! All lengths enter only through `x = kR`.

use crate::error::{Error, Result};
use crate::extrapolate::richardson_to_zero;
use crate::specfun::gamma::{cos_pi, sin_pi};
use crate::specfun::{bessel_j_scaled, BesselOrder, ScaledBessel, SCALED_MAX_X};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;
use std::fmt;

/// Distance from an integer below which `m + alpha` counts as integral.
pub const DEGENERACY_TOL: f64 = 1e-9;
/// Largest acceptable condition number of the matching system.
pub const MAX_CONDITION: f64 = 1e12;
/// Extrapolation requires at least this many radii.
pub const MIN_SCHEDULE_LEN: usize = 4;
/// The smallest `kR` of a schedule must reach this value.
pub const MAX_SMALLEST_KR: f64 = 1e-6;

/// The magnetized filament: flux `alpha = Phi / Phi_0` on a shell of radius `R`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluxTube {
    alpha: f64,
    radius: f64,
}

impl FluxTube {
    pub fn new(alpha: f64, radius: f64) -> Result<Self> {
        if !alpha.is_finite() {
            return Err(Error::InvalidInput(format!("flux {alpha} is not finite")));
        }
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidInput(format!("radius {radius} must be positive and finite")));
        }
        Ok(Self { alpha, radius })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }
}

/// Spin projection on the flux axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Spin {
    #[serde(rename = "+1")]
    Up,
    #[serde(rename = "-1")]
    Down,
}

impl Spin {
    pub const BOTH: [Spin; 2] = [Spin::Up, Spin::Down];

    pub fn sign(self) -> f64 {
        match self {
            Spin::Up => 1.0,
            Spin::Down => -1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Spin::Up => Spin::Down,
            Spin::Down => Spin::Up,
        }
    }
}

impl fmt::Display for Spin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Spin::Up => "+1",
            Spin::Down => "-1",
        })
    }
}

/// One partial wave. Orders by `m` first, then spin up before spin down.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Channel {
    pub m: i32,
    pub spin: Spin,
}

impl Channel {
    pub fn new(m: i32, spin: Spin) -> Self {
        Self { m, spin }
    }

    /// Exterior centrifugal order `|m + alpha|`.
    pub fn exterior_order(&self, alpha: f64) -> f64 {
        (self.m as f64 + alpha).abs()
    }

    /// `(pi/2)(|m| - |m + alpha|)`: the phase shift carried by the regular
    /// exterior solution alone.
    pub fn regular_phase_shift(&self, alpha: f64) -> f64 {
        FRAC_PI_2 * (self.m.unsigned_abs() as f64 - self.exterior_order(alpha))
    }

    /// `(pi/2)(|m| + |m + alpha|)`: the phase shift of a pure singular exterior.
    pub fn singular_phase_shift(&self, alpha: f64) -> f64 {
        FRAC_PI_2 * (self.m.unsigned_abs() as f64 + self.exterior_order(alpha))
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(m={}, s={})", self.m, self.spin)
    }
}

/// Boundary condition imposed on the zero-radius limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Prescription {
    /// Wave functions must be regular at the origin: the `J_{-nu}` component
    /// is discarded in every channel.
    #[serde(rename = "regular")]
    RegularOnly,
    /// Singular but normalizable solutions are admitted; the finite-radius
    /// matching decides which channel keeps one.
    #[serde(rename = "singular")]
    SingularAllowed,
}

impl fmt::Display for Prescription {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Prescription::RegularOnly => "regular",
            Prescription::SingularAllowed => "singular",
        })
    }
}

/// Integer flux, including zero.
pub fn is_integer_flux(alpha: f64) -> bool {
    (alpha - alpha.round()).abs() < DEGENERACY_TOL
}

/// Coefficient `gamma` of the shell derivative jump
/// `u'(R+) - u'(R-) = (gamma / R) u(R)`. Negative means attractive.
pub fn shell_jump_coefficient(tube: &FluxTube, ch: Channel) -> f64 {
    // -0.0 would leak into output for alpha = 0
    if tube.alpha == 0.0 {
        return 0.0;
    }
    -ch.spin.sign() * tube.alpha
}

/// Outcome of the shell matching at one radius.
///
/// Coefficients are normalized to a unit interior amplitude,
/// `u(r) = J_|m|(kr)` for `r < R`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchResult {
    pub channel: Channel,
    pub nu: f64,
    pub coeff_regular: f64,
    pub coeff_singular: f64,
    /// `ln |coeff_singular / coeff_regular|`; finite even when the
    /// coefficients themselves under- or overflow. `-inf` for a free wave.
    pub log_singular_ratio: f64,
    pub phase_shift: f64,
    pub s_matrix: Complex64,
    pub condition_number: f64,
}

impl MatchResult {
    fn free(channel: Channel) -> Self {
        Self {
            channel,
            nu: channel.m.unsigned_abs() as f64,
            coeff_regular: 1.0,
            coeff_singular: 0.0,
            log_singular_ratio: f64::NEG_INFINITY,
            phase_shift: 0.0,
            s_matrix: Complex64::new(1.0, 0.0),
            condition_number: 1.0,
        }
    }
}

fn scaled(nu: f64, x: f64) -> Result<ScaledBessel> {
    bessel_j_scaled(BesselOrder::new(nu)?, x)
}

/// 2-norm condition number of `[[1, 1], [p, q]]`.
fn condition_2x2(p: f64, q: f64) -> f64 {
    let det = (q - p).abs();
    if det == 0.0 {
        return f64::INFINITY;
    }
    let frob2 = 2.0 + p * p + q * q;
    let disc = (frob2 * frob2 - 4.0 * det * det).max(0.0).sqrt();
    let sigma_max2 = 0.5 * (frob2 + disc);
    sigma_max2 / det
}

/// Solve the shell matching for one channel at wavenumber `k`.
pub fn match_at_shell(tube: &FluxTube, ch: Channel, k: f64) -> Result<MatchResult> {
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::InvalidInput(format!("wavenumber {k} must be positive and finite")));
    }
    let x = k * tube.radius;
    if !(x < SCALED_MAX_X) {
        return Err(Error::InvalidInput(format!("kR = {x} must be below {SCALED_MAX_X}")));
    }
    if tube.alpha == 0.0 {
        return Ok(MatchResult::free(ch));
    }
    let signed_order = ch.m as f64 + tube.alpha;
    if (signed_order - signed_order.round()).abs() < DEGENERACY_TOL {
        return Err(Error::DegenerateOrder(signed_order));
    }

    let nu = signed_order.abs();
    let m_abs = ch.m.unsigned_abs() as f64;
    let gamma = shell_jump_coefficient(tube, ch);

    let interior = scaled(m_abs, x)?;
    let regular = scaled(nu, x)?;
    let singular = scaled(-nu, x)?;

    let l_reg = nu + regular.log_deriv_excess;
    let l_sing = -nu + singular.log_deriv_excess;
    let condition_number = condition_2x2(l_reg, l_sing);
    if condition_number > MAX_CONDITION {
        return Err(Error::MatchingSingular(condition_number));
    }

    // O(1) parts first, O(x^2) excesses second: the leading parts cancel
    // exactly in the channels where one solution is suppressed.
    let det = (-2.0 * nu) + (singular.log_deriv_excess - regular.log_deriv_excess);
    let a_scaled = ((-nu - m_abs - gamma) + (singular.log_deriv_excess - interior.log_deriv_excess)) / det;
    let b_scaled = ((m_abs + gamma - nu) + (interior.log_deriv_excess - regular.log_deriv_excess)) / det;

    // a = a_scaled u(R) / J_nu(x), b = b_scaled u(R) / J_-nu(x), with u(R) = J_|m|(x)
    let ln_a = a_scaled.abs().ln() + interior.ln_abs - regular.ln_abs;
    let ln_b = b_scaled.abs().ln() + interior.ln_abs - singular.ln_abs;
    let sign_a = a_scaled.signum() * interior.sign * regular.sign;
    let sign_b = b_scaled.signum() * interior.sign * singular.sign;
    if a_scaled == 0.0 && b_scaled == 0.0 {
        return Err(Error::MatchingSingular(f64::INFINITY));
    }

    let top = ln_a.max(ln_b);
    let mut ca = if a_scaled == 0.0 { 0.0 } else { sign_a * (ln_a - top).exp() };
    let mut cb = if b_scaled == 0.0 { 0.0 } else { sign_b * (ln_b - top).exp() };
    // overall sign of the wave function is free; fix the regular part >= 0
    if ca < 0.0 || (ca == 0.0 && cb < 0.0) {
        ca = -ca;
        cb = -cb;
    }
    // u ~ cos(kr - pi/4 - nu pi/2 + eta) with eta = arg(a + b e^{i nu pi})
    let eta = (cb * sin_pi(nu)).atan2(ca + cb * cos_pi(nu));
    let phase_shift = FRAC_PI_2 * (m_abs - nu) + eta;

    Ok(MatchResult {
        channel: ch,
        nu,
        coeff_regular: if a_scaled == 0.0 { 0.0 } else { sign_a * ln_a.exp() },
        coeff_singular: if b_scaled == 0.0 { 0.0 } else { sign_b * ln_b.exp() },
        log_singular_ratio: if b_scaled == 0.0 {
            f64::NEG_INFINITY
        } else if a_scaled == 0.0 {
            f64::INFINITY
        } else {
            ln_b - ln_a
        },
        phase_shift,
        s_matrix: Complex64::from_polar(1.0, 2.0 * phase_shift),
        condition_number,
    })
}

/// Decreasing sequence of dimensionless shell radii `kR` used to take the
/// `R -> 0` limit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct RadiusSchedule(Vec<f64>);

impl RadiusSchedule {
    pub fn new(kr: Vec<f64>) -> Result<Self> {
        if kr.len() < MIN_SCHEDULE_LEN {
            return Err(Error::InvalidInput(format!(
                "radius schedule needs at least {MIN_SCHEDULE_LEN} points, got {}",
                kr.len()
            )));
        }
        if kr.iter().any(|&v| !(v > 0.0 && v < SCALED_MAX_X)) {
            return Err(Error::InvalidInput("every kR must lie in (0, 1)".into()));
        }
        if kr.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(Error::InvalidInput("radius schedule must be strictly decreasing".into()));
        }
        let smallest = *kr.last().unwrap();
        if smallest > MAX_SMALLEST_KR {
            return Err(Error::InvalidInput(format!(
                "smallest kR {smallest} must not exceed {MAX_SMALLEST_KR}"
            )));
        }
        Ok(Self(kr))
    }

    pub fn kr(&self) -> &[f64] {
        &self.0
    }
}

impl Default for RadiusSchedule {
    fn default() -> Self {
        Self(vec![1e-3, 1e-4, 1e-5, 1e-6])
    }
}

impl TryFrom<Vec<f64>> for RadiusSchedule {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<RadiusSchedule> for Vec<f64> {
    fn from(s: RadiusSchedule) -> Self {
        s.0
    }
}

/// `R -> 0` phase shift of one channel.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitPhaseShift {
    pub channel: Channel,
    pub prescription: Prescription,
    pub phase_shift: f64,
    pub s_matrix: Complex64,
    /// The singular exterior component grows relative to the regular one
    /// as the radius shrinks.
    pub singular_survives: bool,
    /// Extrapolated power law `p` of `|b/a| ~ C (kR)^p`.
    pub ratio_exponent: f64,
    /// `ln C` of the same power law.
    pub ratio_ln_prefactor: f64,
    /// Residuals of the exponent extrapolation.
    pub residuals: Vec<f64>,
}

impl LimitPhaseShift {
    /// Channel whose singular component survives under `SingularAllowed`.
    pub fn is_critical(&self) -> bool {
        self.prescription == Prescription::SingularAllowed && self.singular_survives
    }
}

/// Power law `|b/a| = C (kR)^p (1 + O((kR)^2))` of the exterior
/// coefficient ratio over a radius schedule.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioLaw {
    pub exponent: f64,
    pub ln_prefactor: f64,
    pub residuals: Vec<f64>,
}

/// Fit the ratio power law by Richardson extrapolation in `(kR)^2`: first
/// the local log-slopes to the exponent, then `ln|b/a| - p ln(kR)` to
/// `ln C`. `None` when the singular coefficient vanishes identically.
pub fn ratio_law(results: &[MatchResult], kr: &[f64]) -> Result<Option<RatioLaw>> {
    if results.iter().any(|r| !r.log_singular_ratio.is_finite()) {
        if results.iter().all(|r| r.log_singular_ratio == f64::NEG_INFINITY) {
            return Ok(None);
        }
        return Err(Error::NonConvergence(results.iter().map(|r| r.log_singular_ratio).collect()));
    }
    let ln_x: Vec<f64> = kr.iter().map(|x| x.ln()).collect();
    let mut t = Vec::with_capacity(kr.len() - 1);
    let mut slopes = Vec::with_capacity(kr.len() - 1);
    for i in 0..kr.len() - 1 {
        let dl = ln_x[i] - ln_x[i + 1];
        // a c x^2 correction to ln|b/a| shifts the chord slope by c t
        t.push((kr[i] * kr[i] - kr[i + 1] * kr[i + 1]) / dl);
        slopes.push((results[i].log_singular_ratio - results[i + 1].log_singular_ratio) / dl);
    }
    let exponent = richardson_to_zero(&t, &slopes)?;
    let p = exponent.value;
    let uncertainty = exponent.residuals.last().copied().unwrap_or(0.0);
    if p == 0.0 || p.abs() <= 10.0 * uncertainty {
        return Err(Error::NonConvergence(exponent.residuals));
    }
    let x2: Vec<f64> = kr.iter().map(|x| x * x).collect();
    let offsets: Vec<f64> = results.iter().zip(&ln_x).map(|(r, l)| r.log_singular_ratio - p * l).collect();
    let prefactor = richardson_to_zero(&x2, &offsets)?;
    Ok(Some(RatioLaw {
        exponent: p,
        ln_prefactor: prefactor.value,
        residuals: exponent.residuals,
    }))
}

fn match_schedule(alpha: f64, schedule: &RadiusSchedule, ch: Channel, k: f64) -> Result<Vec<MatchResult>> {
    schedule
        .kr()
        .iter()
        .map(|&kr| match_at_shell(&FluxTube::new(alpha, kr / k)?, ch, k))
        .collect()
}

/// `R -> 0` phase shift from the extrapolated exterior decomposition.
///
/// Under `RegularOnly` the singular component is dropped at every radius,
/// leaving `(pi/2)(|m| - |m + alpha|)`. Under `SingularAllowed` the
/// coefficient ratio is fitted to `|b/a| = C (kR)^p` ([`ratio_law`]); the
/// subdominant coefficient vanishes in the limit and the phase shift is read
/// off the surviving one: regular for `p > 0`, singular for `p < 0`.
pub fn limit_phase_shift(
    alpha: f64,
    schedule: &RadiusSchedule,
    ch: Channel,
    k: f64,
    prescription: Prescription,
) -> Result<LimitPhaseShift> {
    if !alpha.is_finite() {
        return Err(Error::InvalidInput(format!("flux {alpha} is not finite")));
    }
    if !(k > 0.0) || !k.is_finite() {
        return Err(Error::InvalidInput(format!("wavenumber {k} must be positive and finite")));
    }
    if is_integer_flux(alpha) {
        // integer flux is a pure gauge in the limit; no singular machinery
        let phase_shift = ch.regular_phase_shift(alpha.round());
        return Ok(LimitPhaseShift {
            channel: ch,
            prescription,
            phase_shift,
            s_matrix: Complex64::from_polar(1.0, 2.0 * phase_shift),
            singular_survives: false,
            ratio_exponent: f64::INFINITY,
            ratio_ln_prefactor: f64::NEG_INFINITY,
            residuals: Vec::new(),
        });
    }

    let results = match_schedule(alpha, schedule, ch, k)?;
    let law = ratio_law(&results, schedule.kr())?;
    let (ratio_exponent, ratio_ln_prefactor, residuals) = match law {
        Some(l) => (l.exponent, l.ln_prefactor, l.residuals),
        None => (f64::INFINITY, f64::NEG_INFINITY, Vec::new()),
    };
    let singular_survives = ratio_exponent < 0.0;

    let phase_shift = match prescription {
        Prescription::RegularOnly => ch.regular_phase_shift(alpha),
        Prescription::SingularAllowed => {
            // limiting exterior (a, b), dominant coefficient taken positive
            let (ca, cb) = if singular_survives { (0.0, 1.0) } else { (1.0, 0.0) };
            let nu = ch.exterior_order(alpha);
            let eta = (cb * sin_pi(nu)).atan2(ca + cb * cos_pi(nu));
            FRAC_PI_2 * (ch.m.unsigned_abs() as f64 - nu) + eta
        }
    };

    Ok(LimitPhaseShift {
        channel: ch,
        prescription,
        phase_shift,
        s_matrix: Complex64::from_polar(1.0, 2.0 * phase_shift),
        singular_survives,
        ratio_exponent,
        ratio_ln_prefactor,
        residuals,
    })
}

/// The unique channel of spin `spin` whose singular exterior solution
/// survives the `R -> 0` limit: attractive shell coupling, normalizable
/// (`|m + alpha| < 1`) and a growing singular fraction. `None` for the
/// repulsive spin orientation and for integer flux.
pub fn critical_channel(alpha: f64, spin: Spin) -> Result<Option<Channel>> {
    critical_channel_with(alpha, spin, &RadiusSchedule::default())
}

pub fn critical_channel_with(alpha: f64, spin: Spin, schedule: &RadiusSchedule) -> Result<Option<Channel>> {
    if !alpha.is_finite() {
        return Err(Error::InvalidInput(format!("flux {alpha} is not finite")));
    }
    if is_integer_flux(alpha) {
        return Ok(None);
    }
    let lo = (-alpha).floor() as i32 - 2;
    let hi = (-alpha).ceil() as i32 + 2;
    let mut found = Vec::new();
    for m in lo..=hi {
        let ch = Channel::new(m, spin);
        let attractive = shell_jump_coefficient(&FluxTube::new(alpha, 1.0)?, ch) < 0.0;
        let normalizable = ch.exterior_order(alpha) < 1.0;
        if !(attractive && normalizable) {
            continue;
        }
        let results = match_schedule(alpha, schedule, ch, 1.0)?;
        if ratio_law(&results, schedule.kr())?.is_some_and(|l| l.exponent < 0.0) {
            found.push(ch);
        }
    }
    match found.len() {
        0 => Ok(None),
        1 => Ok(Some(found[0])),
        _ => Err(Error::Consistency(format!(
            "{} channels qualify as critical for alpha = {alpha}, spin {spin}: {found:?}",
            found.len()
        ))),
    }
}
