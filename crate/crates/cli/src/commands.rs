use abspin_core::amplitude::{
    ab_cross_section_closed_form, spin_amplitude, spin_amplitude_curve, spin_dependence_metric, wrap_angle,
    PhaseShiftTable, FORWARD_CONE,
};
use abspin_core::exec::Execution;
use abspin_core::filament::{critical_channel, is_integer_flux, Channel, Prescription, Spin};
use abspin_core::polarimetry::{
    bracket, corotated_detector, lab_azimuth, scattered_polarization, z_hat, CrossSectionCurve,
    PolarizationSetup, ANGLE_SIGN,
};
use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt::Write as _;

use crate::config::{OutputFormat, RunConfig};
use crate::output::{csv_table, fmt_f64, json};
use crate::CliError;

pub const LIMIT_A_TOL: f64 = 1e-14;
pub const LIMIT_B_TOL: f64 = 1e-12;
pub const REGULAR_METRIC_MAX: f64 = 1e-10;
pub const SINGULAR_METRIC_MIN: f64 = 0.1;
/// Flux at which the comparison report also locates the critical channel.
pub const REFERENCE_ALPHA: f64 = 0.3;
/// Scattering angle at which the polarization rotation is reported.
pub const ROTATION_PROBE: f64 = FRAC_PI_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
    /// The check does not apply (integer flux scatters nothing).
    Skip,
}

impl Verdict {
    fn from_bool(ok: bool) -> Self {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    fn label(self) -> &'static str {
        match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Skip => "SKIP",
        }
    }
}

/// Rendered command output and whether it reports a failure.
#[derive(Debug, Clone, PartialEq)]
pub struct CommandOutput {
    pub body: String,
    pub failed: bool,
}

impl CommandOutput {
    fn ok(body: String) -> Self {
        Self { body, failed: false }
    }
}

fn build_table(cfg: &RunConfig, prescription: Prescription) -> Result<PhaseShiftTable, CliError> {
    Ok(PhaseShiftTable::build(
        cfg.alpha,
        prescription,
        cfg.m_max,
        &cfg.radius_schedule,
        Execution::Parallel,
    )?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseShiftRow {
    pub m: i32,
    pub s: Spin,
    pub phase_shift: f64,
    pub singular_survives: bool,
    pub critical: bool,
}

pub fn phase_shift_rows(cfg: &RunConfig) -> Result<Vec<PhaseShiftRow>, CliError> {
    let table = build_table(cfg, cfg.prescription)?;
    Ok(table
        .rows()
        .map(|(ch, e)| PhaseShiftRow {
            m: ch.m,
            s: ch.spin,
            phase_shift: e.phase_shift,
            singular_survives: e.singular_survives,
            critical: e.critical,
        })
        .collect())
}

pub fn phase_shifts(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let rows = phase_shift_rows(cfg)?;
    let body = match cfg.format {
        OutputFormat::Json => json(&rows)?,
        OutputFormat::Csv => csv_table(
            &["m", "s", "phase_shift", "singular_survives", "critical"],
            rows.iter().map(|r| {
                vec![
                    r.m.to_string(),
                    r.s.to_string(),
                    fmt_f64(r.phase_shift),
                    r.singular_survives.to_string(),
                    r.critical.to_string(),
                ]
            }),
        )?,
    };
    Ok(CommandOutput::ok(body))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossSectionRow {
    pub phi: f64,
    pub dsigma_polarized: f64,
    pub dsigma_oracle: f64,
    pub dsigma_ab: f64,
    pub bracket: f64,
}

pub fn cross_section_rows(cfg: &RunConfig) -> Result<Vec<CrossSectionRow>, CliError> {
    let setup = cfg
        .setup
        .ok_or_else(|| CliError::Config("cross-section needs a polarization setup (--n and --nprime)".into()))?;
    let table = build_table(cfg, cfg.prescription)?;
    let curve = CrossSectionCurve::compute(setup, &table, &cfg.phi_grid.angles()?, cfg.k, Execution::Parallel)?;
    Ok(curve
        .points
        .iter()
        .map(|p| CrossSectionRow {
            phi: p.phi,
            dsigma_polarized: p.polarized,
            dsigma_oracle: p.oracle,
            dsigma_ab: p.ab,
            bracket: p.bracket,
        })
        .collect())
}

pub fn cross_section(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let rows = cross_section_rows(cfg)?;
    let body = match cfg.format {
        OutputFormat::Json => json(&rows)?,
        OutputFormat::Csv => csv_table(
            &["phi", "dsigma_polarized", "dsigma_oracle", "dsigma_ab", "bracket"],
            rows.iter().map(|r| {
                [r.phi, r.dsigma_polarized, r.dsigma_oracle, r.dsigma_ab, r.bracket]
                    .iter()
                    .map(|&v| fmt_f64(v))
                    .collect()
            }),
        )?,
    };
    Ok(CommandOutput::ok(body))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitCheck {
    pub max_deviation: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
}

impl LimitCheck {
    fn new(max_deviation: f64, tolerance: f64) -> Self {
        Self {
            max_deviation,
            tolerance,
            verdict: Verdict::from_bool(max_deviation <= tolerance),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Conventions {
    pub lab_azimuth: String,
    pub amplitude_angle_sign: f64,
    pub shell_coupling: String,
    pub detector: String,
}

impl Conventions {
    fn current() -> Self {
        Self {
            lab_azimuth: "scattering angle + pi (beam incident from the right)".into(),
            amplitude_angle_sign: ANGLE_SIGN,
            shell_coupling: "gamma = -s alpha (negative is attractive)".into(),
            detector: "accepts spin along n'; outcomes n' and -n' add up to the unpolarized-detector intensity".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitsReport {
    pub alpha: f64,
    pub samples: usize,
    pub seed: u64,
    /// `n = n'`.
    pub limit_equal_vectors: LimitCheck,
    /// Co-rotated detector.
    pub limit_corotated: LimitCheck,
    pub conventions: Conventions,
    pub verdict: Verdict,
}

pub type BracketFn = fn(&PolarizationSetup, f64) -> f64;

fn random_unit(rng: &mut ChaCha8Rng) -> Vector3<f64> {
    loop {
        let v = Vector3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            return v / n;
        }
    }
}

/// Both limit suites with the bracket supplied by the caller.
pub fn limits_report_with(cfg: &RunConfig, bracket_fn: BracketFn) -> Result<LimitsReport, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let z = z_hat();
    let (mut dev_a, mut dev_b) = (0.0_f64, 0.0_f64);
    for _ in 0..cfg.samples {
        let n = random_unit(&mut rng);
        let lab = wrap_angle(rng.gen_range(-PI..PI));

        let same = PolarizationSetup::new(n, n)?;
        let expected = 0.5 * (1.0 + n.dot(&z).powi(2) - n.cross(&z).norm_squared() * lab.cos());
        dev_a = dev_a.max((bracket_fn(&same, lab) - expected).abs());

        let co = PolarizationSetup::new(n, corotated_detector(&n, lab)?)?;
        dev_b = dev_b.max((bracket_fn(&co, lab) - 1.0).abs());
        let phi = wrap_angle(lab - PI);
        if phi.abs() >= FORWARD_CONE {
            let ab = ab_cross_section_closed_form(cfg.alpha, cfg.k, phi)?;
            let polarized = ab * bracket_fn(&co, lab_azimuth(phi));
            dev_b = dev_b.max(if ab > 0.0 { (polarized - ab).abs() / ab } else { polarized.abs() });
        }
    }
    let a = LimitCheck::new(dev_a, LIMIT_A_TOL);
    let b = LimitCheck::new(dev_b, LIMIT_B_TOL);
    let verdict = Verdict::from_bool(a.verdict == Verdict::Pass && b.verdict == Verdict::Pass);
    Ok(LimitsReport {
        alpha: cfg.alpha,
        samples: cfg.samples,
        seed: cfg.seed,
        limit_equal_vectors: a,
        limit_corotated: b,
        conventions: Conventions::current(),
        verdict,
    })
}

fn conventions_text(out: &mut String, c: &Conventions) {
    let _ = writeln!(out, "conventions:");
    let _ = writeln!(out, "  lab azimuth: {}", c.lab_azimuth);
    let _ = writeln!(out, "  amplitude angle sign: {}", c.amplitude_angle_sign);
    let _ = writeln!(out, "  shell coupling: {}", c.shell_coupling);
    let _ = writeln!(out, "  detector: {}", c.detector);
}

pub fn render_limits(report: &LimitsReport, format: OutputFormat) -> Result<CommandOutput, CliError> {
    let body = match format {
        OutputFormat::Json => json(report)?,
        OutputFormat::Csv => {
            let mut out = String::new();
            let _ = writeln!(out, "limits report");
            let _ = writeln!(out, "alpha = {}, samples = {}, seed = {}", report.alpha, report.samples, report.seed);
            for (name, c) in [
                ("n = n'", &report.limit_equal_vectors),
                ("co-rotated detector", &report.limit_corotated),
            ] {
                let _ = writeln!(
                    out,
                    "limit {name}: max deviation {:.3e} (tolerance {:.0e}) {}",
                    c.max_deviation,
                    c.tolerance,
                    c.verdict.label()
                );
            }
            conventions_text(&mut out, &report.conventions);
            let _ = writeln!(out, "verdict: {}", report.verdict.label());
            out
        }
    };
    Ok(CommandOutput {
        body,
        failed: report.verdict == Verdict::Fail,
    })
}

pub fn limits_report(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    render_limits(&limits_report_with(cfg, bracket)?, cfg.format)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrescriptionSummary {
    pub spin_dependence: f64,
    /// Azimuthal rotation of an in-plane incident polarization at the probe angle.
    pub polarization_rotation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub alpha: f64,
    pub m_max: u32,
    pub angles: usize,
    pub regular: Option<PrescriptionSummary>,
    pub singular: Option<PrescriptionSummary>,
    pub critical_channel: Option<Channel>,
    pub reference_alpha: f64,
    pub reference_critical_channel: Option<Channel>,
    pub critical_channel_shifted: bool,
    pub rotation_probe_angle: f64,
    pub regular_metric_max: f64,
    pub singular_metric_min: f64,
    pub error: Option<String>,
    pub verdict: Verdict,
}

fn summarize(cfg: &RunConfig, prescription: Prescription) -> Result<(PrescriptionSummary, PhaseShiftTable), CliError> {
    let table = build_table(cfg, prescription)?;
    let amps = spin_amplitude_curve(&table, &cfg.phi_grid.angles()?, cfg.k, Execution::Parallel)?;
    let metric = spin_dependence_metric(&amps)?;
    let probe = spin_amplitude(&table, ANGLE_SIGN * ROTATION_PROBE, cfg.k)?;
    let rotation = if is_integer_flux(cfg.alpha) {
        0.0
    } else {
        let p = scattered_polarization(&Vector3::x(), &probe)?;
        p.y.atan2(p.x)
    };
    Ok((
        PrescriptionSummary {
            spin_dependence: metric,
            polarization_rotation: rotation,
        },
        table,
    ))
}

fn critical_of(alpha: f64) -> Result<Option<Channel>, CliError> {
    for s in Spin::BOTH {
        if let Some(ch) = critical_channel(alpha, s)? {
            return Ok(Some(ch));
        }
    }
    Ok(None)
}

pub fn compare_report(cfg: &RunConfig) -> Result<ComparisonReport, CliError> {
    let angles = cfg.phi_grid.angles()?.len();
    let reference = critical_of(REFERENCE_ALPHA)?;
    let mut report = ComparisonReport {
        alpha: cfg.alpha,
        m_max: cfg.m_max,
        angles,
        regular: None,
        singular: None,
        critical_channel: None,
        reference_alpha: REFERENCE_ALPHA,
        reference_critical_channel: reference,
        critical_channel_shifted: false,
        rotation_probe_angle: ROTATION_PROBE,
        regular_metric_max: REGULAR_METRIC_MAX,
        singular_metric_min: SINGULAR_METRIC_MIN,
        error: None,
        verdict: Verdict::Fail,
    };
    let outcome = summarize(cfg, Prescription::RegularOnly)
        .and_then(|reg| summarize(cfg, Prescription::SingularAllowed).map(|sing| (reg, sing)));
    match outcome {
        // configuration problems stay errors; solver failures become report content
        Err(CliError::Config(msg)) => return Err(CliError::Config(msg)),
        Err(e) => report.error = Some(e.to_string()),
        Ok(((reg, _), (sing, table))) => {
            report.critical_channel = table.critical_channel();
            report.critical_channel_shifted = report.critical_channel != reference;
            report.verdict = if is_integer_flux(cfg.alpha) {
                Verdict::Skip
            } else {
                Verdict::from_bool(
                    reg.spin_dependence < REGULAR_METRIC_MAX && sing.spin_dependence > SINGULAR_METRIC_MIN,
                )
            };
            report.regular = Some(reg);
            report.singular = Some(sing);
        }
    }
    Ok(report)
}

fn channel_text(ch: Option<Channel>) -> String {
    ch.map_or_else(|| "none".to_string(), |c| c.to_string())
}

pub fn render_comparison(report: &ComparisonReport, format: OutputFormat) -> Result<CommandOutput, CliError> {
    let body = match format {
        OutputFormat::Json => json(report)?,
        OutputFormat::Csv => {
            let mut out = String::new();
            let _ = writeln!(out, "prescription comparison");
            let _ = writeln!(out, "alpha = {}, m_max = {}, angles = {}", report.alpha, report.m_max, report.angles);
            if let Some(e) = &report.error {
                let _ = writeln!(out, "solver error: {e}");
            }
            for (name, s) in [("regular", &report.regular), ("singular", &report.singular)] {
                if let Some(s) = s {
                    let _ = writeln!(
                        out,
                        "{name}: spin dependence {:.3e}, polarization rotation at phi = {:.4} is {:.6} rad",
                        s.spin_dependence, report.rotation_probe_angle, s.polarization_rotation
                    );
                }
            }
            let _ = writeln!(
                out,
                "required: regular < {:.0e}, singular > {}",
                report.regular_metric_max, report.singular_metric_min
            );
            let _ = writeln!(out, "critical channel: {}", channel_text(report.critical_channel));
            let _ = writeln!(
                out,
                "critical channel at alpha = {}: {} ({})",
                report.reference_alpha,
                channel_text(report.reference_critical_channel),
                if report.critical_channel_shifted { "shifted" } else { "unchanged" }
            );
            let _ = writeln!(out, "verdict: {}", report.verdict.label());
            out
        }
    };
    Ok(CommandOutput {
        body,
        failed: report.verdict == Verdict::Fail,
    })
}

pub fn compare_prescriptions(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    render_comparison(&compare_report(cfg)?, cfg.format)
}
