//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use abspin_core::amplitude::{
    ab_cross_section_closed_form, angle_grid, spin_amplitude, spin_amplitude_curve, spin_dependence_metric,
    PhaseShiftTable,
};
use abspin_core::exec::Execution;
use abspin_core::filament::{critical_channel, limit_phase_shift, Channel, Prescription, RadiusSchedule, Spin};
use abspin_core::polarimetry::{
    bracket, corotated_detector, polarized_cross_section, cross_section_oracle, lab_azimuth, z_hat, PolarizationSetup,
    ANGLE_SIGN,
};
use abspin_core::specfun::{bessel_j, bessel_j_deriv, BesselOrder};
use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::path::PathBuf;
use std::process::{Command, ExitCode};
use std::time::Instant;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn table(alpha: f64, p: Prescription, m_max: u32) -> PhaseShiftTable {
    PhaseShiftTable::build(alpha, p, m_max, &RadiusSchedule::default(), Execution::default()).unwrap()
}

fn unit(rng: &mut ChaCha8Rng) -> Vector3<f64> {
    loop {
        let v = Vector3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            return v / n;
        }
    }
}

fn check(worst: f64, tol: f64, what: &str) -> Outcome {
    let msg = format!("{what} {worst:.2e} (tol {tol:.0e})");
    if worst <= tol {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn closed_form() -> Outcome {
    let grid = angle_grid(32, PI / 6.0, PI).unwrap();
    let mut worst = 0.0_f64;
    for alpha in [0.1, 0.25, 0.5, 0.9] {
        let t = table(alpha, Prescription::RegularOnly, 400);
        for &phi in &grid {
            let exact = ab_cross_section_closed_form(alpha, 1.0, phi).unwrap();
            let got = spin_amplitude(&t, phi, 1.0).unwrap().unpolarized_cross_section();
            worst = worst.max((got - exact).abs() / exact);
        }
    }
    check(worst, 1e-4, "max relative deviation")
}

fn limit_phase_shifts() -> Outcome {
    let alpha = 0.25;
    let schedule = RadiusSchedule::default();
    let critical = critical_channel(alpha, Spin::Up).unwrap();
    let mut worst_regular = 0.0_f64;
    let mut worst_critical = 0.0_f64;
    for s in Spin::BOTH {
        for m in -10..=10 {
            let ch = Channel::new(m, s);
            let l = limit_phase_shift(alpha, &schedule, ch, 1.0, Prescription::SingularAllowed).unwrap();
            let nu = ch.exterior_order(alpha);
            let am = m.unsigned_abs() as f64;
            // shifts are defined modulo pi
            let dist = |target: f64| (l.phase_shift - target).sin().abs();
            if Some(ch) == critical {
                worst_critical = worst_critical.max(dist(0.5 * PI * (am + nu)));
            } else {
                worst_regular = worst_regular.max(dist(0.5 * PI * (am - nu)));
            }
        }
    }
    if critical.is_none() {
        return Err("no critical channel found".into());
    }
    check(worst_regular.max(worst_critical), 1e-6, "max deviation")
        .map(|m| format!("{m}; regular {worst_regular:.1e}, critical {worst_critical:.1e}"))
}

fn single_partial_wave() -> Outcome {
    let mut found = Vec::new();
    for alpha in [0.1, 0.3, 0.7, 0.9] {
        let t = table(alpha, Prescription::SingularAllowed, 50);
        let up: Vec<_> = t.rows().filter(|(c, e)| e.critical && c.spin == Spin::Up).map(|(c, _)| c).collect();
        let down = t.rows().filter(|(c, e)| e.critical && c.spin == Spin::Down).count();
        if up.len() != 1 || down != 0 || critical_channel(alpha, Spin::Down).unwrap().is_some() {
            return Err(format!("alpha {alpha}: {} attractive, {down} repulsive critical channels", up.len()));
        }
        found.push(format!("{alpha}:m={}", up[0].m));
    }
    Ok(format!("one attractive channel each ({}), none repulsive", found.join(" ")))
}

fn critique() -> Outcome {
    let grid = angle_grid(64, PI / 64.0, PI).unwrap();
    let metric = |p| {
        let t = table(0.3, p, 200);
        spin_dependence_metric(&spin_amplitude_curve(&t, &grid, 1.0, Execution::default()).unwrap()).unwrap()
    };
    let (regular, singular) = (metric(Prescription::RegularOnly), metric(Prescription::SingularAllowed));
    let msg = format!("regular {regular:.2e} (< 1e-10), singular {singular:.3} (> 0.1)");
    if regular < 1e-10 && singular > 0.1 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn limit_a() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let z = z_hat();
    let mut worst = 0.0_f64;
    for _ in 0..1000 {
        let n = unit(&mut rng);
        let phi = rng.gen_range(-PI..PI);
        let s = PolarizationSetup::new(n, n).unwrap();
        let expected = 0.5 * (1.0 + n.dot(&z).powi(2) - n.cross(&z).norm_squared() * phi.cos());
        worst = worst.max((bracket(&s, phi) - expected).abs());
    }
    check(worst, 1e-14, "1000 samples, max deviation")
}

fn limit_b() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0_f64;
    let mut worst_ab = 0.0_f64;
    for _ in 0..1000 {
        let n = unit(&mut rng);
        let phi = rng.gen_range(-PI..PI);
        let s = PolarizationSetup::new(n, corotated_detector(&n, phi).unwrap()).unwrap();
        worst = worst.max((bracket(&s, phi) - 1.0).abs());
        // as a cross section, with the same detector built at the lab azimuth
        if phi.abs() > 1e-2 {
            let lab = lab_azimuth(phi);
            let s = PolarizationSetup::new(n, corotated_detector(&n, lab).unwrap()).unwrap();
            let ab = ab_cross_section_closed_form(0.3, 1.0, phi).unwrap();
            worst_ab = worst_ab.max((polarized_cross_section(&s, phi, 0.3, 1.0).unwrap() - ab).abs() / ab);
        }
    }
    check(worst.max(worst_ab), 1e-12, "1000 samples, max deviation")
}

fn oracle_equivalence() -> Outcome {
    let t = table(0.3, Prescription::SingularAllowed, 200);
    let grid = angle_grid(64, PI / 64.0, PI).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0_f64;
    for _ in 0..20 {
        let s = PolarizationSetup::new(unit(&mut rng), unit(&mut rng)).unwrap();
        for &phi in &grid {
            let amp = spin_amplitude(&t, ANGLE_SIGN * phi, 1.0).unwrap();
            let oracle = cross_section_oracle(&s, &amp).unwrap();
            let polarized = polarized_cross_section(&s, phi, 0.3, 1.0).unwrap();
            let scale = ab_cross_section_closed_form(0.3, 1.0, phi).unwrap();
            worst = worst.max((oracle - polarized).abs() / scale);
        }
    }
    check(worst, 1e-6, &format!("angle sign {ANGLE_SIGN:+}, max relative mismatch"))
}

fn special_functions() -> Outcome {
    let j = |nu: f64, x: f64| bessel_j(BesselOrder::new(nu).unwrap(), x).unwrap();
    let jp = |nu: f64, x: f64| bessel_j_deriv(BesselOrder::new(nu).unwrap(), x).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut wr, mut rec, mut der) = (0.0_f64, 0.0_f64, 0.0_f64);
    for _ in 0..10_000 {
        let x = rng.gen_range(0.1..50.0);
        let nu: f64 = rng.gen_range(-5.0..5.0);

        if (nu - nu.round()).abs() > 1e-3 {
            let (a, b) = (j(nu, x) * jp(-nu, x), jp(nu, x) * j(-nu, x));
            let expected = -2.0 * (nu * PI).sin() / (PI * x);
            wr = wr.max(((a - b) - expected).abs() / a.abs().max(b.abs()).max(expected.abs()));
        }

        let (lo, hi, mid) = (j(nu - 1.0, x), j(nu + 1.0, x), 2.0 * nu / x * j(nu, x));
        rec = rec.max((lo + hi - mid).abs() / lo.abs().max(hi.abs()).max(mid.abs()));

        let h = 1e-6;
        let d = jp(nu, x);
        der = der.max(((j(nu, x + h) - j(nu, x - h)) / (2.0 * h) - d).abs() / d.abs().max(1.0));
    }
    let msg = format!("Wronskian {wr:.1e} (1e-10), recurrence {rec:.1e} (1e-9), derivative {der:.1e} (1e-6)");
    if wr <= 1e-10 && rec <= 1e-9 && der <= 1e-6 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn symmetries() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut shift, mut reflect) = (0.0_f64, 0.0_f64);
    for alpha in [0.1, 0.3, 0.55, 0.9] {
        for p in [Prescription::RegularOnly, Prescription::SingularAllowed] {
            let base = table(alpha, p, 60);
            let shifted = table(alpha + 1.0, p, 60);
            let mirrored = table(-alpha, p, 60);
            for _ in 0..8 {
                let phi = rng.gen_range(0.05..PI);
                let u = |t: &PhaseShiftTable, phi| spin_amplitude(t, phi, 1.0).unwrap().unpolarized_cross_section();
                let a = u(&base, phi);
                shift = shift.max((u(&shifted, phi) - a).abs() / a);
                reflect = reflect.max((u(&mirrored, -phi) - a).abs() / a);
            }
        }
    }
    let msg = format!("alpha+1 {shift:.1e}, (-alpha, -phi) {reflect:.1e} (tol 1e-8)");
    if shift <= 1e-8 && reflect <= 1e-8 {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn determinism() -> Outcome {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let expected = std::fs::read(dir.join("cross_section.csv")).map_err(|e| e.to_string())?;
    let config = dir.join("cross_section.toml");
    for threads in ["1", "4", "0"] {
        let out = Command::new(env!("CARGO_BIN_EXE_abspin"))
            .arg("cross-section")
            .arg("--config")
            .arg(&config)
            .env("ABSPIN_THREADS", threads)
            .output()
            .map_err(|e| e.to_string())?;
        if !out.status.success() || out.stdout != expected {
            return Err(format!("output with {threads} threads differs from the golden file"));
        }
    }
    Ok(format!("{} bytes identical for 1, 4 and automatic threads", expected.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("closed-form agreement", closed_form),
        ("R -> 0 phase shifts", limit_phase_shifts),
        ("single critical partial wave", single_partial_wave),
        ("spin dependence by prescription", critique),
        ("equal-vector limit", limit_a),
        ("co-rotated detector limit", limit_b),
        ("oracle equivalence", oracle_equivalence),
        ("special functions", special_functions),
        ("symmetries", symmetries),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = std::panic::catch_unwind(f).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {}: PASS {name}: {detail} [{secs:.1}s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL {name}: {detail} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!("acceptance: {}/{} passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
