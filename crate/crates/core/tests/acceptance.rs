//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, FRAC_PI_8, PI, SQRT_2};
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use twopair_core::analytic;
use twopair_core::bell::{self, ChshSettings, CorrelationSource, LhvLambda};
use twopair_core::config::RunConfig;
use twopair_core::elements::{BeamSplitterSpec, ExperimentConfig, PolarizerSetting};
use twopair_core::montecarlo::{self, MonteCarloConfig, Window};
use twopair_core::oracle;
use twopair_core::report::{self, RunManifest};
use twopair_core::wavepacket::{self, SpectralQuadrature, WavePacketParams};

const GRID: [f64; 5] = [0.0, FRAC_PI_8, FRAC_PI_4, 3.0 * FRAC_PI_8, FRAC_PI_2];
const T: f64 = 1e-12;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn ideal(thetas: [f64; 4]) -> ExperimentConfig {
    ExperimentConfig::symmetric(thetas)
}

fn quad_on_grid() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for &t1 in &GRID {
        for &t2 in &GRID {
            for &t3 in &GRID {
                for &t4 in &GRID {
                    let o = oracle::quad_probability(&ideal([t1, t2, t3, t4]), 0.0).unwrap();
                    worst = worst.max((o - analytic::quad_coincidence_prob(t1, t2, t3, t4)).abs());
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(worst < 1e-12 && secs < 5.0, format!("625 points, max |diff| {worst:e}, {secs:.3} s"))
}

fn one_side_open() -> Outcome {
    let mut worst: f64 = 0.0;
    let base = ExperimentConfig::default();
    for &a in &GRID {
        for &b in &GRID {
            use PolarizerSetting::{Absent, Angle};
            let no_left = base.with_polarizers([Absent, Absent, Angle(a), Angle(b)]);
            let p = analytic::prob_no_left_polarizers(a, b, &base.frequencies, &base.geometry, &base.timing);
            worst = worst.max((oracle::quad_probability(&no_left, 0.0).unwrap() - p).abs());
            let no_right = base.with_polarizers([Angle(a), Angle(b), Absent, Absent]);
            let p = analytic::prob_no_right_polarizers(a, b, &base.frequencies, &base.geometry, &base.timing);
            worst = worst.max((oracle::quad_probability(&no_right, 0.0).unwrap() - p).abs());
        }
    }
    outcome(worst < 1e-12, format!("2 x 25 points, max |diff| {worst:e}"))
}

fn same_beam() -> Outcome {
    let mut worst: f64 = 0.0;
    let cfg = ExperimentConfig::default();
    for &t1 in &GRID {
        for &t2 in &GRID {
            for &t3 in &GRID {
                let o = oracle::same_beam_moment(&cfg, t1, t2, t3).unwrap();
                worst = worst.max((o - analytic::prob_both_same_beam(t1, t2, t3)).abs());
            }
        }
    }
    outcome(worst < 1e-12, format!("125 points, max |diff| {worst:e}"))
}

fn channel_sum() -> Outcome {
    let mut worst: f64 = 0.0;
    let cfg = ExperimentConfig::default();
    for &t1 in &GRID {
        for &t2 in &GRID {
            let one = oracle::one_one_channel_no_right(&cfg, t1, t2, 0.0).unwrap();
            let two = oracle::two_photon_channels_no_right(&cfg, t1, t2, 0.3).unwrap();
            worst = worst.max((one + two - 0.25).abs());
        }
    }
    outcome(worst < 1e-12, format!("25 points, max |sum - 1/4| {worst:e}"))
}

fn zero_witness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let theta = rng.gen::<f64>() * PI;
        worst = worst.max(bell::zero_coincidence_witness(theta).abs());
        worst = worst.max(oracle::quad_probability(&ideal([theta; 4]), 0.0).unwrap().abs());
    }
    outcome(worst < 1e-14, format!("100 angles, closed form and oracle, max {worst:e}"))
}

fn wavepacket_quadrature() -> Outcome {
    let start = Instant::now();
    let quad = SpectralQuadrature::new(wavepacket::DEFAULT_ORDER).unwrap();
    let axis: Vec<f64> = (0..10).map(|k| 0.25 * k as f64).collect();
    let thetas: Vec<f64> = (0..10).map(|k| FRAC_PI_2 * k as f64 / 9.0).collect();
    let omega = [2.3e15; 4];
    let rows = wavepacket::sweep(T, omega, &axis, &axis, &thetas, &quad).unwrap();
    let mut worst = rows.iter().map(|r| r.quad_rel_err).fold(0.0, f64::max);
    // the mirrored geometry, polarizers only on the left
    for &s in &axis {
        for &u in &axis {
            for &d in &thetas {
                let params = WavePacketParams::centered(T, omega, s * T, u * T);
                use PolarizerSetting::{Absent, Angle};
                let pol = [Absent, Absent, Angle(d), Angle(0.0)];
                let closed = wavepacket::closed_density_no_left(d, 0.0, &params).unwrap();
                let num = wavepacket::integrate_quad_density(&pol, &BeamSplitterSpec::balanced(), &params, &quad)
                    .unwrap();
                let scale = if closed.density > 0.0 {
                    closed.density
                } else {
                    closed.damping_f * closed.cosh_term / T.powi(4)
                };
                worst = worst.max((num.density - closed.density).abs() / scale);
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst < 1e-6 && secs < 30.0,
        format!("2 x 1000 points, max rel err {worst:e}, {secs:.2} s"),
    )
}

fn threshold() -> Outcome {
    let b = wavepacket::bell_region_bound(T).unwrap();
    let exact = ((1.0 + SQRT_2) / 2.0).acosh();
    let root_err = (b.x_star_bisection - exact).abs();
    let v = wavepacket::visibility(b.x_star * T, T, T);
    outcome(
        root_err < 1e-9 && b.relative_discrepancy.abs() < 0.05 && (v - FRAC_1_SQRT_2).abs() < 1e-12,
        format!(
            "root {:.12}, arccosh form {exact:.12}, quoted {} differs by {:.2}%",
            b.x_star_bisection,
            b.quoted,
            100.0 * b.relative_discrepancy
        ),
    )
}

fn ideal_mc(n: u64) -> MonteCarloConfig {
    MonteCarloConfig {
        n_events: n,
        seed: 20240601,
        coherence_time: T,
        sigma_s: 0.0,
        window34: Window::Finite(0.05 * T),
        window12: Window::Unbounded,
        ..MonteCarloConfig::default()
    }
}

fn mc_fringe() -> Outcome {
    let start = Instant::now();
    let stats = montecarlo::run(&ideal_mc(1_000_000)).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let (v, err) = stats.visibility.unwrap();
    outcome(
        (v - 1.0).abs() <= 3.0 * err && secs < 60.0,
        format!("{} in window, v = {v:.5} +- {err:.5}, {secs:.2} s", stats.n_in_window),
    )
}

fn chsh() -> Outcome {
    let settings = ChshSettings::canonical();
    let src = CorrelationSource::analytic(bell::one_one_left_probability);
    let s_exact = bell::chsh_s(&src, &settings).unwrap().s;
    let run = montecarlo::chsh_experiment(&ideal_mc(1_000_000), settings).unwrap();
    let err = run.value.stderr.unwrap();
    outcome(
        (s_exact - 2.0 * SQRT_2).abs() < 1e-12 && run.value.s > 2.0 + 3.0 * err,
        format!("analytic S = {s_exact:.14}, simulated S = {:.4} +- {err:.4}", run.value.s),
    )
}

fn lhv() -> Outcome {
    let r = bell::lhv_baseline(100_000, 99, 8, &ChshSettings::canonical(), LhvLambda::Uniform);
    let s_err = r.chsh.stderr.unwrap();
    outcome(
        r.visibility <= 0.5 + 3.0 * r.visibility_stderr && r.chsh.s <= 2.0 + 3.0 * s_err,
        format!(
            "v = {:.4} +- {:.4}, S = {:.4} +- {s_err:.4}",
            r.visibility, r.visibility_stderr, r.chsh.s
        ),
    )
}

fn mean_tau34() -> Outcome {
    let cfg = MonteCarloConfig {
        window34: Window::Unbounded,
        ..ideal_mc(200_000)
    };
    let a = montecarlo::run(&cfg).unwrap();
    let b = montecarlo::run(&cfg).unwrap();
    let mean = a.mean_abs_tau34 / T;
    let identical = a.mean_abs_tau34.to_bits() == b.mean_abs_tau34.to_bits() && a == b;
    outcome(
        identical,
        format!(
            "mean |tau34| = {mean:.4} T, rms {:.4} T, quoted sqrt2 T = {SQRT_2:.4} T (ratio {:.3}); repeat run bit-identical: {identical}",
            a.rms_tau34 / T,
            mean / SQRT_2
        ),
    )
}

fn csv_outputs(seed: u64) -> String {
    let cfg = RunConfig {
        seed: Some(seed),
        n_events: 100_000,
        sigma_s: 0.5 * T,
        window34: Window::Finite(0.5 * T),
        ..RunConfig::default()
    };
    let mc = cfg.monte_carlo().unwrap();
    let stats = montecarlo::run(&mc).unwrap();
    let manifest = RunManifest::new("montecarlo", &cfg);
    let chsh = montecarlo::chsh_experiment(&mc, ChshSettings::canonical()).unwrap();
    report::montecarlo_summary(&manifest, &stats)
        + &report::histogram_csv(&manifest, &stats.histogram)
        + &report::chsh_csv(&RunManifest::new("chsh", &cfg), &chsh.settings, &chsh.value)
}

fn determinism() -> Outcome {
    let a = csv_outputs(5);
    let b = csv_outputs(5);
    let c = csv_outputs(6);
    outcome(
        a == b && a != c,
        format!("{} bytes, identical: {}, other seed differs: {}", a.len(), a == b, a != c),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        ("quadruple probability matches oracle on 5^4 grid", quad_on_grid),
        ("one-side-open formulas match oracle", one_side_open),
        ("same-beam channel matches oracle", same_beam),
        ("channel probabilities sum to 1/4", channel_sum),
        ("zero-coincidence witness", zero_witness),
        ("wave-packet quadrature matches closed forms", wavepacket_quadrature),
        ("visibility threshold root and quoted bound", threshold),
        ("Monte Carlo fringe visibility", mc_fringe),
        ("CHSH analytic and simulated", chsh),
        ("local hidden-variable baseline", lhv),
        ("mean |tau34| reported, deterministic", mean_tau34),
        ("byte-identical outputs for a fixed seed", determinism),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let o = f();
        let status = if o.pass { "PASS" } else { "FAIL" };
        failed += (!o.pass) as usize;
        println!("{status} criterion {:>2}: {name}: {}", k + 1, o.detail);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
