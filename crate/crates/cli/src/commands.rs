use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

use twopair_core::analytic;
use twopair_core::bell::{self, ChshSettings, CorrelationSource, LhvLambda};
use twopair_core::config::RunConfig;
use twopair_core::montecarlo;
use twopair_core::oracle;
use twopair_core::report::{self, AnalyticRow, RunManifest};
use twopair_core::wavepacket::{self, SpectralQuadrature};

use crate::{Common, Formula};

/// Agreement required between closed forms and the oracle.
const ORACLE_TOL: f64 = 1e-12;

fn load_config(common: &Common) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            RunConfig::parse(&text).with_context(|| format!("in {}", path.display()))?
        }
        None => RunConfig::default(),
    };
    for kv in &common.overrides {
        let (k, v) = kv
            .split_once('=')
            .with_context(|| format!("override `{kv}` is not KEY=VALUE"))?;
        cfg.set(k.trim(), v.trim(), 0).with_context(|| format!("override `{kv}`"))?;
    }
    if let Some(seed) = common.seed {
        cfg.seed = Some(seed);
    }
    Ok(cfg)
}

/// `start:stop:count`, inclusive and evenly spaced.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [start, stop, count] = parts[..] else {
        bail!("grid `{spec}` is not start:stop:count");
    };
    let start: f64 = start.trim().parse().with_context(|| format!("grid start `{start}`"))?;
    let stop: f64 = stop.trim().parse().with_context(|| format!("grid stop `{stop}`"))?;
    let count: usize = count.trim().parse().with_context(|| format!("grid count `{count}`"))?;
    match count {
        0 => bail!("grid `{spec}` has no points"),
        1 => Ok(vec![start]),
        n => Ok((0..n)
            .map(|k| start + (stop - start) * k as f64 / (n - 1) as f64)
            .collect()),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Which polarizers a formula keeps; `None` means forced absent.
fn mask(formula: Formula, cfg: &RunConfig) -> [bool; 4] {
    match formula {
        Formula::General => cfg.theta_deg.map(|t| t.is_some()),
        Formula::AllPresent => [true; 4],
        Formula::NoLeft => [false, false, true, true],
        Formula::NoRight | Formula::ChannelSum => [true, true, false, false],
        Formula::SameBeam => [true, true, true, false],
    }
}

fn grid_points(present: [bool; 4], grid: &[f64]) -> Vec<[Option<f64>; 4]> {
    let mut points = vec![[None; 4]];
    for (i, &keep) in present.iter().enumerate() {
        if !keep {
            continue;
        }
        points = points
            .into_iter()
            .flat_map(|p| {
                grid.iter().map(move |&g| {
                    let mut q = p;
                    q[i] = Some(g);
                    q
                })
            })
            .collect();
    }
    points
}

fn definite(point: &[Option<f64>; 4], i: usize) -> Result<f64> {
    point[i]
        .map(f64::to_radians)
        .with_context(|| format!("theta{} must be an angle for this formula", i + 1))
}

/// One table row: closed form and oracle at a point (angles in degrees).
pub fn evaluate(formula: Formula, cfg: &RunConfig, point: [Option<f64>; 4]) -> Result<AnalyticRow> {
    let mut point_cfg = cfg.clone();
    point_cfg.theta_deg = point;
    let exp = point_cfg.experiment()?;
    let th = |i| definite(&point, i);
    let (a, o) = match formula {
        Formula::General => (
            analytic::quad_probability(&exp, 0.0)?.value,
            oracle::quad_probability(&exp, 0.0)?,
        ),
        Formula::AllPresent => (
            analytic::quad_coincidence_prob(th(0)?, th(1)?, th(2)?, th(3)?),
            oracle::quad_probability(&exp, 0.0)?,
        ),
        Formula::NoLeft => (
            analytic::prob_no_left_polarizers(th(2)?, th(3)?, &exp.frequencies, &exp.geometry, &exp.timing),
            oracle::quad_probability(&exp, 0.0)?,
        ),
        Formula::NoRight => (
            analytic::prob_no_right_polarizers(th(0)?, th(1)?, &exp.frequencies, &exp.geometry, &exp.timing),
            oracle::quad_probability(&exp, 0.0)?,
        ),
        Formula::SameBeam => (
            analytic::prob_both_same_beam(th(0)?, th(1)?, th(2)?),
            oracle::same_beam_moment(&exp, th(0)?, th(1)?, th(2)?)?,
        ),
        Formula::ChannelSum => {
            let (t1, t2) = (th(0)?, th(1)?);
            let one = oracle::one_one_channel_no_right(&exp, t1, t2, 0.0)?;
            let two = oracle::two_photon_channels_no_right(&exp, t1, t2, 0.0)?;
            (
                analytic::prob_one_one_channel_no_right(t1, t2) + analytic::prob_two_photon_channels_no_right(t1, t2),
                one + two,
            )
        }
    };
    Ok(AnalyticRow {
        theta_deg: point,
        analytic: a,
        oracle: o,
    })
}

fn formula_name(formula: Formula) -> &'static str {
    match formula {
        Formula::General => "general",
        Formula::AllPresent => "all-present",
        Formula::NoLeft => "no-left",
        Formula::NoRight => "no-right",
        Formula::SameBeam => "same-beam",
        Formula::ChannelSum => "channel-sum",
    }
}

fn table(formula: Formula, cfg: &RunConfig, grid: &[f64], theta: Option<&[String]>) -> Result<Vec<AnalyticRow>> {
    let present = mask(formula, cfg);
    let points = match theta {
        Some(list) => {
            if list.len() != 4 {
                bail!("--theta needs four values, got {}", list.len());
            }
            let mut p = [None; 4];
            for (i, s) in list.iter().enumerate() {
                let s = s.trim();
                if present[i] && s != "absent" {
                    p[i] = Some(s.parse::<f64>().with_context(|| format!("theta{} = `{s}`", i + 1))?);
                }
            }
            vec![p]
        }
        None => grid_points(present, grid),
    };
    points.into_iter().map(|p| evaluate(formula, cfg, p)).collect()
}

pub fn analytic(common: &Common, formula: Formula, theta: Option<&[String]>) -> Result<bool> {
    let cfg = load_config(common)?;
    let grid_spec = common.grid.as_deref().unwrap_or("0:90:5");
    let grid = parse_grid(grid_spec)?;
    let rows = table(formula, &cfg, &grid, theta)?;
    let max_diff = rows.iter().map(AnalyticRow::abs_diff).fold(0.0, f64::max);
    let manifest = RunManifest::new("analytic", &cfg)
        .note("formula", formula_name(formula))
        .note("grid_deg", grid_spec)
        .note("rows", rows.len())
        .note("max_abs_diff", report::num(max_diff));
    emit(common.out.as_deref(), &report::analytic_csv(&manifest, &rows))?;
    eprintln!("{} rows, max |diff| = {max_diff:e}", rows.len());
    Ok(true)
}

pub fn wavepacket(
    common: &Common,
    taus: Option<&str>,
    tau34: Option<&str>,
    theta_diff: &str,
    order: usize,
) -> Result<bool> {
    let cfg = load_config(common)?;
    let default = common.grid.as_deref().unwrap_or("0:2:10");
    let taus = parse_grid(taus.unwrap_or(default))?;
    let tau34s = parse_grid(tau34.unwrap_or(default))?;
    let thetas: Vec<f64> = parse_grid(theta_diff)?.into_iter().map(f64::to_radians).collect();
    let quad = SpectralQuadrature::new(order)?;
    let mut rows = wavepacket::sweep(cfg.coherence_time, cfg.omega, &taus, &tau34s, &thetas, &quad)?;
    for r in &mut rows {
        r.theta_diff = r.theta_diff.to_degrees();
    }
    let bound = wavepacket::bell_region_bound(cfg.coherence_time)?;
    let max_err = rows.iter().map(|r| r.quad_rel_err).fold(0.0, f64::max);
    let manifest = RunManifest::new("wavepacket", &cfg)
        .note("theta_diff_unit", "deg")
        .note("quadrature_order", order)
        .note("bell_region_product_computed", report::num(bound.x_star))
        .note("bell_region_product_bisection", report::num(bound.x_star_bisection))
        .note("bell_region_product_quoted", report::num(bound.quoted))
        .note("bell_region_relative_discrepancy", report::num(bound.relative_discrepancy))
        .note("max_quad_rel_err", report::num(max_err));
    emit(common.out.as_deref(), &report::sweep_csv(&manifest, &rows))?;
    eprintln!(
        "{} points, max quadrature relative error {max_err:e}; Bell region tau_s tau34 < {:.6} T^2 (quoted {})",
        rows.len(),
        bound.x_star,
        bound.quoted
    );
    Ok(true)
}

fn histogram_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}_hist.csv"))
}

pub fn montecarlo(common: &Common, n_events: Option<u64>, hist: Option<&Path>) -> Result<bool> {
    let mut cfg = load_config(common)?;
    if let Some(n) = n_events {
        cfg.n_events = n;
    }
    let mc = cfg.monte_carlo()?;
    let stats = montecarlo::run(&mc)?;
    let manifest = RunManifest::new("montecarlo", &cfg);
    emit(common.out.as_deref(), &report::montecarlo_summary(&manifest, &stats))?;
    let hist_path = hist.map(Path::to_path_buf).or_else(|| common.out.as_deref().map(histogram_path));
    if let Some(path) = hist_path {
        emit(Some(&path), &report::histogram_csv(&manifest, &stats.histogram))?;
    }
    if let Some((v, err)) = stats.visibility {
        eprintln!("{} in-window quadruples, visibility {v:.5} +- {err:.5}", stats.n_in_window);
    }
    Ok(true)
}

pub fn chsh(common: &Common, n_events: Option<u64>, settings_deg: &[f64], analytic: bool, lhv: bool) -> Result<bool> {
    let mut cfg = load_config(common)?;
    if let Some(n) = n_events {
        cfg.n_events = n;
    }
    let [a, ap, b, bp] = settings_deg else {
        bail!("--settings needs four angles");
    };
    let settings = ChshSettings::new(a.to_radians(), ap.to_radians(), b.to_radians(), bp.to_radians());
    let (mode, value, manifest) = if analytic {
        let src = CorrelationSource::analytic(bell::one_one_left_probability);
        ("analytic", bell::chsh_s(&src, &settings)?, RunManifest::new("chsh", &cfg))
    } else if lhv {
        let seed = cfg.seed.context("the LHV baseline needs --seed")?;
        let r = bell::lhv_baseline(cfg.n_events, seed, 8, &settings, LhvLambda::Uniform);
        let manifest = RunManifest::new("chsh", &cfg)
            .note("lhv_visibility", report::num(r.visibility))
            .note("lhv_visibility_stderr", report::num(r.visibility_stderr));
        ("lhv", r.chsh, manifest)
    } else {
        let mc = cfg.monte_carlo()?;
        let run = montecarlo::chsh_experiment(&mc, settings)?;
        let manifest = RunManifest::new("chsh", &cfg)
            .note("n_in_window", run.stats.n_in_window)
            .note("window12", "inf");
        ("montecarlo", run.value, manifest)
    };
    let manifest = manifest.note("mode", mode);
    emit(common.out.as_deref(), &report::chsh_csv(&manifest, &settings, &value))?;
    match value.stderr {
        Some(err) => eprintln!("S = {:.6} +- {err:.6}", value.s),
        None => eprintln!("S = {:.12}", value.s),
    }
    Ok(true)
}

struct Check {
    name: String,
    passed: usize,
    total: usize,
    worst: f64,
}

fn check_formula(formula: Formula, cfg: &RunConfig, grid: &[f64]) -> Result<Check> {
    let rows = table(formula, cfg, grid, None)?;
    let worst = rows.iter().map(AnalyticRow::abs_diff).fold(0.0, f64::max);
    Ok(Check {
        name: formula_name(formula).to_string(),
        passed: rows.iter().filter(|r| r.abs_diff() < ORACLE_TOL).count(),
        total: rows.len(),
        worst,
    })
}

pub fn oracle_check(common: &Common) -> Result<bool> {
    let grid = parse_grid(common.grid.as_deref().unwrap_or("0:90:5"))?;
    let ideal = RunConfig::default();
    let mut checks = Vec::new();
    for formula in [
        Formula::AllPresent,
        Formula::NoLeft,
        Formula::NoRight,
        Formula::SameBeam,
        Formula::ChannelSum,
    ] {
        checks.push(check_formula(formula, &ideal, &grid)?);
    }
    let mut unbalanced = load_config(common)?;
    if common.config.is_none() && common.overrides.is_empty() {
        unbalanced.tx = 0.7;
        unbalanced.rx = 0.3;
        unbalanced.ty = 0.4;
        unbalanced.ry = 0.6;
        unbalanced.omega[3] *= 1.0 + 1e-6;
        unbalanced.timing.t3 = 1e-15;
    }
    let mut general = check_formula(Formula::General, &unbalanced, &grid)?;
    general.name = "general-config".into();
    checks.push(general);

    // golden-ratio sequence of angles on [0, pi)
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let witness: Vec<f64> = (1..=100)
        .map(|k| bell::zero_coincidence_witness((k as f64 * phi).fract() * std::f64::consts::PI))
        .collect();
    checks.push(Check {
        name: "zero-coincidence".into(),
        passed: witness.iter().filter(|w| w.abs() < 1e-14).count(),
        total: witness.len(),
        worst: witness.iter().map(|w| w.abs()).fold(0.0, f64::max),
    });

    let mut text = String::new();
    let mut ok = true;
    for c in &checks {
        let status = if c.passed == c.total { "OK" } else { "FAIL" };
        ok &= c.passed == c.total;
        text.push_str(&format!(
            "{}: {}/{} grid points {status} (max |diff| {:e})\n",
            c.name, c.passed, c.total, c.worst
        ));
    }
    text.push_str(if ok { "oracle check passed\n" } else { "oracle check FAILED\n" });
    emit(common.out.as_deref(), &text)?;
    Ok(ok)
}
