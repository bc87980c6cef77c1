//! The four commands. Each returns its results, deviations and CSV table;
//! the caller wraps them into a report.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::Serialize;
use serde_json::{json, Value};

use super::config::{CheckConfig, ClassicalConfig, ModelConfig, PathIntegralConfig, SpectrumConfig, SpectrumMethod};
use crate::dynamics::{
    angular_momenta, curvilinear_to_reduced, hamiltonian_value, integrate_embedded_oracle, integrate_reduced_with,
    lift_state, trajectory_deviation, EmbeddedTrajectory, PhaseState, ReducedOptions, Trajectory,
};
use crate::error::{Result, RotorError};
use crate::geometry::{Chart, ModelParams};
use crate::pathintegral::{bump_family, extract_effective_potentials, sample_radii, PotentialTable, Prescription};
use crate::spectra::{
    assemble, compare_with_reference, compute_spectrum, extrapolate, level_count, reference_spectrum, LanczosOptions,
    LevelMatch, Method, SpectralGrid, SpectrumResult,
};
use crate::suites::{run_suite, Expect};

/// What a command hands back to the report writer.
#[derive(Debug, Clone)]
pub struct CommandResult {
    pub results: Value,
    pub max_deviations: BTreeMap<String, f64>,
    pub pass: bool,
    pub csv: String,
    /// Extra files to write, path and contents.
    pub files: Vec<(PathBuf, String)>,
    /// One-line human summary.
    pub summary: String,
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("results serialize")
}

fn csv_table(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf8")
}

#[derive(Debug, Serialize)]
struct SpectrumRun {
    resolution: Vec<usize>,
    method: String,
    ground_state: f64,
    clusters: Vec<(f64, usize)>,
    levels: Vec<LevelMatch>,
    pass: bool,
    result: SpectrumResult,
}

pub fn spectrum(model: &ModelConfig, cfg: &SpectrumConfig, seed: u64) -> Result<CommandResult> {
    let p = model.params()?;
    if cfg.res.is_empty() {
        return Err(RotorError::Config("at least one resolution is required".into()));
    }
    if cfg.levels == 0 {
        return Err(RotorError::Config("levels must be at least 1".into()));
    }
    let method = match cfg.method {
        SpectrumMethod::Sectors => Method::Dense,
        SpectrumMethod::DenseTensor => Method::DenseTensor,
        SpectrumMethod::Lanczos => Method::Iterative(LanczosOptions { seed, ..LanczosOptions::default() }),
    };
    let reference = reference_spectrum(cfg.levels - 1, &p)?;
    let k = level_count(cfg.levels, &p);
    let mut res = cfg.res.clone();
    res.sort_unstable();
    let mut runs = Vec::new();
    for &r in &res {
        let op = assemble(&SpectralGrid::new(&p, r)?)?;
        let result = compute_spectrum(&op, k, &method)?;
        let levels = compare_with_reference(&result.clusters, &reference, cfg.rel_tol, &p);
        let ground_state = result.eigenvalues[0];
        let pass = levels.iter().all(|m| m.pass)
            && result.clusters.len() == reference.len()
            && ground_state.abs() < cfg.e0_tol;
        runs.push(SpectrumRun {
            resolution: result.resolution.clone(),
            method: result.method.clone(),
            ground_state,
            clusters: result.clusters.iter().map(|c| (c.value, c.multiplicity)).collect(),
            levels,
            pass,
            result,
        });
    }
    let extrapolated = if runs.len() >= 3 {
        let all: Vec<SpectrumResult> = runs.iter().map(|r| r.result.clone()).collect();
        Some(extrapolate(&all)?)
    } else {
        None
    };
    let level_err = runs.iter().flat_map(|r| r.levels.iter().map(|m| m.relative_error)).fold(0.0, f64::max);
    let e0 = runs.iter().map(|r| r.ground_state.abs()).fold(0.0, f64::max);
    let pass = runs.iter().all(|r| r.pass);
    let csv = csv_table(
        &["resolution", "index", "eigenvalue", "residual", "cluster"],
        runs.iter().flat_map(|run| {
            let mut cluster_of = Vec::new();
            for (c, cl) in run.result.clusters.iter().enumerate() {
                cluster_of.extend(std::iter::repeat_n(c, cl.multiplicity));
            }
            let res = run.resolution[0];
            run.result
                .eigenvalues
                .iter()
                .zip(&run.result.residuals)
                .enumerate()
                .map(move |(i, (v, r))| {
                    vec![res.to_string(), i.to_string(), format!("{v:e}"), format!("{r:e}"), cluster_of[i].to_string()]
                })
                .collect::<Vec<_>>()
        }),
    );
    let summary = format!(
        "spectrum D={} at res {:?}: {} (worst level error {level_err:.1e}, |E0| <= {e0:.1e})",
        p.dim(),
        res,
        if pass { "all levels match" } else { "MISMATCH" }
    );
    Ok(CommandResult {
        results: json!({ "reference": reference, "runs": to_value(&runs), "extrapolated": extrapolated }),
        max_deviations: BTreeMap::from([("level_relative_error".into(), level_err), ("ground_state".into(), e0)]),
        pass,
        csv,
        files: Vec::new(),
        summary,
    })
}

pub fn check(model: &ModelConfig, cfg: &CheckConfig, seed: u64) -> Result<CommandResult> {
    let suite = cfg.suite()?;
    let p = model.params()?;
    let report = run_suite(suite, &p, &cfg.options(seed))?;
    let max_deviations =
        report.rows.iter().filter(|r| r.expect == Expect::Below).map(|r| (r.name.clone(), r.deviation)).collect();
    let csv = csv_table(
        &["check", "deviation", "tolerance", "expect", "pass"],
        report.rows.iter().map(|r| {
            let expect = match r.expect {
                Expect::Below => "below",
                Expect::Above => "above",
            };
            vec![
                r.name.clone(),
                format!("{:e}", r.deviation),
                format!("{:e}", r.tolerance),
                expect.into(),
                r.pass.to_string(),
            ]
        }),
    );
    let summary = format!(
        "check {suite}: {} (max deviation {:.1e})",
        if report.pass() { "pass" } else { "FAIL" },
        report.max_deviation()
    );
    Ok(CommandResult {
        results: to_value(&report),
        max_deviations,
        pass: report.pass(),
        csv,
        files: Vec::new(),
        summary,
    })
}

/// Great circle through `x0` with velocity `v0`, the closed-form geodesic.
fn great_circle(x0: &[f64], v0: &[f64], t: f64, p: &ModelParams) -> Vec<f64> {
    let speed = v0.iter().map(|v| v * v).sum::<f64>().sqrt();
    if speed == 0.0 {
        return x0.to_vec();
    }
    let w = speed / p.radius();
    x0.iter().zip(v0).map(|(x, v)| x * (w * t).cos() + v / w * (w * t).sin()).collect()
}

#[derive(Debug, Serialize)]
struct ClassicalSummary {
    steps: usize,
    initial_reduced: PhaseState,
    energy: f64,
    reduced_vs_oracle: f64,
    reduced_vs_great_circle: f64,
    oracle_vs_great_circle: f64,
    energy_drift: f64,
    angular_momentum_drift: f64,
    oracle_energy_drift: f64,
    max_radius_fraction: f64,
}

fn strided(t: &Trajectory, stride: usize) -> Trajectory {
    let n = t.states.len();
    Trajectory {
        states: t
            .states
            .iter()
            .enumerate()
            .filter(|(i, _)| i % stride == 0 || i + 1 == n)
            .map(|(_, s)| s.clone())
            .collect(),
    }
}

fn embedded_csv(t: &EmbeddedTrajectory, stride: usize) -> String {
    let d = t.states.first().map_or(0, |s| s.x.len());
    let mut header: Vec<String> = vec!["t".into()];
    header.extend((1..=d).map(|i| format!("x{i}")));
    header.extend((1..=d).map(|i| format!("v{i}")));
    let h: Vec<&str> = header.iter().map(String::as_str).collect();
    let n = t.states.len();
    csv_table(
        &h,
        t.states.iter().enumerate().filter(|(i, _)| i % stride == 0 || i + 1 == n).map(|(_, s)| {
            std::iter::once(s.t)
                .chain(s.x.iter().copied())
                .chain(s.v.iter().copied())
                .map(|a| format!("{a:e}"))
                .collect()
        }),
    )
}

pub fn classical(model: &ModelConfig, cfg: &ClassicalConfig) -> Result<CommandResult> {
    let p = model.params()?;
    if cfg.stride == 0 {
        return Err(RotorError::Config("stride must be at least 1".into()));
    }
    if !(cfg.margin > 0.0 && cfg.margin < 1.0) {
        return Err(RotorError::Config(format!("margin {} must lie in (0, 1)", cfg.margin)));
    }
    let start = PhaseState::new(cfg.chart.chart(), cfg.q0.clone(), cfg.p0.clone(), 0.0, &p)?;
    let s0 = if start.chart == Chart::Hyperspherical { curvilinear_to_reduced(&start, &p)? } else { start };
    let opts = ReducedOptions { margin: cfg.margin, ..ReducedOptions::default() };
    let reduced = integrate_reduced_with(&s0, cfg.t_end, cfg.dt, &p, &opts)?;
    let (x0, v0) = lift_state(&s0, &p)?;
    let oracle = integrate_embedded_oracle(&x0, &v0, cfg.t_end, cfg.dt, &p)?;
    let deviation = trajectory_deviation(&reduced, &oracle, &p)?;

    let e0 = hamiltonian_value(&s0, &p)?;
    let l0 = angular_momenta(&x0, &v0);
    let e_floor = e0.abs().max(f64::MIN_POSITIVE);
    let l_floor = l0.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let (mut e_drift, mut l_drift, mut vs_circle, mut radius) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for s in &reduced.states {
        e_drift = e_drift.max((hamiltonian_value(s, &p)? - e0).abs() / e_floor);
        let (x, v) = lift_state(s, &p)?;
        let l = angular_momenta(&x, &v);
        l_drift = l_drift.max(l.iter().zip(&l0).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())) / l_floor);
        let exact = great_circle(&x0, &v0, s.t, &p);
        vs_circle = vs_circle.max(x.iter().zip(&exact).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())));
        radius = radius.max(s.q.iter().map(|q| q * q).sum::<f64>().sqrt() / p.radius());
    }
    let (mut oracle_circle, mut oracle_e) = (0.0f64, 0.0f64);
    let speed0: f64 = v0.iter().map(|v| v * v).sum();
    for s in &oracle.states {
        let exact = great_circle(&x0, &v0, s.t, &p);
        oracle_circle = oracle_circle.max(s.x.iter().zip(&exact).fold(0.0f64, |m, (a, b)| m.max((a - b).abs())));
        let speed: f64 = s.v.iter().map(|v| v * v).sum();
        oracle_e = oracle_e.max((0.5 * (speed - speed0)).abs() / e_floor);
    }
    let summary_data = ClassicalSummary {
        steps: reduced.states.len() - 1,
        initial_reduced: s0,
        energy: e0,
        reduced_vs_oracle: deviation,
        reduced_vs_great_circle: vs_circle,
        oracle_vs_great_circle: oracle_circle,
        energy_drift: e_drift,
        angular_momentum_drift: l_drift,
        oracle_energy_drift: oracle_e,
        max_radius_fraction: radius,
    };
    let pass = deviation < cfg.tolerance && e_drift < cfg.conservation_tol && l_drift < cfg.conservation_tol;
    let reduced_csv = strided(&reduced, cfg.stride).to_csv(&p)?;
    let mut files = Vec::new();
    if let Some(dir) = &cfg.trajectory_dir {
        let dir = PathBuf::from(dir);
        files.push((dir.join("reduced.csv"), reduced_csv.clone()));
        files.push((dir.join("embedded.csv"), embedded_csv(&oracle, cfg.stride)));
    }
    let summary = format!(
        "classical D={} over [0, {}]: {} (reduced vs oracle {deviation:.1e}, energy drift {e_drift:.1e}, L drift {l_drift:.1e})",
        p.dim(),
        cfg.t_end,
        if pass { "pass" } else { "FAIL" }
    );
    Ok(CommandResult {
        results: to_value(&summary_data),
        max_deviations: BTreeMap::from([
            ("reduced_vs_oracle".into(), deviation),
            ("energy_drift".into(), e_drift),
            ("angular_momentum_drift".into(), l_drift),
        ]),
        pass,
        csv: reduced_csv,
        files,
        summary,
    })
}

#[derive(Debug, Serialize)]
struct ModeTable {
    m: usize,
    table: PotentialTable,
}

pub fn pathintegral(cfg: &PathIntegralConfig) -> Result<CommandResult> {
    let p = ModelParams::new(2, 1.0, cfg.hbar)?;
    if cfg.m.is_empty() {
        return Err(RotorError::Config("at least one angular mode is required".into()));
    }
    if !(cfg.r_step > 0.0 && cfg.r_min > 0.0 && cfg.r_min <= cfg.r_max) {
        return Err(RotorError::Config(format!(
            "sample radii need 0 < r_min <= r_max and r_step > 0 (got {}, {}, {})",
            cfg.r_min, cfg.r_max, cfg.r_step
        )));
    }
    cfg.grid.validate()?;
    let radii = sample_radii(cfg.r_min, cfg.r_max, cfg.r_step);
    let mut modes = cfg.m.clone();
    modes.sort_unstable();
    modes.dedup();
    let mut tables = Vec::new();
    for &m in &modes {
        let family = bump_family(m, &cfg.grid)?;
        let table = extract_effective_potentials(&family, &radii, &[cfg.prescription], &cfg.eps, &p)?.remove(0);
        tables.push(ModeTable { m, table });
    }
    let (key, worst, pass) = if cfg.prescription == Prescription::NaivePolar {
        let w = tables.iter().map(|t| (t.table.fit - 1.0).abs()).fold(0.0, f64::max);
        ("fit_deviation", w, w <= cfg.fit_tol)
    } else {
        let w = tables
            .iter()
            .flat_map(|t| t.table.samples.iter().map(|s| (s.delta_v / s.predicted).abs()))
            .fold(0.0, f64::max);
        ("relative_residual_potential", w, w <= cfg.cancel_tol)
    };
    let pass = pass && tables.iter().all(|t| !t.table.samples.is_empty());
    let csv = csv_table(
        &["m", "r", "delta_v", "predicted", "relative_error"],
        tables.iter().flat_map(|t| {
            t.table.samples.iter().map(move |s| {
                vec![
                    t.m.to_string(),
                    format!("{:e}", s.r),
                    format!("{:e}", s.delta_v),
                    format!("{:e}", s.predicted),
                    format!("{:e}", s.relative_error),
                ]
            })
        }),
    );
    let fits: Vec<String> = tables.iter().map(|t| format!("m={}: {:.4}", t.m, t.table.fit)).collect();
    let summary = format!(
        "pathintegral {}: {} (8r^2 dV/hbar^2 {}; {key} {worst:.1e})",
        serde_json::to_value(cfg.prescription).expect("serializes").as_str().unwrap_or("?"),
        if pass { "pass" } else { "FAIL" },
        fits.join(", ")
    );
    Ok(CommandResult {
        results: json!({ "radii": radii, "tables": to_value(&tables) }),
        max_deviations: BTreeMap::from([(key.to_string(), worst)]),
        pass,
        csv,
        files: Vec::new(),
        summary,
    })
}
