//! Execution of each command on a resolved [`RunConfig`].

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;

use nonholonomic::connection::{connection, ConnectionResiduals};
use nonholonomic::curvature::curvature;
use nonholonomic::defects::{angle_gradient, burgers_vector_with, frank_angle_with, winding_integral_with, LoopSpec};
use nonholonomic::dynamics::{integrate, nonholonomic_variation, torsion_el_residual, Flow, TrajectoryState, VariationExpr};
use nonholonomic::pathintegral::{
    extract_spectrum, KernelEntry, KernelSettings, Manifold, MeasureMode, SlicedPropagator, SpectrumReport, SpectrumSettings,
};
use nonholonomic::{Chart, ChartKind, Mat, Tensor3, Tensor4};
use serde::Serialize;

use crate::config::{CommandKind, RunConfig};
use crate::error::CliError;
use crate::output::{num, Report, Table};

/// Runs the command of `config`. Relative paths resolve against `base`.
pub fn execute(config: &RunConfig, base: &Path) -> Result<Report, CliError> {
    match config.command {
        CommandKind::Tensors => tensors(config, base),
        CommandKind::Geodesic => trajectory(config, base, Flow::Geodesic),
        CommandKind::Autoparallel => trajectory(config, base, Flow::Autoparallel),
        CommandKind::Variation => variation(config, base),
        CommandKind::Burgers => burgers(config, base),
        CommandKind::Amplitude => amplitude(config),
        CommandKind::Spectrum => spectrum(config),
    }
}

fn point(config: &RunConfig, chart: &Chart, field: &str, v: &Option<Vec<f64>>) -> Result<Vec<f64>, CliError> {
    let v = v.clone().ok_or_else(|| CliError::Validation(format!("missing '{field}'")))?;
    if v.len() != chart.dim() {
        return Err(CliError::Validation(format!(
            "{} '{field}' has {} components, chart dimension is {}",
            config.command.as_str(),
            v.len(),
            chart.dim()
        )));
    }
    Ok(v)
}

#[derive(Serialize)]
struct ChartInfo {
    name: Option<String>,
    kind: ChartKind,
    dim: usize,
    params: BTreeMap<String, f64>,
}

fn chart_info(chart: &Chart) -> ChartInfo {
    ChartInfo {
        name: chart.name().map(str::to_owned),
        kind: chart.kind(),
        dim: chart.dim(),
        params: chart
            .param_names()
            .into_iter()
            .filter_map(|n| chart.param(n).map(|v| (n.to_owned(), v)))
            .collect(),
    }
}

#[derive(Serialize)]
struct TensorsResult {
    chart: ChartInfo,
    at: Vec<f64>,
    metric: Vec<Vec<f64>>,
    inverse_metric: Vec<Vec<f64>>,
    christoffel_first: Vec<Vec<Vec<f64>>>,
    christoffel: Vec<Vec<Vec<f64>>>,
    affine_connection: Vec<Vec<Vec<f64>>>,
    torsion: Vec<Vec<Vec<f64>>>,
    torsion_vector: Vec<f64>,
    contortion: Vec<Vec<Vec<f64>>>,
    cartan_curvature: Vec<Vec<Vec<Vec<f64>>>>,
    riemann_curvature: Vec<Vec<Vec<Vec<f64>>>>,
    ricci: Vec<Vec<f64>>,
    scalar_curvature: f64,
    einstein: Vec<Vec<f64>>,
    residuals: ConnectionResiduals<f64>,
}

fn push_mat(t: &mut Table, name: &str, m: &Mat<f64>) {
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            t.push(vec![name.into(), i.to_string(), j.to_string(), String::new(), String::new(), num(m[(i, j)])]);
        }
    }
}

fn push_t3(t: &mut Table, name: &str, x: &Tensor3<f64>) {
    let [a, b, c] = x.dims();
    for i in 0..a {
        for j in 0..b {
            for k in 0..c {
                t.push(vec![name.into(), i.to_string(), j.to_string(), k.to_string(), String::new(), num(x[(i, j, k)])]);
            }
        }
    }
}

fn push_t4(t: &mut Table, name: &str, x: &Tensor4<f64>) {
    let [a, b, c, d] = x.dims();
    for i in 0..a {
        for j in 0..b {
            for k in 0..c {
                for l in 0..d {
                    t.push(vec![
                        name.into(),
                        i.to_string(),
                        j.to_string(),
                        k.to_string(),
                        l.to_string(),
                        num(x[(i, j, k, l)]),
                    ]);
                }
            }
        }
    }
}

fn tensors(config: &RunConfig, base: &Path) -> Result<Report, CliError> {
    let chart = config.load_chart(base)?;
    let q = point(config, &chart, "at", &config.at)?;
    let c = connection(&chart, &q)?;
    let r = curvature(&chart, &q)?;

    let mut t = Table::new(["quantity", "i", "j", "k", "l", "value"]);
    push_mat(&mut t, "metric", &c.metric);
    push_mat(&mut t, "inverse_metric", &c.inverse_metric);
    push_t3(&mut t, "christoffel_first", &c.gamma_bar_first);
    push_t3(&mut t, "christoffel", &c.gamma_bar);
    push_t3(&mut t, "affine_connection", &c.gamma);
    push_t3(&mut t, "torsion", &c.torsion);
    push_t3(&mut t, "contortion", &c.contortion);
    push_t4(&mut t, "cartan_curvature", &r.cartan);
    push_t4(&mut t, "riemann_curvature", &r.riemann);
    push_mat(&mut t, "ricci", &r.ricci);
    push_mat(&mut t, "einstein", &r.einstein);
    let blank = || String::new();
    t.push(vec!["scalar_curvature".into(), blank(), blank(), blank(), blank(), num(r.scalar)]);

    let result = TensorsResult {
        chart: chart_info(&chart),
        at: q,
        metric: c.metric.to_rows(),
        inverse_metric: c.inverse_metric.to_rows(),
        christoffel_first: c.gamma_bar_first.to_nested(),
        christoffel: c.gamma_bar.to_nested(),
        affine_connection: c.gamma.to_nested(),
        torsion: c.torsion.to_nested(),
        torsion_vector: c.torsion_vector(),
        contortion: c.contortion.to_nested(),
        cartan_curvature: r.cartan.to_nested(),
        riemann_curvature: r.riemann.to_nested(),
        ricci: r.ricci.to_rows(),
        scalar_curvature: r.scalar,
        einstein: r.einstein.to_rows(),
        residuals: c.residuals(),
    };
    Ok(Report::new(&result, t))
}

#[derive(Serialize)]
struct TrajectoryResult {
    chart: ChartInfo,
    flow: Flow,
    samples: usize,
    truncated: Option<String>,
    energy_drift: f64,
    drift_flagged: bool,
    el_residual_max: f64,
    states: Vec<TrajectoryState<f64>>,
}

fn state_table(dim: usize, states: &[TrajectoryState<f64>]) -> Table {
    let mut header = vec!["t".to_owned()];
    header.extend((1..=dim).map(|i| format!("q{i}")));
    header.extend((1..=dim).map(|i| format!("qdot{i}")));
    let mut t = Table::new(header);
    for s in states {
        let mut row = vec![num(s.t)];
        row.extend(s.q.iter().map(|&x| num(x)));
        row.extend(s.qdot.iter().map(|&x| num(x)));
        t.push(row);
    }
    t
}

fn run_flow(config: &RunConfig, chart: &Chart, flow: Flow) -> Result<nonholonomic::dynamics::Trajectory<f64>, CliError> {
    let q0 = point(config, chart, "at", &config.at)?;
    let v0 = point(config, chart, "velocity", &config.velocity)?;
    let span = (config.t_start.unwrap_or(0.0), config.t_end.unwrap_or(1.0));
    Ok(integrate(chart, flow, &q0, &v0, span, config.step.unwrap_or(1e-3), &config.tolerances())?)
}

fn trajectory(config: &RunConfig, base: &Path, flow: Flow) -> Result<Report, CliError> {
    let chart = config.load_chart(base)?;
    let traj = run_flow(config, &chart, flow)?;
    let el = torsion_el_residual(&chart, &traj.states, config.mass.unwrap_or(1.0))?;
    let table = state_table(chart.dim(), &traj.states);
    let result = TrajectoryResult {
        chart: chart_info(&chart),
        flow,
        samples: traj.states.len(),
        truncated: traj.truncated,
        energy_drift: traj.energy_drift,
        drift_flagged: traj.drift_flagged,
        el_residual_max: el.max,
        states: traj.states,
    };
    Ok(Report::new(&result, table))
}

#[derive(Serialize)]
struct VariationResult {
    chart: ChartInfo,
    flow: Flow,
    deltaq: Vec<String>,
    truncated: Option<String>,
    delta_b_max: f64,
    delta_b_end: Vec<f64>,
    times: Vec<f64>,
    delta_q: Vec<Vec<f64>>,
    delta_b: Vec<Vec<f64>>,
}

fn variation(config: &RunConfig, base: &Path) -> Result<Report, CliError> {
    let chart = config.load_chart(base)?;
    let flow = config.flow.unwrap_or(Flow::Autoparallel);
    let traj = run_flow(config, &chart, flow)?;
    let exprs = config.deltaq.clone().unwrap_or_default();
    let expr = VariationExpr::new(&exprs, config.params.clone())?;
    let run = nonholonomic_variation(&chart, &traj.states, &expr)?;

    let d = chart.dim();
    let mut header = vec!["t".to_owned()];
    header.extend((1..=d).map(|i| format!("dq{i}")));
    header.extend((1..=d).map(|i| format!("db{i}")));
    let mut table = Table::new(header);
    for k in 0..run.times.len() {
        let mut row = vec![num(run.times[k])];
        row.extend(run.delta_q[k].iter().map(|&x| num(x)));
        row.extend(run.delta_b[k].iter().map(|&x| num(x)));
        table.push(row);
    }
    let delta_b_max = run.delta_b.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
    let result = VariationResult {
        chart: chart_info(&chart),
        flow,
        deltaq: exprs,
        truncated: traj.truncated,
        delta_b_max,
        delta_b_end: run.delta_b.last().cloned().unwrap_or_default(),
        times: run.times,
        delta_q: run.delta_q,
        delta_b: run.delta_b,
    };
    Ok(Report::new(&result, table))
}

#[derive(Serialize)]
struct Winding {
    integral: f64,
    number: f64,
}

#[derive(Serialize)]
struct BurgersResult {
    chart: ChartInfo,
    #[serde(rename = "loop")]
    loop_spec: LoopSpec,
    b: Vec<f64>,
    b_over_2pi: Vec<f64>,
    winding: Winding,
    frank_angle: f64,
}

fn burgers(config: &RunConfig, base: &Path) -> Result<Report, CliError> {
    let chart = config.load_chart(base)?;
    let lp = config.load_loop(base)?;
    if lp.dim() != chart.dim() {
        return Err(CliError::Validation(format!(
            "loop vertices have {} components, chart dimension is {}",
            lp.dim(),
            chart.dim()
        )));
    }
    if chart.dim() != 2 {
        return Err(CliError::Validation("burgers needs a planar chart".into()));
    }
    let tol = config.tolerances();
    let b = burgers_vector_with(&chart, &lp, &tol)?;
    let w = winding_integral_with(&angle_gradient(), &lp, &tol)?;
    let winding = Winding {
        integral: w,
        number: w / (2.0 * PI),
    };
    let frank = frank_angle_with(&chart, &lp, &tol)?;

    let mut t = Table::new(["quantity", "index", "value"]);
    for (i, x) in b.b.iter().enumerate() {
        t.push(vec!["b".into(), i.to_string(), num(*x)]);
    }
    for (i, x) in b.b_over_2pi.iter().enumerate() {
        t.push(vec!["b_over_2pi".into(), i.to_string(), num(*x)]);
    }
    t.push(vec!["winding_integral".into(), String::new(), num(winding.integral)]);
    t.push(vec!["winding_number".into(), String::new(), num(winding.number)]);
    t.push(vec!["frank_angle".into(), String::new(), num(frank)]);
    let result = BurgersResult {
        chart: chart_info(&chart),
        loop_spec: lp,
        b: b.b,
        b_over_2pi: b.b_over_2pi,
        winding,
        frank_angle: frank,
    };
    Ok(Report::new(&result, t))
}

#[derive(Serialize)]
struct Mode {
    m: usize,
    eigenvalue: f64,
    eigenvalue_sliced: f64,
    energy: f64,
}

#[derive(Serialize)]
struct AmplitudeResult {
    manifold: Manifold,
    measure: MeasureMode,
    epsilon: f64,
    slices: usize,
    kernel: KernelSettings,
    size: usize,
    entry_count: usize,
    row_sum_range: (f64, f64),
    row_profile: Vec<KernelEntry>,
    modes: Vec<Mode>,
}

/// Number of azimuthal modes summarised by `amplitude`.
const AMPLITUDE_MODES: usize = 4;

fn amplitude(config: &RunConfig) -> Result<Report, CliError> {
    let manifold = config.manifold.ok_or_else(|| CliError::Validation("missing 'manifold'".into()))?;
    let measure = config.measure.unwrap_or(MeasureMode::Qep);
    let cfg = config.short_time()?;
    let settings = KernelSettings::from(&config.tolerances());
    let slices = config.slices.unwrap_or(1);
    let prop = SlicedPropagator::build(manifold, &cfg, measure, settings)?.with_slices(slices);

    let half = manifold.periodic_points() / 2;
    let mut modes = Vec::new();
    for m in 0..AMPLITUDE_MODES.min(half + 1) {
        let block = prop.fourier_block(m);
        let lambda = block
            .complex_eigenvalues()
            .iter()
            .map(|z| z.re)
            .fold(f64::NEG_INFINITY, f64::max);
        if !(lambda > 0.0) {
            return Err(nonholonomic::GeomError::EigenFailure(format!(
                "leading eigenvalue {lambda:e} of block m = {m} is not positive"
            ))
            .into());
        }
        modes.push(Mode {
            m,
            eigenvalue: lambda,
            eigenvalue_sliced: lambda.powi(slices as i32),
            energy: -(cfg.hbar / cfg.epsilon) * lambda.ln(),
        });
    }

    let mut t = Table::new(["m", "eigenvalue", "eigenvalue_sliced", "energy"]);
    for md in &modes {
        t.push(vec![md.m.to_string(), num(md.eigenvalue), num(md.eigenvalue_sliced), num(md.energy)]);
    }
    let result = AmplitudeResult {
        manifold,
        measure,
        epsilon: cfg.epsilon,
        slices,
        kernel: settings,
        size: prop.size(),
        entry_count: prop.entry_count(),
        row_sum_range: prop.row_sum_range(),
        row_profile: prop.row_entries(0).to_vec(),
        modes,
    };
    Ok(Report::new(&result, t))
}

fn spectrum(config: &RunConfig) -> Result<Report, CliError> {
    let manifold = config.manifold.ok_or_else(|| CliError::Validation("missing 'manifold'".into()))?;
    let measure = config.measure.unwrap_or(MeasureMode::Qep);
    let cfg = config.short_time()?;
    let settings = SpectrumSettings {
        ladder: config.ladder.clone().unwrap_or_else(|| SpectrumSettings::default().ladder),
        n_levels: config.levels.unwrap_or(4),
        kernel: KernelSettings::from(&config.tolerances()),
        ..SpectrumSettings::default()
    };
    let report: SpectrumReport = extract_spectrum(manifold, &cfg, measure, &settings)?;

    let mut header: Vec<String> = ["level", "label", "degeneracy", "energy", "spread"].map(String::from).to_vec();
    header.extend(report.ladder.iter().map(|e| format!("raw_eps_{e}")));
    let mut t = Table::new(header);
    for (i, l) in report.levels.iter().enumerate() {
        let mut row = vec![
            i.to_string(),
            l.label.map(|x| x.to_string()).unwrap_or_default(),
            l.degeneracy.to_string(),
            num(l.energy),
            num(l.spread),
        ];
        row.extend(l.raw.iter().map(|&x| num(x)));
        t.push(row);
    }
    Ok(Report::new(&report, t))
}
