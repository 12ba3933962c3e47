use qgeom::alpha_fs::{case1_tensor, case2_tensor, dual_connections};
use qgeom::biortho::{nh_connections, nh_fs_tensor, NhKind};
use qgeom::checks::{self, CheckOutcome, Comparison};
use qgeom::fs_core::fs_tensor;
use qgeom::linalg::{sandwich, CMat, C64};
use qgeom::models::{self, pauli_z, pt_two_level, spin_field, Model, NonHermitianModelSpec, SharedFamily};
use qgeom::qng::{
    qng_step_nh_dual, rr_cost, rr_variational_eigensolver, run_qng, CostKind, CostSpec, OptimizerState, OptimizerTrace, StepRecord, Termination,
};
use qgeom::state_model::{evaluate, Differentiator, Order};
use qgeom::tensor::{DualConnectionPair, GeometricTensor};
use qgeom::GeomError;
use rayon::prelude::*;

use crate::config::{Command, Cost, Deriv, Kind, OperatorSpec, RunConfig};
use crate::error::CliError;
use crate::output::{emit, Cell, Table};

pub fn run(cfg: &RunConfig) -> Result<(), CliError> {
    match cfg.command {
        Command::Tensor => emit(&tensor_table(cfg, false)?, cfg),
        Command::Sweep => emit(&tensor_table(cfg, true)?, cfg),
        Command::Connections => emit(&connection_table(cfg)?, cfg),
        Command::Optimize => emit(&optimize_table(cfg)?, cfg),
        Command::Validate => validate(cfg),
        Command::Models => {
            print!("{}", models_text());
            Ok(())
        }
    }
}

struct Setup {
    model: Model,
    points: Vec<Vec<f64>>,
    diff: Differentiator,
}

fn setup(cfg: &RunConfig) -> Result<Setup, CliError> {
    let entry = models::lookup(&cfg.model).map_err(|e| CliError::Config(e.to_string()))?;
    let model = (entry.build)();
    let n = model.dim();
    let points = match &cfg.grid {
        Some(axes) => {
            if axes.len() != n {
                return Err(CliError::Config(format!("grid has {} axes, model '{}' has {n} parameters", axes.len(), cfg.model)));
            }
            let mut pts = vec![Vec::new()];
            for ax in axes {
                let vals = ax.values();
                pts = pts.into_iter().flat_map(|p| vals.iter().map(move |v| [p.clone(), vec![*v]].concat())).collect();
            }
            pts
        }
        None => vec![cfg.params.clone().unwrap_or_else(|| entry.default_point.to_vec())],
    };
    if let Some(p) = points.iter().find(|p| p.len() != n) {
        return Err(CliError::Config(format!("point {p:?} has {} coordinates, model '{}' has {n} parameters", p.len(), cfg.model)));
    }
    let analytic_ok = match &model {
        Model::State(f) => f.analytic_jet(&points[0], Order::First).is_some(),
        Model::NonHermitian(_) => false,
    };
    let diff = match cfg.deriv {
        Deriv::Auto if analytic_ok => Differentiator::analytic(),
        Deriv::Auto | Deriv::Fd => Differentiator::central(),
        Deriv::Richardson => Differentiator::richardson(),
        Deriv::Analytic if analytic_ok => Differentiator::analytic(),
        Deriv::Analytic => return Err(CliError::Config(format!("model '{}' has no analytic derivatives", cfg.model))),
    };
    Ok(Setup { model, points, diff })
}

/// `(left, right)` families for a kind. Pure-state models serve as both sides.
fn pair_for(model: &Model, kind: Kind, band: usize) -> (SharedFamily, SharedFamily) {
    match model {
        Model::State(f) => (f.clone(), f.clone()),
        Model::NonHermitian(spec) => {
            let (l, r) = match kind {
                Kind::Lr | Kind::Rl => spec.biorthogonal_pair(band),
                _ => spec.unit_pair(band),
            };
            (std::sync::Arc::new(l), std::sync::Arc::new(r))
        }
    }
}

fn nh_kind(kind: Kind) -> Option<NhKind> {
    match kind {
        Kind::Lr => Some(NhKind::LR),
        Kind::Rl => Some(NhKind::RL),
        Kind::Ll => Some(NhKind::LL),
        Kind::Rr => Some(NhKind::RR),
        _ => None,
    }
}

/// `(kind, alpha)` combinations in output order; alpha-free kinds appear once with alpha 0.
fn combos(cfg: &RunConfig) -> Vec<(Kind, f64)> {
    cfg.kind
        .iter()
        .flat_map(|&k| if k.uses_alpha() { cfg.alpha.iter().map(|&a| (k, a)).collect() } else { vec![(k, 0.0)] })
        .collect()
}

fn tensor_for(model: &Model, kind: Kind, alpha: f64, band: usize, theta: &[f64], diff: &Differentiator) -> qgeom::Result<GeometricTensor> {
    let (left, right) = pair_for(model, kind, band);
    match kind {
        Kind::Fs => fs_tensor(right.as_ref(), theta, diff),
        Kind::Case1 => Ok(case1_tensor(right.as_ref(), theta, alpha, diff)?.tensor),
        Kind::Case2 => case2_tensor(right.as_ref(), theta, alpha, diff),
        k => nh_fs_tensor(left.as_ref(), right.as_ref(), theta, nh_kind(k).expect("non-Hermitian kind"), diff),
    }
}

fn index_columns(prefix: &str, n: usize, out: &mut Vec<String>) {
    for i in 0..n {
        for j in 0..n {
            out.push(format!("{prefix}.{i}{j}"));
        }
    }
}

fn lead_columns(n: usize) -> Vec<String> {
    let mut cols: Vec<String> = (0..n).map(|k| format!("theta.{k}")).collect();
    cols.push("alpha".into());
    cols.push("kind".into());
    cols
}

fn lead_cells(theta: &[f64], alpha: f64, kind: Kind) -> Vec<Cell> {
    let mut row: Vec<Cell> = theta.iter().map(|&t| Cell::Num(t)).collect();
    row.push(Cell::Num(alpha));
    row.push(Cell::Text(kind.as_str().into()));
    row
}

/// Evaluates `f` at every point in parallel and returns rows in point order. The
/// first failing point (in that order) becomes the error.
fn collect_rows<F>(points: &[Vec<f64>], f: F) -> Result<Vec<Vec<Cell>>, CliError>
where
    F: Fn(&[f64]) -> qgeom::Result<Vec<Vec<Cell>>> + Sync,
{
    let results: Vec<qgeom::Result<Vec<Vec<Cell>>>> = points.par_iter().map(|p| f(p)).collect();
    let mut rows = Vec::new();
    for (p, r) in points.iter().zip(results) {
        rows.extend(r.map_err(|e| CliError::at(e, p))?);
    }
    Ok(rows)
}

fn tensor_table(cfg: &RunConfig, with_curvature: bool) -> Result<Table, CliError> {
    let s = setup(cfg)?;
    let n = s.model.dim();
    let mut cols = lead_columns(n);
    for prefix in ["g", "omega", "gtilde", "omegatilde"] {
        index_columns(prefix, n, &mut cols);
    }
    if with_curvature {
        index_columns("curv.re", n, &mut cols);
        index_columns("curv.im", n, &mut cols);
    }
    let combos = combos(cfg);
    let rows = collect_rows(&s.points, |theta| {
        combos
            .iter()
            .map(|&(kind, alpha)| {
                let t = tensor_for(&s.model, kind, alpha, cfg.band, theta, &s.diff)?;
                let mut row = lead_cells(theta, alpha, kind);
                for m in [t.g(), t.omega(), t.g_tilde(), t.omega_tilde()] {
                    row.extend(m.transpose().iter().map(|&x| Cell::Num(x)));
                }
                if with_curvature {
                    let c = t.curvature();
                    row.extend(c.transpose().iter().map(|z| Cell::Num(z.re)));
                    row.extend(c.transpose().iter().map(|z| Cell::Num(z.im)));
                }
                Ok(row)
            })
            .collect()
    })?;
    Ok(Table { columns: cols, rows, summary: Vec::new() })
}

fn connections_for(model: &Model, kind: Kind, alpha: f64, band: usize, theta: &[f64], diff: &Differentiator) -> qgeom::Result<DualConnectionPair> {
    let (left, right) = pair_for(model, kind, band);
    match kind {
        Kind::Fs => dual_connections(right.as_ref(), theta, 0.0, diff),
        Kind::Case2 => dual_connections(right.as_ref(), theta, alpha, diff),
        Kind::Case1 => Err(GeomError::Unsupported("connections are defined for the Case-2 pair only".into())),
        k => Ok(nh_connections(left.as_ref(), right.as_ref(), theta, nh_kind(k).expect("non-Hermitian kind"), diff)?.pair),
    }
}

fn connection_table(cfg: &RunConfig) -> Result<Table, CliError> {
    if cfg.kind.contains(&Kind::Case1) {
        return Err(CliError::Config("connections are available for kinds fs, case2, lr, rl, ll, rr".into()));
    }
    let s = setup(cfg)?;
    let n = s.model.dim();
    let mut cols = lead_columns(n);
    for name in ["gamma1", "gamma2"] {
        for part in ["re", "im"] {
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        cols.push(format!("{name}.{i}{j}{k}.{part}"));
                    }
                }
            }
        }
    }
    let combos = combos(cfg);
    let rows = collect_rows(&s.points, |theta| {
        combos
            .iter()
            .map(|&(kind, alpha)| {
                let p = connections_for(&s.model, kind, alpha, cfg.band, theta, &s.diff)?;
                let mut row = lead_cells(theta, alpha, kind);
                for field in [&p.gamma1, &p.gamma2] {
                    for part in [0, 1] {
                        for i in 0..n {
                            for j in 0..n {
                                for k in 0..n {
                                    let z = field.get(i, j, k);
                                    row.push(Cell::Num(if part == 0 { z.re } else { z.im }));
                                }
                            }
                        }
                    }
                }
                Ok(row)
            })
            .collect()
    })?;
    Ok(Table { columns: cols, rows, summary: Vec::new() })
}

fn operator_matrix(op: &OperatorSpec) -> CMat {
    match op.name.as_str() {
        "pt_two_level" => pt_two_level(op.args[0], op.args[1]),
        "spin_field" => spin_field(op.args[0], op.args[1]),
        _ => pauli_z(),
    }
}

fn optimizer_state(cfg: &RunConfig, s: &Setup) -> OptimizerState {
    let mut st = OptimizerState::new(s.points[0].clone(), cfg.eta);
    st.eta_i = cfg.eta_i;
    st.max_iters = cfg.max_iters;
    st.grad_tol = cfg.grad_tol;
    st.diff = s.diff;
    st
}

fn trace_columns(n: usize) -> Vec<String> {
    let mut cols = vec!["iter".to_string()];
    cols.extend((0..n).map(|k| format!("theta.{k}")));
    cols.extend(["cost.re", "cost.im", "grad_norm", "condition", "incompatibility"].map(String::from));
    cols
}

fn trace_row(r: &StepRecord) -> Vec<Cell> {
    let mut row = vec![Cell::Num(r.iter as f64)];
    row.extend(r.theta.iter().map(|&t| Cell::Num(t)));
    row.extend([r.cost.re, r.cost.im, r.grad_norm, r.condition, r.incompatibility].map(Cell::Num));
    row
}

fn trace_table(n: usize, trace: &OptimizerTrace, final_cost: C64) -> Table {
    let mut t = Table::new(trace_columns(n));
    t.rows = trace.records.iter().map(trace_row).collect();
    if !trace.records.is_empty() {
        t.summary.push(("termination".into(), Cell::Text(trace.termination.as_str().into())));
        t.summary.push(("iterations".into(), Cell::Num(trace.records.len() as f64)));
        for (k, v) in trace.final_theta.iter().enumerate() {
            t.summary.push((format!("final.theta.{k}"), Cell::Num(*v)));
        }
        t.summary.push(("final.cost.re".into(), Cell::Num(final_cost.re)));
        t.summary.push(("final.cost.im".into(), Cell::Num(final_cost.im)));
    }
    t
}

fn state_family(model: &Model, cost: Cost) -> Result<SharedFamily, CliError> {
    match model {
        Model::State(f) => Ok(f.clone()),
        Model::NonHermitian(_) => Err(CliError::Config(format!("cost '{}' needs a pure-state model", cost.as_str()))),
    }
}

fn optimize_table(cfg: &RunConfig) -> Result<Table, CliError> {
    let s = setup(cfg)?;
    let n = s.model.dim();
    let start = s.points[0].clone();
    let st = optimizer_state(cfg, &s);
    let default_op = match cfg.cost {
        Cost::Hermitian => "pauli_z",
        Cost::Biortho | Cost::Rr => "pt_two_level:0.6,1.0",
    };
    let op = cfg.operator.clone().unwrap_or_else(|| default_op.parse().expect("default operator parses"));
    let h = operator_matrix(&op);
    match cfg.cost {
        Cost::Hermitian => {
            let fam = state_family(&s.model, cfg.cost)?;
            let cost = CostSpec::new(h.clone(), CostKind::HermitianExpectation).map_err(|e| CliError::Config(e.to_string()))?;
            let trace = run_qng(fam.as_ref(), &cost, &st).map_err(|e| CliError::at(e, &start))?;
            let psi = evaluate(fam.as_ref(), &trace.final_theta).map_err(|e| CliError::at(e, &trace.final_theta))?.amps;
            Ok(trace_table(n, &trace, sandwich(&psi, &h, &psi)))
        }
        Cost::Rr => {
            let fam = state_family(&s.model, cfg.cost)?;
            let trace = rr_variational_eigensolver(fam.as_ref(), &h, &st).map_err(|e| CliError::at(e, &start))?;
            let trace = trace.into_result().map_err(|e| CliError::at(e, &start))?;
            let psi = evaluate(fam.as_ref(), &trace.final_theta).map_err(|e| CliError::at(e, &trace.final_theta))?.amps;
            let (e, l) = rr_cost(&psi, &h);
            let mut t = trace_table(n, &trace, C64::from(l));
            if !trace.records.is_empty() {
                t.summary.push(("final.energy.re".into(), Cell::Num(e.re)));
                t.summary.push(("final.energy.im".into(), Cell::Num(e.im)));
            }
            Ok(t)
        }
        Cost::Biortho => {
            let Model::NonHermitian(spec) = &s.model else {
                return Err(CliError::Config("cost 'biortho' needs a non-Hermitian model".into()));
            };
            let kind = cfg.kind.iter().find_map(|&k| nh_kind(k).map(|nk| (k, nk))).unwrap_or((Kind::Lr, NhKind::LR));
            run_dual(spec, kind, cfg, &h, st, n)
        }
    }
}

/// Follows the real-part step of the dual scheme and logs the imaginary-part step
/// only through the incompatibility angle.
fn run_dual(spec: &NonHermitianModelSpec, kind: (Kind, NhKind), cfg: &RunConfig, h: &CMat, mut st: OptimizerState, n: usize) -> Result<Table, CliError> {
    let (left, right) = pair_for(&Model::NonHermitian(spec.clone()), kind.0, cfg.band);
    let cost = CostSpec::new(h.clone(), CostKind::BiorthoExpectation).map_err(|e| CliError::Config(e.to_string()))?;
    let mut records = Vec::new();
    let mut termination = Termination::MaxIterations;
    let mut last_cost = C64::from(f64::NAN);
    for iter in 0..st.max_iters {
        let theta = st.theta.clone();
        let step = qng_step_nh_dual(left.as_ref(), right.as_ref(), kind.1, &cost, &st).map_err(|e| CliError::at(e, &theta))?;
        last_cost = step.cost;
        records.push(StepRecord {
            iter,
            theta: theta.clone(),
            cost: step.cost,
            grad_norm: step.grad_norm,
            condition: step.condition_r,
            incompatibility: step.incompatibility,
        });
        if step.grad_norm < st.grad_tol {
            termination = Termination::Converged;
            break;
        }
        let delta = step.delta_r.map_err(|e| CliError::at(e, &theta))?;
        for (t, d) in st.theta.iter_mut().zip(delta.iter()) {
            *t += d;
        }
    }
    let trace = OptimizerTrace { records, final_theta: st.theta, termination };
    Ok(trace_table(n, &trace, last_cost))
}

fn validate(cfg: &RunConfig) -> Result<(), CliError> {
    let selected: Vec<&'static checks::CheckSpec> = match &cfg.check {
        Some(name) => vec![checks::find(name).ok_or_else(|| {
            let names: Vec<&str> = checks::CHECKS.iter().map(|c| c.name).collect();
            CliError::Config(format!("unknown check '{name}' (known: {})", names.join(", ")))
        })?],
        None => checks::CHECKS.iter().collect(),
    };
    let outcomes: Vec<CheckOutcome> = selected.par_iter().map(|c| c.execute(cfg.tol_scale)).collect();
    print!("{}", validation_report(&outcomes));
    if cfg.out.is_some() {
        emit(&validation_table(&outcomes), cfg)?;
    }
    let failed: Vec<String> = outcomes.iter().filter(|o| !o.pass).map(|o| o.name.to_string()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::ChecksFailed(failed))
    }
}

fn bound(o: &CheckOutcome) -> String {
    match o.comparison {
        Comparison::Below => format!("< {:.1e}", o.tolerance),
        Comparison::Above => format!("> {:.1e}", o.tolerance),
    }
}

pub fn validation_report(outcomes: &[CheckOutcome]) -> String {
    let mut s = format!("{:<30} {:>5} {:>12} {:>10}  status\n", "check", "group", "residual", "bound");
    for o in outcomes {
        s.push_str(&format!(
            "{:<30} {:>5} {:>12.3e} {:>10}  {}{}\n",
            o.name,
            o.group,
            o.residual,
            bound(o),
            if o.pass { "PASS" } else { "FAIL" },
            o.error.as_ref().map(|e| format!(" ({e})")).unwrap_or_default()
        ));
    }
    let passed = outcomes.iter().filter(|o| o.pass).count();
    s.push_str(&format!("{passed}/{} checks passed\n", outcomes.len()));
    s
}

fn validation_table(outcomes: &[CheckOutcome]) -> Table {
    let mut t = Table::new(["check", "group", "residual", "tolerance", "comparison", "status"].map(String::from).to_vec());
    for o in outcomes {
        t.rows.push(vec![
            Cell::Text(o.name.into()),
            Cell::Num(o.group as f64),
            Cell::Num(o.residual),
            Cell::Num(o.tolerance),
            Cell::Text(match o.comparison {
                Comparison::Below => "below".into(),
                Comparison::Above => "above".into(),
            }),
            Cell::Text(if o.pass { "pass" } else { "fail" }.into()),
        ]);
    }
    t
}

pub fn models_text() -> String {
    let mut s = String::new();
    for e in models::REGISTRY {
        let pt: Vec<String> = e.default_point.iter().map(|x| format!("{x}")).collect();
        s.push_str(&format!("{:<16} params={} default=[{}]  {}\n", e.name, e.default_point.len(), pt.join(", "), e.description));
    }
    s
}
