use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use flowmetric_core::assembler::{counterexample_probe, verify_global, write_samples_csv, CounterexampleConfig, GlobalMetric, VerifyOptions};
use flowmetric_core::critical::SeriesOptions;
use flowmetric_core::fields::parse_field_spec;
use flowmetric_core::pipeline::{construct_global, ConstructOptions};
use flowmetric_qms::{build_simplex_metric, check_gradient_structure, parse_generator_spec, GradientOptions};
use serde_json::{json, Value};

use crate::args::{BuildArgs, CounterexampleArgs, QmsArgs, VerifyArgs};
use crate::config::{self, FileConfig};
use crate::failure::{Failure, EXIT_CONDITION, EXIT_FAILED, EXIT_OK};
use crate::io;

/// A finished command: its report and exit code.
pub struct Outcome {
    pub report: Value,
    pub exit_code: i32,
}

fn emit_csv(path: Option<&Path>, gm: &GlobalMetric, grid: &[Vec<f64>]) -> Result<(), Failure> {
    let Some(path) = path else { return Ok(()) };
    let file = File::create(path).map_err(|e| Failure::io(format!("creating {}: {e}", path.display())))?;
    write_samples_csv(gm, grid, BufWriter::new(file)).map_err(|e| Failure::io(format!("writing {}: {e}", path.display())))
}

fn path_str(p: &Path) -> String {
    p.display().to_string()
}

pub fn build(a: &BuildArgs) -> Result<Outcome, Failure> {
    let file = FileConfig::load(a.common.config.as_deref())?;
    let fields = parse_field_spec(&io::read(&a.input)?)?;
    let dim = fields.dim();
    let mut opts = ConstructOptions {
        order: a.order.or(file.order).unwrap_or(config::DEFAULT_ORDER),
        grid: a.grid.or(file.grid).unwrap_or_else(|| config::default_grid(dim)),
        ..Default::default()
    };
    let tol = a.tol_residual.or(file.tol_residual).unwrap_or(config::DEFAULT_TOL_RESIDUAL);
    opts.verify.residual_tol = tol;
    opts.chart.residual_tol = tol;
    opts.chart.seed = a.common.seed.or(file.seed).unwrap_or(config::DEFAULT_SEED);

    let c = construct_global(&fields, &opts)?;
    if let Some(out) = &a.output {
        io::write(out, io::to_json(&c.metric).as_bytes())?;
    }
    emit_csv(a.emit_csv.as_deref(), &c.metric, &fields.domain().grid(opts.grid))?;
    let r = &c.report;
    let exit_code = if r.pass {
        EXIT_OK
    } else if !r.pairing_pass {
        EXIT_CONDITION
    } else {
        EXIT_FAILED
    };
    let report = json!({
        "command": "build",
        "status": if r.pass { "ok" } else { "verification_failed" },
        "exit_code": exit_code,
        "input": path_str(&a.input),
        "metric_output": a.output.as_deref().map(path_str),
        "dimension": dim,
        "settings": opts,
        "charts": { "total": c.metric.charts().len(), "critical": c.metric.charts().iter().filter(|ch| ch.is_critical()).count() },
        "critical_points": c.critical,
        "verification": r,
    });
    Ok(Outcome { report, exit_code })
}

pub fn verify(a: &VerifyArgs) -> Result<Outcome, Failure> {
    let file = FileConfig::load(a.common.config.as_deref())?;
    let gm: GlobalMetric =
        serde_json::from_str(&io::read(&a.input)?).map_err(|e| Failure::parse(format!("metric {}: {e}", a.input.display())))?;
    let grid_n = a.grid.or(file.grid).unwrap_or_else(|| config::default_grid(gm.dim()));
    let opts = VerifyOptions {
        residual_tol: a.tol_residual.or(file.tol_residual).unwrap_or(config::DEFAULT_TOL_RESIDUAL),
        ..Default::default()
    };
    let grid = gm.fields().domain().grid(grid_n);
    let r = verify_global(&gm, &grid, &opts);
    emit_csv(a.emit_csv.as_deref(), &gm, &grid)?;
    let exit_code = if r.pass {
        EXIT_OK
    } else if !r.pairing_pass {
        EXIT_CONDITION
    } else {
        EXIT_FAILED
    };
    let report = json!({
        "command": "verify",
        "status": if r.pass { "ok" } else { "verification_failed" },
        "exit_code": exit_code,
        "input": path_str(&a.input),
        "dimension": gm.dim(),
        "settings": { "grid": grid_n, "verify": opts },
        "verification": r,
    });
    Ok(Outcome { report, exit_code })
}

pub fn qms(a: &QmsArgs) -> Result<Outcome, Failure> {
    let file = FileConfig::load(a.common.config.as_deref())?;
    let gen = parse_generator_spec(&io::read(&a.input)?)?;
    let opts = GradientOptions {
        samples: a.samples.or(file.samples).unwrap_or(GradientOptions::default().samples),
        seed: a.common.seed.or(file.seed).unwrap_or(config::DEFAULT_SEED),
        ..Default::default()
    };
    let g = check_gradient_structure(&gen, &opts)?;
    let simplex = if a.simplex || file.simplex.unwrap_or(false) {
        let order = a.order.or(file.order).unwrap_or(config::DEFAULT_ORDER);
        Some(match build_simplex_metric(&gen, order, &SeriesOptions::default()) {
            Ok(s) => json!({
                "status": "ok",
                "order": s.order,
                "order_defect": s.order_defect,
                "base_metric": s.series.base_metric,
                "growth": s.series.growth,
                "hierarchy_residuals": s.series.hierarchy_residuals,
                "flow_matrix": flowmetric_core::rows::to_rows(&s.flow_matrix),
                "hessian_matrix": flowmetric_core::rows::to_rows(&s.hessian_matrix),
            }),
            Err(e) => {
                let f = Failure::from(e);
                json!({ "status": "failed", "order": order, "error": f })
            }
        })
    } else {
        None
    };
    let exit_code = if g.equivalence_holds { EXIT_OK } else { EXIT_FAILED };
    let report = json!({
        "command": "qms",
        "status": if g.equivalence_holds { "ok" } else { "equivalence_failed" },
        "exit_code": exit_code,
        "input": path_str(&a.input),
        "settings": opts,
        "equivalence": {
            "bkm_detailed_balance": g.bkm_detailed_balance,
            "gradient_flow_structure": g.verdict,
            "agree": g.equivalence_holds,
        },
        "gradient": g,
        "simplex": simplex,
    });
    Ok(Outcome { report, exit_code })
}

pub fn counterexample(a: &CounterexampleArgs) -> Result<Outcome, Failure> {
    let file = FileConfig::load(a.common.config.as_deref())?;
    let mut cfg = CounterexampleConfig::default();
    if let Some(g) = a.grid.or(file.grid) {
        cfg.ray_points = g.max(2);
    }
    let r = counterexample_probe(&cfg)?;
    let report = json!({
        "command": "counterexample",
        "status": "ok",
        "exit_code": EXIT_OK,
        "limits": { "along_axis": r.along_axis.limit, "along_diagonal": r.along_diagonal.limit },
        "g11_at_1_1": r.g11_at_1_1,
        "non_differentiable": r.non_differentiable,
        "probe": r,
    });
    Ok(Outcome { report, exit_code: EXIT_OK })
}
