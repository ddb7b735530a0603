//! Small end-to-end checks with known answers.

use flowmetric_core::assembler::{counterexample_probe, CounterexampleConfig};
use flowmetric_core::pipeline::{construct_global, ConstructOptions};
use flowmetric_core::solver::{equation_residual, solve_order_n, TensorEquation};
use flowmetric_core::{Bilinear, Domain, FieldPair, Jet, MultiTensor};
use flowmetric_qms::models::birth_death;
use flowmetric_qms::{check_gradient_structure, GradientOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::args::SelftestArgs;
use crate::commands::Outcome;
use crate::config::{self, FileConfig};
use crate::failure::{Failure, EXIT_FAILED, EXIT_OK};

#[derive(Serialize)]
struct Check {
    name: &'static str,
    pass: bool,
    value: f64,
    bound: f64,
}

fn check(name: &'static str, value: f64, bound: f64) -> Check {
    Check { name, pass: value <= bound, value, bound }
}

fn tensor_check(seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 3;
    let u = Bilinear::new(nalgebra::DMatrix::from_fn(n, n, |i, j| if i == j { 2.0 } else { 0.0 } + rng.random_range(-1.0..1.0)))
        .expect("invertible");
    let r = MultiTensor::from_fn(n, 1, 4, |_| rng.random_range(-1.0..1.0)).symmetrize(&[1, 2, 3, 4]).expect("lower group");
    let t = solve_order_n(&TensorEquation::new(u.clone(), r.clone()).expect("order 4"));
    let res = equation_residual(&u, &t, &r, 4).unwrap_or(f64::INFINITY);
    check("tensor_equation_residual", res / (r.sup_norm() + u.sup_norm() * t.sup_norm()), 1e-10)
}

fn identity_check() -> Check {
    let base = [0.0, 0.0];
    let x: Vec<Jet> = (0..2).map(|i| Jet::coordinate(2, 2, &base, i)).collect();
    let fields = FieldPair::new(x.clone(), x, Domain::cube(2, 1.0)).expect("valid fields");
    let opts = ConstructOptions { grid: 16, ..Default::default() };
    let v = match construct_global(&fields, &opts) {
        Ok(c) if c.report.pass => c.report.max_scaled_residual,
        _ => f64::INFINITY,
    };
    check("identity_fields_global_residual", v, 1e-9)
}

fn counterexample_checks() -> Vec<Check> {
    match counterexample_probe(&CounterexampleConfig::default()) {
        Ok(r) => vec![
            check("counterexample_axis_limit", r.along_axis.limit.abs(), 1e-4),
            check("counterexample_diagonal_limit", (r.along_diagonal.limit + 0.5).abs(), 1e-4),
            check("counterexample_g11_at_1_1", (r.g11_at_1_1 - 1.25).abs(), 1e-10),
        ],
        Err(_) => vec![check("counterexample_probe", f64::INFINITY, 0.0)],
    }
}

fn qms_checks(seed: u64) -> Vec<Check> {
    let opts = GradientOptions { samples: 50, seed, ..Default::default() };
    let db = check_gradient_structure(&birth_death(1.0, 2.0), &opts);
    let perturbed = birth_death(1.0, 2.0).with_hamiltonian(sigma_x());
    let bad = perturbed.ok().and_then(|g| check_gradient_structure(&g, &opts).ok());
    vec![
        check("qms_detailed_balance_verdict", if matches!(db, Ok(ref r) if r.verdict && r.equivalence_holds) { 0.0 } else { 1.0 }, 0.0),
        check("qms_perturbed_verdict", if matches!(bad, Some(ref r) if !r.verdict && r.equivalence_holds) { 0.0 } else { 1.0 }, 0.0),
    ]
}

fn sigma_x() -> flowmetric_qms::linalg::CMatrix {
    use num_complex::Complex64;
    let o = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    flowmetric_qms::linalg::CMatrix::from_row_slice(2, 2, &[o, one, one, o])
}

pub fn selftest(a: &SelftestArgs) -> Result<Outcome, Failure> {
    let file = FileConfig::load(a.common.config.as_deref())?;
    let seed = a.common.seed.or(file.seed).unwrap_or(config::DEFAULT_SEED);
    let mut checks = vec![tensor_check(seed), identity_check()];
    checks.extend(counterexample_checks());
    checks.extend(qms_checks(seed));
    let pass = checks.iter().all(|c| c.pass);
    let exit_code = if pass { EXIT_OK } else { EXIT_FAILED };
    let report = json!({
        "command": "selftest",
        "status": if pass { "ok" } else { "failed" },
        "exit_code": exit_code,
        "seed": seed,
        "checks": checks,
    });
    Ok(Outcome { report, exit_code })
}
