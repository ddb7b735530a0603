use flowmetric_core::fields::{locate_critical_points, parse_field_spec, serialize_field_spec, CriticalSearch};
use flowmetric_core::index::{binomial, factorial, for_each_submultiset};
use flowmetric_core::{Domain, Error, FieldPair, Jet, MonomialBasis};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_jet(rng: &mut ChaCha8Rng, dim: usize, order: usize, base: &[f64]) -> Jet {
    let basis = MonomialBasis::get(dim, order);
    let terms: Vec<(Vec<u32>, f64)> = basis.monomials().iter().map(|m| (m.clone(), rng.random_range(-1.0..1.0))).collect();
    Jet::from_terms(dim, order, base, terms).unwrap()
}

fn random_point(rng: &mut ChaCha8Rng, dim: usize, r: f64) -> Vec<f64> {
    (0..dim).map(|_| rng.random_range(-r..r)).collect()
}

/// Taylor sum in canonical order, one monomial at a time.
fn naive_eval(j: &Jet, x: &[f64]) -> f64 {
    let base = j.base_point();
    let mut acc = 0.0;
    for (m, c) in j.terms() {
        let mut v = 1.0;
        for k in 0..m.len() {
            v *= (x[k] - base[k]).powi(m[k] as i32);
        }
        acc += c * v;
    }
    acc
}

#[test]
fn eval_at_base_and_polynomial() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let base = [0.3, -0.2];
    let j = random_jet(&mut rng, 2, 5, &base);
    assert_eq!(j.eval(&base), j.coeff(&[0, 0]));
    let p = Jet::from_terms(1, 2, &[0.0], [(vec![0], 1.0), (vec![1], 1.0), (vec![2], 1.0)]).unwrap();
    assert_eq!(p.eval(&[2.0]), 7.0);
}

#[test]
fn sine_series() {
    let terms = (0..=8u32)
        .filter(|k| k % 2 == 1)
        .map(|k| (vec![k], if k % 4 == 1 { 1.0 } else { -1.0 } / factorial(k)));
    let j = Jet::from_terms(1, 8, &[0.0], terms).unwrap();
    assert!((j.eval(&[0.3]) - 0.3f64.sin()).abs() < 1e-9);
}

#[test]
fn derivative_examples() {
    let j = Jet::from_terms(2, 3, &[0.0, 0.0], [(vec![0, 0], 4.5), (vec![2, 1], 1.0)]).unwrap();
    assert_eq!(j.derivative_at_base(&[0, 0]).unwrap(), 4.5);
    assert_eq!(j.derivative_at_base(&[2, 1]).unwrap(), 2.0);
    assert!(matches!(j.derivative_at_base(&[2, 2]), Err(Error::OrderExceeded { .. })));
}

/// Nested central differences of step `h` along each axis.
fn central(j: &Jet, x: &[f64], m: &[u32], h: f64) -> f64 {
    let Some(k) = m.iter().position(|&e| e > 0) else {
        return j.eval(x);
    };
    let mut rest = m.to_vec();
    rest[k] -= 1;
    let mut xp = x.to_vec();
    let mut xm = x.to_vec();
    xp[k] += h;
    xm[k] -= h;
    (central(j, &xp, &rest, h) - central(j, &xm, &rest, h)) / (2.0 * h)
}

#[test]
fn derivatives_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let base = [0.1, -0.4];
    for _ in 0..10 {
        let j = random_jet(&mut rng, 2, 4, &base);
        for m in MonomialBasis::get(2, 3).monomials() {
            let deg: u32 = m.iter().sum();
            let h = [0.0, 1e-5, 1e-4, 1e-3][deg as usize];
            // Richardson on h and h/2 removes the O(h^2) term.
            let fd = (4.0 * central(&j, &base, m, h / 2.0) - central(&j, &base, m, h)) / 3.0;
            let exact = j.derivative_at_base(m).unwrap();
            assert!((fd - exact).abs() <= 1e-6 * exact.abs().max(1.0), "{m:?} {fd} {exact}");
        }
    }
}

#[test]
fn multiply_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let j = random_jet(&mut rng, 2, 4, &[0.0, 0.0]);
    let one = Jet::constant(2, 4, &[0.0, 0.0], 1.0);
    assert_eq!(j.multiply(&one).unwrap().coeffs(), j.coeffs());
    let a = Jet::from_terms(1, 2, &[0.0], [(vec![0], 1.0), (vec![1], 1.0)]).unwrap();
    let b = Jet::from_terms(1, 2, &[0.0], [(vec![0], 1.0), (vec![1], -1.0)]).unwrap();
    assert_eq!(a.multiply(&b).unwrap().coeffs(), &[1.0, 0.0, -1.0]);
    let c = Jet::constant(1, 2, &[1.0], 1.0);
    assert!(matches!(a.multiply(&c), Err(Error::BaseMismatch)));
}

#[test]
fn product_of_polynomials_is_pointwise() {
    let mut rng = ChaCha8Rng::seed_from_u64(34);
    let base = [0.2, 0.0, -0.1];
    for _ in 0..10 {
        // Degree-4 factors in an order-8 jet, so the product is exact.
        let a = random_jet(&mut rng, 3, 4, &base).with_order(8);
        let b = random_jet(&mut rng, 3, 4, &base).with_order(8);
        let ab = a.multiply(&b).unwrap();
        for _ in 0..20 {
            let x = random_point(&mut rng, 3, 1.0);
            let want = a.eval(&x) * b.eval(&x);
            assert!((ab.eval(&x) - want).abs() <= 1e-10 * want.abs().max(1.0));
        }
    }
}

#[test]
fn field_spec_for_identity_pair() {
    let doc = r#"{
        "dim": 1, "order": 1, "base_point": [0],
        "domain": {"box": {"min": [-1], "max": [1]}},
        "X": [{"component": 0, "monomial": [1], "coefficient": 1}],
        "Y": [{"component": 0, "monomial": [1], "coefficient": "1"}]
    }"#;
    let fp = parse_field_spec(doc).unwrap();
    assert_eq!(fp.x()[0].coeffs(), &[0.0, 1.0]);
    assert_eq!(fp.y()[0].coeffs(), &[0.0, 1.0]);
}

fn plane_identity_doc() -> &'static str {
    r#"{
        "dim": 2, "order": 1, "base_point": [0, 0],
        "domain": {"box": {"min": [-1, -1], "max": [1, 1]}},
        "X": [{"component": 0, "monomial": [1, 0], "coefficient": 1},
              {"component": 1, "monomial": [0, 1], "coefficient": 1}],
        "Y": [{"component": 0, "monomial": [1, 0], "coefficient": 1},
              {"component": 1, "monomial": [0, 1], "coefficient": 1}]
    }"#
}

#[test]
fn field_spec_for_plane_identity() {
    let fp = parse_field_spec(plane_identity_doc()).unwrap();
    for (a, comps) in [fp.x(), fp.y()].iter().enumerate() {
        for (k, j) in comps.iter().enumerate() {
            let nonzero: Vec<(Vec<u32>, f64)> = j.terms().filter(|(_, c)| *c != 0.0).map(|(m, c)| (m.to_vec(), c)).collect();
            let mut e = vec![0u32; 2];
            e[k] = 1;
            assert_eq!(nonzero, vec![(e, 1.0)], "field {a} component {k}");
        }
    }
}

#[test]
fn field_spec_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(35);
    let base = [0.125, -1.0 / 3.0];
    let x: Vec<Jet> = (0..2).map(|_| random_jet(&mut rng, 2, 3, &base)).collect();
    let y: Vec<Jet> = (0..2).map(|_| random_jet(&mut rng, 2, 3, &base)).collect();
    let fp = FieldPair::new(x, y, Domain::Ball { center: base.to_vec(), radius: 0.7 }).unwrap();
    let back = parse_field_spec(&serialize_field_spec(&fp)).unwrap();
    for (a, b) in fp.x().iter().chain(fp.y()).zip(back.x().iter().chain(back.y())) {
        assert_eq!(a.coeffs(), b.coeffs());
        assert_eq!(a.base_point(), b.base_point());
    }
    assert_eq!(fp.domain(), back.domain());
}

#[test]
fn field_spec_errors() {
    assert!(matches!(parse_field_spec("{not json"), Err(Error::SpecParse(_))));
    let bad_dim = plane_identity_doc().replace("\"base_point\": [0, 0]", "\"base_point\": [0]");
    assert!(matches!(parse_field_spec(&bad_dim), Err(Error::SpecDimension(_))));
    let bad_mono = plane_identity_doc().replacen("[1, 0]", "[1, 0, 0]", 1);
    assert!(matches!(parse_field_spec(&bad_mono), Err(Error::SpecDimension(_))));
}

fn quartic_gradient() -> FieldPair {
    // Gradient of (x1^2 - 1)^2 + x2^2.
    let base = [0.0, 0.0];
    let y1 = Jet::from_terms(2, 3, &base, [(vec![3, 0], 4.0), (vec![1, 0], -4.0)]).unwrap();
    let y2 = Jet::from_terms(2, 3, &base, [(vec![0, 1], 2.0)]).unwrap();
    let y = vec![y1, y2];
    FieldPair::new(y.clone(), y, Domain::cube(2, 2.0)).unwrap()
}

#[test]
fn critical_points_of_quartic() {
    let found = locate_critical_points(&quartic_gradient(), &CriticalSearch::default());
    let want = [[-1.0, 0.0], [0.0, 0.0], [1.0, 0.0]];
    assert_eq!(found.len(), 3);
    for (c, w) in found.iter().zip(&want) {
        assert!(!c.is_degenerate());
        let p = c.point();
        assert!((p[0] - w[0]).abs() < 1e-8 && (p[1] - w[1]).abs() < 1e-8, "{p:?}");
    }
}

#[test]
fn critical_points_linear_and_absent() {
    let base = [0.0, 0.0];
    let y: Vec<Jet> = (0..2).map(|i| Jet::coordinate(2, 1, &base, i)).collect();
    let fp = FieldPair::new(y.clone(), y, Domain::cube(2, 1.0)).unwrap();
    let found = locate_critical_points(&fp, &CriticalSearch::default());
    assert_eq!(found.len(), 1);
    assert!(found[0].point().iter().all(|v| v.abs() < 1e-12));

    let y1 = Jet::from_terms(2, 2, &base, [(vec![0, 0], 1.0), (vec![2, 0], 1.0)]).unwrap();
    let y2 = Jet::zero(2, 2, &base);
    let y = vec![y1, y2];
    let fp = FieldPair::new(y.clone(), y, Domain::cube(2, 1.0)).unwrap();
    assert!(locate_critical_points(&fp, &CriticalSearch::default()).is_empty());
}

fn multi_binomial(m: &[u32], k: &[u32]) -> f64 {
    m.iter().zip(k).map(|(&a, &b)| binomial(a, b)).product()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eval_matches_naive_sum(seed in any::<u64>(), dim in 1usize..=3, order in 0usize..=6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let base = random_point(&mut rng, dim, 1.0);
        let j = random_jet(&mut rng, dim, order, &base);
        for _ in 0..5 {
            let x = random_point(&mut rng, dim, 2.0);
            prop_assert_eq!(j.eval(&x).to_bits(), naive_eval(&j, &x).to_bits());
        }
    }

    #[test]
    fn leibniz_rule(seed in any::<u64>(), dim in 1usize..=3, oa in 1usize..=5, ob in 1usize..=5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let base = random_point(&mut rng, dim, 1.0);
        let a = random_jet(&mut rng, dim, oa, &base);
        let b = random_jet(&mut rng, dim, ob, &base);
        let ab = a.multiply(&b).unwrap();
        prop_assert_eq!(ab.order(), oa.min(ob));
        for m in MonomialBasis::get(dim, oa.min(ob)).monomials() {
            let mut want = 0.0;
            let mut mag = 0.0;
            for_each_submultiset(m, |k| {
                let rest: Vec<u32> = m.iter().zip(k).map(|(x, y)| x - y).collect();
                let t = multi_binomial(m, k) * a.derivative_at_base(k).unwrap() * b.derivative_at_base(&rest).unwrap();
                want += t;
                mag += t.abs();
            });
            let got = ab.derivative_at_base(m).unwrap();
            prop_assert!((got - want).abs() <= 1e-9 * mag.max(1.0), "{:?}: {} vs {}", m, got, want);
        }
    }
}
