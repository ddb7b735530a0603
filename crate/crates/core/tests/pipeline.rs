use flowmetric_core::manufactured::random_manufactured;
use flowmetric_core::pipeline::{construct_global, ConstructOptions};
use flowmetric_core::{Domain, FieldPair, Jet};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn identity_fields(n: usize) -> FieldPair {
    let base = vec![0.0; n];
    let x: Vec<Jet> = (0..n).map(|i| Jet::coordinate(n, 2, &base, i)).collect();
    FieldPair::new(x.clone(), x, Domain::cube(n, 1.0)).unwrap()
}

#[test]
fn identity_fields_in_the_plane() {
    let c = construct_global(&identity_fields(2), &ConstructOptions::default()).unwrap();
    let r = &c.report;
    assert!(r.pass && r.smoothness_pass);
    assert_eq!(c.critical.len(), 1);
    assert!(c.critical[0].order_defect == 0.0);
}

#[test]
fn manufactured_fields() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for n in [2, 3] {
        let m = random_manufactured(n, 8, &mut rng).unwrap();
        let opts = ConstructOptions { grid: if n == 2 { 64 } else { 16 }, ..Default::default() };
        let c = construct_global(&m.fields, &opts).unwrap();
        let r = &c.report;
        assert!(r.pass, "n={n}: {r:?}");
        assert!(r.max_scaled_residual <= 1e-8);
        let g = c.metric.eval(&vec![0.0; n]).unwrap();
        assert!((g - m.metric_at(&vec![0.0; n])).amax() <= 1e-10);
    }
}
