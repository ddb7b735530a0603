use flowmetric_core::index::for_each_index;
use flowmetric_core::solver::{
    brute_force_solve, equation_residual, residual_scale, solve_order2, solve_order_n, TensorEquation,
};
use flowmetric_core::{Bilinear, Error, MultiTensor};
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_u(rng: &mut ChaCha8Rng, n: usize) -> Bilinear {
    // General (non-symmetric) and comfortably invertible.
    let m = DMatrix::from_fn(n, n, |i, j| if i == j { 2.0 } else { 0.0 } + rng.random_range(-1.0..1.0));
    Bilinear::new(m).unwrap()
}

fn random_r(rng: &mut ChaCha8Rng, n: usize, big_n: usize) -> MultiTensor {
    let g: Vec<usize> = (1..=big_n).collect();
    MultiTensor::from_fn(n, 1, big_n, |_| rng.random_range(-1.0..1.0)).symmetrize(&g).unwrap()
}

/// `sum_i U_{c_i b} T^{ab}_{c without c_i} - R^a_c`, written as plain loops.
fn naive_residual(u: &Bilinear, t: &MultiTensor, r: &MultiTensor, big_n: usize) -> f64 {
    let n = u.dim();
    let mut worst: f64 = 0.0;
    for_each_index(n, big_n, |c| {
        for a in 0..n {
            let mut lhs = 0.0;
            for i in 0..big_n {
                let rest: Vec<usize> = c.iter().enumerate().filter(|&(k, _)| k != i).map(|(_, &v)| v).collect();
                for b in 0..n {
                    let mut idx = vec![a, b];
                    idx.extend(&rest);
                    lhs += u.get(c[i], b) * t.get(&idx);
                }
            }
            let mut ridx = vec![a];
            ridx.extend(c);
            worst = worst.max((lhs - r.get(&ridx)).abs());
        }
    });
    worst
}

fn solve(u: &Bilinear, r: &MultiTensor) -> MultiTensor {
    solve_order_n(&TensorEquation::new(u.clone(), r.clone()).unwrap())
}

#[test]
fn scalar_order2() {
    let u = Bilinear::from_rows(&[vec![3.0]]).unwrap();
    let r = MultiTensor::from_vec(1, 1, 2, vec![1.5]).unwrap();
    let t = solve_order2(&u, &r).unwrap();
    assert_eq!(t.data(), &[0.25]);
    assert_eq!(equation_residual(&u, &t, &r, 2).unwrap(), 0.0);
}

#[test]
fn scalar_order_n() {
    for big_n in 2..=7 {
        let u = Bilinear::from_rows(&[vec![-1.7]]).unwrap();
        let r = MultiTensor::from_vec(1, 1, big_n, vec![0.9]).unwrap();
        let t = solve(&u, &r);
        let want = 0.9 / (big_n as f64 * -1.7);
        assert!((t.data()[0] - want).abs() < 1e-15);
        let eq = TensorEquation::new(u, r).unwrap();
        let b = brute_force_solve(&eq).unwrap();
        assert!((b.data()[0] - want).abs() < 1e-12);
    }
}

#[test]
fn identity_u_gives_christoffel_pattern() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let n = 3;
    let r = random_r(&mut rng, n, 2);
    let t = solve_order2(&Bilinear::identity(n), &r).unwrap();
    for_each_index(n, 3, |i| {
        let (a, b, c) = (i[0], i[1], i[2]);
        let want = 0.5 * (r.get(&[a, c, b]) + r.get(&[b, c, a]) - r.get(&[c, a, b]));
        assert!((t.get(i) - want).abs() < 1e-15);
    });
}

#[test]
fn order2_random_residual() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for _ in 0..20 {
        let u = random_u(&mut rng, 4);
        let r = random_r(&mut rng, 4, 2);
        let t = solve_order2(&u, &r).unwrap();
        assert!(t.is_symmetric(&[0, 1]));
        assert!(naive_residual(&u, &t, &r, 2) <= 1e-11);
        assert!(equation_residual(&u, &t, &r, 2).unwrap() <= 1e-11);
    }
}

#[test]
fn order_n_agrees_with_order2() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for n in 1..=5 {
        let u = random_u(&mut rng, n);
        let r = random_r(&mut rng, n, 2);
        let a = solve_order2(&u, &r).unwrap();
        let b = solve(&u, &r);
        assert!(a.sub(&b).unwrap().sup_norm() <= 1e-13);
    }
}

#[test]
fn order5_in_three_dimensions() {
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    let u = random_u(&mut rng, 3);
    let r = random_r(&mut rng, 3, 5);
    let t = solve(&u, &r);
    let scale = residual_scale(&u, &t, &r);
    assert!(naive_residual(&u, &t, &r, 5) <= 1e-10 * scale);
}

#[test]
fn residual_of_zero_is_norm_of_r() {
    let mut rng = ChaCha8Rng::seed_from_u64(25);
    let u = random_u(&mut rng, 3);
    let r = random_r(&mut rng, 3, 3);
    let t = MultiTensor::zeros(3, 2, 2);
    assert_eq!(equation_residual(&u, &t, &r, 3).unwrap(), r.sup_norm());
}

#[test]
fn residual_rejects_bad_shapes() {
    let u = Bilinear::identity(2);
    let t = MultiTensor::zeros(2, 2, 1);
    let r = MultiTensor::zeros(2, 1, 3);
    assert!(matches!(equation_residual(&u, &t, &r, 3), Err(Error::InvalidContraction(_))));
}

#[test]
fn order_below_two_is_rejected() {
    let r = MultiTensor::zeros(2, 1, 1);
    assert!(matches!(TensorEquation::new(Bilinear::identity(2), r), Err(Error::InvalidOrder(1))));
}

#[test]
fn perturbation_moves_residual_boundedly() {
    let mut rng = ChaCha8Rng::seed_from_u64(26);
    let n = 3;
    for big_n in 2..=4 {
        let u = random_u(&mut rng, n);
        let r = random_r(&mut rng, n, big_n);
        let t = solve(&u, &r);
        let base = equation_residual(&u, &t, &r, big_n).unwrap();
        let eps = 1e-3;
        let k = rng.random_range(0..t.data().len());
        let mut data = t.data().to_vec();
        data[k] += eps;
        let tp = MultiTensor::from_vec(n, 2, big_n - 1, data).unwrap();
        let moved = equation_residual(&u, &tp, &r, big_n).unwrap();
        assert!(moved > base);
        assert!(moved - base <= big_n as f64 * u.sup_norm() * eps * (1.0 + 1e-9));
    }
}

#[test]
fn brute_force_is_no_worse_than_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(27);
    for _ in 0..10 {
        let u = random_u(&mut rng, 2);
        let r = random_r(&mut rng, 2, 3);
        let eq = TensorEquation::new(u.clone(), r.clone()).unwrap();
        let f = solve_order_n(&eq);
        let b = brute_force_solve(&eq).unwrap();
        let rf = naive_residual(&u, &f, &r, 3);
        let rb = naive_residual(&u, &b, &r, 3);
        assert!(rb <= rf + 1e-10);
        assert!(rb <= 1e-8 * residual_scale(&u, &b, &r));
    }
}

#[test]
fn brute_force_of_zero_is_zero() {
    let mut rng = ChaCha8Rng::seed_from_u64(28);
    let u = random_u(&mut rng, 3);
    let eq = TensorEquation::new(u, MultiTensor::zeros(3, 1, 3)).unwrap();
    assert_eq!(brute_force_solve(&eq).unwrap().sup_norm(), 0.0);
}

#[test]
fn brute_force_size_limit() {
    let eq = TensorEquation::new(Bilinear::identity(8), MultiTensor::zeros(8, 1, 6)).unwrap();
    assert!(matches!(brute_force_solve(&eq), Err(Error::ProblemTooLarge { .. })));
}

#[test]
fn random_instances_are_symmetric_and_solve() {
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    for _ in 0..200 {
        let n = rng.random_range(2..=5);
        let big_n = rng.random_range(2..=6);
        let u = random_u(&mut rng, n);
        let r = random_r(&mut rng, n, big_n);
        let t = solve(&u, &r);
        let lower: Vec<usize> = (2..big_n + 1).collect();
        assert_eq!(t.symmetrize(&[0, 1]).unwrap().data(), t.data());
        assert_eq!(t.symmetrize(&lower).unwrap().data(), t.data());
        let res = equation_residual(&u, &t, &r, big_n).unwrap();
        assert!(res <= 1e-10 * (r.sup_norm() + u.sup_norm() * t.sup_norm()), "n={n} N={big_n} res={res:e}");
    }
}

fn instance() -> impl Strategy<Value = (u64, usize, usize)> {
    (any::<u64>(), 2usize..=4, 2usize..=5)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn linear_in_r((seed, n, big_n) in instance()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_u(&mut rng, n);
        let r1 = random_r(&mut rng, n, big_n);
        let r2 = random_r(&mut rng, n, big_n);
        let sum = solve(&u, &r1.add(&r2).unwrap());
        let parts = solve(&u, &r1).add(&solve(&u, &r2)).unwrap();
        prop_assert!(sum.sub(&parts).unwrap().sup_norm() <= 1e-11 * sum.sup_norm().max(1.0));
    }

    #[test]
    fn covariant_under_scaling((seed, n, big_n) in instance(), c in prop_oneof![-4.0f64..-0.25, 0.25f64..4.0]) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = random_u(&mut rng, n);
        let r = random_r(&mut rng, n, big_n);
        let cu = Bilinear::new(u.matrix() * c).unwrap();
        let lhs = solve(&cu, &r);
        let rhs = solve(&u, &r).scaled(1.0 / c);
        prop_assert!(lhs.sub(&rhs).unwrap().sup_norm() <= 1e-11 * rhs.sup_norm().max(1.0));
    }
}
