use std::sync::Arc;

use proptest::prelude::*;
use qbridge::berezin::{
    cond_exp_a, contravariant_symbol, covariant_symbol, embed_operator, phi_composite, pivot, BridgeElement,
};
use qbridge::bounds::{function_pivot_defect, gamma_breve_a};
use qbridge::group::builtin;
use qbridge::linalg::{c, kron, ntrace, op_norm, projector, random_complex, random_hermitian, random_psd, ONE, ZERO};
use qbridge::metric::{lip_norm_function, lip_norm_operator};
use qbridge::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn finite_spec(name: &str, q: usize) -> BridgeSpec {
    let b = builtin::builtin(name).unwrap();
    let g = Arc::new(build_finite_group(&b.table, &b.generators).unwrap());
    let ir = b.irrep("std").unwrap();
    let rep = Arc::new(Representation::from_generators(g, "std", &ir.generator_matrices).unwrap());
    let pd = stability_subgroup(&rep, &projector(&ir.vector), 1e-8).unwrap();
    BridgeSpec::first_class(pd, q).unwrap()
}

fn spin_proj(g: &Arc<GroupModel>, j: f64) -> ProjectionData {
    let rep = Arc::new(spin_representation(g, j).unwrap());
    let mut v = vec![ZERO; rep.dim()];
    v[0] = ONE;
    stability_subgroup(&rep, &projector(&v), 1e-6).unwrap()
}

fn su2() -> Arc<GroupModel> {
    Arc::new(build_su2_grid(6).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn entrywise_amplification_bound(seed in any::<u64>(), q in 1usize..5, d in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_complex(q * d, q * d, &mut rng);
        let mut worst: f64 = 0.0;
        for j in 0..q {
            for k in 0..q {
                worst = worst.max(op_norm(&m.view((j * d, k * d), (d, d)).into_owned()));
            }
        }
        prop_assert!(op_norm(&m) <= q as f64 * worst + 1e-12);
    }

    #[test]
    fn radius_cap_holds(seed in any::<u64>(), which in 0usize..3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rep = match which {
            0 => finite_spec("s3", 1).side(0).projection().rep().clone(),
            1 => finite_spec("q8", 1).side(0).projection().rep().clone(),
            _ => Arc::new(spin_representation(&su2(), 0.5).unwrap()),
        };
        let x = random_hermitian(rep.dim(), &mut rng);
        let tau = ntrace(&x);
        let dev = op_norm(&(&x - CMat::identity(rep.dim(), rep.dim()) * tau));
        let l = lip_norm_operator(&rep, &x).unwrap();
        prop_assert!(dev <= l * rep.group().mean_length() + 1e-8);
    }

    #[test]
    fn symbol_maps_contract_and_commute_with_amplification(seed in any::<u64>(), q in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spec = finite_spec("s3", q);
        let s1 = spec.with_level(1).unwrap();
        let rep = spec.side(0).projection().rep().clone();
        // Φ_q(M ⊗ T) = M ⊗ Φ(T)
        let m = random_complex(q, q, &mut rng);
        let t = random_complex(2, 2, &mut rng);
        let lhs = phi_composite(&spec, &kron(&m, &t), 0).unwrap();
        let rhs = kron(&m, &phi_composite(&s1, &t, 0).unwrap());
        prop_assert!((lhs - rhs).norm() < 1e-12);
        // contraction of seminorms
        let h = random_hermitian(2 * q, &mut rng);
        let f = covariant_symbol(&spec, &h, 0).unwrap();
        prop_assert!(lip_norm_function(spec.coset(), &f).unwrap() <= lip_norm_operator(&rep, &h).unwrap() + 1e-9);
    }

    #[test]
    fn gamma_breve_inequality(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for name in ["s3", "q8"] {
            let spec = finite_spec(name, 1);
            let n = spec.coset().len();
            let vals: Vec<f64> = (0..n).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect();
            let f = SymbolFunction::scalar(&vals);
            let l = lip_norm_function(spec.coset(), &f).unwrap();
            let g = gamma_breve_a(&spec, 0).value;
            prop_assert!(function_pivot_defect(&spec, &f).unwrap() <= g * l + 1e-8);
        }
    }

    #[test]
    fn pushforward_states_are_level_one_states(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spec = finite_spec("s3", 1);
        let n = spec.coset().len();
        let mut mu: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let s: f64 = mu.iter().sum();
        mu.iter_mut().for_each(|v| *v /= s);
        let om = pivot(&spec);
        let phi = |d: &BridgeElement| -> f64 {
            let e = cond_exp_a(&spec, &om.mul(d).mul(&om)).unwrap();
            e.values.iter().zip(&mu).map(|(v, m)| m * v[(0, 0)].re / spec.r_omega()).sum()
        };
        let one = BridgeElement { q: 1, block: 2, values: vec![CMat::identity(2, 2); n] };
        prop_assert!((phi(&one) - 1.0).abs() < 1e-12);
        prop_assert!((phi(&om) - 1.0).abs() < 1e-8);
        let psd = BridgeElement { q: 1, block: 2, values: (0..n).map(|_| random_psd(2, &mut rng)).collect() };
        prop_assert!(phi(&psd) >= -1e-10);
    }

    #[test]
    fn faithfulness_spot_check(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spec = finite_spec("s3", 2);
        let n = spec.coset().len();
        let f = BridgeElement { q: 2, block: 2, values: (0..n).map(|_| random_complex(4, 4, &mut rng)).collect() };
        let e = cond_exp_a(&spec, &f.adjoint().mul(&f)).unwrap();
        let size: f64 = e.values.iter().map(|v| v.norm()).sum();
        prop_assert!(size > 1e-6 * f.norm() * f.norm());
        let zero = BridgeElement { q: 2, block: 2, values: vec![CMat::zeros(4, 4); n] };
        let ez = cond_exp_a(&spec, &zero.adjoint().mul(&zero)).unwrap();
        prop_assert!(ez.values.iter().all(|v| v.norm() == 0.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn second_class_duality_and_triangle_split(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = su2();
        let spec = BridgeSpec::second_class(spin_proj(&g, 0.5), spin_proj(&g, 1.0), 1).unwrap();
        let s = random_complex(2, 2, &mut rng);
        let t = random_complex(3, 3, &mut rng);
        let lhs = (&s * phi_composite(&spec, &t, 1).unwrap()).trace() / 2.0;
        let rhs = (phi_composite(&spec, &s, 0).unwrap() * &t).trace() / 3.0;
        prop_assert!((lhs - rhs).norm() < 1e-8);

        // ‖(S ω − ω T)(x)‖ ≤ ‖S α(P^m) − f(x) α(P^m)‖ + ‖f(x) α(P^n) − α(P^n) T‖
        let th = random_hermitian(3, &mut rng);
        let f = covariant_symbol(&spec, &th, 1).unwrap();
        let sm = contravariant_symbol(&spec, &f, 0).unwrap();
        let w = pivot(&spec);
        let diff = embed_operator(&spec, &sm, 0).unwrap().mul(&w).sub(&w.mul(&embed_operator(&spec, &th, 1).unwrap()));
        for i in 0..spec.coset().len() {
            let fx = f.values[i][(0, 0)];
            let pm = spec.side(0).moved(i);
            let pn = spec.side(1).moved(i);
            let a = op_norm(&(&sm * pm - pm * fx));
            let b = op_norm(&(pn * fx - pn * &th));
            prop_assert!(op_norm(&diff.values[i]) <= a + b + 1e-10);
        }
    }

    #[test]
    fn su2_admissibility(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = su2();
        for q in 1..=2 {
            let spec = BridgeSpec::first_class(spin_proj(&g, 0.5), q).unwrap();
            let r = qbridge::berezin::verify_admissibility(&spec, 3, &mut rng).unwrap();
            prop_assert!(r.passed(), "{:?}", r);
        }
        let spec = BridgeSpec::second_class(spin_proj(&g, 0.5), spin_proj(&g, 1.0), 1).unwrap();
        let r = qbridge::berezin::verify_admissibility(&spec, 3, &mut rng).unwrap();
        prop_assert!(r.passed(), "{:?}", r);
    }
}

#[test]
fn pivot_trace_normalization_second_class() {
    let g = su2();
    let spec = BridgeSpec::second_class(spin_proj(&g, 0.5), spin_proj(&g, 1.0), 2).unwrap();
    let w = pivot(&spec);
    for side in 0..2 {
        let e = qbridge::berezin::cond_exp_b(&spec, &w, side).unwrap();
        let n = e.nrows();
        approx::assert_abs_diff_eq!((e - CMat::identity(n, n) * c(1.0 / 6.0, 0.0)).norm(), 0.0, epsilon = 1e-8);
    }
}

#[test]
fn stability_mismatch_is_a_spec_error() {
    let b = builtin::s3();
    let g = Arc::new(build_finite_group(&b.table, &b.generators).unwrap());
    let ir = b.irrep("std").unwrap();
    let rep = Arc::new(Representation::from_generators(g, "std", &ir.generator_matrices).unwrap());
    let p1 = stability_subgroup(&rep, &projector(&ir.vector), 1e-8).unwrap();
    // rotated coherent vector: fixed by a different transposition
    let m = rep.matrix(4);
    let other: Vec<C64> = (0..2).map(|i| m[(i, 0)]).collect();
    let p2 = stability_subgroup(&rep, &projector(&other), 1e-8).unwrap();
    assert!(matches!(BridgeSpec::second_class(p1, p2, 1), Err(Error::Spec(_))));
}
