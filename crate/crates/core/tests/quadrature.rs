//! Grid quadrature against independent one-dimensional integrals.

use std::f64::consts::PI;
use std::sync::Arc;

use qbridge::bounds::{delta_tilde_a, gamma_breve_a, Provenance};
use qbridge::linalg::{projector, ONE, ZERO};
use qbridge::*;

fn first_class(g: &Arc<GroupModel>, j: f64) -> BridgeSpec {
    let rep = Arc::new(spin_representation(g, j).unwrap());
    let mut v = vec![ZERO; rep.dim()];
    v[0] = ONE;
    let pd = stability_subgroup(&rep, &projector(&v), 1e-6).unwrap();
    BridgeSpec::first_class(pd, 1).unwrap()
}

/// Composite Simpson on [0, π].
fn simpson(f: impl Fn(f64) -> f64) -> f64 {
    let n = 20000;
    let h = PI / n as f64;
    let mut s = f(0.0) + f(PI);
    for k in 1..n {
        s += f(k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// `∫ θ (2j+1) cos^{2j}(θ/2) ½ sin θ dθ`.
fn gamma_breve_1d(j: f64) -> f64 {
    simpson(|t| t * (2.0 * j + 1.0) * (t / 2.0).cos().powf(2.0 * j) * 0.5 * t.sin())
}

/// `∫ θ (2j+1) cos^{4j}(θ/2) ½ sin θ dθ`.
fn delta_tilde_1d(j: f64) -> f64 {
    simpson(|t| t * (2.0 * j + 1.0) * (t / 2.0).cos().powf(4.0 * j) * 0.5 * t.sin())
}

// one-dimensional reference values, j = ½, 1, …, 4
const GAMMA_BREVE: [f64; 8] = [1.7777778, 1.7671459, 1.7066667, 1.6362462, 1.5673469, 1.5033012, 1.4447972, 1.3916274];
const DELTA_TILDE: [f64; 8] = [1.1780972, 0.9817477, 0.8590292, 0.7731263, 0.7086991, 0.6580778, 0.6169479, 0.5826730];

#[test]
fn reference_values_are_frozen() {
    for k in 0..8 {
        let j = 0.5 * (k + 1) as f64;
        assert!((gamma_breve_1d(j) - GAMMA_BREVE[k]).abs() < 1e-6, "j={j}");
        assert!((delta_tilde_1d(j) - DELTA_TILDE[k]).abs() < 1e-6, "j={j}");
    }
    assert!((GAMMA_BREVE[0] - 16.0 / 9.0).abs() < 1e-7);
    assert!((DELTA_TILDE[0] - 3.0 * PI / 8.0).abs() < 1e-7);
}

#[test]
fn overlap_is_cos_power_of_half_angle() {
    let g = Arc::new(build_su2_grid(12).unwrap());
    for j in [0.5, 1.0] {
        let spec = first_class(&g, j);
        for (i, &x) in spec.coset().points().iter().enumerate() {
            let (_, beta, _) = g.euler(x).unwrap();
            let expect = (beta / 2.0).cos().powf(4.0 * j);
            assert!((spec.side(0).overlap(i) - expect).abs() < 1e-12);
            assert!((spec.coset().distance(0, i) - beta).abs() < 1e-9);
        }
    }
}

#[test]
fn grid_integrals_match_one_dimensional_oracle() {
    let g = Arc::new(build_su2_grid(24).unwrap());
    for k in 0..8 {
        let j = 0.5 * (k + 1) as f64;
        let spec = first_class(&g, j);
        let gb = gamma_breve_a(&spec, 0);
        let dt = delta_tilde_a(&spec, 0);
        assert!(matches!(gb.provenance, Provenance::Quadrature { .. }));
        assert!((gb.value - GAMMA_BREVE[k]).abs() < 1e-3, "γ̆ j={j}: {}", gb.value);
        assert!((dt.value - DELTA_TILDE[k]).abs() < 1e-3, "δ̃ j={j}: {}", dt.value);
    }
}

#[test]
fn characters_are_orthonormal_on_the_grid() {
    let g = Arc::new(build_su2_grid(12).unwrap());
    let top = g.max_exact_degree().unwrap();
    let chars: Vec<Vec<C64>> = (0..=top / 2)
        .map(|two_j| {
            let rep = spin_representation(&g, two_j as f64 / 2.0).unwrap();
            g.elements().map(|x| rep.matrix(x).trace()).collect()
        })
        .collect();
    let w = g.weights();
    for a in 0..chars.len() {
        for b in 0..chars.len() {
            let s: C64 = g.elements().map(|x| chars[a][x] * chars[b][x].conj() * w[x]).sum();
            let expect = if a == b { 1.0 } else { 0.0 };
            assert!((s.re - expect).abs() < 1e-10 && s.im.abs() < 1e-10, "({a},{b}) -> {s}");
        }
    }
}

#[test]
fn finite_group_characters_are_orthonormal() {
    for name in ["s3", "q8", "z2"] {
        let b = qbridge::group::builtin::builtin(name).unwrap();
        let g = Arc::new(build_finite_group(&b.table, &b.generators).unwrap());
        let reps: Vec<Representation> = b
            .irreps
            .iter()
            .map(|ir| Representation::from_generators(g.clone(), ir.label.clone(), &ir.generator_matrices).unwrap())
            .collect();
        for a in &reps {
            for c in &reps {
                let s: C64 = g.elements().map(|x| a.matrix(x).trace() * c.matrix(x).trace().conj()).sum::<C64>() / g.order() as f64;
                let expect = if a.label() == c.label() { 1.0 } else { 0.0 };
                assert!((s.re - expect).abs() < 1e-12, "{name}: {} vs {}", a.label(), c.label());
            }
        }
    }
}
