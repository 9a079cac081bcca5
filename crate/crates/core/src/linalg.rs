//! Dense complex matrix helpers shared by every module.
//!
//! Everything here works on `DMatrix<Complex64>`. Tensor products follow the
//! `kron` convention: in `kron(a, b)` the factor `a` is the outer (slow) index.
//! Matricial amplifications `M_q(X)` are therefore stored as `kron(level, inner)`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn eye(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn dagger(m: &CMat) -> CMat {
    m.adjoint()
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn trace(m: &CMat) -> C64 {
    m.trace()
}

/// Normalized trace `tr(m) / n`.
pub fn ntrace(m: &CMat) -> C64 {
    m.trace() / m.nrows() as f64
}

/// Frobenius norm of `a - a*`.
pub fn hermitian_defect(m: &CMat) -> f64 {
    if m.nrows() != m.ncols() {
        return f64::INFINITY;
    }
    (m - m.adjoint()).norm()
}

pub fn is_hermitian(m: &CMat, tol: f64) -> bool {
    hermitian_defect(m) <= tol
}

/// Spectral norm of a Hermitian matrix (largest absolute eigenvalue).
/// Only the lower triangle is read.
pub fn herm_norm(m: &CMat) -> f64 {
    match m.nrows() {
        0 => 0.0,
        1 => m[(0, 0)].norm(),
        _ => m
            .symmetric_eigenvalues()
            .iter()
            .fold(0.0_f64, |acc, v| acc.max(v.abs())),
    }
}

/// Operator norm (largest singular value) of an arbitrary matrix.
pub fn op_norm(m: &CMat) -> f64 {
    let (r, cdim) = m.shape();
    if r == 0 || cdim == 0 {
        return 0.0;
    }
    if r == 1 || cdim == 1 {
        return m.norm();
    }
    let gram = if r <= cdim {
        m * m.adjoint()
    } else {
        m.adjoint() * m
    };
    gram.symmetric_eigenvalues()
        .iter()
        .fold(0.0_f64, |acc, v| acc.max(*v))
        .max(0.0)
        .sqrt()
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(m: &CMat) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    m.symmetric_eigenvalues()
        .iter()
        .fold(f64::INFINITY, |acc, v| acc.min(*v))
}

/// Rank-one projection onto the span of `v` (normalized internally).
pub fn projector(v: &[C64]) -> CMat {
    let n = v.len();
    let norm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
    let s = 1.0 / norm2;
    CMat::from_fn(n, n, |i, j| v[i] * v[j].conj() * s)
}

pub fn block(m: &CMat, j: usize, k: usize, d: usize) -> CMat {
    m.view((j * d, k * d), (d, d)).into_owned()
}

pub fn set_block(m: &mut CMat, j: usize, k: usize, d: usize, b: &CMat) {
    m.view_mut((j * d, k * d), (d, d)).copy_from(b);
}

/// Block-diagonal `diag(a, b)`.
pub fn direct_sum(a: &CMat, b: &CMat) -> CMat {
    let (ra, ca) = a.shape();
    let (rb, cb) = b.shape();
    let mut out = CMat::zeros(ra + rb, ca + cb);
    out.view_mut((0, 0), (ra, ca)).copy_from(a);
    out.view_mut((ra, ca), (rb, cb)).copy_from(b);
    out
}

/// Real and imaginary parts `(x + x*)/2` and `(x - x*)/(2i)`.
pub fn re_im_parts(m: &CMat) -> (CMat, CMat) {
    let adj = m.adjoint();
    let re = (m + &adj) * c(0.5, 0.0);
    let im = (m - &adj) * c(0.0, -0.5);
    (re, im)
}

/// Partial trace over the tensor factors whose `keep` flag is false.
///
/// `dims` lists the factor dimensions from outermost to innermost and must
/// multiply to the matrix size. The result is the unnormalized contraction.
pub fn partial_trace(m: &CMat, dims: &[usize], keep: &[bool]) -> CMat {
    assert_eq!(dims.len(), keep.len());
    let total: usize = dims.iter().product();
    assert_eq!(m.nrows(), total);
    assert_eq!(m.ncols(), total);

    let kept: Vec<usize> = (0..dims.len()).filter(|&i| keep[i]).collect();
    let traced: Vec<usize> = (0..dims.len()).filter(|&i| !keep[i]).collect();
    let out_dim: usize = kept.iter().map(|&i| dims[i]).product();
    let tr_dim: usize = traced.iter().map(|&i| dims[i]).product();

    // strides of each factor in the full index
    let mut strides = vec![1usize; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * dims[i + 1];
    }
    let offset = |digits_of: &[usize], which: &[usize], mut idx: usize| -> usize {
        let mut off = 0;
        for &f in which.iter().rev() {
            let d = digits_of[f];
            off += (idx % d) * strides[f];
            idx /= d;
        }
        off
    };

    let kept_off: Vec<usize> = (0..out_dim).map(|i| offset(dims, &kept, i)).collect();
    let tr_off: Vec<usize> = (0..tr_dim).map(|t| offset(dims, &traced, t)).collect();

    CMat::from_fn(out_dim, out_dim, |r, col| {
        let mut acc = ZERO;
        for &t in &tr_off {
            acc += m[(kept_off[r] + t, kept_off[col] + t)];
        }
        acc
    })
}

/// Normalized partial trace: the slice map `id ⊗ τ` over the dropped factors.
pub fn partial_ntrace(m: &CMat, dims: &[usize], keep: &[bool]) -> CMat {
    let tr_dim: usize = dims
        .iter()
        .zip(keep)
        .filter(|(_, &k)| !k)
        .map(|(d, _)| *d)
        .product();
    partial_trace(m, dims, keep) / C64::from(tr_dim as f64)
}

pub fn random_complex<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMat {
    CMat::from_fn(rows, cols, |_, _| {
        c(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

pub fn random_hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMat {
    let g = random_complex(n, n, rng);
    (&g + g.adjoint()) * c(0.5, 0.0)
}

/// Random positive semidefinite matrix `g g*`.
pub fn random_psd<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMat {
    let g = random_complex(n, n, rng);
    &g * g.adjoint()
}

/// Haar-random unit vector in `C^n`.
pub fn random_unit_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<C64> {
    let v: Vec<C64> = (0..n)
        .map(|_| c(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / norm).collect()
}

/// Frobenius-orthonormal basis of the traceless Hermitian `d×d` matrices.
///
/// Ordering: the `d-1` traceless diagonal elements first, then the real
/// symmetric off-diagonal elements, then the imaginary antisymmetric ones.
/// For `d = 2` this is `σz/√2, σx/√2, σy/√2`.
pub fn traceless_hermitian_basis(d: usize) -> Vec<CMat> {
    let mut basis = Vec::with_capacity(d * d - 1);
    for k in 1..d {
        // generalized Gell-Mann diagonal: diag(1,..,1,-k,0,..)/sqrt(k(k+1))
        let norm = ((k * (k + 1)) as f64).sqrt();
        let mut m = CMat::zeros(d, d);
        for i in 0..k {
            m[(i, i)] = c(1.0 / norm, 0.0);
        }
        m[(k, k)] = c(-(k as f64) / norm, 0.0);
        basis.push(m);
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for j in 0..d {
        for k in (j + 1)..d {
            let mut m = CMat::zeros(d, d);
            m[(j, k)] = c(s, 0.0);
            m[(k, j)] = c(s, 0.0);
            basis.push(m);
        }
    }
    for j in 0..d {
        for k in (j + 1)..d {
            let mut m = CMat::zeros(d, d);
            m[(j, k)] = c(0.0, -s);
            m[(k, j)] = c(0.0, s);
            basis.push(m);
        }
    }
    // d = 2 ordering convention: z, x, y
    basis
}

pub fn pauli_x() -> CMat {
    CMat::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

pub fn pauli_y() -> CMat {
    CMat::from_row_slice(2, 2, &[ZERO, -I, I, ZERO])
}

pub fn pauli_z() -> CMat {
    CMat::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn op_norm_matches_svd() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (r, k) in [(3, 3), (2, 5), (6, 4)] {
            let m = random_complex(r, k, &mut rng);
            let sv = m.clone().singular_values().max();
            assert!((op_norm(&m) - sv).abs() < 1e-10);
        }
    }

    #[test]
    fn herm_norm_is_max_abs_eigenvalue() {
        let z = pauli_z() * c(-3.0, 0.0);
        assert!((herm_norm(&z) - 3.0).abs() < 1e-14);
    }

    #[test]
    fn partial_trace_of_product_state() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random_hermitian(2, &mut rng);
        let b = random_hermitian(3, &mut rng);
        let e = random_hermitian(2, &mut rng);
        let full = kron(&kron(&a, &b), &e);
        let keep_a = partial_trace(&full, &[2, 3, 2], &[true, false, false]);
        let expected = &a * (b.trace() * e.trace());
        assert!((keep_a - expected).norm() < 1e-12);
        let keep_ae = partial_trace(&full, &[2, 3, 2], &[true, false, true]);
        let expected = kron(&a, &e) * b.trace();
        assert!((keep_ae - expected).norm() < 1e-12);
        let keep_b = partial_ntrace(&full, &[2, 3, 2], &[false, true, false]);
        let expected = &b * (a.trace() * e.trace() / 4.0);
        assert!((keep_b - expected).norm() < 1e-12);
    }

    #[test]
    fn traceless_basis_is_orthonormal() {
        for d in 1..5 {
            let basis = traceless_hermitian_basis(d);
            assert_eq!(basis.len(), d * d - 1);
            for (i, a) in basis.iter().enumerate() {
                assert!(trace(a).norm() < 1e-14);
                assert!(is_hermitian(a, 1e-15));
                for (j, b) in basis.iter().enumerate() {
                    let ip = (a.adjoint() * b).trace();
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((ip - want).norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn two_dim_basis_ordering_is_z_x_y() {
        let b = traceless_hermitian_basis(2);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((&b[0] - pauli_z() * c(s, 0.0)).norm() < 1e-15);
        assert!((&b[1] - pauli_x() * c(s, 0.0)).norm() < 1e-15);
        assert!((&b[2] - pauli_y() * c(s, 0.0)).norm() < 1e-15);
    }
}
