//! Lipschitz seminorms from the group action and from the quotient metric,
//! together with their matricial amplifications.

use std::sync::Arc;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{CosetSpace, Representation};
use crate::linalg::{c, direct_sum, C64, herm_norm, hermitian_defect, is_hermitian, kron, op_norm, random_complex, random_hermitian, CMat};

/// A `q×q` block matrix over `B = M_d`.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    pub q: usize,
    pub d: usize,
    pub mat: CMat,
    pub hermitian: bool,
}

impl Observable {
    pub fn new(mat: CMat, d: usize) -> Result<Self> {
        if mat.nrows() != mat.ncols() || d == 0 || !mat.nrows().is_multiple_of(d) {
            return Err(Error::Shape(format!(
                "{}x{} matrix is not a block matrix over {d}x{d}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        let hermitian = hermitian_defect(&mat) <= 1e-12;
        Ok(Observable {
            q: mat.nrows() / d,
            d,
            mat,
            hermitian,
        })
    }
}

/// A function on the coset points with `q×q` matrix values.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolFunction {
    pub q: usize,
    pub values: Vec<CMat>,
}

impl SymbolFunction {
    pub fn new(values: Vec<CMat>) -> Result<Self> {
        let q = values.first().map(|v| v.nrows()).unwrap_or(1);
        if values.iter().any(|v| v.nrows() != q || v.ncols() != q) {
            return Err(Error::Shape("symbol values must all be q×q".into()));
        }
        Ok(SymbolFunction { q, values })
    }

    pub fn scalar(values: &[f64]) -> Self {
        SymbolFunction {
            q: 1,
            values: values.iter().map(|&v| CMat::from_element(1, 1, c(v, 0.0))).collect(),
        }
    }

    pub fn constant(n: usize, m: &CMat) -> Self {
        SymbolFunction {
            q: m.nrows(),
            values: vec![m.clone(); n],
        }
    }

    /// Real parts of a scalar function.
    pub fn real_values(&self) -> Vec<f64> {
        self.values.iter().map(|v| v[(0, 0)].re).collect()
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(op_norm).fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.values.iter().all(|v| is_hermitian(v, tol))
    }
}

/// Norm of a difference that is Hermitian when both operands are.
fn diff_norm(a: &CMat, hermitian: bool) -> f64 {
    if hermitian {
        herm_norm(a)
    } else {
        op_norm(a)
    }
}

/// `sup_x ‖α^q_x(X) − X‖ / ℓ(x)`.
///
/// Finite groups: exact maximum over the non-identity elements. Spin
/// representations of SU(2): every `x` lies on a one-parameter subgroup
/// `exp(−iθ n·J)` with `θ = ℓ(x)` and the action is isometric along it, so
/// the supremum over the whole group is `sup_{|n|=1} ‖[1_q ⊗ n·J, X]‖`,
/// found by ascent on the sphere of axes. Other sampled models fall back to
/// the grid maximum, a lower estimate.
pub fn lip_norm_operator(rep: &Representation, x: &CMat) -> Result<f64> {
    let d = rep.dim();
    if x.nrows() != x.ncols() || !x.nrows().is_multiple_of(d) {
        return Err(Error::Shape(format!(
            "{}x{} is not a block matrix over dimension {d}",
            x.nrows(),
            x.ncols()
        )));
    }
    Ok(lip_norm_operator_unchecked(rep, x))
}

fn combine(a: &[CMat], n: &[f64; 3]) -> CMat {
    let mut m = a[0].clone();
    m.iter_mut()
        .zip(a[1].iter())
        .zip(a[2].iter())
        .for_each(|((z, y), w)| *z = *z * n[0] + *y * n[1] + *w * n[2]);
    m
}

fn unit(v: [f64; 3]) -> [f64; 3] {
    let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    [v[0] / r, v[1] / r, v[2] / r]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Fibonacci points on the whole sphere.
fn sphere_starts(count: usize) -> Vec<[f64; 3]> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..count)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / count as f64;
            let r = (1.0 - z * z).sqrt();
            let phi = golden * i as f64;
            [r * phi.cos(), r * phi.sin(), z]
        })
        .collect()
}

/// Starting axes for the Hermitian ascent; the best ones pairwise at
/// least `START_SEPARATION` apart (cosine) are refined.
const SPHERE_STARTS: usize = 48;
const REFINED_STARTS: usize = 4;
const START_SEPARATION: f64 = 0.825;

/// Ascent iterations per start.
const AXIS_ITERS: usize = 40;

/// `sup_{|n|=1} λ_max(Σ_k n_k H_k)` for Hermitian `H_k`.
///
/// Each step tries a Newton step on the sphere built from the eigenvalue
/// Hessian `2 Re Σ_m ⟨v,H_k v_m⟩⟨v_m,H_l v⟩ / (λ − λ_m)`, and falls back to
/// `n ← ∇λ/|∇λ|`, which never decreases the convex objective. Only
/// improving steps are taken. With `even` the objective is known to satisfy
/// `f(n) = f(−n)` and only the upper hemisphere is seeded.
fn hermitian_axis_sup(h: &[CMat], even: bool) -> f64 {
    let lmax = |n: &[f64; 3]| combine(h, n).symmetric_eigenvalues().max();
    let mut scored: Vec<(f64, [f64; 3])> = sphere_starts(SPHERE_STARTS)
        .into_iter()
        .filter(|n| !even || n[2] > 0.0)
        .map(|n| (lmax(&n), n))
        .collect();
    scored.sort_by(|p, q| q.0.total_cmp(&p.0));
    let mut picked: Vec<(f64, [f64; 3])> = Vec::with_capacity(REFINED_STARTS);
    for &(f0, n0) in &scored {
        if picked.len() == REFINED_STARTS {
            break;
        }
        if picked.iter().all(|(_, m)| {
            let c = dot(m, &n0);
            (if even { c.abs() } else { c }) < START_SEPARATION
        }) {
            picked.push((f0, n0));
        }
    }
    let mut best = scored[0].0;
    for &(f0, n0) in &picked {
        let (mut f, mut n) = (f0, n0);
        for _ in 0..AXIS_ITERS {
            let eig = combine(h, &n).symmetric_eigen();
            let top = eig.eigenvalues.imax();
            let lam = eig.eigenvalues[top];
            let v = eig.eigenvectors.column(top);
            let hv: Vec<nalgebra::DVector<C64>> = h.iter().map(|hk| hk * v).collect();
            let g = [0, 1, 2].map(|k| v.dotc(&hv[k]).re);
            let mut hess = [[0.0; 3]; 3];
            for m in 0..eig.eigenvalues.len() {
                let gap = lam - eig.eigenvalues[m];
                if m == top || gap <= 1e-12 * lam.abs().max(1.0) {
                    continue;
                }
                let vm = eig.eigenvectors.column(m);
                let c = [0, 1, 2].map(|k| vm.dotc(&hv[k]));
                for k in 0..3 {
                    for l in 0..3 {
                        hess[k][l] += 2.0 * (c[k].conj() * c[l]).re / gap;
                    }
                }
            }
            // Riemannian Newton step in a tangent basis
            let e1 = unit(cross(n, if n[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] }));
            let e2 = cross(n, e1);
            let ng = dot(&n, &g);
            let quad = |a: &[f64; 3], b: &[f64; 3]| {
                let mut s = 0.0;
                for k in 0..3 {
                    for l in 0..3 {
                        s += a[k] * hess[k][l] * b[l];
                    }
                }
                s
            };
            let (h11, h12, h22) = (quad(&e1, &e1) - ng, quad(&e1, &e2), quad(&e2, &e2) - ng);
            let (g1, g2) = (dot(&e1, &g), dot(&e2, &g));
            let det = h11 * h22 - h12 * h12;
            let mut cands = Vec::with_capacity(2);
            if det.abs() > 1e-300 {
                let x1 = -(h22 * g1 - h12 * g2) / det;
                let x2 = -(h11 * g2 - h12 * g1) / det;
                if x1.hypot(x2) < 1.0 {
                    cands.push(unit([0, 1, 2].map(|k| n[k] + x1 * e1[k] + x2 * e2[k])));
                }
            }
            if g.iter().any(|v| *v != 0.0) {
                cands.push(unit(g));
            }
            let mut gain = 0.0;
            for c in cands {
                let fc = lmax(&c);
                if fc > f {
                    gain = fc - f;
                    (n, f) = (c, fc);
                    break;
                }
            }
            if gain <= 1e-14 * f {
                break;
            }
        }
        best = best.max(f);
    }
    best
}

/// `sup_{|n|=1} σ_max(Σ_k n_k A_k)`: the top eigenvalue of the Hermitian
/// dilation `[[0, A], [A*, 0]]`, which is linear in `n`.
fn singular_axis_sup(a: &[CMat]) -> f64 {
    let (r, c) = a[0].shape();
    let h: Vec<CMat> = a
        .iter()
        .map(|ak| {
            let mut m = CMat::zeros(r + c, r + c);
            m.view_mut((0, r), (r, c)).copy_from(ak);
            m.view_mut((r, 0), (c, r)).copy_from(&ak.adjoint());
            m
        })
        .collect();
    hermitian_axis_sup(&h, true)
}

/// `sup_{|n|=1} ‖[1_q ⊗ n·J, X]‖`. For Hermitian `X` the commutators are
/// anti-Hermitian and the norm is `max ±λ` of `i[n·J, X]`; since `n → −n`
/// flips the sign this is `sup_n λ_max`.
pub(crate) fn derivation_sup(gens: &[CMat; 3], x: &CMat) -> f64 {
    let q = x.nrows() / gens[0].nrows();
    let iq = CMat::identity(q, q);
    let a: Vec<CMat> = gens
        .iter()
        .map(|j| {
            let g = kron(&iq, j);
            &g * x - x * &g
        })
        .collect();
    if a.iter().all(|m| m.norm() == 0.0) {
        return 0.0;
    }
    if hermitian_defect(x) <= 1e-12 * (1.0 + x.norm()) {
        let h: Vec<CMat> = a.iter().map(|m| m * C64::new(0.0, 1.0)).collect();
        hermitian_axis_sup(&h, false)
    } else {
        singular_axis_sup(&a)
    }
}

pub(crate) fn lip_norm_operator_unchecked(rep: &Representation, x: &CMat) -> f64 {
    if let Some(gens) = rep.angular_momentum() {
        return derivation_sup(gens, x);
    }
    let q = x.nrows() / rep.dim();
    let herm = hermitian_defect(x) <= 1e-12 * (1.0 + x.norm());
    let g = rep.group();
    let mut best: f64 = 0.0;
    for &e in rep.lip_elements() {
        let diff = rep.act_level(e, x, q) - x;
        let v = diff_norm(&diff, herm) / g.length(e);
        if v > best {
            best = v;
        }
    }
    best
}

/// `max_{i≠j} ‖f_i − f_j‖ / ρ(x_i, x_j)`; `+∞` if distinct values sit at distance zero.
pub fn lip_norm_function(coset: &CosetSpace, f: &SymbolFunction) -> Result<f64> {
    if f.values.len() != coset.len() {
        return Err(Error::Shape(format!(
            "function has {} values for {} coset points",
            f.values.len(),
            coset.len()
        )));
    }
    let n = coset.len();
    let herm = f.is_hermitian(1e-12);
    let mut best: f64 = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let diff = &f.values[i] - &f.values[j];
            let num = if f.q == 1 { diff[(0, 0)].norm() } else { diff_norm(&diff, herm) };
            let rho = coset.distance(i, j);
            let v = if rho > 0.0 {
                num / rho
            } else if num > 0.0 {
                f64::INFINITY
            } else {
                0.0
            };
            best = best.max(v);
        }
    }
    Ok(best)
}

/// Scalar-function fast path used by optimizers and oracles.
pub fn lip_norm_scalar(coset: &CosetSpace, f: &[f64]) -> f64 {
    let n = f.len();
    let mut best: f64 = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let num = (f[i] - f[j]).abs();
            let rho = coset.distance(i, j);
            let v = if rho > 0.0 {
                num / rho
            } else if num > 0.0 {
                f64::INFINITY
            } else {
                0.0
            };
            best = best.max(v);
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SeminormKind {
    OperatorLip,
    FunctionLip,
}

/// A family `{L_q}` of seminorms on the amplifications `M_q(X)`.
pub trait MatrixSlipNorm: Sync {
    type Elem: Clone + Send + Sync;

    fn kind(&self) -> SeminormKind;

    /// `true` when evaluation is an exact supremum rather than a grid maximum.
    fn is_exact(&self) -> bool;

    fn level(&self, x: &Self::Elem) -> usize;

    fn eval(&self, x: &Self::Elem) -> f64;

    fn is_self_adjoint(&self, x: &Self::Elem, tol: f64) -> bool;

    /// `α X β` for scalar `α: m×n`, `β: n×m` and `X` at level `n`.
    fn compress(&self, alpha: &CMat, x: &Self::Elem, beta: &CMat) -> Self::Elem;

    fn direct_sum(&self, x: &Self::Elem, y: &Self::Elem) -> Self::Elem;

    fn unit(&self, q: usize) -> Self::Elem;

    /// `M ⊗ 1` for a scalar matrix `M`.
    fn scalar_part(&self, m: &CMat) -> Self::Elem;

    fn random<R: Rng + ?Sized>(&self, q: usize, hermitian: bool, rng: &mut R) -> Self::Elem;
}

/// `L^B_q(X) = max_x ‖α^q_x(X) − X‖ / ℓ(x)`.
#[derive(Debug, Clone)]
pub struct OperatorLip {
    pub rep: Arc<Representation>,
}

impl OperatorLip {
    pub fn new(rep: Arc<Representation>) -> Self {
        OperatorLip { rep }
    }
}

impl MatrixSlipNorm for OperatorLip {
    type Elem = CMat;

    fn kind(&self) -> SeminormKind {
        SeminormKind::OperatorLip
    }

    fn is_exact(&self) -> bool {
        self.rep.group().is_finite()
    }

    fn level(&self, x: &CMat) -> usize {
        x.nrows() / self.rep.dim()
    }

    fn eval(&self, x: &CMat) -> f64 {
        lip_norm_operator_unchecked(&self.rep, x)
    }

    fn is_self_adjoint(&self, x: &CMat, tol: f64) -> bool {
        is_hermitian(x, tol)
    }

    fn compress(&self, alpha: &CMat, x: &CMat, beta: &CMat) -> CMat {
        let id = CMat::identity(self.rep.dim(), self.rep.dim());
        kron(alpha, &id) * x * kron(beta, &id)
    }

    fn direct_sum(&self, x: &CMat, y: &CMat) -> CMat {
        direct_sum(x, y)
    }

    fn unit(&self, q: usize) -> CMat {
        CMat::identity(q * self.rep.dim(), q * self.rep.dim())
    }

    fn scalar_part(&self, m: &CMat) -> CMat {
        kron(m, &CMat::identity(self.rep.dim(), self.rep.dim()))
    }

    fn random<R: Rng + ?Sized>(&self, q: usize, hermitian: bool, rng: &mut R) -> CMat {
        let n = q * self.rep.dim();
        if hermitian {
            random_hermitian(n, rng)
        } else {
            random_complex(n, n, rng)
        }
    }
}

/// `L^A_q(F) = max_{i≠j} ‖F_i − F_j‖ / ρ(x_i, x_j)`.
#[derive(Debug, Clone)]
pub struct FunctionLip {
    pub coset: Arc<CosetSpace>,
}

impl FunctionLip {
    pub fn new(coset: Arc<CosetSpace>) -> Self {
        FunctionLip { coset }
    }
}

impl MatrixSlipNorm for FunctionLip {
    type Elem = SymbolFunction;

    fn kind(&self) -> SeminormKind {
        SeminormKind::FunctionLip
    }

    fn is_exact(&self) -> bool {
        true
    }

    fn level(&self, x: &SymbolFunction) -> usize {
        x.q
    }

    fn eval(&self, x: &SymbolFunction) -> f64 {
        lip_norm_function(&self.coset, x).unwrap_or(f64::INFINITY)
    }

    fn is_self_adjoint(&self, x: &SymbolFunction, tol: f64) -> bool {
        x.is_hermitian(tol)
    }

    fn compress(&self, alpha: &CMat, x: &SymbolFunction, beta: &CMat) -> SymbolFunction {
        SymbolFunction {
            q: alpha.nrows(),
            values: x.values.iter().map(|v| alpha * v * beta).collect(),
        }
    }

    fn direct_sum(&self, x: &SymbolFunction, y: &SymbolFunction) -> SymbolFunction {
        SymbolFunction {
            q: x.q + y.q,
            values: x.values.iter().zip(&y.values).map(|(a, b)| direct_sum(a, b)).collect(),
        }
    }

    fn unit(&self, q: usize) -> SymbolFunction {
        SymbolFunction::constant(self.coset.len(), &CMat::identity(q, q))
    }

    fn scalar_part(&self, m: &CMat) -> SymbolFunction {
        SymbolFunction::constant(self.coset.len(), m)
    }

    fn random<R: Rng + ?Sized>(&self, q: usize, hermitian: bool, rng: &mut R) -> SymbolFunction {
        let values = (0..self.coset.len())
            .map(|_| {
                if hermitian {
                    random_hermitian(q, rng)
                } else {
                    random_complex(q, q, rng)
                }
            })
            .collect();
        SymbolFunction { q, values }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AxiomCheck {
    pub passed: bool,
    pub trials: usize,
    /// Largest observed `lhs − rhs` (negative means room to spare).
    pub worst_slack: f64,
}

impl AxiomCheck {
    fn new() -> Self {
        AxiomCheck {
            passed: true,
            trials: 0,
            worst_slack: f64::NEG_INFINITY,
        }
    }

    fn record(&mut self, slack: f64, tol: f64) {
        self.trials += 1;
        self.worst_slack = self.worst_slack.max(slack);
        if slack > tol || slack.is_nan() {
            self.passed = false;
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AxiomReport {
    pub compression: AxiomCheck,
    pub direct_sum: AxiomCheck,
    pub unit: AxiomCheck,
}

impl AxiomReport {
    pub fn all_passed(&self) -> bool {
        self.compression.passed && self.direct_sum.passed && self.unit.passed
    }
}

/// Random check of the three matrix slip-norm axioms at the given levels:
/// `L_m(αAβ) ≤ ‖α‖ L_n(A) ‖β‖`, `L(diag(A, C)) = max(L(A), L(C))`, `L_1(1) = 0`.
pub fn check_matrix_slipnorm_axioms<S: MatrixSlipNorm, R: Rng + ?Sized>(
    family: &S,
    levels: &[usize],
    trials: usize,
    rng: &mut R,
) -> AxiomReport {
    let tol = 1e-9;
    let mut report = AxiomReport {
        compression: AxiomCheck::new(),
        direct_sum: AxiomCheck::new(),
        unit: AxiomCheck::new(),
    };
    for &q in levels {
        report.unit.record(family.eval(&family.unit(q)), 1e-12);
    }
    for t in 0..trials.max(1) {
        let n = levels[t % levels.len()];
        let m = levels[(t / levels.len() + 1) % levels.len()];
        let herm = t % 2 == 0;
        let a = family.random(n, herm, rng);
        let alpha = random_complex(m, n, rng);
        let beta = random_complex(n, m, rng);
        let lhs = family.eval(&family.compress(&alpha, &a, &beta));
        let rhs = op_norm(&alpha) * family.eval(&a) * op_norm(&beta);
        report.compression.record(lhs - rhs, tol);

        let cc = family.random(m, herm, rng);
        let sum = family.eval(&family.direct_sum(&a, &cc));
        let want = family.eval(&a).max(family.eval(&cc));
        report.direct_sum.record((sum - want).abs(), tol);
    }
    report
}

/// Self-adjoint and `L(X) ≤ radius`, with no slack on the seminorm value.
pub fn ball_membership<S: MatrixSlipNorm>(family: &S, x: &S::Elem, radius: f64) -> bool {
    family.is_self_adjoint(x, 1e-10) && family.eval(x) <= radius
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{build_finite_group, builtin, coset_space, stability_subgroup};
    use crate::linalg::{pauli_z, projector};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn s3() -> (Arc<Representation>, Arc<CosetSpace>) {
        let b = builtin::s3();
        let g = Arc::new(build_finite_group(&b.table, &b.generators).unwrap());
        let spec = b.irrep("std").unwrap();
        let rep = Arc::new(Representation::from_generators(g, "std", &spec.generator_matrices).unwrap());
        let pd = stability_subgroup(&rep, &projector(&spec.vector), 1e-8).unwrap();
        let cs = Arc::new(coset_space(&pd).unwrap());
        (rep, cs)
    }

    #[test]
    fn pauli_z_on_s3_matches_exhaustive_max() {
        let (rep, _) = s3();
        let z = pauli_z();
        let g = rep.group();
        let brute = g
            .elements()
            .filter(|&x| x != g.identity())
            .map(|x| (rep.act(x, &z) - &z).singular_values().max() / g.length(x))
            .fold(0.0, f64::max);
        let v = lip_norm_operator(&rep, &z).unwrap();
        assert!((v - brute).abs() < 1e-12);
        assert!(v > 0.0);
        let shifted = &z + CMat::identity(2, 2) * c(3.7, 0.0);
        assert!((lip_norm_operator(&rep, &shifted).unwrap() - v).abs() < 1e-12);
        assert!(lip_norm_operator(&rep, &CMat::identity(2, 2)).unwrap() < 1e-14);

        // rescaled to the unit sphere of the seminorm
        let fam = OperatorLip::new(rep.clone());
        let unit = &z * c(1.0 / v, 0.0);
        assert!(ball_membership(&fam, &unit, 1.0));
        assert!(!ball_membership(&fam, &unit, 0.999));
        let skew = &z * c(0.0, 1.0 / v);
        assert!(!ball_membership(&fam, &skew, 10.0));
    }

    #[test]
    fn indicator_function_on_three_points() {
        let (_, cs) = s3();
        let f = SymbolFunction::scalar(&[1.0, 0.0, 0.0]);
        let want = (1..3).map(|j| 1.0 / cs.distance(0, j)).fold(0.0, f64::max);
        assert_eq!(lip_norm_function(&cs, &f).unwrap(), want);
        let g = SymbolFunction::scalar(&[3.0, 2.0, 2.0]);
        assert_eq!(lip_norm_function(&cs, &g).unwrap(), want);
        assert_eq!(lip_norm_function(&cs, &SymbolFunction::scalar(&[2.0; 3])).unwrap(), 0.0);
    }

    #[test]
    fn axioms_hold_on_s3() {
        let (rep, cs) = s3();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let r = check_matrix_slipnorm_axioms(&OperatorLip::new(rep), &[1, 2, 3], 100, &mut rng);
        assert!(r.all_passed(), "{r:?}");
        let r = check_matrix_slipnorm_axioms(&FunctionLip::new(cs), &[1, 2, 3], 100, &mut rng);
        assert!(r.all_passed(), "{r:?}");
    }

    #[test]
    fn seminorm_properties() {
        let (rep, _) = s3();
        let fam = OperatorLip::new(rep.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mean_len = rep.group().mean_length();
        for q in 1..=3 {
            for _ in 0..20 {
                let x = fam.random(q, false, &mut rng);
                let y = fam.random(q, false, &mut rng);
                let (lx, ly) = (fam.eval(&x), fam.eval(&y));
                assert!(fam.eval(&(&x + &y)) <= lx + ly + 1e-9);
                assert!((fam.eval(&(&x * c(-2.5, 1.0))) - lx * c(-2.5, 1.0).norm()).abs() < 1e-9);
                assert!((fam.eval(&x.adjoint()) - lx).abs() < 1e-10);
                let (re, im) = crate::linalg::re_im_parts(&x);
                assert!(fam.eval(&re) <= lx + 1e-10);
                assert!(fam.eval(&im) <= lx + 1e-10);
                for g in rep.group().elements() {
                    assert!((fam.eval(&rep.act_level(g, &x, q)) - lx).abs() < 1e-10);
                }
                let m = random_complex(q, q, &mut rng);
                assert!(fam.eval(&fam.scalar_part(&m)) < 1e-12);
            }
        }
        for _ in 0..20 {
            let x = random_hermitian(2, &mut rng);
            let tau = x.trace() / 2.0;
            let centered = &x - CMat::identity(2, 2) * tau;
            assert!(herm_norm(&centered) <= fam.eval(&x) * mean_len + 1e-8);
        }
    }

    #[test]
    fn spin_norm_dominates_grid_and_matches_closed_form() {
        use crate::group::{build_su2_grid, spin_representation};
        let g = Arc::new(build_su2_grid(8).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for j in [0.5, 1.0, 1.5] {
            let rep = spin_representation(&g, j).unwrap();
            for _ in 0..20 {
                let x = random_hermitian(rep.dim(), &mut rng);
                let exact = lip_norm_operator(&rep, &x).unwrap();
                let grid = rep
                    .lip_elements()
                    .iter()
                    .map(|&e| herm_norm(&(rep.act(e, &x) - &x)) / g.length(e))
                    .fold(0.0, f64::max);
                assert!(grid <= exact * (1.0 + 1e-12), "grid {grid} exact {exact}");
                assert!(grid >= 0.7 * exact, "grid {grid} exact {exact}");
                if j == 0.5 {
                    // T = t0 + t·σ: ‖[n·σ/2, t·σ]‖ = |n × t|, so L = |t|
                    let t = [x[(0, 1)].re, -x[(0, 1)].im, (x[(0, 0)].re - x[(1, 1)].re) / 2.0];
                    let len = (t[0] * t[0] + t[1] * t[1] + t[2] * t[2]).sqrt();
                    assert!((exact - len).abs() < 1e-12 * (1.0 + len), "{exact} vs {len}");
                }
            }
        }
    }

    #[test]
    fn non_hermitian_spin_norm_matches_dense_axes() {
        use crate::group::{build_su2_grid, spin_representation};
        let g = Arc::new(build_su2_grid(6).unwrap());
        let rep = spin_representation(&g, 1.0).unwrap();
        let gens = rep.angular_momentum().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let axes = sphere_starts(4000);
        for q in 1..=2 {
            for _ in 0..5 {
                let x = random_complex(3 * q, 3 * q, &mut rng);
                let exact = lip_norm_operator(&rep, &x).unwrap();
                let iq = CMat::identity(q, q);
                let dense = axes
                    .iter()
                    .map(|n| {
                        let j = kron(&iq, &combine(gens, n));
                        (&j * &x - &x * &j).singular_values().max()
                    })
                    .fold(0.0, f64::max);
                assert!(dense <= exact * (1.0 + 1e-12), "dense {dense} exact {exact}");
                assert!(dense >= exact * (1.0 - 1e-3), "dense {dense} exact {exact}");
                let y = random_complex(3, 3, &mut rng);
                let sum = lip_norm_operator(&rep, &crate::linalg::direct_sum(&x, &y)).unwrap();
                let want = exact.max(lip_norm_operator(&rep, &y).unwrap());
                assert!((sum - want).abs() < 1e-9 * (1.0 + want), "{sum} vs {want}");
            }
        }
    }
}
