//! Coherent-state symbol calculus and the slice-map conditional expectations
//! of the bridge `D = C(G/H, B)` (first class) or `C(G/H, B^m ⊗ B^n)`
//! (second class).
//!
//! Level-`q` elements of `D` are stored per coset point as `q×q` blocks of
//! size `D×D`, with `D = d` or `D = d_m·d_n` (the `m` factor outermost).

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{coset_space, CosetSpace, ProjectionData};
use crate::linalg::{c, kron, op_norm, partial_ntrace, random_hermitian, CMat, C64, ZERO};
use crate::metric::{lip_norm_function, lip_norm_operator, SymbolFunction};

static NEXT_FAMILY: AtomicU64 = AtomicU64::new(1);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BridgeClass {
    /// `C(G/H)` against `B = L(H)`.
    FunctionMatrix,
    /// `B^m` against `B^n`.
    MatrixMatrix,
}

/// One operator algebra of the bridge with its coherent states on `G/H`.
#[derive(Debug, Clone)]
pub struct MatrixSide {
    proj: ProjectionData,
    vectors: Vec<Vec<C64>>,
    moved: Vec<CMat>,
}

impl MatrixSide {
    fn new(proj: ProjectionData, coset: &CosetSpace) -> Self {
        let vectors: Vec<Vec<C64>> = coset.points().iter().map(|&x| proj.orbit_vector(x)).collect();
        let moved = vectors
            .iter()
            .map(|v| CMat::from_fn(v.len(), v.len(), |i, j| v[i] * v[j].conj()))
            .collect();
        MatrixSide { proj, vectors, moved }
    }

    pub fn dim(&self) -> usize {
        self.proj.rep().dim()
    }

    pub fn projection(&self) -> &ProjectionData {
        &self.proj
    }

    /// `α_{x_i}(P)`.
    pub fn moved(&self, i: usize) -> &CMat {
        &self.moved[i]
    }

    /// Unit vector spanning `α_{x_i}(P)`.
    pub fn vector(&self, i: usize) -> &[C64] {
        &self.vectors[i]
    }

    /// `tr(P α_{x_i}(P)) = |⟨v, U_{x_i} v⟩|²`.
    pub fn overlap(&self, i: usize) -> f64 {
        let base = &self.vectors[0];
        base.iter()
            .zip(&self.vectors[i])
            .fold(ZERO, |acc, (a, b)| acc + a.conj() * b)
            .norm_sqr()
    }

    /// Scalar covariant symbol `x_i ↦ tr(T α_{x_i}(P))` for Hermitian `T`.
    pub fn symbol_scalar(&self, t: &CMat) -> Vec<f64> {
        self.vectors.iter().map(|v| expectation(t, v)).collect()
    }

    /// `d Σ_i w_i f_i α_{x_i}(P)` for real scalar `f`.
    pub fn berezin_scalar(&self, weights: &[f64], f: &[f64]) -> CMat {
        let d = self.dim();
        let mut out = CMat::zeros(d, d);
        for ((p, w), v) in self.moved.iter().zip(weights).zip(f) {
            out += p * c(w * v * d as f64, 0.0);
        }
        out
    }
}

/// `⟨v, T v⟩` (real part).
pub(crate) fn expectation(t: &CMat, v: &[C64]) -> f64 {
    let mut acc = ZERO;
    for i in 0..v.len() {
        let mut row = ZERO;
        for j in 0..v.len() {
            row += t[(i, j)] * v[j];
        }
        acc += v[i].conj() * row;
    }
    acc.re
}

/// Data fixing a bridge with conditional expectations at level `q`.
#[derive(Debug, Clone)]
pub struct BridgeSpec {
    class: BridgeClass,
    coset: Arc<CosetSpace>,
    sides: Vec<Arc<MatrixSide>>,
    q: usize,
    r_omega: f64,
    family: u64,
}

impl BridgeSpec {
    /// `C(G/H)` against `L(H)`, with `H` the stabilizer of `P`.
    pub fn first_class(proj: ProjectionData, q: usize) -> Result<Self> {
        let coset = Arc::new(coset_space(&proj)?);
        Self::first_class_on(coset, proj, q)
    }

    /// As [`BridgeSpec::first_class`] on an already computed coset space.
    pub fn first_class_on(coset: Arc<CosetSpace>, proj: ProjectionData, q: usize) -> Result<Self> {
        check_level(q)?;
        check_same_stabilizer(&coset, &proj)?;
        let side = Arc::new(MatrixSide::new(proj, &coset));
        let r_omega = 1.0 / side.dim() as f64;
        Ok(BridgeSpec {
            class: BridgeClass::FunctionMatrix,
            coset,
            sides: vec![side],
            q,
            r_omega,
            family: NEXT_FAMILY.fetch_add(1, Ordering::Relaxed),
        })
    }

    /// `L(H^m)` against `L(H^n)`; the two stabilizers must coincide.
    pub fn second_class(pm: ProjectionData, pn: ProjectionData, q: usize) -> Result<Self> {
        let coset = Arc::new(coset_space(&pm)?);
        Self::second_class_on(coset, pm, pn, q)
    }

    pub fn second_class_on(coset: Arc<CosetSpace>, pm: ProjectionData, pn: ProjectionData, q: usize) -> Result<Self> {
        check_level(q)?;
        if !Arc::ptr_eq(pm.rep().group(), pn.rep().group()) {
            return Err(Error::Spec("the two representations are of different groups".into()));
        }
        check_same_stabilizer(&coset, &pm)?;
        check_same_stabilizer(&coset, &pn)?;
        let sm = Arc::new(MatrixSide::new(pm, &coset));
        let sn = Arc::new(MatrixSide::new(pn, &coset));
        let r_omega = 1.0 / (sm.dim() * sn.dim()) as f64;
        Ok(BridgeSpec {
            class: BridgeClass::MatrixMatrix,
            coset,
            sides: vec![sm, sn],
            q,
            r_omega,
            family: NEXT_FAMILY.fetch_add(1, Ordering::Relaxed),
        })
    }

    /// Same bridge at another amplification level.
    pub fn with_level(&self, q: usize) -> Result<Self> {
        check_level(q)?;
        let mut s = self.clone();
        s.q = q;
        Ok(s)
    }

    /// Identifies every level of one bridge; used for consistency checks.
    pub fn family_key(&self) -> u64 {
        self.family
    }

    pub fn class(&self) -> BridgeClass {
        self.class
    }

    pub fn coset(&self) -> &Arc<CosetSpace> {
        &self.coset
    }

    pub fn sides(&self) -> &[Arc<MatrixSide>] {
        &self.sides
    }

    pub fn side(&self, k: usize) -> &Arc<MatrixSide> {
        &self.sides[k]
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn r_omega(&self) -> f64 {
        self.r_omega
    }

    /// Size of one block of `D`.
    pub fn block_dim(&self) -> usize {
        self.sides.iter().map(|s| s.dim()).product()
    }

    fn side_index(&self, side: usize) -> Result<usize> {
        if side < self.sides.len() {
            Ok(side)
        } else {
            Err(Error::Parameter(format!("bridge has no side {side}")))
        }
    }

    fn check_operator(&self, t: &CMat, side: usize) -> Result<()> {
        let n = self.q * self.sides[side].dim();
        if t.nrows() != n || t.ncols() != n {
            return Err(Error::Shape(format!("operator is {}x{}, expected {n}x{n}", t.nrows(), t.ncols())));
        }
        Ok(())
    }

    fn check_function(&self, f: &SymbolFunction) -> Result<()> {
        if f.values.len() != self.coset.len() || f.q != self.q {
            return Err(Error::Shape(format!(
                "function has {} values of size {}, expected {} of size {}",
                f.values.len(),
                f.q,
                self.coset.len(),
                self.q
            )));
        }
        Ok(())
    }

    fn check_element(&self, e: &BridgeElement) -> Result<()> {
        let n = self.q * self.block_dim();
        if e.values.len() != self.coset.len() || e.values.iter().any(|v| v.nrows() != n || v.ncols() != n) {
            return Err(Error::Shape("bridge element does not match the specification".into()));
        }
        Ok(())
    }
}

fn check_level(q: usize) -> Result<()> {
    if q == 0 {
        Err(Error::Parameter("amplification level must be at least 1".into()))
    } else {
        Ok(())
    }
}

fn check_same_stabilizer(coset: &CosetSpace, proj: &ProjectionData) -> Result<()> {
    let mut a = coset.stability_elements().to_vec();
    let mut b = proj.stability_elements().to_vec();
    a.sort_unstable();
    b.sort_unstable();
    if a != b {
        return Err(Error::Spec(format!(
            "stability subgroups differ ({} vs {} elements)",
            a.len(),
            b.len()
        )));
    }
    Ok(())
}

/// An element of `M_q(D)`: one `(q·D)×(q·D)` matrix per coset point.
#[derive(Debug, Clone, PartialEq)]
pub struct BridgeElement {
    pub q: usize,
    pub block: usize,
    pub values: Vec<CMat>,
}

impl BridgeElement {
    /// Sup over coset points of the operator norm.
    pub fn norm(&self) -> f64 {
        self.values.iter().map(op_norm).fold(0.0, f64::max)
    }

    pub fn mul(&self, o: &BridgeElement) -> BridgeElement {
        BridgeElement {
            q: self.q,
            block: self.block,
            values: self.values.iter().zip(&o.values).map(|(a, b)| a * b).collect(),
        }
    }

    pub fn sub(&self, o: &BridgeElement) -> BridgeElement {
        BridgeElement {
            q: self.q,
            block: self.block,
            values: self.values.iter().zip(&o.values).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn adjoint(&self) -> BridgeElement {
        BridgeElement {
            q: self.q,
            block: self.block,
            values: self.values.iter().map(|a| a.adjoint()).collect(),
        }
    }
}

/// `ω_q(x_i) = 1_q ⊗ α_{x_i}(P)` or `1_q ⊗ α_{x_i}(P^m) ⊗ α_{x_i}(P^n)`.
pub fn pivot(spec: &BridgeSpec) -> BridgeElement {
    let iq = CMat::identity(spec.q, spec.q);
    let values = (0..spec.coset.len())
        .map(|i| {
            let local = match spec.class {
                BridgeClass::FunctionMatrix => spec.sides[0].moved(i).clone(),
                BridgeClass::MatrixMatrix => kron(spec.sides[0].moved(i), spec.sides[1].moved(i)),
            };
            kron(&iq, &local)
        })
        .collect();
    BridgeElement {
        q: spec.q,
        block: spec.block_dim(),
        values,
    }
}

/// `x_i ↦ f_i ⊗ 1_D`.
pub fn embed_function(spec: &BridgeSpec, f: &SymbolFunction) -> Result<BridgeElement> {
    spec.check_function(f)?;
    let id = CMat::identity(spec.block_dim(), spec.block_dim());
    Ok(BridgeElement {
        q: spec.q,
        block: spec.block_dim(),
        values: f.values.iter().map(|v| kron(v, &id)).collect(),
    })
}

/// The constant element `T ⊗ 1_n` (side 0) or `1_m ⊗ T` (side 1), block-wise.
pub fn embed_operator(spec: &BridgeSpec, t: &CMat, side: usize) -> Result<BridgeElement> {
    let side = spec.side_index(side)?;
    spec.check_operator(t, side)?;
    let local = match (spec.class, side) {
        (BridgeClass::FunctionMatrix, _) => t.clone(),
        (BridgeClass::MatrixMatrix, 0) => {
            let dn = spec.sides[1].dim();
            kron(t, &CMat::identity(dn, dn))
        }
        (BridgeClass::MatrixMatrix, _) => {
            let (dm, dn) = (spec.sides[0].dim(), spec.sides[1].dim());
            let q = spec.q;
            let id = CMat::identity(dm, dm);
            let mut out = CMat::zeros(q * dm * dn, q * dm * dn);
            for j in 0..q {
                for k in 0..q {
                    let b = t.view((j * dn, k * dn), (dn, dn)).into_owned();
                    out.view_mut((j * dm * dn, k * dm * dn), (dm * dn, dm * dn))
                        .copy_from(&kron(&id, &b));
                }
            }
            out
        }
    };
    Ok(BridgeElement {
        q: spec.q,
        block: spec.block_dim(),
        values: vec![local; spec.coset.len()],
    })
}

/// `E^A_q`: the normalized partial trace over `B` at every point.
pub fn cond_exp_a(spec: &BridgeSpec, f: &BridgeElement) -> Result<SymbolFunction> {
    spec.check_element(f)?;
    let dims = [spec.q, spec.block_dim()];
    Ok(SymbolFunction {
        q: spec.q,
        values: f.values.iter().map(|v| partial_ntrace(v, &dims, &[true, false])).collect(),
    })
}

/// `E^B_q` (first class) or `E^m_q`/`E^n_q` (second class, `side` 0/1):
/// trace out the other tensor factor pointwise, then integrate over `G/H`.
pub fn cond_exp_b(spec: &BridgeSpec, f: &BridgeElement, side: usize) -> Result<CMat> {
    let side = spec.side_index(side)?;
    spec.check_element(f)?;
    let n = spec.q * spec.sides[side].dim();
    let mut out = CMat::zeros(n, n);
    let w = spec.coset.weights();
    for (i, v) in f.values.iter().enumerate() {
        let local = match spec.class {
            BridgeClass::FunctionMatrix => v.clone(),
            BridgeClass::MatrixMatrix => {
                let dims = [spec.q, spec.sides[0].dim(), spec.sides[1].dim()];
                let keep = if side == 0 { [true, true, false] } else { [true, false, true] };
                partial_ntrace(v, &dims, &keep)
            }
        };
        out += local * c(w[i], 0.0);
    }
    Ok(out)
}

/// `σ_T(x_i)`: the `q×q` matrix of `tr(T_{jk} α_{x_i}(P))`.
pub fn covariant_symbol(spec: &BridgeSpec, t: &CMat, side: usize) -> Result<SymbolFunction> {
    let side = spec.side_index(side)?;
    spec.check_operator(t, side)?;
    let s = &spec.sides[side];
    let (q, d) = (spec.q, s.dim());
    let values = (0..spec.coset.len())
        .map(|i| {
            let v = s.vector(i);
            CMat::from_fn(q, q, |j, k| {
                let mut acc = ZERO;
                for a in 0..d {
                    let mut row = ZERO;
                    for b in 0..d {
                        row += t[(j * d + a, k * d + b)] * v[b];
                    }
                    acc += v[a].conj() * row;
                }
                acc
            })
        })
        .collect();
    Ok(SymbolFunction { q, values })
}

/// `σ̆_f = d Σ_i w_i f_i ⊗ α_{x_i}(P)`.
pub fn contravariant_symbol(spec: &BridgeSpec, f: &SymbolFunction, side: usize) -> Result<CMat> {
    let side = spec.side_index(side)?;
    spec.check_function(f)?;
    let s = &spec.sides[side];
    let d = s.dim();
    let w = spec.coset.weights();
    let mut out = CMat::zeros(spec.q * d, spec.q * d);
    for (i, v) in f.values.iter().enumerate() {
        out += kron(v, s.moved(i)) * c(w[i] * d as f64, 0.0);
    }
    Ok(out)
}

/// First class: `σ̆(σ_T)` on the same side. Second class: `Φ^m(T) = σ̆^m(σ^n_T)`
/// for `T` on side `from`, landing on the other side.
pub fn phi_composite(spec: &BridgeSpec, t: &CMat, from: usize) -> Result<CMat> {
    let from = spec.side_index(from)?;
    let to = match spec.class {
        BridgeClass::FunctionMatrix => 0,
        BridgeClass::MatrixMatrix => 1 - from,
    };
    let f = covariant_symbol(spec, t, from)?;
    contravariant_symbol(spec, &f, to)
}

/// `r_ω⁻¹ E^A_q(ω_q T ω_q)` evaluated through the bridge (first class).
pub fn phi_a_definitional(spec: &BridgeSpec, t: &CMat) -> Result<SymbolFunction> {
    if spec.class != BridgeClass::FunctionMatrix {
        return Err(Error::Spec("E^A exists only for the first class".into()));
    }
    let w = pivot(spec);
    let e = embed_operator(spec, t, 0)?;
    let mut out = cond_exp_a(spec, &w.mul(&e).mul(&w))?;
    for v in &mut out.values {
        *v *= c(1.0 / spec.r_omega, 0.0);
    }
    Ok(out)
}

/// `r_ω⁻¹ E^B_q(ω_q f ω_q)` evaluated through the bridge (first class).
pub fn phi_b_definitional(spec: &BridgeSpec, f: &SymbolFunction) -> Result<CMat> {
    if spec.class != BridgeClass::FunctionMatrix {
        return Err(Error::Spec("E^B on functions exists only for the first class".into()));
    }
    let w = pivot(spec);
    let e = embed_function(spec, f)?;
    Ok(cond_exp_b(spec, &w.mul(&e).mul(&w), 0)? * c(1.0 / spec.r_omega, 0.0))
}

/// `r_ω⁻¹ E^{to}_q(ω_q T ω_q)` for `T` on side `from` (second class).
pub fn phi_cross_definitional(spec: &BridgeSpec, t: &CMat, from: usize) -> Result<CMat> {
    if spec.class != BridgeClass::MatrixMatrix {
        return Err(Error::Spec("cross maps exist only for the second class".into()));
    }
    let from = spec.side_index(from)?;
    let w = pivot(spec);
    let e = embed_operator(spec, t, from)?;
    Ok(cond_exp_b(spec, &w.mul(&e).mul(&w), 1 - from)? * c(1.0 / spec.r_omega, 0.0))
}

#[derive(Debug, Clone, Serialize)]
pub struct AdmissibilityReport {
    pub q: usize,
    pub trials: usize,
    pub violations: usize,
    /// Largest `L(Φ(x)) − L(x)` seen.
    pub worst_slack: f64,
    /// Largest equivariance defect (finite groups only).
    pub equivariance_defect: Option<f64>,
}

impl AdmissibilityReport {
    pub fn passed(&self) -> bool {
        self.violations == 0 && self.equivariance_defect.is_none_or(|d| d <= 1e-10)
    }
}

fn random_hermitian_function<R: Rng + ?Sized>(n: usize, q: usize, rng: &mut R) -> SymbolFunction {
    SymbolFunction {
        q,
        values: (0..n).map(|_| random_hermitian(q, rng)).collect(),
    }
}

/// Random-input check that both maps are Lipschitz contractions at the
/// spec's level, plus exact equivariance on finite groups.
pub fn verify_admissibility<R: Rng + ?Sized>(spec: &BridgeSpec, trials: usize, rng: &mut R) -> Result<AdmissibilityReport> {
    let tol = 1e-9;
    let q = spec.q;
    let mut report = AdmissibilityReport {
        q,
        trials: 0,
        violations: 0,
        worst_slack: f64::NEG_INFINITY,
        equivariance_defect: None,
    };
    let mut record = |lhs: f64, rhs: f64| {
        report.trials += 1;
        let slack = lhs - rhs;
        report.worst_slack = report.worst_slack.max(slack);
        if slack > tol {
            report.violations += 1;
        }
    };
    let n = spec.coset.len();
    match spec.class {
        BridgeClass::FunctionMatrix => {
            let rep = spec.sides[0].proj.rep();
            for _ in 0..trials {
                let t = random_hermitian(q * rep.dim(), rng);
                let f = covariant_symbol(spec, &t, 0)?;
                record(lip_norm_function(&spec.coset, &f)?, lip_norm_operator(rep, &t)?);
                let g = random_hermitian_function(n, q, rng);
                let s = contravariant_symbol(spec, &g, 0)?;
                record(lip_norm_operator(rep, &s)?, lip_norm_function(&spec.coset, &g)?);
            }
        }
        BridgeClass::MatrixMatrix => {
            for _ in 0..trials {
                for from in 0..2 {
                    let src = spec.sides[from].proj.rep();
                    let dst = spec.sides[1 - from].proj.rep();
                    let t = random_hermitian(q * src.dim(), rng);
                    let s = phi_composite(spec, &t, from)?;
                    record(lip_norm_operator(dst, &s)?, lip_norm_operator(src, &t)?);
                }
            }
        }
    }

    let group = spec.coset.group().clone();
    if group.is_finite() {
        let mut worst: f64 = 0.0;
        for y in group.elements() {
            let yi = group.inverse(y);
            let perm: Vec<usize> = (0..n).map(|i| spec.coset.translate(yi, i).unwrap()).collect();
            match spec.class {
                BridgeClass::FunctionMatrix => {
                    let rep = spec.sides[0].proj.rep();
                    let t = random_hermitian(q * rep.dim(), rng);
                    let moved = rep.act_level(y, &t, q);
                    let lhs = covariant_symbol(spec, &moved, 0)?;
                    let rhs = covariant_symbol(spec, &t, 0)?;
                    for (l, &pi) in lhs.values.iter().zip(&perm) {
                        worst = worst.max((l - &rhs.values[pi]).norm());
                    }
                    let f = random_hermitian_function(n, q, rng);
                    let shifted = SymbolFunction {
                        q,
                        values: (0..n).map(|i| f.values[perm[i]].clone()).collect(),
                    };
                    let a = contravariant_symbol(spec, &shifted, 0)?;
                    let b = rep.act_level(y, &contravariant_symbol(spec, &f, 0)?, q);
                    worst = worst.max((a - b).norm());
                }
                BridgeClass::MatrixMatrix => {
                    for from in 0..2 {
                        let src = spec.sides[from].proj.rep();
                        let dst = spec.sides[1 - from].proj.rep();
                        let t = random_hermitian(q * src.dim(), rng);
                        let a = phi_composite(spec, &src.act_level(y, &t, q), from)?;
                        let b = dst.act_level(y, &phi_composite(spec, &t, from)?, q);
                        worst = worst.max((a - b).norm());
                    }
                }
            }
        }
        report.equivariance_defect = Some(worst);
    }
    Ok(report)
}
