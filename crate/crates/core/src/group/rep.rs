//! Unitary representations and the conjugation action `α_x(T) = U_x T U_x*`.

use std::collections::VecDeque;
use std::sync::Arc;

use super::{GroupKind, GroupModel, Quaternion};
use crate::error::{Error, Result};
use crate::linalg::{c, ntrace, CMat, C64, ZERO};

#[derive(Debug, Clone)]
pub struct Representation {
    group: Arc<GroupModel>,
    dim: usize,
    label: String,
    two_j: Option<usize>,
    mats: Vec<CMat>,
    lip_elements: Vec<usize>,
    angular_momentum: Option<[CMat; 3]>,
}

impl Representation {
    /// Wraps one unitary per element, checking unitarity and the
    /// homomorphism property (all pairs for finite groups, on-grid products
    /// of a fixed subset for sampled groups).
    pub fn new(group: Arc<GroupModel>, label: impl Into<String>, mats: Vec<CMat>) -> Result<Self> {
        if mats.len() != group.order() {
            return Err(Error::Shape(format!(
                "{} matrices for {} group elements",
                mats.len(),
                group.order()
            )));
        }
        let dim = mats.first().map(|m| m.nrows()).unwrap_or(0);
        if dim == 0 {
            return Err(Error::Shape("representation dimension must be positive".into()));
        }
        let id = CMat::identity(dim, dim);
        for (x, u) in mats.iter().enumerate() {
            if u.nrows() != dim || u.ncols() != dim {
                return Err(Error::Shape(format!("matrix for element {x} is not {dim}x{dim}")));
            }
            if (u * u.adjoint() - &id).norm() > 1e-10 {
                return Err(Error::Validation(format!("matrix for element {x} is not unitary")));
            }
        }
        let tol = if group.is_finite() { 1e-10 } else { 1e-9 };
        let probe: Vec<usize> = if group.is_finite() {
            group.elements().collect()
        } else {
            group.elements().step_by(97.max(group.order() / 40)).collect()
        };
        for &x in &probe {
            for y in group.elements() {
                if !group.is_finite() && y % 13 != 0 {
                    continue;
                }
                if let Some(xy) = group.compose(x, y) {
                    if (&mats[xy] - &mats[x] * &mats[y]).norm() > tol {
                        return Err(Error::Validation(format!(
                            "U({x}) U({y}) differs from U({xy})"
                        )));
                    }
                }
            }
        }
        let lip_elements = effective_elements(&group, &mats);
        Ok(Representation {
            group,
            dim,
            label: label.into(),
            two_j: None,
            mats,
            lip_elements,
            angular_momentum: None,
        })
    }

    /// Extends generator matrices to the whole finite group by breadth-first
    /// products, then validates.
    pub fn from_generators(group: Arc<GroupModel>, label: impl Into<String>, generator_matrices: &[CMat]) -> Result<Self> {
        let table = group
            .table()
            .ok_or_else(|| Error::Parameter("generator construction needs a finite group".into()))?;
        let gens = group.generators();
        if gens.len() != generator_matrices.len() {
            return Err(Error::Shape(format!(
                "{} generator matrices for {} generators",
                generator_matrices.len(),
                gens.len()
            )));
        }
        let dim = generator_matrices.first().map(|m| m.nrows()).unwrap_or(1);
        let mut mats: Vec<Option<CMat>> = vec![None; group.order()];
        mats[group.identity()] = Some(CMat::identity(dim, dim));
        let mut queue = VecDeque::from([group.identity()]);
        while let Some(x) = queue.pop_front() {
            for (g, m) in gens.iter().zip(generator_matrices) {
                let y = table[*g][x];
                if mats[y].is_none() {
                    mats[y] = Some(m * mats[x].as_ref().unwrap());
                    queue.push_back(y);
                }
            }
        }
        let mats = mats
            .into_iter()
            .enumerate()
            .map(|(x, m)| m.ok_or(Error::Unreachable(x)))
            .collect::<Result<Vec<_>>>()?;
        Representation::new(group, label, mats)
    }

    pub fn group(&self) -> &Arc<GroupModel> {
        &self.group
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Twice the spin, for SU(2) representations.
    /// `(Jx, Jy, Jz)` with `U(exp(−iθ n·σ/2)) = exp(−iθ n·J)`; spin representations only.
    pub fn angular_momentum(&self) -> Option<&[CMat; 3]> {
        self.angular_momentum.as_ref()
    }

    pub fn two_j(&self) -> Option<usize> {
        self.two_j
    }

    pub fn matrix(&self, x: usize) -> &CMat {
        &self.mats[x]
    }

    /// Elements that suffice for a sup over the group of an
    /// `α`-difference quotient: `ℓ(x) > 0`, one representative per
    /// `{x, x⁻¹, -x, -x⁻¹}` orbit, and non-scalar action.
    pub fn lip_elements(&self) -> &[usize] {
        &self.lip_elements
    }

    /// `U_x T U_x*` without shape checks.
    pub fn act(&self, x: usize, t: &CMat) -> CMat {
        let u = &self.mats[x];
        u * t * u.adjoint()
    }

    /// Block-entrywise action on `M_q(B)`.
    pub fn act_level(&self, x: usize, t: &CMat, q: usize) -> CMat {
        if q == 1 {
            return self.act(x, t);
        }
        let d = self.dim;
        let u = &self.mats[x];
        let ua = u.adjoint();
        let mut out = CMat::zeros(q * d, q * d);
        for j in 0..q {
            for k in 0..q {
                let b = t.view((j * d, k * d), (d, d));
                let r = u * b * &ua;
                out.view_mut((j * d, k * d), (d, d)).copy_from(&r);
            }
        }
        out
    }

    /// `‖Σ_x w_x α_x(T) − τ(T)·1‖_F`, zero for an ergodic action.
    pub fn ergodicity_defect(&self, t: &CMat) -> f64 {
        let mut avg = CMat::zeros(self.dim, self.dim);
        for x in self.group.elements() {
            avg += self.act(x, t) * c(self.group.weights()[x], 0.0);
        }
        let tau = ntrace(t);
        for i in 0..self.dim {
            avg[(i, i)] -= tau;
        }
        avg.norm()
    }
}

fn effective_elements(group: &GroupModel, mats: &[CMat]) -> Vec<usize> {
    let mut keep = Vec::new();
    for x in group.elements() {
        if group.length(x) <= 0.0 {
            continue;
        }
        let mut orbit = vec![x, group.inverse(x)];
        if let Some(q) = group.quaternion(x) {
            if let Some(n) = group.find_quaternion(&q.neg()) {
                orbit.push(n);
                orbit.push(group.inverse(n));
            }
        }
        if orbit.iter().any(|&y| y < x) {
            continue;
        }
        let u = &mats[x];
        let s = u[(0, 0)];
        let scalar = (0..u.nrows()).all(|i| {
            (0..u.ncols()).all(|j| {
                let want = if i == j { s } else { ZERO };
                (u[(i, j)] - want).norm() < 1e-13
            })
        });
        if !scalar {
            keep.push(x);
        }
    }
    keep
}

/// `α_x(T)` with a shape check.
pub fn conjugation_action(rep: &Representation, x: usize, t: &CMat) -> Result<CMat> {
    if t.nrows() != rep.dim() || t.ncols() != rep.dim() {
        return Err(Error::Shape(format!(
            "operator is {}x{}, representation has dimension {}",
            t.nrows(),
            t.ncols(),
            rep.dim()
        )));
    }
    if x >= rep.group().order() {
        return Err(Error::Parameter(format!("element {x} out of range")));
    }
    Ok(rep.act(x, t))
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn binom(n: usize, k: usize) -> f64 {
    if k > n {
        0.0
    } else {
        factorial(n) / (factorial(k) * factorial(n - k))
    }
}

/// Spin-`j` matrix of the SU(2) element `q` in the basis `m = j, j-1, …, -j`.
///
/// Computed as the symmetric power of the defining representation, so the
/// `j = ½` matrix is `q.to_su2()` itself.
pub fn wigner_matrix(q: &Quaternion, two_j: usize) -> CMat {
    let u = q.to_su2();
    let (a, b, cc, d) = (u[(0, 0)], u[(0, 1)], u[(1, 0)], u[(1, 1)]);
    let n = two_j;
    let pw = |z: C64, e: usize| -> C64 {
        let mut r = c(1.0, 0.0);
        for _ in 0..e {
            r *= z;
        }
        r
    };
    // D[l][k]: coefficient of basis vector l in the image of basis vector k,
    // with k counting factors of the first basis vector of C².
    let raw = |l: usize, k: usize| -> C64 {
        let mut acc = ZERO;
        let lo = l.saturating_sub(n - k);
        for s in lo..=k.min(l) {
            let coef = binom(k, s) * binom(n - k, l - s);
            acc += pw(a, s) * pw(cc, k - s) * pw(b, l - s) * pw(d, n + s - k - l) * coef;
        }
        let norm = (factorial(l) * factorial(n - l) / (factorial(k) * factorial(n - k))).sqrt();
        acc * norm
    };
    CMat::from_fn(n + 1, n + 1, |i, j| raw(n - i, n - j))
}

/// The spin-`j` irreducible representation on a sampled SU(2) grid.
pub fn spin_representation(group: &Arc<GroupModel>, j: f64) -> Result<Representation> {
    if group.kind() != GroupKind::SampledSu2 {
        return Err(Error::Parameter("spin representations need an SU(2) grid".into()));
    }
    let two = 2.0 * j;
    if two.is_nan() || two < 0.0 || (two - two.round()).abs() > 1e-12 {
        return Err(Error::Parameter(format!("spin {j} is not a nonnegative half-integer")));
    }
    let two_j = two.round() as usize;
    let exact = group.max_exact_degree().unwrap_or(0);
    if two_j > exact {
        return Err(Error::Parameter(format!(
            "spin {j} needs exact quadrature to degree {two_j}; grid resolution {} reaches {exact}",
            group.resolution().unwrap_or(0)
        )));
    }
    let mats = group
        .elements()
        .map(|x| wigner_matrix(&group.quaternion(x).unwrap(), two_j))
        .collect();
    let mut rep = Representation::new(group.clone(), format!("spin-{j}"), mats)?;
    rep.two_j = Some(two_j);
    rep.angular_momentum = Some(spin_operators(two_j));
    Ok(rep)
}

/// Standard spin matrices `[Jx, Jy, Jz]` in the basis `m = j..-j`.
pub fn spin_operators(two_j: usize) -> [CMat; 3] {
    let j = two_j as f64 / 2.0;
    let n = two_j + 1;
    let mut jp = CMat::zeros(n, n);
    for i in 1..n {
        let m = j - i as f64;
        jp[(i - 1, i)] = c(((j - m) * (j + m + 1.0)).sqrt(), 0.0);
    }
    let jm = jp.adjoint();
    let jx = (&jp + &jm) * c(0.5, 0.0);
    let jy = (&jp - &jm) * c(0.0, -0.5);
    let jz = CMat::from_fn(n, n, |a, b| if a == b { c(j - a as f64, 0.0) } else { ZERO });
    [jx, jy, jz]
}
