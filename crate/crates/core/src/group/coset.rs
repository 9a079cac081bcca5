//! Stability subgroups of rank-one projections and the coset space `G/H`.

use std::sync::Arc;

use super::{GroupKind, GroupModel};
use super::rep::Representation;
use crate::error::{Error, Result};
use crate::linalg::{ntrace, CMat, C64, ZERO};

/// Default stability tolerance for a group kind.
pub fn default_stability_tol(kind: GroupKind) -> f64 {
    match kind {
        GroupKind::Finite => 1e-8,
        GroupKind::SampledSu2 => 1e-6,
    }
}

#[derive(Debug, Clone)]
pub struct ProjectionData {
    rep: Arc<Representation>,
    p: CMat,
    vector: Vec<C64>,
    stability: Vec<usize>,
    tol: f64,
}

impl ProjectionData {
    pub fn rep(&self) -> &Arc<Representation> {
        &self.rep
    }

    pub fn projection(&self) -> &CMat {
        &self.p
    }

    /// Unit vector spanning the range of `P`.
    pub fn vector(&self) -> &[C64] {
        &self.vector
    }

    pub fn stability_elements(&self) -> &[usize] {
        &self.stability
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// `U_x v`, a unit vector spanning `α_x(P)`.
    pub fn orbit_vector(&self, x: usize) -> Vec<C64> {
        let u = self.rep.matrix(x);
        (0..u.nrows())
            .map(|i| (0..u.ncols()).fold(ZERO, |acc, k| acc + u[(i, k)] * self.vector[k]))
            .collect()
    }

    pub fn moved(&self, x: usize) -> CMat {
        self.rep.act(x, &self.p)
    }
}

/// Operator-norm distance between the rank-one projections onto unit vectors,
/// `sqrt(1 - |<a,b>|²)`, evaluated as the norm of the part of `b` orthogonal to `a`.
fn projector_distance(a: &[C64], b: &[C64]) -> f64 {
    let o = a.iter().zip(b).fold(ZERO, |acc, (x, y)| acc + x.conj() * y);
    a.iter()
        .zip(b)
        .map(|(x, y)| (y - o * x).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Finds `{x : ‖α_x(P) − P‖ ≤ tol}` and, for finite groups, checks it is a subgroup.
pub fn stability_subgroup(rep: &Arc<Representation>, p: &CMat, tol: f64) -> Result<ProjectionData> {
    let d = rep.dim();
    if p.nrows() != d || p.ncols() != d {
        return Err(Error::Shape(format!("projection is {}x{}, expected {d}x{d}", p.nrows(), p.ncols())));
    }
    let ptol = 1e-10_f64.max(tol.min(1e-8));
    if (p - p.adjoint()).norm() > ptol || (p * p - p).norm() > ptol {
        return Err(Error::Validation("P is not an orthogonal projection".into()));
    }
    if (ntrace(p) * d as f64 - 1.0).norm() > ptol {
        return Err(Error::Validation("P does not have rank one".into()));
    }
    let k = (0..d)
        .max_by(|&a, &b| p[(a, a)].re.total_cmp(&p[(b, b)].re))
        .unwrap();
    let s = p[(k, k)].re.sqrt();
    let vector: Vec<C64> = (0..d).map(|i| p[(i, k)] / s).collect();

    let mut data = ProjectionData {
        rep: rep.clone(),
        p: p.clone(),
        vector,
        stability: Vec::new(),
        tol,
    };
    let group = rep.group();
    data.stability = group
        .elements()
        .filter(|&x| projector_distance(&data.vector, &data.orbit_vector(x)) <= tol)
        .collect();

    if let Some(t) = group.table() {
        let mut member = vec![false; group.order()];
        for &h in &data.stability {
            member[h] = true;
        }
        for &a in &data.stability {
            for &b in &data.stability {
                if !member[t[a][b]] {
                    return Err(Error::ToleranceInconsistent { tol });
                }
            }
        }
    }
    Ok(data)
}

/// Representatives of `G/H` with Haar weights and the quotient metric.
#[derive(Debug, Clone)]
pub struct CosetSpace {
    group: Arc<GroupModel>,
    reps: Vec<usize>,
    members: Vec<Vec<usize>>,
    element_coset: Vec<usize>,
    weights: Vec<f64>,
    coarse_weights: Option<Vec<f64>>,
    metric: Vec<Vec<f64>>,
    stability: Vec<usize>,
}

impl CosetSpace {
    pub fn group(&self) -> &Arc<GroupModel> {
        &self.group
    }

    pub fn len(&self) -> usize {
        self.reps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }

    /// Coset representatives `x_i`.
    pub fn points(&self) -> &[usize] {
        &self.reps
    }

    pub fn members(&self, i: usize) -> &[usize] {
        &self.members[i]
    }

    pub fn coset_of(&self, x: usize) -> usize {
        self.element_coset[x]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn coarse_weights(&self) -> Option<&[f64]> {
        self.coarse_weights.as_deref()
    }

    pub fn metric(&self) -> &[Vec<f64>] {
        &self.metric
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.metric[i][j]
    }

    /// The coset `eH`; always index 0.
    pub fn base_index(&self) -> usize {
        0
    }

    pub fn stability_elements(&self) -> &[usize] {
        &self.stability
    }

    pub fn diameter(&self) -> f64 {
        self.metric.iter().flatten().cloned().fold(0.0, f64::max)
    }

    /// Coset of `y x_i` (finite groups).
    pub fn translate(&self, y: usize, i: usize) -> Option<usize> {
        self.group.compose(y, self.reps[i]).map(|z| self.element_coset[z])
    }

    /// Largest violation of the metric axioms.
    pub fn metric_defect(&self) -> f64 {
        let n = self.len();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            worst = worst.max(self.metric[i][i].abs());
            for j in 0..n {
                worst = worst.max((self.metric[i][j] - self.metric[j][i]).abs());
                worst = worst.max(-self.metric[i][j]);
                for k in 0..n {
                    worst = worst.max(self.metric[i][k] - self.metric[i][j] - self.metric[j][k]);
                }
            }
        }
        worst
    }
}

/// Partitions the group into cosets `xH` by the value of `α_x(P)`.
pub fn coset_space(stability: &ProjectionData) -> Result<CosetSpace> {
    let rep = stability.rep();
    let group = rep.group().clone();
    let tol = stability.tol().max(1e-12);

    let mut order: Vec<usize> = vec![group.identity()];
    order.extend(group.elements().filter(|&x| x != group.identity()));

    let mut reps: Vec<usize> = Vec::new();
    let mut rep_vecs: Vec<Vec<C64>> = Vec::new();
    let mut members: Vec<Vec<usize>> = Vec::new();
    let mut element_coset = vec![usize::MAX; group.order()];
    for x in order {
        let v = stability.orbit_vector(x);
        let mut hit: Option<usize> = None;
        for (i, r) in rep_vecs.iter().enumerate() {
            if projector_distance(r, &v) <= tol {
                if let Some(prev) = hit {
                    return Err(Error::Coset(format!(
                        "element {x} matches cosets {prev} and {i} at tolerance {tol:e}"
                    )));
                }
                hit = Some(i);
            }
        }
        match hit {
            Some(i) => {
                members[i].push(x);
                element_coset[x] = i;
            }
            None => {
                element_coset[x] = reps.len();
                reps.push(x);
                rep_vecs.push(v);
                members.push(vec![x]);
            }
        }
    }
    if members[0].len() != stability.stability_elements().len() {
        return Err(Error::Coset(format!(
            "base coset has {} elements but the stability set has {}",
            members[0].len(),
            stability.stability_elements().len()
        )));
    }

    let sum_over = |w: &[f64]| -> Vec<f64> {
        members.iter().map(|m| m.iter().map(|&x| w[x]).sum()).collect()
    };
    let weights = sum_over(group.weights());
    let coarse_weights = group.coarse_weights().map(sum_over);

    let n = reps.len();
    let h = stability.stability_elements();
    let mut metric = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let dij = h
                .iter()
                .map(|&hh| group.relative_length(reps[i], reps[j], hh))
                .fold(f64::INFINITY, f64::min);
            let dji = h
                .iter()
                .map(|&hh| group.relative_length(reps[j], reps[i], hh))
                .fold(f64::INFINITY, f64::min);
            let d = dij.min(dji);
            metric[i][j] = d;
            metric[j][i] = d;
        }
    }
    // shortest-path closure; a no-op for exact quotient metrics
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = metric[i][k] + metric[k][j];
                if via < metric[i][j] {
                    metric[i][j] = via;
                }
            }
        }
    }

    Ok(CosetSpace {
        group,
        reps,
        members,
        element_coset,
        weights,
        coarse_weights,
        metric,
        stability: h.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{build_finite_group, build_su2_grid, builtin, spin_representation};
    use crate::linalg::projector;

    fn finite(name: &str, label: &str) -> (Arc<Representation>, ProjectionData) {
        let b = builtin::builtin(name).unwrap();
        let g = Arc::new(build_finite_group(&b.table, &b.generators).unwrap());
        let spec = b.irrep(label).unwrap();
        let rep = Arc::new(Representation::from_generators(g, label, &spec.generator_matrices).unwrap());
        let pd = stability_subgroup(&rep, &projector(&spec.vector), 1e-8).unwrap();
        (rep, pd)
    }

    #[test]
    fn s3_standard_has_order_two_stabilizer() {
        let (rep, pd) = finite("s3", "std");
        // exhaustive check
        let brute: Vec<usize> = rep
            .group()
            .elements()
            .filter(|&x| (rep.act(x, pd.projection()) - pd.projection()).norm() < 1e-9)
            .collect();
        assert_eq!(pd.stability_elements(), brute.as_slice());
        assert_eq!(brute, vec![0, 1]);
        let cs = coset_space(&pd).unwrap();
        assert_eq!(cs.len(), 3);
        for i in 0..3 {
            assert!((cs.weights()[i] - 1.0 / 3.0).abs() < 1e-15);
        }
        // brute force min over h of ℓ(x_i⁻¹ x_j h)
        let g = rep.group();
        let t = g.table().unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let (xi, xj) = (cs.points()[i], cs.points()[j]);
                let want = [0usize, 1]
                    .iter()
                    .map(|&h| g.length(t[t[g.inverse(xi)][xj]][h]))
                    .fold(f64::INFINITY, f64::min);
                assert_eq!(cs.distance(i, j), want);
            }
        }
        assert!(cs.metric_defect() <= 1e-12);
    }

    #[test]
    fn trivial_and_full_stabilizers() {
        let (_, pd) = finite("z2", "sign");
        let cs = coset_space(&pd).unwrap();
        assert_eq!(cs.len(), 1);
        assert_eq!(cs.metric(), &[vec![0.0]]);

        let g = Arc::new(build_finite_group(&[vec![0]], &[]).unwrap());
        let rep = Arc::new(Representation::new(g, "triv", vec![CMat::identity(1, 1)]).unwrap());
        let pd = stability_subgroup(&rep, &CMat::identity(1, 1), 1e-8).unwrap();
        assert_eq!(pd.stability_elements(), &[0]);
    }

    #[test]
    fn trivial_stabilizer_gives_whole_group() {
        // regular-like faithful action of Z2 on C² swapping coordinates, P = e1
        let g = Arc::new(build_finite_group(&[vec![0, 1], vec![1, 0]], &[1]).unwrap());
        let swap = CMat::from_row_slice(2, 2, &[ZERO, C64::new(1.0, 0.0), C64::new(1.0, 0.0), ZERO]);
        let rep = Arc::new(Representation::from_generators(g.clone(), "perm", &[swap]).unwrap());
        let pd = stability_subgroup(&rep, &projector(&[C64::new(1.0, 0.0), ZERO]), 1e-8).unwrap();
        let cs = coset_space(&pd).unwrap();
        assert_eq!(cs.len(), 2);
        assert_eq!(cs.distance(0, 1), g.length(1));
    }

    #[test]
    fn q8_cosets() {
        let (_, pd) = finite("q8", "std");
        assert_eq!(pd.stability_elements(), &[0, 1, 6, 7]);
        let cs = coset_space(&pd).unwrap();
        assert_eq!(cs.len(), 2);
        assert_eq!(cs.distance(0, 1), 1.0);
    }

    #[test]
    fn rejects_non_projection() {
        let (rep, _) = finite("s3", "std");
        let half = CMat::identity(2, 2) * C64::new(0.5, 0.0);
        assert!(matches!(stability_subgroup(&rep, &half, 1e-8), Err(Error::Validation(_))));
    }

    #[test]
    fn su2_highest_weight_stabilizer_is_z_circle() {
        let g = Arc::new(build_su2_grid(8).unwrap());
        for j in [0.5, 1.0, 2.0] {
            let rep = Arc::new(spin_representation(&g, j).unwrap());
            let d = rep.dim();
            let mut v = vec![ZERO; d];
            v[0] = C64::new(1.0, 0.0);
            let pd = stability_subgroup(&rep, &projector(&v), 1e-6).unwrap();
            for &h in pd.stability_elements() {
                let q = g.quaternion(h).unwrap();
                assert!(q.x.abs() < 1e-9 && q.y.abs() < 1e-9);
            }
            let cs = coset_space(&pd).unwrap();
            assert!((cs.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(cs.metric_defect() < 1e-10);
            for i in 0..cs.len() {
                let (_, beta, _) = g.euler(cs.points()[i]).unwrap();
                assert!((cs.distance(0, i) - beta).abs() < 1e-9);
            }
        }
    }
}
