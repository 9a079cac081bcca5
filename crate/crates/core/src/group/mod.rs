//! Groups with length functions: finite Cayley tables and a sampled SU(2) grid.

pub mod builtin;
pub mod coset;
pub mod rep;

use std::collections::{HashMap, VecDeque};
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, CMat};

pub use coset::{coset_space, stability_subgroup, CosetSpace, ProjectionData};
pub use rep::{conjugation_action, spin_operators, spin_representation, wigner_matrix, Representation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GroupKind {
    Finite,
    SampledSu2,
}

/// Unit quaternion `w + xi + yj + zk`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quaternion {
    pub const ONE: Quaternion = Quaternion { w: 1.0, x: 0.0, y: 0.0, z: 0.0 };

    pub fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Quaternion { w, x, y, z }
    }

    /// Rotation by `angle` about the z axis, as an SU(2) element.
    pub fn rz(angle: f64) -> Self {
        let h = 0.5 * angle;
        Quaternion::new(h.cos(), 0.0, 0.0, h.sin())
    }

    pub fn ry(angle: f64) -> Self {
        let h = 0.5 * angle;
        Quaternion::new(h.cos(), 0.0, h.sin(), 0.0)
    }

    /// Rotation by `angle` about a unit axis.
    pub fn axis_angle(axis: [f64; 3], angle: f64) -> Self {
        let n = (axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]).sqrt();
        let (s, cs) = (0.5 * angle).sin_cos();
        Quaternion::new(cs, s * axis[0] / n, s * axis[1] / n, s * axis[2] / n)
    }

    /// `rz(a) * ry(b) * rz(g)`.
    pub fn from_euler(a: f64, b: f64, g: f64) -> Self {
        Quaternion::rz(a).mul(&Quaternion::ry(b)).mul(&Quaternion::rz(g))
    }

    pub fn mul(&self, o: &Quaternion) -> Quaternion {
        Quaternion {
            w: self.w * o.w - self.x * o.x - self.y * o.y - self.z * o.z,
            x: self.w * o.x + self.x * o.w + self.y * o.z - self.z * o.y,
            y: self.w * o.y - self.x * o.z + self.y * o.w + self.z * o.x,
            z: self.w * o.z + self.x * o.y - self.y * o.x + self.z * o.w,
        }
    }

    pub fn conj(&self) -> Quaternion {
        Quaternion::new(self.w, -self.x, -self.y, -self.z)
    }

    pub fn neg(&self) -> Quaternion {
        Quaternion::new(-self.w, -self.x, -self.y, -self.z)
    }

    /// Rotation angle of the associated SO(3) element, in `[0, π]`.
    pub fn geodesic_angle(&self) -> f64 {
        2.0 * self.w.abs().min(1.0).acos()
    }

    /// The matrix `[[w - iz, -y - ix], [y - ix, w + iz]]`.
    pub fn to_su2(&self) -> CMat {
        CMat::from_row_slice(
            2,
            2,
            &[
                c(self.w, -self.z),
                c(-self.y, -self.x),
                c(self.y, -self.x),
                c(self.w, self.z),
            ],
        )
    }

    fn key(&self) -> [i64; 4] {
        let r = |v: f64| {
            let k = (v * 1e7).round() as i64;
            // fold signed zero
            if k == 0 {
                0
            } else {
                k
            }
        };
        [r(self.w), r(self.x), r(self.y), r(self.z)]
    }

    fn dist(&self, o: &Quaternion) -> f64 {
        ((self.w - o.w).powi(2) + (self.x - o.x).powi(2) + (self.y - o.y).powi(2) + (self.z - o.z).powi(2))
            .sqrt()
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Su2Grid {
    pub resolution: usize,
    /// Number of polar intervals.
    pub polar: usize,
    /// Number of azimuthal nodes in the first Euler angle.
    pub azimuth: usize,
    pub quats: Vec<Quaternion>,
    pub euler: Vec<(f64, f64, f64)>,
    lookup: HashMap<[i64; 4], usize>,
}

/// Group elements are opaque indices into the model.
#[derive(Debug, Clone)]
pub struct GroupModel {
    kind: GroupKind,
    identity: usize,
    inverse: Vec<usize>,
    table: Option<Vec<Vec<usize>>>,
    generators: Vec<usize>,
    weights: Vec<f64>,
    coarse_weights: Option<Vec<f64>>,
    length: Vec<f64>,
    grid: Option<Su2Grid>,
}

impl GroupModel {
    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    pub fn is_finite(&self) -> bool {
        self.kind == GroupKind::Finite
    }

    pub fn order(&self) -> usize {
        self.inverse.len()
    }

    pub fn elements(&self) -> std::ops::Range<usize> {
        0..self.order()
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn inverse(&self, x: usize) -> usize {
        self.inverse[x]
    }

    pub fn generators(&self) -> &[usize] {
        &self.generators
    }

    /// Product `xy` if it is a stored element.
    pub fn compose(&self, x: usize, y: usize) -> Option<usize> {
        match (&self.table, &self.grid) {
            (Some(t), _) => Some(t[x][y]),
            (None, Some(g)) => g.find(&g.quats[x].mul(&g.quats[y])),
            _ => None,
        }
    }

    pub fn table(&self) -> Option<&Vec<Vec<usize>>> {
        self.table.as_ref()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Weights of the nested coarser rule (sampled grids only).
    pub fn coarse_weights(&self) -> Option<&[f64]> {
        self.coarse_weights.as_deref()
    }

    pub fn length(&self, x: usize) -> f64 {
        self.length[x]
    }

    pub fn lengths(&self) -> &[f64] {
        &self.length
    }

    /// `ℓ(x⁻¹ y h)`, computed exactly even when the product is off-grid.
    pub fn relative_length(&self, x: usize, y: usize, h: usize) -> f64 {
        match (&self.table, &self.grid) {
            (Some(t), _) => self.length[t[t[self.inverse[x]][y]][h]],
            (None, Some(g)) => g.quats[x].conj().mul(&g.quats[y]).mul(&g.quats[h]).geodesic_angle(),
            _ => unreachable!(),
        }
    }

    /// Haar average of the length function.
    pub fn mean_length(&self) -> f64 {
        self.weights.iter().zip(&self.length).map(|(w, l)| w * l).sum()
    }

    pub fn max_length(&self) -> f64 {
        self.length.iter().cloned().fold(0.0, f64::max)
    }

    pub fn quaternion(&self, x: usize) -> Option<Quaternion> {
        self.grid.as_ref().map(|g| g.quats[x])
    }

    /// Euler angles `(α, β, γ)` of a grid element.
    pub fn euler(&self, x: usize) -> Option<(f64, f64, f64)> {
        self.grid.as_ref().map(|g| g.euler[x])
    }

    pub fn resolution(&self) -> Option<usize> {
        self.grid.as_ref().map(|g| g.resolution)
    }

    /// Largest total spin `L` whose matrix elements the grid integrates exactly.
    pub fn max_exact_degree(&self) -> Option<usize> {
        self.grid
            .as_ref()
            .map(|g| g.polar.min(g.azimuth.saturating_sub(1)))
    }

    /// Index of the grid element equal to `q` (`-q` is a distinct element).
    pub fn find_quaternion(&self, q: &Quaternion) -> Option<usize> {
        self.grid.as_ref().and_then(|g| g.find(q))
    }
}

impl Su2Grid {
    fn find(&self, q: &Quaternion) -> Option<usize> {
        if let Some(&i) = self.lookup.get(&q.key()) {
            return Some(i);
        }
        // rounding boundary: fall back to a scan
        self.quats
            .iter()
            .position(|p| p.dist(q) < 1e-9)
    }
}

/// Validates a Cayley table and builds the word-length model.
pub fn build_finite_group(table: &[Vec<usize>], generators: &[usize]) -> Result<GroupModel> {
    let n = table.len();
    if n == 0 {
        return Err(Error::GroupAxiom("empty table".into()));
    }
    for (i, row) in table.iter().enumerate() {
        if row.len() != n {
            return Err(Error::GroupAxiom(format!("row {i} has length {} (expected {n})", row.len())));
        }
        if let Some(&bad) = row.iter().find(|&&v| v >= n) {
            return Err(Error::GroupAxiom(format!("closure: entry {bad} out of range in row {i}")));
        }
    }
    let identity = (0..n)
        .find(|&e| (0..n).all(|x| table[e][x] == x && table[x][e] == x))
        .ok_or_else(|| Error::GroupAxiom("identity: no two-sided identity".into()))?;
    let mut inverse = vec![usize::MAX; n];
    for x in 0..n {
        let inv = (0..n).find(|&y| table[x][y] == identity && table[y][x] == identity);
        match inv {
            Some(y) => inverse[x] = y,
            None => return Err(Error::GroupAxiom(format!("inverses: element {x} has no inverse"))),
        }
    }
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                if table[table[x][y]][z] != table[x][table[y][z]] {
                    return Err(Error::GroupAxiom(format!(
                        "associativity: ({x}*{y})*{z} != {x}*({y}*{z})"
                    )));
                }
            }
        }
    }
    if let Some(&g) = generators.iter().find(|&&g| g >= n) {
        return Err(Error::Parameter(format!("generator {g} out of range")));
    }

    // word length for the symmetric generating set S ∪ S⁻¹
    let mut steps: Vec<usize> = generators.iter().flat_map(|&g| [g, inverse[g]]).collect();
    steps.sort_unstable();
    steps.dedup();
    let mut word = vec![usize::MAX; n];
    word[identity] = 0;
    let mut queue = VecDeque::from([identity]);
    while let Some(x) = queue.pop_front() {
        for &s in &steps {
            let y = table[x][s];
            if word[y] == usize::MAX {
                word[y] = word[x] + 1;
                queue.push_back(y);
            }
        }
    }
    if let Some(x) = word.iter().position(|&w| w == usize::MAX) {
        return Err(Error::Unreachable(x));
    }

    // class maximum
    let mut length = vec![0.0; n];
    for y in 0..n {
        let m = (0..n)
            .map(|x| word[table[table[x][y]][inverse[x]]])
            .max()
            .unwrap_or(0);
        length[y] = m as f64;
    }
    check_length_axioms(table, &inverse, identity, &length)?;

    Ok(GroupModel {
        kind: GroupKind::Finite,
        identity,
        inverse,
        table: Some(table.to_vec()),
        generators: generators.to_vec(),
        weights: vec![1.0 / n as f64; n],
        coarse_weights: None,
        length,
        grid: None,
    })
}

fn check_length_axioms(table: &[Vec<usize>], inverse: &[usize], identity: usize, length: &[f64]) -> Result<()> {
    let n = table.len();
    if length[identity] != 0.0 {
        return Err(Error::LengthAxiom("l(e) = 0".into()));
    }
    for x in 0..n {
        if x != identity && length[x] <= 0.0 {
            return Err(Error::LengthAxiom(format!("positivity at element {x}")));
        }
        if length[inverse[x]] != length[x] {
            return Err(Error::LengthAxiom(format!("symmetry at element {x}")));
        }
        for y in 0..n {
            if length[table[x][y]] > length[x] + length[y] {
                return Err(Error::LengthAxiom(format!("subadditivity at ({x}, {y})")));
            }
            if length[table[table[x][y]][inverse[x]]] != length[y] {
                return Err(Error::LengthAxiom(format!("conjugation invariance at ({x}, {y})")));
            }
        }
    }
    Ok(())
}

/// Clenshaw–Curtis weights on nodes `cos(kπ/n)`, normalized to sum to 1.
pub(crate) fn clenshaw_curtis(n: usize) -> Vec<f64> {
    if n == 0 {
        return vec![1.0];
    }
    let nf = n as f64;
    (0..=n)
        .map(|k| {
            let ck = if k == 0 || k == n { 1.0 } else { 2.0 };
            let mut s = 1.0;
            for j in 1..=n / 2 {
                let bj = if 2 * j == n { 1.0 } else { 2.0 };
                s -= bj / (4.0 * (j * j) as f64 - 1.0) * (2.0 * (j * k) as f64 * PI / nf).cos();
            }
            0.5 * ck / nf * s
        })
        .collect()
}

/// Deterministic Euler-angle product grid on SU(2) with Haar quadrature weights.
///
/// Polar angles are the `n + 1` Clenshaw–Curtis nodes in `cos β` with
/// `n = 2⌊r/2⌋`; the first Euler angle takes `M = 2⌈r/2⌉` equispaced values on
/// `[0, 2π)` and the last `2M` values on `[0, 4π)`. Products of spin-`j`
/// matrix elements up to total spin `L` integrate exactly when `L ≤ n` and
/// `L < M`. Coincident samples at the poles are merged.
pub fn build_su2_grid(resolution: usize) -> Result<GroupModel> {
    if resolution < 2 {
        return Err(Error::Parameter(format!("resolution must be at least 2, got {resolution}")));
    }
    let polar = 2 * (resolution / 2);
    let azimuth = 2 * resolution.div_ceil(2);
    let wb = clenshaw_curtis(polar);
    let wb_coarse = clenshaw_curtis(polar / 2);

    let mut quats: Vec<Quaternion> = Vec::new();
    let mut euler = Vec::new();
    let mut weights: Vec<f64> = Vec::new();
    let mut coarse: Vec<f64> = Vec::new();
    let mut lookup: HashMap<[i64; 4], usize> = HashMap::new();

    let mut push = |q: Quaternion, e: (f64, f64, f64), w: f64, wc: f64| {
        let key = q.key();
        match lookup.get(&key) {
            Some(&i) => {
                weights[i] += w;
                coarse[i] += wc;
            }
            None => {
                lookup.insert(key, quats.len());
                quats.push(q);
                euler.push(e);
                weights.push(w);
                coarse.push(wc);
            }
        }
    };

    // identity first so that it is element 0
    push(Quaternion::ONE, (0.0, 0.0, 0.0), 0.0, 0.0);
    let m = azimuth as f64;
    for kb in 0..=polar {
        let beta = PI * kb as f64 / polar as f64;
        for ka in 0..azimuth {
            let alpha = 2.0 * PI * ka as f64 / m;
            for kg in 0..2 * azimuth {
                let gamma = 2.0 * PI * kg as f64 / m;
                let w = wb[kb] / (m * 2.0 * m);
                let wc = if kb % 2 == 0 && ka % 2 == 0 && kg % 2 == 0 {
                    wb_coarse[kb / 2] / (0.5 * m * m)
                } else {
                    0.0
                };
                push(Quaternion::from_euler(alpha, beta, gamma), (alpha, beta, gamma), w, wc);
            }
        }
    }

    let grid = Su2Grid {
        resolution,
        polar,
        azimuth,
        quats,
        euler,
        lookup,
    };
    let mut inverse = Vec::with_capacity(grid.quats.len());
    for q in &grid.quats {
        let i = grid
            .find(&q.conj())
            .ok_or_else(|| Error::Validation("grid is not closed under inversion".into()))?;
        inverse.push(i);
    }
    let mut length: Vec<f64> = grid.quats.iter().map(|q| q.geodesic_angle()).collect();
    // pin ℓ(x⁻¹) = ℓ(x) bitwise
    for x in 0..length.len() {
        if inverse[x] > x {
            length[inverse[x]] = length[x];
        }
    }
    Ok(GroupModel {
        kind: GroupKind::SampledSu2,
        identity: 0,
        inverse,
        table: None,
        generators: Vec::new(),
        weights,
        coarse_weights: Some(coarse),
        length,
        grid: Some(grid),
    })
}
