//! Built-in small groups with their irreducible representations.

use std::f64::consts::PI;

use super::Quaternion;
use crate::linalg::{c, CMat, C64, ONE, ZERO};

/// An irreducible representation given on the group's generators, plus the
/// vector spanning the default rank-one projection.
#[derive(Debug, Clone)]
pub struct IrrepSpec {
    pub label: String,
    pub generator_matrices: Vec<CMat>,
    pub vector: Vec<C64>,
}

#[derive(Debug, Clone)]
pub struct BuiltinGroup {
    pub name: String,
    pub table: Vec<Vec<usize>>,
    pub generators: Vec<usize>,
    pub irreps: Vec<IrrepSpec>,
}

impl BuiltinGroup {
    pub fn irrep(&self, label: &str) -> Option<&IrrepSpec> {
        self.irreps.iter().find(|r| r.label == label)
    }
}

pub fn builtin(name: &str) -> Option<BuiltinGroup> {
    match name.to_ascii_lowercase().as_str() {
        "s3" => Some(s3()),
        "z2" => Some(z2()),
        "q8" => Some(q8()),
        _ => None,
    }
}

fn scalar(v: f64) -> CMat {
    CMat::from_element(1, 1, c(v, 0.0))
}

fn one_dim(label: &str, values: &[f64]) -> IrrepSpec {
    IrrepSpec {
        label: label.into(),
        generator_matrices: values.iter().map(|&v| scalar(v)).collect(),
        vector: vec![ONE],
    }
}

pub fn z2() -> BuiltinGroup {
    BuiltinGroup {
        name: "z2".into(),
        table: vec![vec![0, 1], vec![1, 0]],
        generators: vec![1],
        irreps: vec![one_dim("triv", &[1.0]), one_dim("sign", &[-1.0])],
    }
}

/// Permutations of three letters. Element order:
/// `e, (01), (12), (02), (012), (021)`; generators `(01)` and `(012)`.
pub fn s3() -> BuiltinGroup {
    let perms: [[usize; 3]; 6] = [
        [0, 1, 2],
        [1, 0, 2],
        [0, 2, 1],
        [2, 1, 0],
        [1, 2, 0],
        [2, 0, 1],
    ];
    let index = |p: [usize; 3]| perms.iter().position(|q| *q == p).unwrap();
    let table = (0..6)
        .map(|x| {
            (0..6)
                .map(|y| {
                    let (a, b) = (perms[x], perms[y]);
                    index([a[b[0]], a[b[1]], a[b[2]]])
                })
                .collect()
        })
        .collect();
    let (s, co) = (2.0 * PI / 3.0).sin_cos();
    let rot = CMat::from_row_slice(2, 2, &[c(co, 0.0), c(-s, 0.0), c(s, 0.0), c(co, 0.0)]);
    let refl = CMat::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]);
    BuiltinGroup {
        name: "s3".into(),
        table,
        generators: vec![1, 4],
        irreps: vec![
            one_dim("triv", &[1.0, 1.0]),
            one_dim("sign", &[-1.0, 1.0]),
            IrrepSpec {
                label: "std".into(),
                generator_matrices: vec![refl, rot],
                vector: vec![ONE, ZERO],
            },
        ],
    }
}

/// Quaternion group. Element order: `1, -1, i, -i, j, -j, k, -k`;
/// generators `i` and `j`.
pub fn q8() -> BuiltinGroup {
    let units = [
        Quaternion::new(1.0, 0.0, 0.0, 0.0),
        Quaternion::new(0.0, 1.0, 0.0, 0.0),
        Quaternion::new(0.0, 0.0, 1.0, 0.0),
        Quaternion::new(0.0, 0.0, 0.0, 1.0),
    ];
    let elems: Vec<Quaternion> = units.iter().flat_map(|u| [*u, u.neg()]).collect();
    let index = |q: Quaternion| {
        elems
            .iter()
            .position(|e| (e.w - q.w).abs() + (e.x - q.x).abs() + (e.y - q.y).abs() + (e.z - q.z).abs() < 1e-12)
            .unwrap()
    };
    let table = (0..8)
        .map(|x| (0..8).map(|y| index(elems[x].mul(&elems[y]))).collect())
        .collect();
    BuiltinGroup {
        name: "q8".into(),
        table,
        generators: vec![2, 4],
        irreps: vec![
            one_dim("triv", &[1.0, 1.0]),
            one_dim("ci", &[1.0, -1.0]),
            one_dim("cj", &[-1.0, 1.0]),
            one_dim("ck", &[-1.0, -1.0]),
            IrrepSpec {
                label: "std".into(),
                generator_matrices: vec![elems[2].to_su2(), elems[4].to_su2()],
                vector: vec![ONE, ZERO],
            },
        ],
    }
}
