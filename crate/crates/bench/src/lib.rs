//! Fixtures shared by the kernel benchmarks.

use std::sync::Arc;

use qbridge::group::builtin;
use qbridge::linalg::{projector, ONE, ZERO};
use qbridge::{
    build_finite_group, build_su2_grid, spin_representation, stability_subgroup, BridgeSpec, GroupModel,
    OptimizerSettings, ProjectionData, Representation,
};

pub fn su2(resolution: usize) -> Arc<GroupModel> {
    Arc::new(build_su2_grid(resolution).expect("valid resolution"))
}

/// Highest-weight projection of spin `j`.
pub fn spin_projection(g: &Arc<GroupModel>, j: f64) -> ProjectionData {
    let rep = Arc::new(spin_representation(g, j).expect("spin fits the grid"));
    let mut v = vec![ZERO; rep.dim()];
    v[0] = ONE;
    stability_subgroup(&rep, &projector(&v), 1e-6).expect("stabilizer")
}

/// Projection data of a builtin group's irrep with its configured vector.
pub fn finite_projection(name: &str, irrep: &str) -> ProjectionData {
    let b = builtin::builtin(name).expect("builtin group");
    let g = Arc::new(build_finite_group(&b.table, &b.generators).expect("group table"));
    let ir = b.irrep(irrep).expect("irrep label");
    let rep = Arc::new(Representation::from_generators(g, irrep, &ir.generator_matrices).expect("representation"));
    stability_subgroup(&rep, &projector(&ir.vector), 1e-8).expect("stabilizer")
}

pub fn spin_bridge(g: &Arc<GroupModel>, j: f64, q: usize) -> BridgeSpec {
    BridgeSpec::first_class(spin_projection(g, j), q).expect("bridge")
}

pub fn quick_settings() -> OptimizerSettings {
    OptimizerSettings {
        restarts: 4,
        steps: 60,
        step: 0.1,
        seed: 1,
    }
}
