//! Bridge bounds between quantum metric spaces built from unitary group
//! representations: coherent-state symbols, slice-map conditional
//! expectations, Lipschitz seminorms and reach/height/length estimates.

pub mod berezin;
pub mod bounds;
pub mod error;
pub mod group;
pub mod linalg;
pub mod metric;
pub mod optimize;
pub mod oracle;

pub use berezin::{BridgeClass, BridgeElement, BridgeSpec};
pub use bounds::{
    assemble_first_class, assemble_second_class, first_class_parts, trek_bounds, BoundReport, BoundValue,
    FirstClassParts, Provenance, TrekReport,
};
pub use error::{Error, Result};
pub use group::{
    build_finite_group, build_su2_grid, coset_space, spin_representation, stability_subgroup,
    CosetSpace, GroupKind, GroupModel, ProjectionData, Quaternion, Representation,
};
pub use linalg::{CMat, C64};
pub use metric::{Observable, SymbolFunction};
pub use optimize::OptimizerSettings;
