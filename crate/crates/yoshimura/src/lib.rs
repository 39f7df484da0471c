//! Geometry kernel for Yoshimura-patterned deployable booms.
//!
//! A boom is a stack of identical origami modules, each of which snaps into a
//! small catalog of metastable shapes. This crate derives the module geometry,
//! enumerates the catalog, chains module transforms into backbones and facet
//! meshes, and searches state assignments that fit a target curve.

pub mod error;
pub mod fk;
pub mod geometry;
pub mod ik;
pub mod io;
pub mod states;

pub use error::{Error, Result};
pub use fk::{backbone, boom_mesh, config_count, strain_report, Backbone, BoomDesign, FacetMesh, StrainReport};
pub use geometry::{
    bottom_ring, coplanarity_residual, derive_params, mid_plane, mid_plane_with, top_ring,
    transform, DerivedParams, HomTransform, MidPlane, MidPlaneEntry, MidPlaneOptions, ModuleSpec,
    Ring, StateParams,
};
pub use ik::{
    nearest_point, refine_window, rms_error, solve, solve_beam, solve_dp, solve_exhaustive,
    solve_greedy, FitResult, SearchAlgorithm, SearchOptions, TargetCurve,
};
pub use io::{
    emit_design, export_backbone, export_fit_report, export_mesh, load_design, sig9,
    DesignDocument,
};
pub use states::{
    deployed_state, flat_fold_beta, folded_state, one_popout_state, resolve_state,
    self_packed_state, solve_beta_in, solve_beta_out, state_catalog, two_popout_state,
    MetastableState, PopOutKind, PopOutSolution, StateLabel,
};
