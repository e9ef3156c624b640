//! Topological indices of vector fields on compact planar surfaces.
//!
//! The crate computes three related integer invariants and the dynamical
//! machinery around them:
//!
//! - winding numbers of nonvanishing fields along closed contours,
//! - Poincare-Hopf indices at isolated interior zeros,
//! - fixed-point indices of planar maps via displacement winding, and
//! - the vector-field index of a block of zeros (the fixed-point index of
//!   a small-time flow map), which stays defined when the block meets the
//!   surface boundary.
//!
//! On top of those sit zero-set scanning, block decomposition with
//! isolating contours, dependency sets, Poincare return maps with cycle
//! detection, area-preservation probes, and a scenario runner that checks
//! the common-zero statements on concrete field pairs.

pub mod area;
pub mod blocks;
pub mod cycles;
pub mod error;
pub mod export;
pub mod expr;
pub mod field;
pub mod flow;
pub mod geom;
pub mod index;
pub mod lima;
pub mod parser;
pub mod poly;
pub mod scenario;
pub mod surface;
pub mod zeros;

pub use area::{is_area_preserving, AreaReport};
pub use blocks::{decompose_blocks, dependency_set, Block, DependencySet};
pub use cycles::{detect_cycles, poincare_return_map, Cycle, ReturnMap, ReturnSample};
pub use error::{
    BlockError, CycleError, EvalError, FlowError, IndexError, ParseError, SurfaceError,
};
pub use expr::{ScalarExpr, Var};
pub use field::{
    check_bracket_condition, check_bracket_condition_numeric, lie_bracket, lie_bracket_at, wedge,
    wedge_at, BracketVerdict, ComboField, FieldExpr, FnField, VectorField,
};
pub use flow::{
    check_permutes_integral_curves, check_positive_invariance, flow, flow_endpoint,
    flow_map_jacobian, nelson_compose, BoundaryPolicy, FlowConfig, FlowMethod, Termination,
    Trajectory,
};
pub use geom::{Bounds, Curve, Mat2, Vec2};
pub use index::{
    field_winding, fixed_point_index, index_at_zero, is_essential, nonsingular_homotopy_check,
    vector_field_index, winding_number, HomotopyVerdict, IndexConfig, IndexResult, Region,
};
pub use lima::{build_lima_pair, LimaField};
pub use parser::{parse_field, parse_scalar};
pub use poly::Poly;
pub use scenario::{
    run_scenario, run_scenario_path, CheckKind, CheckStatus, Report, Scenario, ScenarioError,
};
pub use surface::{Surface, SurfaceKind, SurfaceSpec, BOUNDARY_TOL};
pub use zeros::{find_zeros, newton_polish, GridInfo, PolishedZero, ZeroScan};
