//! Coarsening of quadrilateral meshes into block-structured high-order meshes.
//!
//! The pipeline takes a fine quad mesh with optional feature tags, builds a
//! T-mesh by propagating traces from irregular vertices and corners, assigns
//! non-negative integer lengths to the T-mesh arcs with an exact integer
//! program, extracts the coarse block layout implied by those lengths, fills
//! the blocks with smoothed structured grids, and finally emits Lagrange
//! elements of arbitrary order.
//!
//! Modules mirror the pipeline stages:
//!
//! * [`mesh`]: quad mesh container, adjacency, classification, generators, I/O
//! * [`tmesh`]: trace propagation and T-mesh assembly
//! * [`ilp`]: the quantization integer program and its exact solver
//! * [`extraction`]: split / merge / place / subdivide to a block mesh
//! * [`smoothing`]: geometry proxy, Winslow smoothing, element quality
//! * [`highorder`]: Gauss-Lobatto points and high-order node generation
//! * [`pipeline`]: end-to-end driver with stats and artifact output

pub mod error;
pub mod extraction;
pub mod geom;
pub mod highorder;
pub mod ilp;
pub mod mesh;
pub mod pipeline;
pub mod smoothing;
pub mod tmesh;

pub use error::PipelineError;
pub use extraction::{BlockStructuredMesh, CoarseLayout};
pub use geom::Vec3;
pub use highorder::{build_high_order, HighOrderMesh, Spacing};
pub use mesh::{MeshSpec, QuadMesh, VertexClass, VertexKind, VertexSite};
pub use pipeline::{
    compute_input_layout_count, run_pipeline, MeshSource, PipelineConfig, PipelineOutput, RunStats,
};
pub use smoothing::{winslow_smooth, GeometryProxy, QualityReport, SmoothResult};
pub use tmesh::{TMesh, Trace, TraceConfig};
