use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("malformed mesh: {0}")]
    Malformed(String),
    #[error("non-manifold incidence at faces {faces:?}")]
    NonManifold { faces: Vec<[usize; 3]> },
    #[error("inconsistent orientation across face {face:?}")]
    Orientation { face: [usize; 3] },
    #[error("degenerate tetrahedron {tet} (volume {volume:e})")]
    Degenerate { tet: usize, volume: f64 },
    #[error("complex is not connected ({components} components)")]
    Disconnected { components: usize },
    #[error("complex has no boundary")]
    EmptyBoundary,
    #[error("resource budget exceeded: {requested} simplices requested, limit {limit}")]
    Budget { requested: usize, limit: usize },
    #[error("geometry: {0}")]
    Geometry(String),
    #[error("construction: {0}")]
    Construction(String),
    #[error("material: {0}")]
    Material(String),
    #[error("linear solver: {0}")]
    Solver(String),
    #[error("ambiguous kernel: no spectral gap at tolerance; ladder {ladder:?}")]
    AmbiguousKernel { ladder: Vec<f64> },
    #[error("source: {0}")]
    Source(String),
    #[error("consistency: {0}")]
    Consistency(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Boundary(#[from] dirac_boundary::BoundaryError),
}
