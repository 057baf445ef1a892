use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// The mesh has no interior vertex.
    #[error("mesh has no interior vertex")]
    NoInteriorVertex,
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("patch seed is empty")]
    EmptySeed,
    #[error("quadrature exactness {requested} exceeds the supported maximum {max}")]
    QuadratureRange { requested: usize, max: usize },
    /// Weight system for a patch whose Gram matrix has a nontrivial kernel.
    #[error("weight system on patch of vertex {vertex} (order {order}) is singular: {kernel} kernel direction(s); grow the vicinity")]
    NontrivialKernel { vertex: usize, order: usize, kernel: usize },
    #[error("vicinity growth around vertex {vertex} exhausted the mesh without reaching a trivial kernel")]
    VicinityExhausted { vertex: usize },
    #[error("singular linear system: {0}")]
    Singular(String),
    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },
    #[error("field and operator were built on different meshes")]
    MeshMismatch,
    #[error("infeasible problem: {0}")]
    Infeasible(String),
    #[error("degenerate configuration: {0}")]
    Degenerate(String),
}
