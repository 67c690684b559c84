use thiserror::Error;

/// Errors raised by the geometric kernel, the closed forms and the polygon layer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("cannot place the zero vector on the sphere")]
    ZeroVector,
    #[error("point coincides with a pole of the great circle; projection is not unique")]
    DegenerateProjection,
    #[error("arc endpoints are equal or antipodal")]
    DegenerateArc,
    #[error("arcs share a great circle")]
    CoplanarArcs,
    #[error("arcs do not intersect")]
    NoIntersection,
    #[error("angle is undefined: a ray endpoint coincides with or is antipodal to the vertex")]
    DegenerateAngle,
    #[error("no right spherical triangle satisfies the given data: {0}")]
    InconsistentData(String),
    #[error("{name}: argument {value} outside the open domain {domain}")]
    Domain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },
    #[error("polygon needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("consecutive vertices {0} and {1} are equal or antipodal")]
    DegenerateEdge(usize, usize),
    #[error(
        "polygon is not spherically convex: vertex {vertex} lies on the wrong side of edge {edge}"
    )]
    NotConvex { edge: usize, vertex: usize },
    #[error("polygon is not contained in an open hemisphere")]
    NotInHemisphere,
    #[error("no cap of radius at most pi/2 encloses the polygon")]
    NoEnclosingCap,
    #[error("regular construction needs an odd vertex count >= 3, got {0}")]
    EvenVertexCount(usize),
    #[error("vertex {index} has norm {norm}, more than 1e-6 away from 1")]
    NotUnitVector { index: usize, norm: f64 },
    #[error("malformed polygon document: {0}")]
    Parse(String),
    #[error("invalid sampler configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(name: &'static str, value: f64, domain: &'static str) -> Error {
    Error::Domain {
        name,
        value,
        domain,
    }
}
