//! Jacobian safe zones and the edge checks built on them.

mod correct;
mod edge;
mod zone;

pub use correct::{correct_path, push_out, CorrectedPath, CorrectionFailure, CorrectionOptions};
pub use edge::{
    check_edge_dense, check_edge_dense_bisect, check_edge_dense_skipping, check_edge_fuzzy, check_edge_fuzzy_with, DenseResult, DenseVerdict,
    EdgeCertificate, EdgeVerdict, IntervalSet, KnownEndpoint,
};
pub(crate) use edge::subdivisions;
pub use zone::{compute_safe_zone, Hyperplane, InCollision, SafeZone, ZoneError, ZoneOptions};
pub(crate) use zone::{zone_with_scratch, ZoneScratch};
