//! Shared fixtures for the criterion benchmarks.

use robin_iso::mesh::{triangulate, Mesh};
use robin_iso::DomainSpec;

/// Unit disk mesh at the given target edge length.
pub fn disk_mesh(h: f64) -> Mesh {
    triangulate(&DomainSpec::disk(1.0), h).expect("disk meshes at any reasonable h")
}
