pub mod cloud;
pub mod codec;
pub mod error;
pub mod harness;
pub mod io;
pub mod metrics;
pub mod phy;
pub mod sampling;

pub use cloud::{BoundingBox, NeighborIndex, Point3, PointCloud};
pub use error::{Error, Result};
