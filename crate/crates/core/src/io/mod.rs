//! File formats: PLY point clouds and the bit-exact bitstream container.

pub mod bitstream;
pub mod ply;

pub use bitstream::{BitReader, BitWriter, Bitstream};
pub use ply::{read_ply, read_ply_from, write_ply, write_ply_to, PlyFormat};
