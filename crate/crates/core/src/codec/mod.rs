//! Source and channel coding: octree geometry, arithmetic coding, the
//! convolutional code, and the learned-feature codec.

mod entropy;
mod fec;
mod jscc;
mod octree;

pub use entropy::{entropy_decode, entropy_encode, EntropyDecoder, EntropyEncoder};
pub use fec::{
    fec_decode_hard, fec_decode_soft, fec_encode, CodeRate, CodedBits, CONSTRAINT_LENGTH,
};
pub use jscc::{
    jscc_decode, jscc_encode, FeatureCode, JsccWeights, DEFAULT_COARSE_DIM, DEFAULT_FINE_DIM,
    DEFAULT_JSCC_SEED, JSCC_MAGIC, OFFSET_SLOTS,
};
pub use octree::{
    octree_build, octree_decode, octree_encode, OctreeCode, MAX_VOXELS, OCTREE_MAGIC,
};
