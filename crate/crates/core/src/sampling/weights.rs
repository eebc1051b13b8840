//! Sampler parameters and their flat binary file.
//!
//! Layout (all little-endian): 8-byte magic, u64 seed, u32 layer count, then
//! per layer u32 outputs, u32 inputs, `outputs*inputs` f32 weights (row-major)
//! and `outputs` f32 biases. The embedding layers come first, followed by the
//! query, key and value projections.

use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::layers::{AttentionBlock, Dense, Mlp};
use crate::error::{Error, Result};

pub const WEIGHTS_MAGIC: &[u8; 8] = b"HPSW0001";

/// Seed of the built-in parameters.
pub const DEFAULT_WEIGHTS_SEED: u64 = 7;
pub const DEFAULT_EMBED_DIM: usize = 32;

#[derive(Debug, Clone, PartialEq)]
pub struct SamplerWeights {
    pub seed: u64,
    pub embedding: Mlp,
    pub attention: AttentionBlock,
}

impl Default for SamplerWeights {
    fn default() -> Self {
        SamplerWeights::seeded(DEFAULT_WEIGHTS_SEED, DEFAULT_EMBED_DIM)
    }
}

impl SamplerWeights {
    pub fn new(seed: u64, embedding: Mlp, attention: AttentionBlock) -> Result<Self> {
        if embedding.inputs() != 3 {
            return Err(Error::WeightShape(format!(
                "embedding takes {} inputs, expected 3",
                embedding.inputs()
            )));
        }
        if embedding.outputs() != attention.dim() {
            return Err(Error::WeightShape(format!(
                "embedding width {} does not match attention width {}",
                embedding.outputs(),
                attention.dim()
            )));
        }
        Ok(SamplerWeights {
            seed,
            embedding,
            attention,
        })
    }

    /// Two-layer `3 -> d -> d` embedding and uniform query/key projections
    /// drawn from `seed`; the value projection is `-I`.
    ///
    /// With the residual, `-I` values make each refined feature the centroid
    /// embedding minus its attention-weighted neighborhood mean, so the channel
    /// spread measures how much a point differs from its surroundings.
    pub fn seeded(seed: u64, dim: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let embedding = Mlp::uniform(&mut rng, &[3, dim, dim]).expect("consistent dims");
        let query = Dense::uniform(&mut rng, dim, dim).with_zero_bias();
        let key = Dense::uniform(&mut rng, dim, dim).with_zero_bias();
        let value = Dense::scaled_identity(dim, dim, -1.0);
        let attention = AttentionBlock::new(query, key, value).expect("square projections");
        SamplerWeights {
            seed,
            embedding,
            attention,
        }
    }

    pub fn dim(&self) -> usize {
        self.attention.dim()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut layers: Vec<&Dense> = self.embedding.layers().iter().collect();
        layers.extend([
            &self.attention.query,
            &self.attention.key,
            &self.attention.value,
        ]);
        write_layers(WEIGHTS_MAGIC, self.seed, &layers)
    }

    pub fn from_bytes(data: &[u8]) -> Result<Self> {
        let (seed, mut layers) = read_layers(WEIGHTS_MAGIC, data)?;
        if layers.len() < 4 {
            return Err(Error::WeightShape(format!(
                "{} layers, need at least one embedding layer and three projections",
                layers.len()
            )));
        }
        let value = layers.pop().expect("len checked");
        let key = layers.pop().expect("len checked");
        let query = layers.pop().expect("len checked");
        SamplerWeights::new(
            seed,
            Mlp::new(layers)?,
            AttentionBlock::new(query, key, value)?,
        )
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let data = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&data)
    }
}

pub(crate) fn write_layers(magic: &[u8; 8], seed: u64, layers: &[&Dense]) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(magic);
    out.extend_from_slice(&seed.to_le_bytes());
    out.extend_from_slice(&(layers.len() as u32).to_le_bytes());
    for l in layers {
        out.extend_from_slice(&(l.outputs() as u32).to_le_bytes());
        out.extend_from_slice(&(l.inputs() as u32).to_le_bytes());
        for v in l.weight().iter().chain(l.bias()) {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

pub(crate) fn read_layers(magic: &[u8; 8], data: &[u8]) -> Result<(u64, Vec<Dense>)> {
    let mut cur = Cursor { data, pos: 0 };
    if cur.take(8)? != magic {
        return Err(Error::Decode(format!(
            "missing {} header",
            String::from_utf8_lossy(magic)
        )));
    }
    let seed = u64::from_le_bytes(cur.take(8)?.try_into().expect("8 bytes"));
    let count = cur.u32()? as usize;
    let mut layers = Vec::with_capacity(count.min(64));
    for _ in 0..count {
        let outputs = cur.u32()? as usize;
        let inputs = cur.u32()? as usize;
        let n = outputs
            .checked_mul(inputs)
            .filter(|n| n.saturating_add(outputs).saturating_mul(4) <= data.len())
            .ok_or_else(|| Error::WeightShape(format!("layer {outputs}x{inputs} is too large")))?;
        let weight = cur.f32s(n)?;
        let bias = cur.f32s(outputs)?;
        layers.push(Dense::new(inputs, outputs, weight, bias)?);
    }
    if cur.pos != data.len() {
        return Err(Error::Decode(format!(
            "{} trailing bytes after weights",
            data.len() - cur.pos
        )));
    }
    Ok((seed, layers))
}

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.data.len() - self.pos < n {
            return Err(Error::Decode("weights file is truncated".into()));
        }
        let s = &self.data[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(
            self.take(4)?.try_into().expect("4 bytes"),
        ))
    }

    fn f32s(&mut self, n: usize) -> Result<Vec<f32>> {
        Ok(self
            .take(n * 4)?
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
            .collect())
    }
}
