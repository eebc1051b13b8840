//! Forward-only feature codec.
//!
//! The encoder picks centroids by farthest-point sampling, groups each
//! centroid's nearest points, runs a shared MLP on `[p - c, p]` and max-pools
//! the group into one feature. A fine branch refines those features with two
//! attention blocks; a coarse branch projects them to a narrower width and
//! refines once. The decoder refines the received fine features once more and
//! turns them into per-centroid offsets scaled by local centroid spacing.

use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cloud::{NeighborIndex, Point3, PointCloud};
use crate::error::{Error, Result};
use crate::sampling::{
    build_patches, local_attention, max_pool, read_layers, sample_fps, write_layers,
    AttentionBlock, Dense, FeatureMatrix, Mlp,
};

pub const JSCC_MAGIC: &[u8; 8] = b"HPJW0001";
pub const DEFAULT_JSCC_SEED: u64 = 11;
pub const DEFAULT_FINE_DIM: usize = 32;
pub const DEFAULT_COARSE_DIM: usize = 8;
/// Offset vectors produced per centroid by the decoder head; larger
/// upsampling factors reuse them cyclically.
pub const OFFSET_SLOTS: usize = 16;
const LAYER_COUNT: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct JsccWeights {
    pub seed: u64,
    /// Shared point MLP, input `[p - c, p]`.
    pub embedding: Mlp,
    pub fine: [AttentionBlock; 2],
    pub coarse_projection: Dense,
    pub coarse: AttentionBlock,
    pub decoder: AttentionBlock,
    /// Maps a refined feature to `OFFSET_SLOTS` 3-vectors.
    pub offset_head: Dense,
}

impl Default for JsccWeights {
    fn default() -> Self {
        JsccWeights::seeded(DEFAULT_JSCC_SEED, DEFAULT_FINE_DIM, DEFAULT_COARSE_DIM)
    }
}

fn block<R: rand::Rng>(rng: &mut R, d: usize) -> AttentionBlock {
    AttentionBlock {
        query: Dense::uniform(rng, d, d).with_zero_bias(),
        key: Dense::uniform(rng, d, d).with_zero_bias(),
        value: Dense::uniform(rng, d, d),
    }
}

impl JsccWeights {
    /// Uniform layers drawn from `seed`; the offset head starts at zero so the
    /// untrained decoder places generated points on their centroids.
    pub fn seeded(seed: u64, fine_dim: usize, coarse_dim: usize) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let embedding = Mlp::uniform(&mut rng, &[6, fine_dim, fine_dim]).expect("consistent dims");
        let fine = [block(&mut rng, fine_dim), block(&mut rng, fine_dim)];
        let coarse_projection = Dense::uniform(&mut rng, fine_dim, coarse_dim);
        let coarse = block(&mut rng, coarse_dim);
        let decoder = block(&mut rng, fine_dim);
        JsccWeights {
            seed,
            embedding,
            fine,
            coarse_projection,
            coarse,
            decoder,
            offset_head: Dense::zeros(fine_dim, 3 * OFFSET_SLOTS),
        }
    }

    pub fn fine_dim(&self) -> usize {
        self.embedding.outputs()
    }

    pub fn coarse_dim(&self) -> usize {
        self.coarse_projection.outputs()
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.fine_dim();
        let shape = |what: &str| Err(Error::WeightShape(what.into()));
        if self.embedding.inputs() != 6 {
            return shape("point MLP must take 6 inputs");
        }
        if self
            .fine
            .iter()
            .chain([&self.decoder])
            .any(|b| b.dim() != d)
        {
            return shape("fine attention width differs from point MLP output");
        }
        if self.coarse_projection.inputs() != d || self.coarse.dim() != self.coarse_dim() {
            return shape("coarse branch widths are inconsistent");
        }
        if self.offset_head.inputs() != d || self.offset_head.outputs() != 3 * OFFSET_SLOTS {
            return shape("offset head must map the fine width to 3 x OFFSET_SLOTS");
        }
        for b in self.fine.iter().chain([&self.coarse, &self.decoder]) {
            AttentionBlock::new(b.query.clone(), b.key.clone(), b.value.clone())?;
        }
        Ok(())
    }

    /// Layers in order: point MLP (2), fine blocks (2 x q/k/v), coarse
    /// projection, coarse q/k/v, decoder q/k/v, offset head.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut layers: Vec<&Dense> = self.embedding.layers().iter().collect();
        for b in self.fine.iter() {
            layers.extend([&b.query, &b.key, &b.value]);
        }
        layers.push(&self.coarse_projection);
        for b in [&self.coarse, &self.decoder] {
            layers.extend([&b.query, &b.key, &b.value]);
        }
        layers.push(&self.offset_head);
        write_layers(JSCC_MAGIC, self.seed, &layers)
    }

    pub fn from_bytes(data: &[u8]) -> Result<Self> {
        let (seed, layers) = read_layers(JSCC_MAGIC, data)?;
        if layers.len() != LAYER_COUNT {
            return Err(Error::WeightShape(format!(
                "{} layers, expected {LAYER_COUNT}",
                layers.len()
            )));
        }
        let mut it = layers.into_iter();
        let mut take = || it.next().expect("count checked");
        let embedding = Mlp::new(vec![take(), take()])?;
        let mut blk = || AttentionBlock::new(take(), take(), take());
        let fine = [blk()?, blk()?];
        let coarse_projection = take();
        let mut blk = || AttentionBlock::new(take(), take(), take());
        let coarse = blk()?;
        let decoder = blk()?;
        let offset_head = take();
        let w = JsccWeights {
            seed,
            embedding,
            fine,
            coarse_projection,
            coarse,
            decoder,
            offset_head,
        };
        w.validate()?;
        Ok(w)
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

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureCode {
    pub centroids: Vec<Point3>,
    pub fine: FeatureMatrix,
    pub coarse: FeatureMatrix,
}

impl FeatureCode {
    pub fn len(&self) -> usize {
        self.centroids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centroids.is_empty()
    }
}

pub fn jscc_encode(
    cloud: &PointCloud,
    weights: &JsccWeights,
    centroid_count: usize,
    k: usize,
    fps_start: usize,
) -> Result<FeatureCode> {
    weights.validate()?;
    if k == 0 {
        return Err(Error::InvalidParameter(
            "group size must be positive".into(),
        ));
    }
    let picks = sample_fps(cloud, centroid_count, fps_start)?;
    let pts = cloud.positions();
    let index = NeighborIndex::build(cloud)?;
    let group = k.min(pts.len());
    let mut pooled = FeatureMatrix::zeros(picks.len(), weights.fine_dim());
    for (row, &ci) in picks.iter().enumerate() {
        let c = pts[ci];
        let members = index.knn(&c, group)?;
        let mut input = Vec::with_capacity(members.len() * 6);
        for m in &members {
            let p = pts[m.index];
            input.extend_from_slice(&[p[0] - c[0], p[1] - c[1], p[2] - c[2], p[0], p[1], p[2]]);
        }
        let local = weights.embedding.forward_matrix(&FeatureMatrix::from_flat(
            members.len(),
            6,
            input,
        )?)?;
        let all: Vec<usize> = (0..members.len()).collect();
        pooled.row_mut(row).copy_from_slice(&max_pool(&local, &all));
    }
    let centroids: Vec<Point3> = picks.iter().map(|&i| pts[i]).collect();
    let patches = build_patches(&centroids, k.min(centroids.len()))?;
    let mut fine = pooled.clone();
    for b in &weights.fine {
        fine = local_attention(&fine, &patches, b)?.0;
    }
    let projected = weights.coarse_projection.forward_matrix(&pooled)?;
    let coarse = local_attention(&projected, &patches, &weights.coarse)?.0;
    Ok(FeatureCode {
        centroids,
        fine,
        coarse,
    })
}

/// Centroids first, then generated points in rounds: round `j` adds the
/// `j`-th offset of every centroid in index order, until `target_n` points.
pub fn jscc_decode(
    code: &FeatureCode,
    weights: &JsccWeights,
    target_n: usize,
) -> Result<PointCloud> {
    weights.validate()?;
    let n = code.centroids.len();
    if code.fine.rows() != n || code.fine.dim() != weights.fine_dim() {
        return Err(Error::WeightShape(format!(
            "fine features are {}x{}, expected {n}x{}",
            code.fine.rows(),
            code.fine.dim(),
            weights.fine_dim()
        )));
    }
    if target_n < n {
        return Err(Error::TargetTooSmall {
            target: target_n,
            sampled: n,
        });
    }
    let mut out = code.centroids.clone();
    if target_n == n {
        return PointCloud::new(out);
    }
    if n == 0 {
        return Err(Error::EmptyCloud);
    }
    let patches = build_patches(&code.centroids, 4.min(n))?;
    let refined = local_attention(&code.fine, &patches, &weights.decoder)?.0;
    let offsets = weights.offset_head.forward_matrix(&refined)?;
    let index = NeighborIndex::from_points(&code.centroids)?;
    let spacing: Vec<f64> = code
        .centroids
        .iter()
        .map(|c| {
            if n > 1 {
                index.knn(c, 2).map(|nb| nb[1].dist2.sqrt())
            } else {
                Ok(0.0)
            }
        })
        .collect::<Result<_>>()?;
    let mut round = 0;
    while out.len() < target_n {
        let slot = round % OFFSET_SLOTS;
        for i in 0..n {
            if out.len() == target_n {
                break;
            }
            let o = &offsets.row(i)[3 * slot..3 * slot + 3];
            let c = code.centroids[i];
            out.push(std::array::from_fn(|a| c[a] + o[a] * spacing[i]));
        }
        round += 1;
    }
    PointCloud::new(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cloud::dist2;
    use rand::Rng;

    fn random_cloud(n: usize, seed: u64) -> PointCloud {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        PointCloud::new(
            (0..n)
                .map(|_| [rng.random(), rng.random(), rng.random()])
                .collect(),
        )
        .unwrap()
    }

    fn one_sided_mse(from: &PointCloud, to: &PointCloud) -> f64 {
        let idx = NeighborIndex::build(to).unwrap();
        from.positions()
            .iter()
            .map(|p| idx.nearest(p).dist2)
            .sum::<f64>()
            / from.len() as f64
    }

    fn symmetric_mse(a: &PointCloud, b: &PointCloud) -> f64 {
        one_sided_mse(a, b).max(one_sided_mse(b, a))
    }

    fn identity_weights(d: usize) -> JsccWeights {
        let mut w = JsccWeights::seeded(0, d, 2);
        w.embedding = Mlp::new(vec![
            Dense::scaled_identity(6, d, 1.0),
            Dense::scaled_identity(d, d, 1.0),
        ])
        .unwrap();
        w
    }

    #[test]
    fn shapes_and_identity_case() {
        let c = random_cloud(20, 1);
        let w = identity_weights(6);
        let code = jscc_encode(&c, &w, 20, 1, 0).unwrap();
        assert_eq!((code.fine.rows(), code.fine.dim()), (20, 6));
        assert_eq!((code.coarse.rows(), code.coarse.dim()), (20, 2));
        // k=1: pooled feature is [0,0,0,p]; attention adds value + residual
        let order = sample_fps(&c, 20, 0).unwrap();
        for (row, &i) in order.iter().enumerate() {
            let p = c.positions()[i];
            let mut f = vec![0.0, 0.0, 0.0, p[0], p[1], p[2]];
            for b in &w.fine {
                let v = b.value.forward(&f);
                f = f.iter().zip(&v).map(|(a, b)| a + b).collect();
            }
            for (a, b) in f.iter().zip(code.fine.row(row)) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn max_pool_dominance() {
        let rows = vec![
            vec![0.1, 0.4, -0.2],
            vec![0.3, 0.2, 0.0],
            vec![-0.5, 0.1, 0.6],
        ];
        let f = FeatureMatrix::from_rows(&rows).unwrap();
        let base = max_pool(&f, &[0, 1, 2]);
        let mut raised = rows.clone();
        raised[2][0] = 10.0;
        let got = max_pool(&FeatureMatrix::from_rows(&raised).unwrap(), &[0, 1, 2]);
        assert_eq!(got[0], 10.0);
        assert_eq!(&got[1..], &base[1..]);
    }

    #[test]
    fn centroid_features_permutation_invariant() {
        let c = random_cloud(200, 3);
        let w = JsccWeights::default();
        let a = jscc_encode(&c, &w, 32, 8, 5).unwrap();
        let perm: Vec<usize> = (0..200).map(|i| (i * 37 + 11) % 200).collect();
        let shuffled = c.select(&perm);
        let start = perm.iter().position(|&p| p == 5).unwrap();
        let b = jscc_encode(&shuffled, &w, 32, 8, start).unwrap();
        let key = |code: &FeatureCode| {
            let mut rows: Vec<(Vec<u64>, Vec<u64>)> = (0..code.len())
                .map(|i| {
                    (
                        code.fine.row(i).iter().map(|v| v.to_bits()).collect(),
                        code.coarse.row(i).iter().map(|v| v.to_bits()).collect(),
                    )
                })
                .collect();
            rows.sort();
            rows
        };
        assert_eq!(key(&a), key(&b));
    }

    #[test]
    fn deterministic() {
        let c = random_cloud(128, 4);
        let w = JsccWeights::default();
        assert_eq!(
            jscc_encode(&c, &w, 16, 8, 0).unwrap(),
            jscc_encode(&c, &w, 16, 8, 0).unwrap()
        );
    }

    #[test]
    fn zero_head_decodes_to_centroids() {
        let c = random_cloud(64, 5);
        let w = JsccWeights::default();
        let code = jscc_encode(&c, &w, 16, 8, 0).unwrap();
        let out = jscc_decode(&code, &w, 16).unwrap();
        assert_eq!(out.positions(), &code.centroids[..]);
        let up = jscc_decode(&code, &w, 50).unwrap();
        assert_eq!(up.len(), 50);
        // round-robin: point 16+i duplicates centroid i
        for i in 0..34 {
            assert_eq!(up.positions()[16 + i], code.centroids[i % 16]);
        }
    }

    #[test]
    fn nonzero_head_scales_with_spacing() {
        let c = PointCloud::new(vec![[0.0; 3], [2.0, 0.0, 0.0]]).unwrap();
        let mut w = JsccWeights::default();
        let mut bias = vec![0.0f32; 3 * OFFSET_SLOTS];
        bias[1] = 0.25;
        w.offset_head = Dense::new(
            w.fine_dim(),
            3 * OFFSET_SLOTS,
            vec![0.0; w.fine_dim() * 48],
            bias,
        )
        .unwrap();
        let code = jscc_encode(&c, &w, 2, 2, 0).unwrap();
        let out = jscc_decode(&code, &w, 4).unwrap();
        assert!((dist2(&out.positions()[2], &code.centroids[0]) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn decoding_does_not_hurt_coverage() {
        let w = JsccWeights::default();
        for seed in 0..10 {
            let c = random_cloud(512, 100 + seed);
            let code = jscc_encode(&c, &w, 128, 16, 0).unwrap();
            let cents = PointCloud::new(code.centroids.clone()).unwrap();
            let dec = jscc_decode(&code, &w, 512).unwrap();
            assert!(symmetric_mse(&c, &dec) <= symmetric_mse(&c, &cents) + 1e-15);
        }
    }

    #[test]
    fn bad_shapes_rejected() {
        let c = random_cloud(32, 6);
        let w = JsccWeights::default();
        let mut code = jscc_encode(&c, &w, 8, 4, 0).unwrap();
        assert!(matches!(
            jscc_decode(&code, &w, 4),
            Err(Error::TargetTooSmall { .. })
        ));
        code.fine = FeatureMatrix::zeros(8, 5);
        assert!(matches!(
            jscc_decode(&code, &w, 16),
            Err(Error::WeightShape(_))
        ));
        let mut broken = w.clone();
        broken.offset_head = Dense::zeros(32, 9);
        assert!(jscc_encode(&c, &broken, 8, 4, 0).is_err());
    }

    #[test]
    fn weights_round_trip() {
        let w = JsccWeights::seeded(4, 8, 4);
        assert_eq!(JsccWeights::from_bytes(&w.to_bytes()).unwrap(), w);
        assert!(
            JsccWeights::from_bytes(&crate::sampling::SamplerWeights::default().to_bytes())
                .is_err()
        );
    }
}
