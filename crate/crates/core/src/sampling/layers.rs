//! Forward-only building blocks shared by the sampler and the feature codec:
//! affine layers, ReLU MLPs, patches and patch-local dot-product attention.

use rand::Rng;

use crate::cloud::{NeighborIndex, Point3};
use crate::error::{Error, Result};

/// Row-major `rows x dim` matrix of per-point features.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    rows: usize,
    dim: usize,
    data: Vec<f64>,
}

impl FeatureMatrix {
    pub fn zeros(rows: usize, dim: usize) -> Self {
        FeatureMatrix {
            rows,
            dim,
            data: vec![0.0; rows * dim],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::WeightShape("ragged feature rows".into()));
        }
        Ok(FeatureMatrix {
            rows: rows.len(),
            dim,
            data: rows.concat(),
        })
    }

    pub fn from_flat(rows: usize, dim: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * dim {
            return Err(Error::WeightShape(format!(
                "{} values for {rows}x{dim} features",
                data.len()
            )));
        }
        Ok(FeatureMatrix { rows, dim, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn select(&self, indices: &[usize]) -> FeatureMatrix {
        let mut data = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        FeatureMatrix {
            rows: indices.len(),
            dim: self.dim,
            data,
        }
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }
}

/// Affine layer `y = W x + b` with `W` stored row-major (`outputs x inputs`).
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    inputs: usize,
    outputs: usize,
    weight: Vec<f32>,
    bias: Vec<f32>,
}

impl Dense {
    pub fn new(inputs: usize, outputs: usize, weight: Vec<f32>, bias: Vec<f32>) -> Result<Self> {
        if inputs == 0 || outputs == 0 {
            return Err(Error::WeightShape("zero-sized layer".into()));
        }
        if weight.len() != inputs * outputs || bias.len() != outputs {
            return Err(Error::WeightShape(format!(
                "layer {outputs}x{inputs} given {} weights and {} biases",
                weight.len(),
                bias.len()
            )));
        }
        if !weight.iter().chain(&bias).all(|v| v.is_finite()) {
            return Err(Error::WeightShape("non-finite parameter".into()));
        }
        Ok(Dense {
            inputs,
            outputs,
            weight,
            bias,
        })
    }

    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Dense {
            inputs,
            outputs,
            weight: vec![0.0; inputs * outputs],
            bias: vec![0.0; outputs],
        }
    }

    /// Scaled identity on the leading `min(inputs, outputs)` channels.
    pub fn scaled_identity(inputs: usize, outputs: usize, scale: f32) -> Self {
        let mut d = Dense::zeros(inputs, outputs);
        for i in 0..inputs.min(outputs) {
            d.weight[i * inputs + i] = scale;
        }
        d
    }

    /// Weights and biases drawn uniformly from `[-1/sqrt(fan_in), 1/sqrt(fan_in)]`.
    pub fn uniform<R: Rng>(rng: &mut R, inputs: usize, outputs: usize) -> Self {
        let limit = 1.0 / (inputs as f32).sqrt();
        let mut draw =
            |n: usize| -> Vec<f32> { (0..n).map(|_| rng.random_range(-limit..=limit)).collect() };
        let weight = draw(inputs * outputs);
        let bias = draw(outputs);
        Dense {
            inputs,
            outputs,
            weight,
            bias,
        }
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    pub fn weight(&self) -> &[f32] {
        &self.weight
    }

    pub fn bias(&self) -> &[f32] {
        &self.bias
    }

    pub fn with_zero_bias(mut self) -> Self {
        self.bias.iter_mut().for_each(|b| *b = 0.0);
        self
    }

    pub fn forward_into(&self, x: &[f64], out: &mut [f64]) {
        debug_assert_eq!(x.len(), self.inputs);
        for (o, slot) in out.iter_mut().enumerate() {
            let row = &self.weight[o * self.inputs..(o + 1) * self.inputs];
            let mut acc = self.bias[o] as f64;
            for (w, v) in row.iter().zip(x) {
                acc += *w as f64 * v;
            }
            *slot = acc;
        }
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.outputs];
        self.forward_into(x, &mut out);
        out
    }

    pub fn forward_matrix(&self, x: &FeatureMatrix) -> Result<FeatureMatrix> {
        if x.dim() != self.inputs {
            return Err(Error::WeightShape(format!(
                "layer expects {} inputs, features have {}",
                self.inputs,
                x.dim()
            )));
        }
        let mut out = FeatureMatrix::zeros(x.rows(), self.outputs);
        for i in 0..x.rows() {
            self.forward_into(x.row(i), out.row_mut(i));
        }
        Ok(out)
    }
}

/// Affine layers with ReLU between consecutive layers (none after the last).
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    layers: Vec<Dense>,
}

impl Mlp {
    pub fn new(layers: Vec<Dense>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::WeightShape("MLP needs at least one layer".into()));
        }
        for pair in layers.windows(2) {
            if pair[0].outputs != pair[1].inputs {
                return Err(Error::WeightShape(format!(
                    "layer output {} feeds input {}",
                    pair[0].outputs, pair[1].inputs
                )));
            }
        }
        Ok(Mlp { layers })
    }

    pub fn uniform<R: Rng>(rng: &mut R, dims: &[usize]) -> Result<Self> {
        Mlp::new(
            dims.windows(2)
                .map(|w| Dense::uniform(rng, w[0], w[1]))
                .collect(),
        )
    }

    pub fn layers(&self) -> &[Dense] {
        &self.layers
    }

    pub fn inputs(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn outputs(&self) -> usize {
        self.layers[self.layers.len() - 1].outputs
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        let mut cur = x.to_vec();
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            cur = layer.forward(&cur);
            if i < last {
                cur.iter_mut().for_each(|v| *v = v.max(0.0));
            }
        }
        cur
    }

    pub fn forward_matrix(&self, x: &FeatureMatrix) -> Result<FeatureMatrix> {
        if x.dim() != self.inputs() {
            return Err(Error::WeightShape(format!(
                "MLP expects {} inputs, features have {}",
                self.inputs(),
                x.dim()
            )));
        }
        let mut out = FeatureMatrix::zeros(x.rows(), self.outputs());
        for i in 0..x.rows() {
            out.row_mut(i).copy_from_slice(&self.forward(x.row(i)));
        }
        Ok(out)
    }
}

/// Query/key/value projections of one attention block. All three map the
/// feature dimension onto itself.
#[derive(Debug, Clone, PartialEq)]
pub struct AttentionBlock {
    pub query: Dense,
    pub key: Dense,
    pub value: Dense,
}

impl AttentionBlock {
    pub fn new(query: Dense, key: Dense, value: Dense) -> Result<Self> {
        let d = query.inputs;
        for (name, l) in [("query", &query), ("key", &key), ("value", &value)] {
            if l.inputs != d || l.outputs != d {
                return Err(Error::WeightShape(format!(
                    "{name} projection is {}x{}, expected {d}x{d}",
                    l.outputs, l.inputs
                )));
            }
        }
        Ok(AttentionBlock { query, key, value })
    }

    pub fn dim(&self) -> usize {
        self.query.inputs
    }
}

/// A centroid and its k nearest neighbors (the centroid itself first).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Patch {
    pub centroid: usize,
    pub neighbors: Vec<usize>,
}

/// One patch per point, each holding the point's `k` nearest neighbors.
pub fn build_patches(points: &[Point3], k: usize) -> Result<Vec<Patch>> {
    if k == 0 || points.len() < k {
        return Err(Error::InsufficientPoints {
            needed: k.max(1),
            available: points.len(),
        });
    }
    let index = NeighborIndex::from_points(points)?;
    build_patches_with_index(&index, k)
}

pub fn build_patches_with_index(index: &NeighborIndex, k: usize) -> Result<Vec<Patch>> {
    index
        .points()
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let mut neighbors: Vec<usize> = index.knn(p, k)?.iter().map(|n| n.index).collect();
            // a coincident lower-index duplicate can outrank the point itself
            if neighbors[0] != i {
                if let Some(pos) = neighbors.iter().position(|&j| j == i) {
                    neighbors.remove(pos);
                } else {
                    neighbors.pop();
                }
                neighbors.insert(0, i);
            }
            Ok(Patch {
                centroid: i,
                neighbors,
            })
        })
        .collect()
}

/// Scaled dot-product attention inside each patch with a residual connection:
/// `out_i = f_i + sum_j softmax_j(q_i . k_j / sqrt(d)) v_j`.
///
/// Returns the refined features and each patch's attention row.
pub fn local_attention(
    features: &FeatureMatrix,
    patches: &[Patch],
    block: &AttentionBlock,
) -> Result<(FeatureMatrix, Vec<Vec<f64>>)> {
    let d = features.dim();
    if block.dim() != d {
        return Err(Error::WeightShape(format!(
            "attention width {} does not match feature width {d}",
            block.dim()
        )));
    }
    if patches.len() != features.rows() {
        return Err(Error::WeightShape(format!(
            "{} patches for {} feature rows",
            patches.len(),
            features.rows()
        )));
    }
    if let Some(bad) = patches
        .iter()
        .flat_map(|p| p.neighbors.iter().chain(std::iter::once(&p.centroid)))
        .find(|&&i| i >= features.rows())
    {
        return Err(Error::WeightShape(format!(
            "patch index {bad} out of range"
        )));
    }
    let keys = block.key.forward_matrix(features)?;
    let values = block.value.forward_matrix(features)?;
    let scale = 1.0 / (d as f64).sqrt();
    let mut refined = FeatureMatrix::zeros(features.rows(), d);
    let mut rows = Vec::with_capacity(patches.len());
    let mut q = vec![0.0; d];
    for patch in patches {
        let c = patch.centroid;
        block.query.forward_into(features.row(c), &mut q);
        let logits: Vec<f64> = patch
            .neighbors
            .iter()
            .map(|&j| q.iter().zip(keys.row(j)).map(|(a, b)| a * b).sum::<f64>() * scale)
            .collect();
        let weights = softmax(&logits);
        let out = refined.row_mut(c);
        out.copy_from_slice(features.row(c));
        for (&j, &w) in patch.neighbors.iter().zip(&weights) {
            for (o, v) in out.iter_mut().zip(values.row(j)) {
                *o += w * v;
            }
        }
        rows.push(weights);
    }
    Ok((refined, rows))
}

pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.iter().map(|e| e / sum).collect()
}

/// Channel-wise max over the listed rows.
pub fn max_pool(features: &FeatureMatrix, rows: &[usize]) -> Vec<f64> {
    let mut out = vec![f64::NEG_INFINITY; features.dim()];
    for &r in rows {
        for (o, v) in out.iter_mut().zip(features.row(r)) {
            *o = o.max(*v);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn block(d: usize, seed: u64) -> AttentionBlock {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        AttentionBlock::new(
            Dense::uniform(&mut rng, d, d),
            Dense::uniform(&mut rng, d, d),
            Dense::uniform(&mut rng, d, d),
        )
        .unwrap()
    }

    #[test]
    fn dense_rejects_bad_shapes() {
        assert!(Dense::new(2, 2, vec![0.0; 3], vec![0.0; 2]).is_err());
        assert!(Dense::new(2, 2, vec![0.0; 4], vec![0.0; 1]).is_err());
        assert!(Dense::new(1, 1, vec![f32::NAN], vec![0.0]).is_err());
        assert!(Mlp::new(vec![Dense::zeros(3, 4), Dense::zeros(5, 2)]).is_err());
    }

    #[test]
    fn patches_k1_are_singletons() {
        let pts = vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [3.0, 0.0, 0.0]];
        let p = build_patches(&pts, 1).unwrap();
        for (i, patch) in p.iter().enumerate() {
            assert_eq!(patch.neighbors, vec![i]);
        }
    }

    #[test]
    fn collinear_endpoint_patches() {
        let pts: Vec<Point3> = (0..4).map(|i| [i as f64, 0.0, 0.0]).collect();
        let p = build_patches(&pts, 2).unwrap();
        assert_eq!(p[0].neighbors, vec![0, 1]);
        assert_eq!(p[3].neighbors, vec![3, 2]);
        // interior points: equidistant neighbors, lower index wins
        assert_eq!(p[1].neighbors, vec![1, 0]);
        assert_eq!(p[2].neighbors, vec![2, 1]);
    }

    #[test]
    fn duplicates_keep_self_first() {
        let pts = vec![[0.0; 3], [0.0; 3], [0.0; 3], [1.0, 0.0, 0.0]];
        let p = build_patches(&pts, 2).unwrap();
        assert_eq!(p[0].neighbors, vec![0, 1]);
        assert_eq!(p[1].neighbors, vec![1, 0]);
        assert_eq!(p[2].neighbors, vec![2, 0]);
    }

    #[test]
    fn patches_need_enough_points() {
        assert!(matches!(
            build_patches(&[[0.0; 3]], 2),
            Err(Error::InsufficientPoints { .. })
        ));
    }

    #[test]
    fn single_neighbor_attention_is_value_plus_residual() {
        let b = block(4, 1);
        let f = FeatureMatrix::from_rows(&[vec![0.1, -0.2, 0.3, 0.4], vec![1.0, 2.0, 3.0, 4.0]])
            .unwrap();
        let patches = vec![
            Patch {
                centroid: 0,
                neighbors: vec![0],
            },
            Patch {
                centroid: 1,
                neighbors: vec![1],
            },
        ];
        let (out, rows) = local_attention(&f, &patches, &b).unwrap();
        for i in 0..2 {
            assert_eq!(rows[i], vec![1.0]);
            let v = b.value.forward(f.row(i));
            for c in 0..4 {
                assert!((out.row(i)[c] - (v[c] + f.row(i)[c])).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn identical_features_give_uniform_attention() {
        let b = block(3, 2);
        let f = FeatureMatrix::from_rows(&vec![vec![0.5, -1.0, 2.0]; 5]).unwrap();
        let patches: Vec<Patch> = (0..5)
            .map(|i| Patch {
                centroid: i,
                neighbors: (0..5).map(|j| (i + j) % 5).collect(),
            })
            .collect();
        let (_, rows) = local_attention(&f, &patches, &b).unwrap();
        for r in rows {
            for w in r {
                assert!((w - 0.2).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn attention_width_mismatch() {
        let b = block(3, 2);
        let f = FeatureMatrix::zeros(2, 4);
        let patches = vec![
            Patch {
                centroid: 0,
                neighbors: vec![0],
            },
            Patch {
                centroid: 1,
                neighbors: vec![1],
            },
        ];
        assert!(matches!(
            local_attention(&f, &patches, &b),
            Err(Error::WeightShape(_))
        ));
    }

    #[test]
    fn max_pool_takes_channel_max() {
        let f =
            FeatureMatrix::from_rows(&[vec![1.0, 5.0], vec![3.0, -1.0], vec![0.0, 0.0]]).unwrap();
        assert_eq!(max_pool(&f, &[0, 1]), vec![3.0, 5.0]);
        assert_eq!(max_pool(&f, &[2]), vec![0.0, 0.0]);
    }
}
