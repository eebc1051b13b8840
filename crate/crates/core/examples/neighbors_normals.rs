//! k-nearest neighbours from the kd-tree and PCA normals on a fold.

use holosim::cloud::estimate_normals;
use holosim::harness::{synthetic_cloud, Shape};
use holosim::NeighborIndex;

fn main() -> holosim::Result<()> {
    let cloud = synthetic_cloud(Shape::Fold, 2000, 2)?;
    let index = NeighborIndex::build(&cloud)?;
    let q = cloud.positions()[0];
    for nb in index.knn(&q, 5)? {
        println!("neighbor {:4} at distance {:.4}", nb.index, nb.dist2.sqrt());
    }
    let normals = estimate_normals(&cloud, 12)?;
    for i in [0, 500, 1500] {
        let n = normals.vectors[i];
        println!("normal at {i}: [{:+.3}, {:+.3}, {:+.3}]", n[0], n[1], n[2]);
    }
    Ok(())
}
