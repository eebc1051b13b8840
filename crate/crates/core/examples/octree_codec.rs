//! Voxelizes a cloud at several depths and reports the coded size.

use holosim::cloud::voxelize;
use holosim::codec::{octree_decode, octree_encode};
use holosim::harness::{synthetic_cloud, Shape};

fn main() -> holosim::Result<()> {
    let cloud = synthetic_cloud(Shape::Sphere, 2048, 7)?;
    for depth in [4u8, 6, 8, 10] {
        let vox = voxelize(&cloud, depth)?;
        let stream = octree_encode(&vox.voxels, depth)?;
        let back = octree_decode(&stream)?;
        println!(
            "depth {depth:2}: {:5} voxels, {:5} bytes, {:5.2} bits/point, lossless {}",
            vox.voxels.len(),
            stream.bytes().len(),
            stream.bit_len() as f64 / cloud.len() as f64,
            back == vox.voxels
        );
    }
    Ok(())
}
