//! Iterative attention-based sampling of a cube surface. Points on edges and
//! corners tend to survive.

use holosim::harness::{synthetic_cloud, Shape};
use holosim::sampling::{sample_semantic, SamplerWeights, DEFAULT_ITERATIONS, DEFAULT_PATCH_K};

fn main() -> holosim::Result<()> {
    let cloud = synthetic_cloud(Shape::Cube, 2048, 1)?;
    let weights = SamplerWeights::default();
    let out = sample_semantic(&cloud, 0.125, &weights, DEFAULT_PATCH_K, DEFAULT_ITERATIONS)?;
    println!("kept {} of {} points", out.cloud.len(), cloud.len());
    for (i, it) in out.map.iterations.iter().enumerate() {
        let mean = it.scores.iter().sum::<f64>() / it.scores.len() as f64;
        println!(
            "round {i}: {} -> {} points, mean score {mean:.3}",
            it.input.len(),
            it.selected.len()
        );
    }
    println!(
        "semantic map side information: {} bits",
        out.map.side_info_bits()
    );
    Ok(())
}
