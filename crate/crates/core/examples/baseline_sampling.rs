//! Farthest-point, random and Poisson-disk sampling at the same budget.

use holosim::harness::{synthetic_cloud, Shape};
use holosim::metrics::chamfer;
use holosim::sampling::{sample_fps, sample_poisson, sample_poisson_count, sample_random};

fn main() -> holosim::Result<()> {
    let cloud = synthetic_cloud(Shape::Box, 2048, 3)?;
    let m = 256;
    for (name, idx) in [
        ("fps", sample_fps(&cloud, m, 0)?),
        ("random", sample_random(&cloud, m, 9)?),
        ("poisson", sample_poisson_count(&cloud, m, 9)?),
    ] {
        println!(
            "{name:8} {} points, chamfer {:.6}",
            idx.len(),
            chamfer(&cloud, &cloud.select(&idx))?
        );
    }
    let disk = sample_poisson(&cloud, 0.1, 1)?;
    println!("poisson r=0.1 accepted {} points", disk.len());
    Ok(())
}
