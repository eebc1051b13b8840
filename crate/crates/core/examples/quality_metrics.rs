//! Chamfer, D1 and D2 for a jittered copy of a cloud.

use holosim::harness::{synthetic_cloud, Shape};
use holosim::metrics::{QualityReport, Symmetry};
use holosim::PointCloud;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn main() -> holosim::Result<()> {
    let reference = synthetic_cloud(Shape::Cube, 2048, 0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    println!("{}", QualityReport::CSV_HEADER);
    for sigma in [0.001, 0.005, 0.02] {
        let n = Normal::new(0.0, sigma).expect("valid sigma");
        let noisy = PointCloud::new(
            reference
                .positions()
                .iter()
                .map(|p| p.map(|v| v + n.sample(&mut rng)))
                .collect(),
        )?;
        for mode in [Symmetry::Max, Symmetry::Mean] {
            println!(
                "{}",
                QualityReport::compute(&reference, &noisy, Some(1.0), mode)?.csv_row()
            );
        }
    }
    Ok(())
}
