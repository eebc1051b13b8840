//! Upsamples a semantic sample back to full size using the shared map.

use holosim::harness::{synthetic_cloud, Shape};
use holosim::metrics::{QualityReport, Symmetry};
use holosim::sampling::{reconstruct_upsample, sample_semantic, SamplerWeights};

fn main() -> holosim::Result<()> {
    let cloud = synthetic_cloud(Shape::Cube, 2048, 5)?;
    let s = sample_semantic(&cloud, 0.25, &SamplerWeights::default(), 4, 4)?;
    let rebuilt = reconstruct_upsample(&s.cloud, &s.map, cloud.len(), 0)?;
    for (name, c) in [("sampled", &s.cloud), ("upsampled", &rebuilt)] {
        let q = QualityReport::compute(&cloud, c, Some(1.0), Symmetry::Max)?;
        println!(
            "{name:9} {:5} points  D1 {:.2} dB  D2 {:.2} dB",
            c.len(),
            q.d1_psnr_db,
            q.d2_psnr_db
        );
    }
    Ok(())
}
