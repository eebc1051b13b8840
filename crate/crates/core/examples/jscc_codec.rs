//! Feature extraction and decoding with the learned-feature codec, plus a
//! weights file round trip.

use holosim::codec::{jscc_decode, jscc_encode, JsccWeights};
use holosim::harness::{synthetic_cloud, Shape};
use holosim::metrics::{QualityReport, Symmetry};

fn main() -> holosim::Result<()> {
    let cloud = synthetic_cloud(Shape::Box, 2048, 2)?;
    let weights = JsccWeights::default();
    let code = jscc_encode(&cloud, &weights, 256, 16, 0)?;
    println!(
        "{} centroids, fine {}x{}, coarse {}x{}",
        code.len(),
        code.fine.rows(),
        code.fine.dim(),
        code.coarse.rows(),
        code.coarse.dim()
    );
    let decoded = jscc_decode(&code, &weights, cloud.len())?;
    let q = QualityReport::compute(&cloud, &decoded, Some(1.0), Symmetry::Max)?;
    println!(
        "decoded {} points, D1 {:.2} dB",
        decoded.len(),
        q.d1_psnr_db
    );

    let bytes = weights.to_bytes();
    println!(
        "weights: {} bytes, reload equal: {}",
        bytes.len(),
        JsccWeights::from_bytes(&bytes)? == weights
    );
    Ok(())
}
