//! Bitrate, latency and PER of a dense holographic stream against the
//! targets.

use holosim::harness::{requirements_check, RequirementsInput};

fn main() -> holosim::Result<()> {
    let input = RequirementsInput {
        points_per_frame: 5e7,
        fps: 60.0,
        bits_per_point: 60.0,
        link_rate_bps: 2e11,
        latency_ms: 0.8,
        per: 1e-8,
    };
    print!("{}", requirements_check(&input)?);
    Ok(())
}
