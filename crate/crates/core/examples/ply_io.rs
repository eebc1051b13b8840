//! Writes a synthetic cloud as ASCII and binary PLY, reads both back.
//! Positions are stored as 32-bit floats.

use holosim::harness::{synthetic_cloud, Shape};
use holosim::io::{read_ply, write_ply, PlyFormat};

fn main() -> holosim::Result<()> {
    let cloud = synthetic_cloud(Shape::Stairs, 1000, 4)?;
    let dir = std::env::temp_dir().join("holosim-ply");
    std::fs::create_dir_all(&dir).expect("temp dir");
    for (name, format) in [
        ("ascii.ply", PlyFormat::Ascii),
        ("binary.ply", PlyFormat::BinaryLittleEndian),
    ] {
        let path = dir.join(name);
        write_ply(&cloud, &path, format)?;
        let back = read_ply(&path)?;
        let bytes = std::fs::metadata(&path).map(|m| m.len()).unwrap_or(0);
        let err = back
            .positions()
            .iter()
            .zip(cloud.positions())
            .flat_map(|(a, b)| (0..3).map(move |i| (a[i] - b[i]).abs()))
            .fold(0.0f64, f64::max);
        println!(
            "{name}: {} points, {bytes} bytes, max deviation {err:.2e}",
            back.len()
        );
    }
    Ok(())
}
