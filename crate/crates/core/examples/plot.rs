//! Renders a small CSV as an SVG line chart in the temp directory.

use holosim::harness::render_svg_plot;

fn main() -> holosim::Result<()> {
    let dir = std::env::temp_dir().join("holosim-plot");
    std::fs::create_dir_all(&dir).expect("temp dir");
    let csv = dir.join("curves.csv");
    std::fs::write(
        &csv,
        "method,snr,psnr\nA,0,10\nA,5,18\nA,10,24\nB,0,0\nB,5,0\nB,10,30\n",
    )
    .expect("write csv");
    let svg = dir.join("curves.svg");
    render_svg_plot(&csv, "snr", "psnr", "method", &svg)?;
    println!("{}", svg.display());
    Ok(())
}
