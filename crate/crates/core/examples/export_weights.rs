//! Writes the default sampler and codec weights, e.g. as a starting point
//! for externally trained replacements.
//!
//! ```text
//! cargo run --example export_weights -- weights/
//! ```

use std::path::PathBuf;

use holosim::codec::JsccWeights;
use holosim::sampling::SamplerWeights;

fn main() -> holosim::Result<()> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "weights".into()));
    std::fs::create_dir_all(&dir).expect("output dir");
    let s = dir.join("sampler.bin");
    SamplerWeights::default().save(&s)?;
    let j = dir.join("jscc.bin");
    JsccWeights::default().save(&j)?;
    let reloaded = SamplerWeights::load(&s)?;
    println!("{} (dim {}), {}", s.display(), reloaded.dim(), j.display());
    Ok(())
}
