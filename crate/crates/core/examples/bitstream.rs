//! Fixed-width fields through the bit writer/reader and the file container.

use holosim::io::{BitWriter, Bitstream};

fn main() -> holosim::Result<()> {
    let mut w = BitWriter::new();
    w.write_bits(0b101, 3)?;
    w.write_bits(1023, 10)?;
    w.write_bit(true);
    let stream = w.finish();
    println!(
        "{} bits in {} bytes",
        stream.bit_len(),
        stream.bytes().len()
    );

    let mut r = stream.reader();
    println!(
        "fields: {} {} {}",
        r.read_bits(3)?,
        r.read_bits(10)?,
        r.read_bit()?
    );

    let container = stream.to_container();
    let back = Bitstream::from_container(&container)?;
    println!(
        "container {} bytes, round trip ok: {}",
        container.len(),
        back == stream
    );
    Ok(())
}
