//! Breadth-first octree occupancy coding.
//!
//! Each internal node emits one occupancy byte. Child `c` of a node covers the
//! half-cells `(bx, by, bz)` with `c = (bz << 2) | (by << 1) | bx` and sets bit
//! `1 << c`; nodes of one level are visited in ascending Morton order, which
//! is the order their parents listed them. Leaves at the full depth emit
//! nothing.
//!
//! Container: `HPOC0001`, depth byte, u32 little-endian voxel count, then the
//! arithmetic-coded occupancy bytes.

use super::entropy::{EntropyDecoder, EntropyEncoder};
use crate::cloud::{Voxel, MAX_DEPTH};
use crate::error::{Error, Result};
use crate::io::Bitstream;

pub const OCTREE_MAGIC: &[u8; 8] = b"HPOC0001";
const HEADER_LEN: usize = 13;
/// Largest voxel count a container may declare.
pub const MAX_VOXELS: u32 = 1 << 26;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OctreeCode {
    pub depth: u8,
    pub occupancy: Vec<u8>,
    pub voxel_count: u32,
}

fn check_depth(depth: u8) -> Result<()> {
    if depth == 0 || depth > MAX_DEPTH {
        return Err(Error::InvalidParameter(format!(
            "octree depth {depth} outside 1..={MAX_DEPTH}"
        )));
    }
    Ok(())
}

fn morton(v: &Voxel, depth: u8) -> u64 {
    let mut code = 0u64;
    for b in (0..depth as u32).rev() {
        let c = ((v[2] >> b) & 1) << 2 | ((v[1] >> b) & 1) << 1 | ((v[0] >> b) & 1);
        code = (code << 3) | c as u64;
    }
    code
}

fn unmorton(code: u64, depth: u8) -> Voxel {
    let mut v = [0u32; 3];
    for b in 0..depth as u32 {
        let c = (code >> (3 * b)) & 7;
        v[0] |= ((c & 1) as u32) << b;
        v[1] |= (((c >> 1) & 1) as u32) << b;
        v[2] |= (((c >> 2) & 1) as u32) << b;
    }
    v
}

/// Occupancy bytes of the voxel set (duplicates collapse).
pub fn octree_build(voxels: &[Voxel], depth: u8) -> Result<OctreeCode> {
    check_depth(depth)?;
    let limit = 1u32 << depth;
    if let Some(v) = voxels.iter().find(|v| v.iter().any(|&c| c >= limit)) {
        return Err(Error::VoxelOutOfRange { voxel: *v, depth });
    }
    let mut codes: Vec<u64> = voxels.iter().map(|v| morton(v, depth)).collect();
    codes.sort_unstable();
    codes.dedup();
    let voxel_count = u32::try_from(codes.len())
        .ok()
        .filter(|&n| n <= MAX_VOXELS)
        .ok_or_else(|| Error::InvalidParameter(format!("{} voxels", codes.len())))?;
    let mut occupancy = Vec::new();
    for level in 0..depth as u32 {
        let shift = 3 * (depth as u32 - 1 - level);
        let mut i = 0;
        while i < codes.len() {
            let parent = codes[i] >> (shift + 3);
            let mut byte = 0u8;
            while i < codes.len() && codes[i] >> (shift + 3) == parent {
                byte |= 1 << ((codes[i] >> shift) & 7);
                i += 1;
            }
            occupancy.push(byte);
        }
    }
    Ok(OctreeCode {
        depth,
        occupancy,
        voxel_count,
    })
}

impl OctreeCode {
    /// Expands the occupancy bytes back into voxels, sorted by coordinates.
    pub fn to_voxels(&self) -> Result<Vec<Voxel>> {
        let mut bytes = self.occupancy.iter().copied();
        let codes = expand(self.depth, self.voxel_count, || {
            bytes
                .next()
                .ok_or_else(|| Error::Decode("occupancy bytes exhausted".into()))
        })?;
        if bytes.next().is_some() {
            return Err(Error::Decode("trailing occupancy bytes".into()));
        }
        Ok(finish(codes, self.depth))
    }
}

fn expand(depth: u8, count: u32, mut next: impl FnMut() -> Result<u8>) -> Result<Vec<u64>> {
    check_depth(depth)?;
    if count == 0 {
        return Ok(Vec::new());
    }
    let mut nodes = vec![0u64];
    for _ in 0..depth {
        let mut children = Vec::with_capacity(nodes.len() * 2);
        for &node in &nodes {
            let byte = next()?;
            if byte == 0 {
                return Err(Error::Decode("empty occupancy byte".into()));
            }
            for c in 0..8 {
                if byte & (1 << c) != 0 {
                    children.push((node << 3) | c);
                }
            }
            if children.len() > count as usize {
                return Err(Error::Decode(format!(
                    "more than the declared {count} nodes on one level"
                )));
            }
        }
        nodes = children;
    }
    if nodes.len() != count as usize {
        return Err(Error::Decode(format!(
            "decoded {} voxels, header declares {count}",
            nodes.len()
        )));
    }
    Ok(nodes)
}

fn finish(codes: Vec<u64>, depth: u8) -> Vec<Voxel> {
    let mut v: Vec<Voxel> = codes.into_iter().map(|c| unmorton(c, depth)).collect();
    v.sort_unstable();
    v
}

/// Octree container with an arithmetic-coded payload.
pub fn octree_encode(voxels: &[Voxel], depth: u8) -> Result<Bitstream> {
    let code = octree_build(voxels, depth)?;
    let mut out = Vec::with_capacity(HEADER_LEN + code.occupancy.len());
    out.extend_from_slice(OCTREE_MAGIC);
    out.push(depth);
    out.extend_from_slice(&code.voxel_count.to_le_bytes());
    if !code.occupancy.is_empty() {
        let mut enc = EntropyEncoder::new();
        for &b in &code.occupancy {
            enc.encode_byte(b);
        }
        out.extend(enc.finish().into_bytes());
    }
    Ok(Bitstream::from_bytes(out))
}

pub fn octree_decode(stream: &Bitstream) -> Result<Vec<Voxel>> {
    let data = stream.bytes();
    if data.len() < HEADER_LEN || &data[..8] != OCTREE_MAGIC {
        return Err(Error::Decode("missing HPOC0001 header".into()));
    }
    let depth = data[8];
    check_depth(depth).map_err(|_| Error::Decode(format!("bad depth {depth}")))?;
    let count = u32::from_le_bytes(data[9..13].try_into().expect("4 bytes"));
    if count > MAX_VOXELS || (depth < 9 && count as u64 > 1u64 << (3 * depth as u32)) {
        return Err(Error::Decode(format!("implausible voxel count {count}")));
    }
    if count == 0 {
        return Ok(Vec::new());
    }
    let payload = Bitstream::from_bytes(data[HEADER_LEN..].to_vec());
    let mut dec = EntropyDecoder::new(&payload)?;
    let codes = expand(depth, count, || dec.decode_byte())?;
    Ok(finish(codes, depth))
}
