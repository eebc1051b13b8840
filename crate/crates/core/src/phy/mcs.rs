use std::path::Path;
use std::str::FromStr;

use crate::codec::CodeRate;
use crate::error::{Error, Result};

const AWGN_TABLE: &str = include_str!("../../data/mcs_awgn.txt");
const RAYLEIGH_TABLE: &str = include_str!("../../data/mcs_rayleigh.txt");

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McsEntry {
    pub threshold_db: f64,
    pub order: usize,
    pub rate: CodeRate,
}

impl McsEntry {
    /// Information bits per symbol.
    pub fn spectral_efficiency(&self) -> f64 {
        self.order.trailing_zeros() as f64 * self.rate.value()
    }
}

/// Modulation-and-coding entries sorted by SNR threshold.
///
/// Text form: one `snr_threshold_db order code_rate` row per line; `#` starts
/// a comment.
#[derive(Debug, Clone, PartialEq)]
pub struct McsTable {
    entries: Vec<McsEntry>,
}

impl McsTable {
    pub fn new(entries: Vec<McsEntry>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptyTable);
        }
        for (i, e) in entries.iter().enumerate() {
            if !e.threshold_db.is_finite() || !matches!(e.order, 4 | 16 | 64 | 256) {
                return Err(Error::Parse {
                    line: i + 1,
                    message: format!("invalid entry {e:?}"),
                });
            }
        }
        if entries
            .windows(2)
            .any(|w| w[1].threshold_db < w[0].threshold_db)
        {
            return Err(Error::InvalidParameter(
                "MCS rows must be sorted by threshold".into(),
            ));
        }
        Ok(McsTable { entries })
    }

    /// Table calibrated over AWGN.
    pub fn awgn() -> Self {
        AWGN_TABLE.parse().expect("bundled table is valid")
    }

    /// Table calibrated over per-symbol Rayleigh fading with perfect CSI.
    pub fn rayleigh() -> Self {
        RAYLEIGH_TABLE.parse().expect("bundled table is valid")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        std::fs::read_to_string(path)
            .map_err(|e| Error::io(path, e))?
            .parse()
    }

    pub fn entries(&self) -> &[McsEntry] {
        &self.entries
    }

    pub fn to_text(&self) -> String {
        let mut s = String::from("# snr_threshold_db order code_rate\n");
        for e in &self.entries {
            s.push_str(&format!("{:.1} {} {}\n", e.threshold_db, e.order, e.rate));
        }
        s
    }
}

impl FromStr for McsTable {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |message: String| Error::Parse {
                line: i + 1,
                message,
            };
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(bad(format!("expected 3 fields, found {}", fields.len())));
            }
            let threshold_db = fields[0]
                .parse()
                .map_err(|_| bad(format!("bad threshold {:?}", fields[0])))?;
            let order = fields[1]
                .parse()
                .map_err(|_| bad(format!("bad order {:?}", fields[1])))?;
            if !matches!(order, 4 | 16 | 64 | 256) {
                return Err(bad(format!("unsupported order {order}")));
            }
            let rate = fields[2].parse().map_err(|e: Error| bad(e.to_string()))?;
            entries.push(McsEntry {
                threshold_db,
                order,
                rate,
            });
        }
        McsTable::new(entries)
    }
}

/// Highest-throughput entry whose threshold does not exceed `snr_db`; the
/// first entry when the SNR is below every threshold.
pub fn mcs_select(snr_db: f64, table: &McsTable) -> Result<McsEntry> {
    let first = *table.entries.first().ok_or(Error::EmptyTable)?;
    Ok(table
        .entries
        .iter()
        .filter(|e| e.threshold_db <= snr_db)
        .fold(first, |best, e| {
            if e.spectral_efficiency() > best.spectral_efficiency() {
                *e
            } else {
                best
            }
        }))
}
