use std::fmt;

use super::config::RequirementsInput;
use crate::error::{Error, Result};

/// Minimum sustained rate for holographic streaming.
pub const RATE_FLOOR_BPS: f64 = 1e11;
pub const RATE_TARGET_BPS: f64 = 1e12;
pub const RATE_PEAK_BPS: f64 = 1e13;
pub const AIR_LATENCY_MS: f64 = 1.0;
pub const END_TO_END_LATENCY_MS: f64 = 20.0;
pub const PER_TARGET: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq)]
pub struct RequirementItem {
    pub name: &'static str,
    pub value: f64,
    pub threshold: f64,
    pub unit: &'static str,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RequirementsReport {
    /// `points * fps * bits_per_point`.
    pub required_bps: f64,
    pub items: Vec<RequirementItem>,
}

impl RequirementsReport {
    pub fn item(&self, name: &str) -> Option<&RequirementItem> {
        self.items.iter().find(|i| i.name == name)
    }
}

impl fmt::Display for RequirementsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "required rate: {:.4e} bps", self.required_bps)?;
        for i in &self.items {
            writeln!(
                f,
                "{} {}: {:.4e} {} (threshold {:.4e})",
                if i.pass { "PASS" } else { "FAIL" },
                i.name,
                i.value,
                i.unit,
                i.threshold
            )?;
        }
        Ok(())
    }
}

/// Compares a stream and a link against the rate, latency and reliability
/// targets.
///
/// The rate tiers say whether the stream's required rate reaches each tier;
/// `link_capacity` says whether the link carries the stream. One measured
/// latency is held to both the air-interface and end-to-end bounds.
pub fn requirements_check(input: &RequirementsInput) -> Result<RequirementsReport> {
    let RequirementsInput {
        points_per_frame,
        fps,
        bits_per_point,
        link_rate_bps,
        latency_ms,
        per,
    } = *input;
    for (name, v) in [
        ("points_per_frame", points_per_frame),
        ("fps", fps),
        ("bits_per_point", bits_per_point),
        ("link_rate_bps", link_rate_bps),
        ("latency_ms", latency_ms),
        ("per", per),
    ] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "{name} must be positive, got {v}"
            )));
        }
    }
    let required = points_per_frame * fps * bits_per_point;
    let at_least = |name, value, threshold, unit| RequirementItem {
        name,
        value,
        threshold,
        unit,
        pass: value >= threshold,
    };
    let at_most = |name, value, threshold, unit| RequirementItem {
        name,
        value,
        threshold,
        unit,
        pass: value <= threshold,
    };
    Ok(RequirementsReport {
        required_bps: required,
        items: vec![
            at_least("rate_floor", required, RATE_FLOOR_BPS, "bps"),
            at_least("rate_target", required, RATE_TARGET_BPS, "bps"),
            at_least("rate_peak", required, RATE_PEAK_BPS, "bps"),
            at_least("link_capacity", link_rate_bps, required, "bps"),
            at_most("air_latency", latency_ms, AIR_LATENCY_MS, "ms"),
            at_most(
                "end_to_end_latency",
                latency_ms,
                END_TO_END_LATENCY_MS,
                "ms",
            ),
            at_most("per", per, PER_TARGET, ""),
        ],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gigabit_stream_is_below_floor() {
        let r = requirements_check(&RequirementsInput::default()).unwrap();
        assert!((r.required_bps - 3.6e9).abs() < 1.0);
        assert!(!r.item("rate_floor").unwrap().pass);
        assert!(r.item("link_capacity").unwrap().pass);
        assert!(r.item("air_latency").unwrap().pass);
        assert!(!r.item("per").unwrap().pass);
    }

    #[test]
    fn thresholds_are_inclusive() {
        let input = RequirementsInput {
            points_per_frame: 1e9,
            fps: 100.0,
            bits_per_point: 100.0,
            link_rate_bps: 1e13,
            latency_ms: 1.0,
            per: 1e-7,
        };
        let r = requirements_check(&input).unwrap();
        assert!(r.items.iter().all(|i| i.pass), "{r}");
        let r = requirements_check(&RequirementsInput {
            latency_ms: 5.0,
            ..input
        })
        .unwrap();
        assert!(!r.item("air_latency").unwrap().pass);
        assert!(r.item("end_to_end_latency").unwrap().pass);
    }

    #[test]
    fn non_positive_inputs_rejected() {
        for bad in [0.0, -1.0, f64::NAN] {
            let input = RequirementsInput {
                fps: bad,
                ..Default::default()
            };
            assert!(matches!(
                requirements_check(&input),
                Err(Error::InvalidParameter(_))
            ));
        }
    }
}
