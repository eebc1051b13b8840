use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Constellation, SymbolStream};
use crate::error::{Error, Result};

/// Distance-softmax over the constellation for each feature pair.
///
/// Consecutive values form `re + j im` (an odd tail is paired with zero);
/// point `s` gets logit `-|z - s|^2 / temperature`.
pub fn feature_to_probabilities(
    features: &[f64],
    c: &Constellation,
    temperature: f64,
) -> Result<Vec<Vec<f64>>> {
    if !(temperature > 0.0 && temperature.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "temperature {temperature}"
        )));
    }
    if let Some(i) = features.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidFeature(i));
    }
    Ok(features
        .chunks(2)
        .map(|pair| {
            let z = Complex64::new(pair[0], pair.get(1).copied().unwrap_or(0.0));
            let logits: Vec<f64> = c
                .points()
                .iter()
                .map(|s| -(z - s).norm_sqr() / temperature)
                .collect();
            crate::sampling::layers::softmax(&logits)
        })
        .collect())
}

fn check_row(row: &[f64], index: usize, order: usize) -> Result<()> {
    let bad = |reason: String| Error::InvalidDistribution { row: index, reason };
    if row.len() != order {
        return Err(bad(format!("{} entries for {order} points", row.len())));
    }
    if let Some(v) = row.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        return Err(bad(format!("entry {v}")));
    }
    let sum: f64 = row.iter().sum();
    if (sum - 1.0).abs() > 1e-6 {
        return Err(bad(format!("sums to {sum}")));
    }
    Ok(())
}

/// Draws one constellation label per row.
pub fn probabilistic_labels(rows: &[Vec<f64>], c: &Constellation, seed: u64) -> Result<Vec<usize>> {
    for (i, r) in rows.iter().enumerate() {
        check_row(r, i, c.order())?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(rows
        .iter()
        .map(|row| {
            let u: f64 = rng.random::<f64>() * row.iter().sum::<f64>();
            let mut acc = 0.0;
            let mut last = 0;
            for (j, &p) in row.iter().enumerate() {
                if p > 0.0 {
                    last = j;
                    acc += p;
                    if u < acc {
                        return j;
                    }
                }
            }
            last
        })
        .collect())
}

pub fn probabilistic_modulate(
    rows: &[Vec<f64>],
    c: &Constellation,
    seed: u64,
) -> Result<SymbolStream> {
    let labels = probabilistic_labels(rows, c, seed)?;
    Ok(SymbolStream::new(
        labels.into_iter().map(|l| c.point(l)).collect(),
        c.order(),
    ))
}

/// Keeps the first `p` symbols.
pub fn apply_partition(stream: &SymbolStream, p: usize) -> Result<SymbolStream> {
    if p > stream.len() {
        return Err(Error::Partition {
            point: p,
            count: stream.len(),
        });
    }
    Ok(SymbolStream {
        symbols: stream.symbols[..p].to_vec(),
        order: stream.order,
        original_len: stream.original_len,
    })
}

/// `P = clamp(round(alpha * mean_score * beta(snr) * count), min_symbols, count)`
/// with `beta(snr) = 2^(-snr_db / snr_halving_db)`, or 1 without an SNR.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionRule {
    pub alpha: f64,
    pub min_symbols: usize,
    pub snr_halving_db: f64,
}

impl Default for PartitionRule {
    fn default() -> Self {
        PartitionRule {
            alpha: 2.0,
            min_symbols: 1,
            snr_halving_db: 15.0,
        }
    }
}

impl PartitionRule {
    pub fn budget_factor(&self, snr_db: Option<f64>) -> f64 {
        snr_db.map_or(1.0, |s| 2f64.powf(-s / self.snr_halving_db))
    }
}

/// Partition point from the mean coarse score (in `[0, 1]`).
pub fn compute_partition(
    coarse_scores: &[f64],
    count: usize,
    rule: &PartitionRule,
    snr_db: Option<f64>,
) -> Result<usize> {
    if !(rule.alpha >= 0.0 && rule.alpha.is_finite() && rule.snr_halving_db > 0.0) {
        return Err(Error::InvalidParameter(format!("partition rule {rule:?}")));
    }
    if let Some(i) = coarse_scores.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidFeature(i));
    }
    let mean = if coarse_scores.is_empty() {
        0.0
    } else {
        coarse_scores.iter().sum::<f64>() / coarse_scores.len() as f64
    };
    let raw = (rule.alpha * mean * rule.budget_factor(snr_db) * count as f64).round();
    let p = if raw.is_finite() && raw > 0.0 {
        raw as usize
    } else {
        0
    };
    Ok(p.clamp(rule.min_symbols.min(count), count))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phy::build_qam;
    use proptest::prelude::*;

    #[test]
    fn sharp_temperature_concentrates() {
        let c = build_qam(16).unwrap();
        let p = c.point(9);
        let rows = feature_to_probabilities(&[p.re, p.im], &c, 1e-3).unwrap();
        assert!(rows[0][9] > 0.999);
    }

    #[test]
    fn rows_are_distributions_and_odd_tail_padded() {
        let c = build_qam(64).unwrap();
        let rows = feature_to_probabilities(&[0.3, -0.7, 1.1], &c, 0.5).unwrap();
        assert_eq!(rows.len(), 2);
        for r in &rows {
            assert!((r.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
        let direct = feature_to_probabilities(&[1.1, 0.0], &c, 0.5).unwrap();
        assert_eq!(rows[1], direct[0]);
        assert!(matches!(
            feature_to_probabilities(&[0.0, f64::NAN], &c, 1.0),
            Err(Error::InvalidFeature(1))
        ));
    }

    #[test]
    fn origin_is_uniform_for_qpsk() {
        let c = build_qam(4).unwrap();
        let rows = feature_to_probabilities(&[0.0, 0.0], &c, 0.7).unwrap();
        for p in &rows[0] {
            assert!((p - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn one_hot_rows_are_exact() {
        let c = build_qam(16).unwrap();
        let rows: Vec<Vec<f64>> = (0..16)
            .map(|j| (0..16).map(|i| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        let s = probabilistic_modulate(&rows, &c, 3).unwrap();
        assert_eq!(s.symbols, c.points());
    }

    #[test]
    fn uniform_draw_frequencies() {
        let c = build_qam(4).unwrap();
        let rows = vec![vec![0.25; 4]; 100_000];
        let labels = probabilistic_labels(&rows, &c, 7).unwrap();
        let mut counts = [0usize; 4];
        labels.iter().for_each(|&l| counts[l] += 1);
        for n in counts {
            let f = n as f64 / 1e5;
            assert!((0.24..=0.26).contains(&f), "{f}");
        }
    }

    #[test]
    fn invalid_rows_rejected() {
        let c = build_qam(4).unwrap();
        for row in [
            vec![0.5, 0.6, -0.1, 0.0],
            vec![0.5, 0.4, 0.0, 0.0],
            vec![1.0],
        ] {
            assert!(matches!(
                probabilistic_modulate(&[vec![0.25; 4], row], &c, 0),
                Err(Error::InvalidDistribution { row: 1, .. })
            ));
        }
    }

    #[test]
    fn partition_edges() {
        let c = build_qam(4).unwrap();
        let s = SymbolStream::new(c.points().to_vec(), 4);
        assert_eq!(apply_partition(&s, 4).unwrap(), s);
        let empty = apply_partition(&s, 0).unwrap();
        assert!(empty.is_empty());
        assert_eq!(empty.original_len, 4);
        assert!(matches!(
            apply_partition(&s, 5),
            Err(Error::Partition { point: 5, count: 4 })
        ));
    }

    #[test]
    fn partition_rule_values() {
        let rule = PartitionRule {
            alpha: 1.0,
            min_symbols: 10,
            snr_halving_db: 15.0,
        };
        assert_eq!(
            compute_partition(&[0.5, 0.5], 1000, &rule, None).unwrap(),
            500
        );
        assert_eq!(
            compute_partition(&[0.5], 1000, &rule, Some(15.0)).unwrap(),
            250
        );
        assert_eq!(compute_partition(&[0.0], 1000, &rule, None).unwrap(), 10);
        assert_eq!(
            compute_partition(&[1.0], 1000, &PartitionRule { alpha: 5.0, ..rule }, None).unwrap(),
            1000
        );
        assert_eq!(compute_partition(&[0.0], 4, &rule, None).unwrap(), 4);
    }

    proptest! {
        #[test]
        fn partition_monotone_in_score(a in 0.0f64..1.0, b in 0.0f64..1.0, count in 1usize..5000, snr in -5.0f64..30.0) {
            let rule = PartitionRule::default();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let p_lo = compute_partition(&[lo], count, &rule, Some(snr)).unwrap();
            let p_hi = compute_partition(&[hi], count, &rule, Some(snr)).unwrap();
            prop_assert!(p_lo <= p_hi);
        }

        #[test]
        fn drawn_symbols_are_constellation_points(seed in 0u64..500, t in 0.01f64..3.0) {
            let c = build_qam(64).unwrap();
            let feats: Vec<f64> = (0..40).map(|i| ((i as f64 + seed as f64) * 0.37).sin() * 1.3).collect();
            let rows = feature_to_probabilities(&feats, &c, t).unwrap();
            let s = probabilistic_modulate(&rows, &c, seed).unwrap();
            for y in &s.symbols {
                prop_assert!(c.points().contains(y));
            }
        }
    }
}
