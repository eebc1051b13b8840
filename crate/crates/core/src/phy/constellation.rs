use num_complex::Complex64;

use crate::error::{Error, Result};

/// Square QAM with unit mean energy. `points[label]` is the point carrying
/// `label`; the high half of the label bits selects the in-phase level and
/// the low half the quadrature level, each Gray coded along its axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    order: usize,
    bits_per_axis: u32,
    /// Axis amplitudes indexed by the axis Gray label.
    levels: Vec<f64>,
    points: Vec<Complex64>,
}

pub fn build_qam(order: usize) -> Result<Constellation> {
    if !matches!(order, 4 | 16 | 64 | 256) {
        return Err(Error::UnsupportedOrder(order));
    }
    let side = (order as f64).sqrt().round() as usize;
    let bits_per_axis = side.trailing_zeros();
    let scale = (2.0 * (order as f64 - 1.0) / 3.0).sqrt();
    let mut levels = vec![0.0; side];
    for pos in 0..side {
        let gray = pos ^ (pos >> 1);
        levels[gray] = (2.0 * pos as f64 - (side as f64 - 1.0)) / scale;
    }
    let points = (0..order)
        .map(|label| Complex64::new(levels[label >> bits_per_axis], levels[label & (side - 1)]))
        .collect();
    Ok(Constellation {
        order,
        bits_per_axis,
        levels,
        points,
    })
}

impl Constellation {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn bits_per_symbol(&self) -> usize {
        2 * self.bits_per_axis as usize
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn point(&self, label: usize) -> Complex64 {
        self.points[label]
    }

    fn nearest_axis_label(&self, v: f64) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (g, &l) in self.levels.iter().enumerate() {
            let d = (v - l).abs();
            if d < best_d {
                best_d = d;
                best = g;
            }
        }
        best
    }

    /// Label of the nearest point (per-axis decisions are exact on a square grid).
    pub fn nearest_label(&self, y: Complex64) -> usize {
        (self.nearest_axis_label(y.re) << self.bits_per_axis) | self.nearest_axis_label(y.im)
    }

    /// Max-log LLRs of the axis bits, MSB first, appended to `out`.
    fn axis_llrs(&self, v: f64, scale: f64, out: &mut Vec<f64>) {
        for b in (0..self.bits_per_axis).rev() {
            let mut d0 = f64::INFINITY;
            let mut d1 = f64::INFINITY;
            for (g, &l) in self.levels.iter().enumerate() {
                let d = (v - l) * (v - l);
                if (g >> b) & 1 == 1 {
                    d1 = d1.min(d);
                } else {
                    d0 = d0.min(d);
                }
            }
            out.push((d1 - d0) * scale);
        }
    }
}

/// Symbols on the air. `original_len` counts symbols before partitioning.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolStream {
    pub symbols: Vec<Complex64>,
    pub order: usize,
    pub original_len: usize,
}

impl SymbolStream {
    pub fn new(symbols: Vec<Complex64>, order: usize) -> Self {
        let original_len = symbols.len();
        SymbolStream {
            symbols,
            order,
            original_len,
        }
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

pub fn modulate(bits: &[bool], c: &Constellation) -> Result<SymbolStream> {
    let k = c.bits_per_symbol();
    if !bits.len().is_multiple_of(k) {
        return Err(Error::Length(format!(
            "{} bits is not a multiple of {k}",
            bits.len()
        )));
    }
    let symbols = bits
        .chunks(k)
        .map(|chunk| c.point(chunk.iter().fold(0, |l, &b| (l << 1) | b as usize)))
        .collect();
    Ok(SymbolStream::new(symbols, c.order()))
}

pub fn demodulate_hard(received: &[Complex64], c: &Constellation) -> Vec<bool> {
    let k = c.bits_per_symbol();
    let mut out = Vec::with_capacity(received.len() * k);
    for &y in received {
        let label = c.nearest_label(y);
        out.extend((0..k).rev().map(|b| (label >> b) & 1 == 1));
    }
    out
}

/// Max-log LLRs with one noise variance for every symbol.
pub fn demodulate_soft(received: &[Complex64], c: &Constellation, noise_var: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(received.len() * c.bits_per_symbol());
    for &y in received {
        c.axis_llrs(y.re, 1.0 / noise_var, &mut out);
        c.axis_llrs(y.im, 1.0 / noise_var, &mut out);
    }
    out
}

/// Max-log LLRs with per-symbol noise variances; erased symbols yield zeros.
pub fn demodulate_soft_per_symbol(
    received: &[Complex64],
    c: &Constellation,
    noise_vars: &[f64],
    erased: &[bool],
) -> Result<Vec<f64>> {
    if noise_vars.len() != received.len() || erased.len() != received.len() {
        return Err(Error::Length(format!(
            "{} symbols, {} noise variances, {} erasure flags",
            received.len(),
            noise_vars.len(),
            erased.len()
        )));
    }
    let k = c.bits_per_symbol();
    let mut out = Vec::with_capacity(received.len() * k);
    for ((&y, &nv), &e) in received.iter().zip(noise_vars).zip(erased) {
        if e {
            out.extend(std::iter::repeat_n(0.0, k));
        } else {
            c.axis_llrs(y.re, 1.0 / nv, &mut out);
            c.axis_llrs(y.im, 1.0 / nv, &mut out);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const ORDERS: [usize; 4] = [4, 16, 64, 256];

    #[test]
    fn qpsk_points() {
        let c = build_qam(4).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        for p in c.points() {
            assert!((p.re.abs() - h).abs() < 1e-15 && (p.im.abs() - h).abs() < 1e-15);
        }
        assert!(build_qam(8).is_err());
        assert!(matches!(build_qam(32), Err(Error::UnsupportedOrder(32))));
    }

    #[test]
    fn unit_energy_and_distinct_points() {
        for order in ORDERS {
            let c = build_qam(order).unwrap();
            let e: f64 = c.points().iter().map(|p| p.norm_sqr()).sum::<f64>() / order as f64;
            assert!((e - 1.0).abs() < 1e-12);
            for i in 0..order {
                for j in i + 1..order {
                    assert!((c.point(i) - c.point(j)).norm() > 1e-6);
                }
            }
        }
    }

    #[test]
    fn gray_adjacency_by_enumeration() {
        for order in ORDERS {
            let c = build_qam(order).unwrap();
            let pts = c.points();
            let dmin = (0..order)
                .flat_map(|i| (0..order).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| (pts[i] - pts[j]).norm())
                .fold(f64::INFINITY, f64::min);
            for i in 0..order {
                for j in 0..order {
                    if i != j && ((pts[i] - pts[j]).norm() - dmin).abs() < 1e-9 {
                        assert_eq!((i ^ j).count_ones(), 1, "order {order}: {i} vs {j}");
                    }
                }
            }
        }
    }

    #[test]
    fn noiseless_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for order in ORDERS {
            let c = build_qam(order).unwrap();
            let k = c.bits_per_symbol();
            let bits: Vec<bool> = (0..10_000 / k * k).map(|_| rng.random()).collect();
            let s = modulate(&bits, &c).unwrap();
            assert_eq!(demodulate_hard(&s.symbols, &c), bits);
            let llr = demodulate_soft(&s.symbols, &c, 0.1);
            assert!(llr.iter().zip(&bits).all(|(l, b)| (*l < 0.0) == *b));
        }
    }

    #[test]
    fn llr_sign_agrees_with_hard_decision() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for order in ORDERS {
            let c = build_qam(order).unwrap();
            let ys: Vec<Complex64> = (0..2000)
                .map(|_| Complex64::new(rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5)))
                .collect();
            let hard = demodulate_hard(&ys, &c);
            let soft = demodulate_soft(&ys, &c, 0.3);
            for (h, l) in hard.iter().zip(&soft) {
                assert!(*l == 0.0 || (*l < 0.0) == *h);
            }
        }
    }

    #[test]
    fn llr_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let c = build_qam(16).unwrap();
        for _ in 0..200 {
            let y = Complex64::new(rng.random_range(-1.2..1.2), rng.random_range(-1.2..1.2));
            let nv = rng.random_range(0.05..2.0);
            let got = demodulate_soft(&[y], &c, nv);
            for (bit, g) in got.iter().enumerate() {
                let shift = 3 - bit;
                let dist = |v: usize| {
                    (0..16)
                        .filter(|l| (l >> shift) & 1 == v)
                        .map(|l| (y - c.point(l)).norm_sqr())
                        .fold(f64::INFINITY, f64::min)
                };
                assert!((g - (dist(1) - dist(0)) / nv).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn modulate_rejects_partial_symbols() {
        let c = build_qam(16).unwrap();
        assert!(matches!(modulate(&[true; 6], &c), Err(Error::Length(_))));
    }

    #[test]
    fn erasures_give_zero_llrs() {
        let c = build_qam(4).unwrap();
        let y = [c.point(0), c.point(3)];
        let l = demodulate_soft_per_symbol(&y, &c, &[0.1, 0.1], &[false, true]).unwrap();
        assert!(l[0] > 0.0 && l[1] > 0.0);
        assert_eq!(&l[2..], &[0.0, 0.0]);
        assert!(demodulate_soft_per_symbol(&y, &c, &[0.1], &[false, true]).is_err());
    }
}
