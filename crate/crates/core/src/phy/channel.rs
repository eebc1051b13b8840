use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Gains with magnitude at or below this are treated as erasures.
pub const ERASURE_THRESHOLD: f64 = 1e-12;

/// Total complex noise variance for unit-energy symbols at `snr_db` (Es/N0).
pub fn noise_variance(snr_db: f64) -> f64 {
    10f64.powf(-snr_db / 10.0)
}

fn complex_gaussian(rng: &mut ChaCha8Rng, var: f64) -> Complex64 {
    let s = (var / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re * s, im * s)
}

pub fn channel_awgn(symbols: &[Complex64], snr_db: f64, seed: u64) -> Vec<Complex64> {
    let var = noise_variance(snr_db);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    symbols
        .iter()
        .map(|&s| s + complex_gaussian(&mut rng, var))
        .collect()
}

/// Independent unit-power Rayleigh gain per symbol plus AWGN. Returns the
/// received symbols and the gains.
pub fn channel_rayleigh(
    symbols: &[Complex64],
    snr_db: f64,
    seed: u64,
) -> (Vec<Complex64>, Vec<Complex64>) {
    let var = noise_variance(snr_db);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gains = Vec::with_capacity(symbols.len());
    let received = symbols
        .iter()
        .map(|&s| {
            let h = complex_gaussian(&mut rng, 1.0);
            gains.push(h);
            h * s + complex_gaussian(&mut rng, var)
        })
        .collect();
    (received, gains)
}

/// Perfect-CSI zero-forcing: `y / h`, with deep fades flagged as erased.
#[derive(Debug, Clone, PartialEq)]
pub struct Equalized {
    pub symbols: Vec<Complex64>,
    pub erased: Vec<bool>,
    /// `|h|^2` per symbol; the post-equalization noise variance is `N0 / |h|^2`.
    pub power: Vec<f64>,
}

impl Equalized {
    pub fn noise_variances(&self, noise_var: f64) -> Vec<f64> {
        self.power
            .iter()
            .zip(&self.erased)
            .map(|(&p, &e)| if e { f64::INFINITY } else { noise_var / p })
            .collect()
    }
}

pub fn equalize_csi(received: &[Complex64], gains: &[Complex64]) -> Result<Equalized> {
    if received.len() != gains.len() {
        return Err(Error::Length(format!(
            "{} symbols but {} gains",
            received.len(),
            gains.len()
        )));
    }
    let mut out = Equalized {
        symbols: Vec::with_capacity(received.len()),
        erased: Vec::with_capacity(received.len()),
        power: Vec::with_capacity(received.len()),
    };
    for (&y, &h) in received.iter().zip(gains) {
        let erased = !(h.norm() > ERASURE_THRESHOLD);
        out.symbols.push(if erased {
            Complex64::new(0.0, 0.0)
        } else {
            y / h
        });
        out.erased.push(erased);
        out.power.push(h.norm_sqr());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phy::{build_qam, demodulate_hard, modulate};
    use rand::Rng;
    use statrs::function::erf::erfc;

    fn q(x: f64) -> f64 {
        0.5 * erfc(x / std::f64::consts::SQRT_2)
    }

    fn random_bits(n: usize, seed: u64) -> Vec<bool> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.random()).collect()
    }

    #[test]
    fn high_snr_is_transparent() {
        let c = build_qam(64).unwrap();
        let s = modulate(&random_bits(600, 0), &c).unwrap();
        let y = channel_awgn(&s.symbols, 200.0, 1);
        assert!(y.iter().zip(&s.symbols).all(|(a, b)| (a - b).norm() < 1e-9));
    }

    #[test]
    fn noise_and_gain_moments() {
        let zeros = vec![Complex64::new(0.0, 0.0); 1_000_000];
        for snr in [0.0, 7.0] {
            let n = channel_awgn(&zeros, snr, 2);
            let var = n.iter().map(|v| v.norm_sqr()).sum::<f64>() / n.len() as f64;
            assert!((var / noise_variance(snr) - 1.0).abs() < 0.02);
        }
        let ones = vec![Complex64::new(1.0, 0.0); 1_000_000];
        let (_, h) = channel_rayleigh(&ones, 30.0, 3);
        let p = h.iter().map(|v| v.norm_sqr()).sum::<f64>() / h.len() as f64;
        assert!((p - 1.0).abs() < 0.02);
    }

    #[test]
    fn qpsk_ber_matches_gaussian_tail() {
        let c = build_qam(4).unwrap();
        let bits = random_bits(1_000_000, 4);
        let s = modulate(&bits, &c).unwrap();
        let mut prev = 1.0;
        for (i, snr) in [2.0f64, 4.0, 6.0, 8.0].iter().enumerate() {
            let y = channel_awgn(&s.symbols, *snr, 10 + i as u64);
            let errs = demodulate_hard(&y, &c)
                .iter()
                .zip(&bits)
                .filter(|(a, b)| a != b)
                .count();
            let ber = errs as f64 / bits.len() as f64;
            // QPSK: Eb/N0 = Es/N0 / 2 and BER = Q(sqrt(2 Eb/N0)) = Q(sqrt(Es/N0))
            let expect = q(10f64.powf(snr / 10.0).sqrt());
            assert!(
                (ber / expect - 1.0).abs() < 0.05,
                "{snr} dB: {ber} vs {expect}"
            );
            assert!(ber < prev);
            prev = ber;
        }
    }

    #[test]
    fn equalization() {
        let c = build_qam(16).unwrap();
        let s = modulate(&random_bits(400, 5), &c).unwrap();
        let unit = vec![Complex64::new(1.0, 0.0); s.len()];
        assert_eq!(equalize_csi(&s.symbols, &unit).unwrap().symbols, s.symbols);
        let (y, h) = channel_rayleigh(&s.symbols, 250.0, 6);
        let eq = equalize_csi(&y, &h).unwrap();
        assert!(eq
            .symbols
            .iter()
            .zip(&s.symbols)
            .all(|(a, b)| (a - b).norm() < 1e-9));
        let fade =
            equalize_csi(&[Complex64::new(1.0, 0.0)], &[Complex64::new(1e-13, 0.0)]).unwrap();
        assert_eq!(fade.erased, vec![true]);
        assert!(equalize_csi(&y, &h[1..]).is_err());
    }

    #[test]
    fn seeded_channels_repeat() {
        let s = vec![Complex64::new(0.3, -0.1); 100];
        assert_eq!(channel_awgn(&s, 5.0, 9), channel_awgn(&s, 5.0, 9));
        assert_eq!(channel_rayleigh(&s, 5.0, 9), channel_rayleigh(&s, 5.0, 9));
        assert_ne!(channel_awgn(&s, 5.0, 9), channel_awgn(&s, 5.0, 10));
    }
}
