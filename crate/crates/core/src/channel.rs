//! Block-fading channel generation, AWGN and the imperfect-CSI
//! perturbation.
//!
//! Fading coefficients are unit-variance circularly-symmetric complex
//! Gaussian (Rayleigh envelopes), drawn independently per coherence block.

use serde::{Deserialize, Serialize};

use crate::numerics::{Complex64, ComplexMatrix, RngStream};
use crate::{Error, Result};

/// Relay- and destination-side noise variances.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    /// Per-entry complex noise variance at the relays.
    pub sigma_r_sq: f64,
    /// Per-entry complex noise variance at the destination.
    pub sigma_d_sq: f64,
}

impl NoiseConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sigma_r_sq <= 0.0 || self.sigma_d_sq <= 0.0 {
            return Err(Error::Config(
                "noise variances sigma_r_sq and sigma_d_sq must be strictly positive".into(),
            ));
        }
        Ok(())
    }
}

/// Transmit powers and the adjustable-code power budget.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerConfig {
    /// Source transmit power `P_S`.
    pub p_s: f64,
    /// Relay transmit power `P_R`.
    pub p_r: f64,
    /// Adjustable-code power budget `P_V` (the normalized code norm).
    pub p_v: f64,
    /// Symbol power; 1 in the reference configuration.
    pub sigma_s_sq: f64,
}

impl PowerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.p_s <= 0.0 || self.p_r <= 0.0 || self.p_v <= 0.0 || self.sigma_s_sq <= 0.0 {
            return Err(Error::Config("all powers must be strictly positive".into()));
        }
        Ok(())
    }
}

impl Default for PowerConfig {
    fn default() -> Self {
        Self {
            p_s: 1.0,
            p_r: 1.0,
            p_v: std::f64::consts::SQRT_2,
            sigma_s_sq: 1.0,
        }
    }
}

/// Span over which fading coefficients stay constant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoherencePreset {
    /// Redrawn for every transmission unit (a symbol, or one space-time
    /// group when coding is active).
    PerSymbol,
    /// Constant across one whole packet of M symbols.
    PerPacket,
}

/// One hop coefficient: a scalar for single-antenna links, an `N×N` matrix
/// for multiple-antenna links.
#[derive(Clone, Debug, PartialEq)]
pub enum LinkCoeff {
    Scalar(Complex64),
    Matrix(ComplexMatrix),
}

impl LinkCoeff {
    pub fn scalar(&self) -> Complex64 {
        match self {
            LinkCoeff::Scalar(h) => *h,
            LinkCoeff::Matrix(_) => panic!("expected scalar link coefficient"),
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        match self {
            LinkCoeff::Matrix(m) => m,
            LinkCoeff::Scalar(_) => panic!("expected matrix link coefficient"),
        }
    }

    pub fn frobenius_norm_sq(&self) -> f64 {
        match self {
            LinkCoeff::Scalar(h) => h.norm_sqr(),
            LinkCoeff::Matrix(m) => m.frobenius_norm_sq(),
        }
    }
}

/// Per-relay fading coefficients for both hops over one coherence block.
#[derive(Clone, Debug)]
pub struct ChannelRealization {
    /// Source→relay coefficient per relay.
    pub sr_links: Vec<LinkCoeff>,
    /// Relay→destination coefficient per relay.
    pub rd_links: Vec<LinkCoeff>,
    /// Number of symbols for which the coefficients are constant.
    pub coherence: usize,
}

impl ChannelRealization {
    /// Draw an independent realization: scalar links when `antennas == 1`,
    /// `N×N` matrices otherwise.
    pub fn draw(relays: usize, antennas: usize, coherence: usize, rng: &mut RngStream) -> Self {
        let draw_one = |rng: &mut RngStream| {
            if antennas == 1 {
                LinkCoeff::Scalar(rng.complex_gaussian(1.0))
            } else {
                LinkCoeff::Matrix(draw_fading(antennas, antennas, rng))
            }
        };
        let sr_links = (0..relays).map(|_| draw_one(rng)).collect();
        let rd_links = (0..relays).map(|_| draw_one(rng)).collect();
        Self {
            sr_links,
            rd_links,
            coherence,
        }
    }
}

/// Matrix of i.i.d. zero-mean, unit-variance circularly-symmetric complex
/// Gaussian fading coefficients.
pub fn draw_fading(rows: usize, cols: usize, rng: &mut RngStream) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(rows, cols);
    for r in 0..rows {
        for c in 0..cols {
            m[(r, c)] = rng.complex_gaussian(1.0);
        }
    }
    m
}

/// Adds white complex Gaussian noise with per-entry variance `variance`.
pub fn add_awgn(
    signal: &[Complex64],
    variance: f64,
    rng: &mut RngStream,
) -> Result<Vec<Complex64>> {
    if variance <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "AWGN variance must be positive, got {variance}"
        )));
    }
    Ok(signal
        .iter()
        .map(|s| s + rng.complex_gaussian(variance))
        .collect())
}

/// Destination-side CSI estimate: `h + e` with `e` i.i.d. zero-mean complex
/// Gaussian of variance `sigma_e_sq` per entry. `sigma_e_sq = 0` returns the
/// coefficients unchanged.
pub fn perturb_csi(h: &LinkCoeff, sigma_e_sq: f64, rng: &mut RngStream) -> Result<LinkCoeff> {
    if sigma_e_sq < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "CSI error variance must be non-negative, got {sigma_e_sq}"
        )));
    }
    if sigma_e_sq == 0.0 {
        return Ok(h.clone());
    }
    Ok(match h {
        LinkCoeff::Scalar(h) => LinkCoeff::Scalar(h + rng.complex_gaussian(sigma_e_sq)),
        LinkCoeff::Matrix(m) => {
            let mut out = m.clone();
            for r in 0..m.rows() {
                for c in 0..m.cols() {
                    out[(r, c)] += rng.complex_gaussian(sigma_e_sq);
                }
            }
            LinkCoeff::Matrix(out)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fading_is_deterministic_per_stream() {
        let mut a = RngStream::new(11, 2);
        let mut b = RngStream::new(11, 2);
        assert_eq!(draw_fading(3, 3, &mut a), draw_fading(3, 3, &mut b));
    }

    #[test]
    fn fading_sample_statistics() {
        let mut rng = RngStream::new(5, 0);
        let n = 100_000;
        let draws: Vec<Complex64> = (0..n).map(|_| rng.complex_gaussian(1.0)).collect();
        let mean = draws.iter().sum::<Complex64>() / n as f64;
        let var = draws.iter().map(|z| z.norm_sqr()).sum::<f64>() / n as f64;
        assert!(mean.norm() < 0.01, "mean {mean}");
        assert!((var - 1.0).abs() < 0.02, "variance {var}");
    }

    #[test]
    fn awgn_empirical_variance() {
        let mut rng = RngStream::new(9, 1);
        let n = 100_000;
        let signal = vec![Complex64::new(1.0, -1.0); n];
        let noisy = add_awgn(&signal, 2.0, &mut rng).unwrap();
        let var = noisy
            .iter()
            .zip(&signal)
            .map(|(y, s)| (y - s).norm_sqr())
            .sum::<f64>()
            / n as f64;
        assert!((var - 2.0).abs() < 0.06, "variance {var}");
    }

    #[test]
    fn awgn_vanishes_in_zero_variance_limit() {
        let mut rng = RngStream::new(9, 1);
        let signal = vec![Complex64::new(0.5, 2.0); 16];
        let out = add_awgn(&signal, 1e-300, &mut rng).unwrap();
        assert_eq!(out, signal);
        assert!(add_awgn(&signal, 0.0, &mut rng).is_err());
        assert!(add_awgn(&signal, -1.0, &mut rng).is_err());
    }

    #[test]
    fn awgn_streams_are_uncorrelated() {
        let n = 100_000;
        let zeros = vec![Complex64::ZERO; n];
        let mut r1 = RngStream::new(21, 0);
        let mut r2 = RngStream::new(21, 1);
        let a = add_awgn(&zeros, 1.0, &mut r1).unwrap();
        let b = add_awgn(&zeros, 1.0, &mut r2).unwrap();
        let cross = a
            .iter()
            .zip(&b)
            .map(|(x, y)| (x * y.conj()).re)
            .sum::<f64>()
            / n as f64;
        assert!(cross.abs() < 0.01, "cross-correlation {cross}");
    }

    #[test]
    fn csi_perturbation_basics() {
        let mut rng = RngStream::new(3, 7);
        let h = LinkCoeff::Scalar(Complex64::new(0.3, -1.2));
        assert_eq!(perturb_csi(&h, 0.0, &mut rng).unwrap(), h);
        assert!(perturb_csi(&h, -0.1, &mut rng).is_err());

        let n = 100_000;
        let mut sum_err = 0.0;
        let mut cross = Complex64::ZERO;
        for _ in 0..n {
            let h = rng.complex_gaussian(1.0);
            let hat = perturb_csi(&LinkCoeff::Scalar(h), 0.1, &mut rng).unwrap();
            let e = hat.scalar() - h;
            sum_err += e.norm_sqr();
            cross += e * h.conj();
        }
        let var = sum_err / n as f64;
        assert!((var - 0.1).abs() < 0.003, "error variance {var}");
        assert!((cross / n as f64).norm() < 0.01, "error correlates with h");
    }

    #[test]
    fn realization_shapes_follow_antenna_count() {
        let mut rng = RngStream::new(1, 0);
        let sas = ChannelRealization::draw(2, 1, 1, &mut rng);
        assert!(matches!(sas.sr_links[0], LinkCoeff::Scalar(_)));
        let mas = ChannelRealization::draw(2, 2, 1, &mut rng);
        let m = mas.rd_links[1].matrix();
        assert_eq!((m.rows(), m.cols()), (2, 2));
    }
}
