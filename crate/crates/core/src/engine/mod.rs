//! Monte Carlo orchestration: scenario configuration, full per-trial
//! simulation of the point-to-point, SAS, MAS and DSTC topologies, BER
//! estimation across an SNR sweep and diversity-slope fitting.
//!
//! One *transmission unit* is the atomic scheduled quantity: a single
//! symbol when no space-time code is active, otherwise one space-time
//! group of `N = 2` symbols. Under per-symbol coherence the fading is
//! redrawn every unit; under per-packet coherence it is redrawn every
//! `M / unit` scheduling slots. Relay buffers are counted in units.
//!
//! The SNR axis is `P_S / σ²` with `σ²_r = σ²_d = σ²`; sweeps override the
//! configured noise variances accordingly.

mod dstc;
mod mas;
mod p2p;
mod sas;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::abaro::SgConfig;
use crate::channel::{
    draw_fading, perturb_csi, CoherencePreset, LinkCoeff, NoiseConfig, PowerConfig,
};
use crate::numerics::{Complex64, RngStream};
use crate::tolerances;
use crate::{Error, Result};

/// Network layout being simulated.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Topology {
    /// Direct source→destination link; the calibration baseline.
    P2p,
    /// Single-antenna nodes, AF relays, adjustable Alamouti at the relay.
    Sas,
    /// Multi-antenna nodes, AF relays.
    Mas,
    /// Single-antenna DF relays cooperating on a distributed Alamouti code.
    DstcSas,
    /// Multi-antenna DF relays, best relay forwarding a full Alamouti code.
    DstcMas,
}

/// Link/relay selection policy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SelectionPolicy {
    /// Max-link scheduling plus stochastic-gradient code adaptation.
    Abaro,
    /// Best relay selection (max-min end-to-end SNR, no buffering).
    Brs,
    /// Max-max relay selection (alternating best-SR / best-RD slots).
    Mmrs,
    /// Max-link scheduling without code adaptation.
    MaxlinkNoopt,
}

/// Space-time coding at the forwarding side.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CodingScheme {
    /// Plain symbol forwarding.
    None,
    /// Alamouti with a fixed equal-weight adjustable vector.
    Alamouti,
    /// Randomized Alamouti: decentralized Gaussian code draws when not
    /// adapted, the ABARO-maintained code when adaptation is on.
    RAlamouti,
}

/// Full description of one simulated scenario.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub topology: Topology,
    /// Relay count `n_r` (ignored for point-to-point).
    pub relays: usize,
    /// Antennas per node.
    pub antennas: usize,
    /// Packet size `M` in symbols.
    pub block_len: usize,
    /// Number of source packets `J`.
    pub packets: usize,
    /// Relay buffer capacity in transmission units.
    pub buffer_capacity: usize,
    pub selection: SelectionPolicy,
    pub coding: CodingScheme,
    pub coherence: CoherencePreset,
    /// Destination CSI error variance (0 for perfect CSI).
    pub csi_error_var: f64,
    pub power: PowerConfig,
    pub noise: NoiseConfig,
    pub sg: SgConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            topology: Topology::Sas,
            relays: 2,
            antennas: 1,
            block_len: 100,
            packets: 200,
            buffer_capacity: 4,
            selection: SelectionPolicy::MaxlinkNoopt,
            coding: CodingScheme::None,
            coherence: CoherencePreset::PerSymbol,
            csi_error_var: 0.0,
            power: PowerConfig::default(),
            noise: NoiseConfig {
                sigma_r_sq: 0.1,
                sigma_d_sq: 0.1,
            },
            sg: SgConfig::default(),
        }
    }
}

/// Space-time group size: symbols consumed per coded transmission unit.
pub const STC_GROUP: usize = 2;

impl ScenarioConfig {
    /// Symbols per transmission unit.
    pub fn group_len(&self) -> usize {
        match self.coding {
            CodingScheme::None => 1,
            _ => STC_GROUP,
        }
    }

    /// Scheduling slots between fading redraws.
    pub fn redraw_interval(&self) -> u64 {
        match self.coherence {
            CoherencePreset::PerSymbol => 1,
            CoherencePreset::PerPacket => (self.block_len / self.group_len()) as u64,
        }
    }

    /// Total transmission units one trial delivers.
    pub fn total_units(&self) -> u64 {
        (self.packets * self.block_len / self.group_len()) as u64
    }

    pub fn validate(&self) -> Result<()> {
        if self.block_len == 0 {
            return Err(Error::Config("block_len (M) must be at least 1".into()));
        }
        if self.packets == 0 {
            return Err(Error::Config("packets (J) must be at least 1".into()));
        }
        if self.buffer_capacity == 0 {
            return Err(Error::Config("buffer_capacity must be at least 1".into()));
        }
        if self.csi_error_var < 0.0 {
            return Err(Error::Config("csi_error_var must be non-negative".into()));
        }
        if self.antennas > 1 && !self.block_len.is_multiple_of(self.antennas) {
            return Err(Error::Config(format!(
                "block_len (M = {}) must be divisible by the antenna count (N = {})",
                self.block_len, self.antennas
            )));
        }
        if self.coding != CodingScheme::None && !self.block_len.is_multiple_of(STC_GROUP) {
            return Err(Error::Config(format!(
                "block_len (M = {}) must be divisible by the space-time group size (N = {STC_GROUP})",
                self.block_len
            )));
        }
        self.power.validate()?;
        self.noise.validate()?;
        self.sg.validate()?;
        if (self.sg.power_budget - self.power.p_v).abs() > 1e-12 {
            return Err(Error::Config(
                "sg.power_budget and power.p_v name the same budget and must be equal".into(),
            ));
        }
        if self.power.sigma_s_sq != 1.0 {
            return Err(Error::Config(
                "BPSK symbols are ±1, so power.sigma_s_sq must be 1 (scale power.p_s instead)"
                    .into(),
            ));
        }

        if self.selection == SelectionPolicy::Abaro && self.coding != CodingScheme::RAlamouti {
            return Err(Error::Config(
                "selection \"abaro\" adapts the randomized code; set coding = \"r-alamouti\""
                    .into(),
            ));
        }

        match self.topology {
            Topology::P2p => match self.coding {
                CodingScheme::None if self.antennas == 1 => Ok(()),
                CodingScheme::Alamouti if self.antennas == 2 => Ok(()),
                CodingScheme::None | CodingScheme::Alamouti => Err(Error::Config(
                    "p2p needs antennas = 1 uncoded or antennas = 2 with coding \"alamouti\""
                        .into(),
                )),
                CodingScheme::RAlamouti => Err(Error::Config(
                    "p2p supports coding \"none\" or \"alamouti\" only".into(),
                )),
            },
            Topology::Sas => {
                if self.antennas != 1 {
                    return Err(Error::Config("sas nodes have a single antenna".into()));
                }
                if self.relays == 0 {
                    return Err(Error::Config("sas needs at least one relay".into()));
                }
                Ok(())
            }
            Topology::Mas => {
                if self.antennas != STC_GROUP {
                    return Err(Error::Config(
                        "mas ships for antennas = 2 (Alamouti)".into(),
                    ));
                }
                if self.relays == 0 {
                    return Err(Error::Config("mas needs at least one relay".into()));
                }
                if self.coding == CodingScheme::None {
                    return Err(Error::Config("mas requires a space-time code".into()));
                }
                if !matches!(
                    self.selection,
                    SelectionPolicy::Abaro | SelectionPolicy::MaxlinkNoopt
                ) {
                    return Err(Error::Config(
                        "mas supports selection \"abaro\" or \"maxlink-noopt\"".into(),
                    ));
                }
                Ok(())
            }
            Topology::DstcSas => {
                if self.antennas != 1 {
                    return Err(Error::Config("dstc-sas nodes have a single antenna".into()));
                }
                if self.relays < STC_GROUP {
                    return Err(Error::Config(format!(
                        "dstc-sas needs at least {STC_GROUP} relays to form a group"
                    )));
                }
                if self.coding != CodingScheme::Alamouti {
                    return Err(Error::Config(
                        "dstc-sas ships with coding \"alamouti\"".into(),
                    ));
                }
                if self.selection != SelectionPolicy::MaxlinkNoopt {
                    return Err(Error::Config(
                        "dstc-sas uses its own group scheduler; set selection \"maxlink-noopt\""
                            .into(),
                    ));
                }
                Ok(())
            }
            Topology::DstcMas => {
                if self.antennas != STC_GROUP {
                    return Err(Error::Config("dstc-mas ships for antennas = 2".into()));
                }
                if self.relays == 0 {
                    return Err(Error::Config("dstc-mas needs at least one relay".into()));
                }
                if self.coding != CodingScheme::Alamouti {
                    return Err(Error::Config(
                        "dstc-mas ships with coding \"alamouti\"".into(),
                    ));
                }
                if self.selection != SelectionPolicy::MaxlinkNoopt {
                    return Err(Error::Config(
                        "dstc-mas uses its own scheduler; set selection \"maxlink-noopt\"".into(),
                    ));
                }
                Ok(())
            }
        }
    }
}

/// Totals from one simulated trial.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct TrialOutcome {
    /// Bits emitted by the source.
    pub bits_sent: u64,
    /// Bits detected at the destination (equals `bits_sent` after draining).
    pub bits_delivered: u64,
    pub bit_errors: u64,
    /// Scheduling slots consumed.
    pub slots: u64,
}

/// Runs one full trial (J packets plus buffer draining) on the stream
/// `(seed, stream)` and returns delivered-bit totals.
pub fn run_trial(cfg: &ScenarioConfig, seed: u64, stream: u64) -> Result<TrialOutcome> {
    cfg.validate()?;
    let rng = RngStream::new(seed, stream);
    let outcome = match cfg.topology {
        Topology::P2p => p2p::run(cfg, rng)?,
        Topology::Sas => sas::run(cfg, rng)?,
        Topology::Mas => mas::run(cfg, rng)?,
        Topology::DstcSas => dstc::run_sas(cfg, rng)?,
        Topology::DstcMas => dstc::run_mas(cfg, rng)?,
    };
    debug_assert_eq!(outcome.bits_sent, outcome.bits_delivered);
    Ok(outcome)
}

/// Sweep controls: SNR grid, stopping rule and the base seed from which
/// per-trial streams are derived.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// SNR grid in dB (`P_S/σ²`).
    pub snr_db: Vec<f64>,
    /// Stop a point once this many bit errors were seen.
    pub min_errors: u64,
    /// Hard cap on simulated bits per point.
    pub max_bits: u64,
    /// Hard cap on trials per point.
    pub max_trials: u64,
    /// Base seed; trial `t` of point `p` runs on stream `p·2³² + t`.
    pub seed: u64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            snr_db: vec![0.0, 5.0, 10.0, 15.0, 20.0],
            min_errors: 100,
            max_bits: 10_000_000,
            max_trials: 4096,
            seed: 1,
        }
    }
}

/// One estimated point of a BER curve with its Wilson 95% interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BerPoint {
    pub snr_db: f64,
    pub ber: f64,
    pub bits: u64,
    pub errors: u64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// False when the stopping rule ran out of budget before `min_errors`;
    /// such points sit at or below the reliably-estimable floor.
    pub reached_min_errors: bool,
}

/// A BER-vs-SNR sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BerCurve {
    pub points: Vec<BerPoint>,
}

/// Trials dispatched per deterministic batch. Fixed so results do not
/// depend on the worker count.
const TRIAL_BATCH: u64 = 8;

/// Estimates the BER across the sweep grid. Deterministic given the sweep
/// seed: trials run on fixed streams and only integer totals are merged.
pub fn estimate_ber(cfg: &ScenarioConfig, sweep: &SweepConfig) -> Result<BerCurve> {
    cfg.validate()?;
    if sweep.snr_db.is_empty() {
        return Err(Error::InvalidArgument("empty SNR grid".into()));
    }
    let mut points = Vec::with_capacity(sweep.snr_db.len());
    for (pi, &snr_db) in sweep.snr_db.iter().enumerate() {
        let sigma = cfg.power.p_s / 10f64.powf(snr_db / 10.0);
        let mut point_cfg = cfg.clone();
        point_cfg.noise = NoiseConfig {
            sigma_r_sq: sigma,
            sigma_d_sq: sigma,
        };

        let mut bits = 0u64;
        let mut errors = 0u64;
        let mut trial = 0u64;
        while trial < sweep.max_trials {
            let end = (trial + TRIAL_BATCH).min(sweep.max_trials);
            let outcomes: Result<Vec<TrialOutcome>> = (trial..end)
                .into_par_iter()
                .map(|t| run_trial(&point_cfg, sweep.seed, ((pi as u64) << 32) | t))
                .collect();
            for o in outcomes? {
                bits += o.bits_delivered;
                errors += o.bit_errors;
            }
            trial = end;
            if errors >= sweep.min_errors || bits >= sweep.max_bits {
                break;
            }
        }
        let ber = if bits > 0 {
            errors as f64 / bits as f64
        } else {
            0.0
        };
        let (ci_low, ci_high) = wilson_interval(errors, bits);
        points.push(BerPoint {
            snr_db,
            ber,
            bits,
            errors,
            ci_low,
            ci_high,
            reached_min_errors: errors >= sweep.min_errors,
        });
    }
    Ok(BerCurve { points })
}

/// Wilson 95% score interval for `errors` successes in `bits` Bernoulli
/// trials.
pub fn wilson_interval(errors: u64, bits: u64) -> (f64, f64) {
    if bits == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959963984540054_f64;
    let n = bits as f64;
    let p = errors as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Least-squares slope of `log₁₀ BER` against `log₁₀ SNR` over the dB
/// window; for diversity order `d` the slope approaches `−d`.
pub fn diversity_slope(curve: &BerCurve, window_db: (f64, f64)) -> Result<f64> {
    let pts: Vec<(f64, f64)> = curve
        .points
        .iter()
        .filter(|p| {
            p.snr_db >= window_db.0 - 1e-9
                && p.snr_db <= window_db.1 + 1e-9
                && p.errors > 0
                && p.ber > 0.0
        })
        .map(|p| (p.snr_db / 10.0, p.ber.log10()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::NotEstimable(format!(
            "need at least 2 points with errors in [{}, {}] dB, have {}",
            window_db.0,
            window_db.1,
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mean_x = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in pts {
        num += (x - mean_x) * (y - mean_y);
        den += (x - mean_x) * (x - mean_x);
    }
    if den == 0.0 {
        return Err(Error::NotEstimable("degenerate SNR window".into()));
    }
    Ok(num / den)
}

/// SNR (dB) at which a BER curve crosses `target`, interpolating linearly
/// in (dB, log₁₀ BER) on the first bracketing segment of the curve. The
/// points are `(snr_db, ber)` sorted by SNR; zero-BER points are ignored.
pub fn snr_at_ber(points: &[(f64, f64)], target: f64) -> Result<f64> {
    if target <= 0.0 {
        return Err(Error::NotEstimable("target BER must be positive".into()));
    }
    let usable: Vec<(f64, f64)> = points.iter().copied().filter(|p| p.1 > 0.0).collect();
    for pair in usable.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let (hi, lo) = (a.1.max(b.1), a.1.min(b.1));
        if target <= hi && target >= lo && a.1 != b.1 {
            let t = (target.log10() - a.1.log10()) / (b.1.log10() - a.1.log10());
            return Ok(a.0 + t * (b.0 - a.0));
        }
    }
    if let Some(p) = usable.iter().find(|p| p.1 == target) {
        return Ok(p.0);
    }
    Err(Error::NotEstimable(format!(
        "target BER {target} is outside the curve's range"
    )))
}

/// Convenience for [`snr_at_ber`] on an estimated curve.
pub fn curve_snr_at_ber(curve: &BerCurve, target: f64) -> Result<f64> {
    let pts: Vec<(f64, f64)> = curve.points.iter().map(|p| (p.snr_db, p.ber)).collect();
    snr_at_ber(&pts, target)
}

/// One hop draw paired with the destination-side estimate of it.
#[derive(Clone, Debug)]
pub(crate) struct Hop {
    pub actual: LinkCoeff,
    pub estimate: LinkCoeff,
}

pub(crate) fn draw_hop(antennas: usize, csi_error_var: f64, rng: &mut RngStream) -> Hop {
    let actual = if antennas == 1 {
        LinkCoeff::Scalar(rng.complex_gaussian(1.0))
    } else {
        LinkCoeff::Matrix(draw_fading(antennas, antennas, rng))
    };
    let estimate =
        perturb_csi(&actual, csi_error_var, rng).expect("csi variance validated non-negative");
    Hop { actual, estimate }
}

/// AWGN with the noiseless limit: variances at or below the floor add
/// nothing.
pub(crate) fn noisy_vec(
    mut signal: Vec<Complex64>,
    variance: f64,
    rng: &mut RngStream,
) -> Vec<Complex64> {
    if variance > tolerances::NOISE_FLOOR {
        for s in &mut signal {
            *s += rng.complex_gaussian(variance);
        }
    }
    signal
}

pub(crate) fn noisy_scalar(signal: Complex64, variance: f64, rng: &mut RngStream) -> Complex64 {
    if variance > tolerances::NOISE_FLOOR {
        signal + rng.complex_gaussian(variance)
    } else {
        signal
    }
}

/// Bit errors between a detected BPSK tuple and the original bits.
pub(crate) fn count_bit_errors(detected: &[Complex64], bits: &[u8]) -> u64 {
    detected
        .iter()
        .zip(bits)
        .filter(|(s, &b)| crate::coding::bpsk_demodulate_symbol(**s) != b)
        .count() as u64
}

/// Safety margin for scheduler loops; every workload terminates well
/// below it.
pub(crate) fn slot_limit(total_units: u64, relays: usize, capacity: usize) -> u64 {
    total_units * 4 + 64 + (relays * capacity * 4) as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic_curve(diversity: f64) -> BerCurve {
        let points = (0..6)
            .map(|i| {
                let snr_db = 10.0 + 2.0 * i as f64;
                let gamma = 10f64.powf(snr_db / 10.0);
                let ber = gamma.powf(-diversity);
                BerPoint {
                    snr_db,
                    ber,
                    bits: 1_000_000,
                    errors: (ber * 1e6) as u64 + 1,
                    ci_low: ber,
                    ci_high: ber,
                    reached_min_errors: true,
                }
            })
            .collect();
        BerCurve { points }
    }

    #[test]
    fn diversity_slope_on_synthetic_curves() {
        let c1 = synthetic_curve(1.0);
        let s1 = diversity_slope(&c1, (10.0, 20.0)).unwrap();
        assert!((s1 + 1.0).abs() < 0.01, "slope {s1}");
        let c2 = synthetic_curve(2.0);
        let s2 = diversity_slope(&c2, (10.0, 20.0)).unwrap();
        assert!((s2 + 2.0).abs() < 0.01, "slope {s2}");
        assert!(matches!(
            diversity_slope(&c1, (40.0, 50.0)),
            Err(Error::NotEstimable(_))
        ));
    }

    #[test]
    fn wilson_interval_shrinks_with_sample_size() {
        let (lo1, hi1) = wilson_interval(50, 1000);
        let (lo2, hi2) = wilson_interval(100, 2000);
        let w1 = hi1 - lo1;
        let w2 = hi2 - lo2;
        assert!((w1 / w2 - std::f64::consts::SQRT_2).abs() < 0.05);
        assert_eq!(wilson_interval(0, 0), (0.0, 1.0));
    }

    #[test]
    fn config_validation_catches_violations() {
        let cfg = ScenarioConfig {
            block_len: 0,
            ..ScenarioConfig::default()
        };
        assert!(cfg.validate().is_err());

        let mut cfg = ScenarioConfig {
            topology: Topology::Mas,
            antennas: 3,
            block_len: 100,
            coding: CodingScheme::Alamouti,
            ..ScenarioConfig::default()
        };
        let err = cfg.validate().unwrap_err().to_string();
        assert!(err.contains("M = 100") && err.contains("N = 3"), "{err}");
        cfg.antennas = 2;
        cfg.validate().unwrap();

        let cfg = ScenarioConfig {
            selection: SelectionPolicy::Abaro,
            coding: CodingScheme::None,
            ..ScenarioConfig::default()
        };
        assert!(cfg.validate().is_err());
    }
}
