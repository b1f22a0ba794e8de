//! Result files: the BER CSV, the self-describing metadata record that
//! reproduces it, and the PEP-bound table.

use std::path::Path;
use std::time::Instant;

use bastc::analysis::{
    bpsk_alamouti_codebook, pep_chernoff_conditional, pep_conditional_direct,
    pep_upper_bound_adjustable, PepInputs,
};
use bastc::engine::{estimate_ber, BerCurve};
use bastc::numerics::{hermitian_eig, ComplexMatrix, RngStream};

use crate::config::{emit_config, ExperimentConfig, PepConfig};

pub const CSV_HEADER: &str = "snr_db,ber,bits,errors,ci_low,ci_high";

/// Renders a curve as CSV, one row per SNR point.
pub fn curve_to_csv(curve: &BerCurve) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for p in &curve.points {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            p.snr_db, p.ber, p.bits, p.errors, p.ci_low, p.ci_high
        ));
    }
    out
}

/// Metadata written next to every CSV: the fully resolved configuration
/// (embedded as TOML so it can be replayed verbatim), the seed rule,
/// version and wall time.
#[derive(serde::Serialize, serde::Deserialize)]
pub struct RunMetadata {
    pub version: String,
    pub config_toml: String,
    pub seed: u64,
    pub trial_stream_rule: String,
    pub elapsed_seconds: f64,
    pub total_bits: u64,
    pub total_errors: u64,
}

/// Runs the sweep and writes `ber.csv` and `metadata.json` under `out`.
/// Re-running from the metadata alone reproduces the CSV byte-exactly.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    out: &Path,
) -> Result<BerCurve, Box<dyn std::error::Error>> {
    std::fs::create_dir_all(out)?;
    let started = Instant::now();
    let curve = estimate_ber(&cfg.scenario, &cfg.sweep)?;
    let elapsed = started.elapsed().as_secs_f64();

    let csv = curve_to_csv(&curve);
    std::fs::write(out.join("ber.csv"), &csv)?;

    let meta = RunMetadata {
        version: format!("bastc {}", env!("CARGO_PKG_VERSION")),
        config_toml: emit_config(cfg),
        seed: cfg.sweep.seed,
        trial_stream_rule: "stream = point_index << 32 | trial_index".into(),
        elapsed_seconds: elapsed,
        total_bits: curve.points.iter().map(|p| p.bits).sum(),
        total_errors: curve.points.iter().map(|p| p.errors).sum(),
    };
    std::fs::write(
        out.join("metadata.json"),
        serde_json::to_string_pretty(&meta)?,
    )?;
    Ok(curve)
}

/// Reloads the experiment embedded in a metadata record.
pub fn config_from_metadata(path: &Path) -> Result<ExperimentConfig, Box<dyn std::error::Error>> {
    let text = std::fs::read_to_string(path)?;
    let meta: RunMetadata = serde_json::from_str(&text)?;
    Ok(crate::config::parse_config_str(&meta.config_toml)?)
}

/// PEP-bound table: for every BPSK Alamouti codeword pair, seeded channel
/// and γ, the exact conditional PEP, its Chernoff bound and the
/// product-form bound evaluated from the pair's eigenvalue chain.
pub fn pep_table(pep: &PepConfig) -> String {
    let codebook = bpsk_alamouti_codebook();
    let identity = ComplexMatrix::identity(2);
    let mut rng = RngStream::new(pep.seed, 0);
    let channels: Vec<ComplexMatrix> = (0..pep.channels)
        .map(|_| bastc::channel::draw_fading(2, 2, &mut rng))
        .collect();

    let mut out = String::from("gamma,pair,channel,conditional_pep,chernoff_bound,product_bound\n");
    for &gamma in &pep.gammas {
        let mut pair_idx = 0usize;
        for a in 0..codebook.len() {
            for b in 0..codebook.len() {
                if a == b {
                    continue;
                }
                for (ci, g) in channels.iter().enumerate() {
                    let inputs = PepInputs {
                        codeword_a: &codebook[a],
                        codeword_b: &codebook[b],
                        channel: g,
                        adjustable: &identity,
                        gamma,
                    };
                    let exact = pep_conditional_direct(&inputs).expect("valid inputs");
                    let chernoff = pep_chernoff_conditional(&inputs).expect("valid inputs");
                    let product = product_bound(&inputs);
                    out.push_str(&format!(
                        "{},{},{},{},{},{}\n",
                        gamma, pair_idx, ci, exact.probability, chernoff.probability, product
                    ));
                }
                pair_idx += 1;
            }
        }
    }
    out
}

fn product_bound(inputs: &PepInputs) -> f64 {
    let delta = inputs.codeword_a.sub(inputs.codeword_b);
    let code_dec = hermitian_eig(&delta.hermitian().mul(&delta)).expect("codeword Gram");
    let u = code_dec.eigenvectors.hermitian();
    let gu = inputs.channel.mul(&u);
    let lam_g = hermitian_eig(&gu.hermitian().mul(&gu))
        .expect("channel Gram")
        .eigenvalues;
    let lam_v = vec![1.0; 2];
    pep_upper_bound_adjustable(
        &lam_v,
        &lam_g,
        &code_dec.eigenvalues,
        inputs.gamma,
        delta.cols(),
    )
}
