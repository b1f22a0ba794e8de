//! Multiple-antenna-system trials: two-hop AF relaying with `N×N` fading
//! matrices per hop, Alamouti or randomized Alamouti re-encoding at the
//! relay and max-link scheduling with optional ABARO adaptation.
//!
//! A transmission unit is one `N = 2` symbol group; the destination model
//! is built by replaying the noiseless pipeline column by column, so it is
//! exact under perfect CSI including the conjugated Alamouti slot.

use super::{
    count_bit_errors, draw_hop, noisy_vec, slot_limit, CodingScheme, Hop, ScenarioConfig,
    SelectionPolicy, TrialOutcome, STC_GROUP,
};
use crate::abaro::{normalize, sg_update, CodeStructure, SgConfig};
use crate::coding::{
    bpsk_modulate, mas_af_effective_model, mas_transmit_codeword, ml_detect_with_model,
    AdjustableCode, BPSK,
};
use crate::numerics::{Complex64, ComplexMatrix, RngStream};
use crate::relay::{af_gain_mas, RelayNode, RelayProtocol, StoredBlock};
use crate::selection::{
    select_max_link, snr_rd, BufferState, LinkDirection, LinkMetric, ScheduleAction,
};
use crate::{Error, Result};

pub(super) fn run(cfg: &ScenarioConfig, mut rng: RngStream) -> Result<TrialOutcome> {
    let n = STC_GROUP;
    let adaptive = cfg.selection == SelectionPolicy::Abaro;
    let mut relays: Vec<RelayNode> = (0..cfg.relays)
        .map(|k| RelayNode::new(k, cfg.buffer_capacity, n, RelayProtocol::AmplifyForward))
        .collect();
    let mut codes: Vec<AdjustableCode> = match cfg.coding {
        CodingScheme::None => unreachable!("rejected by validation"),
        CodingScheme::Alamouti => {
            let amp = cfg.power.p_v / (n as f64).sqrt();
            vec![
                AdjustableCode::new(vec![Complex64::new(amp, 0.0); n], cfg.power.p_v).unwrap();
                cfg.relays
            ]
        }
        CodingScheme::RAlamouti => (0..cfg.relays)
            .map(|_| AdjustableCode::uniform_phase(n, cfg.power.p_v, &mut rng))
            .collect(),
    };

    let total_units = cfg.total_units();
    let interval = cfg.redraw_interval();
    let limit = slot_limit(total_units, cfg.relays, cfg.buffer_capacity);
    let sg = SgConfig {
        mu: cfg.sg.mu,
        power_budget: cfg.power.p_v,
    };

    let mut sr_hops: Vec<Hop> = Vec::new();
    let mut rd_hops: Vec<Hop> = Vec::new();
    let mut units_sent = 0u64;
    let mut bits_delivered = 0u64;
    let mut bit_errors = 0u64;
    let mut slots = 0u64;

    loop {
        let source_done = units_sent >= total_units;
        if source_done && relays.iter().all(|r| r.buffer.is_empty()) {
            break;
        }
        if slots >= limit {
            return Err(Error::InvalidArgument(
                "mas scheduler did not terminate".into(),
            ));
        }
        if slots.is_multiple_of(interval) || sr_hops.is_empty() {
            sr_hops = (0..cfg.relays)
                .map(|_| draw_hop(n, cfg.csi_error_var, &mut rng))
                .collect();
            rd_hops = (0..cfg.relays)
                .map(|_| draw_hop(n, cfg.csi_error_var, &mut rng))
                .collect();
        }

        let buffers: Vec<BufferState> = relays
            .iter()
            .map(|r| BufferState {
                occupancy: r.buffer.occupancy(),
                capacity: r.buffer.capacity(),
            })
            .collect();
        let mut metrics = Vec::with_capacity(2 * cfg.relays);
        for k in 0..cfg.relays {
            if !source_done {
                metrics.push(LinkMetric {
                    relay: k,
                    direction: LinkDirection::SourceRelay,
                    occupancy: buffers[k].occupancy,
                    value: sr_hops[k].estimate.frobenius_norm_sq() / cfg.noise.sigma_r_sq,
                });
            }
            let rd_value = match cfg.coding {
                CodingScheme::RAlamouti if !adaptive => {
                    // Code drawn at forward time; the metric sees its
                    // expected power P_V²/N per antenna.
                    cfg.power.p_v * cfg.power.p_v / n as f64
                        * rd_hops[k].estimate.frobenius_norm_sq()
                        / cfg.noise.sigma_d_sq
                }
                _ => snr_rd(
                    &codes[k].diag_matrix(),
                    &rd_hops[k].estimate,
                    cfg.noise.sigma_d_sq,
                )?,
            };
            metrics.push(LinkMetric {
                relay: k,
                direction: LinkDirection::RelayDest,
                occupancy: buffers[k].occupancy,
                value: rd_value,
            });
        }

        let decision = select_max_link(&metrics, &buffers)?;
        let k = decision.relay;
        match decision.action {
            ScheduleAction::SourceTransmit => {
                let bits = rng.random_bits(n);
                let s = bpsk_modulate(&bits);
                let f = sr_hops[k].actual.matrix();
                let amp = (cfg.power.p_s / n as f64).sqrt();
                let tx: Vec<Complex64> = f.mul_vec(&s).into_iter().map(|x| x * amp).collect();
                let rx = noisy_vec(tx, cfg.noise.sigma_r_sq, &mut rng);
                relays[k].af_receive(
                    rx,
                    sr_hops[k].actual.clone(),
                    sr_hops[k].estimate.clone(),
                    bits,
                )?;
                units_sent += 1;
            }
            ScheduleAction::RelayForward => {
                let block = relays[k].pop_block()?;
                if cfg.coding == CodingScheme::RAlamouti && !adaptive {
                    codes[k] = AdjustableCode::gaussian(n, cfg.power.p_v, &mut rng);
                }
                let (detected, rx, model) =
                    forward_group(cfg, &codes[k], &block, &rd_hops[k], &mut rng);
                bit_errors += count_bit_errors(&detected, &block.source_bits);
                bits_delivered += n as u64;

                if adaptive {
                    if let Some(carrier) = adaptation_carrier(&model, codes[k].v(), cfg.power.p_v) {
                        let mut updated = sg_update(
                            &codes[k],
                            CodeStructure::Mas { copies: STC_GROUP },
                            &rx,
                            &carrier,
                            &detected,
                            1.0,
                            &sg,
                        )?;
                        normalize(&mut updated)?;
                        codes[k] = updated;
                    }
                }
            }
        }
        slots += 1;
    }

    Ok(TrialOutcome {
        bits_sent: units_sent * n as u64,
        bits_delivered,
        bit_errors,
        slots,
    })
}

/// Transmits one stored group through the second hop and detects it.
/// Returns the detected symbols, the stacked receive vector and the exact
/// destination model used for detection.
fn forward_group(
    cfg: &ScenarioConfig,
    code: &AdjustableCode,
    block: &StoredBlock,
    rd: &Hop,
    rng: &mut RngStream,
) -> (Vec<Complex64>, Vec<Complex64>, ComplexMatrix) {
    let n = STC_GROUP;
    let f = block.sr_channel.matrix();
    let g = rd.actual.matrix();
    let alpha = af_gain_mas(
        cfg.power.p_r,
        cfg.power.p_s,
        f.frobenius_norm_sq(),
        cfg.noise.sigma_r_sq,
        n,
    );
    let scaled: Vec<Complex64> = block.symbols.iter().map(|&u| u * alpha).collect();
    let x = mas_transmit_codeword(code.v(), &scaled);
    let mut stacked = Vec::with_capacity(2 * n);
    for t in 0..2 {
        stacked.extend(g.mul_vec(&x.col(t)));
    }
    let rx = noisy_vec(stacked, cfg.noise.sigma_d_sq, rng);

    let f_hat = block.sr_estimate.matrix();
    let g_hat = rd.estimate.matrix();
    let alpha_hat = af_gain_mas(
        cfg.power.p_r,
        cfg.power.p_s,
        f_hat.frobenius_norm_sq(),
        cfg.noise.sigma_r_sq,
        n,
    );
    let model = mas_af_effective_model(code, f_hat, g_hat, alpha_hat, cfg.power.p_s);
    let detected = ml_detect_with_model(&rx, &model, &BPSK);
    (detected, rx, model)
}

/// Effective channel for the equivalent-model update, chosen so
/// `V_eq·H` reproduces the exact destination model at the current code:
/// `H[row, ·] = model[row, ·] / v_{row mod N}`. Returns `None` when an
/// entry of the code is too small to divide by.
fn adaptation_carrier(model: &ComplexMatrix, v: &[Complex64], p_v: f64) -> Option<ComplexMatrix> {
    let n = v.len();
    if v.iter().any(|z| z.norm() < 1e-6 * p_v) {
        return None;
    }
    let mut h = ComplexMatrix::zeros(model.rows(), model.cols());
    for row in 0..model.rows() {
        let w = v[row % n];
        for col in 0..model.cols() {
            h[(row, col)] = model[(row, col)] / w;
        }
    }
    Some(h)
}
