//! Point-to-point calibration links: uncoded BPSK over Rayleigh fading and
//! the 2×1 Alamouti transmit-diversity link. These are the references the
//! relay topologies are judged against.

use super::{
    count_bit_errors, draw_hop, noisy_scalar, noisy_vec, CodingScheme, ScenarioConfig,
    TrialOutcome, STC_GROUP,
};
use crate::coding::{bpsk_modulate, ml_detect_with_model, BPSK};
use crate::numerics::{ComplexMatrix, RngStream};
use crate::Result;

pub(super) fn run(cfg: &ScenarioConfig, rng: RngStream) -> Result<TrialOutcome> {
    match cfg.coding {
        CodingScheme::None => run_uncoded(cfg, rng),
        CodingScheme::Alamouti => run_alamouti(cfg, rng),
        CodingScheme::RAlamouti => unreachable!("rejected by validation"),
    }
}

fn run_uncoded(cfg: &ScenarioConfig, mut rng: RngStream) -> Result<TrialOutcome> {
    let total = cfg.total_units();
    let interval = cfg.redraw_interval();
    let amp = cfg.power.p_s.sqrt();
    let sigma_d = cfg.noise.sigma_d_sq;

    let mut hop = draw_hop(1, cfg.csi_error_var, &mut rng);
    let mut errors = 0u64;
    for unit in 0..total {
        if unit > 0 && unit % interval == 0 {
            hop = draw_hop(1, cfg.csi_error_var, &mut rng);
        }
        let bit = rng.random_bit();
        let s = BPSK[bit as usize];
        let rx = noisy_scalar(hop.actual.scalar() * amp * s, sigma_d, &mut rng);
        let coeff = hop.estimate.scalar() * amp;
        let detected = ((coeff.conj() * rx).re < 0.0) as u8;
        errors += (detected != bit) as u64;
    }
    Ok(TrialOutcome {
        bits_sent: total,
        bits_delivered: total,
        bit_errors: errors,
        slots: total,
    })
}

fn run_alamouti(cfg: &ScenarioConfig, mut rng: RngStream) -> Result<TrialOutcome> {
    let total = cfg.total_units();
    let interval = cfg.redraw_interval();
    // Total transmit power P_S split across the two antennas.
    let amp = (cfg.power.p_s / STC_GROUP as f64).sqrt();
    let sigma_d = cfg.noise.sigma_d_sq;

    let mut hops = [
        draw_hop(1, cfg.csi_error_var, &mut rng),
        draw_hop(1, cfg.csi_error_var, &mut rng),
    ];
    let mut errors = 0u64;
    for unit in 0..total {
        if unit > 0 && unit % interval == 0 {
            hops = [
                draw_hop(1, cfg.csi_error_var, &mut rng),
                draw_hop(1, cfg.csi_error_var, &mut rng),
            ];
        }
        let (h1, h2) = (hops[0].actual.scalar(), hops[1].actual.scalar());
        let bits = rng.random_bits(STC_GROUP);
        let s = bpsk_modulate(&bits);
        let tx = vec![
            amp * (h1 * s[0] + h2 * s[1]),
            amp * (-h1 * s[1].conj() + h2 * s[0].conj()),
        ];
        let rx = noisy_vec(tx, sigma_d, &mut rng);

        let (e1, e2) = (hops[0].estimate.scalar(), hops[1].estimate.scalar());
        let model =
            ComplexMatrix::from_rows(&[vec![amp * e1, amp * e2], vec![amp * e2, -amp * e1]]);
        let detected = ml_detect_with_model(&rx, &model, &BPSK);
        errors += count_bit_errors(&detected, &bits);
    }
    let bits_total = total * STC_GROUP as u64;
    Ok(TrialOutcome {
        bits_sent: bits_total,
        bits_delivered: bits_total,
        bit_errors: errors,
        slots: total,
    })
}
