//! Distributed space-time coding trials with DF relays.
//!
//! The source can only broadcast in the first hop: every relay detects and
//! stores its own copy of each packet, so buffer occupancies stay
//! synchronized and each forwarded packet is popped everywhere at once.
//! In the SAS variant an SINR-selected group of two single-antenna relays
//! emits one distributed Alamouti codeword; in the MAS variant the
//! best relay emits a complete Alamouti codeword from its own decisions.

use super::{
    count_bit_errors, draw_hop, noisy_vec, slot_limit, Hop, ScenarioConfig, TrialOutcome, STC_GROUP,
};
use crate::channel::LinkCoeff;
use crate::coding::{alamouti_encode, bpsk_modulate, ml_detect_with_model, BPSK};
use crate::numerics::{Complex64, ComplexMatrix, RngStream};
use crate::relay::{RelayNode, RelayProtocol, StoredBlock};
use crate::selection::{select_best_relay_mas, select_dstc_group};
use crate::{Error, Result};

struct DstcTrial<'a> {
    cfg: &'a ScenarioConfig,
    rng: RngStream,
    relays: Vec<RelayNode>,
    sr_hops: Vec<Hop>,
    rd_hops: Vec<Hop>,
    units_sent: u64,
    bits_delivered: u64,
    bit_errors: u64,
    slots: u64,
}

impl<'a> DstcTrial<'a> {
    fn new(cfg: &'a ScenarioConfig, rng: RngStream, antennas: usize) -> Self {
        let relays = (0..cfg.relays)
            .map(|k| {
                RelayNode::new(
                    k,
                    cfg.buffer_capacity,
                    antennas,
                    RelayProtocol::DecodeForward,
                )
            })
            .collect();
        Self {
            cfg,
            rng,
            relays,
            sr_hops: Vec::new(),
            rd_hops: Vec::new(),
            units_sent: 0,
            bits_delivered: 0,
            bit_errors: 0,
            slots: 0,
        }
    }

    fn redraw(&mut self, antennas: usize) {
        let csi = self.cfg.csi_error_var;
        self.sr_hops = (0..self.cfg.relays)
            .map(|_| draw_hop(antennas, csi, &mut self.rng))
            .collect();
        self.rd_hops = (0..self.cfg.relays)
            .map(|_| draw_hop(antennas, csi, &mut self.rng))
            .collect();
    }

    /// Broadcast-and-forward scheduling per the DSTC scheduler: compare
    /// the summed SR SNR against the summed RD SNR, subject to every
    /// buffer having room (SR) or data (RD). Occupancies are synchronized
    /// by construction.
    fn choose_source_transmit(&self) -> Result<bool> {
        let source_done = self.units_sent >= self.cfg.total_units();
        let sr_ok = !source_done && self.relays.iter().all(|r| !r.buffer.is_full());
        let rd_ok = self.relays.iter().all(|r| !r.buffer.is_empty());
        match (sr_ok, rd_ok) {
            (true, true) => {
                let sr_sum: f64 = self
                    .sr_hops
                    .iter()
                    .map(|h| h.estimate.frobenius_norm_sq())
                    .sum::<f64>()
                    / self.cfg.noise.sigma_r_sq;
                let rd_sum: f64 = self
                    .rd_hops
                    .iter()
                    .map(|h| h.estimate.frobenius_norm_sq())
                    .sum::<f64>()
                    / self.cfg.noise.sigma_d_sq;
                Ok(sr_sum >= rd_sum)
            }
            (true, false) => Ok(true),
            (false, true) => Ok(false),
            (false, false) => Err(Error::InvalidArgument(
                "dstc scheduler found no feasible action".into(),
            )),
        }
    }

    fn outcome(&self) -> TrialOutcome {
        TrialOutcome {
            bits_sent: self.units_sent * STC_GROUP as u64,
            bits_delivered: self.bits_delivered,
            bit_errors: self.bit_errors,
            slots: self.slots,
        }
    }

    /// Pops the head block from every relay (the packet is delivered once;
    /// the other copies are discarded).
    fn pop_all(&mut self) -> Result<Vec<StoredBlock>> {
        self.relays.iter_mut().map(|r| r.pop_block()).collect()
    }
}

pub(super) fn run_sas(cfg: &ScenarioConfig, rng: RngStream) -> Result<TrialOutcome> {
    let n = STC_GROUP;
    let mut t = DstcTrial::new(cfg, rng, 1);
    let interval = cfg.redraw_interval();
    let limit = slot_limit(cfg.total_units(), cfg.relays, cfg.buffer_capacity);
    let amp_first = cfg.power.p_s.sqrt();
    let amp_second = (cfg.power.p_r / n as f64).sqrt();

    loop {
        let source_done = t.units_sent >= cfg.total_units();
        if source_done && t.relays.iter().all(|r| r.buffer.is_empty()) {
            break;
        }
        if t.slots >= limit {
            return Err(Error::InvalidArgument(
                "dstc-sas scheduler did not terminate".into(),
            ));
        }
        if t.slots.is_multiple_of(interval) || t.sr_hops.is_empty() {
            t.redraw(1);
        }

        if t.choose_source_transmit()? {
            // Broadcast: every relay detects and stores its own copy.
            let bits = t.rng.random_bits(n);
            let s = bpsk_modulate(&bits);
            for k in 0..cfg.relays {
                let f = t.sr_hops[k].actual.scalar();
                let tx: Vec<Complex64> = s.iter().map(|&x| f * amp_first * x).collect();
                let rx = noisy_vec(tx, cfg.noise.sigma_r_sq, &mut t.rng);
                let f_hat = t.sr_hops[k].estimate.scalar();
                t.relays[k].df_receive(&rx, f, f_hat, cfg.power.p_s, &BPSK, bits.clone())?;
            }
            t.units_sent += 1;
        } else {
            let rd_estimates: Vec<LinkCoeff> =
                t.rd_hops.iter().map(|h| h.estimate.clone()).collect();
            let group = select_dstc_group(&rd_estimates, n, cfg.noise.sigma_d_sq)?;
            let blocks = t.pop_all()?;
            let (b0, b1) = (&blocks[group[0]], &blocks[group[1]]);
            debug_assert_eq!(b0.source_bits, b1.source_bits);

            // Distributed Alamouti: relay roles are the codeword rows,
            // each encoding the relay's own detected symbols.
            let g0 = t.rd_hops[group[0]].actual.scalar();
            let g1 = t.rd_hops[group[1]].actual.scalar();
            let row0 = [b0.symbols[0], -b0.symbols[1].conj()];
            let row1 = [b1.symbols[1], b1.symbols[0].conj()];
            let tx = vec![
                amp_second * (g0 * row0[0] + g1 * row1[0]),
                amp_second * (g0 * row0[1] + g1 * row1[1]),
            ];
            let rx = noisy_vec(tx, cfg.noise.sigma_d_sq, &mut t.rng);

            // Common-codeword hypothesis model for the destination.
            let e0 = t.rd_hops[group[0]].estimate.scalar() * amp_second;
            let e1 = t.rd_hops[group[1]].estimate.scalar() * amp_second;
            let model = ComplexMatrix::from_rows(&[vec![e0, e1], vec![e1, -e0]]);
            let detected = ml_detect_with_model(&rx, &model, &BPSK);
            t.bit_errors += count_bit_errors(&detected, &b0.source_bits);
            t.bits_delivered += n as u64;
        }
        t.slots += 1;
    }
    Ok(t.outcome())
}

pub(super) fn run_mas(cfg: &ScenarioConfig, rng: RngStream) -> Result<TrialOutcome> {
    let n = STC_GROUP;
    let mut t = DstcTrial::new(cfg, rng, n);
    let interval = cfg.redraw_interval();
    let limit = slot_limit(cfg.total_units(), cfg.relays, cfg.buffer_capacity);
    let amp_first = (cfg.power.p_s / n as f64).sqrt();
    let amp_second = Complex64::new((cfg.power.p_r / n as f64).sqrt(), 0.0);

    loop {
        let source_done = t.units_sent >= cfg.total_units();
        if source_done && t.relays.iter().all(|r| r.buffer.is_empty()) {
            break;
        }
        if t.slots >= limit {
            return Err(Error::InvalidArgument(
                "dstc-mas scheduler did not terminate".into(),
            ));
        }
        if t.slots.is_multiple_of(interval) || t.sr_hops.is_empty() {
            t.redraw(n);
        }

        if t.choose_source_transmit()? {
            let bits = t.rng.random_bits(n);
            let s = bpsk_modulate(&bits);
            for k in 0..cfg.relays {
                let f = t.sr_hops[k].actual.matrix().clone();
                let tx: Vec<Complex64> = f.mul_vec(&s).into_iter().map(|x| x * amp_first).collect();
                let rx = noisy_vec(tx, cfg.noise.sigma_r_sq, &mut t.rng);
                let f_hat = t.sr_hops[k].estimate.matrix().clone();
                t.relays[k].df_receive_mas(&rx, &f, &f_hat, cfg.power.p_s, &BPSK, bits.clone())?;
            }
            t.units_sent += 1;
        } else {
            let rd_estimates: Vec<LinkCoeff> =
                t.rd_hops.iter().map(|h| h.estimate.clone()).collect();
            let best = select_best_relay_mas(&rd_estimates, cfg.noise.sigma_d_sq)?;
            let blocks = t.pop_all()?;
            let block = &blocks[best];

            let g = t.rd_hops[best].actual.matrix();
            let x = alamouti_encode(block.symbols[0], block.symbols[1]);
            let mut stacked = Vec::with_capacity(2 * n);
            for slot in 0..2 {
                stacked.extend(g.mul_vec(&x.col(slot)).into_iter().map(|y| y * amp_second));
            }
            let rx = noisy_vec(stacked, cfg.noise.sigma_d_sq, &mut t.rng);

            // Model columns by replaying clean unit-vector codewords.
            let g_hat = t.rd_hops[best].estimate.matrix();
            let mut model = ComplexMatrix::zeros(2 * n, n);
            for src in 0..n {
                let e: Vec<Complex64> = (0..n)
                    .map(|i| {
                        if i == src {
                            Complex64::ONE
                        } else {
                            Complex64::ZERO
                        }
                    })
                    .collect();
                let cw = alamouti_encode(e[0], e[1]);
                for slot in 0..2 {
                    let y = g_hat.mul_vec(&cw.col(slot));
                    for (ant, val) in y.into_iter().enumerate() {
                        model[(slot * n + ant, src)] = val * amp_second;
                    }
                }
            }
            let detected = ml_detect_with_model(&rx, &model, &BPSK);
            t.bit_errors += count_bit_errors(&detected, &block.source_bits);
            t.bits_delivered += n as u64;
        }
        t.slots += 1;
    }
    Ok(t.outcome())
}
