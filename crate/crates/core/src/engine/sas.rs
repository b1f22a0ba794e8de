//! Single-antenna-system trials: two-hop AF relaying with max-link, BRS
//! and MMRS scheduling, plain or (randomized) Alamouti forwarding and the
//! ABARO adaptation loop.
//!
//! The forwarded group meets the relay power `P_R` through a CSI-based AF
//! gain, and the conjugate Alamouti slot carries the unit-modulus
//! pre-rotation `f/f*` so the end-to-end composite channel is exactly
//! `f·g` on both slots; the destination detection model is then exact
//! under perfect CSI.

use super::{
    count_bit_errors, draw_hop, noisy_scalar, noisy_vec, slot_limit, CodingScheme, Hop,
    ScenarioConfig, SelectionPolicy, TrialOutcome, STC_GROUP,
};
use crate::abaro::{normalize, sg_update, CodeStructure, SgConfig};
use crate::coding::{
    bpsk_modulate, ml_detect_with_model, sas_effective_model, sas_transmit_slots, AdjustableCode,
    BPSK,
};
use crate::numerics::{Complex64, ComplexMatrix, RngStream};
use crate::relay::{af_gain, RelayNode, RelayProtocol, StoredBlock};
use crate::selection::{
    select_bmmrs, select_max_link, BmmrsMode, BufferState, LinkDirection, LinkMetric, MmrsPhase,
    ScheduleAction,
};
use crate::{Error, Result};

pub(super) fn run(cfg: &ScenarioConfig, rng: RngStream) -> Result<TrialOutcome> {
    let mut state = SasTrial::new(cfg, rng);
    match cfg.selection {
        SelectionPolicy::Brs => state.run_brs(),
        SelectionPolicy::Mmrs => state.run_mmrs(),
        SelectionPolicy::Abaro | SelectionPolicy::MaxlinkNoopt => state.run_max_link(),
    }
}

struct SasTrial<'a> {
    cfg: &'a ScenarioConfig,
    rng: RngStream,
    relays: Vec<RelayNode>,
    /// Destination-side adjustable code per relay; equals the transmitted
    /// code through the error-free feedback assumption.
    codes: Vec<AdjustableCode>,
    sr_hops: Vec<Hop>,
    rd_hops: Vec<Hop>,
    units_sent: u64,
    bits_delivered: u64,
    bit_errors: u64,
    slots: u64,
}

impl<'a> SasTrial<'a> {
    fn new(cfg: &'a ScenarioConfig, mut rng: RngStream) -> Self {
        let relays = (0..cfg.relays)
            .map(|k| RelayNode::new(k, cfg.buffer_capacity, 1, RelayProtocol::AmplifyForward))
            .collect();
        let codes = match cfg.coding {
            CodingScheme::None => Vec::new(),
            CodingScheme::Alamouti => vec![fixed_code(cfg.power.p_v); cfg.relays],
            CodingScheme::RAlamouti => (0..cfg.relays)
                .map(|_| AdjustableCode::uniform_phase(STC_GROUP, cfg.power.p_v, &mut rng))
                .collect(),
        };
        Self {
            cfg,
            rng,
            relays,
            codes,
            sr_hops: Vec::new(),
            rd_hops: Vec::new(),
            units_sent: 0,
            bits_delivered: 0,
            bit_errors: 0,
            slots: 0,
        }
    }

    fn redraw_channels(&mut self) {
        let csi = self.cfg.csi_error_var;
        self.sr_hops = (0..self.cfg.relays)
            .map(|_| draw_hop(1, csi, &mut self.rng))
            .collect();
        self.rd_hops = (0..self.cfg.relays)
            .map(|_| draw_hop(1, csi, &mut self.rng))
            .collect();
    }

    fn source_done(&self) -> bool {
        self.units_sent >= self.cfg.total_units()
    }

    fn buffers_empty(&self) -> bool {
        self.relays.iter().all(|r| r.buffer.is_empty())
    }

    fn buffer_states(&self) -> Vec<BufferState> {
        self.relays
            .iter()
            .map(|r| BufferState {
                occupancy: r.buffer.occupancy(),
                capacity: r.buffer.capacity(),
            })
            .collect()
    }

    fn sr_metric(&self, k: usize) -> f64 {
        self.sr_hops[k].estimate.scalar().norm_sqr() / self.cfg.noise.sigma_r_sq
    }

    /// RD metric `‖V_eq·g‖²_F/σ²_d`. Normalized codes hold `‖v‖ = P_V`, and
    /// the decentralized randomized draw happens only at forward time, so
    /// the code power entering the metric is `P_V²` in every coded mode.
    fn rd_metric(&self, k: usize) -> f64 {
        let g_sq = self.rd_hops[k].estimate.scalar().norm_sqr();
        let code_power = match self.cfg.coding {
            CodingScheme::None => 1.0,
            _ => self.cfg.power.p_v * self.cfg.power.p_v,
        };
        code_power * g_sq / self.cfg.noise.sigma_d_sq
    }

    fn transmit_to_relay(&mut self, k: usize) -> Result<()> {
        let group = self.cfg.group_len();
        let bits = self.rng.random_bits(group);
        let s = bpsk_modulate(&bits);
        let f = self.sr_hops[k].actual.scalar();
        let amp = self.cfg.power.p_s.sqrt();
        let tx: Vec<Complex64> = s.iter().map(|&x| f * amp * x).collect();
        let rx = noisy_vec(tx, self.cfg.noise.sigma_r_sq, &mut self.rng);
        self.relays[k].af_receive(
            rx,
            self.sr_hops[k].actual.clone(),
            self.sr_hops[k].estimate.clone(),
            bits,
        )?;
        self.units_sent += 1;
        Ok(())
    }

    fn forward_from_relay(&mut self, k: usize) -> Result<()> {
        let block = self.relays[k].pop_block()?;
        let (delivered, errors) = match self.cfg.coding {
            CodingScheme::None => self.forward_uncoded(k, &block),
            _ => self.forward_coded(k, &block)?,
        };
        self.bits_delivered += delivered;
        self.bit_errors += errors;
        Ok(())
    }

    fn forward_uncoded(&mut self, k: usize, block: &StoredBlock) -> (u64, u64) {
        let power = &self.cfg.power;
        let sigma_r = self.cfg.noise.sigma_r_sq;
        let f = block.sr_channel.scalar();
        let g = self.rd_hops[k].actual.scalar();
        let alpha = af_gain(power.p_r, power.p_s, f.norm_sqr(), sigma_r, 1);
        let rx = noisy_scalar(
            g * alpha * block.symbols[0],
            self.cfg.noise.sigma_d_sq,
            &mut self.rng,
        );

        let f_hat = block.sr_estimate.scalar();
        let g_hat = self.rd_hops[k].estimate.scalar();
        let alpha_hat = af_gain(power.p_r, power.p_s, f_hat.norm_sqr(), sigma_r, 1);
        let coeff = alpha_hat * power.p_s.sqrt() * f_hat * g_hat;
        let detected = ((coeff.conj() * rx).re < 0.0) as u8;
        (1, (detected != block.source_bits[0]) as u64)
    }

    fn forward_coded(&mut self, k: usize, block: &StoredBlock) -> Result<(u64, u64)> {
        let power = &self.cfg.power;
        let sigma_r = self.cfg.noise.sigma_r_sq;
        let adaptive = self.cfg.selection == SelectionPolicy::Abaro;

        // The code transmitted this slot; the decentralized randomized
        // variant draws a fresh Gaussian vector per forward.
        if self.cfg.coding == CodingScheme::RAlamouti && !adaptive {
            self.codes[k] = AdjustableCode::gaussian(STC_GROUP, power.p_v, &mut self.rng);
        }

        let f = block.sr_channel.scalar();
        let g = self.rd_hops[k].actual.scalar();
        let alpha = af_gain(power.p_r, power.p_s, f.norm_sqr(), sigma_r, STC_GROUP);
        let phase = if f == Complex64::ZERO {
            Complex64::ONE
        } else {
            f / f.conj()
        };
        let tx = sas_transmit_slots(
            self.codes[k].v(),
            alpha * block.symbols[0],
            alpha * block.symbols[1],
            phase,
        );
        let rx = noisy_vec(
            vec![g * tx[0], g * tx[1]],
            self.cfg.noise.sigma_d_sq,
            &mut self.rng,
        );

        let f_hat = block.sr_estimate.scalar();
        let g_hat = self.rd_hops[k].estimate.scalar();
        let alpha_hat = af_gain(power.p_r, power.p_s, f_hat.norm_sqr(), sigma_r, STC_GROUP);
        let scale = alpha_hat * power.p_s.sqrt();
        let h_hat = f_hat * g_hat;
        let model = sas_effective_model(&self.codes[k], h_hat, scale);
        let detected = ml_detect_with_model(&rx, &model, &BPSK);
        let errors = count_bit_errors(&detected, &block.source_bits);

        if adaptive {
            let sg = SgConfig {
                mu: self.cfg.sg.mu,
                power_budget: power.p_v,
            };
            let h_mat = ComplexMatrix::identity(STC_GROUP).scale(h_hat);
            let mut updated = sg_update(
                &self.codes[k],
                CodeStructure::Sas,
                &rx,
                &h_mat,
                &detected,
                scale,
                &sg,
            )?;
            normalize(&mut updated)?;
            self.codes[k] = updated;
        }
        Ok((STC_GROUP as u64, errors))
    }

    fn outcome(&self) -> TrialOutcome {
        TrialOutcome {
            bits_sent: self.units_sent * self.cfg.group_len() as u64,
            bits_delivered: self.bits_delivered,
            bit_errors: self.bit_errors,
            slots: self.slots,
        }
    }

    fn run_max_link(&mut self) -> Result<TrialOutcome> {
        let interval = self.cfg.redraw_interval();
        let limit = slot_limit(
            self.cfg.total_units(),
            self.cfg.relays,
            self.cfg.buffer_capacity,
        );
        while !(self.source_done() && self.buffers_empty()) {
            if self.slots >= limit {
                return Err(Error::InvalidArgument(
                    "max-link scheduler did not terminate".into(),
                ));
            }
            if self.slots.is_multiple_of(interval) || self.sr_hops.is_empty() {
                self.redraw_channels();
            }
            let buffers = self.buffer_states();
            let mut metrics = Vec::with_capacity(2 * self.cfg.relays);
            for k in 0..self.cfg.relays {
                if !self.source_done() {
                    metrics.push(LinkMetric {
                        relay: k,
                        direction: LinkDirection::SourceRelay,
                        occupancy: buffers[k].occupancy,
                        value: self.sr_metric(k),
                    });
                }
                metrics.push(LinkMetric {
                    relay: k,
                    direction: LinkDirection::RelayDest,
                    occupancy: buffers[k].occupancy,
                    value: self.rd_metric(k),
                });
            }
            let decision = select_max_link(&metrics, &buffers)?;
            match decision.action {
                ScheduleAction::SourceTransmit => self.transmit_to_relay(decision.relay)?,
                ScheduleAction::RelayForward => self.forward_from_relay(decision.relay)?,
            }
            self.slots += 1;
        }
        Ok(self.outcome())
    }

    /// BRS: one two-slot transaction per unit over a common channel draw,
    /// relaying without buffering.
    fn run_brs(&mut self) -> Result<TrialOutcome> {
        let interval = self.cfg.redraw_interval();
        let total = self.cfg.total_units();
        for txn in 0..total {
            if txn % interval == 0 || self.sr_hops.is_empty() {
                self.redraw_channels();
            }
            let sr: Vec<f64> = (0..self.cfg.relays).map(|k| self.sr_metric(k)).collect();
            let rd: Vec<f64> = (0..self.cfg.relays).map(|k| self.rd_metric(k)).collect();
            let buffers = self.buffer_states();
            let decision = select_bmmrs(&sr, &rd, &buffers, BmmrsMode::Brs, MmrsPhase::Reception)?;
            self.transmit_to_relay(decision.relay)?;
            self.forward_from_relay(decision.relay)?;
            self.slots += 2;
        }
        Ok(self.outcome())
    }

    /// MMRS: best-SR reception and best-RD forwarding slots alternate
    /// around half-full buffers. The buffers are first filled to half
    /// their aggregate capacity so the forwarding side actually has
    /// relays to choose among, then reception and forwarding alternate
    /// (each pair keeps the occupancy level), and the tail drains.
    fn run_mmrs(&mut self) -> Result<TrialOutcome> {
        let interval = self.cfg.redraw_interval();
        let fill_target = ((self.cfg.relays * self.cfg.buffer_capacity) / 2).max(1);
        let limit = slot_limit(
            self.cfg.total_units(),
            self.cfg.relays,
            self.cfg.buffer_capacity,
        );
        while !(self.source_done() && self.buffers_empty()) {
            if self.slots >= limit {
                return Err(Error::InvalidArgument(
                    "mmrs scheduler did not terminate".into(),
                ));
            }
            if self.slots.is_multiple_of(interval) || self.sr_hops.is_empty() {
                self.redraw_channels();
            }
            let total_occupancy: usize = self.relays.iter().map(|r| r.buffer.occupancy()).sum();
            let phase = if self.source_done() || total_occupancy > fill_target {
                MmrsPhase::Forwarding
            } else {
                MmrsPhase::Reception
            };
            let sr: Vec<f64> = (0..self.cfg.relays).map(|k| self.sr_metric(k)).collect();
            let rd: Vec<f64> = (0..self.cfg.relays).map(|k| self.rd_metric(k)).collect();
            let buffers = self.buffer_states();
            // A reception decision implies the source still has data: the
            // phase is forced to forwarding once it runs dry, and the
            // fallback to reception only fires with every buffer empty,
            // which ends the loop when the source is done.
            let decision = select_bmmrs(&sr, &rd, &buffers, BmmrsMode::Mmrs, phase)?;
            match decision.action {
                ScheduleAction::SourceTransmit => self.transmit_to_relay(decision.relay)?,
                ScheduleAction::RelayForward => self.forward_from_relay(decision.relay)?,
            }
            self.slots += 1;
        }
        Ok(self.outcome())
    }
}

/// Fixed equal-weight adjustable vector: the single-antenna rendition of
/// the standard Alamouti scheme.
fn fixed_code(p_v: f64) -> AdjustableCode {
    let amp = p_v / (STC_GROUP as f64).sqrt();
    AdjustableCode::new(vec![Complex64::new(amp, 0.0); STC_GROUP], p_v)
        .expect("fixed code is well-formed")
}
