//! Relay node state machines: FIFO block buffers with capacity, AF
//! store-and-scale, DF detect-and-store.
//!
//! AF relays store the raw noisy receive together with the receive-time
//! channel and apply their transmit gain at forward time, so the power
//! constraint holds per transmission. DF relays store hard decisions.

use std::collections::VecDeque;

use crate::channel::LinkCoeff;
use crate::coding::ml_detect_with_model;
use crate::numerics::{Complex64, ComplexMatrix};
use crate::{Error, Result};

/// Cooperative strategy at a relay.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RelayProtocol {
    AmplifyForward,
    DecodeForward,
}

/// One buffered transmission unit.
#[derive(Clone, Debug)]
pub struct StoredBlock {
    /// Stored symbols: raw noisy receive for AF, hard decisions for DF.
    pub symbols: Vec<Complex64>,
    /// Source→relay channel at receive time, as known to the relay.
    pub sr_channel: LinkCoeff,
    /// Destination-side estimate of the same coefficient.
    pub sr_estimate: LinkCoeff,
    /// Original source bits covered by this block (simulation bookkeeping
    /// for error counting at delivery; never used by detection).
    pub source_bits: Vec<u8>,
}

/// Bounded FIFO of stored blocks.
#[derive(Clone, Debug, Default)]
pub struct RelayBuffer {
    slots: VecDeque<StoredBlock>,
    capacity: usize,
}

impl RelayBuffer {
    pub fn new(capacity: usize) -> Self {
        Self {
            slots: VecDeque::with_capacity(capacity),
            capacity,
        }
    }

    pub fn occupancy(&self) -> usize {
        self.slots.len()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn is_full(&self) -> bool {
        self.slots.len() >= self.capacity
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }
}

/// A relay with its buffer, antenna count and cooperative protocol.
#[derive(Clone, Debug)]
pub struct RelayNode {
    pub id: usize,
    pub buffer: RelayBuffer,
    pub antennas: usize,
    pub protocol: RelayProtocol,
}

impl RelayNode {
    pub fn new(id: usize, capacity: usize, antennas: usize, protocol: RelayProtocol) -> Self {
        Self {
            id,
            buffer: RelayBuffer::new(capacity),
            antennas,
            protocol,
        }
    }

    /// Appends a block at the queue tail.
    pub fn push_block(&mut self, block: StoredBlock) -> Result<()> {
        if self.buffer.is_full() {
            return Err(Error::BufferFull {
                relay: self.id,
                capacity: self.buffer.capacity,
            });
        }
        self.buffer.slots.push_back(block);
        Ok(())
    }

    /// Removes and returns the oldest stored block.
    pub fn pop_block(&mut self) -> Result<StoredBlock> {
        self.buffer
            .slots
            .pop_front()
            .ok_or(Error::BufferEmpty { relay: self.id })
    }

    /// AF reception: stores the noisy received block unchanged.
    pub fn af_receive(
        &mut self,
        received: Vec<Complex64>,
        sr_channel: LinkCoeff,
        sr_estimate: LinkCoeff,
        source_bits: Vec<u8>,
    ) -> Result<()> {
        self.push_block(StoredBlock {
            symbols: received,
            sr_channel,
            sr_estimate,
            source_bits,
        })
    }

    /// DF reception over a scalar channel: stores per-symbol ML decisions
    /// against `r = √P_S·f·s + n`.
    pub fn df_receive(
        &mut self,
        received: &[Complex64],
        f: Complex64,
        f_estimate: Complex64,
        p_s: f64,
        constellation: &[Complex64],
        source_bits: Vec<u8>,
    ) -> Result<()> {
        let coeff = f * p_s.sqrt();
        let decisions: Vec<Complex64> = received
            .iter()
            .map(|&r| {
                let mut best = constellation[0];
                let mut best_cost = f64::INFINITY;
                for &s in constellation {
                    let cost = (r - coeff * s).norm_sqr();
                    if cost < best_cost {
                        best_cost = cost;
                        best = s;
                    }
                }
                best
            })
            .collect();
        self.push_block(StoredBlock {
            symbols: decisions,
            sr_channel: LinkCoeff::Scalar(f),
            sr_estimate: LinkCoeff::Scalar(f_estimate),
            source_bits,
        })
    }

    /// DF reception over an `N×N` channel: stores the jointly ML-detected
    /// symbol vector against `r = √(P_S/N)·F·s + n`.
    pub fn df_receive_mas(
        &mut self,
        received: &[Complex64],
        f: &ComplexMatrix,
        f_estimate: &ComplexMatrix,
        p_s: f64,
        constellation: &[Complex64],
        source_bits: Vec<u8>,
    ) -> Result<()> {
        let n = f.rows();
        let model = f.scale(Complex64::new((p_s / n as f64).sqrt(), 0.0));
        let decisions = ml_detect_with_model(received, &model, constellation);
        self.push_block(StoredBlock {
            symbols: decisions,
            sr_channel: LinkCoeff::Matrix(f.clone()),
            sr_estimate: LinkCoeff::Matrix(f_estimate.clone()),
            source_bits,
        })
    }
}

/// AF transmit gain for a single-antenna relay so the forwarded signal
/// meets `P_R` per slot on average: `α² = P_R / (dims·(P_S·|f|² + σ²_r))`,
/// with `dims = 1` for uncoded forwarding and `dims = N` when an `N`-symbol
/// space-time group is re-encoded with a code of norm `‖v‖² = N`.
pub fn af_gain(p_r: f64, p_s: f64, f_norm_sq: f64, sigma_r_sq: f64, dims: usize) -> f64 {
    (p_r / (dims as f64 * (p_s * f_norm_sq + sigma_r_sq))).sqrt()
}

/// AF transmit gain for an `N`-antenna relay storing
/// `u = √(P_S/N)·F·s + n`: `α² = P_R / ((P_S/N)·‖F‖²_F + N·σ²_r)`.
pub fn af_gain_mas(p_r: f64, p_s: f64, f_frob_sq: f64, sigma_r_sq: f64, n: usize) -> f64 {
    (p_r / (p_s / n as f64 * f_frob_sq + n as f64 * sigma_r_sq)).sqrt()
}
