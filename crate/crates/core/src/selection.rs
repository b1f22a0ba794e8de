//! Link, relay and group selection policies: max-link scheduling with
//! buffer feasibility, the BRS and MMRS baselines, SINR-based DSTC group
//! selection and best-relay selection for multi-antenna relays.
//!
//! All ties break deterministically: higher metric first, then
//! source→relay before relay→destination, then lower buffer occupancy,
//! then lower relay index.

use crate::channel::LinkCoeff;
use crate::numerics::ComplexMatrix;
use crate::{Error, Result};

/// Which hop a link metric belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LinkDirection {
    SourceRelay,
    RelayDest,
}

/// Instantaneous SNR (or SINR) of one link, tagged with the relay index
/// and its current buffer occupancy.
#[derive(Clone, Copy, Debug)]
pub struct LinkMetric {
    pub relay: usize,
    pub direction: LinkDirection,
    pub occupancy: usize,
    pub value: f64,
}

/// Buffer occupancy and capacity snapshot used for feasibility checks.
#[derive(Clone, Copy, Debug)]
pub struct BufferState {
    pub occupancy: usize,
    pub capacity: usize,
}

impl BufferState {
    fn can_receive(&self) -> bool {
        self.occupancy < self.capacity
    }

    fn can_forward(&self) -> bool {
        self.occupancy > 0
    }
}

/// What the scheduler decided for the current slot.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScheduleAction {
    SourceTransmit,
    RelayForward,
}

/// Why an otherwise stronger link was passed over.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SkipReason {
    Full,
    Empty,
}

/// Outcome of one scheduling decision, including the links skipped on the
/// way to a feasible one.
#[derive(Clone, Debug)]
pub struct ScheduleDecision {
    pub relay: usize,
    pub action: ScheduleAction,
    pub skipped: Vec<(usize, LinkDirection, SkipReason)>,
}

/// Instantaneous SR-link SNR `‖f‖²_F / σ²_r`.
pub fn snr_sr(f: &LinkCoeff, sigma_r_sq: f64) -> Result<f64> {
    if sigma_r_sq <= 0.0 {
        return Err(Error::InvalidArgument(
            "relay noise variance must be positive".into(),
        ));
    }
    Ok(f.frobenius_norm_sq() / sigma_r_sq)
}

/// Instantaneous RD-link SNR `‖V_eq·g‖²_F / σ²_d`; the adjustable code
/// participates in the metric.
pub fn snr_rd(v_eq: &ComplexMatrix, g: &LinkCoeff, sigma_d_sq: f64) -> Result<f64> {
    if sigma_d_sq <= 0.0 {
        return Err(Error::InvalidArgument(
            "destination noise variance must be positive".into(),
        ));
    }
    let weighted = match g {
        LinkCoeff::Scalar(h) => v_eq.frobenius_norm_sq() * h.norm_sqr(),
        LinkCoeff::Matrix(m) => {
            if v_eq.cols() != m.rows() {
                return Err(Error::InvalidArgument(format!(
                    "V_eq {}x{} does not conform with channel {}x{}",
                    v_eq.rows(),
                    v_eq.cols(),
                    m.rows(),
                    m.cols()
                )));
            }
            v_eq.mul(m).frobenius_norm_sq()
        }
    };
    Ok(weighted / sigma_d_sq)
}

fn direction_rank(d: LinkDirection) -> u8 {
    match d {
        LinkDirection::SourceRelay => 0,
        LinkDirection::RelayDest => 1,
    }
}

/// Max-link scheduling: the feasible link of maximum metric wins.
///
/// Links are scanned in descending metric order; an SR link to a full
/// buffer or an RD link from an empty buffer is skipped and recorded,
/// mirroring the skip-and-repeat loop of the scheduler.
pub fn select_max_link(
    metrics: &[LinkMetric],
    buffers: &[BufferState],
) -> Result<ScheduleDecision> {
    if metrics.is_empty() {
        return Err(Error::InvalidArgument("no link metrics supplied".into()));
    }
    let mut order: Vec<&LinkMetric> = metrics.iter().collect();
    order.sort_by(|a, b| {
        b.value
            .partial_cmp(&a.value)
            .unwrap()
            .then_with(|| direction_rank(a.direction).cmp(&direction_rank(b.direction)))
            .then_with(|| a.occupancy.cmp(&b.occupancy))
            .then_with(|| a.relay.cmp(&b.relay))
    });

    let mut skipped = Vec::new();
    for link in order {
        let state = buffers.get(link.relay).ok_or_else(|| {
            Error::InvalidArgument(format!("no buffer state for relay {}", link.relay))
        })?;
        match link.direction {
            LinkDirection::SourceRelay if state.can_receive() => {
                return Ok(ScheduleDecision {
                    relay: link.relay,
                    action: ScheduleAction::SourceTransmit,
                    skipped,
                });
            }
            LinkDirection::RelayDest if state.can_forward() => {
                return Ok(ScheduleDecision {
                    relay: link.relay,
                    action: ScheduleAction::RelayForward,
                    skipped,
                });
            }
            LinkDirection::SourceRelay => {
                skipped.push((link.relay, link.direction, SkipReason::Full));
            }
            LinkDirection::RelayDest => {
                skipped.push((link.relay, link.direction, SkipReason::Empty));
            }
        }
    }
    Err(Error::InvalidArgument("no feasible link".into()))
}

/// Baseline relay-selection protocols.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BmmrsMode {
    /// Best relay selection: max over relays of the end-to-end
    /// `min(SNR_SR, SNR_RD)`, relaying in consecutive slots without
    /// buffering.
    Brs,
    /// Max-max relay selection: best SR link for reception slots, best RD
    /// link for forwarding slots, using the buffers.
    Mmrs,
}

/// Which half of the MMRS alternation the current slot is.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MmrsPhase {
    Reception,
    Forwarding,
}

/// BRS and MMRS baseline selection.
///
/// For BRS the phase is ignored and the decision is always a source
/// transmission to the max-min relay (the forward happens in the next slot
/// by construction). For MMRS the requested phase falls back to the other
/// one when no relay is feasible for it.
pub fn select_bmmrs(
    sr_metrics: &[f64],
    rd_metrics: &[f64],
    buffers: &[BufferState],
    mode: BmmrsMode,
    phase: MmrsPhase,
) -> Result<ScheduleDecision> {
    if sr_metrics.is_empty() || sr_metrics.len() != rd_metrics.len() {
        return Err(Error::InvalidArgument(
            "metric lists must be non-empty and of equal length".into(),
        ));
    }
    match mode {
        BmmrsMode::Brs => {
            let mut best = 0usize;
            let mut best_val = f64::NEG_INFINITY;
            for k in 0..sr_metrics.len() {
                let v = sr_metrics[k].min(rd_metrics[k]);
                if v > best_val {
                    best_val = v;
                    best = k;
                }
            }
            Ok(ScheduleDecision {
                relay: best,
                action: ScheduleAction::SourceTransmit,
                skipped: Vec::new(),
            })
        }
        BmmrsMode::Mmrs => {
            let reception = |skipped: Vec<(usize, LinkDirection, SkipReason)>| {
                let mut best: Option<(usize, f64)> = None;
                for (k, &v) in sr_metrics.iter().enumerate() {
                    if buffers[k].can_receive() && best.is_none_or(|(_, bv)| v > bv) {
                        best = Some((k, v));
                    }
                }
                best.map(|(k, _)| ScheduleDecision {
                    relay: k,
                    action: ScheduleAction::SourceTransmit,
                    skipped,
                })
            };
            let forwarding = |skipped: Vec<(usize, LinkDirection, SkipReason)>| {
                let mut best: Option<(usize, f64)> = None;
                for (k, &v) in rd_metrics.iter().enumerate() {
                    if buffers[k].can_forward() && best.is_none_or(|(_, bv)| v > bv) {
                        best = Some((k, v));
                    }
                }
                best.map(|(k, _)| ScheduleDecision {
                    relay: k,
                    action: ScheduleAction::RelayForward,
                    skipped,
                })
            };
            let all_full: Vec<_> = (0..sr_metrics.len())
                .filter(|&k| !buffers[k].can_receive())
                .map(|k| (k, LinkDirection::SourceRelay, SkipReason::Full))
                .collect();
            let all_empty: Vec<_> = (0..rd_metrics.len())
                .filter(|&k| !buffers[k].can_forward())
                .map(|k| (k, LinkDirection::RelayDest, SkipReason::Empty))
                .collect();
            let decision = match phase {
                MmrsPhase::Reception => reception(Vec::new()).or_else(|| forwarding(all_full)),
                MmrsPhase::Forwarding => forwarding(Vec::new()).or_else(|| reception(all_empty)),
            };
            decision.ok_or_else(|| Error::InvalidArgument("no feasible MMRS link".into()))
        }
    }
}

/// Lexicographic `k`-combinations of `0..n`.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        // Advance the rightmost index that can still move.
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// SINR-based group selection for DSTC forwarding: enumerates all
/// `C(n_r, n_dstc)` candidate groups and returns the one maximizing
/// `‖g_group‖²_F / (Σ_{other groups} ‖g_m‖_F + σ²_d)`, where each group's
/// channel is the stacked per-relay RD vector.
pub fn select_dstc_group(
    rd_channels: &[LinkCoeff],
    n_dstc: usize,
    sigma_d_sq: f64,
) -> Result<Vec<usize>> {
    let n_r = rd_channels.len();
    if n_dstc == 0 || n_dstc > n_r {
        return Err(Error::InvalidArgument(format!(
            "cannot form DSTC groups of {n_dstc} from {n_r} relays"
        )));
    }
    if sigma_d_sq <= 0.0 {
        return Err(Error::InvalidArgument(
            "destination noise variance must be positive".into(),
        ));
    }
    let groups = combinations(n_r, n_dstc);
    let norm_sq = |group: &[usize]| -> f64 {
        group
            .iter()
            .map(|&k| rd_channels[k].frobenius_norm_sq())
            .sum()
    };

    let mut best: Option<(usize, f64)> = None;
    for (gi, group) in groups.iter().enumerate() {
        let num = norm_sq(group);
        let mut denom = sigma_d_sq;
        for (mi, other) in groups.iter().enumerate() {
            if mi != gi {
                denom += norm_sq(other).sqrt();
            }
        }
        let sinr = num / denom;
        if best.is_none_or(|(_, bv)| sinr > bv) {
            best = Some((gi, sinr));
        }
    }
    Ok(groups[best.unwrap().0].clone())
}

/// Best-relay selection for DSTC in the multi-antenna configuration:
/// index of the maximum `‖G_RkD‖²_F / σ²_d`, lowest index on ties.
pub fn select_best_relay_mas(rd_channels: &[LinkCoeff], sigma_d_sq: f64) -> Result<usize> {
    if rd_channels.is_empty() {
        return Err(Error::InvalidArgument("no relays to select from".into()));
    }
    if sigma_d_sq <= 0.0 {
        return Err(Error::InvalidArgument(
            "destination noise variance must be positive".into(),
        ));
    }
    let mut best = 0usize;
    let mut best_val = f64::NEG_INFINITY;
    for (k, g) in rd_channels.iter().enumerate() {
        let v = g.frobenius_norm_sq() / sigma_d_sq;
        if v > best_val {
            best_val = v;
            best = k;
        }
    }
    Ok(best)
}
