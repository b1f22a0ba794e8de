//! Engine-level checks: noiseless limits, closed-form fading oracles,
//! determinism and bit conservation across every topology and policy.

use bastc::channel::{CoherencePreset, NoiseConfig};
use bastc::engine::{
    diversity_slope, estimate_ber, run_trial, CodingScheme, ScenarioConfig, SelectionPolicy,
    SweepConfig, Topology,
};
use bastc::numerics::{q_function, RngStream};

fn small(topology: Topology, selection: SelectionPolicy, coding: CodingScheme) -> ScenarioConfig {
    let antennas = match topology {
        Topology::Mas | Topology::DstcMas => 2,
        Topology::P2p if coding == CodingScheme::Alamouti => 2,
        _ => 1,
    };
    ScenarioConfig {
        topology,
        relays: 2,
        antennas,
        block_len: 20,
        packets: 5,
        buffer_capacity: 3,
        selection,
        coding,
        coherence: CoherencePreset::PerSymbol,
        csi_error_var: 0.0,
        noise: NoiseConfig {
            sigma_r_sq: 1e-13,
            sigma_d_sq: 1e-13,
        },
        ..ScenarioConfig::default()
    }
}

#[test]
fn noiseless_limit_has_zero_errors_everywhere() {
    let cases = [
        small(
            Topology::P2p,
            SelectionPolicy::MaxlinkNoopt,
            CodingScheme::None,
        ),
        small(
            Topology::P2p,
            SelectionPolicy::MaxlinkNoopt,
            CodingScheme::Alamouti,
        ),
        small(
            Topology::Sas,
            SelectionPolicy::MaxlinkNoopt,
            CodingScheme::None,
        ),
        small(
            Topology::Sas,
            SelectionPolicy::MaxlinkNoopt,
            CodingScheme::Alamouti,
        ),
        small(
            Topology::Sas,
            SelectionPolicy::MaxlinkNoopt,
            CodingScheme::RAlamouti,
        ),
        small(
            Topology::Sas,
            SelectionPolicy::Abaro,
            CodingScheme::RAlamouti,
        ),
        small(Topology::Sas, SelectionPolicy::Brs, CodingScheme::None),
        small(Topology::Sas, SelectionPolicy::Mmrs, CodingScheme::None),
        small(
            Topology::Mas,
            SelectionPolicy::MaxlinkNoopt,
            CodingScheme::Alamouti,
        ),
        small(
            Topology::Mas,
            SelectionPolicy::MaxlinkNoopt,
            CodingScheme::RAlamouti,
        ),
        small(
            Topology::Mas,
            SelectionPolicy::Abaro,
            CodingScheme::RAlamouti,
        ),
        small(
            Topology::DstcSas,
            SelectionPolicy::MaxlinkNoopt,
            CodingScheme::Alamouti,
        ),
        small(
            Topology::DstcMas,
            SelectionPolicy::MaxlinkNoopt,
            CodingScheme::Alamouti,
        ),
        ScenarioConfig {
            coherence: CoherencePreset::PerPacket,
            ..small(
                Topology::Sas,
                SelectionPolicy::Abaro,
                CodingScheme::RAlamouti,
            )
        },
        ScenarioConfig {
            coherence: CoherencePreset::PerPacket,
            ..small(
                Topology::Mas,
                SelectionPolicy::Abaro,
                CodingScheme::RAlamouti,
            )
        },
    ];
    for (i, cfg) in cases.iter().enumerate() {
        for seed in 0..3 {
            let out = run_trial(cfg, 1000 + seed, 0).unwrap();
            assert_eq!(out.bit_errors, 0, "case {i} seed {seed}: {cfg:?}");
            assert_eq!(
                out.bits_sent, out.bits_delivered,
                "case {i}: bit conservation"
            );
            assert_eq!(out.bits_sent, (cfg.packets * cfg.block_len) as u64);
        }
    }
}

#[test]
fn pure_noise_gives_half_ber() {
    let mut cfg = small(
        Topology::Sas,
        SelectionPolicy::MaxlinkNoopt,
        CodingScheme::None,
    );
    cfg.block_len = 100;
    cfg.packets = 200;
    cfg.noise = NoiseConfig {
        sigma_r_sq: 1e6,
        sigma_d_sq: 1e6,
    };
    let mut bits = 0u64;
    let mut errors = 0u64;
    for t in 0..5 {
        let out = run_trial(&cfg, 7, t).unwrap();
        bits += out.bits_delivered;
        errors += out.bit_errors;
    }
    let ber = errors as f64 / bits as f64;
    assert!(bits >= 100_000);
    assert!((ber - 0.5).abs() < 0.02, "ber = {ber}");
}

#[test]
fn trials_are_deterministic() {
    for cfg in [
        small(
            Topology::Sas,
            SelectionPolicy::Abaro,
            CodingScheme::RAlamouti,
        ),
        small(
            Topology::Mas,
            SelectionPolicy::MaxlinkNoopt,
            CodingScheme::RAlamouti,
        ),
        small(
            Topology::DstcSas,
            SelectionPolicy::MaxlinkNoopt,
            CodingScheme::Alamouti,
        ),
    ] {
        let mut cfg = cfg;
        cfg.noise = NoiseConfig {
            sigma_r_sq: 0.5,
            sigma_d_sq: 0.5,
        };
        let a = run_trial(&cfg, 99, 3).unwrap();
        let b = run_trial(&cfg, 99, 3).unwrap();
        assert_eq!(a, b);
        let c = run_trial(&cfg, 99, 4).unwrap();
        assert_ne!(a, c, "distinct streams should differ");
    }
}

#[test]
fn estimate_ber_is_reproducible_and_flags_floor_points() {
    let cfg = ScenarioConfig {
        topology: Topology::P2p,
        antennas: 1,
        relays: 0,
        block_len: 100,
        packets: 10,
        coding: CodingScheme::None,
        ..ScenarioConfig::default()
    };
    let sweep = SweepConfig {
        snr_db: vec![0.0, 10.0],
        min_errors: 50,
        max_bits: 50_000,
        max_trials: 64,
        seed: 5,
    };
    let a = estimate_ber(&cfg, &sweep).unwrap();
    let b = estimate_ber(&cfg, &sweep).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.points.len(), 2);
    assert!(a.points[0].reached_min_errors);
}

#[test]
fn single_hop_rayleigh_matches_closed_form() {
    // BER = ½(1 − √(γ̄/(1+γ̄))) for BPSK over per-symbol Rayleigh fading.
    let cfg = ScenarioConfig {
        topology: Topology::P2p,
        antennas: 1,
        relays: 0,
        block_len: 100,
        packets: 200,
        coding: CodingScheme::None,
        ..ScenarioConfig::default()
    };
    for snr_db in [5.0, 10.0] {
        let sweep = SweepConfig {
            snr_db: vec![snr_db],
            min_errors: 2_000,
            max_bits: 2_000_000,
            max_trials: 512,
            seed: 11,
        };
        let curve = estimate_ber(&cfg, &sweep).unwrap();
        let p = &curve.points[0];
        let gamma = 10f64.powf(snr_db / 10.0);
        let expect = 0.5 * (1.0 - (gamma / (1.0 + gamma)).sqrt());
        let se = (expect * (1.0 - expect) / p.bits as f64).sqrt();
        assert!(
            (p.ber - expect).abs() <= 3.0 * se,
            "snr {snr_db}: ber {} vs closed form {expect} (3se {})",
            p.ber,
            3.0 * se
        );
    }
}

#[test]
fn two_hop_af_matches_semianalytic_oracle() {
    // Single relay, J = 1 buffer, per-symbol coherence: the scheduler
    // strictly alternates, so the delivered BER is E[Q(√(2γ_eff))] with
    // γ_eff = γ₁γ₂/(1+γ₁+γ₂).
    let cfg = ScenarioConfig {
        topology: Topology::Sas,
        relays: 1,
        antennas: 1,
        block_len: 100,
        packets: 200,
        buffer_capacity: 1,
        selection: SelectionPolicy::MaxlinkNoopt,
        coding: CodingScheme::None,
        ..ScenarioConfig::default()
    };
    let snr_db = 10.0;
    let gamma = 10f64.powf(snr_db / 10.0);

    let mut rng = RngStream::new(2024, 0);
    let samples = 1_000_000;
    let mut oracle = 0.0;
    for _ in 0..samples {
        let g1 = gamma * rng.complex_gaussian(1.0).norm_sqr();
        let g2 = gamma * rng.complex_gaussian(1.0).norm_sqr();
        let eff = g1 * g2 / (1.0 + g1 + g2);
        oracle += q_function((2.0 * eff).sqrt());
    }
    oracle /= samples as f64;

    let sweep = SweepConfig {
        snr_db: vec![snr_db],
        min_errors: 5_000,
        max_bits: 2_000_000,
        max_trials: 512,
        seed: 13,
    };
    let curve = estimate_ber(&cfg, &sweep).unwrap();
    let p = &curve.points[0];
    let se = (oracle * (1.0 - oracle) / p.bits as f64).sqrt();
    assert!(
        (p.ber - oracle).abs() <= 3.0 * se,
        "ber {} vs oracle {oracle} (3se {})",
        p.ber,
        3.0 * se
    );
}

#[test]
fn mas_pipeline_matches_effective_model_exactly() {
    // No-noise MAS composition: first hop, AF gain, codeword re-encoding
    // and the second hop reproduce the stacked destination model columns.
    use bastc::coding::{
        bpsk_modulate, mas_af_effective_model, mas_transmit_codeword, AdjustableCode,
    };
    use bastc::relay::af_gain_mas;

    let mut rng = RngStream::new(71, 0);
    let (p_s, p_r, sigma_r) = (1.0f64, 1.0, 0.4);
    for _ in 0..100 {
        let f = bastc::channel::draw_fading(2, 2, &mut rng);
        let g = bastc::channel::draw_fading(2, 2, &mut rng);
        let code = AdjustableCode::uniform_phase(2, 2.0f64.sqrt(), &mut rng);
        let bits = rng.random_bits(2);
        let s = bpsk_modulate(&bits);

        let u: Vec<_> = f
            .mul_vec(&s)
            .into_iter()
            .map(|x| x * (p_s / 2.0).sqrt())
            .collect();
        let alpha = af_gain_mas(p_r, p_s, f.frobenius_norm_sq(), sigma_r, 2);
        let scaled: Vec<_> = u.iter().map(|&x| x * alpha).collect();
        let x = mas_transmit_codeword(code.v(), &scaled);
        let mut received = Vec::with_capacity(4);
        for t in 0..2 {
            received.extend(g.mul_vec(&x.col(t)));
        }

        let model = mas_af_effective_model(&code, &f, &g, alpha, p_s);
        let expect = model.mul_vec(&s);
        for (a, b) in received.iter().zip(&expect) {
            assert!((a - b).norm() < 1e-12, "pipeline and model diverge");
        }
    }
}

#[test]
fn every_slot_serves_exactly_one_link() {
    // Half-duplex audit: each unit needs one reception slot and one
    // forwarding slot, so a conserving scheduler uses exactly 2 slots per
    // unit and delivers every bit.
    for cfg in [
        small(
            Topology::Sas,
            SelectionPolicy::MaxlinkNoopt,
            CodingScheme::None,
        ),
        small(Topology::Sas, SelectionPolicy::Mmrs, CodingScheme::None),
        small(Topology::Sas, SelectionPolicy::Brs, CodingScheme::None),
        small(
            Topology::Sas,
            SelectionPolicy::Abaro,
            CodingScheme::RAlamouti,
        ),
        small(
            Topology::DstcSas,
            SelectionPolicy::MaxlinkNoopt,
            CodingScheme::Alamouti,
        ),
        small(
            Topology::DstcMas,
            SelectionPolicy::MaxlinkNoopt,
            CodingScheme::Alamouti,
        ),
    ] {
        let mut cfg = cfg;
        cfg.noise = NoiseConfig {
            sigma_r_sq: 0.3,
            sigma_d_sq: 0.3,
        };
        let units = (cfg.packets * cfg.block_len / cfg.group_len()) as u64;
        let out = run_trial(&cfg, 31, 0).unwrap();
        assert_eq!(out.slots, 2 * units, "{cfg:?}");
        assert_eq!(out.bits_sent, out.bits_delivered);
    }
}

#[test]
fn coherence_presets_set_the_redraw_cadence() {
    let mut cfg = small(
        Topology::Sas,
        SelectionPolicy::MaxlinkNoopt,
        CodingScheme::None,
    );
    assert_eq!(cfg.redraw_interval(), 1);
    cfg.coherence = CoherencePreset::PerPacket;
    assert_eq!(cfg.redraw_interval(), cfg.block_len as u64);
    cfg.coding = CodingScheme::RAlamouti;
    assert_eq!(cfg.redraw_interval(), (cfg.block_len / 2) as u64);
    cfg.coherence = CoherencePreset::PerSymbol;
    assert_eq!(cfg.redraw_interval(), 1);
}

#[test]
fn ber_is_monotone_in_snr_up_to_ci_overlap() {
    let cfg = p2p_base();
    let sweep = SweepConfig {
        snr_db: vec![0.0, 4.0, 8.0, 12.0],
        min_errors: 300,
        max_bits: 1_000_000,
        max_trials: 256,
        seed: 23,
    };
    let curve = estimate_ber(&cfg, &sweep).unwrap();
    for pair in curve.points.windows(2) {
        assert!(
            pair[1].ci_low <= pair[0].ci_high,
            "BER rose beyond CI overlap: {pair:?}"
        );
    }
}

fn p2p_base() -> ScenarioConfig {
    ScenarioConfig {
        topology: Topology::P2p,
        antennas: 1,
        relays: 0,
        block_len: 100,
        packets: 50,
        coding: CodingScheme::None,
        ..ScenarioConfig::default()
    }
}

#[test]
fn alamouti_p2p_beats_uncoded_and_steepens_slope() {
    let uncoded = ScenarioConfig {
        topology: Topology::P2p,
        antennas: 1,
        relays: 0,
        block_len: 100,
        packets: 100,
        coding: CodingScheme::None,
        ..ScenarioConfig::default()
    };
    let alamouti = ScenarioConfig {
        antennas: 2,
        coding: CodingScheme::Alamouti,
        ..uncoded.clone()
    };
    let sweep = SweepConfig {
        snr_db: vec![12.0, 16.0, 20.0],
        min_errors: 400,
        max_bits: 4_000_000,
        max_trials: 1024,
        seed: 17,
    };
    let cu = estimate_ber(&uncoded, &sweep).unwrap();
    let ca = estimate_ber(&alamouti, &sweep).unwrap();
    for (u, a) in cu.points.iter().zip(&ca.points) {
        assert!(a.ber < u.ber, "alamouti should win at {} dB", u.snr_db);
    }
    let su = diversity_slope(&cu, (12.0, 20.0)).unwrap();
    let sa = diversity_slope(&ca, (12.0, 20.0)).unwrap();
    assert!(sa < su - 0.4, "slopes: uncoded {su}, alamouti {sa}");
}
