//! Modulation and space-time coding: BPSK, the 2×2 Alamouti code, its
//! adjustable (randomized) variants for single- and multiple-antenna
//! relays, exhaustive ML detection and linear Alamouti decoding.

use crate::numerics::{Complex64, ComplexMatrix, RngStream};
use crate::{Error, Result};

/// BPSK constellation in enumeration order: bit 0 ↦ +1, bit 1 ↦ −1.
pub const BPSK: [Complex64; 2] = [Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)];

/// Maps bit 0 to +1 and bit 1 to −1.
pub fn bpsk_modulate(bits: &[u8]) -> Vec<Complex64> {
    bits.iter().map(|&b| BPSK[(b & 1) as usize]).collect()
}

/// Hard decision on one soft symbol.
pub fn bpsk_demodulate_symbol(s: Complex64) -> u8 {
    (s.re < 0.0) as u8
}

pub fn bpsk_demodulate(symbols: &[Complex64]) -> Vec<u8> {
    symbols.iter().map(|&s| bpsk_demodulate_symbol(s)).collect()
}

/// 2×2 Alamouti codeword `[[s₁, −s₂*], [s₂, s₁*]]`; rows are antennas,
/// columns are time slots.
pub fn alamouti_encode(s1: Complex64, s2: Complex64) -> ComplexMatrix {
    ComplexMatrix::from_rows(&[vec![s1, -s2.conj()], vec![s2, s1.conj()]])
}

/// Row-vector randomization `c = v·C`, collapsing an `N×T` codeword to the
/// `1×T` sequence a single-antenna relay transmits over `T` slots.
pub fn randomize_sas(v: &[Complex64], c: &ComplexMatrix) -> Result<Vec<Complex64>> {
    if v.len() != c.rows() {
        return Err(Error::InvalidArgument(format!(
            "adjustable vector length {} does not match codeword rows {}",
            v.len(),
            c.rows()
        )));
    }
    Ok((0..c.cols())
        .map(|t| (0..c.rows()).map(|n| v[n] * c[(n, t)]).sum())
        .collect())
}

/// Diagonal randomization `C_rand = V·C`: row `n` of the codeword scaled by
/// `v_n`.
pub fn randomize_mas(v: &ComplexMatrix, c: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !v.is_square() || v.rows() != c.rows() {
        return Err(Error::InvalidArgument(format!(
            "adjustable matrix {}x{} does not conform with codeword {}x{}",
            v.rows(),
            v.cols(),
            c.rows(),
            c.cols()
        )));
    }
    for r in 0..v.rows() {
        for col in 0..v.cols() {
            if r != col && v[(r, col)] != Complex64::ZERO {
                return Err(Error::InvalidArgument(
                    "adjustable matrix must be diagonal".into(),
                ));
            }
        }
    }
    let mut out = c.clone();
    for r in 0..c.rows() {
        let w = v[(r, r)];
        for t in 0..c.cols() {
            out[(r, t)] *= w;
        }
    }
    Ok(out)
}

/// Adjustable code vector `v` with its diagonal and equivalent matrix forms
/// and the power budget `P_V` used for normalization.
#[derive(Clone, Debug, PartialEq)]
pub struct AdjustableCode {
    v: Vec<Complex64>,
    power_budget: f64,
}

impl AdjustableCode {
    pub fn new(v: Vec<Complex64>, power_budget: f64) -> Result<Self> {
        if v.is_empty() {
            return Err(Error::InvalidArgument("empty adjustable vector".into()));
        }
        if power_budget <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "power budget must be positive, got {power_budget}"
            )));
        }
        Ok(Self { v, power_budget })
    }

    /// All-ones vector (the traditional, non-randomized code).
    pub fn identity(n: usize) -> Self {
        Self {
            v: vec![Complex64::ONE; n],
            power_budget: (n as f64).sqrt(),
        }
    }

    /// Entries drawn uniformly on the complex unit circle, then scaled so
    /// `‖v‖ = power_budget` exactly. Preserves per-antenna power.
    pub fn uniform_phase(n: usize, power_budget: f64, rng: &mut RngStream) -> Self {
        let amp = power_budget / (n as f64).sqrt();
        let v = (0..n).map(|_| rng.unit_phase() * amp).collect();
        Self { v, power_budget }
    }

    /// Entries drawn i.i.d. complex Gaussian with `E[‖v‖²] = power_budget²`
    /// and no instantaneous normalization: the decentralized randomization
    /// used by the non-adaptive randomized-code baseline.
    pub fn gaussian(n: usize, power_budget: f64, rng: &mut RngStream) -> Self {
        let var = power_budget * power_budget / n as f64;
        let v = (0..n).map(|_| rng.complex_gaussian(var)).collect();
        Self { v, power_budget }
    }

    pub fn v(&self) -> &[Complex64] {
        &self.v
    }

    pub fn set_v(&mut self, v: Vec<Complex64>) {
        debug_assert_eq!(v.len(), self.v.len());
        self.v = v;
    }

    pub fn len(&self) -> usize {
        self.v.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v.is_empty()
    }

    pub fn power_budget(&self) -> f64 {
        self.power_budget
    }

    pub fn norm(&self) -> f64 {
        self.v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `V = diag(v)`.
    pub fn diag_matrix(&self) -> ComplexMatrix {
        ComplexMatrix::from_diag(&self.v)
    }

    /// MAS equivalent form `V_eq = I_T ⊗ V` (`TN×TN` block diagonal).
    pub fn v_eq_mas(&self, t: usize) -> ComplexMatrix {
        ComplexMatrix::identity(t).kron(&self.diag_matrix())
    }

    /// SAS equivalent code matrix: the `T×N` matrix with
    /// `scale·V_eq·h·s` equal to the two slots a single-antenna relay
    /// transmits for the randomized Alamouti code (`[[v₁, v₂], [v₂, −v₁]]`).
    pub fn v_eq_sas(&self) -> ComplexMatrix {
        assert_eq!(self.v.len(), 2, "SAS randomized code ships for N = 2 only");
        ComplexMatrix::from_rows(&[vec![self.v[0], self.v[1]], vec![self.v[1], -self.v[0]]])
    }
}

/// Exhaustive ML detection against a linear model: returns the candidate
/// tuple from `constellation^N` minimizing `‖r − model·ŝ‖²`.
///
/// Candidates are enumerated lexicographically with the first symbol most
/// significant; ties break to the lowest enumeration index.
pub fn ml_detect_with_model(
    r: &[Complex64],
    model: &ComplexMatrix,
    constellation: &[Complex64],
) -> Vec<Complex64> {
    assert!(!constellation.is_empty(), "empty constellation");
    assert_eq!(r.len(), model.rows(), "received length != model rows");
    let n = model.cols();
    let m = constellation.len();
    let total = m.pow(n as u32);

    let mut best_cost = f64::INFINITY;
    let mut best = vec![constellation[0]; n];
    let mut cand = vec![Complex64::ZERO; n];
    for idx in 0..total {
        let mut rem = idx;
        for pos in (0..n).rev() {
            cand[pos] = constellation[rem % m];
            rem /= m;
        }
        let mut cost = 0.0;
        for row in 0..model.rows() {
            let mut acc = Complex64::ZERO;
            for col in 0..n {
                acc += model[(row, col)] * cand[col];
            }
            cost += (r[row] - acc).norm_sqr();
        }
        if cost < best_cost {
            best_cost = cost;
            best.copy_from_slice(&cand);
        }
    }
    best
}

/// ML detection in the equivalent-model form `‖r − scale·V_eq·h_eff·ŝ‖²`.
pub fn ml_detect(
    r: &[Complex64],
    h_eff: &ComplexMatrix,
    v_eq: &ComplexMatrix,
    scale: f64,
    constellation: &[Complex64],
) -> Vec<Complex64> {
    let model = v_eq.mul(h_eff).scale(Complex64::new(scale, 0.0));
    ml_detect_with_model(r, &model, constellation)
}

/// Exact destination model for one SAS forwarded group:
/// `scale·h·V_eq` with `V_eq` the SAS equivalent code matrix.
pub fn sas_effective_model(
    code: &AdjustableCode,
    h_composite: Complex64,
    scale: f64,
) -> ComplexMatrix {
    code.v_eq_sas().scale(h_composite * scale)
}

/// Two slots a single-antenna relay transmits for a stored symbol pair
/// under the randomized Alamouti code. `phase` is the unit-modulus
/// pre-rotation applied to the conjugate slot (`f/f*` for AF) so the
/// composite channel is `f·g` on both slots; pass 1 when the stored
/// symbols are clean (DF).
pub fn sas_transmit_slots(
    v: &[Complex64],
    u1: Complex64,
    u2: Complex64,
    phase: Complex64,
) -> [Complex64; 2] {
    let c = alamouti_encode(u1, u2);
    let row = randomize_sas(v, &c).expect("length-2 adjustable vector");
    [row[0], row[1] * phase]
}

/// `N×T` codeword a multi-antenna relay transmits for a stored vector:
/// `diag(v)·C(u₁, u₂)`.
pub fn mas_transmit_codeword(v: &[Complex64], u: &[Complex64]) -> ComplexMatrix {
    assert_eq!(v.len(), 2, "Alamouti codeword needs N = 2");
    assert_eq!(u.len(), 2, "Alamouti codeword needs 2 symbols");
    let c = alamouti_encode(u[0], u[1]);
    let mut out = c;
    for r in 0..2 {
        for t in 0..2 {
            out[(r, t)] *= v[r];
        }
    }
    out
}

/// Exact stacked destination model (2N×N) for one MAS AF-forwarded group:
/// column `n` is the noiseless stacked receive (slot-1 antennas, then
/// slot-2 antennas) when the source sent the unit vector `e_n`.
pub fn mas_af_effective_model(
    code: &AdjustableCode,
    f: &ComplexMatrix,
    g: &ComplexMatrix,
    alpha: f64,
    p_s: f64,
) -> ComplexMatrix {
    let n = f.rows();
    assert_eq!(n, 2, "MAS Alamouti model needs N = 2");
    let first_hop = (p_s / n as f64).sqrt();
    let mut model = ComplexMatrix::zeros(2 * n, n);
    for src in 0..n {
        // Clean stored vector for s = e_src, scaled by the AF gain.
        let u: Vec<Complex64> = (0..n)
            .map(|row| f[(row, src)] * first_hop * alpha)
            .collect();
        let x = mas_transmit_codeword(code.v(), &u);
        for t in 0..2 {
            let slot = g.mul_vec(&x.col(t));
            for (ant, &y) in slot.iter().enumerate() {
                model[(t * n + ant, src)] = y;
            }
        }
    }
    model
}

/// Linear Alamouti decoding with effective channel pair
/// `h_rand = (v₁h, v₂h)`: matched-filter combining
/// `s̃₁ = (h₁*r₁ + h₂r₂*) / ‖h‖²`, `s̃₂ = (h₂*r₁ − h₁r₂*) / ‖h‖²`.
pub fn alamouti_linear_decode(
    r: &[Complex64],
    h_rand: (Complex64, Complex64),
) -> Result<(Complex64, Complex64)> {
    if r.len() != 2 {
        return Err(Error::InvalidArgument(format!(
            "linear Alamouti decode needs 2 received samples, got {}",
            r.len()
        )));
    }
    let (h1, h2) = h_rand;
    let gain = h1.norm_sqr() + h2.norm_sqr();
    if gain == 0.0 {
        return Err(Error::DegenerateChannel(
            "zero effective channel in linear Alamouti decode".into(),
        ));
    }
    let s1 = (h1.conj() * r[0] + h2 * r[1].conj()) / gain;
    let s2 = (h2.conj() * r[0] - h1 * r[1].conj()) / gain;
    Ok((s1, s2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tolerances;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn bpsk_mapping() {
        assert_eq!(
            bpsk_modulate(&[0, 1, 0]),
            vec![c(1.0, 0.0), c(-1.0, 0.0), c(1.0, 0.0)]
        );
        assert!(bpsk_modulate(&[]).is_empty());
    }

    #[test]
    fn bpsk_roundtrip_exhaustive_length_8() {
        for word in 0u32..256 {
            let bits: Vec<u8> = (0..8).map(|i| ((word >> i) & 1) as u8).collect();
            assert_eq!(bpsk_demodulate(&bpsk_modulate(&bits)), bits);
        }
    }

    #[test]
    fn alamouti_structure() {
        let c1 = alamouti_encode(c(1.0, 0.0), c(1.0, 0.0));
        assert_eq!(c1[(0, 0)], c(1.0, 0.0));
        assert_eq!(c1[(0, 1)], c(-1.0, 0.0));
        assert_eq!(c1[(1, 0)], c(1.0, 0.0));
        assert_eq!(c1[(1, 1)], c(1.0, 0.0));

        let c2 = alamouti_encode(c(1.0, 0.0), c(-1.0, 0.0));
        assert_eq!(c2[(0, 1)], c(1.0, 0.0));
        assert_eq!(c2[(1, 0)], c(-1.0, 0.0));
        assert_eq!(c2[(1, 1)], c(1.0, 0.0));

        let c3 = alamouti_encode(c(0.0, 1.0), c(1.0, 0.0));
        assert_eq!(c3[(0, 0)], c(0.0, 1.0));
        assert_eq!(c3[(0, 1)], c(-1.0, 0.0));
        assert_eq!(c3[(1, 0)], c(1.0, 0.0));
        assert_eq!(c3[(1, 1)], c(0.0, -1.0));
    }

    #[test]
    fn alamouti_bpsk_orthogonality() {
        for &s1 in &BPSK {
            for &s2 in &BPSK {
                let cw = alamouti_encode(s1, s2);
                let gram = cw.hermitian().mul(&cw);
                let expect =
                    ComplexMatrix::identity(2).scale(c(s1.norm_sqr() + s2.norm_sqr(), 0.0));
                let dev = gram.sub(&expect).frobenius_norm();
                assert!(dev < tolerances::CODE_ORTHOGONALITY);
            }
        }
    }

    #[test]
    fn randomize_sas_selects_rows() {
        let s1 = c(0.3, 0.7);
        let s2 = c(-0.4, 0.2);
        let cw = alamouti_encode(s1, s2);
        let first = randomize_sas(&[c(1.0, 0.0), c(0.0, 0.0)], &cw).unwrap();
        assert_eq!(first, vec![s1, -s2.conj()]);
        let second = randomize_sas(&[c(0.0, 0.0), c(1.0, 0.0)], &cw).unwrap();
        assert_eq!(second, vec![s2, s1.conj()]);
    }

    #[test]
    fn randomize_sas_matches_direct_product() {
        // Oracle: direct 1x2 · 2x2 product computed by hand.
        let inv_sqrt2 = 1.0 / std::f64::consts::SQRT_2;
        let v = [c(inv_sqrt2, 0.0), c(inv_sqrt2, 0.0)];
        let cw = alamouti_encode(c(1.0, 0.0), c(-1.0, 0.0));
        let out = randomize_sas(&v, &cw).unwrap();
        assert!((out[0] - c(0.0, 0.0)).norm() < 1e-15);
        assert!((out[1] - c(std::f64::consts::SQRT_2, 0.0)).norm() < 1e-15);

        let bad = randomize_sas(&[c(1.0, 0.0)], &cw);
        assert!(bad.is_err());
    }

    #[test]
    fn randomize_mas_row_scaling() {
        let cw = alamouti_encode(c(1.0, 0.0), c(1.0, 0.0));
        let id = ComplexMatrix::identity(2);
        assert_eq!(randomize_mas(&id, &cw).unwrap(), cw);

        let v = ComplexMatrix::from_diag(&[c(2.0, 0.0), c(0.0, 0.0)]);
        let out = randomize_mas(&v, &cw).unwrap();
        assert_eq!(out[(0, 0)], c(2.0, 0.0));
        assert_eq!(out[(0, 1)], c(-2.0, 0.0));
        assert_eq!(out[(1, 0)], c(0.0, 0.0));
        assert_eq!(out[(1, 1)], c(0.0, 0.0));
    }

    #[test]
    fn randomize_mas_matches_displayed_matrix() {
        // [[v1 s1, -v1 s2*], [v2 s2, v2 s1*]] for generic complex inputs.
        let (v1, v2) = (c(0.6, -0.8), c(-0.3, 1.1));
        let (s1, s2) = (c(0.2, 0.9), c(-1.4, 0.5));
        let v = ComplexMatrix::from_diag(&[v1, v2]);
        let out = randomize_mas(&v, &alamouti_encode(s1, s2)).unwrap();
        assert!((out[(0, 0)] - v1 * s1).norm() < 1e-15);
        assert!((out[(0, 1)] + v1 * s2.conj()).norm() < 1e-15);
        assert!((out[(1, 0)] - v2 * s2).norm() < 1e-15);
        assert!((out[(1, 1)] - v2 * s1.conj()).norm() < 1e-15);
    }

    #[test]
    fn ml_detect_noiseless_recovery_and_tie_break() {
        let code = AdjustableCode::identity(2);
        let h = c(0.7, -0.4);
        let model = sas_effective_model(&code, h, 1.3);
        let s = [BPSK[0], BPSK[1]]; // (+1, -1)
        let r = model.mul_vec(&s);
        assert_eq!(ml_detect_with_model(&r, &model, &BPSK), s.to_vec());

        // All-zero received with symmetric candidates: lowest index wins.
        let zero = [Complex64::ZERO, Complex64::ZERO];
        assert_eq!(
            ml_detect_with_model(&zero, &model, &BPSK),
            vec![BPSK[0], BPSK[0]]
        );
    }

    #[test]
    fn ml_detect_agrees_with_enumeration_oracle() {
        // Independent oracle: enumerate the 4 BPSK pairs and compare costs
        // directly.
        let mut rng = RngStream::new(17, 0);
        for _ in 0..500 {
            let mut model = ComplexMatrix::zeros(2, 2);
            for r in 0..2 {
                for col in 0..2 {
                    model[(r, col)] = rng.complex_gaussian(1.0);
                }
            }
            let r = rng.complex_gaussian_vec(2, 2.0);

            let mut best = (f64::INFINITY, vec![]);
            for &s1 in &BPSK {
                for &s2 in &BPSK {
                    let est = model.mul_vec(&[s1, s2]);
                    let cost: f64 = r.iter().zip(&est).map(|(a, b)| (a - b).norm_sqr()).sum();
                    if cost < best.0 {
                        best = (cost, vec![s1, s2]);
                    }
                }
            }
            assert_eq!(ml_detect_with_model(&r, &model, &BPSK), best.1);
        }
    }

    #[test]
    fn linear_decode_matches_example_and_flags_zero_channel() {
        // Noiseless r for h_rand = (1, 1), transmitted (+1, -1):
        // r1 = h1 s1 + h2 s2 = 0, r2 = h2 s1 - h1 s2 = 2.
        let r = [c(0.0, 0.0), c(2.0, 0.0)];
        let (s1, s2) = alamouti_linear_decode(&r, (c(1.0, 0.0), c(1.0, 0.0))).unwrap();
        assert_eq!(bpsk_demodulate_symbol(s1), 0);
        assert_eq!(bpsk_demodulate_symbol(s2), 1);

        let err = alamouti_linear_decode(&r, (Complex64::ZERO, Complex64::ZERO));
        assert!(matches!(err, Err(Error::DegenerateChannel(_))));
    }

    #[test]
    fn linear_decode_agrees_with_ml_on_noiseless_trials() {
        let mut rng = RngStream::new(23, 5);
        for _ in 0..10_000 {
            let v = AdjustableCode::uniform_phase(2, std::f64::consts::SQRT_2, &mut rng);
            let h = rng.complex_gaussian(1.0);
            if h.norm_sqr() < 1e-6 {
                continue;
            }
            let model = sas_effective_model(&v, h, 1.0);
            let bits = [rng.random_bit(), rng.random_bit()];
            let s = bpsk_modulate(&bits);
            let r = model.mul_vec(&s);

            let ml = ml_detect_with_model(&r, &model, &BPSK);
            let h_rand = (v.v()[0] * h, v.v()[1] * h);
            let (t1, t2) = alamouti_linear_decode(&r, h_rand).unwrap();
            assert_eq!(bpsk_demodulate_symbol(t1), bpsk_demodulate_symbol(ml[0]));
            assert_eq!(bpsk_demodulate_symbol(t2), bpsk_demodulate_symbol(ml[1]));
        }
    }

    #[test]
    fn uniform_phase_meets_budget_exactly() {
        let mut rng = RngStream::new(2, 2);
        let code = AdjustableCode::uniform_phase(2, 1.7, &mut rng);
        assert!((code.norm() - 1.7).abs() < 1e-12);
        // Per-antenna power is equal.
        let amps: Vec<f64> = code.v().iter().map(|z| z.norm()).collect();
        assert!((amps[0] - amps[1]).abs() < 1e-12);
    }

    #[test]
    fn gaussian_code_hits_budget_on_average() {
        let mut rng = RngStream::new(4, 9);
        let n = 20_000;
        let mean_sq: f64 = (0..n)
            .map(|_| {
                let code = AdjustableCode::gaussian(2, std::f64::consts::SQRT_2, &mut rng);
                code.norm().powi(2)
            })
            .sum::<f64>()
            / n as f64;
        assert!((mean_sq - 2.0).abs() < 0.05, "mean ‖v‖² = {mean_sq}");
    }

    #[test]
    fn v_eq_forms() {
        let code = AdjustableCode::new(vec![c(2.0, 0.0), c(0.0, 3.0)], 2.0).unwrap();
        let mas = code.v_eq_mas(2);
        assert_eq!((mas.rows(), mas.cols()), (4, 4));
        assert_eq!(mas[(0, 0)], c(2.0, 0.0));
        assert_eq!(mas[(1, 1)], c(0.0, 3.0));
        assert_eq!(mas[(2, 2)], c(2.0, 0.0));
        assert_eq!(mas[(3, 3)], c(0.0, 3.0));
        assert_eq!(mas[(0, 1)], Complex64::ZERO);

        let sas = code.v_eq_sas();
        assert_eq!(sas[(0, 0)], c(2.0, 0.0));
        assert_eq!(sas[(0, 1)], c(0.0, 3.0));
        assert_eq!(sas[(1, 0)], c(0.0, 3.0));
        assert_eq!(sas[(1, 1)], c(-2.0, 0.0));
    }

    proptest! {
        #[test]
        fn alamouti_orthogonality_generic(re1 in -2.0f64..2.0, im1 in -2.0f64..2.0,
                                          re2 in -2.0f64..2.0, im2 in -2.0f64..2.0) {
            let (s1, s2) = (c(re1, im1), c(re2, im2));
            let cw = alamouti_encode(s1, s2);
            let gram = cw.hermitian().mul(&cw);
            let expect = ComplexMatrix::identity(2).scale(c(s1.norm_sqr() + s2.norm_sqr(), 0.0));
            prop_assert!(gram.sub(&expect).frobenius_norm() < 1e-12);
        }

        #[test]
        fn randomization_is_linear_in_v(re in -2.0f64..2.0, im in -2.0f64..2.0) {
            let alpha = c(re, im);
            let v = [c(0.4, -0.3), c(-1.1, 0.8)];
            let scaled: Vec<Complex64> = v.iter().map(|&x| alpha * x).collect();
            let cw = alamouti_encode(c(0.9, 0.1), c(-0.2, 0.6));
            let direct = randomize_sas(&scaled, &cw).unwrap();
            let reference = randomize_sas(&v, &cw).unwrap();
            for (d, r) in direct.iter().zip(&reference) {
                prop_assert!((d - alpha * r).norm() < 1e-12);
            }
        }
    }
}
