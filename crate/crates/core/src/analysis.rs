//! Closed-form evaluators for the pairwise-error-probability analysis:
//! conditional PEP, its Chernoff and product-form upper bounds, the coding
//! gain factor η, the buffer gain factor β and the multiplication-count
//! complexity model.

use crate::numerics::{hermitian_eig, q_function, ComplexMatrix};
use crate::{Error, Result};

/// Inputs for one pairwise error event `C¹ → C²` over a fixed channel.
#[derive(Clone, Debug)]
pub struct PepInputs<'a> {
    /// Transmitted codeword (`N×T`).
    pub codeword_a: &'a ComplexMatrix,
    /// Erroneously decoded codeword (`N×T`).
    pub codeword_b: &'a ComplexMatrix,
    /// Channel matrix `G` (`N×N`).
    pub channel: &'a ComplexMatrix,
    /// Adjustable code matrix `V` (`N×N`).
    pub adjustable: &'a ComplexMatrix,
    /// Linear SNR γ.
    pub gamma: f64,
}

impl PepInputs<'_> {
    fn validate(&self) -> Result<(usize, usize)> {
        let (n, t) = (self.codeword_a.rows(), self.codeword_a.cols());
        if self.codeword_b.rows() != n || self.codeword_b.cols() != t {
            return Err(Error::InvalidArgument("codeword shapes differ".into()));
        }
        if self.channel.rows() != n || self.channel.cols() != n {
            return Err(Error::InvalidArgument("channel must be N×N".into()));
        }
        if self.adjustable.rows() != n || self.adjustable.cols() != n {
            return Err(Error::InvalidArgument("adjustable code must be N×N".into()));
        }
        if self.gamma <= 0.0 {
            return Err(Error::InvalidArgument("gamma must be positive".into()));
        }
        Ok((n, t))
    }

    fn weighted_difference(&self) -> ComplexMatrix {
        let delta = self.codeword_a.sub(self.codeword_b);
        self.adjustable.mul(self.channel).mul(&delta)
    }
}

/// A probability together with a degeneracy flag for identical codewords.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PepValue {
    pub probability: f64,
    pub degenerate: bool,
}

/// Exact conditional PEP `Q(√(γ/2)·‖VG(C¹−C²)‖_F)` for a fixed channel.
pub fn pep_conditional_direct(inputs: &PepInputs) -> Result<PepValue> {
    inputs.validate()?;
    let dist_sq = inputs.weighted_difference().frobenius_norm_sq();
    Ok(PepValue {
        probability: q_function((inputs.gamma / 2.0 * dist_sq).sqrt()),
        degenerate: dist_sq == 0.0,
    })
}

/// Conditional PEP evaluated through the triple eigendecomposition chain:
/// `Λ_C` from `(C¹−C²)ᴴ(C¹−C²)`, `Λ_G` from `(GU)ᴴGU` and `Λ_V` from
/// `(YVU)ᴴYVU`, combined as
/// `Q(√(γ/2·Σₘ Σₙ λ_{Vn} λ_{Gn} λ_{Cn} |ξ_{n,m}|²))` with `ξ` the entries
/// of the unitary `Y`.
pub fn pep_conditional(inputs: &PepInputs) -> Result<PepValue> {
    let (n, _t) = inputs.validate()?;
    let delta = inputs.codeword_a.sub(inputs.codeword_b);
    if delta.frobenius_norm_sq() == 0.0 {
        return Ok(PepValue {
            probability: 0.5,
            degenerate: true,
        });
    }
    let code_dec = hermitian_eig(&delta.hermitian().mul(&delta))?;
    // Eigenvector columns of the distance matrix.
    let u = code_dec.eigenvectors.hermitian();
    let gu = inputs.channel.mul(&u);
    let chan_dec = hermitian_eig(&gu.hermitian().mul(&gu))?;
    let y = chan_dec.eigenvectors.hermitian();
    let yvu = y.mul(inputs.adjustable).mul(&u);
    let code_chan_dec = hermitian_eig(&yvu.hermitian().mul(&yvu))?;

    let lam_c = &code_dec.eigenvalues;
    let lam_g = &chan_dec.eigenvalues;
    let lam_v = &code_chan_dec.eigenvalues;

    let mut arg = 0.0;
    for i in 0..n {
        let weight = lam_v[i].max(0.0) * lam_g[i].max(0.0) * lam_c[i].max(0.0);
        for m in 0..n {
            arg += weight * y[(i, m)].norm_sqr();
        }
    }
    Ok(PepValue {
        probability: q_function((inputs.gamma / 2.0 * arg).sqrt()),
        degenerate: false,
    })
}

/// Conditional Chernoff bound `½·exp(−γ/4·‖VG(C¹−C²)‖²_F)`; valid for
/// every fixed channel realization since `Q(x) ≤ ½e^{−x²/2}`.
pub fn pep_chernoff_conditional(inputs: &PepInputs) -> Result<PepValue> {
    inputs.validate()?;
    let dist_sq = inputs.weighted_difference().frobenius_norm_sq();
    Ok(PepValue {
        probability: 0.5 * (-inputs.gamma / 4.0 * dist_sq).exp(),
        degenerate: dist_sq == 0.0,
    })
}

/// Product-form PEP upper bound for the adjustable scheme:
/// `1 / ∏ₙ (1 + (γ/4)·λ_{Vn}·λ_{Gn}·λ_{Cn})^{NT}`.
pub fn pep_upper_bound_adjustable(
    lambda_v: &[f64],
    lambda_g: &[f64],
    lambda_c: &[f64],
    gamma: f64,
    t: usize,
) -> f64 {
    let nt = (lambda_c.len() * t) as i32;
    let mut denom = 1.0;
    for ((&lv, &lg), &lc) in lambda_v.iter().zip(lambda_g).zip(lambda_c) {
        denom *= (1.0 + gamma / 4.0 * lv * lg * lc).powi(nt);
    }
    1.0 / denom
}

/// Product-form PEP upper bound for a traditional (non-adjustable) code:
/// the adjustable form with `λ_V ≡ 1`.
pub fn pep_upper_bound_traditional(
    lambda_c: &[f64],
    lambda_g: &[f64],
    gamma: f64,
    t: usize,
) -> f64 {
    let ones = vec![1.0; lambda_c.len()];
    pep_upper_bound_adjustable(&ones, lambda_g, lambda_c, gamma, t)
}

/// High-SNR asymptote of the traditional bound:
/// `(γ/4)^{−N²T} · ∏ₙ λ_{Cn}^{−NT}`.
pub fn pep_traditional_asymptotic(lambda_c: &[f64], gamma: f64, t: usize) -> f64 {
    let n = lambda_c.len();
    let nt = (n * t) as i32;
    let mut out = (gamma / 4.0).powi(-((n * n * t) as i32));
    for &lc in lambda_c {
        out *= lc.powi(-nt);
    }
    out
}

/// High-SNR asymptote of the adjustable bound: the traditional asymptote
/// divided by `∏ₙ λ_{Vn}^{NT}`.
pub fn pep_adjustable_asymptotic(lambda_v: &[f64], lambda_c: &[f64], gamma: f64, t: usize) -> f64 {
    let nt = (lambda_c.len() * t) as i32;
    let mut out = pep_traditional_asymptotic(lambda_c, gamma, t);
    for &lv in lambda_v {
        out *= lv.powi(-nt);
    }
    out
}

/// Union bound over a codebook: average over transmitted codewords of
/// `Σ_{C²≠C¹}` product-form bounds with the pairwise eigenvalues computed
/// through the eigendecomposition chain.
pub fn pep_union_bound_adjustable(
    codebook: &[ComplexMatrix],
    channel: &ComplexMatrix,
    adjustable: &ComplexMatrix,
    gamma: f64,
) -> Result<f64> {
    if codebook.len() < 2 {
        return Err(Error::InvalidArgument(
            "codebook needs at least two codewords".into(),
        ));
    }
    let mut total = 0.0;
    for a in codebook {
        for b in codebook {
            if std::ptr::eq(a, b) {
                continue;
            }
            let t = a.cols();
            let delta = a.sub(b);
            let code_dec = hermitian_eig(&delta.hermitian().mul(&delta))?;
            let lam_c = code_dec.eigenvalues;
            let u = code_dec.eigenvectors.hermitian();
            let gu = channel.mul(&u);
            let lam_g = hermitian_eig(&gu.hermitian().mul(&gu))?.eigenvalues;
            let vv = adjustable.hermitian().mul(adjustable);
            let lam_v = hermitian_eig(&vv)?.eigenvalues;
            total += pep_upper_bound_adjustable(&lam_v, &lam_g, &lam_c, gamma, t);
        }
    }
    Ok((total / codebook.len() as f64).min(1.0))
}

/// Coding gain factor `η = ∏ₙ λ_{Vn}^{NT}`: the bound-ratio improvement
/// from the adjustable code.
pub fn coding_gain_eta(lambda_v: &[f64], n: usize, t: usize) -> f64 {
    let nt = (n * t) as i32;
    lambda_v.iter().map(|&l| l.powi(nt)).product()
}

/// Buffer gain factor `β = ∏ₙ (λ^{opt}_{Gn})^{NT} / ∏ₙ λ_{Gn}^{NT}`.
pub fn buffer_gain_beta(lambda_g_opt: &[f64], lambda_g: &[f64], n: usize, t: usize) -> Result<f64> {
    if lambda_g_opt.len() != lambda_g.len() {
        return Err(Error::InvalidArgument(
            "eigenvalue lists must have equal length".into(),
        ));
    }
    if lambda_g.contains(&0.0) {
        return Err(Error::DegenerateChannel(
            "zero channel eigenvalue in buffer gain ratio".into(),
        ));
    }
    let nt = (n * t) as i32;
    Ok(lambda_g_opt
        .iter()
        .zip(lambda_g)
        .map(|(&opt, &base)| (opt / base).powi(nt))
        .product())
}

/// Relay configuration the complexity model distinguishes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StcConfiguration {
    Sas,
    Mas,
    Dstc,
}

/// Multiplication count of one adjustable-code SG update.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ComplexityReport {
    pub configuration: StcConfiguration,
    pub n: usize,
    pub t: usize,
    pub multiplications: usize,
}

/// `(3+T)·N` multiplications per update in the SAS configuration and
/// `(3+T)·N²` for MAS and DSTC.
pub fn complexity_count(configuration: StcConfiguration, n: usize, t: usize) -> ComplexityReport {
    let base = (3 + t) * n;
    let multiplications = match configuration {
        StcConfiguration::Sas => base,
        StcConfiguration::Mas | StcConfiguration::Dstc => base * n,
    };
    ComplexityReport {
        configuration,
        n,
        t,
        multiplications,
    }
}

/// The four BPSK Alamouti codewords.
pub fn bpsk_alamouti_codebook() -> Vec<ComplexMatrix> {
    use crate::coding::{alamouti_encode, BPSK};
    let mut out = Vec::with_capacity(4);
    for &s1 in &BPSK {
        for &s2 in &BPSK {
            out.push(alamouti_encode(s1, s2));
        }
    }
    out
}
