//! Adaptive buffer-aided relaying optimization: decision-directed
//! stochastic-gradient refinement of the adjustable code matrix after each
//! detection, followed by structural projection and power normalization.
//!
//! The update acts on the equivalent code matrix against the model
//! `r ≈ scale·V_eq·h·ŝ`; the power constraint is ignored during the
//! gradient step and enforced afterwards by [`normalize_code`].

use crate::coding::AdjustableCode;
use crate::numerics::{Complex64, ComplexMatrix};
use crate::{Error, Result};

/// Stochastic-gradient parameters.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SgConfig {
    /// Step size μ.
    pub mu: f64,
    /// Power budget `P_V` enforced by normalization.
    pub power_budget: f64,
}

impl SgConfig {
    pub fn validate(&self) -> Result<()> {
        if self.mu <= 0.0 {
            return Err(Error::Config(format!(
                "step size must be positive, got {}",
                self.mu
            )));
        }
        if self.power_budget <= 0.0 {
            return Err(Error::Config("power budget must be positive".into()));
        }
        Ok(())
    }
}

impl Default for SgConfig {
    fn default() -> Self {
        Self {
            mu: 0.01,
            power_budget: std::f64::consts::SQRT_2,
        }
    }
}

/// Which structured family the equivalent code matrix belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CodeStructure {
    /// `T×N` single-antenna equivalent `[[v₁, v₂], [v₂, −v₁]]`.
    Sas,
    /// `TN×TN` block diagonal `I_T ⊗ diag(v)` with `copies = T`.
    Mas { copies: usize },
}

/// Raw LMS step on a free code matrix:
/// `V ← V + μ·scale·(r − scale·V·h·ŝ)·(h·ŝ)ᴴ`.
pub fn sg_step_matrix(
    v_eq: &ComplexMatrix,
    r: &[Complex64],
    h: &ComplexMatrix,
    s_hat: &[Complex64],
    scale: f64,
    mu: f64,
) -> Result<ComplexMatrix> {
    if h.cols() != s_hat.len() || h.rows() != v_eq.cols() || v_eq.rows() != r.len() {
        return Err(Error::InvalidArgument(format!(
            "sg update dimensions do not conform: V {}x{}, h {}x{}, r {}, s {}",
            v_eq.rows(),
            v_eq.cols(),
            h.rows(),
            h.cols(),
            r.len(),
            s_hat.len()
        )));
    }
    let x = h.mul_vec(s_hat);
    let predicted = v_eq.mul_vec(&x);
    let mut out = v_eq.clone();
    for row in 0..out.rows() {
        let e = r[row] - scale * predicted[row];
        let w = Complex64::new(mu * scale, 0.0) * e;
        for col in 0..out.cols() {
            out[(row, col)] += w * x[col].conj();
        }
    }
    Ok(out)
}

/// Instantaneous cost `‖r − scale·V_eq·h·ŝ‖²` of the equivalent model.
pub fn instantaneous_cost(
    v_eq: &ComplexMatrix,
    r: &[Complex64],
    h: &ComplexMatrix,
    s_hat: &[Complex64],
    scale: f64,
) -> f64 {
    let x = h.mul_vec(s_hat);
    let predicted = v_eq.mul_vec(&x);
    r.iter()
        .zip(&predicted)
        .map(|(ri, pi)| (ri - scale * pi).norm_sqr())
        .sum()
}

/// Recovers the code vector from a (possibly dense) updated equivalent
/// matrix by keeping only the structured part: the `T` diagonal copies of
/// `diag(v)` are averaged entry-wise and off-diagonal mass is discarded.
pub fn project_to_structure(
    v_eq_full: &ComplexMatrix,
    copies: usize,
    power_budget: f64,
) -> Result<AdjustableCode> {
    if !v_eq_full.is_square() || copies == 0 || !v_eq_full.rows().is_multiple_of(copies) {
        return Err(Error::InvalidArgument(format!(
            "cannot project {}x{} matrix onto {} diagonal copies",
            v_eq_full.rows(),
            v_eq_full.cols(),
            copies
        )));
    }
    let n = v_eq_full.rows() / copies;
    let mut v = vec![Complex64::ZERO; n];
    for t in 0..copies {
        for (i, entry) in v.iter_mut().enumerate() {
            *entry += v_eq_full[(t * n + i, t * n + i)];
        }
    }
    for entry in &mut v {
        *entry /= copies as f64;
    }
    AdjustableCode::new(v, power_budget)
}

/// Least-squares projection of a free 2×2 matrix onto the SAS structure
/// `[[v₁, v₂], [v₂, −v₁]]`.
pub fn project_to_sas_structure(
    v_eq_full: &ComplexMatrix,
    power_budget: f64,
) -> Result<AdjustableCode> {
    if v_eq_full.rows() != 2 || v_eq_full.cols() != 2 {
        return Err(Error::InvalidArgument(
            "SAS structure projection expects a 2x2 matrix".into(),
        ));
    }
    let v1 = (v_eq_full[(0, 0)] - v_eq_full[(1, 1)]) * 0.5;
    let v2 = (v_eq_full[(0, 1)] + v_eq_full[(1, 0)]) * 0.5;
    AdjustableCode::new(vec![v1, v2], power_budget)
}

/// One full adaptation step: LMS update of the equivalent code matrix,
/// then projection back onto the structured family. Normalization is a
/// separate step so callers can observe the un-normalized cost.
pub fn sg_update(
    code: &AdjustableCode,
    structure: CodeStructure,
    r: &[Complex64],
    h: &ComplexMatrix,
    s_hat: &[Complex64],
    scale: f64,
    cfg: &SgConfig,
) -> Result<AdjustableCode> {
    let v_eq = match structure {
        CodeStructure::Sas => code.v_eq_sas(),
        CodeStructure::Mas { copies } => code.v_eq_mas(copies),
    };
    let updated = sg_step_matrix(&v_eq, r, h, s_hat, scale, cfg.mu)?;
    match structure {
        CodeStructure::Sas => project_to_sas_structure(&updated, cfg.power_budget),
        CodeStructure::Mas { copies } => project_to_structure(&updated, copies, cfg.power_budget),
    }
}

/// Power normalization `v ← v·P_V/√(vᴴv)`: output norm equals the budget
/// exactly, direction preserved.
pub fn normalize_code(v: &[Complex64], p_v: f64) -> Result<Vec<Complex64>> {
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::DegenerateCode(
            "cannot normalize an all-zero code vector".into(),
        ));
    }
    let factor = p_v / norm;
    Ok(v.iter().map(|&z| z * factor).collect())
}

/// Normalizes in place against the code's own power budget.
pub fn normalize(code: &mut AdjustableCode) -> Result<()> {
    let v = normalize_code(code.v(), code.power_budget())?;
    code.set_v(v);
    Ok(())
}
