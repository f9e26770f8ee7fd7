//! Distillation objectives over raw KRR scores `Z`.
//!
//! All probability-based objectives evaluate `p = sigmoid(Z - G)` (with
//! `G = 0` except for [`Objective::Asig`]) and clamp `p` to
//! `[1e-12, 1 - 1e-12]` before taking logs. The clamp is applied on the
//! logit, so the reported gradient is exactly the derivative of the clamped
//! loss (zero outside the clamp).

mod calibrate;

pub use calibrate::{calibrate_g, calibrate_g_with, CalibrationCell, CalibrationResult, CalibrationSettings};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::{imbalance_ratio, Dataset};
use crate::error::{Error, Result};

/// Probability clamp used before every log.
pub const PROB_EPS: f64 = 1e-12;

/// `ln((1 - eps) / eps)`: the logit at which `p` reaches the clamp.
fn logit_clamp() -> f64 {
    ((1.0 - PROB_EPS) / PROB_EPS).ln()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Objective {
    /// Mean squared error against ±1 targets.
    Mse,
    /// Binary cross-entropy.
    Ce,
    /// Cross-entropy with weight `coe` on positives and `1 - coe` on negatives.
    Wce { coe: f64 },
    /// Cross-entropy with the single modulator `(1 - p)^gamma` on both classes.
    Focal { gamma: f64 },
    /// Asymmetric focal loss on the shifted sigmoid `p = sigmoid(Z - G)`,
    /// `G = alpha_g ln(ir) + beta_g`: positives weighted `alpha_w (1 - p)^gamma`,
    /// negatives `(1 - alpha_w) p^gamma`.
    Asig {
        gamma: f64,
        alpha_w: f64,
        alpha_g: f64,
        beta_g: f64,
        ir: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectiveKind {
    Mse,
    Ce,
    Wce,
    Focal,
    Asig,
}

impl ObjectiveKind {
    pub const ALL: [ObjectiveKind; 5] = [
        ObjectiveKind::Mse,
        ObjectiveKind::Ce,
        ObjectiveKind::Wce,
        ObjectiveKind::Focal,
        ObjectiveKind::Asig,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ObjectiveKind::Mse => "mse",
            ObjectiveKind::Ce => "ce",
            ObjectiveKind::Wce => "wce",
            ObjectiveKind::Focal => "focal",
            ObjectiveKind::Asig => "asig",
        }
    }
}

impl fmt::Display for ObjectiveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ObjectiveKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ObjectiveKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::invalid("objective", format!("unknown kind `{s}`")))
    }
}

/// How the re-balancing weight `coe` is derived from class counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoeConvention {
    /// `coe = N_neg / N`: up-weights the positive term when positives are rare.
    #[default]
    NegativeFraction,
    /// `coe = N_pos / N_neg`, the literal positive-to-negative ratio. Kept for
    /// ablations; it down-weights rare positives.
    PositiveToNegative,
}

impl CoeConvention {
    pub fn coe(self, ds: &Dataset) -> f64 {
        let (neg, pos) = ds.class_counts();
        match self {
            CoeConvention::NegativeFraction => neg as f64 / (neg + pos) as f64,
            CoeConvention::PositiveToNegative => pos as f64 / neg as f64,
        }
    }
}

/// Overrides for [`Objective::from_kind`]; `None` means "derive a default".
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectiveParams {
    pub gamma: Option<f64>,
    pub coe: Option<f64>,
    pub coe_convention: Option<CoeConvention>,
    pub alpha_w: Option<f64>,
    pub alpha_g: Option<f64>,
    pub beta_g: Option<f64>,
    pub ir: Option<f64>,
}

pub const DEFAULT_GAMMA: f64 = 2.0;
pub const DEFAULT_ALPHA_G: f64 = 1.0;
pub const DEFAULT_BETA_G: f64 = 0.0;

impl Objective {
    /// Builds an objective of the given kind, filling unspecified parameters
    /// from the training set: `coe` from the class counts, `alpha_w = coe`,
    /// `ir` from [`imbalance_ratio`], `gamma = 2`, `(alpha_g, beta_g) = (1, 0)`.
    pub fn from_kind(kind: ObjectiveKind, params: &ObjectiveParams, train: &Dataset) -> Result<Self> {
        let coe = params
            .coe
            .unwrap_or_else(|| params.coe_convention.unwrap_or_default().coe(train));
        let gamma = params.gamma.unwrap_or(DEFAULT_GAMMA);
        let obj = match kind {
            ObjectiveKind::Mse => Objective::Mse,
            ObjectiveKind::Ce => Objective::Ce,
            ObjectiveKind::Wce => Objective::Wce { coe },
            ObjectiveKind::Focal => Objective::Focal { gamma },
            ObjectiveKind::Asig => Objective::Asig {
                gamma,
                alpha_w: params.alpha_w.unwrap_or(coe),
                alpha_g: params.alpha_g.unwrap_or(DEFAULT_ALPHA_G),
                beta_g: params.beta_g.unwrap_or(DEFAULT_BETA_G),
                ir: params.ir.unwrap_or_else(|| imbalance_ratio(train)),
            },
        };
        obj.validate()?;
        Ok(obj)
    }

    pub fn kind(&self) -> ObjectiveKind {
        match self {
            Objective::Mse => ObjectiveKind::Mse,
            Objective::Ce => ObjectiveKind::Ce,
            Objective::Wce { .. } => ObjectiveKind::Wce,
            Objective::Focal { .. } => ObjectiveKind::Focal,
            Objective::Asig { .. } => ObjectiveKind::Asig,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |arg: &'static str, v: f64| {
            if v > 0.0 && v < 1.0 {
                Ok(())
            } else {
                Err(Error::invalid(arg, format!("{v} is not strictly inside (0, 1)")))
            }
        };
        let gamma_ok = |g: f64| {
            if g >= 0.0 && g.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid("gamma", format!("{g} must be finite and >= 0")))
            }
        };
        match *self {
            Objective::Mse | Objective::Ce => Ok(()),
            Objective::Wce { coe } => unit("coe", coe),
            Objective::Focal { gamma } => gamma_ok(gamma),
            Objective::Asig {
                gamma,
                alpha_w,
                alpha_g,
                beta_g,
                ir,
            } => {
                gamma_ok(gamma)?;
                unit("alpha_w", alpha_w)?;
                if !alpha_g.is_finite() || !beta_g.is_finite() {
                    return Err(Error::invalid("alpha_g", "shift parameters must be finite"));
                }
                g_shift(ir, alpha_g, beta_g).map(|_| ())
            }
        }
    }

    /// The decision-boundary shift `G` applied to scores (0 unless asig).
    pub fn shift(&self) -> f64 {
        match *self {
            Objective::Asig {
                alpha_g, beta_g, ir, ..
            } => alpha_g * ir.ln() + beta_g,
            _ => 0.0,
        }
    }
}

/// `G(ir, alpha, beta) = alpha ln(ir) + beta`.
pub fn g_shift(ir: f64, alpha_g: f64, beta_g: f64) -> Result<f64> {
    if !(ir > 0.0 && ir.is_finite()) {
        return Err(Error::invalid("ir", format!("{ir} must be positive")));
    }
    Ok(alpha_g * ir.ln() + beta_g)
}

/// Logistic function, evaluated without overflow and kept inside the open
/// unit interval.
pub fn sigmoid(u: f64) -> f64 {
    let p = if u >= 0.0 {
        1.0 / (1.0 + (-u).exp())
    } else {
        let e = u.exp();
        e / (1.0 + e)
    };
    p.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0)
}

/// `ln(sigmoid(u))`, stable for large |u|.
pub fn log_sigmoid(u: f64) -> f64 {
    u.min(0.0) - (-u.abs()).exp().ln_1p()
}

/// `p_j = 1 / (1 + exp(-Z_j + G))`.
pub fn shifted_sigmoid(z: &[f64], shift: f64) -> Vec<f64> {
    z.iter().map(|&v| sigmoid(v - shift)).collect()
}

/// Mean loss over the batch and its gradient with respect to each score.
///
/// `labels` are the binary targets; mse compares against their ±1 encoding.
pub fn loss_and_grad(obj: &Objective, z: &[f64], labels: &[u8]) -> Result<(f64, Vec<f64>)> {
    if z.len() != labels.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} scores for {} labels",
            z.len(),
            labels.len()
        )));
    }
    if z.is_empty() {
        return Err(Error::invalid("z", "empty batch"));
    }
    if let Some(&bad) = labels.iter().find(|&&l| l > 1) {
        return Err(Error::invalid("labels", format!("label {bad} is not 0 or 1")));
    }
    obj.validate()?;
    let n = z.len() as f64;
    let shift = obj.shift();
    let bound = logit_clamp();

    let mut total = 0.0;
    let mut grad = Vec::with_capacity(z.len());
    for (&zj, &y) in z.iter().zip(labels) {
        let positive = y == 1;
        let (loss, dloss) = if let Objective::Mse = obj {
            let r = zj - if positive { 1.0 } else { -1.0 };
            (r * r, 2.0 * r)
        } else {
            let raw = zj - shift;
            let u = raw.clamp(-bound, bound);
            let (loss, d) = probability_term(obj, u, positive);
            // the clamp has zero derivative outside its range
            (loss, if raw == u { d } else { 0.0 })
        };
        total += loss;
        grad.push(dloss / n);
    }
    Ok((total / n, grad))
}

/// Per-sample loss and derivative with respect to the (shifted, clamped)
/// logit `u`, with `p = sigmoid(u)` and `q = 1 - p = sigmoid(-u)`.
fn probability_term(obj: &Objective, u: f64, positive: bool) -> (f64, f64) {
    let p = sigmoid(u);
    let q = sigmoid(-u);
    let lp = log_sigmoid(u);
    let lq = log_sigmoid(-u);
    match *obj {
        Objective::Mse => unreachable!("mse has no probability link"),
        Objective::Ce => {
            if positive {
                (-lp, -q)
            } else {
                (-lq, p)
            }
        }
        Objective::Wce { coe } => {
            if positive {
                (-coe * lp, -coe * q)
            } else {
                (-(1.0 - coe) * lq, (1.0 - coe) * p)
            }
        }
        Objective::Focal { gamma } => {
            // d/du (1-p)^g = -g p (1-p)^g
            let m = q.powf(gamma);
            if positive {
                (-m * lp, m * (gamma * p * lp - q))
            } else {
                (-m * lq, m * (gamma * p * lq + p))
            }
        }
        Objective::Asig { gamma, alpha_w, .. } => {
            if positive {
                let m = q.powf(gamma);
                (-alpha_w * m * lp, alpha_w * m * (gamma * p * lp - q))
            } else {
                // d/du p^g = g q p^g
                let m = p.powf(gamma);
                let w = 1.0 - alpha_w;
                (-w * m * lq, w * m * (p - gamma * q * lq))
            }
        }
    }
}
