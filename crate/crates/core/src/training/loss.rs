use serde::{Deserialize, Serialize};

use crate::network::argmax;
use crate::{Error, Result};

/// How detector sums are turned into logits before the softmax.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Readout {
    /// Softmax over the raw region sums.
    #[default]
    Raw,
    /// Region sums divided by their total, then multiplied by `scale`.
    Normalized { scale: f64 },
}

impl Readout {
    fn logits(&self, sums: &[f64]) -> Result<Vec<f64>> {
        match *self {
            Readout::Raw => Ok(sums.to_vec()),
            Readout::Normalized { scale } => {
                let total: f64 = sums.iter().sum();
                if total <= 0.0 {
                    return Err(Error::invalid("cannot normalise detector sums with zero total"));
                }
                Ok(sums.iter().map(|s| scale * s / total).collect())
            }
        }
    }

    /// Pulls a logit cotangent back to the raw sums.
    fn pullback(&self, sums: &[f64], dlogits: &[f64]) -> Vec<f64> {
        match *self {
            Readout::Raw => dlogits.to_vec(),
            Readout::Normalized { scale } => {
                let total: f64 = sums.iter().sum();
                let dot: f64 = dlogits.iter().zip(sums).map(|(g, s)| g * s).sum();
                dlogits.iter().map(|g| scale * (g - dot / total) / total).collect()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LossReport {
    pub loss: f64,
    pub softmax_probs: Vec<f64>,
    pub predicted: usize,
}

pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|v| (v - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

fn check(sums: &[f64], target: usize) -> Result<()> {
    if sums.len() < 2 {
        return Err(Error::invalid("loss needs at least two classes"));
    }
    if target >= sums.len() {
        return Err(Error::invalid(format!(
            "target class {target} out of range for {} classes",
            sums.len()
        )));
    }
    if sums.iter().any(|s| !s.is_finite()) {
        return Err(Error::invalid("detector sums must be finite"));
    }
    Ok(())
}

/// Mean squared error between `softmax(sums)` and the one-hot target.
pub fn loss(sums: &[f64], target: usize) -> Result<LossReport> {
    Ok(loss_with_gradient(sums, target, Readout::Raw)?.0)
}

/// Loss and its gradient with respect to the raw detector sums.
pub fn loss_with_gradient(sums: &[f64], target: usize, readout: Readout) -> Result<(LossReport, Vec<f64>)> {
    check(sums, target)?;
    let c = sums.len() as f64;
    let logits = readout.logits(sums)?;
    let probs = softmax(&logits);
    let residual: Vec<f64> = probs
        .iter()
        .enumerate()
        .map(|(i, p)| p - if i == target { 1.0 } else { 0.0 })
        .collect();
    let loss = residual.iter().map(|r| r * r).sum::<f64>() / c;
    // d loss / d p, then through the softmax Jacobian diag(p) - p p^T.
    let dprob: Vec<f64> = residual.iter().map(|r| 2.0 * r / c).collect();
    let mean: f64 = dprob.iter().zip(&probs).map(|(g, p)| g * p).sum();
    let dlogits: Vec<f64> = dprob.iter().zip(&probs).map(|(g, p)| p * (g - mean)).collect();
    let dsums = readout.pullback(sums, &dlogits);
    let report = LossReport {
        loss,
        predicted: argmax(sums),
        softmax_probs: probs,
    };
    Ok((report, dsums))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_sums_seven_classes() {
        for t in 0..7 {
            let r = loss(&[0.4; 7], t).unwrap();
            assert!((r.loss - 6.0 / 49.0).abs() < 1e-15);
            for p in &r.softmax_probs {
                assert!((p - 1.0 / 7.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn saturating_softmax_drives_loss_to_zero() {
        let mut prev = f64::INFINITY;
        for m in [0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 40.0] {
            let l = loss(&[m, 0.0, 0.0], 0).unwrap().loss;
            assert!(l < prev);
            prev = l;
        }
        assert!(prev < 1e-30);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(loss(&[1.0, 2.0], 2).is_err());
        assert!(loss(&[1.0], 0).is_err());
        assert!(loss(&[1.0, f64::NAN], 0).is_err());
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let sums = [0.3, 1.7, -0.4, 0.9];
        for readout in [Readout::Raw, Readout::Normalized { scale: 3.0 }] {
            let sums_pos = [0.3, 1.7, 0.4, 0.9];
            let s: &[f64] = if readout == Readout::Raw { &sums } else { &sums_pos };
            let (_, g) = loss_with_gradient(s, 1, readout).unwrap();
            for j in 0..4 {
                let h = 1e-6;
                let mut up = s.to_vec();
                up[j] += h;
                let mut dn = s.to_vec();
                dn[j] -= h;
                let fd = (loss_with_gradient(&up, 1, readout).unwrap().0.loss
                    - loss_with_gradient(&dn, 1, readout).unwrap().0.loss)
                    / (2.0 * h);
                assert!((fd - g[j]).abs() < 1e-9, "{readout:?} j={j}: {fd} vs {}", g[j]);
            }
        }
    }
}
