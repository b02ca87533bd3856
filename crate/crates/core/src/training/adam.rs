use super::fit::HyperParams;
use crate::network::{NetworkConfig, OptimizerMoments};
use crate::{Error, Result};

/// Adam with bias correction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Adam {
    /// Applies update number `t` (1-based) to one parameter array.
    pub fn update(&self, t: u64, theta: &mut [f64], m: &mut [f64], v: &mut [f64], g: &[f64]) {
        let bc1 = 1.0 - self.beta1.powf(t as f64);
        let bc2 = 1.0 - self.beta2.powf(t as f64);
        for i in 0..theta.len() {
            m[i] = self.beta1 * m[i] + (1.0 - self.beta1) * g[i];
            v[i] = self.beta2 * v[i] + (1.0 - self.beta2) * g[i] * g[i];
            let m_hat = m[i] / bc1;
            let v_hat = v[i] / bc2;
            theta[i] -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
        }
    }
}

/// Everything needed to continue training.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainState {
    /// Phase arrays, one per layer.
    pub masks: Vec<Vec<f64>>,
    pub moments: OptimizerMoments,
    /// Number of optimizer updates applied so far.
    pub steps: u64,
    pub epoch: usize,
    pub rng_seed: u64,
    pub hyper: HyperParams,
}

impl TrainState {
    pub fn new(config: &NetworkConfig, rng_seed: u64, hyper: HyperParams) -> Result<Self> {
        hyper.validate()?;
        let masks: Vec<Vec<f64>> = config.masks.iter().map(|m| m.theta().to_vec()).collect();
        let zeros: Vec<Vec<f64>> = masks.iter().map(|m| vec![0.0; m.len()]).collect();
        Ok(TrainState {
            moments: OptimizerMoments {
                first: zeros.clone(),
                second: zeros,
            },
            masks,
            steps: 0,
            epoch: 0,
            rng_seed,
            hyper,
        })
    }

    pub fn adam(&self) -> Adam {
        Adam {
            lr: self.hyper.lr,
            beta1: self.hyper.beta1,
            beta2: self.hyper.beta2,
            eps: self.hyper.adam_eps,
        }
    }
}

/// One Adam update of every mask.
pub fn step(state: &mut TrainState, gradients: &[Vec<f64>]) -> Result<()> {
    let shapes_match =
        gradients.len() == state.masks.len() && gradients.iter().zip(&state.masks).all(|(g, m)| g.len() == m.len());
    if !shapes_match {
        return Err(Error::invalid("gradient shapes do not match the masks"));
    }
    let adam = state.adam();
    state.steps += 1;
    let t = state.steps;
    for (i, g) in gradients.iter().enumerate() {
        adam.update(
            t,
            &mut state.masks[i],
            &mut state.moments.first[i],
            &mut state.moments.second[i],
            g,
        );
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_state(lr: f64) -> TrainState {
        TrainState {
            masks: vec![vec![0.5]],
            moments: OptimizerMoments {
                first: vec![vec![0.0]],
                second: vec![vec![0.0]],
            },
            steps: 0,
            epoch: 0,
            rng_seed: 0,
            hyper: HyperParams {
                lr,
                ..HyperParams::default()
            },
        }
    }

    #[test]
    fn first_step_matches_hand_computed_adam() {
        let mut s = scalar_state(0.01);
        step(&mut s, &[vec![1.0]]).unwrap();
        // m = 0.1, v = 0.001; m_hat = 1, v_hat = 1; step = lr / (1 + eps)
        let expected = 0.5 - 0.01 / (1.0 + 1e-8);
        assert!((s.masks[0][0] - expected).abs() < 1e-15);
        assert!((s.moments.first[0][0] - 0.1).abs() < 1e-15);
        assert!((s.moments.second[0][0] - 0.001).abs() < 1e-15);
        // second step with the same gradient: m_hat and v_hat stay exactly 1
        step(&mut s, &[vec![1.0]]).unwrap();
        assert!((s.masks[0][0] - (expected - 0.01 / (1.0 + 1e-8))).abs() < 1e-14);
    }

    #[test]
    fn zero_learning_rate_keeps_theta() {
        let mut s = scalar_state(0.0);
        step(&mut s, &[vec![3.0]]).unwrap();
        assert_eq!(s.masks[0][0], 0.5);
        assert!(s.moments.first[0][0] != 0.0);
    }

    #[test]
    fn zero_gradient_keeps_theta() {
        let mut s = scalar_state(0.1);
        step(&mut s, &[vec![0.0]]).unwrap();
        assert_eq!(s.masks[0][0], 0.5);
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let mut s = scalar_state(0.1);
        assert!(step(&mut s, &[vec![0.0, 1.0]]).is_err());
        assert!(step(&mut s, &[]).is_err());
    }
}
