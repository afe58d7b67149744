//! Reproducible uniform sampling of initial states in a centered ball.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::model::NetworkState;

/// Draws points uniformly from the ball of radius `radius` in ℝ^dim via
/// direction × radius·u^{1/dim}. The stream for a seed is fixed, so the
/// first k draws do not depend on how many are drawn afterwards.
#[derive(Debug, Clone)]
pub struct BallSampler {
    rng: ChaCha8Rng,
    seed: u64,
}

impl BallSampler {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            seed,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn point(&mut self, dim: usize, radius: f64) -> Vec<f64> {
        let mut x: Vec<f64> = (0..dim).map(|_| self.rng.sample(StandardNormal)).collect();
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let u: f64 = self.rng.gen();
        let scale = if norm > 0.0 {
            radius * u.powf(1.0 / dim as f64) / norm
        } else {
            0.0
        };
        x.iter_mut().for_each(|v| *v *= scale);
        x
    }

    /// Network state for `n` neurons (plus ρ when `memristive`).
    pub fn state(&mut self, n: usize, memristive: bool, radius: f64) -> NetworkState {
        let dim = 2 * n + usize::from(memristive);
        let y = self.point(dim, radius);
        NetworkState::from_flat(&y, n, memristive).expect("dimension constructed above")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn points_stay_in_ball_and_are_reproducible() {
        let mut a = BallSampler::new(7);
        let mut b = BallSampler::new(7);
        for _ in 0..200 {
            let p = a.point(5, 3.0);
            assert!(p.iter().map(|x| x * x).sum::<f64>() <= 9.0 + 1e-12);
            assert_eq!(p, b.point(5, 3.0));
        }
    }

    #[test]
    fn radius_distribution_is_uniform_in_volume() {
        // P(|x| ≤ r/2) = 2^{-dim}
        let mut s = BallSampler::new(1);
        let dim = 2;
        let draws = 20_000;
        let inside = (0..draws)
            .filter(|_| s.point(dim, 1.0).iter().map(|x| x * x).sum::<f64>() <= 0.25)
            .count();
        let frac = inside as f64 / draws as f64;
        assert!((frac - 0.25).abs() < 0.02, "{frac}");
    }

    #[test]
    fn state_layout() {
        let st = BallSampler::new(3).state(3, true, 1.0);
        assert_eq!(st.v.len(), 3);
        assert_eq!(st.r.len(), 3);
        assert!(st.rho.is_some());
    }
}
