//! Adam, gradient-norm clipping and running observation normalization.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub t: u64,
    pub m: Vec<f64>,
    pub v: Vec<f64>,
}

impl Adam {
    pub fn new(n: usize, lr: f64) -> Self {
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            t: 0,
            m: vec![0.0; n],
            v: vec![0.0; n],
        }
    }

    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        assert_eq!(params.len(), self.m.len());
        self.t += 1;
        let c1 = 1.0 - self.beta1.powi(self.t as i32);
        let c2 = 1.0 - self.beta2.powi(self.t as i32);
        for i in 0..params.len() {
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * grad[i];
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * grad[i] * grad[i];
            params[i] -= self.lr * (self.m[i] / c1) / ((self.v[i] / c2).sqrt() + self.eps);
        }
    }
}

/// Rescales `grads` jointly so their global L2 norm is at most `max_norm`.
/// Returns the norm before clipping.
pub fn clip_grad_norm(grads: &mut [&mut [f64]], max_norm: f64) -> f64 {
    let norm = grads.iter().flat_map(|g| g.iter()).map(|x| x * x).sum::<f64>().sqrt();
    if max_norm > 0.0 && norm > max_norm {
        let s = max_norm / norm;
        for g in grads.iter_mut() {
            for x in g.iter_mut() {
                *x *= s;
            }
        }
    }
    norm
}

pub const OBS_CLIP: f64 = 10.0;

/// Per-dimension running mean and variance (parallel Welford merge).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunningNorm {
    pub count: f64,
    pub mean: Vec<f64>,
    /// Sum of squared deviations.
    pub m2: Vec<f64>,
}

impl RunningNorm {
    pub fn new(dim: usize) -> Self {
        Self {
            count: 0.0,
            mean: vec![0.0; dim],
            m2: vec![0.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn update(&mut self, rows: &[Vec<f64>]) {
        if rows.is_empty() {
            return;
        }
        let n = rows.len() as f64;
        let d = self.dim();
        let mut bmean = vec![0.0; d];
        for r in rows {
            for (m, x) in bmean.iter_mut().zip(r) {
                *m += x;
            }
        }
        bmean.iter_mut().for_each(|m| *m /= n);
        let mut bm2 = vec![0.0; d];
        for r in rows {
            for i in 0..d {
                let e = r[i] - bmean[i];
                bm2[i] += e * e;
            }
        }
        let total = self.count + n;
        for i in 0..d {
            let delta = bmean[i] - self.mean[i];
            self.mean[i] += delta * n / total;
            self.m2[i] += bm2[i] + delta * delta * self.count * n / total;
        }
        self.count = total;
    }

    pub fn variance(&self, i: usize) -> f64 {
        if self.count > 1.0 {
            self.m2[i] / self.count
        } else {
            1.0
        }
    }

    pub fn normalize(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .enumerate()
            .map(|(i, &v)| ((v - self.mean[i]) / (self.variance(i) + 1e-8).sqrt()).clamp(-OBS_CLIP, OBS_CLIP))
            .collect()
    }
}
