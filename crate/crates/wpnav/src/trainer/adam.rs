//! Adam optimizer with global-norm gradient clipping.

use crate::policy::{ParamSet, Tensor};

pub struct Adam {
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    t: u64,
    m: Vec<Tensor>,
    v: Vec<Tensor>,
}

impl Adam {
    pub fn new(params: &ParamSet, lr: f64, eps: f64) -> Self {
        let zeros: Vec<Tensor> =
            params.iter().map(|(_, t)| Tensor::zeros(t.shape().to_vec())).collect();
        Adam { lr, beta1: 0.9, beta2: 0.999, eps, t: 0, m: zeros.clone(), v: zeros }
    }

    /// One bias-corrected update step.
    pub fn step(&mut self, params: &mut ParamSet, grads: &[Tensor]) {
        self.t += 1;
        let bc1 = 1.0 - self.beta1.powi(self.t as i32);
        let bc2 = 1.0 - self.beta2.powi(self.t as i32);
        for i in 0..grads.len() {
            let g = grads[i].data();
            let m = self.m[i].data_mut();
            let v = self.v[i].data_mut();
            let p = params.tensor_mut(i).data_mut();
            for j in 0..g.len() {
                m[j] = self.beta1 * m[j] + (1.0 - self.beta1) * g[j];
                v[j] = self.beta2 * v[j] + (1.0 - self.beta2) * g[j] * g[j];
                let m_hat = m[j] / bc1;
                let v_hat = v[j] / bc2;
                p[j] -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
            }
        }
    }
}

/// Scale gradients so their global L2 norm does not exceed `max_norm`;
/// returns the pre-clip norm.
pub fn clip_global_norm(grads: &mut [Tensor], max_norm: f64) -> f64 {
    let norm: f64 = grads
        .iter()
        .map(|g| g.iter().map(|x| x * x).sum::<f64>())
        .sum::<f64>()
        .sqrt();
    if norm > max_norm && norm > 0.0 {
        let scale = max_norm / norm;
        for g in grads.iter_mut() {
            for x in g.data_mut() {
                *x *= scale;
            }
        }
    }
    norm
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn adam_descends_a_quadratic() {
        // Minimize f(x) = x², gradient 2x.
        let mut params = ParamSet::default();
        params.insert("x", Tensor::vector(vec![3.0]));
        let mut adam = Adam::new(&params, 0.1, 1e-8);
        for _ in 0..200 {
            let x = params.get("x").unwrap().data()[0];
            let grads = vec![Tensor::vector(vec![2.0 * x])];
            adam.step(&mut params, &grads);
        }
        assert!(params.get("x").unwrap().data()[0].abs() < 0.05);
    }

    #[test]
    fn clipping_bounds_the_global_norm() {
        let mut grads = vec![Tensor::vector(vec![3.0, 4.0]), Tensor::vector(vec![12.0])];
        let norm = clip_global_norm(&mut grads, 0.2);
        assert_abs_diff_eq!(norm, 13.0, epsilon = 1e-12);
        let after: f64 = grads
            .iter()
            .map(|g| g.iter().map(|x| x * x).sum::<f64>())
            .sum::<f64>()
            .sqrt();
        assert!(after <= 0.2 + 1e-12);
        // Small gradients pass through untouched.
        let mut small = vec![Tensor::vector(vec![0.01])];
        clip_global_norm(&mut small, 0.2);
        assert_eq!(small[0].data()[0], 0.01);
    }
}
