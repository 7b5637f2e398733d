//! Finite categorical distribution.

use crate::error::{Error, Result};
use rand::Rng;

#[derive(Debug, Clone, PartialEq)]
pub struct Categorical {
    probs: Vec<f64>,
    /// Log-probabilities in log-softmax form when built from logits; keeps
    /// sampled-action scores bit-identical with the training tape's replay.
    log_probs: Option<Vec<f64>>,
}

impl Categorical {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidArgument("empty categorical".into()));
        }
        if probs.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
            return Err(Error::NonFinite("categorical probabilities"));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!("probabilities sum to {sum}")));
        }
        Ok(Categorical { probs, log_probs: None })
    }

    pub fn uniform(n: usize) -> Self {
        Categorical { probs: vec![1.0 / n as f64; n], log_probs: None }
    }

    pub fn from_logits(logits: &[f64]) -> Result<Self> {
        if logits.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("categorical logits"));
        }
        let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = logits.iter().map(|&x| (x - max).exp()).collect();
        let sum: f64 = exps.iter().sum();
        let lse = sum.ln() + max;
        let log_probs: Vec<f64> = logits.iter().map(|&x| x - lse).collect();
        Ok(Categorical {
            probs: exps.into_iter().map(|e| e / sum).collect(),
            log_probs: Some(log_probs),
        })
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn prob(&self, i: usize) -> f64 {
        self.probs[i]
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn logprob(&self, i: usize) -> f64 {
        if let Some(lp) = &self.log_probs {
            return lp[i];
        }
        let p = self.probs[i];
        if p > 0.0 {
            p.ln()
        } else {
            f64::NEG_INFINITY
        }
    }

    pub fn entropy(&self) -> f64 {
        if let Some(lp) = &self.log_probs {
            // −⟨p, log p⟩ in index order; underflowed probs contribute 0.
            return -self.probs.iter().zip(lp).map(|(&p, &l)| p * l).sum::<f64>();
        }
        -self.probs.iter().filter(|&&p| p > 0.0).map(|&p| p * p.ln()).sum::<f64>()
    }

    /// CDF-walk sample; consumes one uniform.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (i, &p) in self.probs.iter().enumerate() {
            acc += p;
            if u < acc {
                return i;
            }
        }
        self.probs.len() - 1
    }

    /// Index of the largest probability; ties resolve to the lowest index.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &p) in self.probs.iter().enumerate().skip(1) {
            if p > self.probs[best] {
                best = i;
            }
        }
        best
    }
}
