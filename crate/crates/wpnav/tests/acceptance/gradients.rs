//! Acceptance criterion 4: every autodiff primitive and the full two-step
//! unrolled training loss match central finite differences.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Instant;
use wpnav::actionspace::ExpressivityConfig;
use wpnav::policy::{Tape, Tensor, Var};
use wpnav::trainer::{gae, ppo_losses, ChainSlice, PPOConfig};

use super::common::small_rollout;

fn rng_tensor(rng: &mut ChaCha8Rng, shape: Vec<usize>, lo: f64, hi: f64) -> Tensor {
    let n: usize = shape.iter().product();
    let data: Vec<f64> = (0..n).map(|_| rng.random_range(lo..hi)).collect();
    Tensor::new(shape, data).unwrap()
}

fn weighted_sum(tape: &mut Tape, out: Var) -> Var {
    let n = tape.value(out).len();
    let w: Vec<f64> = (0..n).map(|i| 0.25 + 0.5 * ((i * 29 % 13) as f64) / 13.0).collect();
    let shape = tape.value(out).shape().to_vec();
    let weights = tape.leaf(Tensor::new(shape, w).unwrap());
    let prod = tape.mul(out, weights).unwrap();
    tape.sum(prod)
}

/// Max relative error of analytic vs central-difference gradients.
fn gradcheck(inputs: &[Tensor], build: &dyn Fn(&mut Tape, &[Var]) -> Var) -> f64 {
    let loss_of = |tensors: &[Tensor]| -> f64 {
        let mut tape = Tape::new();
        let vars: Vec<Var> = tensors.iter().map(|t| tape.leaf(t.clone())).collect();
        let out = build(&mut tape, &vars);
        tape.value(out).item()
    };
    let mut tape = Tape::new();
    let vars: Vec<Var> = inputs.iter().map(|t| tape.leaf(t.clone())).collect();
    let out = build(&mut tape, &vars);
    let grads = tape.backward(out).unwrap();
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for (k, input) in inputs.iter().enumerate() {
        let analytic = grads.of(vars[k], &tape);
        for i in 0..input.len() {
            let mut plus = inputs.to_vec();
            plus[k].data_mut()[i] += h;
            let mut minus = inputs.to_vec();
            minus[k].data_mut()[i] -= h;
            let numeric = (loss_of(&plus) - loss_of(&minus)) / (2.0 * h);
            let a = analytic.data()[i];
            let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1.0);
            worst = worst.max(rel);
        }
    }
    worst
}

#[test]
fn criterion_4_gradient_checks() {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);

    // Primitives, each inside a small composite graph.
    type Build = Box<dyn Fn(&mut Tape, &[Var]) -> Var>;
    let v6 = |rng: &mut ChaCha8Rng| rng_tensor(rng, vec![6], -2.0, 2.0);
    let cases: Vec<(&str, Vec<Tensor>, Build)> = vec![
        (
            "elementwise",
            vec![v6(&mut rng), rng_tensor(&mut rng, vec![6], 0.4, 2.0)],
            Box::new(|t, vs| {
                let a = t.add(vs[0], vs[1]).unwrap();
                let m = t.mul(a, vs[0]).unwrap();
                let d = t.div(m, vs[1]).unwrap();
                let s = t.sub(d, vs[0]).unwrap();
                weighted_sum(t, s)
            }),
        ),
        (
            "activations",
            vec![v6(&mut rng)],
            Box::new(|t, vs| {
                let a = t.tanh(vs[0]);
                let b = t.sigmoid(a);
                let c = t.erf(b);
                let e = t.exp(c);
                let l = t.ln(e);
                weighted_sum(t, l)
            }),
        ),
        (
            "matmul",
            vec![
                rng_tensor(&mut rng, vec![3, 4], -1.0, 1.0),
                rng_tensor(&mut rng, vec![4, 2], -1.0, 1.0),
            ],
            Box::new(|t, vs| {
                let y = t.matmul(vs[0], vs[1]).unwrap();
                weighted_sum(t, y)
            }),
        ),
        (
            "matvec_both",
            vec![rng_tensor(&mut rng, vec![4, 6], -1.0, 1.0), v6(&mut rng)],
            Box::new(|t, vs| {
                let y = t.matvec(vs[0], vs[1]).unwrap();
                let z = t.matvec_t(vs[0], y).unwrap();
                weighted_sum(t, z)
            }),
        ),
        (
            "softmax_logsoftmax",
            vec![v6(&mut rng)],
            Box::new(|t, vs| {
                let s = t.softmax(vs[0]).unwrap();
                let ls = t.log_softmax(vs[0]).unwrap();
                let d = t.dot(s, ls).unwrap();
                t.neg(d)
            }),
        ),
        (
            "structure_ops",
            vec![v6(&mut rng), v6(&mut rng)],
            Box::new(|t, vs| {
                let m = t.stack_rows(&[vs[0], vs[1]]).unwrap();
                let pooled = t.mean_rows(m).unwrap();
                let row = t.row(m, 1).unwrap();
                let cat = t.concat(&[pooled, row]).unwrap();
                let sl = t.slice(cat, 2, 8).unwrap();
                let idx = t.index(sl, 3).unwrap();
                let ws = weighted_sum(t, sl);
                let sum = t.add(ws, idx).unwrap();
                t.mean(sum)
            }),
        ),
        (
            "clamps_min_max_abs",
            vec![
                rng_tensor(&mut rng, vec![6], -0.9, -0.2),
                rng_tensor(&mut rng, vec![6], 0.2, 0.9),
            ],
            Box::new(|t, vs| {
                let c = t.clamp(vs[0], -1.0, 1.0);
                let cm = t.clamp_min(vs[1], -2.0);
                let mn = t.min_elem(c, cm).unwrap();
                let mx = t.max_elem(c, cm).unwrap();
                let a = t.abs(mn);
                let s = t.add(a, mx).unwrap();
                weighted_sum(t, s)
            }),
        ),
        (
            "embed_rows",
            vec![rng_tensor(&mut rng, vec![5, 4], -1.0, 1.0)],
            Box::new(|t, vs| {
                let e = t.embed_rows(vs[0], &[0, 2, 2, 4]).unwrap();
                weighted_sum(t, e)
            }),
        ),
    ];
    for (name, inputs, build) in &cases {
        let worst = gradcheck(inputs, build.as_ref());
        assert!(worst < 1e-4, "{name}: max relative error {worst}");
    }

    // End-to-end: d(total PPO loss)/d(params) through a 2-step unrolled chain
    // with the clipped objective, clipped value loss, decomposed entropy, and
    // the offset regularizer, against central finite differences.
    let (mut policy, mut buffer, _) = small_rollout(ExpressivityConfig::wpn(), 1, 2, 40);
    for tr in &mut buffer.per_env[0] {
        tr.logprob += 0.05; // move off the clipped-min tie at ratio = 1
    }
    let ppo = PPOConfig::desk();
    let chain = &buffer.per_env[0];
    let rewards: Vec<f64> = chain.iter().map(|t| t.reward).collect();
    let values: Vec<f64> = chain.iter().map(|t| t.value).collect();
    let dones: Vec<bool> = chain.iter().map(|t| t.done).collect();
    let (advantages, returns) =
        gae(&rewards, &values, &dones, buffer.bootstrap[0], ppo.gamma, ppo.tau).unwrap();
    let minibatch =
        vec![ChainSlice { transitions: chain, advantages: &advantages, returns: &returns }];
    let (_, grads) = ppo_losses(&policy, &minibatch, &ppo).unwrap();

    let h = 1e-5;
    let names: Vec<String> = policy.params.iter().map(|(n, _)| n.to_string()).collect();
    let mut worst: f64 = 0.0;
    for (pi, name) in names.iter().enumerate() {
        let tensor = policy.params.get(name).unwrap().as_ref().clone();
        let stride = (tensor.len() / 4).max(1);
        for j in (0..tensor.len()).step_by(stride) {
            let mut probe = |delta: f64| -> f64 {
                let mut t = tensor.clone();
                t.data_mut()[j] += delta;
                *policy.params.tensor_mut(pi) = t;
                ppo_losses(&policy, &minibatch, &ppo).unwrap().0.total
            };
            let plus = probe(h);
            let minus = probe(-h);
            *policy.params.tensor_mut(pi) = tensor.clone();
            let numeric = (plus - minus) / (2.0 * h);
            let analytic = grads[pi].data()[j];
            let rel = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1.0);
            worst = worst.max(rel);
        }
    }
    assert!(worst < 1e-3, "end-to-end gradient error {worst}");

    println!(
        "PASS criterion 4: primitive gradchecks < 1e-4 and 2-step end-to-end loss < 1e-3 ({:.2}s)",
        t0.elapsed().as_secs_f64()
    );
}
