//! Minimal reverse-mode automatic differentiation on a tape.
//!
//! Every primitive computes its forward value eagerly and records enough to
//! run an exact analytic backward pass in reverse order. All values are f64;
//! the gradient-check suite compares each primitive against central finite
//! differences.

use super::tensor::Tensor;
use crate::error::{Error, Result};
use statrs::function::erf::erf;
use std::sync::Arc;

/// Handle to a tape node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Var(usize);

#[derive(Debug, Clone)]
enum Op {
    Leaf,
    Add(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    Div(Var, Var),
    Neg(Var),
    Exp(Var),
    Ln(Var),
    Tanh(Var),
    Sigmoid(Var),
    Erf(Var),
    Abs(Var),
    Scale(Var, f64),
    AddConst(Var),
    Matmul(Var, Var),
    Matvec(Var, Var),
    MatvecT(Var, Var),
    Dot(Var, Var),
    Concat(Vec<Var>),
    StackRows(Vec<Var>),
    Row(Var, usize),
    Index(Var, usize),
    Slice(Var, usize, usize),
    Sum(Var),
    Mean(Var),
    MeanRows(Var),
    Softmax(Var),
    LogSoftmax(Var),
    ClampMin(Var, f64),
    Clamp(Var, f64, f64),
    MinElem(Var, Var),
    MaxElem(Var, Var),
    EmbedRows(Var, Vec<usize>),
}

struct Node {
    op: Op,
    value: Arc<Tensor>,
}

/// Gradients of one backward pass, indexed by `Var`.
pub struct Grads {
    grads: Vec<Option<Tensor>>,
}

impl Grads {
    /// Gradient of the loss with respect to `v` (zeros if unreachable).
    pub fn of(&self, v: Var, shape_of: &Tape) -> Tensor {
        match &self.grads[v.0] {
            Some(g) => g.clone(),
            None => Tensor::zeros(shape_of.value(v).shape().to_vec()),
        }
    }
}

#[derive(Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

impl Tape {
    pub fn new() -> Self {
        Tape { nodes: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    fn push(&mut self, op: Op, value: Tensor) -> Var {
        self.nodes.push(Node { op, value: Arc::new(value) });
        Var(self.nodes.len() - 1)
    }

    /// Record an input (parameter or constant).
    pub fn leaf(&mut self, value: Tensor) -> Var {
        self.push(Op::Leaf, value)
    }

    /// Record a shared input without copying its data (parameters).
    pub fn leaf_shared(&mut self, value: &Arc<Tensor>) -> Var {
        self.nodes.push(Node { op: Op::Leaf, value: Arc::clone(value) });
        Var(self.nodes.len() - 1)
    }

    pub fn scalar(&mut self, x: f64) -> Var {
        self.leaf(Tensor::scalar(x))
    }

    fn same_shape(&self, op: &'static str, a: Var, b: Var) -> Result<()> {
        if self.value(a).shape() != self.value(b).shape() {
            return Err(Error::ShapeMismatch {
                op,
                detail: format!("{:?} vs {:?}", self.value(a).shape(), self.value(b).shape()),
            });
        }
        Ok(())
    }

    fn map2(&mut self, op: Op, a: Var, b: Var, f: impl Fn(f64, f64) -> f64) -> Var {
        let data: Vec<f64> = self
            .value(a)
            .iter()
            .zip(self.value(b).iter())
            .map(|(&x, &y)| f(x, y))
            .collect();
        let shape = self.value(a).shape().to_vec();
        self.push(op, Tensor::new(shape, data).expect("shape checked"))
    }

    fn map1(&mut self, op: Op, a: Var, f: impl Fn(f64) -> f64) -> Var {
        let data: Vec<f64> = self.value(a).iter().map(|&x| f(x)).collect();
        let shape = self.value(a).shape().to_vec();
        self.push(op, Tensor::new(shape, data).expect("shape checked"))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        self.same_shape("add", a, b)?;
        Ok(self.map2(Op::Add(a, b), a, b, |x, y| x + y))
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        self.same_shape("sub", a, b)?;
        Ok(self.map2(Op::Sub(a, b), a, b, |x, y| x - y))
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        self.same_shape("mul", a, b)?;
        Ok(self.map2(Op::Mul(a, b), a, b, |x, y| x * y))
    }

    pub fn div(&mut self, a: Var, b: Var) -> Result<Var> {
        self.same_shape("div", a, b)?;
        Ok(self.map2(Op::Div(a, b), a, b, |x, y| x / y))
    }

    pub fn neg(&mut self, a: Var) -> Var {
        self.map1(Op::Neg(a), a, |x| -x)
    }

    pub fn exp(&mut self, a: Var) -> Var {
        self.map1(Op::Exp(a), a, f64::exp)
    }

    pub fn ln(&mut self, a: Var) -> Var {
        self.map1(Op::Ln(a), a, f64::ln)
    }

    pub fn tanh(&mut self, a: Var) -> Var {
        self.map1(Op::Tanh(a), a, f64::tanh)
    }

    pub fn sigmoid(&mut self, a: Var) -> Var {
        self.map1(Op::Sigmoid(a), a, |x| {
            if x >= 0.0 {
                1.0 / (1.0 + (-x).exp())
            } else {
                let e = x.exp();
                e / (1.0 + e)
            }
        })
    }

    pub fn erf(&mut self, a: Var) -> Var {
        self.map1(Op::Erf(a), a, erf)
    }

    pub fn abs(&mut self, a: Var) -> Var {
        self.map1(Op::Abs(a), a, f64::abs)
    }

    pub fn scale(&mut self, a: Var, c: f64) -> Var {
        self.map1(Op::Scale(a, c), a, |x| c * x)
    }

    pub fn add_const(&mut self, a: Var, c: f64) -> Var {
        self.map1(Op::AddConst(a), a, |x| x + c)
    }

    pub fn clamp_min(&mut self, a: Var, lo: f64) -> Var {
        self.map1(Op::ClampMin(a, lo), a, |x| x.max(lo))
    }

    pub fn clamp(&mut self, a: Var, lo: f64, hi: f64) -> Var {
        self.map1(Op::Clamp(a, lo, hi), a, |x| x.clamp(lo, hi))
    }

    pub fn min_elem(&mut self, a: Var, b: Var) -> Result<Var> {
        self.same_shape("min_elem", a, b)?;
        Ok(self.map2(Op::MinElem(a, b), a, b, f64::min))
    }

    pub fn max_elem(&mut self, a: Var, b: Var) -> Result<Var> {
        self.same_shape("max_elem", a, b)?;
        Ok(self.map2(Op::MaxElem(a, b), a, b, f64::max))
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let (ta, tb) = (self.value(a), self.value(b));
        if !ta.is_matrix() || !tb.is_matrix() || ta.cols() != tb.rows() {
            return Err(Error::ShapeMismatch {
                op: "matmul",
                detail: format!("{:?} x {:?}", ta.shape(), tb.shape()),
            });
        }
        let (r, k, c) = (ta.rows(), ta.cols(), tb.cols());
        let mut data = vec![0.0; r * c];
        for i in 0..r {
            for l in 0..k {
                let av = ta.at(i, l);
                for j in 0..c {
                    data[i * c + j] += av * tb.at(l, j);
                }
            }
        }
        let value = Tensor::matrix(r, c, data)?;
        Ok(self.push(Op::Matmul(a, b), value))
    }

    /// `m · v` for `m: [r, c]`, `v: [c]`.
    pub fn matvec(&mut self, m: Var, v: Var) -> Result<Var> {
        let (tm, tv) = (self.value(m), self.value(v));
        if !tm.is_matrix() || !tv.is_vector() || tm.cols() != tv.len() {
            return Err(Error::ShapeMismatch {
                op: "matvec",
                detail: format!("{:?} x {:?}", tm.shape(), tv.shape()),
            });
        }
        let (r, c) = (tm.rows(), tm.cols());
        let mut data = vec![0.0; r];
        for i in 0..r {
            let mut acc = 0.0;
            for j in 0..c {
                acc += tm.at(i, j) * tv.data()[j];
            }
            data[i] = acc;
        }
        Ok(self.push(Op::Matvec(m, v), Tensor::vector(data)))
    }

    /// `mᵀ · v` for `m: [r, c]`, `v: [r]`.
    pub fn matvec_t(&mut self, m: Var, v: Var) -> Result<Var> {
        let (tm, tv) = (self.value(m), self.value(v));
        if !tm.is_matrix() || !tv.is_vector() || tm.rows() != tv.len() {
            return Err(Error::ShapeMismatch {
                op: "matvec_t",
                detail: format!("{:?}ᵀ x {:?}", tm.shape(), tv.shape()),
            });
        }
        let (r, c) = (tm.rows(), tm.cols());
        let mut data = vec![0.0; c];
        for i in 0..r {
            let vi = tv.data()[i];
            for j in 0..c {
                data[j] += tm.at(i, j) * vi;
            }
        }
        Ok(self.push(Op::MatvecT(m, v), Tensor::vector(data)))
    }

    pub fn dot(&mut self, a: Var, b: Var) -> Result<Var> {
        self.same_shape("dot", a, b)?;
        let acc: f64 = self.value(a).iter().zip(self.value(b).iter()).map(|(&x, &y)| x * y).sum();
        Ok(self.push(Op::Dot(a, b), Tensor::scalar(acc)))
    }

    /// Concatenate vectors (scalars count as length-1 vectors).
    pub fn concat(&mut self, parts: &[Var]) -> Result<Var> {
        if parts.is_empty() {
            return Err(Error::ShapeMismatch { op: "concat", detail: "no inputs".into() });
        }
        let mut data = Vec::new();
        for &p in parts {
            data.extend_from_slice(self.value(p).data());
        }
        Ok(self.push(Op::Concat(parts.to_vec()), Tensor::vector(data)))
    }

    /// Stack equal-length vectors as matrix rows.
    pub fn stack_rows(&mut self, rows: &[Var]) -> Result<Var> {
        if rows.is_empty() {
            return Err(Error::ShapeMismatch { op: "stack_rows", detail: "no rows".into() });
        }
        let cols = self.value(rows[0]).len();
        let mut data = Vec::with_capacity(rows.len() * cols);
        for &r in rows {
            if self.value(r).len() != cols || !self.value(r).is_vector() {
                return Err(Error::ShapeMismatch {
                    op: "stack_rows",
                    detail: "rows must be equal-length vectors".into(),
                });
            }
            data.extend_from_slice(self.value(r).data());
        }
        let value = Tensor::matrix(rows.len(), cols, data)?;
        Ok(self.push(Op::StackRows(rows.to_vec()), value))
    }

    pub fn row(&mut self, m: Var, i: usize) -> Result<Var> {
        let tm = self.value(m);
        if !tm.is_matrix() || i >= tm.rows() {
            return Err(Error::ShapeMismatch {
                op: "row",
                detail: format!("row {i} of {:?}", tm.shape()),
            });
        }
        let c = tm.cols();
        let data = tm.data()[i * c..(i + 1) * c].to_vec();
        Ok(self.push(Op::Row(m, i), Tensor::vector(data)))
    }

    pub fn index(&mut self, v: Var, i: usize) -> Result<Var> {
        let tv = self.value(v);
        if i >= tv.len() {
            return Err(Error::ShapeMismatch {
                op: "index",
                detail: format!("index {i} of {:?}", tv.shape()),
            });
        }
        let x = tv.data()[i];
        Ok(self.push(Op::Index(v, i), Tensor::scalar(x)))
    }

    pub fn slice(&mut self, v: Var, start: usize, len: usize) -> Result<Var> {
        let tv = self.value(v);
        if !tv.is_vector() || start + len > tv.len() {
            return Err(Error::ShapeMismatch {
                op: "slice",
                detail: format!("[{start}, {start}+{len}) of {:?}", tv.shape()),
            });
        }
        let data = tv.data()[start..start + len].to_vec();
        Ok(self.push(Op::Slice(v, start, len), Tensor::vector(data)))
    }

    pub fn sum(&mut self, v: Var) -> Var {
        let s: f64 = self.value(v).iter().sum();
        self.push(Op::Sum(v), Tensor::scalar(s))
    }

    pub fn mean(&mut self, v: Var) -> Var {
        let n = self.value(v).len() as f64;
        let s: f64 = self.value(v).iter().sum();
        self.push(Op::Mean(v), Tensor::scalar(s / n))
    }

    /// Mean over matrix rows: `[r, c] -> [c]` (the pooling used over sector
    /// features and token embeddings).
    pub fn mean_rows(&mut self, m: Var) -> Result<Var> {
        let tm = self.value(m);
        if !tm.is_matrix() {
            return Err(Error::ShapeMismatch {
                op: "mean_rows",
                detail: format!("{:?}", tm.shape()),
            });
        }
        let (r, c) = (tm.rows(), tm.cols());
        let mut data = vec![0.0; c];
        for i in 0..r {
            for j in 0..c {
                data[j] += tm.at(i, j);
            }
        }
        for d in &mut data {
            *d /= r as f64;
        }
        Ok(self.push(Op::MeanRows(m), Tensor::vector(data)))
    }

    pub fn softmax(&mut self, v: Var) -> Result<Var> {
        let tv = self.value(v);
        if !tv.is_vector() || tv.is_empty() {
            return Err(Error::ShapeMismatch {
                op: "softmax",
                detail: format!("{:?}", tv.shape()),
            });
        }
        let max = tv.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = tv.iter().map(|&x| (x - max).exp()).collect();
        let sum: f64 = exps.iter().sum();
        let data: Vec<f64> = exps.into_iter().map(|e| e / sum).collect();
        Ok(self.push(Op::Softmax(v), Tensor::vector(data)))
    }

    pub fn log_softmax(&mut self, v: Var) -> Result<Var> {
        let tv = self.value(v);
        if !tv.is_vector() || tv.is_empty() {
            return Err(Error::ShapeMismatch {
                op: "log_softmax",
                detail: format!("{:?}", tv.shape()),
            });
        }
        let max = tv.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lse = tv.iter().map(|&x| (x - max).exp()).sum::<f64>().ln() + max;
        let data: Vec<f64> = tv.iter().map(|&x| x - lse).collect();
        Ok(self.push(Op::LogSoftmax(v), Tensor::vector(data)))
    }

    /// Gather rows of an embedding table: `[v, e]` + ids -> `[n, e]`.
    pub fn embed_rows(&mut self, table: Var, ids: &[usize]) -> Result<Var> {
        let tt = self.value(table);
        if !tt.is_matrix() {
            return Err(Error::ShapeMismatch {
                op: "embed_rows",
                detail: format!("{:?}", tt.shape()),
            });
        }
        if ids.is_empty() {
            return Err(Error::ShapeMismatch { op: "embed_rows", detail: "no ids".into() });
        }
        let e = tt.cols();
        let mut data = Vec::with_capacity(ids.len() * e);
        for &id in ids {
            if id >= tt.rows() {
                return Err(Error::ShapeMismatch {
                    op: "embed_rows",
                    detail: format!("id {id} out of {} rows", tt.rows()),
                });
            }
            data.extend_from_slice(&tt.data()[id * e..(id + 1) * e]);
        }
        let value = Tensor::matrix(ids.len(), e, data)?;
        Ok(self.push(Op::EmbedRows(table, ids.to_vec()), value))
    }

    /// Reverse pass from a scalar loss; returns per-node gradients.
    pub fn backward(&self, loss: Var) -> Result<Grads> {
        if self.value(loss).len() != 1 {
            return Err(Error::ShapeMismatch {
                op: "backward",
                detail: "loss must be a scalar".into(),
            });
        }
        let mut grads: Vec<Option<Tensor>> = (0..self.nodes.len()).map(|_| None).collect();
        grads[loss.0] = Some(Tensor::scalar(1.0));

        for i in (0..self.nodes.len()).rev() {
            let g = match grads[i].take() {
                Some(g) => g,
                None => continue,
            };
            self.accumulate(i, &g, &mut grads);
            grads[i] = Some(g);
        }
        Ok(Grads { grads })
    }

    fn accumulate(&self, node: usize, g: &Tensor, grads: &mut [Option<Tensor>]) {
        let add_to = |grads: &mut [Option<Tensor>], v: Var, update: &dyn Fn(&mut Tensor)| {
            let entry = grads[v.0]
                .get_or_insert_with(|| Tensor::zeros(self.value(v).shape().to_vec()));
            update(entry);
        };
        let value = |v: Var| self.value(v);
        let out = &self.nodes[node].value;

        match &self.nodes[node].op {
            Op::Leaf => {}
            Op::Add(a, b) => {
                add_to(grads, *a, &|t| elementwise_add(t, g.data(), 1.0));
                add_to(grads, *b, &|t| elementwise_add(t, g.data(), 1.0));
            }
            Op::Sub(a, b) => {
                add_to(grads, *a, &|t| elementwise_add(t, g.data(), 1.0));
                add_to(grads, *b, &|t| elementwise_add(t, g.data(), -1.0));
            }
            Op::Mul(a, b) => {
                let (va, vb) = (value(*a).data().to_vec(), value(*b).data().to_vec());
                add_to(grads, *a, &|t| {
                    for (i, d) in t.data_mut().iter_mut().enumerate() {
                        *d += g.data()[i] * vb[i];
                    }
                });
                add_to(grads, *b, &|t| {
                    for (i, d) in t.data_mut().iter_mut().enumerate() {
                        *d += g.data()[i] * va[i];
                    }
                });
            }
            Op::Div(a, b) => {
                let (va, vb) = (value(*a).data().to_vec(), value(*b).data().to_vec());
                add_to(grads, *a, &|t| {
                    for (i, d) in t.data_mut().iter_mut().enumerate() {
                        *d += g.data()[i] / vb[i];
                    }
                });
                add_to(grads, *b, &|t| {
                    for (i, d) in t.data_mut().iter_mut().enumerate() {
                        *d -= g.data()[i] * va[i] / (vb[i] * vb[i]);
                    }
                });
            }
            Op::Neg(a) => add_to(grads, *a, &|t| elementwise_add(t, g.data(), -1.0)),
            Op::Exp(a) => {
                let vo = out.data().to_vec();
                add_to(grads, *a, &|t| {
                    for (i, d) in t.data_mut().iter_mut().enumerate() {
                        *d += g.data()[i] * vo[i];
                    }
                });
            }
            Op::Ln(a) => {
                let va = value(*a).data().to_vec();
                add_to(grads, *a, &|t| {
                    for (i, d) in t.data_mut().iter_mut().enumerate() {
                        *d += g.data()[i] / va[i];
                    }
                });
            }
            Op::Tanh(a) => {
                let vo = out.data().to_vec();
                add_to(grads, *a, &|t| {
                    for (i, d) in t.data_mut().iter_mut().enumerate() {
                        *d += g.data()[i] * (1.0 - vo[i] * vo[i]);
                    }
                });
            }
            Op::Sigmoid(a) => {
                let vo = out.data().to_vec();
                add_to(grads, *a, &|t| {
                    for (i, d) in t.data_mut().iter_mut().enumerate() {
                        *d += g.data()[i] * vo[i] * (1.0 - vo[i]);
                    }
                });
            }
            Op::Erf(a) => {
                let va = value(*a).data().to_vec();
                let c = 2.0 / std::f64::consts::PI.sqrt();
                add_to(grads, *a, &|t| {
                    for (i, d) in t.data_mut().iter_mut().enumerate() {
                        *d += g.data()[i] * c * (-va[i] * va[i]).exp();
                    }
                });
            }
            Op::Abs(a) => {
                let va = value(*a).data().to_vec();
                add_to(grads, *a, &|t| {
                    for (i, d) in t.data_mut().iter_mut().enumerate() {
                        *d += g.data()[i] * va[i].signum() * f64::from(va[i] != 0.0);
                    }
                });
            }
            Op::Scale(a, c) => {
                let c = *c;
                add_to(grads, *a, &|t| elementwise_add(t, g.data(), c));
            }
            Op::AddConst(a) => add_to(grads, *a, &|t| elementwise_add(t, g.data(), 1.0)),
            Op::Matmul(a, b) => {
                let (ta, tb) = (value(*a), value(*b));
                let (r, k, c) = (ta.rows(), ta.cols(), tb.cols());
                let mut ga = vec![0.0; r * k];
                let mut gb = vec![0.0; k * c];
                for i in 0..r {
                    for l in 0..k {
                        for j in 0..c {
                            ga[i * k + l] += g.data()[i * c + j] * tb.at(l, j);
                            gb[l * c + j] += ta.at(i, l) * g.data()[i * c + j];
                        }
                    }
                }
                add_to(grads, *a, &|t| elementwise_add(t, &ga, 1.0));
                add_to(grads, *b, &|t| elementwise_add(t, &gb, 1.0));
            }
            Op::Matvec(m, v) => {
                let (tm, tv) = (value(*m), value(*v));
                let (r, c) = (tm.rows(), tm.cols());
                let mut gm = vec![0.0; r * c];
                let mut gv = vec![0.0; c];
                for i in 0..r {
                    let gi = g.data()[i];
                    for j in 0..c {
                        gm[i * c + j] += gi * tv.data()[j];
                        gv[j] += tm.at(i, j) * gi;
                    }
                }
                add_to(grads, *m, &|t| elementwise_add(t, &gm, 1.0));
                add_to(grads, *v, &|t| elementwise_add(t, &gv, 1.0));
            }
            Op::MatvecT(m, v) => {
                let (tm, tv) = (value(*m), value(*v));
                let (r, c) = (tm.rows(), tm.cols());
                let mut gm = vec![0.0; r * c];
                let mut gv = vec![0.0; r];
                for i in 0..r {
                    for j in 0..c {
                        gm[i * c + j] += tv.data()[i] * g.data()[j];
                        gv[i] += tm.at(i, j) * g.data()[j];
                    }
                }
                add_to(grads, *m, &|t| elementwise_add(t, &gm, 1.0));
                add_to(grads, *v, &|t| elementwise_add(t, &gv, 1.0));
            }
            Op::Dot(a, b) => {
                let g0 = g.data()[0];
                let (va, vb) = (value(*a).data().to_vec(), value(*b).data().to_vec());
                add_to(grads, *a, &|t| elementwise_add(t, &vb, g0));
                add_to(grads, *b, &|t| elementwise_add(t, &va, g0));
            }
            Op::Concat(parts) => {
                let mut offset = 0;
                for &p in parts {
                    let len = value(p).len();
                    let slice = g.data()[offset..offset + len].to_vec();
                    add_to(grads, p, &|t| elementwise_add(t, &slice, 1.0));
                    offset += len;
                }
            }
            Op::StackRows(rows) => {
                let cols = out.cols();
                for (i, &r) in rows.iter().enumerate() {
                    let slice = g.data()[i * cols..(i + 1) * cols].to_vec();
                    add_to(grads, r, &|t| elementwise_add(t, &slice, 1.0));
                }
            }
            Op::Row(m, i) => {
                let cols = value(*m).cols();
                let (i, gd) = (*i, g.data().to_vec());
                add_to(grads, *m, &|t| {
                    for (j, gv) in gd.iter().enumerate() {
                        t.data_mut()[i * cols + j] += gv;
                    }
                });
            }
            Op::Index(v, i) => {
                let (i, g0) = (*i, g.data()[0]);
                add_to(grads, *v, &|t| t.data_mut()[i] += g0);
            }
            Op::Slice(v, start, len) => {
                let (start, len) = (*start, *len);
                let gd = g.data().to_vec();
                add_to(grads, *v, &|t| {
                    for j in 0..len {
                        t.data_mut()[start + j] += gd[j];
                    }
                });
            }
            Op::Sum(v) => {
                let g0 = g.data()[0];
                add_to(grads, *v, &|t| {
                    for d in t.data_mut() {
                        *d += g0;
                    }
                });
            }
            Op::Mean(v) => {
                let g0 = g.data()[0] / value(*v).len() as f64;
                add_to(grads, *v, &|t| {
                    for d in t.data_mut() {
                        *d += g0;
                    }
                });
            }
            Op::MeanRows(m) => {
                let (r, c) = (value(*m).rows(), value(*m).cols());
                let gd = g.data().to_vec();
                add_to(grads, *m, &|t| {
                    for i in 0..r {
                        for j in 0..c {
                            t.data_mut()[i * c + j] += gd[j] / r as f64;
                        }
                    }
                });
            }
            Op::Softmax(v) => {
                // dL/dx = s ⊙ (g − ⟨g, s⟩)
                let s = out.data().to_vec();
                let inner: f64 = g.data().iter().zip(&s).map(|(&gi, &si)| gi * si).sum();
                add_to(grads, *v, &|t| {
                    for (i, d) in t.data_mut().iter_mut().enumerate() {
                        *d += s[i] * (g.data()[i] - inner);
                    }
                });
            }
            Op::LogSoftmax(v) => {
                // dL/dx = g − softmax ⊙ Σg
                let gsum: f64 = g.data().iter().sum();
                let soft: Vec<f64> = out.data().iter().map(|&l| l.exp()).collect();
                add_to(grads, *v, &|t| {
                    for (i, d) in t.data_mut().iter_mut().enumerate() {
                        *d += g.data()[i] - soft[i] * gsum;
                    }
                });
            }
            Op::ClampMin(a, lo) => {
                let va = value(*a).data().to_vec();
                let lo = *lo;
                add_to(grads, *a, &|t| {
                    for (i, d) in t.data_mut().iter_mut().enumerate() {
                        if va[i] >= lo {
                            *d += g.data()[i];
                        }
                    }
                });
            }
            Op::Clamp(a, lo, hi) => {
                let va = value(*a).data().to_vec();
                let (lo, hi) = (*lo, *hi);
                add_to(grads, *a, &|t| {
                    for (i, d) in t.data_mut().iter_mut().enumerate() {
                        if va[i] >= lo && va[i] <= hi {
                            *d += g.data()[i];
                        }
                    }
                });
            }
            Op::MinElem(a, b) => {
                let (va, vb) = (value(*a).data().to_vec(), value(*b).data().to_vec());
                add_to(grads, *a, &|t| {
                    for (i, d) in t.data_mut().iter_mut().enumerate() {
                        if va[i] <= vb[i] {
                            *d += g.data()[i];
                        }
                    }
                });
                add_to(grads, *b, &|t| {
                    for (i, d) in t.data_mut().iter_mut().enumerate() {
                        if va[i] > vb[i] {
                            *d += g.data()[i];
                        }
                    }
                });
            }
            Op::MaxElem(a, b) => {
                let (va, vb) = (value(*a).data().to_vec(), value(*b).data().to_vec());
                add_to(grads, *a, &|t| {
                    for (i, d) in t.data_mut().iter_mut().enumerate() {
                        if va[i] >= vb[i] {
                            *d += g.data()[i];
                        }
                    }
                });
                add_to(grads, *b, &|t| {
                    for (i, d) in t.data_mut().iter_mut().enumerate() {
                        if va[i] < vb[i] {
                            *d += g.data()[i];
                        }
                    }
                });
            }
            Op::EmbedRows(table, ids) => {
                let e = out.cols();
                let ids = ids.clone();
                let gd = g.data().to_vec();
                add_to(grads, *table, &|t| {
                    for (n, &id) in ids.iter().enumerate() {
                        for j in 0..e {
                            t.data_mut()[id * e + j] += gd[n * e + j];
                        }
                    }
                });
            }
        }
    }
}

fn elementwise_add(t: &mut Tensor, src: &[f64], scale: f64) {
    for (d, &s) in t.data_mut().iter_mut().zip(src) {
        *d += scale * s;
    }
}
