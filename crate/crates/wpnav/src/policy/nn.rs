//! Network building blocks on the tape: linear layers, scaled dot-product
//! attention, and a GRU cell.

use super::tape::{Tape, Var};
use crate::error::{Error, Result};

/// `w · x + b`.
pub fn linear(tape: &mut Tape, w: Var, b: Var, x: Var) -> Result<Var> {
    let y = tape.matvec(w, x)?;
    tape.add(y, b)
}

/// Scaled dot-product attention with keys == values: softmax(K·q/√d)ᵀ·K.
pub fn attention(tape: &mut Tape, keys: Var, query: Var) -> Result<Var> {
    let tk = tape.value(keys);
    if !tk.is_matrix() || tk.rows() == 0 {
        return Err(Error::EmptyKeys);
    }
    let d = tk.cols();
    if tape.value(query).len() != d {
        return Err(Error::ShapeMismatch {
            op: "attention",
            detail: format!("query {:?} vs keys {:?}", tape.value(query).shape(), tk.shape()),
        });
    }
    let scores = tape.matvec(keys, query)?;
    let scaled = tape.scale(scores, 1.0 / (d as f64).sqrt());
    let weights = tape.softmax(scaled)?;
    tape.matvec_t(keys, weights)
}

/// Weights of one GRU cell; the `w_ih`/`w_hh` matrices stack the reset,
/// update, and candidate gates as three row blocks.
#[derive(Debug, Clone, Copy)]
pub struct GruVars {
    pub w_ih: Var,
    pub b_ih: Var,
    pub w_hh: Var,
    pub b_hh: Var,
}

/// Standard GRU update:
/// r = σ(W_ir x + b_ir + W_hr h + b_hr)
/// z = σ(W_iz x + b_iz + W_hz h + b_hz)
/// n = tanh(W_in x + b_in + r ⊙ (W_hn h + b_hn))
/// h' = (1 − z) ⊙ n + z ⊙ h
pub fn gru_cell(tape: &mut Tape, p: &GruVars, x: Var, h: Var) -> Result<Var> {
    let hsize = tape.value(h).len();
    if tape.value(p.w_ih).rows() != 3 * hsize || tape.value(p.w_hh).rows() != 3 * hsize {
        return Err(Error::ShapeMismatch {
            op: "gru_cell",
            detail: format!(
                "gate rows {} / {} vs hidden {hsize}",
                tape.value(p.w_ih).rows(),
                tape.value(p.w_hh).rows()
            ),
        });
    }
    let ih = linear(tape, p.w_ih, p.b_ih, x)?;
    let hh = linear(tape, p.w_hh, p.b_hh, h)?;
    let ih_r = tape.slice(ih, 0, hsize)?;
    let ih_z = tape.slice(ih, hsize, hsize)?;
    let ih_n = tape.slice(ih, 2 * hsize, hsize)?;
    let hh_r = tape.slice(hh, 0, hsize)?;
    let hh_z = tape.slice(hh, hsize, hsize)?;
    let hh_n = tape.slice(hh, 2 * hsize, hsize)?;

    let r = {
        let s = tape.add(ih_r, hh_r)?;
        tape.sigmoid(s)
    };
    let z = {
        let s = tape.add(ih_z, hh_z)?;
        tape.sigmoid(s)
    };
    let n = {
        let gated = tape.mul(r, hh_n)?;
        let s = tape.add(ih_n, gated)?;
        tape.tanh(s)
    };
    let keep = tape.mul(z, h)?;
    let one_minus_z = {
        let nz = tape.neg(z);
        tape.add_const(nz, 1.0)
    };
    let update = tape.mul(one_minus_z, n)?;
    tape.add(update, keep)
}
