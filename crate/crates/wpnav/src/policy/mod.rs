//! The trainable waypoint-prediction policy: a tape-based autodiff core plus
//! the recurrent encoder (per-sector range features, instruction embedding
//! with attention, two GRUs) and the pano/offset/distance/value heads.

mod checkpoint;
pub mod nn;
mod tape;
mod tensor;

pub use checkpoint::{load_checkpoint, save_checkpoint};
pub use tape::{Grads, Tape, Var};
pub use tensor::Tensor;

use crate::actionspace::{
    build_distance_head, build_offset_head, distance_head_width, offset_head_width, Categorical,
    ExpressivityConfig, HeadOutputs, WaypointAction, PANO_SIZE, SECTOR_COUNT, SECTOR_WIDTH,
};
use crate::error::{Error, Result};
use crate::world::RangeScan;
use nn::{attention, gru_cell, linear, GruVars};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolicyConfig {
    pub expressivity: ExpressivityConfig,
    pub sector_dim: usize,
    pub h_vis_dim: usize,
    pub h_act_dim: usize,
    pub embed_dim: usize,
    pub vocab_size: usize,
    pub rays_per_sector: usize,
    pub max_range: f64,
    /// Feed sin/cos of each sector's center angle into its encoder input.
    pub use_pose_features: bool,
    /// Feed the per-sector half-fan range minima alongside the sector
    /// minimum, for sub-sector bearing resolution.
    pub split_sector_ranges: bool,
}

impl Default for PolicyConfig {
    fn default() -> Self {
        PolicyConfig {
            expressivity: ExpressivityConfig::wpn(),
            sector_dim: 32,
            h_vis_dim: 64,
            h_act_dim: 64,
            embed_dim: 16,
            vocab_size: crate::world::Vocabulary::template().len(),
            rays_per_sector: 5,
            max_range: 10.0,
            use_pose_features: true,
            split_sector_ranges: true,
        }
    }
}

/// Named parameter tensors in deterministic (sorted) order.
#[derive(Debug, Clone, Default)]
pub struct ParamSet {
    entries: Vec<(String, Arc<Tensor>)>,
    index: BTreeMap<String, usize>,
}

impl ParamSet {
    pub fn insert(&mut self, name: &str, tensor: Tensor) {
        debug_assert!(!self.index.contains_key(name), "duplicate parameter {name}");
        // Entries stay sorted by name so every iteration order is stable.
        let pos = self.entries.partition_point(|(n, _)| n.as_str() < name);
        self.entries.insert(pos, (name.to_string(), Arc::new(tensor)));
        self.index =
            self.entries.iter().enumerate().map(|(i, (n, _))| (n.clone(), i)).collect();
    }

    pub fn get(&self, name: &str) -> Option<&Arc<Tensor>> {
        self.index.get(name).map(|&i| &self.entries[i].1)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Arc<Tensor>)> {
        self.entries.iter().map(|(n, t)| (n.as_str(), t))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn value_count(&self) -> usize {
        self.entries.iter().map(|(_, t)| t.len()).sum()
    }

    /// Mutable access for the optimizer (copy-on-write if a snapshot is live).
    pub fn tensor_mut(&mut self, i: usize) -> &mut Tensor {
        Arc::make_mut(&mut self.entries[i].1)
    }

    pub fn name(&self, i: usize) -> &str {
        &self.entries[i].0
    }
}

/// Recurrent state carried between waypoint decisions. Reset to zeros at
/// episode start; `prev_action` encodes the previous waypoint as
/// `[r, sin θ_sector, cos θ_sector, offset]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyState {
    pub h_vis: Vec<f64>,
    pub h_act: Vec<f64>,
    pub prev_action: [f64; 4],
    pub prev_sector_feature: Vec<f64>,
}

impl PolicyState {
    pub fn initial(cfg: &PolicyConfig) -> Self {
        PolicyState {
            h_vis: vec![0.0; cfg.h_vis_dim],
            h_act: vec![0.0; cfg.h_act_dim],
            prev_action: [0.0; 4],
            prev_sector_feature: vec![0.0; cfg.sector_dim],
        }
    }
}

/// Tape handles for one step's recurrent inputs.
#[derive(Debug, Clone, Copy)]
pub struct TapeState {
    pub h_vis: Var,
    pub h_act: Var,
    pub prev_action: Var,
    pub prev_sector_feature: Var,
}

/// Tape handles for every parameter of the policy.
pub struct PolicyVars {
    vars: BTreeMap<String, Var>,
}

impl PolicyVars {
    pub fn get(&self, name: &str) -> Var {
        *self.vars.get(name).unwrap_or_else(|| panic!("unknown parameter {name}"))
    }

    pub fn try_get(&self, name: &str) -> Option<Var> {
        self.vars.get(name).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, Var)> {
        self.vars.iter().map(|(n, &v)| (n.as_str(), v))
    }
}

/// One forward pass's outputs as tape nodes.
pub struct ForwardVars {
    pub pano_logits: Var,
    pub offset_raw: Option<Var>,
    pub dist_raw: Option<Var>,
    pub value: Var,
    pub h_vis: Var,
    pub h_act: Var,
    /// Per-sector feature rows `[12, sector_dim]`.
    pub sector_features: Var,
}

/// Value-mode step output: concrete distributions plus the pieces needed to
/// advance the recurrent state.
#[derive(Debug, Clone)]
pub struct StepEval {
    pub heads: HeadOutputs,
    pub value: f64,
    pub pano_logits: Vec<f64>,
    pub h_vis: Vec<f64>,
    pub h_act: Vec<f64>,
    pub sector_features: Vec<Vec<f64>>,
}

#[derive(Debug, Clone)]
pub struct Policy {
    pub cfg: PolicyConfig,
    pub params: ParamSet,
}

impl Policy {
    /// Deterministic initialization from a seed: weights uniform in
    /// ±1/√fan_in, biases zero.
    pub fn new(cfg: &PolicyConfig, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = ParamSet::default();
        for (name, shape) in Self::parameter_shapes(cfg) {
            let tensor = if shape.len() == 1 {
                Tensor::zeros(shape)
            } else {
                let fan_in = shape[1] as f64;
                let bound = 1.0 / fan_in.sqrt();
                let data: Vec<f64> =
                    (0..shape[0] * shape[1]).map(|_| rng.random_range(-bound..bound)).collect();
                Tensor::new(shape, data).expect("init shapes consistent")
            };
            params.insert(&name, tensor);
        }
        Policy { cfg: *cfg, params }
    }

    pub fn from_params(cfg: &PolicyConfig, params: ParamSet) -> Result<Self> {
        for (name, shape) in Self::parameter_shapes(cfg) {
            match params.get(&name) {
                Some(t) if t.shape() == shape.as_slice() => {}
                Some(t) => {
                    return Err(Error::Config(format!(
                        "parameter {name}: shape {:?}, expected {shape:?}",
                        t.shape()
                    )))
                }
                None => return Err(Error::Config(format!("missing parameter {name}"))),
            }
        }
        Ok(Policy { cfg: *cfg, params })
    }

    /// Names and shapes of every parameter under a config. Heads in fixed
    /// modes have no layer at all; everything else is config-independent.
    pub fn parameter_shapes(cfg: &PolicyConfig) -> Vec<(String, Vec<usize>)> {
        let (s, hv, ha, e, v) =
            (cfg.sector_dim, cfg.h_vis_dim, cfg.h_act_dim, cfg.embed_dim, cfg.vocab_size);
        let range_channels = if cfg.split_sector_ranges { 3 } else { 1 };
        let mut out: Vec<(String, Vec<usize>)> = vec![
            ("embed.table".into(), vec![v, e]),
            ("enc.w1".into(), vec![s, range_channels + 2 + s]),
            ("enc.b1".into(), vec![s]),
            ("enc.w2".into(), vec![s, s]),
            ("enc.b2".into(), vec![s]),
            ("gru_vis.w_ih".into(), vec![3 * hv, 2 * s + 4]),
            ("gru_vis.b_ih".into(), vec![3 * hv]),
            ("gru_vis.w_hh".into(), vec![3 * hv, hv]),
            ("gru_vis.b_hh".into(), vec![3 * hv]),
            ("instr_query.w".into(), vec![e, hv]),
            ("pano_query.w".into(), vec![s, 2 * e]),
            ("gru_act.w_ih".into(), vec![3 * ha, s + 2 * e + hv + 4]),
            ("gru_act.b_ih".into(), vec![3 * ha]),
            ("gru_act.w_hh".into(), vec![3 * ha, ha]),
            ("gru_act.b_hh".into(), vec![3 * ha]),
            ("pano_key.w".into(), vec![s, ha]),
            ("stop.w".into(), vec![1, ha]),
            ("stop.b".into(), vec![1]),
            ("value.w".into(), vec![1, ha]),
            ("value.b".into(), vec![1]),
        ];
        let ko = offset_head_width(cfg.expressivity.offset_mode);
        if ko > 0 {
            out.push(("offset_head.w".into(), vec![ko, s + ha]));
            out.push(("offset_head.b".into(), vec![ko]));
        }
        let kd = distance_head_width(cfg.expressivity.distance_mode);
        if kd > 0 {
            out.push(("dist_head.w".into(), vec![kd, s + ha]));
            out.push(("dist_head.b".into(), vec![kd]));
        }
        out.sort_by(|a, b| a.0.cmp(&b.0));
        out
    }

    /// Put every parameter on a tape as a shared leaf.
    pub fn params_on_tape(&self, tape: &mut Tape) -> PolicyVars {
        let mut vars = BTreeMap::new();
        for (name, tensor) in self.params.iter() {
            vars.insert(name.to_string(), tape.leaf_shared(tensor));
        }
        PolicyVars { vars }
    }

    /// Put a `PolicyState` on a tape as constant leaves.
    pub fn state_on_tape(&self, tape: &mut Tape, state: &PolicyState) -> TapeState {
        TapeState {
            h_vis: tape.leaf(Tensor::vector(state.h_vis.clone())),
            h_act: tape.leaf(Tensor::vector(state.h_act.clone())),
            prev_action: tape.leaf(Tensor::vector(state.prev_action.to_vec())),
            prev_sector_feature: tape.leaf(Tensor::vector(state.prev_sector_feature.clone())),
        }
    }

    /// One differentiable forward pass.
    pub fn forward_on_tape(
        &self,
        tape: &mut Tape,
        vars: &PolicyVars,
        scan: &RangeScan,
        tokens: &[u16],
        state: TapeState,
    ) -> Result<ForwardVars> {
        let cfg = &self.cfg;
        if tokens.is_empty() {
            return Err(Error::Sampling("empty instruction".into()));
        }
        for &t in tokens {
            if t as usize >= cfg.vocab_size {
                return Err(Error::UnknownToken(t));
            }
        }

        // Per-sector encoder, weights shared across sectors.
        let (enc_w1, enc_b1) = (vars.get("enc.w1"), vars.get("enc.b1"));
        let (enc_w2, enc_b2) = (vars.get("enc.w2"), vars.get("enc.b2"));
        let mut sector_rows = Vec::with_capacity(SECTOR_COUNT);
        for i in 0..SECTOR_COUNT {
            let angle = i as f64 * SECTOR_WIDTH;
            let (sin, cos) =
                if cfg.use_pose_features { (angle.sin(), angle.cos()) } else { (0.0, 0.0) };
            let mut channels = vec![scan.readings[i] / scan.max_range];
            if cfg.split_sector_ranges {
                channels.push(scan.half_readings[2 * i] / scan.max_range);
                channels.push(scan.half_readings[2 * i + 1] / scan.max_range);
            }
            channels.push(sin);
            channels.push(cos);
            let base = tape.leaf(Tensor::vector(channels));
            let input = tape.concat(&[base, state.prev_sector_feature])?;
            let h1 = linear(tape, enc_w1, enc_b1, input)?;
            let h1 = tape.tanh(h1);
            let h2 = linear(tape, enc_w2, enc_b2, h1)?;
            sector_rows.push(tape.tanh(h2));
        }
        let sector_features = tape.stack_rows(&sector_rows)?;
        let pooled = tape.mean_rows(sector_features)?;

        // Visual-history recurrence over [pooled features, previous-step
        // chosen-sector feature, previous action].
        let gru_vis = GruVars {
            w_ih: vars.get("gru_vis.w_ih"),
            b_ih: vars.get("gru_vis.b_ih"),
            w_hh: vars.get("gru_vis.w_hh"),
            b_hh: vars.get("gru_vis.b_hh"),
        };
        let vis_input = tape.concat(&[pooled, state.prev_sector_feature, state.prev_action])?;
        let h_vis = gru_cell(tape, &gru_vis, vis_input, state.h_vis)?;

        // Instruction features: embedding rows, mean pool, and attention
        // queried from the visual history.
        let ids: Vec<usize> = tokens.iter().map(|&t| t as usize).collect();
        let embedded = tape.embed_rows(vars.get("embed.table"), &ids)?;
        let instr_mean = tape.mean_rows(embedded)?;
        let instr_query = tape.matvec(vars.get("instr_query.w"), h_vis)?;
        let instr_attn = attention(tape, embedded, instr_query)?;
        let instr = tape.concat(&[instr_attn, instr_mean])?;

        // Attention across the panorama sectors, then the action recurrence.
        let pano_query = tape.matvec(vars.get("pano_query.w"), instr)?;
        let pano_ctx = attention(tape, sector_features, pano_query)?;
        let gru_act = GruVars {
            w_ih: vars.get("gru_act.w_ih"),
            b_ih: vars.get("gru_act.b_ih"),
            w_hh: vars.get("gru_act.w_hh"),
            b_hh: vars.get("gru_act.b_hh"),
        };
        let act_input = tape.concat(&[pano_ctx, instr, h_vis, state.prev_action])?;
        let h_act = gru_cell(tape, &gru_act, act_input, state.h_act)?;

        // Pano logits: per-sector dot products against a projection of the
        // action state, plus a learned STOP logit.
        let key = tape.matvec(vars.get("pano_key.w"), h_act)?;
        let mut logits = Vec::with_capacity(PANO_SIZE);
        for &row in &sector_rows {
            logits.push(tape.dot(row, key)?);
        }
        let stop_logit = linear(tape, vars.get("stop.w"), vars.get("stop.b"), h_act)?;
        logits.push(stop_logit);
        let pano_logits = tape.concat(&logits)?;

        // Per-sector offset/distance raw head outputs (shared weights).
        let head_raw = |tape: &mut Tape, w: Var, b: Var| -> Result<Var> {
            let mut rows = Vec::with_capacity(SECTOR_COUNT);
            for &f in &sector_rows {
                let u = tape.concat(&[f, h_act])?;
                rows.push(linear(tape, w, b, u)?);
            }
            tape.stack_rows(&rows)
        };
        let offset_raw = match vars.try_get("offset_head.w") {
            Some(w) => Some(head_raw(tape, w, vars.get("offset_head.b"))?),
            None => None,
        };
        let dist_raw = match vars.try_get("dist_head.w") {
            Some(w) => Some(head_raw(tape, w, vars.get("dist_head.b"))?),
            None => None,
        };

        let value = linear(tape, vars.get("value.w"), vars.get("value.b"), h_act)?;

        Ok(ForwardVars { pano_logits, offset_raw, dist_raw, value, h_vis, h_act, sector_features })
    }

    /// Value-mode forward: run a scratch tape and materialize distributions.
    pub fn evaluate(
        &self,
        scan: &RangeScan,
        tokens: &[u16],
        state: &PolicyState,
    ) -> Result<StepEval> {
        let mut tape = Tape::new();
        let vars = self.params_on_tape(&mut tape);
        let ts = self.state_on_tape(&mut tape, state);
        let fwd = self.forward_on_tape(&mut tape, &vars, scan, tokens, ts)?;

        let pano_logits = tape.value(fwd.pano_logits).data().to_vec();
        let offset_raw = fwd.offset_raw.map(|v| tape.value(v).clone());
        let dist_raw = fwd.dist_raw.map(|v| tape.value(v).clone());
        let heads = self.build_heads(&pano_logits, offset_raw.as_ref(), dist_raw.as_ref())?;
        let feats = tape.value(fwd.sector_features);
        let sector_features = (0..SECTOR_COUNT)
            .map(|i| feats.data()[i * self.cfg.sector_dim..(i + 1) * self.cfg.sector_dim].to_vec())
            .collect();
        Ok(StepEval {
            heads,
            value: tape.value(fwd.value).item(),
            pano_logits,
            h_vis: tape.value(fwd.h_vis).data().to_vec(),
            h_act: tape.value(fwd.h_act).data().to_vec(),
            sector_features,
        })
    }

    /// Concrete per-sector heads from raw outputs.
    pub fn build_heads(
        &self,
        pano_logits: &[f64],
        offset_raw: Option<&Tensor>,
        dist_raw: Option<&Tensor>,
    ) -> Result<HeadOutputs> {
        let pano = Categorical::from_logits(pano_logits)?;
        let mut offsets = Vec::with_capacity(SECTOR_COUNT);
        let mut distances = Vec::with_capacity(SECTOR_COUNT);
        for i in 0..SECTOR_COUNT {
            let off_row: Vec<f64> = match offset_raw {
                Some(t) => (0..t.cols()).map(|j| t.at(i, j)).collect(),
                None => Vec::new(),
            };
            offsets.push(build_offset_head(self.cfg.expressivity.offset_mode, &off_row)?);
            let dist_row: Vec<f64> = match dist_raw {
                Some(t) => (0..t.cols()).map(|j| t.at(i, j)).collect(),
                None => Vec::new(),
            };
            distances.push(build_distance_head(self.cfg.expressivity.distance_mode, &dist_row)?);
        }
        HeadOutputs::new(pano, offsets, distances)
    }

    /// Advance the recurrent state after taking `action` (motion actions
    /// only; episodes end on STOP).
    pub fn next_state(&self, eval: &StepEval, action: &WaypointAction) -> PolicyState {
        match action {
            WaypointAction::Stop => PolicyState::initial(&self.cfg),
            WaypointAction::Move { sector, offset, distance } => {
                let angle = *sector as f64 * SECTOR_WIDTH;
                PolicyState {
                    h_vis: eval.h_vis.clone(),
                    h_act: eval.h_act.clone(),
                    prev_action: [*distance, angle.sin(), angle.cos(), *offset],
                    prev_sector_feature: eval.sector_features[*sector].clone(),
                }
            }
        }
    }
}
