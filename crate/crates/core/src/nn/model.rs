//! Forward and reverse passes of the heterogeneous graph network.
//!
//! Update rule per layer, for destination node `i` and relation `r` with at
//! least one incoming edge:
//!
//! ```text
//! m_r(i) = sum_{j in N_r(i)} W_r x_j / sqrt(deg_r(i) deg_r(j))
//! x_i   <- relu(b_type(i) + mean_r m_r(i))
//! ```
//!
//! Degrees are clamped to >= 1; the mean runs over relations that actually
//! have incoming edges at `i`, so nodes with no edges keep `relu(b)`.

use crate::graph::{LiteralClauseGraph, CLAUSE_FEATURES, LITERAL_FEATURES};

use super::params::{ModelParameters, Relation};
use super::NnError;

/// Per-type activation matrices, row-major `[count x h]`.
#[derive(Debug, Clone)]
pub struct NodeEmbeddings {
    pub h: usize,
    pub clause: Vec<f64>,
    pub pos: Vec<f64>,
    pub neg: Vec<f64>,
}

impl NodeEmbeddings {
    fn zeros(n_clauses: usize, n_vars: usize, h: usize) -> Self {
        Self {
            h,
            clause: vec![0.0; n_clauses * h],
            pos: vec![0.0; n_vars * h],
            neg: vec![0.0; n_vars * h],
        }
    }

    pub fn clause_row(&self, i: usize) -> &[f64] {
        &self.clause[i * self.h..(i + 1) * self.h]
    }

    pub fn pos_row(&self, i: usize) -> &[f64] {
        &self.pos[i * self.h..(i + 1) * self.h]
    }

    pub fn neg_row(&self, i: usize) -> &[f64] {
        &self.neg[i * self.h..(i + 1) * self.h]
    }
}

/// Softmax output over the solver portfolio.
#[derive(Debug, Clone)]
pub struct SolverDistribution {
    probs: Vec<f64>,
}

impl SolverDistribution {
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Index of the most probable solver; ties go to the lowest index.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (k, &p) in self.probs.iter().enumerate() {
            if p > self.probs[best] {
                best = k;
            }
        }
        best
    }
}

/// Retained activations from a forward pass, needed by [`backward`].
#[derive(Debug, Clone)]
pub struct ForwardTape {
    /// `stages[0]` is the embed output, `stages[l]` the output of layer `l`.
    stages: Vec<NodeEmbeddings>,
    pooled: Vec<f64>,
    probs: Vec<f64>,
}

impl ForwardTape {
    pub fn stage(&self, i: usize) -> &NodeEmbeddings {
        &self.stages[i]
    }

    pub fn n_stages(&self) -> usize {
        self.stages.len()
    }
}

/// Parameter gradients, aligned with the flat layout of [`ModelParameters`].
#[derive(Debug, Clone)]
pub struct Gradients {
    data: Vec<f64>,
}

impl Gradients {
    pub fn zeros(params: &ModelParameters) -> Self {
        Self { data: vec![0.0; params.len()] }
    }

    #[cfg(test)]
    pub(crate) fn from_vec(data: Vec<f64>) -> Self {
        Self { data }
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn add_scaled(&mut self, other: &Gradients, scale: f64) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b * scale;
        }
    }

    pub fn scale(&mut self, s: f64) {
        for v in &mut self.data {
            *v *= s;
        }
    }

    /// Gradient slice for a named tensor (tests, diagnostics).
    pub fn tensor(&self, params: &ModelParameters, name: &str) -> &[f64] {
        let (offset, len) = params.offset_len(name);
        &self.data[offset..offset + len]
    }
}

// a (m x k) * b (k x n), accumulated into out (m x n).
fn matmul_into(a: &[f64], m: usize, k: usize, b: &[f64], n: usize, out: &mut [f64]) {
    debug_assert_eq!(a.len(), m * k);
    debug_assert_eq!(b.len(), k * n);
    debug_assert_eq!(out.len(), m * n);
    for i in 0..m {
        let arow = &a[i * k..(i + 1) * k];
        let orow = &mut out[i * n..(i + 1) * n];
        for (p, &av) in arow.iter().enumerate() {
            if av != 0.0 {
                let brow = &b[p * n..(p + 1) * n];
                for j in 0..n {
                    orow[j] += av * brow[j];
                }
            }
        }
    }
}

fn matmul(a: &[f64], m: usize, k: usize, b: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; m * n];
    matmul_into(a, m, k, b, n, &mut out);
    out
}

// aᵀ (k x m) * b (m x n), accumulated into out (k x n).
fn matmul_at_b(a: &[f64], m: usize, k: usize, b: &[f64], n: usize, out: &mut [f64]) {
    debug_assert_eq!(a.len(), m * k);
    debug_assert_eq!(b.len(), m * n);
    debug_assert_eq!(out.len(), k * n);
    for i in 0..m {
        let arow = &a[i * k..(i + 1) * k];
        let brow = &b[i * n..(i + 1) * n];
        for (p, &av) in arow.iter().enumerate() {
            if av != 0.0 {
                let orow = &mut out[p * n..(p + 1) * n];
                for j in 0..n {
                    orow[j] += av * brow[j];
                }
            }
        }
    }
}

// a (m x n) * bᵀ (n x k), accumulated into out (m x k).
fn matmul_a_bt(a: &[f64], m: usize, n: usize, b: &[f64], k: usize, out: &mut [f64]) {
    debug_assert_eq!(a.len(), m * n);
    debug_assert_eq!(b.len(), k * n);
    debug_assert_eq!(out.len(), m * k);
    for i in 0..m {
        let arow = &a[i * n..(i + 1) * n];
        for j in 0..k {
            let brow = &b[j * n..(j + 1) * n];
            let mut s = 0.0;
            for p in 0..n {
                s += arow[p] * brow[p];
            }
            out[i * k + j] += s;
        }
    }
}

fn clamp1(d: u32) -> f64 {
    d.max(1) as f64
}

fn edge_norm(deg_a: u32, deg_b: u32) -> f64 {
    1.0 / (clamp1(deg_a) * clamp1(deg_b)).sqrt()
}

/// Affine projection of raw node features into the hidden width. No
/// nonlinearity.
pub fn embed(
    graph: &LiteralClauseGraph,
    params: &ModelParameters,
) -> Result<NodeEmbeddings, NnError> {
    if graph.clause_features().len() != graph.n_clauses() * CLAUSE_FEATURES
        || graph.pos_lit_features().len() != graph.n_vars() * LITERAL_FEATURES
    {
        return Err(NnError::DimensionMismatch(
            "graph feature matrices do not match node counts".into(),
        ));
    }
    let h = params.hidden();
    let mut out = NodeEmbeddings::zeros(graph.n_clauses(), graph.n_vars(), h);
    project(
        graph.clause_features(),
        CLAUSE_FEATURES,
        params.embed_w("clause"),
        params.embed_b("clause"),
        &mut out.clause,
        h,
    );
    project(
        graph.pos_lit_features(),
        LITERAL_FEATURES,
        params.embed_w("pos"),
        params.embed_b("pos"),
        &mut out.pos,
        h,
    );
    project(
        graph.neg_lit_features(),
        LITERAL_FEATURES,
        params.embed_w("neg"),
        params.embed_b("neg"),
        &mut out.neg,
        h,
    );
    Ok(out)
}

fn project(features: &[f32], width: usize, w: &[f64], b: &[f64], out: &mut [f64], h: usize) {
    let rows = features.len() / width;
    for i in 0..rows {
        let frow = &features[i * width..(i + 1) * width];
        let orow = &mut out[i * h..(i + 1) * h];
        orow.copy_from_slice(b);
        for (f, &fv) in frow.iter().enumerate() {
            let fv = fv as f64;
            if fv != 0.0 {
                let wrow = &w[f * h..(f + 1) * h];
                for j in 0..h {
                    orow[j] += fv * wrow[j];
                }
            }
        }
    }
}

/// Relations-present count at each destination node. The literal-pairing
/// relation always exists for literal nodes; clause relations only when the
/// corresponding polarity occurs.
fn present_relations(graph: &LiteralClauseGraph) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let r_clause: Vec<f64> = (0..graph.n_clauses())
        .map(|c| {
            let r = u32::from(graph.clause_pos_degree(c) > 0)
                + u32::from(graph.clause_neg_degree(c) > 0);
            r.max(1) as f64
        })
        .collect();
    let r_pos: Vec<f64> = (0..graph.n_vars())
        .map(|v| (1 + u32::from(graph.pos_clause_degree(v) > 0)) as f64)
        .collect();
    let r_neg: Vec<f64> = (0..graph.n_vars())
        .map(|v| (1 + u32::from(graph.neg_clause_degree(v) > 0)) as f64)
        .collect();
    (r_clause, r_pos, r_neg)
}

/// One round of degree-normalized heterogeneous convolutions.
pub fn hetero_conv_layer(
    graph: &LiteralClauseGraph,
    embeds: &NodeEmbeddings,
    layer: usize,
    params: &ModelParameters,
) -> Result<NodeEmbeddings, NnError> {
    let h = params.hidden();
    if embeds.h != h {
        return Err(NnError::DimensionMismatch(format!(
            "embeddings width {} vs model width {h}",
            embeds.h
        )));
    }
    if layer >= params.layers() {
        return Err(NnError::DimensionMismatch(format!(
            "layer {layer} out of range for {} layers",
            params.layers()
        )));
    }
    let nc = graph.n_clauses();
    let nv = graph.n_vars();

    // Transform all source embeddings once per relation, then scatter along
    // edges with the 1/sqrt(deg deg) coefficient.
    let y_pos_clause = matmul(&embeds.pos, nv, h, params.conv_w(layer, Relation::PosToClause), h);
    let y_neg_clause = matmul(&embeds.neg, nv, h, params.conv_w(layer, Relation::NegToClause), h);
    let y_clause_pos = matmul(&embeds.clause, nc, h, params.conv_w(layer, Relation::ClauseToPos), h);
    let y_clause_neg = matmul(&embeds.clause, nc, h, params.conv_w(layer, Relation::ClauseToNeg), h);
    let y_pos_neg = matmul(&embeds.pos, nv, h, params.conv_w(layer, Relation::PosToNeg), h);
    let y_neg_pos = matmul(&embeds.neg, nv, h, params.conv_w(layer, Relation::NegToPos), h);

    let mut out = NodeEmbeddings::zeros(nc, nv, h);
    for &(v, c) in graph.edges_pos_clause() {
        let (v, c) = (v as usize, c as usize);
        let norm = edge_norm(graph.clause_pos_degree(c), graph.pos_clause_degree(v));
        axpy(norm, &y_pos_clause[v * h..(v + 1) * h], &mut out.clause[c * h..(c + 1) * h]);
        axpy(norm, &y_clause_pos[c * h..(c + 1) * h], &mut out.pos[v * h..(v + 1) * h]);
    }
    for &(v, c) in graph.edges_neg_clause() {
        let (v, c) = (v as usize, c as usize);
        let norm = edge_norm(graph.clause_neg_degree(c), graph.neg_clause_degree(v));
        axpy(norm, &y_neg_clause[v * h..(v + 1) * h], &mut out.clause[c * h..(c + 1) * h]);
        axpy(norm, &y_clause_neg[c * h..(c + 1) * h], &mut out.neg[v * h..(v + 1) * h]);
    }
    // Literal-pairing edges: degree 1 on both sides.
    for v in 0..nv {
        axpy(1.0, &y_neg_pos[v * h..(v + 1) * h], &mut out.pos[v * h..(v + 1) * h]);
        axpy(1.0, &y_pos_neg[v * h..(v + 1) * h], &mut out.neg[v * h..(v + 1) * h]);
    }

    let (r_clause, r_pos, r_neg) = present_relations(graph);
    finish_rows(&mut out.clause, h, &r_clause, params.conv_b(layer, "clause"));
    finish_rows(&mut out.pos, h, &r_pos, params.conv_b(layer, "pos"));
    finish_rows(&mut out.neg, h, &r_neg, params.conv_b(layer, "neg"));
    Ok(out)
}

fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

// row <- relu(bias + row / r)
fn finish_rows(rows: &mut [f64], h: usize, r: &[f64], bias: &[f64]) {
    for (i, chunk) in rows.chunks_mut(h).enumerate() {
        let inv = 1.0 / r[i];
        for (x, &b) in chunk.iter_mut().zip(bias) {
            *x = (*x * inv + b).max(0.0);
        }
    }
}

/// Per-type mean pooling, concatenation, linear head, softmax.
pub fn readout(
    embeds: &NodeEmbeddings,
    params: &ModelParameters,
) -> Result<SolverDistribution, NnError> {
    Ok(SolverDistribution { probs: readout_parts(embeds, params)?.1 })
}

fn readout_parts(
    embeds: &NodeEmbeddings,
    params: &ModelParameters,
) -> Result<(Vec<f64>, Vec<f64>), NnError> {
    let h = embeds.h;
    if h != params.hidden() {
        return Err(NnError::DimensionMismatch("pooling width".into()));
    }
    let mut pooled = vec![0.0; 3 * h];
    mean_rows(&embeds.clause, h, &mut pooled[0..h]).ok_or(NnError::EmptyGraph("clause"))?;
    mean_rows(&embeds.pos, h, &mut pooled[h..2 * h]).ok_or(NnError::EmptyGraph("positive literal"))?;
    mean_rows(&embeds.neg, h, &mut pooled[2 * h..]).ok_or(NnError::EmptyGraph("negative literal"))?;

    let k = params.num_solvers();
    let head_w = params.head_w();
    let mut logits = params.head_b().to_vec();
    for (i, &pv) in pooled.iter().enumerate() {
        if pv != 0.0 {
            for (j, logit) in logits.iter_mut().enumerate() {
                *logit += pv * head_w[i * k + j];
            }
        }
    }
    Ok((pooled, softmax(&logits)))
}

fn mean_rows(rows: &[f64], h: usize, out: &mut [f64]) -> Option<()> {
    let n = rows.len() / h;
    if n == 0 {
        return None;
    }
    for (j, slot) in out.iter_mut().enumerate() {
        let mut s = 0.0;
        for i in 0..n {
            s += rows[i * h + j];
        }
        *slot = s / n as f64;
    }
    Some(())
}

fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&z| (z - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.iter().map(|e| e / sum).collect()
}

/// Full pass: embed, `layers` rounds of convolutions, readout.
pub fn forward(
    graph: &LiteralClauseGraph,
    params: &ModelParameters,
) -> Result<SolverDistribution, NnError> {
    let (dist, _) = forward_with_tape(graph, params)?;
    Ok(dist)
}

/// Forward pass retaining every intermediate activation for [`backward`].
pub fn forward_with_tape(
    graph: &LiteralClauseGraph,
    params: &ModelParameters,
) -> Result<(SolverDistribution, ForwardTape), NnError> {
    let mut stages = Vec::with_capacity(params.layers() + 1);
    stages.push(embed(graph, params)?);
    for l in 0..params.layers() {
        let next = hetero_conv_layer(graph, stages.last().unwrap(), l, params)?;
        stages.push(next);
    }
    let (pooled, probs) = readout_parts(stages.last().unwrap(), params)?;
    let dist = SolverDistribution { probs: probs.clone() };
    Ok((dist, ForwardTape { stages, pooled, probs }))
}

/// Exact reverse-mode gradients of a scalar loss with respect to every
/// parameter, given `upstream = dLoss/dprobs` and the tape of the matching
/// forward pass.
pub fn backward(
    graph: &LiteralClauseGraph,
    params: &ModelParameters,
    tape: &ForwardTape,
    upstream: &[f64],
) -> Result<Gradients, NnError> {
    let k = params.num_solvers();
    if upstream.len() != k {
        return Err(NnError::DimensionMismatch(format!(
            "upstream length {} vs {k} solvers",
            upstream.len()
        )));
    }
    let h = params.hidden();
    let nc = graph.n_clauses();
    let nv = graph.n_vars();
    let mut grads = Gradients::zeros(params);

    // Softmax backward: dz_k = p_k (g_k - sum_j g_j p_j).
    let p = &tape.probs;
    let dot: f64 = upstream.iter().zip(p).map(|(g, pk)| g * pk).sum();
    let dz: Vec<f64> = p.iter().zip(upstream).map(|(&pk, &gk)| pk * (gk - dot)).collect();

    // Head.
    {
        let (off_w, _) = params.offset_len("head_w");
        let (off_b, _) = params.offset_len("head_b");
        for (j, &dzj) in dz.iter().enumerate() {
            grads.data[off_b + j] += dzj;
        }
        for (i, &pv) in tape.pooled.iter().enumerate() {
            for (j, &dzj) in dz.iter().enumerate() {
                grads.data[off_w + i * k + j] += pv * dzj;
            }
        }
    }

    // Pooling backward into the last stage.
    let head_w = params.head_w();
    let mut dpooled = vec![0.0; 3 * h];
    for (i, slot) in dpooled.iter_mut().enumerate() {
        let mut s = 0.0;
        for (j, &dzj) in dz.iter().enumerate() {
            s += head_w[i * k + j] * dzj;
        }
        *slot = s;
    }
    let mut dstage = NodeEmbeddings::zeros(nc, nv, h);
    broadcast_mean_grad(&dpooled[0..h], &mut dstage.clause, h);
    broadcast_mean_grad(&dpooled[h..2 * h], &mut dstage.pos, h);
    broadcast_mean_grad(&dpooled[2 * h..], &mut dstage.neg, h);

    let (r_clause, r_pos, r_neg) = present_relations(graph);

    for layer in (0..params.layers()).rev() {
        let input = &tape.stages[layer];
        let output = &tape.stages[layer + 1];

        // t = relu'(out) * dout / R ; bias gradient takes relu'(out) * dout.
        let mut t_clause = vec![0.0; nc * h];
        let mut t_pos = vec![0.0; nv * h];
        let mut t_neg = vec![0.0; nv * h];
        relu_scaled(
            &dstage.clause,
            &output.clause,
            &r_clause,
            h,
            &mut t_clause,
            grads.grad_mut(params, &format!("conv_b.{layer}.clause")),
        );
        relu_scaled(
            &dstage.pos,
            &output.pos,
            &r_pos,
            h,
            &mut t_pos,
            grads.grad_mut(params, &format!("conv_b.{layer}.pos")),
        );
        relu_scaled(
            &dstage.neg,
            &output.neg,
            &r_neg,
            h,
            &mut t_neg,
            grads.grad_mut(params, &format!("conv_b.{layer}.neg")),
        );

        // Per-relation source-side accumulators U_r = d(X_src W_r).
        let mut u_pos_clause = vec![0.0; nv * h];
        let mut u_neg_clause = vec![0.0; nv * h];
        let mut u_clause_pos = vec![0.0; nc * h];
        let mut u_clause_neg = vec![0.0; nc * h];
        for &(v, c) in graph.edges_pos_clause() {
            let (v, c) = (v as usize, c as usize);
            let norm = edge_norm(graph.clause_pos_degree(c), graph.pos_clause_degree(v));
            axpy(norm, &t_clause[c * h..(c + 1) * h], &mut u_pos_clause[v * h..(v + 1) * h]);
            axpy(norm, &t_pos[v * h..(v + 1) * h], &mut u_clause_pos[c * h..(c + 1) * h]);
        }
        for &(v, c) in graph.edges_neg_clause() {
            let (v, c) = (v as usize, c as usize);
            let norm = edge_norm(graph.clause_neg_degree(c), graph.neg_clause_degree(v));
            axpy(norm, &t_clause[c * h..(c + 1) * h], &mut u_neg_clause[v * h..(v + 1) * h]);
            axpy(norm, &t_neg[v * h..(v + 1) * h], &mut u_clause_neg[c * h..(c + 1) * h]);
        }
        // Pairing relations: U is t of the opposite node, norm 1.
        let u_neg_pos = t_pos; // sources are negative literals
        let u_pos_neg = t_neg; // sources are positive literals

        let mut dinput = NodeEmbeddings::zeros(nc, nv, h);
        let mut rel_grad = |rel: Relation, src: &[f64], n_src: usize, u: &[f64], dsrc: &mut [f64]| {
            let off = params.conv_w_offset(layer, rel);
            matmul_at_b(src, n_src, h, u, h, &mut grads.data[off..off + h * h]);
            matmul_a_bt(u, n_src, h, params.conv_w(layer, rel), h, dsrc);
        };
        rel_grad(Relation::PosToClause, &input.pos, nv, &u_pos_clause, &mut dinput.pos);
        rel_grad(Relation::NegToClause, &input.neg, nv, &u_neg_clause, &mut dinput.neg);
        rel_grad(Relation::ClauseToPos, &input.clause, nc, &u_clause_pos, &mut dinput.clause);
        rel_grad(Relation::ClauseToNeg, &input.clause, nc, &u_clause_neg, &mut dinput.clause);
        rel_grad(Relation::NegToPos, &input.neg, nv, &u_neg_pos, &mut dinput.neg);
        rel_grad(Relation::PosToNeg, &input.pos, nv, &u_pos_neg, &mut dinput.pos);

        dstage = dinput;
    }

    // Embed backward (affine, no relu).
    let (dw, db) = grads.grad_mut2(params, "embed_w.clause", "embed_b.clause");
    embed_backward(graph.clause_features(), CLAUSE_FEATURES, &dstage.clause, h, dw, db);
    let (dw, db) = grads.grad_mut2(params, "embed_w.pos", "embed_b.pos");
    embed_backward(graph.pos_lit_features(), LITERAL_FEATURES, &dstage.pos, h, dw, db);
    let (dw, db) = grads.grad_mut2(params, "embed_w.neg", "embed_b.neg");
    embed_backward(graph.neg_lit_features(), LITERAL_FEATURES, &dstage.neg, h, dw, db);

    Ok(grads)
}

impl Gradients {
    fn grad_mut(&mut self, params: &ModelParameters, name: &str) -> &mut [f64] {
        let (offset, len) = params.offset_len(name);
        &mut self.data[offset..offset + len]
    }

    /// Two disjoint tensor slices at once.
    fn grad_mut2(
        &mut self,
        params: &ModelParameters,
        a: &str,
        b: &str,
    ) -> (&mut [f64], &mut [f64]) {
        let (oa, la) = params.offset_len(a);
        let (ob, lb) = params.offset_len(b);
        assert!(oa + la <= ob, "tensors {a} and {b} out of order");
        let (left, right) = self.data.split_at_mut(ob);
        (&mut left[oa..oa + la], &mut right[..lb])
    }
}

fn broadcast_mean_grad(dpool: &[f64], rows: &mut [f64], h: usize) {
    let n = rows.len() / h;
    if n == 0 {
        return;
    }
    let inv = 1.0 / n as f64;
    for chunk in rows.chunks_mut(h) {
        for (slot, &g) in chunk.iter_mut().zip(dpool) {
            *slot += g * inv;
        }
    }
}

// t = (out > 0) * dout / r ; db += (out > 0) * dout, summed over rows.
fn relu_scaled(dout: &[f64], out: &[f64], r: &[f64], h: usize, t: &mut [f64], db: &mut [f64]) {
    for i in 0..out.len() / h {
        let inv = 1.0 / r[i];
        for j in 0..h {
            let idx = i * h + j;
            if out[idx] > 0.0 {
                let g = dout[idx];
                db[j] += g;
                t[idx] = g * inv;
            }
        }
    }
}

fn embed_backward(
    features: &[f32],
    width: usize,
    dout: &[f64],
    h: usize,
    dw: &mut [f64],
    db: &mut [f64],
) {
    let rows = features.len() / width;
    for i in 0..rows {
        let grow = &dout[i * h..(i + 1) * h];
        for (j, slot) in db.iter_mut().enumerate() {
            *slot += grow[j];
        }
        let frow = &features[i * width..(i + 1) * width];
        for (f, &fv) in frow.iter().enumerate() {
            let fv = fv as f64;
            if fv != 0.0 {
                let wrow = &mut dw[f * h..(f + 1) * h];
                for j in 0..h {
                    wrow[j] += fv * grow[j];
                }
            }
        }
    }
}

/// Stateful convenience wrapper: `forward` retains the tape that the next
/// `backward` consumes.
pub struct GrassModel {
    params: ModelParameters,
    tape: Option<ForwardTape>,
}

impl GrassModel {
    pub fn new(params: ModelParameters) -> Self {
        Self { params, tape: None }
    }

    pub fn params(&self) -> &ModelParameters {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut ModelParameters {
        self.tape = None;
        &mut self.params
    }

    pub fn into_params(self) -> ModelParameters {
        self.params
    }

    pub fn forward(&mut self, graph: &LiteralClauseGraph) -> Result<SolverDistribution, NnError> {
        let (dist, tape) = forward_with_tape(graph, &self.params)?;
        self.tape = Some(tape);
        Ok(dist)
    }

    /// Errors with [`NnError::StaleTape`] when no forward pass is stored.
    pub fn backward(
        &mut self,
        graph: &LiteralClauseGraph,
        upstream: &[f64],
    ) -> Result<Gradients, NnError> {
        let tape = self.tape.take().ok_or(NnError::StaleTape)?;
        backward(graph, &self.params, &tape, upstream)
    }
}
