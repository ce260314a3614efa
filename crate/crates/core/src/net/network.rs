use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::CoreError;
use crate::net::graph::{Conv1dLayout, GraphInfo, LayerGraphSpec, NodeOp};
use crate::net::mat::Mat;
use crate::net::param::ParamTensor;
use crate::real::{real, Real};

/// Per-node parameter slots (indices into `Network::params`).
#[derive(Debug, Clone, Copy)]
enum NodeParams {
    None,
    Linear { w: usize, b: Option<usize> },
    Conv { w: usize },
}

/// Retained activations from one forward pass; consumed by backward.
#[derive(Debug, Clone)]
pub struct Trace<T> {
    batch: usize,
    acts: Vec<Mat<T>>,
}

/// A compiled feed-forward graph with parameter storage.
///
/// The stateful `forward`/`backward` pair retains activations internally and
/// must be externally serialized; `forward_with_trace`/`backward_pass` are
/// the read-only equivalents used for data-parallel training, where gradient
/// contributions go into caller-owned buffers.
#[derive(Debug, Clone)]
pub struct Network<T> {
    spec: LayerGraphSpec,
    layout: Conv1dLayout,
    info: GraphInfo,
    params: Vec<ParamTensor<T>>,
    node_params: Vec<NodeParams>,
    trace: Option<Trace<T>>,
}

impl<T: Real> Network<T> {
    /// Validates the spec and initializes parameters (Kaiming-uniform fan-in
    /// weights, zero biases) from the given seed.
    pub fn build(spec: LayerGraphSpec, layout: Conv1dLayout, seed: u64) -> Result<Self, CoreError> {
        let info = spec.validate(layout)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = Vec::new();
        let mut node_params = Vec::with_capacity(spec.nodes.len());

        for node in &spec.nodes {
            let np = match &node.op {
                NodeOp::Linear {
                    in_width,
                    out_width,
                    bias,
                } => {
                    let w_idx = params.len();
                    params.push(kaiming(
                        &mut rng,
                        format!("{}.weight", node.name),
                        vec![*out_width, *in_width],
                        *in_width,
                    ));
                    let b_idx = if *bias {
                        params.push(ParamTensor::zeros(
                            format!("{}.bias", node.name),
                            vec![*out_width],
                        ));
                        Some(params.len() - 1)
                    } else {
                        None
                    };
                    NodeParams::Linear { w: w_idx, b: b_idx }
                }
                NodeOp::Conv1d {
                    in_channels,
                    out_channels,
                    kernel,
                } => {
                    let (shape, fan_in) = match layout {
                        Conv1dLayout::ChannelsTimesOne => {
                            (vec![*out_channels, *in_channels, *kernel], in_channels * kernel)
                        }
                        Conv1dLayout::OneChannelValid => (vec![*out_channels, *kernel], *kernel),
                    };
                    let w_idx = params.len();
                    params.push(kaiming(
                        &mut rng,
                        format!("{}.weight", node.name),
                        shape,
                        fan_in,
                    ));
                    NodeParams::Conv { w: w_idx }
                }
                _ => NodeParams::None,
            };
            node_params.push(np);
        }

        Ok(Network {
            spec,
            layout,
            info,
            params,
            node_params,
            trace: None,
        })
    }

    pub fn spec(&self) -> &LayerGraphSpec {
        &self.spec
    }

    pub fn layout(&self) -> Conv1dLayout {
        self.layout
    }

    pub fn output_width(&self) -> usize {
        self.info.widths[self.info.terminal]
    }

    pub fn input_width(&self, tag: &str) -> Option<usize> {
        self.info
            .input_tags
            .iter()
            .find(|(t, _, _)| t == tag)
            .map(|(_, _, w)| *w)
    }

    pub fn params(&self) -> &[ParamTensor<T>] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [ParamTensor<T>] {
        &mut self.params
    }

    pub fn param_count(&self) -> usize {
        self.params.iter().map(|p| p.numel()).sum()
    }

    pub fn zero_grad(&mut self) {
        for p in &mut self.params {
            p.zero_grad();
        }
    }

    /// Forward pass retaining activations internally (single-writer API).
    pub fn forward(&mut self, inputs: &[(&str, &Mat<T>)], batch: usize) -> Result<Mat<T>, CoreError> {
        let (out, trace) = self.forward_with_trace(inputs, batch)?;
        self.trace = Some(trace);
        Ok(out)
    }

    /// Backward for the last retained forward; accumulates into the internal
    /// parameter gradients and returns the gradient per input tag.
    pub fn backward(&mut self, upstream: &Mat<T>) -> Result<BTreeMap<String, Mat<T>>, CoreError> {
        let trace = self
            .trace
            .take()
            .ok_or(CoreError::State("backward called before forward"))?;
        let (pgrads, igrads) = self.backward_pass(&trace, upstream)?;
        for (p, g) in self.params.iter_mut().zip(&pgrads) {
            p.accumulate_grad(g);
        }
        Ok(igrads)
    }

    /// Read-only forward returning the activation trace to the caller.
    pub fn forward_with_trace(
        &self,
        inputs: &[(&str, &Mat<T>)],
        batch: usize,
    ) -> Result<(Mat<T>, Trace<T>), CoreError> {
        let find_input = |tag: &str| -> Result<&Mat<T>, CoreError> {
            inputs
                .iter()
                .find(|(t, _)| *t == tag)
                .map(|(_, m)| *m)
                .ok_or_else(|| CoreError::domain(format!("unbound input tag `{tag}`")))
        };

        let mut acts: Vec<Mat<T>> = Vec::with_capacity(self.spec.nodes.len());
        for (i, node) in self.spec.nodes.iter().enumerate() {
            let srcs = &self.info.sources[i];
            let out = match &node.op {
                NodeOp::Input { width } => {
                    let m = find_input(&node.name)?;
                    if m.cols() != *width || m.rows() != batch {
                        return Err(CoreError::domain(format!(
                            "input `{}` is {}x{}, expected {}x{}",
                            node.name,
                            m.rows(),
                            m.cols(),
                            batch,
                            width
                        )));
                    }
                    m.clone()
                }
                NodeOp::Linear { out_width, .. } => {
                    let x = &acts[srcs[0]];
                    let (w, b) = self.linear_params(i);
                    let mut out = Mat::zeros(batch, *out_width);
                    for r in 0..batch {
                        let xr = x.row(r);
                        let or = out.row_mut(r);
                        for (o, slot) in or.iter_mut().enumerate() {
                            let wrow = &w.values[o * xr.len()..(o + 1) * xr.len()];
                            let mut acc = match b {
                                Some(bias) => bias.values[o],
                                None => T::zero(),
                            };
                            for (xv, wv) in xr.iter().zip(wrow) {
                                acc += *xv * *wv;
                            }
                            *slot = acc;
                        }
                    }
                    out
                }
                NodeOp::Relu => {
                    let x = &acts[srcs[0]];
                    let mut out = x.clone();
                    for v in out.data_mut() {
                        if *v < T::zero() {
                            *v = T::zero();
                        }
                    }
                    out
                }
                NodeOp::Conv1d {
                    in_channels,
                    out_channels,
                    kernel,
                } => {
                    let x = &acts[srcs[0]];
                    let w = self.conv_params(i);
                    self.conv_forward(x, w, *in_channels, *out_channels, *kernel, batch)
                }
                NodeOp::Concat => {
                    let a = &acts[srcs[0]];
                    let b = &acts[srcs[1]];
                    let mut out = Mat::zeros(batch, a.cols() + b.cols());
                    for r in 0..batch {
                        let or = out.row_mut(r);
                        or[..a.cols()].copy_from_slice(a.row(r));
                        or[a.cols()..].copy_from_slice(b.row(r));
                    }
                    out
                }
            };
            acts.push(out);
        }
        let out = acts[self.info.terminal].clone();
        Ok((out, Trace { batch, acts }))
    }

    /// Reverse pass over a trace. Returns per-parameter gradient
    /// contributions (aligned with `params()`) and the gradient for every
    /// input tag; nothing inside `self` is mutated.
    pub fn backward_pass(
        &self,
        trace: &Trace<T>,
        upstream: &Mat<T>,
    ) -> Result<(Vec<Vec<T>>, BTreeMap<String, Mat<T>>), CoreError> {
        let batch = trace.batch;
        let terminal = self.info.terminal;
        if upstream.rows() != batch || upstream.cols() != self.info.widths[terminal] {
            return Err(CoreError::domain(format!(
                "upstream gradient is {}x{}, expected {}x{}",
                upstream.rows(),
                upstream.cols(),
                batch,
                self.info.widths[terminal]
            )));
        }

        let mut pgrads: Vec<Vec<T>> = self.params.iter().map(|p| vec![T::zero(); p.numel()]).collect();
        let mut acc: Vec<Option<Mat<T>>> = vec![None; self.spec.nodes.len()];
        acc[terminal] = Some(upstream.clone());
        let mut input_grads = BTreeMap::new();

        for i in (0..self.spec.nodes.len()).rev() {
            let Some(gout) = acc[i].take() else { continue };
            let srcs = &self.info.sources[i];
            let node = &self.spec.nodes[i];
            match &node.op {
                NodeOp::Input { .. } => {
                    input_grads
                        .entry(node.name.clone())
                        .and_modify(|m: &mut Mat<T>| {
                            for (a, b) in m.data_mut().iter_mut().zip(gout.data()) {
                                *a += *b;
                            }
                        })
                        .or_insert(gout);
                }
                NodeOp::Linear { .. } => {
                    let x = &trace.acts[srcs[0]];
                    let in_w = x.cols();
                    let (w_idx, b_idx) = match self.node_params[i] {
                        NodeParams::Linear { w, b } => (w, b),
                        _ => unreachable!(),
                    };
                    let w = &self.params[w_idx].values;
                    let mut gin = Mat::zeros(batch, in_w);
                    for r in 0..batch {
                        let gr = gout.row(r);
                        let xr = x.row(r);
                        let gi = gin.row_mut(r);
                        for (o, &g) in gr.iter().enumerate() {
                            if g == T::zero() {
                                continue;
                            }
                            let wrow = &w[o * in_w..(o + 1) * in_w];
                            let dwrow = &mut pgrads[w_idx][o * in_w..(o + 1) * in_w];
                            for k in 0..in_w {
                                dwrow[k] += g * xr[k];
                                gi[k] += g * wrow[k];
                            }
                            if let Some(b_idx) = b_idx {
                                pgrads[b_idx][o] += g;
                            }
                        }
                    }
                    accumulate(&mut acc[srcs[0]], gin);
                }
                NodeOp::Relu => {
                    let x = &trace.acts[srcs[0]];
                    let mut gin = gout;
                    for (g, &xv) in gin.data_mut().iter_mut().zip(x.data()) {
                        if xv <= T::zero() {
                            *g = T::zero();
                        }
                    }
                    accumulate(&mut acc[srcs[0]], gin);
                }
                NodeOp::Conv1d {
                    in_channels,
                    out_channels,
                    kernel,
                } => {
                    let x = &trace.acts[srcs[0]];
                    let w_idx = match self.node_params[i] {
                        NodeParams::Conv { w } => w,
                        _ => unreachable!(),
                    };
                    let gin = self.conv_backward(
                        x,
                        &gout,
                        w_idx,
                        &mut pgrads,
                        *in_channels,
                        *out_channels,
                        *kernel,
                        batch,
                    );
                    accumulate(&mut acc[srcs[0]], gin);
                }
                NodeOp::Concat => {
                    let aw = trace.acts[srcs[0]].cols();
                    let bw = trace.acts[srcs[1]].cols();
                    let mut ga = Mat::zeros(batch, aw);
                    let mut gb = Mat::zeros(batch, bw);
                    for r in 0..batch {
                        let gr = gout.row(r);
                        ga.row_mut(r).copy_from_slice(&gr[..aw]);
                        gb.row_mut(r).copy_from_slice(&gr[aw..]);
                    }
                    accumulate(&mut acc[srcs[0]], ga);
                    accumulate(&mut acc[srcs[1]], gb);
                }
            }
        }
        Ok((pgrads, input_grads))
    }

    fn linear_params(&self, node: usize) -> (&ParamTensor<T>, Option<&ParamTensor<T>>) {
        match self.node_params[node] {
            NodeParams::Linear { w, b } => (&self.params[w], b.map(|i| &self.params[i])),
            _ => unreachable!(),
        }
    }

    fn conv_params(&self, node: usize) -> &ParamTensor<T> {
        match self.node_params[node] {
            NodeParams::Conv { w } => &self.params[w],
            _ => unreachable!(),
        }
    }

    fn conv_forward(
        &self,
        x: &Mat<T>,
        w: &ParamTensor<T>,
        in_ch: usize,
        out_ch: usize,
        kernel: usize,
        batch: usize,
    ) -> Mat<T> {
        match self.layout {
            Conv1dLayout::ChannelsTimesOne => {
                // Length-1 sequence zero-padded to the kernel length: only the
                // center tap sees data.
                let mid = kernel / 2;
                let mut out = Mat::zeros(batch, out_ch);
                for r in 0..batch {
                    let xr = x.row(r);
                    let or = out.row_mut(r);
                    for (o, slot) in or.iter_mut().enumerate() {
                        let mut acc = T::zero();
                        for (ic, &xv) in xr.iter().enumerate() {
                            acc += w.values[(o * in_ch + ic) * kernel + mid] * xv;
                        }
                        *slot = acc;
                    }
                }
                out
            }
            Conv1dLayout::OneChannelValid => {
                let len = x.cols();
                let out_len = len - kernel + 1;
                let mut out = Mat::zeros(batch, out_ch * out_len);
                for r in 0..batch {
                    let xr = x.row(r);
                    let or = out.row_mut(r);
                    for o in 0..out_ch {
                        let taps = &w.values[o * kernel..(o + 1) * kernel];
                        for p in 0..out_len {
                            let mut acc = T::zero();
                            for (j, &t) in taps.iter().enumerate() {
                                acc += t * xr[p + j];
                            }
                            or[o * out_len + p] = acc;
                        }
                    }
                }
                out
            }
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn conv_backward(
        &self,
        x: &Mat<T>,
        gout: &Mat<T>,
        w_idx: usize,
        pgrads: &mut [Vec<T>],
        in_ch: usize,
        out_ch: usize,
        kernel: usize,
        batch: usize,
    ) -> Mat<T> {
        let w = &self.params[w_idx].values;
        match self.layout {
            Conv1dLayout::ChannelsTimesOne => {
                let mid = kernel / 2;
                let mut gin = Mat::zeros(batch, in_ch);
                for r in 0..batch {
                    let gr = gout.row(r);
                    let xr = x.row(r);
                    let gi = gin.row_mut(r);
                    for (o, &g) in gr.iter().enumerate() {
                        if g == T::zero() {
                            continue;
                        }
                        for ic in 0..in_ch {
                            let wi = (o * in_ch + ic) * kernel + mid;
                            pgrads[w_idx][wi] += g * xr[ic];
                            gi[ic] += g * w[wi];
                        }
                    }
                }
                gin
            }
            Conv1dLayout::OneChannelValid => {
                let len = x.cols();
                let out_len = len - kernel + 1;
                let mut gin = Mat::zeros(batch, len);
                for r in 0..batch {
                    let gr = gout.row(r);
                    let xr = x.row(r);
                    let gi = gin.row_mut(r);
                    for o in 0..out_ch {
                        for p in 0..out_len {
                            let g = gr[o * out_len + p];
                            if g == T::zero() {
                                continue;
                            }
                            for j in 0..kernel {
                                pgrads[w_idx][o * kernel + j] += g * xr[p + j];
                                gi[p + j] += g * w[o * kernel + j];
                            }
                        }
                    }
                }
                gin
            }
        }
    }
}

fn accumulate<T: Real>(slot: &mut Option<Mat<T>>, contrib: Mat<T>) {
    match slot {
        Some(m) => {
            for (a, b) in m.data_mut().iter_mut().zip(contrib.data()) {
                *a += *b;
            }
        }
        None => *slot = Some(contrib),
    }
}

fn kaiming<T: Real>(rng: &mut ChaCha8Rng, name: String, shape: Vec<usize>, fan_in: usize) -> ParamTensor<T> {
    let bound = (6.0 / fan_in as f64).sqrt();
    let numel: usize = shape.iter().product();
    let values = (0..numel)
        .map(|_| real::<T>(rng.gen_range(-bound..bound)))
        .collect();
    ParamTensor::new(name, shape, values)
}
