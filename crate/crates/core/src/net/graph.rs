use crate::error::CoreError;

/// Interpretation of a feature vector fed to a `Conv1d` node. The source
/// tables only give channel counts and a kernel size, so both plausible
/// layouts are supported behind this switch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Conv1dLayout {
    /// Width-`C` input treated as `C` channels x length 1, zero-padded to the
    /// kernel length so a valid convolution yields one output per channel.
    /// Output width = `out_channels`.
    #[default]
    ChannelsTimesOne,
    /// Width-`W` input treated as 1 channel x length `W`, valid padding.
    /// Output width = `out_channels * (W - kernel + 1)`.
    OneChannelValid,
}

/// One node of a feed-forward graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeOp {
    /// External input bound by tag; the node name is the tag.
    Input { width: usize },
    /// Affine map; `in_width` must match the source width.
    Linear {
        in_width: usize,
        out_width: usize,
        bias: bool,
    },
    Relu,
    /// 1-D convolution over the source feature vector (see [`Conv1dLayout`]).
    Conv1d {
        in_channels: usize,
        out_channels: usize,
        kernel: usize,
    },
    /// Concatenation of exactly two earlier nodes.
    Concat,
}

/// A named node plus the names of the earlier nodes it reads.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeSpec {
    pub name: String,
    pub op: NodeOp,
    pub inputs: Vec<String>,
}

impl std::fmt::Display for NodeSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.op {
            NodeOp::Input { width } => write!(f, "input {} {width}", self.name),
            NodeOp::Linear {
                in_width,
                out_width,
                bias,
            } => write!(
                f,
                "linear {} {} {in_width} {out_width} {}",
                self.name,
                self.inputs[0],
                if *bias { "bias" } else { "nobias" }
            ),
            NodeOp::Relu => write!(f, "relu {} {}", self.name, self.inputs[0]),
            NodeOp::Conv1d {
                in_channels,
                out_channels,
                kernel,
            } => write!(
                f,
                "conv1d {} {} {in_channels} {out_channels} {kernel}",
                self.name, self.inputs[0]
            ),
            NodeOp::Concat => write!(f, "concat {} {} {}", self.name, self.inputs[0], self.inputs[1]),
        }
    }
}

impl std::str::FromStr for NodeSpec {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self, CoreError> {
        let toks: Vec<&str> = s.split_whitespace().collect();
        let bad = |msg: &str| CoreError::spec(s.trim(), msg);
        let parse_n = |t: &str| -> Result<usize, CoreError> {
            t.parse::<usize>()
                .map_err(|_| CoreError::spec(s.trim(), format!("invalid number `{t}`")))
        };
        match toks.as_slice() {
            ["input", name, w] => Ok(NodeSpec {
                name: name.to_string(),
                op: NodeOp::Input { width: parse_n(w)? },
                inputs: vec![],
            }),
            ["linear", name, src, w_in, w_out, b] => {
                let bias = match *b {
                    "bias" => true,
                    "nobias" => false,
                    _ => return Err(bad("expected `bias` or `nobias`")),
                };
                Ok(NodeSpec {
                    name: name.to_string(),
                    op: NodeOp::Linear {
                        in_width: parse_n(w_in)?,
                        out_width: parse_n(w_out)?,
                        bias,
                    },
                    inputs: vec![src.to_string()],
                })
            }
            ["relu", name, src] => Ok(NodeSpec {
                name: name.to_string(),
                op: NodeOp::Relu,
                inputs: vec![src.to_string()],
            }),
            ["conv1d", name, src, c_in, c_out, k] => Ok(NodeSpec {
                name: name.to_string(),
                op: NodeOp::Conv1d {
                    in_channels: parse_n(c_in)?,
                    out_channels: parse_n(c_out)?,
                    kernel: parse_n(k)?,
                },
                inputs: vec![src.to_string()],
            }),
            ["concat", name, a, b] => Ok(NodeSpec {
                name: name.to_string(),
                op: NodeOp::Concat,
                inputs: vec![a.to_string(), b.to_string()],
            }),
            _ => Err(bad("unrecognized node line")),
        }
    }
}

/// Declarative description of a feed-forward net as an ordered node list.
/// Sources must name earlier nodes, which makes the graph acyclic by
/// construction; validation additionally checks widths and that exactly one
/// node is left unconsumed (the output).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LayerGraphSpec {
    pub nodes: Vec<NodeSpec>,
}

/// Width/topology facts computed by validation.
#[derive(Debug, Clone)]
pub struct GraphInfo {
    pub widths: Vec<usize>,
    /// Resolved source node indices per node.
    pub sources: Vec<Vec<usize>>,
    pub terminal: usize,
    /// `(tag, node index, width)` for every input node.
    pub input_tags: Vec<(String, usize, usize)>,
}

impl LayerGraphSpec {
    pub fn new(nodes: Vec<NodeSpec>) -> Self {
        LayerGraphSpec { nodes }
    }

    /// Parses one node per line; `#` comments and blank lines are skipped.
    pub fn from_lines<'a>(lines: impl IntoIterator<Item = &'a str>) -> Result<Self, CoreError> {
        let mut nodes = Vec::new();
        for line in lines {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            nodes.push(line.parse()?);
        }
        Ok(LayerGraphSpec { nodes })
    }

    pub fn to_lines(&self) -> Vec<String> {
        self.nodes.iter().map(|n| n.to_string()).collect()
    }

    pub fn validate(&self, layout: Conv1dLayout) -> Result<GraphInfo, CoreError> {
        if self.nodes.is_empty() {
            return Err(CoreError::spec("<empty>", "graph has no nodes"));
        }
        let mut widths: Vec<usize> = Vec::with_capacity(self.nodes.len());
        let mut sources: Vec<Vec<usize>> = Vec::with_capacity(self.nodes.len());
        let mut consumed = vec![0usize; self.nodes.len()];
        let mut input_tags = Vec::new();
        let mut index_of = std::collections::BTreeMap::new();

        for (i, node) in self.nodes.iter().enumerate() {
            if node.name.is_empty() || node.name.contains(char::is_whitespace) {
                return Err(CoreError::spec(&node.name, "node name must be a single token"));
            }
            if index_of.contains_key(&node.name) {
                return Err(CoreError::spec(&node.name, "duplicate node name"));
            }

            let mut srcs = Vec::with_capacity(node.inputs.len());
            for input in &node.inputs {
                let &idx = index_of.get(input).ok_or_else(|| {
                    CoreError::spec(
                        &node.name,
                        format!("source `{input}` is not an earlier node"),
                    )
                })?;
                consumed[idx] += 1;
                srcs.push(idx);
            }

            let expect_inputs = |n: usize| -> Result<(), CoreError> {
                if node.inputs.len() != n {
                    Err(CoreError::spec(
                        &node.name,
                        format!("expected {n} source(s), got {}", node.inputs.len()),
                    ))
                } else {
                    Ok(())
                }
            };

            let width = match &node.op {
                NodeOp::Input { width } => {
                    expect_inputs(0)?;
                    if *width == 0 {
                        return Err(CoreError::spec(&node.name, "input width must be >= 1"));
                    }
                    input_tags.push((node.name.clone(), i, *width));
                    *width
                }
                NodeOp::Linear {
                    in_width,
                    out_width,
                    ..
                } => {
                    expect_inputs(1)?;
                    let actual = widths[srcs[0]];
                    if *in_width != actual {
                        return Err(CoreError::spec(
                            &node.name,
                            format!("declared in-width {in_width} != source width {actual}"),
                        ));
                    }
                    if *out_width == 0 {
                        return Err(CoreError::spec(&node.name, "out width must be >= 1"));
                    }
                    *out_width
                }
                NodeOp::Relu => {
                    expect_inputs(1)?;
                    widths[srcs[0]]
                }
                NodeOp::Conv1d {
                    in_channels,
                    out_channels,
                    kernel,
                } => {
                    expect_inputs(1)?;
                    let actual = widths[srcs[0]];
                    if *in_channels != actual {
                        return Err(CoreError::spec(
                            &node.name,
                            format!("declared in-channels {in_channels} != source width {actual}"),
                        ));
                    }
                    if *kernel == 0 || *out_channels == 0 {
                        return Err(CoreError::spec(&node.name, "kernel and channels must be >= 1"));
                    }
                    match layout {
                        Conv1dLayout::ChannelsTimesOne => *out_channels,
                        Conv1dLayout::OneChannelValid => {
                            if *kernel > actual {
                                return Err(CoreError::spec(
                                    &node.name,
                                    format!("kernel {kernel} exceeds sequence length {actual}"),
                                ));
                            }
                            out_channels * (actual - kernel + 1)
                        }
                    }
                }
                NodeOp::Concat => {
                    expect_inputs(2)?;
                    widths[srcs[0]] + widths[srcs[1]]
                }
            };
            widths.push(width);
            sources.push(srcs);
            index_of.insert(node.name.clone(), i);
        }

        let unconsumed: Vec<usize> = (0..self.nodes.len()).filter(|&i| consumed[i] == 0).collect();
        match unconsumed.as_slice() {
            [terminal] => Ok(GraphInfo {
                widths,
                sources,
                terminal: *terminal,
                input_tags,
            }),
            [] => Err(CoreError::spec("<graph>", "no terminal output node")),
            many => {
                let names: Vec<&str> = many.iter().map(|&i| self.nodes[i].name.as_str()).collect();
                Err(CoreError::spec(
                    names.join(","),
                    "more than one unconsumed node; exactly one output is required",
                ))
            }
        }
    }
}

/// Convenience builder used by the prebuilt architecture tables.
#[derive(Debug, Default)]
pub struct SpecBuilder {
    nodes: Vec<NodeSpec>,
}

impl SpecBuilder {
    pub fn new() -> Self {
        SpecBuilder::default()
    }

    pub fn input(mut self, tag: &str, width: usize) -> Self {
        self.nodes.push(NodeSpec {
            name: tag.to_string(),
            op: NodeOp::Input { width },
            inputs: vec![],
        });
        self
    }

    pub fn linear(mut self, name: &str, src: &str, in_width: usize, out_width: usize, bias: bool) -> Self {
        self.nodes.push(NodeSpec {
            name: name.to_string(),
            op: NodeOp::Linear {
                in_width,
                out_width,
                bias,
            },
            inputs: vec![src.to_string()],
        });
        self
    }

    pub fn relu(mut self, name: &str, src: &str) -> Self {
        self.nodes.push(NodeSpec {
            name: name.to_string(),
            op: NodeOp::Relu,
            inputs: vec![src.to_string()],
        });
        self
    }

    pub fn conv1d(mut self, name: &str, src: &str, in_ch: usize, out_ch: usize, kernel: usize) -> Self {
        self.nodes.push(NodeSpec {
            name: name.to_string(),
            op: NodeOp::Conv1d {
                in_channels: in_ch,
                out_channels: out_ch,
                kernel,
            },
            inputs: vec![src.to_string()],
        });
        self
    }

    pub fn concat(mut self, name: &str, a: &str, b: &str) -> Self {
        self.nodes.push(NodeSpec {
            name: name.to_string(),
            op: NodeOp::Concat,
            inputs: vec![a.to_string(), b.to_string()],
        });
        self
    }

    pub fn build(self) -> LayerGraphSpec {
        LayerGraphSpec { nodes: self.nodes }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mlp() -> LayerGraphSpec {
        SpecBuilder::new()
            .input("x", 32)
            .linear("h", "x", 32, 64, false)
            .relu("hr", "h")
            .linear("out", "hr", 64, 3, false)
            .build()
    }

    #[test]
    fn valid_graph_reports_widths_and_terminal() {
        let spec = mlp();
        let info = spec.validate(Conv1dLayout::default()).unwrap();
        assert_eq!(info.widths, vec![32, 64, 64, 3]);
        assert_eq!(info.terminal, 3);
        assert_eq!(info.input_tags.len(), 1);
    }

    #[test]
    fn width_mismatch_names_offending_node() {
        let spec = SpecBuilder::new()
            .input("x", 4)
            .linear("l", "x", 4, 3, false)
            .concat("c", "x", "l")
            .linear("bad", "c", 6, 2, false) // concat width is 7
            .build();
        match spec.validate(Conv1dLayout::default()) {
            Err(CoreError::GraphSpec { node, .. }) => assert_eq!(node, "bad"),
            other => panic!("expected spec error, got {other:?}"),
        }
    }

    #[test]
    fn forward_reference_rejected() {
        let spec = LayerGraphSpec::new(vec![
            NodeSpec {
                name: "l".into(),
                op: NodeOp::Relu,
                inputs: vec!["x".into()],
            },
            NodeSpec {
                name: "x".into(),
                op: NodeOp::Input { width: 4 },
                inputs: vec![],
            },
        ]);
        assert!(spec.validate(Conv1dLayout::default()).is_err());
    }

    #[test]
    fn two_sinks_rejected() {
        let spec = SpecBuilder::new()
            .input("x", 4)
            .linear("a", "x", 4, 2, false)
            .linear("b", "x", 4, 2, false)
            .build();
        assert!(spec.validate(Conv1dLayout::default()).is_err());
    }

    #[test]
    fn conv_widths_depend_on_layout() {
        let spec = SpecBuilder::new()
            .input("x", 48)
            .conv1d("c", "x", 48, 32, 3)
            .build();
        let a = spec.validate(Conv1dLayout::ChannelsTimesOne).unwrap();
        assert_eq!(a.widths[1], 32);
        let b = spec.validate(Conv1dLayout::OneChannelValid).unwrap();
        assert_eq!(b.widths[1], 32 * 46);
    }

    #[test]
    fn line_format_round_trips() {
        let spec = SpecBuilder::new()
            .input("geo", 15)
            .input("views", 15)
            .concat("x0", "geo", "views")
            .linear("h1", "x0", 30, 64, false)
            .relu("h1r", "h1")
            .conv1d("c1", "h1r", 64, 8, 3)
            .build();
        let lines = spec.to_lines();
        let parsed = LayerGraphSpec::from_lines(lines.iter().map(|s| s.as_str())).unwrap();
        assert_eq!(parsed, spec);
    }
}
