use crate::error::{Error, Result};
use crate::nn::{ActivationKind, Padding};
use std::fmt::Write as _;

/// One layer of the architecture, with resolved dimensions.
#[derive(Debug, Clone, PartialEq)]
pub enum LayerSpec {
    Conv {
        kernel: usize,
        in_channels: usize,
        filters: usize,
        padding: Padding,
    },
    Activation(ActivationKind),
    MaxPool {
        window: usize,
        stride: usize,
    },
    Flatten,
    Dense {
        inputs: usize,
        outputs: usize,
    },
    Dropout {
        keep_prob: f32,
    },
    /// Final probability layer; always softmax regardless of the hidden
    /// activation choice.
    SoftmaxOutput,
}

/// Ordered layer descriptors plus the data needed to rebuild a network from
/// a checkpoint: input shape, class count and the class-name table.
#[derive(Debug, Clone, PartialEq)]
pub struct ArchitectureSpec {
    pub input_shape: [usize; 3],
    pub num_classes: usize,
    pub hidden_activation: ActivationKind,
    pub class_names: Vec<String>,
    pub layers: Vec<LayerSpec>,
}

/// Default width of the hidden fully-connected layer.
pub const DEFAULT_HIDDEN_WIDTH: usize = 512;

/// Default dropout keep probability between the two dense layers.
pub const DEFAULT_KEEP_PROB: f32 = 0.8;

impl ArchitectureSpec {
    /// The fixed classifier stack over 100x100x4 inputs:
    ///
    /// ```text
    /// [100,100,4] -> conv 5x5x4x32 (valid)  -> [96,96,32] -> act -> pool 5/5 -> [19,19,32]
    ///             -> conv 5x5x32x64 (valid) -> [15,15,64] -> act -> pool 5/5 -> [3,3,64]
    ///             -> conv 5x5x64x32 (same)  -> [3,3,32]   -> act
    ///             -> flatten [288] -> dense 288x512 -> act -> dropout 0.8
    ///             -> dense 512xK -> softmax
    /// ```
    ///
    /// The two pools use floor semantics (96 and 15 are not multiples of 5),
    /// and the third convolution keeps its extent via same padding; both
    /// choices are what make the stack dimensionally consistent.
    pub fn fishnet(num_classes: usize, hidden_activation: ActivationKind) -> Result<Self> {
        Self::fishnet_with_width(num_classes, hidden_activation, DEFAULT_HIDDEN_WIDTH)
    }

    pub fn fishnet_with_width(
        num_classes: usize,
        hidden_activation: ActivationKind,
        hidden_width: usize,
    ) -> Result<Self> {
        if num_classes < 2 {
            return Err(Error::InvalidParameter(format!(
                "need at least 2 classes, got {num_classes}"
            )));
        }
        if hidden_width == 0 {
            return Err(Error::InvalidParameter("hidden width must be >= 1".into()));
        }
        let act = LayerSpec::Activation(hidden_activation);
        let layers = vec![
            LayerSpec::Conv {
                kernel: 5,
                in_channels: 4,
                filters: 32,
                padding: Padding::Valid,
            },
            act.clone(),
            LayerSpec::MaxPool { window: 5, stride: 5 },
            LayerSpec::Conv {
                kernel: 5,
                in_channels: 32,
                filters: 64,
                padding: Padding::Valid,
            },
            act.clone(),
            LayerSpec::MaxPool { window: 5, stride: 5 },
            LayerSpec::Conv {
                kernel: 5,
                in_channels: 64,
                filters: 32,
                padding: Padding::Same,
            },
            act.clone(),
            LayerSpec::Flatten,
            LayerSpec::Dense {
                inputs: 3 * 3 * 32,
                outputs: hidden_width,
            },
            act,
            LayerSpec::Dropout {
                keep_prob: DEFAULT_KEEP_PROB,
            },
            LayerSpec::Dense {
                inputs: hidden_width,
                outputs: num_classes,
            },
            LayerSpec::SoftmaxOutput,
        ];
        let spec = Self {
            input_shape: [100, 100, 4],
            num_classes,
            hidden_activation,
            class_names: (0..num_classes).map(|i| format!("class_{i}")).collect(),
            layers,
        };
        spec.shape_trace()?;
        Ok(spec)
    }

    /// Resolve the shape after every layer, failing with the offending layer
    /// named if consecutive layers do not chain.
    pub fn shape_trace(&self) -> Result<Vec<Vec<usize>>> {
        let mut shapes = vec![self.input_shape.to_vec()];
        let mut current = self.input_shape.to_vec();
        for (i, layer) in self.layers.iter().enumerate() {
            current = match layer {
                LayerSpec::Conv {
                    kernel,
                    in_channels,
                    filters,
                    padding,
                } => {
                    if current.len() != 3 || current[2] != *in_channels {
                        return Err(trace_error(i, "conv", &current));
                    }
                    match padding {
                        Padding::Valid => {
                            if current[0] < *kernel || current[1] < *kernel {
                                return Err(trace_error(i, "conv", &current));
                            }
                            vec![current[0] - kernel + 1, current[1] - kernel + 1, *filters]
                        }
                        Padding::Same => vec![current[0], current[1], *filters],
                    }
                }
                LayerSpec::Activation(_) => current,
                LayerSpec::MaxPool { window, stride } => {
                    if current.len() != 3
                        || *window == 0
                        || *stride == 0
                        || current[0] < *window
                        || current[1] < *window
                    {
                        return Err(trace_error(i, "maxpool", &current));
                    }
                    vec![
                        (current[0] - window) / stride + 1,
                        (current[1] - window) / stride + 1,
                        current[2],
                    ]
                }
                LayerSpec::Flatten => vec![current.iter().product()],
                LayerSpec::Dense { inputs, outputs } => {
                    if current != [*inputs] {
                        return Err(trace_error(i, "dense", &current));
                    }
                    vec![*outputs]
                }
                LayerSpec::Dropout { keep_prob } => {
                    if !(*keep_prob > 0.0 && *keep_prob <= 1.0) {
                        return Err(trace_error(i, "dropout", &current));
                    }
                    current
                }
                LayerSpec::SoftmaxOutput => {
                    if current != [self.num_classes] {
                        return Err(trace_error(i, "softmax output", &current));
                    }
                    current
                }
            };
            shapes.push(current.clone());
        }
        if current != [self.num_classes] {
            return Err(Error::InvalidShape(format!(
                "final layer width {:?} does not equal the class count {}",
                current, self.num_classes
            )));
        }
        Ok(shapes)
    }

    /// Total number of trainable parameters (filters and biases).
    pub fn parameter_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| match l {
                LayerSpec::Conv {
                    kernel,
                    in_channels,
                    filters,
                    ..
                } => kernel * kernel * in_channels * filters + filters,
                LayerSpec::Dense { inputs, outputs } => inputs * outputs + outputs,
                _ => 0,
            })
            .sum()
    }

    /// Stable plain-text rendering stored inside checkpoints.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "finclass-arch v1");
        let _ = writeln!(
            s,
            "input {} {} {}",
            self.input_shape[0], self.input_shape[1], self.input_shape[2]
        );
        let _ = writeln!(s, "classes {}", self.num_classes);
        let _ = writeln!(s, "activation {}", self.hidden_activation);
        for (i, name) in self.class_names.iter().enumerate() {
            let _ = writeln!(s, "class {i} {name}");
        }
        for layer in &self.layers {
            match layer {
                LayerSpec::Conv {
                    kernel,
                    in_channels,
                    filters,
                    padding,
                } => {
                    let pad = match padding {
                        Padding::Valid => "valid",
                        Padding::Same => "same",
                    };
                    let _ = writeln!(s, "conv k={kernel} cin={in_channels} f={filters} pad={pad}");
                }
                LayerSpec::Activation(kind) => {
                    let _ = writeln!(s, "act {kind}");
                }
                LayerSpec::MaxPool { window, stride } => {
                    let _ = writeln!(s, "pool w={window} s={stride}");
                }
                LayerSpec::Flatten => {
                    let _ = writeln!(s, "flatten");
                }
                LayerSpec::Dense { inputs, outputs } => {
                    let _ = writeln!(s, "dense in={inputs} out={outputs}");
                }
                LayerSpec::Dropout { keep_prob } => {
                    let _ = writeln!(s, "dropout keep={keep_prob}");
                }
                LayerSpec::SoftmaxOutput => {
                    let _ = writeln!(s, "softmax");
                }
            }
        }
        s
    }

    /// Parse the checkpoint text rendering.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().unwrap_or_default();
        if header != "finclass-arch v1" {
            return Err(Error::Format(format!(
                "unknown architecture header '{header}'"
            )));
        }
        let mut input_shape = None;
        let mut num_classes = None;
        let mut hidden_activation = None;
        let mut class_names: Vec<(usize, String)> = Vec::new();
        let mut layers = Vec::new();

        for line in lines {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (word, rest) = line.split_once(' ').unwrap_or((line, ""));
            match word {
                "input" => {
                    let dims: Vec<usize> = rest
                        .split_whitespace()
                        .map(|v| v.parse().map_err(|_| bad_line(line)))
                        .collect::<Result<_>>()?;
                    if dims.len() != 3 {
                        return Err(bad_line(line));
                    }
                    input_shape = Some([dims[0], dims[1], dims[2]]);
                }
                "classes" => {
                    num_classes = Some(rest.parse().map_err(|_| bad_line(line))?);
                }
                "activation" => {
                    hidden_activation = Some(rest.parse()?);
                }
                "class" => {
                    let (idx, name) = rest.split_once(' ').ok_or_else(|| bad_line(line))?;
                    class_names.push((idx.parse().map_err(|_| bad_line(line))?, name.to_string()));
                }
                "conv" => {
                    let kv = parse_kv(rest, line)?;
                    let padding = match kv.get("pad").map(String::as_str) {
                        Some("valid") => Padding::Valid,
                        Some("same") => Padding::Same,
                        _ => return Err(bad_line(line)),
                    };
                    layers.push(LayerSpec::Conv {
                        kernel: get_num(&kv, "k", line)?,
                        in_channels: get_num(&kv, "cin", line)?,
                        filters: get_num(&kv, "f", line)?,
                        padding,
                    });
                }
                "act" => layers.push(LayerSpec::Activation(rest.parse()?)),
                "pool" => {
                    let kv = parse_kv(rest, line)?;
                    layers.push(LayerSpec::MaxPool {
                        window: get_num(&kv, "w", line)?,
                        stride: get_num(&kv, "s", line)?,
                    });
                }
                "flatten" => layers.push(LayerSpec::Flatten),
                "dense" => {
                    let kv = parse_kv(rest, line)?;
                    layers.push(LayerSpec::Dense {
                        inputs: get_num(&kv, "in", line)?,
                        outputs: get_num(&kv, "out", line)?,
                    });
                }
                "dropout" => {
                    let kv = parse_kv(rest, line)?;
                    let keep: f32 = kv
                        .get("keep")
                        .and_then(|v| v.parse().ok())
                        .ok_or_else(|| bad_line(line))?;
                    layers.push(LayerSpec::Dropout { keep_prob: keep });
                }
                "softmax" => layers.push(LayerSpec::SoftmaxOutput),
                _ => return Err(bad_line(line)),
            }
        }

        let num_classes = num_classes.ok_or_else(|| Error::Format("missing class count".into()))?;
        class_names.sort_by_key(|(i, _)| *i);
        let names: Vec<String> = class_names.into_iter().map(|(_, n)| n).collect();
        let spec = Self {
            input_shape: input_shape.ok_or_else(|| Error::Format("missing input shape".into()))?,
            num_classes,
            hidden_activation: hidden_activation
                .ok_or_else(|| Error::Format("missing activation".into()))?,
            class_names: if names.len() == num_classes {
                names
            } else {
                (0..num_classes).map(|i| format!("class_{i}")).collect()
            },
            layers,
        };
        spec.shape_trace()?;
        Ok(spec)
    }
}

fn trace_error(index: usize, kind: &str, incoming: &[usize]) -> Error {
    Error::InvalidShape(format!(
        "layer {index} ({kind}) cannot accept incoming shape {incoming:?}"
    ))
}

fn bad_line(line: &str) -> Error {
    Error::Format(format!("malformed architecture line '{line}'"))
}

fn parse_kv(rest: &str, line: &str) -> Result<std::collections::HashMap<String, String>> {
    rest.split_whitespace()
        .map(|pair| {
            pair.split_once('=')
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .ok_or_else(|| bad_line(line))
        })
        .collect()
}

fn get_num(
    kv: &std::collections::HashMap<String, String>,
    key: &str,
    line: &str,
) -> Result<usize> {
    kv.get(key)
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| bad_line(line))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fishnet_shape_trace() {
        let spec = ArchitectureSpec::fishnet(3, ActivationKind::Relu).unwrap();
        let trace = spec.shape_trace().unwrap();
        assert_eq!(trace[0], vec![100, 100, 4]);
        assert_eq!(trace[1], vec![96, 96, 32]); // first conv
        assert_eq!(trace[3], vec![19, 19, 32]); // first pool
        assert_eq!(trace[4], vec![15, 15, 64]); // second conv
        assert_eq!(trace[6], vec![3, 3, 64]); // second pool
        assert_eq!(trace[7], vec![3, 3, 32]); // same-padded conv
        assert_eq!(trace[9], vec![288]); // flatten
        assert_eq!(*trace.last().unwrap(), vec![3]);
    }

    #[test]
    fn fishnet_parameter_count() {
        // Per-layer closed forms:
        //   conv1: 5*5*4*32 + 32   =   3_232
        //   conv2: 5*5*32*64 + 64  =  51_264
        //   conv3: 5*5*64*32 + 32  =  51_232
        //   dense1: 288*512 + 512  = 147_968
        //   dense2: 512*3 + 3      =   1_539
        let spec = ArchitectureSpec::fishnet(3, ActivationKind::Relu).unwrap();
        assert_eq!(spec.parameter_count(), 3_232 + 51_264 + 51_232 + 147_968 + 1_539);
        assert_eq!(spec.parameter_count(), 255_235);
    }

    #[test]
    fn rejects_single_class() {
        assert!(ArchitectureSpec::fishnet(1, ActivationKind::Relu).is_err());
    }

    #[test]
    fn inconsistent_trace_names_the_layer() {
        let mut spec = ArchitectureSpec::fishnet(3, ActivationKind::Relu).unwrap();
        // Corrupt the first dense layer's width.
        if let LayerSpec::Dense { inputs, .. } = &mut spec.layers[9] {
            *inputs = 289;
        }
        let err = spec.shape_trace().unwrap_err().to_string();
        assert!(err.contains("layer 9"), "unexpected error: {err}");
    }

    #[test]
    fn text_rendering_round_trips() {
        for kind in [
            ActivationKind::Relu,
            ActivationKind::Tanh,
            ActivationKind::Sigmoid,
            ActivationKind::Softmax,
        ] {
            let mut spec = ArchitectureSpec::fishnet(4, kind).unwrap();
            spec.class_names = vec![
                "bar".into(),
                "crescent".into(),
                "ellipse".into(),
                "triangle".into(),
            ];
            let text = spec.to_text();
            let parsed = ArchitectureSpec::from_text(&text).unwrap();
            assert_eq!(parsed, spec);
        }
    }

    #[test]
    fn malformed_text_is_rejected() {
        assert!(ArchitectureSpec::from_text("garbage").is_err());
        assert!(ArchitectureSpec::from_text("finclass-arch v1\nnonsense line").is_err());
    }
}
