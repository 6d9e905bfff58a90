use std::fmt;

use serde::{Deserialize, Serialize};

/// Tensor shape without the batch axis: `[n]` or `[height, width, channels]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TensorShape(pub Vec<u64>);

impl TensorShape {
    pub fn new(dims: impl Into<Vec<u64>>) -> Self {
        TensorShape(dims.into())
    }

    pub fn rank(&self) -> usize {
        self.0.len()
    }

    pub fn dims(&self) -> &[u64] {
        &self.0
    }

    pub fn elements(&self) -> u64 {
        self.0.iter().product()
    }

    pub fn channels(&self) -> u64 {
        self.0.last().copied().unwrap_or(1)
    }
}

impl fmt::Display for TensorShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let dims: Vec<String> = self.0.iter().map(u64::to_string).collect();
        write!(f, "[{}]", dims.join("x"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Padding {
    Same,
    Valid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Sigmoid,
    Tanh,
    Linear,
    Softmax,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PoolType {
    Max,
    Average,
}

macro_rules! token_enum {
    ($t:ty { $($v:ident => $s:literal),* $(,)? }) => {
        impl $t {
            pub fn as_str(self) -> &'static str {
                match self { $(Self::$v => $s),* }
            }

            pub fn from_token(s: &str) -> Option<Self> {
                match s { $($s => Some(Self::$v),)* _ => None }
            }
        }

        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }
    };
}

token_enum!(Padding { Same => "same", Valid => "valid" });
token_enum!(Activation {
    Relu => "relu",
    Sigmoid => "sigmoid",
    Tanh => "tanh",
    Linear => "linear",
    Softmax => "softmax",
});
token_enum!(PoolType { Max => "max", Average => "average" });

#[derive(Debug, Clone, PartialEq)]
pub enum Layer {
    Input,
    Zeros,
    Identity,
    Dense { neurons: u64, activation: Activation },
    Convolution { kernel: u64, filters: u64, stride: u64, padding: Padding, activation: Activation },
    Pooling { kernel: u64, stride: u64, padding: Padding, pool: PoolType },
    Void,
    Flatten,
    Padding { amount: u64 },
    Activation { function: Activation },
    Dropout { rate: f64 },
    BatchNorm,
    Sum,
    Concat,
    Product,
    Classifier { classes: u64 },
}

impl Layer {
    pub fn kind(&self) -> &'static str {
        match self {
            Layer::Input => "input",
            Layer::Zeros => "zeros",
            Layer::Identity => "identity",
            Layer::Dense { .. } => "dense",
            Layer::Convolution { .. } => "convolution",
            Layer::Pooling { .. } => "pooling",
            Layer::Void => "void",
            Layer::Flatten => "flatten",
            Layer::Padding { .. } => "padding",
            Layer::Activation { .. } => "activation",
            Layer::Dropout { .. } => "dropout",
            Layer::BatchNorm => "batchnorm",
            Layer::Sum => "sum",
            Layer::Concat => "concat",
            Layer::Product => "product",
            Layer::Classifier { .. } => "classifier",
        }
    }

    pub fn is_combination(&self) -> bool {
        matches!(self, Layer::Sum | Layer::Concat | Layer::Product)
    }

    /// Number of inputs the layer takes.
    pub fn arity(&self) -> usize {
        match self {
            Layer::Input => 0,
            Layer::Sum | Layer::Concat | Layer::Product => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ShapeErrorKind {
    KernelTooLarge,
    FlattenOn1D,
    IncompatibleCombination,
    RankMismatch,
    Arity,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShapeError {
    pub kind: ShapeErrorKind,
    pub message: String,
}

fn err(kind: ShapeErrorKind, message: String) -> ShapeError {
    ShapeError { kind, message }
}

fn window(n: u64, k: u64, s: u64, padding: Padding) -> Result<u64, ShapeError> {
    match padding {
        Padding::Same => Ok(n.div_ceil(s)),
        Padding::Valid if k > n => {
            Err(err(ShapeErrorKind::KernelTooLarge, format!("kernel {k} exceeds spatial size {n}")))
        }
        Padding::Valid => Ok((n - k) / s + 1),
    }
}

fn need_rank(layer: &Layer, shape: &TensorShape, rank: usize) -> Result<(), ShapeError> {
    if shape.rank() != rank {
        return Err(err(
            ShapeErrorKind::RankMismatch,
            format!("{} expects a {rank}-D input, got {shape}", layer.kind()),
        ));
    }
    Ok(())
}

/// Output shape of `layer` applied to `inputs`. `Input` takes no inputs and
/// is not handled here.
pub fn infer_shape(layer: &Layer, inputs: &[TensorShape]) -> Result<TensorShape, ShapeError> {
    if inputs.len() != layer.arity() {
        return Err(err(
            ShapeErrorKind::Arity,
            format!("{} takes {} input(s), got {}", layer.kind(), layer.arity(), inputs.len()),
        ));
    }
    let x = || &inputs[0];
    match layer {
        Layer::Input => Err(err(ShapeErrorKind::Arity, "input layer has no inputs".into())),
        Layer::Zeros | Layer::Identity | Layer::Void | Layer::Activation { .. } | Layer::Dropout { .. } => {
            Ok(x().clone())
        }
        Layer::BatchNorm => Ok(x().clone()),
        Layer::Dense { neurons, .. } => {
            need_rank(layer, x(), 1)?;
            Ok(TensorShape::new([*neurons]))
        }
        Layer::Classifier { classes } => {
            need_rank(layer, x(), 1)?;
            Ok(TensorShape::new([*classes]))
        }
        Layer::Convolution { kernel, filters, stride, padding, .. } => {
            need_rank(layer, x(), 3)?;
            let d = x().dims();
            Ok(TensorShape::new([
                window(d[0], *kernel, *stride, *padding)?,
                window(d[1], *kernel, *stride, *padding)?,
                *filters,
            ]))
        }
        Layer::Pooling { kernel, stride, padding, .. } => {
            need_rank(layer, x(), 3)?;
            let d = x().dims();
            Ok(TensorShape::new([
                window(d[0], *kernel, *stride, *padding)?,
                window(d[1], *kernel, *stride, *padding)?,
                d[2],
            ]))
        }
        Layer::Flatten => {
            if x().rank() <= 1 {
                return Err(err(ShapeErrorKind::FlattenOn1D, format!("flatten on 1-D input {}", x())));
            }
            Ok(TensorShape::new([x().elements()]))
        }
        Layer::Padding { amount } => {
            need_rank(layer, x(), 3)?;
            let d = x().dims();
            Ok(TensorShape::new([d[0] + 2 * amount, d[1] + 2 * amount, d[2]]))
        }
        Layer::Sum => {
            let (a, b) = (&inputs[0], &inputs[1]);
            if a != b {
                return Err(err(ShapeErrorKind::IncompatibleCombination, format!("sum of {a} and {b}")));
            }
            Ok(a.clone())
        }
        Layer::Concat => {
            let (a, b) = (&inputs[0], &inputs[1]);
            let r = a.rank();
            if r != b.rank() || r == 0 || a.dims()[..r - 1] != b.dims()[..r - 1] {
                return Err(err(ShapeErrorKind::IncompatibleCombination, format!("concat of {a} and {b}")));
            }
            let mut d = a.0.clone();
            d[r - 1] += b.dims()[r - 1];
            Ok(TensorShape(d))
        }
        Layer::Product => {
            let (a, b) = (&inputs[0], &inputs[1]);
            if a == b {
                return Ok(a.clone());
            }
            if a.rank() == 2 && b.rank() == 2 && a.dims()[1] == b.dims()[0] {
                return Ok(TensorShape::new([a.dims()[0], b.dims()[1]]));
            }
            Err(err(ShapeErrorKind::IncompatibleCombination, format!("product of {a} and {b}")))
        }
    }
}

/// Trainable weights of `layer` given its input shapes.
pub fn count_params(layer: &Layer, inputs: &[TensorShape]) -> u64 {
    let in_last = || inputs.first().map(TensorShape::channels).unwrap_or(0);
    match layer {
        Layer::Convolution { kernel, filters, .. } => filters * (kernel * kernel * in_last() + 1),
        Layer::Dense { neurons, .. } => neurons * (in_last() + 1),
        Layer::Classifier { classes } => classes * (in_last() + 1),
        Layer::BatchNorm => 2 * in_last(),
        _ => 0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(d: &[u64]) -> TensorShape {
        TensorShape::new(d)
    }

    fn conv(kernel: u64, filters: u64, stride: u64, padding: Padding) -> Layer {
        Layer::Convolution { kernel, filters, stride, padding, activation: Activation::Relu }
    }

    #[test]
    fn convolution_shapes() {
        assert_eq!(infer_shape(&conv(5, 6, 1, Padding::Valid), &[s(&[28, 28, 1])]).unwrap(), s(&[24, 24, 6]));
        assert_eq!(infer_shape(&conv(3, 8, 2, Padding::Same), &[s(&[7, 7, 3])]).unwrap(), s(&[4, 4, 8]));
        let e = infer_shape(&conv(5, 6, 1, Padding::Valid), &[s(&[4, 4, 1])]).unwrap_err();
        assert_eq!(e.kind, ShapeErrorKind::KernelTooLarge);
    }

    #[test]
    fn pooling_and_flatten() {
        let pool = Layer::Pooling { kernel: 2, stride: 2, padding: Padding::Valid, pool: PoolType::Max };
        assert_eq!(infer_shape(&pool, &[s(&[24, 24, 6])]).unwrap(), s(&[12, 12, 6]));
        assert_eq!(infer_shape(&Layer::Flatten, &[s(&[24, 24, 6])]).unwrap(), s(&[3456]));
        assert_eq!(infer_shape(&Layer::Flatten, &[s(&[3456])]).unwrap_err().kind, ShapeErrorKind::FlattenOn1D);
    }

    #[test]
    fn combinations() {
        let a = s(&[8, 8, 3]);
        let b = s(&[8, 8, 5]);
        assert_eq!(infer_shape(&Layer::Concat, &[a.clone(), b.clone()]).unwrap(), s(&[8, 8, 8]));
        assert_eq!(
            infer_shape(&Layer::Concat, &[a.clone(), s(&[4, 4, 3])]).unwrap_err().kind,
            ShapeErrorKind::IncompatibleCombination
        );
        assert_eq!(
            infer_shape(&Layer::Sum, &[a.clone(), b]).unwrap_err().kind,
            ShapeErrorKind::IncompatibleCombination
        );
        assert_eq!(infer_shape(&Layer::Product, &[s(&[2, 3]), s(&[3, 4])]).unwrap(), s(&[2, 4]));
        assert_eq!(infer_shape(&Layer::Product, &[a.clone(), a.clone()]).unwrap(), a);
    }

    #[test]
    fn dense_requires_vector() {
        let d = Layer::Dense { neurons: 10, activation: Activation::Relu };
        assert_eq!(infer_shape(&d, &[s(&[4, 4, 1])]).unwrap_err().kind, ShapeErrorKind::RankMismatch);
    }

    #[test]
    fn parameter_counts() {
        assert_eq!(count_params(&conv(5, 6, 1, Padding::Same), &[s(&[28, 28, 1])]), 156);
        let d = Layer::Dense { neurons: 84, activation: Activation::Relu };
        assert_eq!(count_params(&d, &[s(&[120])]), 10_164);
        assert_eq!(count_params(&Layer::BatchNorm, &[s(&[5, 5, 16])]), 32);
        let pool = Layer::Pooling { kernel: 2, stride: 2, padding: Padding::Valid, pool: PoolType::Average };
        assert_eq!(count_params(&pool, &[s(&[24, 24, 6])]), 0);
    }
}
