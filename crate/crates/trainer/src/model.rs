//! Fully connected network with a logistic output unit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use wsol_core::Scalar;

use crate::error::{Result, TrainError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    #[default]
    Tanh,
    Sigmoid,
    Relu,
}

impl Activation {
    fn apply<T: Scalar>(self, z: T) -> T {
        match self {
            Activation::Tanh => z.tanh(),
            Activation::Sigmoid => logistic(z),
            Activation::Relu => z.max(T::zero()),
        }
    }

    /// Derivative from the pre-activation `z` and output `h`.
    fn derivative<T: Scalar>(self, z: T, h: T) -> T {
        match self {
            Activation::Tanh => T::one() - h * h,
            Activation::Sigmoid => h * (T::one() - h),
            Activation::Relu => {
                if z > T::zero() {
                    T::one()
                } else {
                    T::zero()
                }
            }
        }
    }
}

fn logistic<T: Scalar>(z: T) -> T {
    if z >= T::zero() {
        T::one() / (T::one() + (-z).exp())
    } else {
        let e = z.exp();
        e / (T::one() + e)
    }
}

/// Keeps outputs strictly inside (0, 1) where the logistic saturates.
fn output_margin<T: Scalar>() -> T {
    T::lit(16.0) * T::epsilon()
}

/// Dense layer, `weights` row-major `outputs × inputs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "T: Scalar + Serialize",
    deserialize = "T: Scalar + Deserialize<'de>"
))]
pub struct Layer<T: Scalar> {
    pub inputs: usize,
    pub outputs: usize,
    pub weights: Vec<T>,
    pub biases: Vec<T>,
}

/// Checkpoint layout: `{"sizes": [...], "hidden": "tanh", "layers": [...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[serde(bound(
    serialize = "T: Scalar + Serialize",
    deserialize = "T: Scalar + Deserialize<'de>"
))]
struct RawMlp<T: Scalar> {
    sizes: Vec<usize>,
    hidden: Activation,
    layers: Vec<Layer<T>>,
}

/// Feed-forward network `m → h_1 → … → 1` with logistic output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMlp<T>", into = "RawMlp<T>")]
#[serde(bound(
    serialize = "T: Scalar + Serialize",
    deserialize = "T: Scalar + Deserialize<'de>"
))]
pub struct Mlp<T: Scalar> {
    sizes: Vec<usize>,
    hidden: Activation,
    layers: Vec<Layer<T>>,
}

impl<T: Scalar> TryFrom<RawMlp<T>> for Mlp<T> {
    type Error = TrainError;

    fn try_from(raw: RawMlp<T>) -> Result<Self> {
        check_sizes(&raw.sizes)?;
        if raw.layers.len() != raw.sizes.len() - 1 {
            return Err(TrainError::InvalidModel("layer count does not match sizes".into()));
        }
        for (k, l) in raw.layers.iter().enumerate() {
            let ok = l.inputs == raw.sizes[k]
                && l.outputs == raw.sizes[k + 1]
                && l.weights.len() == l.inputs * l.outputs
                && l.biases.len() == l.outputs;
            if !ok {
                return Err(TrainError::InvalidModel(format!("layer {k} has inconsistent shape")));
            }
        }
        Ok(Self {
            sizes: raw.sizes,
            hidden: raw.hidden,
            layers: raw.layers,
        })
    }
}

impl<T: Scalar> From<Mlp<T>> for RawMlp<T> {
    fn from(m: Mlp<T>) -> Self {
        Self {
            sizes: m.sizes,
            hidden: m.hidden,
            layers: m.layers,
        }
    }
}

fn check_sizes(sizes: &[usize]) -> Result<()> {
    if sizes.len() < 2 {
        return Err(TrainError::InvalidModel("need at least input and output sizes".into()));
    }
    if sizes.contains(&0) {
        return Err(TrainError::InvalidModel("layer sizes must be positive".into()));
    }
    if *sizes.last().expect("non-empty") != 1 {
        return Err(TrainError::InvalidModel("output layer must have width 1".into()));
    }
    Ok(())
}

/// Per-layer pre-activations and outputs of one forward pass.
struct Trace<T> {
    pre: Vec<Vec<T>>,
    post: Vec<Vec<T>>,
}

impl<T: Scalar> Mlp<T> {
    /// Weights uniform on `±1/√fan_in`, biases zero.
    pub fn new(sizes: &[usize], hidden: Activation, seed: u64) -> Result<Self> {
        check_sizes(sizes)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layers = sizes
            .windows(2)
            .map(|w| {
                let (inputs, outputs) = (w[0], w[1]);
                let bound = 1.0 / (inputs as f64).sqrt();
                Layer {
                    inputs,
                    outputs,
                    weights: (0..inputs * outputs)
                        .map(|_| T::lit(rng.gen_range(-bound..bound)))
                        .collect(),
                    biases: vec![T::zero(); outputs],
                }
            })
            .collect();
        Ok(Self {
            sizes: sizes.to_vec(),
            hidden,
            layers,
        })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn inputs(&self) -> usize {
        self.sizes[0]
    }

    pub fn hidden(&self) -> Activation {
        self.hidden
    }

    pub fn layers(&self) -> &[Layer<T>] {
        &self.layers
    }

    pub fn num_params(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.biases.len()).sum()
    }

    /// Flat parameters: per layer, weights then biases.
    pub fn params(&self) -> Vec<T> {
        let mut out = Vec::with_capacity(self.num_params());
        for l in &self.layers {
            out.extend_from_slice(&l.weights);
            out.extend_from_slice(&l.biases);
        }
        out
    }

    pub fn set_params(&mut self, params: &[T]) -> Result<()> {
        if params.len() != self.num_params() {
            return Err(TrainError::InvalidModel(format!(
                "expected {} parameters, got {}",
                self.num_params(),
                params.len()
            )));
        }
        let mut at = 0;
        for l in &mut self.layers {
            let nw = l.weights.len();
            l.weights.copy_from_slice(&params[at..at + nw]);
            at += nw;
            let nb = l.biases.len();
            l.biases.copy_from_slice(&params[at..at + nb]);
            at += nb;
        }
        Ok(())
    }

    fn check_input(&self, x: &[T]) -> Result<()> {
        if x.len() != self.inputs() {
            return Err(TrainError::Input(format!(
                "expected {} features, got {}",
                self.inputs(),
                x.len()
            )));
        }
        Ok(())
    }

    fn trace(&self, x: &[T]) -> Trace<T> {
        let mut pre = Vec::with_capacity(self.layers.len());
        let mut post: Vec<Vec<T>> = Vec::with_capacity(self.layers.len() + 1);
        post.push(x.to_vec());
        let last = self.layers.len() - 1;
        for (k, l) in self.layers.iter().enumerate() {
            let input = &post[k];
            let z: Vec<T> = (0..l.outputs)
                .map(|o| {
                    let row = &l.weights[o * l.inputs..(o + 1) * l.inputs];
                    row.iter().zip(input).fold(l.biases[o], |acc, (w, h)| acc + *w * *h)
                })
                .collect();
            let h = if k == last {
                z.iter().map(|&v| logistic(v)).collect()
            } else {
                z.iter().map(|&v| self.hidden.apply(v)).collect()
            };
            pre.push(z);
            post.push(h);
        }
        Trace { pre, post }
    }

    /// `ŷ(x) ∈ (0, 1)`.
    pub fn forward(&self, x: &[T]) -> Result<T> {
        self.check_input(x)?;
        Ok(clamp_output(self.trace(x).post.last().expect("output")[0]))
    }

    pub fn predict(&self, features: &[Vec<T>]) -> Result<Vec<T>> {
        features.iter().map(|x| self.forward(x)).collect()
    }

    /// Predictions and `Σ_i g_i ∂ŷ_i/∂θ` for upstream gradients `g`.
    pub fn backward(&self, features: &[Vec<T>], upstream: &[T]) -> Result<Vec<T>> {
        if features.len() != upstream.len() {
            return Err(TrainError::Input("feature and gradient lengths differ".into()));
        }
        let mut grad = vec![T::zero(); self.num_params()];
        let offsets = self.offsets();
        for (x, &g) in features.iter().zip(upstream) {
            self.check_input(x)?;
            if g == T::zero() {
                continue;
            }
            let tr = self.trace(x);
            let last = self.layers.len() - 1;
            let y = tr.post[last + 1][0];
            // dŷ/dz of the logistic; clamping is ignored as it only bites at saturation
            let mut delta = vec![g * y * (T::one() - y)];
            for k in (0..=last).rev() {
                let l = &self.layers[k];
                let input = &tr.post[k];
                let base = offsets[k];
                for o in 0..l.outputs {
                    let d = delta[o];
                    for (q, h) in input.iter().enumerate() {
                        let idx = base + o * l.inputs + q;
                        grad[idx] = grad[idx] + d * *h;
                    }
                    let bidx = base + l.weights.len() + o;
                    grad[bidx] = grad[bidx] + d;
                }
                if k > 0 {
                    let mut next = vec![T::zero(); l.inputs];
                    for o in 0..l.outputs {
                        let row = &l.weights[o * l.inputs..(o + 1) * l.inputs];
                        for (q, w) in row.iter().enumerate() {
                            next[q] = next[q] + delta[o] * *w;
                        }
                    }
                    for (q, v) in next.iter_mut().enumerate() {
                        *v = *v * self.hidden.derivative(tr.pre[k - 1][q], tr.post[k][q]);
                    }
                    delta = next;
                }
            }
        }
        Ok(grad)
    }

    fn offsets(&self) -> Vec<usize> {
        let mut at = 0;
        self.layers
            .iter()
            .map(|l| {
                let o = at;
                at += l.weights.len() + l.biases.len();
                o
            })
            .collect()
    }
}

fn clamp_output<T: Scalar>(y: T) -> T {
    let m = output_margin::<T>();
    y.max(m).min(T::one() - m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn output_is_a_probability() {
        let m = Mlp::<f64>::new(&[2, 3, 1], Activation::Tanh, 1).unwrap();
        for x in [[0.0, 0.0], [1e3, -1e3], [-1e6, 1e6]] {
            let y = m.forward(&x).unwrap();
            assert!(y > 0.0 && y < 1.0);
        }
    }

    #[test]
    fn params_round_trip() {
        let mut m = Mlp::<f64>::new(&[3, 4, 2, 1], Activation::Relu, 2).unwrap();
        assert_eq!(m.num_params(), 3 * 4 + 4 + 4 * 2 + 2 + 2 + 1);
        let mut p = m.params();
        p[0] = 0.5;
        m.set_params(&p).unwrap();
        assert_eq!(m.params(), p);
        assert!(m.set_params(&p[1..]).is_err());
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(Mlp::<f64>::new(&[2], Activation::Tanh, 0).is_err());
        assert!(Mlp::<f64>::new(&[2, 0, 1], Activation::Tanh, 0).is_err());
        assert!(Mlp::<f64>::new(&[2, 3, 2], Activation::Tanh, 0).is_err());
        let m = Mlp::<f64>::new(&[2, 1], Activation::Tanh, 0).unwrap();
        assert!(m.forward(&[1.0]).is_err());
    }

    #[test]
    fn backward_matches_finite_differences() {
        for act in [Activation::Tanh, Activation::Sigmoid, Activation::Relu] {
            let m = Mlp::<f64>::new(&[2, 4, 3, 1], act, 3).unwrap();
            let xs = vec![vec![0.3, -0.7], vec![1.2, 0.4], vec![-0.5, 0.9]];
            let g = [0.7, -1.3, 0.4];
            let analytic = m.backward(&xs, &g).unwrap();
            let base = m.params();
            let f = |p: &[f64]| {
                let mut mm = m.clone();
                mm.set_params(p).unwrap();
                let y = mm.predict(&xs).unwrap();
                y.iter().zip(&g).map(|(a, b)| a * b).sum::<f64>()
            };
            for k in 0..base.len() {
                let h = 1e-6;
                let mut up = base.clone();
                up[k] += h;
                let mut dn = base.clone();
                dn[k] -= h;
                let fd = (f(&up) - f(&dn)) / (2.0 * h);
                assert!((analytic[k] - fd).abs() < 1e-7, "{act:?} k={k} {} vs {fd}", analytic[k]);
            }
        }
    }

    #[test]
    fn checkpoint_round_trip() {
        let m = Mlp::<f64>::new(&[2, 3, 1], Activation::Sigmoid, 4).unwrap();
        let text = serde_json::to_string(&m).unwrap();
        let back: Mlp<f64> = serde_json::from_str(&text).unwrap();
        assert_eq!(back, m);
        let broken = text.replace("\"sizes\":[2,3,1]", "\"sizes\":[2,4,1]");
        assert!(serde_json::from_str::<Mlp<f64>>(&broken).is_err());
    }
}
