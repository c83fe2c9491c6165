//! Dense tanh networks over a flat parameter vector with hand-written
//! backpropagation.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Fully connected network: tanh on hidden layers, linear output.
///
/// Parameters are stored layer by layer as a row-major `out × in` weight
/// matrix followed by the `out` biases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub sizes: Vec<usize>,
    pub params: Vec<f64>,
}

/// Inputs to every layer from a forward pass, kept for the backward pass.
pub struct Trace {
    layers: Vec<Array2<f64>>,
    pub output: Array2<f64>,
}

impl Mlp {
    pub fn param_count(sizes: &[usize]) -> usize {
        sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
    }

    /// Glorot-uniform weights and zero biases; the output layer is scaled by
    /// `out_scale`.
    pub fn new<R: Rng + ?Sized>(sizes: &[usize], out_scale: f64, rng: &mut R) -> Self {
        assert!(sizes.len() >= 2, "a network needs input and output sizes");
        let mut params = Vec::with_capacity(Self::param_count(sizes));
        let last = sizes.len() - 2;
        for (l, w) in sizes.windows(2).enumerate() {
            let (n_in, n_out) = (w[0], w[1]);
            let lim = (6.0 / (n_in + n_out) as f64).sqrt();
            let scale = if l == last { out_scale } else { 1.0 };
            params.extend((0..n_in * n_out).map(|_| rng.random_range(-lim..lim) * scale));
            params.extend(std::iter::repeat_n(0.0, n_out));
        }
        Self {
            sizes: sizes.to_vec(),
            params,
        }
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.sizes.last().unwrap()
    }

    fn offsets(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        self.sizes.windows(2).scan(0, |off, w| {
            let start = *off;
            *off += w[0] * w[1] + w[1];
            Some((start, w[0], w[1]))
        })
    }

    fn layer(&self, start: usize, n_in: usize, n_out: usize) -> (ArrayView2<'_, f64>, ArrayView1<'_, f64>) {
        let w = ArrayView2::from_shape((n_out, n_in), &self.params[start..start + n_in * n_out]).unwrap();
        let b = ArrayView1::from(&self.params[start + n_in * n_out..start + n_in * n_out + n_out]);
        (w, b)
    }

    /// Forward pass over a batch (one sample per row).
    pub fn forward(&self, x: ArrayView2<f64>) -> Trace {
        let n_layers = self.sizes.len() - 1;
        let mut layers = Vec::with_capacity(n_layers);
        let mut a = x.to_owned();
        for (l, (start, n_in, n_out)) in self.offsets().enumerate() {
            let (w, b) = self.layer(start, n_in, n_out);
            let mut z = a.dot(&w.t());
            z += &b;
            layers.push(a);
            a = if l + 1 < n_layers { z.mapv_into(f64::tanh) } else { z };
        }
        Trace { layers, output: a }
    }

    pub fn forward_one(&self, x: &[f64]) -> Vec<f64> {
        let v = ArrayView2::from_shape((1, x.len()), x).unwrap();
        self.forward(v).output.into_raw_vec_and_offset().0
    }

    /// Gradient of a scalar loss with respect to the parameters, given the
    /// loss gradient with respect to the output batch.
    pub fn backward(&self, trace: &Trace, d_out: ArrayView2<f64>) -> Vec<f64> {
        let mut grad = vec![0.0; self.params.len()];
        let layers: Vec<_> = self.offsets().collect();
        let mut delta: Array2<f64> = d_out.to_owned();
        for (l, &(start, n_in, n_out)) in layers.iter().enumerate().rev() {
            let input = &trace.layers[l];
            let dw = delta.t().dot(input);
            let db: Array1<f64> = delta.sum_axis(Axis(0));
            grad[start..start + n_in * n_out].copy_from_slice(dw.as_slice().expect("standard layout"));
            grad[start + n_in * n_out..start + n_in * n_out + n_out].copy_from_slice(db.as_slice().unwrap());
            if l > 0 {
                let (w, _) = self.layer(start, n_in, n_out);
                let mut d_in = delta.dot(&w);
                d_in.zip_mut_with(input, |d, &a| *d *= 1.0 - a * a);
                delta = d_in;
            }
        }
        grad
    }
}

/// Selects rows of a matrix.
pub fn rows(x: &Array2<f64>, idx: &[usize]) -> Array2<f64> {
    x.select(Axis(0), idx)
}

/// A `1 × n` view of a slice.
pub fn row_view(x: &[f64]) -> ArrayView2<'_, f64> {
    ArrayView2::from_shape((1, x.len()), x).unwrap()
}
