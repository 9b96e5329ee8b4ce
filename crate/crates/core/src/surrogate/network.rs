//! Two-layer tanh perceptron with two outputs.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of network outputs, `(alpha, beta)` in scaled form.
pub const N_OUT: usize = 2;

/// Parameters are kept in one flat vector laid out as
/// `[hidden weights (row-major, hidden × n_in) | hidden bias | output weights
/// (row-major, 2 × hidden) | output bias]`, which is also the column order of
/// the Jacobian.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    n_in: usize,
    hidden: usize,
    params: Vec<f64>,
}

/// Arithmetic cost of one forward pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpCount {
    pub weight_mults: usize,
    pub bias_adds: usize,
    pub activations: usize,
    pub total: usize,
}

impl Mlp {
    /// All-zero network.
    pub fn zeros(n_in: usize, hidden: usize) -> Result<Self> {
        if n_in == 0 || hidden == 0 {
            return Err(Error::domain(
                "network",
                format!("layer sizes must be positive, got [{n_in}, {hidden}, {N_OUT}]"),
            ));
        }
        Ok(Self {
            n_in,
            hidden,
            params: vec![0.0; hidden * n_in + hidden + N_OUT * hidden + N_OUT],
        })
    }

    /// Weights and biases uniform in `±1/√fan_in` of their layer.
    pub fn init_uniform<R: Rng + ?Sized>(n_in: usize, hidden: usize, rng: &mut R) -> Result<Self> {
        let mut net = Self::zeros(n_in, hidden)?;
        let split = hidden * (n_in + 1);
        let (first, second) = net.params.split_at_mut(split);
        let a = 1.0 / (n_in as f64).sqrt();
        first.iter_mut().for_each(|w| *w = rng.random_range(-a..a));
        let a = 1.0 / (hidden as f64).sqrt();
        second.iter_mut().for_each(|w| *w = rng.random_range(-a..a));
        Ok(net)
    }

    pub fn from_parts(w_hidden: &[Vec<f64>], b_hidden: &[f64], w_out: &[Vec<f64>], b_out: &[f64]) -> Result<Self> {
        let hidden = b_hidden.len();
        let n_in = w_hidden.first().map_or(0, Vec::len);
        let mut net = Self::zeros(n_in, hidden)?;
        let shape_ok = w_hidden.len() == hidden
            && w_hidden.iter().all(|r| r.len() == n_in)
            && w_out.len() == N_OUT
            && w_out.iter().all(|r| r.len() == hidden)
            && b_out.len() == N_OUT;
        if !shape_ok {
            return Err(Error::Model("weight matrix shapes are inconsistent".into()));
        }
        let flat: Vec<f64> = w_hidden
            .iter()
            .flatten()
            .chain(b_hidden)
            .chain(w_out.iter().flatten())
            .chain(b_out)
            .copied()
            .collect();
        if flat.iter().any(|v| !v.is_finite()) {
            return Err(Error::Model("non-finite weight".into()));
        }
        net.params = flat;
        Ok(net)
    }

    pub fn n_inputs(&self) -> usize {
        self.n_in
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    pub fn n_params(&self) -> usize {
        self.params.len()
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    fn offsets(&self) -> (usize, usize, usize) {
        let b1 = self.hidden * self.n_in;
        let w2 = b1 + self.hidden;
        let b2 = w2 + N_OUT * self.hidden;
        (b1, w2, b2)
    }

    pub fn hidden_weights(&self) -> Vec<Vec<f64>> {
        self.params[..self.hidden * self.n_in].chunks(self.n_in).map(<[f64]>::to_vec).collect()
    }

    pub fn hidden_bias(&self) -> Vec<f64> {
        let (b1, w2, _) = self.offsets();
        self.params[b1..w2].to_vec()
    }

    pub fn output_weights(&self) -> Vec<Vec<f64>> {
        let (_, w2, b2) = self.offsets();
        self.params[w2..b2].chunks(self.hidden).map(<[f64]>::to_vec).collect()
    }

    pub fn output_bias(&self) -> Vec<f64> {
        let (_, _, b2) = self.offsets();
        self.params[b2..].to_vec()
    }

    fn hidden_activations(&self, x: &[f64], z: &mut [f64]) {
        let (b1, _, _) = self.offsets();
        for (j, zj) in z.iter_mut().enumerate() {
            let row = &self.params[j * self.n_in..(j + 1) * self.n_in];
            let a: f64 = row.iter().zip(x).map(|(w, xi)| w * xi).sum::<f64>() + self.params[b1 + j];
            *zj = a.tanh();
        }
    }

    fn output(&self, z: &[f64]) -> [f64; N_OUT] {
        let (_, w2, b2) = self.offsets();
        std::array::from_fn(|k| {
            let row = &self.params[w2 + k * self.hidden..w2 + (k + 1) * self.hidden];
            (row.iter().zip(z).map(|(w, zj)| w * zj).sum::<f64>() + self.params[b2 + k]).tanh()
        })
    }

    /// Outputs in `(-1, 1)`; `x` must have `n_inputs` entries.
    pub fn forward(&self, x: &[f64]) -> [f64; N_OUT] {
        debug_assert_eq!(x.len(), self.n_in);
        let mut z = vec![0.0; self.hidden];
        self.hidden_activations(x, &mut z);
        self.output(&z)
    }

    /// Forward pass that also fills `jac[k]` with `∂out_k/∂params`.
    pub fn forward_with_jacobian(&self, x: &[f64], jac: &mut [Vec<f64>; N_OUT]) -> [f64; N_OUT] {
        let (b1, w2, b2) = self.offsets();
        let mut z = vec![0.0; self.hidden];
        self.hidden_activations(x, &mut z);
        let out = self.output(&z);
        for k in 0..N_OUT {
            let row = &mut jac[k];
            row.clear();
            row.resize(self.params.len(), 0.0);
            let dk = 1.0 - out[k] * out[k];
            for j in 0..self.hidden {
                let back = dk * self.params[w2 + k * self.hidden + j] * (1.0 - z[j] * z[j]);
                for (i, xi) in x.iter().enumerate() {
                    row[j * self.n_in + i] = back * xi;
                }
                row[b1 + j] = back;
                row[w2 + k * self.hidden + j] = dk * z[j];
            }
            row[b2 + k] = dk;
        }
        out
    }

    pub fn op_count(&self) -> OpCount {
        let weight_mults = self.n_in * self.hidden + self.hidden * N_OUT;
        let bias_adds = self.hidden + N_OUT;
        let activations = self.hidden + N_OUT;
        OpCount {
            weight_mults,
            bias_adds,
            activations,
            total: weight_mults + bias_adds + activations,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn op_counts() {
        let six = Mlp::zeros(6, 10).unwrap().op_count();
        assert_eq!((six.weight_mults, six.bias_adds, six.activations, six.total), (80, 12, 12, 104));
        assert_eq!(Mlp::zeros(7, 10).unwrap().op_count().total, 114);
        assert!(Mlp::zeros(6, 0).is_err());
        assert_eq!(Mlp::zeros(6, 10).unwrap().n_params(), 92);
    }

    #[test]
    fn zero_network_outputs_zero() {
        assert_eq!(Mlp::zeros(6, 10).unwrap().forward(&[0.3; 6]), [0.0, 0.0]);
    }

    #[test]
    fn parts_round_trip() {
        let net = Mlp::init_uniform(7, 4, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let back = Mlp::from_parts(&net.hidden_weights(), &net.hidden_bias(), &net.output_weights(), &net.output_bias())
            .unwrap();
        assert_eq!(back, net);
        let mut bad = net.output_weights();
        bad.pop();
        assert!(Mlp::from_parts(&net.hidden_weights(), &net.hidden_bias(), &bad, &net.output_bias()).is_err());
    }

    #[test]
    fn init_respects_fan_in_bounds() {
        let net = Mlp::init_uniform(6, 10, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let (first, second) = net.params().split_at(70);
        assert!(first.iter().all(|w| w.abs() < 1.0 / 6f64.sqrt()));
        assert!(second.iter().all(|w| w.abs() < 1.0 / 10f64.sqrt()));
    }

    #[test]
    fn jacobian_matches_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let net = Mlp::init_uniform(6, 10, &mut rng).unwrap();
        let x: Vec<f64> = (0..6).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut jac = [Vec::new(), Vec::new()];
        net.forward_with_jacobian(&x, &mut jac);
        let h = 1e-6;
        #[allow(clippy::needless_range_loop)]
        for p in 0..net.n_params() {
            let mut plus = net.clone();
            plus.params_mut()[p] += h;
            let mut minus = net.clone();
            minus.params_mut()[p] -= h;
            let (fp, fm) = (plus.forward(&x), minus.forward(&x));
            for k in 0..N_OUT {
                let fd = (fp[k] - fm[k]) / (2.0 * h);
                let an = jac[k][p];
                let scale = an.abs().max(fd.abs()).max(1e-6);
                assert!((an - fd).abs() / scale < 1e-4, "param {p} out {k}: {an} vs {fd}");
            }
        }
    }
}
