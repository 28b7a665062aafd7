//! Three-layer perceptron mapping a normalized window to the next-point
//! trend value, with hand-written backpropagation.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Weights of the window -> hidden -> hidden -> scalar chain; ReLU between
/// the affine layers. Rows of `w1`/`w2` feed one hidden unit each.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpParams {
    pub w1: Vec<Vec<f64>>,
    pub b1: Vec<f64>,
    pub w2: Vec<Vec<f64>>,
    pub b2: Vec<f64>,
    pub w3: Vec<f64>,
    pub b3: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct MlpTape {
    pub a1: Vec<f64>,
    pub h1: Vec<f64>,
    pub a2: Vec<f64>,
    pub h2: Vec<f64>,
}

fn relu(v: f64) -> f64 {
    v.max(0.0)
}

impl MlpParams {
    pub fn zeros(input: usize, hidden: usize) -> Self {
        Self {
            w1: vec![vec![0.0; input]; hidden],
            b1: vec![0.0; hidden],
            w2: vec![vec![0.0; hidden]; hidden],
            b2: vec![0.0; hidden],
            w3: vec![0.0; hidden],
            b3: 0.0,
        }
    }

    /// Uniform init scaled by fan-in.
    pub fn init<R: Rng>(input: usize, hidden: usize, rng: &mut R) -> Self {
        let mut params = Self::zeros(input, hidden);
        let a1 = 1.0 / (input as f64).sqrt();
        let a2 = 1.0 / (hidden as f64).sqrt();
        for row in &mut params.w1 {
            for w in row {
                *w = rng.random_range(-a1..a1);
            }
        }
        for row in &mut params.w2 {
            for w in row {
                *w = rng.random_range(-a2..a2);
            }
        }
        for w in &mut params.w3 {
            *w = rng.random_range(-a2..a2);
        }
        params
    }

    pub fn input_len(&self) -> usize {
        self.w1.first().map_or(0, Vec::len)
    }

    pub fn hidden_len(&self) -> usize {
        self.b1.len()
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_len() {
            return Err(Error::Shape {
                expected: format!("window of length {}", self.input_len()),
                got: format!("{}", x.len()),
            });
        }
        Ok(())
    }

    pub fn forward(&self, x: &[f64]) -> Result<f64> {
        self.check_input(x)?;
        Ok(self.forward_tape(x).1)
    }

    pub(crate) fn forward_tape(&self, x: &[f64]) -> (MlpTape, f64) {
        let h = self.hidden_len();
        let mut a1 = vec![0.0; h];
        for (i, row) in self.w1.iter().enumerate() {
            a1[i] = self.b1[i] + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>();
        }
        let h1: Vec<f64> = a1.iter().map(|&v| relu(v)).collect();
        let mut a2 = vec![0.0; h];
        for (i, row) in self.w2.iter().enumerate() {
            a2[i] = self.b2[i] + row.iter().zip(&h1).map(|(w, v)| w * v).sum::<f64>();
        }
        let h2: Vec<f64> = a2.iter().map(|&v| relu(v)).collect();
        let out = self.b3 + self.w3.iter().zip(&h2).map(|(w, v)| w * v).sum::<f64>();
        (MlpTape { a1, h1, a2, h2 }, out)
    }

    /// Gradients of a scalar objective with upstream derivative `dy`.
    /// Returns parameter gradients and the input gradient.
    pub(crate) fn backward(&self, tape: &MlpTape, x: &[f64], dy: f64) -> (MlpParams, Vec<f64>) {
        let h = self.hidden_len();
        let mut grads = MlpParams::zeros(self.input_len(), h);

        grads.b3 = dy;
        let mut dh2 = vec![0.0; h];
        for i in 0..h {
            grads.w3[i] = dy * tape.h2[i];
            dh2[i] = dy * self.w3[i];
        }

        let mut dh1 = vec![0.0; h];
        for i in 0..h {
            let da2 = if tape.a2[i] > 0.0 { dh2[i] } else { 0.0 };
            grads.b2[i] = da2;
            for j in 0..h {
                grads.w2[i][j] = da2 * tape.h1[j];
                dh1[j] += da2 * self.w2[i][j];
            }
        }

        let mut dx = vec![0.0; self.input_len()];
        for i in 0..h {
            let da1 = if tape.a1[i] > 0.0 { dh1[i] } else { 0.0 };
            grads.b1[i] = da1;
            for (j, xv) in x.iter().enumerate() {
                grads.w1[i][j] = da1 * xv;
                dx[j] += da1 * self.w1[i][j];
            }
        }
        (grads, dx)
    }

    pub(crate) fn add_scaled(&mut self, other: &MlpParams, factor: f64) {
        for (row, orow) in self.w1.iter_mut().zip(&other.w1) {
            for (w, o) in row.iter_mut().zip(orow) {
                *w += factor * o;
            }
        }
        for (b, o) in self.b1.iter_mut().zip(&other.b1) {
            *b += factor * o;
        }
        for (row, orow) in self.w2.iter_mut().zip(&other.w2) {
            for (w, o) in row.iter_mut().zip(orow) {
                *w += factor * o;
            }
        }
        for (b, o) in self.b2.iter_mut().zip(&other.b2) {
            *b += factor * o;
        }
        for (w, o) in self.w3.iter_mut().zip(&other.w3) {
            *w += factor * o;
        }
        self.b3 += factor * other.b3;
    }

    pub(crate) fn scale(&mut self, factor: f64) {
        for row in &mut self.w1 {
            row.iter_mut().for_each(|w| *w *= factor);
        }
        self.b1.iter_mut().for_each(|b| *b *= factor);
        for row in &mut self.w2 {
            row.iter_mut().for_each(|w| *w *= factor);
        }
        self.b2.iter_mut().for_each(|b| *b *= factor);
        self.w3.iter_mut().for_each(|w| *w *= factor);
        self.b3 *= factor;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_parameters_give_zero_output() {
        let mlp = MlpParams::zeros(4, 3);
        assert_eq!(mlp.forward(&[1.0, -2.0, 0.5, 3.0]).unwrap(), 0.0);
    }

    #[test]
    fn hand_computed_three_layer_path() {
        // x = [2, 3]; layer 1 identity; layer 2 sums/differences with bias;
        // layer 3 weighted sum plus one.
        let mlp = MlpParams {
            w1: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            b1: vec![0.0, 0.0],
            w2: vec![vec![1.0, 1.0], vec![-1.0, 1.0]],
            b2: vec![-1.0, 0.0],
            w3: vec![0.5, 2.0],
            b3: 1.0,
        };
        // h1 = [2, 3]; a2 = [4, 1]; h2 = [4, 1]; out = 0.5*4 + 2*1 + 1 = 5.
        assert_eq!(mlp.forward(&[2.0, 3.0]).unwrap(), 5.0);
    }

    #[test]
    fn output_finite_for_random_small_inputs() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        use rand::prelude::*;
        for _ in 0..20 {
            let mlp = MlpParams::init(6, 4, &mut rng);
            let x: Vec<f64> = (0..6).map(|_| rng.random_range(-1.0..1.0)).collect();
            assert!(mlp.forward(&x).unwrap().is_finite());
        }
    }

    #[test]
    fn shape_mismatch_rejected() {
        let mlp = MlpParams::zeros(4, 3);
        assert!(mlp.forward(&[1.0, 2.0]).is_err());
    }
}
