//! Single-layer LSTM regressor with a linear output head.
//!
//! All parameters live in one flat vector so the optimizer can treat them
//! uniformly. Gate order within each block group is forget, input, output,
//! candidate:
//!
//! ```text
//! W_f W_i W_o W_c   hidden x input each, row-major
//! U_f U_i U_o U_c   hidden x hidden each, row-major
//! b_f b_i b_o b_c   hidden each
//! w_out             hidden
//! b_out             1
//! ```

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ModelError;

const GATES: usize = 4;
const GATE_NAMES: [&str; GATES] = ["f", "i", "o", "c"];

/// Samples a `fan_out x fan_in` matrix uniformly on `[-L, L]`, `L = sqrt(6 / (fan_in + fan_out))`.
pub fn glorot_uniform<R: Rng + ?Sized>(fan_in: usize, fan_out: usize, rng: &mut R) -> Vec<f64> {
    assert!(fan_in > 0 && fan_out > 0, "fans must be positive");
    let limit = glorot_limit(fan_in, fan_out);
    (0..fan_in * fan_out).map(|_| rng.random_range(-limit..=limit)).collect()
}

pub fn glorot_limit(fan_in: usize, fan_out: usize) -> f64 {
    (6.0 / (fan_in + fan_out) as f64).sqrt()
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

#[derive(Debug, Clone, PartialEq)]
pub struct LstmModel {
    input_dim: usize,
    hidden_dim: usize,
    dropout_rate: f64,
    params: Vec<f64>,
    /// Bumped on every parameter write so stale caches can be detected.
    generation: u64,
}

/// Intermediate values from one forward pass, consumed by [`LstmModel::backward`].
#[derive(Debug, Clone)]
pub struct ForwardCache {
    input_dim: usize,
    hidden_dim: usize,
    generation: u64,
    steps: usize,
    inputs: Vec<f64>,
    /// Per step: f, i, o, g activations (4 * hidden).
    gates: Vec<f64>,
    /// Cell states c_0..c_W (c_0 = 0), (W + 1) * hidden.
    cells: Vec<f64>,
    /// Hidden states h_0..h_W (h_0 = 0), (W + 1) * hidden.
    hiddens: Vec<f64>,
    /// Inverted-dropout scale per hidden unit.
    mask: Option<Vec<f64>>,
    pub prediction: f64,
}

impl ForwardCache {
    /// Sigmoid gate activations (forget, input, output) for every step.
    pub fn sigmoid_gates(&self) -> impl Iterator<Item = f64> + '_ {
        let h = self.hidden_dim;
        self.gates.chunks(GATES * h).flat_map(move |g| g[..3 * h].iter().copied())
    }

    /// Candidate activations and tanh of the cell state for every step.
    pub fn tanh_outputs(&self) -> impl Iterator<Item = f64> + '_ {
        let h = self.hidden_dim;
        let candidates = self.gates.chunks(GATES * h).flat_map(move |g| g[3 * h..].iter().copied());
        candidates.chain(self.cells[h..].iter().map(|c| c.tanh()))
    }

    pub fn final_hidden(&self) -> &[f64] {
        &self.hiddens[self.steps * self.hidden_dim..]
    }
}

impl LstmModel {
    pub fn param_count(input_dim: usize, hidden_dim: usize) -> usize {
        GATES * hidden_dim * (input_dim + hidden_dim + 1) + hidden_dim + 1
    }

    /// Overflow-checked [`Self::param_count`].
    pub fn checked_param_count(input_dim: usize, hidden_dim: usize) -> Option<usize> {
        let per_gate = input_dim.checked_add(hidden_dim)?.checked_add(1)?.checked_mul(hidden_dim)?;
        per_gate.checked_mul(GATES)?.checked_add(hidden_dim)?.checked_add(1)
    }

    /// Glorot-uniform weights, zero biases except a unit forget-gate bias.
    pub fn new(input_dim: usize, hidden_dim: usize, dropout_rate: f64, seed: u64) -> Result<Self, ModelError> {
        if input_dim == 0 || hidden_dim == 0 {
            return Err(ModelError::InvalidConfig("dimensions must be positive".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut model = LstmModel::zeros(input_dim, hidden_dim, dropout_rate)?;
        let (i, h) = (input_dim, hidden_dim);
        for g in 0..GATES {
            let w = glorot_uniform(i, h, &mut rng);
            model.params[g * h * i..(g + 1) * h * i].copy_from_slice(&w);
        }
        let u_base = GATES * h * i;
        for g in 0..GATES {
            let u = glorot_uniform(h, h, &mut rng);
            model.params[u_base + g * h * h..u_base + (g + 1) * h * h].copy_from_slice(&u);
        }
        let b_base = u_base + GATES * h * h;
        model.params[b_base..b_base + h].fill(1.0);
        let head = glorot_uniform(h, 1, &mut rng);
        let head_base = b_base + GATES * h;
        model.params[head_base..head_base + h].copy_from_slice(&head);
        Ok(model)
    }

    pub fn zeros(input_dim: usize, hidden_dim: usize, dropout_rate: f64) -> Result<Self, ModelError> {
        if !(0.0..1.0).contains(&dropout_rate) {
            return Err(ModelError::InvalidConfig(format!("dropout rate {dropout_rate} outside [0, 1)")));
        }
        Ok(LstmModel {
            input_dim,
            hidden_dim,
            dropout_rate,
            params: vec![0.0; Self::param_count(input_dim, hidden_dim)],
            generation: 0,
        })
    }

    pub fn from_params(
        input_dim: usize,
        hidden_dim: usize,
        dropout_rate: f64,
        params: Vec<f64>,
    ) -> Result<Self, ModelError> {
        let mut model = LstmModel::zeros(input_dim, hidden_dim, dropout_rate)?;
        model.set_params(params)?;
        Ok(model)
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn hidden_dim(&self) -> usize {
        self.hidden_dim
    }

    pub fn dropout_rate(&self) -> f64 {
        self.dropout_rate
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn set_params(&mut self, params: Vec<f64>) -> Result<(), ModelError> {
        if params.len() != self.params.len() {
            return Err(ModelError::DimensionMismatch { expected: self.params.len(), got: params.len() });
        }
        self.params = params;
        self.generation += 1;
        Ok(())
    }

    /// Mutable access to the parameters; invalidates outstanding caches.
    pub fn params_mut(&mut self) -> &mut [f64] {
        self.generation += 1;
        &mut self.params
    }

    pub fn all_finite(&self) -> bool {
        self.params.iter().all(|p| p.is_finite())
    }

    fn offsets(&self) -> (usize, usize, usize, usize) {
        let (i, h) = (self.input_dim, self.hidden_dim);
        let u = GATES * h * i;
        let b = u + GATES * h * h;
        let head = b + GATES * h;
        (u, b, head, head + h)
    }

    /// Named parameter blocks and their ranges in the flat vector.
    pub fn blocks(&self) -> Vec<(String, std::ops::Range<usize>)> {
        let (i, h) = (self.input_dim, self.hidden_dim);
        let (u, b, head, out_b) = self.offsets();
        let mut blocks = Vec::with_capacity(3 * GATES + 2);
        for (g, name) in GATE_NAMES.iter().enumerate() {
            blocks.push((format!("W_{name}"), g * h * i..(g + 1) * h * i));
        }
        for (g, name) in GATE_NAMES.iter().enumerate() {
            blocks.push((format!("U_{name}"), u + g * h * h..u + (g + 1) * h * h));
        }
        for (g, name) in GATE_NAMES.iter().enumerate() {
            blocks.push((format!("b_{name}"), b + g * h..b + (g + 1) * h));
        }
        blocks.push(("w_out".into(), head..out_b));
        blocks.push(("b_out".into(), out_b..out_b + 1));
        blocks
    }

    /// Name of the block containing flat index `idx`.
    pub fn block_of(&self, idx: usize) -> String {
        self.blocks()
            .into_iter()
            .find(|(_, r)| r.contains(&idx))
            .map(|(n, _)| n)
            .unwrap_or_else(|| format!("#{idx}"))
    }

    /// Runs the recurrence over `window` (`steps x input_dim`, row-major) from zero state.
    ///
    /// Passing an RNG enables inverted dropout on the final hidden vector.
    pub fn forward<R: Rng + ?Sized>(
        &self,
        window: &[f64],
        dropout_rng: Option<&mut R>,
    ) -> Result<ForwardCache, ModelError> {
        let (ni, nh) = (self.input_dim, self.hidden_dim);
        if window.is_empty() || window.len() % ni != 0 {
            return Err(ModelError::DimensionMismatch { expected: ni, got: window.len() });
        }
        let steps = window.len() / ni;
        let (u_base, b_base, head, out_b) = self.offsets();
        let p = &self.params;

        let mut gates = vec![0.0; steps * GATES * nh];
        let mut cells = vec![0.0; (steps + 1) * nh];
        let mut hiddens = vec![0.0; (steps + 1) * nh];
        let mut z = vec![0.0; GATES * nh];

        for t in 0..steps {
            let x = &window[t * ni..(t + 1) * ni];
            let h_prev = &hiddens[t * nh..(t + 1) * nh];
            for (row, zr) in z.iter_mut().enumerate() {
                let (g, k) = (row / nh, row % nh);
                let w = &p[row * ni..(row + 1) * ni];
                let u = &p[u_base + row * nh..u_base + (row + 1) * nh];
                let mut acc = p[b_base + g * nh + k];
                acc += w.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
                acc += u.iter().zip(h_prev).map(|(a, b)| a * b).sum::<f64>();
                *zr = acc;
            }
            let act = &mut gates[t * GATES * nh..(t + 1) * GATES * nh];
            for k in 0..nh {
                let f = sigmoid(z[k]);
                let i = sigmoid(z[nh + k]);
                let o = sigmoid(z[2 * nh + k]);
                let g = z[3 * nh + k].tanh();
                act[k] = f;
                act[nh + k] = i;
                act[2 * nh + k] = o;
                act[3 * nh + k] = g;
                let c = f * cells[t * nh + k] + i * g;
                cells[(t + 1) * nh + k] = c;
                hiddens[(t + 1) * nh + k] = o * c.tanh();
            }
        }

        let mask = match dropout_rng {
            Some(rng) if self.dropout_rate > 0.0 => {
                let keep = 1.0 - self.dropout_rate;
                Some((0..nh).map(|_| if rng.random::<f64>() < keep { 1.0 / keep } else { 0.0 }).collect::<Vec<_>>())
            }
            _ => None,
        };
        let h_last = &hiddens[steps * nh..];
        let w_out = &p[head..out_b];
        let prediction = p[out_b]
            + match &mask {
                Some(m) => (0..nh).map(|k| w_out[k] * h_last[k] * m[k]).sum::<f64>(),
                None => w_out.iter().zip(h_last).map(|(a, b)| a * b).sum::<f64>(),
            };

        Ok(ForwardCache {
            input_dim: ni,
            hidden_dim: nh,
            generation: self.generation,
            steps,
            inputs: window.to_vec(),
            gates,
            cells,
            hiddens,
            mask,
            prediction,
        })
    }

    /// Prediction without dropout.
    pub fn predict(&self, window: &[f64]) -> Result<f64, ModelError> {
        Ok(self.forward::<ChaCha8Rng>(window, None)?.prediction)
    }

    /// Gradient of the loss with respect to every parameter, given
    /// `d loss / d prediction` for the cached forward pass.
    pub fn backward(&self, cache: &ForwardCache, loss_grad: f64) -> Result<Vec<f64>, ModelError> {
        let mut grads = vec![0.0; self.params.len()];
        self.backward_into(cache, loss_grad, &mut grads)?;
        Ok(grads)
    }

    /// Like [`Self::backward`] but accumulates into `grads`.
    pub fn backward_into(&self, cache: &ForwardCache, loss_grad: f64, grads: &mut [f64]) -> Result<(), ModelError> {
        if cache.input_dim != self.input_dim || cache.hidden_dim != self.hidden_dim {
            return Err(ModelError::StaleCache);
        }
        if cache.generation != self.generation {
            return Err(ModelError::StaleCache);
        }
        if grads.len() != self.params.len() {
            return Err(ModelError::DimensionMismatch { expected: self.params.len(), got: grads.len() });
        }
        let (ni, nh, steps) = (self.input_dim, self.hidden_dim, cache.steps);
        let (u_base, b_base, head, out_b) = self.offsets();
        let p = &self.params;

        let h_last = &cache.hiddens[steps * nh..];
        let mut dh = vec![0.0; nh];
        for k in 0..nh {
            let scale = cache.mask.as_ref().map_or(1.0, |m| m[k]);
            grads[head + k] += loss_grad * h_last[k] * scale;
            dh[k] = loss_grad * p[head + k] * scale;
        }
        grads[out_b] += loss_grad;

        let mut dc_next = vec![0.0; nh];
        let mut dz = vec![0.0; GATES * nh];
        for t in (0..steps).rev() {
            let act = &cache.gates[t * GATES * nh..(t + 1) * GATES * nh];
            let c_prev = &cache.cells[t * nh..(t + 1) * nh];
            let c = &cache.cells[(t + 1) * nh..(t + 2) * nh];
            for k in 0..nh {
                let (f, i, o, g) = (act[k], act[nh + k], act[2 * nh + k], act[3 * nh + k]);
                let tc = c[k].tanh();
                let dc = dc_next[k] + dh[k] * o * (1.0 - tc * tc);
                dz[k] = dc * c_prev[k] * f * (1.0 - f);
                dz[nh + k] = dc * g * i * (1.0 - i);
                dz[2 * nh + k] = dh[k] * tc * o * (1.0 - o);
                dz[3 * nh + k] = dc * i * (1.0 - g * g);
                dc_next[k] = dc * f;
            }

            let x = &cache.inputs[t * ni..(t + 1) * ni];
            let h_prev = &cache.hiddens[t * nh..(t + 1) * nh];
            dh.fill(0.0);
            for (row, &d) in dz.iter().enumerate() {
                if d == 0.0 {
                    continue;
                }
                let g = row / nh;
                for (gw, xv) in grads[row * ni..(row + 1) * ni].iter_mut().zip(x) {
                    *gw += d * xv;
                }
                let u_row = u_base + row * nh;
                for j in 0..nh {
                    grads[u_row + j] += d * h_prev[j];
                    dh[j] += p[u_row + j] * d;
                }
                grads[b_base + g * nh + row % nh] += d;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_model(w: [f64; 4], u: [f64; 4], b: [f64; 4], head: (f64, f64)) -> LstmModel {
        // input 1, hidden 1: W_f W_i W_o W_c | U_f U_i U_o U_c | b_f b_i b_o b_c | w_out | b_out
        let mut p = Vec::new();
        p.extend(w);
        p.extend(u);
        p.extend(b);
        p.push(head.0);
        p.push(head.1);
        LstmModel::from_params(1, 1, 0.0, p).unwrap()
    }

    #[test]
    fn zero_network_predicts_output_bias() {
        let mut m = LstmModel::zeros(3, 5, 0.0).unwrap();
        let n = m.params().len();
        m.params_mut()[n - 1] = 0.75;
        assert_eq!(m.predict(&[0.3, -1.0, 2.0, 0.1, 0.2, 0.3]).unwrap(), 0.75);
    }

    #[test]
    fn single_cell_hand_evaluation() {
        let m = scalar_model([0.5, -0.3, 0.8, 0.2], [0.0; 4], [0.1, 0.2, -0.1, 0.05], (1.5, -0.2));
        let x = 0.4;
        let s = |z: f64| 1.0 / (1.0 + (-z).exp());
        let i = s(-0.3 * x + 0.2);
        let o = s(0.8 * x - 0.1);
        let g = (0.2 * x + 0.05f64).tanh();
        let c = i * g;
        let h = o * c.tanh();
        let expected = 1.5 * h - 0.2;
        assert!((m.predict(&[x]).unwrap() - expected).abs() < 1e-15);
        // pinned from a calculator evaluation
        assert!((expected - (-0.144_145_408)).abs() < 1e-9, "{expected}");
    }

    #[test]
    fn parameter_count_and_blocks() {
        let m = LstmModel::new(12, 50, 0.2, 7).unwrap();
        assert_eq!(m.params().len(), 4 * 50 * (12 + 50 + 1) + 51);
        let blocks = m.blocks();
        assert_eq!(blocks.len(), 14);
        assert_eq!(blocks.iter().map(|(_, r)| r.len()).sum::<usize>(), m.params().len());
        assert_eq!(m.block_of(0), "W_f");
        assert_eq!(m.block_of(m.params().len() - 1), "b_out");
    }

    #[test]
    fn glorot_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert_eq!(glorot_limit(3, 3), 1.0);
        assert!(glorot_uniform(3, 3, &mut rng).iter().all(|v| v.abs() <= 1.0));
        let limit = glorot_limit(12, 50);
        assert!((limit - (6.0f64 / 62.0).sqrt()).abs() < 1e-15);
        assert!((limit - 0.3111).abs() < 1e-4);
        let w = glorot_uniform(12, 50, &mut rng);
        assert_eq!(w.len(), 600);
        assert!(w.iter().all(|v| v.abs() <= limit));
        let a = glorot_uniform(4, 6, &mut ChaCha8Rng::seed_from_u64(11));
        let b = glorot_uniform(4, 6, &mut ChaCha8Rng::seed_from_u64(11));
        assert_eq!(a, b);
    }

    #[test]
    fn dimension_mismatch() {
        let m = LstmModel::new(3, 4, 0.0, 1).unwrap();
        assert!(matches!(m.predict(&[1.0, 2.0]), Err(ModelError::DimensionMismatch { .. })));
        assert!(m.predict(&[]).is_err());
    }

    #[test]
    fn deterministic_without_dropout() {
        let m = LstmModel::new(3, 4, 0.5, 1).unwrap();
        let w = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6];
        assert_eq!(m.predict(&w).unwrap(), m.predict(&w).unwrap());
        let a = m.forward(&w, Some(&mut ChaCha8Rng::seed_from_u64(5))).unwrap().prediction;
        let b = m.forward(&w, Some(&mut ChaCha8Rng::seed_from_u64(5))).unwrap().prediction;
        assert_eq!(a, b);
    }

    #[test]
    fn stale_cache_rejected() {
        let mut m = LstmModel::new(2, 3, 0.0, 1).unwrap();
        let cache = m.forward::<ChaCha8Rng>(&[0.1, 0.2], None).unwrap();
        m.params_mut()[0] += 1.0;
        assert!(matches!(m.backward(&cache, 1.0), Err(ModelError::StaleCache)));
        let other = LstmModel::new(3, 3, 0.0, 1).unwrap();
        let c2 = other.forward::<ChaCha8Rng>(&[0.1, 0.2, 0.3], None).unwrap();
        assert!(matches!(m.backward(&c2, 1.0), Err(ModelError::StaleCache)));
    }

    #[test]
    fn zero_loss_grad_gives_zero_gradient() {
        let m = LstmModel::new(3, 4, 0.0, 9).unwrap();
        let cache = m.forward::<ChaCha8Rng>(&[0.1, -0.4, 0.9, 0.3, 0.3, 0.3, -1.0, 0.0, 0.5], None).unwrap();
        assert!(m.backward(&cache, 0.0).unwrap().iter().all(|g| *g == 0.0));
    }

    #[test]
    fn gradients_are_linear_in_examples() {
        let m = LstmModel::new(3, 4, 0.0, 9).unwrap();
        let w = [0.1, -0.4, 0.9, 0.3, 0.3, 0.3, -1.0, 0.0, 0.5];
        let cache = m.forward::<ChaCha8Rng>(&w, None).unwrap();
        let single = m.backward(&cache, 0.7).unwrap();
        let mut double = vec![0.0; single.len()];
        m.backward_into(&cache, 0.7, &mut double).unwrap();
        m.backward_into(&cache, 0.7, &mut double).unwrap();
        for (s, d) in single.iter().zip(&double) {
            assert!((2.0 * s - d).abs() <= 1e-15 * d.abs().max(1.0));
        }
    }

    #[test]
    fn gate_ranges() {
        let m = LstmModel::new(3, 6, 0.0, 2).unwrap();
        let w: Vec<f64> = (0..15).map(|k| (k as f64 * 0.37).sin() * 3.0).collect();
        let cache = m.forward::<ChaCha8Rng>(&w, None).unwrap();
        assert!(cache.sigmoid_gates().all(|g| g > 0.0 && g < 1.0));
        assert!(cache.tanh_outputs().all(|g| g > -1.0 && g < 1.0));
        assert_eq!(cache.final_hidden().len(), 6);
    }
}
