use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::math::Mat;
use super::ModelConfig;

/// Gate blocks inside the stacked LSTM weight matrices, in row order:
/// input gate, forget gate, cell candidate, output gate.
pub const GATE_BLOCKS: usize = 4;

/// One LSTM cell: stacked gate weights against the input (`wx`), against the
/// previous hidden state (`wh`), and the gate biases.
#[derive(Debug, Clone, PartialEq)]
pub struct LstmWeights {
    pub wx: Mat,
    pub wh: Mat,
    pub b: Vec<f64>,
}

impl LstmWeights {
    pub fn zeros(input_dim: usize, hidden_dim: usize) -> Self {
        Self {
            wx: Mat::zeros(GATE_BLOCKS * hidden_dim, input_dim),
            wh: Mat::zeros(GATE_BLOCKS * hidden_dim, hidden_dim),
            b: vec![0.0; GATE_BLOCKS * hidden_dim],
        }
    }

    pub fn hidden_dim(&self) -> usize {
        self.wh.cols()
    }

    pub fn input_dim(&self) -> usize {
        self.wx.cols()
    }
}

/// All learnable arrays. One instance is shared by every unrolled turn copy;
/// the same shape doubles as the container for gradients and optimizer
/// moments.
#[derive(Debug, Clone, PartialEq)]
pub struct Seq2SeqParams {
    /// Token embeddings, vocab x embed_dim.
    pub embedding: Mat,
    /// Encoder cell; input is the token embedding, plus the previous turn's
    /// context vector when the model threads context.
    pub encoder: LstmWeights,
    /// Decoder cell over the agent-side token embeddings.
    pub decoder: LstmWeights,
    /// Output projection, vocab x hidden_dim, with bias.
    pub out_w: Mat,
    pub out_b: Vec<f64>,
}

impl Seq2SeqParams {
    /// Seeded uniform initialization: matrices at `1/sqrt(fan_in)` scale,
    /// biases zero except the forget gate, which starts at 1.
    pub fn init(config: &ModelConfig, vocab_size: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let hidden = config.hidden_dim;
        let mut params = Self::zeros_with(config, vocab_size);

        fill_uniform(&mut params.embedding, 0.1, &mut rng);
        let enc_scale = inv_sqrt(params.encoder.input_dim());
        fill_uniform(&mut params.encoder.wx, enc_scale, &mut rng);
        fill_uniform(&mut params.encoder.wh, inv_sqrt(hidden), &mut rng);
        let dec_scale = inv_sqrt(params.decoder.input_dim());
        fill_uniform(&mut params.decoder.wx, dec_scale, &mut rng);
        fill_uniform(&mut params.decoder.wh, inv_sqrt(hidden), &mut rng);
        fill_uniform(&mut params.out_w, inv_sqrt(hidden), &mut rng);

        for cell in [&mut params.encoder, &mut params.decoder] {
            for slot in &mut cell.b[hidden..2 * hidden] {
                *slot = 1.0;
            }
        }
        params
    }

    /// An all-zero parameter set with the same shapes a model of this
    /// configuration uses.
    pub fn zeros_with(config: &ModelConfig, vocab_size: usize) -> Self {
        Self {
            embedding: Mat::zeros(vocab_size, config.embed_dim),
            encoder: LstmWeights::zeros(config.encoder_input_dim(), config.hidden_dim),
            decoder: LstmWeights::zeros(config.decoder_input_dim(), config.hidden_dim),
            out_w: Mat::zeros(vocab_size, config.hidden_dim),
            out_b: vec![0.0; vocab_size],
        }
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            embedding: Mat::zeros(self.embedding.rows(), self.embedding.cols()),
            encoder: LstmWeights::zeros(self.encoder.input_dim(), self.encoder.hidden_dim()),
            decoder: LstmWeights::zeros(self.decoder.input_dim(), self.decoder.hidden_dim()),
            out_w: Mat::zeros(self.out_w.rows(), self.out_w.cols()),
            out_b: vec![0.0; self.out_b.len()],
        }
    }

    pub fn vocab_size(&self) -> usize {
        self.embedding.rows()
    }

    pub fn hidden_dim(&self) -> usize {
        self.encoder.hidden_dim()
    }

    /// Named views over every parameter tensor, in a fixed order shared by
    /// the checkpoint format, the optimizer, and the gradient check.
    pub fn tensors(&self) -> Vec<(&'static str, Vec<usize>, &[f64])> {
        vec![
            ("embedding", vec![self.embedding.rows(), self.embedding.cols()], self.embedding.data()),
            ("encoder.wx", vec![self.encoder.wx.rows(), self.encoder.wx.cols()], self.encoder.wx.data()),
            ("encoder.wh", vec![self.encoder.wh.rows(), self.encoder.wh.cols()], self.encoder.wh.data()),
            ("encoder.b", vec![self.encoder.b.len()], &self.encoder.b),
            ("decoder.wx", vec![self.decoder.wx.rows(), self.decoder.wx.cols()], self.decoder.wx.data()),
            ("decoder.wh", vec![self.decoder.wh.rows(), self.decoder.wh.cols()], self.decoder.wh.data()),
            ("decoder.b", vec![self.decoder.b.len()], &self.decoder.b),
            ("out_w", vec![self.out_w.rows(), self.out_w.cols()], self.out_w.data()),
            ("out_b", vec![self.out_b.len()], &self.out_b),
        ]
    }

    pub fn tensors_mut(&mut self) -> Vec<(&'static str, &mut [f64])> {
        vec![
            ("embedding", self.embedding.data_mut()),
            ("encoder.wx", self.encoder.wx.data_mut()),
            ("encoder.wh", self.encoder.wh.data_mut()),
            ("encoder.b", &mut self.encoder.b),
            ("decoder.wx", self.decoder.wx.data_mut()),
            ("decoder.wh", self.decoder.wh.data_mut()),
            ("decoder.b", &mut self.decoder.b),
            ("out_w", self.out_w.data_mut()),
            ("out_b", &mut self.out_b),
        ]
    }

    pub fn all_finite(&self) -> bool {
        self.tensors().iter().all(|(_, _, data)| data.iter().all(|v| v.is_finite()))
    }
}

fn inv_sqrt(n: usize) -> f64 {
    1.0 / libm::sqrt(n as f64)
}

fn fill_uniform(mat: &mut Mat, scale: f64, rng: &mut ChaCha8Rng) {
    for v in mat.data_mut() {
        *v = rng.random_range(-scale..scale);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config() -> ModelConfig {
        ModelConfig { embed_dim: 4, hidden_dim: 6, max_decode_len: 8, use_context: true }
    }

    #[test]
    fn shapes_are_consistent() {
        let params = Seq2SeqParams::init(&config(), 12, 0);
        assert_eq!(params.embedding.rows(), 12);
        assert_eq!(params.encoder.input_dim(), 4 + 6);
        assert_eq!(params.decoder.input_dim(), 4 + 6);
        assert_eq!(params.out_w.rows(), 12);
        assert!(params.all_finite());
    }

    #[test]
    fn init_is_deterministic_per_seed() {
        let a = Seq2SeqParams::init(&config(), 12, 7);
        let b = Seq2SeqParams::init(&config(), 12, 7);
        let c = Seq2SeqParams::init(&config(), 12, 8);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn tensor_views_cover_every_array() {
        let params = Seq2SeqParams::init(&config(), 12, 1);
        let total: usize = params.tensors().iter().map(|(_, _, d)| d.len()).sum();
        let expected = 12 * 4 // embedding
            + 24 * 10 + 24 * 6 + 24 // encoder
            + 24 * 10 + 24 * 6 + 24 // decoder
            + 12 * 6 + 12; // projection
        assert_eq!(total, expected);
    }
}
