use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

const DOMAIN: &[u8; 16] = b"torus-she:noise\0";

/// Identity of one replica's driving noise.
///
/// Standard normal `ξ(step, cell)` is a pure function of
/// `(master_seed, replica, step, cell)`: the ChaCha key is built from the
/// seed and replica, the ChaCha stream is the step, and the word position
/// selects the Box–Muller pair holding the cell. Cell increments of the
/// white noise are `ΔW = ξ √(Δt Δx)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NoiseStream {
    pub master_seed: u64,
    pub replica: u64,
}

impl NoiseStream {
    pub fn new(master_seed: u64, replica: u64) -> Self {
        Self {
            master_seed,
            replica,
        }
    }

    fn key(&self) -> [u8; 32] {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.master_seed.to_le_bytes());
        key[8..16].copy_from_slice(&self.replica.to_le_bytes());
        key[16..].copy_from_slice(DOMAIN);
        key
    }

    fn rng_at(&self, step: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::from_seed(self.key());
        rng.set_stream(step as u64);
        rng
    }

    /// Fills `out` with `ξ(step, 0..out.len())`.
    pub fn step_normals(&self, step: usize, out: &mut [f64]) {
        let mut rng = self.rng_at(step);
        let mut chunks = out.chunks_exact_mut(2);
        for pair in &mut chunks {
            let (a, b) = box_muller(rng.next_u64(), rng.next_u64());
            pair[0] = a;
            pair[1] = b;
        }
        if let [last] = chunks.into_remainder() {
            *last = box_muller(rng.next_u64(), rng.next_u64()).0;
        }
    }

    /// `ξ(step, cell)` without generating the rest of the step.
    pub fn normal(&self, step: usize, cell: usize) -> f64 {
        let mut rng = self.rng_at(step);
        // two u64 per pair, two 32-bit words per u64
        rng.set_word_pos(4 * (cell / 2) as u128);
        let (a, b) = box_muller(rng.next_u64(), rng.next_u64());
        if cell.is_multiple_of(2) {
            a
        } else {
            b
        }
    }
}

/// Uniform on `(0, 1]` from the top 53 bits.
fn unit(x: u64) -> f64 {
    ((x >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn box_muller(a: u64, b: u64) -> (f64, f64) {
    let r = (-2.0 * unit(a).ln()).sqrt();
    let (s, c) = (std::f64::consts::TAU * unit(b)).sin_cos();
    (r * c, r * s)
}
