use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::scalar::{Complex, Real};

/// Stream offset separating correlation-domain draws from angular draws.
pub(crate) const CORRELATION_DOMAIN: u64 = 1 << 62;

/// Standard complex normals `CN(0, 1)` from a counter-based generator.
///
/// Each `(seed, stream)` pair is an independent ChaCha8 stream and entry `k`
/// of a stream always uses key-stream words `4k..4k+4`, so any entry can be
/// regenerated without producing its predecessors.
#[derive(Debug, Clone)]
pub struct GaussianStream {
    rng: ChaCha8Rng,
}

impl GaussianStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { rng }
    }

    /// Positioned at entry `index` of the stream.
    pub fn at_entry(seed: u64, stream: u64, index: u64) -> Self {
        let mut s = Self::new(seed, stream);
        s.rng.set_word_pos(4 * index as u128);
        s
    }

    pub fn next_complex(&mut self) -> Complex<f64> {
        let a = self.rng.next_u64();
        let b = self.rng.next_u64();
        // u1 in (0, 1] keeps the logarithm finite
        let u1 = ((a >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64);
        let u2 = (b >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        let r = (-u1.ln()).sqrt();
        let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
        Complex::new(r * c, r * s)
    }

    pub fn fill<T: Real>(&mut self, out: &mut [Complex<T>]) {
        for z in out.iter_mut() {
            let w = self.next_complex();
            *z = Complex::new(T::lit(w.re), T::lit(w.im));
        }
    }
}
