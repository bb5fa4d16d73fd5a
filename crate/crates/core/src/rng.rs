//! Seeded random streams and the normal-variate generator.
//!
//! Every replication gets its own ChaCha8 stream: the master seed fixes the
//! key and the replication index selects the stream, so a replication's
//! draws do not depend on which thread runs it or in what order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::scalar::Real;

/// Random stream handed to samplers. `Send`, so it may move between threads.
pub type Stream = ChaCha8Rng;

/// Independent stream number `index` under `seed`.
pub fn substream(seed: u64, index: u64) -> Stream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Standard normal variates by the Marsaglia polar method.
///
/// Each accepted point yields two variates; the second is cached.
#[derive(Debug, Clone, Default)]
pub struct NormalSampler<T> {
    spare: Option<T>,
}

impl<T: Real> NormalSampler<T> {
    pub fn new() -> Self {
        Self { spare: None }
    }

    pub fn sample<R: Rng + ?Sized>(&mut self, rng: &mut R) -> T {
        if let Some(z) = self.spare.take() {
            return z;
        }
        loop {
            let u: f64 = 2.0 * rng.gen::<f64>() - 1.0;
            let v: f64 = 2.0 * rng.gen::<f64>() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let f = (-2.0 * s.ln() / s).sqrt();
                self.spare = Some(T::lit(v * f));
                return T::lit(u * f);
            }
        }
    }

    pub fn fill<R: Rng + ?Sized>(&mut self, rng: &mut R, out: &mut [T]) {
        for x in out {
            *x = self.sample(rng);
        }
    }
}
