use crate::graph::EdgeKey;
use crate::scalar::Scalar;

use super::reach::Liveness;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
pub(crate) fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed from a parent seed and an index.
pub fn derive_seed(parent: u64, index: u64) -> u64 {
    mix64(mix64(parent ^ GOLDEN).wrapping_add(index.wrapping_mul(GOLDEN)))
}

/// Common-random-number store of per-edge uniform draws.
///
/// `draw(e, r)` is a pure function of `(master_seed, e, r)`, so every candidate
/// solution evaluated against the same replication sees the same coin flip on
/// every edge it shares with another candidate. Nothing is stored.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SampleBank {
    master_seed: u64,
    key: u64,
}

impl SampleBank {
    pub fn new(master_seed: u64) -> Self {
        SampleBank {
            master_seed,
            key: mix64(master_seed.wrapping_add(GOLDEN)),
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    /// Uniform draw in `[0, 1)` for `edge` in `replication`.
    pub fn draw(&self, edge: EdgeKey, replication: u64) -> f64 {
        let edge_part = mix64(self.key ^ (u64::from(edge.0) + 1).wrapping_mul(GOLDEN));
        let bits = mix64(edge_part ^ replication.wrapping_mul(0xD1B5_4A32_D192_ED03));
        (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn sample(&self, replication: u64) -> LiveEdgeSample<'_> {
        LiveEdgeSample {
            bank: self,
            replication,
        }
    }
}

/// One live-edge graph: edge `e` is alive iff `draw(e, r) < p_e`.
#[derive(Debug, Clone, Copy)]
pub struct LiveEdgeSample<'a> {
    bank: &'a SampleBank,
    replication: u64,
}

impl LiveEdgeSample<'_> {
    pub fn replication(&self) -> u64 {
        self.replication
    }
}

impl<F: Scalar> Liveness<F> for LiveEdgeSample<'_> {
    fn is_live(&self, key: EdgeKey, p: F) -> bool {
        self.bank.draw(key, self.replication) < p.as_f64()
    }
}
