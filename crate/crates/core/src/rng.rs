//! Deterministic stream derivation.
//!
//! Every source of randomness in this crate is a ChaCha8 stream whose 32-byte
//! key is assembled from `(seed, stream tag, two indices)`. Streams with
//! different tags or indices never collide, so any result is a pure function
//! of its key and independent of the order in which work items execute.
//!
//! Key layout (little-endian, 32 bytes): `seed | tag | index_a | index_b`.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Named substream families. The tag values are part of the on-disk
/// reproducibility contract; never reuse or renumber them.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stream {
    /// Random instance generation. Indices: (realization, 0).
    Instance,
    /// Rounding trials. Indices: (realization, trial).
    Trial,
    /// Miscellaneous draws in tests and diagnostics.
    Aux,
}

fn tag(stream: Stream) -> u64 {
    match stream {
        Stream::Instance => 0x0001,
        Stream::Trial => 0x0002,
        Stream::Aux => 0x00ff,
    }
}

/// Build the ChaCha8 generator for a given substream.
pub fn stream_rng(seed: u64, stream: Stream, index_a: u64, index_b: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[0..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&tag(stream).to_le_bytes());
    key[16..24].copy_from_slice(&index_a.to_le_bytes());
    key[24..32].copy_from_slice(&index_b.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

/// Collapse `(seed, stream, index)` to a plain 64-bit seed.
///
/// Reports record this value so a single realization can be replayed through
/// the CLI without the surrounding experiment. `index_b = u64::MAX` keeps the
/// derivation disjoint from the working streams, which use small `index_b`.
pub fn derive_seed(seed: u64, stream: Stream, index_a: u64) -> u64 {
    stream_rng(seed, stream, index_a, u64::MAX).next_u64()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_key_same_stream() {
        let a: Vec<u64> = (0..8).map(|_| stream_rng(7, Stream::Trial, 3, 9).next_u64()).collect();
        let mut rng = stream_rng(7, Stream::Trial, 3, 9);
        let b: Vec<u64> = (0..8).map(|_| rng.next_u64()).collect();
        assert_ne!(a, b); // `a` restarts the stream each draw
        let mut rng2 = stream_rng(7, Stream::Trial, 3, 9);
        let c: Vec<u64> = (0..8).map(|_| rng2.next_u64()).collect();
        assert_eq!(b, c);
    }

    #[test]
    fn distinct_indices_decorrelate() {
        let x = stream_rng(7, Stream::Trial, 0, 0).next_u64();
        let y = stream_rng(7, Stream::Trial, 0, 1).next_u64();
        let z = stream_rng(7, Stream::Instance, 0, 0).next_u64();
        assert_ne!(x, y);
        assert_ne!(x, z);
    }
}
