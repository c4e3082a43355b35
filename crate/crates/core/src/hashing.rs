//! Content hashes used for manifests, cache keys and stream labels.

use sha2::{Digest, Sha256};

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// First eight bytes of the SHA-256 digest, big endian.
pub fn stable_u64(bytes: &[u8]) -> u64 {
    let digest = Sha256::digest(bytes);
    let mut head = [0u8; 8];
    head.copy_from_slice(&digest[..8]);
    u64::from_be_bytes(head)
}

/// Deterministic value in `[0, 1)` derived from `bytes`.
pub fn unit_interval(bytes: &[u8]) -> f64 {
    (stable_u64(bytes) >> 11) as f64 / (1u64 << 53) as f64
}
