//! Counter-style random substreams.
//!
//! Every random draw in a run comes from a ChaCha8 generator keyed by
//! `(seed, host, purpose)` with the step index as the stream id. No generator
//! is shared between hosts or carried across steps, so results do not depend
//! on the order (or thread) in which hosts are evaluated.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::types::{HostId, Step};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u8)]
pub enum Purpose {
    Topology = 0,
    Propagation = 1,
    Symptoms = 2,
    Benign = 3,
    Migration = 4,
}

const DOMAIN: &[u8; 8] = b"CARDINAL";

pub fn rng_substream(seed: u64, host: HostId, purpose: Purpose, step: Step) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&u64::from(host.0).to_le_bytes());
    key[16..24].copy_from_slice(&(purpose as u64).to_le_bytes());
    key[24..].copy_from_slice(DOMAIN);
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(step);
    rng
}
