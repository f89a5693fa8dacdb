//! Core algorithms for curriculum-guided lyric translation training.
//!
//! Everything here is pure computation over in-memory values and builds
//! without `std` (only `alloc` is required). File formats, HTTP backends and
//! the command line live in the `lyricar` crate.
//!
//! The pieces, bottom-up:
//!
//! * [`corpus`]: line segmentation, syllable counts and rhyme classes.
//! * [`difficulty`]: perplexity and lexicon features, tercile stratification
//!   and staged dataset sampling.
//! * [`rewards`]: format, rhythm, rhyme and judged text-quality rewards.
//! * [`policy`]: the enumerated-candidate softmax policy and prompt builder.
//! * [`grpo`]: group-relative advantages, loss, KL term and the update step.
//! * [`scheduler`]: reward-convergence-guided stage advancement.
//! * [`trainer`]: glue binding GRPO to the scheduler.
//! * [`bleu`]: corpus-level BLEU.

#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

pub mod bleu;
pub mod corpus;
pub mod difficulty;
mod error;
pub mod grpo;
pub(crate) mod math;
pub mod policy;
pub mod rewards;
pub mod scheduler;
pub mod trainer;

pub use error::{Error, Result};

/// Stable 64-bit FNV-1a, used wherever a hash must not change across
/// platforms or releases (stub verdicts, pool seeds).
pub fn stable_hash(parts: &[&[u8]]) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut h = OFFSET;
    for part in parts {
        for &b in *part {
            h ^= u64::from(b);
            h = h.wrapping_mul(PRIME);
        }
        // separator so ("ab","c") and ("a","bc") differ
        h ^= 0xff;
        h = h.wrapping_mul(PRIME);
    }
    h
}
