//! Seeded random instances small enough for [`opt_bruteforce`](crate::offline::opt_bruteforce).
//!
//! Case `n` of seed `s` is drawn from its own ChaCha stream, so cases can be
//! generated in any order or in parallel and still match.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{FaultSequence, Instance, PacketBatch, SizeCatalog};
use crate::numeric::GoldenNumber;
use crate::offline::{MAX_BLOCKS, MAX_PACKETS};

/// Shape of the random size catalog.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SizeFamily {
    /// Increasing random rationals.
    General,
    /// Every size an integer multiple of the one below.
    Divisible,
    /// `ℓ_i ≥ α·ℓ_{i−1}`.
    Separated(GoldenNumber),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FuzzConfig {
    pub family: SizeFamily,
    /// Catalog sizes are drawn from `1..=max_sizes`.
    pub max_sizes: usize,
    pub max_packets: usize,
    pub max_blocks: usize,
}

impl Default for FuzzConfig {
    fn default() -> Self {
        FuzzConfig { family: SizeFamily::General, max_sizes: 4, max_packets: MAX_PACKETS as usize, max_blocks: MAX_BLOCKS }
    }
}

impl FuzzConfig {
    pub fn with_family(family: SizeFamily) -> Self {
        FuzzConfig { family, ..FuzzConfig::default() }
    }
}

#[derive(Clone, Debug)]
pub struct FuzzCase {
    pub seed: u64,
    pub index: u64,
    pub instance: Instance,
    pub faults: FaultSequence,
}

fn rational(rng: &mut ChaCha8Rng, max_num: i64, dens: &[i64]) -> GoldenNumber {
    let den = dens[rng.gen_range(0..dens.len())];
    GoldenNumber::ratio(rng.gen_range(1..=max_num * den), den)
}

fn catalog(rng: &mut ChaCha8Rng, family: &SizeFamily, k: usize) -> SizeCatalog {
    let mut sizes = Vec::with_capacity(k);
    let first = if rng.gen_bool(0.5) { GoldenNumber::one() } else { rational(rng, 2, &[2, 3, 4]) };
    sizes.push(first);
    while sizes.len() < k {
        let prev = sizes.last().expect("non-empty").clone();
        let next = match family {
            SizeFamily::General => &prev + &rational(rng, 3, &[1, 2, 4]),
            SizeFamily::Divisible => prev.mul_int(rng.gen_range(2..=3)),
            SizeFamily::Separated(alpha) => {
                // sizes stay strictly increasing when α = 1
                let low = if *alpha > GoldenNumber::one() { 0 } else { 1 };
                let extra = GoldenNumber::ratio(rng.gen_range(low..=4), 4);
                &prev * &(alpha + &extra)
            }
        };
        sizes.push(next);
    }
    SizeCatalog::new_unchecked(sizes)
}

/// Case `index` of the stream for `seed`.
pub fn fuzz_case(seed: u64, index: u64, cfg: &FuzzConfig) -> FuzzCase {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let k = rng.gen_range(1..=cfg.max_sizes.max(1));
    let cat = catalog(&mut rng, &cfg.family, k);

    let packets = rng.gen_range(1..=cfg.max_packets.max(1));
    let mut counts = vec![0u64; k];
    for _ in 0..packets {
        counts[rng.gen_range(0..k)] += 1;
    }
    let total: GoldenNumber = counts.iter().enumerate().map(|(i, &c)| cat.size(i).mul_int(c as i64)).sum();
    // horizon in [0.4, 1.2] of the total size, never shorter than ℓ_k
    let factor = GoldenNumber::ratio(rng.gen_range(2..=6), 5);
    let horizon = (&total * &factor).max(cat.largest().clone());
    let grid = 8i64;
    let slots = (&horizon.mul_int(grid)).floor_u64().unwrap_or(1).max(1) as i64;

    let mut batches = Vec::new();
    for (i, &c) in counts.iter().enumerate() {
        let mut left = c;
        while left > 0 {
            let take = rng.gen_range(1..=left);
            let release = if rng.gen_bool(0.5) {
                GoldenNumber::zero()
            } else {
                GoldenNumber::ratio(rng.gen_range(0..=slots * 7 / 10), grid)
            };
            batches.push(PacketBatch::new(i, release, take));
            left -= take;
        }
    }

    let nblocks = rng.gen_range(1..=cfg.max_blocks.max(1));
    let mut faults: Vec<GoldenNumber> =
        (1..nblocks).map(|_| GoldenNumber::ratio(rng.gen_range(1..slots.max(2)), grid)).collect();
    faults.sort();
    faults.dedup();
    faults.retain(|f| *f < horizon);

    FuzzCase { seed, index, instance: Instance::new(cat, batches), faults: FaultSequence::new(faults, horizon) }
}

/// Cases `0..n` of the stream for `seed`.
pub fn fuzz_cases(seed: u64, n: u64, cfg: &FuzzConfig) -> Vec<FuzzCase> {
    (0..n).map(|i| fuzz_case(seed, i, cfg)).collect()
}

/// A random speed `1 + j/4` with `j ∈ 0..=20`.
pub fn fuzz_speed(seed: u64, index: u64) -> GoldenNumber {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_5eed);
    rng.set_stream(index);
    &GoldenNumber::one() + &GoldenNumber::ratio(rng.gen_range(0..=20), 4)
}
