//! Collision expectations over randomized-address prefixes and the FIPS
//! 140-1 statistical tests over MAC-derived bit streams.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::address::{MacAddress, LOCAL_BIT, MULTICAST_BIT};
use crate::error::RandTestError;

/// Default prefix space: 24 prefix bits minus the fixed local and multicast
/// bits.
pub const DEFAULT_PREFIX_SPACE: u64 = 1 << 22;

pub const FIPS_STREAM_BITS: usize = 20_000;

// FIPS PUB 140-1 section 4.11.1 statistical test bounds.
const MONOBIT_LO: u32 = 9_654; // exclusive
const MONOBIT_HI: u32 = 10_346; // exclusive
const POKER_LO: f64 = 1.03; // exclusive
const POKER_HI: f64 = 57.4; // exclusive
/// Inclusive run-count intervals for run lengths 1..=5 and 6+.
const RUN_BOUNDS: [(u32, u32); 6] = [
    (2_267, 2_733),
    (1_079, 1_421),
    (502, 748),
    (223, 402),
    (90, 223),
    (90, 223),
];
const LONGEST_RUN_MAX: u32 = 33; // a run of 34 or more fails

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestResult<T> {
    pub statistic: T,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FipsReport {
    pub monobit: TestResult<u32>,
    pub poker: TestResult<f64>,
    /// Run counts for runs of zeros, lengths 1..=5 and 6+.
    pub runs_zero: [TestResult<u32>; 6],
    /// Run counts for runs of ones, lengths 1..=5 and 6+.
    pub runs_one: [TestResult<u32>; 6],
    pub longest_run: TestResult<u32>,
}

impl FipsReport {
    pub fn pass(&self) -> bool {
        self.monobit.pass
            && self.poker.pass
            && self.runs_zero.iter().all(|r| r.pass)
            && self.runs_one.iter().all(|r| r.pass)
            && self.longest_run.pass
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomnessReport {
    pub n: usize,
    pub m: u64,
    pub expected_collisions: f64,
    pub observed_collisions: u64,
    pub expected_triples: f64,
    pub observed_triples: u64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub fips: Option<FipsReport>,
}

/// E[# collisions] = C(n,2)/m, E[# triple collisions] = C(n,3)/m^2.
pub fn expected_collisions(n: usize, m: u64) -> f64 {
    let n = n as f64;
    n * (n - 1.0) / 2.0 / m as f64
}

pub fn expected_triples(n: usize, m: u64) -> f64 {
    let n = n as f64;
    let m = m as f64;
    n * (n - 1.0) * (n - 2.0) / 6.0 / (m * m)
}

/// Masks the local and multicast bits out of the first prefix byte; the
/// remaining 22 bits are the randomized prefix space.
pub fn masked_prefix(a: &MacAddress) -> [u8; 3] {
    let mut p = a.prefix();
    p[0] &= !(LOCAL_BIT | MULTICAST_BIT);
    p
}

pub fn collision_stats(addresses: &[MacAddress], m: u64) -> RandomnessReport {
    let mut counts: HashMap<[u8; 3], u64> = HashMap::new();
    for a in addresses {
        *counts.entry(masked_prefix(a)).or_default() += 1;
    }
    let observed_collisions = counts.values().filter(|&&c| c >= 2).count() as u64;
    let observed_triples = counts.values().filter(|&&c| c >= 3).count() as u64;
    let n = addresses.len();
    RandomnessReport {
        n,
        m,
        expected_collisions: if n >= 2 { expected_collisions(n, m) } else { 0.0 },
        observed_collisions,
        expected_triples: if n >= 3 { expected_triples(n, m) } else { 0.0 },
        observed_triples,
        fips: None,
    }
}

/// Concatenates the 46 variable bits of each address (all 48 except the
/// local and multicast bits of byte 0), most significant bit first.
pub fn mac_bitstream(addresses: &[MacAddress]) -> Vec<bool> {
    let mut bits = Vec::with_capacity(addresses.len() * 46);
    for a in addresses {
        let b = a.as_bytes();
        for shift in (2..8).rev() {
            bits.push(b[0] >> shift & 1 == 1);
        }
        for byte in &b[1..] {
            for shift in (0..8).rev() {
                bits.push(byte >> shift & 1 == 1);
            }
        }
    }
    bits
}

/// Runs the FIPS 140-1 suite over the first 20,000 bits (after `offset`).
pub fn fips_suite_at(bits: &[bool], offset: usize) -> Result<FipsReport, RandTestError> {
    if bits.len() < offset + FIPS_STREAM_BITS {
        return Err(RandTestError::ShortStream(bits.len().saturating_sub(offset)));
    }
    let bits = &bits[offset..offset + FIPS_STREAM_BITS];

    let ones = bits.iter().filter(|&&b| b).count() as u32;
    let monobit = TestResult {
        statistic: ones,
        pass: ones > MONOBIT_LO && ones < MONOBIT_HI,
    };

    let mut freq = [0u64; 16];
    for chunk in bits.chunks_exact(4) {
        let v = chunk.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize);
        freq[v] += 1;
    }
    let sum_sq: u64 = freq.iter().map(|f| f * f).sum();
    let poker_stat = 16.0 / 5_000.0 * sum_sq as f64 - 5_000.0;
    let poker = TestResult {
        statistic: poker_stat,
        pass: poker_stat > POKER_LO && poker_stat < POKER_HI,
    };

    let mut runs = [[0u32; 6]; 2]; // [bit value][length bucket]
    let mut longest = 0u32;
    let mut i = 0usize;
    while i < bits.len() {
        let bit = bits[i];
        let mut len = 1usize;
        while i + len < bits.len() && bits[i + len] == bit {
            len += 1;
        }
        let bucket = len.min(6) - 1;
        runs[bit as usize][bucket] += 1;
        longest = longest.max(len as u32);
        i += len;
    }
    let bucketize = |counts: [u32; 6]| -> [TestResult<u32>; 6] {
        std::array::from_fn(|i| TestResult {
            statistic: counts[i],
            pass: counts[i] >= RUN_BOUNDS[i].0 && counts[i] <= RUN_BOUNDS[i].1,
        })
    };

    Ok(FipsReport {
        monobit,
        poker,
        runs_zero: bucketize(runs[0]),
        runs_one: bucketize(runs[1]),
        longest_run: TestResult {
            statistic: longest,
            pass: longest <= LONGEST_RUN_MAX,
        },
    })
}

pub fn fips_suite(bits: &[bool]) -> Result<FipsReport, RandTestError> {
    fips_suite_at(bits, 0)
}

/// Full Appendix-B-style report for a randomized address sample.
pub fn randomness_report(addresses: &[MacAddress], m: u64) -> RandomnessReport {
    let mut report = collision_stats(addresses, m);
    let bits = mac_bitstream(addresses);
    report.fips = fips_suite(&bits).ok();
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn appendix_expectations() {
        // n = 47,255 over m = 2^22 prefixes.
        let e2 = expected_collisions(47_255, DEFAULT_PREFIX_SPACE);
        let e3 = expected_triples(47_255, DEFAULT_PREFIX_SPACE);
        assert!((266.0..266.5).contains(&e2), "{e2}");
        assert!((0.9..1.1).contains(&e3), "{e3}");
    }

    #[test]
    fn single_address_zero_expectations() {
        let report = collision_stats(&[MacAddress([2, 0, 0, 0, 0, 0])], DEFAULT_PREFIX_SPACE);
        assert_eq!(report.expected_collisions, 0.0);
        assert_eq!(report.observed_collisions, 0);
    }

    #[test]
    fn observed_counts_match_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let addresses: Vec<MacAddress> = (0..5_000)
            .map(|_| {
                let mut b = [0u8; 6];
                rng.fill(&mut b[..2]); // tiny prefix space to force collisions
                b[0] = (b[0] & 0x0F) | LOCAL_BIT;
                MacAddress(b)
            })
            .collect();
        let report = collision_stats(&addresses, 1 << 10);

        // Independent recount via sort.
        let mut prefixes: Vec<[u8; 3]> = addresses.iter().map(masked_prefix).collect();
        prefixes.sort();
        let mut coll = 0u64;
        let mut trip = 0u64;
        let mut i = 0;
        while i < prefixes.len() {
            let mut j = i + 1;
            while j < prefixes.len() && prefixes[j] == prefixes[i] {
                j += 1;
            }
            if j - i >= 2 {
                coll += 1;
            }
            if j - i >= 3 {
                trip += 1;
            }
            i = j;
        }
        assert_eq!(report.observed_collisions, coll);
        assert_eq!(report.observed_triples, trip);
    }

    #[test]
    fn expectation_matches_monte_carlo() {
        // Birthday simulation oracle: n = 10,000, m = 2^16, 5% agreement.
        let n = 10_000usize;
        let m = 1u64 << 16;
        let trials = 60;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut total_pairs = 0u64;
        let mut total_slots = 0u64;
        for _ in 0..trials {
            let mut counts = vec![0u64; m as usize];
            for _ in 0..n {
                let slot = rng.gen_range(0..m) as usize;
                counts[slot] += 1;
            }
            total_pairs += counts.iter().map(|&c| c * c.saturating_sub(1) / 2).sum::<u64>();
            total_slots += counts.iter().filter(|&&c| c >= 2).count() as u64;
        }
        // The formula counts colliding pairs; by linearity its expectation
        // is exact, so the simulated mean should sit within 5%.
        let mean_pairs = total_pairs as f64 / trials as f64;
        let expected = expected_collisions(n, m);
        assert!(
            (mean_pairs - expected).abs() / expected < 0.05,
            "mean {mean_pairs} vs expected {expected}"
        );
        // The slot count (what collision_stats observes) matches the exact
        // Poisson >=2 expectation.
        let lam = n as f64 / m as f64;
        let exact_slots = m as f64 * (1.0 - (-lam).exp() * (1.0 + lam));
        let mean_slots = total_slots as f64 / trials as f64;
        assert!(
            (mean_slots - exact_slots).abs() / exact_slots < 0.05,
            "mean {mean_slots} vs exact {exact_slots}"
        );
    }

    #[test]
    fn bitstream_lengths() {
        let a = MacAddress([0b1111_1100, 0, 0, 0, 0, 0]);
        let bits = mac_bitstream(&[a]);
        assert_eq!(bits.len(), 46);
        // byte 0 contributes its top six bits, MSB first
        assert_eq!(&bits[..6], &[true; 6]);
        assert!(bits[6..].iter().all(|&b| !b));

        let many: Vec<MacAddress> = (0..435).map(|i| MacAddress([2, 0, 0, 0, 0, i as u8])).collect();
        assert_eq!(mac_bitstream(&many).len(), 20_010);
    }

    #[test]
    fn all_zero_stream_fails_monobit() {
        let report = fips_suite(&vec![false; FIPS_STREAM_BITS]).unwrap();
        assert_eq!(report.monobit.statistic, 0);
        assert!(!report.monobit.pass);
        assert!(!report.pass());
    }

    #[test]
    fn short_stream_is_error() {
        assert!(matches!(
            fips_suite(&vec![false; 19_999]),
            Err(RandTestError::ShortStream(19_999))
        ));
    }

    #[test]
    fn paper_statistics_fall_in_pass_ranges() {
        // Appendix B reported values, checked against the stored bounds.
        assert!(9_939 > MONOBIT_LO && 9_939 < MONOBIT_HI);
        assert!(13.56 > POKER_LO && 13.56 < POKER_HI);
        for (i, stat) in [2_515u32, 1_342, 581, 281, 166].iter().enumerate() {
            assert!(*stat >= RUN_BOUNDS[i].0 && *stat <= RUN_BOUNDS[i].1);
        }
        assert!(12 <= LONGEST_RUN_MAX);
    }

    #[test]
    fn random_streams_pass() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut passes = 0;
        for _ in 0..10 {
            let bits: Vec<bool> = (0..FIPS_STREAM_BITS).map(|_| rng.gen()).collect();
            if fips_suite(&bits).unwrap().pass() {
                passes += 1;
            }
        }
        assert!(passes >= 9, "{passes}/10 passes");
    }
}
