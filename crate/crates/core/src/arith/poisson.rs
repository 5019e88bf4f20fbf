//! Poisson sampling for means of the form `2^e`.
//!
//! Draws use inversion against a CDF table held in 256-bit fixed point.
//! The uniform variate is read from the bit stream 64 bits at a time and
//! only extended when its current prefix coincides with the prefix of the
//! CDF boundary being compared, so most draws consume exactly 64 bits.
//!
//! Table entries are computed from the series `sum_i lambda^i / i!` in big
//! integer fixed point: with `A_j` the partial sum up to `j` and `E` the
//! full (truncated) sum, `CDF_j = A_j / E`. Both are sums of the same
//! positive terms, so the result is accurate to far below `2^-256` apart
//! from the final truncation.
//!
//! For `e <= DIRECT_EXPONENT_FLOOR` the mean is below `2^-64`; the draw is
//! 1 iff the next `-e` bits are all zero (read until the first one bit),
//! which has probability exactly `2^e`. This differs from the true law by
//! less than `2^(2e)` in total variation.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigUint;
use num_traits::Zero;

use super::RandomSource;

/// Exponents at or below this use the direct two-point draw.
pub const DIRECT_EXPONENT_FLOOR: i64 = -64;

const OUTPUT_BITS: u64 = 256;
const GUARD_BITS: u64 = 96;
const LIMBS: usize = (OUTPUT_BITS / 64) as usize;

/// `floor(CDF_j * 2^256)` for every `j` whose CDF is below one, stored as
/// big-endian 64-bit limbs so that array order is numeric order.
#[derive(Debug)]
struct CdfTable {
    bounds: Vec<[u64; LIMBS]>,
}

impl CdfTable {
    fn build(e: i64) -> Self {
        let frac_bits = OUTPUT_BITS + GUARD_BITS;
        let next_term = |term: &BigUint, i: u64| -> BigUint {
            let scaled = if e >= 0 { term << (e as u64) } else { term >> e.unsigned_abs() };
            scaled / i
        };

        let one = BigUint::from(1u32) << frac_bits;
        let mut total = one.clone();
        let mut term = one.clone();
        let mut i = 1u64;
        loop {
            term = next_term(&term, i);
            if term.is_zero() {
                break;
            }
            total += &term;
            i += 1;
        }

        let full = BigUint::from(1u32) << OUTPUT_BITS;
        let mut bounds = Vec::new();
        let mut partial = one.clone();
        let mut term = one;
        let mut i = 1u64;
        loop {
            let scaled = (&partial << OUTPUT_BITS) / &total;
            if scaled >= full {
                break;
            }
            bounds.push(to_limbs(&scaled));
            term = next_term(&term, i);
            if term.is_zero() {
                break;
            }
            partial += &term;
            i += 1;
        }
        Self { bounds }
    }

    fn sample(&self, rng: &mut RandomSource) -> u64 {
        let mut uniform = [0u64; LIMBS];
        uniform[0] = rng.next_uniform_bits(64);
        let mut known = 1;
        for (j, bound) in self.bounds.iter().enumerate() {
            loop {
                match uniform[..known].cmp(&bound[..known]) {
                    std::cmp::Ordering::Less => return j as u64,
                    std::cmp::Ordering::Greater => break,
                    std::cmp::Ordering::Equal => {
                        if known == LIMBS || bound[known..].iter().all(|&l| l == 0) {
                            // uniform >= bound
                            break;
                        }
                        uniform[known] = rng.next_uniform_bits(64);
                        known += 1;
                    }
                }
            }
        }
        self.bounds.len() as u64
    }
}

fn to_limbs(value: &BigUint) -> [u64; LIMBS] {
    let digits = value.to_u64_digits();
    let mut limbs = [0u64; LIMBS];
    for (i, d) in digits.iter().enumerate() {
        limbs[LIMBS - 1 - i] = *d;
    }
    limbs
}

fn shared_tables() -> &'static RwLock<HashMap<i64, Arc<CdfTable>>> {
    static TABLES: OnceLock<RwLock<HashMap<i64, Arc<CdfTable>>>> = OnceLock::new();
    TABLES.get_or_init(Default::default)
}

/// Sampler for `Poisson(2^e)`. Tables are built on first use of each
/// exponent and shared process-wide.
#[derive(Debug, Default, Clone)]
pub struct PoissonPow2 {
    local: HashMap<i64, Arc<CdfTable>>,
}

impl PoissonPow2 {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn sample(&mut self, e: i64, rng: &mut RandomSource) -> u64 {
        if e <= DIRECT_EXPONENT_FLOOR {
            return sample_tiny(e, rng);
        }
        let table = self.local.entry(e).or_insert_with(|| table_for(e));
        table.sample(rng)
    }

    /// Number of values with a nonzero CDF boundary below one for `2^e`.
    /// Exposed for diagnostics.
    pub fn support_len(&mut self, e: i64) -> usize {
        self.local.entry(e).or_insert_with(|| table_for(e)).bounds.len()
    }
}

fn table_for(e: i64) -> Arc<CdfTable> {
    if let Some(t) = shared_tables().read().unwrap().get(&e) {
        return Arc::clone(t);
    }
    let built = Arc::new(CdfTable::build(e));
    let mut tables = shared_tables().write().unwrap();
    Arc::clone(tables.entry(e).or_insert(built))
}

fn sample_tiny(e: i64, rng: &mut RandomSource) -> u64 {
    for _ in 0..e.unsigned_abs() {
        if rng.next_bit() {
            return 0;
        }
    }
    1
}

/// One draw from `Poisson(2^e)`.
pub fn poisson_pow2(e: i64, rng: &mut RandomSource) -> u64 {
    PoissonPow2::new().sample(e, rng)
}
