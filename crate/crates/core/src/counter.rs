//! The streaming DNF counter.
//!
//! Cubes are processed once, in order. The counter keeps a multiset `X` of
//! lazy samples of the solutions seen so far, each present with
//! probability `p = 2^-k`, and never lets `|X|` exceed `Thresh`. For each
//! cube `C` of width `w` (with `t = 2^(n-w)` solutions):
//!
//! 1. remove every sample that satisfies `C`;
//! 2. while `t * p >= Thresh`, thin `X` by half and halve `p`;
//! 3. draw `N ~ Poisson(t * p)`;
//! 4. while `N + |X| > Thresh`, thin `X` by half, halve `p` and redraw
//!    `N ~ Poisson(t * p)` at the new `p`;
//! 5. append `N` lazy samples of `C`.
//!
//! The estimate is `|X| / p = |X| * 2^k`.
//!
//! Random bits are consumed in exactly that order, so a seed fixes the
//! whole run.

use std::time::{Duration, Instant};

use num_bigint::BigUint;
use thiserror::Error;

use crate::arith::{estimate, mean_exceeds, BigCount, DyadicProb, PoissonPow2, RandomSource};
use crate::dnf::{Cube, DnfFormula};
use crate::store::{Backend, DenseRows, SampleRows, SampleStore, SparseRows, StoreError};

/// Default tolerance, matching the usual benchmark setting.
pub const DEFAULT_EPSILON: f64 = 0.8;
/// Default confidence parameter.
pub const DEFAULT_DELTA: f64 = 0.36;

/// `k` may exceed `n` by at most this much before a run is aborted.
pub const EXPONENT_SLACK: u64 = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CountError {
    #[error("epsilon must lie strictly between 0 and 1, got {0}")]
    InvalidEpsilon(f64),
    #[error("delta must lie strictly between 0 and 1, got {0}")]
    InvalidDelta(f64),
    #[error("cube count must be at least 1")]
    NoCubes,
    #[error("sampling exponent {k} exceeded the cap {cap}")]
    ExponentOverflow { k: u64, cap: u64 },
    #[error(transparent)]
    Store(#[from] StoreError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CounterConfig {
    pub epsilon: f64,
    pub delta: f64,
    pub seed: u64,
    pub backend: Backend,
}

impl Default for CounterConfig {
    fn default() -> Self {
        Self {
            epsilon: DEFAULT_EPSILON,
            delta: DEFAULT_DELTA,
            seed: 0,
            backend: Backend::Dense,
        }
    }
}

impl CounterConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }

    pub fn validate(&self) -> Result<(), CountError> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(CountError::InvalidEpsilon(self.epsilon));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(CountError::InvalidDelta(self.delta));
        }
        Ok(())
    }
}

/// Sample store capacity:
/// `ceil(max(12 ln(24/delta) / eps^2, 6 (ln(6/delta) + ln m)))`.
pub fn compute_thresh(epsilon: f64, delta: f64, m: usize) -> Result<u64, CountError> {
    CounterConfig { epsilon, delta, ..Default::default() }.validate()?;
    if m == 0 {
        return Err(CountError::NoCubes);
    }
    let accuracy = 12.0 * (24.0 / delta).ln() / (epsilon * epsilon);
    let union = 6.0 * ((6.0 / delta).ln() + (m as f64).ln());
    Ok(accuracy.max(union).ceil() as u64)
}

/// Result of one counter run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountEstimate {
    /// `final_size * 2^final_k`.
    pub count: BigCount,
    pub final_k: u64,
    pub final_size: u64,
    pub thresh: u64,
    pub seed: u64,
    pub elapsed: Duration,
}

/// What happened while processing one cube.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CubeOutcome {
    /// Samples removed because they satisfied the cube.
    pub removed: usize,
    /// Samples appended from the cube.
    pub appended: u64,
    /// `|X|` afterwards.
    pub size: usize,
    /// `k` afterwards.
    pub k: u64,
}

/// Live state of a run over `n` variables.
#[derive(Debug, Clone)]
pub struct CounterState<R> {
    n: u32,
    thresh: u64,
    prob: DyadicProb,
    store: SampleStore<R>,
    rng: RandomSource,
    poisson: PoissonPow2,
    cubes_processed: usize,
}

impl<R: SampleRows> CounterState<R> {
    pub fn new(n: u32, thresh: u64, seed: u64) -> Result<Self, CountError> {
        let capacity = usize::try_from(thresh).map_err(|_| StoreError::Allocation)?;
        Ok(Self {
            n,
            thresh,
            prob: DyadicProb::ONE,
            store: SampleStore::new(capacity, n as usize)?,
            rng: RandomSource::new(seed),
            poisson: PoissonPow2::new(),
            cubes_processed: 0,
        })
    }

    /// Starts the run at `p = 2^-k` instead of 1. Only meaningful before
    /// any cube is processed; used to isolate the sampling law in tests.
    #[doc(hidden)]
    pub fn with_initial_k(mut self, k: u64) -> Self {
        assert_eq!(self.cubes_processed, 0);
        self.prob = DyadicProb::from_exponent(k);
        self
    }

    pub fn thresh(&self) -> u64 {
        self.thresh
    }

    pub fn k(&self) -> u64 {
        self.prob.exponent()
    }

    pub fn size(&self) -> usize {
        self.store.len()
    }

    pub fn cubes_processed(&self) -> usize {
        self.cubes_processed
    }

    pub fn store(&self) -> &SampleStore<R> {
        &self.store
    }

    pub fn rng(&self) -> &RandomSource {
        &self.rng
    }

    fn halve(&mut self) -> Result<(), CountError> {
        self.store.thin_half(&mut self.rng);
        let next = self.prob.halved();
        let cap = u64::from(self.n) + EXPONENT_SLACK;
        if next.exponent() > cap {
            return Err(CountError::ExponentOverflow { k: next.exponent(), cap });
        }
        self.prob = next;
        Ok(())
    }

    pub fn process_cube(&mut self, cube: &Cube) -> Result<CubeOutcome, CountError> {
        let t_exp = i64::from(self.n) - cube.width() as i64;

        let removed = self.store.scan_remove_satisfying(cube, &mut self.rng);

        while mean_exceeds(t_exp, self.prob.exponent(), self.thresh) {
            self.halve()?;
        }

        let mut draw = self.poisson.sample(self.prob.scaled_exponent(t_exp), &mut self.rng);
        while draw + self.store.len() as u64 > self.thresh {
            self.halve()?;
            draw = self.poisson.sample(self.prob.scaled_exponent(t_exp), &mut self.rng);
        }

        self.generate_samples(cube, draw)?;
        self.cubes_processed += 1;
        debug_assert!(self.store.len() as u64 <= self.thresh);
        Ok(CubeOutcome {
            removed,
            appended: draw,
            size: self.store.len(),
            k: self.prob.exponent(),
        })
    }

    /// Appends `count` lazy samples of `cube`. Draws no random bits.
    pub fn generate_samples(&mut self, cube: &Cube, count: u64) -> Result<(), CountError> {
        for _ in 0..count {
            self.store.append_lazy(cube)?;
        }
        Ok(())
    }

    /// Current estimate `|X| * 2^k`.
    pub fn estimate(&self) -> BigCount {
        estimate(self.store.len() as u64, self.prob.exponent())
    }
}

/// Runs the counter over `formula`.
pub fn count(formula: &DnfFormula, config: &CounterConfig) -> Result<CountEstimate, CountError> {
    config.validate()?;
    let start = Instant::now();
    let m = formula.num_cubes();
    let thresh = compute_thresh(config.epsilon, config.delta, m.max(1))?;
    let finish = |count: BigCount, final_k: u64, final_size: u64| CountEstimate {
        count,
        final_k,
        final_size,
        thresh,
        seed: config.seed,
        elapsed: start.elapsed(),
    };

    if formula.is_tautology() {
        let n = u64::from(formula.num_vars());
        return Ok(finish(BigUint::from(1u32) << n, n, 1));
    }
    if m == 0 {
        return Ok(finish(BigUint::default(), 0, 0));
    }
    let (size, k) = match config.backend {
        Backend::Dense => run::<DenseRows>(formula, thresh, config.seed)?,
        Backend::Sparse => run::<SparseRows>(formula, thresh, config.seed)?,
    };
    Ok(finish(estimate(size, k), k, size))
}

fn run<R: SampleRows>(formula: &DnfFormula, thresh: u64, seed: u64) -> Result<(u64, u64), CountError> {
    let mut state = CounterState::<R>::new(formula.num_vars(), thresh, seed)?;
    for cube in formula.cubes() {
        state.process_cube(cube)?;
    }
    Ok((state.size() as u64, state.k()))
}
