//! Approximate counting of satisfying assignments of DNF formulas.
//!
//! [`count`] streams over the cubes of a [`DnfFormula`] once, keeping at
//! most `Thresh` lazily materialized samples, and returns an estimate that
//! lies within `(1 ± eps)` of the true count with probability at least
//! `1 - delta`. Exact counters for small instances live in [`oracle`].
//!
//! ```
//! use pepin::{count, parse_dnf, CounterConfig};
//!
//! let formula = parse_dnf(b"p dnf 4 3\n1 2 0\n-1 3 0\n2 -3 0\n").unwrap();
//! let estimate = count(&formula, &CounterConfig::with_seed(7)).unwrap();
//! assert_eq!(estimate.count, pepin::estimate(estimate.final_size, estimate.final_k));
//! ```

pub mod arith;
pub mod counter;
pub mod dnf;
pub mod oracle;
pub mod store;

pub use arith::{estimate, mean_exceeds, poisson_pow2, BigCount, DyadicProb, PoissonPow2, RandomSource};
pub use counter::{
    compute_thresh, count, CountError, CountEstimate, CounterConfig, CounterState, CubeOutcome,
    DEFAULT_DELTA, DEFAULT_EPSILON,
};
pub use dnf::{
    generate_random, normalize, parse_dnf, parse_dnf_with, serialize, Cube, DnfFormula, GenerateError,
    Literal, ParseError, ParseOptions,
};
pub use oracle::{exact_brute, exact_count, exact_incexc, ExactCount, ExactMethod, OracleError};
pub use store::{Backend, CellValue, DenseStore, SampleStore, SparseStore, StoreError};
