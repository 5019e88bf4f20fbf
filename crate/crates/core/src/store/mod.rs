//! The multiset of lazy samples.
//!
//! A store has a fixed number of slots. Occupied slots hold one lazy
//! sample each; free slot ids sit on a stack, so an append reuses the most
//! recently freed slot. Slot bookkeeping is shared by both backends and
//! every pass over the samples visits occupied slots in ascending slot
//! order, so a given seed produces the same random bit consumption, and
//! the same results, whichever backend holds the cells.
//!
//! Bit consumption:
//! - [`SampleStore::append_lazy`] draws nothing.
//! - [`SampleStore::check_materialize`] draws one bit for every cube
//!   literal whose cell is still MARK, in ascending variable order, before
//!   comparing (no early exit). A drawn 1 is TRUE.
//! - [`SampleStore::thin_half`] draws one bit per occupied slot and
//!   removes the sample when the bit is 1.

mod cell;
mod dense;
mod sparse;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::arith::RandomSource;
use crate::dnf::Cube;

pub use cell::CellValue;
pub use dense::DenseRows;
pub use sparse::SparseRows;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StoreError {
    #[error("sample store is full")]
    Full,
    #[error("store capacity and variable count must both be at least 1")]
    InvalidShape,
    #[error("could not allocate the sample store")]
    Allocation,
}

/// Which cell representation a store uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Backend {
    #[default]
    Dense,
    Sparse,
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Backend::Dense => "dense",
            Backend::Sparse => "sparse",
        })
    }
}

impl FromStr for Backend {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dense" => Ok(Backend::Dense),
            "sparse" => Ok(Backend::Sparse),
            other => Err(format!("unknown backend `{other}` (expected dense or sparse)")),
        }
    }
}

/// Cell storage for a fixed number of rows of `n` cells.
pub trait SampleRows: Sized {
    /// Storage with every cell MARK.
    fn with_capacity(capacity: usize, n: usize) -> Result<Self, StoreError>;

    /// Overwrites row `slot` with the lazy sample of `cube`.
    fn write_lazy(&mut self, slot: usize, cube: &Cube);

    /// Draws the MARK cells under `cube`'s literals and reports whether the
    /// row agrees with every literal.
    fn materialize_and_check(&mut self, slot: usize, cube: &Cube, rng: &mut RandomSource) -> bool;

    fn cell(&self, slot: usize, var_index: usize) -> CellValue;

    /// Bytes used for cell data.
    fn payload_bytes(&self) -> usize;
}

#[derive(Debug, Clone)]
pub struct SampleStore<R> {
    rows: R,
    n: usize,
    occupied: Vec<bool>,
    free: Vec<u32>,
}

pub type DenseStore = SampleStore<DenseRows>;
pub type SparseStore = SampleStore<SparseRows>;

impl<R: SampleRows> SampleStore<R> {
    pub fn new(capacity: usize, n: usize) -> Result<Self, StoreError> {
        if capacity == 0 || n == 0 {
            return Err(StoreError::InvalidShape);
        }
        let slots = u32::try_from(capacity).map_err(|_| StoreError::Allocation)?;
        Ok(Self {
            rows: R::with_capacity(capacity, n)?,
            n,
            occupied: vec![false; capacity],
            // slot 0 is handed out first
            free: (0..slots).rev().collect(),
        })
    }

    pub fn capacity(&self) -> usize {
        self.occupied.len()
    }

    pub fn num_vars(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.capacity() - self.free.len()
    }

    pub fn is_empty(&self) -> bool {
        self.free.len() == self.capacity()
    }

    pub fn free_slots(&self) -> usize {
        self.free.len()
    }

    pub fn is_occupied(&self, slot: usize) -> bool {
        self.occupied[slot]
    }

    /// Occupied slot ids in ascending order.
    pub fn occupied_slots(&self) -> impl Iterator<Item = usize> + '_ {
        self.occupied.iter().enumerate().filter_map(|(i, &o)| o.then_some(i))
    }

    pub fn cell(&self, slot: usize, var_index: usize) -> CellValue {
        self.rows.cell(slot, var_index)
    }

    pub fn payload_bytes(&self) -> usize {
        self.rows.payload_bytes()
    }

    /// Stores the lazy sample of `cube` and returns its slot.
    pub fn append_lazy(&mut self, cube: &Cube) -> Result<usize, StoreError> {
        let slot = self.free.pop().ok_or(StoreError::Full)? as usize;
        self.occupied[slot] = true;
        self.rows.write_lazy(slot, cube);
        self.debug_check();
        Ok(slot)
    }

    /// Fills in the sample's MARK cells under `cube` and reports whether
    /// the sample satisfies `cube`.
    pub fn check_materialize(&mut self, slot: usize, cube: &Cube, rng: &mut RandomSource) -> bool {
        assert!(self.occupied[slot], "slot {slot} is not occupied");
        self.rows.materialize_and_check(slot, cube, rng)
    }

    pub fn remove(&mut self, slot: usize) {
        assert!(self.occupied[slot], "slot {slot} removed twice");
        self.occupied[slot] = false;
        self.free.push(slot as u32);
        self.debug_check();
    }

    /// Keeps each sample independently with probability 1/2.
    pub fn thin_half(&mut self, rng: &mut RandomSource) {
        if self.is_empty() {
            return;
        }
        for slot in 0..self.capacity() {
            if self.occupied[slot] && rng.next_bit() {
                self.remove(slot);
            }
        }
    }

    /// Removes every sample that satisfies `cube`, materializing as needed.
    pub fn scan_remove_satisfying(&mut self, cube: &Cube, rng: &mut RandomSource) -> usize {
        if self.is_empty() {
            return 0;
        }
        let mut removed = 0;
        for slot in 0..self.capacity() {
            if self.occupied[slot] && self.rows.materialize_and_check(slot, cube, rng) {
                self.remove(slot);
                removed += 1;
            }
        }
        removed
    }

    /// One line per occupied slot, `0`/`1`/`?` per variable.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for slot in self.occupied_slots() {
            out.extend((0..self.n).map(|v| self.rows.cell(slot, v).symbol()));
            out.push('\n');
        }
        out
    }

    #[inline]
    fn debug_check(&self) {
        debug_assert_eq!(
            self.occupied.iter().filter(|&&o| o).count() + self.free.len(),
            self.capacity()
        );
    }
}
