use crate::arith::RandomSource;
use crate::dnf::Cube;

use super::{CellValue, SampleRows, StoreError};

/// One sample as run-length encoded MARK runs.
///
/// The row starts with `lead` MARK cells; each entry is an assigned value
/// followed by `run` MARK cells.
#[derive(Debug, Clone, Default)]
struct SparseRow {
    lead: u32,
    entries: Vec<(bool, u32)>,
}

/// Where a variable falls in a sparse row.
enum Locate {
    Assigned(bool),
    /// In the leading MARK run.
    Lead,
    /// In the MARK run following entry `i`, whose value sits at `pos`.
    After { i: usize, pos: u32 },
}

impl SparseRow {
    fn locate(&self, var: u32) -> Locate {
        if var < self.lead {
            return Locate::Lead;
        }
        let mut pos = self.lead;
        for (i, &(value, run)) in self.entries.iter().enumerate() {
            if var == pos {
                return Locate::Assigned(value);
            }
            if var <= pos + run {
                return Locate::After { i, pos };
            }
            pos += 1 + run;
        }
        unreachable!("variable {var} beyond row length")
    }

    fn get(&self, var: u32) -> CellValue {
        match self.locate(var) {
            Locate::Assigned(v) => CellValue::from_bool(v),
            _ => CellValue::Mark,
        }
    }

    /// Assigns a MARK cell, splitting the run that contains it.
    fn assign(&mut self, var: u32, value: bool) {
        match self.locate(var) {
            Locate::Assigned(_) => panic!("cell {var} already assigned"),
            Locate::Lead => {
                let tail = self.lead - var - 1;
                self.lead = var;
                self.entries.insert(0, (value, tail));
            }
            Locate::After { i, pos } => {
                let run = self.entries[i].1;
                let before = var - pos - 1;
                self.entries[i].1 = before;
                self.entries.insert(i + 1, (value, run - before - 1));
            }
        }
    }

    fn reset_to(&mut self, n: u32, cube: &Cube) {
        self.entries.clear();
        let mut prev: Option<u32> = None;
        for lit in cube.literals() {
            let var = lit.index() as u32;
            match prev {
                None => self.lead = var,
                Some(p) => self.entries.last_mut().unwrap().1 = var - p - 1,
            }
            self.entries.push((lit.is_positive(), 0));
            prev = Some(var);
        }
        match prev {
            None => self.lead = n,
            Some(p) => self.entries.last_mut().unwrap().1 = n - p - 1,
        }
    }
}

/// Run-length sample storage: only assigned cells are stored explicitly.
#[derive(Debug, Clone)]
pub struct SparseRows {
    n: u32,
    rows: Vec<SparseRow>,
}

impl SampleRows for SparseRows {
    fn with_capacity(capacity: usize, n: usize) -> Result<Self, StoreError> {
        let n = u32::try_from(n).map_err(|_| StoreError::Allocation)?;
        let mut rows = Vec::new();
        rows.try_reserve_exact(capacity).map_err(|_| StoreError::Allocation)?;
        rows.resize(capacity, SparseRow { lead: n, entries: Vec::new() });
        Ok(Self { n, rows })
    }

    fn write_lazy(&mut self, slot: usize, cube: &Cube) {
        let n = self.n;
        self.rows[slot].reset_to(n, cube);
    }

    fn materialize_and_check(&mut self, slot: usize, cube: &Cube, rng: &mut RandomSource) -> bool {
        let row = &mut self.rows[slot];
        let mut agrees = true;
        for lit in cube.literals() {
            let var = lit.index() as u32;
            let value = match row.get(var) {
                CellValue::Mark => {
                    let drawn = rng.next_bit();
                    row.assign(var, drawn);
                    drawn
                }
                v => v == CellValue::True,
            };
            agrees &= value == lit.is_positive();
        }
        agrees
    }

    fn cell(&self, slot: usize, var_index: usize) -> CellValue {
        self.rows[slot].get(var_index as u32)
    }

    fn payload_bytes(&self) -> usize {
        self.rows
            .iter()
            .map(|r| std::mem::size_of::<u32>() + r.entries.len() * std::mem::size_of::<(bool, u32)>())
            .sum()
    }
}
