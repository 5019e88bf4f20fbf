use crate::arith::RandomSource;
use crate::dnf::Cube;

use super::{CellValue, SampleRows, StoreError};

const CELLS_PER_BYTE: usize = 4;
const ALL_MARK: u8 = 0xFF;

/// All samples in one pre-allocated, 2-bit-packed buffer.
///
/// Cell `(slot, var)` lives at position `slot * n + var`; rows are packed
/// back to back with no padding, so the buffer is exactly
/// `ceil(capacity * n / 4)` bytes.
#[derive(Debug, Clone)]
pub struct DenseRows {
    n: usize,
    bytes: Vec<u8>,
}

impl DenseRows {
    #[inline]
    fn get(&self, pos: usize) -> CellValue {
        let bits = (self.bytes[pos / CELLS_PER_BYTE] >> ((pos % CELLS_PER_BYTE) * 2)) & 0b11;
        CellValue::from_bits(bits).expect("dense store holds an invalid 10 cell")
    }

    #[inline]
    fn set(&mut self, pos: usize, value: CellValue) {
        let shift = (pos % CELLS_PER_BYTE) * 2;
        let byte = &mut self.bytes[pos / CELLS_PER_BYTE];
        *byte = (*byte & !(0b11 << shift)) | (value.bits() << shift);
    }

    fn fill_mark(&mut self, start: usize, end: usize) {
        let mut pos = start;
        while pos < end && !pos.is_multiple_of(CELLS_PER_BYTE) {
            self.set(pos, CellValue::Mark);
            pos += 1;
        }
        let whole_end = pos + (end - pos) / CELLS_PER_BYTE * CELLS_PER_BYTE;
        self.bytes[pos / CELLS_PER_BYTE..whole_end / CELLS_PER_BYTE].fill(ALL_MARK);
        for p in whole_end..end {
            self.set(p, CellValue::Mark);
        }
    }
}

impl SampleRows for DenseRows {
    fn with_capacity(capacity: usize, n: usize) -> Result<Self, StoreError> {
        let cells = capacity.checked_mul(n).ok_or(StoreError::Allocation)?;
        let len = cells.div_ceil(CELLS_PER_BYTE);
        let mut bytes = Vec::new();
        bytes.try_reserve_exact(len).map_err(|_| StoreError::Allocation)?;
        bytes.resize(len, ALL_MARK);
        Ok(Self { n, bytes })
    }

    fn write_lazy(&mut self, slot: usize, cube: &Cube) {
        let base = slot * self.n;
        self.fill_mark(base, base + self.n);
        for lit in cube.literals() {
            self.set(base + lit.index(), CellValue::from_bool(lit.is_positive()));
        }
    }

    fn materialize_and_check(&mut self, slot: usize, cube: &Cube, rng: &mut RandomSource) -> bool {
        let base = slot * self.n;
        let mut agrees = true;
        for lit in cube.literals() {
            let pos = base + lit.index();
            let value = match self.get(pos) {
                CellValue::Mark => {
                    let drawn = CellValue::from_bool(rng.next_bit());
                    self.set(pos, drawn);
                    drawn
                }
                v => v,
            };
            agrees &= value == CellValue::from_bool(lit.is_positive());
        }
        agrees
    }

    fn cell(&self, slot: usize, var_index: usize) -> CellValue {
        self.get(slot * self.n + var_index)
    }

    fn payload_bytes(&self) -> usize {
        self.bytes.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn payload_is_exact_two_bit_packing() {
        let rows = DenseRows::with_capacity(79, 100).unwrap();
        assert_eq!(rows.payload_bytes(), 1975);
        let rows = DenseRows::with_capacity(79, 101).unwrap();
        assert_eq!(rows.payload_bytes(), (79 * 101 * 2usize).div_ceil(8));
    }

    #[test]
    fn fill_handles_unaligned_rows() {
        let mut rows = DenseRows::with_capacity(3, 7).unwrap();
        for pos in 0..21 {
            rows.set(pos, CellValue::False);
        }
        rows.fill_mark(7, 14);
        for pos in 0..21 {
            let expected = if (7..14).contains(&pos) { CellValue::Mark } else { CellValue::False };
            assert_eq!(rows.get(pos), expected, "pos {pos}");
        }
    }
}
