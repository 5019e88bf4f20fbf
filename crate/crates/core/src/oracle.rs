//! Exact #DNF counters used as ground truth.
//!
//! [`exact_brute`] enumerates assignments and is limited by `n`;
//! [`exact_incexc`] sums over cube subsets and is limited by `m`. Where
//! both apply they must agree.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use thiserror::Error;

use crate::arith::BigCount;
use crate::dnf::DnfFormula;

pub const MAX_BRUTE_VARS: u32 = 30;
pub const MAX_INCEXC_CUBES: usize = 22;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExactMethod {
    Brute,
    InclusionExclusion,
}

impl fmt::Display for ExactMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExactMethod::Brute => "brute",
            ExactMethod::InclusionExclusion => "incexc",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactCount {
    pub count: BigCount,
    pub method: ExactMethod,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("brute-force enumeration needs at most {MAX_BRUTE_VARS} variables, formula has {0}")]
    TooManyVars(u32),
    #[error("inclusion-exclusion needs at most {MAX_INCEXC_CUBES} cubes, formula has {0}")]
    TooManyCubes(usize),
    #[error("no feasible exact method for {n} variables and {m} cubes")]
    Infeasible { n: u32, m: usize },
}

/// Counts satisfying assignments by enumerating all `2^n` of them.
pub fn exact_brute(formula: &DnfFormula) -> Result<BigCount, OracleError> {
    let n = formula.num_vars();
    if n > MAX_BRUTE_VARS {
        return Err(OracleError::TooManyVars(n));
    }
    if formula.is_tautology() {
        return Ok(BigUint::from(1u64 << n));
    }
    // bit (v-1) of an assignment is the value of variable v
    let masks: Vec<(u32, u32)> = formula
        .cubes()
        .iter()
        .map(|c| {
            c.literals().iter().fold((0, 0), |(mask, want), lit| {
                let bit = 1u32 << lit.index();
                (mask | bit, if lit.is_positive() { want | bit } else { want })
            })
        })
        .collect();
    let satisfied = (0..(1u64 << n))
        .filter(|&a| masks.iter().any(|&(mask, want)| a as u32 & mask == want))
        .count();
    Ok(BigUint::from(satisfied))
}

/// Counts by inclusion-exclusion over consistent cube subsets: each
/// nonempty consistent subset `S` contributes `(-1)^(|S|+1) 2^(n - |vars(S)|)`.
/// Inconsistent subsets, and all their supersets, contribute nothing.
pub fn exact_incexc(formula: &DnfFormula) -> Result<BigCount, OracleError> {
    let m = formula.num_cubes();
    if m > MAX_INCEXC_CUBES {
        return Err(OracleError::TooManyCubes(m));
    }
    let n = u64::from(formula.num_vars());
    if formula.is_tautology() {
        return Ok(BigUint::from(1u32) << n);
    }

    // coefficient[w] = signed number of subsets whose union fixes w variables
    let mut coefficient: Vec<i64> = vec![0; n as usize + 1];
    let mut walker = SubsetWalker {
        formula,
        fixed: vec![(false, 0); n as usize],
        width: 0,
        coefficient: &mut coefficient,
    };
    walker.descend(0, 0);

    let total: BigInt = coefficient
        .iter()
        .enumerate()
        .filter(|(_, &c)| c != 0)
        .map(|(w, &c)| BigInt::from(c) << (n - w as u64))
        .sum();
    Ok(total.to_biguint().expect("inclusion-exclusion total is non-negative"))
}

struct SubsetWalker<'a> {
    formula: &'a DnfFormula,
    /// Per variable: polarity and how many chosen cubes fix it.
    fixed: Vec<(bool, u32)>,
    width: usize,
    coefficient: &'a mut Vec<i64>,
}

impl SubsetWalker<'_> {
    fn descend(&mut self, next: usize, chosen: usize) {
        let cubes = self.formula.cubes();
        for (i, cube) in cubes.iter().enumerate().skip(next) {
            let lits = cube.literals();
            let consistent = lits.iter().all(|l| {
                let (pol, refs) = self.fixed[l.index()];
                refs == 0 || pol == l.is_positive()
            });
            if !consistent {
                continue;
            }
            for l in lits {
                let slot = &mut self.fixed[l.index()];
                if slot.1 == 0 {
                    *slot = (l.is_positive(), 0);
                    self.width += 1;
                }
                slot.1 += 1;
            }
            let size = chosen + 1;
            self.coefficient[self.width] += if size % 2 == 1 { 1 } else { -1 };
            self.descend(i + 1, size);
            for l in lits {
                let slot = &mut self.fixed[l.index()];
                slot.1 -= 1;
                if slot.1 == 0 {
                    self.width -= 1;
                }
            }
        }
    }
}

/// Picks a feasible method: brute force for small `n`, inclusion-exclusion
/// for few cubes, brute force up to its limit otherwise.
pub fn choose_method(formula: &DnfFormula) -> Result<ExactMethod, OracleError> {
    let (n, m) = (formula.num_vars(), formula.num_cubes());
    if n <= 20 {
        Ok(ExactMethod::Brute)
    } else if m <= MAX_INCEXC_CUBES {
        Ok(ExactMethod::InclusionExclusion)
    } else if n <= MAX_BRUTE_VARS {
        Ok(ExactMethod::Brute)
    } else {
        Err(OracleError::Infeasible { n, m })
    }
}

pub fn exact_count(formula: &DnfFormula, method: Option<ExactMethod>) -> Result<ExactCount, OracleError> {
    let method = match method {
        Some(m) => m,
        None => choose_method(formula)?,
    };
    let count = match method {
        ExactMethod::Brute => exact_brute(formula)?,
        ExactMethod::InclusionExclusion => exact_incexc(formula)?,
    };
    Ok(ExactCount { count, method })
}
