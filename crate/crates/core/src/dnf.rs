//! DNF formulas: literals, cubes, the `p dnf` text format and a random
//! benchmark generator.
//!
//! The text format is DIMACS-like:
//!
//! ```text
//! c optional comment lines
//! p dnf <vars> <cubes>
//! 1 -3 0
//! 2 0
//! ```
//!
//! Each cube is a run of nonzero literals terminated by `0`. Tokens may be
//! separated by any whitespace, so a cube can span lines.

use std::fmt::{self, Write as _};

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

/// A variable or its negation. Variables are numbered from 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    var: u32,
    positive: bool,
}

impl Literal {
    pub fn new(var: u32, positive: bool) -> Self {
        assert!(var >= 1, "variables are 1-based");
        Self { var, positive }
    }

    /// Builds a literal from its DIMACS integer form. Returns `None` for 0.
    pub fn from_dimacs(value: i64) -> Option<Self> {
        if value == 0 {
            return None;
        }
        let var = u32::try_from(value.unsigned_abs()).ok()?;
        Some(Self {
            var,
            positive: value > 0,
        })
    }

    pub fn var(self) -> u32 {
        self.var
    }

    /// Zero-based index of the variable, for indexing sample rows.
    pub fn index(self) -> usize {
        self.var as usize - 1
    }

    pub fn is_positive(self) -> bool {
        self.positive
    }

    pub fn to_dimacs(self) -> i64 {
        if self.positive {
            i64::from(self.var)
        } else {
            -i64::from(self.var)
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

/// A conjunction of literals over distinct variables, sorted by variable.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Cube {
    literals: Vec<Literal>,
}

impl Cube {
    /// Normalizes `literals` into a cube. Returns `None` if the literals
    /// contain both polarities of some variable.
    pub fn new(mut literals: Vec<Literal>) -> Option<Self> {
        literals.sort_unstable();
        literals.dedup();
        if literals.windows(2).any(|w| w[0].var == w[1].var) {
            return None;
        }
        Some(Self { literals })
    }

    pub fn literals(&self) -> &[Literal] {
        &self.literals
    }

    pub fn width(&self) -> usize {
        self.literals.len()
    }

    /// Whether a full assignment satisfies the cube. `assignment[i]` is the
    /// value of variable `i + 1`.
    pub fn satisfied_by(&self, assignment: &[bool]) -> bool {
        self.literals
            .iter()
            .all(|lit| assignment[lit.index()] == lit.positive)
    }
}

/// A DNF formula over `n` variables.
///
/// `tautology` records an empty cube accepted under
/// [`ParseOptions::allow_tautology`]; such a formula is satisfied by every
/// assignment.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DnfFormula {
    n: u32,
    cubes: Vec<Cube>,
    dropped_contradictions: usize,
    tautology: bool,
}

impl DnfFormula {
    /// Builds a normalized formula. Panics if a literal exceeds `n`.
    pub fn new(n: u32, raw_cubes: Vec<Vec<Literal>>) -> Self {
        for lit in raw_cubes.iter().flatten() {
            assert!(lit.var <= n, "literal {lit} out of range for n = {n}");
        }
        let (cubes, dropped_contradictions) = normalize(raw_cubes);
        Self {
            n,
            cubes,
            dropped_contradictions,
            tautology: false,
        }
    }

    /// A formula containing the empty cube.
    pub fn tautology(n: u32) -> Self {
        Self {
            n,
            tautology: true,
            ..Self::default()
        }
    }

    pub fn num_vars(&self) -> u32 {
        self.n
    }

    pub fn num_cubes(&self) -> usize {
        self.cubes.len()
    }

    pub fn cubes(&self) -> &[Cube] {
        &self.cubes
    }

    pub fn dropped_contradictions(&self) -> usize {
        self.dropped_contradictions
    }

    pub fn is_tautology(&self) -> bool {
        self.tautology
    }

    /// Same formula with the cubes in a different order.
    pub fn permuted(&self, order: &[usize]) -> Self {
        assert_eq!(order.len(), self.cubes.len());
        Self {
            cubes: order.iter().map(|&i| self.cubes[i].clone()).collect(),
            ..self.clone()
        }
    }

    pub fn satisfied_by(&self, assignment: &[bool]) -> bool {
        self.tautology || self.cubes.iter().any(|c| c.satisfied_by(assignment))
    }
}

/// Sorts and deduplicates each cube's literals and drops contradictory
/// cubes. Returns the retained cubes and the number dropped.
pub fn normalize(raw_cubes: Vec<Vec<Literal>>) -> (Vec<Cube>, usize) {
    let total = raw_cubes.len();
    let cubes: Vec<Cube> = raw_cubes.into_iter().filter_map(Cube::new).collect();
    let dropped = total - cubes.len();
    (cubes, dropped)
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}: malformed header, expected `p dnf <vars> <cubes>`")]
    MalformedHeader { line: usize },
    #[error("missing `p dnf` header")]
    MissingHeader,
    #[error("line {line}: invalid token `{token}`")]
    InvalidToken { line: usize, token: String },
    #[error("line {line}: variable {var} exceeds declared count {n}")]
    VariableOutOfRange { line: usize, var: u64, n: u32 },
    #[error("line {line}: empty cube (tautology) rejected; pass --allow-tautology to accept it")]
    EmptyCube { line: usize },
    #[error("last cube is not terminated by 0")]
    UnterminatedCube,
    #[error("header declares {declared} cubes but the file contains {found}")]
    CubeCountMismatch { declared: usize, found: usize },
    #[error("input is not valid UTF-8")]
    Encoding,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ParseOptions {
    /// Accept an empty cube instead of rejecting it.
    pub allow_tautology: bool,
}

/// Parses the `p dnf` format with default options.
pub fn parse_dnf(text: &[u8]) -> Result<DnfFormula, ParseError> {
    parse_dnf_with(text, ParseOptions::default())
}

pub fn parse_dnf_with(text: &[u8], options: ParseOptions) -> Result<DnfFormula, ParseError> {
    let text = std::str::from_utf8(text).map_err(|_| ParseError::Encoding)?;
    let mut header: Option<(u32, usize)> = None;
    let mut raw_cubes: Vec<Vec<Literal>> = Vec::new();
    let mut current: Vec<Literal> = Vec::new();
    let mut found = 0usize;
    let mut tautology = false;

    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('c') {
            continue;
        }
        if trimmed.starts_with('p') {
            if header.is_some() {
                return Err(ParseError::MalformedHeader { line: line_no });
            }
            header = Some(parse_header(trimmed, line_no)?);
            continue;
        }
        let Some((n, _)) = header else {
            return Err(ParseError::MissingHeader);
        };
        for token in trimmed.split_whitespace() {
            let value: i64 = token.parse().map_err(|_| ParseError::InvalidToken {
                line: line_no,
                token: token.to_string(),
            })?;
            match Literal::from_dimacs(value) {
                None => {
                    found += 1;
                    if current.is_empty() {
                        if !options.allow_tautology {
                            return Err(ParseError::EmptyCube { line: line_no });
                        }
                        tautology = true;
                    } else {
                        raw_cubes.push(std::mem::take(&mut current));
                    }
                }
                Some(lit) if lit.var <= n => current.push(lit),
                Some(_) => {
                    return Err(ParseError::VariableOutOfRange {
                        line: line_no,
                        var: value.unsigned_abs(),
                        n,
                    })
                }
            }
        }
    }

    let (n, declared) = header.ok_or(ParseError::MissingHeader)?;
    if !current.is_empty() {
        return Err(ParseError::UnterminatedCube);
    }
    if declared != found {
        return Err(ParseError::CubeCountMismatch { declared, found });
    }
    let mut formula = DnfFormula::new(n, raw_cubes);
    formula.tautology = tautology;
    Ok(formula)
}

fn parse_header(line: &str, line_no: usize) -> Result<(u32, usize), ParseError> {
    let err = || ParseError::MalformedHeader { line: line_no };
    let fields: Vec<&str> = line.split_whitespace().collect();
    match fields.as_slice() {
        ["p", "dnf", n, m] => Ok((n.parse().map_err(|_| err())?, m.parse().map_err(|_| err())?)),
        _ => Err(err()),
    }
}

/// Writes `formula` in the `p dnf` format. Dropped contradictory cubes are
/// not reproduced; a tautology is written as a lone `0` line.
pub fn serialize(formula: &DnfFormula) -> String {
    let m = formula.cubes.len() + usize::from(formula.tautology);
    let mut out = format!("p dnf {} {}\n", formula.n, m);
    if formula.tautology {
        out.push_str("0\n");
    }
    for cube in &formula.cubes {
        for lit in &cube.literals {
            let _ = write!(out, "{lit} ");
        }
        out.push_str("0\n");
    }
    out
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GenerateError {
    #[error("cube width {width} must be between 1 and the variable count {n}")]
    InvalidWidth { width: usize, n: u32 },
    #[error("cube count must be at least 1")]
    NoCubes,
}

/// Random formula with `m` cubes of exactly `width` distinct variables and
/// fair-coin polarities. Deterministic in `seed`.
pub fn generate_random(n: u32, m: usize, width: usize, seed: u64) -> Result<DnfFormula, GenerateError> {
    if width == 0 || width > n as usize {
        return Err(GenerateError::InvalidWidth { width, n });
    }
    if m == 0 {
        return Err(GenerateError::NoCubes);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw = (0..m)
        .map(|_| {
            index::sample(&mut rng, n as usize, width)
                .into_iter()
                .map(|i| Literal::new(i as u32 + 1, rng.random::<bool>()))
                .collect()
        })
        .collect();
    Ok(DnfFormula::new(n, raw))
}
