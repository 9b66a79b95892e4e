use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::One;

/// A finitely generated abelian group `Z^free (+) Z/d1 (+) ... ` with `d1 | d2 | ...`, all `di > 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AbelianGroupPresentation {
    pub free_rank: usize,
    pub factors: Vec<BigInt>,
    pub generators: Vec<LabelledGenerator>,
}

/// A named element together with its coordinates under some invariant map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelledGenerator {
    pub label: String,
    pub coords: Vec<BigInt>,
}

impl AbelianGroupPresentation {
    pub fn new(free_rank: usize, factors: Vec<BigInt>) -> Self {
        let mut factors: Vec<BigInt> = factors.into_iter().filter(|d| !d.is_one()).collect();
        factors.sort();
        debug_assert!(factors.windows(2).all(|w| w[1].is_multiple_of(&w[0])));
        AbelianGroupPresentation { free_rank, factors, generators: Vec::new() }
    }

    pub fn trivial() -> Self {
        Self::new(0, Vec::new())
    }

    pub fn is_trivial(&self) -> bool {
        self.free_rank == 0 && self.factors.is_empty()
    }

    pub fn with_generators(mut self, gens: Vec<LabelledGenerator>) -> Self {
        self.generators = gens;
        self
    }

    /// Order of a finite group; `None` when there is a free part.
    pub fn order(&self) -> Option<BigInt> {
        if self.free_rank > 0 {
            return None;
        }
        Some(self.factors.iter().fold(BigInt::one(), |a, b| a * b))
    }

    pub fn factors_u64(&self) -> Vec<u64> {
        use num_traits::ToPrimitive;
        self.factors.iter().map(|d| d.to_u64().unwrap_or(u64::MAX)).collect()
    }
}

impl fmt::Display for AbelianGroupPresentation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = vec!["Z".to_string(); self.free_rank];
        parts.extend(self.factors.iter().map(|d| format!("Z/{d}")));
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" (+) "))
        }
    }
}
