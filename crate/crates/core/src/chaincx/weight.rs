use super::complex::ChainComplex;
use super::homology::homology_at;
use crate::error::{Error, Result};

fn hereditary(c: &ChainComplex) -> Result<()> {
    if c.ring().is_pid() {
        Ok(())
    } else {
        Err(Error::Unsupported(format!(
            "weight bounds over {} (not hereditary)",
            c.ring()
        )))
    }
}

/// `H_k(C) = 0` for all `k < a`.
pub fn weight_connective(c: &ChainComplex, a: i64) -> Result<bool> {
    hereditary(c)?;
    for k in c.lo()..a.min(c.hi() + 1) {
        if !homology_at(c, k)?.is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `H_k(dual(C, 0)) = 0` for all `k < -b`.
pub fn weight_coconnective(c: &ChainComplex, b: i64) -> Result<bool> {
    hereditary(c)?;
    weight_connective(&c.dual(0), -b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::{Matrix, RingSpec};

    #[test]
    fn examples() {
        let z = RingSpec::Integers;
        let c = ChainComplex::concentrated(z, 0, 1);
        assert!(weight_connective(&c, 0).unwrap());
        assert!(!weight_connective(&c, 1).unwrap());
        let two = ChainComplex::two_term(0, &Matrix::from_rows(z, &[vec![2]]));
        assert!(!weight_connective(&two, 0).unwrap());
        let one = ChainComplex::two_term(0, &Matrix::from_rows(z, &[vec![1]]));
        assert!(weight_connective(&one, 0).unwrap());
        assert!(weight_coconnective(&c, 0).unwrap());
        assert!(!weight_coconnective(&c, -1).unwrap());
        assert!(weight_connective(&c.direct_sum(&one).unwrap(), 0).unwrap());
    }
}
