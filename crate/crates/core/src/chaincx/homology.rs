use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::complex::{cone, ChainComplex, ChainMap};
use crate::error::{Error, Result};
use crate::exactalg::snf::snf_full_pid;
use crate::exactalg::{kernel, solve, AbelianGroupPresentation, Matrix, RingSpec};

/// `H_k` with a minimal set of generating cycles.
#[derive(Debug, Clone)]
pub struct HomologyGroup {
    pub degree: i64,
    pub group: AbelianGroupPresentation,
    /// Columns are cycles in `C_k`, torsion generators first (by invariant factor), then free ones.
    pub generators: Matrix,
    /// Order of each generator in the ring: `0` means it generates a free summand.
    pub orders: Vec<BigInt>,
}

impl HomologyGroup {
    pub fn is_zero(&self) -> bool {
        self.orders.is_empty()
    }

    pub fn free_rank(&self) -> usize {
        self.orders.iter().filter(|o| o.is_zero()).count()
    }
}

fn require_pid(ring: RingSpec) -> Result<()> {
    if ring.is_pid() {
        Ok(())
    } else {
        Err(Error::Unsupported(format!("homology over {ring}: only the integers and prime fields")))
    }
}

pub fn homology_at(c: &ChainComplex, k: i64) -> Result<HomologyGroup> {
    let ring = c.ring();
    require_pid(ring)?;
    let kb = kernel(&c.d(k))?;
    let bnd = c.d(k + 1);
    let coords = if kb.cols() == 0 {
        Matrix::zeros(ring, 0, bnd.cols())
    } else {
        solve(&kb, &bnd)?.ok_or_else(|| Error::Internal("boundaries outside cycles".into()))?
    };
    let mut orders = Vec::new();
    let mut cols = Vec::new();
    let mut free = 0;
    let mut factors = Vec::new();
    if coords.rows() > 0 {
        let f = snf_full_pid(&coords);
        let basis = &kb * &f.u;
        let mut tors = Vec::new();
        let mut frees = Vec::new();
        for i in 0..coords.rows() {
            let d = f.diag.get(i).cloned().unwrap_or_else(BigInt::zero);
            if d.is_zero() {
                frees.push(i);
            } else if !d.is_one() {
                tors.push((d, i));
            }
        }
        tors.sort();
        for (d, i) in tors {
            cols.push(i);
            match ring.modulus() {
                None => factors.push(d.clone()),
                Some(_) => unreachable!("field invariant factors are units"),
            }
            orders.push(d);
        }
        for i in frees {
            cols.push(i);
            orders.push(BigInt::zero());
            free += 1;
        }
        let gens = basis.select_cols(&cols);
        let group = match ring.modulus() {
            None => AbelianGroupPresentation::new(free, factors),
            Some(p) => AbelianGroupPresentation::new(0, vec![BigInt::from(p); free]),
        };
        return Ok(HomologyGroup { degree: k, group, generators: gens, orders });
    }
    Ok(HomologyGroup {
        degree: k,
        group: AbelianGroupPresentation::trivial(),
        generators: Matrix::zeros(ring, c.dim(k), 0),
        orders: Vec::new(),
    })
}

/// Homology in every stored degree.
pub fn homology(c: &ChainComplex) -> Result<Vec<HomologyGroup>> {
    c.degrees().map(|k| homology_at(c, k)).collect()
}

/// `(degree, group)` for the nonzero homology groups.
pub fn homology_profile(c: &ChainComplex) -> Result<Vec<(i64, AbelianGroupPresentation)>> {
    Ok(homology(c)?.into_iter().filter(|h| !h.is_zero()).map(|h| (h.degree, h.group)).collect())
}

pub fn is_acyclic(c: &ChainComplex) -> Result<bool> {
    require_pid(c.ring())?;
    for k in c.degrees() {
        if !homology_at(c, k)?.is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A map is a quasi-isomorphism iff its cone is acyclic.
pub fn is_quasi_iso(f: &ChainMap) -> Result<bool> {
    is_acyclic(&cone(f))
}

/// Lowest degree with nonzero homology.
pub fn lowest_homology(c: &ChainComplex) -> Result<Option<HomologyGroup>> {
    for k in c.degrees() {
        let h = homology_at(c, k)?;
        if !h.is_zero() {
            return Ok(Some(h));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chaincx::complex::fiber;

    fn z() -> RingSpec {
        RingSpec::Integers
    }

    #[test]
    fn multiplication_by_two() {
        let c = ChainComplex::two_term(1, &Matrix::from_rows(z(), &[vec![2]]));
        let h = homology(&c).unwrap();
        assert_eq!(h[0].group.to_string(), "Z/2");
        assert!(h[1].is_zero());
    }

    #[test]
    fn cone_of_identity_is_acyclic() {
        let c = ChainComplex::two_term(1, &Matrix::from_rows(z(), &[vec![2, 0], vec![1, 3]]));
        assert!(is_quasi_iso(&ChainMap::identity(&c)).unwrap());
    }

    #[test]
    fn fiber_of_two() {
        let a = ChainComplex::concentrated(z(), 0, 1);
        let f = ChainMap::from_fn(&a, &a, |_| Matrix::from_rows(z(), &[vec![2]])).unwrap();
        let fib = fiber(&f);
        assert_eq!(homology_at(&fib, -1).unwrap().group.to_string(), "Z/2");
        assert!(homology_at(&fib, 0).unwrap().is_zero());
    }

    #[test]
    fn field_homology() {
        let f3 = RingSpec::IntegersMod(3);
        let c = ChainComplex::two_term(1, &Matrix::from_rows(f3, &[vec![1, 2], vec![2, 1]]));
        let h0 = homology_at(&c, 0).unwrap();
        assert_eq!(h0.group.to_string(), "Z/3");
        assert_eq!(homology_at(&c, 1).unwrap().free_rank(), 1);
    }
}
