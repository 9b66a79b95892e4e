use num_traits::Zero;

use super::complex::{ChainComplex, ChainMap, HomotopyEquivalence};
use crate::error::{Error, Result};
use crate::exactalg::snf::{invariant_factors, snf_full_pid};
use crate::exactalg::{solve, Matrix};

/// Output of [`trim`]: the smaller complex and a certified equivalence from the input.
#[derive(Debug, Clone)]
pub struct Trimmed {
    pub complex: ChainComplex,
    pub equivalence: HomotopyEquivalence,
    pub steps: usize,
}

/// Homotopy-equivalent complex without contractible pieces: splits off the bottom end while
/// its differential is split surjective and cancels unit blocks of every differential.
pub fn trim(c: &ChainComplex) -> Result<Trimmed> {
    if !c.ring().is_pid() {
        return Err(Error::Unsupported(format!("trim over {}", c.ring())));
    }
    let mut eq = HomotopyEquivalence::identity(c);
    let mut cur = c.clone();
    let mut steps = 0;
    loop {
        if let Some((i, step)) = bottom_split(&cur)? {
            // the section now sits in d_{i+2}; cancel it right away
            let cancel = cancel_units(step.target(), i + 2)?;
            eq = eq.then(&step)?.then(&cancel)?;
            cur = cancel.target().clone();
            steps += 1;
            continue;
        }
        let unit_degree = cur.degrees().find(|&k| {
            let d = cur.d(k);
            d.rows() > 0 && d.cols() > 0 && invariant_factors(&d).iter().any(|x| cur.ring().is_unit(x))
        });
        match unit_degree {
            Some(k) => {
                let step = cancel_units(&cur, k)?;
                eq = eq.then(&step)?;
                cur = step.target().clone();
                steps += 1;
            }
            None => break,
        }
    }
    let tight = cur.tighten();
    if tight != cur {
        let f = ChainMap::from_fn(&cur, &tight, |k| Matrix::identity(cur.ring(), cur.dim(k)))?;
        let g = ChainMap::from_fn(&tight, &cur, |k| Matrix::identity(cur.ring(), cur.dim(k)))?;
        eq = eq.then(&HomotopyEquivalence::from_isomorphism(f, g)?)?;
        cur = tight;
    }
    Ok(Trimmed { complex: cur, equivalence: eq, steps })
}

/// With bottom degree `i` and `s` a section of `d_{i+1}`, replace `Y` by
/// `... -> Y_{i+3} -> Y_{i+2} (+) Y_i -> Y_{i+1} -> 0`.
fn bottom_split(y: &ChainComplex) -> Result<Option<(i64, HomotopyEquivalence)>> {
    let Some((i, _)) = y.support() else { return Ok(None) };
    let ring = y.ring();
    let (ni, ni1, ni2) = (y.dim(i), y.dim(i + 1), y.dim(i + 2));
    if ni1 == 0 {
        return Ok(None);
    }
    let d1 = y.d(i + 1);
    let Some(s) = solve(&d1, &Matrix::identity(ring, ni))? else { return Ok(None) };
    let hi = y.hi().max(i + 2);
    let dims: Vec<usize> = (i + 1..=hi)
        .map(|k| if k == i + 2 { ni2 + ni } else { y.dim(k) })
        .collect();
    let z = ChainComplex::from_fn(ring, i + 1, dims, |k| {
        if k == i + 3 {
            Matrix::vstack(&[&y.d(k), &Matrix::zeros(ring, ni, y.dim(k))]).unwrap()
        } else if k == i + 2 {
            Matrix::hstack(&[&y.d(k), &s]).unwrap()
        } else {
            y.d(k)
        }
    })?;
    let f = ChainMap::from_fn(y, &z, |k| {
        if k == i + 2 {
            Matrix::vstack(&[&Matrix::identity(ring, ni2), &Matrix::zeros(ring, ni, ni2)]).unwrap()
        } else if k > i {
            Matrix::identity(ring, y.dim(k))
        } else {
            Matrix::zeros(ring, z.dim(k), y.dim(k))
        }
    })?;
    let g = ChainMap::from_fn(&z, y, |k| {
        if k == i + 2 {
            Matrix::hstack(&[&Matrix::identity(ring, ni2), &Matrix::zeros(ring, ni2, ni)]).unwrap()
        } else if k == i + 1 {
            &Matrix::identity(ring, ni1) - &(&s * &d1)
        } else if k > i {
            Matrix::identity(ring, y.dim(k))
        } else {
            Matrix::zeros(ring, y.dim(k), z.dim(k))
        }
    })?;
    let eq = HomotopyEquivalence::new(
        f,
        g,
        |k| if k == i { s.neg_ref() } else { Matrix::zeros(ring, y.dim(k + 1), y.dim(k)) },
        |k| {
            if k == i + 1 {
                Matrix::vstack(&[&Matrix::zeros(ring, ni2, ni1), &d1.neg_ref()]).unwrap()
            } else {
                Matrix::zeros(ring, z.dim(k + 1), z.dim(k))
            }
        },
    )
    .map_err(|e| Error::Internal(format!("bottom splitting: {e}")))?;
    Ok(Some((i, eq)))
}

/// Change bases so that `d_k` is in Smith form, then split off the unit block `R^r -id-> R^r`.
fn cancel_units(c: &ChainComplex, k: i64) -> Result<HomotopyEquivalence> {
    let ring = c.ring();
    let sf = snf_full_pid(&c.d(k));
    let r = sf.diag.iter().take_while(|x| !x.is_zero() && ring.is_unit(x)).count();
    // the unit factors lead and are normalized to 1
    debug_assert!(sf.diag[..r].iter().all(|x| *x == num_bigint::BigInt::from(1)));
    let basis = |j: i64, inv: bool| -> Matrix {
        if j == k {
            if inv { sf.v_inv.clone() } else { sf.v.clone() }
        } else if j == k - 1 {
            if inv { sf.u.clone() } else { sf.u_inv.clone() }
        } else {
            Matrix::identity(ring, c.dim(j))
        }
    };
    let dims: Vec<usize> = c.degrees().map(|j| c.dim(j)).collect();
    let c2 = ChainComplex::from_fn(ring, c.lo(), dims, |j| &(&basis(j - 1, false) * &c.d(j)) * &basis(j, true))?;
    let phi = ChainMap::from_fn(c, &c2, |j| basis(j, false))?;
    let phi_inv = ChainMap::from_fn(&c2, c, |j| basis(j, true))?;
    let iso = HomotopyEquivalence::from_isomorphism(phi, phi_inv)?;

    let keep = |j: i64| -> Vec<usize> {
        let skip = if j == k || j == k - 1 { r } else { 0 };
        (skip..c2.dim(j)).collect()
    };
    let dims: Vec<usize> = c2.degrees().map(|j| keep(j).len()).collect();
    let small = ChainComplex::from_fn(ring, c2.lo(), dims, |j| c2.d(j).select_rows(&keep(j - 1)).select_cols(&keep(j)))?;
    let proj = ChainMap::from_fn(&c2, &small, |j| Matrix::identity(ring, c2.dim(j)).select_rows(&keep(j)))?;
    let incl = ChainMap::from_fn(&small, &c2, |j| Matrix::identity(ring, c2.dim(j)).select_cols(&keep(j)))?;
    let split = HomotopyEquivalence::new(
        proj,
        incl,
        |j| {
            let mut h = Matrix::zeros(ring, c2.dim(j + 1), c2.dim(j));
            if j == k - 1 {
                for t in 0..r {
                    h.set(t, t, ring.from_i64(-1));
                }
            }
            h
        },
        |j| Matrix::zeros(ring, small.dim(j + 1), small.dim(j)),
    )
    .map_err(|e| Error::Internal(format!("unit cancellation: {e}")))?;
    iso.then(&split)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chaincx::homology::homology_profile;
    use crate::exactalg::RingSpec;

    #[test]
    fn splits_identity_block() {
        let z = RingSpec::Integers;
        let c = ChainComplex::two_term(1, &Matrix::from_rows(z, &[vec![1, 0], vec![0, 2]]));
        let t = trim(&c).unwrap();
        assert_eq!(t.complex, ChainComplex::two_term(1, &Matrix::from_rows(z, &[vec![2]])));
        t.equivalence.verify().unwrap();
    }

    #[test]
    fn already_trimmed() {
        let z = RingSpec::Integers;
        let c = ChainComplex::two_term(1, &Matrix::from_rows(z, &[vec![3]]));
        let t = trim(&c).unwrap();
        assert_eq!(t.complex, c);
        assert_eq!(t.steps, 0);
        assert!(t.equivalence.f.at(0).is_identity());
    }

    #[test]
    fn removes_acyclic_summand() {
        let z = RingSpec::Integers;
        let c = ChainComplex::concentrated(z, 0, 2);
        let acyc = ChainComplex::two_term(0, &Matrix::identity(z, 1));
        let big = c.direct_sum(&acyc).unwrap();
        let t = trim(&big).unwrap();
        assert_eq!(t.complex.dims(), &[2]);
        assert_eq!(homology_profile(&t.complex).unwrap(), homology_profile(&big).unwrap());
    }
}
