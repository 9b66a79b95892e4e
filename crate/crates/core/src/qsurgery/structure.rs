use std::collections::BTreeMap;

use num_bigint::BigInt;

use crate::chaincx::{homology_at, is_quasi_iso, sign, ChainComplex, ChainMap, HomologyGroup};
use crate::error::{Error, Result};
use crate::exactalg::{AbelianGroupPresentation, Matrix, RingSpec};
use crate::formcore::{Flavor, FormParameter, UnimodularForm};

/// Family of maps `(x_s)_r : X^{m-r-s} -> X_r` over a complex `X`, stored sparsely.
/// Missing entries are zero matrices of the right shape.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Family {
    pub(crate) entries: BTreeMap<(usize, i64), Matrix>,
}

impl Family {
    pub fn new() -> Self {
        Family::default()
    }

    pub fn get(&self, x: &ChainComplex, m: i64, s: usize, r: i64) -> Matrix {
        match self.entries.get(&(s, r)) {
            Some(a) => a.clone(),
            None => Matrix::zeros(x.ring(), x.dim(r), x.dim(m - r - s as i64)),
        }
    }

    /// Drops zero and empty entries.
    pub fn insert(&mut self, s: usize, r: i64, a: Matrix) {
        if a.is_zero() {
            self.entries.remove(&(s, r));
        } else {
            self.entries.insert((s, r), a);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn layers(&self) -> usize {
        self.entries.keys().map(|(s, _)| s + 1).max().unwrap_or(0)
    }

    /// `T x_s` in component `r`: `(-1)^{r(m-r-s)} (x_s)_{m-r-s}^T`.
    pub fn t_at(&self, x: &ChainComplex, m: i64, s: usize, r: i64) -> Matrix {
        let q = m - r - s as i64;
        self.get(x, m, s, q).transpose().scale_i64(sign(r * q))
    }
}

/// Largest `s` for which a component `X^{m-r-s} -> X_r` can be nonzero.
pub(crate) fn layer_bound(x: &ChainComplex, m: i64) -> usize {
    match x.support() {
        None => 0,
        Some((lo, _)) => (m - 2 * lo).max(0) as usize,
    }
}

/// Residual of the quadratic relation at `(s, r)`, a map `X^{m-r-s-1} -> X_r`:
/// `d x_s + (-1)^r x_s d^* + (-1)^{m-s-1} (x_{s+1} + (-1)^{s+1} T x_{s+1})`.
pub(crate) fn relation_residual(x: &ChainComplex, m: i64, psi: &Family, s: usize, r: i64) -> Matrix {
    let si = s as i64;
    let src = m - r - si - 1;
    let a = &x.d(r + 1) * &psi.get(x, m, s, r + 1);
    let b = (&psi.get(x, m, s, r) * &x.d(src + 1).transpose()).scale_i64(sign(r));
    let next = &psi.get(x, m, s + 1, r) + &psi.t_at(x, m, s + 1, r).scale_i64(sign(si + 1));
    let c = next.scale_i64(sign(m - si - 1));
    &(&a + &b) + &c
}

/// Per-degree evidence for the Poincaré check.
#[derive(Debug, Clone)]
pub struct DegreeWitness {
    pub degree: i64,
    pub source: AbelianGroupPresentation,
    pub target: AbelianGroupPresentation,
    /// Homology of the cone of `(1+T)psi_0` in this degree and the next; both trivial iff iso here.
    pub cone_trivial: bool,
}

#[derive(Debug, Clone)]
pub struct PoincareWitness {
    pub poincare: bool,
    pub degrees: Vec<DegreeWitness>,
}

/// Complex with an `n`-dimensional quadratic structure `psi_s : C^{n-r-s} -> C_r`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadraticComplex {
    c: ChainComplex,
    n: i64,
    psi: Family,
    poincare: bool,
}

impl QuadraticComplex {
    /// Validates the structure relations and records whether the structure is Poincaré.
    pub fn new(c: ChainComplex, n: i64, psi: Family) -> Result<Self> {
        if !matches!(c.ring(), RingSpec::Integers) && !c.ring().is_field() {
            return Err(Error::Unsupported(format!("quadratic complexes over {}", c.ring())));
        }
        for (&(s, r), a) in &psi.entries {
            let want = (c.dim(r), c.dim(n - r - s as i64));
            if (a.rows(), a.cols()) != want || a.ring() != c.ring() {
                return Err(Error::Shape(format!("psi_{s} in degree {r}")));
            }
        }
        let mut x = QuadraticComplex { c, n, psi, poincare: false };
        x.check_relations()?;
        x.poincare = x.check_poincare()?.poincare;
        Ok(x)
    }

    pub fn complex(&self) -> &ChainComplex {
        &self.c
    }

    pub fn ring(&self) -> RingSpec {
        self.c.ring()
    }

    pub fn dimension(&self) -> i64 {
        self.n
    }

    pub fn family(&self) -> &Family {
        &self.psi
    }

    pub fn is_poincare(&self) -> bool {
        self.poincare
    }

    pub fn psi(&self, s: usize, r: i64) -> Matrix {
        self.psi.get(&self.c, self.n, s, r)
    }

    /// Number of stored layers: `(hi - lo) + 1`, widened if the structure needs more.
    pub fn s_max(&self) -> usize {
        let base = match self.c.support() {
            None => 0,
            Some((lo, hi)) => (hi - lo + 1) as usize,
        };
        base.max(layer_bound(&self.c, self.n)).max(self.psi.layers().saturating_sub(1))
    }

    pub fn check_relations(&self) -> Result<()> {
        let Some((lo, hi)) = self.c.support() else { return Ok(()) };
        for s in 0..=self.s_max() {
            for r in lo..=hi {
                if !relation_residual(&self.c, self.n, &self.psi, s, r).is_zero() {
                    return Err(Error::Invalid(format!("quadratic relation fails at s={s}, r={r}")));
                }
            }
        }
        Ok(())
    }

    pub fn dual(&self) -> ChainComplex {
        self.c.dual(self.n)
    }

    /// `(1+T)psi_0` in degree `r`, a map `C^{n-r} -> C_r`.
    pub fn symmetrization_at(&self, r: i64) -> Matrix {
        &self.psi(0, r) + &self.psi.t_at(&self.c, self.n, 0, r)
    }

    /// `(1+T)psi_0` as a chain map `C^{n-*} -> C`.
    pub fn symmetrization(&self) -> Result<ChainMap> {
        let dual = self.dual();
        ChainMap::from_fn(&dual, &self.c, |r| self.symmetrization_at(r))
            .map_err(|e| Error::Internal(format!("symmetrization is not a chain map: {e}")))
    }

    pub fn check_poincare(&self) -> Result<PoincareWitness> {
        let phi = self.symmetrization()?;
        let dual = self.dual();
        let cone = crate::chaincx::cone(&phi);
        let mut degrees = Vec::new();
        let mut poincare = true;
        if let Some((lo, hi)) = phi_span(&self.c, &dual) {
            for k in lo..=hi {
                let cone_trivial =
                    homology_at(&cone, k)?.is_zero() && homology_at(&cone, k + 1)?.is_zero();
                poincare &= cone_trivial;
                degrees.push(DegreeWitness {
                    degree: k,
                    source: homology_at(&dual, k)?.group,
                    target: homology_at(&self.c, k)?.group,
                    cone_trivial,
                });
            }
        }
        debug_assert_eq!(poincare, is_quasi_iso(&phi)?);
        Ok(PoincareWitness { poincare, degrees })
    }

    pub fn homology_at(&self, k: i64) -> Result<HomologyGroup> {
        homology_at(&self.c, k)
    }

    /// Push forward along a chain map `f : C -> E`: `psi_s -> f psi_s f^*`.
    pub fn push_forward(&self, f: &ChainMap) -> Result<QuadraticComplex> {
        if f.source != self.c {
            return Err(Error::Invalid("push forward along a map from another complex".into()));
        }
        let e = f.target.clone();
        let mut psi = Family::new();
        for (&(s, r), a) in &self.psi.entries {
            let q = self.n - r - s as i64;
            psi.insert(s, r, &(&f.at(r) * a) * &f.at(q).transpose());
        }
        QuadraticComplex::new(e, self.n, psi)
    }

    pub fn direct_sum(&self, other: &QuadraticComplex) -> Result<QuadraticComplex> {
        if self.n != other.n {
            return Err(Error::Invalid("direct sum of structures of different dimension".into()));
        }
        let c = self.c.direct_sum(&other.c)?;
        let mut psi = Family::new();
        let keys: std::collections::BTreeSet<_> =
            self.psi.entries.keys().chain(other.psi.entries.keys()).copied().collect();
        for (s, r) in keys {
            psi.insert(s, r, Matrix::block_diag(&[&self.psi(s, r), &other.psi(s, r)])?);
        }
        QuadraticComplex::new(c, self.n, psi)
    }

    pub fn negate(&self) -> QuadraticComplex {
        let mut psi = Family::new();
        for (&(s, r), a) in &self.psi.entries {
            psi.insert(s, r, a.neg_ref());
        }
        QuadraticComplex { c: self.c.clone(), n: self.n, psi, poincare: self.poincare }
    }

    /// Adds `cone(id_P)` for `P = R^rank` placed in degrees `k, k+1`, with zero structure there.
    pub fn fatten(&self, k: i64, rank: usize) -> Result<QuadraticComplex> {
        let ring = self.ring();
        let id = Matrix::identity(ring, rank);
        let acyclic = ChainComplex::new(ring, k, vec![rank, rank], vec![Matrix::zeros(ring, 0, rank), id])?;
        let zero = QuadraticComplex { c: acyclic, n: self.n, psi: Family::new(), poincare: true };
        self.direct_sum(&zero)
    }

    /// A quadratic form placed in degree 0: `psi_0` is upper triangular with the q-values on the diagonal.
    pub fn from_form(form: &UnimodularForm) -> Result<QuadraticComplex> {
        let p = form.param();
        if p.flavor != Flavor::Quadratic || p.epsilon != 1 {
            return Err(Error::Unsupported(format!("chain-level structure for {}", p.label())));
        }
        let ring = form.ring();
        let k = form.rank();
        let g = form.gram();
        let q = form.qvals();
        let psi0 = Matrix::from_fn(ring, k, k, |i, j| {
            if i == j {
                q[i].clone()
            } else if i < j {
                g.get(i, j).clone()
            } else {
                BigInt::from(0)
            }
        });
        let c = ChainComplex::concentrated(ring, 0, k);
        let mut psi = Family::new();
        psi.insert(0, 0, psi0);
        QuadraticComplex::new(c, 0, psi)
    }

    /// Reads off the form of a structure concentrated in degree 0 with `n = 0`.
    pub fn to_form(&self) -> Result<UnimodularForm> {
        if self.n != 0 || self.c.support().is_some_and(|(lo, hi)| lo != 0 || hi != 0) {
            return Err(Error::Invalid("structure is not concentrated in degree 0".into()));
        }
        let ring = self.ring();
        let k = self.c.dim(0);
        let psi0 = self.psi(0, 0);
        let gram = &psi0 + &psi0.transpose();
        let q: Vec<BigInt> = (0..k).map(|i| psi0.get(i, i).clone()).collect();
        UnimodularForm::new(FormParameter::quadratic(ring), gram, q)
    }
}

fn phi_span(a: &ChainComplex, b: &ChainComplex) -> Option<(i64, i64)> {
    match (a.support(), b.support()) {
        (None, None) => None,
        (Some(x), None) | (None, Some(x)) => Some(x),
        (Some((l1, h1)), Some((l2, h2))) => Some((l1.min(l2), h1.max(h2))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formcore::{e8, hyperbolic};

    fn zq() -> FormParameter {
        FormParameter::quadratic(RingSpec::Integers)
    }

    #[test]
    fn hyperbolic_is_poincare() {
        let x = QuadraticComplex::from_form(&hyperbolic(&zq(), 1)).unwrap();
        assert!(x.is_poincare());
        assert_eq!(x.to_form().unwrap(), hyperbolic(&zq(), 1));
    }

    #[test]
    fn two_is_not_poincare() {
        let c = ChainComplex::concentrated(RingSpec::Integers, 0, 1);
        let mut psi = Family::new();
        psi.insert(0, 0, Matrix::from_rows(RingSpec::Integers, &[vec![1]]));
        let x = QuadraticComplex::new(c, 0, psi).unwrap();
        assert!(!x.is_poincare());
        let w = x.check_poincare().unwrap();
        assert!(w.degrees.iter().any(|d| !d.cone_trivial));
    }

    #[test]
    fn fattened_form_stays_poincare() {
        let x = QuadraticComplex::from_form(&e8(&zq()).unwrap()).unwrap();
        let y = x.fatten(-1, 2).unwrap().fatten(1, 1).unwrap();
        assert!(y.is_poincare());
    }

    #[test]
    fn broken_relation_is_rejected() {
        // psi_0 on a two-term complex that is not closed
        let z = RingSpec::Integers;
        let c = ChainComplex::two_term(1, &Matrix::from_rows(z, &[vec![1]]));
        let mut psi = Family::new();
        psi.insert(0, 1, Matrix::from_rows(z, &[vec![1]]));
        assert!(QuadraticComplex::new(c, 1, psi).is_err());
    }
}
