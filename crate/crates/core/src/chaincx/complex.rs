use crate::error::{Error, Result};
use crate::exactalg::{Matrix, RingSpec};

/// Bounded chain complex of free modules; `d_k : C_k -> C_{k-1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainComplex {
    ring: RingSpec,
    lo: i64,
    dims: Vec<usize>,
    // diffs[j] is d_{lo+j}
    diffs: Vec<Matrix>,
}

pub fn sign(e: i64) -> i64 {
    if e.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

impl ChainComplex {
    /// Builds and validates `d∘d = 0`. `diff(k)` is asked for `k` in `lo+1..=hi`.
    pub fn from_fn(
        ring: RingSpec,
        lo: i64,
        dims: Vec<usize>,
        mut diff: impl FnMut(i64) -> Matrix,
    ) -> Result<Self> {
        let mut diffs = Vec::with_capacity(dims.len());
        for (j, &dim) in dims.iter().enumerate() {
            let k = lo + j as i64;
            if j == 0 {
                diffs.push(Matrix::zeros(ring, 0, dim));
            } else {
                diffs.push(diff(k));
            }
        }
        Self::new(ring, lo, dims, diffs)
    }

    /// `diffs[j]` is `d_{lo+j}`; the first entry must have zero rows.
    pub fn new(ring: RingSpec, lo: i64, dims: Vec<usize>, diffs: Vec<Matrix>) -> Result<Self> {
        if diffs.len() != dims.len() {
            return Err(Error::Shape("one differential per degree".into()));
        }
        for (j, d) in diffs.iter().enumerate() {
            let below = if j == 0 { 0 } else { dims[j - 1] };
            if d.ring() != ring {
                return Err(Error::RingMismatch(format!("differential in degree {}", lo + j as i64)));
            }
            if d.rows() != below || d.cols() != dims[j] {
                return Err(Error::Shape(format!(
                    "d_{} is {}x{}, expected {}x{}",
                    lo + j as i64,
                    d.rows(),
                    d.cols(),
                    below,
                    dims[j]
                )));
            }
        }
        let c = ChainComplex { ring, lo, dims, diffs };
        for k in c.lo + 1..=c.hi() {
            if !(&c.d(k - 1) * &c.d(k)).is_zero() {
                return Err(Error::Invalid(format!("d_{} d_{} != 0", k - 1, k)));
            }
        }
        Ok(c)
    }

    pub fn zero(ring: RingSpec) -> Self {
        ChainComplex { ring, lo: 0, dims: Vec::new(), diffs: Vec::new() }
    }

    /// `R^dim` in degree `k`.
    pub fn concentrated(ring: RingSpec, k: i64, dim: usize) -> Self {
        ChainComplex { ring, lo: k, dims: vec![dim], diffs: vec![Matrix::zeros(ring, 0, dim)] }
    }

    /// Two-term complex `C_k --m--> C_{k-1}`.
    pub fn two_term(k: i64, m: &Matrix) -> Self {
        let ring = m.ring();
        ChainComplex {
            ring,
            lo: k - 1,
            dims: vec![m.rows(), m.cols()],
            diffs: vec![Matrix::zeros(ring, 0, m.rows()), m.clone()],
        }
    }

    pub fn ring(&self) -> RingSpec {
        self.ring
    }
    pub fn lo(&self) -> i64 {
        self.lo
    }
    pub fn hi(&self) -> i64 {
        self.lo + self.dims.len() as i64 - 1
    }
    pub fn degrees(&self) -> std::ops::RangeInclusive<i64> {
        self.lo..=self.hi()
    }
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self, k: i64) -> usize {
        if k < self.lo || k > self.hi() {
            0
        } else {
            self.dims[(k - self.lo) as usize]
        }
    }

    /// `d_k`, a zero matrix of the right shape outside the stored range.
    pub fn d(&self, k: i64) -> Matrix {
        if k <= self.lo || k > self.hi() {
            Matrix::zeros(self.ring, self.dim(k - 1), self.dim(k))
        } else {
            self.diffs[(k - self.lo) as usize].clone()
        }
    }

    pub fn total_rank(&self) -> usize {
        self.dims.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.total_rank() == 0
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.degrees().map(|k| sign(k) * self.dim(k) as i64).sum()
    }

    /// Smallest and largest degree with a nonzero module.
    pub fn support(&self) -> Option<(i64, i64)> {
        let nz: Vec<i64> = self.degrees().filter(|&k| self.dim(k) > 0).collect();
        Some((*nz.first()?, *nz.last()?))
    }

    /// Same complex over a wider degree range (padding with zero modules).
    pub fn widen(&self, lo: i64, hi: i64) -> ChainComplex {
        let lo = lo.min(self.lo);
        let hi = hi.max(self.hi());
        let dims: Vec<usize> = (lo..=hi).map(|k| self.dim(k)).collect();
        ChainComplex::from_fn(self.ring, lo, dims, |k| self.d(k)).expect("widening keeps d^2 = 0")
    }

    /// Drops zero modules at both ends.
    pub fn tighten(&self) -> ChainComplex {
        match self.support() {
            None => ChainComplex::zero(self.ring),
            Some((a, b)) => {
                let dims: Vec<usize> = (a..=b).map(|k| self.dim(k)).collect();
                ChainComplex::from_fn(self.ring, a, dims, |k| self.d(k)).expect("tighten keeps d^2 = 0")
            }
        }
    }

    pub fn direct_sum(&self, other: &ChainComplex) -> Result<ChainComplex> {
        if self.ring != other.ring {
            return Err(Error::RingMismatch("direct sum".into()));
        }
        let (lo, hi) = span(self, other);
        let dims: Vec<usize> = (lo..=hi).map(|k| self.dim(k) + other.dim(k)).collect();
        ChainComplex::from_fn(self.ring, lo, dims, |k| Matrix::block_diag(&[&self.d(k), &other.d(k)]).unwrap())
    }

    /// `shift(C, s)_k = C_{k-s}` with differential multiplied by `(-1)^s`.
    pub fn shift(&self, s: i64) -> ChainComplex {
        let dims = self.dims.clone();
        ChainComplex::from_fn(self.ring, self.lo + s, dims, |k| self.d(k - s).scale_i64(sign(s)))
            .expect("shift keeps d^2 = 0")
    }

    /// `C^{n-*}`: degree `r` is `Hom(C_{n-r}, R)`, `d_r = (-1)^r (d_{n-r+1})^T`.
    pub fn dual(&self, n: i64) -> ChainComplex {
        if self.dims.is_empty() {
            return ChainComplex::zero(self.ring);
        }
        let lo = n - self.hi();
        let hi = n - self.lo;
        let dims: Vec<usize> = (lo..=hi).map(|r| self.dim(n - r)).collect();
        ChainComplex::from_fn(self.ring, lo, dims, |r| self.d(n - r + 1).transpose().scale_i64(sign(r)))
            .expect("dual keeps d^2 = 0")
    }

    /// `(-1)^{(n+1) r}` identifies `dual(dual(C, n), n)` with `C`.
    pub fn double_dual_iso(&self, n: i64) -> ChainMap {
        let dd = self.dual(n).dual(n);
        ChainMap::from_fn(self, &dd, |r| Matrix::identity(self.ring, self.dim(r)).scale_i64(sign((n + 1) * r)))
            .expect("sign isomorphism is a chain map")
    }
}

pub(crate) fn span(a: &ChainComplex, b: &ChainComplex) -> (i64, i64) {
    match (a.dims.is_empty(), b.dims.is_empty()) {
        (true, true) => (0, -1),
        (true, false) => (b.lo, b.hi()),
        (false, true) => (a.lo, a.hi()),
        (false, false) => (a.lo.min(b.lo), a.hi().max(b.hi())),
    }
}

/// Degree-preserving map of complexes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainMap {
    pub source: ChainComplex,
    pub target: ChainComplex,
    lo: i64,
    maps: Vec<Matrix>,
}

impl ChainMap {
    pub fn from_fn(
        source: &ChainComplex,
        target: &ChainComplex,
        f: impl FnMut(i64) -> Matrix,
    ) -> Result<ChainMap> {
        let m = Self::from_fn_unchecked(source, target, f)?;
        m.verify()?;
        Ok(m)
    }

    /// Builds without the chain-map check (shapes are still checked).
    pub fn from_fn_unchecked(
        source: &ChainComplex,
        target: &ChainComplex,
        mut f: impl FnMut(i64) -> Matrix,
    ) -> Result<ChainMap> {
        let (lo, hi) = span(source, target);
        let mut maps = Vec::new();
        for k in lo..=hi {
            let m = f(k);
            if m.rows() != target.dim(k) || m.cols() != source.dim(k) || m.ring() != source.ring() {
                return Err(Error::Shape(format!(
                    "map in degree {k} is {}x{}, expected {}x{}",
                    m.rows(),
                    m.cols(),
                    target.dim(k),
                    source.dim(k)
                )));
            }
            maps.push(m);
        }
        Ok(ChainMap { source: source.clone(), target: target.clone(), lo, maps })
    }

    pub fn identity(c: &ChainComplex) -> ChainMap {
        Self::from_fn_unchecked(c, c, |k| Matrix::identity(c.ring(), c.dim(k))).unwrap()
    }

    pub fn zero(source: &ChainComplex, target: &ChainComplex) -> ChainMap {
        Self::from_fn_unchecked(source, target, |k| Matrix::zeros(source.ring(), target.dim(k), source.dim(k))).unwrap()
    }

    pub fn at(&self, k: i64) -> Matrix {
        let idx = k - self.lo;
        if idx < 0 || idx >= self.maps.len() as i64 {
            Matrix::zeros(self.source.ring(), self.target.dim(k), self.source.dim(k))
        } else {
            self.maps[idx as usize].clone()
        }
    }

    pub fn degrees(&self) -> std::ops::RangeInclusive<i64> {
        let (lo, hi) = span(&self.source, &self.target);
        lo..=hi
    }

    /// First degree where `d f != f d`, if any.
    pub fn defect(&self) -> Option<i64> {
        let (lo, hi) = span(&self.source, &self.target);
        (lo..=hi + 1).find(|&k| &self.target.d(k) * &self.at(k) != &self.at(k - 1) * &self.source.d(k))
    }

    pub fn verify(&self) -> Result<()> {
        match self.defect() {
            None => Ok(()),
            Some(k) => Err(Error::Invalid(format!("not a chain map in degree {k}"))),
        }
    }

    pub fn compose(&self, first: &ChainMap) -> Result<ChainMap> {
        if first.target != self.source {
            return Err(Error::Shape("composition of incompatible chain maps".into()));
        }
        Self::from_fn_unchecked(&first.source, &self.target, |k| &self.at(k) * &first.at(k))
    }

    pub fn add(&self, other: &ChainMap) -> Result<ChainMap> {
        if self.source != other.source || self.target != other.target {
            return Err(Error::Shape("sum of chain maps with different ends".into()));
        }
        Self::from_fn_unchecked(&self.source, &self.target, |k| &self.at(k) + &other.at(k))
    }

    pub fn scale(&self, c: i64) -> ChainMap {
        Self::from_fn_unchecked(&self.source, &self.target, |k| self.at(k).scale_i64(c)).unwrap()
    }

    pub fn sub(&self, other: &ChainMap) -> Result<ChainMap> {
        self.add(&other.scale(-1))
    }

    /// Induced map `dual(target, n) -> dual(source, n)`, degree `r` given by `f_{n-r}^T`.
    pub fn dual(&self, n: i64) -> ChainMap {
        let s = self.target.dual(n);
        let t = self.source.dual(n);
        Self::from_fn_unchecked(&s, &t, |r| self.at(n - r).transpose()).unwrap()
    }

    pub fn shift(&self, s: i64) -> ChainMap {
        let src = self.source.shift(s);
        let tgt = self.target.shift(s);
        Self::from_fn_unchecked(&src, &tgt, |k| self.at(k - s)).unwrap()
    }

    pub fn direct_sum(&self, other: &ChainMap) -> Result<ChainMap> {
        let s = self.source.direct_sum(&other.source)?;
        let t = self.target.direct_sum(&other.target)?;
        Self::from_fn_unchecked(&s, &t, |k| Matrix::block_diag(&[&self.at(k), &other.at(k)]).unwrap())
    }

    /// Same maps, with source and target replaced by equal-dimensional complexes.
    pub fn retarget(&self, source: &ChainComplex, target: &ChainComplex) -> Result<ChainMap> {
        Self::from_fn_unchecked(source, target, |k| self.at(k))
    }
}

/// `h_k : C_k -> D_{k+1}` exhibiting `f - g = d h + h d`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Homotopy {
    pub f: ChainMap,
    pub g: ChainMap,
    lo: i64,
    h: Vec<Matrix>,
}

impl Homotopy {
    pub fn from_fn(f: &ChainMap, g: &ChainMap, mut h: impl FnMut(i64) -> Matrix) -> Result<Homotopy> {
        let (lo, hi) = span(&f.source, &f.target);
        let mut hs = Vec::new();
        for k in lo - 1..=hi {
            let m = h(k);
            if m.rows() != f.target.dim(k + 1) || m.cols() != f.source.dim(k) {
                return Err(Error::Shape(format!("homotopy component in degree {k}")));
            }
            hs.push(m);
        }
        let out = Homotopy { f: f.clone(), g: g.clone(), lo: lo - 1, h: hs };
        out.verify()?;
        Ok(out)
    }

    pub fn zero(f: &ChainMap) -> Homotopy {
        let s = &f.source;
        let t = &f.target;
        Self::from_fn(f, f, |k| Matrix::zeros(s.ring(), t.dim(k + 1), s.dim(k))).unwrap()
    }

    pub fn at(&self, k: i64) -> Matrix {
        let idx = k - self.lo;
        if idx < 0 || idx >= self.h.len() as i64 {
            Matrix::zeros(self.f.source.ring(), self.f.target.dim(k + 1), self.f.source.dim(k))
        } else {
            self.h[idx as usize].clone()
        }
    }

    pub fn verify(&self) -> Result<()> {
        let (lo, hi) = span(&self.f.source, &self.f.target);
        for k in lo..=hi {
            let lhs = &self.f.at(k) - &self.g.at(k);
            let rhs = &(&self.f.target.d(k + 1) * &self.at(k)) + &(&self.at(k - 1) * &self.f.source.d(k));
            if lhs != rhs {
                return Err(Error::Invalid(format!("homotopy identity fails in degree {k}")));
            }
        }
        Ok(())
    }
}

/// Chain homotopy equivalence with explicit data:
/// `g f - id = d h_src + h_src d` and `f g - id = d h_tgt + h_tgt d`.
#[derive(Debug, Clone)]
pub struct HomotopyEquivalence {
    pub f: ChainMap,
    pub g: ChainMap,
    pub h_src: Homotopy,
    pub h_tgt: Homotopy,
}

impl HomotopyEquivalence {
    pub fn new(
        f: ChainMap,
        g: ChainMap,
        h_src: impl FnMut(i64) -> Matrix,
        h_tgt: impl FnMut(i64) -> Matrix,
    ) -> Result<Self> {
        f.verify()?;
        g.verify()?;
        let gf = g.compose(&f)?;
        let fg = f.compose(&g)?;
        let hs = Homotopy::from_fn(&gf, &ChainMap::identity(&f.source), h_src)?;
        let ht = Homotopy::from_fn(&fg, &ChainMap::identity(&f.target), h_tgt)?;
        Ok(HomotopyEquivalence { f, g, h_src: hs, h_tgt: ht })
    }

    pub fn identity(c: &ChainComplex) -> Self {
        let id = ChainMap::identity(c);
        let z = |k: i64| Matrix::zeros(c.ring(), c.dim(k + 1), c.dim(k));
        Self::new(id.clone(), id, z, z).unwrap()
    }

    /// Isomorphism given degreewise by invertible matrices.
    pub fn from_isomorphism(f: ChainMap, f_inv: ChainMap) -> Result<Self> {
        let s = f.source.clone();
        let t = f.target.clone();
        Self::new(
            f,
            f_inv,
            |k| Matrix::zeros(s.ring(), s.dim(k + 1), s.dim(k)),
            |k| Matrix::zeros(t.ring(), t.dim(k + 1), t.dim(k)),
        )
    }

    pub fn source(&self) -> &ChainComplex {
        &self.f.source
    }

    pub fn target(&self) -> &ChainComplex {
        &self.f.target
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &HomotopyEquivalence) -> Result<Self> {
        let f = next.f.compose(&self.f)?;
        let g = self.g.compose(&next.g)?;
        let (g1, f1) = (&self.g, &self.f);
        let (f2, g2) = (&next.f, &next.g);
        Self::new(
            f,
            g,
            |k| &self.h_src.at(k) + &(&(&g1.at(k + 1) * &next.h_src.at(k)) * &f1.at(k)),
            |k| &next.h_tgt.at(k) + &(&(&f2.at(k + 1) * &self.h_tgt.at(k)) * &g2.at(k)),
        )
    }

    pub fn inverse(&self) -> Self {
        HomotopyEquivalence {
            f: self.g.clone(),
            g: self.f.clone(),
            h_src: Homotopy { f: self.h_tgt.f.clone(), g: self.h_tgt.g.clone(), lo: self.h_tgt.lo, h: self.h_tgt.h.clone() },
            h_tgt: Homotopy { f: self.h_src.f.clone(), g: self.h_src.g.clone(), lo: self.h_src.lo, h: self.h_src.h.clone() },
        }
    }

    pub fn verify(&self) -> Result<()> {
        self.f.verify()?;
        self.g.verify()?;
        self.h_src.verify()?;
        self.h_tgt.verify()
    }
}

/// `cone(f)_r = B_r (+) A_{r-1}`, `d = [[d_B, f], [0, -d_A]]`.
pub fn cone(f: &ChainMap) -> ChainComplex {
    let a = &f.source;
    let b = &f.target;
    let (lo, hi) = span(a, b);
    let (lo, hi) = if lo > hi { (0, -1) } else { (lo, hi + 1) };
    let ring = a.ring();
    let dims: Vec<usize> = (lo..=hi).map(|r| b.dim(r) + a.dim(r - 1)).collect();
    ChainComplex::from_fn(ring, lo, dims, |r| {
        Matrix::blocks(&[
            vec![b.d(r), f.at(r - 1)],
            vec![Matrix::zeros(ring, a.dim(r - 2), b.dim(r)), a.d(r - 1).neg_ref()],
        ])
        .unwrap()
    })
    .expect("cone of a chain map")
}

/// `fib(f) = shift(cone(f), -1)`, so `fib_r = B_{r+1} (+) A_r`.
pub fn fiber(f: &ChainMap) -> ChainComplex {
    cone(f).shift(-1)
}

/// `B -> cone(f)`.
pub fn cone_inclusion(f: &ChainMap) -> ChainMap {
    let c = cone(f);
    let b = &f.target;
    ChainMap::from_fn(b, &c, |r| {
        Matrix::vstack(&[&Matrix::identity(b.ring(), b.dim(r)), &Matrix::zeros(b.ring(), f.source.dim(r - 1), b.dim(r))])
            .unwrap()
    })
    .expect("cone inclusion")
}

/// `fib(f) -> A`.
pub fn fiber_projection(f: &ChainMap) -> ChainMap {
    let fib = fiber(f);
    let a = &f.source;
    ChainMap::from_fn(&fib, a, |r| {
        Matrix::hstack(&[&Matrix::zeros(a.ring(), a.dim(r), f.target.dim(r + 1)), &Matrix::identity(a.ring(), a.dim(r))])
            .unwrap()
    })
    .expect("fiber projection")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z() -> RingSpec {
        RingSpec::Integers
    }

    #[test]
    fn dual_index_arithmetic() {
        let c = ChainComplex::concentrated(z(), 0, 1);
        assert_eq!(c.dual(0).degrees(), 0..=0);
        assert_eq!(c.dual(2).lo(), 2);
    }

    #[test]
    fn double_dual_sign() {
        let m = Matrix::from_rows(z(), &[vec![2, 1]]);
        let c = ChainComplex::two_term(1, &m);
        for n in -2..3 {
            c.double_dual_iso(n).verify().unwrap();
        }
    }

    #[test]
    fn cone_of_zero_map_is_shift() {
        let c = ChainComplex::two_term(1, &Matrix::from_rows(z(), &[vec![3]]));
        let zero = ChainComplex::zero(z());
        let f = ChainMap::zero(&c, &zero);
        let cc = cone(&f).tighten();
        assert_eq!(cc, c.shift(1).tighten());
    }
}
