use std::collections::{BTreeMap, HashMap, HashSet};

use num_bigint::BigInt;

use super::form::{Isometry, UnimodularForm};
use super::param::{Flavor, FormParameter};
use crate::error::{Error, Result};
use crate::exactalg::{prime_factors, try_inverse, Matrix, RingSpec};

/// Largest ambient module `R^r` we are willing to list element by element.
const MAX_VECTORS: u64 = 1 << 16;
/// Largest number of tied partial frames kept during canonical-form search.
const MAX_TIES: usize = 1 << 18;
/// Largest number of Gram candidates in direct class enumeration.
const MAX_CANDIDATES: u64 = 1 << 20;

pub const DEFAULT_ORBIT_CAP: usize = 4;
pub const DEFAULT_ENUM_CAP: usize = 6;

/// `Q` with its operations tabulated; elements are indices in `q_elements` order.
pub(crate) struct QTable {
    n: u64,
    elems: Vec<BigInt>,
    index: HashMap<BigInt, usize>,
    add: Vec<Vec<usize>>,
    act: Vec<Vec<usize>>,
    tau: Vec<usize>,
    rho: Vec<u64>,
    zero: usize,
}

impl QTable {
    pub fn new(p: &FormParameter) -> Result<QTable> {
        let ring = p.ring;
        let n = ring.modulus().ok_or_else(|| Error::Unsupported("finite-ring routine called over the integers".into()))?;
        let elems = p.q_elements()?;
        let index: HashMap<BigInt, usize> = elems.iter().cloned().enumerate().map(|(i, e)| (e, i)).collect();
        let add = elems.iter().map(|a| elems.iter().map(|b| index[&p.q_add(a, b)]).collect()).collect();
        let ring_elems = ring.elements()?;
        let act = ring_elems.iter().map(|r| elems.iter().map(|q| index[&p.q_act(r, q)]).collect()).collect();
        let tau = ring_elems.iter().map(|m| index[&p.tau(m)]).collect();
        let rho = elems.iter().map(|q| ring.to_u64(&p.rho(q))).collect();
        let zero = index[&p.q_zero()];
        Ok(QTable { n, elems, index, add, act, tau, rho, zero })
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }
}

/// A form with `u64` entries for fast evaluation.
struct Packed<'a> {
    n: u64,
    r: usize,
    gram: Vec<u64>,
    q: Vec<usize>,
    qt: &'a QTable,
}

impl<'a> Packed<'a> {
    fn new(f: &UnimodularForm, qt: &'a QTable) -> Packed<'a> {
        let ring = f.ring();
        let r = f.rank();
        let gram = f.gram().entries().iter().map(|x| ring.to_u64(x)).collect();
        let q = f.qvals().iter().map(|x| qt.index[x]).collect();
        Packed { n: qt.n, r, gram, q, qt }
    }

    fn qval(&self, x: &[u64]) -> usize {
        let n = self.n;
        let mut acc = self.qt.zero;
        for i in 0..self.r {
            if x[i] == 0 {
                continue;
            }
            acc = self.qt.add[acc][self.qt.act[x[i] as usize][self.q[i]]];
            let mut m = 0u64;
            for j in i + 1..self.r {
                m = (m + x[i] * x[j] % n * self.gram[i * self.r + j]) % n;
            }
            acc = self.qt.add[acc][self.qt.tau[m as usize]];
        }
        acc
    }

    /// `x^T B` as a row.
    fn row(&self, x: &[u64]) -> Vec<u64> {
        (0..self.r)
            .map(|j| (0..self.r).fold(0, |s, i| (s + x[i] * self.gram[i * self.r + j]) % self.n))
            .collect()
    }

    fn dot(&self, row: &[u64], y: &[u64]) -> u64 {
        row.iter().zip(y).fold(0, |s, (a, b)| (s + a * b) % self.n)
    }
}

/// All vectors of `(Z/n)^r`, index `i` has little-endian base-`n` digits.
fn all_vectors(n: u64, r: usize) -> Result<Vec<Vec<u64>>> {
    let count = (n as u128).pow(r as u32);
    if count > MAX_VECTORS as u128 {
        return Err(Error::CapExceeded(format!("(Z/{n})^{r} has {count} vectors, limit {MAX_VECTORS}")));
    }
    Ok((0..count as u64)
        .map(|mut i| {
            (0..r)
                .map(|_| {
                    let d = i % n;
                    i /= n;
                    d
                })
                .collect()
        })
        .collect())
}

/// Incremental independence test modulo every prime dividing `n`.
#[derive(Clone)]
struct Independence {
    primes: Vec<u64>,
    rows: Vec<Vec<(usize, Vec<u64>)>>,
}

impl Independence {
    fn new(n: u64) -> Self {
        let primes = prime_factors(n);
        let rows = vec![Vec::new(); primes.len()];
        Independence { primes, rows }
    }

    fn extend(&self, v: &[u64]) -> Option<Independence> {
        let mut out = self.clone();
        for (t, &p) in self.primes.iter().enumerate() {
            let mut w: Vec<u64> = v.iter().map(|x| x % p).collect();
            for (c, row) in &self.rows[t] {
                let f = w[*c];
                if f != 0 {
                    for (a, b) in w.iter_mut().zip(row) {
                        *a = (*a + p - f * b % p) % p;
                    }
                }
            }
            let c = w.iter().position(|&x| x != 0)?;
            let inv = inv_mod(w[c], p);
            for a in w.iter_mut() {
                *a = *a * inv % p;
            }
            out.rows[t].push((c, w));
        }
        Some(out)
    }
}

fn inv_mod(a: u64, p: u64) -> u64 {
    (1..p).find(|x| a * x % p == 1).expect("unit")
}

fn basis_matrix(ring: RingSpec, r: usize, frame: &[&Vec<u64>]) -> Matrix {
    Matrix::from_fn(ring, r, frame.len(), |i, j| BigInt::from(frame[j][i]))
}

/// Lexicographically least presentation of an isometry class over a finite ring.
#[derive(Debug, Clone)]
pub struct CanonicalForm {
    pub form: UnimodularForm,
    /// Columns: the canonical basis in coordinates of the input form.
    pub basis: Matrix,
    pub key: Vec<u64>,
}

/// Minimizes `(q(v_k), B(v_1, v_k), ..., B(v_k, v_k))` column by column over all bases,
/// keeping every tied partial frame unless they are known to be interchangeable.
pub fn canonical_form(f: &UnimodularForm) -> Result<CanonicalForm> {
    canonical_form_with(f, witt_extension_applies(f.param()))
}

/// Over prime fields every isometry between subspaces extends to the whole form (except for
/// symmetric bilinear forms in characteristic 2), so partial frames with equal data are
/// interchangeable and one representative per level suffices.
fn witt_extension_applies(p: &FormParameter) -> bool {
    p.ring.is_field() && p.flavor != Flavor::General && !(p.ring.modulus() == Some(2) && p.flavor == Flavor::Symmetric)
}

pub(crate) fn canonical_form_with(f: &UnimodularForm, one_per_level: bool) -> Result<CanonicalForm> {
    let ring = f.ring();
    let qt = QTable::new(f.param())?;
    let pk = Packed::new(f, &qt);
    let r = f.rank();
    let vecs = all_vectors(qt.n, r)?;
    let qvals: Vec<usize> = vecs.iter().map(|v| pk.qval(v)).collect();

    struct State {
        frame: Vec<usize>,
        rows: Vec<Vec<u64>>,
        ind: Independence,
    }
    let mut states = vec![State { frame: vec![], rows: vec![], ind: Independence::new(qt.n) }];
    let mut key = Vec::new();
    for _ in 0..r {
        let mut best: Option<Vec<u64>> = None;
        let mut next: Vec<State> = Vec::new();
        for s in &states {
            'cand: for (xi, x) in vecs.iter().enumerate().skip(1) {
                let qx = qvals[xi] as u64;
                let mut chunk = Vec::with_capacity(s.rows.len() + 2);
                chunk.push(qx);
                if let Some(b) = &best {
                    if qx > b[0] {
                        continue;
                    }
                }
                let mut tied = best.as_ref().is_some_and(|b| qx == b[0]);
                for (t, row) in s.rows.iter().enumerate() {
                    let v = pk.dot(row, x);
                    if tied {
                        let bv = best.as_ref().unwrap()[t + 1];
                        if v > bv {
                            continue 'cand;
                        }
                        tied = v == bv;
                    }
                    chunk.push(v);
                }
                let rx = pk.row(x);
                let self_b = pk.dot(&rx, x);
                if tied && self_b > best.as_ref().unwrap()[s.rows.len() + 1] {
                    continue;
                }
                chunk.push(self_b);
                let Some(ind) = s.ind.extend(x) else { continue };
                let mut frame = s.frame.clone();
                frame.push(xi);
                let mut rows = s.rows.clone();
                rows.push(rx);
                let st = State { frame, rows, ind };
                match &best {
                    Some(b) if *b == chunk => next.push(st),
                    _ => {
                        best = Some(chunk);
                        next.clear();
                        next.push(st);
                    }
                }
                if next.len() > MAX_TIES {
                    return Err(Error::CapExceeded(format!("canonical form search exceeded {MAX_TIES} tied frames")));
                }
            }
        }
        key.extend(best.ok_or_else(|| Error::Internal("no basis vector found".into()))?);
        if one_per_level {
            next.truncate(1);
        }
        states = next;
    }
    let frame: Vec<&Vec<u64>> = states[0].frame.iter().map(|&i| &vecs[i]).collect();
    let basis = basis_matrix(ring, r, &frame);
    let form = f.transform(&basis)?;
    Ok(CanonicalForm { form, basis, key })
}

/// Result of an isometry test.
#[derive(Debug, Clone)]
pub enum Verdict {
    Yes(Isometry),
    No(String),
    Unknown(String),
}

impl Verdict {
    pub fn is_yes(&self) -> bool {
        matches!(self, Verdict::Yes(_))
    }
    pub fn is_no(&self) -> bool {
        matches!(self, Verdict::No(_))
    }
}

/// Determinant up to squares of units: the least `det * u^2`.
pub fn det_class(f: &UnimodularForm) -> BigInt {
    let ring = f.ring();
    let det = f.determinant();
    match ring.modulus() {
        None => det,
        Some(_) => ring
            .units()
            .expect("finite ring")
            .iter()
            .map(|u| ring.mul(&det, &ring.mul(u, u)))
            .min()
            .expect("1 is a unit"),
    }
}

/// Exhaustive orbit comparison through canonical forms.
pub fn is_isometric_finite(f: &UnimodularForm, g: &UnimodularForm, cap: usize) -> Result<Verdict> {
    if f.param() != g.param() {
        return Err(Error::Invalid("parameter mismatch".into()));
    }
    if f.rank() != g.rank() {
        return Ok(Verdict::No(format!("rank {} vs {}", f.rank(), g.rank())));
    }
    if f.rank() > cap {
        return Err(Error::CapExceeded(format!("orbit search at rank {} above cap {cap}", f.rank())));
    }
    let (df, dg) = (det_class(f), det_class(g));
    if df != dg {
        return Ok(Verdict::No(format!("determinant class {df} vs {dg}")));
    }
    let cf = canonical_form(f)?;
    let cg = canonical_form(g)?;
    if cf.key != cg.key {
        return Ok(Verdict::No("canonical forms differ".into()));
    }
    let inv = try_inverse(&cf.basis).ok_or_else(|| Error::Internal("canonical basis not invertible".into()))?;
    Ok(Verdict::Yes(Isometry::new(f.clone(), g.clone(), &cg.basis * &inv)?))
}

/// All Lagrangians (as bases, columns) of a form over a finite ring, or the first `limit`.
pub fn lagrangians(f: &UnimodularForm, limit: Option<usize>, cap: usize) -> Result<Vec<Matrix>> {
    let ring = f.ring();
    let r = f.rank();
    if r > cap {
        return Err(Error::CapExceeded(format!("Lagrangian search at rank {r} above cap {cap}")));
    }
    if r % 2 == 1 {
        return Ok(Vec::new());
    }
    let k = r / 2;
    let qt = QTable::new(f.param())?;
    let pk = Packed::new(f, &qt);
    let vecs = all_vectors(qt.n, r)?;
    let iso: Vec<usize> = (1..vecs.len()).filter(|&i| pk.qval(&vecs[i]) == qt.zero).collect();
    let rows: HashMap<usize, Vec<u64>> = iso.iter().map(|&i| (i, pk.row(&vecs[i]))).collect();
    let n = qt.n;

    let mut seen: HashSet<Vec<u64>> = HashSet::new();
    let mut out = Vec::new();
    // span as a sorted list of element indices
    let span_key = |frame: &[usize]| -> Vec<u64> {
        let mut elems: Vec<u64> = vec![0];
        for &v in frame {
            let mut grown = Vec::new();
            for &e in &elems {
                for c in 0..n {
                    let mut idx = 0u64;
                    let mut mul = 1u64;
                    for t in 0..r {
                        let ed = (e / mul) % n;
                        let d = (ed + c * vecs[v][t]) % n;
                        idx += d * mul;
                        mul *= n;
                    }
                    grown.push(idx);
                }
            }
            grown.sort_unstable();
            grown.dedup();
            elems = grown;
        }
        elems
    };

    fn dfs(
        depth: usize,
        k: usize,
        start: usize,
        frame: &mut Vec<usize>,
        ind: &Independence,
        ctx: &mut dyn FnMut(&[usize]) -> bool,
        iso: &[usize],
        orth: &dyn Fn(usize, usize) -> bool,
        vecs: &[Vec<u64>],
    ) -> bool {
        if depth == k {
            return ctx(frame);
        }
        for pos in start..iso.len() {
            let v = iso[pos];
            if !frame.iter().all(|&u| orth(u, v)) {
                continue;
            }
            let Some(ind2) = ind.extend(&vecs[v]) else { continue };
            frame.push(v);
            let stop = dfs(depth + 1, k, pos + 1, frame, &ind2, ctx, iso, orth, vecs);
            frame.pop();
            if stop {
                return true;
            }
        }
        false
    }

    let orth = |u: usize, v: usize| pk.dot(&rows[&u], &vecs[v]) == 0;
    let mut visit = |frame: &[usize]| -> bool {
        let key = span_key(frame);
        if seen.insert(key) {
            let cols: Vec<&Vec<u64>> = frame.iter().map(|&i| &vecs[i]).collect();
            out.push(basis_matrix(ring, r, &cols));
        }
        limit.is_some_and(|l| out.len() >= l)
    };
    if k == 0 {
        return Ok(vec![Matrix::zeros(ring, 0, 0)]);
    }
    dfs(0, k, 0, &mut Vec::new(), &Independence::new(n), &mut visit, &iso, &orth, &vecs);
    Ok(out)
}

/// Representatives of all isometry classes of rank `0..=cap`, keyed and sorted canonically.
pub fn classes(param: &FormParameter, cap: usize) -> Result<Vec<Vec<CanonicalForm>>> {
    let ring = param.ring;
    let n = ring.modulus().ok_or_else(|| Error::Unsupported("class enumeration needs a finite ring".into()))?;
    let local = prime_factors(n).len() == 1;
    let mut by_rank: Vec<BTreeMap<Vec<u64>, CanonicalForm>> = vec![BTreeMap::new(); cap + 1];
    by_rank[0].insert(Vec::new(), canonical_form(&UnimodularForm::zero(param.clone()))?);
    if local {
        // over a local ring every form splits into blocks of rank at most 2
        let blocks1 = direct_forms(param, 1)?;
        let blocks2 = if cap >= 2 { direct_forms(param, 2)? } else { Vec::new() };
        for f in &blocks1 {
            insert_class(&mut by_rank[1], f)?;
        }
        if cap >= 2 {
            for f in &blocks2 {
                insert_class(&mut by_rank[2], f)?;
            }
        }
        let b1: Vec<UnimodularForm> = by_rank[1].values().map(|c| c.form.clone()).collect();
        let b2: Vec<UnimodularForm> = if cap >= 2 { by_rank[2].values().map(|c| c.form.clone()).collect() } else { vec![] };
        for rk in 2..=cap {
            let mut found = Vec::new();
            for x in by_rank[rk - 1].values() {
                for y in &b1 {
                    found.push(x.form.orthogonal_sum(y)?);
                }
            }
            if rk >= 3 {
                for x in by_rank[rk - 2].values() {
                    for y in &b2 {
                        found.push(x.form.orthogonal_sum(y)?);
                    }
                }
            }
            for f in &found {
                insert_class(&mut by_rank[rk], f)?;
            }
        }
    } else {
        for rk in 1..=cap {
            for f in direct_forms(param, rk)? {
                insert_class(&mut by_rank[rk], &f)?;
            }
        }
    }
    Ok(by_rank.into_iter().map(|m| m.into_values().collect()).collect())
}

fn insert_class(map: &mut BTreeMap<Vec<u64>, CanonicalForm>, f: &UnimodularForm) -> Result<()> {
    let c = canonical_form(f)?;
    map.entry(c.key.clone()).or_insert(c);
    Ok(())
}

/// Every valid (gram, q) pair of the given rank.
fn direct_forms(param: &FormParameter, rank: usize) -> Result<Vec<UnimodularForm>> {
    let ring = param.ring;
    let n = ring.modulus().unwrap();
    let qt = QTable::new(param)?;
    let eps = ring.to_u64(&ring.from_i64(param.epsilon));
    let upper = rank * (rank + 1) / 2;
    let count = (n as u128).pow(upper as u32) * (qt.len() as u128).pow(rank as u32);
    if count > MAX_CANDIDATES as u128 {
        return Err(Error::CapExceeded(format!("{count} candidate forms of rank {rank}, limit {MAX_CANDIDATES}")));
    }
    let mut out = Vec::new();
    let upper_vals = all_vectors(n, upper)?;
    for vals in &upper_vals {
        let mut g = vec![0u64; rank * rank];
        let mut t = 0;
        let mut ok = true;
        for i in 0..rank {
            for j in i..rank {
                g[i * rank + j] = vals[t];
                g[j * rank + i] = vals[t] * eps % n;
                if i == j && vals[t] * eps % n != vals[t] {
                    ok = false;
                }
                t += 1;
            }
        }
        if !ok {
            continue;
        }
        let gram = Matrix::from_fn(ring, rank, rank, |i, j| BigInt::from(g[i * rank + j]));
        if !ring.is_unit(&gram.determinant()?) {
            continue;
        }
        // q_i ranges over rho^{-1}(B_ii)
        let choices: Vec<Vec<usize>> = (0..rank)
            .map(|i| (0..qt.len()).filter(|&q| qt.rho[q] == g[i * rank + i]).collect())
            .collect();
        let mut idx = vec![0usize; rank];
        if choices.iter().any(|c| c.is_empty()) {
            continue;
        }
        loop {
            let q = (0..rank).map(|i| qt.elems[choices[i][idx[i]]].clone()).collect();
            out.push(UnimodularForm::new(param.clone(), gram.clone(), q)?);
            let mut p = 0;
            while p < rank {
                idx[p] += 1;
                if idx[p] < choices[p].len() {
                    break;
                }
                idx[p] = 0;
                p += 1;
            }
            if p == rank {
                break;
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formcore::form::hyperbolic;

    fn f3() -> RingSpec {
        RingSpec::IntegersMod(3)
    }

    #[test]
    fn one_one_vs_two_two_over_f3() {
        let p = FormParameter::symmetric(f3());
        let a = UnimodularForm::diagonal(p.clone(), &[1, 1]).unwrap();
        let b = UnimodularForm::diagonal(p, &[2, 2]).unwrap();
        match is_isometric_finite(&a, &b, 4).unwrap() {
            Verdict::Yes(iso) => iso.verify().unwrap(),
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn discriminant_separates() {
        let p = FormParameter::symmetric(f3());
        let a = UnimodularForm::diagonal(p.clone(), &[1, 1]).unwrap();
        let b = UnimodularForm::diagonal(p, &[1, 2]).unwrap();
        assert!(is_isometric_finite(&a, &b, 4).unwrap().is_no());
    }

    #[test]
    fn permuted_hyperbolic() {
        let p = FormParameter::quadratic(RingSpec::IntegersMod(2));
        let h = hyperbolic(&p, 2);
        let perm = Matrix::from_rows(p.ring, &[vec![0, 1, 0, 0], vec![1, 0, 0, 0], vec![0, 0, 0, 1], vec![0, 0, 1, 0]]);
        let g = h.transform(&perm).unwrap();
        assert!(is_isometric_finite(&h, &g, 4).unwrap().is_yes());
    }

    #[test]
    fn hyperbolic_plane_lagrangians() {
        let f2 = RingSpec::IntegersMod(2);
        assert_eq!(lagrangians(&hyperbolic(&FormParameter::quadratic(f2), 1), None, 6).unwrap().len(), 2);
        assert_eq!(lagrangians(&hyperbolic(&FormParameter::symmetric(f2), 1), None, 6).unwrap().len(), 3);
        let h3 = hyperbolic(&FormParameter::symmetric(f3()), 1);
        assert_eq!(lagrangians(&h3, None, 6).unwrap().len(), 2);
    }

    #[test]
    fn pruned_search_matches_full_search() {
        for p in [3u64, 5] {
            let param = FormParameter::symmetric(RingSpec::IntegersMod(p));
            for f in direct_forms(&param, 2).unwrap() {
                let a = canonical_form_with(&f, true).unwrap();
                let b = canonical_form_with(&f, false).unwrap();
                assert_eq!(a.key, b.key);
            }
        }
        let quad = FormParameter::quadratic(RingSpec::IntegersMod(2));
        for f in classes(&quad, 4).unwrap().iter().flatten() {
            let g = f.form.transform(&Matrix::from_fn(quad.ring, f.form.rank(), f.form.rank(), |i, j| BigInt::from((i <= j) as u8))).unwrap();
            assert_eq!(canonical_form_with(&g, false).unwrap().key, f.key);
        }
    }

    #[test]
    fn class_counts_f3() {
        let cl = classes(&FormParameter::symmetric(f3()), 3).unwrap();
        let counts: Vec<usize> = cl.iter().map(|c| c.len()).collect();
        assert_eq!(counts, vec![1, 2, 2, 2]);
    }

    #[test]
    fn class_counts_f2() {
        let sym = classes(&FormParameter::symmetric(RingSpec::IntegersMod(2)), 4).unwrap();
        assert_eq!(sym.iter().map(|c| c.len()).collect::<Vec<_>>(), vec![1, 1, 2, 1, 2]);
        let quad = classes(&FormParameter::quadratic(RingSpec::IntegersMod(2)), 4).unwrap();
        assert_eq!(quad.iter().map(|c| c.len()).collect::<Vec<_>>(), vec![1, 0, 2, 0, 2]);
    }
}
