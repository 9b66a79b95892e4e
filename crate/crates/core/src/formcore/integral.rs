use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::finite::Verdict;
use super::form::{e8, hyperbolic, Isometry, UnimodularForm};
use super::param::{Flavor, FormParameter};
use crate::error::{Error, Result};
use crate::exactalg::{kernel, solve, try_inverse, Matrix, RingSpec};

/// Vectors examined by one witness search before giving up.
const SEARCH_BUDGET: usize = 200_000;

fn require_integral(f: &UnimodularForm) -> Result<()> {
    if !f.ring().is_integers() {
        return Err(Error::Unsupported(format!("expected a form over Z, got {}", f.ring())));
    }
    Ok(())
}

/// `(n_+, n_-)` of a symmetric integer matrix, by congruence diagonalization over Q.
pub fn inertia(g: &Matrix) -> (usize, usize) {
    let m = g.rows();
    let mut a: Vec<Vec<BigRational>> =
        (0..m).map(|i| (0..m).map(|j| BigRational::from_integer(g.get(i, j).clone())).collect()).collect();
    let (mut pos, mut neg) = (0, 0);
    let swap = |a: &mut Vec<Vec<BigRational>>, i: usize, j: usize| {
        a.swap(i, j);
        for row in a.iter_mut() {
            row.swap(i, j);
        }
    };
    for k in 0..m {
        if a[k][k].is_zero() {
            if let Some(i) = (k + 1..m).find(|&i| !a[i][i].is_zero()) {
                swap(&mut a, i, k);
            } else if let Some((i, j)) =
                (k..m).flat_map(|i| (i + 1..m).map(move |j| (i, j))).find(|&(i, j)| !a[i][j].is_zero())
            {
                // row/col i += row/col j makes a_ii = 2 a_ij
                for c in 0..m {
                    let v = a[j][c].clone();
                    a[i][c] += v;
                }
                for r in 0..m {
                    let v = a[r][j].clone();
                    a[r][i] += v;
                }
                swap(&mut a, i, k);
            } else {
                break;
            }
        }
        let p = a[k][k].clone();
        if p.is_positive() {
            pos += 1;
        } else {
            neg += 1;
        }
        for i in k + 1..m {
            let f = &a[i][k] / &p;
            if f.is_zero() {
                continue;
            }
            for j in k..m {
                let v = &f * &a[k][j];
                a[i][j] -= v;
            }
        }
        for j in k + 1..m {
            a[k][j] = BigRational::zero();
        }
        for i in k + 1..m {
            a[i][k] = BigRational::zero();
        }
    }
    (pos, neg)
}

/// `n_+ - n_-` for a symmetric form over Z.
pub fn signature(f: &UnimodularForm) -> Result<i64> {
    require_integral(f)?;
    if f.param().epsilon != 1 {
        return Err(Error::Unsupported("signature needs a symmetric (eps = +1) form".into()));
    }
    let (p, n) = inertia(f.gram());
    Ok(p as i64 - n as i64)
}

/// Rank of the positive definite part.
pub fn positive_rank(f: &UnimodularForm) -> Result<usize> {
    signature(f)?;
    Ok(inertia(f.gram()).0)
}

/// All nonzero `x` with `x^T G x <= bound` for positive definite `G`, by exact Fincke-Pohst.
pub fn short_vectors(g: &Matrix, bound: &BigInt) -> Result<Vec<Vec<BigInt>>> {
    let m = g.rows();
    let mut a: Vec<Vec<BigRational>> =
        (0..m).map(|i| (0..m).map(|j| BigRational::from_integer(g.get(i, j).clone())).collect()).collect();
    let mut d = vec![BigRational::zero(); m];
    let mut mu = vec![vec![BigRational::zero(); m]; m];
    for i in 0..m {
        if !a[i][i].is_positive() {
            return Err(Error::Invalid("short vector search needs a positive definite form".into()));
        }
        d[i] = a[i][i].clone();
        for j in i + 1..m {
            mu[i][j] = &a[i][j] / &d[i];
        }
        for j in i + 1..m {
            for k in i + 1..m {
                let v = &a[j][i] * &a[i][k] / &d[i];
                a[j][k] -= v;
            }
        }
    }
    let mut out = Vec::new();
    let mut x = vec![BigInt::zero(); m];
    fn rec(
        i: usize,
        rest: BigRational,
        x: &mut Vec<BigInt>,
        d: &[BigRational],
        mu: &[Vec<BigRational>],
        out: &mut Vec<Vec<BigInt>>,
    ) {
        let m = x.len();
        let c: BigRational = (i + 1..m).map(|j| &mu[i][j] * BigRational::from_integer(x[j].clone())).sum();
        let start = (-&c).round().to_integer();
        let cost = |xi: &BigInt| {
            let t = BigRational::from_integer(xi.clone()) + &c;
            &d[i] * &t * &t
        };
        for dir in [1i64, -1] {
            let mut xi = if dir == 1 { start.clone() } else { &start - 1 };
            loop {
                let cst = cost(&xi);
                if cst > rest {
                    break;
                }
                x[i] = xi.clone();
                if i == 0 {
                    if x.iter().any(|v| !v.is_zero()) {
                        out.push(x.clone());
                    }
                } else {
                    rec(i - 1, &rest - &cst, x, d, mu, out);
                }
                xi += dir;
            }
        }
        x[i] = BigInt::zero();
    }
    if m > 0 {
        rec(m - 1, BigRational::from_integer(bound.clone()), &mut x, &d, &mu, &mut out);
    }
    Ok(out)
}

/// Integer vectors ordered by L1 norm, then lexicographically; stops after `budget`.
fn l1_vectors(m: usize, budget: usize) -> impl Iterator<Item = Vec<i64>> {
    fn fill(m: usize, t: i64, prefix: &mut Vec<i64>, out: &mut Vec<Vec<i64>>, cap: usize) {
        if out.len() >= cap {
            return;
        }
        if prefix.len() == m - 1 {
            for s in if t == 0 { vec![0] } else { vec![t, -t] } {
                let mut v = prefix.clone();
                v.push(s);
                out.push(v);
            }
            return;
        }
        for a in 0..=t {
            for s in if a == 0 { vec![0] } else { vec![a, -a] } {
                prefix.push(s);
                fill(m, t - a, prefix, out, cap);
                prefix.pop();
            }
        }
    }
    let mut t = 1;
    let mut produced = 0;
    std::iter::from_fn(move || {
        if m == 0 || produced >= budget {
            return None;
        }
        let mut batch = Vec::new();
        fill(m, t, &mut Vec::new(), &mut batch, budget - produced);
        produced += batch.len();
        t += 1;
        Some(batch)
    })
    .flatten()
}

fn to_col(v: &[i64]) -> Matrix {
    Matrix::from_rows(RingSpec::Integers, &v.iter().map(|&x| vec![x]).collect::<Vec<_>>())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Block {
    Plus,
    Minus,
    Hyp,
    E8Plus,
    E8Minus,
    Arf,
}

/// Working sublattice: columns of `basis` in ambient coordinates and its Gram matrix.
struct Sub<'a> {
    f: &'a UnimodularForm,
    basis: Matrix,
    gram: Matrix,
}

impl<'a> Sub<'a> {
    fn new(f: &'a UnimodularForm, basis: Matrix) -> Self {
        let gram = &(&basis.transpose() * f.gram()) * &basis;
        Sub { f, basis, gram }
    }

    fn rank(&self) -> usize {
        self.basis.cols()
    }

    fn norm(&self, v: &Matrix) -> BigInt {
        (&(&v.transpose() * &self.gram) * v).get(0, 0).clone()
    }

    fn q(&self, v: &Matrix) -> Result<BigInt> {
        self.f.eval_q(&(&self.basis * v).col_vec(0))
    }

    /// Orthogonal complement of the unimodular piece spanned by the local columns `s`.
    fn complement(&self, s: &Matrix) -> Result<Sub<'a>> {
        let k = kernel(&(&s.transpose() * &self.gram))?;
        Ok(Sub::new(self.f, &self.basis * &k))
    }

    fn is_even(&self) -> bool {
        (0..self.rank()).all(|i| self.gram.get(i, i).is_even())
    }

    /// A `w` with `B(v, w) = 1`, when `v` is primitive.
    fn dual_partner(&self, v: &Matrix) -> Result<Option<Matrix>> {
        let row = &v.transpose() * &self.gram;
        solve(&row, &Matrix::identity(RingSpec::Integers, 1))
    }
}

type Pieces = Vec<(Block, Matrix)>;

/// Splits a form over Z into standard blocks; `None` when the searches give up.
fn decompose(sub: Sub<'_>) -> Result<Option<Pieces>> {
    let m = sub.rank();
    if m == 0 {
        return Ok(Some(Vec::new()));
    }
    let eps = sub.f.param().epsilon;
    if eps == -1 {
        return decompose_skew(sub);
    }
    let (pos, neg) = inertia(&sub.gram);
    let even = sub.is_even();
    if pos == 0 || neg == 0 {
        let s: i64 = if neg == 0 { 1 } else { -1 };
        let sg = sub.gram.scale_i64(s);
        if !even {
            let ones = short_vectors(&sg, &BigInt::one())?;
            let Some(v) = ones.first() else { return Ok(None) };
            let col = Matrix::column(RingSpec::Integers, v);
            return peel_one(sub, col, if s == 1 { Block::Plus } else { Block::Minus });
        }
        if m == 8 {
            if let Some(roots) = match_e8(&sg)? {
                let b = if s == 1 { Block::E8Plus } else { Block::E8Minus };
                return Ok(Some(vec![(b, &sub.basis * &roots)]));
            }
        }
        return Ok(None);
    }
    if !even {
        let s: i64 = if pos >= neg { 1 } else { -1 };
        for v in l1_vectors(m, SEARCH_BUDGET) {
            let col = to_col(&v);
            if sub.norm(&col) != BigInt::from(s) {
                continue;
            }
            let rest = sub.complement(&col)?;
            if rest.rank() <= 1 || !rest.is_even() {
                let block = if s == 1 { Block::Plus } else { Block::Minus };
                return attach(&sub, col, block, rest);
            }
        }
        return Ok(None);
    }
    for v in l1_vectors(m, SEARCH_BUDGET) {
        let col = to_col(&v);
        if !sub.norm(&col).is_zero() || v.iter().fold(0i64, |g, &x| g.gcd(&x)) != 1 {
            continue;
        }
        let Some(w) = sub.dual_partner(&col)? else { continue };
        let c = sub.norm(&w) / 2;
        let w = &w - &col.scale(&c);
        let plane = Matrix::hstack(&[&col, &w])?;
        let rest = sub.complement(&plane)?;
        return attach(&sub, plane, Block::Hyp, rest);
    }
    Ok(None)
}

fn peel_one(sub: Sub<'_>, col: Matrix, block: Block) -> Result<Option<Pieces>> {
    let rest = sub.complement(&col)?;
    attach(&sub, col, block, rest)
}

fn attach(sub: &Sub<'_>, local: Matrix, block: Block, rest: Sub<'_>) -> Result<Option<Pieces>> {
    let Some(mut pieces) = decompose(rest)? else { return Ok(None) };
    pieces.insert(0, (block, &sub.basis * &local));
    Ok(Some(pieces))
}

fn decompose_skew(sub: Sub<'_>) -> Result<Option<Pieces>> {
    let m = sub.rank();
    let quadratic = sub.f.param().flavor == Flavor::Quadratic;
    let z = RingSpec::Integers;
    // an isotropic primitive vector with vanishing q among 0/1 vectors
    let mut chosen = None;
    for mask in 1u32..(1u32 << m.min(16)) {
        let v: Vec<i64> = (0..m).map(|i| ((mask >> i) & 1) as i64).collect();
        let col = to_col(&v);
        if !quadratic || sub.q(&col)?.is_zero() {
            chosen = Some(col);
            break;
        }
    }
    let (e, block) = match chosen {
        Some(e) => (e, Block::Hyp),
        None if m == 2 => (Matrix::column(z, &[BigInt::one(), BigInt::zero()]), Block::Arf),
        None => return Ok(None),
    };
    let Some(mut f) = sub.dual_partner(&e)? else { return Ok(None) };
    if quadratic && block == Block::Hyp && !sub.q(&f)?.is_zero() {
        f = &f + &e;
    }
    let plane = Matrix::hstack(&[&e, &f])?;
    let rest = sub.complement(&plane)?;
    attach(&sub, plane, block, rest)
}

/// Eight roots with the E8 Cartan matrix as Gram matrix, found by backtracking.
fn match_e8(g: &Matrix) -> Result<Option<Matrix>> {
    let target = e8(&FormParameter::symmetric(RingSpec::Integers))?;
    let tg = target.gram();
    let roots: Vec<Matrix> = short_vectors(g, &BigInt::from(2))?
        .into_iter()
        .map(|v| Matrix::column(RingSpec::Integers, &v))
        .filter(|c| (&(&c.transpose() * g) * c).get(0, 0) == &BigInt::from(2))
        .collect();
    let rows: Vec<Matrix> = roots.iter().map(|r| &r.transpose() * g).collect();
    fn rec(k: usize, chosen: &mut Vec<usize>, roots: &[Matrix], rows: &[Matrix], tg: &Matrix) -> bool {
        if k == 8 {
            return true;
        }
        for c in 0..roots.len() {
            let ok = chosen.iter().enumerate().all(|(j, &r)| (&rows[r] * &roots[c]).get(0, 0) == tg.get(j, k));
            if ok {
                chosen.push(c);
                if rec(k + 1, chosen, roots, rows, tg) {
                    return true;
                }
                chosen.pop();
            }
            if k == 0 {
                // the Weyl group is transitive on roots
                break;
            }
        }
        false
    }
    let mut chosen = Vec::new();
    if roots.is_empty() || !rec(0, &mut chosen, &roots, &rows, tg) {
        return Ok(None);
    }
    let cols: Vec<&Matrix> = chosen.iter().map(|&i| &roots[i]).collect();
    Ok(Some(Matrix::hstack(&cols)?))
}

/// Standard representative with a basis of the input realizing it: `u^T B u = B_std`.
pub(crate) fn standard_form(f: &UnimodularForm) -> Result<Option<(UnimodularForm, Matrix)>> {
    require_integral(f)?;
    let z = RingSpec::Integers;
    let Some(mut pieces) = decompose(Sub::new(f, Matrix::identity(z, f.rank())))? else { return Ok(None) };
    pieces.sort_by_key(|(b, _)| *b);
    let p = f.param();
    let mut std = UnimodularForm::zero(p.clone());
    let mut cols = Vec::new();
    for (b, m) in &pieces {
        let block = match b {
            Block::Plus => UnimodularForm::diagonal(p.clone(), &[1])?,
            Block::Minus => UnimodularForm::diagonal(p.clone(), &[-1])?,
            Block::Hyp => hyperbolic(p, 1),
            Block::E8Plus => e8(p)?,
            Block::E8Minus => e8(p)?.negate(),
            Block::Arf => arf_plane(p)?,
        };
        std = std.orthogonal_sum(&block)?;
        cols.push(m);
    }
    let u = if cols.is_empty() { Matrix::zeros(z, 0, 0) } else { Matrix::hstack(&cols)? };
    let got = f.transform(&u)?;
    if got != std {
        return Err(Error::Internal(format!("standard basis check failed: {:?} vs {:?}", got.gram(), std.gram())));
    }
    Ok(Some((std, u)))
}

/// Rank-2 skew-quadratic form with `q = (1, 1)`.
pub(crate) fn arf_plane(p: &FormParameter) -> Result<UnimodularForm> {
    let ring = p.ring;
    let gram = Matrix::from_rows(ring, &[vec![0, 1], vec![-1, 0]]);
    UnimodularForm::new(p.clone(), gram, vec![BigInt::one(), BigInt::one()])
}

/// Invariants used for classification: rank, signature, parity and (skew quadratic) Arf.
pub fn integral_invariants(f: &UnimodularForm) -> Result<Vec<(String, i64)>> {
    require_integral(f)?;
    let mut out = vec![("rank".to_string(), f.rank() as i64)];
    if f.param().epsilon == 1 {
        out.push(("signature".into(), signature(f)?));
        out.push(("even".into(), f.is_even() as i64));
    } else if f.param().flavor == Flavor::Quadratic {
        out.push(("arf".into(), super::arf::arf(f)? as i64));
    }
    Ok(out)
}

/// Classification over Z: invariants first, then standard bases for both forms.
pub fn is_isometric_integral(f: &UnimodularForm, g: &UnimodularForm) -> Result<Verdict> {
    if f.param() != g.param() {
        return Err(Error::Invalid("parameter mismatch".into()));
    }
    let (a, b) = (integral_invariants(f)?, integral_invariants(g)?);
    for (x, y) in a.iter().zip(&b) {
        if x.1 != y.1 {
            return Ok(Verdict::No(format!("{} {} vs {}", x.0, x.1, y.1)));
        }
    }
    let definite = f.param().epsilon == 1 && signature(f)?.unsigned_abs() as usize == f.rank() && f.rank() > 0;
    if definite && f.rank() > 4 {
        return Ok(Verdict::Unknown(format!("definite of rank {} (only rank <= 4 is decided)", f.rank())));
    }
    let (Some((sf, uf)), Some((sg, ug))) = (standard_form(f)?, standard_form(g)?) else {
        return Ok(Verdict::Unknown("no standard basis found within the search budget".into()));
    };
    if sf != sg {
        return Ok(Verdict::Unknown("standard forms differ although invariants agree".into()));
    }
    let inv = try_inverse(&uf).ok_or_else(|| Error::Internal("standard basis not unimodular".into()))?;
    Ok(Verdict::Yes(Isometry::new(f.clone(), g.clone(), &ug * &inv)?))
}

/// Invariant-mode Lagrangian over Z: `None` is backed by an obstruction (rank, signature, Arf).
pub fn lagrangian_integral(f: &UnimodularForm) -> Result<Option<Matrix>> {
    require_integral(f)?;
    let p = f.param();
    if p.flavor == Flavor::General {
        return Err(Error::Unsupported("invariant-mode Lagrangians need a canonical flavor".into()));
    }
    if f.rank() % 2 == 1 {
        return Ok(None);
    }
    if p.epsilon == 1 && signature(f)? != 0 {
        return Ok(None);
    }
    if p.epsilon == -1 && p.flavor == Flavor::Quadratic && super::arf::arf(f)? == 1 {
        return Ok(None);
    }
    let Some((std, u)) = standard_form(f)? else {
        return Err(Error::CapExceeded("standard basis search budget exhausted".into()));
    };
    let z = RingSpec::Integers;
    let k = f.rank() / 2;
    // standard forms here are H^k or <1>^k (+) <-1>^k
    let mut l = Matrix::zeros(z, f.rank(), k);
    let diag_odd = (0..std.rank()).any(|i| std.gram().get(i, i).is_odd());
    for i in 0..k {
        if diag_odd {
            l.set(i, i, BigInt::one());
            l.set(k + i, i, BigInt::one());
        } else {
            l.set(2 * i, i, BigInt::one());
        }
    }
    let basis = &u * &l;
    if !super::lagrangian::is_lagrangian(f, &basis)? {
        return Err(Error::Internal("constructed Lagrangian failed verification".into()));
    }
    Ok(Some(basis))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z() -> RingSpec {
        RingSpec::Integers
    }

    #[test]
    fn e8_signature() {
        let e = e8(&FormParameter::quadratic(z())).unwrap();
        assert_eq!(signature(&e).unwrap(), 8);
        assert_eq!(short_vectors(e.gram(), &BigInt::from(2)).unwrap().len(), 240);
    }

    #[test]
    fn hyperbolic_signature() {
        assert_eq!(signature(&hyperbolic(&FormParameter::symmetric(z()), 2)).unwrap(), 0);
        let f = UnimodularForm::diagonal(FormParameter::symmetric(z()), &[1, -1]).unwrap();
        assert_eq!(signature(&f).unwrap(), 0);
    }

    #[test]
    fn parity_separates() {
        let p = FormParameter::symmetric(z());
        let f = UnimodularForm::diagonal(p.clone(), &[1, -1]).unwrap();
        let h = hyperbolic(&p, 1);
        assert!(is_isometric_integral(&f, &h).unwrap().is_no());
    }

    #[test]
    fn odd_indefinite_witness() {
        let p = FormParameter::symmetric(z());
        let f = UnimodularForm::diagonal(p.clone(), &[1, 1, -1]).unwrap();
        let h = hyperbolic(&p, 1).orthogonal_sum(&UnimodularForm::diagonal(p, &[1]).unwrap()).unwrap();
        match is_isometric_integral(&f, &h).unwrap() {
            Verdict::Yes(iso) => iso.verify().unwrap(),
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn e8_plus_h_vs_scrambled() {
        let p = FormParameter::quadratic(z());
        let f = e8(&p).unwrap().orthogonal_sum(&hyperbolic(&p, 1)).unwrap();
        let mut u = Matrix::identity(z(), 10);
        for i in 0..9 {
            u.set(i, i + 1, BigInt::from(if i % 2 == 0 { 1 } else { -1 }));
        }
        let g = f.transform(&u).unwrap();
        assert!(is_isometric_integral(&f, &g).unwrap().is_yes());
    }

    #[test]
    fn lagrangian_of_one_minus_one() {
        let f = UnimodularForm::diagonal(FormParameter::symmetric(z()), &[1, -1]).unwrap();
        let l = lagrangian_integral(&f).unwrap().unwrap();
        let v = l.col_vec(0);
        assert_eq!(v[0].abs(), BigInt::one());
        assert_eq!(v[1].abs(), BigInt::one());
        assert!(lagrangian_integral(&UnimodularForm::diagonal(FormParameter::symmetric(z()), &[1]).unwrap()).unwrap().is_none());
    }
}
