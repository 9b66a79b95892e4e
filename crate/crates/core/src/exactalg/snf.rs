use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::abelian::AbelianGroupPresentation;
use super::matrix::Matrix;
use super::ring::RingSpec;
use crate::error::{Error, Result};

/// `A = U * D * V` with `U`, `V` invertible and `D` diagonal in divisibility order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmithDecomposition {
    pub u: Matrix,
    pub d: Matrix,
    pub v: Matrix,
}

impl SmithDecomposition {
    pub fn diagonal(&self) -> Vec<BigInt> {
        (0..self.d.rows().min(self.d.cols())).map(|i| self.d.get(i, i).clone()).collect()
    }
}

/// Smith form together with the inverse transforms.
#[derive(Debug, Clone)]
pub(crate) struct SmithFull {
    pub u: Matrix,
    pub u_inv: Matrix,
    pub diag: Vec<BigInt>,
    pub v: Matrix,
    pub v_inv: Matrix,
}

impl SmithFull {
    pub fn rank(&self) -> usize {
        self.diag.iter().filter(|d| !d.is_zero()).count()
    }
}

type Grid = Vec<Vec<BigInt>>;

struct Elim {
    ring: RingSpec,
    a: Grid,
    // p * A * q = D; u = p^-1, v = q^-1
    p_inv: Grid,
    q_inv: Grid,
    track: bool,
}

fn ident(n: usize) -> Grid {
    (0..n).map(|i| (0..n).map(|j| BigInt::from((i == j) as i32)).collect()).collect()
}

impl Elim {
    fn m(&self) -> usize {
        self.a.len()
    }
    fn n(&self) -> usize {
        self.a.first().map_or(0, |r| r.len())
    }

    // row_i += c * row_j
    fn row_add(&mut self, i: usize, j: usize, c: &BigInt) {
        let rj = self.a[j].clone();
        for (x, y) in self.a[i].iter_mut().zip(&rj) {
            *x = self.ring.reduce(&*x + c * y);
        }
        if self.track {
            for row in self.p_inv.iter_mut() {
                row[j] = self.ring.reduce(&row[j] - c * &row[i]);
            }
        }
    }

    fn row_swap(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        self.a.swap(i, j);
        if self.track {
            for row in self.p_inv.iter_mut() {
                row.swap(i, j);
            }
        }
    }

    // row_i *= c where c is a unit with inverse c_inv
    fn row_scale(&mut self, i: usize, c: &BigInt, c_inv: &BigInt) {
        for x in self.a[i].iter_mut() {
            *x = self.ring.reduce(&*x * c);
        }
        if self.track {
            for row in self.p_inv.iter_mut() {
                row[i] = self.ring.reduce(&row[i] * c_inv);
            }
        }
    }

    // col_j += c * col_i
    fn col_add(&mut self, j: usize, i: usize, c: &BigInt) {
        for row in self.a.iter_mut() {
            row[j] = self.ring.reduce(&row[j] + c * &row[i]);
        }
        if self.track {
            let rj = self.q_inv[j].clone();
            for (x, y) in self.q_inv[i].iter_mut().zip(&rj) {
                *x = self.ring.reduce(&*x - c * y);
            }
        }
    }

    fn col_swap(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for row in self.a.iter_mut() {
            row.swap(i, j);
        }
        if self.track {
            self.q_inv.swap(i, j);
        }
    }

    fn quotient(&self, x: &BigInt, pivot: &BigInt) -> BigInt {
        match self.ring {
            RingSpec::Integers => x / pivot,
            _ => {
                let inv = self.ring.inverse(pivot).expect("field pivot is a unit");
                self.ring.mul(x, &inv)
            }
        }
    }

    fn move_to(&mut self, t: usize, (i, j): (usize, usize)) {
        self.row_swap(t, i);
        self.col_swap(t, j);
    }

    fn run(&mut self) {
        let (m, n) = (self.m(), self.n());
        for t in 0..m.min(n) {
            // smallest absolute value, row-major ties
            let mut best: Option<(usize, usize)> = None;
            for i in t..m {
                for j in t..n {
                    let x = &self.a[i][j];
                    if x.is_zero() {
                        continue;
                    }
                    if best.is_none_or(|(bi, bj)| x.abs() < self.a[bi][bj].abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some(pos) = best else { break };
            self.move_to(t, pos);
            loop {
                let mut clean = true;
                for i in t + 1..m {
                    if !self.a[i][t].is_zero() {
                        let q = self.quotient(&self.a[i][t], &self.a[t][t]);
                        self.row_add(i, t, &-q);
                        if !self.a[i][t].is_zero() {
                            clean = false;
                        }
                    }
                }
                for j in t + 1..n {
                    if !self.a[t][j].is_zero() {
                        let q = self.quotient(&self.a[t][j], &self.a[t][t]);
                        self.col_add(j, t, &-q);
                        if !self.a[t][j].is_zero() {
                            clean = false;
                        }
                    }
                }
                if !clean {
                    let mut best = (t, t);
                    for i in t..m {
                        let x = &self.a[i][t];
                        if !x.is_zero() && x.abs() < self.a[best.0][best.1].abs() {
                            best = (i, t);
                        }
                    }
                    for j in t..n {
                        let x = &self.a[t][j];
                        if !x.is_zero() && x.abs() < self.a[best.0][best.1].abs() {
                            best = (t, j);
                        }
                    }
                    self.move_to(t, best);
                    continue;
                }
                if self.ring.is_integers() {
                    let piv = self.a[t][t].clone();
                    let bad = (t + 1..m).find(|&i| (t + 1..n).any(|j| !self.a[i][j].is_multiple_of(&piv)));
                    if let Some(i) = bad {
                        self.row_add(t, i, &BigInt::one());
                        continue;
                    }
                }
                break;
            }
            let piv = self.a[t][t].clone();
            match self.ring {
                RingSpec::Integers => {
                    if piv.is_negative() {
                        let m1 = BigInt::from(-1);
                        self.row_scale(t, &m1, &m1);
                    }
                }
                _ => {
                    let inv = self.ring.inverse(&piv).expect("unit pivot");
                    self.row_scale(t, &inv, &piv);
                }
            }
        }
    }
}

fn grid_to_matrix(ring: RingSpec, g: &Grid, rows: usize, cols: usize) -> Matrix {
    Matrix::from_fn(ring, rows, cols, |i, j| g[i][j].clone())
}

fn eliminate(a: &Matrix, track: bool) -> (Elim, usize, usize) {
    let (m, n) = (a.rows(), a.cols());
    let grid: Grid = (0..m).map(|i| a.row_vec(i)).collect();
    let mut e = Elim {
        ring: a.ring(),
        a: grid,
        p_inv: if track { ident(m) } else { Vec::new() },
        q_inv: if track { ident(n) } else { Vec::new() },
        track,
    };
    e.run();
    (e, m, n)
}

/// Full decomposition over the integers or a prime field.
pub(crate) fn snf_full_pid(a: &Matrix) -> SmithFull {
    debug_assert!(a.ring().is_pid());
    let (e, m, n) = eliminate(a, true);
    let ring = a.ring();
    let diag: Vec<BigInt> = (0..m.min(n)).map(|i| e.a[i][i].clone()).collect();
    let u = grid_to_matrix(ring, &e.p_inv, m, m);
    let v = grid_to_matrix(ring, &e.q_inv, n, n);
    let u_inv = invert_unimodular(&u);
    let v_inv = invert_unimodular(&v);
    SmithFull { u, u_inv, diag, v, v_inv }
}

/// Inverse of a matrix known to be invertible, by elimination on `[M | I]`.
pub fn invert_unimodular(m: &Matrix) -> Matrix {
    try_inverse(m).expect("matrix is invertible")
}

pub fn try_inverse(m: &Matrix) -> Option<Matrix> {
    if !m.is_square() {
        return None;
    }
    let n = m.rows();
    let ring = m.ring();
    if n == 0 {
        return Some(m.clone());
    }
    if !ring.is_pid() {
        let det = m.determinant().ok()?;
        if !ring.is_unit(&det) {
            return None;
        }
        let z = m.change_ring(RingSpec::Integers);
        let inv = solve_lifted(&z, &Matrix::identity(RingSpec::Integers, n), ring.modulus().unwrap())?;
        return Some(inv.change_ring(ring));
    }
    let mut a: Grid = (0..n).map(|i| m.row_vec(i)).collect();
    let mut b: Grid = ident(n);
    // Euclidean column clearing keeps this valid over the integers.
    for c in 0..n {
        loop {
            let nz: Vec<usize> = (c..n).filter(|&i| !a[i][c].is_zero()).collect();
            if nz.is_empty() {
                return None;
            }
            let piv = *nz.iter().min_by_key(|&&i| a[i][c].abs()).unwrap();
            a.swap(c, piv);
            b.swap(c, piv);
            let mut clean = true;
            for i in c + 1..n {
                if a[i][c].is_zero() {
                    continue;
                }
                let q = match ring {
                    RingSpec::Integers => &a[i][c] / &a[c][c],
                    _ => ring.mul(&a[i][c], &ring.inverse(&a[c][c])?),
                };
                for j in 0..n {
                    let (x, y) = (a[c][j].clone(), b[c][j].clone());
                    a[i][j] = ring.reduce(&a[i][j] - &q * x);
                    b[i][j] = ring.reduce(&b[i][j] - &q * y);
                }
                if !a[i][c].is_zero() {
                    clean = false;
                }
            }
            if clean {
                break;
            }
        }
        let inv = ring.inverse(&a[c][c])?;
        for j in 0..n {
            a[c][j] = ring.mul(&a[c][j], &inv);
            b[c][j] = ring.mul(&b[c][j], &inv);
        }
    }
    for c in (0..n).rev() {
        for i in 0..c {
            if a[i][c].is_zero() {
                continue;
            }
            let q = a[i][c].clone();
            for j in 0..n {
                let (x, y) = (a[c][j].clone(), b[c][j].clone());
                a[i][j] = ring.reduce(&a[i][j] - &q * x);
                b[i][j] = ring.reduce(&b[i][j] - &q * y);
            }
        }
    }
    Some(grid_to_matrix(ring, &b, n, n))
}

/// Smith normal form. Over composite moduli the integer form of a lift is reduced and
/// each diagonal entry normalized to its gcd with the modulus.
pub fn snf(a: &Matrix) -> SmithDecomposition {
    let ring = a.ring();
    if ring.is_pid() {
        let f = snf_full_pid(a);
        let d = diag_matrix(ring, &f.diag, a.rows(), a.cols());
        return SmithDecomposition { u: f.u, d, v: f.v };
    }
    let n = ring.modulus().unwrap();
    let nb = BigInt::from(n);
    let f = snf_full_pid(&a.change_ring(RingSpec::Integers));
    let mut u = f.u.change_ring(ring);
    let mut diag = Vec::new();
    for (i, d) in f.diag.iter().enumerate() {
        let g = d.gcd(&nb);
        let g = if g == nb { BigInt::zero() } else { g };
        if !g.is_zero() {
            // d = unit * g modulo n; absorb the unit into column i of U
            let unit = ring
                .units()
                .unwrap()
                .into_iter()
                .find(|c| ring.mul(c, &g) == ring.reduce(d.clone()))
                .expect("associate of gcd");
            for r in 0..u.rows() {
                let x = ring.mul(u.get(r, i), &unit);
                u.set(r, i, x);
            }
        }
        diag.push(g);
    }
    let d = diag_matrix(ring, &diag, a.rows(), a.cols());
    SmithDecomposition { u, d, v: f.v.change_ring(ring) }
}

fn diag_matrix(ring: RingSpec, diag: &[BigInt], rows: usize, cols: usize) -> Matrix {
    Matrix::from_fn(ring, rows, cols, |i, j| if i == j { diag[i].clone() } else { BigInt::zero() })
}

/// Invariant factors only (no transforms).
pub fn invariant_factors(a: &Matrix) -> Vec<BigInt> {
    let (e, m, n) = eliminate(&a.change_ring(if a.ring().is_pid() { a.ring() } else { RingSpec::Integers }), false);
    (0..m.min(n)).map(|i| e.a[i][i].clone()).filter(|d| !d.is_zero()).collect()
}

pub fn rank(a: &Matrix) -> usize {
    if a.ring().is_field() {
        return field::rank(a);
    }
    invariant_factors(a).len()
}

/// Some `x` with `A x = b` (b may have several columns), or `None`.
pub fn solve(a: &Matrix, b: &Matrix) -> Result<Option<Matrix>> {
    if a.ring() != b.ring() {
        return Err(Error::RingMismatch(format!("{} vs {}", a.ring(), b.ring())));
    }
    if a.rows() != b.rows() {
        return Err(Error::Shape(format!("A has {} rows, b has {}", a.rows(), b.rows())));
    }
    let ring = a.ring();
    match ring {
        RingSpec::Integers => Ok(solve_integers(a, b)),
        _ if ring.is_field() => Ok(field::solve(a, b)),
        RingSpec::IntegersMod(n) => {
            let z = RingSpec::Integers;
            Ok(solve_lifted(&a.change_ring(z), &b.change_ring(z), n).map(|x| x.change_ring(ring)))
        }
    }
}

// A x = b mod n  <=>  [A | nI] (x, y) = b over the integers
fn solve_lifted(a: &Matrix, b: &Matrix, n: u64) -> Option<Matrix> {
    let z = RingSpec::Integers;
    let ni = Matrix::identity(z, a.rows()).scale(&BigInt::from(n));
    let aug = Matrix::hstack(&[a, &ni]).ok()?;
    let x = solve_integers(&aug, b)?;
    Some(x.submatrix(0, a.cols(), 0, x.cols()))
}

fn solve_integers(a: &Matrix, b: &Matrix) -> Option<Matrix> {
    let z = RingSpec::Integers;
    if a.cols() == 0 {
        return if b.is_zero() { Some(Matrix::zeros(z, 0, b.cols())) } else { None };
    }
    let f = snf_full_pid(a);
    let c = &f.u_inv * b;
    let mut y = Matrix::zeros(z, a.cols(), b.cols());
    for i in 0..a.rows() {
        let d = f.diag.get(i).cloned().unwrap_or_else(BigInt::zero);
        for k in 0..b.cols() {
            let ci = c.get(i, k);
            if d.is_zero() {
                if !ci.is_zero() {
                    return None;
                }
            } else {
                let (q, r) = ci.div_rem(&d);
                if !r.is_zero() {
                    return None;
                }
                y.set(i, k, q);
            }
        }
    }
    Some(&f.v_inv * &y)
}

/// Columns form a basis of the kernel (saturated over the integers).
pub fn kernel(a: &Matrix) -> Result<Matrix> {
    let ring = a.ring();
    if ring.is_field() {
        return Ok(field::kernel(a));
    }
    if !ring.is_integers() {
        return Err(Error::Unsupported(format!("kernel basis over {ring}")));
    }
    if a.rows() == 0 {
        return Ok(Matrix::identity(ring, a.cols()));
    }
    let f = snf_full_pid(a);
    let r = f.rank();
    let idx: Vec<usize> = (r..a.cols()).collect();
    Ok(f.v_inv.select_cols(&idx))
}

/// `coker(A) = Z^rows / im(A)` over the integers.
pub fn cokernel_presentation(a: &Matrix) -> Result<AbelianGroupPresentation> {
    if !a.ring().is_integers() {
        return Err(Error::Unsupported("cokernel presentation needs integer matrices".into()));
    }
    let factors = invariant_factors(a);
    let free = a.rows() - factors.len();
    Ok(AbelianGroupPresentation::new(free, factors.into_iter().filter(|d| !d.is_one()).collect()))
}

/// `coker(A)` together with the quotient map: column `i` of the returned matrix gives the
/// image of `e_i` in the order of the presentation (free coordinates first, then torsion
/// coordinates reduced mod their factor).
pub fn cokernel_coordinates(a: &Matrix) -> Result<(AbelianGroupPresentation, Matrix)> {
    let z = RingSpec::Integers;
    if !a.ring().is_integers() {
        return Err(Error::Unsupported("cokernel coordinates need integer matrices".into()));
    }
    let g = a.rows();
    let (u_inv, diag) = if a.cols() == 0 {
        (Matrix::identity(z, g), Vec::new())
    } else {
        let f = snf_full_pid(a);
        (f.u_inv, f.diag)
    };
    let mut free = Vec::new();
    let mut tors = Vec::new();
    for j in 0..g {
        match diag.get(j) {
            Some(d) if d.is_zero() => free.push(j),
            None => free.push(j),
            Some(d) if d.is_one() => {}
            Some(d) => tors.push((d.clone(), j)),
        }
    }
    tors.sort();
    let mut coords = Matrix::zeros(z, free.len() + tors.len(), g);
    for i in 0..g {
        for (t, &j) in free.iter().enumerate() {
            coords.set(t, i, u_inv.get(j, i).clone());
        }
        for (t, (d, j)) in tors.iter().enumerate() {
            coords.set(free.len() + t, i, u_inv.get(*j, i).mod_floor(d));
        }
    }
    let group = AbelianGroupPresentation::new(free.len(), tors.into_iter().map(|(d, _)| d).collect());
    Ok((group, coords))
}

/// Dense elimination over a prime field with machine words.
pub(crate) mod field {
    use super::*;
    use num_traits::ToPrimitive;

    fn to_words(a: &Matrix) -> Vec<Vec<u64>> {
        (0..a.rows()).map(|i| (0..a.cols()).map(|j| a.get(i, j).to_u64().unwrap()).collect()).collect()
    }

    fn inv(x: u64, p: u64) -> u64 {
        pow(x, p - 2, p)
    }

    fn pow(mut b: u64, mut e: u64, p: u64) -> u64 {
        let mut r = 1u64;
        b %= p;
        while e > 0 {
            if e & 1 == 1 {
                r = r * b % p;
            }
            b = b * b % p;
            e >>= 1;
        }
        r
    }

    /// Reduced row echelon form in place; returns pivot columns.
    pub fn rref(m: &mut [Vec<u64>], p: u64) -> Vec<usize> {
        let rows = m.len();
        let cols = m.first().map_or(0, |r| r.len());
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..cols {
            if r == rows {
                break;
            }
            let Some(pr) = (r..rows).find(|&i| m[i][c] != 0) else { continue };
            m.swap(r, pr);
            let iv = inv(m[r][c], p);
            for x in m[r].iter_mut() {
                *x = *x * iv % p;
            }
            for i in 0..rows {
                if i != r && m[i][c] != 0 {
                    let f = m[i][c];
                    let (head, tail) = if i < r { let (a, b) = m.split_at_mut(r); (&mut a[i], &b[0]) } else { let (a, b) = m.split_at_mut(i); (&mut b[0], &a[r]) };
                    for (x, y) in head.iter_mut().zip(tail.iter()) {
                        *x = (*x + p - f * y % p) % p;
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(a: &Matrix) -> usize {
        let p = a.ring().modulus().unwrap();
        let mut m = to_words(a);
        rref(&mut m, p).len()
    }

    pub fn solve(a: &Matrix, b: &Matrix) -> Option<Matrix> {
        let ring = a.ring();
        let p = ring.modulus().unwrap();
        let n = a.cols();
        let mut m: Vec<Vec<u64>> = to_words(a)
            .into_iter()
            .zip(to_words(b))
            .map(|(mut r, rb)| {
                r.extend(rb);
                r
            })
            .collect();
        let pivots = rref(&mut m, p);
        if pivots.iter().any(|&c| c >= n) {
            return None;
        }
        let mut x = Matrix::zeros(ring, n, b.cols());
        for (r, &c) in pivots.iter().enumerate() {
            for k in 0..b.cols() {
                x.set(c, k, BigInt::from(m[r][n + k]));
            }
        }
        Some(x)
    }

    pub fn kernel(a: &Matrix) -> Matrix {
        let ring = a.ring();
        let p = ring.modulus().unwrap();
        let n = a.cols();
        let mut m = to_words(a);
        let pivots = rref(&mut m, p);
        let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
        let mut k = Matrix::zeros(ring, n, free.len());
        for (t, &fc) in free.iter().enumerate() {
            k.set(fc, t, BigInt::one());
            for (r, &pc) in pivots.iter().enumerate() {
                k.set(pc, t, BigInt::from((p - m[r][fc]) % p));
            }
        }
        k
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z() -> RingSpec {
        RingSpec::Integers
    }

    fn check(a: &Matrix) {
        let s = snf(a);
        assert_eq!(&(&s.u * &s.d) * &s.v, *a);
        assert!(s.u.is_invertible() && s.v.is_invertible());
        let diag = s.diagonal();
        for w in diag.windows(2) {
            if w[1].is_zero() {
                continue;
            }
            assert!(!w[0].is_zero(), "zeros trail");
            assert!(w[1].is_multiple_of(&w[0]));
        }
    }

    #[test]
    fn snf_examples() {
        let s = snf(&Matrix::identity(z(), 3));
        assert!(s.d.is_identity());
        assert!(snf(&Matrix::zeros(z(), 2, 2)).d.is_zero());
        let a = Matrix::from_rows(z(), &[vec![2, 4], vec![6, 8]]);
        assert_eq!(snf(&a).diagonal(), vec![BigInt::from(2), BigInt::from(4)]);
        check(&a);
    }

    #[test]
    fn snf_mod_composite() {
        let r = RingSpec::IntegersMod(12);
        let a = Matrix::from_rows(r, &[vec![4, 6], vec![2, 9]]);
        check(&a);
    }

    #[test]
    fn solve_examples() {
        let a = Matrix::from_rows(z(), &[vec![2]]);
        assert!(solve(&a, &Matrix::from_rows(z(), &[vec![1]])).unwrap().is_none());
        let r4 = RingSpec::IntegersMod(4);
        let a4 = Matrix::from_rows(r4, &[vec![2]]);
        let b4 = Matrix::from_rows(r4, &[vec![2]]);
        let x = solve(&a4, &b4).unwrap().unwrap();
        assert!([1, 3].contains(&x.to_i64_rows()[0][0]));
        let id = Matrix::identity(z(), 3);
        let b = Matrix::from_rows(z(), &[vec![4], vec![-1], vec![7]]);
        assert_eq!(solve(&id, &b).unwrap().unwrap(), b);
    }

    #[test]
    fn cokernel_examples() {
        let p = cokernel_presentation(&Matrix::from_rows(z(), &[vec![2, 4], vec![6, 8]])).unwrap();
        assert_eq!(p.to_string(), "Z/2 (+) Z/4");
        assert_eq!(cokernel_presentation(&Matrix::zeros(z(), 1, 1)).unwrap().to_string(), "Z");
    }

    #[test]
    fn kernel_integers() {
        let a = Matrix::from_rows(z(), &[vec![2, 4, 6]]);
        let k = kernel(&a).unwrap();
        assert_eq!(k.cols(), 2);
        assert!((&a * &k).is_zero());
    }
}
