use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::ring::RingSpec;
use crate::error::{Error, Result};

/// Dense row-major matrix with canonical entries.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    ring: RingSpec,
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Matrix[{}; {}x{}]", self.ring, self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self.get(i, j).to_string()).collect();
            write!(f, " [{}]", row.join(" "))?;
        }
        Ok(())
    }
}

impl Matrix {
    pub fn zeros(ring: RingSpec, rows: usize, cols: usize) -> Self {
        Matrix { ring, rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(ring: RingSpec, n: usize) -> Self {
        let mut m = Self::zeros(ring, n, n);
        for i in 0..n {
            m.data[i * n + i] = BigInt::one();
        }
        m
    }

    pub fn from_vec(ring: RingSpec, rows: usize, cols: usize, data: Vec<BigInt>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!("{} entries for {rows}x{cols}", data.len())));
        }
        let data = data.into_iter().map(|x| ring.reduce(x)).collect();
        Ok(Matrix { ring, rows, cols, data })
    }

    /// Panics on ragged input; meant for literals.
    pub fn from_rows(ring: RingSpec, rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend(row.iter().map(|&x| ring.from_i64(x)));
        }
        Matrix { ring, rows: r, cols: c, data }
    }

    pub fn from_fn(ring: RingSpec, rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> BigInt) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(ring.reduce(f(i, j)));
            }
        }
        Matrix { ring, rows, cols, data }
    }

    pub fn column(ring: RingSpec, v: &[BigInt]) -> Self {
        Self::from_fn(ring, v.len(), 1, |i, _| v[i].clone())
    }

    pub fn diagonal(ring: RingSpec, d: &[BigInt]) -> Self {
        let n = d.len();
        Self::from_fn(ring, n, n, |i, j| if i == j { d[i].clone() } else { BigInt::zero() })
    }

    pub fn ring(&self) -> RingSpec {
        self.ring
    }
    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        self.data[i * self.cols + j] = self.ring.reduce(v);
    }

    pub fn entries(&self) -> &[BigInt] {
        &self.data
    }

    pub fn row_vec(&self, i: usize) -> Vec<BigInt> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn col_vec(&self, j: usize) -> Vec<BigInt> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn is_identity(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (0..self.cols).all(|j| *self.get(i, j) == BigInt::from((i == j) as i32)))
    }

    fn check_ring(&self, other: &Matrix) -> Result<()> {
        if self.ring != other.ring {
            return Err(Error::RingMismatch(format!("{} vs {}", self.ring, other.ring)));
        }
        Ok(())
    }

    pub fn try_mul(&self, other: &Matrix) -> Result<Matrix> {
        self.check_ring(other)?;
        if self.cols != other.rows {
            return Err(Error::Shape(format!(
                "product {}x{} * {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = vec![BigInt::zero(); self.rows * other.cols];
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self.data[i * self.cols + k];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other.data[k * other.cols + j];
                    if !b.is_zero() {
                        out[i * other.cols + j] += a * b;
                    }
                }
            }
        }
        if self.ring.is_finite() {
            for x in out.iter_mut() {
                *x = self.ring.reduce(std::mem::take(x));
            }
        }
        Ok(Matrix { ring: self.ring, rows: self.rows, cols: other.cols, data: out })
    }

    pub fn try_add(&self, other: &Matrix) -> Result<Matrix> {
        self.check_ring(other)?;
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Shape(format!(
                "sum {}x{} + {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| self.ring.add(a, b)).collect();
        Ok(Matrix { ring: self.ring, rows: self.rows, cols: self.cols, data })
    }

    pub fn try_sub(&self, other: &Matrix) -> Result<Matrix> {
        self.try_add(&other.neg_ref())
    }

    pub fn neg_ref(&self) -> Matrix {
        let data = self.data.iter().map(|a| self.ring.neg(a)).collect();
        Matrix { ring: self.ring, rows: self.rows, cols: self.cols, data }
    }

    pub fn scale(&self, c: &BigInt) -> Matrix {
        let data = self.data.iter().map(|a| self.ring.mul(a, c)).collect();
        Matrix { ring: self.ring, rows: self.rows, cols: self.cols, data }
    }

    pub fn scale_i64(&self, c: i64) -> Matrix {
        if c == 1 {
            return self.clone();
        }
        self.scale(&BigInt::from(c))
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.ring, self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn hstack(parts: &[&Matrix]) -> Result<Matrix> {
        let first = parts.first().ok_or_else(|| Error::Shape("empty hstack".into()))?;
        let rows = first.rows;
        let ring = first.ring;
        let mut cols = 0;
        for p in parts {
            if p.rows != rows || p.ring != ring {
                return Err(Error::Shape("hstack row mismatch".into()));
            }
            cols += p.cols;
        }
        let mut out = Matrix::zeros(ring, rows, cols);
        let mut off = 0;
        for p in parts {
            for i in 0..rows {
                for j in 0..p.cols {
                    out.data[i * cols + off + j] = p.get(i, j).clone();
                }
            }
            off += p.cols;
        }
        Ok(out)
    }

    pub fn vstack(parts: &[&Matrix]) -> Result<Matrix> {
        let first = parts.first().ok_or_else(|| Error::Shape("empty vstack".into()))?;
        let cols = first.cols;
        let ring = first.ring;
        let mut data = Vec::new();
        let mut rows = 0;
        for p in parts {
            if p.cols != cols || p.ring != ring {
                return Err(Error::Shape("vstack column mismatch".into()));
            }
            data.extend(p.data.iter().cloned());
            rows += p.rows;
        }
        Ok(Matrix { ring, rows, cols, data })
    }

    /// Block matrix from a grid; every block in a block-row shares its row count.
    pub fn blocks(grid: &[Vec<Matrix>]) -> Result<Matrix> {
        let rows: Vec<Matrix> = grid
            .iter()
            .map(|r| Matrix::hstack(&r.iter().collect::<Vec<_>>()))
            .collect::<Result<_>>()?;
        Matrix::vstack(&rows.iter().collect::<Vec<_>>())
    }

    pub fn block_diag(parts: &[&Matrix]) -> Result<Matrix> {
        let ring = parts.first().map(|p| p.ring).ok_or_else(|| Error::Shape("empty block_diag".into()))?;
        let rows: usize = parts.iter().map(|p| p.rows).sum();
        let cols: usize = parts.iter().map(|p| p.cols).sum();
        let mut out = Matrix::zeros(ring, rows, cols);
        let (mut r0, mut c0) = (0, 0);
        for p in parts {
            if p.ring != ring {
                return Err(Error::RingMismatch("block_diag".into()));
            }
            out.paste(r0, c0, p);
            r0 += p.rows;
            c0 += p.cols;
        }
        Ok(out)
    }

    /// Overwrites the block starting at (r0, c0).
    pub fn paste(&mut self, r0: usize, c0: usize, block: &Matrix) {
        for i in 0..block.rows {
            for j in 0..block.cols {
                self.data[(r0 + i) * self.cols + c0 + j] = block.get(i, j).clone();
            }
        }
    }

    pub fn submatrix(&self, r0: usize, nr: usize, c0: usize, nc: usize) -> Matrix {
        Matrix::from_fn(self.ring, nr, nc, |i, j| self.get(r0 + i, c0 + j).clone())
    }

    pub fn select_cols(&self, idx: &[usize]) -> Matrix {
        Matrix::from_fn(self.ring, self.rows, idx.len(), |i, j| self.get(i, idx[j]).clone())
    }

    pub fn select_rows(&self, idx: &[usize]) -> Matrix {
        Matrix::from_fn(self.ring, idx.len(), self.cols, |i, j| self.get(idx[i], j).clone())
    }

    /// Reinterpret the entries in another ring (reducing or lifting canonical representatives).
    pub fn change_ring(&self, ring: RingSpec) -> Matrix {
        Matrix::from_fn(ring, self.rows, self.cols, |i, j| self.get(i, j).clone())
    }

    pub fn to_i64_rows(&self) -> Vec<Vec<i64>> {
        use num_traits::ToPrimitive;
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j).to_i64().expect("entry fits i64")).collect())
            .collect()
    }

    pub fn determinant(&self) -> Result<BigInt> {
        if !self.is_square() {
            return Err(Error::Shape("determinant of non-square matrix".into()));
        }
        Ok(self.ring.reduce(bareiss_det(&self.change_ring(RingSpec::Integers))))
    }

    pub fn is_invertible(&self) -> bool {
        self.is_square() && self.determinant().map(|d| self.ring.is_unit(&d)).unwrap_or(false)
    }

    pub fn max_abs(&self) -> BigInt {
        self.data.iter().map(|x| x.abs()).max().unwrap_or_else(BigInt::zero)
    }
}

/// Fraction-free elimination over the integers.
fn bareiss_det(m: &Matrix) -> BigInt {
    let n = m.rows();
    if n == 0 {
        return BigInt::one();
    }
    let mut a: Vec<Vec<BigInt>> = (0..n).map(|i| m.row_vec(i)).collect();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(i) => {
                    a.swap(i, k);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = v.div_floor(&prev);
            }
        }
        prev = a[k][k].clone();
    }
    sign * &a[n - 1][n - 1]
}

macro_rules! binop {
    ($tr:ident, $m:ident, $call:ident) => {
        impl $tr<&Matrix> for &Matrix {
            type Output = Matrix;
            fn $m(self, rhs: &Matrix) -> Matrix {
                self.$call(rhs).expect(concat!("matrix ", stringify!($m)))
            }
        }
    };
}
binop!(Mul, mul, try_mul);
binop!(Add, add, try_add);
binop!(Sub, sub, try_sub);

impl Neg for &Matrix {
    type Output = Matrix;
    fn neg(self) -> Matrix {
        self.neg_ref()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn det_small() {
        let z = RingSpec::Integers;
        assert_eq!(Matrix::from_rows(z, &[vec![2, 4], vec![6, 8]]).determinant().unwrap(), BigInt::from(-8));
        let m = Matrix::from_rows(z, &[vec![0, 1, 2], vec![1, 0, 3], vec![4, -3, 8]]);
        assert_eq!(m.determinant().unwrap(), BigInt::from(-2));
        let f3 = RingSpec::IntegersMod(3);
        assert!(Matrix::from_rows(f3, &[vec![1, 1], vec![1, 2]]).is_invertible());
    }

    #[test]
    fn stacking() {
        let z = RingSpec::Integers;
        let a = Matrix::identity(z, 2);
        let b = Matrix::from_rows(z, &[vec![5], vec![6]]);
        let h = Matrix::hstack(&[&a, &b]).unwrap();
        assert_eq!(h.to_i64_rows(), vec![vec![1, 0, 5], vec![0, 1, 6]]);
        let d = Matrix::block_diag(&[&a, &b]).unwrap();
        assert_eq!((d.rows(), d.cols()), (4, 3));
    }
}
