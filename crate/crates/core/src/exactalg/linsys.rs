//! Linear systems whose unknowns are matrices, flattened to `A x = b`.

use num_bigint::BigInt;
use num_traits::Zero;

use super::matrix::Matrix;
use super::ring::RingSpec;
use super::snf::{kernel, solve};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VarId(usize);

#[derive(Debug, Clone)]
struct Term {
    coef: i64,
    left: Option<Matrix>,
    var: VarId,
    right: Option<Matrix>,
    transpose: bool,
}

/// One matrix-valued equation `sum of terms + constant = 0`.
#[derive(Debug, Clone)]
pub struct Equation {
    rows: usize,
    cols: usize,
    terms: Vec<Term>,
    constant: Option<Matrix>,
}

impl Equation {
    /// `coef * left * X * right`; `None` stands for an identity factor.
    pub fn term(&mut self, coef: i64, left: Option<&Matrix>, var: VarId, right: Option<&Matrix>) -> &mut Self {
        self.terms.push(Term { coef, left: left.cloned(), var, right: right.cloned(), transpose: false });
        self
    }

    /// `coef * left * X^T * right`.
    pub fn term_t(&mut self, coef: i64, left: Option<&Matrix>, var: VarId, right: Option<&Matrix>) -> &mut Self {
        self.terms.push(Term { coef, left: left.cloned(), var, right: right.cloned(), transpose: true });
        self
    }

    pub fn constant(&mut self, c: &Matrix) -> &mut Self {
        self.constant = Some(match self.constant.take() {
            None => c.clone(),
            Some(prev) => &prev + c,
        });
        self
    }
}

#[derive(Debug, Clone)]
pub struct LinearSystem {
    ring: RingSpec,
    vars: Vec<(usize, usize)>,
    eqs: Vec<Equation>,
}

impl LinearSystem {
    pub fn new(ring: RingSpec) -> Self {
        LinearSystem { ring, vars: Vec::new(), eqs: Vec::new() }
    }

    pub fn var(&mut self, rows: usize, cols: usize) -> VarId {
        self.vars.push((rows, cols));
        VarId(self.vars.len() - 1)
    }

    pub fn var_shape(&self, v: VarId) -> (usize, usize) {
        self.vars[v.0]
    }

    pub fn equation(&mut self, rows: usize, cols: usize) -> &mut Equation {
        self.eqs.push(Equation { rows, cols, terms: Vec::new(), constant: None });
        self.eqs.last_mut().unwrap()
    }

    /// Pin an unknown to a given value.
    pub fn fix(&mut self, v: VarId, value: &Matrix) {
        let (r, c) = self.vars[v.0];
        self.equation(r, c).term(1, None, v, None).constant(&value.neg_ref());
    }

    pub fn unknown_count(&self) -> usize {
        self.vars.iter().map(|(r, c)| r * c).sum()
    }

    fn offsets(&self) -> Vec<usize> {
        let mut off = Vec::with_capacity(self.vars.len());
        let mut acc = 0;
        for (r, c) in &self.vars {
            off.push(acc);
            acc += r * c;
        }
        off
    }

    fn check_shapes(&self) -> Result<()> {
        for e in &self.eqs {
            for t in &e.terms {
                let (vr, vc) = self.vars[t.var.0];
                let (xr, xc) = if t.transpose { (vc, vr) } else { (vr, vc) };
                let lr = t.left.as_ref().map_or((xr, xr), |l| (l.rows(), l.cols()));
                let rr = t.right.as_ref().map_or((xc, xc), |r| (r.rows(), r.cols()));
                if lr.1 != xr || rr.0 != xc || lr.0 != e.rows || rr.1 != e.cols {
                    return Err(Error::Shape(format!(
                        "term {:?}*X{:?}{}*{:?} in {}x{} equation",
                        lr,
                        (vr, vc),
                        if t.transpose { "^T" } else { "" },
                        rr,
                        e.rows,
                        e.cols
                    )));
                }
            }
            if let Some(c) = &e.constant {
                if c.rows() != e.rows || c.cols() != e.cols {
                    return Err(Error::Shape("equation constant".into()));
                }
            }
        }
        Ok(())
    }

    /// Assemble the flat system `A x = b`.
    pub fn assemble(&self) -> Result<(Matrix, Matrix)> {
        self.check_shapes()?;
        let ring = self.ring;
        let n = self.unknown_count();
        let off = self.offsets();
        let mut rows: Vec<Vec<BigInt>> = Vec::new();
        let mut rhs: Vec<BigInt> = Vec::new();
        for e in &self.eqs {
            let base = rows.len();
            for _ in 0..e.rows * e.cols {
                rows.push(vec![BigInt::zero(); n]);
                rhs.push(BigInt::zero());
            }
            for t in &e.terms {
                let (vr, vc) = self.vars[t.var.0];
                let (xr, xc) = if t.transpose { (vc, vr) } else { (vr, vc) };
                let coef = BigInt::from(t.coef);
                for i in 0..e.rows {
                    for a in 0..xr {
                        let l = match &t.left {
                            Some(m) => m.get(i, a).clone(),
                            None => BigInt::from((i == a) as i32),
                        };
                        if l.is_zero() {
                            continue;
                        }
                        let cl = &coef * &l;
                        for j in 0..e.cols {
                            for b in 0..xc {
                                let r = match &t.right {
                                    Some(m) => m.get(b, j).clone(),
                                    None => BigInt::from((b == j) as i32),
                                };
                                if r.is_zero() {
                                    continue;
                                }
                                // entry (a, b) of X or X^T
                                let idx = if t.transpose { off[t.var.0] + b * vc + a } else { off[t.var.0] + a * vc + b };
                                let slot = &mut rows[base + i * e.cols + j][idx];
                                *slot = ring.reduce(&*slot + &cl * r);
                            }
                        }
                    }
                }
            }
            if let Some(c) = &e.constant {
                for i in 0..e.rows {
                    for j in 0..e.cols {
                        rhs[base + i * e.cols + j] = ring.neg(c.get(i, j));
                    }
                }
            }
        }
        // drop trivial rows
        let mut keep_rows = Vec::new();
        let mut keep_rhs = Vec::new();
        for (r, b) in rows.into_iter().zip(rhs) {
            if r.iter().all(|x| x.is_zero()) {
                if !b.is_zero() {
                    // inconsistent row: keep it so the solver reports failure
                    keep_rows.push(r);
                    keep_rhs.push(b);
                }
                continue;
            }
            keep_rows.push(r);
            keep_rhs.push(b);
        }
        let m = keep_rows.len();
        let a = Matrix::from_vec(ring, m, n, keep_rows.into_iter().flatten().collect())?;
        let b = Matrix::from_vec(ring, m, 1, keep_rhs)?;
        Ok((a, b))
    }

    /// Values for all unknowns, or `None` if inconsistent.
    pub fn solve(&self) -> Result<Option<Vec<Matrix>>> {
        let (a, b) = self.assemble()?;
        let Some(x) = self.particular(&a, &b)? else { return Ok(None) };
        Ok(Some(self.unflatten(&x, 0)?))
    }

    /// A particular solution and a basis of the homogeneous solutions.
    pub fn solve_affine(&self) -> Result<Option<(Vec<Matrix>, Vec<Vec<Matrix>>)>> {
        let (a, b) = self.assemble()?;
        let Some(x) = self.particular(&a, &b)? else { return Ok(None) };
        let n = self.unknown_count();
        let k = if a.rows() == 0 { Matrix::identity(self.ring, n) } else { kernel(&a)? };
        let basis = (0..k.cols()).map(|j| self.unflatten(&k, j)).collect::<Result<Vec<_>>>()?;
        Ok(Some((self.unflatten(&x, 0)?, basis)))
    }

    fn particular(&self, a: &Matrix, b: &Matrix) -> Result<Option<Matrix>> {
        if a.rows() == 0 {
            return Ok(Some(Matrix::zeros(self.ring, self.unknown_count(), 1)));
        }
        solve(a, b)
    }

    fn unflatten(&self, x: &Matrix, col: usize) -> Result<Vec<Matrix>> {
        let mut out = Vec::new();
        let mut k = 0;
        for &(r, c) in &self.vars {
            let vals: Vec<BigInt> = (0..r * c).map(|t| x.get(k + t, col).clone()).collect();
            out.push(Matrix::from_vec(self.ring, r, c, vals)?);
            k += r * c;
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sylvester_like() {
        // find X with A X - X B = C
        let z = RingSpec::Integers;
        let a = Matrix::from_rows(z, &[vec![1, 1], vec![0, 1]]);
        let b = Matrix::from_rows(z, &[vec![2, 0], vec![0, 3]]);
        let x0 = Matrix::from_rows(z, &[vec![1, -2], vec![3, 4]]);
        let c = &(&a * &x0) - &(&x0 * &b);
        let mut sys = LinearSystem::new(z);
        let x = sys.var(2, 2);
        sys.equation(2, 2).term(1, Some(&a), x, None).term(-1, None, x, Some(&b)).constant(&c.neg_ref());
        let sol = sys.solve().unwrap().unwrap();
        assert_eq!(&(&a * &sol[0]) - &(&sol[0] * &b), c);
    }

    #[test]
    fn transpose_term() {
        let z = RingSpec::Integers;
        // X + X^T = S for a symmetric even S
        let s = Matrix::from_rows(z, &[vec![2, 5], vec![5, -4]]);
        let mut sys = LinearSystem::new(z);
        let x = sys.var(2, 2);
        sys.equation(2, 2).term(1, None, x, None).term_t(1, None, x, None).constant(&s.neg_ref());
        let sol = sys.solve().unwrap().unwrap();
        assert_eq!(&sol[0] + &sol[0].transpose(), s);
        let odd = Matrix::from_rows(z, &[vec![1, 0], vec![0, 0]]);
        let mut sys = LinearSystem::new(z);
        let x = sys.var(2, 2);
        sys.equation(2, 2).term(1, None, x, None).term_t(1, None, x, None).constant(&odd.neg_ref());
        assert!(sys.solve().unwrap().is_none());
    }
}
