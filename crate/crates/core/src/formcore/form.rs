use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::param::{Flavor, FormParameter};
use crate::error::{Error, Result};
use crate::exactalg::{try_inverse, Matrix, RingSpec};

/// Free module with a unimodular `eps`-symmetric Gram matrix and q-values on the basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnimodularForm {
    param: FormParameter,
    gram: Matrix,
    q: Vec<BigInt>,
}

impl UnimodularForm {
    pub fn new(param: FormParameter, gram: Matrix, q: Vec<BigInt>) -> Result<Self> {
        let ring = param.ring;
        if gram.ring() != ring {
            return Err(Error::RingMismatch(format!("gram over {}, parameter over {ring}", gram.ring())));
        }
        if !gram.is_square() || q.len() != gram.rows() {
            return Err(Error::Shape(format!("gram {}x{} with {} q-values", gram.rows(), gram.cols(), q.len())));
        }
        if gram.transpose() != gram.scale_i64(param.epsilon) {
            return Err(Error::Invalid(format!("gram is not {}-symmetric", param.epsilon)));
        }
        let det = gram.determinant()?;
        if !ring.is_unit(&det) {
            return Err(Error::Invalid(format!("not unimodular: det = {det}")));
        }
        let mut qv = Vec::with_capacity(q.len());
        for (i, x) in q.into_iter().enumerate() {
            let x = param.q_reduce(x);
            if !param.q_is_member(&x) {
                return Err(Error::Invalid(format!("q-value {x} at {i} is not in Q")));
            }
            if param.rho(&x) != *gram.get(i, i) {
                return Err(Error::Invalid(format!("rho(q_{i}) != B_{i}{i}")));
            }
            qv.push(x);
        }
        Ok(UnimodularForm { param, gram, q: qv })
    }

    /// q-values read off the diagonal where they are determined by the Gram matrix.
    pub fn from_gram(param: FormParameter, gram: Matrix) -> Result<Self> {
        let ring = param.ring;
        let n = gram.rows();
        let q: Vec<BigInt> = match (param.flavor, param.epsilon) {
            (Flavor::Symmetric, _) | (Flavor::Even, _) => (0..n).map(|i| gram.get(i, i).clone()).collect(),
            (Flavor::Quadratic, 1) => {
                let mut out = Vec::new();
                for i in 0..n {
                    let b = ring.balanced(gram.get(i, i));
                    let q = match ring {
                        RingSpec::Integers => {
                            if &b % 2 != BigInt::zero() {
                                return Err(Error::Invalid("odd diagonal has no quadratic refinement".into()));
                            }
                            b / 2
                        }
                        _ => {
                            let inv2 = ring
                                .inverse(&BigInt::from(2))
                                .ok_or_else(|| Error::Invalid("q-values are not determined by the gram matrix here".into()))?;
                            ring.mul(&b, &inv2)
                        }
                    };
                    out.push(q);
                }
                out
            }
            _ => return Err(Error::Invalid("q-values are not determined by the gram matrix here".into())),
        };
        Self::new(param, gram, q)
    }

    /// Diagonal symmetric form `<a1, ..., ak>`.
    pub fn diagonal(param: FormParameter, entries: &[i64]) -> Result<Self> {
        let ring = param.ring;
        let d: Vec<BigInt> = entries.iter().map(|&x| ring.from_i64(x)).collect();
        Self::from_gram(param, Matrix::diagonal(ring, &d))
    }

    pub fn zero(param: FormParameter) -> Self {
        let ring = param.ring;
        UnimodularForm { param, gram: Matrix::zeros(ring, 0, 0), q: Vec::new() }
    }

    pub fn param(&self) -> &FormParameter {
        &self.param
    }
    pub fn ring(&self) -> RingSpec {
        self.param.ring
    }
    pub fn rank(&self) -> usize {
        self.q.len()
    }
    pub fn gram(&self) -> &Matrix {
        &self.gram
    }
    pub fn qvals(&self) -> &[BigInt] {
        &self.q
    }

    pub fn bilinear(&self, x: &[BigInt], y: &[BigInt]) -> BigInt {
        let ring = self.ring();
        let mut s = BigInt::zero();
        for i in 0..x.len() {
            if x[i].is_zero() {
                continue;
            }
            for j in 0..y.len() {
                s += &x[i] * self.gram.get(i, j) * &y[j];
            }
        }
        ring.reduce(s)
    }

    /// `q(sum x_i e_i) = sum x_i . q_i + sum_{i<j} tau(x_i x_j B_ij)`.
    pub fn eval_q(&self, x: &[BigInt]) -> Result<BigInt> {
        if x.len() != self.rank() {
            return Err(Error::Shape(format!("vector of length {} for rank {}", x.len(), self.rank())));
        }
        let p = &self.param;
        let ring = p.ring;
        let mut acc = p.q_zero();
        for i in 0..x.len() {
            if x[i].is_zero() {
                continue;
            }
            acc = p.q_add(&acc, &p.q_act(&x[i], &self.q[i]));
            let mut m = BigInt::zero();
            for j in i + 1..x.len() {
                m += &x[i] * &x[j] * self.gram.get(i, j);
            }
            acc = p.q_add(&acc, &p.tau(&ring.reduce(m)));
        }
        Ok(acc)
    }

    pub fn determinant(&self) -> BigInt {
        self.gram.determinant().expect("square gram")
    }

    /// Pull back along the basis given by the columns of an invertible `u`.
    pub fn transform(&self, u: &Matrix) -> Result<UnimodularForm> {
        if u.rows() != self.rank() || !u.is_invertible() {
            return Err(Error::Invalid("basis change must be invertible of matching size".into()));
        }
        let gram = &(&u.transpose() * &self.gram) * u;
        let q = (0..u.cols()).map(|j| self.eval_q(&u.col_vec(j))).collect::<Result<Vec<_>>>()?;
        Self::new(self.param.clone(), gram, q)
    }

    pub fn orthogonal_sum(&self, other: &UnimodularForm) -> Result<UnimodularForm> {
        if self.param != other.param {
            return Err(Error::Invalid(format!("parameter mismatch: {} vs {}", self.param.label(), other.param.label())));
        }
        let gram = Matrix::block_diag(&[&self.gram, &other.gram])?;
        let mut q = self.q.clone();
        q.extend(other.q.iter().cloned());
        Ok(UnimodularForm { param: self.param.clone(), gram, q })
    }

    pub fn negate(&self) -> UnimodularForm {
        let q = self.q.iter().map(|x| self.param.q_neg(x)).collect();
        UnimodularForm { param: self.param.clone(), gram: self.gram.neg_ref(), q }
    }

    /// Sub-form on a set of basis vectors given as columns (assumed unimodular there).
    pub fn restrict(&self, basis: &Matrix) -> Result<UnimodularForm> {
        let gram = &(&basis.transpose() * &self.gram) * basis;
        let q = (0..basis.cols()).map(|j| self.eval_q(&basis.col_vec(j))).collect::<Result<Vec<_>>>()?;
        Self::new(self.param.clone(), gram, q)
    }

    /// Parity over the integers: even iff every diagonal entry is even.
    pub fn is_even(&self) -> bool {
        (0..self.rank()).all(|i| self.ring().balanced(self.gram.get(i, i)) % 2 == BigInt::zero())
    }
}

/// `hyp(R^k)`: basis `e_1..e_k, f_1..f_k` with `B(e_i, f_i) = 1`, `B(f_i, e_i) = eps`, q = 0.
pub fn hyperbolic(param: &FormParameter, k: usize) -> UnimodularForm {
    let ring = param.ring;
    let mut gram = Matrix::zeros(ring, 2 * k, 2 * k);
    for i in 0..k {
        gram.set(i, k + i, BigInt::one());
        gram.set(k + i, i, ring.from_i64(param.epsilon));
    }
    UnimodularForm { param: param.clone(), gram, q: vec![param.q_zero(); 2 * k] }
}

/// The root lattice E8 as a form with the given (even) parameter.
pub fn e8(param: &FormParameter) -> Result<UnimodularForm> {
    let edges = [(0, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7), (1, 3)];
    let mut rows = vec![vec![0i64; 8]; 8];
    for (i, row) in rows.iter_mut().enumerate() {
        row[i] = 2;
    }
    for (a, b) in edges {
        rows[a][b] = -1;
        rows[b][a] = -1;
    }
    UnimodularForm::from_gram(param.clone(), Matrix::from_rows(param.ring, &rows))
}

/// `u` carries the source basis into target coordinates: `u^T B_t u = B_s`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Isometry {
    pub source: UnimodularForm,
    pub target: UnimodularForm,
    pub u: Matrix,
}

impl Isometry {
    pub fn new(source: UnimodularForm, target: UnimodularForm, u: Matrix) -> Result<Self> {
        let iso = Isometry { source, target, u };
        iso.verify()?;
        Ok(iso)
    }

    pub fn verify(&self) -> Result<()> {
        let (s, t, u) = (&self.source, &self.target, &self.u);
        if u.rows() != t.rank() || u.cols() != s.rank() || !u.is_invertible() {
            return Err(Error::Invalid("isometry matrix must be invertible".into()));
        }
        if &(&u.transpose() * t.gram()) * u != *s.gram() {
            return Err(Error::Invalid("isometry does not preserve the bilinear form".into()));
        }
        for i in 0..s.rank() {
            if t.eval_q(&u.col_vec(i))? != s.qvals()[i] {
                return Err(Error::Invalid(format!("isometry does not preserve q on e_{i}")));
            }
        }
        Ok(())
    }

    pub fn inverse(&self) -> Result<Isometry> {
        let inv = try_inverse(&self.u).ok_or_else(|| Error::Internal("isometry not invertible".into()))?;
        Isometry::new(self.target.clone(), self.source.clone(), inv)
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &Isometry) -> Result<Isometry> {
        Isometry::new(self.source.clone(), next.target.clone(), &next.u * &self.u)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bi(x: i64) -> BigInt {
        BigInt::from(x)
    }

    #[test]
    fn eval_examples() {
        let z = RingSpec::Integers;
        let f = UnimodularForm::diagonal(FormParameter::symmetric(z), &[1]).unwrap();
        assert_eq!(f.eval_q(&[bi(3)]).unwrap(), bi(9));
        let f2 = RingSpec::IntegersMod(2);
        let h = hyperbolic(&FormParameter::quadratic(f2), 1);
        assert_eq!(h.eval_q(&[bi(1), bi(1)]).unwrap(), bi(1));
        assert_eq!(h.eval_q(&[bi(0), bi(0)]).unwrap(), bi(0));
    }

    #[test]
    fn hyperbolic_shapes() {
        let z = RingSpec::Integers;
        let h = hyperbolic(&FormParameter::symmetric(z), 1);
        assert_eq!(h.gram().to_i64_rows(), vec![vec![0, 1], vec![1, 0]]);
        let hm = hyperbolic(&FormParameter::new(z, Flavor::Symmetric, -1).unwrap(), 1);
        assert_eq!(hm.gram().to_i64_rows(), vec![vec![0, 1], vec![-1, 0]]);
        assert_eq!(hyperbolic(&FormParameter::symmetric(z), 0).rank(), 0);
    }

    #[test]
    fn e8_is_unimodular_even() {
        let e = e8(&FormParameter::quadratic(RingSpec::Integers)).unwrap();
        assert_eq!(e.determinant(), bi(1));
        assert!(e.qvals().iter().all(|q| *q == bi(1)));
    }

    #[test]
    fn rho_of_q_matches_diagonal() {
        let z = RingSpec::Integers;
        let e = e8(&FormParameter::quadratic(z)).unwrap();
        let x: Vec<BigInt> = (0..8).map(|i| bi(i - 3)).collect();
        let q = e.eval_q(&x).unwrap();
        assert_eq!(e.param().rho(&q), e.bilinear(&x, &x));
    }

    #[test]
    fn negate_twice() {
        let f = UnimodularForm::diagonal(FormParameter::symmetric(RingSpec::IntegersMod(5)), &[1, 2]).unwrap();
        assert_eq!(f.negate().negate(), f);
    }
}
