use super::form::UnimodularForm;
use super::param::Flavor;
use crate::error::{Error, Result};
use crate::exactalg::RingSpec;

/// Reduction mod 2 as bitmask rows plus q-values.
struct Mod2 {
    r: usize,
    rows: Vec<u32>,
    q: Vec<u8>,
}

impl Mod2 {
    fn b(&self, x: u32, y: u32) -> u8 {
        let mut s = 0;
        for i in 0..self.r {
            if x >> i & 1 == 1 {
                s ^= (self.rows[i] & y).count_ones() & 1;
            }
        }
        s as u8
    }

    fn qv(&self, x: u32) -> u8 {
        let mut s = 0u8;
        for i in 0..self.r {
            if x >> i & 1 == 0 {
                continue;
            }
            s ^= self.q[i];
            for j in i + 1..self.r {
                if x >> j & 1 == 1 {
                    s ^= (self.rows[i] >> j & 1) as u8;
                }
            }
        }
        s
    }
}

fn reduce(f: &UnimodularForm) -> Result<Mod2> {
    let p = f.param();
    let ok = p.flavor == Flavor::Quadratic
        && match f.ring() {
            RingSpec::IntegersMod(2) => true,
            RingSpec::Integers => p.epsilon == -1,
            _ => false,
        };
    if !ok {
        return Err(Error::Unsupported("Arf invariant needs a quadratic form over F2 (or skew-quadratic over Z)".into()));
    }
    let r = f.rank();
    if r % 2 == 1 || r > 30 {
        return Err(Error::Invalid(format!("Arf invariant needs even rank (at most 30), got {r}")));
    }
    let bit = |x: &num_bigint::BigInt| -> u32 { u32::from(x.bit(0)) };
    let rows = (0..r).map(|i| (0..r).fold(0u32, |m, j| m | bit(f.gram().get(i, j)) << j)).collect();
    let q = f.qvals().iter().map(|x| bit(x) as u8).collect();
    Ok(Mod2 { r, rows, q })
}

/// Arf invariant via a symplectic basis, `sum q(e_i) q(f_i)`; cross-checked against the value
/// that `q` takes most often.
pub fn arf(f: &UnimodularForm) -> Result<u8> {
    let m = reduce(f)?;
    let mut pool: Vec<u32> = (0..m.r).map(|i| 1u32 << i).collect();
    let mut total = 0u8;
    while let Some(e) = pool.pop() {
        let Some(pos) = pool.iter().position(|&y| m.b(e, y) == 1) else {
            return Err(Error::Invalid("form is degenerate mod 2".into()));
        };
        let fv = pool.swap_remove(pos);
        total ^= m.qv(e) & m.qv(fv);
        // project the rest onto the orthogonal complement of span(e, f)
        for y in pool.iter_mut() {
            let (be, bf) = (m.b(*y, fv), m.b(*y, e));
            if be == 1 {
                *y ^= e;
            }
            if bf == 1 {
                *y ^= fv;
            }
        }
    }
    if m.r <= 20 {
        let ones = (0..1u32 << m.r).filter(|&x| m.qv(x) == 1).count();
        let democratic = u8::from(ones * 2 > 1 << m.r);
        if democratic != total {
            return Err(Error::Internal("Arf invariant disagrees with the majority value of q".into()));
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::Matrix;
    use crate::formcore::{hyperbolic, FormParameter};
    use num_bigint::BigInt;

    #[test]
    fn examples() {
        let f2 = RingSpec::IntegersMod(2);
        let p = FormParameter::quadratic(f2);
        assert_eq!(arf(&hyperbolic(&p, 2)).unwrap(), 0);
        let a = UnimodularForm::new(p.clone(), Matrix::from_rows(f2, &[vec![0, 1], vec![1, 0]]), vec![BigInt::from(1); 2]).unwrap();
        assert_eq!(arf(&a).unwrap(), 1);
        assert_eq!(arf(&a.orthogonal_sum(&a).unwrap()).unwrap(), 0);
    }
}
