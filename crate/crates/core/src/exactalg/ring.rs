use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Ground ring: the integers or a residue ring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RingSpec {
    Integers,
    IntegersMod(u64),
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

pub fn prime_factors(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            out.push(d);
            while n.is_multiple_of(d) {
                n /= d;
            }
        }
        d += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

impl RingSpec {
    pub fn zmod(n: u64) -> Result<Self> {
        if n < 2 {
            return Err(Error::Invalid(format!("modulus must be >= 2, got {n}")));
        }
        Ok(RingSpec::IntegersMod(n))
    }

    pub fn modulus(&self) -> Option<u64> {
        match self {
            RingSpec::Integers => None,
            RingSpec::IntegersMod(n) => Some(*n),
        }
    }

    pub fn is_field(&self) -> bool {
        matches!(self, RingSpec::IntegersMod(n) if is_prime(*n))
    }

    pub fn is_integers(&self) -> bool {
        matches!(self, RingSpec::Integers)
    }

    pub fn is_finite(&self) -> bool {
        !self.is_integers()
    }

    /// Integers or a prime field.
    pub fn is_pid(&self) -> bool {
        self.is_integers() || self.is_field()
    }

    pub fn reduce(&self, x: BigInt) -> BigInt {
        match self {
            RingSpec::Integers => x,
            RingSpec::IntegersMod(n) => x.mod_floor(&BigInt::from(*n)),
        }
    }

    pub fn from_i64(&self, x: i64) -> BigInt {
        self.reduce(BigInt::from(x))
    }

    pub fn add(&self, a: &BigInt, b: &BigInt) -> BigInt {
        self.reduce(a + b)
    }

    pub fn sub(&self, a: &BigInt, b: &BigInt) -> BigInt {
        self.reduce(a - b)
    }

    pub fn mul(&self, a: &BigInt, b: &BigInt) -> BigInt {
        self.reduce(a * b)
    }

    pub fn neg(&self, a: &BigInt) -> BigInt {
        self.reduce(-a)
    }

    pub fn is_unit(&self, a: &BigInt) -> bool {
        match self {
            RingSpec::Integers => a.abs().is_one(),
            RingSpec::IntegersMod(n) => a.gcd(&BigInt::from(*n)).is_one(),
        }
    }

    pub fn inverse(&self, a: &BigInt) -> Option<BigInt> {
        match self {
            RingSpec::Integers => {
                if a.is_one() || (-a).is_one() {
                    Some(a.clone())
                } else {
                    None
                }
            }
            RingSpec::IntegersMod(n) => {
                let m = BigInt::from(*n);
                let e = self.reduce(a.clone()).extended_gcd(&m);
                if e.gcd.is_one() {
                    Some(self.reduce(e.x))
                } else {
                    None
                }
            }
        }
    }

    /// Elements of a finite ring in canonical order.
    pub fn elements(&self) -> Result<Vec<BigInt>> {
        match self {
            RingSpec::Integers => Err(Error::Unsupported("cannot enumerate the integers".into())),
            RingSpec::IntegersMod(n) => Ok((0..*n).map(BigInt::from).collect()),
        }
    }

    pub fn units(&self) -> Result<Vec<BigInt>> {
        Ok(self.elements()?.into_iter().filter(|a| self.is_unit(a)).collect())
    }

    /// Signed representative in (-n/2, n/2], or the value itself over the integers.
    pub fn balanced(&self, a: &BigInt) -> BigInt {
        match self {
            RingSpec::Integers => a.clone(),
            RingSpec::IntegersMod(n) => {
                let m = BigInt::from(*n);
                let r = a.mod_floor(&m);
                if &r * 2 > m {
                    r - m
                } else {
                    r
                }
            }
        }
    }

    pub fn to_u64(&self, a: &BigInt) -> u64 {
        self.reduce(a.clone()).to_u64().expect("residue fits in u64")
    }

    pub fn is_zero(&self, a: &BigInt) -> bool {
        self.reduce(a.clone()).is_zero()
    }

    pub fn label(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for RingSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RingSpec::Integers => write!(f, "Z"),
            RingSpec::IntegersMod(n) if is_prime(*n) => write!(f, "F{n}"),
            RingSpec::IntegersMod(n) => write!(f, "Z/{n}"),
        }
    }
}

impl FromStr for RingSpec {
    type Err = Error;

    /// Accepts `Z`, `F<p>`, `Z/<n>` and `Zmod<n>`.
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        if t == "Z" || t == "ZZ" {
            return Ok(RingSpec::Integers);
        }
        let num = if let Some(r) = t.strip_prefix("Z/") {
            r
        } else if let Some(r) = t.strip_prefix("Zmod") {
            r
        } else if let Some(r) = t.strip_prefix('F') {
            let p: u64 = r.parse().map_err(|_| Error::Parse(format!("bad ring '{s}'")))?;
            if !is_prime(p) {
                return Err(Error::Invalid(format!("F{p}: {p} is not prime")));
            }
            return Ok(RingSpec::IntegersMod(p));
        } else {
            return Err(Error::Parse(format!("bad ring '{s}'")));
        };
        let n: u64 = num.parse().map_err(|_| Error::Parse(format!("bad ring '{s}'")))?;
        RingSpec::zmod(n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display() {
        assert_eq!("F3".parse::<RingSpec>().unwrap(), RingSpec::IntegersMod(3));
        assert_eq!("Z/4".parse::<RingSpec>().unwrap().to_string(), "Z/4");
        assert!("F4".parse::<RingSpec>().is_err());
        assert!("Z/1".parse::<RingSpec>().is_err());
    }

    #[test]
    fn inverses_mod() {
        let r = RingSpec::IntegersMod(9);
        assert_eq!(r.inverse(&BigInt::from(2)), Some(BigInt::from(5)));
        assert_eq!(r.inverse(&BigInt::from(3)), None);
        assert_eq!(r.units().unwrap().len(), 6);
    }
}
