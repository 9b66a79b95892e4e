use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::exactalg::snf::snf_full_pid;
use crate::exactalg::{Matrix, RingSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Flavor {
    Symmetric,
    Quadratic,
    Even,
    General,
}

impl fmt::Display for Flavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Flavor::Symmetric => "symmetric",
            Flavor::Quadratic => "quadratic",
            Flavor::Even => "even",
            Flavor::General => "general",
        };
        write!(f, "{s}")
    }
}

impl FromStr for Flavor {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "symmetric" | "sym" => Ok(Flavor::Symmetric),
            "quadratic" | "quad" => Ok(Flavor::Quadratic),
            "even" => Ok(Flavor::Even),
            "general" => Ok(Flavor::General),
            _ => Err(Error::Parse(format!("unknown flavor '{s}'"))),
        }
    }
}

/// User-supplied description of a general parameter over a finite ring.
/// `Q` is `Z^g / (columns of relations)`; elements are given in generator coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneralSpec {
    pub relations: Vec<Vec<i64>>,
    /// Coordinates of `tau([1])`.
    pub tau: Vec<i64>,
    /// `rho` of each generator, a ring element.
    pub rho: Vec<i64>,
    /// For every ring element `r` (in order `0..n`), a `g x g` matrix acting on coordinate columns.
    pub action: Vec<Vec<Vec<i64>>>,
}

/// Finite `Q` with all structure tabulated; elements are indices.
#[derive(Debug, Clone)]
pub struct GeneralQ {
    pub spec: GeneralSpec,
    moduli: Vec<u64>,
    // user coordinates -> canonical coordinates
    to_canon: Matrix,
    elements: Vec<Vec<u64>>,
    index: HashMap<Vec<u64>, usize>,
    add: Vec<Vec<usize>>,
    act: Vec<Vec<usize>>,
    tau: Vec<usize>,
    rho: Vec<u64>,
}

impl GeneralQ {
    pub fn size(&self) -> usize {
        self.elements.len()
    }

    fn canon(&self, coords: &[BigInt]) -> Vec<u64> {
        let col = Matrix::column(RingSpec::Integers, coords);
        let c = &self.to_canon * &col;
        self.moduli
            .iter()
            .enumerate()
            .map(|(j, &m)| c.get(j, 0).mod_floor(&BigInt::from(m)).to_u64().unwrap())
            .collect()
    }

    /// Element index of a vector in generator coordinates.
    pub fn from_coords(&self, coords: &[i64]) -> usize {
        let v: Vec<BigInt> = coords.iter().map(|&x| BigInt::from(x)).collect();
        self.index[&self.canon(&v)]
    }

    fn build(ring: RingSpec, spec: GeneralSpec) -> Result<GeneralQ> {
        let n = ring
            .modulus()
            .ok_or_else(|| Error::Unsupported("general form parameters need a finite ring".into()))?;
        let g = spec.tau.len();
        if spec.rho.len() != g || spec.relations.iter().any(|r| r.len() != g) {
            return Err(Error::Invalid("general parameter: generator counts disagree".into()));
        }
        if spec.action.len() != n as usize {
            return Err(Error::Invalid(format!("general parameter: need an action matrix for each of the {n} ring elements")));
        }
        let z = RingSpec::Integers;
        // relation matrix has one column per relation
        let rel = if spec.relations.is_empty() {
            Matrix::zeros(z, g, 0)
        } else {
            Matrix::from_rows(z, &spec.relations).transpose()
        };
        let sf = snf_full_pid(&rel);
        let mut keep = Vec::new();
        let mut moduli = Vec::new();
        for j in 0..g {
            let d = sf.diag.get(j).cloned().unwrap_or_else(BigInt::zero);
            if d.is_zero() {
                return Err(Error::Invalid("general parameter: Q must be finite".into()));
            }
            if d != BigInt::from(1) {
                keep.push(j);
                moduli.push(d.to_u64().unwrap());
            }
        }
        let to_canon = sf.u_inv.select_rows(&keep);
        let mut elements: Vec<Vec<u64>> = vec![Vec::new()];
        for &m in &moduli {
            elements = elements
                .into_iter()
                .flat_map(|e| (0..m).map(move |x| {
                    let mut e2 = e.clone();
                    e2.push(x);
                    e2
                }))
                .collect();
        }
        let index: HashMap<Vec<u64>, usize> = elements.iter().cloned().enumerate().map(|(i, e)| (e, i)).collect();
        let mut q = GeneralQ {
            spec: spec.clone(),
            moduli,
            to_canon,
            elements,
            index,
            add: Vec::new(),
            act: Vec::new(),
            tau: Vec::new(),
            rho: Vec::new(),
        };
        let size = q.elements.len();
        q.add = (0..size)
            .map(|a| {
                (0..size)
                    .map(|b| {
                        let s: Vec<u64> = q.elements[a]
                            .iter()
                            .zip(&q.elements[b])
                            .zip(&q.moduli)
                            .map(|((x, y), m)| (x + y) % m)
                            .collect();
                        q.index[&s]
                    })
                    .collect()
            })
            .collect();
        // a canonical element back in user coordinates
        let from_canon = sf.u.select_cols(&keep);
        let user = |e: &Vec<u64>| -> Vec<BigInt> {
            let col = Matrix::column(z, &e.iter().map(|&x| BigInt::from(x)).collect::<Vec<_>>());
            (&from_canon * &col).col_vec(0)
        };
        for r in 0..n as usize {
            let a = Matrix::from_rows(z, &spec.action[r]);
            if a.rows() != g || a.cols() != g {
                return Err(Error::Invalid("general parameter: action matrices must be g x g".into()));
            }
            let row: Vec<usize> = (0..size)
                .map(|i| {
                    let u = user(&q.elements[i]);
                    let img = &a * &Matrix::column(z, &u);
                    q.index[&q.canon(&img.col_vec(0))]
                })
                .collect();
            q.act.push(row);
        }
        let tau1 = q.from_coords(&spec.tau);
        // tau(m) = m * tau([1]) as a group element
        let mut t = Vec::with_capacity(n as usize);
        let mut acc = q.index[&vec![0; q.moduli.len()]];
        for _ in 0..n {
            t.push(acc);
            acc = q.add[acc][tau1];
        }
        q.tau = t;
        q.rho = (0..size)
            .map(|i| {
                let u = user(&q.elements[i]);
                let s: BigInt = u.iter().zip(&spec.rho).map(|(c, r)| c * BigInt::from(*r)).sum();
                ring.to_u64(&s)
            })
            .collect();
        Ok(q)
    }
}

/// A form parameter with `M = R` and involution `m -> eps * m`.
#[derive(Debug, Clone)]
pub struct FormParameter {
    pub ring: RingSpec,
    pub epsilon: i64,
    pub flavor: Flavor,
    general: Option<Arc<GeneralQ>>,
}

impl PartialEq for FormParameter {
    fn eq(&self, other: &Self) -> bool {
        self.ring == other.ring
            && self.epsilon == other.epsilon
            && self.flavor == other.flavor
            && self.general.as_ref().map(|g| &g.spec) == other.general.as_ref().map(|g| &g.spec)
    }
}
impl Eq for FormParameter {}

impl FormParameter {
    pub fn new(ring: RingSpec, flavor: Flavor, epsilon: i64) -> Result<Self> {
        if epsilon != 1 && epsilon != -1 {
            return Err(Error::Invalid(format!("epsilon must be +1 or -1, got {epsilon}")));
        }
        if flavor == Flavor::General {
            return Err(Error::Invalid("use FormParameter::general for the general flavor".into()));
        }
        Ok(FormParameter { ring, epsilon, flavor, general: None })
    }

    pub fn symmetric(ring: RingSpec) -> Self {
        Self::new(ring, Flavor::Symmetric, 1).unwrap()
    }

    pub fn quadratic(ring: RingSpec) -> Self {
        Self::new(ring, Flavor::Quadratic, 1).unwrap()
    }

    pub fn general(ring: RingSpec, epsilon: i64, spec: GeneralSpec) -> Result<Self> {
        if epsilon != 1 && epsilon != -1 {
            return Err(Error::Invalid(format!("epsilon must be +1 or -1, got {epsilon}")));
        }
        let q = GeneralQ::build(ring, spec)?;
        let p = FormParameter { ring, epsilon, flavor: Flavor::General, general: Some(Arc::new(q)) };
        p.validate()?;
        Ok(p)
    }

    pub fn general_q(&self) -> Option<&GeneralQ> {
        self.general.as_deref()
    }

    pub fn label(&self) -> String {
        format!("{} {} eps={:+}", self.ring, self.flavor, self.epsilon)
    }

    /// Modulus of `Q` when `Q` is modelled as a quotient of `R`; `None` for subgroups of `R`.
    fn quotient_modulus(&self) -> Option<BigInt> {
        match (self.flavor, self.epsilon) {
            (Flavor::Quadratic, 1) => self.ring.modulus().map(BigInt::from),
            (Flavor::Quadratic, _) => Some(match self.ring.modulus() {
                None => BigInt::from(2),
                Some(n) => BigInt::from(n).gcd(&BigInt::from(2)),
            }),
            _ => None,
        }
    }

    pub fn q_reduce(&self, x: BigInt) -> BigInt {
        match self.flavor {
            Flavor::General => x,
            Flavor::Quadratic => match self.quotient_modulus() {
                Some(m) => x.mod_floor(&m),
                None => x,
            },
            _ => self.ring.reduce(x),
        }
    }

    pub fn q_is_member(&self, x: &BigInt) -> bool {
        let r = self.ring;
        match (self.flavor, self.epsilon) {
            (Flavor::General, _) => x.to_usize().is_some_and(|i| i < self.general.as_ref().unwrap().size()),
            (Flavor::Quadratic, _) => self.q_reduce(x.clone()) == *x,
            (Flavor::Symmetric, e) => r.reduce(x.clone()) == *x && r.reduce(x * e) == *x,
            (Flavor::Even, 1) => {
                r.reduce(x.clone()) == *x
                    && match r.modulus() {
                        None => x.is_even(),
                        Some(n) => n % 2 == 1 || x.is_even(),
                    }
            }
            (Flavor::Even, _) => x.is_zero(),
        }
    }

    pub fn q_zero(&self) -> BigInt {
        match &self.general {
            Some(g) => BigInt::from(g.index[&vec![0; g.moduli.len()]]),
            None => BigInt::zero(),
        }
    }

    pub fn q_add(&self, a: &BigInt, b: &BigInt) -> BigInt {
        match &self.general {
            Some(g) => BigInt::from(g.add[idx(a)][idx(b)]),
            None => self.q_reduce(a + b),
        }
    }

    pub fn q_neg(&self, a: &BigInt) -> BigInt {
        match &self.general {
            Some(g) => {
                let i = idx(a);
                let z = g.index[&vec![0; g.moduli.len()]];
                BigInt::from((0..g.size()).find(|&j| g.add[i][j] == z).unwrap())
            }
            None => self.q_reduce(-a),
        }
    }

    /// Action of `r` (that is, of `r (x) r`) on `Q`.
    pub fn q_act(&self, r: &BigInt, q: &BigInt) -> BigInt {
        match &self.general {
            Some(g) => BigInt::from(g.act[self.ring.to_u64(r) as usize][idx(q)]),
            None => self.q_reduce(r * r * q),
        }
    }

    pub fn tau(&self, m: &BigInt) -> BigInt {
        match &self.general {
            Some(g) => BigInt::from(g.tau[self.ring.to_u64(m) as usize]),
            None => match (self.flavor, self.epsilon) {
                (Flavor::Symmetric, e) | (Flavor::Even, e) => self.ring.reduce(m + m * e),
                (Flavor::Quadratic, _) => self.q_reduce(m.clone()),
                (Flavor::General, _) => unreachable!(),
            },
        }
    }

    pub fn rho(&self, q: &BigInt) -> BigInt {
        match &self.general {
            Some(g) => BigInt::from(g.rho[idx(q)]),
            None => match self.flavor {
                Flavor::Quadratic => self.ring.reduce(q * (1 + self.epsilon)),
                _ => self.ring.reduce(q.clone()),
            },
        }
    }

    /// All elements of `Q` for finite rings.
    pub fn q_elements(&self) -> Result<Vec<BigInt>> {
        if let Some(g) = &self.general {
            return Ok((0..g.size()).map(BigInt::from).collect());
        }
        let n = self
            .ring
            .modulus()
            .ok_or_else(|| Error::Unsupported("Q is infinite over the integers".into()))?;
        Ok((0..n).map(BigInt::from).filter(|x| self.q_is_member(x) && self.q_reduce(x.clone()) == *x).collect())
    }

    /// `rho∘tau` equals the norm, and the quadratic defect of the action is `tau((r s) rho(q))`.
    pub fn validate(&self) -> Result<()> {
        let r = self.ring;
        let one = BigInt::from(1);
        let norm1 = r.reduce(&one + BigInt::from(self.epsilon));
        if self.rho(&self.tau(&one)) != norm1 {
            return Err(Error::Invalid(format!("{}: rho(tau(1)) != 1 + eps", self.label())));
        }
        if r.is_integers() {
            // canonical flavors: (r+s)^2 - r^2 - s^2 = 2rs and tau(rs rho(q)) = 2rs q on Q, by inspection
            return Ok(());
        }
        let elems = r.elements()?;
        let qs = self.q_elements()?;
        for q in &qs {
            if self.q_act(&one, q) != *q {
                return Err(Error::Invalid("1 must act trivially on Q".into()));
            }
            for a in &elems {
                for b in &elems {
                    let lhs = self.q_add(
                        &self.q_act(&r.add(a, b), q),
                        &self.q_neg(&self.q_add(&self.q_act(a, q), &self.q_act(b, q))),
                    );
                    let rhs = self.tau(&r.mul(&r.mul(a, b), &self.rho(q)));
                    if lhs != rhs {
                        return Err(Error::Invalid(format!(
                            "{}: axiom (r+s)q - rq - sq = tau(rs rho q) fails at r={a}, s={b}, q={q}",
                            self.label()
                        )));
                    }
                    if self.q_act(&r.mul(a, b), q) != self.q_act(a, &self.q_act(b, q)) {
                        return Err(Error::Invalid("action is not multiplicative".into()));
                    }
                }
                if r.reduce(self.rho(&self.q_act(a, q)) - a * a * self.rho(q)) != BigInt::zero() {
                    return Err(Error::Invalid("rho is not equivariant".into()));
                }
            }
            for q2 in &qs {
                let s = self.q_add(q, q2);
                if self.rho(&s) != r.add(&self.rho(q), &self.rho(q2)) {
                    return Err(Error::Invalid("rho is not additive".into()));
                }
            }
        }
        for m in &elems {
            if self.rho(&self.tau(m)) != r.reduce(m + m * self.epsilon) {
                return Err(Error::Invalid("rho∘tau is not the norm".into()));
            }
        }
        Ok(())
    }
}

fn idx(a: &BigInt) -> usize {
    a.to_usize().expect("Q index")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_flavors_validate() {
        for ring in [RingSpec::Integers, RingSpec::IntegersMod(2), RingSpec::IntegersMod(3), RingSpec::IntegersMod(4)] {
            for fl in [Flavor::Symmetric, Flavor::Quadratic, Flavor::Even] {
                for e in [1, -1] {
                    FormParameter::new(ring, fl, e).unwrap().validate().unwrap();
                }
            }
        }
    }

    #[test]
    fn general_reproduces_quadratic_f2() {
        // Q = Z/2, tau(1) = 1, rho = 0, r acts by r^2
        let spec = GeneralSpec {
            relations: vec![vec![2]],
            tau: vec![1],
            rho: vec![0],
            action: vec![vec![vec![0]], vec![vec![1]]],
        };
        let p = FormParameter::general(RingSpec::IntegersMod(2), 1, spec).unwrap();
        assert_eq!(p.q_elements().unwrap().len(), 2);
        let bad = GeneralSpec { relations: vec![vec![2]], tau: vec![1], rho: vec![1], action: vec![vec![vec![0]], vec![vec![1]]] };
        assert!(FormParameter::general(RingSpec::IntegersMod(2), 1, bad).is_err());
    }
}
