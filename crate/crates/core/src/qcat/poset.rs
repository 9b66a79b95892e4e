use crate::error::{Error, Result};

/// Finite poset with the order relation stored as a bit matrix (`leq[x]` has bit `y` iff `x <= y`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FinPoset {
    labels: Vec<String>,
    leq: Vec<Vec<u64>>,
    /// Present for cubes `[a]^r` and their subposets: the function `S -> [a]` of each element.
    coords: Option<Vec<Vec<usize>>>,
    side: Option<usize>,
}

fn bitset(n: usize) -> Vec<u64> {
    vec![0; n.div_ceil(64).max(1)]
}

impl FinPoset {
    /// Builds from an explicit relation and checks reflexivity, antisymmetry and transitivity.
    pub fn new(labels: Vec<String>, relation: impl Fn(usize, usize) -> bool) -> Result<Self> {
        let n = labels.len();
        let mut leq = vec![bitset(n); n];
        for (x, row) in leq.iter_mut().enumerate() {
            for y in 0..n {
                if relation(x, y) {
                    row[y / 64] |= 1 << (y % 64);
                }
            }
        }
        let p = FinPoset { labels, leq, coords: None, side: None };
        p.validate()?;
        Ok(p)
    }

    /// `[a]^r`: functions `{0..r} -> {0..a}` ordered pointwise, in lexicographic order.
    pub fn cube(a: usize, r: usize) -> Result<Self> {
        let mut coords = vec![Vec::new()];
        for _ in 0..r {
            coords = coords
                .into_iter()
                .flat_map(|c: Vec<usize>| {
                    (0..=a).map(move |v| {
                        let mut c = c.clone();
                        c.push(v);
                        c
                    })
                })
                .collect();
        }
        let labels = coords.iter().map(|c| format!("{c:?}")).collect();
        let cc = coords.clone();
        let mut p = Self::new(labels, |x, y| cc[x].iter().zip(&cc[y]).all(|(u, v)| u <= v))?;
        p.coords = Some(coords);
        p.side = Some(a);
        Ok(p)
    }

    /// Twisted arrows: pairs `x <= y`, with `(x, y) <= (x', y')` iff `x' <= x` and `y <= y'`.
    pub fn twisted_arrows(&self) -> Result<Self> {
        let n = self.len();
        let pairs: Vec<(usize, usize)> =
            (0..n).flat_map(|x| (0..n).map(move |y| (x, y))).filter(|&(x, y)| self.leq(x, y)).collect();
        let labels = pairs.iter().map(|&(x, y)| format!("{}->{}", self.labels[x], self.labels[y])).collect();
        Self::new(labels, |i, j| {
            let (x, y) = pairs[i];
            let (u, v) = pairs[j];
            self.leq(u, x) && self.leq(y, v)
        })
    }

    /// Full subposet on the given elements (in the given order).
    pub fn subposet(&self, elems: &[usize]) -> Result<Self> {
        let labels = elems.iter().map(|&i| self.labels[i].clone()).collect();
        let mut p = Self::new(labels, |i, j| self.leq(elems[i], elems[j]))?;
        p.coords = self.coords.as_ref().map(|c| elems.iter().map(|&i| c[i].clone()).collect());
        p.side = self.side;
        Ok(p)
    }

    /// Elements of a cube supported in at most one coordinate.
    pub fn axis_elements(&self) -> Result<Vec<usize>> {
        let coords = self.cube_coords()?;
        Ok((0..self.len()).filter(|&i| coords[i].iter().filter(|&&v| v > 0).count() <= 1).collect())
    }

    /// The subposet of [`FinPoset::axis_elements`].
    pub fn axis_subposet(&self) -> Result<Self> {
        self.subposet(&self.axis_elements()?)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, x: usize) -> &str {
        &self.labels[x]
    }

    pub fn leq(&self, x: usize, y: usize) -> bool {
        self.leq[x][y / 64] >> (y % 64) & 1 == 1
    }

    pub fn lt(&self, x: usize, y: usize) -> bool {
        x != y && self.leq(x, y)
    }

    /// `x < y` with nothing strictly in between.
    pub fn covers(&self, x: usize, y: usize) -> bool {
        self.lt(x, y) && !(0..self.len()).any(|z| self.lt(x, z) && self.lt(z, y))
    }

    pub fn covering_pairs(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        (0..n).flat_map(|x| (0..n).map(move |y| (x, y))).filter(|&(x, y)| self.covers(x, y)).collect()
    }

    /// Elements in an order compatible with `<=`.
    pub fn linear_extension(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by_key(|&x| (0..self.len()).filter(|&z| self.lt(z, x)).count());
        order
    }

    /// Side length and coordinates when this is a full cube `[a]^r`.
    pub fn cube_shape(&self) -> Result<(usize, usize)> {
        let coords = self.cube_coords()?;
        let a = self.side.ok_or_else(|| Error::Invalid("not a cube poset".into()))?;
        let r = coords.first().map_or(0, |c| c.len());
        if coords.len() != (a + 1).pow(r as u32) {
            return Err(Error::Invalid("subposet of a cube, not a full cube".into()));
        }
        Ok((a, r))
    }

    pub fn cube_coords(&self) -> Result<&[Vec<usize>]> {
        self.coords.as_deref().ok_or_else(|| Error::Invalid("not a cube poset".into()))
    }

    /// Index of a cube element by its coordinates.
    pub fn index_of(&self, c: &[usize]) -> Option<usize> {
        self.coords.as_ref()?.iter().position(|x| x == c)
    }

    fn validate(&self) -> Result<()> {
        let n = self.len();
        for x in 0..n {
            if !self.leq(x, x) {
                return Err(Error::Invalid(format!("not reflexive at {}", self.labels[x])));
            }
            for y in 0..n {
                if x != y && self.leq(x, y) && self.leq(y, x) {
                    return Err(Error::Invalid(format!("not antisymmetric at {}, {}", self.labels[x], self.labels[y])));
                }
                if !self.leq(x, y) {
                    continue;
                }
                for z in 0..n {
                    if self.leq(y, z) && !self.leq(x, z) {
                        return Err(Error::Invalid(format!("not transitive at {}", self.labels[y])));
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cube_sizes_and_covers() {
        let c = FinPoset::cube(2, 2).unwrap();
        assert_eq!(c.len(), 9);
        // each cover raises one coordinate by one: 2 * 3 * 2
        assert_eq!(c.covering_pairs().len(), 12);
        assert_eq!(c.cube_shape().unwrap(), (2, 2));
        assert_eq!(c.axis_elements().unwrap().len(), 5);
    }

    #[test]
    fn twisted_arrows_of_a_chain() {
        // TwAr([1]) = {0->0, 0->1, 1->1} with both identities below 0->1
        let t = FinPoset::cube(1, 1).unwrap().twisted_arrows().unwrap();
        assert_eq!(t.len(), 3);
        assert_eq!(t.covering_pairs().len(), 2);
        assert!(t.cube_shape().is_err());
    }

    #[test]
    fn rejects_non_orders() {
        let labels = vec!["a".to_string(), "b".to_string()];
        assert!(FinPoset::new(labels.clone(), |_, _| true).is_err());
        assert!(FinPoset::new(labels, |x, y| x < y).is_err());
    }
}
