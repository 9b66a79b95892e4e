use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};

/// A morphism with its endpoints.
#[derive(Debug, Clone)]
pub struct Arrow<M> {
    pub source: usize,
    pub target: usize,
    pub payload: M,
}

/// A finite category with explicit composition table. Morphisms are global indices;
/// `compose(f, g)` is `g . f` for `f: x -> y`, `g: y -> z`.
#[derive(Debug, Clone)]
pub struct FinCategory<O, M> {
    objects: Vec<O>,
    arrows: Vec<Arrow<M>>,
    homs: BTreeMap<(usize, usize), Vec<usize>>,
    identities: Vec<usize>,
    /// Dense `arrows x arrows` table; `NONE` where not composable.
    composition: Vec<u32>,
}

const NONE: u32 = u32::MAX;
/// Largest number of arrows for the dense composition table.
pub const MAX_ARROWS: usize = 1 << 13;

/// Counts from the exhaustive law check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct LawReport {
    pub composable_pairs: usize,
    pub associativity_triples: usize,
}

impl<O, M> FinCategory<O, M> {
    /// Assembles and verifies unitality and associativity on every composable pair and triple.
    pub fn new(
        objects: Vec<O>,
        arrows: Vec<Arrow<M>>,
        identities: Vec<usize>,
        composition: HashMap<(usize, usize), usize>,
    ) -> Result<(Self, LawReport)> {
        let mut homs: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for (f, a) in arrows.iter().enumerate() {
            if a.source >= objects.len() || a.target >= objects.len() {
                return Err(Error::Invalid(format!("arrow {f} has an endpoint out of range")));
            }
            homs.entry((a.source, a.target)).or_default().push(f);
        }
        let n = arrows.len();
        if n > MAX_ARROWS {
            return Err(Error::CapExceeded(format!("{n} arrows, above {MAX_ARROWS}")));
        }
        let mut table = vec![NONE; n * n];
        for ((f, g), h) in composition {
            if f >= n || g >= n || h >= n {
                return Err(Error::Invalid(format!("composition entry ({f}, {g}) -> {h} out of range")));
            }
            table[f * n + g] = h as u32;
        }
        let cat = FinCategory { objects, arrows, homs, identities, composition: table };
        let report = cat.check_laws()?;
        Ok((cat, report))
    }

    fn check_laws(&self) -> Result<LawReport> {
        let n = self.objects.len();
        if self.identities.len() != n {
            return Err(Error::Invalid("one identity per object required".into()));
        }
        for (x, &id) in self.identities.iter().enumerate() {
            let a = self.arrows.get(id).ok_or_else(|| Error::Invalid("identity out of range".into()))?;
            if a.source != x || a.target != x {
                return Err(Error::Invalid(format!("identity of object {x} is not an endomorphism of it")));
            }
        }
        let mut report = LawReport::default();
        for f in 0..self.arrows.len() {
            let (x, y) = (self.arrows[f].source, self.arrows[f].target);
            if self.compose(self.identities[x], f)? != f || self.compose(f, self.identities[y])? != f {
                return Err(Error::Invalid(format!("identity law fails at arrow {f}")));
            }
            for z in 0..n {
                for &g in self.hom(y, z) {
                    let gf = self.compose(f, g)?;
                    if self.arrows[gf].source != x || self.arrows[gf].target != z {
                        return Err(Error::Invalid(format!("composite of {f} and {g} has wrong endpoints")));
                    }
                    report.composable_pairs += 1;
                    for w in 0..n {
                        for &h in self.hom(z, w) {
                            if self.compose(gf, h)? != self.compose(f, self.compose(g, h)?)? {
                                return Err(Error::Invalid(format!("associativity fails at ({f}, {g}, {h})")));
                            }
                            report.associativity_triples += 1;
                        }
                    }
                }
            }
        }
        if report.composable_pairs != self.composition.iter().filter(|&&h| h != NONE).count() {
            return Err(Error::Invalid("composition table has entries for non-composable pairs".into()));
        }
        Ok(report)
    }

    pub fn objects(&self) -> &[O] {
        &self.objects
    }
    pub fn arrow(&self, f: usize) -> &Arrow<M> {
        &self.arrows[f]
    }
    pub fn arrow_count(&self) -> usize {
        self.arrows.len()
    }
    pub fn identity(&self, x: usize) -> usize {
        self.identities[x]
    }

    pub fn hom(&self, x: usize, y: usize) -> &[usize] {
        self.homs.get(&(x, y)).map_or(&[], |v| v.as_slice())
    }

    /// `g . f`.
    pub fn compose(&self, f: usize, g: usize) -> Result<usize> {
        let n = self.arrows.len();
        match (f < n && g < n).then(|| self.composition[f * n + g]) {
            Some(h) if h != NONE => Ok(h as usize),
            _ => Err(Error::Invalid(format!("arrows {f} and {g} are not composable"))),
        }
    }

    /// Connected components under `Hom(x, y)` nonempty, symmetrized; each sorted, ordered by least element.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.objects.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while parent[r] != r {
                r = parent[r];
            }
            let mut y = x;
            while parent[y] != r {
                let next = parent[y];
                parent[y] = r;
                y = next;
            }
            r
        }
        for &(x, y) in self.homs.keys() {
            let (rx, ry) = (find(&mut parent, x), find(&mut parent, y));
            if rx != ry {
                parent[rx.max(ry)] = rx.min(ry);
            }
        }
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for x in 0..n {
            let r = find(&mut parent, x);
            groups.entry(r).or_default().push(x);
        }
        groups.into_values().collect()
    }

    /// Sizes of the nonempty hom-sets.
    pub fn hom_sizes(&self) -> impl Iterator<Item = ((usize, usize), usize)> + '_ {
        self.homs.iter().map(|(&k, v)| (k, v.len()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn discrete_category_has_singleton_components() {
        let arrows = (0..3).map(|x| Arrow { source: x, target: x, payload: () }).collect();
        let comp = (0..3).map(|f| ((f, f), f)).collect();
        let (c, report) = FinCategory::new(vec!['a', 'b', 'c'], arrows, vec![0, 1, 2], comp).unwrap();
        assert_eq!(c.components(), vec![vec![0], vec![1], vec![2]]);
        assert_eq!(report.composable_pairs, 3);
    }

    #[test]
    fn broken_unit_is_rejected() {
        // object 0 with two endomorphisms where the claimed identity is not a unit
        let arrows = vec![Arrow { source: 0, target: 0, payload: () }, Arrow { source: 0, target: 0, payload: () }];
        let comp = [((0, 0), 0), ((0, 1), 0), ((1, 0), 0), ((1, 1), 1)].into_iter().collect();
        assert!(FinCategory::new(vec![()], arrows, vec![0], comp).is_err());
    }

    #[test]
    fn arrow_joins_components() {
        let arrows = vec![
            Arrow { source: 0, target: 0, payload: () },
            Arrow { source: 1, target: 1, payload: () },
            Arrow { source: 0, target: 1, payload: () },
        ];
        let comp = [((0, 0), 0), ((1, 1), 1), ((0, 2), 2), ((2, 1), 2)].into_iter().collect();
        let (c, _) = FinCategory::new(vec![(), ()], arrows, vec![0, 1], comp).unwrap();
        assert_eq!(c.components(), vec![vec![0, 1]]);
    }
}
