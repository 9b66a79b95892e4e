use std::collections::{BTreeMap, HashMap};

use rand::Rng;

use super::poset::FinPoset;
use crate::error::{Error, Result};
use crate::exactalg::{kernel, solve, try_inverse, Matrix, RingSpec};
use crate::qsurgery::random::random_unimodular;

/// A functor from a finite poset to free modules, given on covering relations.
#[derive(Debug, Clone)]
pub struct ModuleDiagram {
    poset: FinPoset,
    ring: RingSpec,
    ranks: Vec<usize>,
    transitions: BTreeMap<(usize, usize), Matrix>,
    maps: HashMap<(usize, usize), Matrix>,
}

impl ModuleDiagram {
    /// Checks shapes and functoriality: all chains between two elements compose to the same map.
    pub fn new(poset: FinPoset, ring: RingSpec, ranks: Vec<usize>, transitions: BTreeMap<(usize, usize), Matrix>) -> Result<Self> {
        let n = poset.len();
        if ranks.len() != n {
            return Err(Error::Shape(format!("{} ranks for {n} elements", ranks.len())));
        }
        let covers = poset.covering_pairs();
        if covers.len() != transitions.len() || covers.iter().any(|c| !transitions.contains_key(c)) {
            return Err(Error::Invalid("transitions must be given exactly on covering relations".into()));
        }
        for (&(x, y), m) in &transitions {
            if m.ring() != ring {
                return Err(Error::RingMismatch(format!("transition {x}->{y} over {}", m.ring())));
            }
            if m.rows() != ranks[y] || m.cols() != ranks[x] {
                return Err(Error::Shape(format!("transition {x}->{y} is {}x{}", m.rows(), m.cols())));
            }
        }
        let order = poset.linear_extension();
        let mut maps = HashMap::new();
        for x in 0..n {
            maps.insert((x, x), Matrix::identity(ring, ranks[x]));
            for &y in &order {
                if !poset.lt(x, y) {
                    continue;
                }
                let mut agreed: Option<Matrix> = None;
                for z in 0..n {
                    if !poset.leq(x, z) || !transitions.contains_key(&(z, y)) {
                        continue;
                    }
                    let m = &transitions[&(z, y)] * &maps[&(x, z)];
                    match &agreed {
                        None => agreed = Some(m),
                        Some(a) if *a == m => {}
                        Some(_) => {
                            return Err(Error::Invalid(format!(
                                "not functorial: two chains {} -> {} differ",
                                poset.label(x),
                                poset.label(y)
                            )))
                        }
                    }
                }
                maps.insert((x, y), agreed.ok_or_else(|| Error::Internal("no chain between comparable elements".into()))?);
            }
        }
        Ok(ModuleDiagram { poset, ring, ranks, transitions, maps })
    }

    /// The `[1]^r` cube `S -> (+)_{i in S} T_i` with coordinate inclusions.
    pub fn direct_sum_cube(ring: RingSpec, summands: &[usize]) -> Result<Self> {
        let r = summands.len();
        let poset = FinPoset::cube(1, r)?;
        let coords = poset.cube_coords()?.to_vec();
        let offsets = |c: &[usize]| -> Vec<Option<usize>> {
            let mut at = 0;
            (0..r)
                .map(|i| {
                    if c[i] == 1 {
                        at += summands[i];
                        Some(at - summands[i])
                    } else {
                        None
                    }
                })
                .collect()
        };
        let ranks: Vec<usize> = coords.iter().map(|c| (0..r).filter(|&i| c[i] == 1).map(|i| summands[i]).sum()).collect();
        let mut transitions = BTreeMap::new();
        for (x, y) in poset.covering_pairs() {
            let (ox, oy) = (offsets(&coords[x]), offsets(&coords[y]));
            let mut m = Matrix::zeros(ring, ranks[y], ranks[x]);
            for i in 0..r {
                if let (Some(a), Some(b)) = (ox[i], oy[i]) {
                    m.paste(b, a, &Matrix::identity(ring, summands[i]));
                }
            }
            transitions.insert((x, y), m);
        }
        Self::new(poset, ring, ranks, transitions)
    }

    pub fn poset(&self) -> &FinPoset {
        &self.poset
    }
    pub fn ring(&self) -> RingSpec {
        self.ring
    }
    pub fn rank_at(&self, x: usize) -> usize {
        self.ranks[x]
    }
    pub fn transitions(&self) -> &BTreeMap<(usize, usize), Matrix> {
        &self.transitions
    }

    /// The map `D(x) -> D(y)` for `x <= y`.
    pub fn map(&self, x: usize, y: usize) -> Option<&Matrix> {
        self.maps.get(&(x, y))
    }

    /// Same diagram in new bases `u_x` at every element: `t(x, y) -> u_y^-1 t u_x`.
    pub fn rebased(&self, bases: &[Matrix]) -> Result<Self> {
        let inv: Vec<Matrix> = bases
            .iter()
            .map(|u| try_inverse(u).ok_or_else(|| Error::Invalid("basis change is not invertible".into())))
            .collect::<Result<_>>()?;
        let transitions = self.transitions.iter().map(|(&(x, y), t)| ((x, y), &(&inv[y] * t) * &bases[x])).collect();
        Self::new(self.poset.clone(), self.ring, self.ranks.clone(), transitions)
    }

    fn at(&self, x: usize, y: usize) -> &Matrix {
        &self.maps[&(x, y)]
    }
}

/// Whether `phi` induces an isomorphism `coker(rel) -> target`, given `phi rel = 0`.
fn induces_iso(rel: &Matrix, phi: &Matrix) -> Result<bool> {
    if !(phi * rel).is_zero() {
        return Err(Error::Internal("comparison map does not kill the relations".into()));
    }
    let ring = phi.ring();
    if phi.rows() > 0 && solve(phi, &Matrix::identity(ring, phi.rows()))?.is_none() {
        return Ok(false);
    }
    let k = kernel(phi)?;
    if k.cols() == 0 {
        return Ok(true);
    }
    Ok(solve(rel, &k)?.is_some())
}

/// Condition (3): every side-length-1 square `A -> B, C -> D` inside the cube has
/// `coker(A -> B (+) C) -> D` an isomorphism.
pub fn squares_are_pushouts(d: &ModuleDiagram) -> Result<bool> {
    let p = d.poset();
    let (a, r) = p.cube_shape()?;
    let coords = p.cube_coords()?;
    for base in 0..p.len() {
        let c = &coords[base];
        for s in 0..r {
            for t in s + 1..r {
                for vs in c[s] + 1..=a {
                    for vt in c[t] + 1..=a {
                        let at = |xs: usize, xt: usize| {
                            let mut e = c.clone();
                            e[s] = xs;
                            e[t] = xt;
                            p.index_of(&e).expect("cube element")
                        };
                        let (ia, ib, ic, id) = (base, at(vs, c[t]), at(c[s], vt), at(vs, vt));
                        let rel = Matrix::vstack(&[d.at(ia, ib), &d.at(ia, ic).neg_ref()])?;
                        let phi = Matrix::hstack(&[d.at(ib, id), d.at(ic, id)])?;
                        if !induces_iso(&rel, &phi)? {
                            return Ok(false);
                        }
                    }
                }
            }
        }
    }
    Ok(true)
}

/// Condition (1): at every element `g`, the colimit over elements below `g` supported in at most
/// one coordinate maps isomorphically to `D(g)`.
pub fn kan_extended_from_axes(d: &ModuleDiagram) -> Result<bool> {
    let p = d.poset();
    p.cube_shape()?;
    let axes = p.axis_elements()?;
    let ring = d.ring();
    for g in 0..p.len() {
        let below: Vec<usize> = axes.iter().copied().filter(|&h| p.leq(h, g)).collect();
        let mut offset = HashMap::new();
        let mut total = 0;
        for &h in &below {
            offset.insert(h, total);
            total += d.rank_at(h);
        }
        let mut rel_cols: Vec<Matrix> = Vec::new();
        for &h in &below {
            for &h2 in &below {
                let direct = p.lt(h, h2) && !below.iter().any(|&z| p.lt(h, z) && p.lt(z, h2));
                if !direct {
                    continue;
                }
                // x in D(h) is identified with its image in D(h2)
                let mut m = Matrix::zeros(ring, total, d.rank_at(h));
                m.paste(offset[&h], 0, &Matrix::identity(ring, d.rank_at(h)));
                m.paste(offset[&h2], 0, &d.at(h, h2).neg_ref());
                rel_cols.push(m);
            }
        }
        let rel = if rel_cols.is_empty() {
            Matrix::zeros(ring, total, 0)
        } else {
            Matrix::hstack(&rel_cols.iter().collect::<Vec<_>>())?
        };
        let mut phi = Matrix::zeros(ring, d.rank_at(g), total);
        for &h in &below {
            phi.paste(0, offset[&h], d.at(h, g));
        }
        if !induces_iso(&rel, &phi)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Strongly cocartesian cube diagram, decided through condition (3).
pub fn is_strongly_cocartesian(d: &ModuleDiagram) -> Result<bool> {
    squares_are_pushouts(d)
}

/// How a random test diagram is produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiagramKind {
    /// Left Kan extension of random axis data (over a field: arbitrary maps; over Z: direct sums).
    KanExtended,
    /// A Kan-extended diagram with a stray summand at one element of support at least two.
    Perturbed,
    /// Random transitions along a free chain, usually not cocartesian.
    Chain,
}

fn random_matrix(ring: RingSpec, rows: usize, cols: usize, rng: &mut impl Rng) -> Matrix {
    Matrix::from_fn(ring, rows, cols, |_, _| ring.from_i64(rng.gen_range(-2..=2)))
}

/// Random diagram on `[a]^r` of the given kind, in scrambled bases.
pub fn random_cube_diagram(a: usize, r: usize, ring: RingSpec, kind: DiagramKind, rng: &mut impl Rng) -> Result<ModuleDiagram> {
    let base = match kind {
        DiagramKind::KanExtended | DiagramKind::Perturbed => kan_extension(a, r, ring, rng)?,
        DiagramKind::Chain => chain_diagram(a, r, ring, rng)?,
    };
    let mut d = base;
    if kind == DiagramKind::Perturbed {
        let coords = d.poset().cube_coords()?.to_vec();
        let spots: Vec<usize> = (0..coords.len()).filter(|&i| coords[i].iter().filter(|&&v| v > 0).count() >= 2).collect();
        if !spots.is_empty() {
            d = with_stray_summand(&d, spots[rng.gen_range(0..spots.len())])?;
        }
    }
    let bases: Vec<Matrix> = (0..d.poset().len()).map(|x| random_unimodular(ring, d.rank_at(x), rng)).collect();
    d.rebased(&bases)
}

fn with_stray_summand(d: &ModuleDiagram, g: usize) -> Result<ModuleDiagram> {
    let ring = d.ring();
    let mut ranks = d.ranks.clone();
    ranks[g] += 1;
    let transitions = d
        .transitions
        .iter()
        .map(|(&(x, y), t)| {
            let t = if y == g {
                Matrix::vstack(&[t, &Matrix::zeros(ring, 1, t.cols())]).expect("shapes")
            } else if x == g {
                Matrix::hstack(&[t, &Matrix::zeros(ring, t.rows(), 1)]).expect("shapes")
            } else {
                t.clone()
            };
            ((x, y), t)
        })
        .collect();
    ModuleDiagram::new(d.poset.clone(), ring, ranks, transitions)
}

/// Chains `A -> B_{s,1} -> ... -> B_{s,a}` per coordinate, extended by amalgamated sums over `A`.
fn kan_extension(a: usize, r: usize, ring: RingSpec, rng: &mut impl Rng) -> Result<ModuleDiagram> {
    let poset = FinPoset::cube(a, r)?;
    let coords = poset.cube_coords()?.to_vec();
    // over Z amalgamation can leave torsion, so the apex is zero there
    let dim_a = if ring.is_field() { rng.gen_range(0..=2) } else { 0 };
    let mut dims = vec![vec![dim_a; a + 1]; r];
    let mut steps: Vec<Vec<Matrix>> = vec![Vec::new(); r];
    for s in 0..r {
        for j in 1..=a {
            dims[s][j] = dims[s][j - 1] + rng.gen_range(0..=2);
            steps[s].push(random_matrix(ring, dims[s][j], dims[s][j - 1], rng));
        }
    }
    // composite A -> B_{s,j}
    let from_apex = |s: usize, j: usize| -> Matrix {
        let mut m = Matrix::identity(ring, dim_a);
        for t in 0..j {
            m = &steps[s][t] * &m;
        }
        m
    };
    let support = |c: &[usize]| -> Vec<usize> { (0..r).filter(|&s| c[s] > 0).collect() };
    let sum_dim = |c: &[usize]| -> usize { support(c).iter().map(|&s| dims[s][c[s]]).sum() };

    // quotient E_g -> X(g) and a section of it
    let mut quotient = Vec::new();
    let mut section = Vec::new();
    for c in &coords {
        let supp = support(c);
        if supp.len() <= 1 {
            let e = if supp.is_empty() { dim_a } else { sum_dim(c) };
            quotient.push(Matrix::identity(ring, e));
            section.push(Matrix::identity(ring, e));
            continue;
        }
        let e = sum_dim(c);
        let mut glue = Vec::new();
        let mut offs = Vec::new();
        let mut at = 0;
        for &s in &supp {
            offs.push(at);
            at += dims[s][c[s]];
        }
        for k in 1..supp.len() {
            let mut m = Matrix::zeros(ring, e, dim_a);
            m.paste(offs[0], 0, &from_apex(supp[0], c[supp[0]]));
            m.paste(offs[k], 0, &from_apex(supp[k], c[supp[k]]).neg_ref());
            glue.push(m);
        }
        let glue = Matrix::hstack(&glue.iter().collect::<Vec<_>>())?;
        let q = kernel(&glue.transpose())?.transpose();
        let sec = solve(&q, &Matrix::identity(ring, q.rows()))?
            .ok_or_else(|| Error::Internal("quotient map has no section".into()))?;
        quotient.push(q);
        section.push(sec);
    }
    let ranks: Vec<usize> = quotient.iter().map(|q| q.rows()).collect();
    let mut transitions = BTreeMap::new();
    for (x, y) in poset.covering_pairs() {
        let (cx, cy) = (&coords[x], &coords[y]);
        let s0 = (0..r).find(|&s| cx[s] != cy[s]).expect("cover changes one coordinate");
        let (sx, sy) = (support(cx), support(cy));
        let mut phi = Matrix::zeros(ring, sum_dim(cy), if sx.is_empty() { dim_a } else { sum_dim(cx) });
        let offset_in = |supp: &[usize], c: &[usize], s: usize| -> usize {
            supp.iter().take_while(|&&t| t != s).map(|&t| dims[t][c[t]]).sum()
        };
        if sx.is_empty() {
            phi.paste(offset_in(&sy, cy, s0), 0, &from_apex(s0, cy[s0]));
        } else {
            for &s in &sx {
                let block = if s == s0 { steps[s][cx[s]].clone() } else { Matrix::identity(ring, dims[s][cx[s]]) };
                phi.paste(offset_in(&sy, cy, s), offset_in(&sx, cx, s), &block);
            }
        }
        transitions.insert((x, y), &(&quotient[y] * &phi) * &section[x]);
    }
    ModuleDiagram::new(poset, ring, ranks, transitions)
}

/// Constant rank with one random matrix per height, so every square commutes.
fn chain_diagram(a: usize, r: usize, ring: RingSpec, rng: &mut impl Rng) -> Result<ModuleDiagram> {
    let poset = FinPoset::cube(a, r)?;
    let coords = poset.cube_coords()?.to_vec();
    let top = a * r;
    let width = rng.gen_range(1..=2);
    let mut level: Vec<Matrix> = Vec::new();
    for _ in 0..top {
        level.push(random_matrix(ring, width, width, rng));
    }
    let ranks = vec![width; coords.len()];
    let mut transitions = BTreeMap::new();
    for (x, y) in poset.covering_pairs() {
        let h: usize = coords[x].iter().sum();
        transitions.insert((x, y), level[h].clone());
    }
    ModuleDiagram::new(poset, ring, ranks, transitions)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn z() -> RingSpec {
        RingSpec::Integers
    }

    fn square(ranks: [usize; 4], ab: Vec<Vec<i64>>, ac: Vec<Vec<i64>>, bd: Vec<Vec<i64>>, cd: Vec<Vec<i64>>) -> ModuleDiagram {
        let p = FinPoset::cube(1, 2).unwrap();
        let ring = z();
        let idx = |c: [usize; 2]| p.index_of(&c).unwrap();
        let mk = |rows: usize, cols: usize, v: Vec<Vec<i64>>| {
            if rows == 0 || cols == 0 {
                Matrix::zeros(ring, rows, cols)
            } else {
                Matrix::from_rows(ring, &v)
            }
        };
        let (a, b, c, d) = (idx([0, 0]), idx([1, 0]), idx([0, 1]), idx([1, 1]));
        let mut ranks_v = vec![0; 4];
        ranks_v[a] = ranks[0];
        ranks_v[b] = ranks[1];
        ranks_v[c] = ranks[2];
        ranks_v[d] = ranks[3];
        let mut t = BTreeMap::new();
        t.insert((a, b), mk(ranks[1], ranks[0], ab));
        t.insert((a, c), mk(ranks[2], ranks[0], ac));
        t.insert((b, d), mk(ranks[3], ranks[1], bd));
        t.insert((c, d), mk(ranks[3], ranks[2], cd));
        ModuleDiagram::new(p, ring, ranks_v, t).unwrap()
    }

    #[test]
    fn coordinate_inclusions_into_a_plane() {
        let d = square([0, 1, 1, 2], vec![], vec![], vec![vec![1], vec![0]], vec![vec![0], vec![1]]);
        assert!(is_strongly_cocartesian(&d).unwrap());
        assert!(kan_extended_from_axes(&d).unwrap());
    }

    #[test]
    fn identity_square() {
        let one = || vec![vec![1]];
        let d = square([1, 1, 1, 1], one(), one(), one(), one());
        assert!(is_strongly_cocartesian(&d).unwrap());
        assert!(kan_extended_from_axes(&d).unwrap());
    }

    #[test]
    fn rank_three_corner_is_not_a_pushout() {
        let d = square([0, 1, 1, 3], vec![], vec![], vec![vec![1], vec![0], vec![0]], vec![vec![0], vec![1], vec![0]]);
        assert!(!is_strongly_cocartesian(&d).unwrap());
        assert!(!kan_extended_from_axes(&d).unwrap());
    }

    #[test]
    fn non_commuting_square_is_rejected() {
        let p = FinPoset::cube(1, 2).unwrap();
        let mut t = BTreeMap::new();
        for (x, y) in p.covering_pairs() {
            let v = if (x, y) == p.covering_pairs()[0] { 2 } else { 1 };
            t.insert((x, y), Matrix::from_rows(z(), &[vec![v]]));
        }
        assert!(ModuleDiagram::new(p, z(), vec![1; 4], t).is_err());
    }

    #[test]
    fn non_cube_is_an_error() {
        let t = FinPoset::cube(1, 1).unwrap().twisted_arrows().unwrap();
        let covers = t.covering_pairs();
        let trans = covers.iter().map(|&c| (c, Matrix::identity(z(), 1))).collect();
        let d = ModuleDiagram::new(t, z(), vec![1; 3], trans).unwrap();
        assert!(is_strongly_cocartesian(&d).is_err());
    }

    #[test]
    fn direct_sum_cubes_are_strongly_cocartesian() {
        for summands in [vec![1, 2], vec![2, 0, 1], vec![1, 1, 1]] {
            let d = ModuleDiagram::direct_sum_cube(z(), &summands).unwrap();
            assert!(is_strongly_cocartesian(&d).unwrap());
        }
    }

    #[test]
    fn conditions_agree_on_random_cubes() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f5 = RingSpec::zmod(5).unwrap();
        let mut seen = [0usize; 2];
        for i in 0..60 {
            let kind = [DiagramKind::KanExtended, DiagramKind::Perturbed, DiagramKind::Chain][i % 3];
            let ring = if i % 2 == 0 { f5 } else { z() };
            let d = random_cube_diagram(1 + i % 2, 2 + i % 2, ring, kind, &mut rng).unwrap();
            let c3 = squares_are_pushouts(&d).unwrap();
            assert_eq!(c3, kan_extended_from_axes(&d).unwrap(), "instance {i}");
            if kind == DiagramKind::KanExtended {
                assert!(c3, "instance {i}");
            }
            seen[c3 as usize] += 1;
        }
        assert!(seen[0] > 0 && seen[1] > 0);
    }
}
