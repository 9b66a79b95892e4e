use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use super::category::{Arrow, FinCategory, LawReport};
use crate::error::{Error, Result};
use crate::exactalg::snf::field::rref;
use crate::exactalg::{Matrix, RingSpec};
use crate::formcore::{class_label, classes, witt_group, Flavor, FormParameter, UnimodularForm};

type Rows = Vec<Vec<u64>>;

/// An object: the canonical representative of an isometry class.
#[derive(Debug, Clone)]
pub struct QObject {
    pub form: UnimodularForm,
    pub key: Vec<u64>,
    pub label: String,
}

/// Canonical representative of a span class `source <-p- w -i-> target`: `w` is the image of `i`,
/// whose basis (the columns of `i`) is the reduced row echelon basis of that subspace.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpanMorphism {
    pub source: usize,
    pub target: usize,
    /// `source rank x middle rank`.
    pub p: Matrix,
    /// `target rank x middle rank`.
    pub i: Matrix,
}

impl SpanMorphism {
    pub fn middle_rank(&self) -> usize {
        self.p.cols()
    }
}

pub type HermitianQ = FinCategory<QObject, SpanMorphism>;

/// Largest rank cap accepted for a prime field of characteristic `p`.
pub fn max_rank_cap(p: u64) -> usize {
    match p {
        2 => 4,
        3 => 3,
        _ => 2,
    }
}

/// Build statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QReport {
    pub objects: usize,
    pub arrows: usize,
    pub laws: LawReport,
}

/// Objects, span classes and composition of the hermitian Q-construction over a prime field,
/// with every composite checked admissible and the category laws checked exhaustively.
pub fn build_hermitian_q(param: &FormParameter, rank_cap: usize, jobs: usize) -> Result<(HermitianQ, QReport)> {
    let p = check_param(param)?;
    if rank_cap > max_rank_cap(p) {
        return Err(Error::CapExceeded(format!("rank cap {rank_cap} above {} over F{p}", max_rank_cap(p))));
    }
    let objects: Vec<QObject> = classes(param, rank_cap)?
        .into_iter()
        .flatten()
        .map(|c| QObject { label: class_label(&c.form), form: c.form, key: c.key })
        .collect();
    let packed: Vec<PackedForm> = objects.iter().map(|o| PackedForm::new(&o.form, p)).collect::<Result<_>>()?;

    let pairs: Vec<(usize, usize)> = (0..objects.len())
        .flat_map(|x| (0..objects.len()).map(move |y| (x, y)))
        .filter(|&(x, y)| {
            let (a, b) = (packed[x].rank, packed[y].rank);
            a <= b && (a + b) % 2 == 0
        })
        .collect();
    let found: Mutex<Vec<((usize, usize), Result<Vec<Span>>)>> = Mutex::new(Vec::new());
    let next = AtomicUsize::new(0);
    std::thread::scope(|s| {
        for _ in 0..jobs.max(1) {
            s.spawn(|| loop {
                let t = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(x, y)) = pairs.get(t) else { break };
                let spans = enumerate_spans(&packed[x], &packed[y], p);
                found.lock().expect("no poisoning").push(((x, y), spans));
            });
        }
    });
    let mut found = found.into_inner().expect("no poisoning");
    found.sort_by_key(|(k, _)| *k);

    let mut arrows = Vec::new();
    let mut index: HashMap<(usize, usize, Span), usize> = HashMap::new();
    for ((x, y), spans) in found {
        for sp in spans? {
            index.insert((x, y, sp.clone()), arrows.len());
            arrows.push(Arrow { source: x, target: y, payload: sp });
        }
    }
    let mut identities = Vec::new();
    for (x, o) in packed.iter().enumerate() {
        let id = Span::identity(o.rank);
        identities.push(*index.get(&(x, x, id)).ok_or_else(|| Error::Internal("identity span not enumerated".into()))?);
    }
    let mut by_source: HashMap<usize, Vec<usize>> = HashMap::new();
    for (g, a) in arrows.iter().enumerate() {
        by_source.entry(a.source).or_default().push(g);
    }
    let mut composition = HashMap::new();
    for (f, a) in arrows.iter().enumerate() {
        for &g in by_source.get(&a.target).map_or(&[][..], |v| v.as_slice()) {
            let b = &arrows[g];
            let c = compose_spans(&a.payload, &b.payload, packed[a.target].rank, p)?;
            check_admissible(&packed[a.source], &packed[b.target], &c, p)?;
            let h = *index
                .get(&(a.source, b.target, c))
                .ok_or_else(|| Error::Internal(format!("composite of {f} and {g} is not an enumerated span")))?;
            composition.insert((f, g), h);
        }
    }
    let ring = param.ring;
    let arrows: Vec<Arrow<SpanMorphism>> = arrows
        .into_iter()
        .map(|a| {
            let (src, tgt) = (packed[a.source].rank, packed[a.target].rank);
            let payload = a.payload.to_morphism(a.source, a.target, src, tgt, ring);
            Arrow { source: a.source, target: a.target, payload }
        })
        .collect();
    let (cat, laws) = FinCategory::new(objects, arrows, identities, composition)?;
    let report = QReport { objects: cat.objects().len(), arrows: cat.arrow_count(), laws };
    Ok((cat, report))
}

fn check_param(param: &FormParameter) -> Result<u64> {
    let ring = param.ring;
    let p = match ring.modulus() {
        Some(p) if ring.is_field() => p,
        _ => return Err(Error::Unsupported(format!("the Q-construction is built over prime fields only, not {ring}"))),
    };
    match param.flavor {
        Flavor::Symmetric | Flavor::Quadratic => Ok(p),
        Flavor::Even if p != 2 => Ok(p),
        Flavor::Even => Err(Error::Unsupported(
            "even forms over F2: hom-sets are not known to be discrete, so span classes are not used".into(),
        )),
        Flavor::General => Err(Error::Unsupported("general form parameters in the Q-construction".into())),
    }
}

/// Witt-group coordinates of every object, from the group computed at the same cap.
pub fn witt_coordinates(q: &HermitianQ, param: &FormParameter, rank_cap: usize) -> Result<Vec<Vec<BigInt>>> {
    let w = witt_group(param.ring, param, rank_cap)?;
    let width = w.group.free_rank + w.group.factors.len();
    let mut by_key: HashMap<Vec<u64>, Vec<BigInt>> = HashMap::new();
    for (f, g) in w.classes.iter().zip(&w.group.generators) {
        by_key.insert(crate::formcore::canonical_form(f)?.key, g.coords.clone());
    }
    q.objects()
        .iter()
        .map(|o| {
            if o.form.rank() == 0 {
                return Ok(vec![BigInt::from(0); width]);
            }
            by_key.get(&o.key).cloned().ok_or_else(|| Error::Internal(format!("object {} has no Witt class", o.label)))
        })
        .collect()
}

/// The form as `u64` tables over `F_p`.
struct PackedForm {
    rank: usize,
    gram: Rows,
    form: UnimodularForm,
}

impl PackedForm {
    fn new(f: &UnimodularForm, p: u64) -> Result<Self> {
        let r = f.rank();
        let gram = (0..r).map(|i| (0..r).map(|j| f.gram().get(i, j).to_u64().unwrap_or(0) % p).collect()).collect();
        Ok(PackedForm { rank: r, gram, form: f.clone() })
    }

    fn b(&self, x: &[u64], y: &[u64], p: u64) -> u64 {
        let mut s = 0;
        for i in 0..self.rank {
            if x[i] == 0 {
                continue;
            }
            for j in 0..self.rank {
                s = (s + x[i] * self.gram[i][j] % p * y[j]) % p;
            }
        }
        s
    }

    fn q(&self, x: &[u64]) -> Result<BigInt> {
        let v: Vec<BigInt> = x.iter().map(|&c| BigInt::from(c)).collect();
        self.form.eval_q(&v)
    }
}

/// Span data in `u64`: `i` as `k` rows (the reduced echelon basis of the image), `p` as `k` columns.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Span {
    i_rows: Rows,
    p_cols: Rows,
}

impl Span {
    fn identity(r: usize) -> Span {
        let e: Rows = (0..r).map(|i| (0..r).map(|j| (i == j) as u64).collect()).collect();
        Span { i_rows: e.clone(), p_cols: e }
    }

    fn to_morphism(&self, source: usize, target: usize, a: usize, b: usize, ring: RingSpec) -> SpanMorphism {
        let k = self.i_rows.len();
        SpanMorphism {
            source,
            target,
            p: Matrix::from_fn(ring, a, k, |r, c| BigInt::from(self.p_cols[c][r])),
            i: Matrix::from_fn(ring, b, k, |r, c| BigInt::from(self.i_rows[c][r])),
        }
    }
}

fn all_vectors(p: u64, n: usize) -> Vec<Vec<u64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|v: Vec<u64>| {
                (0..p).map(move |c| {
                    let mut v = v.clone();
                    v.push(c);
                    v
                })
            })
            .collect();
    }
    out
}

fn rank_of(rows: &Rows, p: u64) -> usize {
    let mut m = rows.clone();
    rref(&mut m, p).len()
}

/// All `k`-dimensional subspaces of `F_p^n` as reduced echelon bases.
fn subspaces(p: u64, n: usize, k: usize) -> Vec<Rows> {
    let mut out = Vec::new();
    let mut pivots = Vec::new();
    fn choose(start: usize, n: usize, k: usize, pivots: &mut Vec<usize>, emit: &mut dyn FnMut(&[usize])) {
        if pivots.len() == k {
            emit(pivots);
            return;
        }
        for c in start..n {
            pivots.push(c);
            choose(c + 1, n, k, pivots, emit);
            pivots.pop();
        }
    }
    choose(0, n, k, &mut pivots, &mut |piv| {
        let free: Vec<(usize, usize)> = (0..k)
            .flat_map(|r| (piv[r] + 1..n).filter(|c| !piv.contains(c)).map(move |c| (r, c)))
            .collect();
        for vals in all_vectors(p, free.len()) {
            let mut m = vec![vec![0u64; n]; k];
            for (r, &c) in piv.iter().enumerate() {
                m[r][c] = 1;
            }
            for (&(r, c), v) in free.iter().zip(vals) {
                m[r][c] = v;
            }
            out.push(m);
        }
    });
    out
}

/// Every admissible span class from `src` to `tgt`.
fn enumerate_spans(src: &PackedForm, tgt: &PackedForm, p: u64) -> Result<Vec<Span>> {
    let (a, b) = (src.rank, tgt.rank);
    let k = (a + b) / 2;
    let vecs = all_vectors(p, a);
    let qsrc: Vec<BigInt> = vecs.iter().map(|v| src.q(v)).collect::<Result<_>>()?;
    let mut out = Vec::new();
    for basis in subspaces(p, b, k) {
        let qt: Vec<BigInt> = basis.iter().map(|v| tgt.q(v)).collect::<Result<_>>()?;
        let bt: Rows = basis.iter().map(|x| basis.iter().map(|y| tgt.b(x, y, p)).collect()).collect();
        // columns of p one at a time, matching q-values and pairings with earlier columns
        let mut cols: Vec<usize> = Vec::new();
        fn extend(
            j: usize,
            cols: &mut Vec<usize>,
            k: usize,
            vecs: &[Vec<u64>],
            qsrc: &[BigInt],
            qt: &[BigInt],
            bt: &Rows,
            src: &PackedForm,
            p: u64,
            emit: &mut dyn FnMut(&[usize]),
        ) {
            if j == k {
                emit(cols);
                return;
            }
            for (v, x) in vecs.iter().enumerate() {
                if qsrc[v] != qt[j] {
                    continue;
                }
                if cols.iter().enumerate().any(|(t, &u)| src.b(&vecs[u], x, p) != bt[t][j]) || src.b(x, x, p) != bt[j][j] {
                    continue;
                }
                cols.push(v);
                extend(j + 1, cols, k, vecs, qsrc, qt, bt, src, p, emit);
                cols.pop();
            }
        }
        extend(0, &mut cols, k, &vecs, &qsrc, &qt, &bt, src, p, &mut |chosen| {
            let p_cols: Rows = chosen.iter().map(|&v| vecs[v].clone()).collect();
            // p must be onto the source
            if rank_of(&p_cols, p) == a {
                out.push(Span { i_rows: basis.clone(), p_cols });
            }
        });
    }
    for sp in &out {
        check_admissible(src, tgt, sp, p)?;
    }
    Ok(out)
}

fn transpose(m: &Rows, cols: usize) -> Rows {
    (0..cols).map(|j| m.iter().map(|r| r[j]).collect()).collect()
}

/// Split projection, split inclusion, agreement of the pulled-back forms, and the kernel condition:
/// `G' i` carries `ker p` isomorphically onto the annihilator of `im i`.
fn check_admissible(src: &PackedForm, tgt: &PackedForm, sp: &Span, p: u64) -> Result<()> {
    let k = sp.i_rows.len();
    let (a, b) = (src.rank, tgt.rank);
    let bad = |why: &str| Err(Error::Internal(format!("span is not admissible: {why}")));
    if rank_of(&sp.p_cols, p) != a && k > 0 {
        return bad("p is not onto");
    }
    if rank_of(&sp.i_rows, p) != k {
        return bad("i is not injective");
    }
    for s in 0..k {
        if src.q(&sp.p_cols[s])? != tgt.q(&sp.i_rows[s])? {
            return bad("q-values differ");
        }
        for t in 0..k {
            if src.b(&sp.p_cols[s], &sp.p_cols[t], p) != tgt.b(&sp.i_rows[s], &sp.i_rows[t], p) {
                return bad("bilinear forms differ");
            }
        }
    }
    // kernel of p in w-coordinates: p is a x k with columns p_cols
    let mut pm = transpose(&sp.p_cols, a);
    if pm.is_empty() {
        pm = vec![vec![0; k]];
    }
    let ker = kernel_rows(&pm, k, p);
    let images: Rows = ker
        .iter()
        .map(|c| {
            let v: Vec<u64> = (0..b).map(|r| (0..k).map(|s| c[s] * sp.i_rows[s][r] % p).sum::<u64>() % p).collect();
            (0..b).map(|r| (0..b).map(|t| tgt.gram[r][t] * v[t] % p).sum::<u64>() % p).collect()
        })
        .collect();
    let dim = images.len();
    if dim != b - k || (dim > 0 && rank_of(&images, p) != dim) {
        return bad("ker p does not map isomorphically onto the annihilator of w");
    }
    for y in &images {
        if sp.i_rows.iter().any(|x| x.iter().zip(y).map(|(u, v)| u * v % p).sum::<u64>() % p != 0) {
            return bad("G' i ker p leaves the annihilator of w");
        }
    }
    Ok(())
}

/// Basis of `{x in F_p^n : m x = 0}`.
fn kernel_rows(m: &Rows, n: usize, p: u64) -> Rows {
    let mut r = m.clone();
    let piv = rref(&mut r, p);
    let free: Vec<usize> = (0..n).filter(|c| !piv.contains(c)).collect();
    free.iter()
        .map(|&fc| {
            let mut v = vec![0u64; n];
            v[fc] = 1;
            for (row, &pc) in piv.iter().enumerate() {
                v[pc] = (p - r[row][fc]) % p;
            }
            v
        })
        .collect()
}

/// Pullback of `x <- w1 -> y` and `y <- w2 -> z`: the elements of `w2` whose projection lies in
/// `w1`, re-expressed in the echelon basis of their image in `z`.
fn compose_spans(first: &Span, second: &Span, mid_rank: usize, p: u64) -> Result<Span> {
    let (k1, k2) = (first.i_rows.len(), second.i_rows.len());
    // [p2 | -i1] (y; z) = 0 as a mid_rank x (k2 + k1) system
    let mut sys: Rows = (0..mid_rank)
        .map(|r| {
            let mut row: Vec<u64> = (0..k2).map(|s| second.p_cols[s][r]).collect();
            row.extend((0..k1).map(|s| (p - first.i_rows[s][r]) % p));
            row
        })
        .collect();
    if sys.is_empty() {
        sys = vec![vec![0; k2 + k1]];
    }
    let ker = kernel_rows(&sys, k2 + k1, p);
    let zlen = second.i_rows.first().map_or(0, |r| r.len());
    let xlen = first.p_cols.first().map_or(0, |r| r.len());
    let zlen = if k2 == 0 { 0 } else { zlen };
    // one row per kernel vector: (i2 y | p1 z)
    let mut aug: Rows = ker
        .iter()
        .map(|v| {
            let mut row: Vec<u64> = (0..zlen).map(|c| (0..k2).map(|s| v[s] * second.i_rows[s][c] % p).sum::<u64>() % p).collect();
            row.extend((0..xlen).map(|c| (0..k1).map(|s| v[k2 + s] * first.p_cols[s][c] % p).sum::<u64>() % p));
            row
        })
        .collect();
    let piv = rref(&mut aug, p);
    if piv.len() != aug.len() || piv.iter().any(|&c| c >= zlen) {
        return Err(Error::Internal("pullback does not embed into the target".into()));
    }
    let i_rows = aug.iter().map(|r| r[..zlen].to_vec()).collect();
    let p_cols = aug.iter().map(|r| r[zlen..].to_vec()).collect();
    Ok(Span { i_rows, p_cols })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formcore::{hyperbolic, lagrangians};

    fn sym(p: u64) -> FormParameter {
        FormParameter::symmetric(RingSpec::zmod(p).unwrap())
    }

    fn echelon_of_columns(m: &Matrix, p: u64) -> Rows {
        let mut rows: Rows = (0..m.cols()).map(|c| (0..m.rows()).map(|r| m.get(r, c).to_u64().unwrap()).collect()).collect();
        rref(&mut rows, p);
        rows
    }

    #[test]
    fn subspace_counts_are_gaussian_binomials() {
        // [4 choose 2]_2 = 35, [3 choose 1]_3 = 13
        assert_eq!(subspaces(2, 4, 2).len(), 35);
        assert_eq!(subspaces(3, 3, 1).len(), 13);
        assert_eq!(subspaces(3, 0, 0).len(), 1);
    }

    #[test]
    fn zero_to_zero_is_the_identity_only() {
        let (q, _) = build_hermitian_q(&sym(3), 2, 1).unwrap();
        let zero = q.objects().iter().position(|o| o.form.rank() == 0).unwrap();
        assert_eq!(q.hom(zero, zero), &[q.identity(zero)]);
    }

    #[test]
    fn maps_out_of_zero_are_lagrangians() {
        for p in [2, 3] {
            let (q, _) = build_hermitian_q(&sym(p), 2, 2).unwrap();
            let zero = q.objects().iter().position(|o| o.form.rank() == 0).unwrap();
            for (y, o) in q.objects().iter().enumerate() {
                let mut from_q: Vec<Rows> =
                    q.hom(zero, y).iter().map(|&f| echelon_of_columns(&q.arrow(f).payload.i, p)).collect();
                let mut from_forms: Vec<Rows> =
                    lagrangians(&o.form, None, 4).unwrap().iter().map(|l| echelon_of_columns(l, p)).collect();
                from_q.sort();
                from_forms.sort();
                assert_eq!(from_q, from_forms, "F{p}, object {}", o.label);
            }
        }
    }

    #[test]
    fn automorphisms_of_a_line() {
        // <1> over F3 has isometries +-1, over F2 only 1
        for (p, n) in [(3, 2), (2, 1)] {
            let (q, _) = build_hermitian_q(&sym(p), 1, 1).unwrap();
            let one = q.objects().iter().position(|o| o.form.rank() == 1 && o.form.gram().get(0, 0) == &BigInt::from(1)).unwrap();
            assert_eq!(q.hom(one, one).len(), n);
        }
    }

    #[test]
    fn components_match_witt_classes_over_f2_and_f3() {
        // F3: {0, H}, <1>, <-1>, <1, 1>
        for (p, expected) in [(2, 2), (3, 4)] {
            let param = sym(p);
            let (q, _) = build_hermitian_q(&param, 2, 2).unwrap();
            let comps = q.components();
            let coords = witt_coordinates(&q, &param, 4).unwrap();
            for c in &comps {
                assert!(c.iter().all(|&x| coords[x] == coords[c[0]]), "F{p}: component mixes Witt classes");
            }
            let mut distinct = coords.clone();
            distinct.sort();
            distinct.dedup();
            assert_eq!(comps.len(), distinct.len(), "F{p}");
            assert_eq!(comps.len(), expected, "F{p}");
        }
    }

    #[test]
    fn quadratic_f2_hyperbolic_plane_has_two_lagrangians() {
        let param = FormParameter::quadratic(RingSpec::zmod(2).unwrap());
        let (q, _) = build_hermitian_q(&param, 2, 1).unwrap();
        let zero = q.objects().iter().position(|o| o.form.rank() == 0).unwrap();
        let h = crate::formcore::canonical_form(&hyperbolic(&param, 1)).unwrap().key;
        let hy = q.objects().iter().position(|o| o.key == h).unwrap();
        assert_eq!(q.hom(zero, hy).len(), 2);
    }

    #[test]
    fn caps_and_rings_are_enforced() {
        assert!(matches!(build_hermitian_q(&sym(3), 4, 1), Err(Error::CapExceeded(_))));
        assert!(matches!(
            build_hermitian_q(&FormParameter::symmetric(RingSpec::Integers), 1, 1),
            Err(Error::Unsupported(_))
        ));
    }
}
