//! Composition of cobordisms and surgery on their left legs.

use std::collections::BTreeMap;

use crate::chaincx::{fiber, homology_at, lowest_homology, sign, ChainComplex, ChainMap};
use crate::error::{Error, Result};
use crate::exactalg::linsys::LinearSystem;
use crate::exactalg::Matrix;

use super::surgery::{lift_through_duality, surgery, Cobordism, LefschetzCertificate, SurgeryDatum};

/// `a` then `b`: the homotopy pullback `Wa x_M Wb` over the shared end `M`.
pub fn compose(a: &Cobordism, b: &Cobordism) -> Result<Cobordism> {
    if a.right.complex() != b.left.complex() || a.right.family() != b.left.family() {
        return Err(Error::Invalid("cobordisms do not share the middle end".into()));
    }
    let ring = a.w.ring();
    let sum = a.w.direct_sum(&b.w)?;
    let m = a.right.complex();
    let diff = ChainMap::from_fn(&sum, m, |r| Matrix::hstack(&[&a.to_right.at(r), &b.to_left.at(r).neg_ref()]).unwrap())?;
    let p = fiber(&diff);
    // fib_r = M_{r+1} (+) Wa_r (+) Wb_r
    let proj = |which: usize, r: i64| -> Matrix {
        let (ma, wa, wb) = (m.dim(r + 1), a.w.dim(r), b.w.dim(r));
        let rows = if which == 0 { wa } else { wb };
        let z = |c: usize| Matrix::zeros(ring, rows, c);
        if which == 0 {
            Matrix::hstack(&[&z(ma), &Matrix::identity(ring, wa), &z(wb)]).unwrap()
        } else {
            Matrix::hstack(&[&z(ma), &z(wa), &Matrix::identity(ring, wb)]).unwrap()
        }
    };
    let to_a = ChainMap::from_fn(&p, &a.w, |r| proj(0, r))?;
    let to_b = ChainMap::from_fn(&p, &b.w, |r| proj(1, r))?;
    let mut c = Cobordism {
        left: a.left.clone(),
        right: b.right.clone(),
        w: p,
        to_left: a.to_left.compose(&to_a)?,
        to_right: b.to_right.compose(&to_b)?,
        lefschetz_checked: false,
        certificate: None,
    };
    if !c.lefschetz_homology_check()? {
        return Err(Error::Internal("composite fails the Lefschetz homology check".into()));
    }
    c.lefschetz_checked = true;
    c.certificate = Some(LefschetzCertificate::HomologyLevel);
    Ok(c)
}

/// Lowest degree with homology in `fib(W -> left)`.
pub fn left_connectivity(w: &Cobordism) -> Result<Option<i64>> {
    Ok(lowest_homology(&w.left_fiber())?.map(|h| h.degree))
}

/// One step of [`improve_morphism`].
#[derive(Debug, Clone)]
pub struct ImprovementStep {
    pub k: i64,
    pub rank_t: usize,
    pub datum: SurgeryDatum,
    /// The trace `right ~> right'` of the surgery on the right end, read backwards.
    pub reflected: Cobordism,
    /// The improved cobordism followed by `reflected`: back to the original ends, connectivity not improved.
    pub zigzag: Cobordism,
}

#[derive(Debug, Clone)]
pub struct Improved {
    /// `left ~> right'`; the right end is the given one after surgery along `T`.
    pub cobordism: Cobordism,
    pub log: Vec<ImprovementStep>,
}

/// Kills `H_m` of `fib(W -> left)` by surgery on `0 <- T -> T`: cells attached to `W` along the
/// generating cycles, and surgery on the right end along their images. Lower homology must already
/// vanish. When `2m + 1 <= n` failure is an internal error, otherwise an obstruction.
pub fn improve_morphism(w: &Cobordism, m: i64) -> Result<Improved> {
    let fib = w.left_fiber();
    match left_connectivity(w)? {
        None => return Ok(Improved { cobordism: w.clone(), log: Vec::new() }),
        Some(k) if k > m => return Ok(Improved { cobordism: w.clone(), log: Vec::new() }),
        Some(k) if k < m => {
            return Err(Error::Invalid(format!("fib(W -> left) has homology in degree {k} below {m}")));
        }
        Some(_) => {}
    }
    let n = w.dimension();
    let ring = w.w.ring();
    let (l, rr) = (w.left.complex(), w.right.complex());
    let k = m;
    let h = homology_at(&fib, k)?;
    let g = h.generators.cols();
    // a cycle of fib is (a, x) in L_{k+1} (+) W_k with d x = 0 and p_L x = -d a
    let split = l.dim(k + 1);
    let a = h.generators.submatrix(0, split, 0, g);
    let x = h.generators.submatrix(split, w.w.dim(k), 0, g);
    let t = ChainComplex::concentrated(ring, k, g);
    // the surgered right end contains T in degree k+1 attached by (-1)^{(n+1)(n-k+1)} phi lift
    let s = sign((n + 1) * (n - k + 1));
    let target_map = (&w.to_right.at(k) * &x).scale_i64(s);
    let f = ChainMap::from_fn(&t, rr, |r| if r == k { target_map.clone() } else { Matrix::zeros(ring, rr.dim(r), 0) })?;
    let lift = lift_through_duality(&w.right, &f)?
        .ok_or_else(|| Error::Internal("no lift through Poincaré duality of the right end".into()))?;
    let datum = SurgeryDatum::from_lift(&w.right, lift)?
        .ok_or_else(|| Error::Obstruction(format!("no nullhomotopy for the datum in degree {k}")))?;
    let out = surgery(&datum)?;
    let r2 = out.result.complex();

    let w2 = ChainComplex::from_fn(ring, w.w.lo().min(k + 1), widen_dims(&w.w, k, g), |r| {
        let base = w.w.d(r);
        let up = if r == k + 1 { x.clone() } else { Matrix::zeros(ring, w.w.dim(r - 1), t.dim(r - 1)) };
        Matrix::blocks(&[vec![base, up], vec![Matrix::zeros(ring, t.dim(r - 2), w.w.dim(r)), Matrix::zeros(ring, t.dim(r - 2), t.dim(r - 1))]])
            .unwrap()
    })
    .map_err(|e| Error::Internal(format!("surgered middle: {e}")))?;
    let to_left = ChainMap::from_fn(&w2, l, |r| {
        let e = if r == k + 1 { a.neg_ref() } else { Matrix::zeros(ring, l.dim(r), t.dim(r - 1)) };
        Matrix::hstack(&[&w.to_left.at(r), &e]).unwrap()
    })
    .map_err(|e| Error::Internal(format!("left leg: {e}")))?;
    let hypothesis = 2 * m < n;
    let fail = |msg: String| if hypothesis { Error::Internal(msg) } else { Error::Obstruction(msg) };
    let right = out.result.clone();
    let mut candidate = |leg: &ChainMap| -> Result<bool> {
        let c = Cobordism {
            left: w.left.clone(),
            right: right.clone(),
            w: w2.clone(),
            to_left: to_left.clone(),
            to_right: leg.clone(),
            lefschetz_checked: false,
            certificate: None,
        };
        c.lefschetz_homology_check()
    };
    let to_right = right_leg(w, &w2, r2, &datum, k, g, &mut candidate)?
        .ok_or_else(|| fail("no right leg passes the Lefschetz homology check".into()))?;
    let improved = Cobordism {
        left: w.left.clone(),
        right: out.result.clone(),
        w: w2,
        to_left,
        to_right,
        lefschetz_checked: true,
        certificate: Some(LefschetzCertificate::HomologyLevel),
    };
    if let Some(j) = left_connectivity(&improved)? {
        if j <= m {
            return Err(fail(format!("fib(W -> left) still has homology in degree {j}")));
        }
    }
    let reflected = out.cobordism.reversed()?;
    let zigzag = compose(&improved, &reflected)?;
    let step = ImprovementStep { k, rank_t: g, datum, reflected, zigzag };
    Ok(Improved { cobordism: improved, log: vec![step] })
}

/// Leg `W' -> R'` restricting to `p_R` on `W` and to the inclusion of `T` as the top block of `R'_{k+1}`
/// on the new cells; the components into `D_{*+1}` and the correction into `R_{k+1}` are solved for.
fn right_leg(
    w: &Cobordism,
    w2: &ChainComplex,
    r2: &ChainComplex,
    datum: &SurgeryDatum,
    k: i64,
    g: usize,
    accept: &mut dyn FnMut(&ChainMap) -> Result<bool>,
) -> Result<Option<ChainMap>> {
    let mut any = false;
    for new_only in [true, false] {
        let Some((base, basis)) = right_leg_space(w, w2, r2, datum, k, g, new_only)? else { continue };
        any = true;
        for coeffs in small_combinations(basis.len(), LEG_BUDGET) {
            let mut leg = base.clone();
            for (c, b) in coeffs.iter().zip(&basis) {
                if *c != 0 {
                    leg = leg.add(&b.scale(*c))?;
                }
            }
            if accept(&leg)? {
                return Ok(Some(leg));
            }
        }
    }
    if !any {
        return Err(Error::Obstruction("the right leg does not extend over the new cells".into()));
    }
    Ok(None)
}

/// Candidate legs tried before giving up.
const LEG_BUDGET: usize = 4096;

/// Coefficient vectors in `{-1, 0, 1}^len` by increasing support, at most `budget` of them.
fn small_combinations(len: usize, budget: usize) -> Vec<Vec<i64>> {
    let mut out = vec![vec![0; len]];
    let mut frontier = vec![(vec![0i64; len], 0usize)];
    while !frontier.is_empty() && out.len() < budget {
        let mut next = Vec::new();
        for (v, start) in frontier {
            for i in start..len {
                for c in [1, -1] {
                    let mut w = v.clone();
                    w[i] = c;
                    if out.len() >= budget {
                        return out;
                    }
                    out.push(w.clone());
                    next.push((w, i + 1));
                }
            }
        }
        frontier = next;
    }
    out
}

/// With `new_only`, the component into `D_{*+1}` vanishes on the old cells of `W`.
fn right_leg_space(
    w: &Cobordism,
    w2: &ChainComplex,
    r2: &ChainComplex,
    datum: &SurgeryDatum,
    k: i64,
    g: usize,
    new_only: bool,
) -> Result<Option<(ChainMap, Vec<ChainMap>)>> {
    let ring = w2.ring();
    let n = w.dimension();
    let rr = w.right.complex();
    let dc = datum.d_complex();
    let blocks = |r: i64| (rr.dim(r), dc.dim(r + 1), dc.dim(n - r + 1));
    let (lo, hi) = (w2.lo().min(r2.lo()) - 1, w2.hi().max(r2.hi()) + 1);
    let fixed = |r: i64| -> Matrix {
        let (c0, c1, c2) = blocks(r);
        let old = Matrix::vstack(&[&w.to_right.at(r), &Matrix::zeros(ring, c1 + c2, w.w.dim(r))]).unwrap();
        let e = if r == k + 1 {
            Matrix::vstack(&[&Matrix::zeros(ring, c0 + c1, g), &Matrix::identity(ring, g)]).unwrap()
        } else {
            Matrix::zeros(ring, c0 + c1 + c2, w2.dim(r) - w.w.dim(r))
        };
        Matrix::hstack(&[&old, &e]).unwrap()
    };
    let embed = |r: i64, which: usize| -> Matrix {
        let (c0, c1, c2) = blocks(r);
        let (off, len) = if which == 0 { (0, c0) } else { (c0, c1) };
        Matrix::from_fn(ring, c0 + c1 + c2, len, |i, j| ring.from_i64(if i == off + j { 1 } else { 0 }))
    };
    let pick_e = Matrix::from_fn(ring, g, w2.dim(k + 1), |i, j| ring.from_i64(if j == w.w.dim(k + 1) + i { 1 } else { 0 }));
    // columns of W'_r carrying the unknown component
    let cols = |r: i64| -> Matrix {
        if !new_only {
            Matrix::identity(ring, w2.dim(r))
        } else if r == k + 1 {
            pick_e.clone()
        } else {
            Matrix::zeros(ring, 0, w2.dim(r))
        }
    };
    let mut sys = LinearSystem::new(ring);
    let mut z = BTreeMap::new();
    for r in lo..=hi {
        let c1 = blocks(r).1;
        let width = cols(r).rows();
        if c1 > 0 && width > 0 {
            z.insert(r, sys.var(c1, width));
        }
    }
    let yv = sys.var(rr.dim(k + 1), g);
    for r in lo..=hi + 1 {
        let (rows, width) = (r2.dim(r - 1), w2.dim(r));
        if rows == 0 || width == 0 {
            continue;
        }
        let eq = sys.equation(rows, width);
        eq.constant(&(&(&r2.d(r) * &fixed(r)) - &(&fixed(r - 1) * &w2.d(r))));
        if let Some(&v) = z.get(&r) {
            eq.term(1, Some(&(&r2.d(r) * &embed(r, 1))), v, Some(&cols(r)));
        }
        if let Some(&v) = z.get(&(r - 1)) {
            eq.term(-1, Some(&embed(r - 1, 1)), v, Some(&(&cols(r - 1) * &w2.d(r))));
        }
        if r == k + 1 {
            eq.term(1, Some(&(&r2.d(r) * &embed(r, 0))), yv, Some(&pick_e));
        }
        if r == k + 2 {
            eq.term(-1, Some(&embed(k + 1, 0)), yv, Some(&(&pick_e * &w2.d(r))));
        }
    }
    let Some((sol, kernel)) = sys.solve_affine()? else { return Ok(None) };
    let keys: Vec<i64> = z.keys().copied().collect();
    let assemble = |values: &[Matrix], with_fixed: bool| -> Result<ChainMap> {
        let vals: BTreeMap<i64, &Matrix> = keys.iter().copied().zip(values).collect();
        let y = values.last().expect("y is the last unknown");
        ChainMap::from_fn_unchecked(w2, r2, |r| {
            let mut m = if with_fixed { fixed(r) } else { Matrix::zeros(ring, r2.dim(r), w2.dim(r)) };
            if let Some(zr) = vals.get(&r) {
                m = &m + &(&(&embed(r, 1) * zr) * &cols(r));
            }
            if r == k + 1 {
                m = &m + &(&(&embed(r, 0) * y) * &pick_e);
            }
            m
        })
    };
    let base = assemble(&sol, true)?;
    base.verify().map_err(|e| Error::Internal(format!("right leg: {e}")))?;
    let basis = kernel.iter().map(|v| assemble(v, false)).collect::<Result<Vec<_>>>()?;
    Ok(Some((base, basis)))
}

fn widen_dims(w: &ChainComplex, k: i64, g: usize) -> Vec<usize> {
    let lo = w.lo().min(k + 1);
    let hi = w.hi().max(k + 1);
    (lo..=hi).map(|r| w.dim(r) + if r == k + 1 { g } else { 0 }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::RingSpec;
    use crate::formcore::{e8, hyperbolic, is_isometric_integral, FormParameter};
    use crate::qsurgery::normalize::{normalize_to_heart, DEFAULT_STEP_CAP};
    use crate::qsurgery::random::{lift_degrees, random_datum};
    use crate::qsurgery::structure::QuadraticComplex;
    use rand::SeedableRng;

    fn forms() -> Vec<QuadraticComplex> {
        let p = FormParameter::quadratic(RingSpec::Integers);
        let h = hyperbolic(&p, 1);
        let e = e8(&p).unwrap();
        [h.clone(), e.clone(), h.orthogonal_sum(&e).unwrap()].iter().map(|f| QuadraticComplex::from_form(f).unwrap()).collect()
    }

    #[test]
    fn identity_is_unchanged() {
        for x in forms() {
            let id = Cobordism::identity(&x).unwrap();
            let out = improve_morphism(&id, -1).unwrap();
            assert!(out.log.is_empty());
            assert_eq!(out.cobordism.w, id.w);
        }
    }

    #[test]
    fn trace_of_degree_zero_surgery_improves_at_minus_one() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let mut seen = 0;
        for x in forms() {
            for _ in 0..8 {
                let Some(datum) = random_datum(&x, &[0], 2, 20, &mut rng).unwrap() else { continue };
                let trace = surgery(&datum).unwrap().cobordism;
                if left_connectivity(&trace).unwrap() != Some(-1) {
                    continue;
                }
                let out = improve_morphism(&trace, -1).unwrap();
                assert!(homology_at(&out.cobordism.left_fiber(), -1).unwrap().is_zero());
                assert!(out.cobordism.lefschetz_homology_check().unwrap());
                assert_eq!(out.cobordism.left.complex(), trace.left.complex());
                let step = &out.log[0];
                assert_eq!(step.zigzag.right.complex(), trace.right.complex());
                seen += 1;
            }
        }
        assert!(seen >= 6, "only {seen} traces");
    }

    #[test]
    fn middle_degree_is_outside_the_hypothesis() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(12);
        let x = forms().remove(0);
        let datum = random_datum(&x, &[0], 1, 50, &mut rng).unwrap().unwrap();
        let back = surgery(&datum).unwrap().cobordism.reversed().unwrap();
        match improve_morphism(&back, 0) {
            Ok(out) => assert!(homology_at(&out.cobordism.left_fiber(), 0).unwrap().is_zero()),
            Err(e) => assert!(matches!(e, Error::Obstruction(_)), "{e}"),
        }
    }

    #[test]
    fn composite_improved_stepwise_keeps_the_forms_stably() {
        let x = QuadraticComplex::from_form(&hyperbolic(&FormParameter::quadratic(RingSpec::Integers), 2)).unwrap();
        let p = FormParameter::quadratic(RingSpec::Integers);
        let heart = |q: &QuadraticComplex| normalize_to_heart(q, DEFAULT_STEP_CAP).unwrap().form;
        let mut checked = 0;
        for seed in 0..8 {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let Some(d1) = random_datum(&x, &[0], 1, 50, &mut rng).unwrap() else { continue };
            let first = surgery(&d1).unwrap();
            let degrees = lift_degrees(&first.result);
            let Some(d2) = random_datum(&first.result, &degrees, 1, 50, &mut rng).unwrap() else { continue };
            let second = surgery(&d2).unwrap();
            let mut w = compose(&first.cobordism, &second.cobordism).unwrap();
            let mut steps = 0;
            while let Some(k) = left_connectivity(&w).unwrap().filter(|&k| k <= -1) {
                w = improve_morphism(&w, k).unwrap().cobordism;
                steps += 1;
                assert!(steps <= 4);
            }
            assert!(steps >= 1);
            assert_eq!(w.left.complex(), x.complex());
            let end = heart(&second.result);
            let got = heart(&w.right);
            // the right end is surgered along T: equal up to hyperbolic summands
            let (big, small) = if got.rank() >= end.rank() { (got, end) } else { (end, got) };
            let planes = (big.rank() - small.rank()) / 2;
            let padded = if planes == 0 { small } else { small.orthogonal_sum(&hyperbolic(&p, planes)).unwrap() };
            assert!(is_isometric_integral(&big, &padded).unwrap().is_yes());
            checked += 1;
        }
        assert!(checked >= 6);
    }
}
