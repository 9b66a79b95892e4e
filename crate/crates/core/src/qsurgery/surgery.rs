use std::collections::BTreeMap;

use crate::chaincx::{fiber, homology_at, is_quasi_iso, sign, ChainComplex, ChainMap};
use crate::error::{Error, Result};
use crate::exactalg::linsys::{LinearSystem, VarId};
use crate::exactalg::Matrix;

use super::structure::{layer_bound, Family, QuadraticComplex};

/// Surgery datum on `(C, psi)`: a complex `T`, a chain map `lift : T -> C^{n-*}` and a nullhomotopy
/// `delta` of the structure pushed to `D = T^{n-*}`. The map into `C` is `f = (1+T)psi_0 . lift`.
#[derive(Debug, Clone)]
pub struct SurgeryDatum {
    target: QuadraticComplex,
    t: ChainComplex,
    lift: ChainMap,
    delta: Family,
}

impl SurgeryDatum {
    /// Checks the lift and the nullhomotopy relations.
    pub fn new(target: QuadraticComplex, lift: ChainMap, delta: Family) -> Result<Self> {
        if lift.target != target.dual() {
            return Err(Error::Invalid("lift must land in the dual complex".into()));
        }
        lift.verify()?;
        let t = lift.source.clone();
        let datum = SurgeryDatum { target, t, lift, delta };
        datum.verify()?;
        Ok(datum)
    }

    /// Solves for a nullhomotopy; `None` when the obstruction is nonzero.
    pub fn from_lift(target: &QuadraticComplex, lift: ChainMap) -> Result<Option<Self>> {
        match nullhomotopy_for_lift(target, &lift, &[])? {
            None => Ok(None),
            Some(delta) => Ok(Some(SurgeryDatum::new(target.clone(), lift, delta)?)),
        }
    }

    pub fn target(&self) -> &QuadraticComplex {
        &self.target
    }

    pub fn t(&self) -> &ChainComplex {
        &self.t
    }

    pub fn lift(&self) -> &ChainMap {
        &self.lift
    }

    pub fn delta(&self) -> &Family {
        &self.delta
    }

    /// `f : T -> C`.
    pub fn map(&self) -> Result<ChainMap> {
        self.target.symmetrization()?.compose(&self.lift)
    }

    /// `D = T^{n-*}`.
    pub fn d_complex(&self) -> ChainComplex {
        self.t.dual(self.target.dimension())
    }

    /// `g : C -> D`, the dual of the lift.
    pub fn dual_map(&self) -> Result<ChainMap> {
        dual_of_lift(&self.target, &self.lift)
    }

    pub fn verify(&self) -> Result<()> {
        let g = self.dual_map()?;
        let d = g.target.clone();
        let n = self.target.dimension();
        let top = equation_layers(&self.target, &d);
        for s in 0..=top {
            for r in range(&d) {
                if !pair_residual(&self.target, &g, &d, &self.delta, s, r).is_zero() {
                    return Err(Error::Invalid(format!("nullhomotopy relation fails at s={s}, r={r} (n={n})")));
                }
            }
        }
        Ok(())
    }
}

fn range(c: &ChainComplex) -> std::ops::RangeInclusive<i64> {
    match c.support() {
        Some((a, b)) => a..=b,
        None => std::ops::RangeInclusive::new(1, 0),
    }
}

fn equation_layers(x: &QuadraticComplex, d: &ChainComplex) -> usize {
    (layer_bound(d, x.dimension() + 1) + 1).max(x.s_max())
}

/// `g_r = (-1)^{(n+1) r} (lift_{n-r})^T : C_r -> D_r`.
pub(crate) fn dual_of_lift(x: &QuadraticComplex, lift: &ChainMap) -> Result<ChainMap> {
    let n = x.dimension();
    let d = lift.source.dual(n);
    ChainMap::from_fn(x.complex(), &d, |r| lift.at(n - r).transpose().scale_i64(sign((n + 1) * r)))
        .map_err(|e| Error::Internal(format!("dual of the lift: {e}")))
}

/// Residual of the pair relation at `(s, r)`, a map `D^{n-r-s} -> D_r`.
fn pair_residual(x: &QuadraticComplex, g: &ChainMap, d: &ChainComplex, delta: &Family, s: usize, r: i64) -> Matrix {
    let n = x.dimension();
    let m = n + 1;
    let si = s as i64;
    let q = n - r - si;
    let a = &d.d(r + 1) * &delta.get(d, m, s, r + 1);
    let b = (&delta.get(d, m, s, r) * &d.d(q + 1).transpose()).scale_i64(sign(r));
    let next = &delta.get(d, m, s + 1, r) + &delta.t_at(d, m, s + 1, r).scale_i64(sign(si + 1));
    let c = next.scale_i64(sign(n - si));
    let push = (&(&g.at(r) * &x.psi(s, r)) * &g.at(q).transpose()).scale_i64(sign(n));
    &(&(&a + &b) + &c) + &push
}

/// A block of `delta_s` in degree `r` pinned to a value: rows and columns are index lists.
#[derive(Debug, Clone)]
pub struct Pin {
    pub s: usize,
    pub r: i64,
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub value: Matrix,
}

/// Solves the pair relations for `delta` given the lift; `pins` fix sub-blocks.
pub fn nullhomotopy_for_lift(x: &QuadraticComplex, lift: &ChainMap, pins: &[Pin]) -> Result<Option<Family>> {
    if lift.source.ring() != x.ring() {
        return Err(Error::RingMismatch("surgery datum".into()));
    }
    let g = dual_of_lift(x, lift)?;
    let d = g.target.clone();
    let n = x.dimension();
    let m = n + 1;
    let ring = x.ring();
    let top = equation_layers(x, &d);
    let mut sys = LinearSystem::new(ring);
    let mut vars: BTreeMap<(usize, i64), VarId> = BTreeMap::new();
    for s in 0..=top {
        for r in range(&d) {
            let (rows, cols) = (d.dim(r), d.dim(m - r - s as i64));
            if rows > 0 && cols > 0 {
                vars.insert((s, r), sys.var(rows, cols));
            }
        }
    }
    for s in 0..=top {
        let si = s as i64;
        for r in range(&d) {
            let q = n - r - si;
            let (rows, cols) = (d.dim(r), d.dim(q));
            if rows == 0 || cols == 0 {
                continue;
            }
            let push = (&(&g.at(r) * &x.psi(s, r)) * &g.at(q).transpose()).scale_i64(sign(n));
            let eq = sys.equation(rows, cols);
            eq.constant(&push);
            if let Some(&v) = vars.get(&(s, r + 1)) {
                eq.term(1, Some(&d.d(r + 1)), v, None);
            }
            if let Some(&v) = vars.get(&(s, r)) {
                eq.term(sign(r), None, v, Some(&d.d(q + 1).transpose()));
            }
            if let Some(&v) = vars.get(&(s + 1, r)) {
                eq.term(sign(n - si), None, v, None);
            }
            // T delta_{s+1} at r uses delta_{s+1} in degree q
            if let Some(&v) = vars.get(&(s + 1, q)) {
                eq.term_t(sign(n - si) * sign(si + 1) * sign(r * q), None, v, None);
            }
        }
    }
    for pin in pins {
        let Some(&v) = vars.get(&(pin.s, pin.r)) else {
            if pin.value.is_zero() {
                continue;
            }
            return Err(Error::Shape(format!("no delta_{} in degree {}", pin.s, pin.r)));
        };
        let (vr, vc) = sys.var_shape(v);
        let left = selector(ring, &pin.rows, vr);
        let right = selector(ring, &pin.cols, vc).transpose();
        sys.equation(pin.rows.len(), pin.cols.len()).term(1, Some(&left), v, Some(&right)).constant(&pin.value.neg_ref());
    }
    let Some(sol) = sys.solve()? else { return Ok(None) };
    let mut delta = Family::new();
    // variables were created in key order
    for (&(s, r), value) in vars.keys().zip(sol) {
        delta.insert(s, r, value);
    }
    Ok(Some(delta))
}

/// Rows of the identity picked by `idx`.
fn selector(ring: crate::exactalg::RingSpec, idx: &[usize], n: usize) -> Matrix {
    let mut m = Matrix::zeros(ring, idx.len(), n);
    for (i, &j) in idx.iter().enumerate() {
        m.set(i, j, num_bigint::BigInt::from(1));
    }
    m
}

/// Finds `lift : T -> C^{n-*}` with `(1+T)psi_0 . lift` homotopic to `f`, then a nullhomotopy.
pub fn solve_nullhomotopy(x: &QuadraticComplex, f: &ChainMap) -> Result<Option<SurgeryDatum>> {
    if f.target != *x.complex() {
        return Err(Error::Invalid("map must land in the underlying complex".into()));
    }
    if f.source.ring() != x.ring() {
        return Err(Error::RingMismatch("surgery datum".into()));
    }
    let Some(lift) = lift_through_duality(x, f)? else { return Ok(None) };
    SurgeryDatum::from_lift(x, lift)
}

/// Solves `phi lift - f = d h + h d` with `lift` a chain map.
pub fn lift_through_duality(x: &QuadraticComplex, f: &ChainMap) -> Result<Option<ChainMap>> {
    let t = f.source.clone();
    let c = x.complex();
    let dual = x.dual();
    let ring = x.ring();
    let phi = x.symmetrization()?;
    let Some((lo, hi)) = t.support() else { return Ok(Some(ChainMap::zero(&t, &dual))) };
    let mut sys = LinearSystem::new(ring);
    let mut lv = BTreeMap::new();
    let mut hv = BTreeMap::new();
    let mut order = Vec::new();
    for k in lo..=hi {
        if t.dim(k) > 0 && dual.dim(k) > 0 {
            lv.insert(k, sys.var(dual.dim(k), t.dim(k)));
            order.push(Some(k));
        }
        if t.dim(k) > 0 && c.dim(k + 1) > 0 {
            hv.insert(k, sys.var(c.dim(k + 1), t.dim(k)));
            order.push(None);
        }
    }
    for k in lo..=hi + 1 {
        // chain map: d lift_k - lift_{k-1} d = 0 on T_k
        let (rows, cols) = (dual.dim(k - 1), t.dim(k));
        if rows > 0 && cols > 0 {
            let eq = sys.equation(rows, cols);
            if let Some(&v) = lv.get(&k) {
                eq.term(1, Some(&dual.d(k)), v, None);
            }
            if let Some(&v) = lv.get(&(k - 1)) {
                eq.term(-1, None, v, Some(&t.d(k)));
            }
        }
    }
    for k in lo..=hi {
        let (rows, cols) = (c.dim(k), t.dim(k));
        if rows == 0 || cols == 0 {
            continue;
        }
        let eq = sys.equation(rows, cols);
        eq.constant(&f.at(k).neg_ref());
        if let Some(&v) = lv.get(&k) {
            eq.term(1, Some(&phi.at(k)), v, None);
        }
        if let Some(&v) = hv.get(&k) {
            eq.term(-1, Some(&c.d(k + 1)), v, None);
        }
        if let Some(&v) = hv.get(&(k - 1)) {
            eq.term(-1, None, v, Some(&t.d(k)));
        }
    }
    let Some(sol) = sys.solve()? else { return Ok(None) };
    let lifts: BTreeMap<i64, Matrix> =
        order.into_iter().zip(sol).filter_map(|(k, value)| k.map(|k| (k, value))).collect();
    let lift = ChainMap::from_fn(&t, &dual, |k| {
        lifts.get(&k).cloned().unwrap_or_else(|| Matrix::zeros(ring, dual.dim(k), t.dim(k)))
    })?;
    Ok(Some(lift))
}

/// How the Lefschetz condition of a cobordism was established.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LefschetzCertificate {
    /// An explicit chain map `fib(W -> left) -> dual(fib(W -> right), n-1)`, verified to be a quasi-isomorphism.
    ChainLevel(ChainMap),
    /// Homology groups of both sides agree degreewise.
    HomologyLevel,
}

/// `left <- W -> right`.
#[derive(Debug, Clone)]
pub struct Cobordism {
    pub left: QuadraticComplex,
    pub right: QuadraticComplex,
    pub w: ChainComplex,
    pub to_left: ChainMap,
    pub to_right: ChainMap,
    pub lefschetz_checked: bool,
    pub certificate: Option<LefschetzCertificate>,
}

impl Cobordism {
    /// `X <- X -> X`.
    pub fn identity(x: &QuadraticComplex) -> Result<Cobordism> {
        let id = ChainMap::identity(x.complex());
        let mut c = Cobordism {
            left: x.clone(),
            right: x.clone(),
            w: x.complex().clone(),
            to_left: id.clone(),
            to_right: id,
            lefschetz_checked: false,
            certificate: None,
        };
        if !c.lefschetz_homology_check()? {
            return Err(Error::Internal("identity cobordism fails the Lefschetz homology check".into()));
        }
        c.lefschetz_checked = true;
        c.certificate = Some(LefschetzCertificate::HomologyLevel);
        Ok(c)
    }

    pub fn dimension(&self) -> i64 {
        self.left.dimension()
    }

    pub fn left_fiber(&self) -> ChainComplex {
        fiber(&self.to_left)
    }

    pub fn right_fiber(&self) -> ChainComplex {
        fiber(&self.to_right)
    }

    /// Degreewise comparison of `fib(W -> left)` with `dual(fib(W -> right), n-1)`.
    pub fn lefschetz_homology_check(&self) -> Result<bool> {
        let a = self.left_fiber();
        let b = self.right_fiber().dual(self.dimension() - 1);
        let lo = a.lo().min(b.lo());
        let hi = a.hi().max(b.hi());
        for k in lo..=hi {
            if homology_at(&a, k)?.group != homology_at(&b, k)?.group {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// The same cobordism read backwards.
    pub fn reversed(&self) -> Result<Cobordism> {
        let mut c = Cobordism {
            left: self.right.clone(),
            right: self.left.clone(),
            w: self.w.clone(),
            to_left: self.to_right.clone(),
            to_right: self.to_left.clone(),
            lefschetz_checked: false,
            certificate: None,
        };
        if c.lefschetz_homology_check()? {
            c.lefschetz_checked = true;
            c.certificate = Some(LefschetzCertificate::HomologyLevel);
        }
        Ok(c)
    }
}

/// Result of surgery together with its trace.
#[derive(Debug, Clone)]
pub struct SurgeryOutcome {
    pub cobordism: Cobordism,
    pub result: QuadraticComplex,
}

/// Effect of surgery: `C'_r = C_r (+) D_{r+1} (+) D^{n-r+1}` with the trace `W_r = C_r (+) D_{r+1}`.
pub fn surgery(datum: &SurgeryDatum) -> Result<SurgeryOutcome> {
    let x = datum.target();
    if !x.is_poincare() {
        return Err(Error::Invalid("surgery needs a Poincaré target".into()));
    }
    let n = x.dimension();
    let ring = x.ring();
    let c = x.complex().clone();
    let g = datum.dual_map()?;
    let d = g.target.clone();
    let delta = datum.delta();
    let m = n + 1;
    let cd = |r: i64| c.dim(r);
    let dd = |r: i64| d.dim(r);
    let z = |rows: usize, cols: usize| Matrix::zeros(ring, rows, cols);

    let (clo, chi) = (c.lo(), c.hi());
    let (dlo, dhi) = (d.lo(), d.hi());
    let lo = clo.min(dlo - 1).min(n + 1 - dhi);
    let hi = chi.max(dhi - 1).max(n + 1 - dlo);
    let dims: Vec<usize> = (lo..=hi).map(|r| cd(r) + dd(r + 1) + dd(n - r + 1)).collect();

    let phi = |r: i64| x.symmetrization_at(r);
    let sym_delta0 = |r: i64| {
        // (1+T) delta_0 : D^{n+1-r} -> D_r
        let q = m - r;
        &delta.get(&d, m, 0, r) + &delta.get(&d, m, 0, q).transpose().scale_i64(sign(r * q))
    };
    let result_d = |r: i64| -> Matrix {
        let row0 = vec![
            c.d(r),
            z(cd(r - 1), dd(r + 1)),
            (&phi(r - 1) * &g.at(n - r + 1).transpose()).scale_i64(sign(n + 1)),
        ];
        let row1 = vec![g.at(r).scale_i64(sign(r)), d.d(r + 1), sym_delta0(r).scale_i64(sign(r))];
        let row2 = vec![
            z(dd(n - r + 2), cd(r)),
            z(dd(n - r + 2), dd(r + 1)),
            d.d(n - r + 2).transpose().scale_i64(sign(r)),
        ];
        Matrix::blocks(&[row0, row1, row2]).expect("block shapes")
    };
    let cprime = ChainComplex::from_fn(ring, lo, dims, result_d)
        .map_err(|e| Error::Internal(format!("surgery differential: {e}")))?;

    let top = x.s_max().max(delta.layers()) + 1;
    let mut psi = Family::new();
    for s in 0..=top {
        let si = s as i64;
        for r in lo..=hi {
            let q = n - r - si;
            // source blocks: C^q, D^{q+1}, D_{r+s+1}; target blocks: C_r, D_{r+1}, D^{n-r+1}
            let (s0, s1, s2) = (cd(q), dd(q + 1), dd(r + si + 1));
            let (t0, t1, t2) = (cd(r), dd(r + 1), dd(n - r + 1));
            if s0 + s1 + s2 == 0 || t0 + t1 + t2 == 0 {
                continue;
            }
            let block = if s == 0 {
                let mut corner = z(t2, s1);
                if t2 == s1 {
                    corner = Matrix::identity(ring, t2);
                }
                Matrix::blocks(&[
                    vec![x.psi(0, r), z(t0, s1), z(t0, s2)],
                    vec![z(t1, s0), z(t1, s1), z(t1, s2)],
                    vec![z(t2, s0), corner, z(t2, s2)],
                ])?
            } else {
                let p = q + 1;
                let t_psi = x.psi(s - 1, p).transpose().scale_i64(sign(r * p));
                let b01 = (&t_psi * &g.at(p).transpose()).scale_i64(sign(si));
                let t_del = delta.get(&d, m, s - 1, p).transpose().scale_i64(sign((r + 1) * p));
                let b11 = t_del.scale_i64(sign(n + r + si));
                Matrix::blocks(&[
                    vec![x.psi(s, r), b01, z(t0, s2)],
                    vec![z(t1, s0), b11, z(t1, s2)],
                    vec![z(t2, s0), z(t2, s1), z(t2, s2)],
                ])?
            };
            psi.insert(s, r, block);
        }
    }
    let result = QuadraticComplex::new(cprime.clone(), n, psi)
        .map_err(|e| Error::Internal(format!("surgery result structure: {e}")))?;
    if !result.is_poincare() {
        return Err(Error::Internal("surgery result is not Poincaré".into()));
    }

    // trace W_r = C_r (+) D_{r+1}
    let wlo = clo.min(dlo - 1);
    let whi = chi.max(dhi - 1);
    let wdims: Vec<usize> = (wlo..=whi).map(|r| cd(r) + dd(r + 1)).collect();
    let w = ChainComplex::from_fn(ring, wlo, wdims, |r| {
        Matrix::blocks(&[vec![c.d(r), z(cd(r - 1), dd(r + 1))], vec![g.at(r).scale_i64(sign(r)), d.d(r + 1)]])
            .expect("block shapes")
    })
    .map_err(|e| Error::Internal(format!("trace differential: {e}")))?;
    let to_left = ChainMap::from_fn(&w, &c, |r| Matrix::hstack(&[&Matrix::identity(ring, cd(r)), &z(cd(r), dd(r + 1))]).unwrap())
        .map_err(|e| Error::Internal(format!("trace projection: {e}")))?;
    let to_right = ChainMap::from_fn(&w, &cprime, |r| {
        Matrix::vstack(&[&Matrix::identity(ring, cd(r) + dd(r + 1)), &z(dd(n - r + 1), cd(r) + dd(r + 1))]).unwrap()
    })
    .map_err(|e| Error::Internal(format!("trace inclusion: {e}")))?;

    let eta = lefschetz_map(&to_left, &to_right, &g, n)?;
    if !is_quasi_iso(&eta)? {
        return Err(Error::Internal("Lefschetz map of the trace is not a quasi-isomorphism".into()));
    }
    let cobordism = Cobordism {
        left: x.clone(),
        right: result.clone(),
        w,
        to_left,
        to_right,
        lefschetz_checked: true,
        certificate: Some(LefschetzCertificate::ChainLevel(eta)),
    };
    Ok(SurgeryOutcome { cobordism, result })
}

/// `fib(p) -> D_{*+1} -> dual(dual(D, n), n-1) -> dual(fib(i), n-1)` for the trace of a surgery.
fn lefschetz_map(p: &ChainMap, i: &ChainMap, g: &ChainMap, n: i64) -> Result<ChainMap> {
    let ring = p.source.ring();
    let d = &g.target;
    let c = &p.target;
    let fib_p = fiber(p);
    let fib_i = fiber(i);
    let target = fib_i.dual(n - 1);
    let cprime = &i.target;
    let w = &i.source;
    // q_k : fib(i)_k = C'_{k+1} (+) W_k -> D^{n-k}, projecting onto the last block of C'_{k+1}
    let q = |k: i64| -> Matrix {
        let lead = c.dim(k + 1) + d.dim(k + 2);
        let last = d.dim(n - k);
        debug_assert_eq!(cprime.dim(k + 1), lead + last);
        Matrix::hstack(&[&Matrix::zeros(ring, last, lead), &Matrix::identity(ring, last), &Matrix::zeros(ring, last, w.dim(k))])
            .unwrap()
    };
    // retraction fib(p)_r = C_{r+1} (+) C_r (+) D_{r+1} -> D_{r+1}
    let rho = |r: i64| -> Matrix {
        Matrix::hstack(&[
            &g.at(r + 1).scale_i64(sign(r + 1)),
            &Matrix::zeros(ring, d.dim(r + 1), c.dim(r)),
            &Matrix::identity(ring, d.dim(r + 1)),
        ])
        .unwrap()
    };
    ChainMap::from_fn(&fib_p, &target, |r| (&q(n - 1 - r).transpose() * &rho(r)).scale_i64(sign(n * r)))
        .map_err(|e| Error::Internal(format!("Lefschetz map: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chaincx::homology_profile;
    use crate::exactalg::RingSpec;
    use crate::formcore::{e8, hyperbolic, FormParameter};

    fn form_complex(ring: RingSpec, which: &str) -> QuadraticComplex {
        let p = FormParameter::quadratic(ring);
        let f = match which {
            "h" => hyperbolic(&p, 1),
            "h2" => hyperbolic(&p, 2),
            _ => e8(&p).unwrap(),
        };
        QuadraticComplex::from_form(&f).unwrap()
    }

    fn vector_map(x: &QuadraticComplex, k: i64, v: &[i64]) -> ChainMap {
        let ring = x.ring();
        let t = ChainComplex::concentrated(ring, k, 1);
        let col = Matrix::from_rows(ring, &v.iter().map(|&a| vec![a]).collect::<Vec<_>>());
        ChainMap::from_fn(&t, x.complex(), |_| col.clone()).unwrap()
    }

    #[test]
    fn lagrangian_kills_hyperbolic() {
        for ring in [RingSpec::Integers, RingSpec::zmod(3).unwrap(), RingSpec::zmod(2).unwrap()] {
            let x = form_complex(ring, "h");
            let f = vector_map(&x, 0, &[1, 0]);
            let datum = solve_nullhomotopy(&x, &f).unwrap().expect("isotropic vector");
            let out = surgery(&datum).unwrap();
            assert!(homology_profile(out.result.complex()).unwrap().is_empty(), "{ring}");
            assert!(out.cobordism.lefschetz_checked);
        }
    }

    #[test]
    fn zero_datum_keeps_homology() {
        let x = form_complex(RingSpec::Integers, "e8");
        let t = ChainComplex::zero(x.ring());
        let f = ChainMap::zero(&t, x.complex());
        let out = surgery(&solve_nullhomotopy(&x, &f).unwrap().unwrap()).unwrap();
        assert_eq!(out.result.complex().tighten(), x.complex().tighten());
    }

    #[test]
    fn anisotropic_vector_is_obstructed() {
        let x = form_complex(RingSpec::Integers, "h");
        let f = vector_map(&x, 0, &[1, 1]);
        assert!(solve_nullhomotopy(&x, &f).unwrap().is_none());
    }

    #[test]
    fn non_primitive_isotropic_vector_fattens() {
        let x = form_complex(RingSpec::Integers, "h2");
        let f = vector_map(&x, 0, &[2, 0, 0, 0]);
        let out = surgery(&solve_nullhomotopy(&x, &f).unwrap().unwrap()).unwrap();
        let prof = homology_profile(out.result.complex()).unwrap();
        assert!(prof.iter().any(|(k, _)| *k != 0), "{prof:?}");
    }

    #[test]
    fn below_middle_zero_map_adds_hyperbolic() {
        let x = form_complex(RingSpec::Integers, "e8");
        let t = ChainComplex::concentrated(x.ring(), -1, 1);
        let f = ChainMap::zero(&t, x.complex());
        let datum = solve_nullhomotopy(&x, &f).unwrap().unwrap();
        let out = surgery(&datum).unwrap();
        let c = out.result.complex();
        assert_eq!(c.dim(0), 10);
    }
}
