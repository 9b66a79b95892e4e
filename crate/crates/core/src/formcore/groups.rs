use std::collections::HashMap;

use num_bigint::BigInt;

use super::arf::arf;
use super::finite::{canonical_form, classes, det_class, lagrangians, CanonicalForm};
use super::form::{e8, hyperbolic, UnimodularForm};
use super::integral::{arf_plane, inertia};
use super::lagrangian::{find_lagrangian, LagrangianMode};
use super::param::{Flavor, FormParameter};
use crate::error::{Error, Result};
use crate::exactalg::{cokernel_coordinates, kernel, AbelianGroupPresentation, LabelledGenerator, Matrix, RingSpec};

/// A computed group with the images of named classes and a display string.
#[derive(Debug, Clone)]
pub struct GroupComputation {
    pub group: AbelianGroupPresentation,
    pub display: String,
    /// Isometry classes used as generators (finite rings) or the supplied generators (integers).
    pub classes: Vec<UnimodularForm>,
}

/// Short human label for a class: rank, determinant class and, where defined, Arf or parity.
pub fn class_label(f: &UnimodularForm) -> String {
    let mut s = format!("rank {} det {}", f.rank(), det_class(f));
    let p = f.param();
    if p.flavor == Flavor::Quadratic && p.ring == RingSpec::IntegersMod(2) && f.rank().is_multiple_of(2) {
        if let Ok(a) = arf(f) {
            s.push_str(&format!(" arf {a}"));
        }
    } else if p.ring.modulus() == Some(2) && p.flavor == Flavor::Symmetric {
        let odd = (0..f.rank()).any(|i| f.gram().get(i, i).bit(0));
        s.push_str(if odd { " odd" } else { " even" });
    }
    s
}

fn check_param(ring: RingSpec, param: &FormParameter) -> Result<()> {
    if param.ring != ring {
        return Err(Error::RingMismatch(format!("ring {ring} vs parameter over {}", param.ring)));
    }
    Ok(())
}

/// Grothendieck group of isometry classes under orthogonal sum.
pub fn gw0(ring: RingSpec, param: &FormParameter, generators: &[UnimodularForm], rank_cap: usize) -> Result<GroupComputation> {
    check_param(ring, param)?;
    if ring.is_integers() {
        return integral_group(param, generators, false);
    }
    finite_group(param, rank_cap, false, generators)
}

/// `gw0` modulo the classes that admit a Lagrangian.
pub fn witt_group(ring: RingSpec, param: &FormParameter, rank_cap: usize) -> Result<GroupComputation> {
    check_param(ring, param)?;
    if ring.is_integers() {
        return integral_group(param, &[], true);
    }
    finite_group(param, rank_cap, true, &[])
}

fn finite_group(param: &FormParameter, cap: usize, witt: bool, extra: &[UnimodularForm]) -> Result<GroupComputation> {
    let by_rank = classes(param, cap)?;
    let gens: Vec<&CanonicalForm> = by_rank.iter().skip(1).flatten().collect();
    let index: HashMap<Vec<u64>, usize> = gens.iter().enumerate().map(|(i, c)| (c.key.clone(), i)).collect();
    let g = gens.len();
    let mut cols: Vec<Vec<BigInt>> = Vec::new();
    for (i, x) in gens.iter().enumerate() {
        for (j, y) in gens.iter().enumerate().skip(i) {
            if x.form.rank() + y.form.rank() > cap {
                continue;
            }
            let sum = canonical_form(&x.form.orthogonal_sum(&y.form)?)?;
            let k = *index.get(&sum.key).ok_or_else(|| Error::Internal("sum of classes not enumerated".into()))?;
            let mut col = vec![BigInt::from(0); g];
            col[i] += 1;
            col[j] += 1;
            col[k] -= 1;
            cols.push(col);
        }
    }
    if witt {
        for (i, x) in gens.iter().enumerate() {
            if x.form.rank() % 2 == 0 && !lagrangians(&x.form, Some(1), cap)?.is_empty() {
                let mut col = vec![BigInt::from(0); g];
                col[i] = BigInt::from(1);
                cols.push(col);
            }
        }
    }
    let rel = Matrix::from_fn(RingSpec::Integers, g, cols.len(), |i, j| cols[j][i].clone());
    let (group, coords) = cokernel_coordinates(&rel)?;
    let mut labelled: Vec<LabelledGenerator> = gens
        .iter()
        .enumerate()
        .map(|(i, c)| LabelledGenerator { label: class_label(&c.form), coords: coords.col_vec(i) })
        .collect();
    for (t, f) in extra.iter().enumerate() {
        if f.rank() == 0 {
            continue;
        }
        let key = canonical_form(f)?.key;
        let i = *index.get(&key).ok_or_else(|| Error::CapExceeded(format!("generator {t} has rank above the cap")))?;
        labelled.push(LabelledGenerator { label: format!("input {t}"), coords: coords.col_vec(i) });
    }
    let display = group.to_string();
    Ok(GroupComputation {
        group: group.with_generators(labelled),
        display,
        classes: gens.iter().map(|c| c.form.clone()).collect(),
    })
}

/// Invariant coordinates over Z and the torsion orders of each coordinate (0 = free).
fn integral_coords(f: &UnimodularForm) -> Result<(Vec<BigInt>, Vec<u64>)> {
    let p = f.param();
    if p.epsilon == 1 {
        let (pos, neg) = inertia(f.gram());
        Ok((vec![BigInt::from(pos as i64 - neg as i64), BigInt::from(pos)], vec![0, 0]))
    } else if p.flavor == Flavor::Quadratic {
        Ok((vec![BigInt::from(f.rank() / 2), BigInt::from(arf(f)?)], vec![0, 2]))
    } else {
        Ok((vec![BigInt::from(f.rank() / 2)], vec![0]))
    }
}

fn default_generators(p: &FormParameter) -> Result<Vec<UnimodularForm>> {
    Ok(match (p.flavor, p.epsilon) {
        (Flavor::Symmetric, 1) => vec![UnimodularForm::diagonal(p.clone(), &[1])?, UnimodularForm::diagonal(p.clone(), &[-1])?],
        (Flavor::Quadratic, 1) | (Flavor::Even, 1) => vec![e8(p)?, hyperbolic(p, 1)],
        (Flavor::Quadratic, _) => vec![hyperbolic(p, 1), arf_plane(p)?],
        _ => vec![hyperbolic(p, 1)],
    })
}

fn metabolic_representatives(p: &FormParameter) -> Result<Vec<UnimodularForm>> {
    let mut out = vec![hyperbolic(p, 1)];
    if p.flavor == Flavor::Symmetric && p.epsilon == 1 {
        out.push(UnimodularForm::diagonal(p.clone(), &[1, -1])?);
    }
    for f in &out {
        if find_lagrangian(f, LagrangianMode::Invariant)?.is_none() {
            return Err(Error::Internal("metabolic representative without a Lagrangian".into()));
        }
    }
    Ok(out)
}

/// Over Z: the subgroup of the invariant lattice generated by the given classes
/// (quotiented by metabolic classes for the Witt group).
fn integral_group(p: &FormParameter, generators: &[UnimodularForm], witt: bool) -> Result<GroupComputation> {
    if p.flavor == Flavor::General {
        return Err(Error::Unsupported("general form parameters over Z".into()));
    }
    let z = RingSpec::Integers;
    let mut gens: Vec<UnimodularForm> =
        if generators.is_empty() { default_generators(p)? } else { generators.to_vec() };
    let user = gens.len();
    if witt {
        gens.extend(metabolic_representatives(p)?);
    }
    let mut vals = Vec::new();
    let mut orders = Vec::new();
    for f in &gens {
        if f.param() != p {
            return Err(Error::Invalid("generator has a different parameter".into()));
        }
        let (c, o) = integral_coords(f)?;
        vals.push(c);
        orders = o;
    }
    let g = gens.len();
    let a = orders.len();
    // kernel of Z^g -> Z^free (+) torsion, through [[M, 0], [N, diag(m)]]
    let tors: Vec<usize> = (0..a).filter(|&i| orders[i] != 0).collect();
    let lifted = Matrix::from_fn(z, a, g + tors.len(), |i, j| {
        if j < g {
            vals[j][i].clone()
        } else if tors[j - g] == i {
            BigInt::from(orders[i])
        } else {
            BigInt::from(0)
        }
    });
    let ker = kernel(&lifted)?;
    let mut rel = ker.submatrix(0, g, 0, ker.cols());
    if witt {
        let idx: Vec<usize> = (user..g).collect();
        rel = Matrix::hstack(&[&rel, &Matrix::identity(z, g).select_cols(&idx)])?;
    }
    let (group, _) = cokernel_coordinates(&rel)?;
    let labelled = (0..user)
        .map(|i| LabelledGenerator { label: integral_label(&gens[i]), coords: vals[i].clone() })
        .collect();
    let display = if witt { group.to_string() } else { image_display(&vals[..user], &orders) };
    Ok(GroupComputation { group: group.with_generators(labelled), display, classes: gens[..user].to_vec() })
}

fn integral_label(f: &UnimodularForm) -> String {
    match integral_coords(f) {
        Ok((c, _)) => format!(
            "rank {} ({})",
            f.rank(),
            c.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
        ),
        Err(_) => format!("rank {}", f.rank()),
    }
}

/// "8Z (+) Z inside Z (+) Z" when the image lattice is diagonal in the invariant coordinates.
fn image_display(vals: &[Vec<BigInt>], orders: &[u64]) -> String {
    let a = orders.len();
    let ambient: Vec<String> =
        orders.iter().map(|&o| if o == 0 { "Z".to_string() } else { format!("Z/{o}") }).collect();
    let ambient = ambient.join(" (+) ");
    let free: Vec<usize> = (0..a).filter(|&i| orders[i] == 0).collect();
    if free.len() != a {
        return format!("subgroup of {ambient}");
    }
    let rows: Vec<Vec<BigInt>> = vals.to_vec();
    let h = hermite_rows(rows, a);
    let diagonal = h.iter().enumerate().all(|(i, r)| r.iter().enumerate().all(|(j, x)| i == j || x == &BigInt::from(0)));
    if !diagonal || h.len() != a {
        return format!("rank {} subgroup of {ambient}", h.len());
    }
    let parts: Vec<String> = (0..a)
        .map(|i| {
            let d = &h[i][i];
            if *d == BigInt::from(1) { "Z".to_string() } else { format!("{d}Z") }
        })
        .collect();
    let image = parts.join(" (+) ");
    if image == ambient {
        ambient
    } else {
        format!("{image} inside {ambient}")
    }
}

/// Row Hermite normal form (nonzero rows only, positive pivots, reduced above).
fn hermite_rows(mut rows: Vec<Vec<BigInt>>, cols: usize) -> Vec<Vec<BigInt>> {
    use num_integer::Integer;
    use num_traits::{Signed, Zero};
    let mut out: Vec<Vec<BigInt>> = Vec::new();
    for c in 0..cols {
        loop {
            let nz: Vec<usize> = (0..rows.len()).filter(|&i| !rows[i][c].is_zero()).collect();
            if nz.len() <= 1 {
                break;
            }
            let p = *nz.iter().min_by_key(|&&i| rows[i][c].abs()).unwrap();
            for &i in &nz {
                if i != p {
                    let q = rows[i][c].div_floor(&rows[p][c]);
                    let rp = rows[p].clone();
                    for (x, y) in rows[i].iter_mut().zip(&rp) {
                        *x -= &q * y;
                    }
                }
            }
        }
        if let Some(i) = (0..rows.len()).find(|&i| !rows[i][c].is_zero()) {
            let mut r = rows.remove(i);
            if r[c].is_negative() {
                r.iter_mut().for_each(|x| *x = -&*x);
            }
            out.push(r);
        }
    }
    for i in 0..out.len() {
        let pc = (0..cols).find(|&c| !out[i][c].is_zero()).unwrap();
        for k in 0..i {
            let q = out[k][pc].div_floor(&out[i][pc]);
            let ri = out[i].clone();
            for (x, y) in out[k].iter_mut().zip(&ri) {
                *x -= &q * y;
            }
        }
    }
    out
}

/// Coordinates of the Witt class of a single form: through `witt_group` at `rank_cap` over a
/// finite ring; over Z the signature (symmetric), signature / 8 (quadratic, even) or the Arf
/// invariant (skew-quadratic), and no coordinates when the Witt group is trivial.
pub fn witt_class(f: &UnimodularForm, rank_cap: usize) -> Result<Vec<BigInt>> {
    let p = f.param();
    if p.ring.is_integers() {
        return Ok(match (p.flavor, p.epsilon) {
            (Flavor::Symmetric, 1) => vec![BigInt::from(super::integral::signature(f)?)],
            (Flavor::Quadratic, 1) | (Flavor::Even, 1) => vec![BigInt::from(super::integral::signature(f)? / 8)],
            (Flavor::Quadratic, _) => vec![BigInt::from(arf(f)?)],
            _ => Vec::new(),
        });
    }
    let w = witt_group(p.ring, p, rank_cap.max(f.rank()))?;
    let width = w.group.free_rank + w.group.factors.len();
    if f.rank() == 0 {
        return Ok(vec![BigInt::from(0); width]);
    }
    let key = canonical_form(f)?.key;
    for (c, g) in w.classes.iter().zip(&w.group.generators) {
        if canonical_form(c)?.key == key {
            return Ok(g.coords.clone());
        }
    }
    Err(Error::Internal("form not among the enumerated classes".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fp(p: u64) -> RingSpec {
        RingSpec::IntegersMod(p)
    }

    #[test]
    fn gw_and_witt_f3() {
        let p = FormParameter::symmetric(fp(3));
        assert_eq!(gw0(fp(3), &p, &[], 4).unwrap().display, "Z (+) Z/2");
        assert_eq!(witt_group(fp(3), &p, 4).unwrap().display, "Z/4");
    }

    #[test]
    fn integral_gw() {
        let z = RingSpec::Integers;
        let g = gw0(z, &FormParameter::symmetric(z), &[], 6).unwrap();
        assert_eq!(g.display, "Z (+) Z");
        let c: Vec<Vec<i64>> =
            g.group.generators.iter().map(|l| l.coords.iter().map(|x| i64::try_from(x).unwrap()).collect()).collect();
        assert_eq!(c, vec![vec![1, 1], vec![-1, 0]]);
        let q = gw0(z, &FormParameter::quadratic(z), &[], 6).unwrap();
        assert_eq!(q.display, "8Z (+) Z inside Z (+) Z");
        assert_eq!(witt_group(z, &FormParameter::symmetric(z), 6).unwrap().display, "Z");
    }
}
