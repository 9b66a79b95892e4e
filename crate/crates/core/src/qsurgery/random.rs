//! Seeded random data for property suites and the command line.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::chaincx::{homology_at, ChainComplex, ChainMap};
use crate::error::Result;
use crate::exactalg::{Matrix, RingSpec};
use crate::formcore::{e8, hyperbolic, FormParameter, UnimodularForm};

use super::structure::QuadraticComplex;
use super::surgery::{surgery, Cobordism, SurgeryDatum, SurgeryOutcome};

fn small(ring: RingSpec, rng: &mut impl Rng, bound: i64) -> num_bigint::BigInt {
    ring.from_i64(rng.gen_range(-bound..=bound))
}

/// Product of random elementary matrices.
pub fn random_unimodular(ring: RingSpec, n: usize, rng: &mut impl Rng) -> Matrix {
    let mut u = Matrix::identity(ring, n);
    if n < 2 {
        return u;
    }
    for _ in 0..2 * n {
        let i = rng.gen_range(0..n);
        let mut j = rng.gen_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        let c = small(ring, rng, 2);
        for row in 0..n {
            let v = ring.add(u.get(row, i), &ring.mul(&c, u.get(row, j)));
            u.set(row, i, v);
        }
    }
    u
}

/// `x y` plane with `q(x) = q(y) = 1`, the Arf-invariant-one block in characteristic 2.
pub fn arf_one_plane(ring: RingSpec) -> Result<UnimodularForm> {
    let p = FormParameter::quadratic(ring);
    let one = ring.from_i64(1);
    UnimodularForm::new(p, Matrix::from_rows(ring, &[vec![0, 1], vec![1, 0]]), vec![one.clone(), one])
}

/// Random quadratic form of rank at most `max_rank` (even rank), in a scrambled basis.
/// Over the integers `with_e8` allows `±E8` summands beyond the rank bound.
pub fn random_quadratic_form(ring: RingSpec, max_rank: usize, with_e8: bool, rng: &mut impl Rng) -> Result<UnimodularForm> {
    let p = FormParameter::quadratic(ring);
    let mut f = UnimodularForm::zero(p.clone());
    let planes = rng.gen_range(1..=(max_rank / 2).max(1));
    for _ in 0..planes {
        let block = match ring {
            RingSpec::Integers => {
                if rng.gen_bool(0.5) {
                    hyperbolic(&p, 1)
                } else {
                    hyperbolic(&p, 1).negate()
                }
            }
            _ if ring.modulus() == Some(2) => {
                if rng.gen_bool(0.5) {
                    arf_one_plane(ring)?
                } else {
                    hyperbolic(&p, 1)
                }
            }
            _ => {
                // over odd fields: diagonal <a, b> with random units
                let units = ring.units()?;
                let a = units.choose(rng).unwrap().clone();
                let b = units.choose(rng).unwrap().clone();
                let two = ring.from_i64(2);
                let gram = Matrix::from_fn(ring, 2, 2, |i, j| {
                    if i != j {
                        ring.from_i64(0)
                    } else if i == 0 {
                        ring.mul(&two, &a)
                    } else {
                        ring.mul(&two, &b)
                    }
                });
                UnimodularForm::new(p.clone(), gram, vec![a, b])?
            }
        };
        f = f.orthogonal_sum(&block)?;
    }
    if with_e8 && ring == RingSpec::Integers && rng.gen_bool(0.5) {
        let e = e8(&p)?;
        f = f.orthogonal_sum(&if rng.gen_bool(0.5) { e } else { e.negate() })?;
    }
    let u = random_unimodular(ring, f.rank(), rng);
    f.transform(&u)
}

/// `T = R^rank` in degree `k` with a lift through random combinations of homology generators of the
/// dual complex plus a random boundary.
pub fn random_lift(x: &QuadraticComplex, k: i64, rank: usize, rng: &mut impl Rng) -> Result<Option<ChainMap>> {
    let ring = x.ring();
    let dual = x.dual();
    let h = homology_at(&dual, k)?;
    if dual.dim(k) == 0 {
        return Ok(None);
    }
    let t = ChainComplex::concentrated(ring, k, rank);
    let gens = &h.generators;
    let coeffs = Matrix::from_fn(ring, gens.cols(), rank, |_, _| small(ring, rng, 2));
    let mut col = gens * &coeffs;
    let up = dual.d(k + 1);
    if up.cols() > 0 && rng.gen_bool(0.5) {
        let y = Matrix::from_fn(ring, up.cols(), rank, |_, _| small(ring, rng, 1));
        col = &col + &(&up * &y);
    }
    let lift = ChainMap::from_fn(&t, &dual, |d| if d == k { col.clone() } else { Matrix::zeros(ring, dual.dim(d), t.dim(d)) })?;
    Ok(Some(lift))
}

/// Tries random data in random degrees until one has a nullhomotopy.
pub fn random_datum(
    x: &QuadraticComplex,
    degrees: &[i64],
    max_rank: usize,
    attempts: usize,
    rng: &mut impl Rng,
) -> Result<Option<SurgeryDatum>> {
    for _ in 0..attempts {
        let Some(&k) = degrees.choose(rng) else { return Ok(None) };
        let rank = rng.gen_range(1..=max_rank.max(1));
        let Some(lift) = random_lift(x, k, rank, rng)? else { continue };
        if lift.at(k).is_zero() && rng.gen_bool(0.7) {
            continue;
        }
        if let Some(d) = SurgeryDatum::from_lift(x, lift)? {
            return Ok(Some(d));
        }
    }
    Ok(None)
}

/// Degrees in which the dual complex is nonzero.
pub fn lift_degrees(x: &QuadraticComplex) -> Vec<i64> {
    let dual = x.dual();
    dual.degrees().filter(|&k| dual.dim(k) > 0).collect()
}

/// Applies up to `count` random surgeries (rank of `T` at most 2), keeping total rank at most `max_total`.
pub fn fatten_randomly(
    x: &QuadraticComplex,
    count: usize,
    max_total: usize,
    rng: &mut impl Rng,
) -> Result<(QuadraticComplex, Vec<Cobordism>)> {
    let mut cur = x.clone();
    let mut cobs = Vec::new();
    for _ in 0..count {
        let degrees = lift_degrees(&cur);
        let Some(datum) = random_datum(&cur, &degrees, 2, 20, rng)? else { break };
        let SurgeryOutcome { cobordism, result } = surgery(&datum)?;
        if result.complex().total_rank() > max_total {
            continue;
        }
        cobs.push(cobordism);
        cur = result;
    }
    Ok((cur, cobs))
}

/// `T1 (+) T2 -> C^{n-*}` from two lifts into the same dual complex.
pub fn combine_lifts(a: &ChainMap, b: &ChainMap) -> Result<ChainMap> {
    let t = a.source.direct_sum(&b.source)?;
    let target = a.target.clone();
    ChainMap::from_fn(&t, &target, |k| Matrix::hstack(&[&a.at(k), &b.at(k)]).expect("same target"))
}
