//! One PASS/FAIL line per acceptance criterion, with its time limit.

mod common;

use std::collections::{BTreeSet, HashSet};
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use rand::Rng;

use hermsurg::chaincx::{homology_profile, trim, ChainComplex};
use hermsurg::exactalg::{kernel, Matrix, RingSpec};
use hermsurg::formcore::{
    classes, diagonal_lagrangian, gw0, hyperbolic, is_isometric_finite, is_lagrangian, lagrangians, positive_rank,
    signature, witt_class, witt_group, Flavor, FormParameter, UnimodularForm, Verdict,
};
use hermsurg::qcat::{build_hermitian_q, is_strongly_cocartesian, kan_extended_from_axes, random_cube_diagram, DiagramKind};
use hermsurg::qsurgery::random::random_unimodular;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn criterion(id: u32, name: &str, limit_secs: u64, run: impl FnOnce() -> Outcome) -> bool {
    let t = Instant::now();
    let o = run();
    let el = t.elapsed();
    let in_time = el <= Duration::from_secs(limit_secs);
    let pass = o.pass && in_time;
    println!(
        "[{}] criterion {id}: {name} ({:.2}s / {limit_secs}s) {}",
        if pass { "PASS" } else { "FAIL" },
        el.as_secs_f64(),
        o.detail
    );
    pass
}

fn info(line: String) {
    println!("       info: {line}");
}

fn fp(p: u64) -> RingSpec {
    RingSpec::zmod(p).unwrap()
}

fn big(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

fn report(r: &common::Report, min: usize) -> Outcome {
    let mut msg = format!("{} trials, {} failures", r.trials, r.failures.len());
    if let Some(first) = r.failures.first() {
        msg.push_str(&format!("; first: {first}"));
    }
    outcome(r.ok(min), msg)
}

fn c1_gw_of_integers() -> Outcome {
    let z = RingSpec::Integers;
    let mut notes = Vec::new();
    let mut ok = true;
    // (signature, n_+) computed directly from the Gram matrices
    let oracle = |f: &UnimodularForm| vec![BigInt::from(signature(f).unwrap()), BigInt::from(positive_rank(f).unwrap())];
    let cases = [
        (FormParameter::symmetric(z), vec![vec![1, 1], vec![-1, 0]], BigInt::from(1), "Z (+) Z"),
        (FormParameter::quadratic(z), vec![vec![8, 8], vec![0, 1]], BigInt::from(8), "8Z (+) Z inside Z (+) Z"),
    ];
    for (p, expected, index, display) in cases {
        let g = gw0(z, &p, &[], 4).unwrap();
        let coords: Vec<Vec<BigInt>> = g.group.generators.iter().map(|l| l.coords.clone()).collect();
        let want: Vec<Vec<BigInt>> = expected.iter().map(|v| big(v)).collect();
        let direct: Vec<Vec<BigInt>> = g.classes.iter().map(oracle).collect();
        let det = &coords[0][0] * &coords[1][1] - &coords[0][1] * &coords[1][0];
        let first_divisible = coords.iter().all(|c| (&c[0] % &index) == BigInt::from(0));
        let good = coords == want
            && direct == want
            && g.group.free_rank == 2
            && g.group.factors.is_empty()
            && det.magnitude() == index.magnitude()
            && first_divisible
            && g.display.contains(display);
        ok &= good;
        notes.push(format!("{}: {}", p.flavor, g.display));
    }
    outcome(ok, notes.join("; "))
}

fn c2_witt_groups() -> Outcome {
    let cases: [(RingSpec, Flavor, usize, Vec<i64>); 5] = [
        (fp(2), Flavor::Symmetric, 0, vec![2]),
        (fp(2), Flavor::Quadratic, 0, vec![2]),
        (fp(3), Flavor::Symmetric, 0, vec![4]),
        (fp(5), Flavor::Symmetric, 0, vec![2, 2]),
        (RingSpec::Integers, Flavor::Symmetric, 1, vec![]),
    ];
    let mut ok = true;
    let mut notes = Vec::new();
    for (ring, flavor, free, factors) in cases {
        let p = FormParameter::new(ring, flavor, 1).unwrap();
        match witt_group(ring, &p, 4) {
            Ok(g) => {
                let good = g.group.free_rank == free && g.group.factors == big(&factors);
                ok &= good;
                notes.push(format!("W({ring},{flavor})={}", g.display));
            }
            Err(e) => {
                ok = false;
                notes.push(format!("W({ring},{flavor}) error {e}"));
            }
        }
    }
    outcome(ok, notes.join(" "))
}

fn c6_hyperbolic_identities() -> Outcome {
    let mut ok = true;
    let mut lag = 0;
    let mut iso = 0;
    let mut odd_f2 = 0;
    for (ring, flavor) in [(fp(2), Flavor::Symmetric), (fp(2), Flavor::Quadratic), (fp(3), Flavor::Symmetric)] {
        let p = FormParameter::new(ring, flavor, 1).unwrap();
        for f in classes(&p, 3).unwrap().into_iter().flatten().map(|c| c.form) {
            let (doubled, diag) = diagonal_lagrangian(&f).unwrap();
            if !is_lagrangian(&doubled, &diag).unwrap() {
                ok = false;
                info(format!("no diagonal Lagrangian for {ring} {flavor} rank {}", f.rank()));
            }
            lag += 1;
            if f.rank() > 2 {
                continue;
            }
            let h = hyperbolic(&p, f.rank());
            let verdict = is_isometric_finite(&doubled, &h, 6).unwrap();
            // symmetric bilinear forms in characteristic 2: an odd form doubled stays odd, while
            // the hyperbolic form is even, so only even forms can be hyperbolic after doubling
            let odd = ring == fp(2) && flavor == Flavor::Symmetric && !f.is_even();
            match (verdict, odd) {
                (Verdict::Yes(i), false) => {
                    ok &= i.verify().is_ok();
                    iso += 1;
                }
                (Verdict::No(_), true) => odd_f2 += 1,
                (v, _) => {
                    ok = false;
                    info(format!("{ring} {flavor} rank {} doubled vs hyperbolic: {v:?}", f.rank()));
                }
            }
        }
    }
    info(format!("{odd_f2} odd symmetric forms over F2 doubled are metabolic but not hyperbolic (parity)"));
    outcome(ok, format!("{lag} diagonal Lagrangians, {iso} isometries to hyperbolic"))
}

fn c7_hermitian_q() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for ring in [fp(2), fp(3)] {
        let p = FormParameter::symmetric(ring);
        let (q, rep) = match build_hermitian_q(&p, 2, 4) {
            Ok(x) => x,
            Err(e) => return outcome(false, format!("{ring}: {e}")),
        };
        // Witt classes from the brute-force group computation at cap 4
        let witt: BTreeSet<Vec<BigInt>> = q.objects().iter().map(|o| witt_class(&o.form, 4).unwrap()).collect();
        let comps = q.components().len();
        let zero = q.objects().iter().position(|o| o.form.rank() == 0).unwrap();
        let mut homs_ok = true;
        for (x, o) in q.objects().iter().enumerate() {
            let lags = lagrangians(&o.form, None, 6).unwrap();
            let hom = q.hom(zero, x);
            let spans: HashSet<&Matrix> = hom.iter().map(|&f| &q.arrow(f).payload.i).collect();
            homs_ok &= hom.len() == lags.len()
                && spans.len() == hom.len()
                && spans.iter().all(|i| is_lagrangian(&o.form, i).unwrap());
        }
        let good = comps == witt.len() && homs_ok && rep.laws.associativity_triples > 0;
        ok &= good;
        notes.push(format!(
            "{ring}: {} objects, {} arrows, {} triples, {comps} components / {} Witt classes",
            rep.objects,
            rep.arrows,
            rep.laws.associativity_triples,
            witt.len()
        ));
    }
    outcome(ok, notes.join("; "))
}

fn c8_cocartesian() -> Outcome {
    let mut rng = common::rng(8);
    let kinds = [DiagramKind::KanExtended, DiagramKind::Perturbed, DiagramKind::Chain];
    let (mut n, mut yes, mut disagree) = (0, 0, 0);
    for round in 0..240 {
        let a = 1 + round % 2;
        let r = 1 + (round / 2) % 3;
        let ring = if round % 5 == 0 { RingSpec::Integers } else { fp([2, 3, 5][round % 3]) };
        let d = random_cube_diagram(a, r, ring, kinds[(round / 6) % 3], &mut rng).unwrap();
        let c1 = kan_extended_from_axes(&d).unwrap();
        let c3 = is_strongly_cocartesian(&d).unwrap();
        n += 1;
        yes += c1 as usize;
        disagree += (c1 != c3) as usize;
    }
    outcome(n >= 200 && disagree == 0, format!("{n} cubes, {yes} strongly cocartesian, {disagree} disagreements"))
}

/// Random complex of width at most 4 and rank at most 3 per degree: each differential is
/// a kernel basis of the previous one times a random matrix, then bases are scrambled.
fn random_complex(ring: RingSpec, rng: &mut impl Rng) -> ChainComplex {
    let width = rng.gen_range(1..=4);
    let lo = rng.gen_range(-2..=1);
    let dims: Vec<usize> = (0..width).map(|_| rng.gen_range(0..=3)).collect();
    let mut diffs = vec![Matrix::zeros(ring, 0, dims[0])];
    for j in 1..width {
        let prev = &diffs[j - 1];
        let ker = if j == 1 { Matrix::identity(ring, dims[0]) } else { kernel(prev).unwrap() };
        let coeff = Matrix::from_fn(ring, ker.cols(), dims[j], |_, _| {
            if rng.gen_bool(0.4) {
                ring.from_i64(0)
            } else {
                ring.from_i64(rng.gen_range(-3..=3))
            }
        });
        diffs.push(&ker * &coeff);
    }
    let bases: Vec<Matrix> = dims.iter().map(|&d| random_unimodular(ring, d, rng)).collect();
    let inv: Vec<Matrix> = bases.iter().map(|u| hermsurg::exactalg::try_inverse(u).unwrap()).collect();
    let scrambled = (0..width)
        .map(|j| if j == 0 { diffs[0].clone() } else { &(&bases[j - 1] * &diffs[j]) * &inv[j] })
        .collect();
    ChainComplex::new(ring, lo, dims, scrambled).unwrap()
}

fn c9_trim() -> Outcome {
    let mut rng = common::rng(9);
    let (mut n, mut bad, mut shrunk) = (0, 0, 0);
    let mut first = String::new();
    for ring in [RingSpec::Integers, fp(5)] {
        for _ in 0..110 {
            let c = random_complex(ring, &mut rng);
            n += 1;
            let problem = match trim(&c) {
                Err(e) => Some(format!("trim error {e}")),
                Ok(t) => {
                    if t.complex.total_rank() < c.total_rank() {
                        shrunk += 1;
                    }
                    if t.equivalence.verify().is_err() {
                        Some("h-data does not verify".to_string())
                    } else if t.equivalence.source() != &c || t.equivalence.target() != &t.complex {
                        Some("equivalence has the wrong ends".to_string())
                    } else if homology_profile(&t.complex).unwrap() != homology_profile(&c).unwrap() {
                        Some("homology changed".to_string())
                    } else {
                        None
                    }
                }
            };
            if let Some(p) = problem {
                bad += 1;
                if first.is_empty() {
                    first = format!("{ring}: {p}");
                }
            }
        }
    }
    outcome(n >= 200 && bad == 0, format!("{n} complexes, {shrunk} shrunk, {bad} failures {first}"))
}

fn main() {
    let mut all = true;
    all &= criterion(1, "GW0 of Z", 1, c1_gw_of_integers);
    all &= criterion(2, "Witt groups at rank cap 4", 60, c2_witt_groups);
    all &= criterion(3, "surgery connectivity and Lefschetz", 120, || {
        report(&common::check_surgery_contracts(3, 100), 200)
    });
    all &= criterion(4, "heart normalization round trip", 300, || {
        report(&common::check_normalize_round_trips(4, 50), 100)
    });
    all &= criterion(5, "automatic disjointness (k + l <= n - 1)", 60, || {
        report(&common::check_autodisjointness(5, 100, -1), 100)
    });
    let side = common::check_autodisjointness(5, 100, 0);
    info(format!(
        "k + l <= n (complementary dimension allowed): {} pairs, {} without an extension",
        side.trials,
        side.failures.len()
    ));
    all &= criterion(6, "hyperbolic identities over F2, F3", 60, c6_hyperbolic_identities);
    all &= criterion(7, "hermitian Q-construction at cap 2", 300, c7_hermitian_q);
    all &= criterion(8, "strongly cocartesian conditions agree", 30, c8_cocartesian);
    all &= criterion(9, "trim certificates", 30, c9_trim);
    println!("acceptance: {}", if all { "all criteria pass" } else { "some criteria FAIL" });
    if !all {
        std::process::exit(1);
    }
}
