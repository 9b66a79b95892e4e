#![allow(dead_code)]

use hermsurg::chaincx::{homology_at, lowest_homology, ChainComplex};
use hermsurg::exactalg::RingSpec;
use hermsurg::formcore::{arf, signature, UnimodularForm};
use hermsurg::qsurgery::random::{combine_lifts, fatten_randomly, lift_degrees, random_lift, random_quadratic_form};
use hermsurg::qsurgery::{
    generator_datum, normalize_to_heart, nullhomotopy_for_lift, rational_signature, surgery, Cobordism,
    LefschetzCertificate, Pin, QuadraticComplex, SurgeryDatum, DEFAULT_STEP_CAP,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Default)]
pub struct Report {
    pub trials: usize,
    pub failures: Vec<String>,
}

impl Report {
    pub fn fail(&mut self, msg: impl Into<String>) {
        if self.failures.len() < 20 {
            self.failures.push(msg.into());
        } else {
            self.failures.push(String::new());
        }
    }

    pub fn ok(&self, min_trials: usize) -> bool {
        self.failures.is_empty() && self.trials >= min_trials
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn width(c: &ChainComplex) -> i64 {
    c.support().map_or(0, |(a, b)| b - a + 1)
}

fn cobordism_signatures_agree(c: &Cobordism) -> bool {
    if c.left.ring() != RingSpec::Integers || c.left.dimension().rem_euclid(2) != 0 {
        return true;
    }
    matches!((rational_signature(&c.left), rational_signature(&c.right)), (Ok(a), Ok(b)) if a == b)
}

/// Random targets: forms of rank at most 4, sometimes fattened once; width at most 4.
fn random_target(ring: RingSpec, rng: &mut ChaCha8Rng) -> QuadraticComplex {
    loop {
        let f = random_quadratic_form(ring, 4, false, rng).unwrap();
        let x = QuadraticComplex::from_form(&f).unwrap();
        let fat = if rng.gen_bool(0.6) { fatten_randomly(&x, 1, 8, rng).unwrap().0 } else { x };
        if width(fat.complex()) <= 4 {
            return fat;
        }
    }
}

/// Connectivity, below-middle, Lefschetz and signature checks on random surgeries.
pub fn check_surgery_contracts(seed: u64, per_ring: usize) -> Report {
    let mut rep = Report::default();
    let mut rng = rng(seed);
    for ring in [RingSpec::Integers, RingSpec::zmod(3).unwrap()] {
        let mut done = 0;
        let mut guard = 0;
        while done < per_ring && guard < per_ring * 50 {
            guard += 1;
            let x = random_target(ring, &mut rng);
            let degrees = lift_degrees(&x);
            let Some(&k1) = degrees.choose(&mut rng) else { continue };
            let r1 = rng.gen_range(1..=2);
            let Some(mut lift) = random_lift(&x, k1, r1, &mut rng).unwrap() else { continue };
            if rng.gen_bool(0.3) {
                let &k2 = degrees.choose(&mut rng).unwrap();
                if let Some(l2) = random_lift(&x, k2, rng.gen_range(1..=2), &mut rng).unwrap() {
                    lift = combine_lifts(&lift, &l2).unwrap();
                }
            }
            let Some(datum) = SurgeryDatum::from_lift(&x, lift).unwrap() else { continue };
            let kmin = datum.t().support().map_or(0, |(a, _)| a);
            let out = match surgery(&datum) {
                Ok(o) => o,
                Err(e) => {
                    rep.fail(format!("{ring}: surgery failed: {e}"));
                    continue;
                }
            };
            done += 1;
            rep.trials += 1;
            let cob = &out.cobordism;
            if !cob.lefschetz_checked || !matches!(cob.certificate, Some(LefschetzCertificate::ChainLevel(_))) {
                rep.fail(format!("{ring}: Lefschetz not certified"));
            }
            if !cob.lefschetz_homology_check().unwrap() {
                rep.fail(format!("{ring}: Lefschetz homology comparison failed"));
            }
            let fib = cob.right_fiber();
            for j in fib.degrees().filter(|&j| j < kmin) {
                if !homology_at(&fib, j).unwrap().is_zero() {
                    rep.fail(format!("{ring}: fib(trace -> result) has homology in degree {j} < {kmin}"));
                }
            }
            if !cobordism_signatures_agree(cob) {
                rep.fail(format!("{ring}: rational signature differs across the trace"));
            }
        }
        // below-middle data: T in the lowest negative degree hitting all of H_k
        let mut bm = 0;
        let mut guard = 0;
        while bm < per_ring / 4 && guard < per_ring * 50 {
            guard += 1;
            let x = random_target(ring, &mut rng);
            let Some(h) = lowest_homology(x.complex()).unwrap() else { continue };
            if h.degree >= 0 {
                continue;
            }
            let k = h.degree;
            let Some(datum) = generator_datum(&x, k).unwrap() else {
                rep.fail(format!("{ring}: no nullhomotopy below the middle (k = {k})"));
                continue;
            };
            let out = match surgery(&datum) {
                Ok(o) => o,
                Err(e) => {
                    rep.fail(format!("{ring}: surgery failed: {e}"));
                    continue;
                }
            };
            bm += 1;
            rep.trials += 1;
            let c2 = out.result.complex();
            if !homology_at(c2, k).unwrap().is_zero() {
                rep.fail(format!("{ring}: H_{k} survives surgery below the middle"));
            }
            let lo = c2.lo().min(x.complex().lo());
            for j in lo..k {
                if homology_at(c2, j).unwrap().group != homology_at(x.complex(), j).unwrap().group {
                    rep.fail(format!("{ring}: new homology in degree {j} below {k}"));
                }
            }
        }
    }
    rep
}

fn invariant(f: &UnimodularForm) -> i64 {
    if f.ring() == RingSpec::Integers {
        signature(f).unwrap()
    } else {
        arf(f).unwrap() as i64
    }
}

/// Fatten random forms by up to four surgeries and normalize back; compare signature or Arf.
pub fn check_normalize_round_trips(seed: u64, per_ring: usize) -> Report {
    let mut rep = Report::default();
    let mut rng = rng(seed);
    for (ring, max_rank) in [(RingSpec::Integers, 6), (RingSpec::zmod(2).unwrap(), 4)] {
        for _ in 0..per_ring {
            let f = random_quadratic_form(ring, max_rank, false, &mut rng).unwrap();
            let x = QuadraticComplex::from_form(&f).unwrap();
            let count = rng.gen_range(1..=4);
            let (fat, cobs) = fatten_randomly(&x, count, 16, &mut rng).unwrap();
            rep.trials += 1;
            let out = match normalize_to_heart(&fat, DEFAULT_STEP_CAP) {
                Ok(o) => o,
                Err(e) => {
                    rep.fail(format!("{ring}: normalize failed: {e}"));
                    continue;
                }
            };
            if invariant(&out.form) != invariant(&f) {
                rep.fail(format!("{ring}: invariant {} became {}", invariant(&f), invariant(&out.form)));
            }
            if cobs.iter().chain(&out.cobordisms).any(|c| !cobordism_signatures_agree(c) || !c.lefschetz_checked) {
                rep.fail(format!("{ring}: a cobordism failed its checks"));
            }
        }
    }
    rep
}

/// Pins the diagonal block of `delta` for the summand at `offset` in a direct sum.
fn pins_for(
    x: &QuadraticComplex,
    part: &SurgeryDatum,
    d_sum: &ChainComplex,
    offset_of: &dyn Fn(i64) -> usize,
    layers: usize,
) -> Vec<Pin> {
    let n = x.dimension();
    let d = part.d_complex();
    let mut pins = Vec::new();
    for s in 0..=layers {
        for r in d_sum.degrees() {
            let q = n + 1 - r - s as i64;
            let (rows, cols) = (d.dim(r), d.dim(q));
            if rows == 0 || cols == 0 {
                continue;
            }
            let value = part.delta().get(&d, n + 1, s, r);
            let (ro, co) = (offset_of(r), offset_of(q));
            pins.push(Pin { s, r, rows: (ro..ro + rows).collect(), cols: (co..co + cols).collect(), value });
        }
    }
    pins
}

/// For two solvable data in degrees `k, l` with `k + l <= bound`, the direct sum has a nullhomotopy
/// restricting to the given ones.
pub fn check_autodisjointness(seed: u64, pairs: usize, bound: i64) -> Report {
    let mut rep = Report::default();
    let mut rng = rng(seed);
    let mut guard = 0;
    while rep.trials < pairs && guard < pairs * 100 {
        guard += 1;
        let ring = if rng.gen_bool(0.5) { RingSpec::Integers } else { RingSpec::zmod(3).unwrap() };
        let x = random_target(ring, &mut rng);
        let degrees = lift_degrees(&x);
        let &k = degrees.choose(&mut rng).unwrap();
        let cands: Vec<i64> = degrees.iter().copied().filter(|&l| k + l <= bound).collect();
        let Some(&l) = cands.choose(&mut rng) else { continue };
        let Some(l1) = random_lift(&x, k, rng.gen_range(1..=2), &mut rng).unwrap() else { continue };
        let Some(l2) = random_lift(&x, l, rng.gen_range(1..=2), &mut rng).unwrap() else { continue };
        let Some(a) = SurgeryDatum::from_lift(&x, l1.clone()).unwrap() else { continue };
        let Some(b) = SurgeryDatum::from_lift(&x, l2.clone()).unwrap() else { continue };
        rep.trials += 1;
        let sum = combine_lifts(&l1, &l2).unwrap();
        let n = x.dimension();
        let d_sum = sum.source.dual(n);
        let da = a.d_complex();
        let layers = (x.s_max() + 2 * width(&d_sum) as usize + 4).max(6);
        let mut pins = pins_for(&x, &a, &d_sum, &|_| 0, layers);
        pins.extend(pins_for(&x, &b, &d_sum, &|r| da.dim(r), layers));
        match nullhomotopy_for_lift(&x, &sum, &pins) {
            Ok(Some(delta)) => {
                if SurgeryDatum::new(x.clone(), sum, delta).is_err() {
                    rep.fail(format!("{ring}: extension does not verify (k={k}, l={l})"));
                }
            }
            Ok(None) => rep.fail(format!("{ring}: no extension for k={k}, l={l}")),
            Err(e) => rep.fail(format!("{ring}: solver error {e}")),
        }
    }
    rep
}
