use serde_json::json;

use crate::chaincx::{homology_at, homology_profile, lowest_homology, trim, ChainComplex, ChainMap};
use crate::error::{Error, Result};
use crate::exactalg::{kernel, Matrix, RingSpec};
use crate::formcore::{inertia, UnimodularForm};

use super::structure::QuadraticComplex;
use super::surgery::{surgery, Cobordism, SurgeryDatum};

pub const DEFAULT_STEP_CAP: usize = 64;

/// One surgery performed by [`normalize_to_heart`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepLog {
    pub step: usize,
    pub k: i64,
    pub rank_t: usize,
    pub before: Vec<(i64, String)>,
    pub after: Vec<(i64, String)>,
}

impl StepLog {
    pub fn to_json_line(&self) -> String {
        let prof = |p: &[(i64, String)]| p.iter().map(|(k, g)| json!({"degree": k, "group": g})).collect::<Vec<_>>();
        json!({
            "step": self.step,
            "k": self.k,
            "rank_T": self.rank_t,
            "homology_before": prof(&self.before),
            "homology_after": prof(&self.after),
        })
        .to_string()
    }
}

#[derive(Debug, Clone)]
pub struct Normalized {
    pub form: UnimodularForm,
    pub cobordisms: Vec<Cobordism>,
    pub log: Vec<StepLog>,
    /// The structure after the last surgery, before trimming.
    pub last: QuadraticComplex,
}

pub fn profile_strings(c: &ChainComplex) -> Result<Vec<(i64, String)>> {
    Ok(homology_profile(c)?.into_iter().map(|(k, g)| (k, g.to_string())).collect())
}

/// Surgery datum on `T = R^m` in degree `k` hitting a minimal generating set of `H_k`.
pub fn generator_datum(x: &QuadraticComplex, k: i64) -> Result<Option<SurgeryDatum>> {
    let dual = x.dual();
    let h = homology_at(&dual, k)?;
    let m = h.generators.cols();
    let t = ChainComplex::concentrated(x.ring(), k, m);
    let lift = ChainMap::from_fn(&t, &dual, |d| {
        if d == k {
            h.generators.clone()
        } else {
            Matrix::zeros(x.ring(), dual.dim(d), t.dim(d))
        }
    })?;
    SurgeryDatum::from_lift(x, lift)
}

/// Kills homology below degree 0 by surgery, then trims to a form in degree 0.
pub fn normalize_to_heart(x: &QuadraticComplex, cap: usize) -> Result<Normalized> {
    if x.dimension() != 0 {
        return Err(Error::Invalid("normalization needs formal dimension 0".into()));
    }
    if !x.is_poincare() {
        return Err(Error::Invalid("normalization needs a Poincaré complex".into()));
    }
    let mut cur = x.clone();
    let mut cobordisms = Vec::new();
    let mut log = Vec::new();
    loop {
        let Some(h) = lowest_homology(cur.complex())? else { break };
        if h.degree >= 0 {
            break;
        }
        if log.len() >= cap {
            return Err(Error::CapExceeded(format!("normalization needs more than {cap} surgeries")));
        }
        let k = h.degree;
        let datum = generator_datum(&cur, k)?
            .ok_or_else(|| Error::Internal(format!("no nullhomotopy below the middle dimension (k = {k})")))?;
        let before = profile_strings(cur.complex())?;
        let out = surgery(&datum)?;
        let after = profile_strings(out.result.complex())?;
        if !homology_at(out.result.complex(), k)?.orders.is_empty() {
            return Err(Error::Internal(format!("surgery in degree {k} left homology there")));
        }
        log.push(StepLog { step: log.len(), k, rank_t: datum.t().total_rank(), before, after });
        cobordisms.push(out.cobordism);
        cur = out.result;
    }
    let trimmed = trim(cur.complex())?;
    let small = cur.push_forward(&trimmed.equivalence.f)?;
    let heart = small.complex().tighten();
    let heart_map = ChainMap::from_fn(small.complex(), &heart, |k| Matrix::identity(heart.ring(), heart.dim(k)))?;
    let heart_x = small.push_forward(&heart_map)?;
    let form = heart_x.to_form().map_err(|e| Error::Internal(format!("trimmed result is not a form: {e}")))?;
    Ok(Normalized { form, cobordisms, log, last: cur })
}

/// Signature of the pairing `(x, y) -> x((1+T)psi_0 y)` on degree-`n/2` cocycles, over the rationals.
pub fn rational_signature(x: &QuadraticComplex) -> Result<i64> {
    let n = x.dimension();
    if n.rem_euclid(2) != 0 {
        return Err(Error::Invalid(format!("rational signature needs even dimension, got {n}")));
    }
    if x.ring() != RingSpec::Integers {
        return Err(Error::Unsupported("rational signature outside the integers".into()));
    }
    let m = n / 2;
    let dual = x.dual();
    let cocycles = kernel(&dual.d(m))?;
    if cocycles.cols() == 0 {
        return Ok(0);
    }
    let phi = x.symmetrization_at(m);
    let g = &(&cocycles.transpose() * &phi) * &cocycles;
    if g.transpose() != g {
        // skew pairing in odd middle degree
        return Ok(0);
    }
    let (pos, neg) = inertia(&g);
    Ok(pos as i64 - neg as i64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formcore::{e8, hyperbolic, is_isometric_integral, signature, FormParameter};

    fn zq() -> FormParameter {
        FormParameter::quadratic(RingSpec::Integers)
    }

    #[test]
    fn form_is_returned_as_is() {
        let f = e8(&zq()).unwrap();
        let x = QuadraticComplex::from_form(&f).unwrap();
        let out = normalize_to_heart(&x, DEFAULT_STEP_CAP).unwrap();
        assert_eq!(out.form, f);
        assert!(out.cobordisms.is_empty());
    }

    #[test]
    fn split_fattening_is_trimmed() {
        let f = hyperbolic(&zq(), 1).orthogonal_sum(&e8(&zq()).unwrap()).unwrap();
        let x = QuadraticComplex::from_form(&f).unwrap().fatten(-2, 2).unwrap().fatten(0, 1).unwrap();
        let out = normalize_to_heart(&x, DEFAULT_STEP_CAP).unwrap();
        assert!(is_isometric_integral(&out.form, &f).unwrap().is_yes());
    }

    #[test]
    fn signatures() {
        let e = QuadraticComplex::from_form(&e8(&zq()).unwrap()).unwrap();
        assert_eq!(rational_signature(&e).unwrap(), 8);
        let h = QuadraticComplex::from_form(&hyperbolic(&zq(), 1)).unwrap();
        assert_eq!(rational_signature(&h).unwrap(), 0);
        assert_eq!(rational_signature(&e.direct_sum(&e.negate()).unwrap()).unwrap(), 0);
    }

    #[test]
    fn e8_with_torsion_fattening_normalizes_to_signature_8() {
        // isotropic 2v in E8 + H creates torsion off degree 0
        let f = e8(&zq()).unwrap().orthogonal_sum(&hyperbolic(&zq(), 1)).unwrap();
        let x = QuadraticComplex::from_form(&f).unwrap();
        let t = ChainComplex::concentrated(RingSpec::Integers, 0, 1);
        let mut v = vec![vec![0]; 10];
        v[8] = vec![2];
        let col = Matrix::from_rows(RingSpec::Integers, &v);
        let fmap = ChainMap::from_fn(&t, x.complex(), |_| col.clone()).unwrap();
        let datum = crate::qsurgery::solve_nullhomotopy(&x, &fmap).unwrap().unwrap();
        let fat = surgery(&datum).unwrap().result;
        assert!(profile_strings(fat.complex()).unwrap().iter().any(|(k, _)| *k < 0));
        assert_eq!(rational_signature(&fat).unwrap(), 8);
        let out = normalize_to_heart(&fat, DEFAULT_STEP_CAP).unwrap();
        assert!(!out.log.is_empty());
        assert_eq!(signature(&out.form).unwrap(), 8);
        for c in &out.cobordisms {
            assert_eq!(rational_signature(&c.left).unwrap(), rational_signature(&c.right).unwrap());
        }
    }
}
