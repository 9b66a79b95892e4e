//! JSON forms of matrices, unimodular forms, chain complexes and quadratic complexes.

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::chaincx::ChainComplex;
use crate::error::{Error, Result};
use crate::exactalg::{Matrix, RingSpec};
use crate::formcore::{Flavor, FormParameter, GeneralSpec, UnimodularForm};
use crate::qsurgery::{Family, QuadraticComplex};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RingJson {
    Z,
    Zmod(u64),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub ring: RingJson,
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<Vec<i64>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneralJson {
    pub relations: Vec<Vec<i64>>,
    pub tau: Vec<i64>,
    pub rho: Vec<i64>,
    pub action: Vec<Vec<Vec<i64>>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormJson {
    pub ring: RingJson,
    pub flavor: String,
    pub epsilon: i64,
    pub gram: Vec<Vec<i64>>,
    pub q: Vec<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub general: Option<GeneralJson>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexJson {
    pub ring: RingJson,
    pub lo: i64,
    pub hi: i64,
    pub dims: Vec<usize>,
    pub differentials: Vec<MatrixJson>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadraticComplexJson {
    pub ring: RingJson,
    pub lo: i64,
    pub hi: i64,
    pub dims: Vec<usize>,
    pub differentials: Vec<MatrixJson>,
    pub n: i64,
    /// `psi[s][j]` is the component `X^{n - (lo + j) - s} -> X_{lo + j}`.
    pub psi: Vec<Vec<MatrixJson>>,
}

/// Parses JSON text, reporting syntax errors with line and column.
pub fn parse<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(format!("line {} column {}: {e}", e.line(), e.column())))
}

pub fn to_string<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("plain data serializes")
}

pub fn ring_to_json(r: RingSpec) -> RingJson {
    match r.modulus() {
        None => RingJson::Z,
        Some(n) => RingJson::Zmod(n),
    }
}

pub fn ring_from_json(r: RingJson) -> Result<RingSpec> {
    match r {
        RingJson::Z => Ok(RingSpec::Integers),
        RingJson::Zmod(n) => RingSpec::zmod(n),
    }
}

fn small(x: &BigInt, r: RingSpec) -> Result<i64> {
    r.balanced(x).to_i64().ok_or_else(|| Error::Unsupported(format!("entry {x} does not fit in 64 bits")))
}

fn rows_to_matrix(r: RingSpec, rows: usize, cols: usize, entries: &[Vec<i64>]) -> Result<Matrix> {
    if entries.len() != rows || entries.iter().any(|row| row.len() != cols) {
        return Err(Error::Shape(format!("entries do not form a {rows}x{cols} array")));
    }
    Ok(Matrix::from_fn(r, rows, cols, |i, j| r.from_i64(entries[i][j])))
}

fn matrix_rows(m: &Matrix) -> Result<Vec<Vec<i64>>> {
    (0..m.rows()).map(|i| (0..m.cols()).map(|j| small(m.get(i, j), m.ring())).collect()).collect()
}

pub fn matrix_to_json(m: &Matrix) -> Result<MatrixJson> {
    Ok(MatrixJson { ring: ring_to_json(m.ring()), rows: m.rows(), cols: m.cols(), entries: matrix_rows(m)? })
}

pub fn matrix_from_json(j: &MatrixJson) -> Result<Matrix> {
    rows_to_matrix(ring_from_json(j.ring)?, j.rows, j.cols, &j.entries)
}

pub fn form_to_json(f: &UnimodularForm) -> Result<FormJson> {
    let p = f.param();
    let q = f.qvals().iter().map(|x| x.to_i64().ok_or_else(|| Error::Unsupported("q-value too large".into()))).collect::<Result<_>>()?;
    let general = p.general_q().map(|g| GeneralJson {
        relations: g.spec.relations.clone(),
        tau: g.spec.tau.clone(),
        rho: g.spec.rho.clone(),
        action: g.spec.action.clone(),
    });
    Ok(FormJson {
        ring: ring_to_json(p.ring),
        flavor: p.flavor.to_string(),
        epsilon: p.epsilon,
        gram: matrix_rows(f.gram())?,
        q,
        general,
    })
}

/// Validates every form invariant through [`UnimodularForm::new`].
pub fn form_from_json(j: &FormJson) -> Result<UnimodularForm> {
    let ring = ring_from_json(j.ring)?;
    let flavor: Flavor = j.flavor.parse()?;
    let param = match (&j.general, flavor) {
        (Some(g), Flavor::General) => FormParameter::general(
            ring,
            j.epsilon,
            GeneralSpec { relations: g.relations.clone(), tau: g.tau.clone(), rho: g.rho.clone(), action: g.action.clone() },
        )?,
        (None, Flavor::General) => return Err(Error::Invalid("general flavor needs a \"general\" block".into())),
        (Some(_), _) => return Err(Error::Invalid("\"general\" block given for a fixed flavor".into())),
        (None, fl) => FormParameter::new(ring, fl, j.epsilon)?,
    };
    let r = j.gram.len();
    let gram = rows_to_matrix(ring, r, r, &j.gram)?;
    UnimodularForm::new(param, gram, j.q.iter().map(|&x| BigInt::from(x)).collect())
}

pub fn complex_to_json(c: &ChainComplex) -> Result<ComplexJson> {
    Ok(ComplexJson {
        ring: ring_to_json(c.ring()),
        lo: c.lo(),
        hi: c.hi(),
        dims: c.dims().to_vec(),
        differentials: c.degrees().map(|k| matrix_to_json(&c.d(k))).collect::<Result<_>>()?,
    })
}

fn complex_parts(ring: RingJson, lo: i64, hi: i64, dims: &[usize], diffs: &[MatrixJson]) -> Result<ChainComplex> {
    let ring = ring_from_json(ring)?;
    if hi - lo + 1 != dims.len() as i64 || diffs.len() != dims.len() {
        return Err(Error::Shape(format!("degrees {lo}..={hi} with {} dims and {} differentials", dims.len(), diffs.len())));
    }
    let ms = diffs.iter().map(matrix_from_json).collect::<Result<Vec<_>>>()?;
    if ms.iter().any(|m| m.ring() != ring) {
        return Err(Error::RingMismatch("differential over a different ring".into()));
    }
    ChainComplex::new(ring, lo, dims.to_vec(), ms)
}

pub fn complex_from_json(j: &ComplexJson) -> Result<ChainComplex> {
    complex_parts(j.ring, j.lo, j.hi, &j.dims, &j.differentials)
}

pub fn quadratic_complex_to_json(x: &QuadraticComplex) -> Result<QuadraticComplexJson> {
    let c = complex_to_json(x.complex())?;
    let psi = (0..x.s_max().max(x.family().layers()))
        .map(|s| x.complex().degrees().map(|r| matrix_to_json(&x.psi(s, r))).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    Ok(QuadraticComplexJson {
        ring: c.ring,
        lo: c.lo,
        hi: c.hi,
        dims: c.dims,
        differentials: c.differentials,
        n: x.dimension(),
        psi,
    })
}

/// Validates the quadratic relations through [`QuadraticComplex::new`].
pub fn quadratic_complex_from_json(j: &QuadraticComplexJson) -> Result<QuadraticComplex> {
    let c = complex_parts(j.ring, j.lo, j.hi, &j.dims, &j.differentials)?;
    let mut psi = Family::new();
    for (s, layer) in j.psi.iter().enumerate() {
        if layer.len() != j.dims.len() {
            return Err(Error::Shape(format!("psi layer {s} has {} entries for {} degrees", layer.len(), j.dims.len())));
        }
        for (t, m) in layer.iter().enumerate() {
            let r = j.lo + t as i64;
            let m = matrix_from_json(m)?;
            let src = j.n - r - s as i64;
            if m.rows() != c.dim(r) || m.cols() != c.dim(src) {
                return Err(Error::Shape(format!("psi_{s} in degree {r} is {}x{}", m.rows(), m.cols())));
            }
            psi.insert(s, r, m);
        }
    }
    QuadraticComplex::new(c, j.n, psi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formcore::{e8, hyperbolic};

    #[test]
    fn matrix_schema_round_trip() {
        let text = r#"{"ring": {"Zmod": 5}, "rows": 2, "cols": 2, "entries": [[1, 2], [3, 4]]}"#;
        let m = matrix_from_json(&parse(text).unwrap()).unwrap();
        assert_eq!(m.get(1, 1), &BigInt::from(4));
        let back = matrix_to_json(&m).unwrap();
        assert_eq!(back.entries, vec![vec![1, 2], vec![-2, -1]]);
        assert_eq!(matrix_from_json(&back).unwrap(), m);
    }

    #[test]
    fn form_schema_round_trip() {
        let p = FormParameter::quadratic(RingSpec::Integers);
        for f in [hyperbolic(&p, 2), e8(&p).unwrap()] {
            let j = form_to_json(&f).unwrap();
            let text = to_string(&j);
            assert!(text.contains("\"ring\": \"Z\""));
            assert_eq!(form_from_json(&parse(&text).unwrap()).unwrap(), f);
        }
    }

    #[test]
    fn bad_form_is_invalid_and_bad_text_has_a_position() {
        let j: FormJson = parse(r#"{"ring":"Z","flavor":"symmetric","epsilon":1,"gram":[[2]],"q":[2]}"#).unwrap();
        assert!(matches!(form_from_json(&j), Err(Error::Invalid(_))));
        match parse::<FormJson>("{\n \"ring\": ") {
            Err(Error::Parse(msg)) => assert!(msg.contains("line 2")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn quadratic_complex_round_trip() {
        let p = FormParameter::quadratic(RingSpec::Integers);
        let x = QuadraticComplex::from_form(&hyperbolic(&p, 1)).unwrap().fatten(-1, 1).unwrap();
        let j = quadratic_complex_to_json(&x).unwrap();
        let y = quadratic_complex_from_json(&parse(&to_string(&j)).unwrap()).unwrap();
        assert_eq!(y.complex(), x.complex());
        assert_eq!(y.family(), x.family());
    }
}
