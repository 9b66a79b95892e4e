
use super::finite::{lagrangians, DEFAULT_ENUM_CAP};
use super::form::UnimodularForm;
use super::integral::lagrangian_integral;
use crate::error::{Error, Result};
use crate::exactalg::{snf, Matrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LagrangianMode {
    /// Complete search over all submodules (finite rings).
    Exhaustive,
    /// Decide by invariants and build a witness from a standard basis (integers).
    Invariant,
}

/// Columns span a direct summand of half rank on which `b` and `q` vanish, paired perfectly
/// with a complement.
pub fn is_lagrangian(f: &UnimodularForm, basis: &Matrix) -> Result<bool> {
    let ring = f.ring();
    let r = f.rank();
    let k = basis.cols();
    if basis.rows() != r {
        return Err(Error::Shape(format!("basis has {} rows for rank {r}", basis.rows())));
    }
    if 2 * k != r {
        return Ok(false);
    }
    if k == 0 {
        return Ok(true);
    }
    if !(&(&basis.transpose() * f.gram()) * basis).is_zero() {
        return Ok(false);
    }
    for j in 0..k {
        if f.eval_q(&basis.col_vec(j))? != f.param().q_zero() {
            return Ok(false);
        }
    }
    let s = snf(basis);
    let diag = s.diagonal();
    if diag.len() != k || !diag.iter().all(|d| ring.is_unit(d)) {
        return Ok(false);
    }
    let idx: Vec<usize> = (k..r).collect();
    let complement = s.u.select_cols(&idx);
    let pairing = &(&basis.transpose() * f.gram()) * &complement;
    Ok(ring.is_unit(&pairing.determinant()?))
}

/// The diagonal of `F (+) (-F)`.
pub fn diagonal_lagrangian(f: &UnimodularForm) -> Result<(UnimodularForm, Matrix)> {
    let doubled = f.orthogonal_sum(&f.negate())?;
    let id = Matrix::identity(f.ring(), f.rank());
    Ok((doubled, Matrix::vstack(&[&id, &id])?))
}

pub fn find_lagrangian(f: &UnimodularForm, mode: LagrangianMode) -> Result<Option<Matrix>> {
    find_lagrangian_capped(f, mode, DEFAULT_ENUM_CAP)
}

pub fn find_lagrangian_capped(f: &UnimodularForm, mode: LagrangianMode, cap: usize) -> Result<Option<Matrix>> {
    let found = match (mode, f.ring().is_finite()) {
        (LagrangianMode::Exhaustive, true) => lagrangians(f, Some(1), cap)?.into_iter().next(),
        (LagrangianMode::Invariant, false) => lagrangian_integral(f)?,
        (LagrangianMode::Exhaustive, false) => {
            return Err(Error::Unsupported("exhaustive Lagrangian search needs a finite ring".into()))
        }
        (LagrangianMode::Invariant, true) => {
            return Err(Error::Unsupported("invariant-mode Lagrangians are implemented over Z".into()))
        }
    };
    if let Some(l) = &found {
        if !is_lagrangian(f, l)? {
            return Err(Error::Internal("search returned a non-Lagrangian".into()));
        }
    }
    Ok(found)
}

