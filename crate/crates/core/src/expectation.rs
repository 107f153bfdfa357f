//! Expected zero counts from ellipsoid fields: `𝔐 = n!/(2π)ⁿ · vol(ℰ₁, …, ℰₙ)`.

use crate::banach_field::BanachField;
use crate::convex::factorial;
use crate::error::{Error, Result};
use crate::function_space::FunctionSpace;
use crate::manifold::{QuadratureGrid, PERIOD};

/// `n!/(2π)ⁿ · vol(ℬ₁, …, ℬₙ)` for `n` fields on an `n`-manifold.
pub fn expected_zeros(fields: &[&BanachField]) -> Result<f64> {
    let Some(first) = fields.first() else {
        return Err(Error::config("no fields given"));
    };
    let n = first.dim();
    if fields.len() != n {
        return Err(Error::mismatch(format!("{n}-manifold needs {n} fields, got {}", fields.len())));
    }
    let vol = if fields.iter().all(|f| std::ptr::eq(*f, *first)) {
        first.volume()?
    } else {
        BanachField::mixed_volume(fields)?
    };
    Ok(factorial(n) / PERIOD.powi(n as i32) * vol)
}

/// Expected number of common zeros of independent Gaussian functions, one
/// drawn from each space, by quadrature on `grid`.
pub fn expected_zeros_of_spaces(spaces: &[&FunctionSpace], grid: &QuadratureGrid) -> Result<f64> {
    let mut fields: Vec<BanachField> = Vec::with_capacity(spaces.len());
    let mut slot = Vec::with_capacity(spaces.len());
    for s in spaces {
        match spaces.iter().position(|t| std::ptr::eq(*t, *s)) {
            Some(j) if j < fields.len() && slot.contains(&j) => slot.push(j),
            _ => {
                slot.push(fields.len());
                fields.push(s.ellipsoid_field(grid)?);
            }
        }
    }
    let refs: Vec<&BanachField> = slot.iter().map(|&i| &fields[i]).collect();
    expected_zeros(&refs)
}
