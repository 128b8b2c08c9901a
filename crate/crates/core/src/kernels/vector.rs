use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{dot, Scalar};

/// Polynomial kernel hyperparameters. The defaults give `(u·v + 1)²`,
/// normalized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyParams {
    #[serde(default = "default_degree")]
    pub degree: u32,
    #[serde(default = "default_coef0")]
    pub coef0: f64,
    #[serde(default = "default_true")]
    pub normalize: bool,
}

fn default_degree() -> u32 {
    2
}

fn default_coef0() -> f64 {
    1.0
}

fn default_true() -> bool {
    true
}

impl Default for PolyParams {
    fn default() -> Self {
        PolyParams {
            degree: default_degree(),
            coef0: default_coef0(),
            normalize: true,
        }
    }
}

impl PolyParams {
    pub fn validate(&self) -> Result<()> {
        if self.degree == 0 {
            return Err(Error::Config("polynomial degree must be positive".into()));
        }
        Ok(())
    }

    pub fn evaluate<T: Scalar>(&self, u: &[T], v: &[T]) -> Result<T> {
        if self.normalize {
            normalized_poly_kernel(u, v, self.degree, self.coef0)
        } else {
            poly_kernel(u, v, self.degree, self.coef0)
        }
    }
}

/// `(u·v + coef0)^degree`.
pub fn poly_kernel<T: Scalar>(u: &[T], v: &[T], degree: u32, coef0: f64) -> Result<T> {
    if u.len() != v.len() {
        return Err(Error::Argument(format!(
            "polynomial kernel dimension mismatch: {} vs {}",
            u.len(),
            v.len()
        )));
    }
    if degree == 0 {
        return Err(Error::Argument("polynomial degree must be positive".into()));
    }
    Ok((dot(u, v) + T::of(coef0)).powi(degree as i32))
}

/// Polynomial kernel divided by the geometric mean of the self-kernels
/// (0 when either vanishes).
pub fn normalized_poly_kernel<T: Scalar>(u: &[T], v: &[T], degree: u32, coef0: f64) -> Result<T> {
    let k = poly_kernel(u, v, degree, coef0)?;
    let kuu = poly_kernel(u, u, degree, coef0)?;
    let kvv = poly_kernel(v, v, degree, coef0)?;
    Ok(super::normalize(k, kuu, kvv))
}
