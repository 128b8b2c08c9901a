use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::combine::{CompositeKernel, PairKernel, PairTrees, RelationTrees};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A kernel over whole task instances.
pub trait InstanceKernel<T, I>: Sync {
    fn eval(&self, a: &I, b: &I) -> Result<T>;
}

impl<T: Scalar> InstanceKernel<T, PairTrees> for PairKernel<T> {
    fn eval(&self, a: &PairTrees, b: &PairTrees) -> Result<T> {
        self.evaluate(a, b)
    }
}

impl<T: Scalar> InstanceKernel<T, RelationTrees<T>> for CompositeKernel<T> {
    fn eval(&self, a: &RelationTrees<T>, b: &RelationTrees<T>) -> Result<T> {
        self.evaluate(a, b)
    }
}

/// Hex SHA-256 of the JSON form of a kernel description.
pub fn fingerprint<S: Serialize>(spec: &S) -> Result<String> {
    let json = serde_json::to_vec(spec)?;
    Ok(hex::encode(Sha256::digest(&json)))
}

/// Dense symmetric kernel matrix over a list of instances.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix<T> {
    n: usize,
    data: Vec<T>,
    pub ids: Vec<String>,
    pub fingerprint: String,
}

impl<T: Scalar> GramMatrix<T> {
    /// Wraps a row-major `n × n` matrix.
    pub fn from_rows(data: Vec<T>, ids: Vec<String>, fingerprint: impl Into<String>) -> Result<Self> {
        let n = ids.len();
        if data.len() != n * n {
            return Err(Error::Argument(format!(
                "gram data has {} entries, expected {n}x{n}",
                data.len()
            )));
        }
        Ok(GramMatrix {
            n,
            data,
            ids,
            fingerprint: fingerprint.into(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn is_symmetric(&self, tol: T) -> bool {
        (0..self.n).all(|i| (i + 1..self.n).all(|j| (self.get(i, j) - self.get(j, i)).abs() <= tol))
    }

    /// The submatrix over `idx` (rows and columns).
    pub fn select(&self, idx: &[usize]) -> Self {
        let data = idx
            .iter()
            .flat_map(|&i| idx.iter().map(move |&j| self.get(i, j)))
            .collect();
        GramMatrix {
            n: idx.len(),
            data,
            ids: idx.iter().map(|&i| self.ids[i].clone()).collect(),
            fingerprint: self.fingerprint.clone(),
        }
    }
}

fn with_pair(ids: &[String], i: usize, j: usize, e: Error) -> Error {
    Error::Pair {
        a: ids[i].clone(),
        b: ids[j].clone(),
        source: Box::new(e),
    }
}

/// Fills the upper triangle in parallel and mirrors it.
///
/// Every cell is an independent evaluation, so the result does not depend on
/// the number of worker threads.
pub fn compute_gram<T, I, K>(items: &[I], ids: Vec<String>, kernel: &K, fingerprint: impl Into<String>) -> Result<GramMatrix<T>>
where
    T: Scalar,
    I: Sync,
    K: InstanceKernel<T, I>,
{
    let n = items.len();
    if ids.len() != n {
        return Err(Error::Argument(format!("{} ids for {n} instances", ids.len())));
    }
    let upper: Vec<Vec<T>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (i..n)
                .map(|j| {
                    let v = kernel.eval(&items[i], &items[j]).map_err(|e| with_pair(&ids, i, j, e))?;
                    if v.is_finite() {
                        Ok(v)
                    } else {
                        Err(with_pair(&ids, i, j, Error::Numeric("kernel value is not finite".into())))
                    }
                })
                .collect::<Result<Vec<T>>>()
        })
        .collect::<Result<_>>()?;
    let mut data = vec![T::zero(); n * n];
    for (i, row) in upper.iter().enumerate() {
        for (k, &v) in row.iter().enumerate() {
            let j = i + k;
            data[i * n + j] = v;
            data[j * n + i] = v;
        }
    }
    GramMatrix::from_rows(data, ids, fingerprint)
}

/// `K(x, s)` for every query `x` against every reference `s`, one row per
/// query.
pub fn kernel_rows<T, I, K>(queries: &[I], references: &[I], kernel: &K) -> Result<Vec<Vec<T>>>
where
    T: Scalar,
    I: Sync,
    K: InstanceKernel<T, I>,
{
    queries
        .par_iter()
        .map(|q| references.iter().map(|r| kernel.eval(q, r)).collect())
        .collect()
}
