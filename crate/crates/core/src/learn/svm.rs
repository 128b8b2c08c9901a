//! Soft-margin C-SVM dual solved by sequential minimal optimization over a
//! precomputed Gram matrix.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::GramMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmParams {
    pub c: f64,
    pub tol: f64,
    /// Consecutive sweeps without any update needed to stop.
    pub max_passes: usize,
    /// Hard cap on sweeps over the data.
    pub max_sweeps: usize,
    /// Multiplies `c` for instances of the named class.
    pub class_weights: BTreeMap<String, f64>,
}

impl Default for SvmParams {
    fn default() -> Self {
        SvmParams {
            c: 1.0,
            tol: 1e-3,
            max_passes: 10,
            max_sweeps: 10_000,
            class_weights: BTreeMap::new(),
        }
    }
}

impl SvmParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::Config(format!("svm.c must be positive, got {}", self.c)));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::Config(format!("svm.tol must be positive, got {}", self.tol)));
        }
        if self.max_passes == 0 || self.max_sweeps == 0 {
            return Err(Error::Config("svm.max_passes and svm.max_sweeps must be positive".into()));
        }
        for (class, w) in &self.class_weights {
            if !(*w > 0.0 && w.is_finite()) {
                return Err(Error::Config(format!("class weight for {class:?} must be positive")));
            }
        }
        Ok(())
    }

    fn cost(&self, class: &str) -> f64 {
        self.c * self.class_weights.get(class).copied().unwrap_or(1.0)
    }
}

/// Solution of one binary problem, over all training instances.
#[derive(Debug, Clone, PartialEq)]
pub struct BinarySolution<T> {
    pub alpha: Vec<T>,
    pub y: Vec<T>,
    /// Per-instance box constraint.
    pub c: Vec<T>,
    pub bias: T,
    /// Dual objective after each sweep.
    pub objective: Vec<f64>,
    pub sweeps: usize,
    pub converged: bool,
}

impl<T: Scalar> BinarySolution<T> {
    /// `Σ αᵢ yᵢ row[i] + b` for a row of kernel values against the
    /// training instances.
    pub fn decision(&self, row: &[T]) -> T {
        self.alpha
            .iter()
            .zip(&self.y)
            .zip(row)
            .fold(self.bias, |acc, ((&a, &y), &k)| acc + a * y * k)
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.alpha.len()).filter(|&i| self.alpha[i] > T::zero()).collect()
    }
}

struct Smo<'g, T> {
    k: &'g GramMatrix<T>,
    y: Vec<T>,
    c: Vec<T>,
    alpha: Vec<T>,
    /// `Eᵢ = f(xᵢ) − yᵢ` under the running bias.
    err: Vec<T>,
    b: T,
    eps: T,
}

impl<T: Scalar> Smo<'_, T> {
    fn violates(&self, i: usize, tol: T) -> bool {
        let r = self.err[i] * self.y[i];
        (r < -tol && self.alpha[i] < self.c[i]) || (r > tol && self.alpha[i] > T::zero())
    }

    fn snap(&self, a: T, c: T) -> T {
        if a < self.eps * c {
            T::zero()
        } else if a > c - self.eps * c {
            c
        } else {
            a
        }
    }

    /// Optimizes the pair `(i, j)` analytically. Returns whether anything
    /// moved.
    fn step(&mut self, i: usize, j: usize) -> bool {
        if i == j {
            return false;
        }
        let (y1, y2) = (self.y[i], self.y[j]);
        let (a1, a2) = (self.alpha[i], self.alpha[j]);
        let (c1, c2) = (self.c[i], self.c[j]);
        let (e1, e2) = (self.err[i], self.err[j]);
        let zero = T::zero();
        let (lo, hi) = if y1 != y2 {
            (zero.max(a2 - a1), c2.min(c1 + a2 - a1))
        } else {
            (zero.max(a1 + a2 - c1), c2.min(a1 + a2))
        };
        if hi - lo <= self.eps * c2 {
            return false;
        }
        let (k11, k12, k22) = (self.k.get(i, i), self.k.get(i, j), self.k.get(j, j));
        let eta = k11 + k22 - (k12 + k12);
        if eta <= self.eps {
            return false;
        }
        let mut new2 = a2 + y2 * (e1 - e2) / eta;
        new2 = self.snap(new2.max(lo).min(hi), c2);
        if (new2 - a2).abs() <= self.eps * (new2 + a2 + self.eps) {
            return false;
        }
        let s = y1 * y2;
        let new1 = self.snap(a1 + s * (a2 - new2), c1);
        let (d1, d2) = (y1 * (new1 - a1), y2 * (new2 - a2));

        let b1 = self.b - e1 - d1 * k11 - d2 * k12;
        let b2 = self.b - e2 - d1 * k12 - d2 * k22;
        let new_b = if new1 > zero && new1 < c1 {
            b1
        } else if new2 > zero && new2 < c2 {
            b2
        } else {
            (b1 + b2) / T::of(2.0)
        };
        let db = new_b - self.b;
        let (r1, r2) = (self.k.row(i), self.k.row(j));
        for (k, e) in self.err.iter_mut().enumerate() {
            *e += d1 * r1[k] + d2 * r2[k] + db;
        }
        self.alpha[i] = new1;
        self.alpha[j] = new2;
        self.b = new_b;
        true
    }

    /// Second choice: partners in order of decreasing `|Eᵢ − Eⱼ|`, ties by
    /// index. The widest gap may belong to a vector pinned at its bound, so
    /// the scan continues down the list rather than falling back to index
    /// order.
    fn examine(&mut self, i: usize) -> bool {
        let n = self.alpha.len();
        let ei = self.err[i];
        let mut order: Vec<(T, usize)> = (0..n).filter(|&j| j != i).map(|j| ((ei - self.err[j]).abs(), j)).collect();
        order.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal).then(a.1.cmp(&b.1)));
        order.into_iter().any(|(_, j)| self.step(i, j))
    }

    fn objective(&self) -> f64 {
        // g(xᵢ) = Eᵢ + yᵢ − b is the bias-free part of f.
        let mut sum_a = 0.0;
        let mut quad = 0.0;
        for i in 0..self.alpha.len() {
            let a = self.alpha[i].as_f64();
            if a != 0.0 {
                let g = (self.err[i] + self.y[i] - self.b).as_f64();
                sum_a += a;
                quad += a * self.y[i].as_f64() * g;
            }
        }
        sum_a - 0.5 * quad
    }

    /// Average over free vectors; otherwise the middle of the interval of
    /// biases satisfying the bound vectors' conditions.
    fn final_bias(&self) -> T {
        let g = |i: usize| self.err[i] + self.y[i] - self.b;
        let free: Vec<usize> = (0..self.alpha.len())
            .filter(|&i| self.alpha[i] > T::zero() && self.alpha[i] < self.c[i])
            .collect();
        if !free.is_empty() {
            let sum: T = free.iter().map(|&i| self.y[i] - g(i)).sum();
            return sum / T::of_usize(free.len());
        }
        let mut lo = T::neg_infinity();
        let mut hi = T::infinity();
        for i in 0..self.alpha.len() {
            let target = self.y[i] - g(i);
            // αᵢ = 0 needs yᵢ f ≥ 1, αᵢ = C needs yᵢ f ≤ 1.
            let lower = (self.alpha[i] == T::zero()) == (self.y[i] > T::zero());
            if lower {
                lo = lo.max(target);
            } else {
                hi = hi.min(target);
            }
        }
        if lo.is_finite() && hi.is_finite() {
            (lo + hi) / T::of(2.0)
        } else {
            self.b.max(lo).min(hi)
        }
    }
}

/// Trains one binary C-SVM. `y` holds ±1 and `c` the per-instance box.
///
/// Stops once `max_passes` consecutive sweeps find no pair to improve. The
/// sweep test uses half of `tol` so that the conditions still hold at `tol`
/// after the bias is recomputed from the free vectors.
pub fn train_binary<T: Scalar>(gram: &GramMatrix<T>, y: &[T], c: &[T], params: &SvmParams) -> Result<BinarySolution<T>> {
    params.validate()?;
    let n = gram.n();
    if y.len() != n || c.len() != n {
        return Err(Error::Argument(format!(
            "{} labels and {} costs for a {n}x{n} gram matrix",
            y.len(),
            c.len()
        )));
    }
    if y.iter().any(|&v| v != T::one() && v != -T::one()) {
        return Err(Error::Argument("binary labels must be +1 or -1".into()));
    }
    if !(y.iter().any(|&v| v > T::zero()) && y.iter().any(|&v| v < T::zero())) {
        return Err(Error::Training("both classes must be present".into()));
    }
    if gram.data().iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("gram matrix has non-finite entries".into()));
    }

    let mut smo = Smo {
        k: gram,
        y: y.to_vec(),
        c: c.to_vec(),
        alpha: vec![T::zero(); n],
        err: y.iter().map(|&v| -v).collect(),
        b: T::zero(),
        eps: T::of(1e-12).max(T::epsilon() * T::of(4.0)),
    };
    let tol = T::of(params.tol / 2.0);
    let mut objective = Vec::new();
    let mut passes = 0;
    let mut sweeps = 0;
    while passes < params.max_passes && sweeps < params.max_sweeps {
        let mut changed = 0;
        for i in 0..n {
            if smo.violates(i, tol) && smo.examine(i) {
                changed += 1;
            }
        }
        sweeps += 1;
        objective.push(smo.objective());
        if changed == 0 {
            passes += 1;
        } else {
            passes = 0;
        }
    }
    let converged = passes >= params.max_passes;
    let bias = smo.final_bias();
    Ok(BinarySolution {
        alpha: smo.alpha,
        y: smo.y,
        c: smo.c,
        bias,
        objective,
        sweeps,
        converged,
    })
}

/// One binary solution per class, `class` against the rest.
#[derive(Debug, Clone, PartialEq)]
pub struct OvrSolution<T> {
    pub classes: Vec<String>,
    pub solutions: Vec<BinarySolution<T>>,
}

pub fn train_ovr<T: Scalar>(gram: &GramMatrix<T>, labels: &[String], params: &SvmParams) -> Result<OvrSolution<T>> {
    let classes: BTreeSet<String> = labels.iter().cloned().collect();
    let classes: Vec<String> = classes.into_iter().collect();
    train_ovr_with_classes(gram, labels, &classes, params)
}

/// Like [`train_ovr`] over a declared label set; every class needs at least
/// one instance.
pub fn train_ovr_with_classes<T: Scalar>(
    gram: &GramMatrix<T>,
    labels: &[String],
    classes: &[String],
    params: &SvmParams,
) -> Result<OvrSolution<T>> {
    if classes.len() < 2 {
        return Err(Error::Training(format!("need at least 2 classes, got {}", classes.len())));
    }
    if labels.len() != gram.n() {
        return Err(Error::Argument(format!("{} labels for {} instances", labels.len(), gram.n())));
    }
    for l in labels {
        if !classes.contains(l) {
            return Err(Error::Training(format!("label {l:?} is not a declared class")));
        }
    }
    for class in classes {
        if !labels.contains(class) {
            return Err(Error::Training(format!("class {class:?} has no training instances")));
        }
    }
    let c: Vec<T> = labels.iter().map(|l| T::of(params.cost(l))).collect();
    let solutions = classes
        .iter()
        .map(|class| {
            let y: Vec<T> = labels
                .iter()
                .map(|l| if l == class { T::one() } else { -T::one() })
                .collect();
            train_binary(gram, &y, &c, params)
                .map_err(|e| Error::Training(format!("class {class:?}: {e}")))
        })
        .collect::<Result<_>>()?;
    Ok(OvrSolution {
        classes: classes.to_vec(),
        solutions,
    })
}

/// Per-instance box constraints for a binary problem.
pub fn costs<T: Scalar>(labels: &[String], params: &SvmParams) -> Vec<T> {
    labels.iter().map(|l| T::of(params.cost(l))).collect()
}
