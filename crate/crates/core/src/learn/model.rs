use std::collections::BTreeMap;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::combine::KernelSpec;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::svm::{BinarySolution, OvrSolution, SvmParams};
use super::fingerprint;

pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// One decision function `f`; the negative label scores `-f`.
    Binary,
    OneVsRest,
}

/// Decision function of one class over the shared support pool.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct ClassModel<T> {
    pub label: String,
    pub bias: T,
    /// `αᵢ yᵢ`, aligned with `support`.
    pub coeffs: Vec<T>,
    /// Indices into the model's support pool.
    pub support: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingMeta {
    pub svm: SvmParams,
    pub n_train: usize,
    /// Per class model.
    pub sweeps: Vec<usize>,
    pub converged: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Scalar, I: Serialize", deserialize = "T: Scalar, I: DeserializeOwned"))]
pub struct SvmModel<T, I> {
    pub version: u32,
    pub task: String,
    pub kernel_spec: KernelSpec,
    pub fingerprint: String,
    pub strategy: Strategy,
    pub classes: Vec<ClassModel<T>>,
    /// Training instances that are a support vector of at least one class,
    /// in training order.
    pub support_pool: Vec<I>,
    pub support_ids: Vec<String>,
    /// Every label the model can predict, with its index in `decision`
    /// output order.
    pub label_map: BTreeMap<String, usize>,
    pub training_meta: TrainingMeta,
    /// Whatever the caller needs to rebuild instances at prediction time.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preprocessing: Option<serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction<T> {
    pub label: String,
    /// `(label, f(x))` in label order.
    pub decisions: Vec<(String, T)>,
}

fn pool<T: Scalar>(sols: &[&BinarySolution<T>]) -> Vec<usize> {
    let n = sols.first().map_or(0, |s| s.alpha.len());
    (0..n).filter(|&i| sols.iter().any(|s| s.alpha[i] > T::zero())).collect()
}

fn class_model<T: Scalar>(label: &str, s: &BinarySolution<T>, pool: &[usize]) -> ClassModel<T> {
    let (support, coeffs) = pool
        .iter()
        .enumerate()
        .filter(|&(_, &i)| s.alpha[i] > T::zero())
        .map(|(k, &i)| (k, s.alpha[i] * s.y[i]))
        .unzip();
    ClassModel {
        label: label.to_string(),
        bias: s.bias,
        coeffs,
        support,
    }
}

pub struct ModelParts<'a, I> {
    pub task: &'a str,
    pub kernel_spec: &'a KernelSpec,
    pub instances: &'a [I],
    pub ids: &'a [String],
    pub svm: &'a SvmParams,
}

impl<T: Scalar, I: Clone> SvmModel<T, I> {
    fn assemble(parts: ModelParts<'_, I>, strategy: Strategy, labels: Vec<String>, sols: &[&BinarySolution<T>], class_labels: &[String]) -> Result<Self> {
        let n = parts.instances.len();
        if parts.ids.len() != n || sols.iter().any(|s| s.alpha.len() != n) {
            return Err(Error::Argument("instances, ids and solutions disagree in length".into()));
        }
        let pool = pool(sols);
        let classes = class_labels.iter().zip(sols).map(|(l, s)| class_model(l, s, &pool)).collect();
        let mut labels = labels;
        labels.sort();
        Ok(SvmModel {
            version: MODEL_VERSION,
            task: parts.task.to_string(),
            kernel_spec: parts.kernel_spec.clone(),
            fingerprint: fingerprint(parts.kernel_spec)?,
            strategy,
            classes,
            support_pool: pool.iter().map(|&i| parts.instances[i].clone()).collect(),
            support_ids: pool.iter().map(|&i| parts.ids[i].clone()).collect(),
            label_map: labels.into_iter().enumerate().map(|(k, l)| (l, k)).collect(),
            training_meta: TrainingMeta {
                svm: parts.svm.clone(),
                n_train: n,
                sweeps: sols.iter().map(|s| s.sweeps).collect(),
                converged: sols.iter().map(|s| s.converged).collect(),
            },
            preprocessing: None,
        })
    }

    /// A binary model whose positive side is `positive`.
    pub fn from_binary(parts: ModelParts<'_, I>, solution: &BinarySolution<T>, positive: &str, negative: &str) -> Result<Self> {
        if positive == negative {
            return Err(Error::Argument("binary labels must differ".into()));
        }
        let labels = vec![positive.to_string(), negative.to_string()];
        Self::assemble(parts, Strategy::Binary, labels, &[solution], &[positive.to_string()])
    }

    pub fn from_ovr(parts: ModelParts<'_, I>, solution: &OvrSolution<T>) -> Result<Self> {
        let sols: Vec<&BinarySolution<T>> = solution.solutions.iter().collect();
        Self::assemble(parts, Strategy::OneVsRest, solution.classes.clone(), &sols, &solution.classes)
    }
}

impl<T: Scalar, I> SvmModel<T, I> {
    pub fn labels(&self) -> Vec<&str> {
        let mut l: Vec<(&String, &usize)> = self.label_map.iter().collect();
        l.sort_by_key(|&(_, &k)| k);
        l.into_iter().map(|(s, _)| s.as_str()).collect()
    }

    /// Decision values for a row of `K(x, s)` over the support pool, and
    /// the argmax label. Ties go to the smallest label.
    pub fn predict(&self, row: &[T]) -> Result<Prediction<T>> {
        if row.len() != self.support_pool.len() {
            return Err(Error::Argument(format!(
                "kernel row has {} entries, model has {} support instances",
                row.len(),
                self.support_pool.len()
            )));
        }
        let f = |c: &ClassModel<T>| c.support.iter().zip(&c.coeffs).fold(c.bias, |acc, (&i, &a)| acc + a * row[i]);
        let mut decisions: Vec<(String, T)> = match self.strategy {
            Strategy::OneVsRest => self.classes.iter().map(|c| (c.label.clone(), f(c))).collect(),
            Strategy::Binary => {
                let c = &self.classes[0];
                let v = f(c);
                let neg = self.label_map.keys().find(|&l| *l != c.label).cloned().unwrap_or_default();
                vec![(c.label.clone(), v), (neg, -v)]
            }
        };
        decisions.sort_by(|a, b| a.0.cmp(&b.0));
        let mut best = 0;
        for (k, d) in decisions.iter().enumerate() {
            // Strictly greater keeps the earliest, i.e. smallest, label.
            if d.1 > decisions[best].1 {
                best = k;
            }
        }
        Ok(Prediction {
            label: decisions[best].0.clone(),
            decisions,
        })
    }
}

impl<T: Scalar, I: Serialize + DeserializeOwned> SvmModel<T, I> {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::Load(format!("not a model file: {e}")))?;
        match value.get("version").and_then(|v| v.as_u64()) {
            Some(v) if v == u64::from(MODEL_VERSION) => {}
            Some(v) => return Err(Error::Load(format!("unsupported model version {v}, expected {MODEL_VERSION}"))),
            None => return Err(Error::Load("missing model version".into())),
        }
        let model: Self = serde_json::from_value(value).map_err(|e| Error::Load(e.to_string()))?;
        model.check()?;
        Ok(model)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()? + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Load(m) => Error::Load(format!("{}: {m}", path.display())),
            e => e,
        })
    }

    fn check(&self) -> Result<()> {
        let n = self.support_pool.len();
        if self.support_ids.len() != n {
            return Err(Error::Load("support ids and support pool differ in length".into()));
        }
        let expected = match self.strategy {
            Strategy::Binary => 1,
            Strategy::OneVsRest => self.label_map.len(),
        };
        if self.classes.len() != expected || self.label_map.len() < 2 {
            return Err(Error::Load("class models do not match the label map".into()));
        }
        for c in &self.classes {
            if c.coeffs.len() != c.support.len() || c.support.iter().any(|&i| i >= n) {
                return Err(Error::Load(format!("class {:?} has inconsistent support", c.label)));
            }
            if !self.label_map.contains_key(&c.label) {
                return Err(Error::Load(format!("class {:?} missing from the label map", c.label)));
            }
        }
        if fingerprint(&self.kernel_spec)? != self.fingerprint {
            return Err(Error::Load("kernel fingerprint does not match kernel_spec".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combine::PairKernelParams;
    use crate::kernels::TreeKernelParams;
    use crate::learn::svm::{costs, train_binary, train_ovr};
    use crate::learn::GramMatrix;

    fn spec() -> KernelSpec {
        KernelSpec::SoftmaxPair(PairKernelParams::new(TreeKernelParams::ptk()))
    }

    fn block(n: usize, split: usize) -> GramMatrix<f64> {
        let data = (0..n * n)
            .map(|k| if (k / n < split) == (k % n < split) { 1.0 } else { 0.1 })
            .collect();
        GramMatrix::from_rows(data, (0..n).map(|i| format!("x{i}")).collect(), "fp").unwrap()
    }

    fn parts<'a>(spec: &'a KernelSpec, inst: &'a [u32], ids: &'a [String], svm: &'a SvmParams) -> ModelParts<'a, u32> {
        ModelParts {
            task: "pi",
            kernel_spec: spec,
            instances: inst,
            ids,
            svm,
        }
    }

    fn pool_row(g: &GramMatrix<f64>, m: &SvmModel<f64, u32>, i: usize) -> Vec<f64> {
        m.support_pool.iter().map(|&s| g.get(i, s as usize)).collect()
    }

    fn binary_model() -> (GramMatrix<f64>, SvmModel<f64, u32>) {
        let g = block(6, 3);
        let y: Vec<f64> = (0..6).map(|i| if i < 3 { 1.0 } else { -1.0 }).collect();
        let p = SvmParams::default();
        let s = train_binary(&g, &y, &[1.0; 6], &p).unwrap();
        let inst: Vec<u32> = (0..6).collect();
        let spec = spec();
        let m = SvmModel::from_binary(parts(&spec, &inst, &g.ids, &p), &s, "positive", "negative").unwrap();
        (g, m)
    }

    #[test]
    fn binary_predictions_and_roundtrip() {
        let (g, m) = binary_model();
        assert!(m.support_pool.len() <= 6);
        for i in 0..6 {
            let p = m.predict(&pool_row(&g, &m, i)).unwrap();
            assert_eq!(p.label, if i < 3 { "positive" } else { "negative" });
            assert_eq!(p.decisions[0].1, -p.decisions[1].1);
        }
        let back: SvmModel<f64, u32> = SvmModel::from_json(&m.to_json().unwrap()).unwrap();
        assert_eq!(back, m);
        for i in 0..6 {
            let row = pool_row(&g, &m, i);
            assert_eq!(back.predict(&row).unwrap(), m.predict(&row).unwrap());
        }
        assert!(matches!(m.predict(&[1.0]), Err(Error::Argument(_))));
    }

    #[test]
    fn zero_row_gives_biases() {
        let (_, m) = binary_model();
        let p = m.predict(&vec![0.0; m.support_pool.len()]).unwrap();
        assert_eq!(p.decisions[1], ("positive".to_string(), m.classes[0].bias));
    }

    #[test]
    fn load_errors() {
        let (_, m) = binary_model();
        let mut v: serde_json::Value = serde_json::from_str(&m.to_json().unwrap()).unwrap();
        v["version"] = 7.into();
        let err = SvmModel::<f64, u32>::from_json(&v.to_string()).unwrap_err();
        assert!(err.to_string().contains("unsupported model version 7"));
        let text = m.to_json().unwrap();
        let err = SvmModel::<f64, u32>::from_json(&text[..text.len() / 2]).unwrap_err();
        assert_eq!(err.category(), "model");
        let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
        v["fingerprint"] = "00".into();
        assert!(SvmModel::<f64, u32>::from_json(&v.to_string()).is_err());
    }

    #[test]
    fn ovr_model_and_ties() {
        let g = block(9, 3);
        let labels: Vec<String> = (0..9).map(|i| ["b", "a", "c"][i % 3].to_string()).collect();
        let p = SvmParams::default();
        let sol = train_ovr(&g, &labels, &p).unwrap();
        let inst: Vec<u32> = (0..9).collect();
        let spec = spec();
        let m = SvmModel::from_ovr(parts(&spec, &inst, &g.ids, &p), &sol).unwrap();
        assert_eq!(m.classes.len(), 3);
        assert_eq!(m.labels(), vec!["a", "b", "c"]);
        // Identical rows everywhere: all classes look alike up to bias.
        let flat = GramMatrix::from_rows(vec![1.0; 16], (0..4).map(|i| i.to_string()).collect(), "fp").unwrap();
        let labels: Vec<String> = ["y", "x", "y", "x"].map(String::from).to_vec();
        let sol = train_ovr(&flat, &labels, &p).unwrap();
        let inst: Vec<u32> = (0..4).collect();
        let m = SvmModel::from_ovr(parts(&spec, &inst, &flat.ids, &p), &sol).unwrap();
        let row = vec![1.0; m.support_pool.len()];
        assert_eq!(m.predict(&row).unwrap().label, "x");
        // Positive rescaling keeps the argmax.
        let mut scaled = m.clone();
        for c in &mut scaled.classes {
            c.bias *= 3.0;
            c.coeffs.iter_mut().for_each(|a| *a *= 3.0);
        }
        assert_eq!(scaled.predict(&row).unwrap().label, m.predict(&row).unwrap().label);
        assert_eq!(costs::<f64>(&labels, &p).len(), 4);
    }
}
