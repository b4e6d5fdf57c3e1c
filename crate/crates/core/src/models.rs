//! The classifier zoo: presence rules, a small decision tree, linear
//! classifiers, and a tiny feed-forward network with exact input gradients.
//!
//! Every model is a binary decision over a TF-IDF vector and declares which
//! vectorization (plain or normalized) it consumes. `decide` composes that
//! choice; `compile` resolves a model against a local view so precision
//! engines can evaluate perturbed multiplicity vectors without rebuilding
//! string-keyed vectors.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::corpus::{CorpusStats, Document, LocalView};
use crate::sampling::SeededRng;
use crate::vectorize::{vectorize, TfidfVector, VectorizerKind};
use crate::{Error, Result};

/// Link applied to a linear score. The decision is identical either way:
/// the logistic sigmoid exceeds 1/2 exactly when the raw score is positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Link {
    #[default]
    None,
    Logistic,
}

/// Classifies positively iff every required word is present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PresenceRule {
    pub required_words: Vec<String>,
    #[serde(default)]
    pub vectorizer: VectorizerKind,
}

impl PresenceRule {
    pub fn new<I, S>(required: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            required_words: required.into_iter().map(Into::into).collect(),
            vectorizer: VectorizerKind::Plain,
        }
    }
}

/// Classifies positively iff (w1 and w2) or w3 is present.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmallTree {
    pub words: [String; 3],
    #[serde(default)]
    pub vectorizer: VectorizerKind,
}

/// `1{lambda^T v + lambda0 > 0}` over the declared vectorization. Words
/// absent from `weights` have coefficient zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearClassifier {
    pub weights: BTreeMap<String, f64>,
    pub intercept: f64,
    #[serde(default)]
    pub link: Link,
    #[serde(default)]
    pub vectorizer: VectorizerKind,
}

impl LinearClassifier {
    pub fn new(weights: BTreeMap<String, f64>, intercept: f64) -> Self {
        Self { weights, intercept, link: Link::None, vectorizer: VectorizerKind::Plain }
    }

    pub fn weight(&self, word: &str) -> f64 {
        self.weights.get(word).copied().unwrap_or(0.0)
    }
}

/// One dense layer: `weights[out][in]`, one bias per output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub weights: Vec<Vec<f64>>,
    pub bias: Vec<f64>,
}

impl Layer {
    fn apply(&self, input: &[f64], out: &mut Vec<f64>) {
        out.clear();
        for (row, b) in self.weights.iter().zip(&self.bias) {
            out.push(row.iter().zip(input).map(|(w, x)| w * x).sum::<f64>() + b);
        }
    }
}

/// A small feed-forward network over a fixed word list: tanh hidden layers,
/// linear scalar output (the logit), decision at logit > 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TinyMlp {
    pub words: Vec<String>,
    pub layers: Vec<Layer>,
    #[serde(default)]
    pub vectorizer: VectorizerKind,
}

impl TinyMlp {
    /// Fresh network with small symmetric random init, deterministic in the
    /// rng stream.
    pub fn init(words: Vec<String>, hidden: &[usize], rng: &mut SeededRng) -> Self {
        use rand::Rng;
        let mut sizes = vec![words.len()];
        sizes.extend_from_slice(hidden);
        sizes.push(1);
        let layers = sizes
            .windows(2)
            .map(|w| {
                let (n_in, n_out) = (w[0], w[1]);
                let r = 1.0 / (n_in as f64).sqrt();
                Layer {
                    weights: (0..n_out)
                        .map(|_| (0..n_in).map(|_| rng.random_range(-r..r)).collect())
                        .collect(),
                    bias: vec![0.0; n_out],
                }
            })
            .collect();
        Self { words, layers, vectorizer: VectorizerKind::Plain }
    }

    /// The logit at a dense input indexed like `self.words`.
    pub fn forward(&self, input: &[f64]) -> f64 {
        let mut cur = input.to_vec();
        let mut next = Vec::new();
        for (k, layer) in self.layers.iter().enumerate() {
            layer.apply(&cur, &mut next);
            if k + 1 < self.layers.len() {
                for v in next.iter_mut() {
                    *v = v.tanh();
                }
            }
            std::mem::swap(&mut cur, &mut next);
        }
        cur[0]
    }

    /// Exact gradient of the logit with respect to the dense input, by
    /// backpropagation.
    pub fn input_gradient(&self, input: &[f64]) -> Vec<f64> {
        // Forward pass keeping pre-activation values per layer.
        let mut activations: Vec<Vec<f64>> = vec![input.to_vec()];
        let mut pre: Vec<Vec<f64>> = Vec::new();
        for (k, layer) in self.layers.iter().enumerate() {
            let mut z = Vec::new();
            layer.apply(activations.last().unwrap(), &mut z);
            pre.push(z.clone());
            if k + 1 < self.layers.len() {
                for v in z.iter_mut() {
                    *v = v.tanh();
                }
            }
            activations.push(z);
        }
        // Backward pass over pre-activations, starting at d logit = 1.
        let mut delta = vec![1.0f64];
        for k in (0..self.layers.len()).rev() {
            let layer = &self.layers[k];
            let n_in = layer.weights[0].len();
            let mut prev = vec![0.0; n_in];
            for (o, row) in layer.weights.iter().enumerate() {
                for (i, w) in row.iter().enumerate() {
                    prev[i] += w * delta[o];
                }
            }
            if k > 0 {
                for (i, v) in prev.iter_mut().enumerate() {
                    let t = pre[k - 1][i].tanh();
                    *v *= 1.0 - t * t;
                }
            }
            delta = prev;
        }
        delta
    }

    fn dense_input(&self, v: &TfidfVector) -> Vec<f64> {
        self.words.iter().map(|w| v.get(w)).collect()
    }
}

/// Any model of the zoo, with a serialization tag for persistence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Model {
    PresenceRule(PresenceRule),
    SmallTree(SmallTree),
    Linear(LinearClassifier),
    Mlp(TinyMlp),
}

impl Model {
    pub fn vectorizer(&self) -> VectorizerKind {
        match self {
            Model::PresenceRule(m) => m.vectorizer,
            Model::SmallTree(m) => m.vectorizer,
            Model::Linear(m) => m.vectorizer,
            Model::Mlp(m) => m.vectorizer,
        }
    }

    /// Decision on a raw document: vectorize with the declared kind, then
    /// threshold.
    pub fn decide(&self, doc: &Document, stats: &CorpusStats) -> bool {
        self.decide_vector(&vectorize(self.vectorizer(), doc, stats))
    }

    pub fn decide_vector(&self, v: &TfidfVector) -> bool {
        match self {
            Model::PresenceRule(m) => m.required_words.iter().all(|w| v.get(w) > 0.0),
            Model::SmallTree(m) => {
                (v.get(&m.words[0]) > 0.0 && v.get(&m.words[1]) > 0.0) || v.get(&m.words[2]) > 0.0
            }
            Model::Linear(_) | Model::Mlp(_) => self.score_vector(v) > 0.0,
        }
    }

    /// The thresholded score `g`: the raw margin for linear models, the
    /// logit for the MLP, the 0/1 decision itself for rule models.
    pub fn score_vector(&self, v: &TfidfVector) -> f64 {
        match self {
            Model::PresenceRule(_) | Model::SmallTree(_) => {
                if self.decide_vector(v) {
                    1.0
                } else {
                    0.0
                }
            }
            Model::Linear(m) => {
                m.intercept + v.coords.iter().map(|(w, x)| m.weight(w) * x).sum::<f64>()
            }
            Model::Mlp(m) => m.forward(&m.dense_input(v)),
        }
    }

    /// Words the decision rule reads: required words, tree words, nonzero
    /// linear coefficients, the MLP's word list. A normalized vectorizer
    /// additionally couples every document word through the norm, so the
    /// ignore-the-rest guarantee applies to plain-vectorizer models.
    pub fn dependency_set(&self) -> BTreeSet<&str> {
        match self {
            Model::PresenceRule(m) => m.required_words.iter().map(String::as_str).collect(),
            Model::SmallTree(m) => m.words.iter().map(String::as_str).collect(),
            Model::Linear(m) => m
                .weights
                .iter()
                .filter(|(_, &c)| c != 0.0)
                .map(|(w, _)| w.as_str())
                .collect(),
            Model::Mlp(m) => m.words.iter().map(String::as_str).collect(),
        }
    }

    /// Exact partials of the score with respect to the model's input
    /// coordinates: the coefficients themselves for a linear model,
    /// backpropagated partials for the MLP.
    pub fn input_gradient(&self, at: &TfidfVector) -> Result<BTreeMap<String, f64>> {
        match self {
            Model::Linear(m) => Ok(m.weights.clone()),
            Model::Mlp(m) => {
                let grad = m.input_gradient(&m.dense_input(at));
                Ok(m.words.iter().cloned().zip(grad).collect())
            }
            _ => Err(Error::NonDifferentiable),
        }
    }

    pub fn is_differentiable(&self) -> bool {
        matches!(self, Model::Linear(_) | Model::Mlp(_))
    }

    /// Resolve against a view for repeated evaluation over perturbed
    /// multiplicity vectors.
    pub fn compile<'m>(&'m self, view: &LocalView) -> CompiledModel<'m> {
        let idf = view.idf().to_vec();
        match self {
            Model::PresenceRule(m) => CompiledModel::Rule {
                required: m.required_words.iter().map(|w| resolve_positive(view, w)).collect(),
            },
            Model::SmallTree(m) => CompiledModel::Tree {
                slots: [
                    resolve_positive(view, &m.words[0]),
                    resolve_positive(view, &m.words[1]),
                    resolve_positive(view, &m.words[2]),
                ],
            },
            Model::Linear(m) => CompiledModel::Linear {
                alpha: view
                    .words()
                    .iter()
                    .zip(&idf)
                    .map(|(w, &idf)| m.weight(w) * idf)
                    .collect(),
                idf_sq: idf.iter().map(|v| v * v).collect(),
                intercept: m.intercept,
                normalized: m.vectorizer == VectorizerKind::Normalized,
            },
            Model::Mlp(m) => CompiledModel::Mlp {
                net: m,
                slots: m.words.iter().map(|w| view.word_index(w)).collect(),
                idf: idf.clone(),
                idf_sq: idf.iter().map(|v| v * v).collect(),
                normalized: m.vectorizer == VectorizerKind::Normalized,
                scratch: vec![0.0; m.words.len()],
            },
        }
    }
}

/// View index of a word, kept only if its coordinate can ever be positive
/// (present in the view and in vocabulary).
fn resolve_positive(view: &LocalView, word: &str) -> Option<usize> {
    view.word_index(word).filter(|&j| view.idf()[j] > 0.0)
}

/// A model resolved against one local view: decides directly from a
/// perturbed multiplicity vector.
pub enum CompiledModel<'m> {
    Rule {
        required: Vec<Option<usize>>,
    },
    Tree {
        slots: [Option<usize>; 3],
    },
    Linear {
        alpha: Vec<f64>,
        idf_sq: Vec<f64>,
        intercept: f64,
        normalized: bool,
    },
    Mlp {
        net: &'m TinyMlp,
        slots: Vec<Option<usize>>,
        idf: Vec<f64>,
        idf_sq: Vec<f64>,
        normalized: bool,
        scratch: Vec<f64>,
    },
}

impl CompiledModel<'_> {
    pub fn decide(&mut self, mults: &[u32]) -> bool {
        match self {
            CompiledModel::Rule { required } => {
                required.iter().all(|slot| slot.is_some_and(|j| mults[j] > 0))
            }
            CompiledModel::Tree { slots } => {
                let present = |s: &Option<usize>| s.is_some_and(|j| mults[j] > 0);
                (present(&slots[0]) && present(&slots[1])) || present(&slots[2])
            }
            CompiledModel::Linear { alpha, idf_sq, intercept, normalized } => {
                let s: f64 = alpha.iter().zip(mults).map(|(a, &m)| a * m as f64).sum();
                if *normalized {
                    let nsq: f64 = idf_sq
                        .iter()
                        .zip(mults)
                        .map(|(i2, &m)| i2 * (m as f64) * (m as f64))
                        .sum();
                    if nsq == 0.0 {
                        *intercept > 0.0
                    } else {
                        s / nsq.sqrt() + *intercept > 0.0
                    }
                } else {
                    s + *intercept > 0.0
                }
            }
            CompiledModel::Mlp { net, slots, idf, idf_sq, normalized, scratch } => {
                let norm = if *normalized {
                    let nsq: f64 = idf_sq
                        .iter()
                        .zip(mults)
                        .map(|(i2, &m)| i2 * (m as f64) * (m as f64))
                        .sum();
                    nsq.sqrt()
                } else {
                    1.0
                };
                for (slot, out) in slots.iter().zip(scratch.iter_mut()) {
                    *out = match slot {
                        Some(j) if norm > 0.0 => mults[*j] as f64 * idf[*j] / norm,
                        _ => 0.0,
                    };
                }
                net.forward(scratch) > 0.0
            }
        }
    }
}

/// What `train_tiny` fits.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelTemplate {
    Linear { link: Link },
    Mlp { hidden: Vec<usize> },
}

impl ModelTemplate {
    /// Three tanh-activated weight layers of width 16.
    pub fn default_mlp() -> Self {
        ModelTemplate::Mlp { hidden: vec![16, 16] }
    }
}

/// A fitted model plus its training accuracy.
#[derive(Debug, Clone)]
pub struct Trained {
    pub model: Model,
    pub train_accuracy: f64,
}

/// Full-batch gradient descent on the logistic loss. Deterministic given the
/// rng stream; zero epochs returns the initialized model unchanged.
pub fn train_tiny(
    template: &ModelTemplate,
    corpus: &[(Document, bool)],
    stats: &CorpusStats,
    vectorizer: VectorizerKind,
    epochs: usize,
    learning_rate: f64,
    rng: &mut SeededRng,
) -> Result<Trained> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let n_pos = corpus.iter().filter(|(_, y)| *y).count();
    if n_pos == 0 || n_pos == corpus.len() {
        return Err(Error::SingleClassCorpus);
    }
    let vocab: Vec<String> = stats.vocabulary().map(str::to_owned).collect();
    let inputs: Vec<Vec<f64>> = corpus
        .iter()
        .map(|(doc, _)| {
            let v = vectorize(vectorizer, doc, stats);
            vocab.iter().map(|w| v.get(w)).collect()
        })
        .collect();
    let labels: Vec<f64> = corpus.iter().map(|(_, y)| if *y { 1.0 } else { 0.0 }).collect();

    let model = match template {
        ModelTemplate::Linear { link } => {
            let mut weights = vec![0.0f64; vocab.len()];
            let mut intercept = 0.0f64;
            for _ in 0..epochs {
                let mut grad_w = vec![0.0f64; vocab.len()];
                let mut grad_b = 0.0f64;
                for (x, &y) in inputs.iter().zip(&labels) {
                    let z = intercept + x.iter().zip(&weights).map(|(a, b)| a * b).sum::<f64>();
                    let err = sigmoid(z) - y;
                    for (g, xi) in grad_w.iter_mut().zip(x) {
                        *g += err * xi;
                    }
                    grad_b += err;
                }
                let scale = learning_rate / inputs.len() as f64;
                for (w, g) in weights.iter_mut().zip(&grad_w) {
                    *w -= scale * g;
                }
                intercept -= scale * grad_b;
            }
            Model::Linear(LinearClassifier {
                weights: vocab.iter().cloned().zip(weights).collect(),
                intercept,
                link: *link,
                vectorizer,
            })
        }
        ModelTemplate::Mlp { hidden } => {
            let mut net = TinyMlp::init(vocab.clone(), hidden, rng);
            net.vectorizer = vectorizer;
            for _ in 0..epochs {
                let mut grads: Vec<Layer> = net
                    .layers
                    .iter()
                    .map(|l| Layer {
                        weights: l.weights.iter().map(|r| vec![0.0; r.len()]).collect(),
                        bias: vec![0.0; l.bias.len()],
                    })
                    .collect();
                for (x, &y) in inputs.iter().zip(&labels) {
                    backprop_logistic(&net, x, y, &mut grads);
                }
                let scale = learning_rate / inputs.len() as f64;
                for (layer, grad) in net.layers.iter_mut().zip(&grads) {
                    for (row, grow) in layer.weights.iter_mut().zip(&grad.weights) {
                        for (w, g) in row.iter_mut().zip(grow) {
                            *w -= scale * g;
                        }
                    }
                    for (b, g) in layer.bias.iter_mut().zip(&grad.bias) {
                        *b -= scale * g;
                    }
                }
            }
            Model::Mlp(net)
        }
    };

    let correct = inputs
        .iter()
        .zip(&labels)
        .filter(|(x, &y)| {
            let z = match &model {
                Model::Linear(m) => {
                    m.intercept
                        + vocab.iter().zip(x.iter()).map(|(w, xi)| m.weight(w) * xi).sum::<f64>()
                }
                Model::Mlp(net) => net.forward(x),
                _ => unreachable!(),
            };
            (z > 0.0) == (y > 0.5)
        })
        .count();
    Ok(Trained { model, train_accuracy: correct as f64 / inputs.len() as f64 })
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Accumulate logistic-loss gradients for one example into `grads`.
fn backprop_logistic(net: &TinyMlp, input: &[f64], label: f64, grads: &mut [Layer]) {
    let n_layers = net.layers.len();
    let mut activations: Vec<Vec<f64>> = vec![input.to_vec()];
    let mut pre: Vec<Vec<f64>> = Vec::new();
    for (k, layer) in net.layers.iter().enumerate() {
        let mut z = Vec::new();
        layer.apply(activations.last().unwrap(), &mut z);
        pre.push(z.clone());
        if k + 1 < n_layers {
            for v in z.iter_mut() {
                *v = v.tanh();
            }
        }
        activations.push(z);
    }
    let logit = activations.last().unwrap()[0];
    let mut delta = vec![sigmoid(logit) - label];
    for k in (0..n_layers).rev() {
        let layer = &net.layers[k];
        for (o, row) in layer.weights.iter().enumerate() {
            grads[k].bias[o] += delta[o];
            for i in 0..row.len() {
                grads[k].weights[o][i] += delta[o] * activations[k][i];
            }
        }
        if k > 0 {
            let n_in = layer.weights[0].len();
            let mut prev = vec![0.0; n_in];
            for (o, row) in layer.weights.iter().enumerate() {
                for (i, w) in row.iter().enumerate() {
                    prev[i] += w * delta[o];
                }
            }
            for (i, v) in prev.iter_mut().enumerate() {
                let t = pre[k - 1][i].tanh();
                *v *= 1.0 - t * t;
            }
            delta = prev;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{fit_corpus, local_view, tokenize, Document};
    use approx::assert_abs_diff_eq;

    fn doc(text: &str) -> Document {
        tokenize(text)
    }

    fn stats() -> CorpusStats {
        fit_corpus(&[
            doc("food is very good"),
            doc("service was bad"),
            doc("very bad food"),
            doc("good service"),
        ])
        .unwrap()
    }

    #[test]
    fn presence_rule_decides() {
        let model = Model::PresenceRule(PresenceRule::new(["very", "good"]));
        let s = stats();
        assert!(model.decide(&doc("food is very good"), &s));
        assert!(!model.decide(&doc("food is good"), &s));
    }

    #[test]
    fn constant_linear_model() {
        let model = Model::Linear(LinearClassifier::new(BTreeMap::new(), 1.0));
        let s = stats();
        assert!(model.decide(&doc("anything at all"), &s));
        assert!(model.decide(&doc("zzz"), &s));
    }

    #[test]
    fn small_tree_cases() {
        let tree = Model::SmallTree(SmallTree {
            words: ["not".into(), "bad".into(), "good".into()],
            vectorizer: VectorizerKind::Plain,
        });
        let s = fit_corpus(&[doc("not bad at all"), doc("good stuff"), doc("terrible")]).unwrap();
        assert!(tree.decide(&doc("not bad"), &s));
        assert!(tree.decide(&doc("good"), &s));
        assert!(!tree.decide(&doc("not terrible"), &s));
    }

    #[test]
    fn logistic_and_raw_threshold_agree() {
        let mut weights = BTreeMap::new();
        weights.insert("good".to_string(), 1.5);
        weights.insert("bad".to_string(), -2.0);
        let raw = Model::Linear(LinearClassifier {
            link: Link::None,
            ..LinearClassifier::new(weights.clone(), -0.5)
        });
        let logistic = Model::Linear(LinearClassifier {
            link: Link::Logistic,
            ..LinearClassifier::new(weights, -0.5)
        });
        let s = stats();
        for text in ["good good", "bad", "good bad", "very good service", "zzz"] {
            assert_eq!(raw.decide(&doc(text), &s), logistic.decide(&doc(text), &s));
        }
    }

    #[test]
    fn linear_gradient_is_coefficients() {
        let mut weights = BTreeMap::new();
        weights.insert("good".to_string(), 2.0);
        let model = Model::Linear(LinearClassifier::new(weights.clone(), 0.0));
        let s = stats();
        let v = crate::vectorize::tfidf(&doc("good food"), &s);
        assert_eq!(model.input_gradient(&v).unwrap(), weights);
    }

    #[test]
    fn rule_models_not_differentiable() {
        let model = Model::PresenceRule(PresenceRule::new(["x"]));
        let s = stats();
        let v = crate::vectorize::tfidf(&doc("x"), &s);
        assert!(matches!(model.input_gradient(&v), Err(Error::NonDifferentiable)));
    }

    #[test]
    fn mlp_gradient_matches_finite_differences() {
        let mut rng = SeededRng::new(17);
        let words: Vec<String> = (0..6).map(|i| format!("w{i}")).collect();
        let net = TinyMlp::init(words, &[16, 16], &mut rng);
        for trial in 0..100 {
            let mut t = rng.derive("fd", &[trial]);
            use rand::Rng;
            let x: Vec<f64> = (0..6).map(|_| t.random_range(-3.0..3.0)).collect();
            let grad = net.input_gradient(&x);
            let h = 1e-5;
            for i in 0..6 {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[i] += h;
                xm[i] -= h;
                let fd = (net.forward(&xp) - net.forward(&xm)) / (2.0 * h);
                assert_abs_diff_eq!(grad[i], fd, epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn zero_output_layer_zero_gradient() {
        let mut rng = SeededRng::new(18);
        let mut net = TinyMlp::init(vec!["a".into(), "b".into()], &[4], &mut rng);
        let last = net.layers.last_mut().unwrap();
        for row in last.weights.iter_mut() {
            row.iter_mut().for_each(|w| *w = 0.0);
        }
        let grad = net.input_gradient(&[1.0, -2.0]);
        assert!(grad.iter().all(|g| *g == 0.0));
    }

    #[test]
    fn compiled_matches_vector_path() {
        let s = stats();
        let example = doc("very good food very");
        let view = local_view(&example, &s).unwrap();
        let mut weights = BTreeMap::new();
        weights.insert("very".to_string(), 1.0);
        weights.insert("good".to_string(), 2.0);
        weights.insert("bad".to_string(), -3.0);
        let models = [
            Model::PresenceRule(PresenceRule::new(["very", "good"])),
            Model::Linear(LinearClassifier::new(weights.clone(), -1.0)),
            Model::Linear(LinearClassifier {
                vectorizer: VectorizerKind::Normalized,
                ..LinearClassifier::new(weights, -0.3)
            }),
        ];
        let dims: Vec<u32> = view.mult().to_vec();
        for model in &models {
            let mut compiled = model.compile(&view);
            let mut state = vec![0u32; dims.len()];
            loop {
                // Rebuild a perturbed document realizing this state and
                // compare against the document-vector route.
                let mut tokens: Vec<String> = vec!["UNK".into()];
                for (j, &c) in state.iter().enumerate() {
                    for _ in 0..c {
                        tokens.push(view.words()[j].clone());
                    }
                }
                let perturbed = Document::from_tokens(tokens).unwrap();
                assert_eq!(
                    compiled.decide(&state),
                    model.decide(&perturbed, &s),
                    "state {state:?} model {model:?}"
                );
                // Odometer.
                let mut j = dims.len();
                let mut done = true;
                while j > 0 {
                    j -= 1;
                    if state[j] < dims[j] {
                        state[j] += 1;
                        state[j + 1..].iter_mut().for_each(|v| *v = 0);
                        done = false;
                        break;
                    }
                }
                if done {
                    break;
                }
            }
        }
    }

    #[test]
    fn dummy_declaration_honesty() {
        // Perturbing coordinates outside the dependency set never changes
        // the score of a plain-vectorizer model.
        let mut weights = BTreeMap::new();
        weights.insert("good".to_string(), 1.0);
        weights.insert("dummy".to_string(), 0.0);
        let model = Model::Linear(LinearClassifier::new(weights, 0.2));
        assert!(!model.dependency_set().contains("dummy"));
        let s = fit_corpus(&[doc("good dummy"), doc("other words")]).unwrap();
        let base = model.score_vector(&crate::vectorize::tfidf(&doc("good"), &s));
        for k in 1..4 {
            let text = format!("good {}", vec!["dummy"; k].join(" "));
            let v = crate::vectorize::tfidf(&tokenize(&text), &s);
            assert_eq!(model.score_vector(&v), base);
        }
    }

    fn tiny_corpus() -> (Vec<(Document, bool)>, CorpusStats) {
        // Linearly separable on the words "good" vs "bad".
        let docs: Vec<(Document, bool)> = (0..40)
            .map(|i| {
                if i % 2 == 0 {
                    (doc(&format!("good stuff number{i} filler")), true)
                } else {
                    (doc(&format!("bad stuff number{i} filler")), false)
                }
            })
            .collect();
        let stats = fit_corpus(&docs.iter().map(|(d, _)| d.clone()).collect::<Vec<_>>()).unwrap();
        (docs, stats)
    }

    #[test]
    fn train_linear_separable_to_perfect_accuracy() {
        let (docs, s) = tiny_corpus();
        let mut rng = SeededRng::new(1);
        let trained = train_tiny(
            &ModelTemplate::Linear { link: Link::Logistic },
            &docs,
            &s,
            VectorizerKind::Plain,
            400,
            0.5,
            &mut rng,
        )
        .unwrap();
        assert_eq!(trained.train_accuracy, 1.0);
    }

    #[test]
    fn train_zero_epochs_returns_init() {
        let (docs, s) = tiny_corpus();
        let mut r1 = SeededRng::new(9);
        let mut r2 = SeededRng::new(9);
        let a = train_tiny(&ModelTemplate::default_mlp(), &docs, &s, VectorizerKind::Plain, 0, 0.1, &mut r1)
            .unwrap();
        let b = train_tiny(&ModelTemplate::default_mlp(), &docs, &s, VectorizerKind::Plain, 0, 0.1, &mut r2)
            .unwrap();
        assert_eq!(a.model, b.model);
    }

    #[test]
    fn train_seed_determinism() {
        let (docs, s) = tiny_corpus();
        let mut r1 = SeededRng::new(4);
        let mut r2 = SeededRng::new(4);
        let a = train_tiny(&ModelTemplate::default_mlp(), &docs, &s, VectorizerKind::Plain, 50, 0.3, &mut r1)
            .unwrap();
        let b = train_tiny(&ModelTemplate::default_mlp(), &docs, &s, VectorizerKind::Plain, 50, 0.3, &mut r2)
            .unwrap();
        assert_eq!(a.model, b.model);
        assert_eq!(a.train_accuracy, b.train_accuracy);
    }

    #[test]
    fn train_rejects_single_class() {
        let docs: Vec<(Document, bool)> = vec![(doc("a b"), true), (doc("c d"), true)];
        let s = fit_corpus(&[doc("a b"), doc("c d")]).unwrap();
        let mut rng = SeededRng::new(0);
        assert!(matches!(
            train_tiny(
                &ModelTemplate::Linear { link: Link::None },
                &docs,
                &s,
                VectorizerKind::Plain,
                5,
                0.1,
                &mut rng
            ),
            Err(Error::SingleClassCorpus)
        ));
    }

    #[test]
    fn model_json_round_trip() {
        let mut weights = BTreeMap::new();
        weights.insert("good".to_string(), 1.25);
        let models = [
            Model::PresenceRule(PresenceRule::new(["very", "good"])),
            Model::Linear(LinearClassifier {
                vectorizer: VectorizerKind::Normalized,
                link: Link::Logistic,
                ..LinearClassifier::new(weights, -0.5)
            }),
        ];
        for model in &models {
            let json = serde_json::to_string(model).unwrap();
            let back: Model = serde_json::from_str(&json).unwrap();
            assert_eq!(&back, model);
        }
        let tagged: serde_json::Value =
            serde_json::from_str(&serde_json::to_string(&models[0]).unwrap()).unwrap();
        assert_eq!(tagged["kind"], "presence_rule");
    }
}
