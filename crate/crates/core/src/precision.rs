//! Anchor precision, four ways: exact enumeration of the multiplicity law,
//! the closed form for presence rules, Monte-Carlo estimation, and the
//! Gaussian approximation for linear classifiers (plain and normalized
//! TF-IDF), each returning a tagged estimate with an error certificate where
//! one exists.

use serde::{Deserialize, Serialize};

use crate::corpus::LocalView;
use crate::models::{Model, PresenceRule};
use crate::sampling::{Anchor, BitSource, SeededRng};
use crate::stats::binomial_coefficient;
use crate::{Error, Result};

/// Default cap on joint multiplicity states for exact enumeration.
pub const ENUMERATION_CUTOFF: usize = 2_000_000;

/// The numerical constant of the Berry-Esseen style error bound
/// (16 * sqrt(2) * C_BE / sqrt(pi) with the Shevtsova constant, ~7.15).
pub const BERRY_ESSEEN_CONSTANT: f64 = 7.15;

/// Which route produced a precision value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    ClosedForm,
    MonteCarlo,
    Gaussian,
}

/// A precision value with its provenance: `error_bound` is the Hoeffding
/// half-width at 99% confidence for Monte-Carlo estimates and the
/// Berry-Esseen right-hand side for Gaussian ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrecisionEstimate {
    pub value: f64,
    pub method: Method,
    pub error_bound: Option<f64>,
    pub n_samples: Option<usize>,
}

/// Standard normal CDF via the complementary error function (erfc keeps full
/// double precision in both tails; absolute error well under 1e-12).
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-x / std::f64::consts::SQRT_2)
}

/// Upper tail `1 - Phi(x)`.
pub fn normal_sf(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(x / std::f64::consts::SQRT_2)
}

/// Walk every joint outcome of the multiplicity law for `anchor`, feeding
/// the perturbed multiplicity vector to `decide`, and accumulate the
/// probability mass of positive decisions.
///
/// Per-word masses are the exact dyadics `C(m-a, k) / 2^(m-a)`; for small
/// instances the returned sum is exact.
pub(crate) fn exact_precision_over_states<F>(
    view: &LocalView,
    anchor: &Anchor,
    cutoff: usize,
    mut decide: F,
) -> Result<f64>
where
    F: FnMut(&[u32]) -> bool,
{
    anchor.validate_against(view)?;
    let d = view.d();
    let widths: Vec<u32> = view
        .mult()
        .iter()
        .zip(anchor.counts())
        .map(|(&m, &a)| m - a)
        .collect();
    let mut states: u128 = 1;
    for &w in &widths {
        states = states
            .checked_mul(w as u128 + 1)
            .ok_or(Error::EnumerationExceeded { states: u128::MAX, cutoff })?;
    }
    if states > cutoff as u128 {
        return Err(Error::EnumerationExceeded { states, cutoff });
    }
    // Per-word pmf over k = 0..=w.
    let pmf: Vec<Vec<f64>> = widths
        .iter()
        .map(|&w| {
            let denom = 2f64.powi(w as i32);
            (0..=w)
                .map(|k| binomial_coefficient(w, k).expect("small") as f64 / denom)
                .collect()
        })
        .collect();
    let mut k = vec![0u32; d];
    let mut mults: Vec<u32> = anchor.counts().to_vec();
    let mut acc = 0.0f64;
    loop {
        let weight: f64 = k.iter().zip(&pmf).map(|(&ki, p)| p[ki as usize]).product();
        if decide(&mults) {
            acc += weight;
        }
        // Odometer, last digit fastest.
        let mut j = d;
        let mut done = true;
        while j > 0 {
            j -= 1;
            if k[j] < widths[j] {
                k[j] += 1;
                mults[j] += 1;
                for i in j + 1..d {
                    k[i] = 0;
                    mults[i] = anchor.counts()[i];
                }
                done = false;
                break;
            }
        }
        if done {
            break;
        }
    }
    Ok(acc)
}

/// Exact precision by enumerating the joint multiplicity law (default state
/// cutoff [`ENUMERATION_CUTOFF`]; larger instances should use Monte-Carlo).
pub fn precision_exact(model: &Model, view: &LocalView, anchor: &Anchor) -> Result<PrecisionEstimate> {
    precision_exact_with_cutoff(model, view, anchor, ENUMERATION_CUTOFF)
}

pub fn precision_exact_with_cutoff(
    model: &Model,
    view: &LocalView,
    anchor: &Anchor,
    cutoff: usize,
) -> Result<PrecisionEstimate> {
    let mut compiled = model.compile(view);
    let value = exact_precision_over_states(view, anchor, cutoff, |mults| compiled.decide(mults))?;
    Ok(PrecisionEstimate { value, method: Method::Exact, error_bound: None, n_samples: None })
}

/// Closed-form precision of a presence rule: the product over required
/// words absent from the anchor of `1 - 2^(-m_j)`.
pub fn precision_rule_closed_form(
    model: &PresenceRule,
    view: &LocalView,
    anchor: &Anchor,
) -> Result<PrecisionEstimate> {
    anchor.validate_against(view)?;
    let mut value = 1.0f64;
    for word in &model.required_words {
        let j = view
            .word_index(word)
            .filter(|&j| view.idf()[j] > 0.0)
            .ok_or(Error::NotPositivelyClassified)?;
        if anchor.counts()[j] == 0 {
            value *= 1.0 - 0.5f64.powi(view.mult()[j] as i32);
        }
    }
    Ok(PrecisionEstimate { value, method: Method::ClosedForm, error_bound: None, n_samples: None })
}

/// Monte-Carlo precision: the empirical mean of the model's decision over
/// `n` draws of the multiplicity law, using the supplied stream. The error
/// bound is the single-anchor Hoeffding half-width at 99% confidence.
pub fn precision_monte_carlo(
    model: &Model,
    view: &LocalView,
    anchor: &Anchor,
    n: usize,
    rng: &mut SeededRng,
) -> Result<PrecisionEstimate> {
    if n == 0 {
        return Err(Error::InvalidParameter("precision_monte_carlo requires n >= 1".into()));
    }
    anchor.validate_against(view)?;
    let mut compiled = model.compile(view);
    let widths: Vec<u32> = view
        .mult()
        .iter()
        .zip(anchor.counts())
        .map(|(&m, &a)| m - a)
        .collect();
    let mut mults: Vec<u32> = anchor.counts().to_vec();
    let mut hits = 0usize;
    let mut bits = BitSource::new(rng);
    for _ in 0..n {
        for (j, &w) in widths.iter().enumerate() {
            if w > 0 {
                mults[j] = anchor.counts()[j] + draw_binomial_bits(&mut bits, w);
            }
        }
        if compiled.decide(&mults) {
            hits += 1;
        }
    }
    Ok(PrecisionEstimate {
        value: hits as f64 / n as f64,
        method: Method::MonteCarlo,
        error_bound: Some(hoeffding_half_width(n, 0.99)),
        n_samples: Some(n),
    })
}

/// `Binomial(w, 1/2)` as the popcount of `w` fair bits.
#[inline]
pub(crate) fn draw_binomial_bits(bits: &mut BitSource<'_>, w: u32) -> u32 {
    let mut remaining = w;
    let mut total = 0u32;
    while remaining > 0 {
        let take = remaining.min(64);
        total += bits.take(take).count_ones();
        remaining -= take;
    }
    total
}

/// The `delta` with `2 exp(-2 n delta^2) = 1 - confidence`.
pub fn hoeffding_half_width(n: usize, confidence: f64) -> f64 {
    ((2.0 / (1.0 - confidence)).ln() / (2.0 * n as f64)).sqrt()
}

/// Inputs of the Gaussian approximation for a linear classifier at one
/// anchor: `alpha_j = lambda_j * idf_j`, the multiplicities, the anchor
/// counts, the intercept, and the raw idf values (needed in the normalized
/// variant).
#[derive(Debug, Clone, PartialEq)]
pub struct LinearApproxInputs {
    pub alpha: Vec<f64>,
    pub mult: Vec<u32>,
    pub anchor: Vec<u32>,
    pub lambda0: f64,
    pub idf: Vec<f64>,
}

impl LinearApproxInputs {
    pub fn from_model(
        model: &crate::models::LinearClassifier,
        view: &LocalView,
        anchor: &Anchor,
    ) -> Result<Self> {
        anchor.validate_against(view)?;
        let alpha = view
            .words()
            .iter()
            .zip(view.idf())
            .map(|(w, &idf)| model.weight(w) * idf)
            .collect();
        Ok(Self {
            alpha,
            mult: view.mult().to_vec(),
            anchor: anchor.counts().to_vec(),
            lambda0: model.intercept,
            idf: view.idf().to_vec(),
        })
    }

    /// The classifier margin on the unperturbed example:
    /// `lambda0 + sum_j alpha_j m_j`. Positive iff the example is classified 1.
    pub fn gamma(&self) -> f64 {
        self.lambda0 + self.alpha.iter().zip(&self.mult).map(|(a, &m)| a * m as f64).sum::<f64>()
    }

    pub fn d(&self) -> usize {
        self.alpha.len()
    }

    pub fn b(&self) -> u32 {
        self.mult.iter().sum()
    }

    pub fn anchor_len(&self) -> u32 {
        self.anchor.iter().sum()
    }

    /// The approximation is stated for anchors no longer than half the
    /// document.
    pub fn within_validity(&self) -> bool {
        2 * self.anchor_len() <= self.b()
    }

    pub fn with_anchor(&self, anchor: &Anchor) -> Self {
        Self { anchor: anchor.counts().to_vec(), ..self.clone() }
    }
}

/// The standardized statistic whose upper Gaussian tail approximates the
/// precision of a linear classifier:
/// `L(A) = (-lambda0 - 1/2 sum_j alpha_j (m_j + a_j)) / sqrt(1/4 sum_j alpha_j^2 (m_j - a_j))`.
pub fn linear_l(inputs: &LinearApproxInputs) -> Result<f64> {
    let mut num = -inputs.lambda0;
    let mut var = 0.0f64;
    for ((&a, &m), &aj) in inputs.alpha.iter().zip(&inputs.mult).zip(&inputs.anchor) {
        num -= 0.5 * a * (m as f64 + aj as f64);
        var += 0.25 * a * a * (m as f64 - aj as f64);
    }
    if var <= 0.0 {
        return Err(Error::DegenerateDenominator);
    }
    Ok(num / var.sqrt())
}

/// The normalized-TF-IDF analogue:
/// `L(A) = (-lambda0 sqrt(sum_j {(m_j+a_j)^2 + m_j-a_j} idf_j^2) - sum_j alpha_j (m_j+a_j))
///          / sqrt(sum_j alpha_j^2 (m_j - a_j))`.
pub fn normalized_l(inputs: &LinearApproxInputs) -> Result<f64> {
    let mut s_norm = 0.0f64;
    let mut s_mean = 0.0f64;
    let mut s_var = 0.0f64;
    for (((&alpha, &idf), &m), &a) in inputs
        .alpha
        .iter()
        .zip(&inputs.idf)
        .zip(&inputs.mult)
        .zip(&inputs.anchor)
    {
        let (m, a) = (m as f64, a as f64);
        s_norm += ((m + a) * (m + a) + (m - a)) * idf * idf;
        s_mean += alpha * (m + a);
        s_var += alpha * alpha * (m - a);
    }
    if s_var <= 0.0 {
        return Err(Error::DegenerateDenominator);
    }
    Ok((-inputs.lambda0 * s_norm.sqrt() - s_mean) / s_var.sqrt())
}

/// Gaussian-approximate precision `1 - Phi(L(A))` with the Berry-Esseen
/// right-hand side as error bound (when computable). A degenerate
/// denominator collapses to the exact indicator `1{gamma > 0}`, the limit of
/// the tail as the variance vanishes.
pub fn gaussian_precision(inputs: &LinearApproxInputs) -> PrecisionEstimate {
    match linear_l(inputs) {
        Ok(l) => PrecisionEstimate {
            value: normal_sf(l),
            method: Method::Gaussian,
            error_bound: berry_esseen_bound(inputs).ok(),
            n_samples: None,
        },
        Err(_) => PrecisionEstimate {
            value: if inputs.gamma() > 0.0 { 1.0 } else { 0.0 },
            method: Method::Exact,
            error_bound: Some(0.0),
            n_samples: None,
        },
    }
}

/// Normalized-TF-IDF Gaussian-approximate precision. The degenerate branch
/// returns the indicator of the margin on the normalized unperturbed vector.
pub fn gaussian_precision_normalized(inputs: &LinearApproxInputs) -> PrecisionEstimate {
    match normalized_l(inputs) {
        Ok(l) => PrecisionEstimate {
            value: normal_sf(l),
            method: Method::Gaussian,
            error_bound: berry_esseen_bound(inputs).ok(),
            n_samples: None,
        },
        Err(_) => {
            let norm_sq: f64 = inputs
                .idf
                .iter()
                .zip(&inputs.mult)
                .map(|(&idf, &m)| idf * idf * (m as f64) * (m as f64))
                .sum();
            let margin = if norm_sq > 0.0 {
                inputs
                    .alpha
                    .iter()
                    .zip(&inputs.mult)
                    .map(|(a, &m)| a * m as f64)
                    .sum::<f64>()
                    / norm_sq.sqrt()
                    + inputs.lambda0
            } else {
                inputs.lambda0
            };
            PrecisionEstimate {
                value: if margin > 0.0 { 1.0 } else { 0.0 },
                method: Method::Exact,
                error_bound: Some(0.0),
                n_samples: None,
            }
        }
    }
}

/// The Berry-Esseen style bound
/// `C * (max_j alpha_j^2 / min_j alpha_j^2)^(3/2) * (max_j m_j / min_j m_j)^(3/2) / sqrt(d)`
/// with `C = 7.15`. Requires every `alpha_j` nonzero.
pub fn berry_esseen_bound(inputs: &LinearApproxInputs) -> Result<f64> {
    if inputs.alpha.is_empty() {
        return Err(Error::InvalidParameter("empty view".into()));
    }
    if inputs.alpha.iter().any(|&a| a == 0.0) {
        return Err(Error::InvalidParameter(
            "berry_esseen_bound requires lambda_j * idf_j != 0 for every word".into(),
        ));
    }
    let (mut min_a2, mut max_a2) = (f64::INFINITY, 0.0f64);
    for &a in &inputs.alpha {
        min_a2 = min_a2.min(a * a);
        max_a2 = max_a2.max(a * a);
    }
    let (mut min_m, mut max_m) = (u32::MAX, 0u32);
    for &m in &inputs.mult {
        min_m = min_m.min(m);
        max_m = max_m.max(m);
    }
    Ok(BERRY_ESSEEN_CONSTANT
        * (max_a2 / min_a2).powf(1.5)
        * (max_m as f64 / min_m as f64).powf(1.5)
        / (inputs.d() as f64).sqrt())
}

/// Decision table over all joint multiplicity states of a view, for engines
/// that evaluate many anchors against the same (model, view) pair.
pub(crate) struct DecisionTable {
    strides: Vec<usize>,
    table: Vec<bool>,
}

impl DecisionTable {
    pub fn build(model: &Model, view: &LocalView, cutoff: usize) -> Result<Self> {
        let mut states: u128 = 1;
        for &m in view.mult() {
            states = states
                .checked_mul(m as u128 + 1)
                .ok_or(Error::EnumerationExceeded { states: u128::MAX, cutoff })?;
        }
        if states > cutoff as u128 {
            return Err(Error::EnumerationExceeded { states, cutoff });
        }
        let d = view.d();
        let mut strides = vec![1usize; d];
        for j in (0..d.saturating_sub(1)).rev() {
            strides[j] = strides[j + 1] * (view.mult()[j + 1] as usize + 1);
        }
        let mut compiled = model.compile(view);
        let mut table = vec![false; states as usize];
        let mut mults = vec![0u32; d];
        for slot in table.iter_mut() {
            *slot = compiled.decide(&mults);
            let mut j = d;
            while j > 0 {
                j -= 1;
                if mults[j] < view.mult()[j] {
                    mults[j] += 1;
                    mults[j + 1..].iter_mut().for_each(|v| *v = 0);
                    break;
                }
            }
        }
        Ok(Self { strides, table })
    }

    #[inline]
    pub fn index(&self, mults: &[u32]) -> usize {
        mults
            .iter()
            .zip(&self.strides)
            .map(|(&m, &s)| m as usize * s)
            .sum()
    }

    #[inline]
    pub fn decide_index(&self, idx: usize) -> bool {
        self.table[idx]
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }
}
