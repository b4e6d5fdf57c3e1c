//! The perturbation distribution that anchor precision is defined against.
//!
//! The literal scheme makes `n` copies of the example, draws a
//! `Binomial(n, 1/2)` count per non-anchored position, and replaces that
//! position by "UNK" in a uniformly random subset of copies of that size.
//! Equivalently, every non-anchored position of every copy is replaced
//! independently with probability 1/2, which induces the per-word
//! multiplicity law `M_j = a_j + Binomial(m_j - a_j, 1/2)`. Both schemes are
//! implemented; the Bernoulli form is the workhorse.

use std::collections::BTreeSet;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{Document, LocalView};
use crate::stats::binomial_coefficient;
use crate::{Error, Result};

/// A candidate anchor: occurrence counts indexed like `LocalView::words`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Anchor {
    counts: Vec<u32>,
}

impl Anchor {
    /// The empty anchor is not a candidate.
    pub fn new(counts: Vec<u32>) -> Result<Self> {
        if counts.iter().all(|&c| c == 0) {
            return Err(Error::InvalidAnchor("anchor must keep at least one occurrence".into()));
        }
        Ok(Self { counts })
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    /// Anchor length `|A|`: total kept occurrences.
    pub fn len(&self) -> u32 {
        self.counts.iter().sum()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Check `0 <= a_j <= m_j` against a view.
    pub fn validate_against(&self, view: &LocalView) -> Result<()> {
        if self.counts.len() != view.d() {
            return Err(Error::InvalidAnchor(format!(
                "anchor has {} coordinates, view has {} words",
                self.counts.len(),
                view.d()
            )));
        }
        for (j, (&a, &m)) in self.counts.iter().zip(view.mult()).enumerate() {
            if a > m {
                return Err(Error::InvalidAnchor(format!(
                    "a_{j} = {a} exceeds multiplicity {m}"
                )));
            }
        }
        Ok(())
    }

    /// Distinct words of the anchor, in view order.
    pub fn word_set<'a>(&self, view: &'a LocalView) -> Vec<&'a str> {
        self.counts
            .iter()
            .zip(view.words())
            .filter(|(&a, _)| a > 0)
            .map(|(_, w)| w.as_str())
            .collect()
    }

    /// Render as "word" or "word(count)" items in document order.
    pub fn render(&self, view: &LocalView) -> String {
        self.counts
            .iter()
            .zip(view.words())
            .filter(|(&a, _)| a > 0)
            .map(|(&a, w)| if a > 1 { format!("{w}({a})") } else { w.clone() })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// An anchor as a set of kept token positions (zero-based) of the example.
/// Only used to state and test the equivalence with the multiplicity form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PositionalAnchor {
    kept: BTreeSet<usize>,
}

impl PositionalAnchor {
    pub fn new(kept: BTreeSet<usize>, doc_len: usize) -> Result<Self> {
        if kept.is_empty() {
            return Err(Error::InvalidAnchor("positional anchor must be non-empty".into()));
        }
        if kept.iter().any(|&k| k >= doc_len) {
            return Err(Error::InvalidAnchor("position out of range".into()));
        }
        Ok(Self { kept })
    }

    pub fn kept_positions(&self) -> &BTreeSet<usize> {
        &self.kept
    }

    /// Collapse to occurrence counts per distinct word of the view.
    /// Positions are exchangeable under the sampling law, so only the count
    /// per word matters.
    pub fn to_multiplicity(&self, example: &Document, view: &LocalView) -> Result<Anchor> {
        let mut counts = vec![0u32; view.d()];
        for &pos in &self.kept {
            let token = &example.tokens()[pos];
            let j = view.word_index(token).ok_or_else(|| {
                Error::InvalidAnchor(format!("anchored token {token:?} missing from view"))
            })?;
            counts[j] += 1;
        }
        Anchor::new(counts)
    }
}

/// A seedable, counter-based random stream (ChaCha8) with reproducible
/// derivation of independent child streams.
///
/// `derive` hashes the handle's seed together with a domain tag and a count
/// vector, so concurrent per-anchor evaluation gets streams that depend only
/// on (master seed, anchor), never on evaluation order. Forks for repeats or
/// trials go through the same mechanism with the index as the count vector.
#[derive(Debug, Clone)]
pub struct SeededRng {
    seed: u64,
    rng: ChaCha8Rng,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        let mut hasher = Sha256::new();
        hasher.update(seed.to_le_bytes());
        hasher.update(b"anchor-forge/master");
        let mut key = [0u8; 32];
        key.copy_from_slice(&hasher.finalize());
        Self { seed, rng: ChaCha8Rng::from_seed(key) }
    }

    /// The seed this handle derives children from.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// An independent child stream determined by (seed, tag, counts) only.
    pub fn derive(&self, tag: &str, counts: &[u32]) -> SeededRng {
        SeededRng::new(derive_seed(self.seed, tag, counts))
    }

    /// Draw `Binomial(m, 1/2)` by counting heads among `m` fair bits.
    pub fn binomial_half(&mut self, m: u32) -> u32 {
        let mut remaining = m;
        let mut total = 0;
        while remaining > 0 {
            let take = remaining.min(64);
            let mask = if take == 64 { u64::MAX } else { (1u64 << take) - 1 };
            total += (self.rng.next_u64() & mask).count_ones();
            remaining -= take;
        }
        total
    }
}

/// Stable child-seed derivation: low 8 bytes of
/// `SHA-256(seed || tag || counts)`.
pub(crate) fn derive_seed(seed: u64, tag: &str, counts: &[u32]) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update(tag.as_bytes());
    for &c in counts {
        hasher.update(c.to_le_bytes());
    }
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("sha256 digest is 32 bytes"))
}

impl RngCore for SeededRng {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.rng.fill_bytes(dest)
    }
}

/// A buffer slicing fair bits out of the underlying stream; lets a sampler
/// spend exactly `m_j - a_j` bits per word instead of a whole word of
/// randomness.
pub(crate) struct BitSource<'a> {
    rng: &'a mut SeededRng,
    buf: u64,
    avail: u32,
}

impl<'a> BitSource<'a> {
    pub fn new(rng: &'a mut SeededRng) -> Self {
        Self { rng, buf: 0, avail: 0 }
    }

    /// Next `k` fair bits, `k <= 64`.
    #[inline]
    pub fn take(&mut self, k: u32) -> u64 {
        debug_assert!(k <= 64);
        if k == 0 {
            return 0;
        }
        if k == 64 {
            // Avoid shift-by-64; splice two refills if needed.
            let lo = self.take(32);
            let hi = self.take(32);
            return lo | (hi << 32);
        }
        if self.avail < k {
            let fresh = self.rng.next_u64();
            let got = self.avail;
            let out = self.buf;
            self.buf = fresh >> (k - got);
            self.avail = 64 - (k - got);
            return (out | (fresh << got)) & ((1u64 << k) - 1);
        }
        let out = self.buf & ((1u64 << k) - 1);
        self.buf >>= k;
        self.avail -= k;
        out
    }
}

/// One draw of the perturbed multiplicity vector:
/// `M_j = a_j + Binomial(m_j - a_j, 1/2)` independently across words.
pub fn sample_bernoulli(view: &LocalView, anchor: &Anchor, rng: &mut SeededRng) -> Result<Vec<u32>> {
    anchor.validate_against(view)?;
    Ok(view
        .mult()
        .iter()
        .zip(anchor.counts())
        .map(|(&m, &a)| a + rng.binomial_half(m - a))
        .collect())
}

/// The literal three-step sampler: `n` copies; per non-anchored position a
/// `Binomial(n, 1/2)` number of copies is chosen uniformly at random and the
/// position replaced by "UNK" in those copies.
pub fn sample_three_step(
    example: &Document,
    anchor: &PositionalAnchor,
    n: usize,
    rng: &mut SeededRng,
) -> Result<Vec<Document>> {
    if n == 0 {
        return Err(Error::InvalidParameter("sample_three_step requires n >= 1".into()));
    }
    if anchor.kept_positions().iter().any(|&k| k >= example.len()) {
        return Err(Error::InvalidAnchor("position out of range".into()));
    }
    let mut copies: Vec<Vec<String>> = vec![example.tokens().to_vec(); n];
    for position in 0..example.len() {
        if anchor.kept_positions().contains(&position) {
            continue;
        }
        let b_k = draw_binomial_n_half(n, rng);
        let chosen = rand::seq::index::sample(rng, n, b_k);
        for copy in chosen {
            copies[copy][position] = "UNK".to_string();
        }
    }
    copies.into_iter().map(Document::from_tokens).collect()
}

fn draw_binomial_n_half(n: usize, rng: &mut SeededRng) -> usize {
    let mut remaining = n;
    let mut total = 0usize;
    while remaining > 0 {
        let take = remaining.min(64) as u32;
        total += rng.binomial_half(take) as usize;
        remaining -= take as usize;
    }
    total
}

/// The exact law of `M = a + Binomial(m - a, 1/2)` on `{a, ..., m}`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiplicityLaw {
    pub a: u32,
    pub m: u32,
    /// `pmf[k] = P(M = a + k) = C(m-a, k) / 2^(m-a)`.
    pub pmf: Vec<f64>,
}

impl MultiplicityLaw {
    pub fn mean(&self) -> f64 {
        (self.m as f64 + self.a as f64) / 2.0
    }

    pub fn variance(&self) -> f64 {
        (self.m as f64 - self.a as f64) / 4.0
    }

    /// `P(M > 0)`: 1 unless `a = 0`, in which case `1 - 2^(-m)`.
    pub fn prob_positive(&self) -> f64 {
        if self.a > 0 {
            1.0
        } else {
            1.0 - 0.5f64.powi(self.m as i32)
        }
    }
}

pub fn multiplicity_law(m: u32, a: u32) -> Result<MultiplicityLaw> {
    if a > m {
        return Err(Error::InvalidAnchor(format!("a = {a} exceeds m = {m}")));
    }
    let w = m - a;
    let denom = 2f64.powi(w as i32);
    let pmf = (0..=w)
        .map(|k| binomial_coefficient(w, k).expect("w <= u32::MAX") as f64 / denom)
        .collect();
    Ok(MultiplicityLaw { a, m, pmf })
}
