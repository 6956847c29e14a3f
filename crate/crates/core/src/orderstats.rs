//! Uniform order statistics by exponential spacings, and octile summaries
//! simulated without generating a full sample.
//!
//! If `S_i` are partial sums of IID Exp(1) variables then
//! `(S_1, ..., S_n) / S_{n+1}` has the law of the order statistics of `n`
//! uniforms. Only the requested indices are needed, so the gaps between them
//! are drawn directly as Gamma variables and the cost does not grow with `n`.

use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, Gamma};

use crate::{dist, Error, QdParams, Result};

/// Sorted, distinct indices into the order statistics of a sample of size `n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderIndexSet {
    n: usize,
    indices: Vec<usize>,
}

impl OrderIndexSet {
    /// `indices` are 1-based and must be strictly increasing within `[1, n]`.
    pub fn new(n: usize, indices: Vec<usize>) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::Config("order index set is empty"));
        }
        if indices[0] < 1 || *indices.last().unwrap() > n {
            return Err(Error::Config("order index outside [1, n]"));
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("order indices must be strictly increasing"));
        }
        Ok(Self { n, indices })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }
}

fn gamma_draw<R: Rng + ?Sized>(shape: usize, rng: &mut R) -> f64 {
    // Shape is a positive integer well inside Gamma's valid range.
    Gamma::new(shape as f64, 1.0)
        .expect("positive gamma shape")
        .sample(rng)
}

/// Draws `U_(i)` for each requested index `i`, jointly, from the order
/// statistics of `n` IID Uniform(0, 1) variables.
pub fn uniform_orderstats<R: Rng + ?Sized>(set: &OrderIndexSet, rng: &mut R) -> Vec<f64> {
    let mut partial = Vec::with_capacity(set.indices.len());
    let mut sum = 0.0;
    let mut last = 0;
    for &i in &set.indices {
        sum += gamma_draw(i - last, rng);
        partial.push(sum);
        last = i;
    }
    sum += gamma_draw(set.n + 1 - last, rng);
    for v in partial.iter_mut() {
        *v /= sum;
    }
    partial
}

/// The seven octile summaries `E_1..E_7`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Octiles([f64; 7]);

impl Octiles {
    /// Fails unless the values are finite and non-decreasing.
    pub fn new(e: [f64; 7]) -> Result<Self> {
        if e.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { what: "octile" });
        }
        if e.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::NotMonotone);
        }
        Ok(Self(e))
    }

    pub fn values(&self) -> &[f64; 7] {
        &self.0
    }
}

/// Nearest-integer rounding (halves away from zero), clamped to `[1, n]`.
pub fn order_index(position: f64, n: usize) -> usize {
    (position.round() as usize).clamp(1, n.max(1))
}

/// Order-statistic indices `r(i n / 8)`, `i = 1..7`.
pub fn octile_indices(n: usize) -> [usize; 7] {
    let mut out = [0; 7];
    for (i, o) in out.iter_mut().enumerate() {
        *o = order_index(((i + 1) * n) as f64 / 8.0, n);
    }
    out
}

/// Simulates the octile order statistics `X_(r(i n / 8))` of a sample of
/// size `n` from `p`, without drawing the sample.
pub fn simulate_octiles<R: Rng + ?Sized>(p: &QdParams, n: usize, rng: &mut R) -> Result<Octiles> {
    if n < 8 {
        return Err(Error::NotEnoughData { needed: 8, got: n });
    }
    let set = OrderIndexSet::new(n, octile_indices(n).to_vec())?;
    let u = uniform_orderstats(&set, rng);
    let mut e = [0.0; 7];
    for (out, ui) in e.iter_mut().zip(&u) {
        *out = dist::quantile(*ui, p)?;
    }
    Octiles::new(e)
}

/// Robust moment estimates from octiles:
/// `S_A = E_4`, `S_B = E_6 - E_2`, `S_g = (E_6 + E_2 - 2 E_4) / S_B`,
/// `S_k = (E_7 - E_5 + E_3 - E_1) / S_B`.
pub fn moment_summaries(e: &Octiles) -> Result<[f64; 4]> {
    let e = &e.0;
    let s_b = e[5] - e[1];
    if s_b == 0.0 {
        return Err(Error::DegenerateSummary);
    }
    Ok([
        e[3],
        s_b,
        (e[5] + e[1] - 2.0 * e[3]) / s_b,
        (e[6] - e[4] + e[2] - e[0]) / s_b,
    ])
}
