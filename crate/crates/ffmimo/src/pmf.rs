//! Probability mass functions over small finite alphabets.
//!
//! A [`Pmf`] indexes its alphabet by `0..len`. When the alphabet is Z_p the
//! index is the canonical residue, which makes the modular operations
//! (index permutation by a nonzero scalar, cyclic convolution) well defined.

use rand::Rng;

use crate::error::{Error, Result};
use crate::gf::Gf;

/// Normalization slack accepted by validation.
pub const PMF_TOL: f64 = 1e-9;

/// A validated probability vector: nonnegative entries summing to 1 within
/// [`PMF_TOL`].
#[derive(Debug, Clone, PartialEq)]
pub struct Pmf {
    probs: Vec<f64>,
}

impl Pmf {
    /// Validates and wraps a probability vector.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidPmf("empty alphabet".into()));
        }
        if let Some(bad) = probs.iter().find(|&&q| !(q >= 0.0) || !q.is_finite()) {
            return Err(Error::InvalidPmf(format!("entry {bad} is not in [0, 1]")));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > PMF_TOL {
            return Err(Error::InvalidPmf(format!("entries sum to {sum}, not 1")));
        }
        Ok(Self { probs })
    }

    /// The uniform distribution on an alphabet of size `n`.
    pub fn uniform(n: usize) -> Self {
        assert!(n > 0, "alphabet must be nonempty");
        Self {
            probs: vec![1.0 / n as f64; n],
        }
    }

    /// All mass on one symbol.
    pub fn point_mass(n: usize, at: usize) -> Self {
        assert!(at < n, "symbol out of range");
        let mut probs = vec![0.0; n];
        probs[at] = 1.0;
        Self { probs }
    }

    /// The p-ary symmetric noise law: symbol 0 with probability `1 - eps`,
    /// each of the `p - 1` other symbols with probability `eps / (p - 1)`.
    /// For `p = 2` this is the Bernoulli(`eps`) flip.
    pub fn symmetric(p: u16, eps: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eps) {
            return Err(Error::InvalidPmf(format!(
                "crossover probability {eps} outside [0, 1]"
            )));
        }
        if p < 2 {
            return Err(Error::InvalidPmf(
                "alphabet needs at least 2 symbols".into(),
            ));
        }
        let mut probs = vec![eps / (p as f64 - 1.0); p as usize];
        probs[0] = 1.0 - eps;
        Ok(Self { probs })
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn prob(&self, symbol: usize) -> f64 {
        self.probs[symbol]
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Probability that the symbol differs from 0; for an additive noise law
    /// this is the crossover probability of the induced symmetric-alphabet
    /// channel.
    pub fn prob_nonzero(&self) -> f64 {
        1.0 - self.probs[0]
    }

    /// Shannon entropy in bits, with 0·log 0 = 0.
    pub fn entropy_bits(&self) -> f64 {
        self.probs
            .iter()
            .map(|&q| if q > 0.0 { -q * q.log2() } else { 0.0 })
            .sum()
    }

    /// The law of `a·z` when `z` has this law over Z_p and `a != 0`:
    /// a pure index permutation, `P(a z = v) = P(z = a^{-1} v)`.
    pub fn scale_index(&self, a: Gf) -> Result<Pmf> {
        assert_eq!(
            a.modulus() as usize,
            self.probs.len(),
            "scalar modulus must match the alphabet size"
        );
        let a_inv = a.inv()?;
        let f = a.field();
        let probs = (0..self.probs.len())
            .map(|v| self.probs[(f.elem(v as i64) * a_inv).value() as usize])
            .collect();
        Ok(Pmf { probs })
    }

    /// The law of `x + y (mod n)` for independent `x ~ self`, `y ~ other`:
    /// cyclic convolution over the shared alphabet.
    pub fn convolve(&self, other: &Pmf) -> Pmf {
        assert_eq!(
            self.probs.len(),
            other.probs.len(),
            "convolution needs a shared alphabet"
        );
        let n = self.probs.len();
        let mut probs = vec![0.0; n];
        for (i, &qi) in self.probs.iter().enumerate() {
            if qi == 0.0 {
                continue;
            }
            for (j, &qj) in other.probs.iter().enumerate() {
                let k = i + j;
                let k = if k >= n { k - n } else { k };
                probs[k] += qi * qj;
            }
        }
        Pmf { probs }
    }

    /// Draws one symbol by inverse-CDF scan.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let mut u: f64 = rng.gen();
        for (i, &q) in self.probs.iter().enumerate() {
            u -= q;
            if u < 0.0 {
                return i;
            }
        }
        self.probs.len() - 1
    }
}
