//! Code-domain views of the finite-field channel and the associated
//! detectors.
//!
//! A channel matrix Q over Z_p is simultaneously the generator of a linear
//! block code: transmit vectors are messages, antenna outputs are noisy
//! codeword symbols. The detectors here cover the classical repertoire —
//! minimum-distance decoding of the full codebook, per-symbol plurality
//! voting for single-stream channels, zero-forcing inversion, and
//! successive cancellation in noise-entropy order.

use crate::channel::FiniteChannel;
use crate::error::{Error, Result};
use crate::gf::{vector_from_index, Gf, GfMatrix};

/// Largest codebook enumerated for distance computations: p^{N_t} messages.
pub const ENUMERATION_CAP: u128 = 1 << 24;

/// Largest codebook kept materialized in memory by [`CodebookView`].
pub const STORE_CAP: u128 = 1 << 16;

/// Minimum Hamming weight of `Q·m` over nonzero messages `m`.
///
/// For a full-column-rank Q this is the code's minimum distance; a return
/// value of 0 means some nonzero message maps to the zero codeword, i.e.
/// the code is not injective (Q is rank deficient).
pub fn min_distance(q: &GfMatrix) -> Result<usize> {
    assert!(q.rows() > 0 && q.cols() > 0, "empty generator");
    let count = (q.field().p() as u128)
        .checked_pow(q.cols() as u32)
        .unwrap_or(u128::MAX);
    if count > ENUMERATION_CAP {
        return Err(Error::EnumerationCap {
            required: count,
            cap: ENUMERATION_CAP,
        });
    }
    let mut best = q.rows();
    for idx in 1..count {
        let m = vector_from_index(q.field(), q.cols(), idx);
        let w = q.mul_vec(&m).iter().filter(|s| !s.is_zero()).count();
        if w < best {
            best = w;
            if best == 0 {
                break;
            }
        }
    }
    Ok(best)
}

/// A generator matrix together with its enumerated codebook (when small
/// enough to store) and minimum distance.
#[derive(Debug, Clone)]
pub struct CodebookView {
    generator: GfMatrix,
    codewords: Option<Vec<Vec<Gf>>>,
    d_min: usize,
}

impl CodebookView {
    /// Enumerates the code generated by `generator`. Fails if the message
    /// space exceeds [`ENUMERATION_CAP`]; the explicit codeword list is
    /// kept only up to [`STORE_CAP`] messages and regenerated on the fly
    /// beyond that.
    pub fn new(generator: GfMatrix) -> Result<Self> {
        let d_min = min_distance(&generator)?;
        let count = (generator.field().p() as u128).pow(generator.cols() as u32);
        let codewords = if count <= STORE_CAP {
            Some(
                (0..count)
                    .map(|idx| {
                        let m = vector_from_index(generator.field(), generator.cols(), idx);
                        generator.mul_vec(&m)
                    })
                    .collect(),
            )
        } else {
            None
        };
        Ok(Self {
            generator,
            codewords,
            d_min,
        })
    }

    pub fn generator(&self) -> &GfMatrix {
        &self.generator
    }

    pub fn d_min(&self) -> usize {
        self.d_min
    }

    /// Number of messages (= codewords counted with multiplicity).
    pub fn len(&self) -> u128 {
        (self.generator.field().p() as u128).pow(self.generator.cols() as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// The codeword of one message index.
    pub fn codeword(&self, index: u128) -> Vec<Gf> {
        match &self.codewords {
            Some(list) => list[index as usize].clone(),
            None => {
                let m = vector_from_index(self.generator.field(), self.generator.cols(), index);
                self.generator.mul_vec(&m)
            }
        }
    }

    /// Minimum-distance decoding: the message whose codeword is Hamming-
    /// closest to `u`; ties resolve to the lexicographically smallest
    /// message (equivalently, the lowest message index).
    pub fn md_decode(&self, u: &[Gf]) -> Vec<Gf> {
        assert_eq!(u.len(), self.generator.rows(), "output length mismatch");
        let mut best_idx = 0u128;
        let mut best_dist = usize::MAX;
        match &self.codewords {
            Some(list) => {
                for (idx, cw) in list.iter().enumerate() {
                    let d = hamming(cw, u);
                    if d < best_dist {
                        best_dist = d;
                        best_idx = idx as u128;
                        if d == 0 {
                            break;
                        }
                    }
                }
            }
            None => {
                for idx in 0..self.len() {
                    let d = hamming(&self.codeword(idx), u);
                    if d < best_dist {
                        best_dist = d;
                        best_idx = idx;
                        if d == 0 {
                            break;
                        }
                    }
                }
            }
        }
        vector_from_index(self.generator.field(), self.generator.cols(), best_idx)
    }
}

fn hamming(a: &[Gf], b: &[Gf]) -> usize {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b.iter()).filter(|(x, y)| x != y).count()
}

/// Bit-packed codebook over Z_2 for channels with at most 64 outputs.
///
/// Each codeword lives in one `u64` (bit m = symbol at output m), so a
/// Hamming distance is an XOR and a popcount. Decoding scans message
/// indices in ascending order with strict improvement, which reproduces
/// [`CodebookView::md_decode`]'s tie rule exactly.
#[derive(Debug, Clone)]
pub struct PackedBinaryCodebook {
    words: Vec<u64>,
    n_r: usize,
    n_t: usize,
}

impl PackedBinaryCodebook {
    pub fn new(generator: &GfMatrix) -> Result<Self> {
        let field = generator.field();
        if field.p() != 2 {
            return Err(Error::Unsupported(format!(
                "packed codebooks need modulus 2, got {}",
                field.p()
            )));
        }
        let (n_r, n_t) = (generator.rows(), generator.cols());
        if n_r > 64 {
            return Err(Error::Unsupported(format!(
                "packed codebooks hold at most 64 outputs, got {n_r}"
            )));
        }
        let count = 1u128 << n_t;
        if count > STORE_CAP {
            return Err(Error::EnumerationCap {
                required: count,
                cap: STORE_CAP,
            });
        }
        // Column j of the generator as an output bitmask. Message digit j
        // is the MSD-first digit, i.e. bit (n_t-1-j) of the message index.
        let mut col_mask = vec![0u64; n_t];
        for j in 0..n_t {
            for m in 0..n_r {
                if !generator.get(m, j).is_zero() {
                    col_mask[j] |= 1 << m;
                }
            }
        }
        let words = (0..count as u64)
            .map(|idx| {
                let mut w = 0u64;
                for (j, &mask) in col_mask.iter().enumerate() {
                    if (idx >> (n_t - 1 - j)) & 1 == 1 {
                        w ^= mask;
                    }
                }
                w
            })
            .collect();
        Ok(Self { words, n_r, n_t })
    }

    pub fn n_r(&self) -> usize {
        self.n_r
    }

    pub fn n_t(&self) -> usize {
        self.n_t
    }

    /// Packs an output vector into its bit representation.
    pub fn pack(&self, u: &[Gf]) -> u64 {
        assert_eq!(u.len(), self.n_r, "output length mismatch");
        let mut w = 0u64;
        for (m, s) in u.iter().enumerate() {
            debug_assert_eq!(s.modulus(), 2);
            if !s.is_zero() {
                w |= 1 << m;
            }
        }
        w
    }

    /// Minimum-distance decoding on packed outputs, returning the message
    /// index (ties toward the smaller index).
    pub fn decode_index(&self, packed: u64) -> u64 {
        let mut best_idx = 0u64;
        let mut best_dist = u32::MAX;
        for (idx, &w) in self.words.iter().enumerate() {
            let d = (w ^ packed).count_ones();
            if d < best_dist {
                best_dist = d;
                best_idx = idx as u64;
                if d == 0 {
                    break;
                }
            }
        }
        best_idx
    }
}

/// Plurality (majority) detection for a single-stream channel: equalize
/// each observation by its gain and return the most frequent symbol, ties
/// broken toward the smallest symbol value. Every gain must be nonzero.
pub fn plurality_decode(u: &[Gf], gains: &[Gf]) -> Result<Gf> {
    assert_eq!(u.len(), gains.len(), "one gain per observation");
    assert!(!u.is_empty(), "at least one observation required");
    let field = gains[0].field();
    if let Some(m) = gains.iter().position(|g| g.is_zero()) {
        return Err(Error::Unsupported(format!(
            "plurality detection needs nonzero gains; antenna {m} has gain 0"
        )));
    }
    let mut counts = vec![0usize; field.size()];
    for (&obs, &g) in u.iter().zip(gains.iter()) {
        let equalized = g.inv().expect("gain is nonzero") * obs;
        counts[equalized.value() as usize] += 1;
    }
    let best = counts
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(&a.0)))
        .map(|(s, _)| s)
        .expect("alphabet is nonempty");
    Ok(field.elem(best as i64))
}

/// Zero-forcing detection: invert the (square, nonsingular) channel matrix
/// and apply it to the outputs.
pub fn zf_detect(q: &GfMatrix, u: &[Gf]) -> Result<Vec<Gf>> {
    if q.rows() != q.cols() {
        return Err(Error::Unsupported(format!(
            "zero forcing needs a square channel matrix, got {}x{}",
            q.rows(),
            q.cols()
        )));
    }
    assert_eq!(u.len(), q.rows(), "output length mismatch");
    Ok(q.inverse()?.mul_vec(u))
}

/// The successive-cancellation schedule for a square channel.
///
/// Streams are decoded in ascending order of marginal noise entropy (ties
/// toward the lower antenna index). Stage m observes its antenna output
/// minus multiples of the combinations decoded at stages 1..m−1, where the
/// multiples are chosen to cancel those stages' pivot columns — ordinary
/// Gaussian elimination with the row order fixed by the entropy schedule
/// and the pivot column chosen as the first nonzero position of the reduced
/// row. The reduced rows form `qprime`, upper triangular up to the recorded
/// column-pivot permutation and invertible whenever Q is.
#[derive(Debug, Clone)]
pub struct ScOrdering {
    order: Vec<usize>,
    rates: Vec<f64>,
    qprime: GfMatrix,
    qprime_inv: GfMatrix,
    pivots: Vec<usize>,
    /// `lambdas[m][k]`: coefficient of stage k's decoded combination
    /// subtracted while cleaning stage m's observation.
    lambdas: Vec<Vec<Gf>>,
}

impl ScOrdering {
    pub fn new(fc: &FiniteChannel) -> Result<Self> {
        let q = fc.q();
        let n = q.rows();
        if q.cols() != n {
            return Err(Error::Unsupported(format!(
                "successive cancellation needs a square channel matrix, got {}x{}",
                n,
                q.cols()
            )));
        }
        let mut order: Vec<usize> = (0..n).collect();
        let ent = fc.entropies();
        order.sort_by(|&a, &b| {
            ent[a]
                .partial_cmp(&ent[b])
                .expect("entropies are finite")
                .then(a.cmp(&b))
        });

        let field = q.field();
        let mut reduced: Vec<Vec<Gf>> = Vec::with_capacity(n);
        let mut pivots: Vec<usize> = Vec::with_capacity(n);
        let mut lambdas: Vec<Vec<Gf>> = Vec::with_capacity(n);
        for (m, &antenna) in order.iter().enumerate() {
            let mut row = q.row(antenna);
            let mut lam = Vec::with_capacity(m);
            for k in 0..m {
                let factor = row[pivots[k]]
                    * reduced[k][pivots[k]]
                        .inv()
                        .expect("pivot entries are nonzero");
                for (rj, bj) in row.iter_mut().zip(reduced[k].iter()) {
                    *rj = *rj - factor * *bj;
                }
                lam.push(factor);
            }
            let pivot = match row.iter().position(|s| !s.is_zero()) {
                Some(j) => j,
                None => {
                    return Err(Error::RankDeficient { rank: m, need: n });
                }
            };
            pivots.push(pivot);
            reduced.push(row);
            lambdas.push(lam);
        }

        let mut qprime = GfMatrix::zeros(field, n, n);
        for (m, row) in reduced.iter().enumerate() {
            for (j, &s) in row.iter().enumerate() {
                qprime.set(m, j, s);
            }
        }
        let qprime_inv = qprime.inverse().expect("reduced matrix is nonsingular");
        let rates = order
            .iter()
            .map(|&a| field.bits() - fc.entropies()[a])
            .collect();
        Ok(Self {
            order,
            rates,
            qprime,
            qprime_inv,
            pivots,
            lambdas,
        })
    }

    /// Antenna indices in decode order.
    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Per-stage rates log p − H(z̃), in decode order (non-increasing).
    pub fn rates(&self) -> &[f64] {
        &self.rates
    }

    /// The reduced combination matrix, rows in decode order.
    pub fn qprime(&self) -> &GfMatrix {
        &self.qprime
    }

    /// Pivot column of each stage.
    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// Runs the cancellation pipeline on one output vector. `noise` is the
    /// true effective noise symbol per antenna as supplied by an oracle
    /// (ideal per-stage outer decoding); pass zeros for a noiseless run.
    pub fn recover(&self, u: &[Gf], noise: &[Gf]) -> Vec<Gf> {
        let n = self.order.len();
        assert_eq!(u.len(), n, "output length mismatch");
        assert_eq!(noise.len(), n, "noise length mismatch");
        let mut combos: Vec<Gf> = Vec::with_capacity(n);
        for (m, &antenna) in self.order.iter().enumerate() {
            let mut v = u[antenna];
            for (k, &lam) in self.lambdas[m].iter().enumerate() {
                v = v - lam * combos[k];
            }
            combos.push(v - noise[antenna]);
        }
        self.qprime_inv.mul_vec(&combos)
    }
}

/// Convenience wrapper: build the schedule for `fc` and recover the message
/// from `u`, with `genie_noise` as the per-antenna noise oracle (`None`
/// means noiseless).
pub fn sc_recover(fc: &FiniteChannel, u: &[Gf], genie_noise: Option<&[Gf]>) -> Result<Vec<Gf>> {
    let ordering = ScOrdering::new(fc)?;
    let zeros = vec![fc.field().zero(); fc.n_r()];
    Ok(ordering.recover(u, genie_noise.unwrap_or(&zeros)))
}
