//! Achievable rates of the detection and coding schemes, in bits per
//! channel use.
//!
//! Everything here is stated for the finite-field channel u = Qc ⊕ z̃ with
//! independent per-antenna noise. Analytic expressions are evaluated in
//! closed form; the simulated linear-block-code rate draws its per-stream
//! symbol error rates by Monte Carlo. All entropies are base-2.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channel::FiniteChannel;
use crate::codes::{min_distance, CodebookView, PackedBinaryCodebook, ScOrdering};
use crate::error::{Error, Result};
use crate::gf::{vector_from_index, Gf};
use crate::pmf::Pmf;

/// Joint-table size cap for exact mutual-information computations.
pub const JOINT_CAP: u128 = 1 << 20;

/// The schemes this library can evaluate. `Display` gives the short names
/// used in result tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// Greedy antenna selection: keep the quietest antennas that still
    /// see an invertible channel.
    AntennaSelection,
    /// Repetition coding with plurality detection, single stream.
    Repetition,
    /// Successive cancellation in noise-entropy order.
    SuccessiveCancellation,
    /// Zero-forcing channel inversion.
    ZeroForcing,
    /// Linear block code with minimum-distance decoding, error rates
    /// estimated by simulation.
    Lbc,
    /// Linear block code bound computed analytically from the minimum
    /// distance.
    Elbc,
    /// Channel capacity (joint decoding).
    Capacity,
    /// Best single linear combination of the antenna outputs.
    BestCombiner,
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Scheme::AntennaSelection => "anse",
            Scheme::Repetition => "rep",
            Scheme::SuccessiveCancellation => "sc",
            Scheme::ZeroForcing => "zf",
            Scheme::Lbc => "lbc",
            Scheme::Elbc => "elbc",
            Scheme::Capacity => "capacity",
            Scheme::BestCombiner => "lincomb",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "anse" => Scheme::AntennaSelection,
            "rep" => Scheme::Repetition,
            "sc" => Scheme::SuccessiveCancellation,
            "zf" => Scheme::ZeroForcing,
            "lbc" => Scheme::Lbc,
            "elbc" => Scheme::Elbc,
            "capacity" => Scheme::Capacity,
            "lincomb" => Scheme::BestCombiner,
            other => {
                return Err(Error::Unsupported(format!(
                    "unknown scheme `{other}` (expected one of \
                     anse, rep, sc, zf, lbc, elbc, capacity, lincomb)"
                )))
            }
        })
    }
}

/// Side information attached to a computed rate. Every field is optional;
/// a scheme fills in what it actually produced.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RateMeta {
    /// Error probability entering the rate expression (block or symbol,
    /// scheme-defined).
    pub pe: Option<f64>,
    /// Minimum distance of the code the expression is built on.
    pub d_min: Option<usize>,
    /// Monte Carlo trials behind an estimated quantity.
    pub trials: Option<u64>,
    /// Aggregate binomial standard error of the simulated symbol error
    /// rates (root sum of squares across streams), on the error-rate scale.
    pub stderr: Option<f64>,
    /// Antenna subset a selection scheme settled on, ascending.
    pub selected: Option<Vec<usize>>,
    /// Combining weights of a linear combiner, one residue per antenna.
    pub combiner: Option<Vec<u16>>,
    /// Per-stream rate split, in the scheme's own stream order.
    pub per_stream: Option<Vec<f64>>,
    /// Whether a sum-rate figure treated per-antenna noise as independent.
    pub assumed_independent: Option<bool>,
}

/// A scheme together with its rate in bits per channel use.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeRate {
    pub scheme: Scheme,
    pub bits: f64,
    pub meta: RateMeta,
}

impl SchemeRate {
    fn new(scheme: Scheme, bits: f64) -> Self {
        Self {
            scheme,
            bits,
            meta: RateMeta::default(),
        }
    }
}

/// Binary entropy in bits; H(0) = H(1) = 0.
pub fn binary_entropy(x: f64) -> f64 {
    assert!(
        (0.0..=1.0).contains(&x),
        "binary entropy needs an argument in [0, 1], got {x}"
    );
    let term = |t: f64| if t <= 0.0 { 0.0 } else { -t * t.log2() };
    term(x) + term(1.0 - x)
}

/// Probability that more than `t` of the independent error indicators
/// fire, where antenna m errs with probability `eps[m]` — the tail
/// P(K ≥ t+1) of a Poisson-binomial variable, computed by dynamic
/// programming over the exact count distribution.
pub fn pe_asym(t: usize, eps: &[f64]) -> f64 {
    assert!(!eps.is_empty(), "at least one error probability required");
    for &e in eps {
        assert!(
            (0.0..=1.0).contains(&e),
            "error probabilities must lie in [0, 1], got {e}"
        );
    }
    let n = eps.len();
    if t >= n {
        return 0.0;
    }
    // dist[k] = P(exactly k errors among the antennas processed so far).
    let mut dist = vec![0.0f64; n + 1];
    dist[0] = 1.0;
    for (m, &e) in eps.iter().enumerate() {
        for k in (0..=m + 1).rev() {
            let stay = if k <= m { dist[k] * (1.0 - e) } else { 0.0 };
            let step = if k > 0 { dist[k - 1] * e } else { 0.0 };
            dist[k] = stay + step;
        }
    }
    dist[t + 1..].iter().sum::<f64>().min(1.0)
}

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    let mut c = 1u128;
    for i in 0..k {
        c = c * (n - i) as u128 / (i + 1) as u128;
    }
    c as f64
}

/// Capacity of the single-stream binary channel with `n_r` antennas that
/// each flip their output independently with probability `eps`, under a
/// uniform input. Exact closed form via the output-weight mixture.
pub fn simo_capacity(eps: f64, n_r: usize) -> f64 {
    assert!(n_r > 0, "at least one antenna required");
    assert!(
        (0.0..=1.0).contains(&eps),
        "flip probability must lie in [0, 1], got {eps}"
    );
    let n = n_r as i32;
    let mut out_entropy = 0.0;
    for j in 0..=n_r {
        let a = eps.powi(n - j as i32) * (1.0 - eps).powi(j as i32);
        let b = eps.powi(j as i32) * (1.0 - eps).powi(n - j as i32);
        let alpha = 0.5 * (a + b);
        if alpha > 0.0 {
            out_entropy += binomial(n_r, j) * (-alpha * alpha.log2());
        }
    }
    out_entropy - n_r as f64 * binary_entropy(eps)
}

/// Mutual information between a uniform scalar input and the full output
/// vector of a single-stream channel with gains `gains[m]` and additive
/// noise `pmfs[m]`, computed from the exact joint output table.
pub fn simo_capacity_joint(pmfs: &[Pmf], gains: &[Gf]) -> Result<f64> {
    assert_eq!(pmfs.len(), gains.len(), "one noise law per antenna");
    assert!(!pmfs.is_empty(), "at least one antenna required");
    let field = gains[0].field();
    let p = field.size();
    for pmf in pmfs {
        assert_eq!(pmf.len(), p, "noise alphabet must match the field");
    }
    let n_r = pmfs.len();
    let table = (p as u128).checked_pow(n_r as u32).unwrap_or(u128::MAX);
    if table > JOINT_CAP {
        return Err(Error::EnumerationCap {
            required: table,
            cap: JOINT_CAP,
        });
    }
    let mut out_entropy = 0.0;
    let mut digits = vec![0usize; n_r];
    for uidx in 0..table {
        let mut rem = uidx;
        for d in digits.iter_mut().rev() {
            *d = (rem % p as u128) as usize;
            rem /= p as u128;
        }
        let mut prob_u = 0.0;
        for c in 0..p {
            let mut prod = 1.0 / p as f64;
            for m in 0..n_r {
                let signal = (gains[m] * field.elem(c as i64)).value() as usize;
                let z = (digits[m] + p - signal) % p;
                prod *= pmfs[m].prob(z);
                if prod == 0.0 {
                    break;
                }
            }
            prob_u += prod;
        }
        if prob_u > 0.0 {
            out_entropy -= prob_u * prob_u.log2();
        }
    }
    let noise_entropy: f64 = pmfs.iter().map(Pmf::entropy_bits).sum();
    Ok(out_entropy - noise_entropy)
}

/// Joint-decoding sum rate of the full channel: N_r log p minus the total
/// noise entropy. With `assume_independent` the per-antenna marginals are
/// summed, which is exact when the effective noise really is independent
/// across antennas and an approximation otherwise (the flag is recorded in
/// the result's metadata, nothing else changes).
pub fn mimo_sum_capacity(fc: &FiniteChannel, assume_independent: bool) -> SchemeRate {
    let bits = fc.n_r() as f64 * fc.field().bits() - fc.entropies().iter().sum::<f64>();
    let mut r = SchemeRate::new(Scheme::Capacity, bits);
    r.meta.assumed_independent = Some(assume_independent);
    r
}

/// Antenna selection: greedily keep the lowest-entropy antennas whose
/// rows of Q stay linearly independent until N_t of them are chosen, then
/// decode only those. Rate: N_t log p − Σ H(z̃_m) over the kept set.
pub fn rate_antenna_selection(fc: &FiniteChannel) -> Result<SchemeRate> {
    let rows = crate::gf::greedy_row_select(fc.q(), fc.entropies())?;
    let log_p = fc.field().bits();
    let per_stream: Vec<f64> = rows.iter().map(|&m| log_p - fc.entropies()[m]).collect();
    let bits = per_stream.iter().sum();
    let mut r = SchemeRate::new(Scheme::AntennaSelection, bits);
    r.meta.selected = Some(rows);
    r.meta.per_stream = Some(per_stream);
    Ok(r)
}

/// Repetition with plurality detection over `n_r` antennas that each err
/// with probability `eps`: the decision is wrong with probability
/// P_e = P(more than ⌊(n_r−1)/2⌋ antennas err), and the surviving rate is
/// log p − H₂(P_e) − P_e·log₂(p−1).
pub fn rate_repetition(field: crate::gf::PrimeField, n_r: usize, eps: f64) -> SchemeRate {
    assert!(n_r > 0, "at least one antenna required");
    rate_repetition_vec(field, &vec![eps; n_r])
}

/// [`rate_repetition`] with a per-antenna error probability vector, for
/// channels whose antennas are not equally noisy. The plurality decision
/// is wrong with probability P(more than ⌊(n_r−1)/2⌋ antennas err).
pub fn rate_repetition_vec(field: crate::gf::PrimeField, eps: &[f64]) -> SchemeRate {
    assert!(!eps.is_empty(), "at least one antenna required");
    let t = (eps.len() - 1) / 2;
    let pe = pe_asym(t, eps);
    let wrong_symbols = (field.p() - 1) as f64;
    let penalty = if wrong_symbols > 0.0 {
        pe * wrong_symbols.log2()
    } else {
        0.0
    };
    let bits = field.bits() - binary_entropy(pe) - penalty;
    let mut r = SchemeRate::new(Scheme::Repetition, bits);
    r.meta.pe = Some(pe);
    r
}

/// Successive cancellation: decode streams in noise-entropy order with
/// ideal per-stage codes. Total rate N log p − Σ H(z̃_m); the per-stage
/// split is recorded in decode order.
pub fn rate_sc(fc: &FiniteChannel) -> Result<SchemeRate> {
    let ordering = ScOrdering::new(fc)?;
    let bits = ordering.rates().iter().sum();
    let mut r = SchemeRate::new(Scheme::SuccessiveCancellation, bits);
    r.meta.per_stream = Some(ordering.rates().to_vec());
    r.meta.selected = Some(ordering.order().to_vec());
    Ok(r)
}

/// Zero forcing: invert Q and pay for the mixed noise ζ = Q⁻¹ z̃. Stream
/// m's rate is log p − H(ζ_m) with ζ_m the exact cyclic convolution of the
/// scaled per-antenna laws along row m of Q⁻¹.
pub fn rate_zf(fc: &FiniteChannel) -> Result<SchemeRate> {
    let q = fc.q();
    if q.rows() != q.cols() {
        return Err(Error::Unsupported(format!(
            "zero forcing needs a square channel matrix, got {}x{}",
            q.rows(),
            q.cols()
        )));
    }
    let qinv = q.inverse()?;
    let p = fc.field().size();
    let log_p = fc.field().bits();
    let mut per_stream = Vec::with_capacity(q.rows());
    for m in 0..q.rows() {
        let mut mixed = Pmf::point_mass(p, 0);
        for i in 0..q.cols() {
            let coeff = qinv.get(m, i);
            if coeff.is_zero() {
                continue;
            }
            let scaled = fc.noise_pmf(i).scale_index(coeff)?;
            mixed = mixed.convolve(&scaled);
        }
        per_stream.push(log_p - mixed.entropy_bits());
    }
    let bits = per_stream.iter().sum();
    let mut r = SchemeRate::new(Scheme::ZeroForcing, bits);
    r.meta.per_stream = Some(per_stream);
    Ok(r)
}

/// Analytic linear-block-code bound from the minimum distance: with
/// d_min = d the decoder corrects t = ⌊(d−1)/2⌋ antenna errors, the block
/// error probability is bounded by the Poisson-binomial tail past t, and
/// the rate N_t log p − H₂(P_e) − P_e·log₂(p^{N_t}−1) is achievable.
pub fn rate_elbc(fc: &FiniteChannel) -> Result<SchemeRate> {
    let d_min = min_distance(fc.q())?;
    if d_min == 0 {
        return Err(Error::RankDeficient {
            rank: fc.q().rank(),
            need: fc.n_t(),
        });
    }
    let t = (d_min - 1) / 2;
    let pe = pe_asym(t, fc.eps());
    let message_bits = fc.n_t() as f64 * fc.field().bits();
    let wrong = (fc.field().p() as f64).powi(fc.n_t() as i32) - 1.0;
    let penalty = if wrong > 0.0 { pe * wrong.log2() } else { 0.0 };
    let bits = message_bits - binary_entropy(pe) - penalty;
    let mut r = SchemeRate::new(Scheme::Elbc, bits);
    r.meta.pe = Some(pe);
    r.meta.d_min = Some(d_min);
    Ok(r)
}

/// Simulated linear-block-code rate: run minimum-distance decoding over
/// `trials` random transmissions, estimate each stream's symbol error rate
/// q_i, and sum the per-stream rates log p − H₂(q_i) − q_i·log₂(p−1).
///
/// The estimate is seed-deterministic: the same `seed` and `trials` always
/// produce the same result, independent of thread count (the loop is
/// sequential).
pub fn rate_lbc(fc: &FiniteChannel, trials: u64, seed: u64) -> Result<SchemeRate> {
    assert!(trials > 0, "at least one trial required");
    let q = fc.q();
    let field = fc.field();
    let (n_r, n_t) = (fc.n_r(), fc.n_t());
    let p = field.size();

    enum Decoder {
        Packed(PackedBinaryCodebook),
        General(CodebookView),
    }
    // The packed path stores 2^{N_t} words, so it only applies while that
    // fits the codebook store cap (N_t ≤ 16).
    let decoder = if field.p() == 2 && n_r <= 64 && n_t <= 16 {
        Decoder::Packed(PackedBinaryCodebook::new(q)?)
    } else {
        Decoder::General(CodebookView::new(q.clone())?)
    };
    // Refuse rank-deficient generators up front: distinct messages would
    // collide and the symbol error rates would be meaningless.
    let full_rank = match &decoder {
        Decoder::Packed(_) => q.rank() == n_t,
        Decoder::General(cb) => cb.d_min() > 0,
    };
    if !full_rank {
        return Err(Error::RankDeficient {
            rank: q.rank(),
            need: n_t,
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut errors = vec![0u64; n_t];
    let mut msg = vec![field.zero(); n_t];
    for _ in 0..trials {
        for s in msg.iter_mut() {
            *s = field.elem(rng.gen_range(0..p as i64));
        }
        let mut u = q.mul_vec(&msg);
        for (m, s) in u.iter_mut().enumerate() {
            let z = fc.noise_pmf(m).sample(&mut rng);
            *s = *s + field.elem(z as i64);
        }
        let decoded = match &decoder {
            Decoder::Packed(pk) => {
                vector_from_index(field, n_t, pk.decode_index(pk.pack(&u)) as u128)
            }
            Decoder::General(cb) => cb.md_decode(&u),
        };
        for (i, (a, b)) in decoded.iter().zip(msg.iter()).enumerate() {
            if a != b {
                errors[i] += 1;
            }
        }
    }

    let log_p = field.bits();
    let wrong_symbols = (field.p() - 1) as f64;
    let mut bits = 0.0;
    let mut per_stream = Vec::with_capacity(n_t);
    let mut var_sum = 0.0;
    for &e in &errors {
        let qi = e as f64 / trials as f64;
        let penalty = if wrong_symbols > 0.0 {
            qi * wrong_symbols.log2()
        } else {
            0.0
        };
        let stream_bits = log_p - binary_entropy(qi) - penalty;
        per_stream.push(stream_bits);
        bits += stream_bits;
        var_sum += qi * (1.0 - qi) / trials as f64;
    }
    let mut r = SchemeRate::new(Scheme::Lbc, bits);
    r.meta.per_stream = Some(per_stream);
    r.meta.trials = Some(trials);
    r.meta.stderr = Some(var_sum.sqrt());
    Ok(r)
}

/// Exhaustive search over nonzero combining vectors w for a single-stream
/// channel: the combined output w·u sees gain w·q and noise Σ w_m z̃_m, and
/// the rate is log p − H(Σ w_m z̃_m) whenever the gain is nonzero. Returns
/// the best w (ties toward the lowest index) and its rate.
pub fn best_linear_combiner(fc: &FiniteChannel) -> Result<(Vec<Gf>, SchemeRate)> {
    if fc.n_t() != 1 {
        return Err(Error::Unsupported(format!(
            "linear combining is a single-stream scheme, got {} streams",
            fc.n_t()
        )));
    }
    let field = fc.field();
    let p = field.size();
    let n_r = fc.n_r();
    let count = (p as u128).checked_pow(n_r as u32).unwrap_or(u128::MAX);
    if count > JOINT_CAP {
        return Err(Error::EnumerationCap {
            required: count,
            cap: JOINT_CAP,
        });
    }
    let gains: Vec<Gf> = (0..n_r).map(|m| fc.q().get(m, 0)).collect();
    let log_p = field.bits();
    let mut best: Option<(Vec<Gf>, f64)> = None;
    for widx in 1..count {
        let w = vector_from_index(field, n_r, widx);
        let mut gain = field.zero();
        for (wm, qm) in w.iter().zip(gains.iter()) {
            gain = gain + *wm * *qm;
        }
        if gain.is_zero() {
            continue;
        }
        let mut mixed = Pmf::point_mass(p, 0);
        for (m, wm) in w.iter().enumerate() {
            if wm.is_zero() {
                continue;
            }
            mixed = mixed.convolve(&fc.noise_pmf(m).scale_index(*wm)?);
        }
        let rate = log_p - mixed.entropy_bits();
        if best.as_ref().map_or(true, |(_, b)| rate > *b) {
            best = Some((w, rate));
        }
    }
    let (w, bits) = best.ok_or_else(|| {
        Error::Unsupported(
            "every combining vector sees zero gain (the channel column is zero)".into(),
        )
    })?;
    let mut r = SchemeRate::new(Scheme::BestCombiner, bits);
    r.meta.combiner = Some(w.iter().map(|s| s.value()).collect());
    Ok((w, r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::{GfMatrix, PrimeField};

    fn f(p: u64) -> PrimeField {
        PrimeField::new(p).unwrap()
    }

    fn symmetric_channel(q: GfMatrix, eps: &[f64]) -> FiniteChannel {
        FiniteChannel::symmetric(q, eps).unwrap()
    }

    fn ones_column(field: PrimeField, n_r: usize) -> GfMatrix {
        GfMatrix::from_flat(field, n_r, 1, &vec![1; n_r])
    }

    #[test]
    fn binary_entropy_known_points() {
        assert_eq!(binary_entropy(0.0), 0.0);
        assert_eq!(binary_entropy(1.0), 0.0);
        assert!((binary_entropy(0.5) - 1.0).abs() < 1e-15);
        assert!((binary_entropy(0.15) - 0.6098403047164004).abs() < 1e-12);
        assert!((binary_entropy(0.25) - binary_entropy(0.75)).abs() < 1e-15);
    }

    /// Literal subset enumeration of the error-count tail, the slow but
    /// unarguable reference for the dynamic program.
    fn tail_by_enumeration(t: usize, eps: &[f64]) -> f64 {
        let n = eps.len();
        let mut total = 0.0;
        for mask in 0u32..(1 << n) {
            if (mask.count_ones() as usize) <= t {
                continue;
            }
            let mut prob = 1.0;
            for (m, &e) in eps.iter().enumerate() {
                prob *= if (mask >> m) & 1 == 1 { e } else { 1.0 - e };
            }
            total += prob;
        }
        total
    }

    #[test]
    fn error_tail_matches_subset_enumeration() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(55);
        for _ in 0..200 {
            let n = rng.gen_range(1..=12usize);
            let t = rng.gen_range(0..=n);
            let eps: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
            let fast = pe_asym(t, &eps);
            let slow = tail_by_enumeration(t, &eps);
            assert!((fast - slow).abs() < 1e-12, "n={n} t={t}: {fast} vs {slow}");
        }
    }

    #[test]
    fn error_tail_known_values() {
        // Three antennas at 0.15, majority threshold t=1:
        // 3·ε²(1−ε) + ε³ = 0.06075 exactly.
        assert!((pe_asym(1, &[0.15; 3]) - 0.06075).abs() < 1e-15);
        // Seven antennas at 0.15, t=3: the tail is 15492060/20^7.
        assert!((pe_asym(3, &[0.15; 7]) - 0.012103171875).abs() < 1e-13);
        // Threshold at or past n: no tail.
        assert_eq!(pe_asym(3, &[0.4; 3]), 0.0);
        // t = 0: complement of "no errors".
        let eps = [0.1, 0.2, 0.3];
        let none = 0.9 * 0.8 * 0.7;
        assert!((pe_asym(0, &eps) - (1.0 - none)).abs() < 1e-15);
    }

    #[test]
    fn closed_form_capacity_edge_cases() {
        for n_r in 1..=8 {
            assert!((simo_capacity(0.0, n_r) - 1.0).abs() < 1e-12);
            assert!(simo_capacity(0.5, n_r).abs() < 1e-12);
        }
        // One antenna: the plain binary symmetric channel.
        assert!((simo_capacity(0.15, 1) - (1.0 - binary_entropy(0.15))).abs() < 1e-12);
        // Three antennas at 0.15: a hand-checked anchor.
        assert!((simo_capacity(0.15, 3) - 0.73652).abs() < 1e-4);
    }

    #[test]
    fn closed_form_capacity_matches_joint_table() {
        let field = f(2);
        for n_r in 1..=6 {
            let gains = vec![field.elem(1); n_r];
            for eps in [0.05, 0.15, 0.3, 0.45] {
                let pmfs: Vec<Pmf> = (0..n_r).map(|_| Pmf::symmetric(2, eps).unwrap()).collect();
                let joint = simo_capacity_joint(&pmfs, &gains).unwrap();
                let closed = simo_capacity(eps, n_r);
                assert!(
                    (joint - closed).abs() < 1e-9,
                    "n_r={n_r} eps={eps}: {joint} vs {closed}"
                );
            }
        }
    }

    #[test]
    fn joint_capacity_is_monotone_in_antennas() {
        for eps in [0.05, 0.2, 0.4] {
            let mut prev = 0.0;
            for n_r in 1..=7 {
                let c = simo_capacity(eps, n_r);
                assert!(c >= prev - 1e-12, "eps={eps} n_r={n_r}");
                prev = c;
            }
        }
    }

    #[test]
    fn joint_capacity_respects_the_table_cap() {
        let field = f(13);
        let pmfs: Vec<Pmf> = (0..7).map(|_| Pmf::uniform(13)).collect();
        let gains = vec![field.elem(1); 7];
        assert!(matches!(
            simo_capacity_joint(&pmfs, &gains),
            Err(Error::EnumerationCap { .. })
        ));
    }

    #[test]
    fn repetition_rate_known_value() {
        let r = rate_repetition(f(2), 3, 0.15);
        let pe = r.meta.pe.unwrap();
        assert!((pe - 0.06075).abs() < 1e-15);
        assert!((r.bits - (1.0 - binary_entropy(0.06075))).abs() < 1e-12);
        // Non-binary: the wrong-symbol spread costs log2(p−1) per error.
        let r3 = rate_repetition(f(3), 3, 0.1);
        let pe3 = r3.meta.pe.unwrap();
        assert!((pe3 - 0.028).abs() < 1e-12);
        let want = 3f64.log2() - binary_entropy(0.028) - 0.028 * 2f64.log2();
        assert!((r3.bits - want).abs() < 1e-12);
    }

    #[test]
    fn repetition_rate_with_unequal_antennas() {
        // Mixed error rates: the plurality over (0.1, 0.2, 0.3) fails when
        // at least two antennas err, i.e. with probability
        // 0.1*0.2 + 0.1*0.3 + 0.2*0.3 - 2*0.1*0.2*0.3 = 0.098.
        let r = rate_repetition_vec(f(2), &[0.1, 0.2, 0.3]);
        let pe = r.meta.pe.unwrap();
        assert!((pe - 0.098).abs() < 1e-14, "pe {pe}");
        assert!((r.bits - (1.0 - binary_entropy(0.098))).abs() < 1e-12);
        // A uniform vector reproduces the scalar form exactly.
        let uniform = rate_repetition_vec(f(2), &[0.15; 5]);
        assert_eq!(
            uniform.bits.to_bits(),
            rate_repetition(f(2), 5, 0.15).bits.to_bits()
        );
    }

    #[test]
    fn repetition_rate_is_nonnegative_and_within_capacity() {
        for n_r in (1..=9).step_by(2) {
            for eps in [0.05, 0.15, 0.25, 0.35, 0.45] {
                let r = rate_repetition(f(2), n_r, eps);
                assert!(r.bits >= 0.0, "n_r={n_r} eps={eps}: {}", r.bits);
                let cap = simo_capacity(eps, n_r);
                assert!(
                    r.bits <= cap + 1e-12,
                    "n_r={n_r} eps={eps}: rep {} > capacity {cap}",
                    r.bits
                );
            }
        }
    }

    #[test]
    fn repetition_rate_grows_with_diversity() {
        for eps in [0.05, 0.15, 0.3] {
            let mut prev = 0.0;
            for n_r in (1..=11).step_by(2) {
                let r = rate_repetition(f(2), n_r, eps).bits;
                assert!(r >= prev - 1e-12, "eps={eps} n_r={n_r}");
                prev = r;
            }
        }
    }

    #[test]
    fn single_antenna_schemes_coincide() {
        // One antenna, one stream: selection, repetition, combining, and
        // capacity all collapse to the same scalar channel.
        let eps = 0.12;
        let fc = symmetric_channel(ones_column(f(2), 1), &[eps]);
        let scalar = 1.0 - binary_entropy(eps);
        assert!((rate_antenna_selection(&fc).unwrap().bits - scalar).abs() < 1e-12);
        assert!((rate_repetition(f(2), 1, eps).bits - scalar).abs() < 1e-12);
        let (_, comb) = best_linear_combiner(&fc).unwrap();
        assert!((comb.bits - scalar).abs() < 1e-12);
        assert!((simo_capacity(eps, 1) - scalar).abs() < 1e-12);
    }

    #[test]
    fn antenna_selection_takes_the_quietest_antenna() {
        let fc = symmetric_channel(ones_column(f(2), 3), &[0.3, 0.05, 0.2]);
        let r = rate_antenna_selection(&fc).unwrap();
        assert_eq!(r.meta.selected.as_deref(), Some(&[1usize][..]));
        assert!((r.bits - (1.0 - binary_entropy(0.05))).abs() < 1e-12);
    }

    #[test]
    fn antenna_selection_skips_dependent_rows() {
        // Rows 0 and 1 are parallel; the quiet pair (0, 1) is infeasible,
        // so the greedy pick is {0, 2}.
        let field = f(3);
        let q = GfMatrix::from_rows(field, &[vec![1, 1], vec![2, 2], vec![0, 1]]);
        let fc = symmetric_channel(q, &[0.01, 0.02, 0.3]);
        let r = rate_antenna_selection(&fc).unwrap();
        assert_eq!(r.meta.selected.as_deref(), Some(&[0usize, 2][..]));
    }

    #[test]
    fn sum_capacity_equals_sc_total_on_square_channels() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let field = f(5);
        let mut done = 0;
        while done < 10 {
            let vals: Vec<i64> = (0..9).map(|_| rng.gen_range(0..5)).collect();
            let q = GfMatrix::from_flat(field, 3, 3, &vals);
            if q.rank() < 3 {
                continue;
            }
            done += 1;
            let eps: Vec<f64> = (0..3).map(|_| rng.gen_range(0.01..0.4)).collect();
            let fc = symmetric_channel(q, &eps);
            let cap = mimo_sum_capacity(&fc, true);
            let sc = rate_sc(&fc).unwrap();
            assert!((cap.bits - sc.bits).abs() < 1e-12);
            // And both equal selection, which must keep every row here.
            let anse = rate_antenna_selection(&fc).unwrap();
            assert!((anse.bits - sc.bits).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_forcing_mixes_noise_along_inverse_rows() {
        // Q = [[1,1],[0,1]] over Z2 is self-inverse, so stream 0 pays for
        // z̃_0 ⊕ z̃_1 and stream 1 for z̃_1 alone.
        let field = f(2);
        let q = GfMatrix::from_rows(field, &[vec![1, 1], vec![0, 1]]);
        let fc = symmetric_channel(q, &[0.1, 0.2]);
        let r = rate_zf(&fc).unwrap();
        let mixed = 0.1 * 0.8 + 0.9 * 0.2; // = 0.26
        let want = (1.0 - binary_entropy(mixed)) + (1.0 - binary_entropy(0.2));
        assert!((r.bits - want).abs() < 1e-12);
        let per = r.meta.per_stream.unwrap();
        assert!((per[0] - (1.0 - binary_entropy(0.26))).abs() < 1e-12);
        assert!((per[1] - (1.0 - binary_entropy(0.2))).abs() < 1e-12);
    }

    #[test]
    fn successive_cancellation_never_loses_to_zero_forcing() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        for p in [2u64, 3, 5] {
            for n in 2..=4usize {
                let field = f(p);
                let mut done = 0;
                while done < 20 {
                    let vals: Vec<i64> = (0..n * n).map(|_| rng.gen_range(0..p as i64)).collect();
                    let q = GfMatrix::from_flat(field, n, n, &vals);
                    if q.rank() < n {
                        continue;
                    }
                    done += 1;
                    let eps: Vec<f64> = (0..n).map(|_| rng.gen_range(0.01..0.45)).collect();
                    let fc = symmetric_channel(q, &eps);
                    let sc = rate_sc(&fc).unwrap().bits;
                    let zf = rate_zf(&fc).unwrap().bits;
                    assert!(sc >= zf - 1e-12, "p={p} n={n}: sc {sc} < zf {zf}");
                }
            }
        }
    }

    #[test]
    fn zero_forcing_equals_sc_on_diagonal_channels() {
        // A diagonal Q mixes nothing, so inversion costs nothing.
        let field = f(5);
        let q = GfMatrix::from_rows(field, &[vec![2, 0], vec![0, 3]]);
        let fc = symmetric_channel(q, &[0.1, 0.2]);
        let sc = rate_sc(&fc).unwrap().bits;
        let zf = rate_zf(&fc).unwrap().bits;
        assert!((sc - zf).abs() < 1e-12);
    }

    #[test]
    fn min_distance_bound_on_the_hamming_channel() {
        let q = GfMatrix::from_rows(
            f(2),
            &[
                vec![1, 0, 0, 0],
                vec![0, 1, 0, 0],
                vec![0, 0, 1, 0],
                vec![0, 0, 0, 1],
                vec![1, 1, 0, 1],
                vec![1, 0, 1, 1],
                vec![1, 1, 1, 0],
            ],
        );
        let fc = symmetric_channel(q, &[0.15; 7]);
        let r = rate_elbc(&fc).unwrap();
        assert_eq!(r.meta.d_min, Some(3));
        // t = 1, so P_e = P(K ≥ 2) = 362772378/20^7 exactly.
        let pe = r.meta.pe.unwrap();
        assert!((pe - 0.2834159203125).abs() < 1e-12);
        let want = 4.0 - binary_entropy(pe) - pe * 15f64.log2();
        assert!((r.bits - want).abs() < 1e-12);
        assert!(r.bits >= 0.0);
    }

    #[test]
    fn min_distance_bound_rejects_rank_deficient_channels() {
        let q = GfMatrix::from_rows(f(2), &[vec![1, 1], vec![1, 1]]);
        let fc = symmetric_channel(q, &[0.1, 0.1]);
        assert!(matches!(
            rate_elbc(&fc),
            Err(Error::RankDeficient { rank: 1, need: 2 })
        ));
    }

    #[test]
    fn simulated_code_rate_is_exact_without_noise() {
        let field = f(3);
        let q = GfMatrix::from_rows(field, &[vec![1, 0], vec![0, 1], vec![1, 1]]);
        let fc = symmetric_channel(q, &[0.0, 0.0, 0.0]);
        let r = rate_lbc(&fc, 500, 9).unwrap();
        assert!((r.bits - 2.0 * 3f64.log2()).abs() < 1e-12);
        assert_eq!(r.meta.stderr, Some(0.0));
    }

    #[test]
    fn simulated_code_rate_matches_analytics_on_identity_channels() {
        // With Q = I the decoder is symbol-by-symbol, so stream i errs
        // exactly when z̃_i ≠ 0.
        let field = f(2);
        let eps = [0.1, 0.2];
        let fc = symmetric_channel(GfMatrix::identity(field, 2), &eps);
        let trials = 40_000;
        let r = rate_lbc(&fc, trials, 1234).unwrap();
        let want: f64 = eps.iter().map(|&e| 1.0 - binary_entropy(e)).sum();
        // Four-sigma on each stream's error rate mapped through the rate
        // expression stays well under 0.06 bits here.
        assert!(
            (r.bits - want).abs() < 0.06,
            "simulated {} vs analytic {want}",
            r.bits
        );
        assert_eq!(r.meta.trials, Some(trials));
        assert!(r.meta.stderr.unwrap() > 0.0);
    }

    #[test]
    fn simulated_code_rate_is_seed_deterministic() {
        let field = f(5);
        let q = GfMatrix::from_rows(field, &[vec![1, 2], vec![3, 1], vec![2, 2]]);
        let fc = symmetric_channel(q, &[0.1, 0.15, 0.2]);
        let a = rate_lbc(&fc, 2000, 77).unwrap();
        let b = rate_lbc(&fc, 2000, 77).unwrap();
        assert_eq!(a.bits.to_bits(), b.bits.to_bits());
        let c = rate_lbc(&fc, 2000, 78).unwrap();
        assert!(a.bits != c.bits || a.meta.stderr != c.meta.stderr);
    }

    #[test]
    fn simulated_code_rate_uses_the_packed_fast_path_consistently() {
        // Same channel, binary (packed) vs ternary (general) paths should
        // both land near their analytic identity-channel values.
        let fc3 = symmetric_channel(GfMatrix::identity(f(3), 2), &[0.1, 0.1]);
        let r3 = rate_lbc(&fc3, 30_000, 5).unwrap();
        let want3: f64 = 2.0 * (3f64.log2() - binary_entropy(0.1) - 0.1);
        assert!((r3.bits - want3).abs() < 0.08, "{} vs {want3}", r3.bits);
    }

    #[test]
    fn simulated_code_rate_rejects_rank_deficient_generators() {
        let q = GfMatrix::from_rows(f(2), &[vec![1, 1], vec![1, 1], vec![0, 0]]);
        let fc = symmetric_channel(q, &[0.1, 0.1, 0.1]);
        assert!(matches!(
            rate_lbc(&fc, 100, 0),
            Err(Error::RankDeficient { rank: 1, need: 2 })
        ));
    }

    #[test]
    fn combiner_equals_antenna_selection_at_the_optimum() {
        // Convolving independent noise never lowers entropy below the
        // quietest component, so the best weight vector is a singleton and
        // combining ties antenna selection exactly.
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(808);
        for p in [2u64, 3] {
            let field = f(p);
            for n_r in 1..=4usize {
                for _ in 0..25 {
                    let gains: Vec<i64> = (0..n_r).map(|_| rng.gen_range(1..p as i64)).collect();
                    let q = GfMatrix::from_flat(field, n_r, 1, &gains);
                    let eps: Vec<f64> = (0..n_r).map(|_| rng.gen_range(0.01..0.45)).collect();
                    let fc = symmetric_channel(q, &eps);
                    let (w, comb) = best_linear_combiner(&fc).unwrap();
                    let anse = rate_antenna_selection(&fc).unwrap();
                    assert!(
                        (comb.bits - anse.bits).abs() < 1e-12,
                        "p={p} n_r={n_r}: lincomb {} vs anse {}",
                        comb.bits,
                        anse.bits
                    );
                    assert!(w.iter().any(|s| !s.is_zero()));
                }
            }
        }
    }

    #[test]
    fn combiner_two_coin_anchor() {
        // Equal antennas at ε = 0.1 with unit gains: the all-ones combiner
        // sees flip probability 0.18, a singleton sees 0.1.
        let fc = symmetric_channel(ones_column(f(2), 2), &[0.1, 0.1]);
        let (_, best) = best_linear_combiner(&fc).unwrap();
        assert!((best.bits - (1.0 - binary_entropy(0.1))).abs() < 1e-12);
        // The all-ones vector's rate, computed by hand, is strictly worse.
        assert!(best.bits > 1.0 - binary_entropy(0.18) + 1e-6);
    }

    #[test]
    fn combiner_rejects_multi_stream_and_dead_channels() {
        let fc = symmetric_channel(GfMatrix::identity(f(2), 2), &[0.1, 0.1]);
        assert!(matches!(
            best_linear_combiner(&fc),
            Err(Error::Unsupported(_))
        ));
        let dead = symmetric_channel(GfMatrix::zeros(f(2), 2, 1), &[0.1, 0.1]);
        assert!(matches!(
            best_linear_combiner(&dead),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn scheme_names_round_trip() {
        let all = [
            Scheme::AntennaSelection,
            Scheme::Repetition,
            Scheme::SuccessiveCancellation,
            Scheme::ZeroForcing,
            Scheme::Lbc,
            Scheme::Elbc,
            Scheme::Capacity,
            Scheme::BestCombiner,
        ];
        for s in all {
            let name = s.to_string();
            assert_eq!(name.parse::<Scheme>().unwrap(), s);
        }
        assert!("mrc".parse::<Scheme>().is_err());
    }
}
