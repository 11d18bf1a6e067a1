//! Turning a real Gaussian MIMO channel into a linear channel over Z_p.
//!
//! The pipeline: messages are modulated onto the nested-lattice
//! constellation, pass through the real matrix `H` with unit-variance
//! Gaussian noise, and each receive antenna applies the sawtooth quantizer
//! followed by demodulation. Choosing an integer coefficient matrix `A`
//! close to `H` makes the demodulated outputs obey
//!
//! ```text
//! u = Q c + z̃   over Z_p,   Q = A mod p,
//! ```
//!
//! where the effective noise z̃_m depends only on the rounding residue
//! `H − A` and the Gaussian noise. [`effective_noise_pmf`] computes each
//! marginal law exactly by folding Gaussian cell masses over the lattice;
//! [`transform`] packages the whole finite-field view.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::gf::{vector_from_index, Gf, GfMatrix, PrimeField};
use crate::lattice::{demodulate, modulate, sawtooth, LatticeParams};
use crate::pmf::Pmf;

/// Residual Gaussian tail allowed to remain unfolded per mixture component.
pub const NOISE_TAIL_TOL: f64 = 1e-12;

/// Largest exact input mixture enumerated by [`effective_noise_pmf`];
/// beyond this the pmf falls back to Monte Carlo estimation.
pub const MIXTURE_CAP: u128 = 1 << 20;

/// Sample count used by the Monte Carlo pmf fallback.
pub const PMF_FALLBACK_SAMPLES: u64 = 1_000_000;

/// Candidate cap for the coefficient-rounding repair search.
const REPAIR_CAP_BITS: u32 = 20;

/// A dense row-major real matrix; just enough linear algebra for the
/// receive path.
#[derive(Debug, Clone, PartialEq)]
pub struct RealMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl RealMatrix {
    pub fn from_flat(rows: usize, cols: usize, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), rows * cols, "shape mismatch");
        Self {
            rows,
            cols,
            data: values,
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut flat = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            flat.extend_from_slice(row);
        }
        Self::from_flat(r, c, flat)
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::from_flat(n, n, vec![0.0; n * n]);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        assert!(r < self.rows && c < self.cols, "index out of bounds");
        self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[f64] {
        assert!(r < self.rows, "row index out of bounds");
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn values(&self) -> &[f64] {
        &self.data
    }
}

/// A real channel instance: gain matrix, linear SNR, and the prime field the
/// transmitter modulates over.
#[derive(Debug, Clone, PartialEq)]
pub struct RealChannel {
    pub h: RealMatrix,
    pub snr: f64,
    pub field: PrimeField,
}

impl RealChannel {
    /// Validates the SNR (must admit lattice parameters) and wraps the parts.
    pub fn new(h: RealMatrix, snr: f64, field: PrimeField) -> Result<Self> {
        LatticeParams::new(field, snr)?;
        Ok(Self { h, snr, field })
    }

    pub fn n_r(&self) -> usize {
        self.h.rows()
    }

    pub fn n_t(&self) -> usize {
        self.h.cols()
    }

    /// The modulation parameters implied by field and SNR.
    pub fn lattice(&self) -> LatticeParams {
        LatticeParams::new(self.field, self.snr).expect("snr validated at construction")
    }

    /// A channel with i.i.d. standard normal gains.
    pub fn random<R: Rng + ?Sized>(
        field: PrimeField,
        snr: f64,
        n_r: usize,
        n_t: usize,
        rng: &mut R,
    ) -> Result<Self> {
        let values: Vec<f64> = (0..n_r * n_t).map(|_| rng.sample(StandardNormal)).collect();
        Self::new(RealMatrix::from_flat(n_r, n_t, values), snr, field)
    }
}

/// Rewrites a complex channel `y = H x + z` as the real system of doubled
/// dimension: outputs `[Re y; Im y]`, inputs `[Re x; Im x]`, matrix
/// `[[Re H, −Im H], [Im H, Re H]]`. Returns the real matrix and the real
/// image of `x`.
pub fn realify(h: &[Vec<Complex64>], x: &[Complex64]) -> (RealMatrix, Vec<f64>) {
    let n_r = h.len();
    let n_t = h.first().map_or(0, Vec::len);
    assert!(h.iter().all(|row| row.len() == n_t), "ragged rows");
    assert_eq!(x.len(), n_t, "input length mismatch");
    let mut m = RealMatrix::from_flat(2 * n_r, 2 * n_t, vec![0.0; 4 * n_r * n_t]);
    for r in 0..n_r {
        for c in 0..n_t {
            let v = h[r][c];
            m.data[r * 2 * n_t + c] = v.re;
            m.data[r * 2 * n_t + n_t + c] = -v.im;
            m.data[(n_r + r) * 2 * n_t + c] = v.im;
            m.data[(n_r + r) * 2 * n_t + n_t + c] = v.re;
        }
    }
    let mut xr = Vec::with_capacity(2 * n_t);
    xr.extend(x.iter().map(|v| v.re));
    xr.extend(x.iter().map(|v| v.im));
    (m, xr)
}

/// The integer coefficient matrix `A` approximating `H`; its residue mod p
/// is the finite-field channel matrix `Q`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntegerCoeffMatrix {
    rows: usize,
    cols: usize,
    data: Vec<i64>,
}

impl IntegerCoeffMatrix {
    pub fn from_flat(rows: usize, cols: usize, values: Vec<i64>) -> Self {
        assert_eq!(values.len(), rows * cols, "shape mismatch");
        Self {
            rows,
            cols,
            data: values,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> i64 {
        assert!(r < self.rows && c < self.cols, "index out of bounds");
        self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[i64] {
        assert!(r < self.rows, "row index out of bounds");
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// The residue matrix Q = A mod p.
    pub fn residue(&self, field: PrimeField) -> GfMatrix {
        GfMatrix::from_flat(field, self.rows, self.cols, &self.data)
    }
}

/// A candidate set of entry flips, ordered by added squared error with
/// deterministic tie-breaking.
struct RepairCandidate {
    cost: f64,
    /// Positions into the cost-sorted entry list, strictly ascending.
    picks: Vec<usize>,
}

impl PartialEq for RepairCandidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for RepairCandidate {}
impl PartialOrd for RepairCandidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for RepairCandidate {
    fn cmp(&self, other: &Self) -> Ordering {
        // Reversed: BinaryHeap is a max-heap, we want the cheapest first.
        other
            .cost
            .partial_cmp(&self.cost)
            .expect("costs are finite")
            .then_with(|| other.picks.cmp(&self.picks))
    }
}

/// Picks the integer coefficient matrix: elementwise nearest integer to `H`,
/// repaired by the cheapest entry flips (each entry may move to its other
/// bracketing integer) until the residue matrix has full column rank — and,
/// for single-stream channels, no zero gain. Candidates are explored in
/// ascending order of total added squared error; ties resolve to the
/// lexicographically earliest flip set over the cost-sorted entries, so the
/// result is deterministic.
pub fn choose_coeffs(ch: &RealChannel) -> Result<IntegerCoeffMatrix> {
    let (n_r, n_t) = (ch.n_r(), ch.n_t());
    let n = n_r * n_t;
    let mut base = Vec::with_capacity(n);
    let mut alts = Vec::with_capacity(n);
    for &h in ch.h.values() {
        let a0 = h.round();
        // The other bracketing integer; exact-integer entries flip upward.
        let alt = if h > a0 {
            a0 + 1.0
        } else if h < a0 {
            a0 - 1.0
        } else {
            a0 + 1.0
        };
        let cost = (h - alt).powi(2) - (h - a0).powi(2);
        base.push(a0 as i64);
        alts.push((alt as i64, cost));
    }

    let admissible = |values: &[i64]| -> bool {
        let q = IntegerCoeffMatrix::from_flat(n_r, n_t, values.to_vec()).residue(ch.field);
        if n_t == 1 {
            q.values().all(|v| v != 0)
        } else {
            q.rank() == n_t
        }
    };

    if admissible(&base) {
        return Ok(IntegerCoeffMatrix::from_flat(n_r, n_t, base));
    }

    // Best-first enumeration of flip subsets in ascending added cost.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        alts[a]
            .1
            .partial_cmp(&alts[b].1)
            .expect("costs are finite")
            .then(a.cmp(&b))
    });
    let cap: u128 = 1u128 << (n as u32).min(REPAIR_CAP_BITS);
    let mut heap = BinaryHeap::new();
    if n > 0 {
        heap.push(RepairCandidate {
            cost: alts[order[0]].1,
            picks: vec![0],
        });
    }
    let mut examined: u128 = 1; // the unmodified rounding counted above
    while let Some(cand) = heap.pop() {
        examined += 1;
        let mut values = base.clone();
        for &pos in &cand.picks {
            values[order[pos]] = alts[order[pos]].0;
        }
        if admissible(&values) {
            return Ok(IntegerCoeffMatrix::from_flat(n_r, n_t, values));
        }
        if examined >= cap {
            break;
        }
        // Standard lazy subset expansion: extend by the next position, or
        // slide the last pick one position to the right.
        let last = *cand.picks.last().expect("candidates are nonempty");
        if last + 1 < n {
            let mut extended = cand.picks.clone();
            extended.push(last + 1);
            heap.push(RepairCandidate {
                cost: cand.cost + alts[order[last + 1]].1,
                picks: extended,
            });
            let mut slid = cand.picks;
            slid.pop();
            slid.push(last + 1);
            heap.push(RepairCandidate {
                cost: cand.cost - alts[order[last]].1 + alts[order[last + 1]].1,
                picks: slid,
            });
        }
    }
    Err(Error::UnrepairableChannel {
        candidates: examined,
    })
}

/// How one marginal effective-noise pmf was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PmfMethod {
    /// Exact enumeration of the `inputs`-component Gaussian mixture.
    Exact { inputs: u64 },
    /// Monte Carlo fallback with the declared sample count.
    MonteCarlo { samples: u64 },
}

/// Upper Gaussian tail P(Z > x), accurate in both tails.
fn normal_tail_upper(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// P(a < Z <= b) for a standard normal, computed from whichever tail keeps
/// the subtraction well conditioned.
fn normal_interval_mass(a: f64, b: f64) -> f64 {
    debug_assert!(a <= b);
    if a >= 0.0 {
        normal_tail_upper(a) - normal_tail_upper(b)
    } else if b <= 0.0 {
        normal_tail_upper(-b) - normal_tail_upper(-a)
    } else {
        1.0 - normal_tail_upper(b) - normal_tail_upper(-a)
    }
}

/// Adds to `probs` the law of `(center + Z) mod the residue classes`:
/// the Gaussian mass of every coarse cell `κ·[k−1/2, k+1/2)`, folded onto
/// the residue `k mod p`, scaled by `weight`. Folding walks outward from the
/// dominant cell until the unfolded tail drops below [`NOISE_TAIL_TOL`].
fn fold_gaussian_center(center: f64, params: &LatticeParams, weight: f64, probs: &mut [f64]) {
    let kappa = params.kappa();
    let p = params.field().p() as i64;
    let k0 = (center / kappa + 0.5).floor() as i64;
    let cell_mass = |k: i64| {
        let a = kappa * (k as f64 - 0.5) - center;
        let b = kappa * (k as f64 + 0.5) - center;
        normal_interval_mass(a, b)
    };
    let residue = |k: i64| k.rem_euclid(p) as usize;
    probs[residue(k0)] += weight * cell_mass(k0);
    let (mut lo, mut hi) = (k0, k0);
    // Hard cap on the walk: for degenerate κ the law is indistinguishable
    // from uniform long before this, so any remaining tail is spread evenly.
    const MAX_CELLS: i64 = 2_000_000;
    loop {
        let left_tail = normal_tail_upper(center - kappa * (lo as f64 - 0.5));
        let right_tail = normal_tail_upper(kappa * (hi as f64 + 0.5) - center);
        if left_tail + right_tail < NOISE_TAIL_TOL {
            break;
        }
        if hi - lo >= MAX_CELLS {
            let leftover = weight * (left_tail + right_tail) / probs.len() as f64;
            for q in probs.iter_mut() {
                *q += leftover;
            }
            break;
        }
        if left_tail >= right_tail {
            lo -= 1;
            probs[residue(lo)] += weight * cell_mass(lo);
        } else {
            hi += 1;
            probs[residue(hi)] += weight * cell_mass(hi);
        }
    }
}

/// The Gaussian-mixture centers induced by the rounding residues of one
/// receive antenna: one center per transmit vector, Σ_ℓ (h_ℓ − a_ℓ)·φ(c_ℓ).
fn mixture_center(deltas: &[f64], c: &[Gf], params: &LatticeParams) -> f64 {
    deltas
        .iter()
        .zip(c.iter())
        .map(|(&d, &u)| d * modulate(u, params))
        .sum()
}

/// Exact route: enumerate all p^{N_t} equiprobable transmit vectors.
fn noise_pmf_exact(deltas: &[f64], params: &LatticeParams, inputs: u128) -> Result<Pmf> {
    let field = params.field();
    let mut probs = vec![0.0; field.size()];
    let weight = 1.0 / inputs as f64;
    for idx in 0..inputs {
        let c = vector_from_index(field, deltas.len(), idx);
        fold_gaussian_center(
            mixture_center(deltas, &c, params),
            params,
            weight,
            &mut probs,
        );
    }
    finish_pmf(probs)
}

/// Monte Carlo route for mixtures too large to enumerate.
fn noise_pmf_monte_carlo(deltas: &[f64], params: &LatticeParams, samples: u64) -> Result<Pmf> {
    let field = params.field();
    let kappa = params.kappa();
    let p = field.p() as i64;
    // Deterministic seed digested from the exact problem data.
    let mut seed = 0x9e37_79b9_7f4a_7c15u64 ^ (field.p() as u64);
    for &d in deltas {
        seed = splitmix(seed ^ d.to_bits());
    }
    seed = splitmix(seed ^ params.snr().to_bits());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0u64; field.size()];
    for _ in 0..samples {
        let c: Vec<Gf> = (0..deltas.len())
            .map(|_| field.elem(rng.gen_range(0..field.p()) as i64))
            .collect();
        let e = mixture_center(deltas, &c, params);
        let z: f64 = rng.sample(StandardNormal);
        let k = ((e + z) / kappa + 0.5).floor() as i64;
        counts[k.rem_euclid(p) as usize] += 1;
    }
    let probs = counts.iter().map(|&n| n as f64 / samples as f64).collect();
    Pmf::new(probs)
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

fn finish_pmf(mut probs: Vec<f64>) -> Result<Pmf> {
    for q in probs.iter_mut() {
        if *q < 0.0 {
            debug_assert!(*q > -1e-15, "negative mass beyond rounding noise");
            *q = 0.0;
        }
    }
    let sum: f64 = probs.iter().sum();
    debug_assert!((sum - 1.0).abs() < 1e-6, "folded mass far from 1: {sum}");
    for q in probs.iter_mut() {
        *q /= sum;
    }
    Pmf::new(probs)
}

/// The marginal law of one antenna's effective noise symbol
/// `z̃ = demod(sawtooth(e + z))`, where `e` mixes the rounding residues
/// `h_ℓ − a_ℓ` over equiprobable transmit vectors and `z` is standard
/// normal. Exact for mixtures up to [`MIXTURE_CAP`] components, Monte Carlo
/// beyond that (flagged in the returned method).
pub fn effective_noise_pmf(
    h_row: &[f64],
    a_row: &[i64],
    params: &LatticeParams,
) -> Result<(Pmf, PmfMethod)> {
    assert_eq!(h_row.len(), a_row.len(), "row length mismatch");
    let deltas: Vec<f64> = h_row
        .iter()
        .zip(a_row.iter())
        .map(|(&h, &a)| h - a as f64)
        .collect();
    if deltas.iter().all(|&d| d == 0.0) {
        // Every mixture component collapses onto the same center.
        let mut probs = vec![0.0; params.field().size()];
        fold_gaussian_center(0.0, params, 1.0, &mut probs);
        return Ok((finish_pmf(probs)?, PmfMethod::Exact { inputs: 1 }));
    }
    let inputs = (params.field().p() as u128)
        .checked_pow(deltas.len() as u32)
        .unwrap_or(u128::MAX);
    if inputs <= MIXTURE_CAP {
        Ok((
            noise_pmf_exact(&deltas, params, inputs)?,
            PmfMethod::Exact {
                inputs: inputs as u64,
            },
        ))
    } else {
        Ok((
            noise_pmf_monte_carlo(&deltas, params, PMF_FALLBACK_SAMPLES)?,
            PmfMethod::MonteCarlo {
                samples: PMF_FALLBACK_SAMPLES,
            },
        ))
    }
}

/// The finite-field view of a channel: residue matrix Q plus one effective
/// noise law per receive antenna (marginals; joint dependence is measured
/// empirically elsewhere).
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteChannel {
    q: GfMatrix,
    noise_pmfs: Vec<Pmf>,
    eps: Vec<f64>,
    entropies: Vec<f64>,
}

impl FiniteChannel {
    /// Assembles a finite channel from a residue matrix and per-antenna
    /// noise laws. The laws must cover the field alphabet, one per row of
    /// `q`. Rank is not enforced here: detectors and rate formulas check
    /// the rank they actually need.
    pub fn from_parts(q: GfMatrix, noise_pmfs: Vec<Pmf>) -> Result<Self> {
        if noise_pmfs.len() != q.rows() {
            return Err(Error::InvalidPmf(format!(
                "{} noise laws for {} antennas",
                noise_pmfs.len(),
                q.rows()
            )));
        }
        if let Some(bad) = noise_pmfs.iter().find(|pmf| pmf.len() != q.field().size()) {
            return Err(Error::InvalidPmf(format!(
                "noise law over {} symbols does not match field size {}",
                bad.len(),
                q.field().size()
            )));
        }
        let eps = noise_pmfs.iter().map(Pmf::prob_nonzero).collect();
        let entropies = noise_pmfs.iter().map(Pmf::entropy_bits).collect();
        Ok(Self {
            q,
            noise_pmfs,
            eps,
            entropies,
        })
    }

    /// A finite channel with p-ary symmetric noise of the given crossover
    /// probabilities, one per antenna.
    pub fn symmetric(q: GfMatrix, eps: &[f64]) -> Result<Self> {
        let p = q.field().p();
        let pmfs = eps
            .iter()
            .map(|&e| Pmf::symmetric(p, e))
            .collect::<Result<Vec<_>>>()?;
        Self::from_parts(q, pmfs)
    }

    pub fn field(&self) -> PrimeField {
        self.q.field()
    }

    pub fn q(&self) -> &GfMatrix {
        &self.q
    }

    pub fn n_r(&self) -> usize {
        self.q.rows()
    }

    pub fn n_t(&self) -> usize {
        self.q.cols()
    }

    pub fn noise_pmfs(&self) -> &[Pmf] {
        &self.noise_pmfs
    }

    pub fn noise_pmf(&self, antenna: usize) -> &Pmf {
        &self.noise_pmfs[antenna]
    }

    /// Per-antenna probability that the noise symbol is nonzero.
    pub fn eps(&self) -> &[f64] {
        &self.eps
    }

    /// Per-antenna noise entropies in bits.
    pub fn entropies(&self) -> &[f64] {
        &self.entropies
    }
}

/// Result of transforming a real channel: the chosen coefficients, the
/// finite-field channel, and how each noise marginal was computed.
#[derive(Debug, Clone)]
pub struct ChannelTransform {
    pub coeffs: IntegerCoeffMatrix,
    pub channel: FiniteChannel,
    pub pmf_methods: Vec<PmfMethod>,
}

/// Full transform: choose coefficients (guaranteeing a full-rank residue),
/// then compute every antenna's effective noise law.
pub fn transform(ch: &RealChannel) -> Result<ChannelTransform> {
    let coeffs = choose_coeffs(ch)?;
    let params = ch.lattice();
    let mut pmfs = Vec::with_capacity(ch.n_r());
    let mut methods = Vec::with_capacity(ch.n_r());
    for m in 0..ch.n_r() {
        let (pmf, method) = effective_noise_pmf(ch.h.row(m), coeffs.row(m), &params)?;
        pmfs.push(pmf);
        methods.push(method);
    }
    let q = coeffs.residue(ch.field);
    Ok(ChannelTransform {
        coeffs,
        channel: FiniteChannel::from_parts(q, pmfs)?,
        pmf_methods: methods,
    })
}

/// One pass through the physical receive path with explicit noise:
/// modulate, mix through H, add `z`, sawtooth-quantize, demodulate.
pub fn receive_given_noise(ch: &RealChannel, c: &[Gf], z: &[f64]) -> Vec<Gf> {
    assert_eq!(c.len(), ch.n_t(), "message length mismatch");
    assert_eq!(z.len(), ch.n_r(), "noise length mismatch");
    let params = ch.lattice();
    let x: Vec<f64> = c.iter().map(|&u| modulate(u, &params)).collect();
    (0..ch.n_r())
        .map(|m| {
            let mix: f64 =
                ch.h.row(m)
                    .iter()
                    .zip(x.iter())
                    .map(|(&h, &xi)| h * xi)
                    .sum();
            let quantized = sawtooth(mix + z[m], &params);
            demodulate(quantized, &params).expect("sawtooth output lies on the lattice")
        })
        .collect()
}

/// [`receive_given_noise`] with noise drawn from the given generator.
pub fn receive_with_rng<R: Rng + ?Sized>(ch: &RealChannel, c: &[Gf], rng: &mut R) -> Vec<Gf> {
    let z: Vec<f64> = (0..ch.n_r()).map(|_| rng.sample(StandardNormal)).collect();
    receive_given_noise(ch, c, &z)
}

/// One seeded draw through the receive path.
pub fn simulate_receive(ch: &RealChannel, c: &[Gf], seed: u64) -> Vec<Gf> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    receive_with_rng(ch, c, &mut rng)
}
