//! Monte Carlo simulation of the end-to-end detectors.
//!
//! Trials are generated in fixed-size batches, one counter-derived RNG
//! stream per batch, and merged as integer counts. The result therefore
//! depends only on the seed and the trial count — never on how many
//! threads the batches happened to run on.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channel::{receive_with_rng, transform, FiniteChannel, RealChannel};
use crate::codes::{plurality_decode, CodebookView, ScOrdering};
use crate::error::{Error, Result};
use crate::gf::{Gf, GfMatrix, PrimeField};

/// Trials per RNG stream. Each batch draws from its own counter-indexed
/// stream, so the partition into batches is part of the result contract.
pub const BATCH: u64 = 1024;

/// Rejection budget for conditioned random-matrix draws.
pub const REJECTION_CAP: u64 = 10_000;

/// A ChaCha stream keyed by (master seed, stream index). Streams with the
/// same master and different indices are independent for all practical
/// purposes.
pub fn stream_rng(master: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(stream);
    rng
}

/// Mixes two 64-bit values into a fresh seed (splitmix finalizer).
pub fn mix_seed(a: u64, b: u64) -> u64 {
    let mut x = a ^ b.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// How per-antenna error probabilities are produced for random ensembles.
#[derive(Debug, Clone)]
pub enum EpsModel {
    /// One value per antenna, or a single value broadcast to all of them.
    Fixed(Vec<f64>),
    /// Independent uniform draws from [lo, hi) per antenna per channel.
    Uniform { lo: f64, hi: f64 },
}

impl EpsModel {
    fn validate(&self, n_r: usize) -> Result<()> {
        match self {
            EpsModel::Fixed(v) => {
                if v.is_empty() || (v.len() != 1 && v.len() != n_r) {
                    return Err(Error::Unsupported(format!(
                        "expected 1 or {n_r} error probabilities, got {}",
                        v.len()
                    )));
                }
                for &e in v {
                    if !(0.0..=1.0).contains(&e) {
                        return Err(Error::InvalidPmf(format!(
                            "error probability {e} outside [0, 1]"
                        )));
                    }
                }
            }
            EpsModel::Uniform { lo, hi } => {
                if !(0.0..=1.0).contains(lo) || !(0.0..=1.0).contains(hi) || lo > hi {
                    return Err(Error::InvalidPmf(format!(
                        "invalid error-probability range [{lo}, {hi})"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Draws one error-probability vector for `n_r` antennas.
    pub fn draw<R: Rng + ?Sized>(&self, n_r: usize, rng: &mut R) -> Vec<f64> {
        match self {
            EpsModel::Fixed(v) if v.len() == 1 => vec![v[0]; n_r],
            EpsModel::Fixed(v) => {
                assert_eq!(v.len(), n_r, "validated at configuration time");
                v.clone()
            }
            EpsModel::Uniform { lo, hi } => (0..n_r)
                .map(|_| lo + (hi - lo) * rng.gen::<f64>())
                .collect(),
        }
    }
}

/// What the simulated trials run through.
#[derive(Debug, Clone)]
pub enum ChannelModel {
    /// A fixed finite-field channel: noise drawn from its per-antenna laws.
    Finite(FiniteChannel),
    /// A fixed real channel: trials run through the full modulate /
    /// Gaussian noise / fold / demodulate pipeline, decoded against the
    /// derived finite channel.
    Real(RealChannel),
    /// A fresh uniform channel matrix (and error-probability vector) per
    /// trial, with symmetric per-antenna noise.
    RandomQ {
        field: PrimeField,
        n_r: usize,
        n_t: usize,
        eps: EpsModel,
        require_full_rank: bool,
    },
}

/// Which detector the trials exercise.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum McScheme {
    /// Gain-equalized plurality vote (single stream).
    Plurality,
    /// Minimum-distance decoding of the code generated by Q.
    MinDistance,
    /// Zero-forcing inversion followed by symbol-wise decisions.
    ZeroForcing,
    /// Successive cancellation with the true noise supplied per stage —
    /// an algebra check that must never err on invertible channels.
    ScGenie,
}

#[derive(Debug, Clone)]
pub struct McConfig {
    pub scheme: McScheme,
    pub channel: ChannelModel,
    pub trials: u64,
    pub seed: u64,
}

/// Empirical error rates with binomial standard errors.
#[derive(Debug, Clone)]
pub struct McResult {
    /// Symbol error rate per transmit stream.
    pub per_stream: Vec<f64>,
    pub per_stream_stderr: Vec<f64>,
    /// Probability that at least one stream symbol was wrong.
    pub block_error: f64,
    pub block_stderr: f64,
    pub trials: u64,
    pub seed: u64,
    pub elapsed: Duration,
}

enum Detector {
    Plurality { gains: Vec<Gf> },
    MinDistance { book: CodebookView },
    ZeroForcing { qinv: GfMatrix },
    ScGenie { ordering: ScOrdering },
}

fn build_detector(fc: &FiniteChannel, scheme: McScheme) -> Result<Detector> {
    match scheme {
        McScheme::Plurality => {
            if fc.n_t() != 1 {
                return Err(Error::Unsupported(format!(
                    "plurality detection is a single-stream scheme, got {} streams",
                    fc.n_t()
                )));
            }
            let gains: Vec<Gf> = (0..fc.n_r()).map(|m| fc.q().get(m, 0)).collect();
            if gains.iter().any(|g| g.is_zero()) {
                return Err(Error::Unsupported(
                    "plurality detection needs every antenna gain nonzero".into(),
                ));
            }
            Ok(Detector::Plurality { gains })
        }
        McScheme::MinDistance => {
            let book = CodebookView::new(fc.q().clone())?;
            if book.d_min() == 0 {
                return Err(Error::RankDeficient {
                    rank: fc.q().rank(),
                    need: fc.n_t(),
                });
            }
            Ok(Detector::MinDistance { book })
        }
        McScheme::ZeroForcing => {
            if fc.n_r() != fc.n_t() {
                return Err(Error::Unsupported(format!(
                    "zero forcing needs a square channel matrix, got {}x{}",
                    fc.n_r(),
                    fc.n_t()
                )));
            }
            Ok(Detector::ZeroForcing {
                qinv: fc.q().inverse()?,
            })
        }
        McScheme::ScGenie => Ok(Detector::ScGenie {
            ordering: ScOrdering::new(fc)?,
        }),
    }
}

impl Detector {
    fn detect(&self, u: &[Gf], noise: &[Gf]) -> Vec<Gf> {
        match self {
            Detector::Plurality { gains } => {
                vec![plurality_decode(u, gains).expect("gains checked at build time")]
            }
            Detector::MinDistance { book } => book.md_decode(u),
            Detector::ZeroForcing { qinv } => qinv.mul_vec(u),
            Detector::ScGenie { ordering } => ordering.recover(u, noise),
        }
    }
}

/// Draws a uniform channel matrix, optionally conditioned on full column
/// rank by rejection (budget [`REJECTION_CAP`]).
pub fn draw_random_q<R: Rng + ?Sized>(
    field: PrimeField,
    n_r: usize,
    n_t: usize,
    require_full_rank: bool,
    rng: &mut R,
) -> Result<GfMatrix> {
    assert!(n_r > 0 && n_t > 0, "empty channel");
    let p = field.size() as i64;
    let mut attempts = 0u64;
    loop {
        attempts += 1;
        let vals: Vec<i64> = (0..n_r * n_t).map(|_| rng.gen_range(0..p)).collect();
        let q = GfMatrix::from_flat(field, n_r, n_t, &vals);
        if !require_full_rank || q.rank() == n_t {
            return Ok(q);
        }
        if attempts >= REJECTION_CAP {
            return Err(Error::RejectionExhausted { attempts });
        }
    }
}

/// One transmission over a fixed finite channel. Returns the message, the
/// output, and the drawn noise.
fn finite_trial<R: Rng + ?Sized>(fc: &FiniteChannel, rng: &mut R) -> (Vec<Gf>, Vec<Gf>, Vec<Gf>) {
    let field = fc.field();
    let p = field.size() as i64;
    let c: Vec<Gf> = (0..fc.n_t())
        .map(|_| field.elem(rng.gen_range(0..p)))
        .collect();
    let mut noise = Vec::with_capacity(fc.n_r());
    let mut u = fc.q().mul_vec(&c);
    for (m, s) in u.iter_mut().enumerate() {
        let z = field.elem(fc.noise_pmf(m).sample(rng) as i64);
        noise.push(z);
        *s = *s + z;
    }
    (c, u, noise)
}

/// One transmission through the physical pipeline of a real channel. The
/// effective noise is recovered as u ⊖ Qc.
fn real_trial<R: Rng + ?Sized>(
    ch: &RealChannel,
    q: &GfMatrix,
    rng: &mut R,
) -> (Vec<Gf>, Vec<Gf>, Vec<Gf>) {
    let field = ch.field;
    let p = field.size() as i64;
    let c: Vec<Gf> = (0..ch.n_t())
        .map(|_| field.elem(rng.gen_range(0..p)))
        .collect();
    let u = receive_with_rng(ch, &c, rng);
    let clean = q.mul_vec(&c);
    let noise: Vec<Gf> = u.iter().zip(clean.iter()).map(|(&a, &b)| a - b).collect();
    (c, u, noise)
}

/// Runs the configured simulation and reports empirical error rates.
pub fn run(cfg: &McConfig) -> Result<McResult> {
    assert!(cfg.trials > 0, "at least one trial required");
    let start = Instant::now();

    // Validate up front so configuration errors surface before any work,
    // and precompute whatever is fixed across trials.
    enum Prepared {
        Fixed {
            fc: FiniteChannel,
            real: Option<RealChannel>,
            detector: Detector,
        },
        PerTrial {
            field: PrimeField,
            n_r: usize,
            n_t: usize,
            eps: EpsModel,
            require_full_rank: bool,
            scheme: McScheme,
        },
    }

    let prepared = match &cfg.channel {
        ChannelModel::Finite(fc) => Prepared::Fixed {
            detector: build_detector(fc, cfg.scheme)?,
            fc: fc.clone(),
            real: None,
        },
        ChannelModel::Real(ch) => {
            let tf = transform(ch)?;
            Prepared::Fixed {
                detector: build_detector(&tf.channel, cfg.scheme)?,
                fc: tf.channel,
                real: Some(ch.clone()),
            }
        }
        ChannelModel::RandomQ {
            field,
            n_r,
            n_t,
            eps,
            require_full_rank,
        } => {
            if cfg.scheme == McScheme::Plurality {
                return Err(Error::Unsupported(
                    "plurality over per-trial random channels is not defined; \
                     fix the channel instead"
                        .into(),
                ));
            }
            if matches!(cfg.scheme, McScheme::ZeroForcing | McScheme::ScGenie) {
                if n_r != n_t {
                    return Err(Error::Unsupported(format!(
                        "this scheme needs square channels, got {n_r}x{n_t}"
                    )));
                }
                if !require_full_rank {
                    return Err(Error::Unsupported(
                        "inversion-based schemes over random channels need \
                         require_full_rank"
                            .into(),
                    ));
                }
            }
            eps.validate(*n_r)?;
            Prepared::PerTrial {
                field: *field,
                n_r: *n_r,
                n_t: *n_t,
                eps: eps.clone(),
                require_full_rank: *require_full_rank,
                scheme: cfg.scheme,
            }
        }
    };

    let n_t = match &prepared {
        Prepared::Fixed { fc, .. } => match cfg.scheme {
            McScheme::Plurality => 1,
            _ => fc.n_t(),
        },
        Prepared::PerTrial { n_t, .. } => *n_t,
    };

    let batches: Vec<(u64, u64)> = {
        let mut v = Vec::new();
        let mut done = 0;
        let mut idx = 0;
        while done < cfg.trials {
            let len = BATCH.min(cfg.trials - done);
            v.push((idx, len));
            done += len;
            idx += 1;
        }
        v
    };

    let merged: Result<(Vec<u64>, u64)> = batches
        .par_iter()
        .map(|&(bidx, len)| -> Result<(Vec<u64>, u64)> {
            let mut rng = stream_rng(cfg.seed, bidx);
            let mut stream_errs = vec![0u64; n_t];
            let mut block_errs = 0u64;
            for _ in 0..len {
                let (c, decoded) = match &prepared {
                    Prepared::Fixed { fc, real, detector } => {
                        let (c, u, noise) = match real {
                            Some(ch) => real_trial(ch, fc.q(), &mut rng),
                            None => finite_trial(fc, &mut rng),
                        };
                        (c, detector.detect(&u, &noise))
                    }
                    Prepared::PerTrial {
                        field,
                        n_r,
                        n_t,
                        eps,
                        require_full_rank,
                        scheme,
                    } => {
                        let q = draw_random_q(*field, *n_r, *n_t, *require_full_rank, &mut rng)?;
                        let e = eps.draw(*n_r, &mut rng);
                        let fc = FiniteChannel::symmetric(q, &e)?;
                        let detector = build_detector(&fc, *scheme)?;
                        let (c, u, noise) = finite_trial(&fc, &mut rng);
                        (c, detector.detect(&u, &noise))
                    }
                };
                let mut any = false;
                for (i, (a, b)) in decoded.iter().zip(c.iter()).enumerate() {
                    if a != b {
                        stream_errs[i] += 1;
                        any = true;
                    }
                }
                if any {
                    block_errs += 1;
                }
            }
            Ok((stream_errs, block_errs))
        })
        .try_reduce(
            || (vec![0u64; n_t], 0u64),
            |(mut sa, ba), (sb, bb)| {
                for (a, b) in sa.iter_mut().zip(sb.iter()) {
                    *a += b;
                }
                Ok((sa, ba + bb))
            },
        );
    let (stream_errs, block_errs) = merged?;

    let t = cfg.trials as f64;
    let rate = |k: u64| k as f64 / t;
    let stderr = |k: u64| {
        let p = k as f64 / t;
        (p * (1.0 - p) / t).sqrt()
    };
    Ok(McResult {
        per_stream: stream_errs.iter().map(|&k| rate(k)).collect(),
        per_stream_stderr: stream_errs.iter().map(|&k| stderr(k)).collect(),
        block_error: rate(block_errs),
        block_stderr: stderr(block_errs),
        trials: cfg.trials,
        seed: cfg.seed,
        elapsed: start.elapsed(),
    })
}

/// Empirical pairwise dependence of the effective noise across antennas.
#[derive(Debug, Clone)]
pub struct DependenceReport {
    /// (antenna a, antenna b, plug-in mutual information in bits), for
    /// every unordered pair a < b.
    pub pairwise_mi: Vec<(usize, usize, f64)>,
    pub trials: u64,
}

/// Estimates the pairwise mutual information of the effective noise
/// symbols of a real channel by direct simulation. A large value flags
/// channels whose per-antenna noise laws must not be treated as
/// independent. Sequential and seed-deterministic.
pub fn empirical_joint_dependence(
    ch: &RealChannel,
    trials: u64,
    seed: u64,
) -> Result<DependenceReport> {
    assert!(trials > 0, "at least one trial required");
    let tf = transform(ch)?;
    let fc = &tf.channel;
    let p = fc.field().size();
    let n_r = fc.n_r();
    let pairs: Vec<(usize, usize)> = (0..n_r)
        .flat_map(|a| ((a + 1)..n_r).map(move |b| (a, b)))
        .collect();
    let mut joint = vec![vec![0u64; p * p]; pairs.len()];
    let mut marg = vec![vec![0u64; p]; n_r];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let (_, _, noise) = real_trial(ch, fc.q(), &mut rng);
        for (m, z) in noise.iter().enumerate() {
            marg[m][z.value() as usize] += 1;
        }
        for (k, &(a, b)) in pairs.iter().enumerate() {
            joint[k][noise[a].value() as usize * p + noise[b].value() as usize] += 1;
        }
    }
    let t = trials as f64;
    let mut pairwise_mi = Vec::with_capacity(pairs.len());
    for (k, &(a, b)) in pairs.iter().enumerate() {
        let mut mi = 0.0;
        for x in 0..p {
            for y in 0..p {
                let pxy = joint[k][x * p + y] as f64 / t;
                if pxy > 0.0 {
                    let px = marg[a][x] as f64 / t;
                    let py = marg[b][y] as f64 / t;
                    mi += pxy * (pxy / (px * py)).log2();
                }
            }
        }
        pairwise_mi.push((a, b, mi));
    }
    Ok(DependenceReport {
        pairwise_mi,
        trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::RealMatrix;
    use crate::rates::pe_asym;

    fn f(p: u64) -> PrimeField {
        PrimeField::new(p).unwrap()
    }

    fn symmetric_channel(q: GfMatrix, eps: &[f64]) -> FiniteChannel {
        FiniteChannel::symmetric(q, eps).unwrap()
    }

    #[test]
    fn results_are_seed_deterministic() {
        let fc = symmetric_channel(GfMatrix::identity(f(3), 2), &[0.1, 0.2]);
        let cfg = McConfig {
            scheme: McScheme::MinDistance,
            channel: ChannelModel::Finite(fc),
            trials: 2500, // deliberately not a batch multiple
            seed: 42,
        };
        let a = run(&cfg).unwrap();
        let b = run(&cfg).unwrap();
        assert_eq!(a.per_stream, b.per_stream);
        assert_eq!(a.block_error.to_bits(), b.block_error.to_bits());
        assert_eq!(a.trials, 2500);
    }

    #[test]
    fn single_trial_and_single_batch_edge_cases_run() {
        let fc = symmetric_channel(GfMatrix::identity(f(2), 1), &[0.3]);
        for trials in [1, 2, BATCH, BATCH + 1] {
            let cfg = McConfig {
                scheme: McScheme::MinDistance,
                channel: ChannelModel::Finite(fc.clone()),
                trials,
                seed: 7,
            };
            let r = run(&cfg).unwrap();
            assert_eq!(r.per_stream.len(), 1);
            assert!(r.block_error >= 0.0 && r.block_error <= 1.0);
        }
    }

    #[test]
    fn plurality_matches_the_majority_tail() {
        let eps = 0.15;
        let n_r = 3;
        let fc = symmetric_channel(
            GfMatrix::from_flat(f(2), n_r, 1, &vec![1; n_r]),
            &vec![eps; n_r],
        );
        let trials = 50_000;
        let cfg = McConfig {
            scheme: McScheme::Plurality,
            channel: ChannelModel::Finite(fc),
            trials,
            seed: 11,
        };
        let r = run(&cfg).unwrap();
        let want = pe_asym(1, &[eps; 3]); // 0.06075
        let sigma = (want * (1.0 - want) / trials as f64).sqrt();
        assert!(
            (r.block_error - want).abs() < 4.0 * sigma,
            "got {} want {want} (sigma {sigma})",
            r.block_error
        );
        assert_eq!(r.per_stream.len(), 1);
        assert_eq!(r.per_stream[0], r.block_error);
    }

    #[test]
    fn min_distance_on_the_hamming_channel_matches_the_perfect_code_tail() {
        // The [7,4] code is perfect, so block errors happen exactly when
        // two or more antennas err.
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
        let eps = 0.05;
        let fc = symmetric_channel(q, &[eps; 7]);
        let trials = 20_000;
        let cfg = McConfig {
            scheme: McScheme::MinDistance,
            channel: ChannelModel::Finite(fc),
            trials,
            seed: 3,
        };
        let r = run(&cfg).unwrap();
        let want = pe_asym(1, &[eps; 7]); // exact for a perfect code
        let sigma = (want * (1.0 - want) / trials as f64).sqrt();
        assert!(
            (r.block_error - want).abs() < 4.0 * sigma,
            "got {} want {want}",
            r.block_error
        );
    }

    #[test]
    fn zero_forcing_is_exact_without_noise() {
        let q = GfMatrix::from_rows(f(5), &[vec![1, 2], vec![3, 2]]);
        let fc = symmetric_channel(q, &[0.0, 0.0]);
        let cfg = McConfig {
            scheme: McScheme::ZeroForcing,
            channel: ChannelModel::Finite(fc),
            trials: 500,
            seed: 5,
        };
        let r = run(&cfg).unwrap();
        assert_eq!(r.block_error, 0.0);
        assert_eq!(r.per_stream, vec![0.0, 0.0]);
    }

    #[test]
    fn genie_aided_cancellation_never_errs() {
        // Heavy noise, invertible channel: the genie pipeline is algebra,
        // not estimation, so it must recover every message exactly.
        let q = GfMatrix::from_rows(f(3), &[vec![1, 2, 0], vec![0, 1, 1], vec![1, 1, 1]]);
        assert_eq!(q.rank(), 3);
        let fc = symmetric_channel(q, &[0.4, 0.5, 0.6]);
        let cfg = McConfig {
            scheme: McScheme::ScGenie,
            channel: ChannelModel::Finite(fc),
            trials: 3000,
            seed: 13,
        };
        let r = run(&cfg).unwrap();
        assert_eq!(r.block_error, 0.0);
    }

    #[test]
    fn genie_aided_cancellation_survives_the_physical_pipeline() {
        // Same algebra through modulation, Gaussian noise, and folding:
        // the recovered effective noise must be the exact discrepancy.
        let h = RealMatrix::from_rows(&[vec![1.3, 0.4], vec![-0.2, 0.9]]);
        let ch = RealChannel::new(h, 4.0, f(3)).unwrap();
        let cfg = McConfig {
            scheme: McScheme::ScGenie,
            channel: ChannelModel::Real(ch),
            trials: 2000,
            seed: 21,
        };
        let r = run(&cfg).unwrap();
        assert_eq!(r.block_error, 0.0);
    }

    #[test]
    fn real_channel_error_rate_matches_the_derived_noise_law() {
        // Scalar channel: minimum-distance detection errs exactly when the
        // effective noise is nonzero, whose probability the transform
        // computes analytically.
        let ch = RealChannel::new(RealMatrix::from_rows(&[vec![1.0]]), 6.0, f(2)).unwrap();
        let tf = transform(&ch).unwrap();
        let want = tf.channel.eps()[0];
        assert!(want > 1e-4 && want < 0.5, "useful test point, got {want}");
        let trials = 50_000;
        let cfg = McConfig {
            scheme: McScheme::MinDistance,
            channel: ChannelModel::Real(ch),
            trials,
            seed: 17,
        };
        let r = run(&cfg).unwrap();
        let sigma = (want * (1.0 - want) / trials as f64).sqrt();
        assert!(
            (r.block_error - want).abs() < 4.0 * sigma,
            "got {} want {want} (sigma {sigma})",
            r.block_error
        );
    }

    #[test]
    fn random_channel_ensembles_run_and_are_deterministic() {
        let cfg = McConfig {
            scheme: McScheme::MinDistance,
            channel: ChannelModel::RandomQ {
                field: f(2),
                n_r: 4,
                n_t: 2,
                eps: EpsModel::Fixed(vec![0.1]),
                require_full_rank: true,
            },
            trials: 2000,
            seed: 31,
        };
        let a = run(&cfg).unwrap();
        let b = run(&cfg).unwrap();
        assert_eq!(a.per_stream, b.per_stream);
        assert_eq!(a.per_stream.len(), 2);
        assert!(a.block_error > 0.0 && a.block_error < 1.0);
    }

    #[test]
    fn random_draws_respect_the_rank_condition() {
        let mut rng = stream_rng(1, 0);
        for _ in 0..100 {
            let q = draw_random_q(f(2), 4, 2, true, &mut rng).unwrap();
            assert_eq!(q.rank(), 2);
        }
        // Rank 2 out of one row is impossible: the budget must run out.
        assert!(matches!(
            draw_random_q(f(2), 1, 2, true, &mut rng),
            Err(Error::RejectionExhausted {
                attempts: REJECTION_CAP
            })
        ));
    }

    #[test]
    fn uniform_eps_draws_stay_in_range() {
        let model = EpsModel::Uniform { lo: 0.05, hi: 0.15 };
        let mut rng = stream_rng(2, 0);
        for _ in 0..50 {
            let e = model.draw(6, &mut rng);
            assert_eq!(e.len(), 6);
            assert!(e.iter().all(|&x| (0.05..0.15).contains(&x)));
        }
    }

    #[test]
    fn invalid_configurations_are_rejected_up_front() {
        let two_stream = symmetric_channel(GfMatrix::identity(f(2), 2), &[0.1, 0.1]);
        let cfg = McConfig {
            scheme: McScheme::Plurality,
            channel: ChannelModel::Finite(two_stream),
            trials: 10,
            seed: 0,
        };
        assert!(matches!(run(&cfg), Err(Error::Unsupported(_))));

        let tall = symmetric_channel(GfMatrix::from_flat(f(2), 3, 1, &[1, 1, 1]), &[0.1; 3]);
        let cfg = McConfig {
            scheme: McScheme::ZeroForcing,
            channel: ChannelModel::Finite(tall),
            trials: 10,
            seed: 0,
        };
        assert!(matches!(run(&cfg), Err(Error::Unsupported(_))));

        let cfg = McConfig {
            scheme: McScheme::Plurality,
            channel: ChannelModel::RandomQ {
                field: f(2),
                n_r: 2,
                n_t: 1,
                eps: EpsModel::Fixed(vec![0.1]),
                require_full_rank: true,
            },
            trials: 10,
            seed: 0,
        };
        assert!(matches!(run(&cfg), Err(Error::Unsupported(_))));

        let cfg = McConfig {
            scheme: McScheme::ZeroForcing,
            channel: ChannelModel::RandomQ {
                field: f(2),
                n_r: 2,
                n_t: 2,
                eps: EpsModel::Fixed(vec![0.1]),
                require_full_rank: false,
            },
            trials: 10,
            seed: 0,
        };
        assert!(matches!(run(&cfg), Err(Error::Unsupported(_))));
    }

    #[test]
    fn zero_gain_plurality_is_rejected_at_build_time() {
        let q = GfMatrix::from_flat(f(3), 3, 1, &[1, 0, 2]);
        let fc = symmetric_channel(q, &[0.1; 3]);
        let cfg = McConfig {
            scheme: McScheme::Plurality,
            channel: ChannelModel::Finite(fc),
            trials: 10,
            seed: 0,
        };
        assert!(matches!(run(&cfg), Err(Error::Unsupported(_))));
    }

    #[test]
    fn independent_antennas_show_no_noise_dependence() {
        // Diagonal channel: each antenna's effective noise is a private
        // function of its own input and its own Gaussian sample.
        let ch = RealChannel::new(RealMatrix::identity(2), 8.0, f(2)).unwrap();
        let report = empirical_joint_dependence(&ch, 20_000, 9).unwrap();
        assert_eq!(report.pairwise_mi.len(), 1);
        let (a, b, mi) = report.pairwise_mi[0];
        assert_eq!((a, b), (0, 1));
        assert!(mi.abs() < 0.01, "expected near-zero dependence, got {mi}");
    }

    #[test]
    fn shared_residuals_show_up_as_noise_dependence() {
        // Both antennas see the same stream with a half-integer mismatch
        // to the integer approximation. At high snr the outer symbols
        // shift both antennas' cells by the same deterministic amount, so
        // the effective noises co-vary strongly.
        let h = RealMatrix::from_rows(&[vec![2.5], vec![2.5]]);
        let ch = RealChannel::new(h, 100.0, f(5)).unwrap();
        let report = empirical_joint_dependence(&ch, 20_000, 10).unwrap();
        let (_, _, mi) = report.pairwise_mi[0];
        assert!(mi > 0.3, "expected strong dependence, got {mi}");
    }
}
