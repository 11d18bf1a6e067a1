//! Built-in experiment sweeps and the per-channel scheme dispatcher.
//!
//! Each preset produces a [`Dataset`] whose bytes depend only on the master
//! seed, the trial count, and the preset itself — never on thread count or
//! timing. Randomized presets derive every random stream from the master
//! seed with fixed tags, and ensemble members are evaluated in parallel but
//! aggregated in index order.

use rand::Rng;
use rayon::prelude::*;

use ffmimo::{
    best_linear_combiner, draw_random_q, mimo_sum_capacity, min_distance, mix_seed,
    rate_antenna_selection, rate_elbc, rate_lbc, rate_repetition, rate_repetition_vec, rate_sc,
    rate_zf, simo_capacity, simo_capacity_joint, stream_rng, Error, FiniteChannel, Gf, GfMatrix,
    PrimeField, RateMeta, Result, Scheme, SchemeRate,
};

use crate::config::CustomFigureConfig;
use crate::csvout::{Dataset, Row};

/// Default Monte Carlo trials per ensemble member.
pub const DEFAULT_TRIALS: u64 = 10_000;

/// Ensemble size of the minimum-distance-conditioned sweep.
pub const FIG6_ENSEMBLE: usize = 200;
/// Ensemble size of the antenna-count sweep.
pub const FIG7_ENSEMBLE: usize = 100;
/// Rejection-sampling budget per conditioned ensemble class.
pub const FIG6_DRAW_CAP: u64 = 1_000_000;

// Substream tags: every random stream a preset uses is derived from the
// master seed and one of these, so streams never collide.
const TAG_EPS: u64 = 0xE95;
const TAG_Q: u64 = 0x09_0000;
const TAG_LBC: u64 = 0x1BC;

/// The built-in sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigureId {
    /// p=2, one stream, two antennas: selection vs. all-antenna combining
    /// vs. capacity over a symmetric-noise sweep.
    Fig3,
    /// p=2, ε=0.15: repetition vs. selection vs. capacity over odd antenna
    /// counts.
    Fig4,
    /// Repetition over a noise sweep for p ∈ {2,3,5,7}, seven antennas.
    Fig5,
    /// p=5, two streams, five antennas: ensembles of random channel
    /// matrices conditioned on minimum distance 1..4.
    Fig6,
    /// p=2, six streams: ensembles of random fat channel matrices over
    /// growing antenna counts.
    Fig7,
}

impl FigureId {
    pub fn name(&self) -> &'static str {
        match self {
            FigureId::Fig3 => "fig3",
            FigureId::Fig4 => "fig4",
            FigureId::Fig5 => "fig5",
            FigureId::Fig6 => "fig6",
            FigureId::Fig7 => "fig7",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "3" | "fig3" => FigureId::Fig3,
            "4" | "fig4" => FigureId::Fig4,
            "5" | "fig5" => FigureId::Fig5,
            "6" | "fig6" => FigureId::Fig6,
            "7" | "fig7" => FigureId::Fig7,
            other => {
                return Err(Error::Unsupported(format!(
                    "unknown figure `{other}` (expected fig3, fig4, fig5, fig6, or fig7)"
                )))
            }
        })
    }
}

/// A preset plus the knobs shared by all of them.
#[derive(Debug, Clone, Copy)]
pub struct FigureRequest {
    pub id: FigureId,
    /// Monte Carlo trials per ensemble member; 0 keeps analytic rows only.
    pub trials: u64,
    pub seed: u64,
}

pub fn run_figure(req: &FigureRequest) -> Result<Dataset> {
    match req.id {
        FigureId::Fig3 => fig3(req.seed),
        FigureId::Fig4 => fig4(req.seed),
        FigureId::Fig5 => fig5(req.seed),
        FigureId::Fig6 => fig6(req.seed, req.trials),
        FigureId::Fig7 => fig7(req.seed, req.trials),
    }
}

/// A single transmit stream observed by `n_r` unit-gain antennas with
/// p-ary symmetric noise — the channel behind every analytic sweep.
pub fn simo_unit_channel(field: PrimeField, n_r: usize, eps: f64) -> Result<FiniteChannel> {
    let q = GfMatrix::from_flat(field, n_r, 1, &vec![1; n_r]);
    FiniteChannel::symmetric(q, &vec![eps; n_r])
}

/// Rate of the fixed combiner that sums every antenna: the combined
/// observation sees the convolution of all antenna noise laws.
fn all_antenna_combiner_bits(fc: &FiniteChannel) -> f64 {
    let mut acc = fc.noise_pmf(0).clone();
    for m in 1..fc.n_r() {
        acc = acc.convolve(fc.noise_pmf(m));
    }
    fc.field().bits() - acc.entropy_bits()
}

fn analytic_row(figure: &str, fc_shape: (u64, usize, usize), eps_spec: &str, seed: u64) -> Row {
    Row {
        figure: figure.into(),
        p: fc_shape.0,
        n_t: fc_shape.1,
        n_r: fc_shape.2,
        eps_spec: eps_spec.into(),
        snr: None,
        scheme: String::new(),
        rate_bits: None,
        pe: None,
        d_min: None,
        trials: 0,
        stderr: None,
        seed,
    }
}

fn fig3(seed: u64) -> Result<Dataset> {
    let field = PrimeField::new(2)?;
    let mut ds = Dataset::default();
    ds.push_comment("fig3: one binary stream, two unit-gain antennas, symmetric noise sweep");
    ds.push_comment(
        "anse selects the better antenna; lincomb sums both antennas before deciding; \
         capacity decodes the joint observation",
    );
    for k in 1..=19u32 {
        let eps = f64::from(k) / 40.0;
        let spec = format!("{eps}");
        let fc = simo_unit_channel(field, 2, eps)?;

        let anse = rate_antenna_selection(&fc)?;
        let mut row = analytic_row("fig3", (2, 1, 2), &spec, seed);
        row.scheme = Scheme::AntennaSelection.to_string();
        row.rate_bits = Some(anse.bits);
        ds.rows.push(row);

        let mut row = analytic_row("fig3", (2, 1, 2), &spec, seed);
        row.scheme = Scheme::BestCombiner.to_string();
        row.rate_bits = Some(all_antenna_combiner_bits(&fc));
        ds.rows.push(row);

        let mut row = analytic_row("fig3", (2, 1, 2), &spec, seed);
        row.scheme = Scheme::Capacity.to_string();
        row.rate_bits = Some(simo_capacity(eps, 2));
        ds.rows.push(row);
    }
    Ok(ds)
}

fn fig4(seed: u64) -> Result<Dataset> {
    let field = PrimeField::new(2)?;
    let eps = 0.15;
    let spec = format!("{eps}");
    let mut ds = Dataset::default();
    ds.push_comment("fig4: one binary stream, eps=0.15, odd antenna counts 1..15");
    ds.push_comment("repetition with plurality detection vs. selection and capacity");
    for n_r in (1..=15).step_by(2) {
        let fc = simo_unit_channel(field, n_r, eps)?;

        let anse = rate_antenna_selection(&fc)?;
        let mut row = analytic_row("fig4", (2, 1, n_r), &spec, seed);
        row.scheme = Scheme::AntennaSelection.to_string();
        row.rate_bits = Some(anse.bits);
        ds.rows.push(row);

        let rep = rate_repetition(field, n_r, eps);
        let mut row = analytic_row("fig4", (2, 1, n_r), &spec, seed);
        row.scheme = Scheme::Repetition.to_string();
        row.rate_bits = Some(rep.bits);
        row.pe = rep.meta.pe;
        ds.rows.push(row);

        let mut row = analytic_row("fig4", (2, 1, n_r), &spec, seed);
        row.scheme = Scheme::Capacity.to_string();
        row.rate_bits = Some(simo_capacity(eps, n_r));
        ds.rows.push(row);
    }
    Ok(ds)
}

fn fig5(seed: u64) -> Result<Dataset> {
    let mut ds = Dataset::default();
    ds.push_comment("fig5: repetition over seven antennas for p in {2,3,5,7}, noise sweep");
    for p in [2u64, 3, 5, 7] {
        let field = PrimeField::new(p)?;
        for k in 1..=19u32 {
            let eps = f64::from(k) / 40.0;
            let rep = rate_repetition(field, 7, eps);
            let mut row = analytic_row("fig5", (p, 1, 7), &format!("{eps}"), seed);
            row.scheme = Scheme::Repetition.to_string();
            row.rate_bits = Some(rep.bits);
            row.pe = rep.meta.pe;
            ds.rows.push(row);
        }
    }
    Ok(ds)
}

/// Mean and standard error of the mean.
fn mean_sem(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Per-member rates of one ensemble entry.
struct MemberRates {
    anse: f64,
    lbc: Option<f64>,
    elbc: f64,
    elbc_pe: f64,
    d_min: usize,
}

fn member_rates(q: GfMatrix, eps: &[f64], trials: u64, lbc_seed: u64) -> Result<MemberRates> {
    let d_min = min_distance(&q)?;
    let fc = FiniteChannel::symmetric(q, eps)?;
    let anse = rate_antenna_selection(&fc)?.bits;
    let elbc = rate_elbc(&fc)?;
    let lbc = if trials > 0 {
        Some(rate_lbc(&fc, trials, lbc_seed)?.bits)
    } else {
        None
    };
    Ok(MemberRates {
        anse,
        lbc,
        elbc: elbc.bits,
        elbc_pe: elbc.meta.pe.expect("distance-bound rate always reports pe"),
        d_min,
    })
}

/// Pushes the three ensemble rows (selection, simulated code, distance
/// bound) aggregated over `members`.
fn push_ensemble_rows(
    ds: &mut Dataset,
    figure: &str,
    shape: (u64, usize, usize),
    eps_spec: &str,
    d_min_cell: f64,
    members: &[MemberRates],
    trials: u64,
    seed: u64,
) {
    let base = |ds_scheme: Scheme| {
        let mut row = analytic_row(figure, shape, eps_spec, seed);
        row.scheme = ds_scheme.to_string();
        row.d_min = Some(d_min_cell);
        row
    };

    let (anse_mean, anse_sem) = mean_sem(&members.iter().map(|m| m.anse).collect::<Vec<_>>());
    let mut row = base(Scheme::AntennaSelection);
    row.rate_bits = Some(anse_mean);
    row.stderr = Some(anse_sem);
    ds.rows.push(row);

    if trials > 0 {
        let lbc: Vec<f64> = members
            .iter()
            .map(|m| m.lbc.expect("simulated rate present when trials > 0"))
            .collect();
        let (lbc_mean, lbc_sem) = mean_sem(&lbc);
        let mut row = base(Scheme::Lbc);
        row.rate_bits = Some(lbc_mean);
        row.stderr = Some(lbc_sem);
        row.trials = trials;
        ds.rows.push(row);
    }

    let (elbc_mean, elbc_sem) = mean_sem(&members.iter().map(|m| m.elbc).collect::<Vec<_>>());
    let (pe_mean, _) = mean_sem(&members.iter().map(|m| m.elbc_pe).collect::<Vec<_>>());
    let mut row = base(Scheme::Elbc);
    row.rate_bits = Some(elbc_mean);
    row.pe = Some(pe_mean);
    row.stderr = Some(elbc_sem);
    ds.rows.push(row);
}

fn fig6(seed: u64, trials: u64) -> Result<Dataset> {
    let field = PrimeField::new(5)?;
    let (n_r, n_t) = (5usize, 2usize);
    let eps_spec = "U[0.05,0.15)";
    let mut ds = Dataset::default();
    ds.push_comment(
        "fig6: two streams over Z5, five antennas; random channel matrices conditioned \
         on code minimum distance 1..4, 200 matrices per class",
    );
    ds.push_comment(
        "per-antenna eps drawn once per ensemble slot from U[0.05,0.15) and shared \
         across distance classes (common random numbers)",
    );
    if trials == 0 {
        ds.push_comment("trials=0: simulated rows omitted");
    }

    // Noise draws are indexed by ensemble slot only, never by class.
    let eps_master = mix_seed(seed, TAG_EPS);
    let eps_draws: Vec<Vec<f64>> = (0..FIG6_ENSEMBLE)
        .map(|j| {
            let mut rng = stream_rng(eps_master, j as u64);
            (0..n_r).map(|_| 0.05 + 0.1 * rng.gen::<f64>()).collect()
        })
        .collect();
    let lbc_master = mix_seed(seed, TAG_LBC);

    for class in 1..=4usize {
        // Sequential rejection keeps the accepted set independent of how
        // the rate evaluations are later parallelized.
        let mut rng = stream_rng(mix_seed(seed, TAG_Q + class as u64), 0);
        let mut qs: Vec<GfMatrix> = Vec::with_capacity(FIG6_ENSEMBLE);
        let mut draws = 0u64;
        while qs.len() < FIG6_ENSEMBLE && draws < FIG6_DRAW_CAP {
            draws += 1;
            let q = draw_random_q(field, n_r, n_t, false, &mut rng)?;
            if min_distance(&q)? == class {
                qs.push(q);
            }
        }
        ds.push_comment(format!(
            "fig6 class d_min={class}: accepted {}/{FIG6_ENSEMBLE} matrices in {draws} draws",
            qs.len()
        ));
        if qs.len() < FIG6_ENSEMBLE {
            ds.push_comment(format!(
                "fig6 class d_min={class}: ensemble incomplete, rate cells left empty"
            ));
            for scheme in [Scheme::AntennaSelection, Scheme::Lbc, Scheme::Elbc] {
                let mut row = analytic_row("fig6", (5, n_t, n_r), eps_spec, seed);
                row.scheme = scheme.to_string();
                row.d_min = Some(class as f64);
                ds.rows.push(row);
            }
            continue;
        }

        let members: Vec<MemberRates> = qs
            .into_par_iter()
            .enumerate()
            .map(|(j, q)| {
                let lbc_seed = mix_seed(lbc_master, ((class as u64) << 32) | j as u64);
                member_rates(q, &eps_draws[j], trials, lbc_seed)
            })
            .collect::<Result<_>>()?;
        push_ensemble_rows(
            &mut ds,
            "fig6",
            (5, n_t, n_r),
            eps_spec,
            class as f64,
            &members,
            trials,
            seed,
        );
    }
    Ok(ds)
}

const FIG7_ANTENNAS: [usize; 7] = [16, 20, 24, 28, 32, 36, 40];

fn fig7(seed: u64, trials: u64) -> Result<Dataset> {
    let field = PrimeField::new(2)?;
    let n_t = 6usize;
    let eps_spec = "U[0.05,0.15)";
    let max_nr = *FIG7_ANTENNAS.last().expect("antenna grid is nonempty");
    let mut ds = Dataset::default();
    ds.push_comment(
        "fig7: six binary streams; full-column-rank random channel matrices over \
         growing antenna counts, 100 matrices per count",
    );
    ds.push_comment(
        "per-antenna eps drawn once per ensemble slot from U[0.05,0.15); smaller \
         antenna counts reuse prefixes of the same draws (common random numbers)",
    );
    if trials == 0 {
        ds.push_comment("trials=0: simulated rows omitted");
    }

    let eps_master = mix_seed(seed, TAG_EPS);
    let eps_draws: Vec<Vec<f64>> = (0..FIG7_ENSEMBLE)
        .map(|j| {
            let mut rng = stream_rng(eps_master, j as u64);
            (0..max_nr).map(|_| 0.05 + 0.1 * rng.gen::<f64>()).collect()
        })
        .collect();
    let lbc_master = mix_seed(seed, TAG_LBC);

    for (ci, &n_r) in FIG7_ANTENNAS.iter().enumerate() {
        let q_master = mix_seed(seed, TAG_Q + 0x100 + ci as u64);
        let members: Vec<MemberRates> = (0..FIG7_ENSEMBLE)
            .into_par_iter()
            .map(|j| {
                let mut rng = stream_rng(q_master, j as u64);
                let q = draw_random_q(field, n_r, n_t, true, &mut rng)?;
                let lbc_seed = mix_seed(lbc_master, ((ci as u64) << 32) | j as u64);
                member_rates(q, &eps_draws[j][..n_r], trials, lbc_seed)
            })
            .collect::<Result<_>>()?;
        let (d_mean, _) = mean_sem(&members.iter().map(|m| m.d_min as f64).collect::<Vec<_>>());
        ds.push_comment(format!(
            "fig7 n_r={n_r}: {FIG7_ENSEMBLE} matrices, mean d_min {d_mean}"
        ));
        push_ensemble_rows(
            &mut ds,
            "fig7",
            (2, n_t, n_r),
            eps_spec,
            d_mean,
            &members,
            trials,
            seed,
        );
    }
    Ok(ds)
}

/// Runs a custom analytic sweep: unit-gain single-stream channels over the
/// configured antenna counts and symmetric noise levels.
pub fn run_custom(cfg: &CustomFigureConfig, seed: u64) -> Result<Dataset> {
    let field = PrimeField::new(cfg.p)?;
    let schemes: Vec<Scheme> = cfg
        .schemes
        .iter()
        .map(|s| s.parse::<Scheme>())
        .collect::<Result<_>>()?;
    for s in &schemes {
        match s {
            Scheme::AntennaSelection
            | Scheme::Repetition
            | Scheme::Capacity
            | Scheme::BestCombiner => {}
            other => {
                return Err(Error::Unsupported(format!(
                    "custom sweeps support anse, rep, capacity, and lincomb; `{other}` \
                     needs a concrete channel (see the `rate` command)"
                )))
            }
        }
    }

    let mut ds = Dataset::default();
    ds.push_comment(format!(
        "{}: one stream over Z{}, unit-gain antennas, symmetric noise sweep",
        cfg.name, cfg.p
    ));
    for &n_r in &cfg.n_r {
        if n_r == 0 {
            return Err(Error::Unsupported("antenna counts must be positive".into()));
        }
        for &eps in &cfg.eps {
            let fc = simo_unit_channel(field, n_r, eps)?;
            let spec = format!("{eps}");
            for &scheme in &schemes {
                let mut row = analytic_row(&cfg.name, (cfg.p, 1, n_r), &spec, seed);
                row.scheme = scheme.to_string();
                match scheme {
                    Scheme::AntennaSelection => {
                        row.rate_bits = Some(rate_antenna_selection(&fc)?.bits);
                    }
                    Scheme::Repetition => {
                        let rep = rate_repetition(field, n_r, eps);
                        row.rate_bits = Some(rep.bits);
                        row.pe = rep.meta.pe;
                    }
                    Scheme::Capacity => {
                        let bits = if field.p() == 2 {
                            simo_capacity(eps, n_r)
                        } else {
                            let gains: Vec<Gf> = (0..n_r).map(|m| fc.q().get(m, 0)).collect();
                            simo_capacity_joint(fc.noise_pmfs(), &gains)?
                        };
                        row.rate_bits = Some(bits);
                    }
                    Scheme::BestCombiner => {
                        row.rate_bits = Some(all_antenna_combiner_bits(&fc));
                    }
                    _ => unreachable!("validated above"),
                }
                ds.rows.push(row);
            }
        }
    }
    Ok(ds)
}

/// Evaluates one scheme on a concrete finite channel, for the `rate`
/// command. `trials` and `seed` only matter for the simulated code rate.
pub fn scheme_rate(
    fc: &FiniteChannel,
    scheme: Scheme,
    trials: u64,
    seed: u64,
) -> Result<SchemeRate> {
    match scheme {
        Scheme::AntennaSelection => rate_antenna_selection(fc),
        Scheme::Repetition => {
            if fc.n_t() != 1 {
                return Err(Error::Unsupported(
                    "repetition reporting needs a single transmit stream".into(),
                ));
            }
            if (0..fc.n_r()).any(|m| fc.q().get(m, 0).is_zero()) {
                return Err(Error::Unsupported(
                    "repetition needs every antenna gain nonzero".into(),
                ));
            }
            Ok(rate_repetition_vec(fc.field(), fc.eps()))
        }
        Scheme::SuccessiveCancellation => rate_sc(fc),
        Scheme::ZeroForcing => rate_zf(fc),
        Scheme::Lbc => rate_lbc(fc, trials, seed),
        Scheme::Elbc => rate_elbc(fc),
        Scheme::Capacity => {
            if fc.n_t() == 1 {
                let gains: Vec<Gf> = (0..fc.n_r()).map(|m| fc.q().get(m, 0)).collect();
                let bits = simo_capacity_joint(fc.noise_pmfs(), &gains)?;
                Ok(SchemeRate {
                    scheme: Scheme::Capacity,
                    bits,
                    meta: RateMeta::default(),
                })
            } else if fc.n_r() == fc.n_t() {
                Ok(mimo_sum_capacity(fc, true))
            } else {
                Err(Error::Unsupported(
                    "capacity reporting needs a single stream or a square channel".into(),
                ))
            }
        }
        Scheme::BestCombiner => best_linear_combiner(fc).map(|(_, r)| r),
    }
}
