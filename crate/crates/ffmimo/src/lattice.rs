//! One-dimensional nested-lattice modulation and the sawtooth quantizer.
//!
//! The coarse lattice κZ carries the constellation; the shaping lattice κpZ
//! folds it. The constellation T is the set of p coarse-lattice points inside
//! one shaping cell, and the sawtooth transfer function rounds to the coarse
//! lattice and then folds back into that cell, so every received value lands
//! on T regardless of how far the channel drove it.
//!
//! Conventions, fixed once here and relied on everywhere else:
//! - rounding to κZ sends ties upward: `Q(y) = κ·⌊y/κ + 1/2⌋`;
//! - folding mod κpZ sends ties downward, keeping `+κp/2` and mapping
//!   `−κp/2` to `+κp/2`. This keeps the binary constellation at `{0, κ}`
//!   (positive representative) while odd p gets the symmetric set
//!   `κ·{−(p−1)/2, …, (p−1)/2}`. The two tie rules differ only on a
//!   measure-zero set and never interact for odd p.

use crate::error::{Error, Result};
use crate::gf::{Gf, PrimeField};

/// Tolerance when snapping a claimed constellation point to the lattice.
pub const DEMOD_TOL: f64 = 1e-9;

/// Scale and modulus of a nested pair κZ ⊃ κpZ, sized so that a uniform
/// constellation symbol has unit average energy times the target SNR
/// against the unit-variance channel noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeParams {
    field: PrimeField,
    snr: f64,
    kappa: f64,
}

impl LatticeParams {
    /// Builds the parameter set for field size p and (linear) SNR.
    pub fn new(field: PrimeField, snr: f64) -> Result<Self> {
        let kappa = kappa_of(field, snr)?;
        Ok(Self { field, snr, kappa })
    }

    pub fn field(self) -> PrimeField {
        self.field
    }

    pub fn snr(self) -> f64 {
        self.snr
    }

    /// The coarse-lattice scale κ.
    pub fn kappa(self) -> f64 {
        self.kappa
    }

    /// The shaping-lattice period κp.
    pub fn period(self) -> f64 {
        self.kappa * self.field.p() as f64
    }

    /// The constellation T: the image of all field elements under
    /// [`modulate`], in field-element order.
    pub fn constellation(self) -> Vec<f64> {
        self.field.elems().map(|u| modulate(u, &self)).collect()
    }
}

/// The coarse-lattice scale κ giving average symbol energy `snr`:
/// `√(2·snr)` for p = 2 (constellation {0, κ}), `√(12·snr)/p` for odd p
/// (κ-spaced symmetric constellation).
pub fn kappa_of(field: PrimeField, snr: f64) -> Result<f64> {
    if !snr.is_finite() || snr <= 0.0 {
        return Err(Error::SnrOutOfRange(snr));
    }
    let p = field.p() as f64;
    Ok(if field.p() == 2 {
        (2.0 * snr).sqrt()
    } else {
        (12.0 * snr).sqrt() / p
    })
}

/// Rounds to the coarse lattice: the integer k with `y ∈ κ·[k−1/2, k+1/2)`.
fn coarse_index(y: f64, kappa: f64) -> i64 {
    (y / kappa + 0.5).floor() as i64
}

/// Centers an integer modulo p with downward tie: the representative of
/// `k + pZ` in `(−p/2, p/2]`. Exact integer arithmetic.
fn center_mod(k: i64, p: i64) -> i64 {
    // ceil(k/p − 1/2) computed as floor((2k + p − 1) / (2p)).
    let shift = (2 * k + p - 1).div_euclid(2 * p);
    k - p * shift
}

/// The sawtooth transfer function: round to κZ, fold into one shaping cell.
/// Total on R; the image is exactly the constellation T.
pub fn sawtooth(y: f64, params: &LatticeParams) -> f64 {
    let k = coarse_index(y, params.kappa);
    params.kappa * center_mod(k, params.field.p() as i64) as f64
}

/// Maps a field element to its constellation point: κ·u folded into the
/// shaping cell.
pub fn modulate(u: Gf, params: &LatticeParams) -> f64 {
    assert_eq!(
        u.modulus(),
        params.field.p(),
        "element does not belong to the modulation field"
    );
    params.kappa * center_mod(u.value() as i64, params.field.p() as i64) as f64
}

/// Inverse of [`modulate`], extended to all of κZ by reduction mod p.
/// Values farther than [`DEMOD_TOL`] from the lattice are rejected.
pub fn demodulate(v: f64, params: &LatticeParams) -> Result<Gf> {
    let ratio = v / params.kappa;
    let k = ratio.round();
    if (v - params.kappa * k).abs() > DEMOD_TOL {
        return Err(Error::NotAConstellationPoint {
            value: v,
            tol: DEMOD_TOL,
        });
    }
    Ok(params.field.elem(k as i64))
}
