//! Finite-field views of Gaussian MIMO channels observed through
//! low-resolution sawtooth (modulo) quantizers, and the detection and
//! coding schemes that such channels admit.
//!
//! The pipeline: transmit symbols from Z_p are mapped to a scaled integer
//! constellation, pass through a real linear channel with Gaussian noise,
//! and each receive antenna applies a sawtooth quantizer that folds its
//! observation back onto the constellation. Choosing an integer
//! approximation A of the channel matrix turns the whole system into an
//! exact linear channel over Z_p,
//!
//! ```text
//! u = Qc ⊕ z̃,   Q = A mod p,
//! ```
//!
//! with additive discrete noise z̃ whose per-antenna laws this crate
//! computes exactly. On top of that finite channel it provides:
//!
//! * exact linear algebra over Z_p ([`gf`]),
//! * the lattice modulation/quantization maps ([`lattice`]),
//! * the real→finite channel transform with exact or sampled noise laws
//!   ([`channel`]),
//! * detectors: plurality voting, minimum-distance decoding, zero
//!   forcing, successive cancellation ([`codes`]),
//! * achievable rates of all supported schemes ([`rates`]),
//! * seed-deterministic Monte Carlo validation ([`mc`]),
//! * a plain-text channel file format ([`io`]).
//!
//! Every randomized routine takes an explicit seed and produces results
//! that are independent of thread count.

pub mod channel;
pub mod codes;
pub mod error;
pub mod gf;
pub mod io;
pub mod lattice;
pub mod mc;
pub mod pmf;
pub mod rates;

pub use channel::{
    choose_coeffs, effective_noise_pmf, realify, receive_given_noise, receive_with_rng,
    simulate_receive, transform, ChannelTransform, FiniteChannel, IntegerCoeffMatrix, PmfMethod,
    RealChannel, RealMatrix,
};
pub use codes::{
    min_distance, plurality_decode, sc_recover, zf_detect, CodebookView, PackedBinaryCodebook,
    ScOrdering,
};
pub use error::{Error, Result};
pub use gf::{greedy_row_select, index_of_vector, vector_from_index, Gf, GfMatrix, PrimeField};
pub use lattice::{demodulate, kappa_of, modulate, sawtooth, LatticeParams};
pub use mc::{
    draw_random_q, empirical_joint_dependence, mix_seed, run as run_mc, stream_rng, ChannelModel,
    DependenceReport, EpsModel, McConfig, McResult, McScheme,
};
pub use pmf::Pmf;
pub use rates::{
    best_linear_combiner, binary_entropy, mimo_sum_capacity, pe_asym, rate_antenna_selection,
    rate_elbc, rate_lbc, rate_repetition, rate_repetition_vec, rate_sc, rate_zf, simo_capacity,
    simo_capacity_joint, RateMeta, Scheme, SchemeRate,
};
