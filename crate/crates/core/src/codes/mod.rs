//! Explicit codes for compound channels and their Monte-Carlo evaluation:
//! the average-channel code, the informed-sender encoder ansatz with its
//! decoupling and normalization steps, channel estimation with feedback, and
//! the unassisted informed-sender experiment.
//!
//! Every stochastic routine takes an explicit seed.

mod bounds;
mod decouple;
mod encoder;
mod feedback;
mod joint;
mod oneshot;
mod plain;

pub use bounds::{
    decoder_bound_l6, decoder_delta_l6, decoupling_bound_l5, informed_sender_bound, marginal_bound_l7, plain_bound,
    uninformed_bound, BranchEntropies, FidelityBound,
};
pub use decouple::{mc_decoupling_l5, DecouplingReport, DEFAULT_SAMPLES};
pub use encoder::{build_is_encoder, build_oa, normalize_encoder, Encoder, IsEncoderSpec, NormalizedEncoder};
pub use feedback::{estimate_channel_pgm, feedback_protocol_sim, PgmEstimate, ProtocolTranscript, MAX_PGM_DIM};
pub use joint::{average_encoded_channel, build_universal_decoder, complementary_average, Decoder, UniversalDecoder};
pub use oneshot::{build_is_code, run_one_shot_is, run_one_shot_uninformed, IsCode, OneShotReport, MAX_ATTEMPTS};
pub use plain::plain_is_experiment;
