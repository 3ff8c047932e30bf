//! Accelerated Kamada-Kawai variants: signal-strength distances (KK-SS),
//! multi-node selection (KK-MS) and the growing starting area with decaying
//! stiffness (KK-MS-DS).

pub mod area;
pub mod decay;
pub mod ds;
pub mod fspl;
pub mod ms;
pub mod ss;
pub mod stability;

pub use area::StartingArea;
pub use decay::{normalized_change, update_decaying_stiffness, DecayState};
pub use ds::{kk_ms_ds_layout, DistanceMode, DsOptions};
pub use fspl::{fspl_distance, FsplParams};
pub use ms::{kk_ms_layout, selection_count, MsOptions};
pub use ss::{fspl_edge_lengths, hop_model, kk_ss_model};
pub use stability::{stability_ratio, StabilityState, StallTracker};
