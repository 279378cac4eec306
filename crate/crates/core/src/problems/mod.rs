//! Benchmark problems and model wrappers.

pub mod lightdark;
pub mod listen;
pub mod scalarized;
pub mod vdp_tag;

pub use lightdark::{GoalSeekingRollout, LightDark, LightDarkParams, LightDarkState};
pub use listen::{CostlyListen, ListenAction, ListenParams, ListenState, Sound};
pub use scalarized::{Scalarized, ScalarizedRollout};
pub use vdp_tag::{PursuitRollout, VdpAction, VdpTag, VdpTagParams, VdpTagState};
