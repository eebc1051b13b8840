//! Modulation, channels and link adaptation.

mod channel;
mod constellation;
mod link;
mod mcs;
mod probabilistic;

pub use channel::{
    channel_awgn, channel_rayleigh, equalize_csi, noise_variance, Equalized, ERASURE_THRESHOLD,
};
pub use constellation::{
    build_qam, demodulate_hard, demodulate_soft, demodulate_soft_per_symbol, modulate,
    Constellation, SymbolStream,
};
pub use link::{coded_link, coded_symbols, info_capacity, pass_channel, ChannelKind, LinkOutput};
pub use mcs::{mcs_select, McsEntry, McsTable};
pub use probabilistic::{
    apply_partition, compute_partition, feature_to_probabilities, probabilistic_labels,
    probabilistic_modulate, PartitionRule,
};
