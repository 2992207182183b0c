pub mod correlations;
pub mod floquet;
pub mod lindblad;
pub mod metrics;
pub mod network;
pub mod qops;
pub mod scenarios;
