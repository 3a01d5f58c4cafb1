//! Command-line tooling around `hcpdq-core`: key files, one-shot
//! compression, a framed TCP PDQ service and the benchmark harness.

pub mod bench;
pub mod commands;
pub mod service;
pub mod wire;

/// Which HE backend a command runs on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, clap::ValueEnum)]
pub enum Backend {
    /// Exact slot simulator.
    Sim,
    /// The small RLWE/BGV implementation.
    Bgv,
}

impl Backend {
    pub fn name(self) -> &'static str {
        match self {
            Backend::Sim => "simulator",
            Backend::Bgv => "bgv",
        }
    }
}

/// Environment variable holding the seed for key generation and encryption.
pub const SEED_ENV: &str = "HCPDQ_SEED";
