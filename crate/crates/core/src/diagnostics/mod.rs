//! Label-free summaries of a sample stream.
//!
//! Every quantity here depends on samples only through `k`, pairwise
//! co-membership or per-class response tallies, so none of them is affected
//! by label switching.

mod autocorr;
mod consensus;
mod kposterior;
mod mutual_info;
mod spectral;

pub use autocorr::{integrated_autocorrelation, AutocorrEstimate, WINDOW_FACTOR};
pub use consensus::{consensus, ConsensusAccumulator, ConsensusMatrix};
pub use kposterior::{k_posterior, KPosterior};
pub use mutual_info::{mutual_information, mutual_information_of, MutualInfoAccumulator};
pub use spectral::{kmeans, spectral_consensus, top_eigenvectors, SpectralConsensus};
