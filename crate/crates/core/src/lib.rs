//! Stability certificates for cuts of weighted dispersal networks.
//!
//! The crate answers one question: if a set of dispersal links is removed,
//! does every resulting sub-network keep a Fiedler value above a stability
//! threshold `tau`, and where does `tau` come from for a given multi-species
//! metapopulation model?

pub mod certify;
pub mod dynamics;
pub mod error;
pub mod formats;
pub mod graph;
pub mod linalg;
pub mod metapop;
pub mod nonsymmetric;
pub mod search;
pub mod spectral;

pub use certify::{certify_partition, Bipartition, Check, StabilityCertificate, StabilityThreshold, Verdict};
pub use dynamics::{
    cut_experiment, integrate, perturbation_decay, rm_equilibrium, rosenzweig_macarthur, CutExperiment, DecayReport,
    RMParams, Trajectory,
};
pub use error::{Error, Result};
pub use formats::{parse_cut, parse_graph, parse_model, write_cut, write_graph, write_model, ModelSpec};
pub use graph::{Cut, Partition, WeightedGraph};
pub use linalg::Matrix;
pub use metapop::{
    find_equilibrium, gershgorin_conditions, linearize, spectrum_verdict, tau_threshold, trace_lower_bound,
    LinearizedSystem, MetapopModel,
};
pub use num_complex::Complex64;
pub use search::{enumerate_bipartitions, refine_moves, search_stable_cuts, SearchMode, SearchReport};
pub use spectral::{eig_symmetric, fiedler, EigenDecomposition, FiedlerPair};
