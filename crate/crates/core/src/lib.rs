//! Simulation of a five-photon linear-optical circuit that heralds
//! path-encoded three-photon GHZ states.
//!
//! * [`state`]: sparse kets over per-photon labels.
//! * [`interferometer`]: channels, elements and the circuit layout.
//! * [`ideal`]: the post-selected pipeline with perfect two-photon interference.
//! * [`entanglement`]: local entropies, 3-tangle and SLOCC class.
//! * [`history`]: path-history expansion with partial two-photon interference.
//! * [`oracle`]: brute-force Fock-space simulation used for cross-checks.
//! * [`audit`]: the cross-validation table built from the engines above.

pub mod audit;
pub mod entanglement;
pub mod error;
pub mod history;
pub mod ideal;
pub mod interferometer;
pub mod oracle;
pub mod state;

pub use entanglement::{classify, three_tangle, DensityMatrix2, EntanglementClass, EntanglementReport, PureState3};
pub use error::{Error, Result};
pub use history::{CoefficientMonomial, JointHistory, OverlapRow, PhotonHistory};
pub use ideal::{ConditionalOutcome, IdealProtocol, IdealReport};
pub use interferometer::{Channel, CircuitLayout, DetectorId, Element, ElementKind};
pub use state::{Amplitude, BasisLabel, Mode, SparseState};
