//! Discrimination of multi-party quantum state sequences: global and LOCC
//! success probabilities, block-positivity analysis, and factorizability
//! checks over repeated rounds.

pub mod cone;
pub mod constructions;
pub mod discrimination;
pub mod ensemble;
pub mod error;
pub mod factor;
pub mod operator;
pub mod product;
pub mod random;
pub mod record;
pub mod structure;

pub use cone::{ConeAnalyzer, ConeParams, ConeStatus, ConeVerdict, DecompositionCertificate};
pub use discrimination::{solve_pg, PgOptions, PgResult, PgSolver, PgSolverRegistry};
pub use ensemble::{Measurement, SequenceEnsemble, SequenceIndex, StateEnsemble};
pub use error::{Error, Result};
pub use operator::{CMatrix, CVector, HermitianOperator};
pub use product::ProductPureState;
pub use structure::{Ordering, PartyStructure};
