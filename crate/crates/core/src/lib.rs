//! Exact computations with the dynamical Cuntz semigroup of inverse-semigroup
//! actions on finite spaces and graph path spaces: subequivalence with
//! witnesses, paradoxicality, invariant states, and the stably-finite /
//! purely-infinite verdict.

pub mod action;
pub mod budget;
pub mod error;
pub mod extnat;
pub mod flow;
pub mod groupoid;
pub mod lp;
pub mod lsc;
pub mod model;
pub mod mover;
pub mod oracle;
pub mod rank;
pub mod semigroup;
pub mod space;
pub mod states;
pub mod subequiv;
pub mod typesemi;
pub mod verdict;

pub use action::ActionModel;
pub use budget::Budget;
pub use error::{Error, Result};
pub use extnat::{ExtNat, ExtRational, Fin, Inf};
pub use lsc::{almost_refinement, sup_chain, LscFun, NormalForm};
pub use mover::{Mover, Piece};
pub use rank::{DiagonalElement, RankVectorCuClass};
pub use groupoid::Status;
pub use model::ModelSpec;
pub use oracle::{brute_force_subequiv, OracleBounds};
pub use semigroup::InverseSemigroup;
pub use space::{BaseSpace, Cont, OpenSet, SpaceRef, Word};
pub use states::{find_invariant_state, StateOutcome, StateWitness};
pub use subequiv::{apply_witness, compose_witnesses, decide_subequiv, Decision, Engine, TransportWitness};
pub use verdict::{analyze, Outcome, Verdict};
