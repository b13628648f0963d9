//! Orbits of `K = GL_p(F) x GL_q(F)` on the affine flag variety of
//! `GL_n(F)`, `F = K((t))`, and their classification by affine (p,q)-clans.
//!
//! * [`laurent`]: the field `F`, modelled by rational functions over `F_p`.
//! * [`dvr_linalg`]: matrices over `F` and `A`-lattices, `A = K[[t]]`.
//! * [`clan`]: affine clans, their enumeration and winding diagrams.
//! * [`correspondence`]: clan matrices and the flag of a matrix.
//! * [`invariants`]: the orbit invariants and the flag-to-clan procedure.
//! * [`reduction`]: reduction of a matrix to its clan matrix with witnesses.

pub mod clan;
pub mod correspondence;
pub mod dvr_linalg;
pub mod invariants;
pub mod io;
pub mod laurent;
pub mod reduction;
pub mod reference_tables;

pub use clan::{enumerate, enumeration_count, AffineClan, ClanError, ClanSymbol};
pub use correspondence::{
    clan_matrix_to_clan, clan_to_basis, clan_to_matrix, matrix_to_flag, to_clan_matrix, AffineFlag, ClanMatrix,
    CorrespondenceError,
};
pub use dvr_linalg::{LatticeBasis, LinalgError, MatrixF};
pub use invariants::{flag_to_clan, invariant_table, FlagInvariants, InvariantError, InvariantTable};
pub use laurent::{characteristic, set_characteristic, FieldElem, LaurentError, Val};
pub use reduction::{classify, random_b, random_gl, random_k, reduce_to_clan_matrix, ReductionError, Witness};
