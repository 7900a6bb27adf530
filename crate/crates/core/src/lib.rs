//! Exact combinatorial machinery for free-by-cyclic groups of rank two.
//!
//! The crate is organised around five pipelines:
//!
//! * [`freegroup`] — reduced words, endomorphisms and their abelianizations;
//! * [`matdecomp`] — conjugating infinite-order GL2(Z) matrices into the
//!   semigroup generated by `-I`, `F`, `L`, `R` and reading off an
//!   automorphism word;
//! * [`complexbuilder`] + [`linkcheck`] — building piecewise-Euclidean and
//!   square complexes for mapping tori and verifying the Gromov link
//!   condition with exact rational angles;
//! * [`gbs`] — classification of generalized Baumslag-Solitar groups with
//!   explicit witness quotients;
//! * [`endo`] — immersion analysis and hyperbolicity/linearity certificates
//!   for injective endomorphisms of free groups.
//!
//! All arithmetic is exact (integers and rationals); nothing in the
//! verification path depends on floating point. Data-parallel sweeps use
//! rayon when the `parallel` feature (default) is enabled and fall back to
//! sequential iteration otherwise.

pub mod complexbuilder;
pub mod endo;
pub mod freegroup;
pub mod gbs;
pub mod linkcheck;
pub mod matdecomp;
pub mod par;
pub mod snf;
pub mod sweeps;

pub use complexbuilder::{
    build_pe_complex, build_square_complex, classify_case, CaseTag, PE2Complex,
};
pub use endo::{linearity_certificate, Certificate, SearchBounds};
pub use freegroup::{Endomorphism, Letter, ReducedWord};
pub use gbs::{GbsClassification, GbsGraph};
pub use linkcheck::{check_npc, weighted_girth, LinkGraph};
pub use matdecomp::{decompose, AutWord, Mat2Z, MatrixDecomposition};
