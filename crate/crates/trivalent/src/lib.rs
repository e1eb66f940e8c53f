//! Exact computational engine for spaces of connected trivalent/univalent
//! graphs modulo local relations (antisymmetry, IHX, and the 2-gon relation),
//! with a noncommutative word algebra on three strands layered on top.
//!
//! The crate has three layers:
//!
//! * an exact linear-algebra substrate ([`rat`], [`sparse`]);
//! * the diagram layer ([`diagram`], [`canon`], [`vector`], [`enumerate`],
//!   [`relations`], [`certify`], [`ladder`]) where elements are formal
//!   rational combinations of canonicalized graphs and "equals zero" is
//!   decided by certificate search over relation instances;
//! * the word layer ([`word`], [`bracket`], [`script`], [`realize`],
//!   [`identity`]) where the same elements are manipulated symbolically and
//!   every rewrite rule is independently certified against the diagram layer.
//!
//! The bundled derivation scripts (R1, R2, R3) replay end-to-end with exact
//! rational arithmetic; see the `trivalent` binary for the command-line
//! surface.

pub mod bracket;
pub mod script;
pub mod rat;
pub mod sparse;
pub mod word;
