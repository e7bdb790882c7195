//! Khovanov-type homology for links in RP³ and the first two pages of the
//! instanton cube spectral sequence, all over F₂.
//!
//! The pipeline is `diagram` → `cube` → `rules` + `complex` → `invariants`.

pub mod complex;
pub mod cube;
pub mod diagram;
pub mod invariants;
pub mod linalg;
pub mod rules;
