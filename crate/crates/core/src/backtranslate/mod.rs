//! Back-translation from solver terms to source-level formulas.
//!
//! Removing protection calls is the only rewrite applied to the terms sent
//! to the solver. Everything else here produces display forms.

mod display;
mod names;
mod protect;

pub use display::{
    display_obligation, display_rewrite, eliminate_dead_definitions, pretty_print, show, BinOp,
    DafnyExpr, Display, DisplayedObligation, Shown, UnOp,
};
pub use names::{NameEntry, NameMap, NameMapError};
pub use protect::{
    build_name_map, contains_protect_to_prove, decode_string_literal, extend_name_map,
    strip_protections, to_prove_label, Protection, ProtectionError, StringLiteralError,
};
