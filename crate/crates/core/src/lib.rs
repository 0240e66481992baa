//! Coinductive machinery for infinitary term rewriting over rational terms.
//!
//! Terms with infinite but eventually repeating structure are represented as
//! minimized cyclic term graphs ([`term`]), rewritten by ordinary first-order
//! rules ([`trs`]), and reasoned about through cyclic proof certificates for
//! infinitary reduction and bi-infinite equational reasoning ([`certificate`]).
//! The [`fixpoint`] module computes these relations exactly over a finite
//! term universe and extracts certificates from the fixed points it reaches;
//! [`compression`] turns valid reduction certificates into explicit finite
//! rewrite prefixes approximating their limit to any depth.
//!
//! The crate is `no_std` (with `alloc`); parsing and printing of the textual
//! formats live here too, so embedders only need a heap.

#![no_std]
#![deny(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod certificate;
pub mod compression;
pub mod fixpoint;
pub mod syntax;
pub mod term;
pub mod trs;

pub use certificate::{
    certificate_to_json, check_certificate, endpoints, nesting_depth, parse_certificate,
    CertParseError, Certificate, CertificateInvalid, InvalidReason, JudgmentNode, Mode, StepItem,
    Verdict,
};
pub use compression::{compress_prefix, pattern_depth, CompressError, CompressedPrefix};
pub use fixpoint::{
    check_post_fixed_point, close_universe, extract_certificate, gfp_relation, lfp_ired,
    lift_relation, root_step_relation, rtc_relation, Escape, EscapeReport, ExtractError,
    IredAnalysis, Relation, Universe,
};
pub use syntax::{parse_term, parse_term_lines, parse_trs, ParseError, SymbolPolicy};
pub use term::{
    canonicalize, ArityConflict, CanonicalTerm, Distance, InvalidPosition, Node, NodeId, Position,
    PositionParseError, Signature, Substitution, Symbol, TermGraph,
};
pub use trs::{
    find_redexes, is_left_linear, is_normal_form, match_root, replay, root_step, step_at,
    ReplayCause, ReplayError, RewriteError, RewriteStep, Rule, Trs, TrsError,
};
