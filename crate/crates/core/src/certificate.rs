//! Finite cyclic proof certificates for three infinitary relations, with a
//! mode-parameterized checker and the marker well-foundedness test.
//!
//! A certificate is a finite graph of judgment nodes. Split nodes carry a
//! chain of terms connected by single steps; lift steps reference Lift
//! nodes, which descend into the children of a shared head symbol and may
//! point back up, closing a cycle. Cycles are what let a finite object
//! certify an infinite reduction.
//!
//! The three modes differ only in which step kinds are admitted and in the
//! marker discipline:
//!
//! * `Ired` certifies infinitary reduction. Every non-final lift reference
//!   must be marked, the final step must be an unmarked lift or id, and no
//!   marked reference may lie on a cycle.
//! * `BiInf` certifies bi-infinite rewriting: root steps and unmarked lifts
//!   anywhere, cycles unrestricted.
//! * `EqInf` additionally admits reversed root steps.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use alloc::{format, vec};
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::syntax::{parse_term, ParseError, SymbolPolicy};
use crate::term::CanonicalTerm;
use crate::trs::{match_root, Trs};

/// Which relation a certificate claims.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Mode {
    Ired,
    BiInf,
    EqInf,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Ired => "ired",
            Mode::BiInf => "biinf",
            Mode::EqInf => "eqinf",
        }
    }

    pub fn from_name(s: &str) -> Option<Mode> {
        match s {
            "ired" => Some(Mode::Ired),
            "biinf" => Some(Mode::BiInf),
            "eqinf" => Some(Mode::EqInf),
            _ => None,
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One step inside a Split chain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StepItem {
    /// Apply a rule at the root, left to right.
    Root { rule: usize },
    /// Apply a rule at the root, right to left (equational mode only).
    RootRev { rule: usize },
    /// Descend below a shared head via the referenced Lift or Id node.
    /// The mark distinguishes the strict lift from the closing one.
    LiftRef { node: u64, marked: bool },
    /// The two endpoints are the same term.
    IdStep,
}

/// A node of the proof graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum JudgmentNode {
    /// A chain `terms[0] -> terms[1] -> ... -> terms[k]` where step `i`
    /// relates `terms[i]` to `terms[i+1]`.
    Split {
        terms: Vec<CanonicalTerm>,
        steps: Vec<StepItem>,
    },
    /// Componentwise descent: endpoints at the use site must share a head
    /// symbol, and `children[j]` proves the j-th argument pair.
    Lift { children: Vec<u64> },
    /// Reflexivity at whatever endpoints the use site supplies.
    Id,
}

/// A finite cyclic proof object.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Certificate {
    pub mode: Mode,
    pub nodes: BTreeMap<u64, JudgmentNode>,
    pub root: u64,
}

/// Reason codes for rejected certificates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InvalidReason {
    BadStep,
    HeadMismatch,
    ArityMismatch,
    ModeViolation,
    MarkedCycle,
    DanglingRef,
}

impl fmt::Display for InvalidReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            InvalidReason::BadStep => "BadStep",
            InvalidReason::HeadMismatch => "HeadMismatch",
            InvalidReason::ArityMismatch => "ArityMismatch",
            InvalidReason::ModeViolation => "ModeViolation",
            InvalidReason::MarkedCycle => "MarkedCycle",
            InvalidReason::DanglingRef => "DanglingRef",
        };
        f.write_str(s)
    }
}

/// A rejection with the node it is attributed to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CertificateInvalid {
    pub reason: InvalidReason,
    pub node: u64,
}

impl fmt::Display for CertificateInvalid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at node {}", self.reason, self.node)
    }
}

/// Outcome of [`check_certificate`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Valid,
    Invalid(CertificateInvalid),
}

/// The claimed endpoints: first and last term of the root Split.
/// None if the root is missing, not a Split, or empty.
pub fn endpoints(cert: &Certificate) -> Option<(&CanonicalTerm, &CanonicalTerm)> {
    match cert.nodes.get(&cert.root)? {
        JudgmentNode::Split { terms, .. } => Some((terms.first()?, terms.last()?)),
        _ => None,
    }
}

fn check_root_step(trs: &Trs, rule: usize, from: &CanonicalTerm, to: &CanonicalTerm) -> bool {
    let Some(r) = trs.rules().get(rule) else {
        return false;
    };
    match match_root(&r.lhs, from) {
        Some(sigma) => r.rhs.apply(&sigma) == *to,
        None => false,
    }
}

/// Check a certificate against a rewrite system.
///
/// Failures are reported deterministically: structural problems first, then
/// mode discipline, then local step and lift checks, then the marker
/// well-foundedness test, each scanning node ids in ascending order. Step
/// failures are attributed to the Split that contains the step; head,
/// arity, child, and marker failures to the Lift node involved.
pub fn check_certificate(cert: &Certificate, trs: &Trs) -> Verdict {
    match check_inner(cert, trs) {
        Ok(()) => Verdict::Valid,
        Err(invalid) => Verdict::Invalid(invalid),
    }
}

fn check_inner(cert: &Certificate, trs: &Trs) -> Result<(), CertificateInvalid> {
    let fail = |reason: InvalidReason, node: u64| CertificateInvalid { reason, node };

    // Structure: the root is a Split, references resolve, lift steps target
    // Lift or Id nodes, lift children are Split or Id nodes, and term/step
    // counts line up.
    match cert.nodes.get(&cert.root) {
        None => return Err(fail(InvalidReason::DanglingRef, cert.root)),
        Some(JudgmentNode::Split { .. }) => {}
        Some(_) => return Err(fail(InvalidReason::ModeViolation, cert.root)),
    }
    for (&id, node) in &cert.nodes {
        match node {
            JudgmentNode::Split { terms, steps } => {
                if terms.len() != steps.len() + 1 {
                    return Err(fail(InvalidReason::BadStep, id));
                }
                for step in steps {
                    if let StepItem::LiftRef { node: m, .. } = step {
                        match cert.nodes.get(m) {
                            None => return Err(fail(InvalidReason::DanglingRef, id)),
                            Some(JudgmentNode::Split { .. }) => {
                                return Err(fail(InvalidReason::BadStep, id))
                            }
                            Some(_) => {}
                        }
                    }
                }
            }
            JudgmentNode::Lift { children } => {
                for c in children {
                    match cert.nodes.get(c) {
                        None => return Err(fail(InvalidReason::DanglingRef, id)),
                        Some(JudgmentNode::Lift { .. }) => {
                            return Err(fail(InvalidReason::BadStep, id))
                        }
                        Some(_) => {}
                    }
                }
            }
            JudgmentNode::Id => {}
        }
    }

    // Mode discipline.
    for (&id, node) in &cert.nodes {
        let JudgmentNode::Split { steps, .. } = node else {
            continue;
        };
        match cert.mode {
            Mode::Ired => {
                if steps.is_empty() {
                    return Err(fail(InvalidReason::ModeViolation, id));
                }
                let last = steps.len() - 1;
                for (i, step) in steps.iter().enumerate() {
                    let ok = match step {
                        StepItem::Root { .. } => i != last,
                        StepItem::RootRev { .. } => false,
                        StepItem::LiftRef { marked, .. } => *marked == (i != last),
                        StepItem::IdStep => true,
                    };
                    if !ok {
                        return Err(fail(InvalidReason::ModeViolation, id));
                    }
                }
            }
            Mode::BiInf => {
                for step in steps {
                    let bad = matches!(step, StepItem::RootRev { .. })
                        || matches!(step, StepItem::LiftRef { marked: true, .. });
                    if bad {
                        return Err(fail(InvalidReason::ModeViolation, id));
                    }
                }
            }
            Mode::EqInf => {
                for step in steps {
                    if matches!(step, StepItem::LiftRef { marked: true, .. }) {
                        return Err(fail(InvalidReason::ModeViolation, id));
                    }
                }
            }
        }
    }

    // Local checks: each step relates its two terms; lifts descend one
    // level and their children prove the argument pairs.
    for (&id, node) in &cert.nodes {
        let JudgmentNode::Split { terms, steps } = node else {
            continue;
        };
        for (i, step) in steps.iter().enumerate() {
            let u = &terms[i];
            let v = &terms[i + 1];
            match step {
                StepItem::Root { rule } => {
                    if !check_root_step(trs, *rule, u, v) {
                        return Err(fail(InvalidReason::BadStep, id));
                    }
                }
                StepItem::RootRev { rule } => {
                    if !check_root_step(trs, *rule, v, u) {
                        return Err(fail(InvalidReason::BadStep, id));
                    }
                }
                StepItem::IdStep => {
                    if u != v {
                        return Err(fail(InvalidReason::BadStep, id));
                    }
                }
                StepItem::LiftRef { node: m, .. } => match &cert.nodes[m] {
                    JudgmentNode::Id => {
                        if u != v {
                            return Err(fail(InvalidReason::BadStep, id));
                        }
                    }
                    JudgmentNode::Lift { children } => {
                        check_lift_use(cert, *m, children, u, v)?;
                    }
                    JudgmentNode::Split { .. } => unreachable!("structure pass"),
                },
            }
        }
    }

    // Marker well-foundedness: no marked reference on a cycle.
    if cert.mode == Mode::Ired {
        let edges = reference_edges(cert);
        if let Some(node) = first_marked_cycle(&edges) {
            return Err(fail(InvalidReason::MarkedCycle, node));
        }
    }
    Ok(())
}

fn check_lift_use(
    cert: &Certificate,
    lift_id: u64,
    children: &[u64],
    u: &CanonicalTerm,
    v: &CanonicalTerm,
) -> Result<(), CertificateInvalid> {
    let fail = |reason: InvalidReason| CertificateInvalid {
        reason,
        node: lift_id,
    };
    let Some((fu, cu)) = u.head() else {
        return Err(fail(InvalidReason::HeadMismatch));
    };
    let Some((fv, cv)) = v.head() else {
        return Err(fail(InvalidReason::HeadMismatch));
    };
    if fu != fv {
        return Err(fail(InvalidReason::HeadMismatch));
    }
    if cu.len() != children.len() || cv.len() != children.len() {
        return Err(fail(InvalidReason::ArityMismatch));
    }
    let cu = cu.to_vec();
    let cv = cv.to_vec();
    for (j, child) in children.iter().enumerate() {
        let s = u.subgraph_at_node(cu[j]);
        let t = v.subgraph_at_node(cv[j]);
        let ok = match &cert.nodes[child] {
            JudgmentNode::Id => s == t,
            JudgmentNode::Split { terms, .. } => {
                terms.first() == Some(&s) && terms.last() == Some(&t)
            }
            JudgmentNode::Lift { .. } => unreachable!("structure pass"),
        };
        if !ok {
            return Err(fail(InvalidReason::BadStep));
        }
    }
    Ok(())
}

/// Edges of the reference graph in deterministic scan order: Split nodes to
/// their lift targets (carrying the mark), then Lift nodes to each child.
fn reference_edges(cert: &Certificate) -> Vec<(u64, u64, bool)> {
    let mut edges = Vec::new();
    for (&id, node) in &cert.nodes {
        match node {
            JudgmentNode::Split { steps, .. } => {
                for step in steps {
                    if let StepItem::LiftRef { node: m, marked } = step {
                        edges.push((id, *m, *marked));
                    }
                }
            }
            JudgmentNode::Lift { children } => {
                for c in children {
                    edges.push((id, *c, false));
                }
            }
            JudgmentNode::Id => {}
        }
    }
    edges
}

/// First marked edge whose target reaches its source, in edge order; the
/// returned id is the target node.
pub(crate) fn first_marked_cycle(edges: &[(u64, u64, bool)]) -> Option<u64> {
    let mut adj: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
    for &(u, v, _) in edges {
        adj.entry(u).or_default().push(v);
    }
    let reaches = |from: u64, to: u64| -> bool {
        let mut seen = BTreeSet::new();
        let mut stack = vec![from];
        while let Some(n) = stack.pop() {
            if n == to {
                return true;
            }
            if !seen.insert(n) {
                continue;
            }
            if let Some(next) = adj.get(&n) {
                stack.extend(next.iter().copied());
            }
        }
        false
    };
    for &(u, v, marked) in edges {
        if marked && reaches(v, u) {
            return Some(v);
        }
    }
    None
}

/// Maximum number of marked edges on any path in the reference graph.
///
/// Requires a certificate that checks out in `Ired` mode; the mode's marker
/// discipline is what makes the count finite.
pub fn nesting_depth(cert: &Certificate, trs: &Trs) -> Result<usize, CertificateInvalid> {
    if cert.mode != Mode::Ired {
        return Err(CertificateInvalid {
            reason: InvalidReason::ModeViolation,
            node: cert.root,
        });
    }
    if let Verdict::Invalid(invalid) = check_certificate(cert, trs) {
        return Err(invalid);
    }
    let edges = reference_edges(cert);
    let mut adj: BTreeMap<u64, Vec<(u64, bool)>> = BTreeMap::new();
    for &(u, v, marked) in &edges {
        adj.entry(u).or_default().push((v, marked));
    }

    // Marked edges never lie on cycles, so chains of marked crossings are
    // well-founded and the memoized recursion terminates.
    fn depth_from(
        n: u64,
        adj: &BTreeMap<u64, Vec<(u64, bool)>>,
        memo: &mut BTreeMap<u64, usize>,
    ) -> usize {
        if let Some(&d) = memo.get(&n) {
            return d;
        }
        // Everything reachable from n without counting.
        let mut reach = BTreeSet::new();
        let mut stack = vec![n];
        while let Some(m) = stack.pop() {
            if !reach.insert(m) {
                continue;
            }
            if let Some(next) = adj.get(&m) {
                stack.extend(next.iter().map(|&(v, _)| v));
            }
        }
        let mut best = 0;
        for m in reach {
            if let Some(next) = adj.get(&m) {
                for &(v, marked) in next {
                    if marked {
                        best = best.max(1 + depth_from(v, adj, memo));
                    }
                }
            }
        }
        memo.insert(n, best);
        best
    }

    let mut memo = BTreeMap::new();
    let best = cert
        .nodes
        .keys()
        .map(|&n| depth_from(n, &adj, &mut memo))
        .max()
        .unwrap_or(0);
    Ok(best)
}

// ---------------------------------------------------------------------------
// File format

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCert {
    mode: String,
    root: u64,
    nodes: Vec<RawNode>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNode {
    id: u64,
    kind: String,
    #[serde(default)]
    terms: Option<Vec<String>>,
    #[serde(default)]
    steps: Option<Vec<RawStep>>,
    #[serde(default)]
    children: Option<Vec<u64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStep {
    kind: String,
    #[serde(default)]
    rule: Option<u64>,
    #[serde(default)]
    node: Option<u64>,
    #[serde(default)]
    marked: Option<bool>,
}

/// Errors raised while reading a certificate file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CertParseError {
    /// Not valid JSON of the expected shape (includes unknown fields).
    Json(String),
    /// An unknown mode string.
    BadMode(String),
    /// A structural problem at a node: duplicate id, missing or misplaced
    /// fields, bad step shape, dangling reference, rule index out of range,
    /// or a step kind not allowed by the mode.
    Malformed { node: u64, message: String },
    /// A term string failed to parse.
    Term { node: u64, error: ParseError },
    /// The root id has no node or names a non-Split node.
    BadRoot(u64),
}

impl fmt::Display for CertParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CertParseError::Json(msg) => write!(f, "{msg}"),
            CertParseError::BadMode(mode) => {
                write!(f, "unknown mode '{mode}' (expected ired, biinf, or eqinf)")
            }
            CertParseError::Malformed { node, message } => {
                write!(f, "node {node}: {message}")
            }
            CertParseError::Term { node, error } => {
                write!(f, "node {node}: {error}")
            }
            CertParseError::BadRoot(root) => {
                write!(f, "root {root} is not a split node of the certificate")
            }
        }
    }
}

/// Read a certificate from its JSON text. Terms are parsed against the
/// system's variables and signature; symbols that do not occur in the rules
/// are admitted as long as their arities are consistent across the file.
pub fn parse_certificate(text: &str, trs: &Trs) -> Result<Certificate, CertParseError> {
    let raw: RawCert =
        serde_json::from_str(text).map_err(|e| CertParseError::Json(e.to_string()))?;
    let mode =
        Mode::from_name(&raw.mode).ok_or_else(|| CertParseError::BadMode(raw.mode.clone()))?;

    let mut sig = trs.signature().clone();
    let vars = trs.declared_vars();
    let mut nodes: BTreeMap<u64, JudgmentNode> = BTreeMap::new();

    for rn in &raw.nodes {
        let id = rn.id;
        let malformed = |message: String| CertParseError::Malformed { node: id, message };
        if nodes.contains_key(&id) {
            return Err(malformed("duplicate node id".to_string()));
        }
        let node =
            match rn.kind.as_str() {
                "split" => {
                    if rn.children.is_some() {
                        return Err(malformed(
                            "a split node has no 'children' field".to_string(),
                        ));
                    }
                    let term_texts = rn.terms.as_ref().ok_or_else(|| {
                        malformed("a split node needs a 'terms' field".to_string())
                    })?;
                    let raw_steps = rn.steps.as_ref().ok_or_else(|| {
                        malformed("a split node needs a 'steps' field".to_string())
                    })?;
                    if term_texts.len() != raw_steps.len() + 1 {
                        return Err(malformed(format!(
                            "a split over {} steps needs {} terms, found {}",
                            raw_steps.len(),
                            raw_steps.len() + 1,
                            term_texts.len()
                        )));
                    }
                    let mut terms = Vec::with_capacity(term_texts.len());
                    for text in term_texts {
                        let t = parse_term(text, vars, SymbolPolicy::Extend(&mut sig))
                            .map_err(|error| CertParseError::Term { node: id, error })?;
                        terms.push(t);
                    }
                    let mut steps = Vec::with_capacity(raw_steps.len());
                    for (i, rs) in raw_steps.iter().enumerate() {
                        steps.push(parse_step(rs, i, mode, trs, id)?);
                    }
                    JudgmentNode::Split { terms, steps }
                }
                "lift" => {
                    if rn.terms.is_some() || rn.steps.is_some() {
                        return Err(malformed(
                            "a lift node has only a 'children' field".to_string(),
                        ));
                    }
                    let children = rn.children.clone().ok_or_else(|| {
                        malformed("a lift node needs a 'children' field".to_string())
                    })?;
                    JudgmentNode::Lift { children }
                }
                "id" => {
                    if rn.terms.is_some() || rn.steps.is_some() || rn.children.is_some() {
                        return Err(malformed("an id node carries no other fields".to_string()));
                    }
                    JudgmentNode::Id
                }
                other => {
                    return Err(malformed(format!(
                        "unknown node kind '{other}' (expected split, lift, or id)"
                    )))
                }
            };
        nodes.insert(id, node);
    }

    // References resolve.
    for (&id, node) in &nodes {
        let targets: Vec<u64> = match node {
            JudgmentNode::Split { steps, .. } => steps
                .iter()
                .filter_map(|s| match s {
                    StepItem::LiftRef { node, .. } => Some(*node),
                    _ => None,
                })
                .collect(),
            JudgmentNode::Lift { children } => children.clone(),
            JudgmentNode::Id => Vec::new(),
        };
        for t in targets {
            if !nodes.contains_key(&t) {
                return Err(CertParseError::Malformed {
                    node: id,
                    message: format!("reference to missing node {t}"),
                });
            }
        }
    }

    match nodes.get(&raw.root) {
        Some(JudgmentNode::Split { .. }) => {}
        _ => return Err(CertParseError::BadRoot(raw.root)),
    }

    Ok(Certificate {
        mode,
        nodes,
        root: raw.root,
    })
}

fn parse_step(
    rs: &RawStep,
    index: usize,
    mode: Mode,
    trs: &Trs,
    node_id: u64,
) -> Result<StepItem, CertParseError> {
    let malformed = |message: String| CertParseError::Malformed {
        node: node_id,
        message,
    };
    let rule_arg = || -> Result<usize, CertParseError> {
        let rule = rs
            .rule
            .ok_or_else(|| malformed(format!("step {index}: missing 'rule'")))?
            as usize;
        if rule >= trs.rules().len() {
            return Err(malformed(format!(
                "step {index}: rule index {rule} out of range (the system has {} rules)",
                trs.rules().len()
            )));
        }
        Ok(rule)
    };
    match rs.kind.as_str() {
        "root" => {
            if rs.node.is_some() || rs.marked.is_some() {
                return Err(malformed(format!(
                    "step {index}: a root step takes only 'rule'"
                )));
            }
            Ok(StepItem::Root { rule: rule_arg()? })
        }
        "rootrev" => {
            if rs.node.is_some() || rs.marked.is_some() {
                return Err(malformed(format!(
                    "step {index}: a rootrev step takes only 'rule'"
                )));
            }
            if mode != Mode::EqInf {
                return Err(malformed(format!(
                    "step {index}: rootrev steps are only allowed in eqinf mode"
                )));
            }
            Ok(StepItem::RootRev { rule: rule_arg()? })
        }
        "lift" => {
            if rs.rule.is_some() {
                return Err(malformed(format!(
                    "step {index}: a lift step takes 'node' and 'marked'"
                )));
            }
            let node = rs
                .node
                .ok_or_else(|| malformed(format!("step {index}: missing 'node'")))?;
            let marked = rs
                .marked
                .ok_or_else(|| malformed(format!("step {index}: missing 'marked'")))?;
            if marked && mode != Mode::Ired {
                return Err(malformed(format!(
                    "step {index}: markers are only meaningful in ired mode"
                )));
            }
            Ok(StepItem::LiftRef { node, marked })
        }
        "id" => {
            if rs.rule.is_some() || rs.node.is_some() || rs.marked.is_some() {
                return Err(malformed(format!(
                    "step {index}: an id step takes no fields"
                )));
            }
            Ok(StepItem::IdStep)
        }
        other => Err(malformed(format!(
            "step {index}: unknown step kind '{other}'"
        ))),
    }
}

#[derive(Serialize)]
struct OutCert {
    mode: &'static str,
    root: u64,
    nodes: Vec<OutNode>,
}

#[derive(Serialize)]
struct OutNode {
    id: u64,
    kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    terms: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    steps: Option<Vec<OutStep>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    children: Option<Vec<u64>>,
}

#[derive(Serialize)]
struct OutStep {
    kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    rule: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    node: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    marked: Option<bool>,
}

/// Render a certificate in the JSON file format, nodes in ascending id
/// order, terms printed in the textual term syntax.
pub fn certificate_to_json(cert: &Certificate) -> String {
    let nodes = cert
        .nodes
        .iter()
        .map(|(&id, node)| match node {
            JudgmentNode::Split { terms, steps } => OutNode {
                id,
                kind: "split",
                terms: Some(terms.iter().map(|t| t.to_string()).collect()),
                steps: Some(
                    steps
                        .iter()
                        .map(|s| match s {
                            StepItem::Root { rule } => OutStep {
                                kind: "root",
                                rule: Some(*rule as u64),
                                node: None,
                                marked: None,
                            },
                            StepItem::RootRev { rule } => OutStep {
                                kind: "rootrev",
                                rule: Some(*rule as u64),
                                node: None,
                                marked: None,
                            },
                            StepItem::LiftRef { node, marked } => OutStep {
                                kind: "lift",
                                rule: None,
                                node: Some(*node),
                                marked: Some(*marked),
                            },
                            StepItem::IdStep => OutStep {
                                kind: "id",
                                rule: None,
                                node: None,
                                marked: None,
                            },
                        })
                        .collect(),
                ),
                children: None,
            },
            JudgmentNode::Lift { children } => OutNode {
                id,
                kind: "lift",
                terms: None,
                steps: None,
                children: Some(children.clone()),
            },
            JudgmentNode::Id => OutNode {
                id,
                kind: "id",
                terms: None,
                steps: None,
                children: None,
            },
        })
        .collect();
    let out = OutCert {
        mode: cert.mode.as_str(),
        root: cert.root,
        nodes,
    };
    serde_json::to_string_pretty(&out).expect("certificate serialization cannot fail")
}
