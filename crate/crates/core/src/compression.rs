//! Finite realization of certified infinitary reductions: from a valid
//! reduction certificate over a left-linear system with finite left-hand
//! sides, produce an ordinary finite reduction whose end term agrees with
//! the certificate's target up to a requested depth.
//!
//! The engine walks the certificate with a required-depth budget. Matching
//! a left-linear pattern only inspects the subject to the pattern's depth,
//! so realizing the source of a root step to depth g + h(rule) is enough
//! to realize its target to depth g; lift steps descend into children with
//! the budget reduced by one. A backward pass over each split chain turns
//! the final goal into a per-position requirement, and the forward pass
//! emits concrete steps against the running approximation. Recursion
//! terminates because marked references never lie on reference cycles and
//! the budget strictly shrinks through final lifts.

use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use crate::certificate::{
    check_certificate, Certificate, CertificateInvalid, InvalidReason, JudgmentNode, Mode,
    StepItem, Verdict,
};
use crate::term::{CanonicalTerm, Node, NodeId, Position};
use crate::trs::{is_left_linear, match_root, RewriteStep, Rule, Trs};

/// A finite reduction prefix together with the term it reaches.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompressedPrefix {
    pub steps: Vec<RewriteStep>,
    pub result: CanonicalTerm,
}

/// Why a certificate could not be compressed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CompressError {
    /// The certificate is not a valid reduction certificate; carries the
    /// checker's reason. Coinductive-mode certificates land here too.
    InvalidCertificate(CertificateInvalid),
    NonLeftLinear,
    InfiniteLhs {
        rule: usize,
    },
}

impl core::fmt::Display for CompressError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            CompressError::InvalidCertificate(inv) => write!(f, "{inv}"),
            CompressError::NonLeftLinear => write!(f, "NonLeftLinear"),
            CompressError::InfiniteLhs { rule } => {
                write!(f, "InfiniteLhs in rule {rule}")
            }
        }
    }
}

/// Match depth of a rule: 1 + the length of the deepest non-variable
/// position of the left-hand side. Matching the pattern is determined by
/// this deep a truncation of the subject. None for a cyclic (infinite)
/// left-hand side.
pub fn pattern_depth(rule: &Rule) -> Option<usize> {
    let lhs = &rule.lhs;
    if !lhs.loop_nodes().is_empty() {
        return None;
    }
    fn deepest_fun(t: &CanonicalTerm, n: NodeId, memo: &mut Vec<Option<usize>>) -> usize {
        if let Some(d) = memo[n] {
            return d;
        }
        let d = match t.node(n) {
            Node::Var { .. } => 0,
            Node::Fun { children, .. } => children
                .clone()
                .into_iter()
                .filter(|&c| matches!(t.node(c), Node::Fun { .. }))
                .map(|c| 1 + deepest_fun(t, c, memo))
                .max()
                .unwrap_or(0),
        };
        memo[n] = Some(d);
        d
    }
    match lhs.root_node() {
        Node::Var { .. } => Some(0),
        Node::Fun { .. } => {
            let mut memo = vec![None; lhs.node_count()];
            Some(1 + deepest_fun(lhs, 0, &mut memo))
        }
    }
}

/// Realize the certified reduction to depth `d`: a finite step sequence
/// from the certificate's source whose end term is truncated-bisimilar to
/// the certificate's target at depth `d`.
pub fn compress_prefix(
    cert: &Certificate,
    trs: &Trs,
    d: usize,
) -> Result<CompressedPrefix, CompressError> {
    if cert.mode != Mode::Ired {
        return Err(CompressError::InvalidCertificate(CertificateInvalid {
            reason: InvalidReason::ModeViolation,
            node: cert.root,
        }));
    }
    if let Verdict::Invalid(inv) = check_certificate(cert, trs) {
        return Err(CompressError::InvalidCertificate(inv));
    }
    if !is_left_linear(trs) {
        return Err(CompressError::NonLeftLinear);
    }
    let depths = trs
        .rules()
        .iter()
        .enumerate()
        .map(|(i, r)| pattern_depth(r).ok_or(CompressError::InfiniteLhs { rule: i }))
        .collect::<Result<Vec<usize>, CompressError>>()?;

    let JudgmentNode::Split { terms, .. } = &cert.nodes[&cert.root] else {
        unreachable!("valid reduction certificates have a Split root");
    };
    let source = terms.first().expect("valid splits are nonempty").clone();
    let mut realizer = Realizer {
        cert,
        trs,
        depths,
        steps: Vec::new(),
    };
    let mut prefix = Vec::new();
    let result = realizer.realize(cert.root, source, d, &mut prefix);
    Ok(CompressedPrefix {
        steps: realizer.steps,
        result,
    })
}

struct Realizer<'a> {
    cert: &'a Certificate,
    trs: &'a Trs,
    depths: Vec<usize>,
    steps: Vec<RewriteStep>,
}

impl Realizer<'_> {
    /// Realize the split's target to depth `goal`, given a subject agreeing
    /// with the split's source deeply enough (the backward pass below says
    /// how deep). Emits steps at `prefix` and returns the rewritten term.
    fn realize(
        &mut self,
        node: u64,
        subject: CanonicalTerm,
        goal: usize,
        prefix: &mut Vec<usize>,
    ) -> CanonicalTerm {
        if goal == 0 {
            return subject;
        }
        let cert = self.cert;
        let JudgmentNode::Split { steps, .. } = &cert.nodes[&node] else {
            unreachable!("realize descends into Split nodes only");
        };

        // Required realization depth before each chain position.
        let n = steps.len();
        let mut need = vec![0usize; n + 1];
        need[n] = goal;
        for i in (0..n).rev() {
            need[i] = match steps[i] {
                StepItem::Root { rule } => need[i + 1] + self.depths[rule],
                StepItem::RootRev { .. } => {
                    unreachable!("reduction certificates have no reversed steps")
                }
                StepItem::LiftRef { .. } | StepItem::IdStep => need[i + 1],
            };
        }

        let mut c = subject;
        for (i, step) in steps.iter().enumerate() {
            match step {
                StepItem::Root { rule } => {
                    let r = &self.trs.rules()[*rule];
                    let sigma =
                        match_root(&r.lhs, &c).expect("subject is realized past the pattern depth");
                    self.steps.push(RewriteStep {
                        position: Position::from(prefix.clone()),
                        rule_index: *rule,
                        substitution: sigma.clone(),
                    });
                    c = r.rhs.apply(&sigma);
                }
                StepItem::IdStep => {}
                StepItem::LiftRef { node: target, .. } => match &cert.nodes[target] {
                    JudgmentNode::Id => {}
                    JudgmentNode::Lift { children } => {
                        let (symbol, kids) = {
                            let (s, k) = c.head().expect("lifted subjects have a function head");
                            (s.to_string(), k.to_vec())
                        };
                        let mut rebuilt = Vec::with_capacity(children.len());
                        for (l, (&child_node, &kid)) in children.iter().zip(kids.iter()).enumerate()
                        {
                            let sub = c.subgraph_at_node(kid);
                            if matches!(cert.nodes[&child_node], JudgmentNode::Id) {
                                rebuilt.push(sub);
                            } else {
                                prefix.push(l + 1);
                                let out = self.realize(child_node, sub, need[i + 1] - 1, prefix);
                                prefix.pop();
                                rebuilt.push(out);
                            }
                        }
                        c = CanonicalTerm::fun(&symbol, &rebuilt);
                    }
                    JudgmentNode::Split { .. } => {
                        unreachable!("lift references never target splits in valid certificates")
                    }
                },
                StepItem::RootRev { .. } => {
                    unreachable!("reduction certificates have no reversed steps")
                }
            }
        }
        c
    }
}
