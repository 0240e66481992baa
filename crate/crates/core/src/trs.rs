//! Rewrite rules over rational terms: root matching (non-linear and cyclic
//! patterns included), positioned steps, redex search, and replay of
//! recorded step sequences.
//!
//! Stepping has tree semantics. The nodes along the rewrite position are
//! copied before grafting, so a step at one tree occurrence of a shared
//! node leaves the other occurrences untouched.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::term::{
    ArityConflict, CanonicalTerm, InvalidPosition, Node, NodeId, Position, Signature, Substitution,
};

/// One rewrite rule. Both sides are canonical; the left-hand side may be
/// cyclic (a rational pattern).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    pub lhs: CanonicalTerm,
    pub rhs: CanonicalTerm,
}

/// Rule validity violations, reported with the offending rule index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TrsError {
    LhsVariable {
        rule: usize,
    },
    FreshRhsVariable {
        rule: usize,
        name: String,
    },
    Arity {
        rule: usize,
        conflict: ArityConflict,
    },
}

impl fmt::Display for TrsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TrsError::LhsVariable { rule } => {
                write!(f, "rule {rule}: left-hand side is a variable")
            }
            TrsError::FreshRhsVariable { rule, name } => {
                write!(
                    f,
                    "rule {rule}: right-hand side variable '{name}' does not occur on the left"
                )
            }
            TrsError::Arity { rule, conflict } => write!(f, "rule {rule}: {conflict}"),
        }
    }
}

/// An ordered rule set with its inferred signature and declared variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trs {
    rules: Vec<Rule>,
    signature: Signature,
    declared_vars: BTreeSet<String>,
}

impl Trs {
    /// Validate the rules and infer the signature from their symbols.
    /// Variables used in rules are added to `declared_vars`.
    pub fn new(rules: Vec<Rule>, declared_vars: BTreeSet<String>) -> Result<Trs, TrsError> {
        let mut signature = Signature::new();
        let mut vars = declared_vars;
        for (index, rule) in rules.iter().enumerate() {
            if rule.lhs.is_var() {
                return Err(TrsError::LhsVariable { rule: index });
            }
            let lhs_vars = rule.lhs.variables();
            for name in rule.rhs.variables() {
                if !lhs_vars.contains(&name) {
                    return Err(TrsError::FreshRhsVariable { rule: index, name });
                }
            }
            vars.extend(lhs_vars);
            for side in [&rule.lhs, &rule.rhs] {
                for id in 0..side.node_count() {
                    if let Node::Fun { symbol, children } = side.node(id) {
                        signature
                            .declare(symbol, children.len())
                            .map_err(|conflict| TrsError::Arity {
                                rule: index,
                                conflict,
                            })?;
                    }
                }
            }
        }
        Ok(Trs {
            rules,
            signature,
            declared_vars: vars,
        })
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn declared_vars(&self) -> &BTreeSet<String> {
        &self.declared_vars
    }
}

/// A single recorded rewrite step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RewriteStep {
    pub position: Position,
    pub rule_index: usize,
    pub substitution: Substitution,
}

/// Why a requested step could not be taken.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RewriteError {
    BadRuleIndex {
        index: usize,
        count: usize,
    },
    InvalidPosition(InvalidPosition),
    NoMatch {
        position: Position,
        rule_index: usize,
    },
}

impl fmt::Display for RewriteError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RewriteError::BadRuleIndex { index, count } => {
                write!(
                    f,
                    "rule index {index} out of range (the system has {count} rules)"
                )
            }
            RewriteError::InvalidPosition(e) => e.fmt(f),
            RewriteError::NoMatch {
                position,
                rule_index,
            } => write!(f, "rule {rule_index} does not match at position {position}"),
        }
    }
}

impl From<InvalidPosition> for RewriteError {
    fn from(e: InvalidPosition) -> Self {
        RewriteError::InvalidPosition(e)
    }
}

/// Replay failure at a specific step index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReplayError {
    pub index: usize,
    pub cause: ReplayCause,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ReplayCause {
    Step(RewriteError),
    SubstitutionMismatch,
}

impl fmt::Display for ReplayError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.cause {
            ReplayCause::Step(e) => write!(f, "step {}: {e}", self.index),
            ReplayCause::SubstitutionMismatch => write!(
                f,
                "step {}: recorded substitution does not reproduce the match",
                self.index
            ),
        }
    }
}

/// Match `pattern` against `subject` starting at subject node `snode`.
///
/// Simultaneous traversal over (pattern node, subject node) pairs with a
/// visited set; the pair space is finite, so cyclic patterns and subjects
/// terminate. A pattern variable binds the subject node it meets; because
/// the subject is minimized, binding consistency for non-linear patterns is
/// plain node identity.
pub(crate) fn match_at(
    pattern: &CanonicalTerm,
    subject: &CanonicalTerm,
    snode: NodeId,
) -> Option<Substitution> {
    let mut binding: BTreeMap<&str, NodeId> = BTreeMap::new();
    let mut seen: BTreeSet<(NodeId, NodeId)> = BTreeSet::new();
    let mut stack = vec![(0usize, snode)];
    while let Some((p, s)) = stack.pop() {
        if !seen.insert((p, s)) {
            continue;
        }
        match pattern.node(p) {
            Node::Var { name } => match binding.get(name.as_str()) {
                Some(&prev) if prev != s => return None,
                Some(_) => {}
                None => {
                    binding.insert(name, s);
                }
            },
            Node::Fun { symbol, children } => match subject.node(s) {
                Node::Fun {
                    symbol: ssym,
                    children: schildren,
                } if symbol == ssym && children.len() == schildren.len() => {
                    stack.extend(children.iter().copied().zip(schildren.iter().copied()));
                }
                _ => return None,
            },
        }
    }
    let mut subst = Substitution::new();
    for (name, nid) in binding {
        subst.bind(name, subject.subgraph_at_node(nid));
    }
    Some(subst)
}

/// Match the whole subject against a pattern at its root.
pub fn match_root(pattern: &CanonicalTerm, subject: &CanonicalTerm) -> Option<Substitution> {
    match_at(pattern, subject, 0)
}

/// Apply rule `rule_index` at the root, if it matches.
///
/// Panics if `rule_index` is out of range.
pub fn root_step(t: &CanonicalTerm, trs: &Trs, rule_index: usize) -> Option<CanonicalTerm> {
    let rule = &trs.rules()[rule_index];
    match_root(&rule.lhs, t).map(|sigma| rule.rhs.apply(&sigma))
}

/// Apply rule `rule_index` at position `p`, copying the spine above `p` so
/// only that tree occurrence changes.
pub fn step_at(
    t: &CanonicalTerm,
    p: &Position,
    trs: &Trs,
    rule_index: usize,
) -> Result<CanonicalTerm, RewriteError> {
    let rule = trs
        .rules()
        .get(rule_index)
        .ok_or(RewriteError::BadRuleIndex {
            index: rule_index,
            count: trs.rules().len(),
        })?;

    // Node ids along the path, root first.
    let indices = p.indices();
    let mut ids = Vec::with_capacity(indices.len() + 1);
    ids.push(0usize);
    for (depth, &i) in indices.iter().enumerate() {
        let children = match t.node(ids[depth]) {
            Node::Fun { children, .. } => children,
            Node::Var { .. } => &[][..],
        };
        if i == 0 || i > children.len() {
            return Err(InvalidPosition {
                prefix: indices[..=depth].to_vec().into(),
            }
            .into());
        }
        ids.push(children[i - 1]);
    }

    let redex = ids[indices.len()];
    let sigma = match_at(&rule.lhs, t, redex).ok_or_else(|| RewriteError::NoMatch {
        position: p.clone(),
        rule_index,
    })?;
    let replacement = rule.rhs.apply(&sigma);

    let mut g = t.to_graph();
    let rid = g.import(&replacement);
    if indices.is_empty() {
        g.set_root(rid);
        return Ok(crate::term::canonicalize(&g));
    }
    let mut copies = Vec::with_capacity(indices.len());
    for &id in ids.iter().take(indices.len()) {
        let node = t.node(id).clone();
        copies.push(g.push_node(node));
    }
    for (k, &i) in indices.iter().enumerate() {
        let next = if k + 1 < indices.len() {
            copies[k + 1]
        } else {
            rid
        };
        g.set_child(copies[k], i - 1, next);
    }
    g.set_root(copies[0]);
    Ok(crate::term::canonicalize(&g))
}

/// All (position, rule index) pairs with position length < `depth_bound`
/// where the rule matches, in lexicographic order.
pub fn find_redexes(t: &CanonicalTerm, trs: &Trs, depth_bound: usize) -> Vec<(Position, usize)> {
    let mut out = Vec::new();
    for pos in t.positions_to_depth(depth_bound) {
        let node = t
            .node_at(&pos)
            .expect("positions_to_depth yields valid positions");
        for (i, rule) in trs.rules().iter().enumerate() {
            if match_at(&rule.lhs, t, node).is_some() {
                out.push((pos.clone(), i));
            }
        }
    }
    out
}

/// True iff no rule matches at any node of the term, hence at no position
/// of the (possibly infinite) unfolding.
pub fn is_normal_form(t: &CanonicalTerm, trs: &Trs) -> bool {
    (0..t.node_count()).all(|n| {
        trs.rules()
            .iter()
            .all(|rule| match_at(&rule.lhs, t, n).is_none())
    })
}

/// True iff every variable of every left-hand side occurs exactly once in
/// the tree unfolding: its variable node is not reachable from any cycle
/// and has exactly one path from the root.
pub fn is_left_linear(trs: &Trs) -> bool {
    trs.rules().iter().all(|rule| lhs_is_linear(&rule.lhs))
}

fn lhs_is_linear(lhs: &CanonicalTerm) -> bool {
    let n = lhs.node_count();
    let loops = lhs.loop_nodes();
    for v in 0..n {
        if !matches!(lhs.node(v), Node::Var { .. }) {
            continue;
        }
        // Nodes from which v is reachable.
        let mut reaches_v = BTreeSet::new();
        reaches_v.insert(v);
        loop {
            let mut grew = false;
            for m in 0..n {
                if reaches_v.contains(&m) {
                    continue;
                }
                if let Node::Fun { children, .. } = lhs.node(m) {
                    if children.iter().any(|c| reaches_v.contains(c)) {
                        reaches_v.insert(m);
                        grew = true;
                    }
                }
            }
            if !grew {
                break;
            }
        }
        if reaches_v.iter().any(|m| loops.contains(m)) {
            return false;
        }
        // The region reaching v is acyclic; count root-to-v paths in it.
        let mut count: BTreeMap<NodeId, u64> = BTreeMap::new();
        if paths_to(lhs, 0, v, &reaches_v, &mut count) != 1 {
            return false;
        }
    }
    true
}

fn paths_to(
    t: &CanonicalTerm,
    from: NodeId,
    target: NodeId,
    region: &BTreeSet<NodeId>,
    memo: &mut BTreeMap<NodeId, u64>,
) -> u64 {
    if from == target {
        return 1;
    }
    if let Some(&c) = memo.get(&from) {
        return c;
    }
    let mut total = 0u64;
    if let Node::Fun { children, .. } = t.node(from) {
        for &c in children {
            if region.contains(&c) {
                total = total.saturating_add(paths_to(t, c, target, region, memo));
            }
        }
    }
    memo.insert(from, total);
    total
}

/// Fold [`step_at`] over recorded steps, verifying at each step that the
/// recorded substitution reproduces the match.
pub fn replay(
    t: &CanonicalTerm,
    steps: &[RewriteStep],
    trs: &Trs,
) -> Result<CanonicalTerm, ReplayError> {
    let mut cur = t.clone();
    for (index, step) in steps.iter().enumerate() {
        let err = |cause| ReplayError { index, cause };
        let rule = trs.rules().get(step.rule_index).ok_or_else(|| {
            err(ReplayCause::Step(RewriteError::BadRuleIndex {
                index: step.rule_index,
                count: trs.rules().len(),
            }))
        })?;
        let node = cur
            .node_at(&step.position)
            .map_err(|e| err(ReplayCause::Step(e.into())))?;
        let sigma = match_at(&rule.lhs, &cur, node).ok_or_else(|| {
            err(ReplayCause::Step(RewriteError::NoMatch {
                position: step.position.clone(),
                rule_index: step.rule_index,
            }))
        })?;
        if sigma != step.substitution {
            return Err(err(ReplayCause::SubstitutionMismatch));
        }
        cur = step_at(&cur, &step.position, trs, step.rule_index)
            .map_err(|e| err(ReplayCause::Step(e)))?;
    }
    Ok(cur)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_term, parse_trs, SymbolPolicy};
    use crate::term::Distance;
    use alloc::string::ToString;
    use proptest::prelude::*;

    fn t(input: &str) -> CanonicalTerm {
        let mut sig = Signature::new();
        let vars = ["x", "y"].iter().map(|s| s.to_string()).collect();
        parse_term(input, &vars, SymbolPolicy::Extend(&mut sig)).unwrap()
    }

    fn trs_unroll() -> Trs {
        parse_trs("vars x ; a -> C(a) ;").unwrap()
    }

    fn trs_collapse() -> Trs {
        parse_trs("vars x ; f(x,x) -> D ; a -> C(a) ; b -> C(b) ;").unwrap()
    }

    fn trs_rollup() -> Trs {
        parse_trs("vars x ; C(a) -> a ;").unwrap()
    }

    #[test]
    fn match_root_frozen_examples() {
        let sigma = match_root(&t("f(x, x)"), &t("f(rec z . C(z), rec y . C(C(y)))")).unwrap();
        assert_eq!(sigma.get("x"), Some(&t("rec z . C(z)")));
        assert_eq!(sigma.len(), 1);

        assert!(match_root(&t("C(a)"), &t("rec z . C(z)")).is_none());

        let empty = match_root(&t("a"), &t("a")).unwrap();
        assert!(empty.is_empty());
    }

    #[test]
    fn match_binds_variables_to_variables() {
        let sigma = match_root(&t("C(x)"), &t("C(y)")).unwrap();
        assert_eq!(sigma.get("x"), Some(&t("y")));
    }

    #[test]
    fn nonlinear_match_requires_identical_arguments() {
        assert!(match_root(&t("f(x, x)"), &t("f(a, b)")).is_none());
        assert!(match_root(&t("f(x, x)"), &t("f(a, a)")).is_some());
    }

    #[test]
    fn cyclic_pattern_matches_cyclic_subject() {
        let sigma = match_root(&t("rec z . C(z)"), &t("rec z . C(z)")).unwrap();
        assert!(sigma.is_empty());
        assert!(match_root(&t("rec z . C(z)"), &t("C(a)")).is_none());
    }

    #[test]
    fn root_step_frozen_examples() {
        assert_eq!(root_step(&t("a"), &trs_unroll(), 0), Some(t("C(a)")));
        let fcc = t("f(rec z . C(z), rec z . C(z))");
        assert_eq!(root_step(&fcc, &trs_collapse(), 0), Some(t("D")));
        assert_eq!(root_step(&t("rec z . C(z)"), &trs_rollup(), 0), None);
    }

    #[test]
    fn step_at_frozen_examples() {
        let s = step_at(&t("f(a, b)"), &vec![1].into(), &trs_collapse(), 1).unwrap();
        assert_eq!(s, t("f(C(a), b)"));
        let s = step_at(&t("C(a)"), &vec![1].into(), &trs_unroll(), 0).unwrap();
        assert_eq!(s, t("C(C(a))"));
        let err = step_at(&t("rec z . C(z)"), &vec![1, 1].into(), &trs_rollup(), 0).unwrap_err();
        assert!(matches!(err, RewriteError::NoMatch { .. }));
    }

    #[test]
    fn step_at_changes_one_tree_occurrence_of_a_shared_node() {
        // f(C(a), C(a)) shares the C(a) node; stepping under child 1 must
        // leave child 2 alone.
        let shared = t("f(C(a), C(a))");
        let stepped = step_at(&shared, &vec![1, 1].into(), &trs_unroll(), 0).unwrap();
        assert_eq!(stepped, t("f(C(C(a)), C(a))"));
    }

    #[test]
    fn step_at_agrees_with_root_step_at_the_root() {
        let term = t("a");
        let via_root = root_step(&term, &trs_unroll(), 0).unwrap();
        let via_pos = step_at(&term, &Position::root(), &trs_unroll(), 0).unwrap();
        assert_eq!(via_root, via_pos);
    }

    #[test]
    fn step_at_reports_bad_positions_and_indices() {
        assert!(matches!(
            step_at(&t("a"), &vec![1].into(), &trs_unroll(), 0),
            Err(RewriteError::InvalidPosition(_))
        ));
        assert!(matches!(
            step_at(&t("a"), &Position::root(), &trs_unroll(), 7),
            Err(RewriteError::BadRuleIndex { index: 7, count: 1 })
        ));
    }

    #[test]
    fn find_redexes_frozen_examples() {
        let got = find_redexes(&t("f(a, b)"), &trs_collapse(), 2);
        assert_eq!(got, vec![(vec![1].into(), 1), (vec![2].into(), 2)]);
        assert!(find_redexes(&t("rec z . C(z)"), &trs_rollup(), 10).is_empty());
        assert_eq!(
            find_redexes(&t("a"), &trs_unroll(), 1),
            vec![(Position::root(), 0)]
        );
    }

    #[test]
    fn normal_form_frozen_examples() {
        assert!(is_normal_form(&t("rec z . C(z)"), &trs_rollup()));
        assert!(!is_normal_form(&t("a"), &trs_unroll()));
        assert!(is_normal_form(&t("D"), &trs_collapse()));
    }

    #[test]
    fn left_linearity_frozen_examples() {
        assert!(is_left_linear(
            &parse_trs("a -> C(a) ; b -> C(b) ;").unwrap()
        ));
        assert!(!is_left_linear(&trs_collapse()));
        assert!(is_left_linear(&parse_trs("vars x ; C(x) -> x ;").unwrap()));
    }

    #[test]
    fn left_linearity_sees_through_sharing_and_cycles() {
        // g(C(x), C(x)) shares one C(x) subgraph; the unfolding still has
        // two occurrences of x.
        let trs = parse_trs("vars x ; g(C(x), C(x)) -> x ;").unwrap();
        assert!(!is_left_linear(&trs));
        // A variable under a cycle occurs infinitely often.
        let trs = parse_trs("vars x ; rec y . C(f(x, y)) -> x ;").unwrap();
        assert!(!is_left_linear(&trs));
    }

    #[test]
    fn replay_frozen_examples() {
        let trs = trs_unroll();
        let step = |position: Position| RewriteStep {
            position,
            rule_index: 0,
            substitution: Substitution::new(),
        };
        let out = replay(
            &t("a"),
            &[step(Position::root()), step(vec![1].into())],
            &trs,
        )
        .unwrap();
        assert_eq!(out, t("C(C(a))"));

        assert_eq!(replay(&t("a"), &[], &trs).unwrap(), t("a"));

        let err = replay(&t("a"), &[step(vec![1].into())], &trs).unwrap_err();
        assert_eq!(err.index, 0);
        assert!(matches!(
            err.cause,
            ReplayCause::Step(RewriteError::InvalidPosition(_))
        ));
    }

    #[test]
    fn replay_rejects_wrong_substitutions() {
        let trs = parse_trs("vars x ; C(x) -> x ;").unwrap();
        let mut wrong = Substitution::new();
        wrong.bind("x", t("b"));
        let step = RewriteStep {
            position: Position::root(),
            rule_index: 0,
            substitution: wrong,
        };
        let err = replay(&t("C(a)"), &[step], &trs).unwrap_err();
        assert!(matches!(err.cause, ReplayCause::SubstitutionMismatch));
    }

    // Exhaustive matcher: try every assignment of pattern variables to
    // subject nodes and check the instantiated pattern against the subject.
    fn brute_force_match(pattern: &CanonicalTerm, subject: &CanonicalTerm) -> bool {
        let vars: Vec<String> = pattern.variables().into_iter().collect();
        let n = subject.node_count();
        let total = n.pow(vars.len() as u32);
        (0..total).any(|mut code| {
            let mut sigma = Substitution::new();
            for name in &vars {
                sigma.bind(name, subject.subgraph_at_node(code % n));
                code /= n;
            }
            pattern.apply(&sigma).bisimilar(subject)
        })
    }

    fn leaf() -> impl Strategy<Value = CanonicalTerm> {
        prop_oneof![
            Just(CanonicalTerm::fun("a", &[])),
            Just(CanonicalTerm::fun("b", &[])),
            Just(t("rec z . C(z)")),
        ]
    }

    fn subjects() -> impl Strategy<Value = CanonicalTerm> {
        leaf().prop_recursive(3, 8, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(|c| CanonicalTerm::fun("C", &[c])),
                (inner.clone(), inner).prop_map(|(l, r)| CanonicalTerm::fun("f", &[l, r])),
            ]
        })
    }

    fn patterns() -> impl Strategy<Value = CanonicalTerm> {
        let base = prop_oneof![
            leaf(),
            Just(CanonicalTerm::var("x")),
            Just(CanonicalTerm::var("y")),
        ];
        base.prop_recursive(2, 6, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(|c| CanonicalTerm::fun("C", &[c])),
                (inner.clone(), inner).prop_map(|(l, r)| CanonicalTerm::fun("f", &[l, r])),
            ]
        })
    }

    proptest! {
        #[test]
        fn matching_is_sound(pattern in patterns(), subject in subjects()) {
            if let Some(sigma) = match_root(&pattern, &subject) {
                prop_assert!(pattern.apply(&sigma).bisimilar(&subject));
            }
        }

        #[test]
        fn matching_agrees_with_brute_force(pattern in patterns(), subject in subjects()) {
            prop_assert_eq!(
                match_root(&pattern, &subject).is_some(),
                brute_force_match(&pattern, &subject)
            );
        }

        #[test]
        fn steps_move_distance_below_one(term in subjects()) {
            let trs = trs_unroll();
            for (pos, rule) in find_redexes(&term, &trs, 3) {
                let stepped = step_at(&term, &pos, &trs, rule).unwrap();
                // A step at depth d only changes levels >= d.
                if !pos.is_empty() {
                    match term.distance(&stepped) {
                        Distance::Zero => {}
                        Distance::Exponent(e) => prop_assert!(e >= pos.len()),
                    }
                }
            }
        }

        #[test]
        fn step_at_changes_nothing_outside_the_position(term in subjects()) {
            let trs = trs_unroll();
            for (pos, rule) in find_redexes(&term, &trs, 3) {
                let stepped = step_at(&term, &pos, &trs, rule).unwrap();
                for q in term.positions_to_depth(pos.len() + 1) {
                    if q.len() <= pos.len() && !q.is_prefix_of(&pos) {
                        prop_assert!(term
                            .subterm_at(&q)
                            .unwrap()
                            .bisimilar(&stepped.subterm_at(&q).unwrap()));
                    }
                }
            }
        }
    }
}
