//! Rational terms as canonical term graphs.
//!
//! A term is kept as a finite graph whose cycles encode infinite unfoldings.
//! [`canonicalize`] quotients a graph by bisimilarity and renumbers nodes
//! depth-first, so two canonical terms denote the same (possibly infinite)
//! tree exactly when they are structurally equal.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

/// A function symbol with a fixed arity.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Symbol {
    pub name: String,
    pub arity: usize,
}

/// A finite set of symbols with pairwise distinct names.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Signature {
    arities: BTreeMap<String, usize>,
}

/// Attempt to declare a symbol name at two different arities.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArityConflict {
    pub symbol: String,
    pub existing: usize,
    pub proposed: usize,
}

impl fmt::Display for ArityConflict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "symbol '{}' used with arity {} but previously with arity {}",
            self.symbol, self.proposed, self.existing
        )
    }
}

impl Signature {
    pub fn new() -> Self {
        Self::default()
    }

    /// Record `name` at `arity`, rejecting a conflicting earlier declaration.
    pub fn declare(&mut self, name: &str, arity: usize) -> Result<(), ArityConflict> {
        match self.arities.get(name) {
            Some(&existing) if existing != arity => Err(ArityConflict {
                symbol: name.to_string(),
                existing,
                proposed: arity,
            }),
            Some(_) => Ok(()),
            None => {
                self.arities.insert(name.to_string(), arity);
                Ok(())
            }
        }
    }

    pub fn arity(&self, name: &str) -> Option<usize> {
        self.arities.get(name).copied()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.arities.contains_key(name)
    }

    pub fn symbols(&self) -> impl Iterator<Item = Symbol> + '_ {
        self.arities.iter().map(|(name, &arity)| Symbol {
            name: name.clone(),
            arity,
        })
    }

    pub fn len(&self) -> usize {
        self.arities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arities.is_empty()
    }
}

/// Index of a node within its graph.
pub type NodeId = usize;

/// One node of a term graph.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Node {
    Fun {
        symbol: String,
        children: Vec<NodeId>,
    },
    Var {
        name: String,
    },
}

impl Node {
    fn children(&self) -> &[NodeId] {
        match self {
            Node::Fun { children, .. } => children,
            Node::Var { .. } => &[],
        }
    }

    /// Label identity ignoring child targets: kind, name, child count.
    fn label(&self) -> (u8, &str, usize) {
        match self {
            Node::Fun { symbol, children } => (0, symbol, children.len()),
            Node::Var { name } => (1, name, 0),
        }
    }
}

/// A term graph under construction. Node ids are insertion indices; the
/// graph may contain unreachable nodes and duplicated subterms, both of
/// which [`canonicalize`] eliminates.
#[derive(Clone, Debug, Default)]
pub struct TermGraph {
    nodes: Vec<Node>,
    root: NodeId,
}

impl TermGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_fun(&mut self, symbol: &str, children: Vec<NodeId>) -> NodeId {
        self.push_node(Node::Fun {
            symbol: symbol.to_string(),
            children,
        })
    }

    pub fn add_var(&mut self, name: &str) -> NodeId {
        self.push_node(Node::Var {
            name: name.to_string(),
        })
    }

    pub(crate) fn push_node(&mut self, node: Node) -> NodeId {
        self.nodes.push(node);
        self.nodes.len() - 1
    }

    pub fn set_root(&mut self, root: NodeId) {
        self.root = root;
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Set a child slot after the fact; used when tying cycles.
    pub fn set_child(&mut self, parent: NodeId, index: usize, child: NodeId) {
        match &mut self.nodes[parent] {
            Node::Fun { children, .. } => children[index] = child,
            Node::Var { .. } => panic!("variables have no children"),
        }
    }

    /// Redirect every reference to `from` (child slots and the root) to `to`.
    pub(crate) fn redirect(&mut self, from: NodeId, to: NodeId) {
        for node in &mut self.nodes {
            if let Node::Fun { children, .. } = node {
                for c in children {
                    if *c == from {
                        *c = to;
                    }
                }
            }
        }
        if self.root == from {
            self.root = to;
        }
    }

    /// Append all nodes of a canonical term; returns the id of its root.
    pub(crate) fn import(&mut self, t: &CanonicalTerm) -> NodeId {
        let offset = self.nodes.len();
        for node in &t.nodes {
            let shifted = match node {
                Node::Fun { symbol, children } => Node::Fun {
                    symbol: symbol.clone(),
                    children: children.iter().map(|c| c + offset).collect(),
                },
                Node::Var { name } => Node::Var { name: name.clone() },
            };
            self.nodes.push(shifted);
        }
        offset
    }

    fn reachable(&self) -> Vec<NodeId> {
        let mut seen = vec![false; self.nodes.len()];
        let mut order = Vec::new();
        let mut stack = vec![self.root];
        while let Some(n) = stack.pop() {
            if seen[n] {
                continue;
            }
            seen[n] = true;
            order.push(n);
            for &c in self.nodes[n].children().iter().rev() {
                if !seen[c] {
                    stack.push(c);
                }
            }
        }
        order
    }
}

/// A bisimulation-minimized term graph with deterministic node numbering.
///
/// The root is node 0 and ids follow a depth-first, children left to right
/// traversal, so structural equality coincides with bisimilarity.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonicalTerm {
    nodes: Vec<Node>,
}

/// Minimize `g` by partition refinement and renumber nodes depth-first.
pub fn canonicalize(g: &TermGraph) -> CanonicalTerm {
    assert!(!g.is_empty(), "cannot canonicalize an empty graph");
    let reach = g.reachable();

    // Coarsest partition by label, then split on child classes until stable.
    let mut label_ids: BTreeMap<(u8, &str, usize), usize> = BTreeMap::new();
    let mut class: BTreeMap<NodeId, usize> = BTreeMap::new();
    for &n in &reach {
        let next = label_ids.len();
        let id = *label_ids.entry(g.nodes[n].label()).or_insert(next);
        class.insert(n, id);
    }
    let mut count = label_ids.len();
    loop {
        let mut table: BTreeMap<(usize, Vec<usize>), usize> = BTreeMap::new();
        let mut next: BTreeMap<NodeId, usize> = BTreeMap::new();
        for &n in &reach {
            let key = (
                class[&n],
                g.nodes[n].children().iter().map(|c| class[c]).collect(),
            );
            let fresh = table.len();
            let id = *table.entry(key).or_insert(fresh);
            next.insert(n, id);
        }
        let stable = table.len() == count;
        count = table.len();
        class = next;
        if stable {
            break;
        }
    }

    // Quotient template per class: label and child classes from any member
    // (stability makes the choice irrelevant).
    let mut template: BTreeMap<usize, (Node, Vec<usize>)> = BTreeMap::new();
    for &n in &reach {
        template.entry(class[&n]).or_insert_with(|| {
            (
                g.nodes[n].clone(),
                g.nodes[n].children().iter().map(|c| class[c]).collect(),
            )
        });
    }

    // Depth-first rank per class, children left to right.
    let mut rank: BTreeMap<usize, usize> = BTreeMap::new();
    let mut order: Vec<usize> = Vec::new();
    let mut stack = vec![class[&g.root]];
    while let Some(c) = stack.pop() {
        if rank.contains_key(&c) {
            continue;
        }
        rank.insert(c, order.len());
        order.push(c);
        for cc in template[&c].1.iter().rev() {
            if !rank.contains_key(cc) {
                stack.push(*cc);
            }
        }
    }

    let nodes = order
        .iter()
        .map(|c| {
            let (node, child_classes) = &template[c];
            match node {
                Node::Fun { symbol, .. } => Node::Fun {
                    symbol: symbol.clone(),
                    children: child_classes.iter().map(|cc| rank[cc]).collect(),
                },
                Node::Var { name } => Node::Var { name: name.clone() },
            }
        })
        .collect();
    CanonicalTerm { nodes }
}

/// Term metric outcome: distance 0, or 2^−n for the reported exponent n.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Distance {
    Zero,
    Exponent(usize),
}

/// A path of 1-based child indices from the root.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Position(Vec<usize>);

impl Position {
    pub fn root() -> Self {
        Self::default()
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_prefix_of(&self, other: &Position) -> bool {
        other.0.len() >= self.0.len() && other.0[..self.0.len()] == self.0[..]
    }
}

impl From<Vec<usize>> for Position {
    fn from(indices: Vec<usize>) -> Self {
        Position(indices)
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("\u{03b5}");
        }
        let parts: Vec<String> = self.0.iter().map(|i| i.to_string()).collect();
        f.write_str(&parts.join("."))
    }
}

/// Malformed textual position.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PositionParseError {
    pub input: String,
}

impl fmt::Display for PositionParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid position '{}'", self.input)
    }
}

impl FromStr for Position {
    type Err = PositionParseError;

    /// Accepts "ε" or the empty string for the root, else dot-separated
    /// 1-based indices such as "1.2.1".
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() || s == "\u{03b5}" {
            return Ok(Position::root());
        }
        let mut indices = Vec::new();
        for part in s.split('.') {
            match part.trim().parse::<usize>() {
                Ok(i) if i >= 1 => indices.push(i),
                _ => {
                    return Err(PositionParseError {
                        input: s.to_string(),
                    })
                }
            }
        }
        Ok(Position(indices))
    }
}

/// A position that does not exist in the inspected term.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvalidPosition {
    /// The shortest failing prefix of the requested position.
    pub prefix: Position,
}

impl fmt::Display for InvalidPosition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "position {} does not exist in the term", self.prefix)
    }
}

/// A finite map from variable names to canonical terms.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Substitution {
    map: BTreeMap<String, CanonicalTerm>,
}

impl Substitution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn bind(&mut self, name: &str, term: CanonicalTerm) -> Option<CanonicalTerm> {
        self.map.insert(name.to_string(), term)
    }

    pub fn get(&self, name: &str) -> Option<&CanonicalTerm> {
        self.map.get(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &CanonicalTerm)> {
        self.map.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn domain(&self) -> impl Iterator<Item = &str> {
        self.map.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

impl CanonicalTerm {
    /// Build `symbol(args...)` from canonical arguments.
    pub fn fun(symbol: &str, args: &[CanonicalTerm]) -> CanonicalTerm {
        let mut g = TermGraph::new();
        let children: Vec<NodeId> = args.iter().map(|a| g.import(a)).collect();
        let root = g.add_fun(symbol, children);
        g.set_root(root);
        canonicalize(&g)
    }

    /// Build a bare variable.
    pub fn var(name: &str) -> CanonicalTerm {
        let mut g = TermGraph::new();
        let root = g.add_var(name);
        g.set_root(root);
        canonicalize(&g)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }

    pub fn root_node(&self) -> &Node {
        &self.nodes[0]
    }

    pub fn is_var(&self) -> bool {
        matches!(self.nodes[0], Node::Var { .. })
    }

    /// Head symbol and child node ids, or None for a variable.
    pub fn head(&self) -> Option<(&str, &[NodeId])> {
        match &self.nodes[0] {
            Node::Fun { symbol, children } => Some((symbol, children)),
            Node::Var { .. } => None,
        }
    }

    /// View the term as a graph again, e.g. to splice it into another one.
    pub fn to_graph(&self) -> TermGraph {
        TermGraph {
            nodes: self.nodes.clone(),
            root: 0,
        }
    }

    /// Coinductive equality: related nodes carry equal labels and pairwise
    /// related children. Equivalent to `==` on canonical terms; kept as an
    /// independent traversal so the two routes can cross-check each other.
    pub fn bisimilar(&self, other: &CanonicalTerm) -> bool {
        let mut seen: BTreeSet<(NodeId, NodeId)> = BTreeSet::new();
        let mut stack = vec![(0usize, 0usize)];
        while let Some((a, b)) = stack.pop() {
            if !seen.insert((a, b)) {
                continue;
            }
            match (&self.nodes[a], &other.nodes[b]) {
                (
                    Node::Fun {
                        symbol: f,
                        children: cs,
                    },
                    Node::Fun {
                        symbol: g,
                        children: ds,
                    },
                ) if f == g && cs.len() == ds.len() => {
                    stack.extend(cs.iter().copied().zip(ds.iter().copied()));
                }
                (Node::Var { name: x }, Node::Var { name: y }) if x == y => {}
                _ => return false,
            }
        }
        true
    }

    /// Agreement of the unfoldings on all levels strictly below `d`.
    pub fn truncated_bisimilar(&self, other: &CanonicalTerm, d: usize) -> bool {
        fn go(
            s: &CanonicalTerm,
            t: &CanonicalTerm,
            a: NodeId,
            b: NodeId,
            d: usize,
            memo: &mut BTreeMap<(NodeId, NodeId, usize), bool>,
        ) -> bool {
            if d == 0 {
                return true;
            }
            if let Some(&r) = memo.get(&(a, b, d)) {
                return r;
            }
            let r = match (&s.nodes[a], &t.nodes[b]) {
                (
                    Node::Fun {
                        symbol: f,
                        children: cs,
                    },
                    Node::Fun {
                        symbol: g,
                        children: ds,
                    },
                ) if f == g && cs.len() == ds.len() => cs
                    .iter()
                    .zip(ds)
                    .all(|(&c, &e)| go(s, t, c, e, d - 1, memo)),
                (Node::Var { name: x }, Node::Var { name: y }) => x == y,
                _ => false,
            };
            memo.insert((a, b, d), r);
            r
        }
        go(self, other, 0, 0, d, &mut BTreeMap::new())
    }

    /// The metric: Zero when bisimilar, else the first disagreeing level n
    /// (read as distance 2^−n).
    pub fn distance(&self, other: &CanonicalTerm) -> Distance {
        if self.bisimilar(other) {
            return Distance::Zero;
        }
        let mut n = 0;
        while self.truncated_bisimilar(other, n + 1) {
            n += 1;
        }
        Distance::Exponent(n)
    }

    pub(crate) fn node_at(&self, p: &Position) -> Result<NodeId, InvalidPosition> {
        let mut cur = 0;
        for (depth, &i) in p.indices().iter().enumerate() {
            let children = self.nodes[cur].children();
            if i == 0 || i > children.len() {
                return Err(InvalidPosition {
                    prefix: Position(p.indices()[..=depth].to_vec()),
                });
            }
            cur = children[i - 1];
        }
        Ok(cur)
    }

    /// Extract the canonical term rooted at an inner node.
    pub(crate) fn subgraph_at_node(&self, n: NodeId) -> CanonicalTerm {
        let g = TermGraph {
            nodes: self.nodes.clone(),
            root: n,
        };
        canonicalize(&g)
    }

    /// The subterm at position `p`.
    pub fn subterm_at(&self, p: &Position) -> Result<CanonicalTerm, InvalidPosition> {
        Ok(self.subgraph_at_node(self.node_at(p)?))
    }

    /// Names of all variables occurring in the term.
    pub fn variables(&self) -> BTreeSet<String> {
        self.nodes
            .iter()
            .filter_map(|n| match n {
                Node::Var { name } => Some(name.clone()),
                Node::Fun { .. } => None,
            })
            .collect()
    }

    /// Graft `subst` bindings over the variables of the term.
    pub fn apply(&self, subst: &Substitution) -> CanonicalTerm {
        if subst.is_empty() {
            return self.clone();
        }
        let mut g = self.to_graph();
        for (i, node) in self.nodes.iter().enumerate() {
            if let Node::Var { name } = node {
                if let Some(binding) = subst.get(name) {
                    let imported = g.import(binding);
                    g.redirect(i, imported);
                }
            }
        }
        canonicalize(&g)
    }

    /// All positions of length < `d`, in lexicographic order.
    pub fn positions_to_depth(&self, d: usize) -> BTreeSet<Position> {
        let mut out = BTreeSet::new();
        let mut queue = vec![(0usize, Vec::new())];
        while let Some((n, pos)) = queue.pop() {
            if pos.len() >= d {
                continue;
            }
            for (i, &c) in self.nodes[n].children().iter().enumerate().rev() {
                let mut child_pos = pos.clone();
                child_pos.push(i + 1);
                queue.push((c, child_pos));
            }
            out.insert(Position(pos));
        }
        out
    }

    /// Nodes lying on a cycle, i.e. reachable from themselves.
    pub(crate) fn loop_nodes(&self) -> BTreeSet<NodeId> {
        let mut loops = BTreeSet::new();
        for start in 0..self.nodes.len() {
            let mut stack: Vec<NodeId> = self.nodes[start].children().to_vec();
            let mut seen = BTreeSet::new();
            while let Some(n) = stack.pop() {
                if n == start {
                    loops.insert(start);
                    break;
                }
                if seen.insert(n) {
                    stack.extend(self.nodes[n].children());
                }
            }
        }
        loops
    }
}

impl fmt::Display for CanonicalTerm {
    /// Prints the tree unfolding, opening `rec %k . …` binders at cycle
    /// re-entry nodes; `%k` names are numbered in first-visit order.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn go(
            t: &CanonicalTerm,
            n: NodeId,
            loops: &BTreeSet<NodeId>,
            active: &mut BTreeMap<NodeId, usize>,
            counter: &mut usize,
            f: &mut fmt::Formatter<'_>,
        ) -> fmt::Result {
            if let Some(k) = active.get(&n) {
                return write!(f, "%{k}");
            }
            let binder = loops.contains(&n);
            if binder {
                let k = *counter;
                *counter += 1;
                active.insert(n, k);
                write!(f, "rec %{k} . ")?;
            }
            match &t.nodes[n] {
                Node::Var { name } => f.write_str(name)?,
                Node::Fun { symbol, children } => {
                    f.write_str(symbol)?;
                    if !children.is_empty() {
                        f.write_str("(")?;
                        for (i, &c) in children.iter().enumerate() {
                            if i > 0 {
                                f.write_str(", ")?;
                            }
                            go(t, c, loops, active, counter, f)?;
                        }
                        f.write_str(")")?;
                    }
                }
            }
            if binder {
                active.remove(&n);
            }
            Ok(())
        }
        let loops = self.loop_nodes();
        go(self, 0, &loops, &mut BTreeMap::new(), &mut 0, f)
    }
}
