//! Exact fixed-point computation of the three infinitary relations over a
//! finite, child-closed universe of canonical terms, with post-fixed-point
//! checking and certificate extraction.
//!
//! The relation lattice over a finite universe is finite, so Kleene
//! iteration computes least and greatest fixed points exactly: downward
//! from the full relation for the coinductive modes, and for infinitary
//! reduction an inductive outer iteration from the empty relation whose
//! body is itself a coinductive inner iteration. The outer stages are kept;
//! extraction walks them backwards to rebuild a checkable certificate, and
//! the stage numbers are what guarantee its marked references are acyclic.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::certificate::{Certificate, JudgmentNode, Mode, StepItem};
use crate::term::{CanonicalTerm, Node};
use crate::trs::{root_step, Trs};

/// Head shape of a universe member, with children resolved to universe
/// indices.
#[derive(Clone, Debug, PartialEq, Eq)]
enum HeadInfo {
    Fun {
        symbol: String,
        children: Vec<usize>,
    },
    Var,
}

/// A finite ordered set of distinct canonical terms, closed under immediate
/// subterms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Universe {
    terms: Vec<CanonicalTerm>,
    heads: Vec<HeadInfo>,
    index: BTreeMap<CanonicalTerm, usize>,
}

/// The smallest universe containing `seeds`: children are appended in
/// discovery order after the (deduplicated) seeds.
pub fn close_universe(seeds: &[CanonicalTerm]) -> Universe {
    let mut terms: Vec<CanonicalTerm> = Vec::new();
    let mut index: BTreeMap<CanonicalTerm, usize> = BTreeMap::new();
    let add = |t: CanonicalTerm,
               terms: &mut Vec<CanonicalTerm>,
               index: &mut BTreeMap<CanonicalTerm, usize>| {
        if !index.contains_key(&t) {
            index.insert(t.clone(), terms.len());
            terms.push(t);
        }
    };
    for seed in seeds {
        add(seed.clone(), &mut terms, &mut index);
    }
    let mut i = 0;
    while i < terms.len() {
        let t = terms[i].clone();
        if let Node::Fun { children, .. } = t.root_node() {
            for &c in children.clone().iter() {
                add(t.subgraph_at_node(c), &mut terms, &mut index);
            }
        }
        i += 1;
    }
    let heads = terms
        .iter()
        .map(|t| match t.root_node() {
            Node::Fun { symbol, children } => HeadInfo::Fun {
                symbol: symbol.clone(),
                children: children
                    .iter()
                    .map(|&c| index[&t.subgraph_at_node(c)])
                    .collect(),
            },
            Node::Var { .. } => HeadInfo::Var,
        })
        .collect();
    Universe {
        terms,
        heads,
        index,
    }
}

impl Universe {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[CanonicalTerm] {
        &self.terms
    }

    pub fn term(&self, i: usize) -> &CanonicalTerm {
        &self.terms[i]
    }

    pub fn index_of(&self, t: &CanonicalTerm) -> Option<usize> {
        self.index.get(t).copied()
    }
}

/// A binary relation on universe indices as a dense bit matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Relation {
    n: usize,
    words: usize,
    rows: Vec<u64>,
}

impl Relation {
    pub fn empty(n: usize) -> Relation {
        let words = n.div_ceil(64);
        Relation {
            n,
            words,
            rows: vec![0; n * words],
        }
    }

    pub fn full(n: usize) -> Relation {
        let mut r = Relation::empty(n);
        for i in 0..n {
            for w in 0..r.words {
                let hi = ((w + 1) * 64).min(n);
                let lo = w * 64;
                let mask = if hi - lo == 64 {
                    u64::MAX
                } else {
                    (1u64 << (hi - lo)) - 1
                };
                r.rows[i * r.words + w] = mask;
            }
        }
        r
    }

    pub fn identity(n: usize) -> Relation {
        let mut r = Relation::empty(n);
        for i in 0..n {
            r.set(i, i);
        }
        r
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        debug_assert!(i < self.n && j < self.n);
        self.rows[i * self.words + j / 64] >> (j % 64) & 1 == 1
    }

    pub fn set(&mut self, i: usize, j: usize) {
        debug_assert!(i < self.n && j < self.n);
        self.rows[i * self.words + j / 64] |= 1 << (j % 64);
    }

    pub fn union(&self, other: &Relation) -> Relation {
        assert_eq!(self.n, other.n, "relations over different universes");
        let mut out = self.clone();
        for (o, w) in out.rows.iter_mut().zip(&other.rows) {
            *o |= w;
        }
        out
    }

    /// Sequential composition: (i,k) when some j has self(i,j) and
    /// other(j,k). Row of the result is the union of `other`'s rows picked
    /// by the bits of `self`'s row.
    pub fn compose(&self, other: &Relation) -> Relation {
        assert_eq!(self.n, other.n, "relations over different universes");
        let mut out = Relation::empty(self.n);
        for i in 0..self.n {
            for w in 0..self.words {
                let mut bits = self.rows[i * self.words + w];
                while bits != 0 {
                    let j = w * 64 + bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    for v in 0..self.words {
                        out.rows[i * self.words + v] |= other.rows[j * self.words + v];
                    }
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> Relation {
        let mut out = Relation::empty(self.n);
        for (i, j) in self.pairs() {
            out.set(j, i);
        }
        out
    }

    /// Reflexive-transitive closure.
    pub fn rtc(&self) -> Relation {
        let mut out = self.clone();
        for k in 0..self.n {
            for i in 0..self.n {
                if out.get(i, k) && i != k {
                    for w in 0..self.words {
                        let row_k = out.rows[k * self.words + w];
                        out.rows[i * self.words + w] |= row_k;
                    }
                }
            }
        }
        for i in 0..self.n {
            out.set(i, i);
        }
        out
    }

    pub fn is_subset(&self, other: &Relation) -> bool {
        assert_eq!(self.n, other.n, "relations over different universes");
        self.rows.iter().zip(&other.rows).all(|(a, b)| a & !b == 0)
    }

    /// All related pairs in ascending order.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for w in 0..self.words {
                let mut bits = self.rows[i * self.words + w];
                while bits != 0 {
                    out.push((i, w * 64 + bits.trailing_zeros() as usize));
                    bits &= bits - 1;
                }
            }
        }
        out
    }

    pub fn count(&self) -> usize {
        self.rows.iter().map(|w| w.count_ones() as usize).sum()
    }
}

/// Reflexive-transitive closure, as a free function.
pub fn rtc_relation(r: &Relation) -> Relation {
    r.rtc()
}

/// The lifting of a relation: the identity plus all pairs with a shared
/// head whose children are pointwise related.
pub fn lift_relation(u: &Universe, r: &Relation) -> Relation {
    assert_eq!(u.len(), r.size(), "relation not over this universe");
    let mut out = Relation::identity(u.len());
    for i in 0..u.len() {
        let HeadInfo::Fun {
            symbol: fi,
            children: ci,
        } = &u.heads[i]
        else {
            continue;
        };
        for j in 0..u.len() {
            let HeadInfo::Fun {
                symbol: fj,
                children: cj,
            } = &u.heads[j]
            else {
                continue;
            };
            if fi == fj && ci.len() == cj.len() && ci.iter().zip(cj).all(|(&a, &b)| r.get(a, b)) {
                out.set(i, j);
            }
        }
    }
    out
}

/// One root step whose result left the universe.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Escape {
    pub source: CanonicalTerm,
    pub rule: usize,
    pub result: CanonicalTerm,
}

/// All dropped out-of-universe root steps, in (term index, rule index)
/// scan order.
pub type EscapeReport = Vec<Escape>;

/// The root step relation restricted to the universe, with everything that
/// stepped outside reported rather than silently dropped.
pub fn root_step_relation(u: &Universe, trs: &Trs) -> (Relation, EscapeReport) {
    let mut rel = Relation::empty(u.len());
    let mut escapes = Vec::new();
    for (i, term) in u.terms.iter().enumerate() {
        for rule in 0..trs.rules().len() {
            if let Some(result) = root_step(term, trs, rule) {
                match u.index_of(&result) {
                    Some(j) => rel.set(i, j),
                    None => escapes.push(Escape {
                        source: term.clone(),
                        rule,
                        result,
                    }),
                }
            }
        }
    }
    (rel, escapes)
}

/// Lattice height plus one: every monotone Kleene iteration stabilizes
/// within this many rounds.
fn iteration_cap(n: usize) -> usize {
    n * n + 1
}

/// Greatest fixed point of y = rtc(base ∪ lift(y)) where base is the root
/// step relation (BiInf) or its symmetric closure (EqInf).
///
/// Panics when called with `Mode::Ired`; that relation is a least fixed
/// point, computed by [`lfp_ired`].
pub fn gfp_relation(u: &Universe, trs: &Trs, mode: Mode) -> Relation {
    assert!(
        mode != Mode::Ired,
        "gfp_relation computes the coinductive modes; use lfp_ired for ired"
    );
    let (step, _) = root_step_relation(u, trs);
    let base = match mode {
        Mode::BiInf => step,
        Mode::EqInf => step.union(&step.transpose()),
        Mode::Ired => unreachable!(),
    };
    let mut y = Relation::full(u.len());
    for _ in 0..=iteration_cap(u.len()) {
        let next = base.union(&lift_relation(u, &y)).rtc();
        if next == y {
            return y;
        }
        y = next;
    }
    unreachable!("descending iteration exceeded the lattice height");
}

/// Inner coinductive iteration: greatest y with
/// y = rtc(base ∪ lift(x)) ∘ lift(y).
fn inner_gfp(u: &Universe, base: &Relation, x: &Relation) -> Relation {
    let star = base.union(&lift_relation(u, x)).rtc();
    let mut y = Relation::full(u.len());
    for _ in 0..=iteration_cap(u.len()) {
        let next = star.compose(&lift_relation(u, &y));
        if next == y {
            return y;
        }
        y = next;
    }
    unreachable!("descending iteration exceeded the lattice height");
}

/// The infinitary reduction analysis: the computed relation plus the outer
/// iteration stages it went through, kept for certificate extraction.
pub struct IredAnalysis<'a> {
    universe: &'a Universe,
    trs: &'a Trs,
    base: Relation,
    escapes: EscapeReport,
    /// stages[k] is the k-th outer iterate; stages[0] is empty and the last
    /// entry is the least fixed point.
    stages: Vec<Relation>,
}

impl<'a> IredAnalysis<'a> {
    /// Run the nested fixed-point iteration to stabilization.
    pub fn new(universe: &'a Universe, trs: &'a Trs) -> IredAnalysis<'a> {
        let (base, escapes) = root_step_relation(universe, trs);
        let mut stages = vec![Relation::empty(universe.len())];
        for _ in 0..=iteration_cap(universe.len()) {
            let x = stages.last().expect("stage 0 present");
            let next = inner_gfp(universe, &base, x);
            if next == *x {
                return IredAnalysis {
                    universe,
                    trs,
                    base,
                    escapes,
                    stages,
                };
            }
            stages.push(next);
        }
        unreachable!("ascending iteration exceeded the lattice height");
    }

    /// The computed relation (the last stage).
    pub fn relation(&self) -> &Relation {
        self.stages.last().expect("stage 0 present")
    }

    pub fn escapes(&self) -> &EscapeReport {
        &self.escapes
    }

    pub fn universe(&self) -> &Universe {
        self.universe
    }

    /// The first outer stage containing the pair, if any.
    pub fn stage_of(&self, i: usize, j: usize) -> Option<usize> {
        (1..self.stages.len()).find(|&k| self.stages[k].get(i, j))
    }

    /// Rebuild a checkable certificate for a pair of universe terms.
    pub fn extract(
        &self,
        s: &CanonicalTerm,
        t: &CanonicalTerm,
    ) -> Result<Certificate, ExtractError> {
        let i = self
            .universe
            .index_of(s)
            .ok_or_else(|| ExtractError::TermOutsideUniverse(s.clone()))?;
        let j = self
            .universe
            .index_of(t)
            .ok_or_else(|| ExtractError::TermOutsideUniverse(t.clone()))?;
        if self.stage_of(i, j).is_none() {
            return Err(ExtractError::PairNotInRelation);
        }
        let mut builder = Builder {
            analysis: self,
            nodes: BTreeMap::new(),
            memo: BTreeMap::new(),
            next_id: 0,
            id_node: None,
        };
        let root = builder.split_for(i, j);
        Ok(Certificate {
            mode: Mode::Ired,
            nodes: builder.nodes,
            root,
        })
    }
}

/// Extraction failures.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExtractError {
    TermOutsideUniverse(CanonicalTerm),
    PairNotInRelation,
}

impl core::fmt::Display for ExtractError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ExtractError::TermOutsideUniverse(t) => {
                write!(f, "term {t} is not in the universe")
            }
            ExtractError::PairNotInRelation => {
                write!(f, "the pair is not in the computed relation")
            }
        }
    }
}

/// The least fixed point of F(x) = νy. rtc(→ε ∪ lift(x)) ∘ lift(y): the
/// infinitary reduction relation restricted to the universe.
pub fn lfp_ired(u: &Universe, trs: &Trs) -> Relation {
    IredAnalysis::new(u, trs).relation().clone()
}

/// Extract a certificate for (s, t) from the infinitary reduction analysis
/// of the universe.
pub fn extract_certificate(
    u: &Universe,
    trs: &Trs,
    s: &CanonicalTerm,
    t: &CanonicalTerm,
) -> Result<Certificate, ExtractError> {
    IredAnalysis::new(u, trs).extract(s, t)
}

/// Decide R ⊆ rtc(→ε ∪ lift(x)) ∘ lift(R) by direct matrix evaluation.
pub fn check_post_fixed_point(u: &Universe, trs: &Trs, x: &Relation, r: &Relation) -> bool {
    let (base, _) = root_step_relation(u, trs);
    let rhs = base
        .union(&lift_relation(u, x))
        .rtc()
        .compose(&lift_relation(u, r));
    r.is_subset(&rhs)
}

struct Builder<'b, 'a> {
    analysis: &'b IredAnalysis<'a>,
    nodes: BTreeMap<u64, JudgmentNode>,
    memo: BTreeMap<(usize, usize), u64>,
    next_id: u64,
    id_node: Option<u64>,
}

impl Builder<'_, '_> {
    fn fresh_id(&mut self) -> u64 {
        let id = self.next_id;
        self.next_id += 1;
        id
    }

    fn shared_id_node(&mut self) -> u64 {
        if let Some(id) = self.id_node {
            return id;
        }
        let id = self.fresh_id();
        self.nodes.insert(id, JudgmentNode::Id);
        self.id_node = Some(id);
        id
    }

    /// Child node proving the pair: the shared Id node when reflexive, else
    /// the pair's Split.
    fn child_proof(&mut self, a: usize, b: usize) -> u64 {
        if a == b {
            self.shared_id_node()
        } else {
            self.split_for(a, b)
        }
    }

    /// The Split node proving (i, j), built once per pair. The node id is
    /// reserved before the body is built so that cycles through unmarked
    /// final lifts can point back to it.
    fn split_for(&mut self, i: usize, j: usize) -> u64 {
        if let Some(&id) = self.memo.get(&(i, j)) {
            return id;
        }
        let id = self.fresh_id();
        self.memo.insert((i, j), id);

        let u = self.analysis.universe;
        let k = self
            .analysis
            .stage_of(i, j)
            .expect("only related pairs are extracted");
        let x_prev = &self.analysis.stages[k - 1];
        let x_k = &self.analysis.stages[k];
        let within = self.analysis.base.union(&lift_relation(u, x_prev));
        let final_lift = lift_relation(u, x_k);

        // Nearest v with (i,v) ∈ within* and (v,j) in the final lift; v = j
        // always qualifies, so the search cannot fail.
        let path = bfs_path(&within, i, |v| final_lift.get(v, j))
            .expect("fixed-point equation guarantees a decomposition");

        let mut terms: Vec<CanonicalTerm> = vec![u.term(i).clone()];
        let mut steps: Vec<StepItem> = Vec::new();
        for e in 1..path.len() {
            let (from, to) = (path[e - 1], path[e]);
            terms.push(u.term(to).clone());
            steps.push(self.step_label(from, to, x_prev));
        }
        let v = *path.last().expect("paths are nonempty");
        terms.push(u.term(j).clone());
        if v == j {
            steps.push(StepItem::IdStep);
        } else {
            let lift_id = self.lift_node_for(v, j);
            steps.push(StepItem::LiftRef {
                node: lift_id,
                marked: false,
            });
        }
        self.nodes.insert(id, JudgmentNode::Split { terms, steps });
        id
    }

    /// Label one path edge: the smallest matching rule as a root step when
    /// the base relation covers the edge, otherwise a marked lift over the
    /// previous stage.
    fn step_label(&mut self, from: usize, to: usize, x_prev: &Relation) -> StepItem {
        let u = self.analysis.universe;
        if self.analysis.base.get(from, to) {
            let rule = (0..self.analysis.trs.rules().len())
                .find(|&r| {
                    root_step(u.term(from), self.analysis.trs, r).as_ref() == Some(u.term(to))
                })
                .expect("base relation edges are rule steps");
            return StepItem::Root { rule };
        }
        debug_assert!(lift_relation(u, x_prev).get(from, to));
        let lift_id = self.lift_node_for(from, to);
        StepItem::LiftRef {
            node: lift_id,
            marked: true,
        }
    }

    /// A Lift node descending from the pair (a, b) of equal-headed terms.
    fn lift_node_for(&mut self, a: usize, b: usize) -> u64 {
        let u = self.analysis.universe;
        let (HeadInfo::Fun { children: ca, .. }, HeadInfo::Fun { children: cb, .. }) =
            (&u.heads[a], &u.heads[b])
        else {
            unreachable!("lift edges join equal-headed terms");
        };
        let pairs: Vec<(usize, usize)> = ca.iter().copied().zip(cb.iter().copied()).collect();
        let children: Vec<u64> = pairs
            .into_iter()
            .map(|(x, y)| self.child_proof(x, y))
            .collect();
        let id = self.fresh_id();
        self.nodes.insert(id, JudgmentNode::Lift { children });
        id
    }
}

/// Shortest path from `start` to the nearest vertex satisfying `target`,
/// breadth first with neighbors visited in ascending index order. Returns
/// the vertex sequence including both ends.
fn bfs_path(edges: &Relation, start: usize, target: impl Fn(usize) -> bool) -> Option<Vec<usize>> {
    let n = edges.size();
    let mut parent: BTreeMap<usize, usize> = BTreeMap::new();
    let mut seen: BTreeSet<usize> = BTreeSet::new();
    let mut queue: Vec<usize> = vec![start];
    let mut head = 0;
    seen.insert(start);
    while head < queue.len() {
        let v = queue[head];
        head += 1;
        if target(v) {
            let mut path = vec![v];
            let mut cur = v;
            while let Some(&p) = parent.get(&cur) {
                path.push(p);
                cur = p;
            }
            path.reverse();
            return Some(path);
        }
        for w in 0..n {
            if edges.get(v, w) && seen.insert(w) {
                parent.insert(w, v);
                queue.push(w);
            }
        }
    }
    None
}
