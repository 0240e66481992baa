//! Acceptance gate: one test per shipped guarantee, each ending in a single
//! PASS line. Randomized criteria use a fixed-seed generator so failures
//! reproduce exactly.

use std::collections::BTreeSet;
use std::fs;
use std::path::PathBuf;

use ired_core::certificate::{
    check_certificate, endpoints, nesting_depth, parse_certificate, Certificate, InvalidReason,
    JudgmentNode, Mode, StepItem, Verdict,
};
use ired_core::compression::{compress_prefix, CompressError};
use ired_core::fixpoint::{
    check_post_fixed_point, close_universe, gfp_relation, lfp_ired, lift_relation,
    root_step_relation, IredAnalysis, Relation, Universe,
};
use ired_core::syntax::{parse_term, parse_term_lines, parse_trs, SymbolPolicy};
use ired_core::term::{canonicalize, CanonicalTerm, NodeId, Signature, TermGraph};
use ired_core::trs::{replay, root_step, Rule, Trs};

fn testdata(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../testdata")
        .join(name);
    fs::read_to_string(&path).unwrap_or_else(|e| panic!("reading {}: {e}", path.display()))
}

fn load_trs(name: &str) -> Trs {
    parse_trs(&testdata(name)).unwrap()
}

fn load_universe(name: &str, trs: &Trs) -> Universe {
    let mut sig = trs.signature().clone();
    let terms = parse_term_lines(&testdata(name), trs.declared_vars(), &mut sig).unwrap();
    close_universe(&terms)
}

fn load_cert(name: &str, trs: &Trs) -> Certificate {
    parse_certificate(&testdata(name), trs).unwrap()
}

fn t(input: &str) -> CanonicalTerm {
    let mut sig = Signature::new();
    parse_term(input, &BTreeSet::new(), SymbolPolicy::Extend(&mut sig)).unwrap()
}

struct SplitMix64(u64);

impl SplitMix64 {
    fn next(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }

    fn below(&mut self, n: usize) -> usize {
        (self.next() % n as u64) as usize
    }

    fn chance(&mut self, percent: u64) -> bool {
        self.next() % 100 < percent
    }
}

/// Symbol pool shared by all generators: at most 3 symbols of arity <= 2.
const POOL: [(&str, usize); 3] = [("f", 2), ("g", 1), ("c", 0)];

/// A random ground rational term: a small random graph over the pool,
/// canonicalized. Cycles arise whenever a child edge points backwards.
fn random_ground_term(rng: &mut SplitMix64) -> CanonicalTerm {
    let n = 1 + rng.below(3);
    let mut g = TermGraph::new();
    let mut nodes: Vec<(NodeId, usize)> = Vec::new();
    for _ in 0..n {
        let (sym, arity) = POOL[rng.below(POOL.len())];
        let id = g.add_fun(sym, vec![0; arity]);
        nodes.push((id, arity));
    }
    for &(id, arity) in &nodes {
        for slot in 0..arity {
            g.set_child(id, slot, nodes[rng.below(n)].0);
        }
    }
    g.set_root(nodes[0].0);
    canonicalize(&g)
}

/// A random left-linear-or-not pattern: non-variable root over the pool,
/// leaves are variables, constants, or one more function layer.
fn random_pattern(rng: &mut SplitMix64) -> CanonicalTerm {
    fn leaf(rng: &mut SplitMix64, depth: usize) -> CanonicalTerm {
        if depth > 0 && rng.chance(30) {
            return shape(rng, depth - 1);
        }
        if rng.chance(50) {
            CanonicalTerm::var(if rng.chance(50) { "x" } else { "y" })
        } else {
            CanonicalTerm::fun("c", &[])
        }
    }
    fn shape(rng: &mut SplitMix64, depth: usize) -> CanonicalTerm {
        match rng.below(3) {
            0 => CanonicalTerm::fun("f", &[leaf(rng, depth), leaf(rng, depth)]),
            1 => CanonicalTerm::fun("g", &[leaf(rng, depth)]),
            _ => CanonicalTerm::fun("c", &[]),
        }
    }
    shape(rng, 1)
}

/// A random rule body over the pattern's variables.
fn random_rhs(rng: &mut SplitMix64, vars: &[String], depth: usize) -> CanonicalTerm {
    if !vars.is_empty() && rng.chance(40) {
        return CanonicalTerm::var(&vars[rng.below(vars.len())]);
    }
    if depth == 0 {
        return CanonicalTerm::fun("c", &[]);
    }
    match rng.below(3) {
        0 => CanonicalTerm::fun(
            "f",
            &[
                random_rhs(rng, vars, depth - 1),
                random_rhs(rng, vars, depth - 1),
            ],
        ),
        1 => CanonicalTerm::fun("g", &[random_rhs(rng, vars, depth - 1)]),
        _ => CanonicalTerm::fun("c", &[]),
    }
}

fn random_trs(rng: &mut SplitMix64) -> Trs {
    let k = 1 + rng.below(4);
    let mut rules = Vec::new();
    for _ in 0..k {
        let lhs = random_pattern(rng);
        let vars: Vec<String> = lhs.variables().into_iter().collect();
        let rhs = random_rhs(rng, &vars, 2);
        rules.push(Rule { lhs, rhs });
    }
    let declared: BTreeSet<String> = ["x", "y"].map(String::from).into_iter().collect();
    Trs::new(rules, declared).unwrap()
}

/// A random instance for the soundness and lattice criteria: a TRS plus a
/// closed universe of at most 8 terms.
fn random_instance(rng: &mut SplitMix64) -> (Trs, Universe) {
    let trs = random_trs(rng);
    loop {
        let seeds: Vec<CanonicalTerm> = (0..(1 + rng.below(3)))
            .map(|_| random_ground_term(rng))
            .collect();
        let u = close_universe(&seeds);
        if u.len() <= 8 {
            return (trs, u);
        }
    }
}

#[test]
fn criterion_1_figure_fixtures() {
    let unroll = load_trs("unroll.trs");
    let unroll_cert = load_cert("unroll.cert", &unroll);
    assert_eq!(check_certificate(&unroll_cert, &unroll), Verdict::Valid);
    let (s, e) = endpoints(&unroll_cert).unwrap();
    assert_eq!(s, &t("a"));
    assert_eq!(e, &t("rec %0 . C(%0)"));
    assert_eq!(nesting_depth(&unroll_cert, &unroll), Ok(0));

    let collapse = load_trs("collapse.trs");
    let collapse_cert = load_cert("collapse.cert", &collapse);
    assert_eq!(check_certificate(&collapse_cert, &collapse), Verdict::Valid);
    let (s, e) = endpoints(&collapse_cert).unwrap();
    assert_eq!(s, &t("f(a, b)"));
    assert_eq!(e, &t("D"));
    assert_eq!(nesting_depth(&collapse_cert, &collapse), Ok(1));

    let rollup = load_trs("rollup.trs");
    let rollup_cert = load_cert("rollup.cert", &rollup);
    match check_certificate(&rollup_cert, &rollup) {
        Verdict::Invalid(inv) => {
            assert_eq!(inv.reason, InvalidReason::MarkedCycle);
            assert_eq!(inv.node, 1);
        }
        Verdict::Valid => panic!("the roll-up certificate must be rejected"),
    }
    let mut relaxed = rollup_cert.clone();
    relaxed.mode = Mode::BiInf;
    for node in relaxed.nodes.values_mut() {
        if let JudgmentNode::Split { steps, .. } = node {
            for step in steps {
                if let StepItem::LiftRef { marked, .. } = step {
                    *marked = false;
                }
            }
        }
    }
    assert_eq!(check_certificate(&relaxed, &rollup), Verdict::Valid);
    println!("criterion 1 (certificate fixtures): PASS");
}

#[test]
fn criterion_2_fixpoint_memberships() {
    let pair = |u: &Universe, a: &str, b: &str| {
        (
            u.index_of(&t(a))
                .unwrap_or_else(|| panic!("{a} not in universe")),
            u.index_of(&t(b))
                .unwrap_or_else(|| panic!("{b} not in universe")),
        )
    };

    let unroll = load_trs("unroll.trs");
    let u = load_universe("unroll.terms", &unroll);
    let r = lfp_ired(&u, &unroll);
    let (i, j) = pair(&u, "a", "rec %0 . C(%0)");
    assert!(r.get(i, j));

    let collapse = load_trs("collapse.trs");
    let u = load_universe("collapse.terms", &collapse);
    let r = lfp_ired(&u, &collapse);
    let (i, j) = pair(&u, "f(a, b)", "D");
    assert!(r.get(i, j));

    let rollup = load_trs("rollup.trs");
    let u = load_universe("rollup.terms", &rollup);
    let g = gfp_relation(&u, &rollup, Mode::BiInf);
    let r = lfp_ired(&u, &rollup);
    let (i, j) = pair(&u, "rec %0 . C(%0)", "a");
    assert!(g.get(i, j));
    assert!(!r.get(i, j));

    let eqsample = load_trs("eqsample.trs");
    let u = load_universe("eqsample.terms", &eqsample);
    assert_eq!(u.len(), 9);
    let e = gfp_relation(&u, &eqsample, Mode::EqInf);
    let (i, j) = pair(&u, "a", "b");
    assert!(e.get(i, j));
    let (i, j) = pair(&u, "C(a)", "rec %0 . C(%0)");
    assert!(e.get(i, j));
    let r = lfp_ired(&u, &eqsample);
    let meet = r.transpose().compose(&r).rtc();
    assert!(!meet.get(i, j));
    println!("criterion 2 (fixpoint memberships): PASS");
}

#[test]
fn criterion_3_round_trip_soundness() {
    let mut rng = SplitMix64(0x1DE0C0DE);
    let mut pairs_checked = 0usize;
    for instance in 0..200 {
        let (trs, u) = random_instance(&mut rng);
        let analysis = IredAnalysis::new(&u, &trs);
        for (i, j) in analysis.relation().pairs() {
            let cert = analysis
                .extract(u.term(i), u.term(j))
                .unwrap_or_else(|e| panic!("instance {instance}: extract failed: {e}"));
            assert_eq!(
                check_certificate(&cert, &trs),
                Verdict::Valid,
                "instance {instance}, pair ({i},{j})"
            );
            let (s, e) = endpoints(&cert).unwrap();
            assert_eq!(s, u.term(i), "instance {instance}");
            assert_eq!(e, u.term(j), "instance {instance}");
            pairs_checked += 1;
        }
    }
    assert!(pairs_checked > 200, "generator produced too few pairs");
    println!("criterion 3 (round-trip soundness, 200 instances, {pairs_checked} pairs): PASS");
}

/// A valid reduction certificate built from an actual finite reduction:
/// a root-step chain closed with an identity step, sometimes wrapped in
/// one lift layer.
fn random_valid_cert(rng: &mut SplitMix64, trs: &Trs) -> Certificate {
    let mut chain = vec![random_ground_term(rng)];
    for _ in 0..rng.below(4) {
        let cur = chain.last().unwrap();
        let options: Vec<(usize, CanonicalTerm)> = (0..trs.rules().len())
            .filter_map(|r| root_step(cur, trs, r).map(|out| (r, out)))
            .collect();
        if options.is_empty() {
            break;
        }
        let (rule, next) = options[rng.below(options.len())].clone();
        chain.push(next);
        let _ = rule;
    }
    let mut steps: Vec<StepItem> = Vec::new();
    let mut cur = chain[0].clone();
    for next in &chain[1..] {
        let rule = (0..trs.rules().len())
            .find(|&r| root_step(&cur, trs, r).as_ref() == Some(next))
            .unwrap();
        steps.push(StepItem::Root { rule });
        cur = next.clone();
    }
    let mut terms = chain.clone();
    terms.push(terms.last().unwrap().clone());
    steps.push(StepItem::IdStep);

    if rng.chance(50) {
        // Wrap the chain under a fresh unary head: g(s) reduces to g(t)
        // whenever s reduces to t.
        let wrapped: Vec<CanonicalTerm> = [&chain[0], chain.last().unwrap()]
            .iter()
            .map(|inner| CanonicalTerm::fun("g", &[(*inner).clone()]))
            .collect();
        return Certificate {
            mode: Mode::Ired,
            root: 0,
            nodes: [
                (
                    0,
                    JudgmentNode::Split {
                        terms: wrapped,
                        steps: vec![StepItem::LiftRef {
                            node: 1,
                            marked: false,
                        }],
                    },
                ),
                (1, JudgmentNode::Lift { children: vec![2] }),
                (2, JudgmentNode::Split { terms, steps }),
            ]
            .into_iter()
            .collect(),
        };
    }
    Certificate {
        mode: Mode::Ired,
        root: 0,
        nodes: [(0, JudgmentNode::Split { terms, steps })]
            .into_iter()
            .collect(),
    }
}

#[test]
fn criterion_4_relative_completeness() {
    let mut rng = SplitMix64(0xC0FFEE);
    for instance in 0..100 {
        let trs = random_trs(&mut rng);
        let cert = random_valid_cert(&mut rng, &trs);
        assert!(cert.nodes.len() <= 6);
        assert_eq!(
            check_certificate(&cert, &trs),
            Verdict::Valid,
            "instance {instance}: generated certificate must be valid"
        );
        let mentioned: Vec<CanonicalTerm> = cert
            .nodes
            .values()
            .filter_map(|n| match n {
                JudgmentNode::Split { terms, .. } => Some(terms.clone()),
                _ => None,
            })
            .flatten()
            .collect();
        let u = close_universe(&mentioned);
        let r = lfp_ired(&u, &trs);
        let (s, e) = endpoints(&cert).unwrap();
        let i = u.index_of(s).unwrap();
        let j = u.index_of(e).unwrap();
        assert!(r.get(i, j), "instance {instance}: endpoints not related");
    }
    println!("criterion 4 (relative completeness, 100 certificates): PASS");
}

#[test]
fn criterion_5_compression_contract() {
    let count_at = |steps: &[ired_core::trs::RewriteStep], p: usize| {
        steps.iter().filter(|s| s.position.len() == p).count()
    };

    let cases = [
        ("unroll.cert", "unroll.trs", "rec %0 . C(%0)", "a"),
        (
            "pair.cert",
            "pair.trs",
            "P(rec %0 . C(%0), rec %0 . C(%0))",
            "P(a, b)",
        ),
    ];
    for (cert_name, trs_name, target, source) in cases {
        let trs = load_trs(trs_name);
        let cert = load_cert(cert_name, &trs);
        let target = t(target);
        let source = t(source);
        let reference = compress_prefix(&cert, &trs, 12).unwrap();
        for d in 0..=10 {
            let out = compress_prefix(&cert, &trs, d)
                .unwrap_or_else(|e| panic!("{cert_name} at depth {d}: {e}"));
            let replayed = replay(&source, &out.steps, &trs).unwrap();
            assert_eq!(replayed, out.result, "{cert_name} depth {d}");
            assert!(
                out.result.truncated_bisimilar(&target, d),
                "{cert_name} depth {d}"
            );
            for p in 0..d.saturating_sub(1) {
                assert_eq!(
                    count_at(&out.steps, p),
                    count_at(&reference.steps, p),
                    "{cert_name}: step count at depth {p} must be settled by depth {d}"
                );
            }
        }
    }

    let collapse = load_trs("collapse.trs");
    let collapse_cert = load_cert("collapse.cert", &collapse);
    for d in 0..=10 {
        assert_eq!(
            compress_prefix(&collapse_cert, &collapse, d),
            Err(CompressError::NonLeftLinear)
        );
    }
    println!("criterion 5 (compression contract): PASS");
}

#[test]
fn criterion_6_lattice_laws() {
    let mut rng = SplitMix64(0x1DE0C0DE);
    for instance in 0..200 {
        let (trs, u) = random_instance(&mut rng);
        let n = u.len();
        let (step, _) = root_step_relation(&u, &trs);

        let x = lfp_ired(&u, &trs);
        let lhs = step
            .union(&lift_relation(&u, &x))
            .rtc()
            .compose(&lift_relation(&u, &x));
        assert_eq!(
            x, lhs,
            "instance {instance}: reduction fixed-point equation"
        );

        let bi = gfp_relation(&u, &trs, Mode::BiInf);
        assert_eq!(
            bi,
            step.union(&lift_relation(&u, &bi)).rtc(),
            "instance {instance}: bi-infinite fixed-point equation"
        );
        let sym = step.union(&step.transpose());
        let eq = gfp_relation(&u, &trs, Mode::EqInf);
        assert_eq!(
            eq,
            sym.union(&lift_relation(&u, &eq)).rtc(),
            "instance {instance}: equational fixed-point equation"
        );

        assert!(Relation::identity(n).is_subset(&x), "instance {instance}");
        assert!(
            x.compose(&x).is_subset(&x),
            "instance {instance}: transitivity"
        );
        assert!(x.is_subset(&bi), "instance {instance}: chain lfp <= biinf");
        assert!(
            bi.is_subset(&eq),
            "instance {instance}: chain biinf <= eqinf"
        );
        assert!(
            check_post_fixed_point(&u, &trs, &x, &x),
            "instance {instance}: lfp is a post-fixed point of itself"
        );
    }
    println!("criterion 6 (lattice laws, 200 instances): PASS");
}

#[test]
fn criterion_7_term_laws() {
    let mut rng = SplitMix64(0x7E57DA7A);
    for case in 0..1000 {
        let a = random_ground_term(&mut rng);
        let b = if rng.chance(50) {
            a.clone()
        } else {
            random_ground_term(&mut rng)
        };
        let c = random_ground_term(&mut rng);

        assert!(a.bisimilar(&a), "case {case}: reflexivity");
        assert_eq!(a.bisimilar(&b), b.bisimilar(&a), "case {case}: symmetry");
        if a.bisimilar(&b) && b.bisimilar(&c) {
            assert!(a.bisimilar(&c), "case {case}: transitivity");
        }

        let again = canonicalize(&a.to_graph());
        assert_eq!(a, again, "case {case}: idempotence");

        let printed = a.to_string();
        let mut sig = Signature::new();
        let reparsed = parse_term(&printed, &BTreeSet::new(), SymbolPolicy::Extend(&mut sig))
            .unwrap_or_else(|e| panic!("case {case}: reparse of {printed}: {e}"));
        assert_eq!(a, reparsed, "case {case}: print/parse round trip");

        for d in 0..4 {
            if a.truncated_bisimilar(&b, d + 1) {
                assert!(a.truncated_bisimilar(&b, d), "case {case}: antitonicity");
            }
        }
        let cutoff = a.node_count() * b.node_count();
        assert_eq!(
            a.bisimilar(&b),
            a.truncated_bisimilar(&b, cutoff),
            "case {case}: cutoff equivalence at depth {cutoff}"
        );
    }
    println!("criterion 7 (term laws, 1000 pairs): PASS");
}
