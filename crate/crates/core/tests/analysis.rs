mod common;

use std::collections::BTreeMap;
use std::sync::Arc;

use common::*;
use gradcons::analysis::{check_depends_on_rule, rule_conflicts_on_check, AnalysisError, Basis, Overlap, OverlapKind};
use gradcons::{
    classify_step, criterion_direct_improve, criterion_direct_sustain, independence_table, load_fixtures, validate_anf,
    Condition, Constraint, CriterionVerdict, GraphMorphism, HostUniverse, NodeId, Rule, Transformation,
    TypedGraph,
};
use rand::Rng;

fn outer(c: &Constraint) -> Arc<TypedGraph> {
    validate_anf(c).unwrap().outer_graph().clone()
}

#[test]
fn dependency_and_conflict_examples() {
    let fx = load_fixtures().unwrap();
    let create = fx.rule("createClass").unwrap();
    let delete = fx.rule("deleteEmptyClass").unwrap();
    let deps = check_depends_on_rule(create, &outer(fx.constraint("c2").unwrap()));
    assert!(!deps.is_empty());
    assert!(deps.iter().all(|o| o.kind == OverlapKind::Dependency && o.jointly_surjective));
    assert!(check_depends_on_rule(delete, &outer(fx.constraint("c1").unwrap())).is_empty());
    let conflicts = rule_conflicts_on_check(delete, &outer(fx.constraint("c2").unwrap()));
    assert!(!conflicts.is_empty());
    for o in &conflicts {
        let (ns, es) = delete.deleted();
        let hit: Vec<NodeId> = ns.iter().map(|x| o.first.node_map()[x].clone()).collect();
        let hit_e: Vec<_> = es.iter().map(|x| o.first.edge_map()[x].clone()).collect();
        assert!(o.second.image_touches(&hit, &hit_e));
    }
    let check = Rule::check_rule(outer(fx.constraint("c3").unwrap()));
    for c in &fx.constraints {
        assert!(check_depends_on_rule(&check, &outer(c)).is_empty());
        assert!(rule_conflicts_on_check(&check, &outer(c)).is_empty());
    }
}

#[test]
fn sustainment_criterion_examples() {
    let fx = load_fixtures().unwrap();
    let delete = fx.rule("deleteEmptyClass").unwrap();
    for name in ["c1", "c2", "c3"] {
        let r = criterion_direct_sustain(delete, fx.constraint(name).unwrap(), false).unwrap();
        assert_eq!(r.verdict, CriterionVerdict::ProvenSustaining, "{name}");
        assert_eq!(r.basis, Basis::Independence);
    }
    let create = criterion_direct_sustain(fx.rule("createClass").unwrap(), fx.constraint("c2").unwrap(), false).unwrap();
    assert_eq!(create.verdict, CriterionVerdict::ProvenSustaining);
    assert_eq!(create.basis, Basis::CreatedOccurrencesValid);
    let mv = criterion_direct_sustain(fx.rule("moveFeature").unwrap(), fx.constraint("c2").unwrap(), false).unwrap();
    assert_eq!(mv.verdict, CriterionVerdict::Inconclusive);
    assert!(mv.evidence.iter().all(|o| o.kind == OverlapKind::Conflict));
    assert!(mv.notes.iter().any(|n| n.contains("application condition")));
}

#[test]
fn improvement_criterion_examples() {
    let fx = load_fixtures().unwrap();
    let delete = fx.rule("deleteEmptyClass").unwrap();
    let r = criterion_direct_improve(delete, fx.constraint("c2").unwrap(), false).unwrap();
    assert_eq!(r.verdict, CriterionVerdict::NecessaryConditionHolds);
    assert!(r.evidence.iter().all(|o| o.kind == OverlapKind::Conflict));
    let r = criterion_direct_improve(fx.rule("assignFeature").unwrap(), fx.constraint("c2").unwrap(), false).unwrap();
    assert_eq!(r.verdict, CriterionVerdict::NecessaryConditionHolds);
    assert!(!r.evidence.is_empty() && r.evidence.iter().all(|o| o.kind == OverlapKind::Dependency));
    let r = criterion_direct_improve(delete, fx.constraint("c3").unwrap(), false).unwrap();
    assert_eq!(r.verdict, CriterionVerdict::NecessaryConditionFails);
}

#[test]
fn criteria_reject_other_shapes() {
    let types = single_types();
    let c = Arc::new(TypedGraph::new(types.clone()).with_node("a", "N"));
    let e = Arc::new(TypedGraph::new(types.clone()));
    let exists = Constraint::new("some", e.clone(), Condition::exists_plain(inclusion(&e, &c))).unwrap();
    let mut r = rng(2);
    let rule = random_rule(&mut r, &types, &RuleShape { max_lhs_nodes: 2, allow_ac: false }, "r");
    assert!(matches!(criterion_direct_sustain(&rule, &exists, false), Err(AnalysisError::UnsupportedShape(_))));
    assert!(matches!(criterion_direct_improve(&rule, &exists, true), Err(AnalysisError::UnsupportedShape(_))));
    let fx = load_fixtures().unwrap();
    assert_eq!(
        criterion_direct_sustain(&rule, fx.constraint("c1").unwrap(), false),
        Err(AnalysisError::TypeGraphMismatch)
    );
}

#[test]
fn negative_improvement_needs_a_decided_sustainment() {
    let types = single_types();
    // Reverses an edge unless a loop sits on its source.
    let l = Arc::new(TypedGraph::new(types.clone()).with_node("a", "N").with_node("b", "N").with_edge("x", "E", "a", "b"));
    let r = Arc::new(
        TypedGraph::new(types.clone())
            .with_node("a", "N")
            .with_node("b", "N")
            .with_edge("y", "E", "b", "a"),
    );
    let k = Arc::new(TypedGraph::new(types.clone()).with_node("a", "N").with_node("b", "N"));
    let nac = Arc::new((*l).clone().with_edge("z", "E", "a", "a"));
    let rule = Rule::new("flip", l.clone(), k, r, Condition::not(Condition::exists_plain(inclusion(&l, &nac)))).unwrap();
    let c = Arc::new(TypedGraph::new(types.clone()).with_node("p", "N").with_node("q", "N").with_edge("pq", "E", "p", "q"));
    let neg = negative_constraint(&c, "no_edge");
    assert_eq!(criterion_direct_sustain(&rule, &neg, false).unwrap().verdict, CriterionVerdict::Inconclusive);
    assert_eq!(criterion_direct_improve(&rule, &neg, false), Err(AnalysisError::MissingSustainingPrerequisite));
    let plain = rule.plain();
    assert_eq!(criterion_direct_sustain(&plain, &neg, false).unwrap().verdict, CriterionVerdict::ProvenNotSustaining);
    assert_eq!(criterion_direct_improve(&plain, &neg, false).unwrap().verdict, CriterionVerdict::ProvenNotImproving);
}

#[test]
fn independence_table_edge_cases() {
    let fx = load_fixtures().unwrap();
    let empty = independence_table(&[], &fx.constraints).unwrap();
    assert!(empty.rows.is_empty());
    assert_eq!(empty.columns.len(), 10);
    let check = Rule::check_rule(outer(fx.constraint("c3").unwrap()));
    let t = independence_table(&[check], &fx.constraints).unwrap();
    assert_eq!(t.rows.len(), 1);
    // Independence columns come first (5), dependence columns after (5).
    assert_eq!(t.rows[0].cells, [[true; 5], [false; 5]].concat());
}

/// The host morphism `A → X` induced by a jointly surjective overlap and two
/// morphisms into X agreeing with its injections, if it is a monomorphism.
fn embeds(o: &Overlap, first: &GraphMorphism, second: &GraphMorphism) -> bool {
    let mut nodes: BTreeMap<&NodeId, &NodeId> = BTreeMap::new();
    let mut edges = BTreeMap::new();
    for (via, target) in [(&o.first, first), (&o.second, second)] {
        for (x, a) in via.node_map() {
            let y = &target.node_map()[x];
            if *nodes.entry(a).or_insert(y) != y {
                return false;
            }
        }
        for (x, a) in via.edge_map() {
            let y = &target.edge_map()[x];
            if *edges.entry(a).or_insert(y) != y {
                return false;
            }
        }
    }
    let host = first.codomain();
    GraphMorphism::new(
        o.graph.clone(),
        host.clone(),
        nodes.into_iter().map(|(a, b)| (a.clone(), b.clone())).collect(),
        edges.into_iter().map(|(a, b)| (a.clone(), b.clone())).collect(),
    )
    .is_ok_and(|h| h.is_total() && h.is_injective())
}

fn random_pattern(r: &mut impl Rng, types: &Arc<gradcons::TypeGraph>, max_nodes: usize, name: &str) -> Arc<TypedGraph> {
    let n = r.random_range(1..=max_nodes);
    Arc::new(random_graph(r, types, n, 0.3, false, name))
}

fn steps_in(rule: &Rule, hosts: &[Arc<TypedGraph>]) -> Vec<Transformation> {
    all_steps(rule, hosts).into_iter().map(|(_, t)| t).collect()
}

#[test]
fn overlaps_cover_every_step_level_conflict_and_dependency() {
    let types = single_types();
    let universe = HostUniverse::new(types.clone());
    let hosts = universe.hosts(3, &[]);
    let mut r = rng(21);
    let (mut seen_conflicts, mut seen_deps) = (0, 0);
    for i in 0..30 {
        let rule = random_rule(&mut r, &types, &RuleShape { max_lhs_nodes: 2, allow_ac: i % 3 == 0 }, "r");
        let c = random_pattern(&mut r, &types, 3, "c");
        let conflicts = rule_conflicts_on_check(&rule, &c);
        let deps = check_depends_on_rule(&rule, &c);
        assert!(conflicts.iter().chain(&deps).all(|o| o.jointly_surjective));
        for t in steps_in(&rule, &hosts) {
            let (dn, de) = t.deleted_in_host();
            for p in gradcons::enumerate_monomorphisms(&c, &t.host).unwrap() {
                if p.image_touches(&dn, &de) {
                    seen_conflicts += 1;
                    assert!(conflicts.iter().any(|o| embeds(o, &t.m, &p)), "conflict of {} on {c} in {}", rule.name, t.host);
                }
            }
            let (cn, ce) = t.created_in_result();
            for q in gradcons::enumerate_monomorphisms(&c, &t.result).unwrap() {
                if q.image_touches(&cn, &ce) {
                    seen_deps += 1;
                    assert!(deps.iter().any(|o| embeds(o, &t.n, &q)), "dependency of {} on {c} in {}", rule.name, t.result);
                }
            }
        }
    }
    assert!(seen_conflicts > 100 && seen_deps > 100, "{seen_conflicts} conflicts, {seen_deps} dependencies");
}

#[test]
fn negative_sustainment_verdict_equals_exhaustive_step_check() {
    let types = single_types();
    let universe = HostUniverse::new(types.clone());
    let hosts = universe.hosts(4, &[]);
    let mut r = rng(31);
    for i in 0..20 {
        let rule = random_rule(&mut r, &types, &RuleShape { max_lhs_nodes: 2, allow_ac: false }, &format!("r{i}"));
        let c = random_pattern(&mut r, &types, 3, "c");
        let neg = negative_constraint(&c, "neg");
        let verdict = criterion_direct_sustain(&rule, &neg, false).unwrap().verdict;
        let all = steps_in(&rule, &hosts).iter().all(|t| classify_step(t, &neg).unwrap().directly_sustaining);
        let expected = if all { CriterionVerdict::ProvenSustaining } else { CriterionVerdict::ProvenNotSustaining };
        assert_eq!(verdict, expected, "{} against {c}", rule.name);
    }
}

fn random_forall_exists(r: &mut impl Rng, types: &Arc<gradcons::TypeGraph>) -> Constraint {
    let c = random_pattern(r, types, 2, "c");
    let c2 = Arc::new(random_extension(r, &c, "d"));
    forall_exists(&c, &c2, "fe")
}

#[test]
fn proven_sustainment_has_no_bounded_counterexample() {
    let types = single_types();
    let universe = HostUniverse::new(types.clone());
    let hosts = universe.hosts(4, &[]);
    let mut r = rng(41);
    let mut proven = 0;
    for i in 0..60 {
        let rule = random_rule(&mut r, &types, &RuleShape { max_lhs_nodes: 2, allow_ac: i % 2 == 0 }, "r");
        let c = random_forall_exists(&mut r, &types);
        if criterion_direct_sustain(&rule, &c, false).unwrap().verdict != CriterionVerdict::ProvenSustaining {
            continue;
        }
        proven += 1;
        for t in steps_in(&rule, &hosts) {
            assert!(classify_step(&t, &c).unwrap().directly_sustaining, "{} on {}", rule.name, t.host);
        }
    }
    assert!(proven >= 5, "only {proven} proven cases");
}

#[test]
fn directly_improving_steps_satisfy_the_necessary_condition() {
    let types = single_types();
    let universe = HostUniverse::new(types.clone());
    let hosts = universe.hosts(4, &[]);
    let mut r = rng(51);
    let mut improving_steps = 0;
    for i in 0..40 {
        let rule = random_rule(&mut r, &types, &RuleShape { max_lhs_nodes: 2, allow_ac: false }, "r");
        let c = if i % 2 == 0 {
            negative_constraint(&random_pattern(&mut r, &types, 3, "c"), "neg")
        } else {
            random_forall_exists(&mut r, &types)
        };
        let verdict = criterion_direct_improve(&rule, &c, false).unwrap().verdict;
        for t in steps_in(&rule, &hosts) {
            if classify_step(&t, &c).unwrap().directly_improving {
                improving_steps += 1;
                assert_ne!(verdict, CriterionVerdict::NecessaryConditionFails, "{} on {}", rule.name, t.host);
            }
        }
    }
    assert!(improving_steps > 0);
}

#[test]
fn conjecture_mode_tags_three_level_verdicts() {
    let types = single_types();
    let mut r = rng(61);
    let c1 = random_pattern(&mut r, &types, 1, "a");
    let c2 = Arc::new(random_extension(&mut r, &c1, "b"));
    let c3 = Arc::new(random_extension(&mut r, &c2, "c"));
    let e = Arc::new(TypedGraph::new(types.clone()));
    let cond = Condition::forall(
        inclusion(&e, &c1),
        Condition::exists(inclusion(&c1, &c2), Condition::not(Condition::exists_plain(inclusion(&c2, &c3)))),
    );
    let c = Constraint::new("three", e, cond).unwrap();
    let rule = random_rule(&mut r, &types, &RuleShape { max_lhs_nodes: 2, allow_ac: false }, "r");
    assert!(matches!(criterion_direct_sustain(&rule, &c, false), Err(AnalysisError::UnsupportedShape(_))));
    let s = criterion_direct_sustain(&rule, &c, true).unwrap();
    let i = criterion_direct_improve(&rule, &c, true).unwrap();
    assert!(s.conjectured && i.conjectured);
    assert_eq!(s.basis, Basis::ThreeLevelPattern);
}
