//! Double-pushout rewriting on the blocksworld fixtures.

mod common;

use catplan_core::plan::resolve_match;
use catplan_core::{
    apply_action, check_applicable, verify_pushout, ActionSpan, Error, Instance,
    InstanceMorphism,
};
use common::*;

fn ob(schema: &catplan_core::Schema, name: &str) -> usize {
    schema.object_id(name).unwrap()
}

#[test]
fn unstack_rewrites_the_initial_state() {
    let schema = blocksworld();
    let state = initial();
    let unstack = action("unstack");
    let bindings = [
        ("block".to_owned(), "E".to_owned()),
        ("underblock".to_owned(), "D".to_owned()),
    ];
    let m = resolve_match(&unstack, &bindings, &state).unwrap();
    let result = apply_action(&unstack, &m, &state).unwrap();
    let y = &result.result;

    // The held block's On link, the empty witness, and the marker block
    // are consumed.
    assert_eq!(y.count(ob(&schema, "Block")), 6);
    assert_eq!(y.count(ob(&schema, "Empty")), 0);
    assert_eq!(y.count(ob(&schema, "Gripper")), 1);
    assert_eq!(y.count(ob(&schema, "On")), 1);
    assert!(y.is_hom_total());

    let block = ob(&schema, "Block");
    let e = y.element_by_label(block, "E").unwrap();
    let d = y.element_by_label(block, "D").unwrap();
    let is_holding = schema.hom_id("isHolding").unwrap();
    assert_eq!(y.hom(is_holding, 0), Some(e));
    let is_clear = schema.attr_id("isClear").unwrap();
    assert_eq!(
        y.attr(is_clear, d),
        Some(&catplan_core::Value::Bool(true))
    );
}

#[test]
fn rewrite_squares_are_pushouts() {
    let state = initial();
    let unstack = action("unstack");
    let bindings = [
        ("block".to_owned(), "E".to_owned()),
        ("underblock".to_owned(), "D".to_owned()),
    ];
    let m = resolve_match(&unstack, &bindings, &state).unwrap();
    let result = apply_action(&unstack, &m, &state).unwrap();

    // Right square: Y is the pushout of Z <- keep -> eff.
    assert!(verify_pushout(
        &result.keep_to_context,
        &unstack.r,
        &result.v,
        &result.comatch
    )
    .unwrap());
    // The left square is not one here: unstack redefines
    // isClear(underblock) from the effect side alone, so the context
    // drops an entry the precondition never mentions and gluing pre back
    // in cannot restore it.
    assert!(!verify_pushout(&result.keep_to_context, &unstack.l, &result.u, &m).unwrap());
    // A mangled cocone over a different span is not one.
    assert!(!verify_pushout(
        &result.keep_to_context,
        &result.keep_to_context,
        &result.v,
        &result.v
    )
    .unwrap());
}

#[test]
fn dangling_condition_blocks_unsupported_deletion() {
    // Deleting block C, which x2 sits on, must be rejected.
    let schema = blocksworld();
    let state = initial();
    let doc = serde_json::json!({
        "name": "vanish",
        "params": ["b"],
        "pre": {"schema": "ColorBlocksworld", "elements": {"Block": ["b"]}},
        "keep": {"schema": "ColorBlocksworld", "elements": {}},
        "eff": {"schema": "ColorBlocksworld", "elements": {}},
        "l": {},
        "r": {}
    });
    let vanish = ActionSpan::from_json(&doc, &schema).unwrap();
    let m = resolve_match(&vanish, &[("b".to_owned(), "C".to_owned())], &state).unwrap();
    match check_applicable(&vanish, &m, &state) {
        Err(Error::DanglingViolation(detail)) => {
            assert!(detail.contains("on_r"), "got: {detail}");
        }
        other => panic!("expected a dangling violation, got {other:?}"),
    }
    // Block F supports nothing and deletes cleanly.
    let m = resolve_match(&vanish, &[("b".to_owned(), "F".to_owned())], &state).unwrap();
    let result = apply_action(&vanish, &m, &state).unwrap();
    assert_eq!(result.result.count(ob(&schema, "Block")), 6);
}

#[test]
fn scheduled_removals_are_exempt_from_dangling() {
    // unstack deletes the On element whose links reference the kept
    // blocks, and redefines isHolding/isEmpty; none of that dangles.
    let state = initial();
    let unstack = action("unstack");
    let bindings = [
        ("block".to_owned(), "E".to_owned()),
        ("underblock".to_owned(), "D".to_owned()),
    ];
    let m = resolve_match(&unstack, &bindings, &state).unwrap();
    check_applicable(&unstack, &m, &state).unwrap();
}

#[test]
fn matches_must_be_monic() {
    let state = initial();
    let unstack = action("unstack");
    let bindings = [
        ("block".to_owned(), "E".to_owned()),
        ("underblock".to_owned(), "E".to_owned()),
    ];
    assert!(resolve_match(&unstack, &bindings, &state).is_err());
}

#[test]
fn actions_require_hom_total_states() {
    let schema = blocksworld();
    let partial = Instance::load(
        r#"{
            "schema": "ColorBlocksworld",
            "elements": {"Block": ["A"], "Empty": ["e"]}
        }"#,
        &schema,
    )
    .unwrap();
    let doc = serde_json::json!({
        "name": "noop",
        "params": [],
        "pre": {"schema": "ColorBlocksworld", "elements": {}},
        "keep": {"schema": "ColorBlocksworld", "elements": {}},
        "eff": {"schema": "ColorBlocksworld", "elements": {}},
        "l": {},
        "r": {}
    });
    let noop = ActionSpan::from_json(&doc, &schema).unwrap();
    let m = InstanceMorphism::new(
        noop.pre.clone(),
        partial.clone(),
        vec![vec![]; schema.objects().len()],
    );
    assert!(matches!(
        check_applicable(&noop, &m, &partial),
        Err(Error::InvalidMatch(_))
    ));
}

#[test]
fn redefinition_drops_then_reinstates_entries() {
    // putdown redefines isClear(block) and isOnTable(block): both are
    // defined in eff, so the context must not carry them but the result
    // must.
    let state = initial();
    let unstack = action("unstack");
    let m = resolve_match(
        &unstack,
        &[
            ("block".to_owned(), "E".to_owned()),
            ("underblock".to_owned(), "D".to_owned()),
        ],
        &state,
    )
    .unwrap();
    let held = apply_action(&unstack, &m, &state).unwrap().result;

    let putdown = action("putdown");
    let m = resolve_match(&putdown, &[("block".to_owned(), "E".to_owned())], &held).unwrap();
    let result = apply_action(&putdown, &m, &held).unwrap();
    let schema = held.schema();
    let block = schema.object_id("Block").unwrap();
    let is_on_table = schema.attr_id("isOnTable").unwrap();

    let ze = result.context.element_by_label(block, "E").unwrap();
    assert_eq!(result.context.attr(is_on_table, ze), None);
    let ye = result.result.element_by_label(block, "E").unwrap();
    assert_eq!(
        result.result.attr(is_on_table, ye),
        Some(&catplan_core::Value::Bool(true))
    );
}

#[test]
fn full_plan_reaches_the_goal() {
    let trace = run_fixture_plan();
    assert_eq!(trace.states.len(), 9);
    assert!(catplan_core::exists_mono(&goal(), trace.final_state()).unwrap());
    assert_eq!(
        catplan_core::goal_satisfaction(&goal(), trace.final_state()).unwrap(),
        1.0
    );
    let names: Vec<String> = trace
        .display_names()
        .iter()
        .map(|n| n.split('(').next().unwrap().to_owned())
        .collect();
    assert_eq!(
        names,
        ["unstack", "putdown", "pickup", "stack", "pickup", "stack", "pickup", "stack"]
    );
}

#[test]
fn inapplicable_steps_fail_atomically_with_their_index() {
    let state = initial();
    // Block D is not clear (E sits on it), so picking it up has no match.
    let steps = vec![
        catplan_core::PlanStep {
            action: "pickup".into(),
            bindings: vec![("block".into(), "D".into())],
        },
    ];
    match catplan_core::run_plan(&state, &steps, &actions()) {
        Err(Error::Step { index: 0, .. }) => {}
        other => panic!("expected a step-0 failure, got {other:?}"),
    }
}
