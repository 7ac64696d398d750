//! Instance morphisms: identities, composition, monos, isos.

mod common;

use catplan_core::testgen::{gen_instance, gen_schema, rng};
use catplan_core::{find_homs, InstanceMorphism, SearchOptions};
use common::*;

#[test]
fn identity_is_a_valid_iso() {
    let x = initial();
    let id = InstanceMorphism::identity(&x);
    id.check().unwrap();
    assert!(id.is_monic());
    assert!(id.is_isomorphism());
    assert_eq!(id.then(&id).unwrap(), id);
}

#[test]
fn composition_is_associative_and_valid() {
    let mut successes = 0;
    for seed in 0..400u64 {
        let mut r = rng(seed);
        let schema = gen_schema(&mut r, true);
        let x = gen_instance(&mut r, &schema, 2, false);
        let y = gen_instance(&mut r, &schema, 3, true);
        let z = gen_instance(&mut r, &schema, 3, true);
        let opts = SearchOptions {
            max_results: Some(3),
            ..SearchOptions::default()
        };
        let fs = find_homs(&x, &y, &opts).unwrap();
        let gs = find_homs(&y, &z, &opts).unwrap();
        let hs = find_homs(&z, &z, &opts).unwrap();
        for f in &fs {
            for g in &gs {
                let fg = f.then(g).unwrap();
                fg.check().unwrap();
                for h in &hs {
                    let left = fg.then(h).unwrap();
                    let right = f.then(&g.then(h).unwrap()).unwrap();
                    assert_eq!(left, right);
                }
                successes += 1;
            }
        }
        if successes >= 100 {
            return;
        }
    }
    assert!(successes >= 100, "only {successes} composable pairs generated");
}

#[test]
fn identity_is_neutral_for_composition() {
    let x = initial();
    let g = goal();
    let opts = SearchOptions::default();
    for f in find_homs(&g, &x, &opts).unwrap() {
        assert_eq!(InstanceMorphism::identity(&g).then(&f).unwrap(), f);
        assert_eq!(f.then(&InstanceMorphism::identity(&x)).unwrap(), f);
    }
}

#[test]
fn inverses_compose_to_identities() {
    let x = initial();
    let isos: Vec<InstanceMorphism> = find_homs(&x, &x, &SearchOptions::monic())
        .unwrap()
        .into_iter()
        .filter(InstanceMorphism::is_isomorphism)
        .collect();
    assert!(!isos.is_empty());
    for f in isos {
        let inv = f.inverse().unwrap();
        assert_eq!(f.then(&inv).unwrap(), InstanceMorphism::identity(&x));
        assert_eq!(inv.then(&f).unwrap(), InstanceMorphism::identity(&x));
    }
}

#[test]
fn naturality_is_enforced() {
    // Mapping the On link x1 while permuting its endpoint blocks breaks
    // the commuting condition.
    let x = initial();
    let id = InstanceMorphism::identity(&x);
    let mut components = id.components.clone();
    let schema = x.schema();
    let block = schema.object_id("Block").unwrap();
    components[block].swap(0, 1);
    let broken = InstanceMorphism::new(x.clone(), x.clone(), components);
    assert!(broken.check().is_err());
}

#[test]
fn partial_entries_may_be_refined_but_not_contradicted() {
    let schema = blocksworld();
    let pattern = catplan_core::Instance::load(
        r#"{
            "schema": "ColorBlocksworld",
            "elements": {"Block": ["b"], "Empty": ["e"]}
        }"#,
        &schema,
    )
    .unwrap();
    let host = catplan_core::Instance::load(
        r#"{
            "schema": "ColorBlocksworld",
            "elements": {"Block": ["A"], "Empty": ["e"]},
            "homs": {"isEmpty": {"e": "A"}}
        }"#,
        &schema,
    )
    .unwrap();
    // Undefined isEmpty in the pattern maps onto a defined entry: fine.
    let homs = find_homs(&pattern, &host, &SearchOptions::default()).unwrap();
    assert_eq!(homs.len(), 1);
    // A defined entry must be preserved exactly.
    let pattern2 = catplan_core::Instance::load(
        r#"{
            "schema": "ColorBlocksworld",
            "elements": {"Block": ["b", "c"], "Empty": ["e"]},
            "homs": {"isEmpty": {"e": "c"}}
        }"#,
        &schema,
    )
    .unwrap();
    let host2 = catplan_core::Instance::load(
        r#"{
            "schema": "ColorBlocksworld",
            "elements": {"Block": ["A", "B"], "Empty": ["e"]},
            "homs": {"isEmpty": {"e": "A"}}
        }"#,
        &schema,
    )
    .unwrap();
    for m in find_homs(&pattern2, &host2, &SearchOptions::default()).unwrap() {
        let block = schema.object_id("Block").unwrap();
        assert_eq!(m.apply(block, 1), 0, "isEmpty image must land on A");
    }
}
