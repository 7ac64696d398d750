//! Conjunctive-query evaluation and functorial data migration.

mod common;

use catplan_core::testgen::{gen_delta_map, gen_instance, gen_schema, rng};
use catplan_core::{
    evaluate_query, find_homs, migrate_instance, migrate_morphism, InstanceMorphism,
    OntologyMap, Query, QueryVar, SearchOptions, Value,
};
use common::*;

#[test]
fn case_study_migration_reproduces_the_expected_instance() {
    let map = case_map();
    let migrated = migrate_instance(&map, &initial()).unwrap();
    let y = &migrated.instance;
    let kw = kitchenworld();
    let counts: Vec<(&str, usize)> = kw
        .objects()
        .iter()
        .enumerate()
        .map(|(ob, name)| (name.as_str(), y.count(ob)))
        .collect();
    assert_eq!(
        counts,
        [
            ("Object", 7),
            ("Receptacle", 7),
            ("Empty", 1),
            ("Gripper", 1),
            ("InReceptacle", 2),
            ("BreadSliced", 2),
            ("LettuceSliced", 1),
            ("TomatoSliced", 1),
            ("Plate", 1),
            ("Knife", 1),
        ]
    );

    // Bare queries enumerate blocks in order, so Object/Receptacle element
    // i is block i: A B C D E F marker. The two InReceptacle facts are
    // E-in-D and D-in-C.
    let in_r = kw.object_id("InReceptacle").unwrap();
    let l = kw.hom_id("inReceptacle_l").unwrap();
    let r = kw.hom_id("inReceptacle_r").unwrap();
    assert_eq!(y.count(in_r), 2);
    assert_eq!((y.hom(l, 0), y.hom(r, 0)), (Some(4), Some(3)));
    assert_eq!((y.hom(l, 1), y.hom(r, 1)), (Some(3), Some(2)));

    // BreadSliced picks out the purple blocks D and E, with labels
    // inherited from the roots.
    let bread = kw.object_id("BreadSliced").unwrap();
    assert_eq!(y.labels(bread), [Some("D".to_owned()), Some("E".to_owned())]);
    assert_eq!(migrated.bindings[bread].len(), 2);

    // Every migrated attribute takes its constant default.
    for (attr, a) in kw.attrs().iter().enumerate() {
        for elem in 0..y.count(a.src) {
            let expected = if a.name.ends_with("HasMaterial") {
                Value::Str("Unknown".into())
            } else {
                Value::Real(0.0)
            };
            assert_eq!(y.attr(attr, elem), Some(&expected), "{}", a.name);
        }
    }
}

#[test]
fn migrated_goal_embeds_only_after_the_plan() {
    let map = case_map();
    let migrated_goal = migrate_instance(&map, &goal()).unwrap().instance;
    let migrated_initial = migrate_instance(&map, &initial()).unwrap().instance;
    assert!(!catplan_core::exists_mono(&migrated_goal, &migrated_initial).unwrap());
    let trace = run_fixture_plan();
    let migrated_final = migrate_instance(&map, trace.final_state()).unwrap().instance;
    assert!(catplan_core::exists_mono(&migrated_goal, &migrated_final).unwrap());
}

#[test]
fn query_evaluation_is_lexicographic_and_strict() {
    let schema = blocksworld();
    let state = initial();
    let block = schema.object_id("Block").unwrap();
    let on = schema.object_id("On").unwrap();
    let on_l = schema.hom_id("on_l").unwrap();

    // All (link, upper block) pairs with on_l(o) == x.
    let query = Query {
        vars: vec![
            QueryVar { name: "o".into(), object: on },
            QueryVar { name: "x".into(), object: block },
        ],
        hom_constraints: vec![(on_l, 0, 1)],
        attr_constraints: vec![],
    };
    let matches = evaluate_query(&query, &state).unwrap();
    let got: Vec<Vec<usize>> = matches.into_iter().map(|m| m.assignment).collect();
    assert_eq!(got, [vec![0, 4], vec![1, 3]]);

    // The same query on a host whose on_l is undefined matches nothing.
    let partial = catplan_core::Instance::load(
        r#"{
            "schema": "ColorBlocksworld",
            "elements": {"Block": ["A"], "On": ["o"]},
            "homs": {"on_r": {"o": "A"}}
        }"#,
        &schema,
    )
    .unwrap();
    assert!(evaluate_query(&query, &partial).unwrap().is_empty());
}

#[test]
fn attr_constraints_filter_matches() {
    let schema = blocksworld();
    let block = schema.object_id("Block").unwrap();
    let has_color = schema.attr_id("hasColor").unwrap();
    let query = Query {
        vars: vec![QueryVar { name: "b".into(), object: block }],
        hom_constraints: vec![],
        attr_constraints: vec![(has_color, 0, Value::Str("purple".into()))],
    };
    let matches = evaluate_query(&query, &initial()).unwrap();
    let got: Vec<Vec<usize>> = matches.into_iter().map(|m| m.assignment).collect();
    assert_eq!(got, [vec![3], vec![4]]);
}

#[test]
fn ill_typed_queries_are_rejected() {
    let schema = blocksworld();
    let on_l = schema.hom_id("on_l").unwrap();
    let block = schema.object_id("Block").unwrap();
    let query = Query {
        vars: vec![
            QueryVar { name: "x".into(), object: block },
            QueryVar { name: "y".into(), object: block },
        ],
        hom_constraints: vec![(on_l, 0, 1)],
        attr_constraints: vec![],
    };
    assert!(evaluate_query(&query, &initial()).is_err());
}

#[test]
fn delta_migration_preserves_cardinalities() {
    for seed in 0..60u64 {
        let mut r = rng(seed);
        let source = gen_schema(&mut r, true);
        let host = gen_instance(&mut r, &source, 4, false);
        let map = gen_delta_map(&mut r, &source);
        let migrated = migrate_instance(&map, &host).unwrap();
        for ob in 0..map.target().objects().len() {
            let src_ob = map.object_query(ob).vars[0].object;
            assert_eq!(
                migrated.instance.count(ob),
                host.count(src_ob),
                "seed {seed} object {ob}"
            );
        }
    }
}

#[test]
fn migration_is_functorial() {
    let mut composites = 0;
    for seed in 0..600u64 {
        let mut r = rng(seed);
        let source = gen_schema(&mut r, true);
        let map = gen_delta_map(&mut r, &source);
        let x = gen_instance(&mut r, &source, 2, false);
        let y = gen_instance(&mut r, &source, 3, true);
        let z = gen_instance(&mut r, &source, 3, true);

        // Identities migrate to identities.
        let mid = migrate_morphism(&map, &InstanceMorphism::identity(&x)).unwrap();
        assert_eq!(mid, InstanceMorphism::identity(&mid.dom));

        let opts = SearchOptions {
            max_results: Some(2),
            ..SearchOptions::default()
        };
        for f in find_homs(&x, &y, &opts).unwrap() {
            for g in find_homs(&y, &z, &opts).unwrap() {
                let lhs = migrate_morphism(&map, &f.then(&g).unwrap()).unwrap();
                let rhs = migrate_morphism(&map, &f)
                    .unwrap()
                    .then(&migrate_morphism(&map, &g).unwrap())
                    .unwrap();
                assert_eq!(lhs, rhs, "seed {seed}");
                composites += 1;
            }
        }
        if composites >= 100 {
            return;
        }
    }
    assert!(composites >= 100, "only {composites} composable pairs generated");
}

#[test]
fn unentailed_hom_maps_are_rejected() {
    // A target hom from an unclassified object into a color-classified
    // one would be partial whenever the source entry lands outside the
    // class (the gripper can hold the colorless marker block), so the
    // checker must reject it: nothing entails hasColor == purple at the
    // image of isHolding.
    let schema = blocksworld();
    let target = catplan_core::Schema::load(
        r#"{
            "name": "BreadHolder",
            "objects": ["Holder", "Bread"],
            "homs": [{"name": "holds", "src": "Holder", "tgt": "Bread"}],
            "attrtypes": [],
            "attrs": []
        }"#,
    )
    .unwrap();
    let map = OntologyMap::load(
        r#"{
            "source": "ColorBlocksworld",
            "target": "BreadHolder",
            "objects": {
                "Holder": {"vars": [{"name": "x", "type": "Gripper"}], "homEqs": [], "attrEqs": []},
                "Bread": {
                    "vars": [{"name": "b", "type": "Block"}],
                    "homEqs": [],
                    "attrEqs": [["hasColor", "b", "purple"]]
                }
            },
            "homs": {"holds": {"b": "isHolding(x)"}},
            "attrtypes": {},
            "attrs": {}
        }"#,
        &schema,
        &target,
    )
    .unwrap();
    let report = map.check();
    assert!(!report.is_ok());
    assert!(
        report
            .issues
            .iter()
            .any(|i| i.contains("hasColor") && i.contains("not entailed")),
        "issues: {:?}",
        report.issues
    );
    assert!(matches!(
        migrate_instance(&map, &initial()),
        Err(catplan_core::Error::InvalidMap(_))
    ));
}

#[test]
fn identity_map_is_a_delta_and_migrates_to_the_same_structure() {
    let schema = blocksworld();
    let map = OntologyMap::identity(&schema);
    assert!(map.is_delta());
    assert!(map.check().is_ok());
    let migrated = migrate_instance(&map, &initial()).unwrap().instance;
    assert!(migrated.same_structure(&initial()));
}
