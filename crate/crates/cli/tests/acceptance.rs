//! End-to-end acceptance checks for the shipped case study and the
//! library's core guarantees. Each criterion prints one pass line; a
//! failed assertion fails its test instead.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::{Duration, Instant};

use catplan_core::testgen::{
    brute_force_homs, gen_applicable_span, gen_delta_map, gen_instance, gen_schema, rng,
};
use catplan_core::{
    apply_action, find_homs, goal_satisfaction, migrate_instance, migrate_morphism_with,
    run_plan, steps_from_json, verify_pushout, ActionSpan, Instance, OntologyMap, Schema,
    SearchOptions,
};

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .canonicalize()
        .unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("catplan-acceptance-{}-{name}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn catplan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_catplan"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "command failed: {}\n{}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn blocksworld() -> Schema {
    Schema::load(&fs::read_to_string(fixtures().join("blocksworld/schema.json")).unwrap()).unwrap()
}

fn kitchenworld() -> Schema {
    Schema::load(&fs::read_to_string(fixtures().join("kitchenworld/schema.json")).unwrap()).unwrap()
}

fn case_map() -> OntologyMap {
    OntologyMap::load(
        &fs::read_to_string(fixtures().join("maps/case_study.json")).unwrap(),
        &blocksworld(),
        &kitchenworld(),
    )
    .unwrap()
}

/// Run the three document-producing pipeline commands into `dir`,
/// returning the concatenated stdout.
fn run_pipeline(dir: &Path) -> String {
    let f = fixtures();
    let arg = |p: &Path| p.to_str().unwrap().to_owned();
    let mut all = String::new();
    all += &stdout(&catplan(&[
        "migrate",
        "--map", &arg(&f.join("maps/case_study.json")),
        "--source", &arg(&f.join("blocksworld/schema.json")),
        "--target", &arg(&f.join("kitchenworld/schema.json")),
        "--instance", &arg(&f.join("blocksworld/initial.json")),
        "-o", &arg(&dir.join("migrated.json")),
    ]));
    all += &stdout(&catplan(&[
        "run-plan",
        &arg(&f.join("blocksworld/plan.json")),
        "-o", &arg(&dir.join("trace.json")),
    ]));
    all += &stdout(&catplan(&[
        "transfer-plan",
        "--map", &arg(&f.join("maps/case_study.json")),
        "--source", &arg(&f.join("blocksworld/schema.json")),
        "--target", &arg(&f.join("kitchenworld/schema.json")),
        "--trace", &arg(&dir.join("trace.json")),
        "-o", &arg(&dir.join("transferred.json")),
    ]));
    all
}

#[test]
fn criterion_1_migrated_initial_state() {
    let start = Instant::now();
    let map = case_map();
    let initial = Instance::load(
        &fs::read_to_string(fixtures().join("blocksworld/initial.json")).unwrap(),
        &blocksworld(),
    )
    .unwrap();
    let y = migrate_instance(&map, &initial).unwrap().instance;
    let kw = kitchenworld();
    let expected = [
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
    ];
    for (name, n) in expected {
        assert_eq!(y.count(kw.object_id(name).unwrap()), n, "{name}");
    }
    let l = kw.hom_id("inReceptacle_l").unwrap();
    let r = kw.hom_id("inReceptacle_r").unwrap();
    // Object/Receptacle element i is block i (A B C D E F marker):
    // E-in-D and D-in-C.
    assert_eq!((y.hom(l, 0), y.hom(r, 0)), (Some(4), Some(3)));
    assert_eq!((y.hom(l, 1), y.hom(r, 1)), (Some(3), Some(2)));
    for (attr, a) in kw.attrs().iter().enumerate() {
        for elem in 0..y.count(a.src) {
            let v = y.attr(attr, elem).unwrap();
            if a.name.ends_with("HasMaterial") {
                assert_eq!(*v, catplan_core::Value::Str("Unknown".into()));
            } else {
                assert_eq!(*v, catplan_core::Value::Real(0.0));
            }
        }
    }
    // The CLI produces the identical document.
    let dir = scratch("c1");
    run_pipeline(&dir);
    let from_cli = fs::read_to_string(dir.join("migrated.json")).unwrap();
    assert_eq!(from_cli, y.serialize());
    assert!(start.elapsed() < Duration::from_secs(1), "criterion 1 runtime");
    println!("criterion 1 (migrated initial state): pass");
}

#[test]
fn criterion_2_source_plan_execution() {
    let start = Instant::now();
    let schema = blocksworld();
    let initial = Instance::load(
        &fs::read_to_string(fixtures().join("blocksworld/initial.json")).unwrap(),
        &schema,
    )
    .unwrap();
    let goal = Instance::load(
        &fs::read_to_string(fixtures().join("blocksworld/goal.json")).unwrap(),
        &schema,
    )
    .unwrap();
    let actions: Vec<ActionSpan> = ["pickup", "putdown", "stack", "unstack"]
        .iter()
        .map(|n| {
            let text =
                fs::read_to_string(fixtures().join(format!("blocksworld/actions/{n}.json")))
                    .unwrap();
            ActionSpan::from_json(&serde_json::from_str(&text).unwrap(), &schema).unwrap()
        })
        .collect();
    let plan_doc: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(fixtures().join("blocksworld/plan.json")).unwrap())
            .unwrap();
    let steps = steps_from_json(&plan_doc).unwrap();
    let trace = run_plan(&initial, &steps, &actions).unwrap();
    assert_eq!(trace.states.len(), 9);
    assert_eq!(goal_satisfaction(&goal, trace.final_state()).unwrap(), 1.0);
    assert!(start.elapsed() < Duration::from_secs(1), "criterion 2 runtime");
    println!("criterion 2 (source plan execution): pass");
}

#[test]
fn criterion_3_transfer_validity() {
    let start = Instant::now();
    let dir = scratch("c3");
    let f = fixtures();
    let arg = |p: &Path| p.to_str().unwrap().to_owned();
    let out = run_pipeline(&dir);
    let names: Vec<&str> = out
        .lines()
        .filter_map(|l| l.split_once(": ").filter(|(k, _)| k.starts_with("step")))
        .map(|(_, name)| name.split('(').next().unwrap())
        .collect();
    // run-plan and transfer-plan each list the eight steps.
    let expected = ["unstack", "putdown", "pickup", "stack", "pickup", "stack", "pickup", "stack"];
    assert_eq!(names.len(), 16);
    assert_eq!(&names[..8], expected);
    assert_eq!(&names[8..], expected);

    let validate = catplan(&[
        "validate-plan",
        "--map", &arg(&f.join("maps/case_study.json")),
        "--source", &arg(&f.join("blocksworld/schema.json")),
        "--target", &arg(&f.join("kitchenworld/schema.json")),
        "--goal", &arg(&f.join("blocksworld/goal.json")),
        "--plan", &arg(&dir.join("transferred.json")),
    ]);
    let text = stdout(&validate);
    assert!(text.contains("valid: true"), "{text}");
    assert!(text.contains("goalSatisfaction: 1.0"), "{text}");
    assert!(start.elapsed() < Duration::from_secs(1), "criterion 3 runtime");
    println!("criterion 3 (transfer validity): pass");
}

#[test]
fn criterion_4_migration_rewriting_commutes() {
    let start = Instant::now();
    let mut cases = 0;
    let mut seed = 100_000u64;
    while cases < 200 && seed < 120_000 {
        let mut r = rng(seed);
        seed += 1;
        let schema = gen_schema(&mut r, true);
        let state = gen_instance(&mut r, &schema, 4, true);
        let Some(step) = gen_applicable_span(&mut r, &state) else {
            continue;
        };
        let map = gen_delta_map(&mut r, &schema);

        let result = apply_action(&step.action, &step.match_, &state).unwrap();
        let m_state = migrate_instance(&map, &state).unwrap();
        let m_pre = migrate_instance(&map, &step.action.pre).unwrap();
        let m_keep = migrate_instance(&map, &step.action.keep).unwrap();
        let m_eff = migrate_instance(&map, &step.action.eff).unwrap();
        let m_action = ActionSpan {
            name: step.action.name.clone(),
            params: step.action.params.clone(),
            pre: m_pre.instance.clone(),
            keep: m_keep.instance.clone(),
            eff: m_eff.instance.clone(),
            l: migrate_morphism_with(&map, &step.action.l, &m_keep, &m_pre).unwrap(),
            r: migrate_morphism_with(&map, &step.action.r, &m_keep, &m_eff).unwrap(),
        };
        let m_match = migrate_morphism_with(&map, &step.match_, &m_pre, &m_state).unwrap();
        let m_result = apply_action(&m_action, &m_match, &m_state.instance).unwrap();

        let migrated_y = migrate_instance(&map, &result.result).unwrap();
        assert!(
            m_result.result.is_isomorphic(&migrated_y.instance).unwrap(),
            "seed {seed}"
        );
        let migrated_z = migrate_instance(&map, &result.context).unwrap();
        let kz =
            migrate_morphism_with(&map, &result.keep_to_context, &m_keep, &migrated_z).unwrap();
        let v = migrate_morphism_with(&map, &result.v, &migrated_z, &migrated_y).unwrap();
        let comatch = migrate_morphism_with(&map, &result.comatch, &m_eff, &migrated_y).unwrap();
        assert!(verify_pushout(&kz, &m_action.r, &v, &comatch).unwrap(), "seed {seed}");
        cases += 1;
    }
    assert!(cases >= 200, "only {cases} cases generated");
    assert!(start.elapsed() < Duration::from_secs(60), "criterion 4 runtime");
    println!("criterion 4 (migration commutes with rewriting, {cases} cases): pass");
}

#[test]
fn criterion_5_hom_search_oracle() {
    let start = Instant::now();
    let mut pairs = 0;
    let mut seed = 200_000u64;
    while pairs < 500 {
        let mut r = rng(seed);
        seed += 1;
        let schema = gen_schema(&mut r, true);
        let pattern = gen_instance(&mut r, &schema, 3, false);
        let host = gen_instance(&mut r, &schema, 3, false);
        for monic in [false, true] {
            let opts = SearchOptions {
                monic,
                ..SearchOptions::default()
            };
            let found: Vec<_> = find_homs(&pattern, &host, &opts)
                .unwrap()
                .into_iter()
                .map(|m| m.components)
                .collect();
            let expected: Vec<_> = brute_force_homs(&pattern, &host, monic)
                .unwrap()
                .into_iter()
                .map(|m| m.components)
                .collect();
            assert_eq!(found, expected, "seed {seed} monic {monic}");
        }
        pairs += 1;
    }
    assert!(pairs >= 500);
    assert!(start.elapsed() < Duration::from_secs(60), "criterion 5 runtime");
    println!("criterion 5 (hom search vs oracle, {pairs} pairs): pass");
}

#[test]
fn criterion_6_map_validation() {
    let f = fixtures();
    let arg = |p: &Path| p.to_str().unwrap().to_owned();
    let schema_args = [
        "--source".to_owned(),
        arg(&f.join("blocksworld/schema.json")),
        "--target".to_owned(),
        arg(&f.join("kitchenworld/schema.json")),
    ];

    // The Gripper-to-Block map is rejected with a diagnostic.
    let out = Command::new(env!("CARGO_BIN_EXE_catplan"))
        .arg("check-map")
        .args(&schema_args)
        .arg(f.join("maps/gripper_to_block.json"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("isHolding"), "diagnostic: {text}");

    // The swapped-link map is accepted and its transfer completes...
    let dir = scratch("c6");
    stdout(&catplan(&[
        "check-map",
        &schema_args[0], &schema_args[1],
        &schema_args[2], &schema_args[3],
        &arg(&f.join("maps/swapped_lr.json")),
    ]));
    stdout(&catplan(&[
        "run-plan",
        &arg(&f.join("blocksworld/plan.json")),
        "-o", &arg(&dir.join("trace.json")),
    ]));
    stdout(&catplan(&[
        "transfer-plan",
        "--map", &arg(&f.join("maps/swapped_lr.json")),
        &schema_args[0], &schema_args[1],
        &schema_args[2], &schema_args[3],
        "--trace", &arg(&dir.join("trace.json")),
        "-o", &arg(&dir.join("swapped.json")),
    ]));
    // ...but validation against the intended map's migrated goal fails.
    let out = Command::new(env!("CARGO_BIN_EXE_catplan"))
        .args([
            "validate-plan",
            "--map", &arg(&f.join("maps/case_study.json")),
            &schema_args[0], &schema_args[1],
            &schema_args[2], &schema_args[3],
            "--goal", &arg(&f.join("blocksworld/goal.json")),
            "--plan", &arg(&dir.join("swapped.json")),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("valid: false"), "{text}");
    println!("criterion 6 (map validation): pass");
}

#[test]
fn criterion_7_determinism() {
    let dir_a = scratch("c7a");
    let dir_b = scratch("c7b");
    let out_a = run_pipeline(&dir_a);
    let out_b = run_pipeline(&dir_b);
    // Identical stdout apart from the output paths themselves.
    let scrub = |s: &str| -> String {
        s.lines()
            .filter(|l| !l.contains(" -> "))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(scrub(&out_a), scrub(&out_b));
    for name in ["migrated.json", "trace.json", "transferred.json"] {
        let a = fs::read(dir_a.join(name)).unwrap();
        let b = fs::read(dir_b.join(name)).unwrap();
        assert_eq!(a, b, "{name} differs across runs");
    }
    println!("criterion 7 (determinism): pass");
}
