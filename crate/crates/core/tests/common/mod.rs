#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};

use catplan_core::{
    run_plan, steps_from_json, ActionSpan, Instance, OntologyMap, PlanStep, PlanTrace, Schema,
};

pub fn fixture_path(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(rel)
}

pub fn fixture(rel: &str) -> String {
    fs::read_to_string(fixture_path(rel)).unwrap()
}

pub fn blocksworld() -> Schema {
    Schema::load(&fixture("blocksworld/schema.json")).unwrap()
}

pub fn kitchenworld() -> Schema {
    Schema::load(&fixture("kitchenworld/schema.json")).unwrap()
}

pub fn initial() -> Instance {
    Instance::load(&fixture("blocksworld/initial.json"), &blocksworld()).unwrap()
}

pub fn goal() -> Instance {
    Instance::load(&fixture("blocksworld/goal.json"), &blocksworld()).unwrap()
}

pub fn actions() -> Vec<ActionSpan> {
    let schema = blocksworld();
    ["pickup", "putdown", "stack", "unstack"]
        .iter()
        .map(|name| {
            let text = fixture(&format!("blocksworld/actions/{name}.json"));
            let doc: serde_json::Value = serde_json::from_str(&text).unwrap();
            ActionSpan::from_json(&doc, &schema).unwrap()
        })
        .collect()
}

pub fn action(name: &str) -> ActionSpan {
    actions().into_iter().find(|a| a.name == name).unwrap()
}

pub fn case_map() -> OntologyMap {
    OntologyMap::load(&fixture("maps/case_study.json"), &blocksworld(), &kitchenworld()).unwrap()
}

pub fn map(name: &str) -> OntologyMap {
    OntologyMap::load(
        &fixture(&format!("maps/{name}.json")),
        &blocksworld(),
        &kitchenworld(),
    )
    .unwrap()
}

pub fn plan_steps() -> Vec<PlanStep> {
    let doc: serde_json::Value =
        serde_json::from_str(&fixture("blocksworld/plan.json")).unwrap();
    steps_from_json(&doc).unwrap()
}

pub fn run_fixture_plan() -> PlanTrace {
    run_plan(&initial(), &plan_steps(), &actions()).unwrap()
}
