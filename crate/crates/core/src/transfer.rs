//! Plan transfer along an ontology map, and validation of the result.
//!
//! Delta maps act one-to-one on elements, so actions and matches migrate
//! directly and the target plan is re-derived by rewriting (its states
//! provably equal the migrated source states). Conjunctive maps classify
//! elements by attribute values that ungrounded patterns lack, so for
//! them the executed trace's bottom rows are migrated instead.

use serde_json::{json, Map, Value as Json};

use crate::dpo::{apply_action, ActionSpan, GroundedStep};
use crate::error::{Error, Result};
use crate::homsearch::{exists_mono, goal_satisfaction};
use crate::instance::{Instance, InstanceMorphism};
use crate::migration::{migrate_instance, migrate_morphism_with, MigrationResult};
use crate::ontmap::OntologyMap;
use crate::plan::{display_name, PlanTrace};
use crate::schema::{expect_array, field_str};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransferMode {
    Delta,
    Trace,
}

impl TransferMode {
    pub fn name(self) -> &'static str {
        match self {
            TransferMode::Delta => "delta",
            TransferMode::Trace => "trace",
        }
    }
}

/// One transferred step: the grounded rewrite between consecutive target
/// states. In delta mode the migrated action span and match are carried
/// along; in trace mode only the bottom row is available.
#[derive(Debug, Clone)]
pub struct TransferredStep {
    /// Presentation name: source action name with migrated match labels.
    pub name: String,
    pub context: Instance,
    /// `context -> states[i]`.
    pub u: InstanceMorphism,
    /// `context -> states[i+1]`.
    pub v: InstanceMorphism,
    /// Delta mode only: the migrated span and match.
    pub grounded: Option<GroundedStep>,
}

#[derive(Debug, Clone)]
pub struct TransferredPlan {
    pub mode: TransferMode,
    pub states: Vec<Instance>,
    pub steps: Vec<TransferredStep>,
    /// Provenance: name of the source schema the trace was executed over.
    pub source_ref: String,
}

impl TransferredPlan {
    pub fn final_state(&self) -> &Instance {
        self.states.last().expect("plans hold at least one state")
    }

    pub fn display_names(&self) -> Vec<String> {
        self.steps.iter().map(|s| s.name.clone()).collect()
    }

    pub fn to_json(&self) -> Json {
        let states: Vec<Json> = self.states.iter().map(Instance::to_json).collect();
        let steps: Vec<Json> = self
            .steps
            .iter()
            .map(|s| {
                let mut m = Map::new();
                m.insert("name".into(), json!(s.name));
                m.insert("context".into(), s.context.to_json());
                m.insert("u".into(), s.u.components_to_json());
                m.insert("v".into(), s.v.components_to_json());
                if let Some(g) = &s.grounded {
                    m.insert("action".into(), g.action.to_json());
                    m.insert("match".into(), g.match_.components_to_json());
                }
                Json::Object(m)
            })
            .collect();
        let mut map = Map::new();
        map.insert(
            "schema".into(),
            json!(self.states[0].schema().name()),
        );
        map.insert("mode".into(), json!(self.mode.name()));
        map.insert("sourceRef".into(), json!(self.source_ref));
        map.insert("states".into(), Json::Array(states));
        map.insert("steps".into(), Json::Array(steps));
        Json::Object(map)
    }

    pub fn serialize(&self) -> String {
        crate::doc::to_canonical_string(&self.to_json())
    }

    pub fn from_json(doc: &Json, schema: &crate::schema::Schema) -> Result<TransferredPlan> {
        let name = field_str(doc, "schema")?;
        if name != schema.name() {
            return Err(Error::SchemaMismatch(format!(
                "transferred plan is over `{name}`, loaded schema is `{}`",
                schema.name()
            )));
        }
        let mode = match field_str(doc, "mode")?.as_str() {
            "delta" => TransferMode::Delta,
            "trace" => TransferMode::Trace,
            other => return Err(Error::Parse(format!("unknown transfer mode `{other}`"))),
        };
        let source_ref = field_str(doc, "sourceRef")?;
        let states_doc = doc
            .get("states")
            .ok_or_else(|| Error::Parse("transferred plan missing `states`".into()))?;
        let mut states = Vec::new();
        for s in expect_array(states_doc, "states")? {
            states.push(Instance::from_json(s, schema)?);
        }
        if states.is_empty() {
            return Err(Error::Parse("transferred plan must hold at least one state".into()));
        }
        let steps_doc = doc
            .get("steps")
            .ok_or_else(|| Error::Parse("transferred plan missing `steps`".into()))?;
        let steps_doc = expect_array(steps_doc, "steps")?;
        if steps_doc.len() + 1 != states.len() {
            return Err(Error::Parse(
                "transferred plan must hold one more state than steps".into(),
            ));
        }
        let mut steps = Vec::new();
        for (i, s) in steps_doc.iter().enumerate() {
            let get = |field: &str| -> Result<&Json> {
                s.get(field)
                    .ok_or_else(|| Error::Parse(format!("step {i} missing `{field}`")))
            };
            let context = Instance::from_json(get("context")?, schema)?;
            let u = InstanceMorphism::components_from_json(get("u")?, &context, &states[i])?;
            let v = InstanceMorphism::components_from_json(get("v")?, &context, &states[i + 1])?;
            u.check().map_err(|e| e.at_step(i))?;
            v.check().map_err(|e| e.at_step(i))?;
            let grounded = match (s.get("action"), s.get("match")) {
                (Some(a), Some(m)) => {
                    let action = ActionSpan::from_json(a, schema)?;
                    let match_ =
                        InstanceMorphism::components_from_json(m, &action.pre, &states[i])?;
                    match_.check().map_err(|e| e.at_step(i))?;
                    Some(GroundedStep { action, match_ })
                }
                _ => None,
            };
            steps.push(TransferredStep {
                name: field_str(s, "name")?,
                context,
                u,
                v,
                grounded,
            });
        }
        Ok(TransferredPlan {
            mode,
            states,
            steps,
            source_ref,
        })
    }
}

/// Transfer a fully executed source plan along the map.
pub fn transfer_plan(map: &OntologyMap, trace: &PlanTrace) -> Result<TransferredPlan> {
    let report = map.check();
    if !report.is_ok() {
        return Err(Error::InvalidMap(report.issues.join("; ")));
    }
    if trace.schema() != map.source() {
        return Err(Error::SchemaMismatch(
            "trace is not over the map's source schema".into(),
        ));
    }
    if map.is_delta() {
        transfer_delta(map, trace)
    } else {
        transfer_trace(map, trace)
    }
}

fn transfer_delta(map: &OntologyMap, trace: &PlanTrace) -> Result<TransferredPlan> {
    let mut current = migrate_instance(map, &trace.states[0])?;
    let mut states = vec![current.instance.clone()];
    let mut steps = Vec::new();
    for (i, step) in trace.steps.iter().enumerate() {
        let run = |current: &MigrationResult| -> Result<(TransferredStep, MigrationResult)> {
            let pre = migrate_instance(map, &step.action.pre)?;
            let keep = migrate_instance(map, &step.action.keep)?;
            let eff = migrate_instance(map, &step.action.eff)?;
            let action = ActionSpan {
                name: step.action.name.clone(),
                params: step.action.params.clone(),
                pre: pre.instance.clone(),
                keep: keep.instance.clone(),
                eff: eff.instance.clone(),
                l: migrate_morphism_with(map, &step.action.l, &keep, &pre)?,
                r: migrate_morphism_with(map, &step.action.r, &keep, &eff)?,
            };
            let match_ = migrate_morphism_with(map, &step.match_, &pre, current)?;
            let result = apply_action(&action, &match_, &current.instance)?;
            let next = migrate_instance(map, &trace.states[i + 1])?;
            if !result.result.same_structure(&next.instance) {
                return Err(Error::InvalidMorphism(
                    "re-derived target state diverges from the migrated source state".into(),
                ));
            }
            let name = display_name(&action, &match_);
            Ok((
                TransferredStep {
                    name,
                    context: result.context,
                    u: result.u,
                    v: result.v,
                    grounded: Some(GroundedStep { action, match_ }),
                },
                next,
            ))
        };
        let (step, next) = run(&current).map_err(|e| e.at_step(i))?;
        states.push(step.v.cod.clone());
        steps.push(step);
        // Continue from the migrated state so matches keep lining up
        // with the source trace's bindings.
        current = MigrationResult {
            instance: states.last().unwrap().clone(),
            ..next
        };
    }
    Ok(TransferredPlan {
        mode: TransferMode::Delta,
        states,
        steps,
        source_ref: trace.schema().name().to_owned(),
    })
}

fn transfer_trace(map: &OntologyMap, trace: &PlanTrace) -> Result<TransferredPlan> {
    let mut migrated: Vec<MigrationResult> = Vec::with_capacity(trace.states.len());
    for (i, state) in trace.states.iter().enumerate() {
        migrated.push(migrate_instance(map, state).map_err(|e| e.at_step(i))?);
    }
    let mut steps = Vec::new();
    for (i, step) in trace.steps.iter().enumerate() {
        let run = || -> Result<TransferredStep> {
            let context = migrate_instance(map, &step.context)?;
            let u = migrate_morphism_with(map, &step.u, &context, &migrated[i])?;
            let v = migrate_morphism_with(map, &step.v, &context, &migrated[i + 1])?;
            Ok(TransferredStep {
                name: step.display_name(),
                context: context.instance,
                u,
                v,
                grounded: None,
            })
        };
        steps.push(run().map_err(|e| e.at_step(i))?);
    }
    Ok(TransferredPlan {
        mode: TransferMode::Trace,
        states: migrated.into_iter().map(|m| m.instance).collect(),
        steps,
        source_ref: trace.schema().name().to_owned(),
    })
}

/// Outcome of validating a transferred plan against a migrated goal.
#[derive(Debug, Clone)]
pub struct TransferReport {
    pub valid: bool,
    pub goal_satisfaction: f64,
    pub mode: TransferMode,
    pub diagnostics: Vec<String>,
}

/// Migrate the source goal and check it embeds monically into the final
/// transferred state. For delta maps validity is guaranteed whenever the
/// source plan was valid; the monomorphism is still searched for as a
/// sanity assertion.
pub fn validate_transfer(
    map: &OntologyMap,
    goal: &Instance,
    plan: &TransferredPlan,
) -> Result<TransferReport> {
    if goal.schema() != map.source() {
        return Err(Error::SchemaMismatch(
            "goal is not over the map's source schema".into(),
        ));
    }
    if plan.states[0].schema() != map.target() {
        return Err(Error::SchemaMismatch(
            "transferred plan is not over the map's target schema".into(),
        ));
    }
    let migrated_goal = migrate_instance(map, goal)?.instance;
    let final_state = plan.final_state();
    let valid = exists_mono(&migrated_goal, final_state)?;
    let sat = goal_satisfaction(&migrated_goal, final_state)?;
    let mut diagnostics = Vec::new();
    match plan.mode {
        TransferMode::Delta => {
            diagnostics.push(
                "delta migration preserves pushout squares; validity carries over from the source plan"
                    .to_owned(),
            );
            if !valid {
                diagnostics.push(
                    "sanity assertion failed: no goal monomorphism despite delta mode".to_owned(),
                );
            }
        }
        TransferMode::Trace => {
            if !valid {
                diagnostics
                    .push("no monomorphism from the migrated goal into the final state".to_owned());
            }
        }
    }
    Ok(TransferReport {
        valid,
        goal_satisfaction: sat,
        mode: plan.mode,
        diagnostics,
    })
}

/// Structural diff of two plans: step counts, per-step action names, and
/// per-state isomorphism. Empty when the plans agree up to isomorphism.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlanDiff {
    pub entries: Vec<String>,
}

impl PlanDiff {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Index and description of the first divergence.
    pub fn first_divergence(&self) -> Option<&str> {
        self.entries.first().map(String::as_str)
    }
}

/// Compare two state sequences with their step names.
pub fn diff_plans(
    states_a: &[Instance],
    names_a: &[String],
    states_b: &[Instance],
    names_b: &[String],
) -> Result<PlanDiff> {
    if states_a[0].schema() != states_b[0].schema() {
        return Err(Error::SchemaMismatch(
            "plans are over different schemas".into(),
        ));
    }
    let mut entries = Vec::new();
    if states_a.len() != states_b.len() {
        entries.push(format!(
            "state count differs: {} vs {}",
            states_a.len(),
            states_b.len()
        ));
    }
    for (i, (a, b)) in states_a.iter().zip(states_b).enumerate() {
        if !a.is_isomorphic(b)? {
            entries.push(format!("state {i} is not isomorphic"));
        }
    }
    for (i, (a, b)) in names_a.iter().zip(names_b).enumerate() {
        if a != b {
            entries.push(format!("step {i} action differs: `{a}` vs `{b}`"));
        }
    }
    entries.sort();
    Ok(PlanDiff { entries })
}
