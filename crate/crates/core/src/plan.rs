//! Grounded plans: sequential action application and the resulting
//! execution traces.

use std::collections::BTreeMap;

use serde_json::{json, Map, Value as Json};

use crate::dpo::{apply_action, ActionSpan};
use crate::error::{Error, Result};
use crate::homsearch::{find_homs, SearchOptions};
use crate::instance::{Instance, InstanceMorphism};
use crate::schema::{expect_array, field_str, Schema};

/// One unresolved plan entry: an action name plus a partial label map
/// `pre label -> state element reference` pinning the match.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlanStep {
    pub action: String,
    pub bindings: Vec<(String, String)>,
}

/// Parse a plan document's step list: `[{action, match: {label: ref}}]`.
pub fn steps_from_json(doc: &Json) -> Result<Vec<PlanStep>> {
    let steps = doc
        .get("steps")
        .ok_or_else(|| Error::Parse("plan document missing `steps`".into()))?;
    let mut out = Vec::new();
    for step in expect_array(steps, "steps")? {
        let action = field_str(step, "action")?;
        let mut bindings = Vec::new();
        if let Some(m) = step.get("match") {
            let m = m
                .as_object()
                .ok_or_else(|| Error::Parse("step `match` must be an object".into()))?;
            for (k, v) in m {
                let v = v
                    .as_str()
                    .ok_or_else(|| Error::Parse("step `match` values must be strings".into()))?;
                bindings.push((k.clone(), v.to_owned()));
            }
        }
        out.push(PlanStep { action, bindings });
    }
    Ok(out)
}

pub fn steps_to_json(steps: &[PlanStep]) -> Json {
    Json::Array(
        steps
            .iter()
            .map(|s| {
                let mut m = Map::new();
                for (k, v) in &s.bindings {
                    m.insert(k.clone(), json!(v));
                }
                json!({"action": s.action, "match": Json::Object(m)})
            })
            .collect(),
    )
}

/// Extend a partial label map to a full monic match of the action's
/// precondition in the state, taking the first match in the search's
/// normalized order.
pub fn resolve_match(
    action: &ActionSpan,
    bindings: &[(String, String)],
    state: &Instance,
) -> Result<InstanceMorphism> {
    let schema = state.schema();
    let mut fixed = Vec::new();
    for (pre_label, state_ref) in bindings {
        let mut found = None;
        for ob in 0..schema.objects().len() {
            if let Some(pe) = action.pre.element_by_label(ob, pre_label) {
                found = Some((ob, pe));
                break;
            }
        }
        let Some((ob, pe)) = found else {
            return Err(Error::InvalidMatch(format!(
                "action `{}` has no precondition element labeled `{pre_label}`",
                action.name
            )));
        };
        fixed.push((ob, pe, state.resolve_ref(ob, state_ref)?));
    }
    let opts = SearchOptions {
        monic: true,
        max_results: Some(1),
        fixed,
    };
    find_homs(&action.pre, state, &opts)?
        .into_iter()
        .next()
        .ok_or_else(|| {
            Error::InvalidMatch(format!(
                "no match for `{}` under the given bindings",
                action.name
            ))
        })
}

/// One executed step of a trace: the grounded action plus the full DPO
/// bottom row around it.
#[derive(Debug, Clone)]
pub struct TraceStep {
    pub action: ActionSpan,
    /// Monic `pre -> states[i]`.
    pub match_: InstanceMorphism,
    pub context: Instance,
    /// `context -> states[i]`.
    pub u: InstanceMorphism,
    /// `context -> states[i+1]`.
    pub v: InstanceMorphism,
    /// `eff -> states[i+1]`.
    pub comatch: InstanceMorphism,
    /// `keep -> context`.
    pub keep_to_context: InstanceMorphism,
}

impl TraceStep {
    /// Presentation name `action(labels...)`: the action's parameters
    /// substituted with the matched state elements.
    pub fn display_name(&self) -> String {
        display_name(&self.action, &self.match_)
    }
}

pub(crate) fn display_name(action: &ActionSpan, m: &InstanceMorphism) -> String {
    let schema = m.cod.schema();
    let args: Vec<String> = action
        .params
        .iter()
        .map(|p| {
            for ob in 0..schema.objects().len() {
                if let Some(pe) = action.pre.element_by_label(ob, p) {
                    return m.cod.elem_ref(ob, m.apply(ob, pe));
                }
            }
            p.clone()
        })
        .collect();
    format!("{}({})", action.name, args.join(", "))
}

/// A fully executed plan: the state sequence and every DPO square.
#[derive(Debug, Clone)]
pub struct PlanTrace {
    pub states: Vec<Instance>,
    pub steps: Vec<TraceStep>,
}

impl PlanTrace {
    pub fn schema(&self) -> &Schema {
        self.states[0].schema()
    }

    pub fn final_state(&self) -> &Instance {
        self.states.last().expect("traces hold at least one state")
    }

    pub fn display_names(&self) -> Vec<String> {
        self.steps.iter().map(TraceStep::display_name).collect()
    }

    /// Trace document: states, the actions used, and every morphism of
    /// each step's squares.
    pub fn to_json(&self) -> Json {
        let mut actions: BTreeMap<&str, &ActionSpan> = BTreeMap::new();
        for step in &self.steps {
            actions.entry(&step.action.name).or_insert(&step.action);
        }
        let mut actions_doc = Map::new();
        for (name, action) in actions {
            actions_doc.insert(name.to_owned(), action.to_json());
        }
        let states: Vec<Json> = self.states.iter().map(Instance::to_json).collect();
        let steps: Vec<Json> = self
            .steps
            .iter()
            .map(|s| {
                json!({
                    "action": s.action.name,
                    "match": s.match_.components_to_json(),
                    "context": s.context.to_json(),
                    "u": s.u.components_to_json(),
                    "v": s.v.components_to_json(),
                    "comatch": s.comatch.components_to_json(),
                })
            })
            .collect();
        let mut map = Map::new();
        map.insert("schema".into(), json!(self.schema().name()));
        map.insert("actions".into(), Json::Object(actions_doc));
        map.insert("states".into(), Json::Array(states));
        map.insert("steps".into(), Json::Array(steps));
        Json::Object(map)
    }

    pub fn serialize(&self) -> String {
        crate::doc::to_canonical_string(&self.to_json())
    }

    pub fn from_json(doc: &Json, schema: &Schema) -> Result<PlanTrace> {
        let name = field_str(doc, "schema")?;
        if name != schema.name() {
            return Err(Error::SchemaMismatch(format!(
                "trace is over `{name}`, loaded schema is `{}`",
                schema.name()
            )));
        }
        let actions_doc = doc
            .get("actions")
            .and_then(Json::as_object)
            .ok_or_else(|| Error::Parse("trace document missing `actions`".into()))?;
        let mut actions: BTreeMap<String, ActionSpan> = BTreeMap::new();
        for (name, a) in actions_doc {
            actions.insert(name.clone(), ActionSpan::from_json(a, schema)?);
        }
        let states_doc = doc
            .get("states")
            .ok_or_else(|| Error::Parse("trace document missing `states`".into()))?;
        let mut states = Vec::new();
        for s in expect_array(states_doc, "states")? {
            states.push(Instance::from_json(s, schema)?);
        }
        if states.is_empty() {
            return Err(Error::Parse("trace must hold at least one state".into()));
        }
        let steps_doc = doc
            .get("steps")
            .ok_or_else(|| Error::Parse("trace document missing `steps`".into()))?;
        let steps_doc = expect_array(steps_doc, "steps")?;
        if steps_doc.len() + 1 != states.len() {
            return Err(Error::Parse("trace must hold one more state than steps".into()));
        }
        let mut steps = Vec::new();
        for (i, s) in steps_doc.iter().enumerate() {
            let action_name = field_str(s, "action")?;
            let action = actions
                .get(&action_name)
                .ok_or_else(|| Error::Parse(format!("step {i} uses unknown action `{action_name}`")))?
                .clone();
            let get = |field: &str| -> Result<&Json> {
                s.get(field)
                    .ok_or_else(|| Error::Parse(format!("step {i} missing `{field}`")))
            };
            let context = Instance::from_json(get("context")?, schema)?;
            let match_ =
                InstanceMorphism::components_from_json(get("match")?, &action.pre, &states[i])?;
            let u = InstanceMorphism::components_from_json(get("u")?, &context, &states[i])?;
            let v = InstanceMorphism::components_from_json(get("v")?, &context, &states[i + 1])?;
            let comatch =
                InstanceMorphism::components_from_json(get("comatch")?, &action.eff, &states[i + 1])?;
            // keep -> context is determined: u is monic and u(kz) = match(l).
            let keep_to_context = solve_through_mono(&action.l.then(&match_)?, &u)?;
            for m in [&match_, &u, &v, &comatch, &keep_to_context] {
                m.check().map_err(|e| e.at_step(i))?;
            }
            steps.push(TraceStep {
                action,
                match_,
                context,
                u,
                v,
                comatch,
                keep_to_context,
            });
        }
        Ok(PlanTrace { states, steps })
    }
}

/// Factor `f: A -> X` through a monic `u: Z -> X` as `A -> Z`.
fn solve_through_mono(f: &InstanceMorphism, u: &InstanceMorphism) -> Result<InstanceMorphism> {
    let mut components = Vec::with_capacity(f.components.len());
    for (ob, comp) in f.components.iter().enumerate() {
        let mut col = Vec::with_capacity(comp.len());
        for &x in comp {
            let z = u.components[ob]
                .iter()
                .position(|&ux| ux == x)
                .ok_or_else(|| {
                    Error::InvalidMorphism("morphism does not factor through the context".into())
                })?;
            col.push(z);
        }
        components.push(col);
    }
    Ok(InstanceMorphism::new(
        f.dom.clone(),
        u.dom.clone(),
        components,
    ))
}

/// Execute a plan from an initial state, resolving each step's match
/// against the current state. Fails atomically on the first inapplicable
/// step, annotated with its index.
pub fn run_plan(
    initial: &Instance,
    steps: &[PlanStep],
    actions: &[ActionSpan],
) -> Result<PlanTrace> {
    let mut states = vec![initial.clone()];
    let mut trace_steps = Vec::new();
    for (i, step) in steps.iter().enumerate() {
        let run = || -> Result<TraceStep> {
            let action = actions
                .iter()
                .find(|a| a.name == step.action)
                .ok_or_else(|| Error::Parse(format!("unknown action `{}`", step.action)))?;
            let state = states.last().unwrap();
            let m = resolve_match(action, &step.bindings, state)?;
            let result = apply_action(action, &m, state)?;
            Ok(TraceStep {
                action: action.clone(),
                match_: m,
                context: result.context,
                u: result.u,
                v: result.v,
                comatch: result.comatch,
                keep_to_context: result.keep_to_context,
            })
        };
        let step = run().map_err(|e| e.at_step(i))?;
        states.push(step.v.cod.clone());
        trace_steps.push(step);
    }
    Ok(PlanTrace {
        states,
        steps: trace_steps,
    })
}

/// Execute pre-grounded steps, checking that each match targets the
/// previous result state.
pub fn run_grounded(
    initial: &Instance,
    steps: &[crate::dpo::GroundedStep],
) -> Result<PlanTrace> {
    let mut states = vec![initial.clone()];
    let mut trace_steps = Vec::new();
    for (i, step) in steps.iter().enumerate() {
        let state = states.last().unwrap().clone();
        if step.match_.cod != state {
            return Err(Error::InvalidMatch("match does not target the previous result state".into())
                .at_step(i));
        }
        let result = apply_action(&step.action, &step.match_, &state).map_err(|e| e.at_step(i))?;
        states.push(result.result.clone());
        trace_steps.push(TraceStep {
            action: step.action.clone(),
            match_: step.match_.clone(),
            context: result.context,
            u: result.u,
            v: result.v,
            comatch: result.comatch,
            keep_to_context: result.keep_to_context,
        });
    }
    Ok(PlanTrace {
        states,
        steps: trace_steps,
    })
}
