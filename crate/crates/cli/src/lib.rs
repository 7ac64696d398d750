//! `catplan`: schemas, instances, rewriting, migration, and plan
//! transfer from the command line.
//!
//! Exit codes: 0 success, 1 validation or domain failure, 2 usage
//! error, 3 I/O error.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use serde_json::Value as Json;

use catplan_core::{
    apply_action, find_homs, migrate_instance, run_plan, steps_from_json, transfer_plan,
    validate_transfer, ActionSpan, Instance, OntologyMap, PlanTrace, Schema, SearchOptions,
    TransferredPlan,
};
use catplan_core::plan::resolve_match;

#[derive(Parser)]
#[command(name = "catplan", version, about = "Categorical task plans: states as instances, actions as rewrite spans, transfer by data migration")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Parse and validate a schema document.
    CheckSchema {
        /// Path to the schema JSON.
        schema: PathBuf,
    },
    /// Parse an instance against a schema and summarize it.
    CheckInstance {
        #[arg(long)]
        schema: PathBuf,
        /// Path to the instance JSON.
        instance: PathBuf,
    },
    /// Load an ontology map and report whether it is well-formed.
    CheckMap {
        /// Schema the map migrates instances from.
        #[arg(long)]
        source: PathBuf,
        /// Schema the map migrates instances to.
        #[arg(long)]
        target: PathBuf,
        /// Path to the map JSON.
        map: PathBuf,
    },
    /// Enumerate morphisms from a pattern instance into a host instance.
    FindHoms {
        #[arg(long)]
        schema: PathBuf,
        #[arg(long)]
        pattern: PathBuf,
        #[arg(long)]
        host: PathBuf,
        /// Only injective morphisms.
        #[arg(long)]
        monic: bool,
    },
    /// Apply one action to a state by double-pushout rewriting.
    Apply {
        #[arg(long)]
        schema: PathBuf,
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        action: PathBuf,
        /// Pin a precondition element: `preLabel=stateRef`. Repeatable;
        /// unpinned elements are matched automatically.
        #[arg(long = "bind", value_name = "LABEL=REF")]
        bindings: Vec<String>,
        /// Write the successor state here instead of stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Execute a plan document and record the full trace.
    RunPlan {
        /// Plan JSON; schema/initial/action paths inside it are resolved
        /// relative to this file.
        plan: PathBuf,
        /// Write the execution trace here.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Migrate an instance along an ontology map.
    Migrate {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        source: PathBuf,
        #[arg(long)]
        target: PathBuf,
        /// Instance over the source schema.
        #[arg(long)]
        instance: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Transfer an executed plan trace along an ontology map.
    TransferPlan {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        source: PathBuf,
        #[arg(long)]
        target: PathBuf,
        /// Trace produced by `run-plan`.
        #[arg(long)]
        trace: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Validate a transferred plan against the migrated source goal.
    ValidatePlan {
        #[arg(long)]
        map: PathBuf,
        #[arg(long)]
        source: PathBuf,
        #[arg(long)]
        target: PathBuf,
        /// Goal instance over the source schema.
        #[arg(long)]
        goal: PathBuf,
        /// Transferred plan produced by `transfer-plan`.
        #[arg(long)]
        plan: PathBuf,
    },
    /// Print the paths of the bundled case-study fixtures.
    Fixtures,
}

pub fn main_impl() -> i32 {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.chain().any(|c| c.is::<std::io::Error>()) {
                3
            } else {
                1
            }
        }
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn load_schema(path: &Path) -> Result<Schema> {
    Schema::load(&read_text(path)?).with_context(|| format!("in {}", path.display()))
}

fn load_instance(path: &Path, schema: &Schema) -> Result<Instance> {
    Instance::load(&read_text(path)?, schema).with_context(|| format!("in {}", path.display()))
}

fn load_map(path: &Path, source: &Schema, target: &Schema) -> Result<OntologyMap> {
    OntologyMap::load(&read_text(path)?, source, target)
        .with_context(|| format!("in {}", path.display()))
}

fn load_action(path: &Path, schema: &Schema) -> Result<ActionSpan> {
    let doc: Json = serde_json::from_str(&read_text(path)?)
        .with_context(|| format!("in {}", path.display()))?;
    ActionSpan::from_json(&doc, schema).with_context(|| format!("in {}", path.display()))
}

fn counts_summary(x: &Instance) -> String {
    let schema = x.schema();
    x.counts()
        .iter()
        .enumerate()
        .map(|(ob, n)| format!("{}={n}", schema.object(ob)))
        .collect::<Vec<_>>()
        .join(", ")
}

fn emit(output: &Option<PathBuf>, text: &str, note: &str) -> Result<()> {
    match output {
        Some(path) => {
            write_text(path, text)?;
            println!("{note} -> {}", path.display());
        }
        None => print!("{text}"),
    }
    Ok(())
}

pub fn run(command: &Command) -> Result<i32> {
    match command {
        Command::CheckSchema { schema } => {
            let s = load_schema(schema)?;
            println!(
                "schema `{}`: {} objects, {} homs, {} attribute types, {} attributes",
                s.name(),
                s.objects().len(),
                s.homs().len(),
                s.attrtypes().len(),
                s.attrs().len()
            );
            Ok(0)
        }
        Command::CheckInstance { schema, instance } => {
            let s = load_schema(schema)?;
            let x = load_instance(instance, &s)?;
            println!(
                "instance over `{}`: {}; hom-total: {}",
                s.name(),
                counts_summary(&x),
                x.is_hom_total()
            );
            Ok(0)
        }
        Command::CheckMap {
            source,
            target,
            map,
        } => {
            let src = load_schema(source)?;
            let tgt = load_schema(target)?;
            let m = load_map(map, &src, &tgt)?;
            let report = m.check();
            if report.is_ok() {
                let kind = if m.is_delta() { "delta" } else { "conjunctive" };
                println!("map `{}` -> `{}`: ok ({kind})", src.name(), tgt.name());
                Ok(0)
            } else {
                for issue in &report.issues {
                    println!("issue: {issue}");
                }
                Ok(1)
            }
        }
        Command::FindHoms {
            schema,
            pattern,
            host,
            monic,
        } => {
            let s = load_schema(schema)?;
            let p = load_instance(pattern, &s)?;
            let h = load_instance(host, &s)?;
            let opts = SearchOptions {
                monic: *monic,
                ..SearchOptions::default()
            };
            let homs = find_homs(&p, &h, &opts)?;
            for m in &homs {
                println!("{}", serde_json::to_string(&m.components_to_json())?);
            }
            println!("found {}", homs.len());
            Ok(0)
        }
        Command::Apply {
            schema,
            state,
            action,
            bindings,
            output,
        } => {
            let s = load_schema(schema)?;
            let x = load_instance(state, &s)?;
            let a = load_action(action, &s)?;
            let mut pins = Vec::new();
            for b in bindings {
                let (label, elem) = b.split_once('=').with_context(|| {
                    format!("binding `{b}` is not of the form preLabel=stateRef")
                })?;
                pins.push((label.to_owned(), elem.to_owned()));
            }
            let m = resolve_match(&a, &pins, &x)?;
            let result = apply_action(&a, &m, &x)?;
            emit(output, &result.result.serialize(), "result state")?;
            Ok(0)
        }
        Command::RunPlan { plan, output } => {
            let trace = execute_plan_file(plan)?;
            for (i, step) in trace.steps.iter().enumerate() {
                println!("step {i}: {}", step.display_name());
            }
            println!("final: {}", counts_summary(trace.final_state()));
            if let Some(path) = output {
                write_text(path, &trace.serialize())?;
                println!("trace -> {}", path.display());
            }
            Ok(0)
        }
        Command::Migrate {
            map,
            source,
            target,
            instance,
            output,
        } => {
            let src = load_schema(source)?;
            let tgt = load_schema(target)?;
            let m = load_map(map, &src, &tgt)?;
            let x = load_instance(instance, &src)?;
            let migrated = migrate_instance(&m, &x)?;
            emit(output, &migrated.instance.serialize(), "migrated instance")?;
            Ok(0)
        }
        Command::TransferPlan {
            map,
            source,
            target,
            trace,
            output,
        } => {
            let src = load_schema(source)?;
            let tgt = load_schema(target)?;
            let m = load_map(map, &src, &tgt)?;
            let doc: Json = serde_json::from_str(&read_text(trace)?)
                .with_context(|| format!("in {}", trace.display()))?;
            let tr = PlanTrace::from_json(&doc, &src)?;
            let transferred = transfer_plan(&m, &tr)?;
            println!("mode: {}", transferred.mode.name());
            for (i, step) in transferred.steps.iter().enumerate() {
                println!("step {i}: {}", step.name);
            }
            println!("final: {}", counts_summary(transferred.final_state()));
            if let Some(path) = output {
                write_text(path, &transferred.serialize())?;
                println!("plan -> {}", path.display());
            }
            Ok(0)
        }
        Command::ValidatePlan {
            map,
            source,
            target,
            goal,
            plan,
        } => {
            let src = load_schema(source)?;
            let tgt = load_schema(target)?;
            let m = load_map(map, &src, &tgt)?;
            let g = load_instance(goal, &src)?;
            let doc: Json = serde_json::from_str(&read_text(plan)?)
                .with_context(|| format!("in {}", plan.display()))?;
            let p = TransferredPlan::from_json(&doc, &tgt)?;
            let report = validate_transfer(&m, &g, &p)?;
            println!("valid: {}", report.valid);
            println!("goalSatisfaction: {}", fmt_frac(report.goal_satisfaction));
            for d in &report.diagnostics {
                println!("note: {d}");
            }
            Ok(if report.valid { 0 } else { 1 })
        }
        Command::Fixtures => {
            let root = Path::new(env!("CARGO_MANIFEST_DIR"))
                .join("../../fixtures")
                .canonicalize()
                .context("locating the bundled fixtures directory")?;
            let mut paths = Vec::new();
            collect_files(&root, &mut paths)?;
            paths.sort();
            for p in paths {
                println!("{}", p.display());
            }
            Ok(0)
        }
    }
}

fn collect_files(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    for entry in fs::read_dir(dir).with_context(|| format!("reading {}", dir.display()))? {
        let path = entry?.path();
        if path.is_dir() {
            collect_files(&path, out)?;
        } else {
            out.push(path);
        }
    }
    Ok(())
}

/// Render a fraction with at least one decimal place and no trailing
/// zero noise: 1 -> "1.0", 2/3 -> "0.6667".
fn fmt_frac(x: f64) -> String {
    let s = format!("{:.4}", x);
    let trimmed = s.trim_end_matches('0');
    if trimmed.ends_with('.') {
        format!("{trimmed}0")
    } else {
        trimmed.to_owned()
    }
}

/// Load and execute a plan document whose schema/initial/action paths
/// are resolved relative to the document's own directory.
pub fn execute_plan_file(plan_path: &Path) -> Result<PlanTrace> {
    let doc: Json = serde_json::from_str(&read_text(plan_path)?)
        .with_context(|| format!("in {}", plan_path.display()))?;
    let base = plan_path.parent().unwrap_or_else(|| Path::new("."));
    let field = |name: &str| -> Result<&str> {
        doc.get(name)
            .and_then(Json::as_str)
            .with_context(|| format!("plan document missing string field `{name}`"))
    };
    let schema = load_schema(&base.join(field("schema")?))?;
    let initial = load_instance(&base.join(field("initial")?), &schema)?;
    let action_paths = doc
        .get("actions")
        .and_then(Json::as_array)
        .context("plan document missing `actions` array")?;
    let mut actions = Vec::new();
    for p in action_paths {
        let p = p.as_str().context("`actions` entries must be path strings")?;
        actions.push(load_action(&base.join(p), &schema)?);
    }
    let steps = steps_from_json(&doc)?;
    Ok(run_plan(&initial, &steps, &actions)?)
}
