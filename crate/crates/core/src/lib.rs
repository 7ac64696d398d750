//! Categorical task-plan representation and transfer.
//!
//! Planning domains are schema categories, states are partial attributed
//! instances, actions are DPO rewrite spans, and plans move between
//! domains by functorial data migration along ontology maps, validated
//! by goal-monomorphism search.

pub mod doc;
pub mod dpo;
pub mod error;
pub mod homsearch;
pub mod instance;
pub mod migration;
pub mod ontmap;
pub mod plan;
pub mod schema;
pub mod testgen;
pub mod transfer;
pub mod value;

pub use dpo::{apply_action, check_applicable, pushout, verify_pushout, ActionSpan, GroundedStep, RewriteResult};
pub use error::{Error, Result};
pub use homsearch::{connected_components, exists_mono, find_homs, goal_satisfaction, SearchOptions};
pub use instance::{Instance, InstanceBuilder, InstanceMorphism};
pub use migration::{
    evaluate_query, migrate_instance, migrate_morphism, migrate_morphism_with, MatchBinding,
    MigrationResult,
};
pub use ontmap::{AttrExpr, MapReport, OntologyMap, Query, QueryVar, VarExpr};
pub use plan::{run_grounded, run_plan, steps_from_json, steps_to_json, PlanStep, PlanTrace, TraceStep};
pub use schema::{Attr, AttrType, Hom, Schema};
pub use transfer::{diff_plans, transfer_plan, validate_transfer, PlanDiff, TransferMode, TransferReport, TransferredPlan, TransferredStep};
pub use value::{PrimKind, Value};
