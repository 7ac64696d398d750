//! Functorial data migration: pulling instances and morphisms back along
//! an ontology map.
//!
//! A map presents a functor from its target schema into (queries over)
//! its source schema, so migration runs the other way: it carries
//! source-schema instances to target-schema instances. The migrated
//! elements of a target object are the matches of that object's query in
//! the host; homs and attributes are computed by evaluating the map's
//! variable and attribute expressions on those matches.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::instance::{Instance, InstanceBuilder, InstanceMorphism};
use crate::ontmap::{AttrExpr, OntologyMap, Query, VarExpr};

/// One match of a query: per query variable, a host element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchBinding {
    pub assignment: Vec<usize>,
}

/// A migrated instance together with the bindings its elements came from.
#[derive(Debug, Clone)]
pub struct MigrationResult {
    pub instance: Instance,
    /// Per target object, per element, the query match it denotes.
    pub bindings: Vec<Vec<MatchBinding>>,
}

impl MigrationResult {
    /// Element index in the migrated instance for a given match, if any.
    pub fn binding_index(&self, ob: usize, assignment: &[usize]) -> Option<usize> {
        self.bindings[ob]
            .iter()
            .position(|b| b.assignment == assignment)
    }
}

/// Enumerate all matches of a query in a host instance, in lexicographic
/// order of assignments by variable order. Evaluation is strict: a
/// constraint touching an undefined host entry fails the candidate.
pub fn evaluate_query(query: &Query, host: &Instance) -> Result<Vec<MatchBinding>> {
    let mut issues = Vec::new();
    query.check(host.schema(), &mut issues, "query");
    if !issues.is_empty() {
        return Err(Error::SchemaMismatch(issues.join("; ")));
    }
    let mut results = Vec::new();
    let mut assignment = vec![usize::MAX; query.vars.len()];
    enumerate(query, host, 0, &mut assignment, &mut results);
    Ok(results)
}

fn enumerate(
    query: &Query,
    host: &Instance,
    depth: usize,
    assignment: &mut [usize],
    results: &mut Vec<MatchBinding>,
) {
    if depth == query.vars.len() {
        results.push(MatchBinding {
            assignment: assignment.to_vec(),
        });
        return;
    }
    let ob = query.vars[depth].object;
    for cand in 0..host.count(ob) {
        assignment[depth] = cand;
        if satisfies_partial(query, host, assignment, depth) {
            enumerate(query, host, depth + 1, assignment, results);
        }
    }
    assignment[depth] = usize::MAX;
}

/// Check the constraints whose variables are all assigned (index <= depth).
fn satisfies_partial(query: &Query, host: &Instance, assignment: &[usize], depth: usize) -> bool {
    for &(hom, src_var, tgt_var) in &query.hom_constraints {
        if src_var > depth || tgt_var > depth {
            continue;
        }
        match host.hom(hom, assignment[src_var]) {
            Some(tgt) if tgt == assignment[tgt_var] => {}
            _ => return false,
        }
    }
    for (attr, var, value) in &query.attr_constraints {
        if *var > depth {
            continue;
        }
        if host.attr(*attr, assignment[*var]) != Some(value) {
            return false;
        }
    }
    true
}

/// Evaluate a variable expression on a match; `None` when a hom
/// application hits an undefined host entry.
fn eval_var_expr(expr: &VarExpr, host: &Instance, assignment: &[usize]) -> Option<usize> {
    match expr {
        VarExpr::Var(v) => Some(assignment[*v]),
        VarExpr::App { hom, var } => host.hom(*hom, assignment[*var]),
    }
}

/// Migrate a source-schema instance to a target-schema instance.
pub fn migrate_instance(map: &OntologyMap, host: &Instance) -> Result<MigrationResult> {
    if host.schema() != map.source() {
        return Err(Error::SchemaMismatch(
            "host instance is not over the map's source schema".into(),
        ));
    }
    let report = map.check();
    if !report.is_ok() {
        return Err(Error::InvalidMap(report.issues.join("; ")));
    }
    let target = map.target();

    let mut bindings: Vec<Vec<MatchBinding>> = Vec::with_capacity(target.objects().len());
    for ob in 0..target.objects().len() {
        bindings.push(evaluate_query(map.object_query(ob), host)?);
    }
    // Fast lookup from assignment to element index, per target object.
    let index: Vec<HashMap<&[usize], usize>> = bindings
        .iter()
        .map(|bs| {
            bs.iter()
                .enumerate()
                .map(|(i, b)| (b.assignment.as_slice(), i))
                .collect()
        })
        .collect();

    let mut builder = InstanceBuilder::new(target);
    for (ob, bs) in bindings.iter().enumerate() {
        // Elements inherit the root variable's host label when every
        // match in the object has a distinct, present label there.
        let root_labels: Vec<Option<&str>> = bs
            .iter()
            .map(|b| host.label(map.object_query(ob).vars[0].object, b.assignment[0]))
            .collect();
        let all_present = root_labels.iter().all(Option::is_some);
        let distinct = {
            let mut seen = std::collections::HashSet::new();
            root_labels.iter().flatten().all(|l| seen.insert(*l))
        };
        let usable = all_present && distinct;
        for label in &root_labels {
            builder.add_element(
                ob,
                if usable {
                    label.map(str::to_owned)
                } else {
                    None
                },
            )?;
        }
    }

    for (hom, h) in target.homs().iter().enumerate() {
        let exprs = map.hom_map(hom);
        for (src_elem, b) in bindings[h.src].iter().enumerate() {
            let image: Option<Vec<usize>> = exprs
                .iter()
                .map(|e| eval_var_expr(e, host, &b.assignment))
                .collect();
            let Some(image) = image else { continue };
            let tgt_elem = index[h.tgt].get(image.as_slice()).copied().ok_or_else(|| {
                Error::MigrationPartiality(format!(
                    "image of {} at match {:?} is not a match of the target object's query",
                    h.name, b.assignment
                ))
            })?;
            builder.set_hom(hom, src_elem, tgt_elem)?;
        }
    }
    for (attr, a) in target.attrs().iter().enumerate() {
        for (src_elem, b) in bindings[a.src].iter().enumerate() {
            match map.attr_expr(attr) {
                AttrExpr::Const(value) => builder.set_attr(attr, src_elem, value.clone())?,
                AttrExpr::Proj { var, attr: host_attr } => {
                    if let Some(value) = host.attr(*host_attr, b.assignment[*var]) {
                        builder.set_attr(attr, src_elem, value.clone())?;
                    }
                }
            }
        }
    }
    Ok(MigrationResult {
        instance: builder.build()?,
        bindings,
    })
}

/// Migrate a morphism between source-schema instances to a morphism
/// between the migrated instances, by postcomposing each match with the
/// morphism's components.
pub fn migrate_morphism(map: &OntologyMap, alpha: &InstanceMorphism) -> Result<InstanceMorphism> {
    let dom = migrate_instance(map, &alpha.dom)?;
    let cod = migrate_instance(map, &alpha.cod)?;
    migrate_morphism_with(map, alpha, &dom, &cod)
}

/// Like [`migrate_morphism`] when the endpoint migrations are already
/// computed.
pub fn migrate_morphism_with(
    map: &OntologyMap,
    alpha: &InstanceMorphism,
    dom: &MigrationResult,
    cod: &MigrationResult,
) -> Result<InstanceMorphism> {
    let target = map.target();
    let mut components = Vec::with_capacity(target.objects().len());
    for ob in 0..target.objects().len() {
        let query = map.object_query(ob);
        let mut comp = Vec::with_capacity(dom.bindings[ob].len());
        for b in &dom.bindings[ob] {
            let image: Vec<usize> = b
                .assignment
                .iter()
                .zip(&query.vars)
                .map(|(&e, v)| alpha.apply(v.object, e))
                .collect();
            let idx = cod.binding_index(ob, &image).ok_or_else(|| {
                Error::MigrationPartiality(format!(
                    "postcomposed match {image:?} of `{}` is not a match in the codomain",
                    target.object(ob)
                ))
            })?;
            comp.push(idx);
        }
        components.push(comp);
    }
    Ok(InstanceMorphism::new(
        dom.instance.clone(),
        cod.instance.clone(),
        components,
    ))
}
