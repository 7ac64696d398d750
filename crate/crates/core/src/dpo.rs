//! Actions as spans `Pre <- Keep -> Eff` and their application to states
//! by double-pushout rewriting.
//!
//! Patterns are partial, which extends classical DPO with a redefinition
//! convention: an entry a kept element leaves undefined in `Keep` is
//! removed from the context when `Pre` or `Eff` defines it, and
//! reinstated from `Eff` when `Eff` defines it. This is what lets a rule
//! retarget a hom (a gripper picking something else up) or flip an
//! attribute without deleting the element.

use serde_json::{json, Map, Value as Json};

use crate::error::{Error, Result};
use crate::instance::{Instance, InstanceBuilder, InstanceMorphism};
use crate::schema::{field_str, Schema};

/// A rewrite rule: precondition, preserved part, and effect.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionSpan {
    pub name: String,
    /// Pre-pattern labels acting as the action's parameters, used when
    /// deriving grounded step names.
    pub params: Vec<String>,
    pub pre: Instance,
    pub keep: Instance,
    pub eff: Instance,
    /// Monic `keep -> pre`.
    pub l: InstanceMorphism,
    /// `keep -> eff`.
    pub r: InstanceMorphism,
}

impl ActionSpan {
    pub fn validate(&self) -> Result<()> {
        if self.pre.schema() != self.keep.schema() || self.keep.schema() != self.eff.schema() {
            return Err(Error::SchemaMismatch(format!(
                "action `{}` mixes schemas",
                self.name
            )));
        }
        if self.l.dom != self.keep || self.l.cod != self.pre {
            return Err(Error::InvalidMorphism(format!(
                "action `{}`: l must go keep -> pre",
                self.name
            )));
        }
        if self.r.dom != self.keep || self.r.cod != self.eff {
            return Err(Error::InvalidMorphism(format!(
                "action `{}`: r must go keep -> eff",
                self.name
            )));
        }
        self.l.check()?;
        if !self.l.is_monic() {
            return Err(Error::InvalidMorphism(format!(
                "action `{}`: l must be monic",
                self.name
            )));
        }
        self.r.check()
    }

    pub fn from_json(doc: &Json, schema: &Schema) -> Result<ActionSpan> {
        let name = field_str(doc, "name")?;
        let params = doc
            .get("params")
            .and_then(Json::as_array)
            .map(|a| {
                a.iter()
                    .map(|p| {
                        p.as_str()
                            .map(str::to_owned)
                            .ok_or_else(|| Error::Parse("params must be strings".into()))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .transpose()?
            .unwrap_or_default();
        let get = |field: &str| -> Result<&Json> {
            doc.get(field)
                .ok_or_else(|| Error::Parse(format!("action `{name}` missing `{field}`")))
        };
        let pre = Instance::from_json(get("pre")?, schema)?;
        let keep = Instance::from_json(get("keep")?, schema)?;
        let eff = Instance::from_json(get("eff")?, schema)?;
        let l = InstanceMorphism::components_from_json(get("l")?, &keep, &pre)?;
        let r = InstanceMorphism::components_from_json(get("r")?, &keep, &eff)?;
        let action = ActionSpan {
            name,
            params,
            pre,
            keep,
            eff,
            l,
            r,
        };
        action.validate()?;
        Ok(action)
    }

    pub fn to_json(&self) -> Json {
        let mut map = Map::new();
        map.insert("name".into(), json!(self.name));
        map.insert("params".into(), json!(self.params));
        map.insert("pre".into(), self.pre.to_json());
        map.insert("keep".into(), self.keep.to_json());
        map.insert("eff".into(), self.eff.to_json());
        map.insert("l".into(), self.l.components_to_json());
        map.insert("r".into(), self.r.components_to_json());
        Json::Object(map)
    }
}

/// An action whose precondition is bound into a concrete state.
#[derive(Debug, Clone)]
pub struct GroundedStep {
    pub action: ActionSpan,
    /// Monic `pre -> state`.
    pub match_: InstanceMorphism,
}

/// The bottom row of the DPO square for one rewrite.
#[derive(Debug, Clone)]
pub struct RewriteResult {
    /// The context `Z`: the state minus deleted elements and redefined entries.
    pub context: Instance,
    /// The successor state `Y`.
    pub result: Instance,
    /// Monic `Z -> X`.
    pub u: InstanceMorphism,
    /// Monic `Z -> Y`.
    pub v: InstanceMorphism,
    /// Monic `eff -> Y`.
    pub comatch: InstanceMorphism,
    /// `keep -> Z`, the shared leg of both squares.
    pub keep_to_context: InstanceMorphism,
}

/// Deletion and entry-removal bookkeeping for one grounded action.
struct RewritePlan {
    /// Per object, is the host element deleted?
    deleted: Vec<Vec<bool>>,
    /// Per hom, host entries removed from the context.
    removed_homs: Vec<Vec<bool>>,
    /// Per attr, host entries removed from the context.
    removed_attrs: Vec<Vec<bool>>,
}

fn rewrite_plan(action: &ActionSpan, m: &InstanceMorphism, state: &Instance) -> RewritePlan {
    let schema = state.schema();
    let mut deleted: Vec<Vec<bool>> = state.counts().iter().map(|&n| vec![false; n]).collect();
    let mut in_keep_image: Vec<Vec<bool>> =
        action.pre.counts().iter().map(|&n| vec![false; n]).collect();
    for (ob, comp) in action.l.components.iter().enumerate() {
        for &p in comp {
            in_keep_image[ob][p] = true;
        }
    }
    for ob in 0..schema.objects().len() {
        for p in 0..action.pre.count(ob) {
            if !in_keep_image[ob][p] {
                deleted[ob][m.apply(ob, p)] = true;
            }
        }
    }
    let mut removed_homs: Vec<Vec<bool>> = schema
        .homs()
        .iter()
        .map(|h| vec![false; state.count(h.src)])
        .collect();
    let mut removed_attrs: Vec<Vec<bool>> = schema
        .attrs()
        .iter()
        .map(|a| vec![false; state.count(a.src)])
        .collect();
    for (ob, comp) in action.l.components.iter().enumerate() {
        for (k, &p) in comp.iter().enumerate() {
            let host = m.apply(ob, p);
            for (hom, _) in schema.homs_from(ob) {
                if action.keep.hom(hom, k).is_none()
                    && (action.pre.hom(hom, p).is_some()
                        || action.eff.hom(hom, action.r.apply(ob, k)).is_some())
                {
                    removed_homs[hom][host] = true;
                }
            }
            for (attr, _) in schema.attrs_from(ob) {
                if action.keep.attr(attr, k).is_none()
                    && (action.pre.attr(attr, p).is_some()
                        || action.eff.attr(attr, action.r.apply(ob, k)).is_some())
                {
                    removed_attrs[attr][host] = true;
                }
            }
        }
    }
    RewritePlan {
        deleted,
        removed_homs,
        removed_attrs,
    }
}

/// Check whether the grounded action can be applied: the match must be a
/// valid monomorphism into a hom-total state, and the dangling condition
/// must hold: no surviving hom entry outside the rule's own removals may
/// target a deleted element.
pub fn check_applicable(
    action: &ActionSpan,
    m: &InstanceMorphism,
    state: &Instance,
) -> Result<()> {
    action.validate()?;
    if m.dom != action.pre || m.cod != *state {
        return Err(Error::InvalidMatch(format!(
            "match for `{}` does not go pre -> state",
            action.name
        )));
    }
    m.check().map_err(|e| Error::InvalidMatch(e.to_string()))?;
    if !m.is_monic() {
        return Err(Error::InvalidMatch(format!(
            "match for `{}` must be monic",
            action.name
        )));
    }
    if !state.is_hom_total() {
        return Err(Error::InvalidMatch(
            "actions apply only to hom-total states".into(),
        ));
    }
    let plan = rewrite_plan(action, m, state);
    let schema = state.schema();
    let mut offending = Vec::new();
    for (hom, h) in schema.homs().iter().enumerate() {
        for src in 0..state.count(h.src) {
            if plan.deleted[h.src][src] || plan.removed_homs[hom][src] {
                continue;
            }
            if let Some(tgt) = state.hom(hom, src) {
                if plan.deleted[h.tgt][tgt] {
                    offending.push(format!(
                        "{}({}) = {}",
                        h.name,
                        state.elem_ref(h.src, src),
                        state.elem_ref(h.tgt, tgt)
                    ));
                }
            }
        }
    }
    if !offending.is_empty() {
        return Err(Error::DanglingViolation(offending.join(", ")));
    }
    Ok(())
}

/// Apply a grounded action by double-pushout rewriting.
pub fn apply_action(
    action: &ActionSpan,
    m: &InstanceMorphism,
    state: &Instance,
) -> Result<RewriteResult> {
    check_applicable(action, m, state)?;
    let schema = state.schema();
    let plan = rewrite_plan(action, m, state);

    // Context Z: surviving elements, reindexed densely in order.
    let mut old_to_new: Vec<Vec<Option<usize>>> =
        state.counts().iter().map(|&n| vec![None; n]).collect();
    let mut b = InstanceBuilder::new(schema);
    for ob in 0..schema.objects().len() {
        for elem in 0..state.count(ob) {
            if !plan.deleted[ob][elem] {
                let idx = b.add_element(ob, state.label(ob, elem).map(str::to_owned))?;
                old_to_new[ob][elem] = Some(idx);
            }
        }
    }
    for (hom, h) in schema.homs().iter().enumerate() {
        for src in 0..state.count(h.src) {
            let Some(new_src) = old_to_new[h.src][src] else { continue };
            if plan.removed_homs[hom][src] {
                continue;
            }
            if let Some(tgt) = state.hom(hom, src) {
                let new_tgt = old_to_new[h.tgt][tgt]
                    .expect("dangling check guarantees surviving targets");
                b.set_hom(hom, new_src, new_tgt)?;
            }
        }
    }
    for (attr, a) in schema.attrs().iter().enumerate() {
        for src in 0..state.count(a.src) {
            let Some(new_src) = old_to_new[a.src][src] else { continue };
            if plan.removed_attrs[attr][src] {
                continue;
            }
            if let Some(value) = state.attr(attr, src) {
                b.set_attr(attr, new_src, value.clone())?;
            }
        }
    }
    let context = b.build()?;

    // u sends each context element back to the survivor it came from.
    let u_components: Vec<Vec<usize>> = (0..schema.objects().len())
        .map(|ob| {
            (0..state.count(ob))
                .filter(|&e| !plan.deleted[ob][e])
                .collect()
        })
        .collect();
    let u = InstanceMorphism::new(context.clone(), state.clone(), u_components);

    // keep -> Z through the match.
    let kz_components: Vec<Vec<usize>> = action
        .l
        .components
        .iter()
        .enumerate()
        .map(|(ob, comp)| {
            comp.iter()
                .map(|&p| {
                    old_to_new[ob][m.apply(ob, p)]
                        .expect("kept elements are never deleted")
                })
                .collect()
        })
        .collect();
    let keep_to_context =
        InstanceMorphism::new(action.keep.clone(), context.clone(), kz_components);

    // Y is the pushout of Z <- keep -> eff.
    let (result, v, comatch) = pushout(&keep_to_context, &action.r)?;
    if !result.is_hom_total() {
        let mut missing = Vec::new();
        for (hom, h) in schema.homs().iter().enumerate() {
            for src in 0..result.count(h.src) {
                if result.hom(hom, src).is_none() {
                    missing.push(format!("{}({})", h.name, result.elem_ref(h.src, src)));
                }
            }
        }
        return Err(Error::IncompleteResult(missing.join(", ")));
    }
    Ok(RewriteResult {
        context,
        result,
        u,
        v,
        comatch,
        keep_to_context,
    })
}

/// Pushout of a span `B <-f- A -g-> C` of instance morphisms.
///
/// Elements of the pushout are equivalence classes of `B + C` under
/// gluing along `A`, closed under hom congruence. Entries are the union
/// of both sides' entries; a genuine value conflict is an error (it
/// cannot arise from [`apply_action`]'s spans).
pub fn pushout(
    f: &InstanceMorphism,
    g: &InstanceMorphism,
) -> Result<(Instance, InstanceMorphism, InstanceMorphism)> {
    if f.dom != g.dom {
        return Err(Error::InvalidMorphism("pushout legs must share an apex".into()));
    }
    let schema = f.dom.schema();
    let b_inst = &f.cod;
    let c_inst = &g.cod;
    let n_ob = schema.objects().len();

    // Node space per object: B elements then C elements.
    let mut uf: Vec<Vec<usize>> = (0..n_ob)
        .map(|ob| (0..b_inst.count(ob) + c_inst.count(ob)).collect())
        .collect();
    fn find(uf: &mut Vec<usize>, i: usize) -> usize {
        if uf[i] != i {
            let root = find(uf, uf[i]);
            uf[i] = root;
        }
        uf[i]
    }
    for ob in 0..n_ob {
        let nb = b_inst.count(ob);
        for a in 0..f.dom.count(ob) {
            let x = find(&mut uf[ob], f.apply(ob, a));
            let y = find(&mut uf[ob], nb + g.apply(ob, a));
            uf[ob][x] = y;
        }
    }
    // Hom congruence: identified sources force identified targets.
    loop {
        let mut changed = false;
        for (hom, h) in schema.homs().iter().enumerate() {
            let nb_src = b_inst.count(h.src);
            let nb_tgt = b_inst.count(h.tgt);
            let n_src = nb_src + c_inst.count(h.src);
            let mut class_tgt: std::collections::HashMap<usize, usize> = Default::default();
            for node in 0..n_src {
                let entry = if node < nb_src {
                    b_inst.hom(hom, node).map(|t| t)
                } else {
                    c_inst.hom(hom, node - nb_src).map(|t| nb_tgt + t)
                };
                let Some(tgt_node) = entry else { continue };
                let src_class = find(&mut uf[h.src], node);
                let tgt_class = find(&mut uf[h.tgt], tgt_node);
                match class_tgt.get(&src_class) {
                    Some(&prev) if prev != tgt_class => {
                        let a = find(&mut uf[h.tgt], prev);
                        let b = find(&mut uf[h.tgt], tgt_class);
                        if a != b {
                            uf[h.tgt][a] = b;
                            changed = true;
                        }
                    }
                    Some(_) => {}
                    None => {
                        class_tgt.insert(src_class, tgt_class);
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }

    // Enumerate classes in node order: B first, then unglued C.
    let mut class_index: Vec<std::collections::HashMap<usize, usize>> =
        vec![Default::default(); n_ob];
    let mut builder = InstanceBuilder::new(schema);
    for ob in 0..n_ob {
        let nb = b_inst.count(ob);
        let total = nb + c_inst.count(ob);
        for node in 0..total {
            let root = find(&mut uf[ob], node);
            if class_index[ob].contains_key(&root) {
                continue;
            }
            // Label: first labeled member in node order, unless taken.
            let mut label = None;
            for member in 0..total {
                if find(&mut uf[ob], member) != root {
                    continue;
                }
                let cand = if member < nb {
                    b_inst.label(ob, member)
                } else {
                    c_inst.label(ob, member - nb)
                };
                if let Some(c) = cand {
                    label = Some(c.to_owned());
                    break;
                }
            }
            if let Some(l) = &label {
                if builder.element(ob, l).is_ok() {
                    label = None;
                }
            }
            let idx = builder.add_element(ob, label)?;
            class_index[ob].insert(root, idx);
        }
    }
    let mut node_class = |ob: usize, node: usize| -> usize {
        let root = find(&mut uf[ob], node);
        class_index[ob][&root]
    };

    // Entries: union of B's and C's, checked for agreement.
    let mut hom_entries: Vec<Vec<Option<usize>>> = schema
        .homs()
        .iter()
        .map(|h| vec![None; class_index[h.src].len()])
        .collect();
    let mut attr_entries: Vec<Vec<Option<crate::value::Value>>> = schema
        .attrs()
        .iter()
        .map(|a| vec![None; class_index[a.src].len()])
        .collect();
    for (hom, h) in schema.homs().iter().enumerate() {
        let nb_src = b_inst.count(h.src);
        let nb_tgt = b_inst.count(h.tgt);
        for node in 0..nb_src + c_inst.count(h.src) {
            let entry = if node < nb_src {
                b_inst.hom(hom, node)
            } else {
                c_inst.hom(hom, node - nb_src).map(|t| t + nb_tgt)
            };
            let Some(raw_tgt) = entry else { continue };
            let src_class = node_class(h.src, node);
            let tgt_class = node_class(h.tgt, raw_tgt);
            match hom_entries[hom][src_class] {
                Some(prev) if prev != tgt_class => {
                    return Err(Error::InvalidMorphism(format!(
                        "pushout conflict on hom {}",
                        h.name
                    )))
                }
                _ => hom_entries[hom][src_class] = Some(tgt_class),
            }
        }
    }
    for (attr, a) in schema.attrs().iter().enumerate() {
        let nb_src = b_inst.count(a.src);
        for node in 0..nb_src + c_inst.count(a.src) {
            let value = if node < nb_src {
                b_inst.attr(attr, node)
            } else {
                c_inst.attr(attr, node - nb_src)
            };
            let Some(value) = value else { continue };
            let src_class = node_class(a.src, node);
            match &attr_entries[attr][src_class] {
                Some(prev) if prev != value => {
                    return Err(Error::InvalidMorphism(format!(
                        "pushout conflict on attribute {}",
                        a.name
                    )))
                }
                _ => attr_entries[attr][src_class] = Some(value.clone()),
            }
        }
    }
    for (hom, entries) in hom_entries.iter().enumerate() {
        for (src, tgt) in entries.iter().enumerate() {
            if let Some(tgt) = tgt {
                builder.set_hom(hom, src, *tgt)?;
            }
        }
    }
    for (attr, entries) in attr_entries.iter().enumerate() {
        for (src, value) in entries.iter().enumerate() {
            if let Some(value) = value {
                builder.set_attr(attr, src, value.clone())?;
            }
        }
    }
    let p = builder.build()?;
    let inj_b = InstanceMorphism::new(
        b_inst.clone(),
        p.clone(),
        (0..n_ob)
            .map(|ob| (0..b_inst.count(ob)).map(|e| node_class(ob, e)).collect())
            .collect(),
    );
    let nb: Vec<usize> = (0..n_ob).map(|ob| b_inst.count(ob)).collect();
    let inj_c = InstanceMorphism::new(
        c_inst.clone(),
        p.clone(),
        (0..n_ob)
            .map(|ob| {
                (0..c_inst.count(ob))
                    .map(|e| node_class(ob, nb[ob] + e))
                    .collect()
            })
            .collect(),
    );
    Ok((p, inj_b, inj_c))
}

/// Does the square with legs `f: A -> B`, `g: A -> C` and cocone
/// `inj_b: B -> Y`, `inj_c: C -> Y` commute and exhibit `Y` as the
/// pushout of the span? Decided by recomputing the canonical pushout and
/// checking that the induced comparison map is an isomorphism.
pub fn verify_pushout(
    f: &InstanceMorphism,
    g: &InstanceMorphism,
    inj_b: &InstanceMorphism,
    inj_c: &InstanceMorphism,
) -> Result<bool> {
    if f.then(inj_b)? != g.then(inj_c)? {
        return Ok(false);
    }
    let (p, pb, pc) = pushout(f, g)?;
    // Comparison P -> Y, forced on the images of B and C.
    let n_ob = p.schema().objects().len();
    let mut comparison: Vec<Vec<Option<usize>>> =
        (0..n_ob).map(|ob| vec![None; p.count(ob)]).collect();
    for ob in 0..n_ob {
        for e in 0..pb.dom.count(ob) {
            let slot = &mut comparison[ob][pb.apply(ob, e)];
            let y = inj_b.apply(ob, e);
            if slot.is_some() && *slot != Some(y) {
                return Ok(false);
            }
            *slot = Some(y);
        }
        for e in 0..pc.dom.count(ob) {
            let slot = &mut comparison[ob][pc.apply(ob, e)];
            let y = inj_c.apply(ob, e);
            if slot.is_some() && *slot != Some(y) {
                return Ok(false);
            }
            *slot = Some(y);
        }
    }
    let Some(components) = comparison
        .into_iter()
        .map(|col| col.into_iter().collect::<Option<Vec<_>>>())
        .collect::<Option<Vec<_>>>()
    else {
        return Ok(false);
    };
    let cmp = InstanceMorphism::new(p, inj_b.cod.clone(), components);
    Ok(cmp.is_isomorphism())
}
