//! Deterministic random generators and brute-force oracles for the
//! property suites. Everything is seeded; two runs with the same seed
//! produce identical artifacts.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dpo::{check_applicable, ActionSpan, GroundedStep};
use crate::error::Result;
use crate::homsearch::restrict;
use crate::instance::{Instance, InstanceBuilder, InstanceMorphism};
use crate::ontmap::{AttrExpr, OntologyMap, Query, VarExpr};
use crate::schema::Schema;
use crate::value::{PrimKind, Value};

/// Seeded generator stream.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_value(r: &mut ChaCha8Rng, kind: PrimKind) -> Value {
    match kind {
        PrimKind::String => Value::Str(format!("s{}", r.gen_range(0..3u8))),
        PrimKind::Boolean => Value::Bool(r.gen_bool(0.5)),
        PrimKind::Integer => Value::Int(r.gen_range(0..4)),
        PrimKind::Real => Value::Real(f64::from(r.gen_range(0..4u8)) / 2.0),
    }
}

/// A random small schema: up to 4 objects, up to 6 homs, and optionally
/// a couple of attributes.
pub fn gen_schema(r: &mut ChaCha8Rng, with_attrs: bool) -> Schema {
    let n_ob = r.gen_range(1..=4usize);
    let objects: Vec<String> = (0..n_ob).map(|i| format!("O{i}")).collect();
    let n_hom = r.gen_range(0..=6usize);
    let homs: Vec<(String, String, String)> = (0..n_hom)
        .map(|i| {
            (
                format!("f{i}"),
                format!("O{}", r.gen_range(0..n_ob)),
                format!("O{}", r.gen_range(0..n_ob)),
            )
        })
        .collect();
    let (attrtypes, attrs) = if with_attrs {
        let kinds = [PrimKind::Boolean, PrimKind::Integer];
        let n_at = r.gen_range(1..=2usize);
        let attrtypes: Vec<(String, PrimKind)> = (0..n_at)
            .map(|i| (format!("T{i}"), kinds[r.gen_range(0..kinds.len())]))
            .collect();
        let n_attr = r.gen_range(0..=2usize);
        let attrs = (0..n_attr)
            .map(|i| {
                (
                    format!("a{i}"),
                    format!("O{}", r.gen_range(0..n_ob)),
                    format!("T{}", r.gen_range(0..n_at)),
                )
            })
            .collect();
        (attrtypes, attrs)
    } else {
        (Vec::new(), Vec::new())
    };
    Schema::new("Rand", objects, homs, attrtypes, attrs).expect("generated names are unique")
}

/// A random instance with up to `max_per_type` elements per object.
/// When `hom_total` is set the result is a valid state: every hom entry
/// defined (forcing targets to be inhabited where needed).
pub fn gen_instance(r: &mut ChaCha8Rng, schema: &Schema, max_per_type: usize, hom_total: bool) -> Instance {
    let n_ob = schema.objects().len();
    let mut counts: Vec<usize> = (0..n_ob).map(|_| r.gen_range(0..=max_per_type)).collect();
    if hom_total {
        // Inhabited sources force inhabited targets; iterate to fixpoint.
        loop {
            let mut changed = false;
            for h in schema.homs() {
                if counts[h.src] > 0 && counts[h.tgt] == 0 {
                    counts[h.tgt] = 1;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
    }
    let mut b = InstanceBuilder::new(schema);
    for (ob, &n) in counts.iter().enumerate() {
        for i in 0..n {
            let label = if r.gen_bool(0.5) {
                Some(format!("e{ob}_{i}"))
            } else {
                None
            };
            b.add_element(ob, label).unwrap();
        }
    }
    for (hom, h) in schema.homs().iter().enumerate() {
        for src in 0..counts[h.src] {
            if hom_total || (counts[h.tgt] > 0 && r.gen_bool(0.7)) {
                b.set_hom(hom, src, r.gen_range(0..counts[h.tgt])).unwrap();
            }
        }
    }
    for (attr, a) in schema.attrs().iter().enumerate() {
        for src in 0..counts[a.src] {
            if r.gen_bool(0.5) {
                let v = random_value(r, schema.attr_kind(attr));
                b.set_attr(attr, src, v).unwrap();
            }
        }
    }
    b.build().unwrap()
}

/// A random delta map out of a fresh target schema into `source`: bare
/// object queries, single-generator hom expressions, projection attrs.
pub fn gen_delta_map(r: &mut ChaCha8Rng, source: &Schema) -> OntologyMap {
    let n_src_ob = source.objects().len();
    let n_ob = r.gen_range(1..=n_src_ob.min(3));
    let ob_images: Vec<usize> = (0..n_ob).map(|_| r.gen_range(0..n_src_ob)).collect();
    let objects: Vec<String> = (0..n_ob).map(|i| format!("P{i}")).collect();

    let mut homs = Vec::new();
    let mut hom_maps = Vec::new();
    for _ in 0..r.gen_range(0..=4usize) {
        let src = r.gen_range(0..n_ob);
        let tgt = r.gen_range(0..n_ob);
        // Candidate realizations: source homs F(src) -> F(tgt), or the
        // identity when the images coincide.
        let mut candidates: Vec<Option<usize>> = source
            .homs()
            .iter()
            .enumerate()
            .filter(|(_, h)| h.src == ob_images[src] && h.tgt == ob_images[tgt])
            .map(|(i, _)| Some(i))
            .collect();
        if ob_images[src] == ob_images[tgt] {
            candidates.push(None);
        }
        if candidates.is_empty() {
            continue;
        }
        let pick = candidates[r.gen_range(0..candidates.len())];
        homs.push((
            format!("g{}", homs.len()),
            format!("P{src}"),
            format!("P{tgt}"),
        ));
        hom_maps.push(vec![match pick {
            Some(hom) => VarExpr::App { hom, var: 0 },
            None => VarExpr::Var(0),
        }]);
    }

    let mut attrtypes = Vec::new();
    let mut attrtype_kinds = Vec::new();
    let mut attrs = Vec::new();
    let mut attr_exprs = Vec::new();
    for ob in 0..n_ob {
        for (sattr, sa) in source.attrs_from(ob_images[ob]) {
            if !r.gen_bool(0.5) {
                continue;
            }
            let kind = source.attr_kind(sattr);
            let at_name = format!("U{}", attrtypes.len());
            attrtypes.push((at_name.clone(), kind));
            attrtype_kinds.push(kind);
            attrs.push((format!("b{}_{}", ob, sa.name), format!("P{ob}"), at_name));
            attr_exprs.push(AttrExpr::Proj { var: 0, attr: sattr });
        }
    }

    let target = Schema::new("RandTarget", objects, homs, attrtypes, attrs).unwrap();
    let object_queries = ob_images.iter().map(|&im| Query::bare(im)).collect();
    OntologyMap::new(
        source.clone(),
        target,
        object_queries,
        hom_maps,
        attrtype_kinds,
        attr_exprs,
    )
    .unwrap()
}

/// A random action span applicable to the given hom-total state, with
/// its match, or `None` when the sampled rule violates the dangling
/// condition (callers resample).
pub fn gen_applicable_span(r: &mut ChaCha8Rng, state: &Instance) -> Option<GroundedStep> {
    let schema = state.schema();
    let n_ob = schema.objects().len();

    // Pre = a random subset of the state; match = the inclusion.
    let mut subset: Vec<(usize, usize)> = Vec::new();
    for ob in 0..n_ob {
        for elem in 0..state.count(ob) {
            if r.gen_bool(0.6) {
                subset.push((ob, elem));
            }
        }
    }
    let (pre, pre_orig) = restrict(state, &subset);
    let match_ = InstanceMorphism::new(pre.clone(), state.clone(), pre_orig);

    // Keep = a random subset of pre, with some entries dropped to
    // exercise redefinition semantics. Deleting is kept rare so the
    // dangling condition usually holds.
    let mut keep_elems: Vec<Vec<usize>> = vec![Vec::new(); n_ob];
    for ob in 0..n_ob {
        for elem in 0..pre.count(ob) {
            if r.gen_bool(0.9) {
                keep_elems[ob].push(elem);
            }
        }
    }
    let mut kb = InstanceBuilder::new(schema);
    let mut pre_to_keep: Vec<Vec<Option<usize>>> =
        (0..n_ob).map(|ob| vec![None; pre.count(ob)]).collect();
    for ob in 0..n_ob {
        for &p in &keep_elems[ob] {
            let k = kb.add_element(ob, pre.label(ob, p).map(str::to_owned)).unwrap();
            pre_to_keep[ob][p] = Some(k);
        }
    }
    for (hom, h) in schema.homs().iter().enumerate() {
        for &p in &keep_elems[h.src] {
            let Some(tgt) = pre.hom(hom, p) else { continue };
            let Some(ktgt) = pre_to_keep[h.tgt][tgt] else { continue };
            if r.gen_bool(0.7) {
                kb.set_hom(hom, pre_to_keep[h.src][p].unwrap(), ktgt).unwrap();
            }
        }
    }
    for (attr, a) in schema.attrs().iter().enumerate() {
        for &p in &keep_elems[a.src] {
            let Some(value) = pre.attr(attr, p) else { continue };
            if r.gen_bool(0.7) {
                kb.set_attr(attr, pre_to_keep[a.src][p].unwrap(), value.clone()).unwrap();
            }
        }
    }
    let keep = kb.build().unwrap();
    let l = InstanceMorphism::new(
        keep.clone(),
        pre.clone(),
        (0..n_ob).map(|ob| keep_elems[ob].clone()).collect(),
    );

    // Eff starts as a copy of keep (r = prefix inclusion), plus a few
    // fresh elements; entries are completed so the rewrite result stays
    // hom-total.
    let mut eb = InstanceBuilder::new(schema);
    let mut eff_counts = vec![0usize; n_ob];
    for ob in 0..n_ob {
        for k in 0..keep.count(ob) {
            eb.add_element(ob, keep.label(ob, k).map(str::to_owned)).unwrap();
            eff_counts[ob] += 1;
        }
    }
    let mut eff_homs: Vec<Vec<Option<usize>>> = schema
        .homs()
        .iter()
        .map(|h| vec![None; eff_counts[h.src]])
        .collect();
    for (hom, h) in schema.homs().iter().enumerate() {
        for k in 0..keep.count(h.src) {
            eff_homs[hom][k] = keep.hom(hom, k);
        }
    }
    // New elements, plus a queue of (ob, elem) whose outgoing homs all
    // need definitions.
    let mut pending: Vec<(usize, usize)> = Vec::new();
    for _ in 0..r.gen_range(0..=2usize) {
        let ob = r.gen_range(0..n_ob);
        let idx = eb.add_element(ob, None).unwrap();
        for (hom, h) in schema.homs().iter().enumerate() {
            if h.src == ob {
                eff_homs[hom].push(None);
            }
        }
        eff_counts[ob] += 1;
        pending.push((ob, idx));
    }
    // Kept elements whose entry was removed-but-defined-in-pre must be
    // redefined by eff, or the result loses hom-totality.
    let mut needs: Vec<(usize, usize)> = Vec::new(); // (hom, eff src elem)
    for (hom, h) in schema.homs().iter().enumerate() {
        for (k, &p) in keep_elems[h.src].iter().enumerate() {
            if keep.hom(hom, k).is_none() && pre.hom(hom, p).is_some() {
                needs.push((hom, k));
            }
        }
    }
    for &(ob, elem) in &pending {
        for (hom, h) in schema.homs().iter().enumerate() {
            if h.src == ob {
                needs.push((hom, elem));
            }
        }
    }
    let mut i = 0;
    while i < needs.len() {
        let (hom, src) = needs[i];
        i += 1;
        if eff_homs[hom][src].is_some() {
            continue;
        }
        let tgt_ob = schema.hom(hom).tgt;
        let tgt = if eff_counts[tgt_ob] > 0 {
            r.gen_range(0..eff_counts[tgt_ob])
        } else {
            // Materialize one element of the missing type; it needs its
            // own homs defined too.
            let idx = eb.add_element(tgt_ob, None).unwrap();
            for (hom2, h2) in schema.homs().iter().enumerate() {
                if h2.src == tgt_ob {
                    eff_homs[hom2].push(None);
                    needs.push((hom2, idx));
                }
            }
            eff_counts[tgt_ob] += 1;
            idx
        };
        eff_homs[hom][src] = Some(tgt);
    }
    for (hom, table) in eff_homs.iter().enumerate() {
        for (src, tgt) in table.iter().enumerate() {
            if let Some(tgt) = tgt {
                eb.set_hom(hom, src, *tgt).unwrap();
            }
        }
    }
    // A little attribute churn: keep's values plus random overrides.
    for (attr, a) in schema.attrs().iter().enumerate() {
        for src in 0..eff_counts[a.src] {
            let kept = if src < keep.count(a.src) {
                keep.attr(attr, src).cloned()
            } else {
                None
            };
            let value = if r.gen_bool(0.2) {
                Some(random_value(r, schema.attr_kind(attr)))
            } else {
                kept
            };
            if let Some(v) = value {
                eb.set_attr(attr, src, v).unwrap();
            }
        }
    }
    let eff = eb.build().unwrap();
    let eff_relabel_ok = (0..n_ob).all(|ob| keep.count(ob) <= eff.count(ob));
    debug_assert!(eff_relabel_ok);
    let r_morphism = InstanceMorphism::new(
        keep.clone(),
        eff.clone(),
        (0..n_ob).map(|ob| (0..keep.count(ob)).collect()).collect(),
    );

    let action = ActionSpan {
        name: "rand".into(),
        params: Vec::new(),
        pre,
        keep,
        eff,
        l,
        r: r_morphism,
    };
    match check_applicable(&action, &match_, state) {
        Ok(()) => Some(GroundedStep { action, match_ }),
        Err(_) => None,
    }
}

/// Enumerate every type-respecting assignment from `pattern` to `host`
/// in lexicographic order and filter by validity (and injectivity when
/// `monic`). The independent oracle for the backtracking search.
pub fn brute_force_homs(
    pattern: &Instance,
    host: &Instance,
    monic: bool,
) -> Result<Vec<InstanceMorphism>> {
    let n_ob = pattern.schema().objects().len();
    let slots: Vec<(usize, usize)> = (0..n_ob)
        .flat_map(|ob| (0..pattern.count(ob)).map(move |e| (ob, e)))
        .collect();
    let mut results = Vec::new();
    let mut current: Vec<Vec<usize>> = (0..n_ob).map(|ob| vec![0; pattern.count(ob)]).collect();
    fn odometer(
        slots: &[(usize, usize)],
        i: usize,
        host: &Instance,
        current: &mut Vec<Vec<usize>>,
        out: &mut Vec<Vec<Vec<usize>>>,
    ) {
        if i == slots.len() {
            out.push(current.clone());
            return;
        }
        let (ob, e) = slots[i];
        for cand in 0..host.count(ob) {
            current[ob][e] = cand;
            odometer(slots, i + 1, host, current, out);
        }
    }
    let mut all = Vec::new();
    odometer(&slots, 0, host, &mut current, &mut all);
    for components in all {
        let m = InstanceMorphism::new(pattern.clone(), host.clone(), components);
        if m.is_valid() && (!monic || m.is_monic()) {
            results.push(m);
        }
    }
    Ok(results)
}
