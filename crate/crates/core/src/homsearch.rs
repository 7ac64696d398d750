//! Backtracking search for homomorphisms and monomorphisms between
//! instances. This is the engine behind match finding and goal
//! validation.

use crate::error::{Error, Result};
use crate::instance::{Instance, InstanceMorphism};

/// Options for [`find_homs`].
#[derive(Debug, Clone, Default)]
pub struct SearchOptions {
    /// Require every component to be injective.
    pub monic: bool,
    /// Stop after this many results.
    pub max_results: Option<usize>,
    /// Pre-assigned pattern elements, as `(object, pattern elem, host elem)`.
    pub fixed: Vec<(usize, usize, usize)>,
}

impl SearchOptions {
    pub fn monic() -> SearchOptions {
        SearchOptions {
            monic: true,
            ..SearchOptions::default()
        }
    }
}

/// Enumerate the morphisms from `pattern` into `host` satisfying the
/// options, in lexicographic order of component assignments by
/// (type order, element ID).
pub fn find_homs(
    pattern: &Instance,
    host: &Instance,
    opts: &SearchOptions,
) -> Result<Vec<InstanceMorphism>> {
    if pattern.schema() != host.schema() {
        return Err(Error::SchemaMismatch(
            "pattern and host are over different schemas".into(),
        ));
    }
    let schema = pattern.schema();
    let n_ob = schema.objects().len();

    let mut assignment: Vec<Vec<Option<usize>>> =
        (0..n_ob).map(|ob| vec![None; pattern.count(ob)]).collect();
    let mut used: Vec<Vec<bool>> = (0..n_ob).map(|ob| vec![false; host.count(ob)]).collect();
    for &(ob, pe, he) in &opts.fixed {
        if ob >= n_ob || pe >= pattern.count(ob) || he >= host.count(ob) {
            return Err(Error::InvalidMatch("fixed assignment out of range".into()));
        }
        if let Some(prev) = assignment[ob][pe] {
            if prev != he {
                return Err(Error::InvalidMatch("conflicting fixed assignment".into()));
            }
            continue;
        }
        if opts.monic && used[ob][he] {
            return Err(Error::InvalidMatch(
                "fixed assignments must be injective for monic search".into(),
            ));
        }
        assignment[ob][pe] = Some(he);
        used[ob][he] = true;
    }

    // Most-constrained-first ordering: defined homs and attrs count,
    // ties broken by type then element ID.
    let mut order: Vec<(usize, usize)> = Vec::new();
    for ob in 0..n_ob {
        for elem in 0..pattern.count(ob) {
            order.push((ob, elem));
        }
    }
    let constraint_count = |&(ob, elem): &(usize, usize)| -> usize {
        let mut n = 0;
        for (hom, _) in schema.homs_from(ob) {
            if pattern.hom(hom, elem).is_some() {
                n += 1;
            }
        }
        for (attr, _) in schema.attrs_from(ob) {
            if pattern.attr(attr, elem).is_some() {
                n += 1;
            }
        }
        n
    };
    order.sort_by_key(|pe| (usize::MAX - constraint_count(pe), pe.0, pe.1));
    // Fixed elements go first so inconsistent seeds fail immediately.
    order.retain(|&(ob, elem)| assignment[ob][elem].is_none());

    let mut results = Vec::new();
    search(
        pattern,
        host,
        opts,
        &order,
        0,
        &mut assignment,
        &mut used,
        &mut results,
    );

    // Normalize to lexicographic order of the flattened assignment.
    results.sort_by(|a, b| flatten(a).cmp(&flatten(b)));
    if let Some(max) = opts.max_results {
        results.truncate(max);
    }
    Ok(results
        .into_iter()
        .map(|components| InstanceMorphism::new(pattern.clone(), host.clone(), components))
        .collect())
}

fn flatten(components: &[Vec<usize>]) -> Vec<usize> {
    components.iter().flatten().copied().collect()
}

#[allow(clippy::too_many_arguments)]
fn search(
    pattern: &Instance,
    host: &Instance,
    opts: &SearchOptions,
    order: &[(usize, usize)],
    depth: usize,
    assignment: &mut [Vec<Option<usize>>],
    used: &mut [Vec<bool>],
    results: &mut Vec<Vec<Vec<usize>>>,
) {
    if let Some(max) = opts.max_results {
        // Results are complete assignments in search order; normalization
        // happens afterwards, so over-collect only bounded by max is wrong
        // unless search order equals output order. Collect everything when
        // a cap is set on a monic existence check (cap 1 is the only use
        // with pruning value and any single result serves).
        if max == 1 && !results.is_empty() {
            return;
        }
    }
    if depth == order.len() {
        // Fixed seeds are checked lazily; a full assignment must pass the
        // consistency predicate for every element.
        if order.is_empty() && !full_check(pattern, host, assignment) {
            return;
        }
        results.push(
            assignment
                .iter()
                .map(|comp| comp.iter().map(|c| c.unwrap()).collect())
                .collect(),
        );
        return;
    }
    let (ob, elem) = order[depth];
    for cand in 0..host.count(ob) {
        if opts.monic && used[ob][cand] {
            continue;
        }
        assignment[ob][elem] = Some(cand);
        if consistent(pattern, host, assignment, ob, elem) {
            used[ob][cand] = true;
            search(pattern, host, opts, order, depth + 1, assignment, used, results);
            used[ob][cand] = false;
        }
        assignment[ob][elem] = None;
    }
}

/// Check every constraint touching `(ob, elem)` whose other endpoint is
/// already assigned.
fn consistent(
    pattern: &Instance,
    host: &Instance,
    assignment: &[Vec<Option<usize>>],
    ob: usize,
    elem: usize,
) -> bool {
    let schema = pattern.schema();
    let img = assignment[ob][elem].unwrap();
    for (attr, _) in schema.attrs_from(ob) {
        if let Some(value) = pattern.attr(attr, elem) {
            if host.attr(attr, img) != Some(value) {
                return false;
            }
        }
    }
    for (hom, h) in schema.homs_from(ob) {
        if let Some(tgt) = pattern.hom(hom, elem) {
            let Some(host_tgt) = host.hom(hom, img) else { return false };
            if let Some(tgt_img) = assignment[h.tgt][tgt] {
                if host_tgt != tgt_img {
                    return false;
                }
            }
        }
    }
    // Incoming homs from already-assigned sources.
    for (hom, h) in schema
        .homs()
        .iter()
        .enumerate()
        .filter(|(_, h)| h.tgt == ob)
    {
        for src in 0..pattern.count(h.src) {
            if pattern.hom(hom, src) == Some(elem) {
                if let Some(src_img) = assignment[h.src][src] {
                    if host.hom(hom, src_img) != Some(img) {
                        return false;
                    }
                }
            }
        }
    }
    true
}

fn full_check(pattern: &Instance, host: &Instance, assignment: &[Vec<Option<usize>>]) -> bool {
    let schema = pattern.schema();
    for ob in 0..schema.objects().len() {
        for elem in 0..pattern.count(ob) {
            if !consistent(pattern, host, assignment, ob, elem) {
                return false;
            }
        }
    }
    true
}

/// Does a monomorphism `goal -> state` exist?
pub fn exists_mono(goal: &Instance, state: &Instance) -> Result<bool> {
    let opts = SearchOptions {
        monic: true,
        max_results: Some(1),
        fixed: Vec::new(),
    };
    Ok(!find_homs(goal, state, &opts)?.is_empty())
}

/// Weakly connected components of an instance, elements connected via
/// defined hom entries. Components are ordered by their least
/// (type, element) member.
pub fn connected_components(x: &Instance) -> Vec<Vec<(usize, usize)>> {
    let schema = x.schema();
    let n_ob = schema.objects().len();
    // Disjoint-set over a flat index space.
    let offsets: Vec<usize> = (0..n_ob)
        .scan(0, |acc, ob| {
            let o = *acc;
            *acc += x.count(ob);
            Some(o)
        })
        .collect();
    let total: usize = x.counts().iter().sum();
    let mut parent: Vec<usize> = (0..total).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        if parent[i] != i {
            let root = find(parent, parent[i]);
            parent[i] = root;
        }
        parent[i]
    }
    for (hom, h) in schema.homs().iter().enumerate() {
        for src in 0..x.count(h.src) {
            if let Some(tgt) = x.hom(hom, src) {
                let a = find(&mut parent, offsets[h.src] + src);
                let b = find(&mut parent, offsets[h.tgt] + tgt);
                parent[a] = b;
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<(usize, usize)>> = Default::default();
    for ob in 0..n_ob {
        for elem in 0..x.count(ob) {
            let flat = offsets[ob] + elem;
            let root = find(&mut parent, flat);
            groups.entry(root).or_default().push((ob, elem));
        }
    }
    let mut components: Vec<Vec<(usize, usize)>> = groups.into_values().collect();
    for c in &mut components {
        c.sort();
    }
    components.sort_by_key(|c| c[0]);
    components
}

/// Fraction of goal components embeddable into the state, matched with
/// joint injectivity greedily in component order. Equals 1.0 exactly
/// whenever a goal monomorphism exists (including the empty goal).
pub fn goal_satisfaction(goal: &Instance, state: &Instance) -> Result<f64> {
    if goal.schema() != state.schema() {
        return Err(Error::SchemaMismatch(
            "goal and state are over different schemas".into(),
        ));
    }
    if exists_mono(goal, state)? {
        return Ok(1.0);
    }
    let components = connected_components(goal);
    if components.is_empty() {
        return Ok(1.0);
    }
    let mut used: Vec<Vec<bool>> = state.counts().iter().map(|&n| vec![false; n]).collect();
    let mut satisfied = 0usize;
    for component in &components {
        let (sub, _) = restrict(goal, component);
        let monos = find_homs(&sub, state, &SearchOptions::monic())?;
        let placed = monos.iter().find(|m| {
            m.components
                .iter()
                .enumerate()
                .all(|(ob, comp)| comp.iter().all(|&c| !used[ob][c]))
        });
        if let Some(m) = placed {
            for (ob, comp) in m.components.iter().enumerate() {
                for &host_elem in comp {
                    used[ob][host_elem] = true;
                }
            }
            satisfied += 1;
        }
    }
    Ok(satisfied as f64 / components.len() as f64)
}

/// Restrict an instance to a set of elements, reindexing densely.
/// Hom entries whose target falls outside the set are dropped.
/// Returns the restriction and, per object, the original element IDs.
pub fn restrict(x: &Instance, elements: &[(usize, usize)]) -> (Instance, Vec<Vec<usize>>) {
    let schema = x.schema();
    let n_ob = schema.objects().len();
    let mut keep: Vec<Vec<usize>> = vec![Vec::new(); n_ob];
    for &(ob, elem) in elements {
        keep[ob].push(elem);
    }
    for k in &mut keep {
        k.sort_unstable();
        k.dedup();
    }
    let mut new_index: Vec<std::collections::HashMap<usize, usize>> = vec![Default::default(); n_ob];
    let mut b = crate::instance::InstanceBuilder::new(schema);
    for ob in 0..n_ob {
        for (i, &old) in keep[ob].iter().enumerate() {
            b.add_element(ob, x.label(ob, old).map(str::to_owned))
                .expect("labels stay unique under restriction");
            new_index[ob].insert(old, i);
        }
    }
    for (hom, h) in schema.homs().iter().enumerate() {
        for (i, &old) in keep[h.src].iter().enumerate() {
            if let Some(tgt) = x.hom(hom, old) {
                if let Some(&new_tgt) = new_index[h.tgt].get(&tgt) {
                    b.set_hom(hom, i, new_tgt).unwrap();
                }
            }
        }
    }
    for (attr, a) in schema.attrs().iter().enumerate() {
        for (i, &old) in keep[a.src].iter().enumerate() {
            if let Some(value) = x.attr(attr, old) {
                b.set_attr(attr, i, value.clone()).unwrap();
            }
        }
    }
    (b.build().expect("restriction of a valid instance is valid"), keep)
}
