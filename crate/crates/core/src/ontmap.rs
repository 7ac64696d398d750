//! Conjunctive queries and translation functors between schemas.
//!
//! An [`OntologyMap`] presents a functor `F: D' -> D` from the target
//! schema to the source schema. Target objects are sent to conjunctive
//! queries over the source, target homs to query morphisms, and target
//! attributes to value expressions. Because presentations are free,
//! checking the map generator-wise suffices for composition preservation;
//! there are no path equations to verify.

use serde_json::{json, Map, Value as Json};

use crate::error::{Error, Result};
use crate::schema::{expect_array, field_str, Schema};
use crate::value::{PrimKind, Value};

/// A typed query variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryVar {
    pub name: String,
    pub object: usize,
}

/// A conjunctive query over a schema: typed variables plus hom and
/// attribute constraints. A single-variable, constraint-free query is the
/// canonical image of a bare object.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Query {
    pub vars: Vec<QueryVar>,
    /// `(hom, src var, tgt var)` meaning `hom(src) == tgt`.
    pub hom_constraints: Vec<(usize, usize, usize)>,
    /// `(attr, var, value)` meaning `attr(var) == value`.
    pub attr_constraints: Vec<(usize, usize, Value)>,
}

impl Query {
    /// The query with one unconstrained variable `x` of the given object.
    pub fn bare(object: usize) -> Query {
        Query {
            vars: vec![QueryVar {
                name: "x".into(),
                object,
            }],
            hom_constraints: Vec::new(),
            attr_constraints: Vec::new(),
        }
    }

    pub fn is_bare(&self) -> bool {
        self.vars.len() == 1 && self.hom_constraints.is_empty() && self.attr_constraints.is_empty()
    }

    pub fn var_id(&self, name: &str) -> Result<usize> {
        self.vars
            .iter()
            .position(|v| v.name == name)
            .ok_or_else(|| Error::UnknownEndpoint(format!("query variable `{name}`")))
    }

    /// Structural validity over the given schema, as diagnostics.
    pub fn check(&self, schema: &Schema, issues: &mut Vec<String>, ctx: &str) {
        let mut seen = std::collections::HashSet::new();
        for v in &self.vars {
            if !seen.insert(&v.name) {
                issues.push(format!("{ctx}: duplicate query variable `{}`", v.name));
            }
            if v.object >= schema.objects().len() {
                issues.push(format!("{ctx}: variable `{}` has unknown type", v.name));
            }
        }
        for &(hom, u, w) in &self.hom_constraints {
            let h = schema.hom(hom);
            if h.src != self.vars[u].object {
                issues.push(format!(
                    "{ctx}: constraint {}({}) has source type {}, expected {}",
                    h.name,
                    self.vars[u].name,
                    schema.object(self.vars[u].object),
                    schema.object(h.src)
                ));
            }
            if h.tgt != self.vars[w].object {
                issues.push(format!(
                    "{ctx}: constraint {}({}) == {} has target type {}, expected {}",
                    h.name,
                    self.vars[u].name,
                    self.vars[w].name,
                    schema.object(self.vars[w].object),
                    schema.object(h.tgt)
                ));
            }
        }
        for (attr, u, value) in &self.attr_constraints {
            let a = schema.attr(*attr);
            if a.src != self.vars[*u].object {
                issues.push(format!(
                    "{ctx}: attribute constraint {} applied to variable `{}` of type {}",
                    a.name,
                    self.vars[*u].name,
                    schema.object(self.vars[*u].object)
                ));
            }
            if value.kind() != schema.attr_kind(*attr) {
                issues.push(format!(
                    "{ctx}: constant {} does not have kind {}",
                    value,
                    schema.attr_kind(*attr)
                ));
            }
        }
    }
}

/// A variable expression over a source query: either a query variable or
/// a single hom generator applied to one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum VarExpr {
    Var(usize),
    App { hom: usize, var: usize },
}

impl VarExpr {
    /// The object type the expression evaluates to.
    pub fn object(&self, schema: &Schema, query: &Query) -> usize {
        match self {
            VarExpr::Var(v) => query.vars[*v].object,
            VarExpr::App { hom, .. } => schema.hom(*hom).tgt,
        }
    }
}

/// How a target attribute obtains its value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AttrExpr {
    /// A constant default value.
    Const(Value),
    /// The value of a source attribute at a variable of the owner's query.
    Proj { var: usize, attr: usize },
}

/// Validation report of [`OntologyMap::check`].
#[derive(Debug, Clone)]
pub struct MapReport {
    pub issues: Vec<String>,
    /// Stated assumption: for free schemas, generator-wise checking
    /// suffices for composition preservation.
    pub note: &'static str,
}

impl MapReport {
    pub fn is_ok(&self) -> bool {
        self.issues.is_empty()
    }
}

/// A translation functor presentation `F: target -> source`.
#[derive(Debug, Clone, PartialEq)]
pub struct OntologyMap {
    source: Schema,
    target: Schema,
    /// Per target object, a conjunctive query over the source schema.
    object_queries: Vec<Query>,
    /// Per target hom `f: c1 -> c2`, expressions over `objectMap(c1)`'s
    /// variables, one per variable of `objectMap(c2)`.
    hom_maps: Vec<Vec<VarExpr>>,
    /// Per target attrtype, the source primitive kind it denotes.
    attrtype_kinds: Vec<PrimKind>,
    /// Per target attr, its value expression.
    attr_exprs: Vec<AttrExpr>,
}

impl OntologyMap {
    pub fn new(
        source: Schema,
        target: Schema,
        object_queries: Vec<Query>,
        hom_maps: Vec<Vec<VarExpr>>,
        attrtype_kinds: Vec<PrimKind>,
        attr_exprs: Vec<AttrExpr>,
    ) -> Result<OntologyMap> {
        if object_queries.len() != target.objects().len()
            || hom_maps.len() != target.homs().len()
            || attrtype_kinds.len() != target.attrtypes().len()
            || attr_exprs.len() != target.attrs().len()
        {
            return Err(Error::InvalidMap(
                "every target object, hom, attrtype, and attr needs exactly one entry".into(),
            ));
        }
        Ok(OntologyMap {
            source,
            target,
            object_queries,
            hom_maps,
            attrtype_kinds,
            attr_exprs,
        })
    }

    pub fn source(&self) -> &Schema {
        &self.source
    }

    pub fn target(&self) -> &Schema {
        &self.target
    }

    pub fn object_query(&self, ob: usize) -> &Query {
        &self.object_queries[ob]
    }

    pub fn hom_map(&self, hom: usize) -> &[VarExpr] {
        &self.hom_maps[hom]
    }

    pub fn attrtype_kind(&self, attrtype: usize) -> PrimKind {
        self.attrtype_kinds[attrtype]
    }

    pub fn attr_expr(&self, attr: usize) -> &AttrExpr {
        &self.attr_exprs[attr]
    }

    /// The identity translation functor on a schema: every object to its
    /// bare query, every hom to the evident query morphism, every attr to
    /// a projection of itself.
    pub fn identity(schema: &Schema) -> OntologyMap {
        let object_queries = (0..schema.objects().len()).map(Query::bare).collect();
        let hom_maps = schema
            .homs()
            .iter()
            .map(|h| {
                vec![VarExpr::App {
                    hom: schema.hom_id(&h.name).unwrap(),
                    var: 0,
                }]
            })
            .collect();
        let attrtype_kinds = schema.attrtypes().iter().map(|a| a.kind).collect();
        let attr_exprs = (0..schema.attrs().len())
            .map(|a| AttrExpr::Proj { var: 0, attr: a })
            .collect();
        OntologyMap {
            source: schema.clone(),
            target: schema.clone(),
            object_queries,
            hom_maps,
            attrtype_kinds,
            attr_exprs,
        }
    }

    /// True when every object query is single-variable and constraint-free
    /// and every attribute expression is a projection; such maps act by
    /// plain precomposition (delta migration).
    pub fn is_delta(&self) -> bool {
        self.object_queries.iter().all(Query::is_bare)
            && self
                .attr_exprs
                .iter()
                .all(|e| matches!(e, AttrExpr::Proj { .. }))
    }

    /// Validate the map generator-wise, reporting every violation with the
    /// offending target generator.
    pub fn check(&self) -> MapReport {
        let mut issues = Vec::new();
        let src = &self.source;
        let tgt = &self.target;
        for (ob, q) in self.object_queries.iter().enumerate() {
            q.check(src, &mut issues, &format!("object `{}`", tgt.object(ob)));
            if q.vars.is_empty() {
                issues.push(format!(
                    "object `{}`: query must have at least one variable",
                    tgt.object(ob)
                ));
            }
        }
        for (at, kind) in self.attrtype_kinds.iter().enumerate() {
            let declared = tgt.attrtype(at).kind;
            if *kind != declared {
                issues.push(format!(
                    "attrtype `{}`: mapped kind {} must preserve the declared kind {}",
                    tgt.attrtype(at).name,
                    kind,
                    declared
                ));
            }
        }
        for (hom, exprs) in self.hom_maps.iter().enumerate() {
            let h = tgt.hom(hom);
            let qs = &self.object_queries[h.src];
            let qt = &self.object_queries[h.tgt];
            let ctx = format!("hom `{}`", h.name);
            if exprs.len() != qt.vars.len() {
                issues.push(format!(
                    "{ctx}: query morphism must assign each of the {} target variables",
                    qt.vars.len()
                ));
                continue;
            }
            for (i, expr) in exprs.iter().enumerate() {
                let ok = match expr {
                    VarExpr::Var(v) => *v < qs.vars.len(),
                    VarExpr::App { var, .. } => *var < qs.vars.len(),
                };
                if !ok {
                    issues.push(format!("{ctx}: expression references a missing variable"));
                    continue;
                }
                if let VarExpr::App { hom: h2, var } = expr {
                    let sh = src.hom(*h2);
                    if sh.src != qs.vars[*var].object {
                        issues.push(format!(
                            "{ctx}: no hom {} -> {} in the source realizes `{}({})`",
                            src.object(qs.vars[*var].object),
                            src.object(qt.vars[i].object),
                            sh.name,
                            qs.vars[*var].name
                        ));
                        continue;
                    }
                }
                if expr.object(src, qs) != qt.vars[i].object {
                    issues.push(format!(
                        "{ctx}: expression for variable `{}` has type {}, expected {}",
                        qt.vars[i].name,
                        src.object(expr.object(src, qs)),
                        src.object(qt.vars[i].object)
                    ));
                }
            }
            // Constraint entailment by syntactic inclusion after translation.
            for &(ch, u, w) in &qt.hom_constraints {
                let entailed = match (&exprs[u], &exprs[w]) {
                    (VarExpr::Var(a), VarExpr::Var(b)) => {
                        qs.hom_constraints.contains(&(ch, *a, *b))
                    }
                    (VarExpr::Var(a), VarExpr::App { hom: h2, var }) => ch == *h2 && a == var,
                    _ => false,
                };
                if !entailed {
                    issues.push(format!(
                        "{ctx}: target constraint {}({}) == {} is not entailed by the source query",
                        src.hom(ch).name,
                        qt.vars[u].name,
                        qt.vars[w].name
                    ));
                }
            }
            for (ca, u, value) in &qt.attr_constraints {
                let entailed = match &exprs[*u] {
                    VarExpr::Var(a) => qs
                        .attr_constraints
                        .iter()
                        .any(|(a2, v2, val2)| a2 == ca && v2 == a && val2 == value),
                    VarExpr::App { .. } => false,
                };
                if !entailed {
                    issues.push(format!(
                        "{ctx}: target attribute constraint {}({}) == {} is not entailed",
                        src.attr(*ca).name,
                        qt.vars[*u].name,
                        value
                    ));
                }
            }
        }
        for (attr, expr) in self.attr_exprs.iter().enumerate() {
            let a = tgt.attr(attr);
            let kind = self.attrtype_kinds[a.attrtype];
            let ctx = format!("attr `{}`", a.name);
            match expr {
                AttrExpr::Const(value) => {
                    if value.kind() != kind {
                        issues.push(format!(
                            "{ctx}: constant {} does not have the mapped kind {}",
                            value, kind
                        ));
                    }
                }
                AttrExpr::Proj { var, attr: sattr } => {
                    let q = &self.object_queries[a.src];
                    if *var >= q.vars.len() {
                        issues.push(format!("{ctx}: projection references a missing variable"));
                        continue;
                    }
                    let sa = src.attr(*sattr);
                    if sa.src != q.vars[*var].object {
                        issues.push(format!(
                            "{ctx}: projection of {} applied to a variable of type {}",
                            sa.name,
                            src.object(q.vars[*var].object)
                        ));
                    }
                    if src.attr_kind(*sattr) != kind {
                        issues.push(format!(
                            "{ctx}: projected attribute {} has kind {}, expected {}",
                            sa.name,
                            src.attr_kind(*sattr),
                            kind
                        ));
                    }
                }
            }
        }
        MapReport {
            issues,
            note: "free schemas: generator-wise checks suffice for composition preservation",
        }
    }

    /// Parse an ontology-map document against loaded schemas.
    pub fn load(text: &str, source: &Schema, target: &Schema) -> Result<OntologyMap> {
        let doc: Json = serde_json::from_str(text)?;
        OntologyMap::from_json(&doc, source, target)
    }

    pub fn from_json(doc: &Json, source: &Schema, target: &Schema) -> Result<OntologyMap> {
        let obj = doc
            .as_object()
            .ok_or_else(|| Error::Parse("map document must be a JSON object".into()))?;
        let src_name = field_str(doc, "source")?;
        let tgt_name = field_str(doc, "target")?;
        if src_name != source.name() || tgt_name != target.name() {
            return Err(Error::SchemaMismatch(format!(
                "map is {src_name} -> {tgt_name}, loaded schemas are {} -> {}",
                source.name(),
                target.name()
            )));
        }
        let objects = obj
            .get("objects")
            .and_then(Json::as_object)
            .ok_or_else(|| Error::Parse("map document missing `objects`".into()))?;
        let mut object_queries = Vec::new();
        for ob_name in target.objects() {
            let q = objects.get(ob_name).ok_or_else(|| {
                Error::InvalidMap(format!("no query for target object `{ob_name}`"))
            })?;
            object_queries.push(parse_query(q, source)?);
        }
        let homs = obj
            .get("homs")
            .and_then(Json::as_object)
            .ok_or_else(|| Error::Parse("map document missing `homs`".into()))?;
        let mut hom_maps = Vec::new();
        for h in target.homs() {
            let entry = homs
                .get(&h.name)
                .and_then(Json::as_object)
                .ok_or_else(|| {
                    Error::InvalidMap(format!("no query morphism for target hom `{}`", h.name))
                })?;
            let qs = &object_queries[h.src];
            let qt = &object_queries[h.tgt];
            let mut exprs = Vec::new();
            for v in &qt.vars {
                let e = entry.get(&v.name).and_then(Json::as_str).ok_or_else(|| {
                    Error::InvalidMap(format!(
                        "hom `{}`: missing expression for target variable `{}`",
                        h.name, v.name
                    ))
                })?;
                exprs.push(parse_var_expr(e, source, qs)?);
            }
            hom_maps.push(exprs);
        }
        let attrtypes = obj
            .get("attrtypes")
            .and_then(Json::as_object)
            .ok_or_else(|| Error::Parse("map document missing `attrtypes`".into()))?;
        let mut attrtype_kinds = Vec::new();
        for at in target.attrtypes() {
            let kind = attrtypes.get(&at.name).and_then(Json::as_str).ok_or_else(|| {
                Error::InvalidMap(format!("no kind for target attrtype `{}`", at.name))
            })?;
            attrtype_kinds.push(PrimKind::parse(kind)?);
        }
        let attrs = obj
            .get("attrs")
            .and_then(Json::as_object)
            .ok_or_else(|| Error::Parse("map document missing `attrs`".into()))?;
        let mut attr_exprs = Vec::new();
        for a in target.attrs() {
            let entry = attrs.get(&a.name).ok_or_else(|| {
                Error::InvalidMap(format!("no expression for target attr `{}`", a.name))
            })?;
            let kind = attrtype_kinds[a.attrtype];
            attr_exprs.push(parse_attr_expr(entry, kind, source, &object_queries[a.src], &a.name)?);
        }
        OntologyMap::new(
            source.clone(),
            target.clone(),
            object_queries,
            hom_maps,
            attrtype_kinds,
            attr_exprs,
        )
    }

    pub fn to_json(&self) -> Json {
        let src = &self.source;
        let tgt = &self.target;
        let mut objects = Map::new();
        for (ob, q) in self.object_queries.iter().enumerate() {
            objects.insert(tgt.object(ob).to_owned(), query_to_json(q, src));
        }
        let mut homs = Map::new();
        for (hom, exprs) in self.hom_maps.iter().enumerate() {
            let h = tgt.hom(hom);
            let qs = &self.object_queries[h.src];
            let qt = &self.object_queries[h.tgt];
            let mut entry = Map::new();
            for (i, e) in exprs.iter().enumerate() {
                entry.insert(
                    qt.vars[i].name.clone(),
                    json!(var_expr_to_string(e, src, qs)),
                );
            }
            homs.insert(h.name.clone(), Json::Object(entry));
        }
        let mut attrtypes = Map::new();
        for (at, kind) in self.attrtype_kinds.iter().enumerate() {
            attrtypes.insert(tgt.attrtype(at).name.clone(), json!(kind.name()));
        }
        let mut attrs = Map::new();
        for (attr, expr) in self.attr_exprs.iter().enumerate() {
            let a = tgt.attr(attr);
            let v = match expr {
                AttrExpr::Const(value) => json!({ "const": value.to_json() }),
                AttrExpr::Proj { var, attr: sattr } => {
                    let q = &self.object_queries[a.src];
                    json!({"proj": [q.vars[*var].name, src.attr(*sattr).name]})
                }
            };
            attrs.insert(a.name.clone(), v);
        }
        let mut map = Map::new();
        map.insert("source".into(), json!(src.name()));
        map.insert("target".into(), json!(tgt.name()));
        map.insert("objects".into(), Json::Object(objects));
        map.insert("homs".into(), Json::Object(homs));
        map.insert("attrtypes".into(), Json::Object(attrtypes));
        map.insert("attrs".into(), Json::Object(attrs));
        Json::Object(map)
    }

    pub fn serialize(&self) -> String {
        crate::doc::to_canonical_string(&self.to_json())
    }
}

fn parse_query(doc: &Json, schema: &Schema) -> Result<Query> {
    let vars_json = doc
        .get("vars")
        .ok_or_else(|| Error::Parse(format!("query `{doc}` missing `vars`")))?;
    let mut vars = Vec::new();
    for v in expect_array(vars_json, "vars")? {
        vars.push(QueryVar {
            name: field_str(v, "name")?,
            object: schema.object_id(&field_str(v, "type")?)?,
        });
    }
    let query_var = |name: &str| -> Result<usize> {
        vars.iter()
            .position(|v| v.name == name)
            .ok_or_else(|| Error::UnknownEndpoint(format!("query variable `{name}`")))
    };
    let mut hom_constraints = Vec::new();
    if let Some(eqs) = doc.get("homEqs") {
        for eq in expect_array(eqs, "homEqs")? {
            let triple = expect_array(eq, "homEqs entry")?;
            if triple.len() != 3 {
                return Err(Error::Parse("homEqs entries are [hom, srcVar, tgtVar]".into()));
            }
            let get = |i: usize| -> Result<&str> {
                triple[i]
                    .as_str()
                    .ok_or_else(|| Error::Parse("homEqs entries must hold strings".into()))
            };
            hom_constraints.push((schema.hom_id(get(0)?)?, query_var(get(1)?)?, query_var(get(2)?)?));
        }
    }
    let mut attr_constraints = Vec::new();
    if let Some(eqs) = doc.get("attrEqs") {
        for eq in expect_array(eqs, "attrEqs")? {
            let triple = expect_array(eq, "attrEqs entry")?;
            if triple.len() != 3 {
                return Err(Error::Parse("attrEqs entries are [attr, var, value]".into()));
            }
            let attr = schema.attr_id(
                triple[0]
                    .as_str()
                    .ok_or_else(|| Error::Parse("attrEqs attr must be a string".into()))?,
            )?;
            let var = query_var(
                triple[1]
                    .as_str()
                    .ok_or_else(|| Error::Parse("attrEqs var must be a string".into()))?,
            )?;
            let value = Value::from_json(schema.attr_kind(attr), &triple[2])?;
            attr_constraints.push((attr, var, value));
        }
    }
    Ok(Query {
        vars,
        hom_constraints,
        attr_constraints,
    })
}

fn query_to_json(q: &Query, schema: &Schema) -> Json {
    let vars: Vec<Json> = q
        .vars
        .iter()
        .map(|v| json!({"name": v.name, "type": schema.object(v.object)}))
        .collect();
    let hom_eqs: Vec<Json> = q
        .hom_constraints
        .iter()
        .map(|&(h, u, w)| json!([schema.hom(h).name, q.vars[u].name, q.vars[w].name]))
        .collect();
    let attr_eqs: Vec<Json> = q
        .attr_constraints
        .iter()
        .map(|(a, u, value)| json!([schema.attr(*a).name, q.vars[*u].name, value.to_json()]))
        .collect();
    json!({"vars": vars, "homEqs": hom_eqs, "attrEqs": attr_eqs})
}

/// Parse `"v"` or `"hom(v)"` against the source query.
fn parse_var_expr(s: &str, schema: &Schema, query: &Query) -> Result<VarExpr> {
    if let Some(open) = s.find('(') {
        let close = s
            .rfind(')')
            .ok_or_else(|| Error::Parse(format!("malformed expression `{s}`")))?;
        let hom = schema.hom_id(s[..open].trim())?;
        let var = query.var_id(s[open + 1..close].trim())?;
        Ok(VarExpr::App { hom, var })
    } else {
        Ok(VarExpr::Var(query.var_id(s.trim())?))
    }
}

fn var_expr_to_string(e: &VarExpr, schema: &Schema, query: &Query) -> String {
    match e {
        VarExpr::Var(v) => query.vars[*v].name.clone(),
        VarExpr::App { hom, var } => {
            format!("{}({})", schema.hom(*hom).name, query.vars[*var].name)
        }
    }
}

fn parse_attr_expr(
    doc: &Json,
    kind: PrimKind,
    schema: &Schema,
    owner_query: &Query,
    attr_name: &str,
) -> Result<AttrExpr> {
    if let Some(c) = doc.get("const") {
        return Ok(AttrExpr::Const(Value::from_json(kind, c)?));
    }
    if let Some(p) = doc.get("proj") {
        let pair = expect_array(p, "proj")?;
        if pair.len() != 2 {
            return Err(Error::Parse(format!(
                "attr `{attr_name}`: proj entries are [var, attr]"
            )));
        }
        let var = owner_query.var_id(
            pair[0]
                .as_str()
                .ok_or_else(|| Error::Parse("proj var must be a string".into()))?,
        )?;
        let attr = schema.attr_id(
            pair[1]
                .as_str()
                .ok_or_else(|| Error::Parse("proj attr must be a string".into()))?,
        )?;
        return Ok(AttrExpr::Proj { var, attr });
    }
    Err(Error::Parse(format!(
        "attr `{attr_name}`: expected {{\"const\": v}} or {{\"proj\": [var, attr]}}"
    )))
}
