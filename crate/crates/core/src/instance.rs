//! Partial attributed instances over a schema and the natural
//! transformations between them.
//!
//! An instance assigns each object type a finite set of elements (dense
//! integers, with optional labels as serialization sugar), each hom a
//! partial table, and each attr a partial table of values. States are
//! hom-total; patterns and goals may leave anything undefined.

use std::sync::Arc;

use serde_json::{json, Map, Value as Json};

use crate::error::{Error, Result};
use crate::schema::{field_str, Schema};
use crate::value::Value;

#[derive(Debug, PartialEq)]
struct InstanceData {
    schema: Schema,
    counts: Vec<usize>,
    labels: Vec<Vec<Option<String>>>,
    /// Per hom, per source element, target element.
    homs: Vec<Vec<Option<usize>>>,
    /// Per attr, per source element, value.
    attrs: Vec<Vec<Option<Value>>>,
}

/// An immutable instance; cheap to clone and share across threads.
#[derive(Debug, Clone)]
pub struct Instance {
    inner: Arc<InstanceData>,
}

impl PartialEq for Instance {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner) || *self.inner == *other.inner
    }
}

impl Eq for Instance {}

impl Instance {
    /// The empty instance over a schema.
    pub fn empty(schema: &Schema) -> Instance {
        InstanceBuilder::new(schema).build().expect("empty instance is valid")
    }

    pub fn schema(&self) -> &Schema {
        &self.inner.schema
    }

    /// Number of elements of an object type.
    pub fn count(&self, ob: usize) -> usize {
        self.inner.counts[ob]
    }

    pub fn counts(&self) -> &[usize] {
        &self.inner.counts
    }

    pub fn label(&self, ob: usize, elem: usize) -> Option<&str> {
        self.inner.labels[ob][elem].as_deref()
    }

    pub fn labels(&self, ob: usize) -> &[Option<String>] {
        &self.inner.labels[ob]
    }

    /// Element of an object by label.
    pub fn element_by_label(&self, ob: usize, label: &str) -> Option<usize> {
        self.inner.labels[ob]
            .iter()
            .position(|l| l.as_deref() == Some(label))
    }

    /// Hom table entry, if defined.
    pub fn hom(&self, hom: usize, elem: usize) -> Option<usize> {
        self.inner.homs[hom][elem]
    }

    pub fn attr(&self, attr: usize, elem: usize) -> Option<&Value> {
        self.inner.attrs[attr][elem].as_ref()
    }

    /// True when every hom entry is defined. States must satisfy this.
    pub fn is_hom_total(&self) -> bool {
        self.inner.homs.iter().all(|t| t.iter().all(Option::is_some))
    }

    /// Count of defined hom and attr entries, by generator.
    pub fn defined_entries(&self) -> (Vec<usize>, Vec<usize>) {
        let homs = self
            .inner
            .homs
            .iter()
            .map(|t| t.iter().filter(|e| e.is_some()).count())
            .collect();
        let attrs = self
            .inner
            .attrs
            .iter()
            .map(|t| t.iter().filter(|e| e.is_some()).count())
            .collect();
        (homs, attrs)
    }

    /// Structural equality ignoring labels.
    pub fn same_structure(&self, other: &Instance) -> bool {
        self.schema() == other.schema()
            && self.inner.counts == other.inner.counts
            && self.inner.homs == other.inner.homs
            && self.inner.attrs == other.inner.attrs
    }

    /// Canonical reference for an element inside documents: its label, or
    /// `#index` when unlabeled.
    pub fn elem_ref(&self, ob: usize, elem: usize) -> String {
        match self.label(ob, elem) {
            Some(l) => l.to_owned(),
            None => format!("#{elem}"),
        }
    }

    /// Resolve a document element reference.
    pub fn resolve_ref(&self, ob: usize, r: &str) -> Result<usize> {
        if let Some(idx) = r.strip_prefix('#') {
            let idx: usize = idx
                .parse()
                .map_err(|_| Error::Parse(format!("bad element reference `{r}`")))?;
            if idx >= self.count(ob) {
                return Err(Error::OutOfRange(format!(
                    "element `{r}` of {}",
                    self.schema().object(ob)
                )));
            }
            return Ok(idx);
        }
        self.element_by_label(ob, r).ok_or_else(|| {
            Error::OutOfRange(format!("no element `{r}` of {}", self.schema().object(ob)))
        })
    }

    /// Parse an instance document against a loaded schema.
    pub fn load(text: &str, schema: &Schema) -> Result<Instance> {
        let doc: Json = serde_json::from_str(text)?;
        Instance::from_json(&doc, schema)
    }

    pub fn from_json(doc: &Json, schema: &Schema) -> Result<Instance> {
        let name = field_str(doc, "schema")?;
        if name != schema.name() {
            return Err(Error::SchemaMismatch(format!(
                "document is over `{name}`, loaded schema is `{}`",
                schema.name()
            )));
        }
        let mut b = InstanceBuilder::new(schema);
        if let Some(elements) = doc.get("elements").and_then(Json::as_object) {
            for (ob_name, labels) in elements {
                let ob = schema.object_id(ob_name)?;
                let labels = labels
                    .as_array()
                    .ok_or_else(|| Error::Parse(format!("elements of `{ob_name}` must be an array")))?;
                for l in labels {
                    match l {
                        Json::Null => {
                            b.add_element(ob, None)?;
                        }
                        Json::String(s) => {
                            b.add_element(ob, Some(s.clone()))?;
                        }
                        other => {
                            return Err(Error::Parse(format!(
                                "element labels must be strings or null, got `{other}`"
                            )))
                        }
                    }
                }
            }
        }
        let resolve = |b: &InstanceBuilder, ob: usize, r: &str| -> Result<usize> {
            if let Some(idx) = r.strip_prefix('#') {
                let idx: usize = idx
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad element reference `{r}`")))?;
                if idx >= b.counts[ob] {
                    return Err(Error::OutOfRange(format!("element `{r}` of {}", schema.object(ob))));
                }
                Ok(idx)
            } else {
                b.labels[ob]
                    .iter()
                    .position(|l| l.as_deref() == Some(r))
                    .ok_or_else(|| {
                        Error::OutOfRange(format!("no element `{r}` of {}", schema.object(ob)))
                    })
            }
        };
        if let Some(homs) = doc.get("homs").and_then(Json::as_object) {
            for (hom_name, table) in homs {
                let hom = schema.hom_id(hom_name)?;
                let h = schema.hom(hom);
                let table = table
                    .as_object()
                    .ok_or_else(|| Error::Parse(format!("hom table `{hom_name}` must be an object")))?;
                for (src_ref, tgt_ref) in table {
                    let src = resolve(&b, h.src, src_ref)?;
                    let tgt_ref = tgt_ref
                        .as_str()
                        .ok_or_else(|| Error::Parse(format!("hom targets must be strings in `{hom_name}`")))?;
                    let tgt = resolve(&b, h.tgt, tgt_ref)?;
                    b.set_hom(hom, src, tgt)?;
                }
            }
        }
        if let Some(attrs) = doc.get("attrs").and_then(Json::as_object) {
            for (attr_name, table) in attrs {
                let attr = schema.attr_id(attr_name)?;
                let a = schema.attr(attr);
                let table = table
                    .as_object()
                    .ok_or_else(|| Error::Parse(format!("attr table `{attr_name}` must be an object")))?;
                for (src_ref, value) in table {
                    let src = resolve(&b, a.src, src_ref)?;
                    let value = Value::from_json(schema.attr_kind(attr), value)?;
                    b.set_attr(attr, src, value)?;
                }
            }
        }
        b.build()
    }

    /// Canonical serialization. All objects, homs, and attrs appear in
    /// schema declaration order; undefined entries are simply absent.
    pub fn to_json(&self) -> Json {
        let schema = self.schema();
        let mut elements = Map::new();
        for (ob, ob_name) in schema.objects().iter().enumerate() {
            let labels: Vec<Json> = self.inner.labels[ob]
                .iter()
                .map(|l| match l {
                    Some(s) => json!(s),
                    None => Json::Null,
                })
                .collect();
            elements.insert(ob_name.clone(), Json::Array(labels));
        }
        let mut homs = Map::new();
        for (hom, h) in schema.homs().iter().enumerate() {
            let mut table = Map::new();
            for (src, tgt) in self.inner.homs[hom].iter().enumerate() {
                if let Some(tgt) = tgt {
                    table.insert(self.elem_ref(h.src, src), json!(self.elem_ref(h.tgt, *tgt)));
                }
            }
            homs.insert(h.name.clone(), Json::Object(table));
        }
        let mut attrs = Map::new();
        for (attr, a) in schema.attrs().iter().enumerate() {
            let mut table = Map::new();
            for (src, value) in self.inner.attrs[attr].iter().enumerate() {
                if let Some(value) = value {
                    table.insert(self.elem_ref(a.src, src), value.to_json());
                }
            }
            attrs.insert(a.name.clone(), Json::Object(table));
        }
        let mut map = Map::new();
        map.insert("schema".into(), json!(schema.name()));
        map.insert("elements".into(), Json::Object(elements));
        map.insert("homs".into(), Json::Object(homs));
        map.insert("attrs".into(), Json::Object(attrs));
        Json::Object(map)
    }

    pub fn serialize(&self) -> String {
        crate::doc::to_canonical_string(&self.to_json())
    }

    /// True iff a bijective morphism exists in both directions; decided by
    /// mono search after a cardinality check.
    pub fn is_isomorphic(&self, other: &Instance) -> Result<bool> {
        if self.schema() != other.schema() {
            return Err(Error::SchemaMismatch(
                "isomorphism check needs a shared schema".into(),
            ));
        }
        if self.inner.counts != other.inner.counts {
            return Ok(false);
        }
        Ok(crate::homsearch::exists_mono(self, other)?
            && crate::homsearch::exists_mono(other, self)?)
    }
}

/// Single-threaded builder for instances.
#[derive(Debug)]
pub struct InstanceBuilder {
    schema: Schema,
    counts: Vec<usize>,
    labels: Vec<Vec<Option<String>>>,
    homs: Vec<Vec<Option<usize>>>,
    attrs: Vec<Vec<Option<Value>>>,
}

impl InstanceBuilder {
    pub fn new(schema: &Schema) -> InstanceBuilder {
        let n_ob = schema.objects().len();
        InstanceBuilder {
            schema: schema.clone(),
            counts: vec![0; n_ob],
            labels: vec![Vec::new(); n_ob],
            homs: vec![Vec::new(); schema.homs().len()],
            attrs: vec![Vec::new(); schema.attrs().len()],
        }
    }

    /// Add one element of the given object type; returns its index.
    pub fn add_element(&mut self, ob: usize, label: Option<String>) -> Result<usize> {
        if let Some(l) = &label {
            if l.starts_with('#') {
                return Err(Error::Parse(format!(
                    "label `{l}` may not start with `#` (reserved for positional references)"
                )));
            }
            if self.labels[ob].iter().any(|x| x.as_deref() == Some(l)) {
                return Err(Error::DuplicateLabel(l.clone()));
            }
        }
        let idx = self.counts[ob];
        self.counts[ob] += 1;
        self.labels[ob].push(label);
        for (hom, h) in self.schema.homs().iter().enumerate() {
            if h.src == ob {
                self.homs[hom].push(None);
            }
        }
        for (attr, a) in self.schema.attrs().iter().enumerate() {
            if a.src == ob {
                self.attrs[attr].push(None);
            }
        }
        Ok(idx)
    }

    /// Convenience: add an element with a label, by type name.
    pub fn add(&mut self, ob_name: &str, label: &str) -> Result<usize> {
        let ob = self.schema.object_id(ob_name)?;
        self.add_element(ob, Some(label.to_owned()))
    }

    pub fn element(&self, ob: usize, label: &str) -> Result<usize> {
        self.labels[ob]
            .iter()
            .position(|l| l.as_deref() == Some(label))
            .ok_or_else(|| {
                Error::OutOfRange(format!("no element `{label}` of {}", self.schema.object(ob)))
            })
    }

    pub fn set_hom(&mut self, hom: usize, src: usize, tgt: usize) -> Result<()> {
        let h = self.schema.hom(hom);
        if src >= self.counts[h.src] || tgt >= self.counts[h.tgt] {
            return Err(Error::OutOfRange(format!("hom entry {}({src}) = {tgt}", h.name)));
        }
        self.homs[hom][src] = Some(tgt);
        Ok(())
    }

    /// Convenience: set a hom entry by names and labels.
    pub fn hom(&mut self, hom_name: &str, src_label: &str, tgt_label: &str) -> Result<()> {
        let hom = self.schema.hom_id(hom_name)?;
        let h = self.schema.hom(hom).clone();
        let src = self.element(h.src, src_label)?;
        let tgt = self.element(h.tgt, tgt_label)?;
        self.set_hom(hom, src, tgt)
    }

    pub fn set_attr(&mut self, attr: usize, src: usize, value: Value) -> Result<()> {
        let a = self.schema.attr(attr);
        if src >= self.counts[a.src] {
            return Err(Error::OutOfRange(format!("attr entry {}({src})", a.name)));
        }
        if value.kind() != self.schema.attr_kind(attr) {
            return Err(Error::TypeMismatch(format!(
                "attr {} expects {}, got {}",
                a.name,
                self.schema.attr_kind(attr),
                value.kind()
            )));
        }
        self.attrs[attr][src] = Some(value);
        Ok(())
    }

    /// Convenience: set an attr entry by names and labels.
    pub fn attr(&mut self, attr_name: &str, src_label: &str, value: Value) -> Result<()> {
        let attr = self.schema.attr_id(attr_name)?;
        let src_ob = self.schema.attr(attr).src;
        let src = self.element(src_ob, src_label)?;
        self.set_attr(attr, src, value)
    }

    /// Declare `lhs_hom(lhs_src) == rhs_hom(rhs_src)`. When neither side is
    /// defined yet, a fresh unlabeled shared target element is materialized.
    pub fn hom_eq(
        &mut self,
        lhs_hom: &str,
        lhs_src: &str,
        rhs_hom: &str,
        rhs_src: &str,
    ) -> Result<()> {
        let lh = self.schema.hom_id(lhs_hom)?;
        let rh = self.schema.hom_id(rhs_hom)?;
        let (lsrc_ob, ltgt_ob) = (self.schema.hom(lh).src, self.schema.hom(lh).tgt);
        let (rsrc_ob, rtgt_ob) = (self.schema.hom(rh).src, self.schema.hom(rh).tgt);
        if ltgt_ob != rtgt_ob {
            return Err(Error::TypeMismatch(format!(
                "equation {lhs_hom}({lhs_src}) == {rhs_hom}({rhs_src}) relates different target types"
            )));
        }
        let ls = self.element(lsrc_ob, lhs_src)?;
        let rs = self.element(rsrc_ob, rhs_src)?;
        let tgt = match (self.homs[lh][ls], self.homs[rh][rs]) {
            (Some(t), _) | (_, Some(t)) => t,
            (None, None) => self.add_element(ltgt_ob, None)?,
        };
        self.set_hom(lh, ls, tgt)?;
        self.set_hom(rh, rs, tgt)
    }

    pub fn build(self) -> Result<Instance> {
        Ok(Instance {
            inner: Arc::new(InstanceData {
                schema: self.schema,
                counts: self.counts,
                labels: self.labels,
                homs: self.homs,
                attrs: self.attrs,
            }),
        })
    }
}

/// A natural transformation between instances over the same schema,
/// given by a total component mapping per object type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstanceMorphism {
    pub dom: Instance,
    pub cod: Instance,
    /// Per object, per domain element, its codomain element.
    pub components: Vec<Vec<usize>>,
}

impl InstanceMorphism {
    pub fn new(dom: Instance, cod: Instance, components: Vec<Vec<usize>>) -> InstanceMorphism {
        InstanceMorphism { dom, cod, components }
    }

    pub fn identity(x: &Instance) -> InstanceMorphism {
        let components = x.counts().iter().map(|&n| (0..n).collect()).collect();
        InstanceMorphism::new(x.clone(), x.clone(), components)
    }

    pub fn apply(&self, ob: usize, elem: usize) -> usize {
        self.components[ob][elem]
    }

    /// Naturality on defined structure plus attribute compatibility.
    /// Undefined domain entries impose no constraint.
    pub fn check(&self) -> Result<()> {
        if self.dom.schema() != self.cod.schema() {
            return Err(Error::SchemaMismatch(
                "morphism endpoints are over different schemas".into(),
            ));
        }
        let schema = self.dom.schema();
        if self.components.len() != schema.objects().len() {
            return Err(Error::InvalidMorphism("component count mismatch".into()));
        }
        for (ob, comp) in self.components.iter().enumerate() {
            if comp.len() != self.dom.count(ob) {
                return Err(Error::InvalidMorphism(format!(
                    "component at {} is not total",
                    schema.object(ob)
                )));
            }
            if let Some(&bad) = comp.iter().find(|&&c| c >= self.cod.count(ob)) {
                return Err(Error::OutOfRange(format!(
                    "component at {} maps to {bad}",
                    schema.object(ob)
                )));
            }
        }
        for (hom, h) in schema.homs().iter().enumerate() {
            for src in 0..self.dom.count(h.src) {
                let Some(tgt) = self.dom.hom(hom, src) else { continue };
                let img = self.components[h.src][src];
                match self.cod.hom(hom, img) {
                    Some(cod_tgt) if cod_tgt == self.components[h.tgt][tgt] => {}
                    _ => {
                        return Err(Error::InvalidMorphism(format!(
                            "hom square for {} fails at element {}",
                            h.name,
                            self.dom.elem_ref(h.src, src)
                        )))
                    }
                }
            }
        }
        for (attr, a) in schema.attrs().iter().enumerate() {
            for src in 0..self.dom.count(a.src) {
                let Some(value) = self.dom.attr(attr, src) else { continue };
                let img = self.components[a.src][src];
                match self.cod.attr(attr, img) {
                    Some(cod_value) if cod_value == value => {}
                    _ => {
                        return Err(Error::InvalidMorphism(format!(
                            "attribute {} differs at element {}",
                            a.name,
                            self.dom.elem_ref(a.src, src)
                        )))
                    }
                }
            }
        }
        Ok(())
    }

    pub fn is_valid(&self) -> bool {
        self.check().is_ok()
    }

    /// Every component injective.
    pub fn is_monic(&self) -> bool {
        self.components.iter().enumerate().all(|(ob, comp)| {
            let mut seen = vec![false; self.cod.count(ob)];
            comp.iter().all(|&c| !std::mem::replace(&mut seen[c], true))
        })
    }

    /// `other` after `self` (`self: X -> Y`, `other: Y -> Z`).
    pub fn then(&self, other: &InstanceMorphism) -> Result<InstanceMorphism> {
        if self.cod != other.dom {
            return Err(Error::InvalidMorphism(
                "composition endpoints do not meet".into(),
            ));
        }
        let components = self
            .components
            .iter()
            .enumerate()
            .map(|(ob, comp)| comp.iter().map(|&c| other.components[ob][c]).collect())
            .collect();
        Ok(InstanceMorphism::new(
            self.dom.clone(),
            other.cod.clone(),
            components,
        ))
    }

    /// Bijective, valid, and with a valid inverse.
    pub fn is_isomorphism(&self) -> bool {
        if !self.is_monic() || self.dom.counts() != self.cod.counts() || !self.is_valid() {
            return false;
        }
        self.inverse().map(|inv| inv.is_valid()).unwrap_or(false)
    }

    /// Inverse of a bijective morphism.
    pub fn inverse(&self) -> Option<InstanceMorphism> {
        let mut components = Vec::with_capacity(self.components.len());
        for (ob, comp) in self.components.iter().enumerate() {
            let n = self.cod.count(ob);
            if comp.len() != n {
                return None;
            }
            let mut inv = vec![usize::MAX; n];
            for (i, &c) in comp.iter().enumerate() {
                if inv[c] != usize::MAX {
                    return None;
                }
                inv[c] = i;
            }
            components.push(inv);
        }
        Some(InstanceMorphism::new(
            self.cod.clone(),
            self.dom.clone(),
            components,
        ))
    }

    /// Components document: `{type: {srcRef: tgtRef}}`.
    pub fn components_to_json(&self) -> Json {
        let schema = self.dom.schema();
        let mut out = Map::new();
        for (ob, comp) in self.components.iter().enumerate() {
            let mut table = Map::new();
            for (src, &tgt) in comp.iter().enumerate() {
                table.insert(
                    self.dom.elem_ref(ob, src),
                    json!(self.cod.elem_ref(ob, tgt)),
                );
            }
            out.insert(schema.object(ob).to_owned(), Json::Object(table));
        }
        Json::Object(out)
    }

    /// Read components from a `{type: {srcRef: tgtRef}}` document.
    pub fn components_from_json(doc: &Json, dom: &Instance, cod: &Instance) -> Result<InstanceMorphism> {
        let schema = dom.schema();
        let obj = doc
            .as_object()
            .ok_or_else(|| Error::Parse("morphism components must be an object".into()))?;
        let mut components: Vec<Vec<Option<usize>>> =
            dom.counts().iter().map(|&n| vec![None; n]).collect();
        for (ob_name, table) in obj {
            let ob = schema.object_id(ob_name)?;
            let table = table
                .as_object()
                .ok_or_else(|| Error::Parse(format!("components of `{ob_name}` must be an object")))?;
            for (src_ref, tgt_ref) in table {
                let src = dom.resolve_ref(ob, src_ref)?;
                let tgt_ref = tgt_ref
                    .as_str()
                    .ok_or_else(|| Error::Parse("component targets must be strings".into()))?;
                components[ob][src] = Some(cod.resolve_ref(ob, tgt_ref)?);
            }
        }
        let components = components
            .into_iter()
            .enumerate()
            .map(|(ob, comp)| {
                comp.into_iter()
                    .enumerate()
                    .map(|(i, c)| {
                        c.ok_or_else(|| {
                            Error::InvalidMorphism(format!(
                                "component missing for element {} of {}",
                                dom.elem_ref(ob, i),
                                schema.object(ob)
                            ))
                        })
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(InstanceMorphism::new(dom.clone(), cod.clone(), components))
    }
}
