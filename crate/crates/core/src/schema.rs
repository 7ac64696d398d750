//! Schema categories: finitely presented domain ontologies.
//!
//! A schema holds object types, hom generators (functional binary
//! predicates), attribute types, and attribute generators. Presentations
//! are free: no path equations are accepted, which makes generator-wise
//! checking of translation functors sufficient for composition
//! preservation.

use std::collections::HashMap;
use std::sync::Arc;

use serde_json::{json, Map, Value as Json};

use crate::error::{Error, Result};
use crate::value::PrimKind;

/// A hom generator `name: src -> tgt` between object types.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hom {
    pub name: String,
    pub src: usize,
    pub tgt: usize,
}

/// An attribute type with its primitive kind.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttrType {
    pub name: String,
    pub kind: PrimKind,
}

/// An attribute generator `name: src -> attrtype`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Attr {
    pub name: String,
    pub src: usize,
    pub attrtype: usize,
}

#[derive(Debug)]
struct SchemaData {
    name: String,
    objects: Vec<String>,
    homs: Vec<Hom>,
    attrtypes: Vec<AttrType>,
    attrs: Vec<Attr>,
    ob_index: HashMap<String, usize>,
    hom_index: HashMap<String, usize>,
    attrtype_index: HashMap<String, usize>,
    attr_index: HashMap<String, usize>,
}

/// A validated, immutable schema category. Cheap to clone and share.
#[derive(Debug, Clone)]
pub struct Schema {
    inner: Arc<SchemaData>,
}

impl PartialEq for Schema {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.inner.name == other.inner.name
                && self.inner.objects == other.inner.objects
                && self.inner.homs == other.inner.homs
                && self.inner.attrtypes == other.inner.attrtypes
                && self.inner.attrs == other.inner.attrs)
    }
}

impl Eq for Schema {}

impl Schema {
    /// Build and validate a schema from its declaration lists.
    pub fn new(
        name: impl Into<String>,
        objects: Vec<String>,
        homs: Vec<(String, String, String)>,
        attrtypes: Vec<(String, PrimKind)>,
        attrs: Vec<(String, String, String)>,
    ) -> Result<Schema> {
        let name = name.into();
        let mut ob_index = HashMap::new();
        for (i, ob) in objects.iter().enumerate() {
            if ob_index.insert(ob.clone(), i).is_some() {
                return Err(Error::DuplicateName(ob.clone()));
            }
        }
        let mut attrtype_index = HashMap::new();
        let attrtypes: Vec<AttrType> = attrtypes
            .into_iter()
            .map(|(name, kind)| AttrType { name, kind })
            .collect();
        for (i, at) in attrtypes.iter().enumerate() {
            if attrtype_index.insert(at.name.clone(), i).is_some() {
                return Err(Error::DuplicateName(at.name.clone()));
            }
        }
        // Homs and attrs share a namespace.
        let mut hom_index = HashMap::new();
        let mut attr_index = HashMap::new();
        let mut resolved_homs = Vec::new();
        for (i, (name, src, tgt)) in homs.into_iter().enumerate() {
            let src = *ob_index
                .get(&src)
                .ok_or_else(|| Error::UnknownEndpoint(format!("{name}: {src}")))?;
            let tgt = *ob_index
                .get(&tgt)
                .ok_or_else(|| Error::UnknownEndpoint(format!("{name}: {tgt}")))?;
            if hom_index.insert(name.clone(), i).is_some() {
                return Err(Error::DuplicateName(name));
            }
            resolved_homs.push(Hom { name, src, tgt });
        }
        let mut resolved_attrs = Vec::new();
        for (i, (name, src, attrtype)) in attrs.into_iter().enumerate() {
            let src = *ob_index
                .get(&src)
                .ok_or_else(|| Error::UnknownEndpoint(format!("{name}: {src}")))?;
            let attrtype = *attrtype_index
                .get(&attrtype)
                .ok_or_else(|| Error::UnknownEndpoint(format!("{name}: {attrtype}")))?;
            if hom_index.contains_key(&name) || attr_index.insert(name.clone(), i).is_some() {
                return Err(Error::DuplicateName(name));
            }
            resolved_attrs.push(Attr {
                name,
                src,
                attrtype,
            });
        }
        Ok(Schema {
            inner: Arc::new(SchemaData {
                name,
                objects,
                homs: resolved_homs,
                attrtypes,
                attrs: resolved_attrs,
                ob_index,
                hom_index,
                attrtype_index,
                attr_index,
            }),
        })
    }

    pub fn name(&self) -> &str {
        &self.inner.name
    }

    pub fn objects(&self) -> &[String] {
        &self.inner.objects
    }

    pub fn homs(&self) -> &[Hom] {
        &self.inner.homs
    }

    pub fn attrtypes(&self) -> &[AttrType] {
        &self.inner.attrtypes
    }

    pub fn attrs(&self) -> &[Attr] {
        &self.inner.attrs
    }

    pub fn object(&self, id: usize) -> &str {
        &self.inner.objects[id]
    }

    pub fn hom(&self, id: usize) -> &Hom {
        &self.inner.homs[id]
    }

    pub fn attr(&self, id: usize) -> &Attr {
        &self.inner.attrs[id]
    }

    pub fn attrtype(&self, id: usize) -> &AttrType {
        &self.inner.attrtypes[id]
    }

    /// Primitive kind of an attribute generator.
    pub fn attr_kind(&self, attr: usize) -> PrimKind {
        self.inner.attrtypes[self.inner.attrs[attr].attrtype].kind
    }

    pub fn object_id(&self, name: &str) -> Result<usize> {
        self.inner
            .ob_index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownEndpoint(format!("object `{name}`")))
    }

    pub fn hom_id(&self, name: &str) -> Result<usize> {
        self.inner
            .hom_index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownEndpoint(format!("hom `{name}`")))
    }

    pub fn attr_id(&self, name: &str) -> Result<usize> {
        self.inner
            .attr_index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownEndpoint(format!("attr `{name}`")))
    }

    pub fn attrtype_id(&self, name: &str) -> Result<usize> {
        self.inner
            .attrtype_index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownEndpoint(format!("attrtype `{name}`")))
    }

    /// Hom generators whose source is the given object, in declaration order.
    pub fn homs_from(&self, ob: usize) -> impl Iterator<Item = (usize, &Hom)> {
        self.inner
            .homs
            .iter()
            .enumerate()
            .filter(move |(_, h)| h.src == ob)
    }

    /// Attribute generators whose source is the given object.
    pub fn attrs_from(&self, ob: usize) -> impl Iterator<Item = (usize, &Attr)> {
        self.inner
            .attrs
            .iter()
            .enumerate()
            .filter(move |(_, a)| a.src == ob)
    }

    /// Parse a schema document. Declaration order is preserved.
    pub fn load(text: &str) -> Result<Schema> {
        let doc: Json = serde_json::from_str(text)?;
        Schema::from_json(&doc)
    }

    pub fn from_json(doc: &Json) -> Result<Schema> {
        let obj = doc
            .as_object()
            .ok_or_else(|| Error::Parse("schema document must be a JSON object".into()))?;
        for key in obj.keys() {
            if !matches!(key.as_str(), "name" | "objects" | "homs" | "attrtypes" | "attrs") {
                // Free presentations only: in particular no `equations` field.
                return Err(Error::Parse(format!(
                    "unsupported field `{key}` in schema document"
                )));
            }
        }
        let name = obj
            .get("name")
            .and_then(Json::as_str)
            .ok_or_else(|| Error::Parse("schema document missing string `name`".into()))?;
        let objects = str_array(obj.get("objects"), "objects")?;
        let mut homs = Vec::new();
        if let Some(arr) = obj.get("homs") {
            for h in expect_array(arr, "homs")? {
                homs.push((
                    field_str(h, "name")?,
                    field_str(h, "src")?,
                    field_str(h, "tgt")?,
                ));
            }
        }
        let mut attrtypes = Vec::new();
        if let Some(arr) = obj.get("attrtypes") {
            for a in expect_array(arr, "attrtypes")? {
                attrtypes.push((field_str(a, "name")?, PrimKind::parse(&field_str(a, "kind")?)?));
            }
        }
        let mut attrs = Vec::new();
        if let Some(arr) = obj.get("attrs") {
            for a in expect_array(arr, "attrs")? {
                attrs.push((
                    field_str(a, "name")?,
                    field_str(a, "src")?,
                    field_str(a, "attrtype")?,
                ));
            }
        }
        Schema::new(name, objects, homs, attrtypes, attrs)
    }

    /// Canonical serialization: declaration order preserved, UTF-8, LF.
    pub fn to_json(&self) -> Json {
        let homs: Vec<Json> = self
            .homs()
            .iter()
            .map(|h| {
                json!({"name": h.name, "src": self.object(h.src), "tgt": self.object(h.tgt)})
            })
            .collect();
        let attrtypes: Vec<Json> = self
            .attrtypes()
            .iter()
            .map(|a| json!({"name": a.name, "kind": a.kind.name()}))
            .collect();
        let attrs: Vec<Json> = self
            .attrs()
            .iter()
            .map(|a| {
                json!({
                    "name": a.name,
                    "src": self.object(a.src),
                    "attrtype": self.attrtype(a.attrtype).name,
                })
            })
            .collect();
        let mut map = Map::new();
        map.insert("name".into(), json!(self.name()));
        map.insert("objects".into(), json!(self.objects()));
        map.insert("homs".into(), Json::Array(homs));
        map.insert("attrtypes".into(), Json::Array(attrtypes));
        map.insert("attrs".into(), Json::Array(attrs));
        Json::Object(map)
    }

    pub fn serialize(&self) -> String {
        crate::doc::to_canonical_string(&self.to_json())
    }
}

pub(crate) fn expect_array<'a>(v: &'a Json, what: &str) -> Result<&'a Vec<Json>> {
    v.as_array()
        .ok_or_else(|| Error::Parse(format!("`{what}` must be an array")))
}

pub(crate) fn field_str(v: &Json, field: &str) -> Result<String> {
    v.get(field)
        .and_then(Json::as_str)
        .map(str::to_owned)
        .ok_or_else(|| Error::Parse(format!("missing string field `{field}` in `{v}`")))
}

fn str_array(v: Option<&Json>, what: &str) -> Result<Vec<String>> {
    let Some(v) = v else { return Ok(Vec::new()) };
    expect_array(v, what)?
        .iter()
        .map(|s| {
            s.as_str()
                .map(str::to_owned)
                .ok_or_else(|| Error::Parse(format!("`{what}` entries must be strings")))
        })
        .collect()
}
