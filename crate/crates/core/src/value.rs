//! Primitive attribute kinds and values.
//!
//! Values compare by exact equality; reals are compared bit-for-bit as
//! written in the source documents. No arithmetic is performed on values
//! anywhere in the library, so no rounding can creep in.

use std::fmt;

use crate::error::{Error, Result};

/// The primitive kind of an attribute type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PrimKind {
    String,
    Boolean,
    Integer,
    Real,
}

impl PrimKind {
    pub fn name(self) -> &'static str {
        match self {
            PrimKind::String => "string",
            PrimKind::Boolean => "boolean",
            PrimKind::Integer => "integer",
            PrimKind::Real => "real",
        }
    }

    pub fn parse(s: &str) -> Result<PrimKind> {
        match s {
            "string" => Ok(PrimKind::String),
            "boolean" => Ok(PrimKind::Boolean),
            "integer" => Ok(PrimKind::Integer),
            "real" => Ok(PrimKind::Real),
            other => Err(Error::Parse(format!("unknown primitive kind `{other}`"))),
        }
    }
}

impl fmt::Display for PrimKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// An attribute value.
#[derive(Debug, Clone)]
pub enum Value {
    Str(String),
    Bool(bool),
    Int(i64),
    Real(f64),
}

impl Value {
    pub fn kind(&self) -> PrimKind {
        match self {
            Value::Str(_) => PrimKind::String,
            Value::Bool(_) => PrimKind::Boolean,
            Value::Int(_) => PrimKind::Integer,
            Value::Real(_) => PrimKind::Real,
        }
    }

    /// Read a JSON value as a value of the given kind.
    pub fn from_json(kind: PrimKind, v: &serde_json::Value) -> Result<Value> {
        let err = || {
            Error::TypeMismatch(format!("expected a {} value, got `{v}`", kind.name()))
        };
        match kind {
            PrimKind::String => v.as_str().map(|s| Value::Str(s.to_owned())).ok_or_else(err),
            PrimKind::Boolean => v.as_bool().map(Value::Bool).ok_or_else(err),
            PrimKind::Integer => v.as_i64().map(Value::Int).ok_or_else(err),
            PrimKind::Real => v.as_f64().map(Value::Real).ok_or_else(err),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        match self {
            Value::Str(s) => serde_json::Value::String(s.clone()),
            Value::Bool(b) => serde_json::Value::Bool(*b),
            Value::Int(i) => serde_json::Value::from(*i),
            Value::Real(r) => serde_json::Number::from_f64(*r)
                .map(serde_json::Value::Number)
                .unwrap_or(serde_json::Value::Null),
        }
    }
}

impl PartialEq for Value {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Value::Str(a), Value::Str(b)) => a == b,
            (Value::Bool(a), Value::Bool(b)) => a == b,
            (Value::Int(a), Value::Int(b)) => a == b,
            // Bit equality, so NaN == NaN and 0.0 != -0.0.
            (Value::Real(a), Value::Real(b)) => a.to_bits() == b.to_bits(),
            _ => false,
        }
    }
}

impl Eq for Value {}

impl std::hash::Hash for Value {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        match self {
            Value::Str(s) => {
                0u8.hash(state);
                s.hash(state);
            }
            Value::Bool(b) => {
                1u8.hash(state);
                b.hash(state);
            }
            Value::Int(i) => {
                2u8.hash(state);
                i.hash(state);
            }
            Value::Real(r) => {
                3u8.hash(state);
                r.to_bits().hash(state);
            }
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Str(s) => write!(f, "{s:?}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Int(i) => write!(f, "{i}"),
            Value::Real(r) => write!(f, "{r:?}"),
        }
    }
}
