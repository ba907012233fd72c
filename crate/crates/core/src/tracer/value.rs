use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde_json::Value as Json;

use crate::lang::Type;

/// A runtime value. Arrays are shared until written (copy on write), so
/// recording a configuration does not copy them.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Value {
    Int(i64),
    Bool(bool),
    Char(char),
    IntArray(Arc<Vec<i64>>),
    CharArray(Arc<Vec<char>>),
    /// ⊥: not assigned yet, or out of scope.
    Undefined,
}

/// Variable name to value.
pub type Valuation = BTreeMap<String, Value>;

impl Value {
    pub fn int_array(items: impl IntoIterator<Item = i64>) -> Value {
        Value::IntArray(Arc::new(items.into_iter().collect()))
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(n) => Some(*n),
            Value::Char(c) => Some(*c as i64),
            _ => None,
        }
    }

    pub fn is_undefined(&self) -> bool {
        matches!(self, Value::Undefined)
    }

    pub fn type_of(&self) -> Option<Type> {
        Some(match self {
            Value::Int(_) => Type::Int,
            Value::Bool(_) => Type::Bool,
            Value::Char(_) => Type::Char,
            Value::IntArray(_) => Type::IntArray,
            Value::CharArray(_) => Type::CharArray,
            Value::Undefined => return None,
        })
    }

    /// Every integer appearing in the value (array elements included).
    pub fn integers(&self) -> Vec<i64> {
        match self {
            Value::Int(n) => vec![*n],
            Value::Char(c) => vec![*c as i64],
            Value::IntArray(a) => a.to_vec(),
            Value::CharArray(a) => a.iter().map(|c| *c as i64).collect(),
            Value::Bool(_) | Value::Undefined => Vec::new(),
        }
    }

    pub fn to_json(&self) -> Json {
        match self {
            Value::Int(n) => Json::from(*n),
            Value::Bool(b) => Json::from(*b),
            Value::Char(c) => Json::from(c.to_string()),
            Value::IntArray(a) => Json::from(a.as_slice()),
            Value::CharArray(a) => Json::from(a.iter().collect::<String>()),
            Value::Undefined => Json::Null,
        }
    }

    /// Decodes a JSON value as a value of type `ty`. `null` is ⊥.
    pub fn from_json(json: &Json, ty: Type) -> Result<Value, String> {
        if json.is_null() {
            return Ok(Value::Undefined);
        }
        let bad = || format!("expected {ty}, got {json}");
        match ty {
            Type::Int => json.as_i64().map(Value::Int).ok_or_else(bad),
            Type::Bool => json.as_bool().map(Value::Bool).ok_or_else(bad),
            Type::Char => {
                let s = json.as_str().ok_or_else(bad)?;
                let mut it = s.chars();
                match (it.next(), it.next()) {
                    (Some(c), None) => Ok(Value::Char(c)),
                    _ => Err(bad()),
                }
            }
            Type::IntArray => {
                let items = json.as_array().ok_or_else(bad)?;
                let v = items
                    .iter()
                    .map(|i| i.as_i64().ok_or_else(bad))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(Value::IntArray(Arc::new(v)))
            }
            Type::CharArray => {
                let s = json.as_str().ok_or_else(bad)?;
                Ok(Value::CharArray(Arc::new(s.chars().collect())))
            }
            Type::Void => Err("void has no values".into()),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Undefined => f.write_str("⊥"),
            other => write!(f, "{}", other.to_json()),
        }
    }
}

impl serde::Serialize for Value {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}
