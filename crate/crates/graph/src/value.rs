//! Property value types shared by node and edge schemas.

use std::fmt;

/// Type tag for a declared property column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PropType {
    Str,
    Int,
    Bool,
}

impl PropType {
    pub fn name(self) -> &'static str {
        match self {
            PropType::Str => "string",
            PropType::Int => "int",
            PropType::Bool => "bool",
        }
    }

    /// Parses a header type annotation (`string`, `int`, `bool`).
    pub fn parse(s: &str) -> Option<PropType> {
        match s {
            "string" | "str" => Some(PropType::Str),
            "int" => Some(PropType::Int),
            "bool" => Some(PropType::Bool),
            _ => None,
        }
    }
}

impl fmt::Display for PropType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A typed property value attached to a node or an edge.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PropertyValue {
    Str(String),
    Int(i64),
    Bool(bool),
}

impl PropertyValue {
    pub fn prop_type(&self) -> PropType {
        match self {
            PropertyValue::Str(_) => PropType::Str,
            PropertyValue::Int(_) => PropType::Int,
            PropertyValue::Bool(_) => PropType::Bool,
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            PropertyValue::Int(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            PropertyValue::Str(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            PropertyValue::Bool(b) => Some(*b),
            _ => None,
        }
    }

    /// Parses a raw CSV cell according to the declared column type.
    pub fn parse_typed(raw: &str, ty: PropType) -> Result<PropertyValue, String> {
        match ty {
            PropType::Str => Ok(PropertyValue::Str(raw.to_string())),
            PropType::Int => raw
                .trim()
                .parse::<i64>()
                .map(PropertyValue::Int)
                .map_err(|_| format!("`{raw}` is not an int")),
            PropType::Bool => match raw.trim() {
                "true" | "TRUE" | "True" | "1" => Ok(PropertyValue::Bool(true)),
                "false" | "FALSE" | "False" | "0" => Ok(PropertyValue::Bool(false)),
                _ => Err(format!("`{raw}` is not a bool")),
            },
        }
    }
}

impl fmt::Display for PropertyValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PropertyValue::Str(s) => f.write_str(s),
            PropertyValue::Int(v) => write!(f, "{v}"),
            PropertyValue::Bool(b) => write!(f, "{b}"),
        }
    }
}
