//! Record values flowing through dataflows.

use ordered_float::OrderedFloat;
use std::fmt;

/// A single field of a record. `Inf` is the explicit "unreached" distance
/// sentinel; it orders above every `Int`, so a min-merge treats it as the
/// identity.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Int(i64),
    Inf,
    Float(OrderedFloat<f64>),
}

impl Value {
    pub fn float(v: f64) -> Value {
        Value::Float(OrderedFloat(v))
    }

    pub fn as_int(&self) -> i64 {
        match self {
            Value::Int(v) => *v,
            _ => panic!("expected an int value, got {self:?}"),
        }
    }

    pub fn as_float(&self) -> f64 {
        match self {
            Value::Float(v) => v.0,
            _ => panic!("expected a float value, got {self:?}"),
        }
    }

    pub fn is_inf(&self) -> bool {
        matches!(self, Value::Inf)
    }
}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            Value::Inf => write!(f, "inf"),
            Value::Float(v) => write!(f, "{}", v.0),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

pub type Row = Vec<Value>;

pub fn row1(a: Value) -> Row {
    vec![a]
}

pub fn row2(a: Value, b: Value) -> Row {
    vec![a, b]
}

pub fn row3(a: Value, b: Value, c: Value) -> Row {
    vec![a, b, c]
}

/// Shorthand for integer-only rows, the common case in tests.
pub fn ints(vals: &[i64]) -> Row {
    vals.iter().map(|&v| Value::Int(v)).collect()
}
