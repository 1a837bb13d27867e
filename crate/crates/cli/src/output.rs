//! Line-oriented records: `kind key=value ...` for people, one JSON object
//! per line under `--json`.
//!
//! Human output prints reals with 17 significant digits. JSON output uses the
//! shortest representation that parses back to the same binary64 value.

use std::io::{self, Write};

use certinum::lang::{Env, Value};
use serde_json::{Map, Number, Value as Json};

#[derive(Debug, Clone, PartialEq)]
pub enum Field {
    Num(f64),
    Nat(u64),
    Bool(bool),
    Text(String),
    Vec(Vec<f64>),
}

impl From<&Value> for Field {
    fn from(v: &Value) -> Field {
        match v {
            Value::Nat(n) => Field::Nat(*n),
            Value::Real(x) => Field::Num(*x),
            Value::Vec(xs) => Field::Vec(xs.clone()),
        }
    }
}

/// 17 significant digits, enough to identify any binary64 value.
pub fn fmt17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

fn json_num(x: f64) -> Json {
    Number::from_f64(x).map_or_else(|| Json::String(format!("{x}")), Json::Number)
}

impl Field {
    fn human(&self) -> String {
        match self {
            Field::Num(x) => fmt17(*x),
            Field::Nat(n) => n.to_string(),
            Field::Bool(b) => b.to_string(),
            Field::Text(s) if s.is_empty() || s.contains(char::is_whitespace) => format!("{s:?}"),
            Field::Text(s) => s.clone(),
            Field::Vec(xs) => {
                let parts: Vec<String> = xs.iter().map(|x| fmt17(*x)).collect();
                format!("[{}]", parts.join(","))
            }
        }
    }

    fn json(&self) -> Json {
        match self {
            Field::Num(x) => json_num(*x),
            Field::Nat(n) => Json::from(*n),
            Field::Bool(b) => Json::Bool(*b),
            Field::Text(s) => Json::String(s.clone()),
            Field::Vec(xs) => Json::Array(xs.iter().map(|x| json_num(*x)).collect()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub kind: &'static str,
    pub fields: Vec<(String, Field)>,
}

impl Record {
    pub fn new(kind: &'static str) -> Record {
        Record {
            kind,
            fields: Vec::new(),
        }
    }

    pub fn field(mut self, key: &str, f: Field) -> Record {
        self.fields.push((key.to_string(), f));
        self
    }

    pub fn num(self, key: &str, x: f64) -> Record {
        self.field(key, Field::Num(x))
    }

    pub fn opt_num(self, key: &str, x: Option<f64>) -> Record {
        match x {
            Some(x) => self.num(key, x),
            None => self,
        }
    }

    pub fn nat(self, key: &str, n: u64) -> Record {
        self.field(key, Field::Nat(n))
    }

    pub fn flag(self, key: &str, b: bool) -> Record {
        self.field(key, Field::Bool(b))
    }

    pub fn text(self, key: &str, s: impl Into<String>) -> Record {
        self.field(key, Field::Text(s.into()))
    }

    /// Appends one field per variable, in name order.
    pub fn vars(mut self, env: &Env) -> Record {
        for (k, v) in env {
            self.fields.push((k.clone(), Field::from(v)));
        }
        self
    }
}

pub struct Emitter<'a> {
    pub json: bool,
    out: &'a mut dyn Write,
}

impl<'a> Emitter<'a> {
    pub fn new(json: bool, out: &'a mut dyn Write) -> Emitter<'a> {
        Emitter { json, out }
    }

    pub fn emit(&mut self, r: &Record) -> io::Result<()> {
        if self.json {
            let mut m = Map::new();
            m.insert("record".into(), Json::String(r.kind.into()));
            for (k, f) in &r.fields {
                m.insert(k.clone(), f.json());
            }
            writeln!(self.out, "{}", Json::Object(m))
        } else {
            let mut line = r.kind.to_string();
            for (k, f) in &r.fields {
                line.push(' ');
                line.push_str(k);
                line.push('=');
                line.push_str(&f.human());
            }
            writeln!(self.out, "{line}")
        }
    }

    /// A pre-built JSON object, tagged with `record`; rendered as `key=value`
    /// pairs in human mode.
    pub fn emit_json(&mut self, kind: &'static str, obj: Json) -> io::Result<()> {
        let Json::Object(mut m) = obj else {
            return self.emit(&Record::new(kind).text("value", obj.to_string()));
        };
        if self.json {
            let mut tagged = Map::new();
            tagged.insert("record".into(), Json::String(kind.into()));
            tagged.append(&mut m);
            writeln!(self.out, "{}", Json::Object(tagged))
        } else {
            let mut r = Record::new(kind);
            for (k, v) in m {
                let f = match v {
                    Json::Number(n) if n.is_u64() => Field::Nat(n.as_u64().unwrap_or(0)),
                    Json::Number(n) => Field::Num(n.as_f64().unwrap_or(f64::NAN)),
                    Json::Bool(b) => Field::Bool(b),
                    Json::String(s) => Field::Text(s),
                    Json::Object(inner) => {
                        for (ik, iv) in inner {
                            let f = match serde_json::from_value::<Value>(iv.clone()) {
                                Ok(v) => Field::from(&v),
                                Err(_) => Field::Text(iv.to_string()),
                            };
                            r.fields.push((ik, f));
                        }
                        continue;
                    }
                    other => Field::Text(other.to_string()),
                };
                r.fields.push((k, f));
            }
            self.emit(&r)
        }
    }
}
