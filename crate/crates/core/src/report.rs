//! Machine-readable reports for the CLI.
//!
//! Schema (version 1): a top-level object with `"schema": 1`, the session
//! shape (`"n"`, `"window"`), and a payload that depends on the
//! subcommand: `"terms"` for one operator, `"slots"` for a tuple,
//! `"value"` for a rational, plus named fields such as `"residual"`,
//! `"invariants"`, or `"witness"`. Rationals are rendered as `"p/q"`
//! strings so no precision is lost. Reports are byte-stable for fixed
//! inputs.

use serde_json::{json, Map, Value};

use crate::bound::Ext;
use crate::error::Error;
use crate::expr::SessionConfig;
use crate::psdo::{OpTuple, PsdOp, Window};
use crate::rational::{rat_to_string, Rat};

pub fn ext_json(e: Ext) -> Value {
    match e {
        Ext::Fin(v) => json!(v),
        Ext::PosInf => json!("inf"),
        Ext::NegInf => json!("-inf"),
    }
}

pub fn window_json(w: &Window) -> Value {
    json!({
        "xlo": w.xlo.iter().map(|&e| ext_json(e)).collect::<Vec<_>>(),
        "xhi": w.xhi.iter().map(|&e| ext_json(e)).collect::<Vec<_>>(),
        "dfloor": w.dfloor.iter().map(|&e| ext_json(e)).collect::<Vec<_>>(),
        "dcap": w.dcap.iter().map(|&e| ext_json(e)).collect::<Vec<_>>(),
    })
}

pub fn rat_json(r: &Rat) -> Value {
    json!(rat_to_string(r))
}

/// Terms in canonical order; aux exponents are included only when present.
pub fn terms_json(op: &PsdOp) -> Value {
    let mut terms = Vec::new();
    for (k, c) in op.terms() {
        let mut t = Map::new();
        t.insert("x".into(), json!(k.x));
        t.insert("d".into(), json!(k.d));
        if k.aux.iter().any(|&a| a != 0) {
            t.insert("aux".into(), json!(k.aux));
        }
        t.insert("c".into(), rat_json(c));
        terms.push(Value::Object(t));
    }
    Value::Array(terms)
}

pub fn op_json(op: &PsdOp) -> Value {
    json!({
        "window": window_json(op.window()),
        "terms": terms_json(op),
    })
}

pub fn tuple_json(t: &OpTuple) -> Value {
    Value::Array(t.slots().iter().map(op_json).collect())
}

/// The report envelope shared by every subcommand.
pub fn envelope(cfg: &SessionConfig, subcommand: &str) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("schema".into(), json!(1));
    m.insert("subcommand".into(), json!(subcommand));
    m.insert("n".into(), json!(cfg.n));
    m.insert(
        "window".into(),
        json!({ "xmax": cfg.xmax, "dfloor": cfg.dfloor }),
    );
    m
}

pub fn error_json(cfg: &SessionConfig, subcommand: &str, err: &Error) -> Value {
    let mut m = envelope(cfg, subcommand);
    m.insert(
        "error".into(),
        json!({ "kind": err.kind(), "message": err.to_string() }),
    );
    Value::Object(m)
}
