//! Wire formats: rationals as integers or `"p/q"` strings, matrices as row
//! arrays, squares, certificates and law reports. All serialization is
//! deterministic (sorted keys, fixed field order) so machine output is
//! byte-reproducible.

use crate::error::Error;
use crate::linalg::LinMap;
use crate::matrix::Matrix;
use crate::poly::{Poly, PolyMap};
use crate::rat::{format_rat, parse_rat, Rat};
use crate::symmetry::{ImmersionSquare, SymmetryCertificate};
use crate::Result;
use serde_json::{json, Map, Value};

/// Rational to JSON: integer when possible, `"p/q"` otherwise.
pub fn rat_to_json(r: &Rat) -> Value {
    if num::traits::One::is_one(r.denom()) {
        if let Ok(i) = i64::try_from(r.numer().clone()) {
            return json!(i);
        }
    }
    json!(format_rat(r))
}

pub fn rat_from_json(v: &Value) -> Result<Rat> {
    match v {
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(crate::rat::rat(i))
            } else {
                Err(Error::Parse(format!("non-integer number {n}")))
            }
        }
        Value::String(s) => parse_rat(s),
        other => Err(Error::Parse(format!("expected rational, got {other}"))),
    }
}

/// Matrix as an array of rows.
pub fn matrix_to_json(m: &Matrix) -> Value {
    let rows: Vec<Value> = (0..m.rows)
        .map(|r| Value::Array((0..m.cols).map(|c| rat_to_json(m.at(r, c))).collect()))
        .collect();
    Value::Array(rows)
}

pub fn matrix_from_json(v: &Value, expect_cols: Option<usize>) -> Result<Matrix> {
    let rows = v
        .as_array()
        .ok_or_else(|| Error::Parse("matrix must be an array of rows".into()))?;
    let mut data = Vec::new();
    let mut cols = expect_cols;
    for row in rows {
        let row = row
            .as_array()
            .ok_or_else(|| Error::Parse("matrix row must be an array".into()))?;
        match cols {
            None => cols = Some(row.len()),
            Some(c) if c != row.len() => {
                return Err(Error::Parse(format!(
                    "ragged matrix: expected {c} columns, got {}",
                    row.len()
                )))
            }
            _ => {}
        }
        for e in row {
            data.push(rat_from_json(e)?);
        }
    }
    let cols = cols.unwrap_or(0);
    let nrows = if cols == 0 {
        rows.len()
    } else {
        data.len() / cols
    };
    Ok(Matrix::new(nrows, cols, data))
}

/// Immersion square wire format:
/// `{"spaces": {"M1":…, "M2":…, "N1":…, "N2":…}, "maps": {"i1":…, "i2":…, "j1":…, "j2":…}}`.
pub fn square_to_json(sq: &ImmersionSquare) -> Value {
    json!({
        "spaces": {
            "M1": sq.m1(),
            "M2": sq.m2(),
            "N1": sq.n1(),
            "N2": sq.n2(),
        },
        "maps": {
            "i1": matrix_to_json(&sq.i1.mat),
            "i2": matrix_to_json(&sq.i2.mat),
            "j1": matrix_to_json(&sq.j1.mat),
            "j2": matrix_to_json(&sq.j2.mat),
        },
    })
}

pub fn square_from_json(v: &Value) -> Result<ImmersionSquare> {
    let maps = v
        .get("maps")
        .ok_or_else(|| Error::Parse("missing \"maps\"".into()))?;
    let get = |name: &str| -> Result<LinMap> {
        let m = maps
            .get(name)
            .ok_or_else(|| Error::Parse(format!("missing map {name:?}")))?;
        Ok(LinMap::new(matrix_from_json(m, None)?))
    };
    let i1 = get("i1")?;
    let i2 = get("i2")?;
    let j1 = get("j1")?;
    let j2 = get("j2")?;
    if let Some(spaces) = v.get("spaces") {
        let expect = |name: &str, got: usize| -> Result<()> {
            match spaces.get(name).and_then(Value::as_u64) {
                Some(d) if d as usize != got => Err(Error::Parse(format!(
                    "space {name} declared {d}, maps give {got}"
                ))),
                _ => Ok(()),
            }
        };
        expect("M1", i1.dom)?;
        expect("M2", i1.cod)?;
        expect("N1", j1.cod)?;
        expect("N2", j2.cod)?;
    }
    ImmersionSquare::new(i1, i2, j1, j2)
}

/// Polynomial wire format: a map is an array of components, each a list of
/// `{"coefficient": …, "exponents": […]}` terms.
pub fn poly_map_to_json(p: &PolyMap) -> Value {
    let comps: Vec<Value> = p
        .components
        .iter()
        .map(|poly| {
            Value::Array(
                poly.terms()
                    .map(|(e, c)| {
                        json!({
                            "coefficient": rat_to_json(c),
                            "exponents": e,
                        })
                    })
                    .collect(),
            )
        })
        .collect();
    json!({"arity": p.arity, "components": comps})
}

pub fn poly_map_from_json(v: &Value) -> Result<PolyMap> {
    let arity = v
        .get("arity")
        .and_then(Value::as_u64)
        .ok_or_else(|| Error::Parse("polynomial map needs an \"arity\"".into()))?
        as usize;
    let comps = v
        .get("components")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Parse("polynomial map needs \"components\"".into()))?;
    let mut components = Vec::new();
    for comp in comps {
        let terms = comp
            .as_array()
            .ok_or_else(|| Error::Parse("component must be a term list".into()))?;
        let mut poly = Poly::new(arity);
        for t in terms {
            let c = rat_from_json(
                t.get("coefficient")
                    .ok_or_else(|| Error::Parse("term needs a coefficient".into()))?,
            )?;
            let e: Vec<u32> = t
                .get("exponents")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::Parse("term needs exponents".into()))?
                .iter()
                .map(|x| x.as_u64().map(|v| v as u32))
                .collect::<Option<Vec<u32>>>()
                .ok_or_else(|| Error::Parse("exponents must be naturals".into()))?;
            if e.len() != arity {
                return Err(Error::Parse(
                    "exponent vector length must equal arity".into(),
                ));
            }
            poly.add_term(e, c);
        }
        components.push(poly);
    }
    PolyMap::new(arity, components)
}

/// A polynomial square input: `{"poly": true, "point": […], "maps": {…}}`.
pub struct PolySquareInput {
    pub top: PolyMap,
    pub bottom: PolyMap,
    pub left: PolyMap,
    pub right: PolyMap,
    pub point: Vec<Rat>,
}

pub fn poly_square_from_json(v: &Value) -> Result<PolySquareInput> {
    let maps = v
        .get("maps")
        .ok_or_else(|| Error::Parse("missing \"maps\"".into()))?;
    let get = |name: &str| -> Result<PolyMap> {
        poly_map_from_json(
            maps.get(name)
                .ok_or_else(|| Error::Parse(format!("missing map {name:?}")))?,
        )
    };
    let point = v
        .get("point")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Parse("polynomial input needs a \"point\"".into()))?
        .iter()
        .map(rat_from_json)
        .collect::<Result<Vec<Rat>>>()?;
    Ok(PolySquareInput {
        top: get("i1")?,
        bottom: get("i2")?,
        left: get("j1")?,
        right: get("j2")?,
        point,
    })
}

/// Is this input a polynomial square?
pub fn is_poly_input(v: &Value) -> bool {
    v.get("poly").and_then(Value::as_bool).unwrap_or(false)
}

/// Certificate wire format.
pub fn certificate_to_json(cert: &SymmetryCertificate) -> Value {
    let dims = |d: &Option<crate::symmetry::DoubleNormalDims>| -> Value {
        match d {
            None => Value::Null,
            Some(d) => json!({
                "ambient": d.ambient,
                "base": d.base,
                "side_a": d.side_a,
                "side_b": d.side_b,
                "core": d.core,
            }),
        }
    };
    let mut obj = Map::new();
    obj.insert("regular".into(), json!(cert.regular));
    obj.insert(
        "criteria".into(),
        json!({
            "normal_differential_first": cert.report.criterion_nu_i,
            "normal_differential_second": cert.report.criterion_nu_j,
            "exact_sequence": cert.report.criterion_exact,
        }),
    );
    obj.insert(
        "dims".into(),
        json!({
            "first": dims(&cert.dims_first),
            "second": dims(&cert.dims_second),
        }),
    );
    obj.insert(
        "lambda".into(),
        cert.lambda
            .as_ref()
            .map(|l| matrix_to_json(&l.mat))
            .unwrap_or(Value::Null),
    );
    obj.insert(
        "lemmas".into(),
        Value::Array(
            cert.lemmas
                .iter()
                .map(|l| json!({"name": l.name, "pass": l.pass}))
                .collect(),
        ),
    );
    obj.insert("alt_agreement".into(), json!(cert.alt_agreement));
    obj.insert("bijective".into(), json!(cert.bijective));
    obj.insert("equivariant".into(), json!(cert.equivariant));
    obj.insert("side_match".into(), json!(cert.side_match));
    obj.insert("core_formula".into(), json!(cert.core_formula));
    Value::Object(obj)
}


/// Scaling action wire format: `{"dim": …, "projections": {"<weight>": matrix}}`.
pub fn action_to_json(a: &crate::homog::ScalingAction) -> Value {
    let mut projs = Map::new();
    for (w, p) in a.projections() {
        projs.insert(w.to_string(), matrix_to_json(p));
    }
    json!({"dim": a.dim, "projections": Value::Object(projs)})
}

pub fn action_from_json(v: &Value) -> Result<crate::homog::ScalingAction> {
    let dim = v
        .get("dim")
        .and_then(Value::as_u64)
        .ok_or_else(|| Error::Parse("action needs a \"dim\"".into()))? as usize;
    let projs = v
        .get("projections")
        .and_then(Value::as_object)
        .ok_or_else(|| Error::Parse("action needs \"projections\"".into()))?;
    let mut map = std::collections::BTreeMap::new();
    for (k, m) in projs {
        let w: u32 = k
            .parse()
            .map_err(|_| Error::Parse(format!("bad weight key {k:?}")))?;
        map.insert(w, matrix_from_json(m, Some(dim))?);
    }
    crate::homog::ScalingAction::new(dim, map)
}

/// Double space wire format:
/// `{"dim": …, "hProjections": {…}, "vProjections": {…}}`.
pub fn dvs_to_json(d: &crate::dvb::Dvs) -> Value {
    let h = action_to_json(&d.h);
    let v = action_to_json(&d.v);
    json!({
        "dim": d.dim,
        "hProjections": h["projections"],
        "vProjections": v["projections"],
    })
}

pub fn dvs_from_json(v: &Value) -> Result<crate::dvb::Dvs> {
    let dim = v
        .get("dim")
        .and_then(Value::as_u64)
        .ok_or_else(|| Error::Parse("double space needs a \"dim\"".into()))?;
    let mk = |key: &str| -> Result<crate::homog::ScalingAction> {
        action_from_json(&json!({
            "dim": dim,
            "projections": v.get(key).cloned().unwrap_or(Value::Null),
        }))
    };
    crate::dvb::Dvs::new(mk("hProjections")?, mk("vProjections")?)
}

/// Dvb-map wire format: `{"source": …, "target": …, "matrix": …}`.
pub fn dvb_map_to_json(m: &crate::dvb::DvbMap) -> Value {
    json!({
        "source": dvs_to_json(&m.src),
        "target": dvs_to_json(&m.tgt),
        "matrix": matrix_to_json(&m.map.mat),
    })
}

pub fn dvb_map_from_json(v: &Value) -> Result<crate::dvb::DvbMap> {
    let src = dvs_from_json(
        v.get("source")
            .ok_or_else(|| Error::Parse("dvb-map needs a \"source\"".into()))?,
    )?;
    let tgt = dvs_from_json(
        v.get("target")
            .ok_or_else(|| Error::Parse("dvb-map needs a \"target\"".into()))?,
    )?;
    let mat = matrix_from_json(
        v.get("matrix")
            .ok_or_else(|| Error::Parse("dvb-map needs a \"matrix\"".into()))?,
        Some(src.dim),
    )?;
    crate::dvb::DvbMap::new(src, tgt, LinMap::new(mat))
}

/// Square-of-maps wire format:
/// `{"top": …, "bottom": …, "left": …, "right": …, "direction": "horizontal"|"vertical"}`.
pub fn two_map_to_json(t: &crate::normal::TwoMap) -> Value {
    json!({
        "top": matrix_to_json(&t.top.mat),
        "bottom": matrix_to_json(&t.bottom.mat),
        "left": matrix_to_json(&t.left.mat),
        "right": matrix_to_json(&t.right.mat),
        "direction": match t.direction {
            crate::normal::Direction::Horizontal => "horizontal",
            crate::normal::Direction::Vertical => "vertical",
        },
    })
}

pub fn two_map_from_json(v: &Value) -> Result<crate::normal::TwoMap> {
    let get = |name: &str| -> Result<LinMap> {
        Ok(LinMap::new(matrix_from_json(
            v.get(name)
                .ok_or_else(|| Error::Parse(format!("two-map needs {name:?}")))?,
            None,
        )?))
    };
    let direction = match v.get("direction").and_then(Value::as_str) {
        Some("vertical") => crate::normal::Direction::Vertical,
        _ => crate::normal::Direction::Horizontal,
    };
    crate::normal::TwoMap::new(
        get("top")?,
        get("bottom")?,
        get("left")?,
        get("right")?,
        direction,
    )
}
