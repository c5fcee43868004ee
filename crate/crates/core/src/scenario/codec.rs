//! JSON encoding of sets, families and scenarios, with field-path errors.

use nalgebra::DMatrix;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::family::{FamilyKind, LinearPath, MovingFamily, Piece, RotationPath, ScalarPath};
use crate::prox::{HalfSpace, ProxSet, Shape};
use crate::vector::Vector;

pub(crate) struct Obj<'a> {
    path: String,
    map: &'a Map<String, Value>,
}

impl<'a> Obj<'a> {
    pub(crate) fn new(path: impl Into<String>, value: &'a Value) -> Result<Self> {
        let path = path.into();
        match value.as_object() {
            Some(map) => Ok(Obj { path, map }),
            None => Err(Error::schema(path, "expected an object")),
        }
    }

    pub(crate) fn field(&self, key: &str) -> String {
        if self.path.is_empty() {
            key.to_string()
        } else {
            format!("{}.{key}", self.path)
        }
    }

    pub(crate) fn get(&self, key: &str) -> Result<&'a Value> {
        self.map
            .get(key)
            .ok_or_else(|| Error::schema(self.field(key), "missing field"))
    }

    pub(crate) fn opt(&self, key: &str) -> Option<&'a Value> {
        self.map.get(key).filter(|v| !v.is_null())
    }

    pub(crate) fn obj(&self, key: &str) -> Result<Obj<'a>> {
        Obj::new(self.field(key), self.get(key)?)
    }

    pub(crate) fn num(&self, key: &str) -> Result<f64> {
        as_num(&self.field(key), self.get(key)?)
    }

    pub(crate) fn opt_num(&self, key: &str) -> Result<Option<f64>> {
        self.opt(key).map(|v| as_num(&self.field(key), v)).transpose()
    }

    pub(crate) fn positive(&self, key: &str) -> Result<f64> {
        let x = self.num(key)?;
        if x > 0.0 {
            Ok(x)
        } else {
            Err(Error::schema(self.field(key), format!("must be positive, got {x}")))
        }
    }

    pub(crate) fn uint(&self, key: &str) -> Result<u64> {
        self.get(key)?
            .as_u64()
            .ok_or_else(|| Error::schema(self.field(key), "expected a nonnegative integer"))
    }

    pub(crate) fn opt_uint(&self, key: &str) -> Result<Option<u64>> {
        match self.opt(key) {
            None => Ok(None),
            Some(_) => self.uint(key).map(Some),
        }
    }

    pub(crate) fn str(&self, key: &str) -> Result<&'a str> {
        self.get(key)?
            .as_str()
            .ok_or_else(|| Error::schema(self.field(key), "expected a string"))
    }

    pub(crate) fn bool_or(&self, key: &str, default: bool) -> Result<bool> {
        match self.opt(key) {
            None => Ok(default),
            Some(v) => v
                .as_bool()
                .ok_or_else(|| Error::schema(self.field(key), "expected true or false")),
        }
    }

    pub(crate) fn vector(&self, key: &str) -> Result<Vector> {
        as_vector(&self.field(key), self.get(key)?)
    }

    pub(crate) fn array(&self, key: &str) -> Result<&'a Vec<Value>> {
        self.get(key)?
            .as_array()
            .ok_or_else(|| Error::schema(self.field(key), "expected an array"))
    }
}

fn as_num(path: &str, v: &Value) -> Result<f64> {
    v.as_f64()
        .filter(|x| x.is_finite())
        .ok_or_else(|| Error::schema(path, "expected a finite number"))
}

fn as_vector(path: &str, v: &Value) -> Result<Vector> {
    let items = v
        .as_array()
        .ok_or_else(|| Error::schema(path, "expected an array of numbers"))?;
    let coords = items
        .iter()
        .enumerate()
        .map(|(i, x)| as_num(&format!("{path}[{i}]"), x))
        .collect::<Result<Vec<_>>>()?;
    Vector::new(coords).map_err(|e| Error::schema(path, e.to_string()))
}

/// Attaches `path` to construction errors that are really schema errors.
fn at<T>(path: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::InvalidSet(m) | Error::InvalidVector(m) | Error::InvalidFamily(m) => Error::schema(path, m),
        Error::DimensionMismatch { expected, actual } => {
            Error::schema(path, format!("dimension mismatch: expected {expected}, got {actual}"))
        }
        other => other,
    })
}

fn check_dim(path: &str, v: &Vector, dim: usize) -> Result<()> {
    if v.dim() == dim {
        Ok(())
    } else {
        Err(Error::schema(path, format!("expected dimension {dim}, got {}", v.dim())))
    }
}

pub fn set_from_json(path: &str, v: &Value) -> Result<ProxSet> {
    let o = Obj::new(path, v)?;
    let tag = o.str("shape")?;
    let set = match tag {
        "half_space" => {
            let normal = o.vector("normal")?;
            at(&o.field("normal"), ProxSet::half_space(normal, o.num("offset")?))?
        }
        "ball" => {
            let center = o.vector("center")?;
            let radius = o.positive("radius")?;
            at(path, ProxSet::ball(center, radius))?
        }
        "box" => {
            let lo = o.vector("lo")?;
            let hi = o.vector("hi")?;
            at(path, ProxSet::axis_box(lo, hi))?
        }
        "polytope" => {
            let faces = o
                .array("faces")?
                .iter()
                .enumerate()
                .map(|(i, f)| {
                    let fo = Obj::new(format!("{}[{i}]", o.field("faces")), f)?;
                    at(&fo.path, HalfSpace::new(fo.vector("normal")?, fo.num("offset")?))
                })
                .collect::<Result<Vec<_>>>()?;
            at(&o.field("faces"), ProxSet::polytope(faces))?
        }
        "ball_complement" => {
            let center = o.vector("center")?;
            let radius = o.positive("radius")?;
            at(path, ProxSet::ball_complement(center, radius))?
        }
        "rigid_image" => {
            let base = set_from_json(&o.field("base"), o.get("base")?)?;
            let rotation = matrix_from_json(&o.field("rotation"), o.get("rotation")?)?;
            let translation = o.vector("translation")?;
            at(path, ProxSet::rigid_image(base, rotation, translation))?
        }
        other => return Err(Error::UnknownShapeTag(other.to_string())),
    };
    Ok(set)
}

pub fn set_to_json(set: &ProxSet) -> Value {
    match set.shape() {
        Shape::HalfSpace(h) => json!({"shape": "half_space", "normal": h.normal(), "offset": h.offset()}),
        Shape::Ball { center, radius } => json!({"shape": "ball", "center": center, "radius": radius}),
        Shape::AxisBox { lo, hi } => json!({"shape": "box", "lo": lo, "hi": hi}),
        Shape::Polytope(p) => json!({
            "shape": "polytope",
            "faces": p.faces().iter().map(|h| json!({"normal": h.normal(), "offset": h.offset()})).collect::<Vec<_>>(),
        }),
        Shape::BallComplement { center, radius } => {
            json!({"shape": "ball_complement", "center": center, "radius": radius})
        }
        Shape::RigidImage {
            base,
            rotation,
            translation,
        } => json!({
            "shape": "rigid_image",
            "base": set_to_json(base),
            "rotation": matrix_to_json(rotation),
            "translation": translation,
        }),
    }
}

fn matrix_from_json(path: &str, v: &Value) -> Result<DMatrix<f64>> {
    let rows = v
        .as_array()
        .ok_or_else(|| Error::schema(path, "expected an array of rows"))?;
    let rows = rows
        .iter()
        .enumerate()
        .map(|(i, r)| as_vector(&format!("{path}[{i}]"), r))
        .collect::<Result<Vec<_>>>()?;
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.dim() != n) {
        return Err(Error::schema(path, "expected a square matrix"));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

fn matrix_to_json(m: &DMatrix<f64>) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| json!((0..m.ncols()).map(|j| m[(i, j)]).collect::<Vec<_>>()))
            .collect(),
    )
}

fn linear_path(o: &Obj<'_>, key: &str, dim: Option<usize>) -> Result<LinearPath> {
    let p = o.obj(key)?;
    let origin = p.vector("origin")?;
    if let Some(d) = dim {
        check_dim(&p.field("origin"), &origin, d)?;
    }
    let velocity = match p.opt("velocity") {
        Some(v) => as_vector(&p.field("velocity"), v)?,
        None => Vector::zeros(origin.dim()),
    };
    check_dim(&p.field("velocity"), &velocity, origin.dim())?;
    at(&p.path, LinearPath::new(origin, velocity))
}

fn linear_path_to_json(p: &LinearPath) -> Value {
    json!({"origin": p.origin, "velocity": p.velocity})
}

fn scalar_path(o: &Obj<'_>, key: &str) -> Result<ScalarPath> {
    let p = o.obj(key)?;
    Ok(ScalarPath {
        value: p.num("value")?,
        rate: p.opt_num("rate")?.unwrap_or(0.0),
    })
}

pub fn family_from_json(path: &str, v: &Value, horizon: f64) -> Result<MovingFamily> {
    let o = Obj::new(path, v)?;
    let kind = match o.str("kind")? {
        "translate" => {
            let base = set_from_json(&o.field("base"), o.get("base")?)?;
            let path = linear_path(&o, "path", Some(base.dim()))?;
            FamilyKind::Translate { base, path }
        }
        "rigid" => {
            let base = set_from_json(&o.field("base"), o.get("base")?)?;
            let rot = o.obj("rotation")?;
            let rotation = if rot.opt("matrix").is_some() {
                RotationPath::Fixed(matrix_from_json(&rot.field("matrix"), rot.get("matrix")?)?)
            } else {
                RotationPath::Planar {
                    angle: scalar_path(&o, "rotation")?,
                }
            };
            let translation = linear_path(&o, "translation", Some(base.dim()))?;
            FamilyKind::Rigid {
                base,
                rotation,
                translation,
            }
        }
        "radius_schedule" => FamilyKind::RadiusSchedule {
            center: linear_path(&o, "center", None)?,
            radius: scalar_path(&o, "radius")?,
            complement: o.bool_or("complement", false)?,
        },
        "piecewise" => {
            let pieces = o
                .array("pieces")?
                .iter()
                .enumerate()
                .map(|(i, p)| {
                    let po = Obj::new(format!("{}[{i}]", o.field("pieces")), p)?;
                    let start = po.num("start")?;
                    let end = po.num("end")?;
                    let family = family_from_json(&po.field("family"), po.get("family")?, end)?;
                    Ok(Piece { start, end, family })
                })
                .collect::<Result<Vec<_>>>()?;
            FamilyKind::Piecewise { pieces }
        }
        other => return Err(Error::schema(o.field("kind"), format!("unknown family kind `{other}`"))),
    };
    at(path, MovingFamily::new(kind, horizon))
}

pub fn family_to_json(f: &MovingFamily) -> Value {
    match f.kind() {
        FamilyKind::Translate { base, path } => json!({
            "kind": "translate",
            "base": set_to_json(base),
            "path": linear_path_to_json(path),
        }),
        FamilyKind::Rigid {
            base,
            rotation,
            translation,
        } => json!({
            "kind": "rigid",
            "base": set_to_json(base),
            "rotation": match rotation {
                RotationPath::Planar { angle } => json!({"value": angle.value, "rate": angle.rate}),
                RotationPath::Fixed(m) => json!({"matrix": matrix_to_json(m)}),
            },
            "translation": linear_path_to_json(translation),
        }),
        FamilyKind::RadiusSchedule {
            center,
            radius,
            complement,
        } => json!({
            "kind": "radius_schedule",
            "center": linear_path_to_json(center),
            "radius": {"value": radius.value, "rate": radius.rate},
            "complement": complement,
        }),
        FamilyKind::Piecewise { pieces } => json!({
            "kind": "piecewise",
            "pieces": pieces
                .iter()
                .map(|p| json!({"start": p.start, "end": p.end, "family": family_to_json(&p.family)}))
                .collect::<Vec<_>>(),
        }),
    }
}
