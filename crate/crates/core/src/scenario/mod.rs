//! Scenario documents: a moving family, a start point, a refinement
//! schedule and the checks to run.

mod codec;

use std::fmt;
use std::str::FromStr;

use serde_json::{json, Value};

pub use codec::{family_from_json, family_to_json, set_from_json, set_to_json};
use codec::Obj;

use crate::error::{Error, Result};
use crate::family::MovingFamily;
use crate::prox::ProxSet;
use crate::schedule::{EpsTemplate, GridSpec};
use crate::vector::Vector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Check {
    Constraint,
    Normal,
    BallBound,
    ConeBound,
    Cauchy,
}

impl Check {
    pub const ALL: [Check; 5] = [
        Check::Constraint,
        Check::Normal,
        Check::BallBound,
        Check::ConeBound,
        Check::Cauchy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::Constraint => "constraint",
            Check::Normal => "normal",
            Check::BallBound => "ball_bound",
            Check::ConeBound => "cone_bound",
            Check::Cauchy => "cauchy",
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Check {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Check::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::schema("checks", format!("unknown check `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduleConfig {
    pub eps0: f64,
    pub ratio: f64,
    pub levels: usize,
    pub refine_factor: usize,
    pub base_intervals: usize,
}

impl ScheduleConfig {
    pub fn template(&self) -> EpsTemplate {
        EpsTemplate {
            eps0: self.eps0,
            ratio: self.ratio,
        }
    }

    pub fn grid_spec(&self) -> GridSpec {
        GridSpec {
            factor: self.refine_factor,
            base_intervals: self.base_intervals,
        }
    }
}

/// A fixed inner ball `B_ρ(w)`; `r` overrides the family's radius with a
/// smaller admissible one (any `r' <= r` is also a prox-regularity radius).
#[derive(Debug, Clone, PartialEq)]
pub struct BallBoundConfig {
    pub w: Vector,
    pub rho: f64,
    pub r: Option<f64>,
}

/// Uniform interior cone constants `(R, d)`.
#[derive(Debug, Clone, PartialEq)]
#[allow(non_snake_case)]
pub struct ConeBoundConfig {
    pub R: f64,
    pub d: f64,
    pub r: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub description: String,
    pub dim: usize,
    pub horizon: f64,
    pub family: MovingFamily,
    pub y0: Vector,
    pub schedule: ScheduleConfig,
    pub checks: Vec<Check>,
    pub ball_bound: Option<BallBoundConfig>,
    pub cone_bound: Option<ConeBoundConfig>,
    pub seed: u64,
    /// Sampled points per step for normal certificates.
    pub certify_samples: usize,
}

pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_CERTIFY_SAMPLES: usize = 200;

impl Scenario {
    pub fn has_check(&self, c: Check) -> bool {
        self.checks.contains(&c)
    }

    /// The radius the ball bound is evaluated with.
    pub fn ball_r(&self) -> Option<f64> {
        self.ball_bound.as_ref().map(|b| b.r.unwrap_or(self.family.r()))
    }

    pub fn cone_r(&self) -> Option<f64> {
        self.cone_bound.as_ref().map(|c| c.r.unwrap_or(self.family.r()))
    }

    pub fn to_json(&self) -> Value {
        let mut doc = json!({
            "name": self.name,
            "description": self.description,
            "dim": self.dim,
            "horizon": self.horizon,
            "family": family_to_json(&self.family),
            "y0": self.y0,
            "schedule": {
                "eps0": self.schedule.eps0,
                "ratio": self.schedule.ratio,
                "levels": self.schedule.levels,
                "refine_factor": self.schedule.refine_factor,
                "base_intervals": self.schedule.base_intervals,
            },
            "checks": self.checks.iter().map(|c| c.name()).collect::<Vec<_>>(),
            "seed": self.seed,
            "certify_samples": self.certify_samples,
        });
        let mut bounds = serde_json::Map::new();
        if let Some(b) = &self.ball_bound {
            bounds.insert("ball".into(), json!({"w": b.w, "rho": b.rho, "r": b.r}));
        }
        if let Some(c) = &self.cone_bound {
            bounds.insert("cone".into(), json!({"R": c.R, "d": c.d, "r": c.r}));
        }
        if !bounds.is_empty() {
            doc["bounds"] = Value::Object(bounds);
        }
        doc
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("scenario serializes") + "\n"
    }
}

pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let doc: Value = serde_json::from_str(text).map_err(|e| {
        Error::schema(format!("line {}, column {}", e.line(), e.column()), e.to_string())
    })?;
    scenario_from_json(&doc)
}

pub fn scenario_from_json(doc: &Value) -> Result<Scenario> {
    let o = Obj::new("", doc)?;
    let name = o.str("name")?.to_string();
    let description = o.opt("description").and_then(Value::as_str).unwrap_or("").to_string();
    let dim = o.uint("dim")? as usize;
    if dim == 0 {
        return Err(Error::schema("dim", "must be at least 1"));
    }
    let horizon = o.num("horizon")?;
    if !(horizon > 0.0) {
        return Err(Error::schema("horizon", format!("must be positive, got {horizon}")));
    }
    let family = family_from_json("family", o.get("family")?, horizon)?;
    if family.dim() != dim {
        return Err(Error::schema("family", format!("dimension {} differs from dim {dim}", family.dim())));
    }
    let y0 = o.vector("y0")?;
    if y0.dim() != dim {
        return Err(Error::schema("y0", format!("expected dimension {dim}, got {}", y0.dim())));
    }

    let s = o.obj("schedule")?;
    let schedule = ScheduleConfig {
        eps0: s.positive("eps0")?,
        ratio: s.num("ratio")?,
        levels: s.uint("levels")? as usize,
        refine_factor: s.opt_uint("refine_factor")?.unwrap_or(2) as usize,
        base_intervals: s.opt_uint("base_intervals")?.unwrap_or(1) as usize,
    };
    EpsTemplate::new(schedule.eps0, schedule.ratio).map_err(|e| Error::schema(s.field("ratio"), e.to_string()))?;
    GridSpec::new(schedule.refine_factor, schedule.base_intervals)
        .map_err(|e| Error::schema(s.field("refine_factor"), e.to_string()))?;
    if schedule.levels < 1 {
        return Err(Error::schema(s.field("levels"), "at least one level is required"));
    }

    let mut checks = Vec::new();
    for (i, c) in o.array("checks")?.iter().enumerate() {
        let name = c
            .as_str()
            .ok_or_else(|| Error::schema(format!("checks[{i}]"), "expected a string"))?;
        let check: Check = name.parse().map_err(|_| Error::schema(format!("checks[{i}]"), format!("unknown check `{name}`")))?;
        if checks.contains(&check) {
            return Err(Error::schema(format!("checks[{i}]"), format!("duplicate check `{name}`")));
        }
        checks.push(check);
    }

    let (mut ball_bound, mut cone_bound) = (None, None);
    if let Some(b) = o.opt("bounds") {
        let bo = Obj::new("bounds", b)?;
        if bo.opt("ball").is_some() {
            let bb = bo.obj("ball")?;
            let w = bb.vector("w")?;
            if w.dim() != dim {
                return Err(Error::schema(bb.field("w"), format!("expected dimension {dim}")));
            }
            ball_bound = Some(BallBoundConfig {
                w,
                rho: bb.positive("rho")?,
                r: declared_r(&bb, &family)?,
            });
        }
        if bo.opt("cone").is_some() {
            let cb = bo.obj("cone")?;
            cone_bound = Some(ConeBoundConfig {
                R: cb.positive("R")?,
                d: cb.positive("d")?,
                r: declared_r(&cb, &family)?,
            });
        }
    }
    if checks.contains(&Check::BallBound) && ball_bound.is_none() {
        return Err(Error::schema("bounds.ball", "the ball_bound check needs an inner ball"));
    }
    if checks.contains(&Check::ConeBound) && cone_bound.is_none() {
        return Err(Error::schema("bounds.cone", "the cone_bound check needs cone constants"));
    }

    let seed = o.opt_uint("seed")?.unwrap_or(DEFAULT_SEED);
    let certify_samples = o.opt_uint("certify_samples")?.unwrap_or(DEFAULT_CERTIFY_SAMPLES as u64) as usize;
    if certify_samples == 0 {
        return Err(Error::schema("certify_samples", "must be at least 1"));
    }

    let c0 = family.slice(0.0)?;
    if !c0.contains(&y0)? {
        return Err(Error::InfeasibleInitialPoint { defect: c0.defect(&y0)? });
    }

    Ok(Scenario {
        name,
        description,
        dim,
        horizon,
        family,
        y0,
        schedule,
        checks,
        ball_bound,
        cone_bound,
        seed,
        certify_samples,
    })
}

fn declared_r(o: &Obj<'_>, family: &MovingFamily) -> Result<Option<f64>> {
    let r = o.opt_num("r")?;
    if let Some(r) = r {
        if !(r > 0.0) {
            return Err(Error::schema(o.field("r"), format!("must be positive, got {r}")));
        }
        if r > family.r() {
            return Err(Error::schema(
                o.field("r"),
                format!("declared r = {r} exceeds the family's prox-regularity radius {}", family.r()),
            ));
        }
    }
    Ok(r)
}

/// `(name, description, document)` of the bundled scenarios.
const BUILTINS: [(&str, &str); 6] = [
    ("static_ball", include_str!("../../scenarios/static_ball.json")),
    ("sweep_halfspace", include_str!("../../scenarios/sweep_halfspace.json")),
    (
        "shrinking_ball_inner_cert",
        include_str!("../../scenarios/shrinking_ball_inner_cert.json"),
    ),
    ("moving_obstacle", include_str!("../../scenarios/moving_obstacle.json")),
    ("polytope_rotation", include_str!("../../scenarios/polytope_rotation.json")),
    ("jump_expansion", include_str!("../../scenarios/jump_expansion.json")),
];

/// Names and one-line descriptions of the bundled scenarios.
pub fn list_builtins() -> Vec<(String, String)> {
    BUILTINS
        .iter()
        .map(|(name, text)| {
            let desc = serde_json::from_str::<Value>(text)
                .ok()
                .and_then(|v| v["description"].as_str().map(str::to_string))
                .unwrap_or_default();
            (name.to_string(), desc)
        })
        .collect()
}

pub fn builtin_document(name: &str) -> Result<&'static str> {
    BUILTINS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| *text)
        .ok_or_else(|| Error::UnknownBuiltin(name.to_string()))
}

pub fn builtin(name: &str) -> Result<Scenario> {
    parse_scenario(builtin_document(name)?).map_err(|e| e.context(format!("builtin `{name}`")))
}

/// `arg` as a file path, or else as a builtin name.
pub fn load_scenario(arg: &str) -> Result<Scenario> {
    let path = std::path::Path::new(arg);
    if path.exists() {
        let text = std::fs::read_to_string(path)?;
        return parse_scenario(&text).map_err(|e| e.context(format!("config {arg}")));
    }
    builtin(arg).map_err(|e| match e {
        Error::UnknownBuiltin(_) => Error::UnknownBuiltin(format!("{arg} (no such file or builtin scenario)")),
        other => other,
    })
}

/// The set `C(t)` a scenario prescribes, for ad-hoc queries.
pub fn slice_at(s: &Scenario, t: f64) -> Result<ProxSet> {
    s.family.slice(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_parse_and_round_trip() {
        let names = list_builtins();
        assert!(names.len() >= 6);
        for (name, desc) in names {
            assert!(!desc.is_empty());
            let s = builtin(&name).unwrap();
            assert_eq!(s.name, name);
            let back = parse_scenario(&s.to_json_string()).unwrap();
            assert_eq!(back, s, "{name}");
            assert_eq!(back.to_json_string(), s.to_json_string());
        }
    }

    #[test]
    fn jump_expansion_mentions_excess_continuity() {
        let (_, desc) = list_builtins().into_iter().find(|(n, _)| n == "jump_expansion").unwrap();
        assert!(desc.contains("excess-continu"), "{desc}");
    }

    #[test]
    fn sweep_fixture_shape() {
        let s = builtin("sweep_halfspace").unwrap();
        assert_eq!(s.dim, 2);
        assert_eq!(s.horizon, 2.0);
        assert!(matches!(s.family.kind(), crate::family::FamilyKind::Translate { .. }));
    }

    fn edit(name: &str, f: impl FnOnce(&mut Value)) -> String {
        let mut v: Value = serde_json::from_str(builtin_document(name).unwrap()).unwrap();
        f(&mut v);
        v.to_string()
    }

    #[test]
    fn infeasible_start_is_reported() {
        let doc = edit("sweep_halfspace", |v| v["y0"] = json!([3.0, 0.0]));
        assert!(matches!(parse_scenario(&doc), Err(Error::InfeasibleInitialPoint { defect }) if (defect - 2.0).abs() < 1e-12));
    }

    #[test]
    fn bad_radius_is_a_schema_error() {
        let doc = edit("shrinking_ball_inner_cert", |v| v["bounds"]["ball"]["rho"] = json!(0.0));
        assert!(matches!(parse_scenario(&doc), Err(Error::SchemaError { field, .. }) if field == "bounds.ball.rho"));
        let doc = edit("moving_obstacle", |v| v["family"]["base"]["radius"] = json!(-0.5));
        assert!(matches!(parse_scenario(&doc), Err(Error::SchemaError { field, .. }) if field == "family.base.radius"));
    }

    #[test]
    fn missing_bound_params_are_rejected() {
        let doc = edit("sweep_halfspace", |v| v["checks"] = json!(["ball_bound"]));
        assert!(matches!(parse_scenario(&doc), Err(Error::SchemaError { .. })));
        let doc = edit("sweep_halfspace", |v| v["checks"] = json!(["speed"]));
        assert!(matches!(parse_scenario(&doc), Err(Error::SchemaError { field, .. }) if field == "checks[0]"));
    }

    #[test]
    fn syntax_errors_carry_a_line() {
        match parse_scenario("{\n  \"name\": }") {
            Err(Error::SchemaError { field, .. }) => assert!(field.starts_with("line 2")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_builtin() {
        assert!(matches!(builtin("nope"), Err(Error::UnknownBuiltin(_))));
    }
}
