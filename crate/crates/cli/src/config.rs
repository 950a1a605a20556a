//! Flat `key = value` experiment configs. Lists are bracketed and comma
//! separated; `#` starts a comment. Unknown and repeated keys are errors.

use std::collections::BTreeMap;
use std::path::PathBuf;

use robin_core::inequalities::{Family, ObstacleLevel, Resolution, ShapeCheck, SweepConfig};
use robin_core::ShapeSpec;

use crate::Failure;

pub const N_R_RANGE: (usize, usize) = (4, 512);
pub const N_THETA_RANGE: (usize, usize) = (16, 4096);
pub const SAMPLES_RANGE: (usize, usize) = (16, 1 << 16);
pub const STEPS_RANGE: (usize, usize) = (16, 1 << 20);

const KEYS: &[&str] = &[
    "name",
    "checks",
    "family",
    "radii",
    "aspects",
    "amplitudes",
    "modes",
    "lengths",
    "stadium_radius",
    "shapes",
    "q",
    "beta",
    "c",
    "c_rel",
    "n_r",
    "n_theta",
    "samples",
    "steps",
    "richardson",
    "tolerance",
    "output",
];

/// Keys that only make sense for one family.
const FAMILY_KEYS: &[(&str, &str)] = &[
    ("radii", "disk"),
    ("aspects", "ellipse"),
    ("amplitudes", "perturbed"),
    ("modes", "perturbed"),
    ("lengths", "stadium"),
    ("stadium_radius", "stadium"),
    ("shapes", "shapes"),
];

pub struct Builtin {
    pub name: &'static str,
    pub text: &'static str,
}

pub const BUILTINS: &[Builtin] = &[
    Builtin { name: "ball-sanity", text: include_str!("../configs/ball-sanity.conf") },
    Builtin { name: "ellipse-q1", text: include_str!("../configs/ellipse-q1.conf") },
    Builtin { name: "perturbed-obstacle", text: include_str!("../configs/perturbed-obstacle.conf") },
    Builtin { name: "shape-sweep", text: include_str!("../configs/shape-sweep.conf") },
];

pub fn builtin(name: &str) -> Option<&'static Builtin> {
    BUILTINS.iter().find(|b| b.name == name)
}

impl Builtin {
    /// First comment line of the config.
    pub fn summary(&self) -> &'static str {
        self.text.lines().find_map(|l| l.trim().strip_prefix('#')).map(str::trim).unwrap_or("")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub name: String,
    pub sweep: SweepConfig,
    pub output: PathBuf,
}

fn config_error(msg: impl Into<String>) -> Failure {
    Failure::Config(msg.into())
}

#[derive(Debug, Clone, PartialEq)]
enum Value {
    Scalar(String),
    List(Vec<String>),
}

/// Splits on commas outside parentheses, so `ellipse(1.2, 0.8)` stays whole.
fn split_items(body: &str) -> Vec<String> {
    let mut items = Vec::new();
    let mut depth = 0i32;
    let mut current = String::new();
    for ch in body.chars() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                items.push(current.trim().to_string());
                current.clear();
                continue;
            }
            _ => {}
        }
        current.push(ch);
    }
    if !current.trim().is_empty() {
        items.push(current.trim().to_string());
    }
    items
}

fn parse_lines(text: &str) -> Result<BTreeMap<String, Value>, Failure> {
    let mut entries = BTreeMap::new();
    for (number, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) =
            line.split_once('=').ok_or_else(|| config_error(format!("line {}: expected `key = value`", number + 1)))?;
        let key = key.trim();
        if !KEYS.contains(&key) {
            return Err(config_error(format!("line {}: unknown key `{key}`", number + 1)));
        }
        let value = value.trim();
        let value = match value.strip_prefix('[') {
            Some(rest) => {
                let body = rest.strip_suffix(']').ok_or_else(|| config_error(format!("line {}: unclosed `[`", number + 1)))?;
                Value::List(split_items(body))
            }
            None => Value::Scalar(value.to_string()),
        };
        if entries.insert(key.to_string(), value).is_some() {
            return Err(config_error(format!("line {}: key `{key}` given twice", number + 1)));
        }
    }
    Ok(entries)
}

struct Entries(BTreeMap<String, Value>);

impl Entries {
    fn scalar(&self, key: &str) -> Result<Option<&str>, Failure> {
        match self.0.get(key) {
            None => Ok(None),
            Some(Value::Scalar(s)) => Ok(Some(s)),
            Some(Value::List(_)) => Err(config_error(format!("field `{key}` takes a single value, not a list"))),
        }
    }

    /// A bare scalar counts as a one-element list.
    fn list(&self, key: &str) -> Option<Vec<String>> {
        self.0.get(key).map(|v| match v {
            Value::Scalar(s) => vec![s.clone()],
            Value::List(items) => items.clone(),
        })
    }

    fn reals(&self, key: &str) -> Result<Option<Vec<f64>>, Failure> {
        self.list(key)
            .map(|items| {
                items
                    .iter()
                    .map(|s| s.parse::<f64>().map_err(|_| config_error(format!("field `{key}`: `{s}` is not a number"))))
                    .collect()
            })
            .transpose()
    }

    fn real(&self, key: &str) -> Result<Option<f64>, Failure> {
        self.scalar(key)?
            .map(|s| s.parse::<f64>().map_err(|_| config_error(format!("field `{key}`: `{s}` is not a number"))))
            .transpose()
    }

    fn count(&self, key: &str, (lo, hi): (usize, usize)) -> Result<Option<usize>, Failure> {
        let Some(s) = self.scalar(key)? else { return Ok(None) };
        let v: usize = s.parse().map_err(|_| config_error(format!("field `{key}`: `{s}` is not a whole number")))?;
        if !(lo..=hi).contains(&v) {
            return Err(config_error(format!("field `{key}`: {v} is outside [{lo}, {hi}]")));
        }
        Ok(Some(v))
    }

    fn required_reals(&self, key: &str) -> Result<Vec<f64>, Failure> {
        self.reals(key)?.ok_or_else(|| config_error(format!("field `{key}` is required")))
    }
}

fn check_grid(key: &str, values: &[f64], ok: impl Fn(f64) -> bool, rule: &str) -> Result<(), Failure> {
    if values.is_empty() {
        return Err(config_error(format!("field `{key}` is empty")));
    }
    match values.iter().find(|v| !ok(**v)) {
        Some(v) => Err(config_error(format!("field `{key}`: {v} {rule}"))),
        None => Ok(()),
    }
}

fn parse_family(entries: &Entries) -> Result<Family, Failure> {
    let name = entries.scalar("family")?.ok_or_else(|| config_error("field `family` is required"))?;
    for (key, owner) in FAMILY_KEYS {
        if entries.0.contains_key(*key) && *owner != name {
            return Err(config_error(format!("field `{key}` does not apply to family `{name}`")));
        }
    }
    let positive = |key: &str, v: &[f64]| check_grid(key, v, |x| x > 0.0 && x.is_finite(), "must be positive");
    let family = match name {
        "disk" => {
            let radii = entries.required_reals("radii")?;
            positive("radii", &radii)?;
            Family::Disk { radii }
        }
        "ellipse" => {
            let aspects = entries.required_reals("aspects")?;
            positive("aspects", &aspects)?;
            Family::Ellipse { aspects }
        }
        "perturbed" => {
            let amplitudes = entries.required_reals("amplitudes")?;
            check_grid("amplitudes", &amplitudes, |a| (0.0..1.0).contains(&a), "must lie in [0, 1)")?;
            let modes = entries
                .list("modes")
                .ok_or_else(|| config_error("field `modes` is required"))?
                .iter()
                .map(|s| s.parse::<u32>().map_err(|_| config_error(format!("field `modes`: `{s}` is not a whole number"))))
                .collect::<Result<Vec<u32>, Failure>>()?;
            if modes.is_empty() {
                return Err(config_error("field `modes` is empty"));
            }
            Family::Perturbed { amplitudes, modes }
        }
        "stadium" => {
            let lengths = entries.required_reals("lengths")?;
            check_grid("lengths", &lengths, |l| l >= 0.0 && l.is_finite(), "must be nonnegative")?;
            let radius = entries.real("stadium_radius")?.ok_or_else(|| config_error("field `stadium_radius` is required"))?;
            positive("stadium_radius", &[radius])?;
            Family::Stadium { lengths, radius }
        }
        "shapes" => {
            let shapes = entries
                .list("shapes")
                .ok_or_else(|| config_error("field `shapes` is required"))?
                .iter()
                .map(|s| s.parse::<ShapeSpec>().map_err(|e| config_error(format!("field `shapes`: {e}"))))
                .collect::<Result<Vec<_>, Failure>>()?;
            if shapes.is_empty() {
                return Err(config_error("field `shapes` is empty"));
            }
            Family::Shapes { shapes }
        }
        other => return Err(config_error(format!("field `family`: unknown family `{other}`"))),
    };
    Ok(family)
}

fn parse_checks(entries: &Entries) -> Result<Vec<ShapeCheck>, Failure> {
    let names = entries.list("checks").ok_or_else(|| config_error("field `checks` is required"))?;
    if names.is_empty() {
        return Err(config_error("field `checks` is empty"));
    }
    let mut checks = Vec::new();
    for name in names {
        let check = ShapeCheck::parse(&name).ok_or_else(|| config_error(format!("field `checks`: unknown check `{name}`")))?;
        if checks.contains(&check) {
            return Err(config_error(format!("field `checks`: `{name}` listed twice")));
        }
        checks.push(check);
    }
    Ok(checks)
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, Failure> {
        let entries = Entries(parse_lines(text)?);
        let name = entries.scalar("name")?.unwrap_or("experiment").to_string();
        let family = parse_family(&entries)?;
        let checks = parse_checks(&entries)?;

        let q = entries.required_reals("q")?;
        check_grid("q", &q, |v| (1.0..=2.0).contains(&v), "is outside [1, 2]")?;
        if q.contains(&2.0) && checks.iter().any(|c| *c != ShapeCheck::TracePoincare) {
            return Err(config_error("field `q`: 2 is only available for the trace_poincare check"));
        }
        let beta = entries.required_reals("beta")?;
        check_grid("beta", &beta, |v| v > 0.0 && v.is_finite(), "must be positive")?;

        let mut c = Vec::new();
        if let Some(abs) = entries.reals("c")? {
            check_grid("c", &abs, |v| v >= 0.0 && v.is_finite(), "must be nonnegative")?;
            c.extend(abs.into_iter().map(ObstacleLevel::Absolute));
        }
        if let Some(rel) = entries.reals("c_rel")? {
            check_grid("c_rel", &rel, |v| v >= 0.0 && v.is_finite(), "must be nonnegative")?;
            c.extend(rel.into_iter().map(ObstacleLevel::RelativeToInf));
        }
        if checks.contains(&ShapeCheck::EcBall) && c.is_empty() {
            return Err(config_error("check `ec_ball` needs `c` or `c_rel`"));
        }
        if !checks.contains(&ShapeCheck::EcBall) && !c.is_empty() {
            return Err(config_error("fields `c` and `c_rel` only apply to the ec_ball check"));
        }

        let mut resolution = Resolution::default();
        resolution.n_r = entries.count("n_r", N_R_RANGE)?.unwrap_or(resolution.n_r);
        resolution.n_theta = entries.count("n_theta", N_THETA_RANGE)?.unwrap_or(resolution.n_theta);
        resolution.steps = entries.count("steps", STEPS_RANGE)?.unwrap_or(resolution.steps);
        if let Some(flag) = entries.scalar("richardson")? {
            resolution.richardson = match flag {
                "true" => true,
                "false" => false,
                other => return Err(config_error(format!("field `richardson`: expected true or false, got `{other}`"))),
            };
        }
        let tolerance = entries.real("tolerance")?;
        if let Some(t) = tolerance {
            check_grid("tolerance", &[t], |v| v > 0.0 && v.is_finite(), "must be positive")?;
        }

        let mut sweep = SweepConfig::new(family, checks, q, beta);
        sweep.c = if c.is_empty() { sweep.c } else { c };
        sweep.resolution = resolution;
        sweep.samples = entries.count("samples", SAMPLES_RANGE)?.unwrap_or(sweep.samples);
        sweep.tolerance = tolerance;
        sweep.validate().map_err(|e| config_error(e.to_string()))?;

        let output = entries.scalar("output")?.map(PathBuf::from).unwrap_or_else(|| PathBuf::from("results").join(&name));
        Ok(ExperimentConfig { name, sweep, output })
    }
}
