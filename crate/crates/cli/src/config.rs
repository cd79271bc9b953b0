use std::fs;
use std::path::Path;

use afpp::control::{ControlKind, ControlProblem, DEFAULT_MESH};
use afpp::model::Checks;
use afpp::{Error, ModelParams, Result, State};
use serde::Deserialize;
use serde_json::{Map, Value};

fn read_json(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

/// Parameters from an optional JSON file, then `KEY=VALUE` overrides.
/// Unknown and missing keys are rejected by name.
pub fn load_params(file: Option<&Path>, overrides: &[String], checks: Checks) -> Result<ModelParams> {
    let mut map = match file {
        Some(path) => match read_json(path)? {
            Value::Object(m) => m,
            _ => return Err(Error::Config(format!("{}: expected a JSON object", path.display()))),
        },
        None => Map::new(),
    };
    for kv in overrides {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got `{kv}`")))?;
        let v: f64 = v
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("--set {k}: `{v}` is not a number")))?;
        map.insert(k.trim().to_string(), Value::from(v));
    }
    let p: ModelParams = serde_json::from_value(Value::Object(map))
        .map_err(|e| Error::Config(format!("parameters: {e}")))?;
    p.validate(checks)?;
    Ok(p)
}

/// Control problem document; `params` may come from `--params` instead.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlConfig {
    pub params: Option<ModelParams>,
    pub control: ControlKind,
    pub bounds: Option<(f64, f64)>,
    pub initial: State,
    pub target: State,
    pub mesh_size: Option<usize>,
    pub in_transformed_time: Option<bool>,
}

pub fn load_problem(path: &Path, fallback: Option<ModelParams>) -> Result<ControlProblem> {
    let cfg: ControlConfig = serde_json::from_value(read_json(path)?)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let params = cfg
        .params
        .or(fallback)
        .ok_or_else(|| Error::Config("control problem needs `params` or --params".into()))?;
    let mut pr = ControlProblem::new(params, cfg.control, cfg.initial, cfg.target);
    pr.bounds = cfg.bounds.unwrap_or(pr.bounds);
    pr.mesh_size = cfg.mesh_size.unwrap_or(DEFAULT_MESH);
    pr.in_transformed_time = cfg.in_transformed_time.unwrap_or(true);
    pr.validate()?;
    Ok(pr)
}

/// `x,y` pair from the command line.
pub fn parse_state(s: &str) -> std::result::Result<State, String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected `x,y`, got `{s}`"))?;
    let x = a.trim().parse::<f64>().map_err(|e| format!("{a}: {e}"))?;
    let y = b.trim().parse::<f64>().map_err(|e| format!("{b}: {e}"))?;
    Ok(State::new(x, y))
}
