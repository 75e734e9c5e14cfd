//! Operator specifications: built-in catalog names or a JSON/TOML document.

use std::path::Path;

use expfact_core::experiments::{so3_operator, su2_operator};
use expfact_core::{OperatorConfig, OperatorFunction};

use crate::error::{CliError, CliResult};

/// Parses `su2(a)`, `so3(alpha,theta)` or a path to a `.json`/`.toml` file.
pub fn parse(spec: &str) -> CliResult<OperatorFunction> {
    let spec = spec.trim();
    if let Some(args) = call_args(spec, "su2") {
        let [a] = parse_params::<1>(spec, &args)?;
        return Ok(su2_operator(a, 1.0));
    }
    if let Some(args) = call_args(spec, "so3") {
        let [alpha, theta] = parse_params::<2>(spec, &args)?;
        return Ok(so3_operator(alpha, theta));
    }
    load_file(Path::new(spec))
}

fn call_args<'a>(spec: &'a str, name: &str) -> Option<&'a str> {
    spec.strip_prefix(name)?.trim_start().strip_prefix('(')?.strip_suffix(')')
}

fn parse_params<const N: usize>(spec: &str, args: &str) -> CliResult<[f64; N]> {
    let vals: Vec<f64> = args
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::config(format!("operator spec {spec:?}: {e}")))?;
    let arr: [f64; N] = vals.try_into().map_err(|v: Vec<f64>| {
        CliError::config(format!("operator spec {spec:?}: expected {N} parameters, got {}", v.len()))
    })?;
    if arr.iter().any(|x| !x.is_finite()) {
        return Err(CliError::config(format!("operator spec {spec:?}: parameters must be finite")));
    }
    Ok(arr)
}

fn load_file(path: &Path) -> CliResult<OperatorFunction> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("operator file {}: {e}", path.display())))?;
    let cfg: OperatorConfig = match path.extension().and_then(|e| e.to_str()) {
        Some("toml") => toml::from_str(&text)
            .map_err(|e| CliError::config(format!("{}: {}", path.display(), e.message())))?,
        Some("json") => serde_json::from_str(&text)
            .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?,
        _ => {
            return Err(CliError::config(format!(
                "operator spec {:?} is neither a catalog name nor a .json/.toml file",
                path.display().to_string()
            )))
        }
    };
    cfg.build().map_err(|e| CliError::config(format!("{}: {e}", path.display())))
}
