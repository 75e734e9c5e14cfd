//! Metadata headers and output sinks.

use std::io::Write;
use std::path::Path;

use expfact_core::csv::{format_f64, CsvTable};
use expfact_core::Grid;

use crate::error::{CliError, CliResult};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Invocation details stamped into every CSV.
pub struct Context {
    pub command_line: String,
}

impl Context {
    pub fn from_env() -> Self {
        let mut parts = vec!["expfact".to_string()];
        parts.extend(std::env::args().skip(1).map(|a| quote(&a)));
        Self { command_line: parts.join(" ") }
    }
}

fn quote(arg: &str) -> String {
    if arg.is_empty() || arg.chars().any(|c| c.is_whitespace() || c == '"') {
        format!("\"{}\"", arg.replace('"', "\\\""))
    } else {
        arg.to_string()
    }
}

pub fn describe_grid(grid: &Grid) -> String {
    format!(
        "t0={} t1={} nodes={}",
        format_f64(grid.t0()),
        format_f64(grid.t1()),
        grid.n_nodes()
    )
}

/// Prepends command line, version and grid to the table's own metadata.
pub fn csv_text(ctx: &Context, grid: &str, mut table: CsvTable) -> String {
    let mut meta = vec![
        ("command".to_string(), ctx.command_line.clone()),
        ("version".to_string(), VERSION.to_string()),
        ("grid".to_string(), grid.to_string()),
    ];
    meta.append(&mut table.metadata);
    table.metadata = meta;
    table.to_string_lossy()
}

pub fn emit(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| CliError::io(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::io(format!("cannot write stdout: {e}")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn metadata_block_comes_first() {
        let ctx = Context { command_line: "expfact demo --n 2".into() };
        let mut t = CsvTable::new(&["x"]);
        t.meta("extra", 1);
        t.push_row(vec!["0".into()]);
        let text = csv_text(&ctx, "none", t);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# command: expfact demo --n 2");
        assert_eq!(lines[1], format!("# version: {VERSION}"));
        assert_eq!(lines[2], "# grid: none");
        assert_eq!(lines[3], "# extra: 1");
        assert_eq!(lines[4], "x");
    }

    #[test]
    fn quoting() {
        assert_eq!(quote("su2(1)"), "su2(1)");
        assert_eq!(quote("so3(1, 2)"), "\"so3(1, 2)\"");
    }
}
