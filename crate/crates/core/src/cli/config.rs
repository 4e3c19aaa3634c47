//! Numeric literals, grid specs, and the key=value config block that heads
//! every result file and can be fed back through `replay`.

use serde::Serialize;
use serde_json::{Map, Value};

use super::CliError;

/// Parses a decimal literal or an exact ratio `p/q` of two decimal literals.
pub fn parse_number(s: &str) -> Result<f64, CliError> {
    let s = s.trim();
    let bad = || CliError::Usage(format!("'{s}' is not a number or ratio p/q"));
    let x = match s.split_once('/') {
        Some((p, q)) => {
            let p: f64 = p.trim().parse().map_err(|_| bad())?;
            let q: f64 = q.trim().parse().map_err(|_| bad())?;
            if q == 0.0 {
                return Err(CliError::Usage(format!("'{s}' divides by zero")));
            }
            p / q
        }
        None => s.parse().map_err(|_| bad())?,
    };
    if x.is_finite() {
        Ok(x)
    } else {
        Err(bad())
    }
}

/// `start:stop:count` (linear) or `start:stop:count:log`, endpoints included.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    let usage = |m: &str| CliError::Usage(format!("grid '{spec}': {m}"));
    let log = match parts.len() {
        3 => false,
        4 if parts[3] == "log" => true,
        4 if parts[3] == "lin" => false,
        _ => return Err(usage("expected start:stop:count[:log]")),
    };
    let start = parse_number(parts[0])?;
    let stop = parse_number(parts[1])?;
    let count: usize = parts[2].parse().map_err(|_| usage("count must be a non-negative integer"))?;
    if count == 0 {
        return Err(usage("empty grid"));
    }
    if log && !(start > 0.0 && stop > 0.0) {
        return Err(usage("log grid needs positive endpoints"));
    }
    if count == 1 {
        return Ok(vec![start]);
    }
    let step = |i: usize| i as f64 / (count - 1) as f64;
    Ok((0..count)
        .map(|i| {
            if i == count - 1 {
                stop
            } else if log {
                (start.ln() + (stop.ln() - start.ln()) * step(i)).exp()
            } else {
                start + (stop - start) * step(i)
            }
        })
        .collect())
}

/// A command path plus its flag values, as echoed into result files.
#[derive(Debug, Clone, PartialEq)]
pub struct Invocation {
    pub command: String,
    pub args: Map<String, Value>,
}

impl Invocation {
    pub fn new(command: impl Into<String>, args: &impl Serialize) -> Self {
        let args = match serde_json::to_value(args) {
            Ok(Value::Object(m)) => m.into_iter().filter(|(_, v)| !is_unset(v)).collect(),
            _ => Map::new(),
        };
        Self { command: command.into(), args }
    }

    /// The argument vector that re-runs this invocation (without the program name).
    pub fn argv(&self) -> Vec<String> {
        let mut out: Vec<String> = self.command.split_whitespace().map(str::to_string).collect();
        for (k, v) in &self.args {
            let flag = format!("--{}", k.replace('_', "-"));
            match v {
                Value::Bool(true) => out.push(flag),
                Value::Bool(false) | Value::Null => {}
                other => {
                    out.push(flag);
                    out.push(scalar(other));
                }
            }
        }
        out
    }

    /// `# [command]` followed by one `# key=value` line per argument and per
    /// resolved quantity (the latter prefixed `resolved.`, ignored on replay).
    pub fn header(&self, resolved: &Map<String, Value>) -> String {
        let mut s = format!("# naklab {}\n# [{}]\n", env!("CARGO_PKG_VERSION"), self.command);
        for (k, v) in &self.args {
            s.push_str(&format!("# {k}={}\n", scalar(v)));
        }
        for (k, v) in resolved {
            s.push_str(&format!("# resolved.{k}={}\n", scalar(v)));
        }
        s
    }
}

fn is_unset(v: &Value) -> bool {
    match v {
        Value::Null => true,
        Value::Array(items) => items.is_empty(),
        Value::String(s) => s.is_empty(),
        _ => false,
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Array(items) => items.iter().map(scalar).collect::<Vec<_>>().join(","),
        Value::Number(n) => match n.as_f64() {
            Some(x) if n.is_f64() => super::output::num(x),
            _ => n.to_string(),
        },
        other => other.to_string(),
    }
}

/// Reads the invocations stored in a result file (CSV header or JSON
/// envelope) or in a hand-written config file with `[command]` sections.
pub fn read_invocations(text: &str) -> Result<Vec<Invocation>, CliError> {
    let trimmed = text.trim_start();
    if trimmed.starts_with('{') {
        let v: Value =
            serde_json::from_str(trimmed).map_err(|e| CliError::Usage(format!("bad JSON result file: {e}")))?;
        let command = v["command"].as_str().ok_or_else(|| CliError::Usage("JSON result file has no command".into()))?;
        let args = v["config"].as_object().cloned().unwrap_or_default();
        return Ok(vec![Invocation { command: command.to_string(), args }]);
    }
    let result_file = trimmed.starts_with("# naklab ");
    let mut out: Vec<Invocation> = Vec::new();
    for line in text.lines() {
        let line = match line.strip_prefix('#') {
            Some(rest) => rest.trim(),
            None if result_file => break,
            None => line.trim(),
        };
        if let Some(cmd) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            out.push(Invocation { command: cmd.trim().to_string(), args: Map::new() });
            continue;
        }
        let Some((k, v)) = line.split_once('=') else { continue };
        let k = k.trim();
        if k.contains('.') {
            continue;
        }
        let Some(cur) = out.last_mut() else {
            return Err(CliError::Usage(format!("'{line}' appears before any [command] section")));
        };
        cur.args.insert(k.to_string(), Value::String(v.trim().to_string()));
    }
    if out.is_empty() {
        return Err(CliError::Usage("no [command] section found".into()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratios_parse_exactly() {
        assert_eq!(parse_number("1/600").unwrap(), 1.0 / 600.0);
        assert_eq!(parse_number("1e-3").unwrap(), 1e-3);
        assert!(parse_number("1/0").is_err());
        assert!(parse_number("x").is_err());
    }

    #[test]
    fn grids() {
        assert_eq!(parse_grid("1:4:4").unwrap(), vec![1.0, 2.0, 3.0, 4.0]);
        let g = parse_grid("1:100:3:log").unwrap();
        assert!((g[1] - 10.0).abs() < 1e-12 && g[2] == 100.0);
        assert!(parse_grid("1:2:0").is_err());
        assert!(parse_grid("0:2:3:log").is_err());
    }

    #[test]
    fn config_file_sections() {
        let inv = read_invocations("[tolerance]\nlambda=1/600\n# comment\ndelta = 10\n\n[pmf-m]\na=1\n").unwrap();
        assert_eq!(inv.len(), 2);
        assert_eq!(inv[0].argv(), vec!["tolerance", "--delta", "10", "--lambda", "1/600"]);
        assert_eq!(inv[1].argv(), vec!["pmf-m", "--a", "1"]);
    }
}
