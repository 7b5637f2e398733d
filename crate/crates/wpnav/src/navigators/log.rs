//! Line-per-command text log: `R <degrees>` / `T <meters>` / `S`.

use super::Command;
use crate::error::{Error, Result};
use std::fmt::Write as _;

pub fn write_command_log(commands: &[Command]) -> String {
    let mut out = String::new();
    for cmd in commands {
        match cmd {
            Command::Rotate(a) => {
                let _ = writeln!(out, "R {}", a.to_degrees());
            }
            Command::Translate(d) => {
                let _ = writeln!(out, "T {d}");
            }
            Command::Stop => out.push_str("S\n"),
        }
    }
    out
}

pub fn parse_command_log(text: &str) -> Result<Vec<Command>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let ln = i + 1;
        let bad = |msg: String| Error::Parse { line: ln, msg };
        if line == "S" {
            out.push(Command::Stop);
        } else if let Some(rest) = line.strip_prefix("R ") {
            let deg: f64 =
                rest.parse().map_err(|_| bad(format!("bad rotation {rest:?}")))?;
            out.push(Command::Rotate(deg.to_radians()));
        } else if let Some(rest) = line.strip_prefix("T ") {
            let d: f64 = rest.parse().map_err(|_| bad(format!("bad distance {rest:?}")))?;
            out.push(Command::Translate(d));
        } else {
            return Err(bad(format!("unknown command {line:?}")));
        }
    }
    Ok(out)
}
