//! The three-primitive gripper plan language.
//!
//! ```text
//! plan      = { line } ;
//! line      = [ statement ] [ comment ] newline ;
//! statement = "open_gripper" "(" ")"
//!           | "close_gripper" "(" ")"
//!           | "move_gripper" "(" number "," number "," number "," number ")" ;
//! comment   = "#" { any character except newline } ;
//! number    = any token accepted by Rust's f64 parser, finite ;
//! ```
//!
//! One statement per line, at most 100 statements per plan. Coordinates are
//! meters in the workspace frame; yaw is radians. If the text contains
//! Markdown code fences, only the first fenced block is read (prose around
//! it is ignored); without fences the whole text is read. Parsing is total:
//! any input yields either a plan or a list of positioned diagnostics, never
//! a panic.

use crate::model::{Command, ModelError, Plan, Pose, WorkspaceBounds, MAX_PLAN_COMMANDS};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Error,
    Warning,
}

/// A positioned message about plan text. `line` and `column` are 1-based;
/// columns count characters, not bytes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseDiagnostic {
    pub line: usize,
    pub column: usize,
    pub message: String,
    pub severity: Severity,
}

impl ParseDiagnostic {
    fn error(line: usize, column: usize, message: impl Into<String>) -> Self {
        Self {
            line,
            column,
            message: message.into(),
            severity: Severity::Error,
        }
    }

    fn warning(line: usize, column: usize, message: impl Into<String>) -> Self {
        Self {
            line,
            column,
            message: message.into(),
            severity: Severity::Warning,
        }
    }
}

impl std::fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{}:{}: {tag}: {}", self.line, self.column, self.message)
    }
}

struct LocatedCommand {
    command: Command,
    line: usize,
    column: usize,
}

/// Range of 0-based line indices to read as plan text. With fences, the
/// interior of the first fenced block; otherwise everything.
fn body_range(lines: &[&str]) -> (usize, usize) {
    let mut fences = lines.iter().enumerate().filter(|(_, l)| l.trim_start().starts_with("```"));
    match (fences.next(), fences.next()) {
        (Some((open, _)), Some((close, _))) => (open + 1, close),
        (Some((open, _)), None) => (open + 1, lines.len()),
        (None, _) => (0, lines.len()),
    }
}

fn scan_line(raw: &str, line_no: usize, out: &mut Vec<LocatedCommand>, diags: &mut Vec<ParseDiagnostic>, cap_hit: &mut bool) {
    let code = match raw.find('#') {
        Some(i) => &raw[..i],
        None => raw,
    };
    let chars: Vec<char> = code.chars().collect();
    let mut pos = 0usize;
    while pos < chars.len() && chars[pos].is_whitespace() {
        pos += 1;
    }
    if pos == chars.len() {
        return;
    }
    let stmt_col = pos + 1;

    let name_start = pos;
    while pos < chars.len() && (chars[pos].is_ascii_alphanumeric() || chars[pos] == '_') {
        pos += 1;
    }
    let name: String = chars[name_start..pos].iter().collect();
    if name.is_empty() {
        diags.push(ParseDiagnostic::error(line_no, stmt_col, "expected a statement name"));
        return;
    }
    while pos < chars.len() && chars[pos].is_whitespace() {
        pos += 1;
    }
    if pos == chars.len() || chars[pos] != '(' {
        diags.push(ParseDiagnostic::error(
            line_no,
            pos + 1,
            format!("expected '(' after '{name}'"),
        ));
        return;
    }
    let paren_col = pos + 1;
    pos += 1;
    let args_start = pos;
    while pos < chars.len() && chars[pos] != ')' {
        pos += 1;
    }
    if pos == chars.len() {
        diags.push(ParseDiagnostic::error(line_no, pos + 1, "missing closing ')'"));
        return;
    }
    let args: String = chars[args_start..pos].iter().collect();
    pos += 1;
    if let Some(extra) = (pos..chars.len()).find(|&i| !chars[i].is_whitespace()) {
        diags.push(ParseDiagnostic::error(
            line_no,
            extra + 1,
            "unexpected text after statement",
        ));
        return;
    }

    let command = match name.as_str() {
        "open_gripper" | "close_gripper" => {
            if !args.trim().is_empty() {
                diags.push(ParseDiagnostic::error(
                    line_no,
                    paren_col,
                    format!("{name} takes no arguments"),
                ));
                return;
            }
            if name == "open_gripper" {
                Command::OpenGripper
            } else {
                Command::CloseGripper
            }
        }
        "move_gripper" => {
            let pieces: Vec<&str> = if args.trim().is_empty() { Vec::new() } else { args.split(',').collect() };
            if pieces.len() != 4 {
                diags.push(ParseDiagnostic::error(
                    line_no,
                    paren_col,
                    format!("move_gripper takes 4 arguments (x, y, z, yaw), got {}", pieces.len()),
                ));
                return;
            }
            let mut values = [0.0f64; 4];
            let mut arg_col = paren_col + 1;
            let mut bad = false;
            for (i, piece) in pieces.iter().enumerate() {
                match piece.trim().parse::<f64>() {
                    Ok(v) if v.is_finite() => values[i] = v,
                    _ => {
                        diags.push(ParseDiagnostic::error(
                            line_no,
                            arg_col,
                            format!("argument {} of move_gripper is not a finite number: '{}'", i + 1, piece.trim()),
                        ));
                        bad = true;
                    }
                }
                arg_col += piece.chars().count() + 1;
            }
            if bad {
                return;
            }
            let pose = Pose::new(values[0], values[1], values[2], values[3]).expect("finite checked");
            Command::MoveGripper(pose)
        }
        other => {
            diags.push(ParseDiagnostic::error(
                line_no,
                stmt_col,
                format!("unknown statement '{other}'; expected open_gripper, close_gripper or move_gripper"),
            ));
            return;
        }
    };

    if out.len() == MAX_PLAN_COMMANDS {
        if !*cap_hit {
            diags.push(ParseDiagnostic::error(
                line_no,
                stmt_col,
                format!("plan exceeds the {MAX_PLAN_COMMANDS}-command limit"),
            ));
            *cap_hit = true;
        }
        return;
    }
    out.push(LocatedCommand {
        command,
        line: line_no,
        column: stmt_col,
    });
}

fn scan(text: &str) -> (Vec<LocatedCommand>, Vec<ParseDiagnostic>) {
    let lines: Vec<&str> = text.lines().collect();
    let (start, end) = body_range(&lines);
    let mut out = Vec::new();
    let mut diags = Vec::new();
    let mut cap_hit = false;
    for idx in start..end {
        scan_line(lines[idx], idx + 1, &mut out, &mut diags, &mut cap_hit);
    }
    (out, diags)
}

/// Parse plan text. Returns every diagnostic found, not just the first.
pub fn parse(text: &str) -> Result<Plan, Vec<ParseDiagnostic>> {
    let (located, diags) = scan(text);
    if !diags.is_empty() {
        return Err(diags);
    }
    let commands = located.into_iter().map(|lc| lc.command).collect();
    match Plan::new(commands, text) {
        Ok(plan) => Ok(plan),
        // unreachable: scan enforces the cap, but keep parse total
        Err(ModelError::PlanTooLong(len)) => Err(vec![ParseDiagnostic::error(
            1,
            1,
            format!("plan has {len} commands, cap is {MAX_PLAN_COMMANDS}"),
        )]),
        Err(e) => Err(vec![ParseDiagnostic::error(1, 1, e.to_string())]),
    }
}

/// Static lint for a parsed plan: move targets outside the workspace,
/// redundant open/close sequences, empty plans. All warnings; execution
/// decides what is actually fatal.
pub fn validate(plan: &Plan, workspace: &WorkspaceBounds) -> Vec<ParseDiagnostic> {
    let mut warnings = Vec::new();
    let (located, scan_diags) = scan(&plan.source_text);
    let spans: Vec<(usize, usize)> = if scan_diags.is_empty() && located.len() == plan.commands.len() {
        located.iter().map(|lc| (lc.line, lc.column)).collect()
    } else {
        vec![(1, 1); plan.commands.len()]
    };
    if plan.is_empty() {
        warnings.push(ParseDiagnostic::warning(1, 1, "plan contains no commands"));
    }
    // initial gripper state is unknown; only flag repeats we can prove
    let mut known_open: Option<bool> = None;
    for (i, command) in plan.commands.iter().enumerate() {
        let (line, column) = spans[i];
        match command {
            Command::OpenGripper => {
                if known_open == Some(true) {
                    warnings.push(ParseDiagnostic::warning(line, column, "gripper is already open here"));
                }
                known_open = Some(true);
            }
            Command::CloseGripper => {
                if known_open == Some(false) {
                    warnings.push(ParseDiagnostic::warning(line, column, "gripper is already closed here"));
                }
                known_open = Some(false);
            }
            Command::MoveGripper(target) => {
                if !workspace.contains(target) {
                    warnings.push(ParseDiagnostic::warning(
                        line,
                        column,
                        format!(
                            "move target ({:.4}, {:.4}, {:.4}) is outside the workspace",
                            target.x, target.y, target.z
                        ),
                    ));
                }
            }
        }
    }
    warnings
}

/// Format one coordinate: fixed 6 decimal places when that survives a
/// round-trip, otherwise the shortest exact form (f64's Debug rendering).
fn fmt_num(v: f64) -> String {
    let fixed = format!("{v:.6}");
    match fixed.parse::<f64>() {
        Ok(back) if back == v => fixed,
        _ => format!("{v:?}"),
    }
}

/// Canonical text form: one statement per line, six decimal places,
/// trailing newline. Parsing the output reproduces the same command list.
pub fn pretty_print(plan: &Plan) -> String {
    let mut out = String::new();
    for command in &plan.commands {
        match command {
            Command::OpenGripper => out.push_str("open_gripper()\n"),
            Command::CloseGripper => out.push_str("close_gripper()\n"),
            Command::MoveGripper(p) => {
                out.push_str(&format!(
                    "move_gripper({}, {}, {}, {})\n",
                    fmt_num(p.x),
                    fmt_num(p.y),
                    fmt_num(p.z),
                    fmt_num(p.yaw)
                ));
            }
        }
    }
    out
}
