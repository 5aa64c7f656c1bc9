use std::fmt;

use serde::{Deserialize, Serialize};

use super::HarnessError;

/// One line of a trace file. Ids are the caller's names for vertices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TraceCommand {
    AddVertex(u64),
    DeleteVertex(u64),
    AddEdge(u64, u64),
    DeleteEdge(u64, u64),
    Query,
    Checkpoint,
}

impl fmt::Display for TraceCommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceCommand::AddVertex(v) => write!(f, "addv {v}"),
            TraceCommand::DeleteVertex(v) => write!(f, "delv {v}"),
            TraceCommand::AddEdge(u, v) => write!(f, "adde {u} {v}"),
            TraceCommand::DeleteEdge(u, v) => write!(f, "dele {u} {v}"),
            TraceCommand::Query => write!(f, "query"),
            TraceCommand::Checkpoint => write!(f, "checkpoint"),
        }
    }
}

fn content(line: &str) -> &str {
    line.split('#').next().unwrap_or("").trim()
}

fn id(tok: Option<&str>, line: usize) -> Result<u64, HarnessError> {
    let tok = tok.ok_or_else(|| HarnessError::Parse {
        line,
        msg: "missing vertex id".into(),
    })?;
    tok.parse().map_err(|_| HarnessError::Parse {
        line,
        msg: format!("bad vertex id {tok:?}"),
    })
}

fn no_more<'a>(mut rest: impl Iterator<Item = &'a str>, line: usize) -> Result<(), HarnessError> {
    match rest.next() {
        None => Ok(()),
        Some(t) => Err(HarnessError::Parse {
            line,
            msg: format!("unexpected {t:?}"),
        }),
    }
}

/// Parses a trace: one command per line, `#` comments and blank lines
/// skipped.
pub fn parse_trace(text: &str) -> Result<Vec<TraceCommand>, HarnessError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = content(raw);
        if body.is_empty() {
            continue;
        }
        let mut toks = body.split_whitespace();
        let cmd = match toks.next().unwrap() {
            "addv" => TraceCommand::AddVertex(id(toks.next(), line)?),
            "delv" => TraceCommand::DeleteVertex(id(toks.next(), line)?),
            "adde" => TraceCommand::AddEdge(id(toks.next(), line)?, id(toks.next(), line)?),
            "dele" => TraceCommand::DeleteEdge(id(toks.next(), line)?, id(toks.next(), line)?),
            "query" => TraceCommand::Query,
            "checkpoint" => TraceCommand::Checkpoint,
            other => {
                return Err(HarnessError::Parse {
                    line,
                    msg: format!("unknown command {other:?}"),
                })
            }
        };
        no_more(toks, line)?;
        out.push(cmd);
    }
    Ok(out)
}

/// Parses an edge list: one `u v` pair per line, `#` comments and blank
/// lines skipped.
pub fn parse_graph(text: &str) -> Result<Vec<(u64, u64)>, HarnessError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = content(raw);
        if body.is_empty() {
            continue;
        }
        let mut toks = body.split_whitespace();
        let u = id(toks.next(), line)?;
        let v = id(toks.next(), line)?;
        no_more(toks, line)?;
        if u == v {
            return Err(HarnessError::Parse {
                line,
                msg: format!("self-loop on {u}"),
            });
        }
        out.push((u, v));
    }
    Ok(out)
}
