//! Line-oriented text formats for maps and assignments.
//!
//! ```text
//! graph <|V|> <|E|>
//! v <id> <x> <y>
//! e <u> <v>
//! ```
//!
//! and
//!
//! ```text
//! tasks <k>
//! t <start> <goal>
//! ```

use std::fmt::Write as _;
use std::str::FromStr;

use super::{Assignment, RoadmapGraph, Task, VertexId};
use crate::error::{Error, Result};
use crate::scalar::{Point, Scalar};

pub fn write_map<S: Scalar>(g: &RoadmapGraph<S>) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "graph {} {}", g.num_vertices(), g.num_edges());
    for (i, p) in g.positions().iter().enumerate() {
        let _ = writeln!(out, "v {i} {} {}", p.x, p.y);
    }
    for &(u, v) in g.edges() {
        let _ = writeln!(out, "e {u} {v}");
    }
    out
}

pub fn write_assignment(a: &Assignment) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "tasks {}", a.num_agents());
    for t in &a.tasks {
        let _ = writeln!(out, "t {} {}", t.start, t.goal);
    }
    out
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            inner: text.lines().enumerate(),
            line: 0,
        }
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse {
            line: self.line,
            msg: msg.into(),
        }
    }

    /// Next non-blank line split into tokens, requiring `tag` and `arity` fields.
    fn record(&mut self, tag: &str, arity: usize) -> Result<Vec<&'a str>> {
        loop {
            let Some((i, raw)) = self.inner.next() else {
                return Err(self.err(format!("unexpected end of input, expected `{tag}`")));
            };
            self.line = i + 1;
            let fields: Vec<&str> = raw.split_whitespace().collect();
            if fields.is_empty() {
                continue;
            }
            if fields[0] != tag {
                return Err(self.err(format!("expected `{tag}`, found `{}`", fields[0])));
            }
            if fields.len() != arity + 1 {
                return Err(self.err(format!("`{tag}` takes {arity} fields")));
            }
            return Ok(fields[1..].to_vec());
        }
    }

    fn parse<T: FromStr>(&self, field: &str) -> Result<T> {
        field.parse().map_err(|_| self.err(format!("cannot parse `{field}`")))
    }

    fn finish(mut self) -> Result<()> {
        for (i, raw) in self.inner.by_ref() {
            if !raw.trim().is_empty() {
                self.line = i + 1;
                return Err(self.err("trailing content"));
            }
        }
        Ok(())
    }
}

pub fn read_map<S: Scalar>(text: &str) -> Result<RoadmapGraph<S>> {
    let mut lines = Lines::new(text);
    let header = lines.record("graph", 2)?;
    let n: usize = lines.parse(header[0])?;
    let m: usize = lines.parse(header[1])?;
    let mut positions = Vec::with_capacity(n);
    for i in 0..n {
        let f = lines.record("v", 3)?;
        let id: usize = lines.parse(f[0])?;
        if id != i {
            return Err(lines.err(format!("vertex ids must be dense and ordered, expected {i}")));
        }
        let x: f64 = lines.parse(f[1])?;
        let y: f64 = lines.parse(f[2])?;
        positions.push(Point::new(S::from_f64_lossy(x), S::from_f64_lossy(y)));
    }
    let mut edges = Vec::with_capacity(m);
    for _ in 0..m {
        let f = lines.record("e", 2)?;
        let u: VertexId = lines.parse(f[0])?;
        let v: VertexId = lines.parse(f[1])?;
        edges.push((u, v));
    }
    lines.finish()?;
    RoadmapGraph::new(positions, edges)
}

pub fn read_assignment(text: &str) -> Result<Assignment> {
    let mut lines = Lines::new(text);
    let header = lines.record("tasks", 1)?;
    let k: usize = lines.parse(header[0])?;
    let mut tasks = Vec::with_capacity(k);
    for _ in 0..k {
        let f = lines.record("t", 2)?;
        tasks.push(Task {
            start: lines.parse(f[0])?,
            goal: lines.parse(f[1])?,
        });
    }
    lines.finish()?;
    Ok(Assignment::new(tasks))
}
