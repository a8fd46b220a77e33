use crate::error::{BenchError, Result};
use crate::record::csv_writer;
use drrt_core::VertexId;
use std::io::{Read, Write};

/// Plan CSV: one `step,agent,vertex` row per agent and timestep.
pub fn write_plan<W: Write, P: AsRef<[VertexId]>>(plan: &[P], w: W) -> Result<()> {
    let mut out = csv_writer(w);
    out.write_record(["step", "agent", "vertex"])?;
    for (step, config) in plan.iter().enumerate() {
        for (agent, v) in config.as_ref().iter().enumerate() {
            out.write_record([step.to_string(), agent.to_string(), v.to_string()])?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Inverse of [`write_plan`]; rows must list every agent of every step in
/// order.
pub fn read_plan<R: Read>(r: R) -> Result<Vec<Vec<VertexId>>> {
    let mut input = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
    if input.headers()?.iter().ne(["step", "agent", "vertex"]) {
        return Err(BenchError::Plan("expected header `step,agent,vertex`".into()));
    }
    let mut plan: Vec<Vec<VertexId>> = Vec::new();
    for (i, row) in input.records().enumerate() {
        let row = row?;
        let line = i + 2;
        let nums: Vec<u64> = row
            .iter()
            .map(|f| f.trim().parse::<u64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| BenchError::Plan(format!("line {line}: {e}")))?;
        let [step, agent, vertex] = nums[..] else {
            return Err(BenchError::Plan(format!("line {line}: expected 3 fields")));
        };
        let vertex = VertexId::try_from(vertex).map_err(|_| BenchError::Plan(format!("line {line}: vertex out of range")))?;
        match (step as usize).cmp(&plan.len()) {
            std::cmp::Ordering::Equal if agent == 0 => plan.push(vec![vertex]),
            std::cmp::Ordering::Less if step as usize + 1 == plan.len() && agent as usize == plan[step as usize].len() => {
                plan[step as usize].push(vertex)
            }
            _ => return Err(BenchError::Plan(format!("line {line}: rows out of order"))),
        }
    }
    if let Some(first) = plan.first() {
        if plan.iter().any(|c| c.len() != first.len()) {
            return Err(BenchError::Plan("steps list different agent counts".into()));
        }
    }
    Ok(plan)
}
