use crate::config::Algorithm;
use crate::error::{BenchError, Result};
use std::io::{Read, Write};

pub(crate) const RECORD_HEADER: [&str; 8] = ["instance", "map", "algo", "success", "steps", "iterations", "time_s", "seed"];

/// Outcome of one (instance, map, algorithm) cell.
#[derive(Clone, Debug, PartialEq)]
pub struct RunRecord {
    pub instance: usize,
    /// Map index (densified suite) or agent count (carp-hard suite).
    pub map: usize,
    pub algorithm: Algorithm,
    pub success: bool,
    /// Makespan of the plan; `None` for failures.
    pub steps: Option<usize>,
    /// Search iterations (drrt) or ordering attempts (carp).
    pub iterations: usize,
    pub time_s: f64,
    pub seed: u64,
    /// Why the run failed; not part of the CSV.
    pub reason: Option<String>,
}

pub(crate) fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w)
}

/// Records CSV with a header row. Times use the shortest representation that
/// parses back to the same value.
pub fn write_records<W: Write>(records: &[RunRecord], w: W) -> Result<()> {
    let mut out = csv_writer(w);
    out.write_record(RECORD_HEADER)?;
    for r in records {
        out.write_record([
            r.instance.to_string(),
            r.map.to_string(),
            r.algorithm.to_string(),
            r.success.to_string(),
            r.steps.map(|s| s.to_string()).unwrap_or_default(),
            r.iterations.to_string(),
            r.time_s.to_string(),
            r.seed.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_records<R: Read>(r: R) -> Result<Vec<RunRecord>> {
    let mut input = csv::ReaderBuilder::new().has_headers(true).from_reader(r);
    if input.headers()?.iter().ne(RECORD_HEADER) {
        return Err(BenchError::Records("unexpected header".into()));
    }
    let mut records = Vec::new();
    for (i, row) in input.records().enumerate() {
        let row = row?;
        let line = i + 2;
        let field = |j: usize| row.get(j).ok_or_else(|| BenchError::Records(format!("line {line}: missing field {j}")));
        let bad = |what: &str| BenchError::Records(format!("line {line}: bad {what}"));
        let success: bool = field(3)?.parse().map_err(|_| bad("success"))?;
        let steps = match field(4)? {
            "" => None,
            s => Some(s.parse().map_err(|_| bad("steps"))?),
        };
        if success != steps.is_some() {
            return Err(bad("steps (present exactly for successes)"));
        }
        records.push(RunRecord {
            instance: field(0)?.parse().map_err(|_| bad("instance"))?,
            map: field(1)?.parse().map_err(|_| bad("map"))?,
            algorithm: field(2)?.parse().map_err(|_| bad("algo"))?,
            success,
            steps,
            iterations: field(5)?.parse().map_err(|_| bad("iterations"))?,
            time_s: field(6)?.parse().map_err(|_| bad("time_s"))?,
            seed: field(7)?.parse().map_err(|_| bad("seed"))?,
            reason: None,
        });
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Vec<RunRecord> {
        vec![
            RunRecord {
                instance: 0,
                map: 3,
                algorithm: Algorithm::Drrt,
                success: true,
                steps: Some(41),
                iterations: 17,
                time_s: 0.123456789,
                seed: u64::MAX,
                reason: None,
            },
            RunRecord {
                instance: 1,
                map: 3,
                algorithm: Algorithm::Carp { attempts: 1000 },
                success: false,
                steps: None,
                iterations: 1000,
                time_s: 2.5,
                seed: 7,
                reason: Some("all attempts failed".into()),
            },
        ]
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        write_records(&sample(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "instance,map,algo,success,steps,iterations,time_s,seed\n\
             0,3,drrt,true,41,17,0.123456789,18446744073709551615\n\
             1,3,carp:1000,false,,1000,2.5,7\n"
        );
    }

    #[test]
    fn round_trip_drops_only_the_reason() {
        let mut buf = Vec::new();
        write_records(&sample(), &mut buf).unwrap();
        let back = read_records(&buf[..]).unwrap();
        let mut expected = sample();
        expected[1].reason = None;
        assert_eq!(back, expected);
    }

    #[test]
    fn rejects_inconsistent_rows() {
        let text = "instance,map,algo,success,steps,iterations,time_s,seed\n0,0,drrt,false,12,1,0,0\n";
        assert!(read_records(text.as_bytes()).is_err());
        assert!(read_records("a,b\n".as_bytes()).is_err());
    }
}
