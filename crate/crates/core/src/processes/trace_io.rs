use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::domain::{ContextPoint, ProcessTrace};
use crate::error::{Error, Result};

// Tab-separated, header `t\tcontext_id` plus optional coordinate columns
// x0, x1, ...; one row per round with t = 1, 2, ...

pub fn write_trace(trace: &ProcessTrace, out: impl Write) -> Result<()> {
    let mut w = BufWriter::new(out);
    let dim = trace
        .points
        .iter()
        .filter_map(|p| p.coords.as_ref().map(Vec::len))
        .max()
        .unwrap_or(0);
    write!(w, "t\tcontext_id")?;
    for k in 0..dim {
        write!(w, "\tx{k}")?;
    }
    writeln!(w)?;
    for (i, p) in trace.points.iter().enumerate() {
        write!(w, "{}\t{}", i + 1, p.id)?;
        if let Some(c) = &p.coords {
            for v in c {
                write!(w, "\t{v}")?;
            }
        }
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_trace(input: impl Read) -> Result<ProcessTrace> {
    let reader = BufReader::new(input);
    let mut points = Vec::new();
    let mut lines = reader.lines().enumerate();
    let header = match lines.next() {
        Some((_, line)) => line?,
        None => return Err(Error::TraceFormat { line: 1, message: "empty trace file".into() }),
    };
    let cols: Vec<&str> = header.trim_end().split('\t').collect();
    if cols.len() < 2 || cols[0] != "t" || cols[1] != "context_id" {
        return Err(Error::TraceFormat {
            line: 1,
            message: format!("expected header `t<TAB>context_id`, got `{header}`"),
        });
    }
    for (i, line) in lines {
        let line = line?;
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let bad = |message: String| Error::TraceFormat { line: lineno, message };
        let fields: Vec<&str> = line.trim_end().split('\t').collect();
        if fields.len() < 2 {
            return Err(bad("expected at least two fields".into()));
        }
        let t: u64 = fields[0].parse().map_err(|e| bad(format!("round: {e}")))?;
        if t != points.len() as u64 + 1 {
            return Err(bad(format!("round {t} out of sequence")));
        }
        let id: u64 = fields[1].parse().map_err(|e| bad(format!("context id: {e}")))?;
        let point = if fields.len() > 2 {
            let coords = fields[2..]
                .iter()
                .map(|f| f.parse::<f64>().map_err(|e| bad(format!("coordinate: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            ContextPoint::with_coords(id, coords)
        } else {
            ContextPoint::new(id)
        };
        points.push(point);
    }
    Ok(ProcessTrace::new(points))
}

pub fn write_trace_file(trace: &ProcessTrace, path: &Path) -> Result<()> {
    write_trace(trace, File::create(path)?)
}

pub fn read_trace_file(path: &Path) -> Result<ProcessTrace> {
    read_trace(File::open(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let tr = ProcessTrace::new(vec![
            ContextPoint::new(4),
            ContextPoint::with_coords(9, vec![0.25, 0.5]),
        ]);
        let mut buf = Vec::new();
        write_trace(&tr, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("t\tcontext_id\tx0\tx1\n1\t4\n2\t9\t0.25\t0.5\n"));
        let back = read_trace(buf.as_slice()).unwrap();
        assert_eq!(back, tr);
        assert_eq!(back.points[1].coords, Some(vec![0.25, 0.5]));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(read_trace("".as_bytes()).is_err());
        assert!(read_trace("time\tid\n".as_bytes()).is_err());
        let err = read_trace("t\tcontext_id\n1\t3\n3\t4\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::TraceFormat { line: 3, .. }));
        assert!(read_trace("t\tcontext_id\n1\tx\n".as_bytes()).is_err());
    }
}
