//! Sample files: header `x,value`, one row per node `x_b = b h`.

use std::path::Path;

use w2interp::{GridSpec, SampleSet, SampleSource};

use crate::error::{CliError, CliResult};

/// Allowed distance between a file abscissa and its node.
pub const NODE_TOL: f64 = 1e-12;

pub fn read_samples(path: &Path, grid: &GridSpec) -> CliResult<SampleSet> {
    let file = std::fs::File::open(path)
        .map_err(|e| CliError::Usage(format!("cannot open {}: {e}", path.display())))?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let headers = reader.headers().map_err(|e| CliError::SampleHeader(e.to_string()))?.clone();
    if headers.len() != 2 || &headers[0] != "x" || &headers[1] != "value" {
        let found = headers.iter().collect::<Vec<_>>().join(",");
        return Err(CliError::SampleHeader(format!("expected 'x,value', found '{found}'")));
    }
    let nodes = grid.nodes();
    let mut values = Vec::with_capacity(nodes.len());
    for (row, record) in reader.records().enumerate() {
        let bad = |message: String| CliError::Samples { row, message };
        let record = record.map_err(|e| bad(e.to_string()))?;
        let parse = |i: usize, what: &str| -> CliResult<f64> {
            let field = record.get(i).ok_or_else(|| bad(format!("missing {what}")))?;
            field.parse().map_err(|_| bad(format!("cannot parse {what} '{field}'")))
        };
        let x = parse(0, "x")?;
        let v = parse(1, "value")?;
        let Some(&node) = nodes.get(row) else {
            return Err(bad(format!("more than N + 1 = {} rows", nodes.len())));
        };
        if !((x - node).abs() <= NODE_TOL) {
            return Err(bad(format!("x = {x} is not the node x_{row} = {node}")));
        }
        if !v.is_finite() {
            return Err(bad(format!("non-finite value {v}")));
        }
        values.push(v);
    }
    if values.len() != nodes.len() {
        return Err(CliError::Samples {
            row: values.len(),
            message: format!("expected N + 1 = {} rows, found {}", nodes.len(), values.len()),
        });
    }
    Ok(SampleSet::new(grid.clone(), values, SampleSource::File(path.to_path_buf()))?)
}
