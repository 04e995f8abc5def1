//! Subcommand implementations and the helpers they share.

pub mod evaluate;
pub mod experiment;
pub mod explain;
pub mod prepare;
pub mod rules;
pub mod sample;
pub mod train;

use std::path::Path;

use txanomaly_core::dataset::{load_csv, Dataset, Schema};

use crate::errors::{CliError, CliResult};

pub fn schema_by_name(name: &str) -> CliResult<Option<Schema>> {
    match name {
        "full" => Ok(Some(Schema::full())),
        "reduced" => Ok(Some(Schema::reduced())),
        "auto" => Ok(None),
        other => Err(CliError::usage(format!(
            "unknown schema '{other}' (expected 'full', 'reduced', or 'auto')"
        ))),
    }
}

/// Builds a schema from the file's own header: the label is the standard
/// label column when present, the last column otherwise.
fn sniff_schema(path: &Path) -> CliResult<Schema> {
    use std::io::BufRead;
    let file = std::fs::File::open(path)
        .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    let mut header = String::new();
    std::io::BufReader::new(file).read_line(&mut header)?;
    let columns: Vec<String> = header
        .trim_end()
        .split(',')
        .map(|c| c.trim().to_string())
        .collect();
    if columns.is_empty() || columns.iter().all(|c| c.is_empty()) {
        return Err(CliError::usage(format!(
            "{}: missing header row",
            path.display()
        )));
    }
    let label = if columns
        .iter()
        .any(|c| c == txanomaly_core::dataset::LABEL_COLUMN)
    {
        txanomaly_core::dataset::LABEL_COLUMN.to_string()
    } else {
        columns.last().unwrap().clone()
    };
    Ok(Schema::new(columns, label)?)
}

pub fn load_data(path: &Path, schema_name: &str) -> CliResult<Dataset> {
    let schema = match schema_by_name(schema_name)? {
        Some(schema) => schema,
        None => sniff_schema(path)?,
    };
    Ok(load_csv(path, &schema)?)
}

/// Parses an instance selector: "all", "positives", "negatives" (each with
/// an optional ":N" cap), or a comma-separated index list.
pub fn parse_instances(spec: &str, d: &Dataset) -> CliResult<Vec<usize>> {
    let (word, cap) = match spec.split_once(':') {
        Some((w, n)) => {
            let cap: usize = n
                .parse()
                .map_err(|_| CliError::usage(format!("bad instance cap '{n}'")))?;
            (w, Some(cap))
        }
        None => (spec, None),
    };
    let mut picked: Vec<usize> = match word {
        "all" => (0..d.n_rows()).collect(),
        "positives" => d.class_indices(1),
        "negatives" => d.class_indices(0),
        list => list
            .split(',')
            .map(|tok| {
                tok.trim()
                    .parse::<usize>()
                    .map_err(|_| CliError::usage(format!("bad instance index '{tok}'")))
            })
            .collect::<CliResult<Vec<usize>>>()?,
    };
    if let Some(&bad) = picked.iter().find(|&&i| i >= d.n_rows()) {
        return Err(CliError::usage(format!(
            "instance {bad} out of range (dataset has {} rows)",
            d.n_rows()
        )));
    }
    if let Some(cap) = cap {
        picked.truncate(cap);
    }
    if picked.is_empty() {
        return Err(CliError::usage("no instances selected".to_string()));
    }
    Ok(picked)
}
