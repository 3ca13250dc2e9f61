//! Trial CSV: `t_s,z_mm,f00,f01,...,f33`, one row per sample, row-major grid.
//! An optional leading `# label=lump|no_lump` comment carries the label.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{ForceGrid, TrialRecording};
use crate::textfmt::{num, parse_f64};
use crate::{Error, Result};

const N_COLS: usize = 18;

fn header() -> String {
    let mut cols = vec!["t_s".to_string(), "z_mm".to_string()];
    for r in 0..4 {
        for c in 0..4 {
            cols.push(format!("f{r}{c}"));
        }
    }
    cols.join(",")
}

pub fn load_trial(path: impl AsRef<Path>, phantom_height: f64) -> Result<TrialRecording> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_trial(file, phantom_height)
}

pub fn read_trial<R: Read>(reader: R, phantom_height: f64) -> Result<TrialRecording> {
    let reader = BufReader::new(reader);
    let mut label = None;
    let mut saw_header = false;
    let mut ts = Vec::new();
    let mut zs = Vec::new();
    let mut grids = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::Schema {
            line: lineno,
            msg: e.to_string(),
        })?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(v) = comment.trim().strip_prefix("label=") {
                label = match v.trim() {
                    "lump" => Some(true),
                    "no_lump" => Some(false),
                    other => {
                        return Err(Error::Schema {
                            line: lineno,
                            msg: format!("unknown label {other:?}"),
                        })
                    }
                };
            }
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if !saw_header {
            if line != header() {
                return Err(Error::Schema {
                    line: lineno,
                    msg: "expected header t_s,z_mm,f00..f33".into(),
                });
            }
            saw_header = true;
            continue;
        }
        if fields.len() != N_COLS {
            return Err(Error::Schema {
                line: lineno,
                msg: format!("expected {N_COLS} columns, got {}", fields.len()),
            });
        }
        ts.push(parse_f64(fields[0], lineno)?);
        zs.push(parse_f64(fields[1], lineno)?);
        let cells = fields[2..]
            .iter()
            .map(|f| parse_f64(f, lineno))
            .collect::<Result<Vec<_>>>()?;
        grids.push(ForceGrid::from_row_major(&cells).expect("16 cells"));
    }
    if ts.is_empty() {
        return Err(Error::Schema {
            line: 0,
            msg: "no samples".into(),
        });
    }
    Ok(TrialRecording::new(ts, zs, grids, phantom_height)?.with_label(label))
}

pub fn save_trial(trial: &TrialRecording, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_trial(trial, BufWriter::new(file)).map_err(|e| Error::io(path, e))
}

pub fn write_trial<W: Write>(trial: &TrialRecording, mut w: W) -> std::io::Result<()> {
    match trial.label() {
        Some(true) => writeln!(w, "# label=lump")?,
        Some(false) => writeln!(w, "# label=no_lump")?,
        None => {}
    }
    writeln!(w, "{}", header())?;
    for i in 0..trial.len() {
        write!(
            w,
            "{},{}",
            num(trial.timestamps()[i]),
            num(trial.finger_height()[i])
        )?;
        for v in trial.force_grid()[i].cells() {
            write!(w, ",{}", num(v))?;
        }
        writeln!(w)?;
    }
    w.flush()
}
