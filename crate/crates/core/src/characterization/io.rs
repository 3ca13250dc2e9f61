//! Characterization sample CSVs and flat `key=value` model files.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use super::{BubbleModel, PlatformModel};
use crate::rendering::HertzParams;
use crate::textfmt::{num, parse_f64};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleKind {
    /// `x_mm,F_N`
    Platform,
    /// `P_kpa,F_N`
    Bubble,
}

impl SampleKind {
    pub fn header(self) -> &'static str {
        match self {
            SampleKind::Platform => "x_mm,F_N",
            SampleKind::Bubble => "P_kpa,F_N",
        }
    }
}

pub fn load_samples(path: impl AsRef<Path>) -> Result<(SampleKind, Vec<(f64, f64)>)> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    read_samples(&text)
}

pub fn read_samples(text: &str) -> Result<(SampleKind, Vec<(f64, f64)>)> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (_, head) = lines.next().ok_or(Error::Schema {
        line: 0,
        msg: "empty sample file".into(),
    })?;
    let kind = match head {
        "x_mm,F_N" => SampleKind::Platform,
        "P_kpa,F_N" => SampleKind::Bubble,
        other => {
            return Err(Error::Schema {
                line: 1,
                msg: format!("unknown sample header {other:?}"),
            })
        }
    };
    let mut out = Vec::new();
    for (lineno, line) in lines {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 2 {
            return Err(Error::Schema {
                line: lineno,
                msg: format!("expected 2 columns, got {}", fields.len()),
            });
        }
        out.push((parse_f64(fields[0], lineno)?, parse_f64(fields[1], lineno)?));
    }
    Ok((kind, out))
}

pub fn write_samples<W: Write>(
    kind: SampleKind,
    samples: &[(f64, f64)],
    mut w: W,
) -> std::io::Result<()> {
    writeln!(w, "{}", kind.header())?;
    for (x, f) in samples {
        writeln!(w, "{},{}", num(*x), num(*f))?;
    }
    Ok(())
}

/// Any model that can live in a flat key-value file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModelFile {
    Platform {
        model: PlatformModel,
        r_squared: Option<f64>,
    },
    Bubble {
        model: BubbleModel,
        r_squared: Option<f64>,
    },
    Hertz(HertzParams),
}

pub fn write_model<W: Write>(model: &ModelFile, mut w: W) -> std::io::Result<()> {
    let mut kv: Vec<(&str, f64)> = Vec::new();
    let r2 = match model {
        ModelFile::Platform {
            model: m,
            r_squared,
        } => {
            writeln!(w, "model_type=platform_poly")?;
            kv.extend([
                ("k2", m.k2),
                ("k1", m.k1),
                ("k0", m.k0),
                ("x_min", m.domain.0),
                ("x_max", m.domain.1),
            ]);
            *r_squared
        }
        ModelFile::Bubble {
            model: m,
            r_squared,
        } => {
            writeln!(w, "model_type=bubble_power")?;
            kv.extend([("a", m.a), ("b", m.b), ("c2", m.c2), ("p_max", m.p_max)]);
            *r_squared
        }
        ModelFile::Hertz(h) => {
            writeln!(w, "model_type=hertz")?;
            kv.extend([("e_star", h.e_star), ("radius", h.radius)]);
            None
        }
    };
    if let Some(r2) = r2 {
        kv.push(("r_squared", r2));
    }
    for (k, v) in kv {
        writeln!(w, "{k}={}", num(v))?;
    }
    Ok(())
}

pub fn read_model(text: &str) -> Result<ModelFile> {
    let mut kv = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::ModelFile(format!("line {}: expected key=value", i + 1)))?;
        kv.insert(k.trim().to_string(), (i + 1, v.trim().to_string()));
    }
    let get = |key: &str| -> Result<f64> {
        let (line, v) = kv
            .get(key)
            .ok_or_else(|| Error::ModelFile(format!("missing key {key}")))?;
        parse_f64(v, *line)
            .map_err(|_| Error::ModelFile(format!("line {line}: bad number for {key}")))
    };
    let opt = |key: &str| -> Result<Option<f64>> {
        if kv.contains_key(key) {
            get(key).map(Some)
        } else {
            Ok(None)
        }
    };
    let model_type = kv
        .get("model_type")
        .map(|(_, v)| v.as_str())
        .ok_or_else(|| Error::ModelFile("missing model_type".into()))?;
    match model_type {
        "platform_poly" => Ok(ModelFile::Platform {
            model: PlatformModel {
                k2: get("k2")?,
                k1: get("k1")?,
                k0: get("k0")?,
                domain: (opt("x_min")?.unwrap_or(0.0), opt("x_max")?.unwrap_or(10.0)),
            },
            r_squared: opt("r_squared")?,
        }),
        "bubble_power" => Ok(ModelFile::Bubble {
            model: BubbleModel {
                a: get("a")?,
                b: get("b")?,
                c2: get("c2")?,
                p_max: opt("p_max")?.unwrap_or(41.0),
            },
            r_squared: opt("r_squared")?,
        }),
        "hertz" => Ok(ModelFile::Hertz(HertzParams {
            e_star: get("e_star")?,
            radius: opt("radius")?.unwrap_or(7.5),
        })),
        other => Err(Error::ModelFile(format!("unknown model_type {other:?}"))),
    }
}

pub fn load_model_file(path: impl AsRef<Path>) -> Result<ModelFile> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    read_model(&text)
}

pub fn save_model_file(model: &ModelFile, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut buf = Vec::new();
    write_model(model, &mut buf).map_err(|e| Error::io(path, e))?;
    fs::write(path, buf).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn model_round_trip() {
        let files = [
            ModelFile::Platform {
                model: PlatformModel::new(0.01, 0.858, 1e-17),
                r_squared: Some(0.99871),
            },
            ModelFile::Bubble {
                model: BubbleModel::new(0.013_604_1, 1.2, 0.0),
                r_squared: None,
            },
            ModelFile::Hertz(HertzParams {
                e_star: 0.113_666_8,
                radius: 7.5,
            }),
        ];
        for f in files {
            let mut buf = Vec::new();
            write_model(&f, &mut buf).unwrap();
            assert_eq!(read_model(std::str::from_utf8(&buf).unwrap()).unwrap(), f);
        }
    }

    #[test]
    fn model_errors() {
        assert!(read_model("k2=1\n").is_err());
        assert!(read_model("model_type=platform_poly\nk2=1\nk1=2\n").is_err());
        assert!(read_model("model_type=spline\n").is_err());
        assert!(read_model("model_type=hertz\ne_star=abc\n").is_err());
    }

    #[test]
    fn samples_parse() {
        let (k, s) = read_samples("P_kpa,F_N\n0,0\n10,0.2\n").unwrap();
        assert_eq!(k, SampleKind::Bubble);
        assert_eq!(s, vec![(0.0, 0.0), (10.0, 0.2)]);
        assert!(read_samples("").is_err());
        assert!(read_samples("x_mm,F_N\n1,2,3\n").is_err());
        assert!(read_samples("foo,bar\n").is_err());
    }
}
