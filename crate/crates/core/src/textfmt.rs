//! Small helpers shared by the CSV and key-value writers.

/// Shortest decimal representation that parses back to the same `f64`.
pub(crate) fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:?}")
    } else {
        x.to_string()
    }
}

pub(crate) fn parse_f64(field: &str, line: usize) -> crate::Result<f64> {
    field
        .trim()
        .parse::<f64>()
        .map_err(|_| crate::Error::Schema {
            line,
            msg: format!("not a number: {field:?}"),
        })
}
