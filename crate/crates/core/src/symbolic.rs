//! Recognition of the closed-form constants that show up in outputs, so that
//! JSON documents can carry an exact tag next to each double.

use std::collections::BTreeMap;

/// Values within this distance of a known constant are tagged.
pub const MATCH_TOL: f64 = 1e-12;

fn table() -> [(&'static str, f64); 21] {
    let s2 = 2.0_f64.sqrt();
    let s3 = 3.0_f64.sqrt();
    [
        ("0", 0.0),
        ("1", 1.0),
        ("1/2", 0.5),
        ("1/4", 0.25),
        ("1/3", 1.0 / 3.0),
        ("1/9", 1.0 / 9.0),
        ("8/9", 8.0 / 9.0),
        ("sqrt(2)/2", s2 / 2.0),
        ("sqrt(3)/2", s3 / 2.0),
        ("sqrt(3)/6", s3 / 6.0),
        ("1/sqrt(3)", 1.0 / s3),
        ("2*sqrt(2)/3", 2.0 * s2 / 3.0),
        ("sqrt(6)/3", 6.0_f64.sqrt() / 3.0),
        ("4*sqrt(2)/18", 4.0 * s2 / 18.0),
        ("7/18", 7.0 / 18.0),
        ("ln(2+sqrt(3))", (2.0 + s3).ln()),
        ("sqrt(2)", s2),
        ("4", 4.0),
        ("3*sqrt(6)", 3.0 * 6.0_f64.sqrt()),
        ("4*sqrt(2)-2*sqrt(3)", 4.0 * s2 - 2.0 * s3),
        ("2+4*sqrt(6)", 2.0 + 4.0 * 6.0_f64.sqrt()),
    ]
}

/// Exact tag for `x`, if it is one of the known constants up to sign.
pub fn recognize(x: f64) -> Option<String> {
    if !x.is_finite() {
        return None;
    }
    table()
        .iter()
        .find(|(_, v)| (x.abs() - v).abs() <= MATCH_TOL)
        .map(|(name, _)| {
            if x < 0.0 && *name != "0" {
                format!("-{name}")
            } else {
                (*name).to_string()
            }
        })
}

/// Tags for the recognizable values among named fields.
pub fn tags(fields: impl IntoIterator<Item = (String, f64)>) -> BTreeMap<String, String> {
    fields
        .into_iter()
        .filter_map(|(k, v)| recognize(v).map(|tag| (k, tag)))
        .collect()
}
