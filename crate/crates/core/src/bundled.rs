//! Reference instances shipped with the crate.
//!
//! The CLI falls back to these when an instance path does not exist, so
//! `dcs-synth exact table1_A20_S3.json` works from any directory.

const FILES: &[(&str, &str)] = &[
    ("table1_A1_S3.json", include_str!("../data/table1_A1_S3.json")),
    ("table1_A5_S3.json", include_str!("../data/table1_A5_S3.json")),
    ("table1_A10_S3.json", include_str!("../data/table1_A10_S3.json")),
    ("table1_A15_S3.json", include_str!("../data/table1_A15_S3.json")),
    ("table1_A20_S3.json", include_str!("../data/table1_A20_S3.json")),
    ("table1_A25_S3.json", include_str!("../data/table1_A25_S3.json")),
    ("table1_A30_S3.json", include_str!("../data/table1_A30_S3.json")),
    ("table1_A35_S3.json", include_str!("../data/table1_A35_S3.json")),
    ("table1_A40_S3.json", include_str!("../data/table1_A40_S3.json")),
    ("table1_A45_S3.json", include_str!("../data/table1_A45_S3.json")),
    ("table1_A50_S3.json", include_str!("../data/table1_A50_S3.json")),
    ("table1_A55_S3.json", include_str!("../data/table1_A55_S3.json")),
    ("table1_A60_S3.json", include_str!("../data/table1_A60_S3.json")),
    ("table1_A65_S3.json", include_str!("../data/table1_A65_S3.json")),
    ("table1_A70_S3.json", include_str!("../data/table1_A70_S3.json")),
    ("table1_A75_S3.json", include_str!("../data/table1_A75_S3.json")),
    ("table1_A80_S3.json", include_str!("../data/table1_A80_S3.json")),
    ("table1_A85_S3.json", include_str!("../data/table1_A85_S3.json")),
    ("table1_A90_S3.json", include_str!("../data/table1_A90_S3.json")),
    ("table1_A95_S3.json", include_str!("../data/table1_A95_S3.json")),
    ("table1_A180_S3.json", include_str!("../data/table1_A180_S3.json")),
    ("table1_A180_S4.json", include_str!("../data/table1_A180_S4.json")),
    ("table1_A500_S4.json", include_str!("../data/table1_A500_S4.json")),
    ("table3_ims.json", include_str!("../data/table3_ims.json")),
];

/// File names of every bundled instance.
pub fn names() -> impl Iterator<Item = &'static str> {
    FILES.iter().map(|(n, _)| *n)
}

/// Contents of a bundled instance. `table1_A<n>.json` is accepted as a short
/// form of `table1_A<n>_S3.json`.
pub fn lookup(name: &str) -> Option<&'static str> {
    let find = |n: &str| FILES.iter().find(|(f, _)| *f == n).map(|(_, t)| *t);
    find(name).or_else(|| {
        let stem = name.strip_suffix(".json")?;
        if stem.starts_with("table1_A") && !stem.contains("_S") {
            find(&format!("{stem}_S3.json"))
        } else {
            None
        }
    })
}
