//! Example job files shipped with the binary.

const ENTRIES: &[(&str, &str)] = &[
    ("catalan", include_str!("../catalog/catalan.json")),
    ("density-shift-set", include_str!("../catalog/density-shift-set.json")),
    ("dml-finite-doubling", include_str!("../catalog/dml-finite-doubling.json")),
    ("dml-finite-translation", include_str!("../catalog/dml-finite-translation.json")),
    ("example-5-2-commuting", include_str!("../catalog/example-5-2-commuting.json")),
    ("example-5-2-off-ray", include_str!("../catalog/example-5-2-off-ray.json")),
    ("factorial", include_str!("../catalog/factorial.json")),
    ("fibonacci", include_str!("../catalog/fibonacci.json")),
    ("gap-doubling", include_str!("../catalog/gap-doubling.json")),
    ("gap-translation", include_str!("../catalog/gap-translation.json")),
    ("orbit-identity", include_str!("../catalog/orbit-identity.json")),
    ("period-3", include_str!("../catalog/period-3.json")),
    ("schanuel-p1", include_str!("../catalog/schanuel-p1.json")),
    ("schanuel-p2", include_str!("../catalog/schanuel-p2.json")),
    ("singular", include_str!("../catalog/singular.json")),
    ("weak-dml-alternation", include_str!("../catalog/weak-dml-alternation.json")),
];

/// Names of the bundled example jobs, sorted.
pub fn list_catalog() -> Vec<&'static str> {
    ENTRIES.iter().map(|(n, _)| *n).collect()
}

/// JSON text of a bundled job.
pub fn catalog_job(name: &str) -> Option<&'static str> {
    ENTRIES.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}
