//! Scenarios compiled into the binary.

pub const BUNDLED: [(&str, &str); 4] = [
    ("paper-spinchain-s1", include_str!("../scenarios/paper-spinchain-s1.json")),
    ("paper-spinchain-s2", include_str!("../scenarios/paper-spinchain-s2.json")),
    ("paper-spinchain-s3", include_str!("../scenarios/paper-spinchain-s3.json")),
    ("paper-oscillator", include_str!("../scenarios/paper-oscillator.json")),
];

/// Looks up a bundled scenario by name, with or without the `.json` suffix.
pub fn bundled(name: &str) -> Option<&'static str> {
    let stem = name.strip_suffix(".json").unwrap_or(name);
    BUNDLED.iter().find(|(n, _)| *n == stem).map(|(_, text)| *text)
}
