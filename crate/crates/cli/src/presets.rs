//! Bundled configurations reproducing the reference operating points of the
//! europium memory; each doubles as documentation of the config format.

pub const PRESETS: &[(&str, &str)] = &[
    ("fig2a", include_str!("../presets/fig2a.toml")),
    ("fig2b-sweep", include_str!("../presets/fig2b-sweep.toml")),
    ("spinwave-paper", include_str!("../presets/spinwave-paper.toml")),
    ("cavity-linewidth", include_str!("../presets/cavity-linewidth.toml")),
    ("design-d12", include_str!("../presets/design-d12.toml")),
];

pub fn find(name: &str) -> Option<&'static str> {
    PRESETS
        .iter()
        .find(|(preset, _)| *preset == name)
        .map(|(_, text)| *text)
}

pub fn names() -> Vec<&'static str> {
    PRESETS.iter().map(|(name, _)| *name).collect()
}
