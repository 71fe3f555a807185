//! Preset configurations for the regret figures.

/// `(name, TOML text)` for every preset, in output order.
pub const PRESETS: &[(&str, &str)] = &[
    ("fig3a", include_str!("../presets/fig3a.toml")),
    ("fig3b", include_str!("../presets/fig3b.toml")),
    ("fig3c", include_str!("../presets/fig3c.toml")),
    ("fig3d", include_str!("../presets/fig3d.toml")),
    ("fig4_normal", include_str!("../presets/fig4_normal.toml")),
    ("fig4_multimodal", include_str!("../presets/fig4_multimodal.toml")),
    ("fig4_lognormal", include_str!("../presets/fig4_lognormal.toml")),
];
