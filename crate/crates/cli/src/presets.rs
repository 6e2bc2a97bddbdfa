pub const NAMES: &[&str] = &["fig3", "fig4a", "fig4b", "fig5", "fig6", "fig7"];

pub fn get(name: &str) -> Option<&'static str> {
    Some(match name {
        "fig3" => include_str!("../presets/fig3.toml"),
        "fig4a" => include_str!("../presets/fig4a.toml"),
        "fig4b" => include_str!("../presets/fig4b.toml"),
        "fig5" => include_str!("../presets/fig5.toml"),
        "fig6" => include_str!("../presets/fig6.toml"),
        "fig7" => include_str!("../presets/fig7.toml"),
        _ => return None,
    })
}
