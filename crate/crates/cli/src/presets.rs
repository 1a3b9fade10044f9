//! Configurations compiled into the binary.

pub const NAMES: &[&str] = &["paper-table1", "two-coil-demo", "clc-demo"];

pub fn get(name: &str) -> Option<&'static str> {
    match name {
        "paper-table1" => Some(include_str!("../presets/paper-table1.json")),
        "two-coil-demo" => Some(include_str!("../presets/two-coil-demo.json")),
        "clc-demo" => Some(include_str!("../presets/clc-demo.json")),
        _ => None,
    }
}
