//! Scenarios shipped with the tool, addressable by name.

pub const NAMES: [&str; 5] = ["fig2", "fig3", "rabi1", "stimulated_scaling", "overlap_sec4"];

const TEXTS: [&str; 5] = [
    include_str!("../../../scenarios/fig2.scenario"),
    include_str!("../../../scenarios/fig3.scenario"),
    include_str!("../../../scenarios/rabi1.scenario"),
    include_str!("../../../scenarios/stimulated_scaling.scenario"),
    include_str!("../../../scenarios/overlap_sec4.scenario"),
];

/// Accepts the bare name or the file name with its `.scenario` suffix.
pub fn lookup(name: &str) -> Option<&'static str> {
    let stem = name.strip_suffix(".scenario").unwrap_or(name);
    NAMES.iter().position(|n| *n == stem).map(|i| TEXTS[i])
}
