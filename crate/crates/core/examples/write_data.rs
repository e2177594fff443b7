//! Regenerates the bundled chart and function files under `data/`.

use std::path::Path;

use umbilic::presets;

fn main() -> std::io::Result<()> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    std::fs::create_dir_all(&dir)?;
    for name in presets::THETA_PRESETS {
        let chart = presets::chart(name).expect("preset");
        let file = presets::chart_file(name).expect("file name");
        std::fs::write(dir.join(file), chart.to_json_pretty() + "\n")?;
        println!("wrote data/{file}");
    }
    for name in presets::WARP_PRESETS {
        let f = presets::warp(name).expect("preset");
        std::fs::write(dir.join(format!("f_{name}.json")), f.to_json_pretty() + "\n")?;
        println!("wrote data/f_{name}.json");
    }
    Ok(())
}
