//! Writes the documented model files for the docs directory.
use plectic_core::catalog;
fn main() {
    let out = std::env::args().nth(1).unwrap_or_else(|| "docs/models".into());
    for name in ["E4_torus4", "E1_symplectic"] {
        let m = catalog::builtin(name).unwrap();
        let path = format!("{out}/{}.json", name.to_lowercase());
        std::fs::write(&path, catalog::to_json(&m)).unwrap();
        println!("wrote {path}");
    }
}
