//! Regenerates the committed synthetic panel. Run from the workspace
//! root:
//!
//! ```text
//! cargo run -p hdlasso --example make_fixture -- fixtures/nowcast
//! ```

use std::path::Path;

fn main() {
    let dir = std::env::args().nth(1).expect("usage: make_fixture <dir>");
    std::fs::create_dir_all(&dir).expect("create output dir");
    let specs =
        hdlasso::mixedfreq::write_fixture(Path::new(&dir), 2026, 80).expect("write fixture");
    for s in &specs {
        println!("{:9} {:?} {}", s.name, s.frequency, s.file.display());
    }
}
