//! Prints the detection-accuracy table: three synthetic layouts, four
//! detectors, averaged over five generator seeds.
//!
//! ```text
//! cargo run --release -p pigmil --example detection_table
//! ```

use pigmil::bench::{
    detect_with_method, generate, tpi_accuracy, SynthKind, SynthSpec, TpiMethod,
};
use pigmil::PigmilConfig;

fn main() {
    let cfg = PigmilConfig::default();
    let seeds: Vec<u64> = (1..=5).collect();
    let methods = [
        TpiMethod::Pigmil,
        TpiMethod::KdeMin,
        TpiMethod::Kde,
        TpiMethod::KdeMax,
    ];
    println!(
        "{:10} {:>8} {:>8} {:>8} {:>8}",
        "dataset", "pigmil", "kde-min", "kde", "kde-max"
    );
    for kind in [SynthKind::Basic, SynthKind::Rhombus, SynthKind::Ring] {
        let mut row = Vec::new();
        for method in methods {
            let mut total = 0.0;
            for &seed in &seeds {
                let d = generate(&SynthSpec::new(kind, seed)).expect("generate");
                let pcp = detect_with_method(&d, method, &cfg, seed).expect("detect");
                total += tpi_accuracy(&pcp, &d).expect("score");
            }
            row.push(total / seeds.len() as f64);
        }
        println!(
            "{:10} {:>8.1} {:>8.1} {:>8.1} {:>8.1}",
            kind.name(),
            row[0],
            row[1],
            row[2],
            row[3]
        );
    }
}
