//! Cross-validated responder classification on a synthetic cohort,
//! comparing the basic feature set against the first-week features.
//!
//!     cargo run --release --example responders -- [n] [seed]

use phn_core::responder::{cross_validate, synthetic_cohort, Dataset, FeatureMode, HyperParams};

fn main() {
    let mut args = std::env::args().skip(1);
    let n: usize = args.next().map_or(600, |s| s.parse().expect("n"));
    let seed: u64 = args.next().map_or(1, |s| s.parse().expect("seed"));
    let data = Dataset { records: synthetic_cohort(n, seed) };
    let y = data.y();
    for mode in [FeatureMode::Basic, FeatureMode::Week1] {
        let r = cross_validate(&data.x(mode), &y, 10, 1, seed, HyperParams::default()).unwrap();
        println!("{mode:?}: weighted f1 {:.3} +- {:.3}", r.f1, r.f1_sd);
        print!("{}", r.pooled.table());
    }
}
