//! Estimates the health state of the example profile from a week of
//! rendered nights and a step test, then places it on the personal graph.
//!
//!     cargo run --example health_state -- [resting_hr] [recovery_hr]

use chrono::{Duration, NaiveDate};
use phn_core::hse::{estimate_health_state, FitnessTest, KnowledgeBank, UserProfile};
use phn_core::sim::render_night;
use phn_core::statespace::{locate, personal_graph};

fn main() {
    let mut args = std::env::args().skip(1);
    let rhr: f64 = args.next().map_or(62.0, |s| s.parse().expect("resting hr"));
    let recovery: f64 = args.next().map_or(140.0, |s| s.parse().expect("recovery hr"));

    let bank = KnowledgeBank::builtin();
    let profile = UserProfile::example();
    let day0 = NaiveDate::from_ymd_opt(2021, 3, 1).unwrap();
    let samples: Vec<_> = (0..7).flat_map(|d| render_night(day0 + Duration::days(d), rhr, 0)).collect();
    let tests = [FitnessTest::Step { date: day0, recovery_hr_trace: vec![recovery; 60] }];
    let as_of = day0 + Duration::days(6);

    let state = match estimate_health_state(&profile, &bank, &samples, &tests, as_of) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(1);
        }
    };
    println!("{}", serde_json::to_string_pretty(&state).unwrap());

    let graph = personal_graph(&profile, &bank).expect("builtin bank builds a graph");
    let at = locate(&state.coordinates(), &graph).expect("both coordinates present");
    let node = &graph.nodes[at.node];
    let roi = node.roi.map_or("none", |i| graph.rois[i].label.as_str());
    println!("node {} buckets {:?} roi {roi}{}", at.node, node.buckets, if at.clamped { " (clamped)" } else { "" });
}
