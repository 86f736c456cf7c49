//! Runs the virtual user against the engine for twelve weeks and prints
//! the trace as CSV.
//!
//!     cargo run --example closed_loop -- [seed] [p_follow]

use phn_core::hse::{KnowledgeBank, UserProfile};
use phn_core::sim::{run_closed_loop, SimConfig, VirtualUser};

fn main() {
    let mut args = std::env::args().skip(1);
    let seed = args.next().map_or(7, |s| s.parse().expect("seed"));
    let p = args.next().map_or(0.8, |s| s.parse().expect("p_follow"));
    let user = VirtualUser::new(UserProfile::example()).with_p_follow(p);
    let config = SimConfig { seed, ..SimConfig::default() };
    let trace = run_closed_loop(&user, &KnowledgeBank::builtin(), &config).expect("simulation");
    print!("{}", trace.to_csv());
    if let Some(r) = &trace.route {
        eprintln!("route to {}: {} steps, {:.1} weeks", config.goal, r.edge_count(), r.total_cost_weeks);
    }
}
