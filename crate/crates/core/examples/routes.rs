//! K cheapest routes from a node of the personal graph into an ROI.
//!
//!     cargo run --example routes -- [from_node] [roi] [k]

use phn_core::guidance::{plan_routes, Goal};
use phn_core::hse::{KnowledgeBank, UserProfile};
use phn_core::statespace::personal_graph;

fn main() {
    let mut args = std::env::args().skip(1);
    let from: usize = args.next().map_or(0, |s| s.parse().expect("node id"));
    let roi = args.next().unwrap_or_else(|| "ideal".into());
    let k: usize = args.next().map_or(3, |s| s.parse().expect("k"));

    let graph = personal_graph(&UserProfile::example(), &KnowledgeBank::builtin()).unwrap();
    let goal = Goal::roi(&graph, &roi).unwrap_or_else(|e| panic!("{e}"));
    match plan_routes(&graph, from, &goal, k) {
        Ok(routes) => {
            for (i, r) in routes.iter().enumerate() {
                println!("#{} {:.1} weeks over {} edges", i + 1, r.total_cost_weeks, r.edge_count());
                println!("   nodes  {:?}", r.nodes);
                println!("   inputs {}", r.input_labels.join(" "));
            }
        }
        Err(e) => eprintln!("{e}"),
    }
}
