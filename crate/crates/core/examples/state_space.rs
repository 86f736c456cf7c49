//! Prints the personal state graph of the example profile as a grid of
//! ROI indices, risk rising upwards and VO2Max to the right.
//!
//!     cargo run --example state_space -- [--json]

use phn_core::hse::{KnowledgeBank, UserProfile};
use phn_core::statespace::personal_graph;

fn main() {
    let graph = personal_graph(&UserProfile::example(), &KnowledgeBank::builtin()).unwrap();
    if std::env::args().any(|a| a == "--json") {
        println!("{}", serde_json::to_string(&graph.export()).unwrap());
        return;
    }
    for d in &graph.dimensions {
        println!("{}: [{:.1}, {:.1}] in {} buckets", d.name(), d.min, d.max, d.bucket_count());
    }
    println!("{} nodes, {} edges", graph.node_count(), graph.edge_count());
    for (i, roi) in graph.rois.iter().enumerate() {
        println!("{i} = {}", roi.label);
    }
    let (rows, cols) = (graph.shape[0], graph.shape[1]);
    for r in (0..rows).rev() {
        let line: String = (0..cols)
            .map(|c| {
                let n = graph.node_id(&[r, c]).unwrap();
                graph.nodes[n].roi.map_or('.', |i| char::from(b'0' + i as u8))
            })
            .collect();
        println!("{line}");
    }
}
