//! Validates a knowledge bank and runs its embedded fixtures.
//!
//!     cargo run --example knowledge_bank -- [bank.json]
//!
//! With no argument the builtin bank is checked and written to stdout, a
//! starting point for a custom one.

use phn_core::hse::{KnowledgeBank, SCHEMA_VERSION};

fn main() {
    let (bank, dump) = match std::env::args().nth(1) {
        Some(p) => (KnowledgeBank::load(&p).unwrap_or_else(|e| panic!("{p}: {e}")), false),
        None => (KnowledgeBank::builtin(), true),
    };
    let failures = bank.check_fixtures();
    eprintln!("schema {SCHEMA_VERSION}, {} fixtures, {} failing", bank.fixtures.len(), failures.len());
    for f in &failures {
        eprintln!("  fixture {}: {}", f.index, f.message);
    }
    if dump {
        println!("{}", bank.to_json());
    }
    if !failures.is_empty() {
        std::process::exit(1);
    }
}
