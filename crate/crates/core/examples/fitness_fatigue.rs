//! Response of the virtual user's physiology to one training block,
//! stepped through the state-space form day by day.
//!
//!     cargo run --example fitness_fatigue -- [block_trimp] [block_days]

use nalgebra::DVector;
use phn_core::sim::Physiology;

fn main() {
    let mut args = std::env::args().skip(1);
    let load: f64 = args.next().map_or(60.0, |s| s.parse().expect("trimp"));
    let block: usize = args.next().map_or(14, |s| s.parse().expect("days"));

    let p = Physiology::default();
    let sys = p.system();
    let mut x = DVector::zeros(sys.states());
    println!("day,trimp,fitness,fatigue,resting_hr,vo2");
    for day in 0..90 {
        let u = if day < block { load } else { 0.0 };
        let (next, _) = sys.step(&x, &DVector::from_element(1, u)).unwrap();
        x = next;
        let o = p.observe(&x);
        println!("{day},{u},{:.2},{:.2},{:.2},{:.2}", o.fitness, o.fatigue, o.resting_hr, o.vo2);
    }
}
