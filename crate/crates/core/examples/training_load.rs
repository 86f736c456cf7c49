//! Daily TRIMP values from stdin (one per line, blank for rest) to the CTL,
//! ATL and TSB table with readiness zones.
//!
//!     seq 1 60 | awk '{print ($1 % 7 ? 40 : 0)}' | cargo run --example training_load

use std::io::BufRead;

use chrono::NaiveDate;
use phn_core::trainload::{ramp_ok, tsb_zone, update_loads, DailySeries, LoadWindows};

fn main() {
    let values: Vec<f64> = std::io::stdin()
        .lock()
        .lines()
        .map(|l| l.unwrap().trim().parse().unwrap_or(0.0))
        .collect();
    let series = DailySeries::new(NaiveDate::from_ymd_opt(2021, 1, 4).unwrap(), values);
    let states = update_loads(&series, LoadWindows::default());
    let ctl: Vec<f64> = states.iter().map(|s| s.ctl).collect();
    println!("date,trimp,ctl,atl,tsb,zone,ramp");
    for (t, s) in states.iter().enumerate() {
        let ramp = ramp_ok(&ctl, t, 5.0).increase.map_or(String::new(), |r| format!("{r:.2}"));
        println!(
            "{},{},{:.2},{:.2},{:.2},{},{ramp}",
            s.date, s.trimp_day, s.ctl, s.atl, s.tsb, tsb_zone(s.tsb).as_str()
        );
    }
}
