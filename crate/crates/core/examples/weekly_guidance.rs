//! Plans a week for a user with a steady training history and prints the
//! plan and each day's exercise options.
//!
//!     cargo run --example weekly_guidance -- [daily_trimp] [history_days]

use chrono::{Duration, NaiveDate};
use phn_core::guidance::{Controller, Rules};
use phn_core::trainload::{DailySeries, HrZone};
use phn_core::UserProfile;

fn main() {
    let mut args = std::env::args().skip(1);
    let daily: f64 = args.next().map_or(40.0, |s| s.parse().expect("daily trimp"));
    let days: usize = args.next().map_or(56, |s| s.parse().expect("days"));

    let start = NaiveDate::from_ymd_opt(2021, 3, 1).unwrap();
    let history = DailySeries::new(start, (0..days).map(|d| if d % 7 == 6 { 0.0 } else { daily }).collect());
    let controller = Controller::new(Rules::default(), UserProfile::example().max_hr());
    let monday = start + Duration::days(days as i64);

    let (plan, _) = controller.guidance_for(&history, monday).unwrap();
    println!(
        "week {}: candidate {:.1}, planned {:.1}{}{}",
        plan.week_start,
        plan.candidate_w,
        plan.trimp_w,
        if plan.ramp_limited { ", ramp limited" } else { "" },
        if plan.tsb_limited { ", tsb limited" } else { "" },
    );
    // Assume each day's guidance is followed at medium intensity.
    let mut h = history.clone();
    for d in 0..7 {
        let today = monday + Duration::days(d);
        let (_, g) = controller.guidance_for(&h, today).unwrap();
        let opts: Vec<String> = g
            .options
            .iter()
            .map(|t| format!("{} {} min @ {}-{}", t.intensity.as_str(), t.minutes, t.hr_band.0, t.hr_band.1))
            .collect();
        println!("{today} {:>6.1}  {}", g.trimp_d, if opts.is_empty() { "rest".into() } else { opts.join(" | ") });
        let done = g.option(HrZone::Medium).map_or(0.0, |t| t.minutes as f64 * 2.0);
        h.values.push(done);
    }
}
