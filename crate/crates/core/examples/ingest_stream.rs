//! Parses a minute-level CSV stream and prints what ingestion makes of it:
//! rejects, data quality, exercise and sleep sessions, weekly features.
//!
//!     cargo run --example ingest_stream -- samples.csv
//!
//! Without an argument a synthetic week is rendered instead.

use chrono::NaiveDate;
use phn_core::ingest::{
    parse_stream, quality, segment_exercise, segment_sleep, serialize_samples, weekly_features, SessionRules, Span, Week,
};
use phn_core::sim::{render_night, render_workout};
use phn_core::time::local_date;
use phn_core::trainload::HrZone;
use phn_core::UserProfile;

fn synthetic(profile: &UserProfile) -> String {
    let start = NaiveDate::from_ymd_opt(2021, 3, 1).unwrap();
    let mut samples = Vec::new();
    for d in 0..7 {
        let date = start + chrono::Duration::days(d);
        samples.extend(render_night(date, 58.0, profile.timezone_offset_min));
        if d % 2 == 0 {
            samples.extend(render_workout(date, HrZone::Medium, 35, profile.max_hr(), profile.timezone_offset_min));
        }
    }
    serialize_samples(&samples).join("\n")
}

fn main() {
    let profile = UserProfile::example();
    let text = match std::env::args().nth(1) {
        Some(p) => std::fs::read_to_string(&p).expect("readable file"),
        None => synthetic(&profile),
    };
    let parsed = parse_stream(text.lines());
    if !parsed.rejects.is_empty() {
        eprint!("{}", parsed.rejects_report());
    }
    let samples = parsed.samples;
    let (Some(first), Some(last)) = (samples.first(), samples.last()) else {
        eprintln!("no samples");
        return;
    };
    let span = Span::new(first.ts, last.ts + chrono::Duration::minutes(1));
    let q = quality(&samples, span).expect("non-empty span");
    println!("{} samples, continuity {:.3}, accuracy {:.3}", samples.len(), q.continuity, q.accuracy);

    let rules = SessionRules::default();
    let sessions = segment_exercise(&samples, profile.max_hr(), &rules);
    let sleeps = segment_sleep(&samples, &rules);
    for s in &sessions {
        println!("exercise {} {} min, mean hr {:.0}", s.start, s.duration_min, s.mean_hr);
    }
    for s in &sleeps {
        println!("sleep {} -> {}, {} min deep, score {:.1}", s.start, s.end, s.stage_minutes.deep, s.sleep_score);
    }

    let tz = profile.timezone_offset_min;
    let mut week = Week::containing(local_date(first.ts, tz), tz);
    while week.utc_start() <= last.ts {
        let f = weekly_features(&sessions, &sleeps, &samples, week);
        println!("{}", serde_json::to_string(&f).unwrap());
        week = week.next();
    }
}
