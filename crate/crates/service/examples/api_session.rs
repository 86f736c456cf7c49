//! Drives the HTTP API in process: profile, three weeks of samples, a step
//! test, a goal, then every read endpoint.
//!
//!     cargo run -p phn-service --example api_session

use chrono::{Duration, NaiveDate};
use phn_core::hse::{FitnessTest, KnowledgeBank, UserProfile};
use phn_core::ingest::serialize_samples;
use phn_core::sim::{render_night, render_workout};
use phn_core::trainload::HrZone;
use phn_service::{Request, Service, Store};

fn main() {
    let svc = Service::new(Store::in_memory(), KnowledgeBank::builtin(), "secret");
    let send = |method: &str, target: &str, body: String| {
        let r = svc.handle(&Request::new(method, target).auth("secret", "ann").body(body));
        println!("{method} {target} -> {}", r.status);
        r
    };

    let profile = UserProfile::example();
    send("PUT", "/users/ann/profile", serde_json::to_string(&profile).unwrap());

    let day0 = NaiveDate::from_ymd_opt(2021, 3, 1).unwrap();
    let mut samples = Vec::new();
    for d in 0..21 {
        let date = day0 + Duration::days(d);
        samples.extend(render_night(date, 72.0, 0));
        if d % 7 != 6 {
            samples.extend(render_workout(date, HrZone::Medium, 30, profile.max_hr(), 0));
        }
    }
    let r = send("POST", "/users/ann/samples", serialize_samples(&samples).join("\n"));
    println!("  {}", r.body.trim_end());

    let test = FitnessTest::Step { date: day0, recovery_hr_trace: vec![170.0; 60] };
    send("POST", "/users/ann/tests", serde_json::to_string(&test).unwrap());
    send("POST", "/users/ann/goal", r#"{"roi":"ideal","k":2}"#.into());

    for target in ["/users/ann/state", "/users/ann/routes", "/users/ann/guidance?date=2021-03-22"] {
        let r = send("GET", target, String::new());
        println!("  {}", r.body.trim_end());
    }
    let loads = send("GET", "/users/ann/loads.csv", String::new());
    for line in loads.body.lines().rev().take(3) {
        println!("  {line}");
    }
    let w = send("POST", "/whatif", r#"{"plan":[60,60,0,60]}"#.into());
    println!("  {}", w.body.trim_end());
}
