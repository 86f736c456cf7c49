#![allow(dead_code)]

use chrono::{Duration, NaiveDate};
use phn_core::hse::{FitnessTest, UserProfile};
use phn_core::ingest::serialize_samples;
use phn_core::sim::{render_night, render_workout};
use phn_core::trainload::HrZone;
use phn_service::{Request, Response, Service, Store};

pub const TOKEN: &str = "test-token";

pub fn start() -> NaiveDate {
    NaiveDate::from_ymd_opt(2021, 3, 1).unwrap()
}

/// Nights every day and a medium workout of `20 + day % 3 * 5` minutes on
/// all but Sundays, as the CSV a device would upload.
pub fn rendered_csv(profile: &UserProfile, from: NaiveDate, days: i64) -> String {
    let mut samples = Vec::new();
    for d in 0..days {
        let date = from + Duration::days(d);
        samples.extend(render_night(date, 60.0, profile.timezone_offset_min));
        if d % 7 != 6 {
            let minutes = 20 + (d % 3) as u32 * 5;
            samples.extend(render_workout(date, HrZone::Medium, minutes, profile.max_hr(), profile.timezone_offset_min));
        }
    }
    serialize_samples(&samples).join("\n") + "\n"
}

pub fn step_test(date: NaiveDate, recovery_hr: f64) -> FitnessTest {
    FitnessTest::Step { date, recovery_hr_trace: vec![recovery_hr; 60] }
}

pub fn call(svc: &Service, user: &str, method: &str, target: &str, body: &str) -> Response {
    svc.handle(&Request::new(method, target).auth(TOKEN, user).body(body.as_bytes().to_vec()))
}

pub fn service(store: Store) -> Service {
    Service::new(store, phn_core::KnowledgeBank::builtin(), TOKEN)
}

/// Profile, three weeks of samples, a step test and a goal.
pub fn populate(svc: &Service, user: &str) {
    let profile = UserProfile::example();
    let ok = |r: Response| assert_eq!(r.status, 200, "{}", r.body);
    ok(call(svc, user, "PUT", &format!("/users/{user}/profile"), &serde_json::to_string(&profile).unwrap()));
    ok(call(svc, user, "POST", &format!("/users/{user}/samples"), &rendered_csv(&profile, start(), 21)));
    let test = serde_json::to_string(&step_test(start(), 150.0)).unwrap();
    ok(call(svc, user, "POST", &format!("/users/{user}/tests"), &test));
    ok(call(svc, user, "POST", &format!("/users/{user}/goal"), r#"{"roi":"ideal","k":3}"#));
    let w = r#"{"date":"2021-03-21","zone_minutes":{"low":30,"medium":0,"high":0}}"#;
    ok(call(svc, user, "POST", &format!("/users/{user}/workouts"), w));
}

/// Every GET the API offers for `user`, plus a what-if, as `(target, body)`.
pub fn all_gets(svc: &Service, user: &str) -> Vec<(String, u16, String)> {
    let targets = [
        format!("/users/{user}/profile"),
        format!("/users/{user}/state"),
        format!("/users/{user}/state?date=2021-03-10"),
        format!("/users/{user}/statespace"),
        format!("/users/{user}/routes"),
        format!("/users/{user}/guidance?date=2021-03-22"),
        format!("/users/{user}/guidance?date=2021-03-10"),
        format!("/users/{user}/loads.csv"),
    ];
    let mut out: Vec<(String, u16, String)> = targets
        .into_iter()
        .map(|t| {
            let r = call(svc, user, "GET", &t, "");
            (t, r.status, r.body)
        })
        .collect();
    let r = call(svc, user, "POST", "/whatif", r#"{"plan":[60,60,60,0,0,0,0]}"#);
    out.push(("/whatif".into(), r.status, r.body));
    out
}
