mod common;

use std::io::{Read, Write};
use std::net::TcpStream;
use std::sync::Arc;

use common::{call, populate, rendered_csv, service, start, step_test, TOKEN};
use phn_core::hse::UserProfile;
use phn_core::ingest::{parse_stream, segment_exercise, SessionRules};
use phn_core::time::local_date;
use phn_core::trainload::{loads_csv, update_loads, DailySeries, LoadWindows, Workout};
use phn_service::api::WhatIf;
use phn_service::store::read_log;
use phn_service::{Request, Store};

fn profile_json() -> String {
    serde_json::to_string(&UserProfile::example()).unwrap()
}

#[test]
fn auth_and_routing_errors() {
    let svc = service(Store::in_memory());
    let no_token = svc.handle(&Request::new("GET", "/users/a/state").header("x-user-id", "a"));
    assert_eq!(no_token.status, 401);
    assert_eq!(call(&svc, "b", "GET", "/users/a/state", "").status, 403);
    assert_eq!(call(&svc, "a", "GET", "/users/a/state", "").status, 404);
    assert_eq!(call(&svc, "a", "GET", "/nowhere", "").status, 404);
    assert_eq!(call(&svc, "a.b", "GET", "/users/a.b/state", "").status, 400);
    assert_eq!(call(&svc, "a", "PUT", "/users/a/profile", "{not json").status, 400);
    assert_eq!(call(&svc, "a", "DELETE", "/users/a/profile", "").status, 405);
    let mut bad = UserProfile::example();
    bad.age = 12;
    let r = call(&svc, "a", "PUT", "/users/a/profile", &serde_json::to_string(&bad).unwrap());
    assert_eq!(r.status, 422);
    assert!(r.json_body()["error"].as_str().unwrap().contains("age"));
}

#[test]
fn state_before_data_is_insufficient() {
    let svc = service(Store::in_memory());
    assert_eq!(call(&svc, "a", "PUT", "/users/a/profile", &profile_json()).status, 200);
    let r = call(&svc, "a", "GET", "/users/a/state", "");
    assert_eq!(r.status, 422);
    assert!(r.json_body()["error"].as_str().unwrap().starts_with("insufficient data"));
    assert_eq!(call(&svc, "a", "GET", "/users/a/routes", "").status, 422);
    assert_eq!(call(&svc, "a", "GET", "/users/a/guidance", "").status, 400);
    assert_eq!(call(&svc, "a", "GET", "/users/a/loads.csv", "").body, "date,trimp,ctl,atl,tsb\n");
}

#[test]
fn loads_csv_matches_library() {
    let svc = service(Store::in_memory());
    let profile = UserProfile::example();
    call(&svc, "a", "PUT", "/users/a/profile", &profile_json());
    let csv = rendered_csv(&profile, start(), 30);
    let r = call(&svc, "a", "POST", "/users/a/samples", &csv);
    assert_eq!(r.status, 200, "{}", r.body);
    assert_eq!(r.json_body()["rejected"], 0);

    let samples = parse_stream(csv.lines()).samples;
    let workouts: Vec<Workout> = segment_exercise(&samples, profile.max_hr(), &SessionRules::default())
        .into_iter()
        .map(|s| Workout { date: local_date(s.start, 0), zone_minutes: s.zone_minutes })
        .collect();
    // First sample is the night before the first day.
    let first = start() - chrono::Duration::days(1);
    let series = DailySeries::from_workouts(first, start() + chrono::Duration::days(30), &workouts);
    let expected = loads_csv(&update_loads(&series, LoadWindows::default()));
    let got = call(&svc, "a", "GET", "/users/a/loads.csv", "");
    assert_eq!(got.content_type, "text/csv");
    assert_eq!(got.body, expected);
}

#[test]
fn samples_are_idempotent_and_conflicts_rejected() {
    let svc = service(Store::in_memory());
    call(&svc, "a", "PUT", "/users/a/profile", &profile_json());
    let csv = rendered_csv(&UserProfile::example(), start(), 2);
    let first = call(&svc, "a", "POST", "/users/a/samples", &csv).json_body();
    let again = call(&svc, "a", "POST", "/users/a/samples", &csv).json_body();
    assert_eq!(again["accepted"], 0);
    assert_eq!(again["duplicates"], first["accepted"]);
    assert_eq!(again["seq"], first["seq"]);

    let line = csv.lines().next().unwrap();
    let changed = line.replacen(",64,", ",99,", 1);
    assert_ne!(line, changed);
    assert_eq!(call(&svc, "a", "POST", "/users/a/samples", &changed).status, 409);

    let junk = "garbage\n2021-03-05T10:00Z,70,0,still,none\n";
    let r = call(&svc, "a", "POST", "/users/a/samples", junk).json_body();
    assert_eq!((r["accepted"].as_u64(), r["rejected"].as_u64()), (Some(1), Some(1)));
    assert_eq!(r["rejects"][0]["line"], 1);
}

#[test]
fn stale_if_match_conflicts() {
    let svc = service(Store::in_memory());
    call(&svc, "a", "PUT", "/users/a/profile", &profile_json());
    let w = r#"{"date":"2021-03-01","zone_minutes":{"low":0,"medium":20,"high":0}}"#;
    let req = |seq: &str| Request::new("POST", "/users/a/workouts").auth(TOKEN, "a").header("if-match", seq).body(w);
    assert_eq!(svc.handle(&req("1")).status, 200);
    assert_eq!(svc.handle(&req("1")).status, 409);
    assert_eq!(svc.handle(&req("2")).status, 200);
}

#[test]
fn full_flow() {
    let svc = service(Store::in_memory());
    populate(&svc, "a");
    let state = call(&svc, "a", "GET", "/users/a/state", "").json_body();
    assert_eq!(state["state"]["resting_hr"], 60.0);
    assert!(state["location"]["node"].is_u64());

    let routes = call(&svc, "a", "GET", "/users/a/routes", "").json_body();
    assert_eq!(routes["goal"], "ideal");
    let list = routes["routes"].as_array().unwrap();
    assert!(!list.is_empty() && list.len() <= 3);
    assert_eq!(list[0]["rois"].as_array().unwrap().last().unwrap(), "ideal");

    let g = call(&svc, "a", "GET", "/users/a/guidance?date=2021-03-22", "").json_body();
    assert_eq!(g["plan"]["week_start"], "2021-03-22");
    assert!(g["guidance"]["trimp_d"].as_f64().unwrap() > 0.0);
    assert_eq!(g["guidance"]["options"].as_array().unwrap().len(), 3);

    let space = call(&svc, "a", "GET", "/users/a/statespace", "").json_body();
    assert_eq!(space["nodes"].as_array().unwrap().len(), 400);

    assert_eq!(call(&svc, "a", "POST", "/users/a/goal", r#"{"roi":"atlantis"}"#).status, 422);
    let other = serde_json::to_string(&step_test(start(), 120.0)).unwrap();
    assert_eq!(call(&svc, "a", "POST", "/users/a/tests", &other).status, 409);
    let bad = r#"{"kind":"step","date":"2021-03-02","recovery_hr_trace":[100]}"#;
    assert_eq!(call(&svc, "a", "POST", "/users/a/tests", bad).status, 422);
}

#[test]
fn whatif_zero_plan_is_current_trajectory() {
    let svc = service(Store::in_memory());
    populate(&svc, "a");
    let zero: WhatIf = serde_json::from_str(&call(&svc, "a", "POST", "/whatif", r#"{"plan":[0,0,0,0,0,0,0]}"#).body).unwrap();
    assert_eq!(zero.projected, zero.baseline);

    let loads = call(&svc, "a", "GET", "/users/a/loads.csv", "").body;
    let last_ctl: f64 = loads.lines().last().unwrap().split(',').nth(2).unwrap().parse().unwrap();
    assert!(zero.baseline[0].ctl < last_ctl, "resting lowers CTL");

    let hard: WhatIf = serde_json::from_str(&call(&svc, "a", "POST", "/whatif", r#"{"plan":[150,150,150]}"#).body).unwrap();
    assert!(hard.projected[2].tsb < hard.baseline[2].tsb);
    assert_eq!(call(&svc, "a", "POST", "/whatif", r#"{"plan":[-1]}"#).status, 422);
    assert_eq!(call(&svc, "a", "GET", "/whatif", "").status, 405);
}

#[test]
fn concurrent_writes_keep_log_ordered() {
    let dir = tempfile::tempdir().unwrap();
    let svc = Arc::new(service(Store::open(dir.path()).unwrap()));
    call(&svc, "a", "PUT", "/users/a/profile", &profile_json());
    std::thread::scope(|s| {
        for t in 0..8 {
            let svc = svc.clone();
            s.spawn(move || {
                for i in 0..10 {
                    let w = format!(r#"{{"date":"2021-03-{:02}","zone_minutes":{{"low":{t},"medium":{i},"high":0}}}}"#, i + 1);
                    assert_eq!(call(&svc, "a", "POST", "/users/a/workouts", &w).status, 200);
                }
            });
        }
    });
    let events = read_log(&dir.path().join("a.ndjson")).unwrap();
    assert_eq!(events.len(), 81);
    for (i, pair) in events.windows(2).enumerate() {
        assert_eq!(pair[1].seq, pair[0].seq + 1, "at {i}");
        assert!(pair[1].ts >= pair[0].ts);
    }
}

#[test]
fn replay_reproduces_gets() {
    let dir = tempfile::tempdir().unwrap();
    let before = {
        let svc = service(Store::open(dir.path()).unwrap());
        populate(&svc, "a");
        common::all_gets(&svc, "a")
    };
    assert!(before.iter().all(|(t, status, _)| *status == 200 || t.contains("2021-03-10")), "{before:?}");
    let svc = service(Store::open(dir.path()).unwrap());
    assert_eq!(common::all_gets(&svc, "a"), before);
}

#[test]
fn over_http() {
    let svc = Arc::new(service(Store::in_memory()));
    let rt = tokio::runtime::Runtime::new().unwrap();
    let listener = rt.block_on(tokio::net::TcpListener::bind("127.0.0.1:0")).unwrap();
    let addr = listener.local_addr().unwrap();
    rt.spawn(async move { axum::serve(listener, phn_service::http::router(svc)).await.unwrap() });

    let send = |raw: String| {
        let mut s = TcpStream::connect(addr).unwrap();
        s.write_all(raw.as_bytes()).unwrap();
        let mut out = String::new();
        s.read_to_string(&mut out).unwrap();
        out
    };
    let body = profile_json();
    let put = send(format!(
        "PUT /users/h/profile HTTP/1.1\r\nHost: x\r\nAuthorization: Bearer {TOKEN}\r\nX-User-Id: h\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
        body.len()
    ));
    assert!(put.starts_with("HTTP/1.1 200"), "{put}");
    let get = send(format!(
        "GET /users/h/loads.csv HTTP/1.1\r\nHost: x\r\nAuthorization: Bearer {TOKEN}\r\nX-User-Id: h\r\nConnection: close\r\n\r\n"
    ));
    assert!(get.starts_with("HTTP/1.1 200"));
    assert!(get.contains("text/csv") && get.ends_with("date,trimp,ctl,atl,tsb\n"));
    let denied = send("GET /users/h/state HTTP/1.1\r\nHost: x\r\nConnection: close\r\n\r\n".into());
    assert!(denied.starts_with("HTTP/1.1 401"));
}
