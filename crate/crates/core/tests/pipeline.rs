use chrono::{Duration, NaiveDate};
use phn_core::guidance::{plan_routes, Controller, Goal, Rules};
use phn_core::hse::{estimate_health_state, FitnessTest, KnowledgeBank, UserProfile};
use phn_core::ingest::{parse_stream, segment_exercise, serialize_samples, SessionRules};
use phn_core::sim::{render_night, render_workout};
use phn_core::statespace::{locate, personal_graph};
use phn_core::time::local_date;
use phn_core::trainload::{trimp, update_loads, DailySeries, HrZone, Workout};

fn day0() -> NaiveDate {
    NaiveDate::from_ymd_opt(2021, 3, 1).unwrap()
}

/// Four weeks of 30-minute medium workouts, Sundays off, nights at `rhr`.
fn stream(profile: &UserProfile, rhr: f64) -> String {
    let mut s = Vec::new();
    for d in 0..28 {
        let date = day0() + Duration::days(d);
        s.extend(render_night(date, rhr, profile.timezone_offset_min));
        if d % 7 != 6 {
            s.extend(render_workout(date, HrZone::Medium, 30, profile.max_hr(), profile.timezone_offset_min));
        }
    }
    serialize_samples(&s).join("\n")
}

#[test]
fn csv_to_guidance() {
    let bank = KnowledgeBank::builtin();
    let profile = UserProfile::example();
    let parsed = parse_stream(stream(&profile, 72.0).lines());
    assert!(parsed.rejects.is_empty());

    let sessions = segment_exercise(&parsed.samples, profile.max_hr(), &SessionRules::default());
    assert_eq!(sessions.len(), 24);
    assert!(sessions.iter().all(|s| trimp(&s.zone_minutes) == 60.0));

    let tests = [FitnessTest::Step { date: day0(), recovery_hr_trace: vec![170.0; 60] }];
    let last = day0() + Duration::days(27);
    let state = estimate_health_state(&profile, &bank, &parsed.samples, &tests, last).unwrap();
    assert_eq!(state.resting_hr, 72.0);
    assert!(state.ascvd_risk_pct > state.ascvd_base_pct);

    let graph = personal_graph(&profile, &bank).unwrap();
    let at = locate(&state.coordinates(), &graph).unwrap();
    let goal = Goal::roi(&graph, "ideal").unwrap();
    let routes = plan_routes(&graph, at.node, &goal, 3).unwrap();
    assert!(goal.targets.contains(routes[0].nodes.last().unwrap()));
    assert!(routes.windows(2).all(|w| w[0].total_cost_weeks <= w[1].total_cost_weeks));

    let workouts: Vec<Workout> = sessions
        .iter()
        .map(|s| Workout { date: local_date(s.start, profile.timezone_offset_min), zone_minutes: s.zone_minutes })
        .collect();
    let history = DailySeries::from_workouts(day0(), last + Duration::days(1), &workouts);
    let loads = update_loads(&history, Rules::default().windows());
    assert_eq!(loads.len(), 28);

    let controller = Controller::new(Rules::default(), profile.max_hr());
    let (plan, today) = controller.guidance_for(&history, last + Duration::days(1)).unwrap();
    assert!(plan.trimp_w >= Rules::default().trimp_min || plan.floor_overridden || plan.scaled_down);
    assert_eq!(today.options.len(), 3);
    for t in &today.options {
        assert!(t.minutes as f64 * t.intensity.coefficient() >= today.trimp_d);
    }
}

#[test]
fn state_needs_three_nights() {
    let bank = KnowledgeBank::builtin();
    let profile = UserProfile::example();
    let two: Vec<_> = (0..2).flat_map(|d| render_night(day0() + Duration::days(d), 60.0, 0)).collect();
    let err = estimate_health_state(&profile, &bank, &two, &[], day0() + Duration::days(1)).unwrap_err();
    assert!(err.to_string().starts_with("insufficient data"));
    let three: Vec<_> = (0..3).flat_map(|d| render_night(day0() + Duration::days(d), 60.0, 0)).collect();
    let s = estimate_health_state(&profile, &bank, &three, &[], day0() + Duration::days(2)).unwrap();
    assert_eq!(s.vo2max_indicator, None);
}

#[test]
fn bank_round_trips_through_json() {
    let bank = KnowledgeBank::builtin();
    let again = KnowledgeBank::from_json(&bank.to_json()).unwrap();
    assert_eq!(again, bank);
    assert!(again.check_fixtures().is_empty());
    let broken = bank.to_json().replacen("\"schema_version\": 1", "\"schema_version\": 99", 1);
    assert!(KnowledgeBank::from_json(&broken).is_err());
}
