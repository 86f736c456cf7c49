//! Transport-independent request handling. Every GET is a pure function of
//! the user's event log.

use std::collections::BTreeMap;

use chrono::{Duration, NaiveDate};
use phn_core::guidance::{plan_routes, Controller, Goal, Rules};
use phn_core::hse::{estimate_health_state, FitnessTest, HseError, KnowledgeBank, UserProfile};
use phn_core::ingest::{parse_stream, segment_exercise, MinuteSample, SessionRules};
use phn_core::statespace::{locate, personal_graph, Location};
use phn_core::time::local_date;
use phn_core::trainload::{loads_csv, update_loads, DailySeries, TrainingLoadState, Workout};
use phn_core::{HealthState, Route, StateGraph};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::store::{samples_event, valid_user_id, EventKind, GoalSetting, Store, UserState};

#[derive(Debug, Clone, PartialEq)]
pub struct Request {
    pub method: String,
    pub path: String,
    pub query: BTreeMap<String, String>,
    /// Lower-case names.
    pub headers: BTreeMap<String, String>,
    pub body: Vec<u8>,
}

impl Request {
    /// `target` is a path with an optional `?query`.
    pub fn new(method: &str, target: &str) -> Self {
        let (path, q) = target.split_once('?').unwrap_or((target, ""));
        let query = q
            .split('&')
            .filter(|p| !p.is_empty())
            .map(|p| {
                let (k, v) = p.split_once('=').unwrap_or((p, ""));
                (k.to_string(), v.to_string())
            })
            .collect();
        Self { method: method.to_uppercase(), path: path.to_string(), query, headers: BTreeMap::new(), body: Vec::new() }
    }

    pub fn header(mut self, name: &str, value: &str) -> Self {
        self.headers.insert(name.to_ascii_lowercase(), value.to_string());
        self
    }

    pub fn body(mut self, body: impl Into<Vec<u8>>) -> Self {
        self.body = body.into();
        self
    }

    /// Adds the bearer token and user header.
    pub fn auth(self, token: &str, user: &str) -> Self {
        self.header("authorization", &format!("Bearer {token}")).header("x-user-id", user)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Response {
    pub status: u16,
    pub content_type: &'static str,
    pub body: String,
}

impl Response {
    fn json(status: u16, v: &impl Serialize) -> Self {
        let mut body = serde_json::to_string(v).expect("responses serialize");
        body.push('\n');
        Self { status, content_type: "application/json", body }
    }

    fn csv(body: String) -> Self {
        Self { status: 200, content_type: "text/csv", body }
    }

    pub fn json_body(&self) -> Value {
        serde_json::from_str(&self.body).unwrap_or(Value::Null)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApiError {
    pub status: u16,
    pub message: String,
}

fn err<T>(status: u16, message: impl Into<String>) -> Result<T, ApiError> {
    Err(ApiError { status, message: message.into() })
}

fn domain(e: impl std::fmt::Display) -> ApiError {
    ApiError { status: 422, message: e.to_string() }
}

impl From<ApiError> for Response {
    fn from(e: ApiError) -> Self {
        Response::json(e.status, &json!({ "error": e.message }))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GoalRequest {
    pub roi: String,
    #[serde(default)]
    pub k: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WhatIfRequest {
    /// First planned day; defaults to the day after the last recorded day.
    #[serde(default)]
    pub start: Option<NaiveDate>,
    /// Planned TRIMP per day.
    pub plan: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WhatIf {
    pub start: NaiveDate,
    pub baseline: Vec<TrainingLoadState>,
    pub projected: Vec<TrainingLoadState>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateView {
    pub state: HealthState,
    pub location: Option<Location>,
    pub roi: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouteView {
    #[serde(flatten)]
    pub route: Route,
    pub rois: Vec<Option<String>>,
}

pub const DEFAULT_ROUTES: usize = 3;

pub struct Service {
    pub store: Store,
    pub bank: KnowledgeBank,
    pub rules: Rules,
    pub session_rules: SessionRules,
    token: String,
}

impl Service {
    pub fn new(store: Store, bank: KnowledgeBank, token: impl Into<String>) -> Self {
        Self { store, bank, rules: Rules::default(), session_rules: SessionRules::default(), token: token.into() }
    }

    pub fn handle(&self, req: &Request) -> Response {
        match self.dispatch(req) {
            Ok(r) => r,
            Err(e) => e.into(),
        }
    }

    fn dispatch(&self, req: &Request) -> Result<Response, ApiError> {
        if req.headers.get("authorization").map(String::as_str) != Some(&format!("Bearer {}", self.token)) {
            return err(401, "missing or wrong bearer token");
        }
        let caller = req.headers.get("x-user-id").map(String::as_str);
        let parts: Vec<&str> = req.path.trim_matches('/').split('/').collect();
        let m = req.method.as_str();
        match parts.as_slice() {
            ["whatif"] => {
                only(m, "POST")?;
                let id = caller.ok_or(ApiError { status: 400, message: "x-user-id header required".into() })?;
                self.whatif(id, &req.body)
            }
            ["users", id, rest @ ..] => {
                if !valid_user_id(id) {
                    return err(400, format!("bad user id {id:?}"));
                }
                if caller != Some(*id) {
                    return err(403, "x-user-id does not match the path");
                }
                match (rest, m) {
                    (["profile"], "PUT") => self.put_profile(id, req),
                    (["profile"], "GET") => Ok(Response::json(200, self.user(id)?.profile.as_ref().unwrap())),
                    (["samples"], "POST") => self.post_samples(id, req),
                    (["tests"], "POST") => self.post_test(id, req),
                    (["state"], "GET") => self.get_state(id, req),
                    (["statespace"], "GET") => self.get_statespace(id),
                    (["goal"], "POST") => self.post_goal(id, req),
                    (["routes"], "GET") => self.get_routes(id, req),
                    (["guidance"], "GET") => self.get_guidance(id, req),
                    (["workouts"], "POST") => self.post_workout(id, req),
                    (["loads.csv"], "GET") => self.get_loads(id),
                    (["profile" | "samples" | "tests" | "state" | "statespace" | "goal" | "routes" | "guidance" | "workouts" | "loads.csv"], _) => {
                        err(405, format!("{m} not allowed"))
                    }
                    _ => err(404, format!("no route {}", req.path)),
                }
            }
            _ => err(404, format!("no route {}", req.path)),
        }
    }

    /// A user with a profile.
    fn user(&self, id: &str) -> Result<std::sync::Arc<UserState>, ApiError> {
        match self.store.snapshot(id) {
            Some(s) if s.profile.is_some() => Ok(s),
            _ => err(404, format!("unknown user {id}")),
        }
    }

    fn write<F>(&self, id: &str, req: &Request, decide: F) -> Result<Response, ApiError>
    where
        F: FnOnce(&UserState) -> Result<Vec<EventKind>, ApiError>,
    {
        let expected = match req.headers.get("if-match") {
            Some(v) => Some(v.trim_matches('"').parse::<u64>().map_err(|_| ApiError { status: 400, message: "bad if-match".into() })?),
            None => None,
        };
        let outcome = self
            .store
            .write(id, |s| {
                if let Some(want) = expected.filter(|w| *w != s.last_seq) {
                    return err(409, format!("log is at seq {}, request expected {want}", s.last_seq));
                }
                decide(s)
            })
            .map_err(|e| ApiError { status: 500, message: e.to_string() })?;
        outcome.map(|s| Response::json(200, &json!({ "seq": s.last_seq })))
    }

    fn put_profile(&self, id: &str, req: &Request) -> Result<Response, ApiError> {
        let profile: UserProfile = parse_json(&req.body)?;
        profile.validate().map_err(domain)?;
        personal_graph(&profile, &self.bank).map_err(domain)?;
        self.write(id, req, |_| Ok(vec![EventKind::Profile { profile }]))
    }

    fn post_samples(&self, id: &str, req: &Request) -> Result<Response, ApiError> {
        self.user(id)?;
        let text = std::str::from_utf8(&req.body).map_err(|_| ApiError { status: 400, message: "body is not UTF-8".into() })?;
        let parsed = parse_stream(text.lines());
        let rejects: Vec<Value> = parsed.rejects.iter().map(|r| json!({ "line": r.line, "reason": r.reason })).collect();
        let mut summary = None;
        let r = self.write(id, req, |s| {
            let mut fresh: BTreeMap<_, MinuteSample> = BTreeMap::new();
            let mut duplicates = 0;
            for m in parsed.samples {
                let stored = s.samples.get(&m.ts).or(fresh.get(&m.ts));
                match stored {
                    Some(old) if *old == m => duplicates += 1,
                    Some(_) => return err(409, format!("sample at {} conflicts with a stored one", m.ts)),
                    None => {
                        fresh.insert(m.ts, m);
                    }
                }
            }
            summary = Some((fresh.len(), duplicates));
            let fresh: Vec<MinuteSample> = fresh.into_values().collect();
            Ok(if fresh.is_empty() { Vec::new() } else { vec![samples_event(&fresh)] })
        })?;
        let (accepted, duplicates) = summary.expect("decide ran");
        let mut body = r.json_body();
        body["accepted"] = json!(accepted);
        body["duplicates"] = json!(duplicates);
        body["rejected"] = json!(rejects.len());
        body["rejects"] = Value::Array(rejects);
        Ok(Response::json(200, &body))
    }

    fn post_test(&self, id: &str, req: &Request) -> Result<Response, ApiError> {
        let user = self.user(id)?;
        let test: FitnessTest = parse_json(&req.body)?;
        test.indicator(user.profile.as_ref().unwrap(), &self.bank).map_err(domain)?;
        self.write(id, req, |s| {
            match s.tests.iter().find(|t| t.date() == test.date() && t.kind() == test.kind()) {
                Some(t) if *t == test => Ok(Vec::new()),
                Some(_) => err(409, format!("a different {:?} test is recorded on {}", test.kind(), test.date())),
                None => Ok(vec![EventKind::Test { test }]),
            }
        })
    }

    fn post_goal(&self, id: &str, req: &Request) -> Result<Response, ApiError> {
        let user = self.user(id)?;
        let g: GoalRequest = parse_json(&req.body)?;
        let k = g.k.unwrap_or(DEFAULT_ROUTES);
        if !(1..=20).contains(&k) {
            return err(422, format!("k {k} outside 1..=20"));
        }
        let graph = self.graph(&user)?;
        Goal::roi(&graph, &g.roi).map_err(domain)?;
        self.write(id, req, |_| Ok(vec![EventKind::Goal { goal: GoalSetting { roi: g.roi, k } }]))
    }

    fn post_workout(&self, id: &str, req: &Request) -> Result<Response, ApiError> {
        self.user(id)?;
        let w: Workout = parse_json(&req.body)?;
        let z = w.zone_minutes;
        if ![z.low, z.medium, z.high].iter().all(|m| m.is_finite() && *m >= 0.0) {
            return err(422, "zone minutes must be finite and non-negative");
        }
        self.write(id, req, |_| Ok(vec![EventKind::Workout { workout: w }]))
    }

    fn graph(&self, user: &UserState) -> Result<StateGraph, ApiError> {
        personal_graph(user.profile.as_ref().unwrap(), &self.bank).map_err(domain)
    }

    fn get_statespace(&self, id: &str) -> Result<Response, ApiError> {
        let user = self.user(id)?;
        Ok(Response::json(200, &self.graph(&user)?.export()))
    }

    pub fn state_view(&self, user: &UserState, as_of: Option<NaiveDate>) -> Result<StateView, ApiError> {
        let profile = user.profile.as_ref().unwrap();
        let as_of = match as_of.or_else(|| last_sample_date(user)) {
            Some(d) => d,
            None => {
                return Err(domain(HseError::InsufficientData { stream: "samples", detail: "no samples recorded".into() }))
            }
        };
        let state = estimate_health_state(profile, &self.bank, &user.samples(), &user.tests, as_of).map_err(domain)?;
        let graph = self.graph(user)?;
        let location = if state.vo2max_indicator.is_some() { Some(locate(&state.coordinates(), &graph).map_err(domain)?) } else { None };
        let roi = location.as_ref().and_then(|l| graph.roi_label(l.node)).map(str::to_string);
        Ok(StateView { state, location, roi })
    }

    fn get_state(&self, id: &str, req: &Request) -> Result<Response, ApiError> {
        let user = self.user(id)?;
        Ok(Response::json(200, &self.state_view(&user, query_date(req, "date")?)?))
    }

    pub fn routes(&self, user: &UserState, as_of: Option<NaiveDate>) -> Result<(usize, String, Vec<RouteView>), ApiError> {
        let Some(setting) = &user.goal else {
            return err(422, "no goal set");
        };
        let view = self.state_view(user, as_of)?;
        let Some(loc) = view.location else {
            return err(422, "no fitness test recorded, so the state cannot be located");
        };
        let graph = self.graph(user)?;
        let goal = Goal::roi(&graph, &setting.roi).map_err(domain)?;
        let routes = plan_routes(&graph, loc.node, &goal, setting.k).map_err(domain)?;
        let views = routes
            .into_iter()
            .map(|route| {
                let rois = route.nodes.iter().map(|n| graph.roi_label(*n).map(str::to_string)).collect();
                RouteView { route, rois }
            })
            .collect();
        Ok((loc.node, setting.roi.clone(), views))
    }

    fn get_routes(&self, id: &str, req: &Request) -> Result<Response, ApiError> {
        let user = self.user(id)?;
        let (from, goal, routes) = self.routes(&user, query_date(req, "date")?)?;
        Ok(Response::json(200, &json!({ "from": from, "goal": goal, "routes": routes })))
    }

    /// Daily TRIMP from the first recorded day up to `end` (exclusive;
    /// default: the day after the last recorded day).
    pub fn history(&self, user: &UserState, end: Option<NaiveDate>) -> Option<DailySeries> {
        let profile = user.profile.as_ref()?;
        let tz = profile.timezone_offset_min;
        let mut workouts: Vec<Workout> = segment_exercise(&user.samples(), profile.max_hr(), &self.session_rules)
            .into_iter()
            .map(|s| Workout { date: local_date(s.start, tz), zone_minutes: s.zone_minutes })
            .collect();
        workouts.extend(user.workouts.iter().copied());
        let first = workouts.iter().map(|w| w.date).chain(user.samples.keys().map(|t| local_date(*t, tz))).min()?;
        let last = workouts.iter().map(|w| w.date).chain(last_sample_date(user)).max()?;
        let end = end.unwrap_or(last + Duration::days(1));
        Some(DailySeries::from_workouts(first, end.max(first), &workouts))
    }

    pub fn guidance(&self, user: &UserState, date: NaiveDate) -> Result<Value, ApiError> {
        let profile = user.profile.as_ref().unwrap();
        let hist = self.history(user, Some(date)).unwrap_or_else(|| DailySeries::empty(date));
        let controller = Controller::new(self.rules.clone(), profile.max_hr());
        let (plan, guidance) = controller.guidance_for(&hist, date).map_err(domain)?;
        let load = update_loads(&hist, self.rules.windows()).last().copied();
        Ok(json!({ "plan": plan, "guidance": guidance, "load_before": load }))
    }

    fn get_guidance(&self, id: &str, req: &Request) -> Result<Response, ApiError> {
        let user = self.user(id)?;
        let Some(date) = query_date(req, "date")? else {
            return err(400, "date query parameter required");
        };
        Ok(Response::json(200, &self.guidance(&user, date)?))
    }

    pub fn loads(&self, user: &UserState) -> Vec<TrainingLoadState> {
        self.history(user, None).map_or_else(Vec::new, |h| update_loads(&h, self.rules.windows()))
    }

    fn get_loads(&self, id: &str) -> Result<Response, ApiError> {
        let user = self.user(id)?;
        Ok(Response::csv(loads_csv(&self.loads(&user))))
    }

    pub fn what_if(&self, user: &UserState, w: &WhatIfRequest) -> Result<WhatIf, ApiError> {
        if w.plan.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return err(422, "plan values must be finite and non-negative");
        }
        let Some(hist) = self.history(user, w.start) else {
            return Err(domain(HseError::InsufficientData { stream: "training", detail: "no recorded training days".into() }));
        };
        let start = w.start.unwrap_or(hist.end());
        if start < hist.start {
            return err(422, format!("start {start} precedes the first recorded day {}", hist.start));
        }
        let n = w.plan.len();
        let padded = hist.extended_to(start);
        let run = |extra: &[f64]| {
            let mut s = padded.clone();
            s.values.extend_from_slice(extra);
            let all = update_loads(&s, self.rules.windows());
            all[all.len() - n..].to_vec()
        };
        Ok(WhatIf { start, baseline: run(&vec![0.0; n]), projected: run(&w.plan) })
    }

    fn whatif(&self, id: &str, body: &[u8]) -> Result<Response, ApiError> {
        let user = self.user(id)?;
        let w: WhatIfRequest = parse_json(body)?;
        Ok(Response::json(200, &self.what_if(&user, &w)?))
    }
}

fn only(method: &str, want: &str) -> Result<(), ApiError> {
    if method == want { Ok(()) } else { err(405, format!("{method} not allowed")) }
}

fn parse_json<T: for<'de> Deserialize<'de>>(body: &[u8]) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError { status: 400, message: format!("malformed body: {e}") })
}

fn query_date(req: &Request, key: &str) -> Result<Option<NaiveDate>, ApiError> {
    match req.query.get(key) {
        None => Ok(None),
        Some(v) => v.parse().map(Some).map_err(|_| ApiError { status: 400, message: format!("bad {key} {v:?}") }),
    }
}

fn last_sample_date(user: &UserState) -> Option<NaiveDate> {
    let tz = user.profile.as_ref().map_or(0, |p| p.timezone_offset_min);
    user.samples.keys().next_back().map(|t| local_date(*t, tz))
}
