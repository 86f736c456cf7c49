use std::fs;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use chrono::NaiveDate;
use clap::{Parser, Subcommand, ValueEnum};
use phn_core::hse::{FitnessTest, KnowledgeBank, UserProfile};
use phn_core::ingest::{parse_stream, segment_exercise, SessionRules};
use phn_core::responder::{cross_validate, grid_search, read_jsonl, synthetic_cohort, Dataset, FeatureMode, HyperParams};
use phn_core::sim::{run_closed_loop, SimConfig, VirtualUser};
use phn_core::trainload::trimp;
use phn_service::{Request, Service, Store};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "phn", version, about = "Personal health navigation: ingest, estimate, plan, guide, simulate")]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, global = true, default_value_t = Format::Csv)]
    format: Format,
    /// Event-log directory.
    #[arg(long, global = true, default_value = "phn-data")]
    data: PathBuf,
    /// Knowledge bank JSON; the built-in bank when omitted.
    #[arg(long, global = true)]
    bank: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Structured,
}

#[derive(Subcommand)]
enum Cmd {
    /// Store a minute-sample CSV for a user and print its exercise sessions.
    Ingest {
        #[arg(long)]
        user: String,
        #[arg(long)]
        samples: PathBuf,
        /// Sets or replaces the user's profile first.
        #[arg(long)]
        profile: Option<PathBuf>,
        /// JSON array of fitness tests to record.
        #[arg(long)]
        tests: Option<PathBuf>,
    },
    /// Estimate the user's health state and its node.
    Estimate {
        #[arg(long)]
        user: String,
        #[arg(long)]
        date: Option<NaiveDate>,
    },
    /// Rank routes from the current node to the goal ROI.
    Plan {
        #[arg(long)]
        user: String,
        /// Sets the goal ROI before planning.
        #[arg(long)]
        goal: Option<String>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        date: Option<NaiveDate>,
    },
    /// Today's exercise options.
    Guide {
        #[arg(long)]
        user: String,
        #[arg(long)]
        date: NaiveDate,
    },
    /// Run the virtual user against the engine and write the trace.
    Simulate {
        #[arg(long, default_value_t = 84)]
        days: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Virtual-user or plain profile JSON.
        #[arg(long)]
        profile: Option<PathBuf>,
        #[arg(long)]
        p_follow: Option<f64>,
        #[arg(long, default_value = "ideal")]
        goal: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cross-validate the responder classifier.
    Classify {
        #[arg(long, value_parser = ["basic", "week1"], default_value = "week1")]
        mode: String,
        #[arg(long, default_value_t = 10)]
        k: usize,
        #[arg(long, default_value_t = 1)]
        repeats: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// JSONL user records; a synthetic cohort when omitted.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Size of the synthetic cohort.
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 500)]
        epochs: usize,
        /// Search the learning-rate × L2 grid.
        #[arg(long)]
        grid: bool,
    },
    /// Serve the HTTP API.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: SocketAddr,
        #[arg(long, env = "PHN_TOKEN")]
        token: String,
    },
}

const LOCAL_TOKEN: &str = "local";

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn bank(cli: &Cli) -> Result<KnowledgeBank> {
    match &cli.bank {
        Some(p) => KnowledgeBank::load(p).with_context(|| format!("loading {}", p.display())),
        None => Ok(KnowledgeBank::builtin()),
    }
}

fn service(cli: &Cli, token: &str) -> Result<Service> {
    let store = Store::open(&cli.data).with_context(|| format!("opening {}", cli.data.display()))?;
    Ok(Service::new(store, bank(cli)?, token))
}

fn read(p: &PathBuf) -> Result<String> {
    fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))
}

/// Sends one request through the API, failing on a non-2xx status.
fn call(svc: &Service, user: &str, method: &str, target: &str, body: impl Into<Vec<u8>>) -> Result<serde_json::Value> {
    let r = svc.handle(&Request::new(method, target).auth(LOCAL_TOKEN, user).body(body));
    if r.status >= 300 {
        bail!("{} {target}: {}", r.status, r.json_body()["error"].as_str().unwrap_or(&r.body));
    }
    Ok(r.json_body())
}

fn emit<T: Serialize>(format: Format, value: &T, csv: impl FnOnce() -> String) {
    match format {
        Format::Structured => println!("{}", serde_json::to_string_pretty(value).expect("serializable")),
        Format::Csv => print!("{}", csv()),
    }
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn run(cli: Cli) -> Result<()> {
    let format = cli.format;
    match &cli.cmd {
        Cmd::Ingest { user, samples, profile, tests } => {
            let svc = service(&cli, LOCAL_TOKEN)?;
            if let Some(p) = profile {
                call(&svc, user, "PUT", &format!("/users/{user}/profile"), read(p)?)?;
            }
            let text = read(samples)?;
            let summary = call(&svc, user, "POST", &format!("/users/{user}/samples"), text.clone())?;
            if let Some(t) = tests {
                let list: Vec<FitnessTest> = serde_json::from_str(&read(t)?).context("tests file")?;
                for test in list {
                    call(&svc, user, "POST", &format!("/users/{user}/tests"), serde_json::to_vec(&test)?)?;
                }
            }
            let max_hr = svc.store.snapshot(user).and_then(|s| s.profile.as_ref().map(UserProfile::max_hr)).unwrap_or(180);
            let sessions = segment_exercise(&parse_stream(text.lines()).samples, max_hr, &SessionRules::default());
            eprintln!(
                "accepted {} duplicates {} rejected {}",
                summary["accepted"], summary["duplicates"], summary["rejected"]
            );
            emit(format, &sessions, || {
                let mut s = String::from("start,end,duration_min,mean_hr,low,medium,high,trimp\n");
                for x in &sessions {
                    let z = x.zone_minutes;
                    s += &format!(
                        "{},{},{},{:.1},{},{},{},{}\n",
                        x.start.format("%Y-%m-%dT%H:%MZ"),
                        x.end.format("%Y-%m-%dT%H:%MZ"),
                        x.duration_min,
                        x.mean_hr,
                        z.low,
                        z.medium,
                        z.high,
                        trimp(&z)
                    );
                }
                s
            });
        }
        Cmd::Estimate { user, date } => {
            let svc = service(&cli, LOCAL_TOKEN)?;
            let state = user_state(&svc, user)?;
            let v = svc.state_view(&state, *date).map_err(|e| anyhow::anyhow!(e.message))?;
            emit(format, &v, || {
                let s = &v.state;
                format!(
                    "date,ascvd_base_pct,ascvd_risk_pct,vo2max,resting_hr,node,roi\n{},{},{},{},{},{},{}\n",
                    s.date,
                    s.ascvd_base_pct,
                    s.ascvd_risk_pct,
                    opt(s.vo2max_indicator),
                    s.resting_hr,
                    opt(v.location.as_ref().map(|l| l.node)),
                    opt(v.roi.clone())
                )
            });
        }
        Cmd::Plan { user, goal, k, date } => {
            let svc = service(&cli, LOCAL_TOKEN)?;
            if let Some(g) = goal {
                let body = serde_json::json!({ "roi": g, "k": k });
                call(&svc, user, "POST", &format!("/users/{user}/goal"), serde_json::to_vec(&body)?)?;
            }
            let state = user_state(&svc, user)?;
            let (from, goal, routes) = svc.routes(&state, *date).map_err(|e| anyhow::anyhow!(e.message))?;
            let out = serde_json::json!({ "from": from, "goal": goal, "routes": routes });
            emit(format, &out, || {
                let mut s = String::from("rank,cost_weeks,nodes,inputs\n");
                for (i, r) in routes.iter().enumerate() {
                    let nodes: Vec<String> = r.route.nodes.iter().map(|n| n.to_string()).collect();
                    s += &format!("{},{},{},{}\n", i + 1, r.route.total_cost_weeks, nodes.join(" "), r.route.input_labels.join(" "));
                }
                s
            });
        }
        Cmd::Guide { user, date } => {
            let svc = service(&cli, LOCAL_TOKEN)?;
            let state = user_state(&svc, user)?;
            let v = svc.guidance(&state, *date).map_err(|e| anyhow::anyhow!(e.message))?;
            emit(format, &v["guidance"], || {
                let g = &v["guidance"];
                let mut s = format!("# {} trimp {}\n# {}\nintensity,minutes,hr_lo,hr_hi\n", g["date"].as_str().unwrap_or(""), g["trimp_d"], g["rationale"].as_str().unwrap_or(""));
                for o in g["options"].as_array().into_iter().flatten() {
                    s += &format!("{},{},{},{}\n", o["intensity"].as_str().unwrap_or(""), o["minutes"], o["hr_band"][0], o["hr_band"][1]);
                }
                s
            });
        }
        Cmd::Simulate { days, seed, profile, p_follow, goal, out } => {
            let mut user = match profile {
                None => VirtualUser::new(UserProfile::example()),
                Some(p) => {
                    let text = read(p)?;
                    serde_json::from_str::<VirtualUser>(&text)
                        .or_else(|_| serde_json::from_str::<UserProfile>(&text).map(VirtualUser::new))
                        .with_context(|| format!("{} is neither a virtual user nor a profile", p.display()))?
                }
            };
            if let Some(p) = p_follow {
                user.adherence.p_follow = *p;
            }
            let config = SimConfig { days: *days, seed: *seed, goal: goal.clone(), ..SimConfig::default() };
            let trace = run_closed_loop(&user, &bank(&cli)?, &config)?;
            let text = match format {
                Format::Csv => trace.to_csv(),
                Format::Structured => serde_json::to_string_pretty(&trace)? + "\n",
            };
            match out {
                Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
                None => print!("{text}"),
            }
        }
        Cmd::Classify { mode, k, repeats, seed, input, n, epochs, grid } => {
            let mode: FeatureMode = mode.parse().map_err(anyhow::Error::msg)?;
            let records = match input {
                Some(p) => read_jsonl(&read(p)?)?,
                None => synthetic_cohort(*n, *seed),
            };
            let data = Dataset { records };
            let (x, y) = (data.x(mode), data.y());
            let report = if *grid {
                grid_search(&x, &y, *k, *repeats, *seed, &HyperParams::grid(*epochs))?.best
            } else {
                cross_validate(&x, &y, *k, *repeats, *seed, HyperParams { epochs: *epochs, ..HyperParams::default() })?
            };
            emit(format, &report, || {
                format!(
                    "{}folds {} weighted f1 {:.4} (sd {:.4}) learning_rate {} l2 {}\n",
                    report.pooled.table(),
                    report.folds.len(),
                    report.f1,
                    report.f1_sd,
                    report.hyper_params.learning_rate,
                    report.hyper_params.l2
                )
            });
        }
        Cmd::Serve { addr, token } => {
            let svc = Arc::new(service(&cli, token)?);
            eprintln!("listening on {addr}, data in {}", cli.data.display());
            tokio::runtime::Runtime::new()?.block_on(phn_service::http::serve(svc, *addr))?;
        }
    }
    Ok(())
}

fn user_state(svc: &Service, user: &str) -> Result<Arc<phn_service::store::UserState>> {
    match svc.store.snapshot(user) {
        Some(s) if s.profile.is_some() => Ok(s),
        _ => bail!("unknown user {user}"),
    }
}
