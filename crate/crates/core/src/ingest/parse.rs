use chrono::{DateTime, NaiveDateTime, Utc};

use super::{
    ActivityMode, MinuteSample, OutOfRange, SleepStage, HR_PLAUSIBLE_MAX, HR_PLAUSIBLE_MIN,
    STEPS_PER_MIN_MAX,
};
use crate::time::truncate_to_minute;

/// A line that could not be parsed. Line numbers are 1-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reject {
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParsedStream {
    pub samples: Vec<MinuteSample>,
    pub rejects: Vec<Reject>,
}

impl ParsedStream {
    /// Rejects report: one `line: reason` entry per line.
    pub fn rejects_report(&self) -> String {
        let mut out = String::new();
        for r in &self.rejects {
            out.push_str(&format!("{}: {}\n", r.line, r.reason));
        }
        out
    }
}

/// Parses `ts,hr_bpm,steps,activity_mode,sleep_stage` lines.
///
/// Blank lines, `#` comments and a leading header are skipped. The output is
/// sorted by timestamp with one sample per minute; when a minute repeats the
/// later line wins. Out-of-range heart rate or step values keep the sample
/// but drop the reading and mark the sample implausible.
pub fn parse_stream<I, S>(lines: I) -> ParsedStream
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut samples = Vec::new();
    let mut rejects = Vec::new();
    for (i, line) in lines.into_iter().enumerate() {
        let line = line.as_ref().trim();
        if line.is_empty() || line.starts_with('#') || (i == 0 && line.starts_with("ts,")) {
            continue;
        }
        match parse_line(line) {
            Ok(s) => samples.push(s),
            Err(reason) => rejects.push(Reject { line: i + 1, reason }),
        }
    }
    // Stable sort keeps input order among equal timestamps so the last
    // occurrence can win.
    samples.sort_by_key(|s| s.ts);
    let mut deduped: Vec<MinuteSample> = Vec::with_capacity(samples.len());
    for s in samples {
        match deduped.last_mut() {
            Some(last) if last.ts == s.ts => *last = s,
            _ => deduped.push(s),
        }
    }
    ParsedStream {
        samples: deduped,
        rejects,
    }
}

fn parse_line(line: &str) -> Result<MinuteSample, String> {
    let fields: Vec<&str> = line.split(',').map(str::trim).collect();
    if fields.len() != 5 {
        return Err(format!("expected 5 fields, found {}", fields.len()));
    }
    let ts = parse_ts(fields[0])?;
    let mut out_of_range = OutOfRange::default();

    let hr_field = fields[1].trim_matches('"');
    let hr_bpm = if hr_field.is_empty() {
        None
    } else {
        let raw: i64 = hr_field
            .parse()
            .map_err(|_| format!("invalid hr_bpm {:?}", fields[1]))?;
        if (HR_PLAUSIBLE_MIN as i64..=HR_PLAUSIBLE_MAX as i64).contains(&raw) {
            Some(raw as u16)
        } else {
            out_of_range.hr = Some(raw);
            None
        }
    };

    let raw_steps: i64 = fields[2]
        .parse()
        .map_err(|_| format!("invalid steps {:?}", fields[2]))?;
    let steps = if (0..=STEPS_PER_MIN_MAX as i64).contains(&raw_steps) {
        raw_steps as u16
    } else {
        out_of_range.steps = Some(raw_steps);
        0
    };

    let activity_mode: ActivityMode = fields[3].parse()?;
    let sleep_stage: SleepStage = fields[4].parse()?;

    Ok(MinuteSample {
        ts,
        hr_bpm,
        steps,
        activity_mode,
        sleep_stage,
        out_of_range: (out_of_range != OutOfRange::default()).then_some(out_of_range),
    })
}

fn parse_ts(s: &str) -> Result<DateTime<Utc>, String> {
    if let Ok(t) = DateTime::parse_from_rfc3339(s) {
        return Ok(truncate_to_minute(t.with_timezone(&Utc)));
    }
    for fmt in ["%Y-%m-%dT%H:%MZ", "%Y-%m-%dT%H:%M"] {
        if let Ok(t) = NaiveDateTime::parse_from_str(s, fmt) {
            return Ok(t.and_utc());
        }
    }
    for fmt in ["%Y-%m-%dT%H:%M%:z", "%Y-%m-%dT%H:%M%z"] {
        if let Ok(t) = DateTime::parse_from_str(s, fmt) {
            return Ok(t.with_timezone(&Utc));
        }
    }
    Err(format!("invalid timestamp {s:?}"))
}

/// Inverse of [`parse_stream`] for its own output.
pub fn serialize_samples(samples: &[MinuteSample]) -> Vec<String> {
    samples
        .iter()
        .map(|s| {
            let oor = s.out_of_range.unwrap_or_default();
            let hr = match (s.hr_bpm, oor.hr) {
                (Some(h), _) => h.to_string(),
                (None, Some(raw)) => raw.to_string(),
                (None, None) => String::new(),
            };
            let steps = oor.steps.unwrap_or(s.steps as i64);
            format!(
                "{},{},{},{},{}",
                s.ts.format("%Y-%m-%dT%H:%MZ"),
                hr,
                steps,
                s.activity_mode,
                s.sleep_stage
            )
        })
        .collect()
}
