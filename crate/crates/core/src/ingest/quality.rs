use chrono::{DateTime, Duration, Utc};
use serde::{Deserialize, Serialize};

use super::{IngestError, MinuteSample};

/// Half-open time range `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Span {
    pub start: DateTime<Utc>,
    pub end: DateTime<Utc>,
}

impl Span {
    pub fn new(start: DateTime<Utc>, end: DateTime<Utc>) -> Self {
        Self { start, end }
    }

    pub fn days(start: DateTime<Utc>, days: i64) -> Self {
        Self {
            start,
            end: start + Duration::days(days),
        }
    }

    pub fn minutes(&self) -> i64 {
        (self.end - self.start).num_minutes()
    }

    pub fn contains(&self, ts: DateTime<Utc>) -> bool {
        self.start <= ts && ts < self.end
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QualityReport {
    /// Minutes with a sample over minutes in the span.
    pub continuity: f64,
    /// Plausible samples over present samples.
    pub accuracy: f64,
    pub span_days: i64,
}

/// Scores continuity and accuracy of `samples` over `span`.
///
/// Samples outside the span are ignored. A span with no samples has
/// accuracy 0.
pub fn quality(samples: &[MinuteSample], span: Span) -> Result<QualityReport, IngestError> {
    let minutes = span.minutes();
    if minutes <= 0 {
        return Err(IngestError::EmptySpan);
    }
    if minutes < 1440 {
        return Err(IngestError::SpanTooShort { minutes });
    }
    let (present, plausible) = samples
        .iter()
        .filter(|s| span.contains(s.ts))
        .fold((0usize, 0usize), |(n, ok), s| (n + 1, ok + s.is_plausible() as usize));
    Ok(QualityReport {
        continuity: present as f64 / minutes as f64,
        accuracy: if present == 0 {
            0.0
        } else {
            plausible as f64 / present as f64
        },
        span_days: minutes / 1440,
    })
}
