//! Local-time helpers. Samples are stored in UTC; days and ISO weeks are
//! evaluated in the user's declared fixed offset.

use chrono::{DateTime, Datelike, Duration, NaiveDate, Timelike, Utc, Weekday};

/// Truncates a timestamp to the start of its minute.
pub fn truncate_to_minute(ts: DateTime<Utc>) -> DateTime<Utc> {
    ts.with_second(0)
        .and_then(|t| t.with_nanosecond(0))
        .expect("zero seconds is always valid")
}

pub fn local_date(ts: DateTime<Utc>, offset_min: i32) -> NaiveDate {
    (ts + Duration::minutes(offset_min as i64)).date_naive()
}

/// Monday of the ISO week containing `date`.
pub fn week_start(date: NaiveDate) -> NaiveDate {
    date - Duration::days(date.weekday().num_days_from_monday() as i64)
}

/// UTC instant at which the given local date begins.
pub fn local_midnight_utc(date: NaiveDate, offset_min: i32) -> DateTime<Utc> {
    date.and_hms_opt(0, 0, 0).unwrap().and_utc() - Duration::minutes(offset_min as i64)
}

pub fn is_monday(date: NaiveDate) -> bool {
    date.weekday() == Weekday::Mon
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn week_start_is_monday() {
        let d = NaiveDate::from_ymd_opt(2021, 3, 4).unwrap();
        assert_eq!(week_start(d), NaiveDate::from_ymd_opt(2021, 3, 1).unwrap());
        assert!(is_monday(week_start(d)));
    }

    #[test]
    fn offset_moves_local_day() {
        let ts = "2021-03-01T23:30:00Z".parse::<DateTime<Utc>>().unwrap();
        assert_eq!(local_date(ts, 60), NaiveDate::from_ymd_opt(2021, 3, 2).unwrap());
        assert_eq!(local_date(ts, -60), NaiveDate::from_ymd_opt(2021, 3, 1).unwrap());
    }
}
