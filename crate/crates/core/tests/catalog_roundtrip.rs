use boxcast_core::data::{parse_catalog, parse_catalog_report, serialize_catalog};
use boxcast_core::{FilmRecord, Market};
use chrono::NaiveDate;
use proptest::prelude::*;

fn record_strategy() -> impl Strategy<Value = FilmRecord> {
    (
        "[A-Za-z0-9 ,\"':!?風立ちぬ-]{1,30}",
        0i64..20_000,
        1u64..10_000_000_000,
        0u32..5_000,
    )
        .prop_filter("titles are trimmed", |(t, ..)| t.trim() == t)
        .prop_map(|(title, day, revenue, screens)| FilmRecord {
            title,
            market: Market::Uk,
            release_date: NaiveDate::from_ymd_opt(1980, 1, 1).unwrap() + chrono::Duration::days(day),
            revenue,
            screens,
        })
}

proptest! {
    #[test]
    fn serialize_then_parse_is_identity(records in prop::collection::vec(record_strategy(), 0..20)) {
        let mut seen = std::collections::HashSet::new();
        let records: Vec<_> = records.into_iter().filter(|r| seen.insert(r.key())).collect();
        let text = serialize_catalog(&records);
        let parsed = parse_catalog(text.as_bytes(), Market::Uk).unwrap();
        prop_assert_eq!(&parsed, &records);
        prop_assert_eq!(serialize_catalog(&parsed), text);
    }

    #[test]
    fn lenient_parse_accounts_for_every_row(rows in prop::collection::vec("[^\n\r]{0,40}", 0..15)) {
        let mut text = String::from("title,market,release_date,revenue,screens\n");
        for r in &rows {
            text.push_str(r);
            text.push('\n');
        }
        if let Ok(report) = parse_catalog_report(text.as_bytes(), Market::Uk) {
            prop_assert_eq!(report.records.len() + report.errors.len(), report.data_rows);
        }
    }
}
