//! Regenerates the Japanese fixture market under `fixtures/ja`.
//!
//!     cargo run -p boxcast --example gen_fixtures -- fixtures/ja

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use boxcast_core::alignment::query_key;
use boxcast_core::data::{pageview_file_name, serialize_catalog, PageviewFile};
use boxcast_core::synthetic::{generate_films, SyntheticConfig};
use boxcast_core::{ArticleUrl, FilmRecord, Market, WikiLanguage};
use chrono::{Duration, NaiveDate};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20_130_719;
const CATALOG: usize = 104;
const FILM_LIST: usize = 769;
const AUTOMATIC: usize = 70;
const MANUAL: usize = 3;
const NO_CANDIDATES: usize = 16;
const WINDOW_START: i32 = -63;

const HEADS: &[&str] = &[
    "星", "風", "海", "空", "夜", "桜", "雪", "光", "影", "夢", "月", "花", "炎", "氷", "森", "鉄", "銀", "嵐", "虹", "砂",
];
const TAILS: &[&str] = &[
    "旅人", "約束", "記憶", "物語", "王国", "戦士", "少女", "探偵", "迷宮", "軌跡", "奇跡", "扉", "歌", "刃", "鼓動", "庭",
    "列車", "城", "季節", "翼",
];
const SUFFIXES: &[&str] = &["", " 2", "ファイナル", " -序章-", "ZERO", "：完結編", " THE MOVIE", "（前編）"];
const NON_FILM: &[&str] = &["小説", "漫画", "楽曲", "アルバム", "テレビドラマ"];

fn article(title: &str) -> ArticleUrl {
    ArticleUrl::new("ja", title).expect("valid title")
}

fn resource_iri(url: &ArticleUrl) -> String {
    let encoded: String = url
        .title()
        .chars()
        .map(|c| match c {
            'A'..='Z' | 'a'..='z' | '0'..='9' | '_' | '-' | '.' | '~' => c.to_string(),
            c => {
                let mut buf = [0u8; 4];
                c.encode_utf8(&mut buf).bytes().map(|b| format!("%{b:02X}")).collect()
            }
        })
        .collect();
    format!("http://ja.dbpedia.org/resource/{encoded}")
}

/// Same article as it might appear in a search result: mobile host or
/// percent-encoded path.
fn variant(url: &ArticleUrl, rng: &mut ChaCha8Rng) -> String {
    match rng.gen_range(0..4) {
        0 => url.to_string().replace("ja.wikipedia.org", "ja.m.wikipedia.org"),
        1 => resource_iri(url).replace("http://ja.dbpedia.org/resource/", "https://ja.wikipedia.org/wiki/"),
        _ => url.to_string(),
    }
}

fn main() -> anyhow::Result<()> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "fixtures/ja".into()));
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);

    let mut pool: Vec<String> = Vec::new();
    for h in HEADS {
        for t in TAILS {
            for s in SUFFIXES {
                pool.push(format!("{h}の{t}{s}"));
            }
        }
    }
    pool.shuffle(&mut rng);
    let (catalog_titles, filler_titles) = pool.split_at(CATALOG);

    let config = SyntheticConfig {
        market: Market::Ja,
        films: CATALOG,
        window_start: WINDOW_START,
        revenue_per_screen: 250_000.0,
        revenue_per_view: 4_000.0,
        ..Default::default()
    };
    let first_release = NaiveDate::from_ymd_opt(2012, 1, 6).expect("valid date");
    let films = generate_films(&config, SEED);
    let records: Vec<FilmRecord> = films
        .iter()
        .zip(catalog_titles)
        .enumerate()
        .map(|(i, (f, title))| FilmRecord {
            title: title.clone(),
            market: Market::Ja,
            release_date: first_release + Duration::days(7 * i as i64),
            revenue: f.revenue,
            screens: f.screens,
        })
        .collect();

    // Partition catalog indices by intended alignment outcome.
    let mut order: Vec<usize> = (0..CATALOG).collect();
    order.shuffle(&mut rng);
    let automatic: BTreeSet<usize> = order[..AUTOMATIC].iter().copied().collect();
    let manual: BTreeSet<usize> = order[AUTOMATIC..AUTOMATIC + MANUAL].iter().copied().collect();
    let no_candidates: BTreeSet<usize> = order[AUTOMATIC + MANUAL..AUTOMATIC + MANUAL + NO_CANDIDATES]
        .iter()
        .copied()
        .collect();

    // Film articles of aligned titles, some disambiguated.
    let mut film_article: BTreeMap<usize, ArticleUrl> = BTreeMap::new();
    for &i in automatic.iter().chain(&manual) {
        let r = &records[i];
        let title = match rng.gen_range(0..5) {
            0 => format!("{}_(映画)", r.title),
            1 => format!("{}_({}年の映画)", r.title, chrono::Datelike::year(&r.release_date)),
            _ => r.title.clone(),
        };
        film_article.insert(i, article(&title));
    }

    let mut list: BTreeSet<ArticleUrl> = film_article.values().cloned().collect();
    let fillers: Vec<ArticleUrl> = filler_titles
        .iter()
        .take(FILM_LIST - list.len())
        .map(|t| article(t))
        .collect();
    list.extend(fillers.iter().cloned());
    assert_eq!(list.len(), FILM_LIST);

    let mut search: BTreeMap<String, Vec<String>> = BTreeMap::new();
    let mut overrides: BTreeMap<String, String> = BTreeMap::new();
    for (i, r) in records.iter().enumerate() {
        let mut links: Vec<String> = Vec::new();
        if rng.gen_bool(0.4) {
            links.push(format!("https://en.wikipedia.org/wiki/Japanese_film_{}", i + 1));
        }
        if rng.gen_bool(0.3) {
            links.push(format!(
                "https://ja.wikipedia.org/wiki/Category:{}年の映画",
                chrono::Datelike::year(&r.release_date)
            ));
        }
        if no_candidates.contains(&i) {
            if rng.gen_bool(0.5) {
                links.push(format!("https://ja.wikipedia.org/wiki/ノート:{}", r.title.replace(' ', "_")));
            }
            if !links.is_empty() || rng.gen_bool(0.5) {
                search.insert(query_key(&format!("{} 映画", r.title), WikiLanguage::Ja), links);
            }
            continue;
        }
        let kind = NON_FILM[rng.gen_range(0..NON_FILM.len())];
        let source_work = article(&format!("{}_({kind})", r.title));
        if !automatic.contains(&i) || rng.gen_bool(0.4) {
            links.push(variant(&source_work, &mut rng));
        }
        if let Some(url) = film_article.get(&i).filter(|_| automatic.contains(&i)) {
            links.push(variant(url, &mut rng));
            if rng.gen_bool(0.3) {
                let other = &fillers[rng.gen_range(0..fillers.len())];
                links.push(variant(other, &mut rng));
            }
            if rng.gen_bool(0.2) {
                links.push(url.to_string());
            }
        } else {
            links.push(article(&format!("{}_(曖昧さ回避)", r.title)).to_string());
        }
        if manual.contains(&i) {
            overrides.insert(r.title.clone(), film_article[&i].to_string());
        }
        search.insert(query_key(&format!("{} 映画", r.title), WikiLanguage::Ja), links);
    }

    let pageviews = out.join("pageviews");
    std::fs::create_dir_all(&pageviews)?;
    for (&i, url) in &film_article {
        let f = &films[i];
        let mut daily: BTreeMap<i32, u64> = (WINDOW_START..=0).zip(f.daily.iter().copied()).collect();
        if rng.gen_bool(0.15) {
            for _ in 0..rng.gen_range(1..=3) {
                daily.remove(&rng.gen_range(WINDOW_START..0));
            }
        }
        let file = PageviewFile {
            article_url: url.clone(),
            release_date: records[i].release_date,
            daily,
        };
        std::fs::write(pageviews.join(pageview_file_name(url)), file.to_json())?;
    }

    let bindings: Vec<serde_json::Value> = list
        .iter()
        .map(|u| serde_json::json!({ "film": { "type": "uri", "value": resource_iri(u) } }))
        .collect();
    let film_list = serde_json::json!({ "head": { "vars": ["film"] }, "results": { "bindings": bindings } });

    std::fs::write(out.join("catalog.csv"), serialize_catalog(&records))?;
    std::fs::write(out.join("film_list.json"), pretty(&film_list))?;
    std::fs::write(out.join("search.json"), pretty(&search))?;
    std::fs::write(out.join("overrides.json"), pretty(&overrides))?;
    println!(
        "wrote {} catalog rows, {} film-list entries, {} search keys, {} pageview files to {}",
        records.len(),
        list.len(),
        search.len(),
        film_article.len(),
        out.display()
    );
    Ok(())
}

fn pretty<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("fixture serializes");
    s.push('\n');
    s
}
