use std::collections::BTreeMap;
use std::sync::OnceLock;

use serde::Deserialize;

use crate::data::WikiLanguage;

use super::AlignmentError;

const DCTERMS: &str = "http://purl.org/dc/terms/";

/// DBpedia naming conventions of one language edition.
#[derive(Debug, Clone, Deserialize)]
pub struct EditionTemplates {
    pub resource_base: String,
    pub category_prefix: String,
    pub film: String,
    pub animation: Option<String>,
    #[serde(default)]
    pub namespaces: Vec<String>,
}

impl EditionTemplates {
    pub fn category_base(&self) -> String {
        format!("{}{}", self.resource_base, self.category_prefix)
    }

    pub fn is_namespace(&self, prefix: &str) -> bool {
        let prefix = prefix.replace('_', " ");
        self.namespaces.iter().any(|ns| ns.eq_ignore_ascii_case(&prefix))
    }
}

/// The bundled per-edition table.
pub fn edition_templates(language: WikiLanguage) -> Option<&'static EditionTemplates> {
    static TABLE: OnceLock<BTreeMap<String, EditionTemplates>> = OnceLock::new();
    TABLE
        .get_or_init(|| toml::from_str(include_str!("categories.toml")).expect("bundled category table parses"))
        .get(language.code())
}

/// SPARQL query listing every article in the film (and optionally animated
/// film) categories of the given years.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FilmListQuery {
    pub language: WikiLanguage,
    /// Category resource names, e.g. `Category:2013年の映画`.
    pub categories: Vec<String>,
    pub rendered: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum CategoryKind {
    Film,
    Animation,
}

pub fn build_film_list_query(
    language: WikiLanguage,
    years: &[i32],
    include_animation: bool,
) -> Result<FilmListQuery, AlignmentError> {
    if years.is_empty() {
        return Err(AlignmentError::Precondition("years must be nonempty".into()));
    }
    let templates = edition_templates(language).ok_or_else(|| {
        AlignmentError::Config(format!("no category templates for language {language}"))
    })?;

    let mut kinds = vec![CategoryKind::Film];
    if include_animation {
        if templates.animation.is_some() {
            kinds.push(CategoryKind::Animation);
        } else {
            log::warn!("{language} has no per-year animation category; querying film categories only");
        }
    }

    let mut local_names = Vec::new();
    for kind in kinds {
        let template = match kind {
            CategoryKind::Film => &templates.film,
            CategoryKind::Animation => templates.animation.as_ref().expect("checked above"),
        };
        for year in years {
            let name = template.replace("{year}", &year.to_string());
            if !local_names.contains(&name) {
                local_names.push(name);
            }
        }
    }

    let branches: Vec<String> = local_names
        .iter()
        .map(|name| format!("    {{?film dcterms:subject c:{} .}}", escape_local_name(name)))
        .collect();
    let rendered = format!(
        "PREFIX c: <{}>\nPREFIX dcterms: <{}>\nSELECT ?film WHERE {{\n{}\n}}\n",
        templates.category_base(),
        DCTERMS,
        branches.join("\n    UNION\n")
    );

    Ok(FilmListQuery {
        language,
        categories: local_names
            .iter()
            .map(|n| format!("{}{}", templates.category_prefix, n))
            .collect(),
        rendered,
    })
}

/// Backslash-escapes characters that may not appear bare in a prefixed name.
fn escape_local_name(name: &str) -> String {
    let mut out = String::with_capacity(name.len());
    let last = name.chars().count().saturating_sub(1);
    for (i, c) in name.chars().enumerate() {
        let needs_escape = match c {
            '~' | '!' | '$' | '&' | '\'' | '(' | ')' | '*' | '+' | ',' | ';' | '=' | '/' | '?' | '#'
            | '@' | '%' => true,
            '.' => i == 0 || i == last,
            '-' => i == 0,
            _ => false,
        };
        if needs_escape {
            out.push('\\');
        }
        out.push(c);
    }
    out
}

/// Strips whitespace so two renderings can be compared regardless of layout.
pub fn squash_whitespace(query: &str) -> String {
    query.chars().filter(|c| !c.is_whitespace()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn japanese_query_has_four_branches() {
        let q = build_film_list_query(WikiLanguage::Ja, &[2012, 2013], true).unwrap();
        assert_eq!(
            q.categories,
            vec![
                "Category:2012年の映画",
                "Category:2013年の映画",
                "Category:2012年のアニメ映画",
                "Category:2013年のアニメ映画"
            ]
        );
        for c in ["2012年の映画", "2013年の映画", "2012年のアニメ映画", "2013年のアニメ映画"] {
            assert!(q.rendered.contains(&format!("?film dcterms:subject c:{c} .")), "{}", q.rendered);
        }
        assert_eq!(q.rendered.matches("UNION").count(), 3);
        assert_eq!(q.rendered.matches("PREFIX c:").count(), 1);
        assert_eq!(q.rendered.matches("PREFIX dcterms:").count(), 1);
        assert!(q.rendered.contains("<http://ja.dbpedia.org/resource/Category:>"));
    }

    #[test]
    fn single_branch_has_no_union() {
        let q = build_film_list_query(WikiLanguage::De, &[2013], false).unwrap();
        assert_eq!(q.categories, vec!["Kategorie:Filmtitel_2013"]);
        assert!(!q.rendered.contains("UNION"));
        assert!(q.rendered.contains("c:Filmtitel_2013 ."));
    }

    #[test]
    fn empty_years_rejected() {
        let err = build_film_list_query(WikiLanguage::En, &[], true).unwrap_err();
        assert_eq!(err.to_string(), "precondition failed: years must be nonempty");
    }

    #[test]
    fn animation_without_template_falls_back_to_films() {
        let q = build_film_list_query(WikiLanguage::De, &[2013, 2014], true).unwrap();
        assert_eq!(q.categories.len(), 2);
    }

    #[test]
    fn repeated_years_collapse() {
        let q = build_film_list_query(WikiLanguage::En, &[2013, 2013], false).unwrap();
        assert_eq!(q.categories, vec!["Category:2013_films"]);
    }

    #[test]
    fn escapes_reserved_characters() {
        assert_eq!(escape_local_name("a(b)"), "a\\(b\\)");
        assert_eq!(escape_local_name("-x."), "\\-x\\.");
        assert_eq!(escape_local_name("a.b-c"), "a.b-c");
    }

    #[test]
    fn namespace_lookup_ignores_case_and_underscores() {
        let en = edition_templates(WikiLanguage::En).unwrap();
        assert!(en.is_namespace("category_talk"));
        assert!(!en.is_namespace("Star Wars"));
        let ja = edition_templates(WikiLanguage::Ja).unwrap();
        assert!(ja.is_namespace("ノート"));
    }
}
