use boxcast_core::alignment::{build_film_list_query, squash_whitespace};
use boxcast_core::WikiLanguage;
use spargebra::SparqlParser;

const YEAR_SETS: &[&[i32]] = &[&[2013], &[2012, 2013], &[1999, 2000, 2001], &[2007, 2008, 2009, 2010, 2011, 2012]];

#[test]
fn every_query_parses() {
    for language in WikiLanguage::ALL {
        for years in YEAR_SETS {
            for animation in [false, true] {
                let q = build_film_list_query(language, years, animation).unwrap();
                if let Err(e) = SparqlParser::new().parse_query(&q.rendered) {
                    panic!("{language} {years:?} animation={animation}: {e}\n{}", q.rendered);
                }
            }
        }
    }
}

#[test]
fn one_branch_per_category() {
    for language in WikiLanguage::ALL {
        let q = build_film_list_query(language, &[2012, 2013], true).unwrap();
        let branches = q.rendered.matches("dcterms:subject").count();
        assert_eq!(branches, q.categories.len(), "{language}");
        assert_eq!(q.rendered.matches("UNION").count(), branches - 1);
    }
}

#[test]
fn japanese_query_shape() {
    let q = build_film_list_query(WikiLanguage::Ja, &[2013], false).unwrap();
    assert_eq!(
        squash_whitespace(&q.rendered),
        squash_whitespace(
            "PREFIX c: <http://ja.dbpedia.org/resource/Category:>
             PREFIX dcterms: <http://purl.org/dc/terms/>
             SELECT ?film WHERE { {?film dcterms:subject c:2013年の映画 .} }"
        )
    );
}
