//! Corpus statistics on fixtures whose counts were tallied by hand.

use densepara::conllu::Document;
use densepara::fixtures;
use densepara::stats::{
    assign_splits, corpus_stats, read_split_manifest, EntityRow, ExplicitHidden,
};
use densepara::{parse_corpus, Error, Resources};

fn docs() -> Vec<Document> {
    let mut out = Vec::new();
    for text in [
        fixtures::CHOP_ONIONS,
        fixtures::SAUTE_ONIONS,
        fixtures::ELISION_CUT,
        fixtures::APPELKOEK,
    ] {
        out.extend(parse_corpus(text).unwrap());
    }
    out
}

const MANIFEST: &str =
    "chop-onions\ttrain\nsaute-onions\ttrain\nelision-cut\ttrain\nappelkoek\ttest\n";

fn eh(explicit: usize, hidden: usize) -> ExplicitHidden {
    ExplicitHidden { explicit, hidden }
}

#[test]
fn hand_counted_splits() {
    let docs = docs();
    let groups = assign_splits(&docs, &read_split_manifest(MANIFEST).unwrap()).unwrap();
    let stats = corpus_stats(&groups, &Resources::default()).unwrap();

    let train = stats.split("train").unwrap();
    assert_eq!(train.recipes, 3);
    // sentences per recipe: 1, 2, 2
    assert!((train.sentences.avg - 5.0 / 3.0).abs() < 1e-12);
    assert_eq!((train.sentences.max, train.sentences.min), (2, 1));
    // non-punctuation lengths: 2 | 3, 4 | 3, 6
    assert!((train.sentence_length.avg - 3.6).abs() < 1e-12);
    assert_eq!(
        (train.sentence_length.max, train.sentence_length.min),
        (6, 2)
    );
    assert_eq!(train.entities[&EntityRow::Event], eh(5, 0));
    assert_eq!(train.entities[&EntityRow::Tool], eh(0, 3));
    assert_eq!(train.entities[&EntityRow::Habitat], eh(2, 1));
    assert_eq!(train.entities[&EntityRow::IngredientParticipant], eh(3, 2));
    assert!(!train.entities.contains_key(&EntityRow::IngredientResult));
    assert_eq!(train.chains.get("INGREDIENT"), Some(&2));
    assert_eq!((train.chains_all, train.chains_all_explicit), (2, 0));

    let test = stats.split("test").unwrap();
    assert_eq!(test.recipes, 1);
    assert_eq!((test.sentences.max, test.sentences.min), (5, 5));
    // lengths 6, 6, 4, 3, 9
    assert!((test.sentence_length.avg - 5.6).abs() < 1e-12);
    assert_eq!((test.sentence_length.max, test.sentence_length.min), (9, 3));
    assert_eq!(test.entities[&EntityRow::Event], eh(6, 0));
    assert_eq!(test.entities[&EntityRow::Tool], eh(0, 3));
    assert_eq!(test.entities[&EntityRow::Habitat], eh(0, 5));
    assert_eq!(test.entities[&EntityRow::IngredientParticipant], eh(6, 3));
    assert_eq!(test.entities[&EntityRow::IngredientResult], eh(1, 2));
    assert_eq!(test.chains.get("INGREDIENT"), Some(&3));
    assert_eq!(test.chains.get("HABITAT"), Some(&1));
    assert_eq!((test.chains_all, test.chains_all_explicit), (4, 1));
}

#[test]
fn unknown_split_is_an_error() {
    let docs = docs();
    let groups = assign_splits(&docs, &read_split_manifest(MANIFEST).unwrap()).unwrap();
    let stats = corpus_stats(&groups, &Resources::default()).unwrap();
    assert!(matches!(stats.split("dev"), Err(Error::UnknownSplit(s)) if s == "dev"));
    assert!(matches!(
        read_split_manifest("x\theldout\n"),
        Err(Error::UnknownSplit(_))
    ));
}

#[test]
fn unlisted_document_is_rejected() {
    let docs = docs();
    let manifest = read_split_manifest("chop-onions\ttrain\n").unwrap();
    assert!(assign_splits(&docs, &manifest).is_err());
}

#[test]
fn empty_document_changes_averages_only() {
    let mut docs = parse_corpus(fixtures::CHOP_ONIONS).unwrap();
    let before = corpus_stats(
        &[("train".into(), docs.iter().collect())],
        &Resources::default(),
    )
    .unwrap();
    docs.push(Document::new("empty"));
    let after = corpus_stats(
        &[("train".into(), docs.iter().collect())],
        &Resources::default(),
    )
    .unwrap();
    let (b, a) = (&before.splits[0], &after.splits[0]);
    assert_eq!(a.recipes, b.recipes + 1);
    assert_eq!(a.entities, b.entities);
    assert_eq!(a.chains_all, b.chains_all);
    assert_eq!(a.sentence_length, b.sentence_length);
    assert_eq!(a.sentences.min, 0);
    assert!(a.sentences.avg < b.sentences.avg);
}
