mod common;

use densepara::conllu::{parse_corpus, write_corpus, write_document};
use densepara::mrp::{parse_mrp, render_tokens, MrpToken};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn document_survives_write_then_parse(doc in common::document()) {
        let text = write_document(&doc);
        let parsed = parse_corpus(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        prop_assert_eq!(parsed.len(), 1);
        prop_assert_eq!(&parsed[0], &doc);
    }

    #[test]
    fn canonical_text_is_a_fixed_point(docs in common::corpus()) {
        let text = write_corpus(&docs);
        let parsed = parse_corpus(&text).unwrap();
        prop_assert_eq!(&parsed, &docs);
        prop_assert_eq!(write_corpus(&parsed), text);
    }

    #[test]
    fn mrp_parse_inverts_emit(ev in common::mrp_event()) {
        let text = ev.to_text();
        let parsed = parse_mrp(&text);
        prop_assert!(parsed.diagnostics.is_empty(), "{:?} in {}", parsed.diagnostics, text);
        prop_assert_eq!(parsed.events.len(), 1, "{}", text);
        prop_assert_eq!(&parsed.events[0], &ev);
        prop_assert_eq!(parsed.events[0].to_text(), text);
    }

    #[test]
    fn mrp_multi_event_lines_split_at_heads(evs in common::mrp_events()) {
        let tokens: Vec<MrpToken> = evs.iter().flat_map(|e| e.tokens.clone()).collect();
        let text = render_tokens(&tokens);
        let parsed = parse_mrp(&text);
        prop_assert!(parsed.diagnostics.is_empty(), "{:?}", parsed.diagnostics);
        prop_assert_eq!(&parsed.events, &evs, "{}", text);
    }
}
