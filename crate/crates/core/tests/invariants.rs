mod common;

use densepara::coref::Strictness;
use densepara::metrics::{b_cubed, ceaf_e, cohen_kappa, muc, qa_f1, Clusters};
use densepara::mrp::{parse_mrp, MrpKey};
use densepara::paraphrase::{hrp_sentence, mrp_sentence, paraphrase_document, windows, DpConfig};
use densepara::qgen::{generate, is_answerable, vocabulary, QgenConfig};
use densepara::subevent::{truncate_states, EntityState};
use densepara::{analyze, Resources};
use proptest::prelude::*;

fn words(s: &str) -> Vec<String> {
    s.split(|c: char| c.is_whitespace() || matches!(c, ',' | '.' | ';'))
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
        .collect()
}

fn is_subsequence(needle: &[String], hay: &[String]) -> bool {
    let mut it = hay.iter();
    needle.iter().all(|n| it.any(|h| h == n))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn generated_recipes_analyse(doc in common::recipe()) {
        let res = Resources::default();
        let an = analyze(&doc, &res, Strictness::Strict).map_err(|e| TestCaseError::fail(e.to_string()))?;
        prop_assert_eq!(an.events.len(), doc.sentences.len());
    }

    #[test]
    fn hrp_keeps_every_source_word_in_order(doc in common::recipe()) {
        let res = Resources::default();
        let an = analyze(&doc, &res, Strictness::Strict).unwrap();
        for cfg in [DpConfig::default(), DpConfig::inline()] {
            for (i, s) in doc.sentences.iter().enumerate() {
                let src = words(&s.full_text());
                let out = words(&hrp_sentence(&an, i + 1, &cfg));
                prop_assert!(is_subsequence(&src, &out), "{:?} not in {:?}", src, out);
            }
        }
    }

    #[test]
    fn transfer_mode_has_object_keys_and_two_states(doc in common::recipe()) {
        let res = Resources::default();
        let an = analyze(&doc, &res, Strictness::Strict).unwrap();
        let cfg = DpConfig::transfer();
        for s in 1..=doc.sentences.len() {
            let line = mrp_sentence(&an, s, &cfg);
            prop_assert!(!line.contains("INGRE_"), "{}", line);
            for ev in parse_mrp(&line).events {
                for (k, v) in &ev.pre_block {
                    if matches!(k, MrpKey::Outcome | MrpKey::ObjectPart | MrpKey::ObjectResult) {
                        let states = v.split_whitespace().filter(|w| w.ends_with("ed") || w.ends_with("ped")).count();
                        prop_assert!(states <= 2, "{}", v);
                    }
                }
            }
        }
    }

    #[test]
    fn questions_are_answerable_and_anchored_on_hidden_entities(doc in common::recipe(), seed in any::<u64>()) {
        let res = Resources::default();
        let an = analyze(&doc, &res, Strictness::Strict).unwrap();
        let cfg = QgenConfig { seed, enumerate_all: seed % 2 == 0, ..Default::default() };
        let vocab = vocabulary(&an, &res, &cfg.prepositions);
        for item in generate(&an, &res, &cfg) {
            prop_assert!(is_answerable(&item, &vocab), "{:?}", item);
            prop_assert!(an.event(&item.event_id).unwrap().has_hidden());
            prop_assert!(item.question.ends_with('?'));
        }
    }

    #[test]
    fn sampling_is_deterministic(doc in common::recipe(), seed in any::<u64>()) {
        let res = Resources::default();
        let an = analyze(&doc, &res, Strictness::Strict).unwrap();
        let cfg = QgenConfig { seed, ..Default::default() };
        prop_assert_eq!(generate(&an, &res, &cfg), generate(&an, &res, &cfg));
    }

    #[test]
    fn lifespan_constituents_are_distinct(doc in common::recipe()) {
        let res = Resources::default();
        let an = analyze(&doc, &res, Strictness::Strict).unwrap();
        for c in &an.chains.chains {
            let report = an.chains.lifespan(&c.chain_id, &an.events).unwrap();
            let mut seen = std::collections::HashSet::new();
            for k in &report.constituents {
                prop_assert!(seen.insert(k.clone()), "{:?}", report);
            }
        }
    }

    #[test]
    fn timelines_grow_until_rebased(doc in common::recipe()) {
        let res = Resources::default();
        let an = analyze(&doc, &res, Strictness::Strict).unwrap();
        for c in &an.chains.chains {
            prop_assert!(c.timeline[0].event.is_none());
            for w in c.timeline.windows(2) {
                if !w[1].rebased {
                    prop_assert!(w[1].state.applied_states.len() >= w[0].state.applied_states.len());
                }
            }
        }
    }

    #[test]
    fn windows_partition_sentences(n in 0usize..12, k in 1usize..5) {
        let cfg = DpConfig { window_sentences: k, ..Default::default() };
        let s: Vec<String> = (0..n).map(|i| format!("s{i}")).collect();
        let w = windows(&s, &cfg);
        prop_assert_eq!(w.len(), n.div_ceil(k));
        prop_assert_eq!(w.join(" "), s.join(" "));
    }

    #[test]
    fn paraphrase_has_one_hrp_line_per_sentence(doc in common::recipe()) {
        let res = Resources::default();
        let an = analyze(&doc, &res, Strictness::Strict).unwrap();
        let p = paraphrase_document(&an, &DpConfig::default());
        prop_assert_eq!(p.hrp.len(), doc.sentences.len());
        prop_assert_eq!(p.mrp.len(), doc.sentences.len().div_ceil(3));
    }

    #[test]
    fn truncation_keeps_latest_states(states in prop::collection::vec("[a-z]{2,6}ed", 0..6), k in 0usize..4) {
        let mut s = EntityState::new("onions");
        for st in &states {
            s.apply(st);
        }
        let t = truncate_states(&s, k);
        prop_assert!(t.applied_states.len() <= k);
        prop_assert!(s.applied_states.ends_with(&t.applied_states));
        prop_assert_eq!(&t.base, &s.base);
    }

    #[test]
    fn coref_scores_are_bounded_and_perfect_on_identity(
        assign in prop::collection::vec((0usize..4, 0usize..4), 1..8)
    ) {
        let mut key: Clusters = vec![Vec::new(); 4];
        let mut resp: Clusters = vec![Vec::new(); 4];
        for (i, (a, b)) in assign.iter().enumerate() {
            key[*a].push(format!("m{i}"));
            resp[*b].push(format!("m{i}"));
        }
        key.retain(|c| !c.is_empty());
        resp.retain(|c| !c.is_empty());
        for f in [muc, b_cubed, ceaf_e] {
            let s = f(&key, &resp);
            for v in [s.precision, s.recall, s.f1] {
                prop_assert!((0.0..=1.0 + 1e-12).contains(&v));
            }
            let swapped = f(&resp, &key);
            prop_assert!((s.precision - swapped.recall).abs() < 1e-12);
        }
        prop_assert!((b_cubed(&key, &key).f1 - 1.0).abs() < 1e-12);
        prop_assert!((ceaf_e(&key, &key).f1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn kappa_is_symmetric(pairs in prop::collection::vec((0u8..3, 0u8..3), 1..30)) {
        let (a, b): (Vec<u8>, Vec<u8>) = pairs.into_iter().unzip();
        let k1 = cohen_kappa(&a, &b).unwrap();
        let k2 = cohen_kappa(&b, &a).unwrap();
        prop_assert!((k1 - k2).abs() < 1e-12);
        prop_assert!(k1 <= 1.0 + 1e-12);
    }

    #[test]
    fn qa_f1_is_symmetric(a in "[a-z ]{0,20}", b in "[a-z ]{0,20}") {
        prop_assert!((qa_f1(&a, &b) - qa_f1(&b, &a)).abs() < 1e-12);
    }
}
