//! Annotated fixture documents shipped with the crate.

/// `(name, CoNLL-U text)` for every bundled fixture file.
pub const ALL: &[(&str, &str)] = &[
    ("appelkoek", APPELKOEK),
    ("chop_onions", CHOP_ONIONS),
    ("elision_cut", ELISION_CUT),
    ("cut_apples", CUT_APPLES),
    ("garlic", GARLIC),
    ("onions", ONIONS),
    ("sauce", SAUCE),
    ("saute_browned", SAUTE_BROWNED),
    ("saute_onions", SAUTE_ONIONS),
    ("sprinkle_explicit", SPRINKLE_EXPLICIT),
    ("sprinkle_annotated", SPRINKLE_ANNOTATED),
    ("transfer_peas", TRANSFER_PEAS),
];

pub const APPELKOEK: &str = include_str!("../../../fixtures/appelkoek.conllu");
pub const CHOP_ONIONS: &str = include_str!("../../../fixtures/chop_onions.conllu");
pub const ELISION_CUT: &str = include_str!("../../../fixtures/elision_cut.conllu");
pub const CUT_APPLES: &str = include_str!("../../../fixtures/cut_apples.conllu");
pub const GARLIC: &str = include_str!("../../../fixtures/garlic.conllu");
pub const ONIONS: &str = include_str!("../../../fixtures/onions.conllu");
pub const SAUCE: &str = include_str!("../../../fixtures/sauce.conllu");
pub const SAUTE_BROWNED: &str = include_str!("../../../fixtures/saute_browned.conllu");
pub const SAUTE_ONIONS: &str = include_str!("../../../fixtures/saute_onions.conllu");
pub const SPRINKLE_EXPLICIT: &str = include_str!("../../../fixtures/sprinkle_explicit.conllu");
pub const SPRINKLE_ANNOTATED: &str = include_str!("../../../fixtures/sprinkle_annotated.conllu");
pub const TRANSFER_PEAS: &str = include_str!("../../../fixtures/transfer_peas.conllu");

/// Looks a fixture up by name.
pub fn get(name: &str) -> Option<&'static str> {
    ALL.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}
