mod common;

use common::golden_documents;
use polyrec::tag::{assemble_mentions, paint_mentions};
use polyrec::EntityLabel;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn paint_then_assemble_is_identity(doc_idx in 0usize..20, seed in prop::collection::vec(0usize..9, 1..400)) {
        let docs = golden_documents();
        let d = &docs[doc_idx];
        let labels: Vec<EntityLabel> = (0..d.tokens.len())
            .map(|i| EntityLabel::ALL[seed[i % seed.len()] % EntityLabel::ALL.len()])
            .collect();
        let mentions = assemble_mentions(&d.doc, &d.tokens, &labels);
        let painted = paint_mentions(d.tokens.len(), &mentions);
        prop_assert_eq!(assemble_mentions(&d.doc, &d.tokens, &painted), mentions.clone());
        for m in &mentions {
            prop_assert!(m.start < m.end);
            prop_assert_eq!(m.surface.chars().count(), m.end - m.start);
        }
    }
}

#[test]
fn golden_labels_round_trip() {
    for d in golden_documents() {
        let mentions = assemble_mentions(&d.doc, &d.tokens, &d.labels);
        assert_eq!(paint_mentions(d.tokens.len(), &mentions), d.labels, "{}", d.doc.doc_id);
    }
}
