use metaforge::dst::{build_dst, Dst};
use metaforge::fusion::{fuse_classes, train_decision_matrix, DecisionMatrix, FusionSample};
use metaforge::harness::{evaluate, generate_corpus, LayoutProfile};
use metaforge::ingest::{parse_image_modal, parse_text_modal, write_image_modal, write_text_modal};
use metaforge::metagraph::{
    export, generate, parse_reference_list, parse_triples, write_triples, ContextTriple, ExportFormat,
};
use metaforge::model::Taxonomy;
use metaforge::segment::{segment, SegmentConfig};
use metaforge::text_metrics::levenshtein;
use metaforge::{Element, ElementClass, SentenceCoord};
use proptest::prelude::*;

fn short_string() -> impl Strategy<Value = String> {
    proptest::collection::vec(
        prop_oneof![Just('a'), Just('b'), Just('é'), Just('中'), any::<char>()],
        0..12,
    )
    .prop_map(|v| v.into_iter().collect())
}

fn class() -> impl Strategy<Value = ElementClass> {
    (0..ElementClass::COUNT).prop_map(|c| ElementClass::from_code(c).unwrap())
}

/// Valid outlines as (kind, sentences) steps: 0..=2 a section one level
/// deeper at most, 3 a paragraph.
fn outline() -> impl Strategy<Value = Vec<Element>> {
    proptest::collection::vec((0u8..4, 1u32..3, 1u32..3), 0..60).prop_map(|steps| {
        let mut out = vec![Element::from_text(
            ElementClass::Title,
            "T",
            SentenceCoord::new(0, 0),
        )];
        let mut pi = 1;
        let mut depth = 0u8;
        for (kind, sentences, gap) in steps {
            if kind < 3 {
                let level = (kind + 1).min(depth + 1);
                let class = ElementClass::ALL[3 + level as usize];
                out.push(Element::from_text(
                    class,
                    format!("h{pi}"),
                    SentenceCoord::new(pi, 0),
                ));
                depth = level;
            } else {
                for si in 0..sentences {
                    out.push(Element::from_text(
                        ElementClass::Paragraph,
                        format!("p{pi}"),
                        SentenceCoord::new(pi, si),
                    ));
                }
            }
            pi += gap;
        }
        out
    })
}

proptest! {
    #[test]
    fn levenshtein_is_a_metric(a in short_string(), b in short_string(), c in short_string()) {
        let ab = levenshtein(&a, &b);
        prop_assert_eq!(ab, levenshtein(&b, &a));
        prop_assert_eq!(ab == 0, a == b);
        prop_assert!(levenshtein(&a, &c) <= ab + levenshtein(&b, &c));
        let (la, lb) = (a.chars().count(), b.chars().count());
        prop_assert!(ab >= la.abs_diff(lb) && ab <= la.max(lb));
    }

    #[test]
    fn tree_round_trips_and_is_sound(els in outline()) {
        let tree = build_dst("p", &els, 4).unwrap();
        prop_assert!(tree.check_properties().is_empty());
        let back: Vec<Element> = tree.elements_in_order().into_iter().cloned().collect();
        prop_assert_eq!(&back, &els);
        let json = tree.to_json();
        let again = Dst::from_json(&json).unwrap();
        prop_assert_eq!(again.to_json(), json);
        prop_assert_eq!(&again, &tree);
    }

    #[test]
    fn graph_export_is_deterministic(els in outline()) {
        let tree = build_dst("p", &els, 4).unwrap();
        let g1 = generate(&tree, &[], &[]).graph;
        let g2 = generate(&tree, &[], &[]).graph;
        for f in ExportFormat::ALL {
            prop_assert_eq!(export(&g1, f), export(&g2, f));
        }
        let hierarchy = g1.edges().filter(|e| e.rel.is_hierarchy()).count();
        prop_assert_eq!(hierarchy + 1, tree.len());
    }

    #[test]
    fn text_modal_round_trip(texts in proptest::collection::vec((class(), "[a-z\t\n\\\\ ]{0,12}"), 1..20)) {
        let mut src = String::new();
        for (i, (c, t)) in texts.iter().enumerate() {
            src.push_str(&format!("d\t{c}\t{i}\t0\t{}\n", metaforge::ingest::escape_field(t)));
        }
        let docs = parse_text_modal(&src, "p", &Taxonomy::default()).unwrap();
        prop_assert_eq!(docs[0].text_elements.len(), texts.len());
        for (e, (_, t)) in docs[0].text_elements.iter().zip(&texts) {
            prop_assert_eq!(&e.text, t);
        }
        prop_assert_eq!(write_text_modal(&docs), src);
    }

    #[test]
    fn corpus_files_round_trip(seed in any::<u64>()) {
        let docs = generate_corpus(3, &LayoutProfile::default(), seed).unwrap();
        let tax = Taxonomy::default();
        let text = write_text_modal(&docs);
        let image = write_image_modal(&docs);
        let t = parse_text_modal(&text, "t", &tax).unwrap();
        let i = parse_image_modal(&image, "i", &tax).unwrap();
        prop_assert_eq!(write_text_modal(&t), text);
        prop_assert_eq!(write_image_modal(&i), image);
        for (a, b) in docs.iter().zip(&t) {
            prop_assert_eq!(&a.sentence_table, &b.sentence_table);
        }
    }

    #[test]
    fn segmentation_is_idempotent(paras in proptest::collection::vec("[A-Za-z ]{1,10}[.!?]( [A-Za-z]{1,8}[.!?]){0,3}", 1..6)) {
        let text = paras.join("\n");
        let cfg = SegmentConfig::default();
        let table = segment(&text, &cfg);
        let rebuilt: Vec<String> = {
            let mut by_pi: Vec<Vec<&str>> = Vec::new();
            for (c, s) in &table {
                if by_pi.len() <= c.pi as usize {
                    by_pi.resize(c.pi as usize + 1, Vec::new());
                }
                by_pi[c.pi as usize].push(s);
            }
            by_pi.into_iter().map(|v| v.join(" ")).collect()
        };
        prop_assert_eq!(segment(&rebuilt.join("\n"), &cfg), table);
    }

    #[test]
    fn matrix_text_round_trip(rows in proptest::collection::vec(0u8..3, 100)) {
        let mut m = DecisionMatrix::untrained(10).unwrap();
        for (j, w) in rows.iter().enumerate() {
            let weighting = match w {
                0 => metaforge::fusion::Weighting::Text,
                1 => metaforge::fusion::Weighting::Image,
                _ => metaforge::fusion::Weighting::Even,
            };
            m.set_row(j / 10, j % 10, weighting);
        }
        prop_assert_eq!(DecisionMatrix::from_text(&m.to_text(), "m").unwrap(), m);
    }

    /// When every gold class has one modality that is always right and
    /// training saw every row, fusion is never wrong.
    #[test]
    fn trained_fusion_is_row_faithful(
        text_err in proptest::collection::vec(proptest::option::weighted(0.3, class()), 10),
        image_err in proptest::collection::vec(proptest::option::weighted(0.3, class()), 10),
    ) {
        let samples: Vec<FusionSample> = ElementClass::ALL
            .iter()
            .map(|&g| {
                let t = text_err[g.code()].unwrap_or(g);
                // image errs only where text is right
                let i = if t == g { image_err[g.code()].unwrap_or(g) } else { g };
                FusionSample { text_pred: t, image_pred: i, gold: g }
            })
            .collect();
        let rows: std::collections::BTreeSet<(ElementClass, ElementClass)> =
            samples.iter().map(|s| (s.text_pred, s.image_pred)).collect();
        prop_assume!(rows.len() == samples.len());
        let m = train_decision_matrix(&samples, 10).unwrap();
        for s in &samples {
            prop_assert_eq!(fuse_classes(s.text_pred, s.image_pred, &m).unwrap(), s.gold);
        }
    }

    #[test]
    fn micro_f1_equals_accuracy(pairs in proptest::collection::vec((0u8..4, 0u8..4), 1..30)) {
        let (pred, gold): (Vec<u8>, Vec<u8>) = pairs.into_iter().unzip();
        let r = evaluate(&pred, &gold).unwrap();
        let acc = pred.iter().zip(&gold).filter(|(p, g)| p == g).count() as f64 / gold.len() as f64;
        prop_assert!((r.micro_f1 - acc).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&r.macro_f1));
    }

    #[test]
    fn reference_count_matches_entries(n in 0usize..20) {
        let text: String = (1..=n).map(|i| format!("[{i}] Entry {i}.\n")).collect();
        prop_assert_eq!(parse_reference_list(&text).unwrap().len(), n);
    }

    #[test]
    fn triple_file_round_trip(ts in proptest::collection::vec(("[a-z]{1,5}", "[a-z]{1,5}", "[a-z\t ]{0,5}[a-z]", 0u32..50, 0u32..5), 0..10)) {
        let triples: Vec<ContextTriple> = ts
            .into_iter()
            .map(|(s, p, o, pi, si)| ContextTriple::new(s, p, o, SentenceCoord::new(pi, si)).unwrap())
            .collect();
        prop_assert_eq!(parse_triples(&write_triples(&triples), "t").unwrap(), triples);
    }
}
