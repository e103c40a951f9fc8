//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each
//! and exits non-zero when any criterion fails.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::{Duration, Instant};

use metaforge::dst::{build_dst, Dst, NodeId, RightParent, VertexKind};
use metaforge::fusion::{fuse_classes, train_decision_matrix};
use metaforge::harness::{apply_noise, evaluate, fusion_samples, generate_corpus, LayoutProfile, NoiseModel};
use metaforge::ingest::{write_image_modal, write_text_modal};
use metaforge::metagraph::{
    document_attributes, export, generate, parse_graph_json, vertex_node_id, ExportFormat, MetaGraph,
    NodeKind, Relation, TripleExtractor,
};
use metaforge::pipeline::{run_pipeline, PipelineConfig};
use metaforge::text_metrics::{levenshtein, reconcile, ReconcileConfig};
use metaforge::{Element, ElementClass, SentenceCoord};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: Duration, what: &str) -> Result<(), String> {
    check(elapsed < limit, || {
        format!("{what} took {elapsed:?}, limit {limit:?}")
    })
}

// Edit distance straight from its recursive definition, memoized on (i, j).
fn lev_oracle(a: &[char], b: &[char]) -> usize {
    fn go(a: &[char], b: &[char], i: usize, j: usize, memo: &mut [Option<usize>]) -> usize {
        if i.min(j) == 0 {
            return i.max(j);
        }
        let slot = i * (b.len() + 1) + j;
        if let Some(v) = memo[slot] {
            return v;
        }
        let v = (go(a, b, i - 1, j, memo) + 1)
            .min(go(a, b, i, j - 1, memo) + 1)
            .min(go(a, b, i - 1, j - 1, memo) + usize::from(a[i - 1] != b[j - 1]));
        memo[slot] = Some(v);
        v
    }
    let mut memo = vec![None; (a.len() + 1) * (b.len() + 1)];
    go(a, b, a.len(), b.len(), &mut memo)
}

fn strings_over(alphabet: &[char], max_len: usize) -> Vec<Vec<char>> {
    let mut all = vec![Vec::new()];
    let mut frontier = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for s in &frontier {
            for &c in alphabet {
                let mut t: Vec<char> = s.clone();
                t.push(c);
                next.push(t);
            }
        }
        all.extend(next.iter().cloned());
        frontier = next;
    }
    all
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let words = strings_over(&['a', 'b', 'c'], 5);
    let as_strings: Vec<String> = words.iter().map(|w| w.iter().collect()).collect();
    let mut pairs = 0usize;
    for (wa, sa) in words.iter().zip(&as_strings) {
        for (wb, sb) in words.iter().zip(&as_strings) {
            let want = lev_oracle(wa, wb);
            let got = levenshtein(sa, sb);
            check(got == want, || {
                format!("lev({sa:?}, {sb:?}) = {got}, oracle {want}")
            })?;
            pairs += 1;
        }
    }
    let exhaustive = start.elapsed();
    within(exhaustive, Duration::from_secs(1), "exhaustive sweep")?;

    let mut runner = TestRunner::new(Config {
        cases: 10_000,
        failure_persistence: None,
        ..Config::default()
    });
    let strategy = (
        proptest::collection::vec(any::<char>(), 0..24),
        proptest::collection::vec(any::<char>(), 0..24),
    );
    runner
        .run(&strategy, |(a, b)| {
            let sa: String = a.iter().collect();
            let sb: String = b.iter().collect();
            prop_assert_eq!(levenshtein(&sa, &sb), lev_oracle(&a, &b));
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    Ok(format!(
        "{pairs} exhaustive pairs in {exhaustive:.2?}, 10000 random Unicode pairs, 0 mismatches"
    ))
}

/// A random valid outline: front matter, nested sections that never skip
/// a level, multi-sentence paragraphs and trailing attributes.
fn random_outline(rng: &mut ChaCha8Rng, max_elements: usize) -> Vec<Element> {
    use ElementClass::*;
    let mut out = Vec::new();
    let mut pi = 0u32;
    let push = |out: &mut Vec<Element>, class: ElementClass, pi: u32, si: u32| {
        out.push(Element::from_text(
            class,
            format!("{class} {pi}.{si}"),
            SentenceCoord::new(pi, si),
        ));
    };
    for class in [SignOfIssuingAuthority, DocumentNumber, Title, Addressee] {
        if rng.random_bool(0.6) {
            push(&mut out, class, pi, 0);
            pi += 1;
        }
    }
    let target = rng.random_range(1..=max_elements);
    let mut depth = 0u8;
    while out.len() < target {
        if rng.random_bool(0.4) {
            let level = rng.random_range(1..=(depth + 1).min(3));
            push(&mut out, ElementClass::ALL[3 + level as usize], pi, 0);
            depth = level;
        } else {
            for si in 0..rng.random_range(1..=3) {
                push(&mut out, Paragraph, pi, si);
            }
        }
        pi += rng.random_range(1..=3);
    }
    for class in [IssuingAuthority, DateOfWriting] {
        if rng.random_bool(0.5) {
            push(&mut out, class, pi, 0);
            pi += 1;
        }
    }
    out
}

fn outlines(n: usize, seed: u64) -> Vec<Vec<Element>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| random_outline(&mut rng, 200)).collect()
}

fn criterion_2() -> Outcome {
    let inputs = outlines(1000, 0x5eed);
    let start = Instant::now();
    let mut max_level = 0;
    for (i, els) in inputs.iter().enumerate() {
        let tree = build_dst(&format!("o{i}"), els, 4).map_err(|e| format!("outline {i}: {e}"))?;
        let back: Vec<Element> = tree.elements_in_order().into_iter().cloned().collect();
        check(&back == els, || {
            format!("outline {i}: in-order traversal differs from input")
        })?;
        let v = tree.check_properties();
        check(v.is_empty(), || {
            format!("outline {i}: {} violations, first: {}", v.len(), v[0])
        })?;
        max_level = tree
            .preorder()
            .iter()
            .map(|&n| tree.node(n).level)
            .max()
            .unwrap_or(0)
            .max(max_level);
    }
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(5), "1000 round trips")?;
    check(max_level == 4, || {
        format!("outlines only reached level {max_level}")
    })?;
    Ok(format!(
        "1000 outlines, 0 failures, deepest level {max_level}, {elapsed:.2?}"
    ))
}

// Right parent recomputed from the level rows of a pre-order walk.
fn right_parent_weight_oracle(tree: &Dst, v: NodeId) -> SentenceCoord {
    let parent = tree.node(v).parent.expect("non-root");
    let level = tree.node(parent).level;
    let row: Vec<NodeId> = tree
        .preorder()
        .into_iter()
        .filter(|&n| tree.node(n).level == level)
        .collect();
    let pos = row.iter().position(|&n| n == parent).expect("parent on its row");
    row.get(pos + 1)
        .and_then(|&n| tree.node(n).weight)
        .unwrap_or(SentenceCoord::SENTINEL)
}

fn sandwich(tree: &Dst) -> Result<usize, String> {
    let mut checked = 0;
    for v in tree.preorder().into_iter().skip(1) {
        let node = tree.node(v);
        let parent = tree.node(node.parent.expect("non-root"));
        let rp = right_parent_weight_oracle(tree, v);
        let lib = tree.right_parent(v).map_err(|e| e.to_string())?.weight(tree);
        check(lib == rp, || {
            format!("{}: right parent weight {lib} vs oracle {rp}", tree.doc_id())
        })?;
        check(parent.weight < node.weight && node.weight < Some(rp), || {
            format!("{}: sandwich fails at {:?}", tree.doc_id(), node.weight)
        })?;
        checked += 1;
    }
    Ok(checked)
}

fn criterion_3() -> Outcome {
    // rightmost level-1 vertex at 38 with children and no right neighbour
    use ElementClass::*;
    let mut els = vec![
        Element::from_text(Title, "Report", SentenceCoord::new(0, 0)),
        Element::from_text(Section1, "a", SentenceCoord::new(2, 0)),
        Element::from_text(Section1, "b", SentenceCoord::new(20, 0)),
        Element::from_text(Section1, "c", SentenceCoord::new(38, 0)),
    ];
    for pi in 39..=48 {
        els.push(Element::from_text(
            Section2,
            format!("e{pi}"),
            SentenceCoord::new(pi, 0),
        ));
    }
    let tree = build_dst("fig", &els, 4).map_err(|e| e.to_string())?;
    let c = *tree.root().subtree.last().expect("three sections");
    check(tree.node(c).weight == Some(SentenceCoord::new(38, 0)), || {
        "vertex c misplaced".into()
    })?;
    for &child in &tree.node(c).subtree {
        let rp = tree.right_parent(child).map_err(|e| e.to_string())?;
        check(rp == RightParent::Sentinel { level: 1 }, || {
            format!("right parent {rp:?}")
        })?;
        let ars = rp.node(&tree).ok_or("no ARS behind the level-1 sentinel")?;
        check(ars.kind == VertexKind::Ars, || {
            "sentinel bound is not an ARS".into()
        })?;
        let w = tree.node(child).weight.expect("weighted");
        check(w.pi > 38 && w < ars.weight.expect("ARS weight"), || {
            format!("{w} escapes (38, ARS)")
        })?;
        check(
            ars.weight == Some(SentenceCoord::new(0x3F3F3F3F, 0x3F3F3F3F)),
            || "ARS weight".into(),
        )?;
    }
    check(tree.node(c).subtree.len() == 10, || {
        "vertex c should have ten children".into()
    })?;

    let mut vertices = sandwich(&tree)?;
    let mut trees = 1;
    for (i, els) in outlines(1000, 0x5eed).iter().enumerate() {
        vertices += sandwich(&build_dst(&format!("o{i}"), els, 4).map_err(|e| e.to_string())?)?;
        trees += 1;
    }
    for d in generate_corpus(200, &LayoutProfile::default(), 77).map_err(|e| e.to_string())? {
        vertices += sandwich(&build_dst(&d.doc_id, &d.text_elements, 4).map_err(|e| e.to_string())?)?;
        trees += 1;
    }
    Ok(format!(
        "38 < children < 0x3F3F3F3F holds; {vertices} vertices in {trees} trees sandwiched"
    ))
}

fn complementary_noise(seed: u64) -> NoiseModel {
    use ElementClass::*;
    let mut m = NoiseModel {
        seed,
        ..NoiseModel::default()
    };
    m.text
        .set_row(Section2, &[(Section3, 1.0)])
        .expect("stochastic row");
    m.image
        .set_row(Section1, &[(Section2, 1.0)])
        .expect("stochastic row");
    m.image
        .set_row(Section3, &[(Section1, 1.0)])
        .expect("stochastic row");
    m.image
        .set_row(Addressee, &[(Title, 1.0)])
        .expect("stochastic row");
    m
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let model = complementary_noise(4);
    // every gold row has at least one modality that is always right
    for g in ElementClass::ALL {
        let t = model.text.row(g)[g.code()];
        let i = model.image.row(g)[g.code()];
        check(t == 1.0 || i == 1.0, || {
            format!("{g}: neither modality is reliable")
        })?;
    }
    let gold = generate_corpus(500, &LayoutProfile::default(), 2024).map_err(|e| e.to_string())?;
    let noisy = apply_noise(&gold, &model).map_err(|e| e.to_string())?;
    let (train, test) = (250, 500);
    let matrix = train_decision_matrix(
        &fusion_samples(&gold[..train], &noisy[..train]),
        ElementClass::COUNT,
    )
    .map_err(|e| e.to_string())?;
    let samples = fusion_samples(&gold[train..test], &noisy[train..test]);
    let golds: Vec<_> = samples.iter().map(|s| s.gold).collect();
    let text: Vec<_> = samples.iter().map(|s| s.text_pred).collect();
    let image: Vec<_> = samples.iter().map(|s| s.image_pred).collect();
    let fused: Vec<_> = samples
        .iter()
        .map(|s| fuse_classes(s.text_pred, s.image_pred, &matrix))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let f1 = |p: &[ElementClass]| evaluate(p, &golds).map(|r| r.micro_f1).map_err(|e| e.to_string());
    let (t, i, f) = (f1(&text)?, f1(&image)?, f1(&fused)?);
    check(f > t && f > i, || {
        format!("fused {f:.4} does not beat text {t:.4} and image {i:.4}")
    })?;
    check(f == 1.0, || format!("fused micro-F1 {f} != 1.0"))?;
    check((0.80..0.90).contains(&t), || {
        format!("text accuracy {t:.4} is not near 0.85")
    })?;
    check((0.69..0.79).contains(&i), || {
        format!("image accuracy {i:.4} is not near 0.74")
    })?;
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(30), "500-document experiment")?;
    Ok(format!(
        "text {t:.4}, image {i:.4}, fused {f:.4} over {} test elements, {elapsed:.2?}",
        golds.len()
    ))
}

// Micro-F1 and per-class F1 from a full confusion matrix.
#[allow(clippy::needless_range_loop)]
fn f1_oracle(pred: &[usize], gold: &[usize], k: usize) -> (f64, Vec<Option<f64>>) {
    let mut cm = vec![vec![0usize; k]; k];
    for (&p, &g) in pred.iter().zip(gold) {
        cm[g][p] += 1;
    }
    let (mut tp, mut fp, mut fn_) = (0, 0, 0);
    let mut per = Vec::new();
    for c in 0..k {
        let t = cm[c][c];
        let f_p: usize = (0..k).filter(|&g| g != c).map(|g| cm[g][c]).sum();
        let f_n: usize = (0..k).filter(|&p| p != c).map(|p| cm[c][p]).sum();
        tp += t;
        fp += f_p;
        fn_ += f_n;
        per.push((t + f_p + f_n > 0).then(|| 2.0 * t as f64 / (2 * t + f_p + f_n) as f64));
    }
    let micro = if tp + fp + fn_ == 0 {
        0.0
    } else {
        2.0 * tp as f64 / (2 * tp + fp + fn_) as f64
    };
    (micro, per)
}

fn agrees(pred: &[usize], gold: &[usize], k: usize) -> Result<(), String> {
    let r = evaluate(pred, gold).map_err(|e| e.to_string())?;
    let (micro, per) = f1_oracle(pred, gold, k);
    check((r.micro_f1 - micro).abs() < 1e-12, || {
        format!("micro {} vs oracle {micro}", r.micro_f1)
    })?;
    for (c, want) in per.iter().enumerate() {
        let got = r.per_class.get(&c).map(|s| s.f1);
        let same = match (got, want) {
            (Some(a), Some(b)) => (a - b).abs() < 1e-12,
            (None, None) => true,
            _ => false,
        };
        check(same, || format!("class {c}: {got:?} vs oracle {want:?}"))?;
    }
    Ok(())
}

fn criterion_5() -> Outcome {
    let r = evaluate(&["A", "B", "B"], &["A", "A", "B"]).map_err(|e| e.to_string())?;
    let hand = 2.0 * 2.0 / (2.0 * 2.0 + 1.0 + 1.0);
    check(
        (r.micro_f1 - hand).abs() < 1e-9 && (r.micro_f1 - 0.6667).abs() < 5e-5,
        || format!("hand example gives {}", r.micro_f1),
    )?;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..1000 {
        let k = rng.random_range(2..=5);
        let n = rng.random_range(1..=20);
        let gold: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
        let pred: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
        agrees(&pred, &gold, k)?;
    }
    let mut exhaustive = 0;
    for gm in 0..16u32 {
        for pm in 0..16u32 {
            let gold: Vec<usize> = (0..4).map(|b| (gm >> b & 1) as usize).collect();
            let pred: Vec<usize> = (0..4).map(|b| (pm >> b & 1) as usize).collect();
            agrees(&pred, &gold, 2)?;
            exhaustive += 1;
        }
    }
    Ok(format!(
        "hand example {:.4}, 1000 random instances and {exhaustive} exhaustive k=2 n=4 pairs match the oracle",
        r.micro_f1
    ))
}

const OCR_ALPHABET: &[char] = &[
    'a', 'b', 'c', 'd', 'e', 'f', 'g', 'h', 'k', 'm', 'n', 'p', 'r', 's', 't', 'u', 'w', 'x', 'y', 'z', '0',
    '1', '2', '3', '4', '5', '6', '7', '8', '9',
];

fn random_word(rng: &mut ChaCha8Rng) -> String {
    let n = rng.random_range(12..=30);
    (0..n)
        .map(|_| *OCR_ALPHABET.choose(rng).expect("non-empty"))
        .collect()
}

fn substitute(rng: &mut ChaCha8Rng, s: &str, count: usize) -> String {
    let mut chars: Vec<char> = s.chars().collect();
    let mut positions: Vec<usize> = (0..chars.len()).collect();
    for _ in 0..count.min(chars.len()) {
        let p = positions.swap_remove(rng.random_range(0..positions.len()));
        let old = chars[p];
        let replacement: Vec<char> = OCR_ALPHABET.iter().copied().filter(|&c| c != old).collect();
        chars[p] = *replacement.choose(rng).expect("alphabet has alternatives");
    }
    chars.into_iter().collect()
}

fn candidate_set(rng: &mut ChaCha8Rng, size: usize) -> Vec<String> {
    let mut set: Vec<String> = Vec::new();
    while set.len() < size {
        let w = random_word(rng);
        if set.iter().all(|o| levenshtein(o, &w) >= 7) {
            set.push(w);
        }
    }
    set
}

fn as_text(words: &[String]) -> Vec<Element> {
    words
        .iter()
        .enumerate()
        .map(|(i, w)| {
            Element::from_text(
                ElementClass::Paragraph,
                w.clone(),
                SentenceCoord::new(i as u32, 0),
            )
        })
        .collect()
}

fn as_image(ocr: &str) -> Element {
    let bbox =
        metaforge::DetectionVector::new(ElementClass::Paragraph, 0.9, 0.0, 0.0, 10.0, 10.0).expect("box");
    Element::from_image(bbox, ocr, 1)
}

fn criterion_6() -> Outcome {
    let cfg = ReconcileConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut recovered = 0;
    let mut forced_accepted = 0;
    let mut forced = 0;
    for trial in 0..1000 {
        let words = candidate_set(&mut rng, 5);
        let text = as_text(&words);
        let gold = rng.random_range(0..words.len());
        let subs = rng.random_range(0..=3);
        let ocr = substitute(&mut rng, &words[gold], subs);
        let m = reconcile(&[as_image(&ocr)], &text, &cfg)[0];
        check(m.text_index == Some(gold) && m.accepted, || {
            format!("trial {trial}: {subs} substitutions, got {m:?}, wanted text {gold}")
        })?;
        recovered += 1;

        let far = loop {
            let s = substitute(&mut rng, &words[gold], 10);
            if words.iter().all(|w| levenshtein(w, &s) >= 5) {
                break s;
            }
        };
        let m = reconcile(&[as_image(&far)], &text, &cfg)[0];
        forced += 1;
        if m.accepted {
            forced_accepted += 1;
        }
    }
    check(forced_accepted == 0, || {
        format!("{forced_accepted} of {forced} far corruptions accepted")
    })?;
    Ok(format!(
        "{recovered}/1000 recovered with acceptance, acceptance rate 0/{forced} at distance >= 5"
    ))
}

// Graph hierarchy mirrors the tree: same kinds, weights, levels and labels,
// children in the same order.
fn congruent(tree: &Dst, t: NodeId, graph: &MetaGraph, g: &str) -> Result<(), String> {
    let tv = tree.node(t);
    let gv = graph.node(g).ok_or("missing graph node")?;
    let want_kind = match tv.kind {
        VertexKind::Root => NodeKind::Document,
        VertexKind::Section => NodeKind::Section,
        _ => NodeKind::Paragraph,
    };
    check(
        gv.kind == want_kind && gv.level == tv.level && gv.weight == tv.weight,
        || {
            format!(
                "{}: graph node {g} does not mirror vertex {}",
                tree.doc_id(),
                t.index()
            )
        },
    )?;
    let mut kids = graph.children(g, true);
    kids.sort_by_key(|n| n.weight);
    check(kids.len() == tv.subtree.len(), || {
        format!(
            "{}: {} graph children vs {} tree children",
            tree.doc_id(),
            kids.len(),
            tv.subtree.len()
        )
    })?;
    for (&tc, gc) in tv.subtree.iter().zip(kids) {
        congruent(tree, tc, graph, &gc.id)?;
    }
    Ok(())
}

// Owner of a coordinate: the heaviest section not after it, else the root.
fn owner_oracle(tree: &Dst, coord: SentenceCoord) -> NodeId {
    tree.preorder()
        .into_iter()
        .filter(|&n| tree.node(n).kind == VertexKind::Section && tree.node(n).weight <= Some(coord))
        .max_by_key(|&n| tree.node(n).weight)
        .unwrap_or(NodeId::ROOT)
}

fn criterion_7() -> Outcome {
    let docs = generate_corpus(200, &LayoutProfile::default(), 7).map_err(|e| e.to_string())?;
    let extractor = TripleExtractor::default();
    let mut triples_checked = 0;
    for d in &docs {
        let tree = build_dst(&d.doc_id, &d.text_elements, 4).map_err(|e| e.to_string())?;
        let triples = extractor.extract(&d.sentence_table);
        let build = generate(&tree, &document_attributes(&tree), &triples);
        check(build.diagnostics.is_empty(), || {
            format!("{}: unexpected diagnostics", d.doc_id)
        })?;
        let graph = build.graph;

        let hierarchy = graph.edges().filter(|e| e.rel.is_hierarchy()).count();
        check(hierarchy + 1 == tree.len(), || {
            format!(
                "{}: {hierarchy} hierarchy edges for {} vertices",
                d.doc_id,
                tree.len()
            )
        })?;
        let doc = graph.document_node().ok_or("no document node")?;
        congruent(&tree, NodeId::ROOT, &graph, &doc.id)?;

        for t in &triples {
            let owner = vertex_node_id(&tree, owner_oracle(&tree, t.origin));
            for label in [&t.subject, &t.object] {
                let entity = graph
                    .nodes()
                    .find(|n| n.kind == NodeKind::Entity && &n.label == label)
                    .ok_or_else(|| format!("{}: entity {label:?} missing", d.doc_id))?;
                let attached = graph
                    .edges()
                    .any(|e| e.rel == Relation::Mentions && e.src == owner && e.dst == entity.id);
                check(attached, || {
                    format!("{}: {label:?} not attached to its owner", d.doc_id)
                })?;
            }
            triples_checked += 1;
        }

        let json = export(&graph, ExportFormat::GraphJson);
        let back = parse_graph_json(&json).map_err(|e| e.to_string())?;
        check(back == graph, || {
            format!("{}: graph-json round trip changed the graph", d.doc_id)
        })?;
        check(export(&back, ExportFormat::GraphJson) == json, || {
            format!("{}: re-export differs", d.doc_id)
        })?;
    }
    check(triples_checked > 0, || "no triples were exercised".into())?;
    Ok(format!(
        "200 documents congruent, {triples_checked} triples on their owners, lossless graph-json"
    ))
}

fn hash_dir(dir: &Path) -> Result<BTreeMap<String, String>, String> {
    let mut out = BTreeMap::new();
    for entry in std::fs::read_dir(dir).map_err(|e| e.to_string())? {
        let path = entry.map_err(|e| e.to_string())?.path();
        let bytes = std::fs::read(&path).map_err(|e| e.to_string())?;
        let digest: String = Sha256::digest(&bytes)
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect();
        out.insert(
            path.file_name().expect("file").to_string_lossy().into_owned(),
            digest,
        );
    }
    Ok(out)
}

fn criterion_8() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let gold = generate_corpus(30, &LayoutProfile::default(), 8).map_err(|e| e.to_string())?;
    let mut model = complementary_noise(8);
    model.ocr_rate = 0.05;
    let noisy = apply_noise(&gold, &model).map_err(|e| e.to_string())?;
    let matrix = train_decision_matrix(&fusion_samples(&gold, &noisy), ElementClass::COUNT)
        .map_err(|e| e.to_string())?;
    let write = |name: &str, content: &str| {
        let p = dir.path().join(name);
        std::fs::write(&p, content).map(|_| p).map_err(|e| e.to_string())
    };
    let text = write("text.tsv", &write_text_modal(&noisy))?;
    let image = write("image.tsv", &write_image_modal(&noisy))?;
    let matrix_path = write("matrix.txt", &matrix.to_text())?;
    let refs = dir.path().join("refs");
    std::fs::create_dir(&refs).map_err(|e| e.to_string())?;
    std::fs::write(
        refs.join("doc00001.txt"),
        "[1] A. Author. Some report.\n[2] B. Author. Another.\n",
    )
    .map_err(|e| e.to_string())?;

    let run = |out: &str, jobs: usize| -> Result<BTreeMap<String, String>, String> {
        let mut cfg = PipelineConfig::new(&text, &image, dir.path().join(out));
        cfg.matrix = Some(matrix_path.clone());
        cfg.refs_dir = Some(refs.clone());
        cfg.jobs = Some(jobs);
        run_pipeline(&cfg).map_err(|e| e.to_string())?;
        hash_dir(&dir.path().join(out))
    };
    let a = run("run-a", 1)?;
    let b = run("run-b", 4)?;
    check(a == b, || {
        let diff: Vec<_> = a
            .iter()
            .filter(|(k, v)| b.get(*k) != Some(v))
            .map(|(k, _)| k.clone())
            .collect();
        format!("artifacts differ: {diff:?}")
    })?;
    check(a.len() == 2 + 30 * 4, || {
        format!("expected 122 artifacts, found {}", a.len())
    })?;
    Ok(format!(
        "{} artifacts byte-identical across two runs (1 and 4 workers)",
        a.len()
    ))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("levenshtein matches the recursive oracle", criterion_1),
        ("tree round trip and property check", criterion_2),
        ("parent < vertex < right parent with sentinel", criterion_3),
        ("fusion beats both modalities", criterion_4),
        ("micro-F1 matches hand and brute-force oracle", criterion_5),
        ("OCR reconciliation recovers and rejects", criterion_6),
        ("graph congruent with the tree", criterion_7),
        ("pipeline artifacts are deterministic", criterion_8),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("PASS [{}] {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL [{}] {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
