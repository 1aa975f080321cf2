use dsr_core::agreement::krippendorff_alpha;
use dsr_core::analytics::{
    attribute_log_odds, pairwise_themes, threshold_labels, AnalyticsConfig, AttributePredicate, CategoryLexicon,
    LabelSet, LabeledSpan, RegardLabel,
};
use dsr_core::bio::{bio_to_spans, spans_to_bio};
use dsr_core::scorer::{pool_span, train, EmbeddedText, ScorerConfig, TrainingBatch};
use dsr_core::spaneval::evaluate_spans;
use dsr_core::stats::{fisher_exact, welch_t, ContingencyTable};
use dsr_core::tokenize::tokenize;
use dsr_core::{Corpus, Provenance, RegardVector, ScoredSpan, Span, SpanKind, Text};
use proptest::prelude::*;
use std::num::NonZeroUsize;

const WORDS: &[&str] = &["they", "hurt", "the", "children", "we", "help", "E.U.", "police", ",", "."];

fn sentence() -> impl Strategy<Value = Vec<&'static str>> {
    prop::collection::vec(prop::sample::select(WORDS), 1..14)
}

fn kind() -> impl Strategy<Value = SpanKind> {
    prop_oneof![Just(SpanKind::Character), Just(SpanKind::Topic)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn bio_round_trip_is_identity(words in sentence(), cuts in prop::collection::vec((0usize..14, 1usize..4, kind()), 0..5)) {
        let text = Text::new("t", words.join(" "));
        let tokens = tokenize(&text.content);
        // lay out non-overlapping token-aligned spans left to right
        let mut spans = Vec::new();
        let mut next = 0;
        for (gap, len, k) in cuts {
            let first = next + gap % 3;
            let last = first + len - 1;
            if last >= tokens.len() {
                break;
            }
            spans.push(Span::new(&text, tokens[first].start, tokens[last].end, k).unwrap());
            next = last + 1;
        }
        let tags = spans_to_bio(&tokens, &spans).unwrap();
        let back = bio_to_spans(&text, &tokens, &tags).unwrap();
        prop_assert_eq!(back, spans);
    }

    #[test]
    fn alpha_invariant_under_shift_and_unit_order(
        units in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 2..5), 2..10),
        shift in -0.5f64..0.5,
    ) {
        let Ok(a) = krippendorff_alpha(&units) else { return Ok(()); };
        let shifted: Vec<Vec<f64>> = units.iter().map(|u| u.iter().map(|v| v + shift).collect()).collect();
        let mut reordered = units.clone();
        reordered.reverse();
        for u in &mut reordered {
            u.reverse();
        }
        prop_assert!((krippendorff_alpha(&shifted).unwrap() - a).abs() < 1e-9);
        prop_assert!((krippendorff_alpha(&reordered).unwrap() - a).abs() < 1e-9);
    }

    #[test]
    fn welch_negation_flips_t_keeps_p(
        a in prop::collection::vec(-1.0f64..1.0, 2..30),
        b in prop::collection::vec(-1.0f64..1.0, 2..30),
    ) {
        let Ok(r) = welch_t(&a, &b) else { return Ok(()); };
        let na: Vec<f64> = a.iter().map(|v| -v).collect();
        let nb: Vec<f64> = b.iter().map(|v| -v).collect();
        let n = welch_t(&na, &nb).unwrap();
        prop_assert!((n.t + r.t).abs() <= 1e-12 * r.t.abs().max(1.0));
        prop_assert!((n.p_two_sided - r.p_two_sided).abs() < 1e-12);
        prop_assert!(r.p_two_sided > 0.0 && r.p_two_sided <= 1.0);
    }

    #[test]
    fn welch_p_shrinks_with_mean_gap(base in prop::collection::vec(-1.0f64..1.0, 3..20), gap in 0.01f64..1.0) {
        let Ok(r0) = welch_t(&base, &base) else { return Ok(()); };
        prop_assert_eq!(r0.p_two_sided, 1.0);
        let near: Vec<f64> = base.iter().map(|v| v + gap).collect();
        let far: Vec<f64> = base.iter().map(|v| v + 2.0 * gap).collect();
        let p_near = welch_t(&base, &near).unwrap().p_two_sided;
        let p_far = welch_t(&base, &far).unwrap().p_two_sided;
        prop_assert!(p_far <= p_near);
    }

    #[test]
    fn fisher_symmetric_under_transpose(a in 0u64..30, b in 0u64..30, c in 0u64..30, d in 0u64..30) {
        let t = ContingencyTable::new(a, b, c, d);
        prop_assume!(!t.has_zero_margin());
        let p = fisher_exact(t).unwrap().p_two_sided;
        let q = fisher_exact(t.transposed_rows_and_columns()).unwrap().p_two_sided;
        prop_assert!((p - q).abs() < 1e-12);
        prop_assert!(p > 0.0 && p <= 1.0);
    }

    #[test]
    fn threshold_monotone_in_sigma(
        oa in -1.0f64..1.0, va in -1.0f64..1.0, hh in -1.0f64..1.0,
        s1 in 0.01f64..0.99, s2 in 0.01f64..0.99,
    ) {
        let v = RegardVector::for_kind(SpanKind::Character, oa, va, hh).unwrap();
        let (lo, hi) = if s1 <= s2 { (s1, s2) } else { (s2, s1) };
        prop_assert!(threshold_labels(&v, hi).is_subset(&threshold_labels(&v, lo)));
    }

    #[test]
    fn pooling_is_linear_and_order_free(
        rows in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 3), 4),
        scale in prop::sample::select(vec![0.5f64, 2.0, 4.0, -1.0]),
    ) {
        let text = Text::new("t", "we help the children");
        let tokens = tokenize(&text.content);
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        let scaled: Vec<f64> = flat.iter().map(|v| v * scale).collect();
        let mut swapped = rows.clone();
        swapped.swap(1, 2);
        let swapped: Vec<f64> = swapped.into_iter().flatten().collect();
        let span = Span::new(&text, 3, 12, SpanKind::Topic).unwrap();
        let e = EmbeddedText::new("t", tokens.clone(), 3, flat).unwrap();
        let es = EmbeddedText::new("t", tokens.clone(), 3, scaled).unwrap();
        let ew = EmbeddedText::new("t", tokens, 3, swapped).unwrap();
        let p = pool_span(&e, &span).unwrap();
        // power-of-two scales are exact; -1 too
        let ps = pool_span(&es, &span).unwrap();
        for (x, y) in p.iter().zip(&ps) {
            prop_assert_eq!(x * scale, *y);
        }
        let pw = pool_span(&ew, &span).unwrap();
        for (x, y) in p.iter().zip(&pw) {
            prop_assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn evaluation_is_symmetric_with_prf_swapped(
        g in prop::collection::btree_set((0usize..4, kind()), 0..5),
        p in prop::collection::btree_set((0usize..4, kind()), 0..5),
    ) {
        let text = Text::new("t", "they hurt the children");
        let tokens = tokenize(&text.content);
        let to_spans = |set: &std::collections::BTreeSet<(usize, SpanKind)>| -> Vec<Span> {
            set.iter().map(|(i, k)| Span::new(&text, tokens[*i].start, tokens[*i].end, *k).unwrap()).collect()
        };
        let (gs, ps) = (to_spans(&g), to_spans(&p));
        let texts = [text.clone()];
        let fwd = evaluate_spans(&texts, &gs, &ps).unwrap();
        let back = evaluate_spans(&texts, &ps, &gs).unwrap();
        prop_assert_eq!(fwd.micro_span.prf.precision, back.micro_span.prf.recall);
        prop_assert_eq!(fwd.micro_span.prf.f1, back.micro_span.prf.f1);
        let mut doubled = ps.clone();
        doubled.extend(ps.iter().cloned());
        prop_assert_eq!(evaluate_spans(&texts, &gs, &doubled).unwrap(), fwd);
    }
}

fn labeled(labels: &[RegardLabel], surface: &str) -> LabeledSpan {
    let mut set = LabelSet::default();
    for l in labels {
        set.insert(*l);
    }
    LabeledSpan {
        surface: surface.into(),
        kind: SpanKind::Character,
        labels: set,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn log_odds_sign_flips_on_swap(k_in in 0usize..20, n_in in 1usize..20, k_out in 0usize..20, n_out in 1usize..20) {
        let pop = |k: usize, n: usize| -> Vec<LabeledSpan> {
            (0..k).map(|_| labeled(&[RegardLabel::Opposed], "they"))
                .chain((0..n).map(|_| labeled(&[], "they")))
                .collect()
        };
        let (a, b) = (pop(k_in, n_in), pop(k_out, n_out));
        let lex = CategoryLexicon::default();
        let pred = AttributePredicate::Label(RegardLabel::Opposed);
        let fwd = attribute_log_odds(&a, &b, &pred, &lex, true).unwrap();
        let rev = attribute_log_odds(&b, &a, &pred, &lex, true).unwrap();
        prop_assert!((fwd.log_odds + rev.log_odds).abs() < 1e-12);
        prop_assert!((fwd.p - rev.p).abs() < 1e-12);
    }

    #[test]
    fn theme_frequencies_ignore_text_order(seed in any::<u64>(), n in 2usize..12) {
        let mut rng = dsr_core::hash::SplitMix64::new(seed);
        let surfaces = ["they", "me", "police", "you", "children"];
        let mut texts = Vec::new();
        let mut spans = Vec::new();
        for i in 0..n {
            let a = surfaces[rng.next_index(surfaces.len())];
            let b = surfaces[rng.next_index(surfaces.len())];
            let text = Text::new(format!("t{i}"), format!("{a} and {b}"));
            let sb = a.chars().count() + 5;
            for (s, e) in [(0, a.chars().count()), (sb, sb + b.chars().count())] {
                let v = RegardVector::for_kind(
                    SpanKind::Character,
                    rng.next_range(-1.0, 1.0),
                    rng.next_range(-1.0, 1.0),
                    rng.next_range(-1.0, 1.0),
                ).unwrap();
                spans.push(ScoredSpan::new(Span::new(&text, s, e, SpanKind::Character).unwrap(), v, Provenance::HumanAggregate).unwrap());
            }
            texts.push(text);
        }
        let cfg = AnalyticsConfig::default();
        let lex = CategoryLexicon::default();
        let fwd = pairwise_themes(&Corpus::new("c", texts.clone(), spans.clone()).unwrap(), &lex, &cfg);
        texts.reverse();
        spans.reverse();
        let rev = pairwise_themes(&Corpus::new("c", texts, spans).unwrap(), &lex, &cfg);
        prop_assert_eq!(fwd.edges, rev.edges);
        prop_assert_eq!(fwd.nodes.len(), rev.nodes.len());
        for (k, v) in &fwd.nodes {
            prop_assert_eq!(v.frequency, rev.nodes[k].frequency);
            prop_assert!((v.mean_oa - rev.nodes[k].mean_oa).abs() < 1e-12);
        }
    }
}

fn small_batch(seed: u64, noise: Option<f64>) -> TrainingBatch {
    let mut rng = dsr_core::hash::SplitMix64::new(seed);
    let h = 6;
    let n = 10;
    let pooled: Vec<f64> = (0..n * h).map(|_| rng.next_range(-1.0, 1.0)).collect();
    let masks: Vec<[bool; 3]> = (0..n).map(|i| if i % 3 == 0 { [true, false, false] } else { [true; 3] }).collect();
    let targets: Vec<[f64; 3]> = (0..n)
        .map(|i| {
            let mut t = [rng.next_range(-0.9, 0.9), rng.next_range(-0.9, 0.9), rng.next_range(-0.9, 0.9)];
            for (k, cell) in t.iter_mut().enumerate() {
                if !masks[i][k] {
                    *cell = noise.map_or(0.0, |x| x * (k as f64 + 1.0));
                }
            }
            t
        })
        .collect();
    TrainingBatch::new(h, pooled, targets, masks).unwrap()
}

#[test]
fn masked_cells_do_not_reach_the_head() {
    let config = ScorerConfig {
        h: 6,
        hidden: 5,
        epochs: 50,
        lr: 0.01,
        batch_size: NonZeroUsize::new(4),
        ..ScorerConfig::default()
    };
    let (clean, _) = train(&small_batch(1, None), &config).unwrap();
    for noise in [0.3, -1.0, 0.999] {
        let (noisy, _) = train(&small_batch(1, Some(noise)), &config).unwrap();
        assert_eq!(clean.parameters(), noisy.parameters());
    }
}
