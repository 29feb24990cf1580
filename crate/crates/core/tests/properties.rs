mod common;

use std::collections::BTreeSet;

use proptest::prelude::*;

use inflection_art::art1::{write_snapshot, Art1Config, Network};
use inflection_art::data::{synthetic_dataset, SynthParams};
use inflection_art::encoding::{
    build_feature_space, encode, encode_all, extract_ngrams, EncodingConfig, EncodingMode, Gram,
};
use inflection_art::eval::{adjusted_mutual_information, adjusted_rand_index, kmeans, Clustering, KMeansConfig};
use inflection_art::BinaryVector;

fn vectors(width: usize, max_n: usize) -> impl Strategy<Value = Vec<BinaryVector>> {
    prop::collection::vec(prop::collection::vec(any::<bool>(), width), 1..=max_n).prop_map(|rows| {
        rows.into_iter()
            .map(|mut r| {
                if !r.contains(&true) {
                    r[0] = true;
                }
                BinaryVector::from_bools(&r)
            })
            .collect()
    })
}

fn network_case() -> impl Strategy<Value = (Vec<BinaryVector>, f64, f64)> {
    (1usize..=48).prop_flat_map(|w| (vectors(w, 40), 0.0f64..=1.0, 1.001f64..6.0))
}

fn snapshot(net: &Network<f64>) -> Vec<u8> {
    let mut buf = Vec::new();
    write_snapshot(net, &mut buf).unwrap();
    buf
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn matches_reference((xs, rho, l) in network_case()) {
        let dense: Vec<Vec<u8>> = xs.iter().map(BinaryVector::to_bits).collect();
        let (assign, templates) = common::reference_fit(&dense, rho, l);
        let mut net = Network::new(Art1Config::new(rho, l).unwrap());
        prop_assert_eq!(net.fit(&xs).unwrap(), assign);
        let got: Vec<Vec<u8>> = net.templates().iter().map(BinaryVector::to_bits).collect();
        prop_assert_eq!(got, templates);
    }

    #[test]
    fn templates_only_lose_bits((xs, rho, l) in network_case()) {
        let mut net = Network::new(Art1Config::new(rho, l).unwrap());
        for x in &xs {
            let before = net.templates().to_vec();
            net.learn(x).unwrap();
            for (old, new) in before.iter().zip(net.templates()) {
                prop_assert!(new.is_subset_of(old));
            }
        }
    }

    #[test]
    fn weights_stay_coupled((xs, rho, l) in network_case()) {
        let mut net = Network::new(Art1Config::new(rho, l).unwrap());
        for x in &xs {
            net.learn(x).unwrap();
            for (j, t) in net.templates().iter().enumerate() {
                let scale = l / (l - 1.0 + t.count_ones() as f64);
                for (i, w) in net.bottom_up(j).into_iter().enumerate() {
                    let want = if t.get(i) { scale } else { 0.0 };
                    prop_assert!((w - want).abs() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn traced_and_fast_paths_agree((xs, rho, l) in network_case()) {
        let mut fast = Network::new(Art1Config::new(rho, l).unwrap());
        let mut traced = fast.clone();
        for x in &xs {
            let a = fast.learn(x).unwrap();
            let (b, trace) = traced.learn_one(x).unwrap();
            prop_assert_eq!(a, b);
            prop_assert_eq!(trace.chosen_category, b);
            for w in trace.tested_categories.windows(2) {
                prop_assert!(w[0].activation > w[1].activation
                    || (w[0].activation == w[1].activation && w[0].category < w[1].category));
            }
            if !trace.created_new {
                prop_assert!(trace.tested_categories.last().unwrap().match_score >= rho);
            }
        }
        prop_assert_eq!(fast, traced);
    }

    #[test]
    fn re_presentation_is_idempotent((xs, rho, l) in network_case()) {
        let mut net = Network::new(Art1Config::new(rho, l).unwrap());
        for x in &xs {
            let j = net.learn(x).unwrap();
            let state = snapshot(&net);
            prop_assert_eq!(net.learn(x).unwrap(), j);
            prop_assert_eq!(snapshot(&net), state);
        }
    }

    #[test]
    fn inference_is_pure((xs, rho, l) in network_case()) {
        let mut net = Network::new(Art1Config::new(rho, l).unwrap());
        net.fit(&xs).unwrap();
        let state = snapshot(&net);
        for x in &xs {
            let (j, trace) = net.infer_one(x).unwrap();
            prop_assert_eq!(net.infer(x).unwrap(), j);
            prop_assert!(!trace.created_new);
        }
        prop_assert_eq!(snapshot(&net), state);
    }

    #[test]
    fn fit_is_deterministic_and_bounded((xs, rho, l) in network_case()) {
        let mut a = Network::new(Art1Config::new(rho, l).unwrap());
        let mut b = Network::new(Art1Config::new(rho, l).unwrap());
        prop_assert_eq!(a.fit(&xs).unwrap(), b.fit(&xs).unwrap());
        prop_assert_eq!(snapshot(&a), snapshot(&b));
        let distinct: BTreeSet<Vec<u8>> = xs.iter().map(BinaryVector::to_bits).collect();
        prop_assert!(a.n_categories() <= distinct.len());
    }

    #[test]
    fn templates_are_and_of_members((xs, rho, l) in network_case()) {
        let mut net = Network::new(Art1Config::new(rho, l).unwrap());
        let assign = net.fit(&xs).unwrap();
        for (j, t) in net.templates().iter().enumerate() {
            let mut acc = BinaryVector::ones(t.width());
            for (x, &c) in xs.iter().zip(&assign) {
                if c == j {
                    acc.and_assign(x);
                }
            }
            prop_assert_eq!(&acc, t);
        }
    }

    #[test]
    fn single_precision_agrees((xs, rho, _l) in network_case()) {
        // rho on a coarse grid so that f32 and f64 see the same comparisons
        let rho = (rho * 4.0).round() / 4.0;
        let mut a = Network::<f64>::new(Art1Config::new(rho, 2.0).unwrap());
        let mut b = Network::<f32>::new(Art1Config::new(rho as f32, 2.0).unwrap());
        prop_assert_eq!(a.fit(&xs).unwrap(), b.fit(&xs).unwrap());
    }

    #[test]
    fn metrics_match_oracles(
        pair in (2usize..=12).prop_flat_map(|n| (
            prop::collection::vec(0usize..4, n),
            prop::collection::vec(0usize..4, n),
        ))
    ) {
        let (a, b) = pair;
        let (ca, cb) = (Clustering::new(a.clone()), Clustering::new(b.clone()));
        let ari: f64 = adjusted_rand_index(&ca, &cb).unwrap();
        let ami: f64 = adjusted_mutual_information(&ca, &cb).unwrap();
        prop_assert!((ari - common::brute_ari(&a, &b)).abs() <= 1e-12);
        prop_assert!((ami - common::direct_ami(&a, &b)).abs() <= 1e-9);
    }

    #[test]
    fn metrics_are_symmetric_and_relabel_invariant(
        pair in (2usize..=40).prop_flat_map(|n| (
            prop::collection::vec(0usize..5, n),
            prop::collection::vec(0usize..5, n),
        )),
        shift in 1usize..100,
    ) {
        let (a, b) = pair;
        let relabelled: Vec<usize> = b.iter().map(|&x| (4 - x) * 7 + shift).collect();
        let (ca, cb, cr) = (Clustering::new(a), Clustering::new(b), Clustering::new(relabelled));
        let ari: f64 = adjusted_rand_index(&ca, &cb).unwrap();
        let ami: f64 = adjusted_mutual_information(&ca, &cb).unwrap();
        prop_assert!((ari - adjusted_rand_index::<f64>(&cb, &ca).unwrap()).abs() <= 1e-12);
        prop_assert!((ari - adjusted_rand_index::<f64>(&ca, &cr).unwrap()).abs() <= 1e-12);
        prop_assert!((ami - adjusted_mutual_information::<f64>(&cb, &ca).unwrap()).abs() <= 1e-9);
        prop_assert!((ami - adjusted_mutual_information::<f64>(&ca, &cr).unwrap()).abs() <= 1e-9);
        prop_assert_eq!(adjusted_rand_index::<f64>(&ca, &ca).unwrap(), 1.0);
        prop_assert_eq!(adjusted_mutual_information::<f64>(&ca, &ca).unwrap(), 1.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn kmeans_is_deterministic_and_improves_with_restarts(xs in vectors(10, 30), seed in any::<u64>()) {
        let k = 3.min(xs.len());
        let fit = |r| kmeans::<f64>(&xs, &KMeansConfig { restarts: r, ..KMeansConfig::new(k, seed) }).unwrap();
        prop_assert_eq!(fit(3), fit(3));
        let mut prev = f64::INFINITY;
        for r in 1..6 {
            let f = fit(r);
            prop_assert!(f.inertia <= prev);
            prev = f.inertia;
        }
    }

    #[test]
    fn synthetic_encoding_properties(seed in any::<u64>(), noise in 0.0f64..0.3) {
        let ds = synthetic_dataset(&SynthParams { n_lexemes: 60, n_cells: 4, seed, noise, ..SynthParams::default() }).unwrap();
        let concat = EncodingConfig::default();
        let space = build_feature_space(&ds.samples, &concat).unwrap();
        let vs = encode_all(&ds.samples, &space, &concat);
        // every training vector non-empty, every column used
        prop_assert!(vs.iter().all(|v| !v.is_zero()));
        for i in 0..space.width() {
            prop_assert!(vs.iter().any(|v| v.get(i)));
        }
        // set-mode bits are the OR over cells of the concat bits
        let set = EncodingConfig { mode: EncodingMode::Set, ..EncodingConfig::default() };
        let set_space = build_feature_space(&ds.samples, &set).unwrap();
        for (s, v) in ds.samples.iter().zip(&vs) {
            let sv = encode(s, &set_space, &set);
            for (i, key) in set_space.columns().iter().enumerate() {
                let any_cell = space
                    .columns()
                    .iter()
                    .enumerate()
                    .any(|(j, k)| k.gram == key.gram && v.get(j));
                prop_assert_eq!(sv.get(i), any_cell);
            }
        }
    }
}

#[test]
fn synthetic_forms_are_recoverable_from_trigrams() {
    let ds = synthetic_dataset(&SynthParams::default()).unwrap();
    let config = EncodingConfig::default();
    let (mut unique, mut total) = (0usize, 0usize);
    for cell in &ds.cells {
        let forms: Vec<_> = ds.samples.iter().map(|s| &s.forms[cell]).collect();
        let sets: Vec<BTreeSet<Gram>> = forms.iter().map(|f| extract_ngrams(f, &config).into_iter().collect()).collect();
        for (i, f) in forms.iter().enumerate() {
            total += 1;
            // recoverable: no other distinct form of this cell has the same trigram set
            if !forms.iter().zip(&sets).any(|(g, s)| g != f && *s == sets[i]) {
                unique += 1;
            }
        }
    }
    let share = unique as f64 / total as f64;
    assert!(share >= 0.95, "only {share:.3} of forms recoverable");
}
