mod common;

use std::sync::OnceLock;

use featnet::arch::{
    compile, count_params, infer_shape, validate_graph, Activation, DatasetSpec, Layer, Padding, PendingEntry,
    PendingOutputs, PoolType, TensorShape,
};
use featnet::diversity::{distance, sample_diverse, DiversityOptions, FlatSelection, Metric};
use featnet::dnn::{dnn_model, profile_overlay, DnnSpace, RESTRICTED_PROFILE};
use featnet::emit::{emit_ir, parse_ir, IrProvenance};
use featnet::flatten::{flatten, lift, to_cnf, BooleanModel, CnfFormula, FlattenBounds};
use featnet::fm::{check_configuration, parse_fm, Configuration, FeatureModel};
use featnet::sat::{enumerate_all, random_config};
use proptest::prelude::*;

use common::tiny::tiny_model_text;

struct Flat {
    model: FeatureModel,
    bm: BooleanModel,
    cnf: CnfFormula,
}

fn flat(model: FeatureModel) -> Flat {
    let bm = flatten(&model, &FlattenBounds::declared()).unwrap();
    let cnf = to_cnf(&bm);
    Flat { model, bm, cnf }
}

fn small_dnn() -> &'static Flat {
    static CELL: OnceLock<Flat> = OnceLock::new();
    CELL.get_or_init(|| {
        let m = dnn_model(&DnnSpace::with_bounds(2, 3)).unwrap();
        flat(m.with_overlay(profile_overlay(RESTRICTED_PROFILE).unwrap()).unwrap())
    })
}

const FLAT_HEAD: &str = "!Convolution;
!Pooling;
!Dense;
Cell/Output/OutOutput -> Cell/Operation1/Flatten & Cell/Operation2/Flatten;
Cell/Operation1/Flatten -> Cell/Output/OutOutput;
Cell/Operation2/Flatten -> Cell/Output/OutOutput;
";

/// Restricted so that a good share of samples compile.
fn flat_head_dnn() -> &'static Flat {
    static CELL: OnceLock<Flat> = OnceLock::new();
    CELL.get_or_init(|| flat(small_dnn().model.with_overlay(FLAT_HEAD).unwrap()))
}

#[test]
fn restricted_samples_compile() {
    let f = flat_head_dnn();
    let compiled = (0..20)
        .filter(|&s| compile(&random_config(&f.bm, &f.cnf, s).unwrap(), &DatasetSpec::cifar10()).is_ok())
        .count();
    assert!(compiled >= 3, "{compiled} of 20 compiled");
}

fn sel(vars: &[usize]) -> FlatSelection {
    FlatSelection::from_vars(1, 16, vars.to_vec())
}

fn selection() -> impl Strategy<Value = FlatSelection> {
    proptest::collection::vec(0usize..16, 0..10).prop_map(|v| sel(&v))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn printed_models_parse_back(seed in any::<u64>()) {
        let m = parse_fm(&tiny_model_text(seed)).unwrap();
        let again = parse_fm(&m.to_string()).unwrap();
        prop_assert_eq!(again, m);
    }

    #[test]
    fn sampled_configurations_are_valid_and_lift_back(model in any::<u64>(), seed in any::<u64>()) {
        let f = flat(parse_fm(&tiny_model_text(model)).unwrap());
        if let Ok(c) = random_config(&f.bm, &f.cnf, seed) {
            prop_assert!(check_configuration(&f.model, &c).unwrap().is_valid());
            let a = f.bm.assignment_of(&c).unwrap();
            prop_assert!(f.bm.satisfies(&a));
            prop_assert_eq!(lift(&f.bm, &a).unwrap(), c.clone());
            prop_assert_eq!(Configuration::parse_fncfg(&c.to_fncfg()).unwrap(), c);
        }
    }

    #[test]
    fn sampling_stays_inside_the_enumeration(model in any::<u64>(), seed in any::<u64>()) {
        let f = flat(parse_fm(&tiny_model_text(model)).unwrap());
        let all = enumerate_all(&f.bm, &f.cnf, 1 << 16).unwrap();
        match random_config(&f.bm, &f.cnf, seed) {
            Ok(c) => prop_assert!(all.contains(&c)),
            Err(_) => prop_assert!(all.is_empty()),
        }
    }

    #[test]
    fn dnn_samples_are_valid(seed in any::<u64>()) {
        let f = small_dnn();
        let c = random_config(&f.bm, &f.cnf, seed).unwrap();
        prop_assert!(check_configuration(&f.model, &c).unwrap().is_valid());
        match compile(&c, &DatasetSpec::mnist()) {
            Ok(g) => prop_assert!(validate_graph(&g).is_empty()),
            Err(e) => prop_assert!(!e.message.is_empty()),
        }
    }

    #[test]
    fn distances_are_bounded_and_symmetric(a in selection(), b in selection()) {
        for metric in [Metric::Jaccard, Metric::Hamming] {
            let d = distance(&a, &b, metric).unwrap();
            prop_assert!((0.0..=1.0).contains(&d));
            prop_assert_eq!(d, distance(&b, &a, metric).unwrap());
            prop_assert_eq!(d == 0.0, a.vars() == b.vars() || (metric == Metric::Jaccard && a.vars().is_empty() && b.vars().is_empty()));
        }
    }

    #[test]
    fn distances_obey_the_triangle_inequality(a in selection(), b in selection(), c in selection()) {
        for metric in [Metric::Jaccard, Metric::Hamming] {
            let ab = distance(&a, &b, metric).unwrap();
            let bc = distance(&b, &c, metric).unwrap();
            let ac = distance(&a, &c, metric).unwrap();
            prop_assert!(ac <= ab + bc + 1e-12);
        }
    }

    #[test]
    fn conv_windows_match_enumeration(n in 1u64..40, k in 1u64..8, s in 1u64..4, same in any::<bool>()) {
        let padding = if same { Padding::Same } else { Padding::Valid };
        let layer = Layer::Convolution { kernel: k, filters: 4, stride: s, padding, activation: Activation::Relu };
        let starts = if same {
            (0..n).step_by(s as usize).count() as u64
        } else {
            (0..n).filter(|i| i % s == 0 && i + k <= n).count() as u64
        };
        match infer_shape(&layer, &[TensorShape::new([n, n, 3])]) {
            Ok(out) => prop_assert_eq!(out.dims(), &[starts, starts, 4][..]),
            Err(_) => prop_assert!(!same && k > n),
        }
    }

    #[test]
    fn pooling_keeps_channels_and_weights(n in 1u64..40, k in 1u64..6, c in 1u64..64) {
        let layer = Layer::Pooling { kernel: k, stride: k, padding: Padding::Same, pool: PoolType::Average };
        let input = TensorShape::new([n, n, c]);
        let out = infer_shape(&layer, std::slice::from_ref(&input)).unwrap();
        prop_assert_eq!(out.channels(), c);
        prop_assert_eq!(count_params(&layer, &[input]), 0);
    }

    #[test]
    fn weights_grow_with_width(k in 1u64..6, c in 1u64..64, f in 1u64..128, extra in 1u64..16) {
        let conv = |filters| Layer::Convolution { kernel: k, filters, stride: 1, padding: Padding::Same, activation: Activation::Relu };
        let input = [TensorShape::new([16, 16, c])];
        let narrow = count_params(&conv(f), &input);
        let wide = count_params(&conv(f + extra), &input);
        prop_assert_eq!(wide - narrow, extra * (k * k * c + 1));
        let dense = |neurons| Layer::Dense { neurons, activation: Activation::Tanh };
        let flat = [TensorShape::new([c])];
        prop_assert_eq!(count_params(&dense(f + extra), &flat) - count_params(&dense(f), &flat), extra * (c + 1));
    }

    #[test]
    fn pending_entries_are_conserved(counters in proptest::collection::vec(0u32..6, 0..12)) {
        let mut pending = PendingOutputs::default();
        for (i, &c) in counters.iter().enumerate() {
            pending.push(PendingEntry { node: i, counter: c, from_cell: 1 });
        }
        let mut taken = Vec::new();
        for step in 0..8u32 {
            for e in pending.take_active() {
                taken.push((e.node, step));
            }
            pending.decrement();
        }
        prop_assert!(pending.is_empty());
        prop_assert_eq!(taken.len(), counters.len());
        for (node, step) in taken {
            prop_assert_eq!(step, counters[node]);
        }
    }

    #[test]
    fn diversity_ignores_worker_count(seed in any::<u64>(), n in 1usize..5) {
        let f = flat(parse_fm("root R {\n  optional A { attr k in {1, 2}; }\n  B [0..2] { }\n}\n").unwrap());
        let mut opts = DiversityOptions::new(n, 30, seed);
        let parallel = sample_diverse(&f.bm, &f.cnf, &opts).unwrap();
        opts.parallel = false;
        let serial = sample_diverse(&f.bm, &f.cnf, &opts).unwrap();
        prop_assert!(parallel.fitness >= parallel.initial_fitness);
        prop_assert_eq!(parallel, serial);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn compiled_graphs_roundtrip_through_ir(seed in any::<u64>()) {
        let f = flat_head_dnn();
        let c = random_config(&f.bm, &f.cnf, seed).unwrap();
        if let Ok(g) = compile(&c, &DatasetSpec::cifar10()) {
            let prov = IrProvenance::from_config_text(&c.to_fncfg()).with_seed("sample", seed);
            let text = emit_ir(&g, &prov);
            let ir = parse_ir(&text).unwrap();
            prop_assert_eq!(ir.to_json(), text);
            prop_assert_eq!(ir.to_graph().unwrap(), g);
        }
    }
}
