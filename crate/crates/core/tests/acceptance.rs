mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::time::{Duration, Instant};

use featnet::arch::{
    compile, count_params, validate_graph, Activation, DatasetSpec, Layer, Padding, PoolType, TensorShape,
};
use featnet::cli::MetricsRecord;
use featnet::diversity::{fitness, sample_diverse, DiversityOptions, FlatSelection, Metric};
use featnet::dnn::{dnn_model, profile_overlay, DnnSpace, RESTRICTED_PROFILE};
use featnet::flatten::{flatten, to_cnf, BooleanModel, CnfFormula, FlattenBounds};
use featnet::fm::{check_configuration, parse_fm, FeatureModel};
use featnet::sat::enumerate_all;

use common::tiny::{tiny_model_text, Universe};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn dnn(blocks: u32, cells: u32) -> (FeatureModel, BooleanModel, CnfFormula) {
    let m = dnn_model(&DnnSpace::with_bounds(blocks, cells))
        .unwrap()
        .with_overlay(profile_overlay(RESTRICTED_PROFILE).unwrap())
        .unwrap();
    let bm = flatten(&m, &FlattenBounds::declared()).unwrap();
    let cnf = to_cnf(&bm);
    (m, bm, cnf)
}

fn fixture_compilation() -> Outcome {
    let start = Instant::now();
    let lenet = common::compiled("lenet5", &DatasetSpec::mnist());
    let lenet_time = start.elapsed();
    let chain = lenet.chain().ok_or("lenet5 is not a linear chain")?;
    let layers: Vec<&str> = chain.iter().copied().filter(|k| !matches!(*k, "input" | "flatten")).collect();
    let expected = ["convolution", "pooling", "convolution", "pooling", "convolution", "dense", "classifier"];
    ensure(layers == expected, || format!("lenet5 chain {chain:?}"))?;
    let cells: BTreeSet<(u32, u32)> = lenet.nodes.iter().filter_map(|n| n.site).map(|s| (s.block, s.cell)).collect();
    let grid: BTreeSet<(u32, u32)> = (1..=3).flat_map(|b| (1..=2).map(move |c| (b, c))).collect();
    ensure(cells == grid, || format!("lenet5 spans cells {cells:?}"))?;
    ensure(validate_graph(&lenet).is_empty(), || "lenet5 fails validation".into())?;

    let start = Instant::now();
    let inception = common::compiled("inception", &DatasetSpec::cifar10());
    let inception_time = start.elapsed();
    let concats = inception.count_kind("concat");
    ensure(concats == 3, || format!("inception has {concats} concat nodes"))?;
    ensure(inception.chain().is_none(), || "inception compiled to a chain".into())?;
    ensure(validate_graph(&inception).is_empty(), || "inception fails validation".into())?;

    let limit = Duration::from_secs(1);
    ensure(lenet_time < limit && inception_time < limit, || {
        format!("compile took {lenet_time:?} and {inception_time:?}")
    })?;
    Ok(format!("lenet5 {lenet_time:.2?}, inception {inception_time:.2?}, 3 concats"))
}

fn s(d: &[u64]) -> TensorShape {
    TensorShape::new(d)
}

fn conv(kernel: u64, filters: u64, stride: u64, padding: Padding) -> Layer {
    Layer::Convolution { kernel, filters, stride, padding, activation: Activation::Relu }
}

fn dense(neurons: u64) -> Layer {
    Layer::Dense { neurons, activation: Activation::Relu }
}

fn parameter_counts() -> Outcome {
    let pool = Layer::Pooling { kernel: 2, stride: 2, padding: Padding::Valid, pool: PoolType::Max };
    let cases: Vec<(&str, Layer, Vec<TensorShape>, u64)> = vec![
        ("conv 6@5x5 on 1ch", conv(5, 6, 1, Padding::Same), vec![s(&[28, 28, 1])], 156),
        ("conv 16@5x5 on 6ch", conv(5, 16, 1, Padding::Valid), vec![s(&[14, 14, 6])], 2_416),
        ("conv 120@5x5 on 16ch", conv(5, 120, 1, Padding::Valid), vec![s(&[5, 5, 16])], 48_120),
        ("conv 32@3x3 on 3ch", conv(3, 32, 1, Padding::Same), vec![s(&[32, 32, 3])], 896),
        ("conv 16@1x1 on 64ch", conv(1, 16, 1, Padding::Same), vec![s(&[32, 32, 64])], 1_040),
        ("conv 64@3x3 on 32ch", conv(3, 64, 2, Padding::Valid), vec![s(&[16, 16, 32])], 18_496),
        ("conv 128@5x5 on 3ch", conv(5, 128, 2, Padding::Same), vec![s(&[32, 32, 3])], 9_728),
        ("dense 84 from 120", dense(84), vec![s(&[120])], 10_164),
        ("dense 512 from 3136", dense(512), vec![s(&[3136])], 1_606_144),
        ("dense 16 from 64", dense(16), vec![s(&[64])], 1_040),
        ("dense 256 from 1", dense(256), vec![s(&[1])], 512),
        ("classifier 10 from 84", Layer::Classifier { classes: 10 }, vec![s(&[84])], 850),
        ("classifier 10 from 512", Layer::Classifier { classes: 10 }, vec![s(&[512])], 5_130),
        ("batchnorm on 32ch", Layer::BatchNorm, vec![s(&[8, 8, 32])], 64),
        ("batchnorm on 256", Layer::BatchNorm, vec![s(&[256])], 512),
        ("max pooling", pool, vec![s(&[24, 24, 6])], 0),
        ("flatten", Layer::Flatten, vec![s(&[5, 5, 16])], 0),
        ("dropout", Layer::Dropout { rate: 0.5 }, vec![s(&[84])], 0),
        ("sum", Layer::Sum, vec![s(&[8, 8, 3]), s(&[8, 8, 3])], 0),
        ("concat", Layer::Concat, vec![s(&[8, 8, 3]), s(&[8, 8, 5])], 0),
        ("padding", Layer::Padding { amount: 2 }, vec![s(&[28, 28, 1])], 0),
        ("zeros", Layer::Zeros, vec![s(&[28, 28, 1])], 0),
    ];
    for (name, layer, inputs, want) in &cases {
        let got = count_params(layer, inputs);
        ensure(got == *want, || format!("{name}: {got} != {want}"))?;
    }
    let mut totals = Vec::new();
    for (name, ds) in [
        ("lenet5", DatasetSpec::mnist()),
        ("inception", DatasetSpec::cifar10()),
        ("inception", DatasetSpec::mnist()),
        ("mixed", DatasetSpec::mnist()),
    ] {
        let g = common::compiled(name, &ds);
        let sum: u64 = g.nodes.iter().map(|n| n.params).sum();
        ensure(sum == g.total_size, || format!("{name}/{}: {} != {sum}", ds.name, g.total_size))?;
        totals.push(format!("{name}/{}={sum}", ds.name));
    }
    ensure(totals[0] == "lenet5/mnist=61706", || totals[0].clone())?;
    Ok(format!("{} layer cases, {}", cases.len(), totals.join(" ")))
}

fn oracle_equivalence() -> Outcome {
    let mut models = 0;
    let mut products = 0;
    let mut seed = 0u64;
    while models < 60 {
        seed += 1;
        let text = tiny_model_text(seed);
        let model = parse_fm(&text).map_err(|e| format!("seed {seed}: {e}\n{text}"))?;
        let universe = Universe::of(&model);
        if universe.len() > 12 {
            continue;
        }
        let bm = flatten(&model, &FlattenBounds::declared()).map_err(|e| e.to_string())?;
        let cnf = to_cnf(&bm);
        ensure(cnf.provenance_vars == universe.len(), || {
            format!("seed {seed}: {} provenance variables, {} instances and values", cnf.provenance_vars, universe.len())
        })?;
        let truth = universe.filter(|c| check_configuration(&model, c).map(|r| r.is_valid()).unwrap_or(false));
        let listed = enumerate_all(&bm, &cnf, 1 << 13).map_err(|e| e.to_string())?;
        let solved: BTreeSet<_> = listed.iter().cloned().collect();
        ensure(solved.len() == listed.len(), || format!("seed {seed}: duplicate configurations"))?;
        if truth != solved {
            let only_truth = truth.difference(&solved).count();
            let only_cnf = solved.difference(&truth).count();
            return Err(format!("seed {seed}: {only_truth} only by check, {only_cnf} only by CNF\n{text}"));
        }
        models += 1;
        products += truth.len();
    }
    Ok(format!("{models} models, {products} configurations, 0 discrepancies"))
}

fn batch_robustness() -> Outcome {
    let start = Instant::now();
    let (model, bm, cnf) = dnn(5, 5);
    let sample = sample_diverse(&bm, &cnf, &DiversityOptions::new(1000, 1000, 0)).map_err(|e| e.to_string())?;
    let sampled = start.elapsed();
    let mut kinds: BTreeMap<&str, usize> = BTreeMap::new();
    let mut invalid = 0;
    let mut crashes = 0;
    for c in &sample.configurations {
        if !check_configuration(&model, c).map(|r| r.is_valid()).unwrap_or(false) {
            invalid += 1;
        }
        match std::panic::catch_unwind(|| compile(c, &DatasetSpec::mnist())) {
            Ok(Ok(g)) => {
                let problems = validate_graph(&g);
                if problems.is_empty() {
                    *kinds.entry("validated").or_default() += 1;
                } else {
                    return Err(format!("compiled graph fails validation: {problems:?}"));
                }
            }
            Ok(Err(e)) => *kinds.entry(e.kind.as_str()).or_default() += 1,
            Err(_) => crashes += 1,
        }
    }
    let elapsed = start.elapsed();
    ensure(sample.configurations.len() == 1000, || format!("{} configurations", sample.configurations.len()))?;
    ensure(invalid == 0, || format!("{invalid} sampled configurations are invalid"))?;
    ensure(crashes == 0, || format!("{crashes} crashes"))?;
    ensure(elapsed < Duration::from_secs(600), || format!("took {elapsed:?}"))?;
    Ok(format!("sampled in {sampled:.1?}, total {elapsed:.1?}, outcomes {kinds:?}"))
}

fn diversity_monotonicity() -> Outcome {
    let (model, bm, cnf) = dnn(2, 2);
    for seed in 0..20 {
        let mut opts = DiversityOptions::new(10, 1000, seed);
        opts.parallel = false;
        let s = sample_diverse(&bm, &cnf, &opts).map_err(|e| e.to_string())?;
        ensure(s.fitness + 1e-9 >= s.initial_fitness, || {
            format!("seed {seed}: {} < {}", s.fitness, s.initial_fitness)
        })?;
        let mut before = s.initial_fitness;
        for &f in &s.accepted {
            ensure(f > before, || format!("seed {seed}: swap to {f} from {before}"))?;
            before = f;
        }
        let sels: Vec<FlatSelection> = s.configurations.iter().map(|c| FlatSelection::new(&bm, c).unwrap()).collect();
        let recomputed = fitness(&sels, Metric::Jaccard).unwrap();
        ensure((recomputed - s.fitness).abs() < 1e-9, || format!("seed {seed}: fitness {} vs {recomputed}", s.fitness))?;
        ensure((before - s.fitness).abs() < 1e-6, || format!("seed {seed}: tracked {before} vs {}", s.fitness))?;
        for c in &s.configurations {
            ensure(check_configuration(&model, c).unwrap().is_valid(), || format!("seed {seed}: invalid member"))?;
        }
    }

    let tiny = parse_fm("root R {\n  optional A { }\n  optional B { }\n}\n").unwrap();
    let bm = flatten(&tiny, &FlattenBounds::declared()).unwrap();
    let cnf = to_cnf(&bm);
    let all = enumerate_all(&bm, &cnf, 100).map_err(|e| e.to_string())?;
    ensure(all.len() == 4, || format!("tiny model has {} products", all.len()))?;
    let sels: Vec<FlatSelection> = all.iter().map(|c| FlatSelection::new(&bm, c).unwrap()).collect();
    let mut best = 0.0f64;
    for a in 0..4 {
        for b in a..4 {
            for c in b..4 {
                for d in c..4 {
                    let pick = [a, b, c, d].map(|i| sels[i].clone());
                    best = best.max(fitness(&pick, Metric::Jaccard).unwrap());
                }
            }
        }
    }
    for iterations in [500, 1000] {
        let s = sample_diverse(&bm, &cnf, &DiversityOptions::new(4, iterations, 3)).map_err(|e| e.to_string())?;
        ensure((s.fitness - best).abs() < 1e-12, || format!("{iterations} iterations: {} vs optimum {best}", s.fitness))?;
        let distinct: BTreeSet<_> = s.configurations.iter().collect();
        ensure(distinct.len() == 4, || format!("{} distinct members", distinct.len()))?;
    }
    Ok(format!("20 seeds non-decreasing, tiny optimum {best:.4} reached"))
}

fn efficiency_arithmetic() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let rows = [("table_a", 0.9714, 545_546u64, 1.78), ("table_b", 0.9231, 43_578, 21.18)];
    for (id, acc, size, _) in rows {
        let rec = MetricsRecord {
            arch_id: id.into(),
            dataset: "mnist".into(),
            epochs: 1,
            train_acc: vec![acc],
            test_acc: vec![acc],
            size,
            duration_s: 1.0,
            seed: 0,
            error: None,
        };
        std::fs::write(dir.path().join(format!("{id}.metrics.json")), serde_json::to_string(&rec).unwrap())
            .map_err(|e| e.to_string())?;
    }
    let out = dir.path().join("report");
    let code = featnet::cli::run(["featnet", "report", path(dir.path()), "--rank", "efficiency", "--out", path(&out)]);
    ensure(code == 0, || format!("report exited with {code}"))?;
    let text = std::fs::read_to_string(out.join(featnet::cli::LEADERBOARD_CSV)).map_err(|e| e.to_string())?;
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let mut seen = BTreeMap::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| e.to_string())?;
        seen.insert(rec[1].to_string(), rec[4].parse::<f64>().map_err(|e| e.to_string())?);
    }
    let mut shown = Vec::new();
    for (id, acc, size, want) in rows {
        let got = *seen.get(id).ok_or_else(|| format!("{id} missing"))?;
        ensure((got - want).abs() <= 0.01, || format!("{id}: {got} vs {want}"))?;
        let direct = acc * 1_000_000.0 / size as f64;
        ensure(((got - direct) / direct).abs() < 1e-9, || format!("{id}: {got} vs {direct}"))?;
        shown.push(format!("{got:.2}"));
    }
    Ok(format!("efficiencies {}", shown.join(", ")))
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

const FLAT_HEAD: &str = "!Convolution;
!Pooling;
!Dense;
Cell/Output/OutOutput -> Cell/Operation1/Flatten & Cell/Operation2/Flatten;
Cell/Operation1/Flatten -> Cell/Output/OutOutput;
Cell/Operation2/Flatten -> Cell/Output/OutOutput;
";

fn sample_and_compile(root: &Path, bounds: &str, overlay: Option<&str>) -> Result<BTreeMap<String, Vec<u8>>, String> {
    let configs = root.join("configs");
    let irs = root.join("irs");
    let mut args = vec![
        "featnet".to_string(), "sample".into(), "--max-blocks".into(), bounds.into(), "--max-cells".into(),
        bounds.into(), "--profile".into(), RESTRICTED_PROFILE.into(), "-n".into(), "12".into(), "--iterations".into(),
        "40".into(), "--seed".into(), "11".into(), "--out".into(), path(&configs).into(),
    ];
    if let Some(text) = overlay {
        let file = root.join("overlay.txt");
        std::fs::write(&file, text).map_err(|e| e.to_string())?;
        args.extend(["--overlay".to_string(), path(&file).to_string()]);
    }
    let code = featnet::cli::run(args);
    ensure(code == 0, || format!("sample exited with {code}"))?;
    let code = featnet::cli::run(["featnet", "compile", path(&configs), "--dataset", "mnist", "--out", path(&irs)]);
    ensure(code == 0, || format!("compile exited with {code}"))?;
    let mut files = BTreeMap::new();
    for dir in [&configs, &irs] {
        for entry in std::fs::read_dir(dir).map_err(|e| e.to_string())? {
            let p = entry.map_err(|e| e.to_string())?.path();
            let name = p.file_name().unwrap().to_string_lossy().into_owned();
            if name.ends_with(".fncfg") || name.ends_with(".ir.json") || name.ends_with(".dot") {
                files.insert(name, std::fs::read(&p).map_err(|e| e.to_string())?);
            }
        }
    }
    Ok(files)
}

fn determinism() -> Outcome {
    let mut shown = Vec::new();
    for (bounds, overlay) in [("5", None), ("3", Some(FLAT_HEAD))] {
        let a = tempfile::tempdir().map_err(|e| e.to_string())?;
        let b = tempfile::tempdir().map_err(|e| e.to_string())?;
        let first = sample_and_compile(a.path(), bounds, overlay)?;
        let second = sample_and_compile(b.path(), bounds, overlay)?;
        let configs = first.keys().filter(|k| k.ends_with(".fncfg")).count();
        let irs = first.keys().filter(|k| k.ends_with(".ir.json")).count();
        ensure(configs == 12, || format!("{configs} configuration files"))?;
        ensure(first.keys().eq(second.keys()), || "runs wrote different file sets".into())?;
        for (name, bytes) in &first {
            ensure(second[name] == *bytes, || format!("{name} differs between runs"))?;
        }
        shown.push(format!("{bounds}/{bounds}: {configs} configs, {irs} IRs"));
    }
    ensure(!shown[1].ends_with(" 0 IRs"), || "restricted run compiled nothing".into())?;
    Ok(format!("byte-identical ({})", shown.join("; ")))
}

fn main() {
    let criteria: [Criterion; 7] = [
        ("fixture compilation", fixture_compilation),
        ("parameter-count oracle", parameter_counts),
        ("oracle equivalence", oracle_equivalence),
        ("batch robustness", batch_robustness),
        ("diversity monotonicity", diversity_monotonicity),
        ("efficiency arithmetic", efficiency_arithmetic),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail}");
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
