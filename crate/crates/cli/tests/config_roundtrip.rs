use haarclt::Method;
use haarclt_cli::{
    parse_config, Experiment, ExperimentConfig, Family, FunctionSpec, OutputFormat, Truncation,
};
use proptest::prelude::*;

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![-1e6..1e6f64, Just(0.0), Just(1e-300), Just(-2.5e-17)]
}

fn family() -> impl Strategy<Value = Family> {
    prop_oneof![
        (prop::collection::btree_map(0usize..40, (finite(), finite()), 1..6)).prop_map(|m| {
            Family::Trig {
                coefficients: m
                    .into_iter()
                    .map(|(j, (re, im))| (j, re, if j == 0 { 0.0 } else { im }))
                    .collect(),
            }
        }),
        (1.01..8.0f64, 1usize..50, any::<bool>()).prop_flat_map(|(kappa, terms, with_phases)| {
            prop::collection::vec(-3.2..3.2f64, terms).prop_map(move |p| Family::Power {
                kappa,
                terms,
                phases: with_phases.then_some(p),
            })
        }),
        (0.001..0.999f64).prop_map(|rho| Family::Analytic { rho }),
    ]
}

fn function() -> impl Strategy<Value = FunctionSpec> {
    (
        family(),
        prop::option::of("[a-z][a-z0-9_()=.]{0,12}"),
        prop::option::of((1u32..6, prop::option::of(0.0..100.0f64))),
        prop::option::of((1.01..6.0f64, 0.01..10.0f64)),
    )
        .prop_map(|(family, name, smooth, decay)| FunctionSpec {
            name,
            family,
            smoothness_k: smooth.map(|s| s.0),
            derivative_norm: smooth.and_then(|s| s.1),
            decay,
        })
}

fn config() -> impl Strategy<Value = ExperimentConfig> {
    (
        prop::sample::select(Experiment::ALL.to_vec()),
        prop::collection::btree_set(1usize..=1024, 1..6),
        2usize..100_000,
        any::<u64>(),
        any::<bool>(),
        prop::option::of(1usize..4),
        any::<bool>(),
        prop::option::of("[a-z]{1,8}\\.(csv|json)"),
        function(),
        (2u32..6, 1usize..20, 1usize..64, 1usize..4, any::<bool>()),
    )
        .prop_map(
            |(
                experiment,
                sizes,
                replicas,
                seed,
                trace,
                d,
                json,
                output,
                f,
                (k, max_power, count, j_min, grid),
            )| {
                let mut c = ExperimentConfig::new(experiment);
                c.sizes = sizes.into_iter().collect();
                c.replicas = replicas;
                c.seed = seed;
                c.method = if trace { Method::Trace } else { Method::Eigen };
                c.truncation = d.map_or(Truncation::Auto, Truncation::Explicit);
                c.format = if json {
                    OutputFormat::Json
                } else {
                    OutputFormat::Csv
                };
                c.output_path = output;
                c.function = Some(f);
                match experiment {
                    Experiment::Rate | Experiment::Truncation => c.k = Some(k),
                    Experiment::Ortho => c.max_power = max_power,
                    Experiment::Coeffs => {
                        c.coeff_count = count;
                        c.j_min = j_min;
                        c.grid = grid.then(|| (2 * count + 1).next_power_of_two());
                    }
                    _ => {}
                }
                c
            },
        )
        .prop_filter("valid", |c| c.validate().is_ok())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn serialize_then_parse_is_identity(cfg in config()) {
        let text = cfg.to_config_string();
        let parsed = parse_config(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        prop_assert_eq!(&parsed, &cfg);
        prop_assert_eq!(parsed.to_config_string(), text);
    }
}

#[test]
fn parse_then_serialize_round_trips_handwritten_text() {
    let text = "# a comment\nexperiment = coeffs\nsizes = 8,16\n\n[function]\nfamily = power\nkappa = 2.5\n\
                terms = 3\nphases = 0, 1.5, -1\n[coeffs]\ncount = 10\n";
    let cfg = parse_config(text).unwrap();
    assert_eq!(parse_config(&cfg.to_config_string()).unwrap(), cfg);
}

#[test]
fn documented_validation_examples() {
    let base = "[function]\nfamily = trig\ncoefficients = (1, 1, 0)\n";
    let e = parse_config(&format!("experiment = clt\nreplicas = 0\n{base}")).unwrap_err();
    assert!(e.mentions("replicas"));
    let e = parse_config(&format!(
        "experiment = clt\nsizes = 10\nmethod = trace\ntruncation = 6\n{base}"
    ))
    .unwrap_err();
    assert!(e.mentions("truncation") && e.to_string().contains("n >= 2d"));
}
