use proptest::prelude::*;
use riskrobust_cli::{parse_config, Command};
use serde_json::{json, Map, Value};

const RISKS: [&str; 8] = [
    "neg-exp",
    "var:t=0.05",
    "avar:a=0.05",
    "distortion:minmaxvar:l=1,g=1",
    "distortion:power:a=0.5,b=0.25",
    "entropic:b=1",
    "shortfall:exp:b=1,x0=1",
    "osm:p=2,a=0.5",
];
const LAWS: [&str; 5] = ["normal:m=0,s=1", "point:c=5", "discrete[-1@0.5,1@0.5]", "pareto:shape=3,scale=2", "exptail"];
const PROCESSES: [&str; 3] = ["iid:normal:m=0,s=1", "ar1:phi=0.5,s=1", "garch11:w=0.1,a=0.1,b=0.8"];
const PSIS: [&str; 3] = ["abs-power:p=1", "one", "power:p=2"];
const YOUNGS: [&str; 3] = ["power:p=1", "power:p=2", "exp"];

fn pick<'a>(pool: &[&'a str], i: usize) -> &'a str {
    pool[i % pool.len()]
}

prop_compose! {
    fn config()(
        cmd in 0usize..8,
        idx in prop::collection::vec(0usize..64, 6),
        theta in prop::collection::vec(0.0f64..1.0, 1..5),
        ns in prop::collection::vec(1u64..100_000, 1..4),
        seed in any::<u64>(),
        reps in 100u64..1000,
        x in 0.01f64..10.0,
        with_optional in any::<bool>(),
        json_format in any::<bool>(),
    ) -> Value {
        let command = Command::ALL[cmd];
        let mut m = Map::new();
        m.insert("command".into(), json!(command.name()));
        let mut set = |k: &str, v: Value| { m.insert(k.into(), v); };
        match command {
            Command::Eval => {
                set("risk", json!(pick(&RISKS, idx[0])));
                set("distribution", json!(pick(&LAWS, idx[1])));
            }
            Command::Iqr => set("risk", json!(pick(&RISKS, idx[0]))),
            Command::Metric => {
                set("metric", json!(pick(&["prohorov", "levy", "wasserstein", "psi"], idx[0])));
                set("distribution", json!(pick(&LAWS, idx[1])));
                set("other", json!(pick(&LAWS, idx[2])));
                if with_optional {
                    set("p", json!(1.0 + x));
                    set("psi", json!(pick(&PSIS, idx[3])));
                }
            }
            Command::Consistency => {
                set("risk", json!(pick(&RISKS, idx[0])));
                set("process", json!(pick(&PROCESSES, idx[1])));
                set("n_grid", json!(ns));
                if with_optional { set("replications", json!(reps)); }
            }
            Command::Robustness => {
                set("risk", json!(pick(&RISKS, idx[0])));
                set("distribution", json!(pick(&LAWS, idx[1])));
                set("contamination", json!(pick(&["tailmix:shape=3,scale=1", "shift", "scale"], idx[2])));
                set("theta_grid", json!(theta));
                if with_optional {
                    set("n", json!(ns[0]));
                    set("replications", json!(reps));
                    set("psi", json!(pick(&PSIS, idx[3])));
                }
            }
            Command::Skorohod => {
                set("sequence", json!(idx.iter().map(|&i| pick(&LAWS, i)).collect::<Vec<_>>()));
                set("limit", json!(pick(&LAWS, idx[0])));
                if with_optional {
                    set("young", json!(pick(&YOUNGS, idx[1])));
                    set("tol", json!(x));
                }
            }
            Command::DemoNonDelta2 => {
                if with_optional {
                    set("young", json!(pick(&YOUNGS, idx[1])));
                    set("n_max", json!(ns[0] % 10 + 1));
                }
            }
            Command::Ugc => {
                set("family", json!(idx[..3].iter().map(|&i| pick(&LAWS, i)).collect::<Vec<_>>()));
                set("n_grid", json!(ns));
                if with_optional {
                    set("delta", json!(x));
                    set("replications", json!(reps));
                }
            }
        }
        set("seed", json!(seed));
        if with_optional {
            set("out", json!(format!("out-{}.csv", idx[5])));
            set("format", json!(if json_format { "json" } else { "csv" }));
        }
        Value::Object(m)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn parse_serialize_parse_is_identity(value in config()) {
        let first = parse_config(&value.to_string()).unwrap();
        let text = first.to_json().to_string();
        let second = parse_config(&text).unwrap();
        prop_assert_eq!(&first, &second);
        prop_assert_eq!(second.to_json().to_string(), text);
    }
}
