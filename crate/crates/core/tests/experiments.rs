use riskrobust::distributions::DiscreteLaw;
use riskrobust::experiments::{
    consistency_run, robustness_run, skorohod_coupling, ugc_probe, Contamination, ContaminationFamily, ExperimentReport,
    ProcessSpec,
};
use riskrobust::metrics::psi_weak_converged;
use riskrobust::{Distribution, RiskMeasure, WeightFunction, YoungFunction};

fn standard_normal() -> ProcessSpec {
    ProcessSpec::iid(Distribution::normal(0.0, 1.0).unwrap())
}

#[test]
fn plug_in_error_shrinks_for_robust_and_nonrobust_measures() {
    let specs = [
        "neg-exp",
        "avar:a=0.1",
        "distortion:minmaxvar:l=1,g=1",
        "distortion:power:a=0.5,b=0.5",
        "osm:p=2,a=0.5",
        "shortfall:power:p=2,x0=1",
    ];
    for spec in specs {
        let rho: RiskMeasure = spec.parse().unwrap();
        let report = consistency_run(&rho, &standard_normal(), &[1_000, 100_000], 20, 11).unwrap();
        let err = report.numbers("median_error");
        assert!(err[1] < err[0], "{spec}: {err:?}");
        assert!(err[1] < 0.02, "{spec}: {err:?}");
    }
}

#[test]
fn consistency_reports_round_trip_through_csv() {
    let rho = RiskMeasure::avar(0.05).unwrap();
    let report = consistency_run(&rho, &standard_normal(), &[500, 2_000], 10, 3).unwrap();
    let back = ExperimentReport::from_csv(&report.to_csv()).unwrap();
    assert_eq!(back.to_csv(), report.to_csv());
    assert_eq!(report.rows.len(), 2);
}

#[test]
fn robustness_runs_are_reproducible() {
    let family = ContaminationFamily::new(
        Distribution::normal(0.0, 1.0).unwrap(),
        Contamination::TailMix { shape: 3.0, scale: 1.0 },
    );
    let rho = RiskMeasure::var(0.05).unwrap();
    let psi = WeightFunction::One;
    let run = || robustness_run(&rho, &family, &psi, &[0.1, 0.0], 500, 100, 21).unwrap().to_csv();
    assert_eq!(run(), run());
}

#[test]
fn norms_vanish_exactly_when_psi_weak_convergence_holds() {
    let psi = YoungFunction::Power { p: 2.0 };
    let tol = 0.05;
    let limit = Distribution::point(0.0);
    let shrinking: Vec<DiscreteLaw> = (1..=40)
        .map(|n| DiscreteLaw::uniform(&[-1.0 / n as f64, 1.0 / n as f64]).unwrap())
        .collect();
    let escaping: Vec<DiscreteLaw> = (2..=41)
        .map(|n| {
            let n = n as f64;
            DiscreteLaw::new(&[0.0, n], &[1.0 - 1.0 / n, 1.0 / n]).unwrap()
        })
        .collect();
    for (laws, expected) in [(shrinking, true), (escaping, false)] {
        let norms = skorohod_coupling(&laws, &limit, &psi).unwrap();
        let tail = norms.len() / 4;
        let vanish = norms[norms.len() - tail..].iter().all(|v| *v < tol);
        assert_eq!(vanish, expected, "{norms:?}");
        assert_eq!(psi_weak_converged(&laws, &limit, &WeightFunction::Young(psi), tol).unwrap(), expected);
    }
}

#[test]
fn uniform_deviation_probability_is_small_for_a_tight_normal_family() {
    let family: Vec<Distribution> = [0.5, 0.8, 1.0, 1.2, 1.4]
        .iter()
        .map(|s| Distribution::normal(0.0, *s).unwrap())
        .collect();
    let report = ugc_probe(&family, &WeightFunction::One, &[100, 10_000], 50, 0.2, 5).unwrap();
    let p = report.numbers("sup_probability");
    assert!(p[1] <= 0.1, "{p:?}");
    assert!(p[1] <= p[0], "{p:?}");
}
