use proptest::prelude::*;

use cylfault::features::FaultLabel;
use cylfault::gmm::{fit_em, EmOptions};
use cylfault::harness::confusion_matrix;
use cylfault::numerics::Rng;
use cylfault::structural::{build_system, solve_modes, CylinderConfig, FaultScenario, Specimen};

fn label() -> impl Strategy<Value = FaultLabel> {
    (0usize..8).prop_map(|i| FaultLabel::from_class_index(i).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn label_text_and_index_round_trip(l in label()) {
        prop_assert_eq!(l.to_string().parse::<FaultLabel>().unwrap(), l);
        prop_assert_eq!(FaultLabel::from_class_index(l.class_index()).unwrap(), l);
        prop_assert_eq!(FaultLabel::TABLE_ORDER[l.table_position()], l);
    }

    #[test]
    fn confusion_counts_are_conserved(pairs in prop::collection::vec((label(), label()), 1..200)) {
        let (predicted, actual): (Vec<_>, Vec<_>) = pairs.iter().copied().unzip();
        let m = confusion_matrix(&predicted, &actual).unwrap();
        prop_assert_eq!(m.total(), pairs.len());
        let rows = m.row_sums();
        for l in FaultLabel::TABLE_ORDER {
            prop_assert_eq!(rows[l.table_position()], actual.iter().filter(|a| **a == l).count());
        }
        let hits = pairs.iter().filter(|(p, a)| p == a).count();
        prop_assert_eq!(m.trace(), hits);
        prop_assert!((m.accuracy() - hits as f64 / pairs.len() as f64).abs() < 1e-15);
    }

    #[test]
    fn faults_never_raise_frequencies(l in label(), lo in 0.0f64..0.4, step in 0.0f64..0.1, seed in 0u64..1000) {
        let config = CylinderConfig { n_dof: 12, ..CylinderConfig::default() };
        let specimen = Specimen::sample(&config, 0.01, &mut Rng::new(seed)).unwrap();
        let modes = |s: f64| {
            let (m, k) = build_system(&specimen, &FaultScenario::new(l, s)).unwrap();
            solve_modes(&m, &k, 10).unwrap().frequencies
        };
        let (weak, weaker) = (modes(lo), modes(lo + step));
        for (a, b) in weak.iter().zip(&weaker) {
            prop_assert!(*b <= *a * (1.0 + 1e-12));
        }
    }

    #[test]
    fn em_log_likelihood_never_decreases(seed in 0u64..500, m in 1usize..4, d in 1usize..4) {
        let mut rng = Rng::new(seed);
        let x: Vec<Vec<f64>> = (0..30)
            .map(|i| (0..d).map(|_| rng.normal() + 4.0 * (i % m) as f64).collect())
            .collect();
        let fit = fit_em(&x, m, &EmOptions::default(), &vec![1e-6; d], &mut rng).unwrap();
        prop_assert!(fit.log_likelihood.windows(2).all(|w| w[1] >= w[0] - 1e-9));
        prop_assert!(fit.model.variances.iter().flatten().all(|v| *v >= 1e-6));
    }
}
