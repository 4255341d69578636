use bilinear_core::oracle::{
    distinct_taus, exhaustive_small_spectrum, grid_norm_oracle, stationarity_fd_check, GridSpec,
};
use bilinear_core::{enumerate_triples, fixtures, operator_norm, synth, verify_triple, Dims, SearchConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn enumeration_agrees_with_exhaustive_search_on_examples() {
    let cfg = SearchConfig::default();
    for t in [
        fixtures::example_diagonal(),
        fixtures::example_coupled(),
        fixtures::example_ordered(),
    ] {
        let a = distinct_taus(&enumerate_triples(&t, &cfg).unwrap(), 1e-8);
        let reference = exhaustive_small_spectrum(&t, &cfg).unwrap();
        let b = distinct_taus(&reference, 1e-8);
        assert_eq!(a.len(), b.len(), "{}: {a:?} vs {b:?}", t.dims());
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() <= 1e-8, "{x} vs {y}");
        }
        for tr in &reference.triples {
            assert!(verify_triple(&t, tr, 1e-9).unwrap().verified);
            assert!(stationarity_fd_check(&t, tr, 1e-5).unwrap() <= 1e-6);
        }
    }
}

#[test]
fn grid_oracle_brackets_operator_norm() {
    let cfg = SearchConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..10 {
        let dims = Dims::new(rng.gen_range(1..=3), rng.gen_range(1..=3), rng.gen_range(1..=3));
        let t = synth::random_tensor(&mut rng, dims);
        let (norm, _) = operator_norm(&t, &cfg).unwrap();
        let grid = grid_norm_oracle(&t, GridSpec::default()).unwrap();
        assert!(grid <= norm + 1e-9, "{dims}: grid {grid} > norm {norm}");
        assert!(grid >= norm - 1e-3, "{dims}: grid {grid} << norm {norm}");
    }
}
