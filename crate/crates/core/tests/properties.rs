use bilinear_core::schmidt::{schmidt_decompose, schmidt_sum_sq, Status};
use bilinear_core::schur::{schur_from_schmidt, SchurRepresentation};
use bilinear_core::{
    hopm_refine, orbit_distance, synth, vecops, verify_triple, Dims, SearchConfig, SingularTriple, Tensor3,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn dims() -> impl Strategy<Value = Dims> {
    (1usize..=5, 1usize..=5, 1usize..=5).prop_map(|(a, b, c)| Dims::new(a, b, c))
}

fn tensor_and_vectors() -> impl Strategy<Value = (Tensor3, Vec<f64>, Vec<f64>, Vec<f64>)> {
    (dims(), any::<u64>()).prop_map(|(d, seed)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t = synth::random_tensor(&mut rng, d);
        let x = synth::random_gaussian(&mut rng, d.n1);
        let y = synth::random_gaussian(&mut rng, d.n2);
        let z = synth::random_gaussian(&mut rng, d.n3);
        (t, x, y, z)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn adjoint_identities((t, x, y, z) in tensor_and_vectors()) {
        let lhs = vecops::dot(&t.apply(&x, &y).unwrap(), &z);
        let a1 = vecops::dot(&t.adjoint_contract_1(&y, &z).unwrap(), &x);
        let a2 = vecops::dot(&t.adjoint_contract_2(&x, &z).unwrap(), &y);
        let scale = 1.0 + lhs.abs() + vecops::norm(&x) * vecops::norm(&y) * vecops::norm(&z) * t.hs_norm();
        prop_assert!((lhs - a1).abs() <= 1e-12 * scale);
        prop_assert!((lhs - a2).abs() <= 1e-12 * scale);
    }

    #[test]
    fn bilinear_in_each_argument((t, x, y, z) in tensor_and_vectors(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let x2: Vec<f64> = x.iter().rev().copied().collect();
        let comb: Vec<f64> = x.iter().zip(&x2).map(|(p, q)| a * p + b * q).collect();
        let lhs = t.apply(&comb, &y).unwrap();
        let r1 = t.apply(&x, &y).unwrap();
        let r2 = t.apply(&x2, &y).unwrap();
        for k in 0..lhs.len() {
            prop_assert!((lhs[k] - (a * r1[k] + b * r2[k])).abs() <= 1e-10 * (1.0 + lhs[k].abs()));
        }
        let _ = z;
    }

    #[test]
    fn hopm_objective_is_monotone((t, x, y, z) in tensor_and_vectors()) {
        let (Some(x), Some(y), Some(z)) = (vecops::normalized(&x), vecops::normalized(&y), vecops::normalized(&z)) else {
            return Ok(());
        };
        if let Ok(run) = hopm_refine(&t, &x, &y, &z, &SearchConfig::default()).unwrap() {
            for w in run.objective.windows(2) {
                prop_assert!(w[1] >= w[0] - 1e-13 * (1.0 + w[0].abs()));
            }
            prop_assert!(run.triple.tau >= run.objective[0] - 1e-12 * (1.0 + run.objective[0].abs()));
        }
    }

    #[test]
    fn verification_is_sign_orbit_invariant(seed in any::<u64>(), d in dims()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = d.min();
        let taus = synth::decreasing_taus(&mut rng, r, 0.1);
        let planted = synth::planted_schmidt(&mut rng, d, &taus);
        let t = planted.tensor();
        let (tau, x, y, z) = planted.terms[0].clone();
        let tr = SingularTriple::new(&t, tau, x, y, z).unwrap();
        let base = verify_triple(&t, &tr, 1e-9).unwrap();
        for v in tr.sign_orbit() {
            let rep = verify_triple(&t, &v, 1e-9).unwrap();
            prop_assert_eq!(rep.verified, base.verified);
            prop_assert!((rep.residuals.max() - base.residuals.max()).abs() <= 1e-14);
            prop_assert!(orbit_distance(&v, &tr) <= 1e-15);
        }
    }

    #[test]
    fn deflation_yields_orthonormal_families_and_energy(seed in any::<u64>(), d in dims()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = 1 + (seed as usize) % d.min();
        let taus = synth::decreasing_taus(&mut rng, r, 0.1);
        let t = synth::planted_schmidt(&mut rng, d, &taus).tensor();
        let (rep, _) = schmidt_decompose(&t, &SearchConfig::default()).unwrap();
        prop_assert_eq!(rep.status, Status::Complete);
        for (i, a) in rep.terms.iter().enumerate() {
            for b in &rep.terms[i + 1..] {
                prop_assert!(vecops::dot(&a.x, &b.x).abs() <= 1e-8);
                prop_assert!(vecops::dot(&a.y, &b.y).abs() <= 1e-8);
                prop_assert!(vecops::dot(&a.z, &b.z).abs() <= 1e-8);
            }
        }
        let energy = schmidt_sum_sq(&rep).unwrap();
        prop_assert!((energy - t.hs_norm().powi(2)).abs() <= 1e-9 * (1.0 + energy));
    }

    #[test]
    fn schur_apply_matches_tensor(seed in any::<u64>(), n in 1usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut lambdas = synth::decreasing_taus(&mut rng, n, 0.1);
        if seed % 2 == 0 {
            lambdas[0] = -lambdas[0];
        }
        let (t, _) = synth::symmetric_orthogonal(&mut rng, n, &lambdas);
        let (rep, _) = schmidt_decompose(&t, &SearchConfig::default()).unwrap();
        let schur: SchurRepresentation = schur_from_schmidt(&t, &rep, 1e-9 * (1.0 + t.hs_norm())).unwrap();
        let x = synth::random_gaussian(&mut rng, n);
        let y = synth::random_gaussian(&mut rng, n);
        let direct = t.apply(&x, &y).unwrap();
        let via = schur.apply(&x, &y);
        for (a, b) in direct.iter().zip(&via) {
            prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()));
        }
        prop_assert!(t.sub(&schur.to_tensor().unwrap()).unwrap().hs_norm() <= 1e-9 * (1.0 + t.hs_norm()));
    }
}
