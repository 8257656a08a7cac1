use mroot_cartan::metric_core::eval_k;
use mroot_cartan::oracle::dense_contract;
use mroot_cartan::sampling::{admissible_point, random_sym_tensor};
use mroot_cartan::ttensor::{t_closed, t_term_scale};
use mroot_cartan::vgeometry::{c_mixed, c_up};
use mroot_cartan::{EvalContext, Momentum, SymTensor};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |acc: f64, x| acc.max(x.abs()))
}

/// Random tensor with dimension in 2..=4 and rank in 3..=4, plus a momentum.
fn tensor_and_momentum() -> impl Strategy<Value = (SymTensor, Vec<f64>)> {
    (2usize..=4, 3usize..=4, any::<u64>()).prop_flat_map(|(n, m, seed)| {
        let a = random_sym_tensor(&mut ChaCha8Rng::seed_from_u64(seed), n, m, 1.0).unwrap();
        (Just(a), prop::collection::vec(-2.0f64..2.0, n))
    })
}

/// Random metric in n = 4 with an admissible point.
fn metric_at_point() -> impl Strategy<Value = (SymTensor, Momentum)> {
    (3usize..=4, any::<u64>()).prop_filter_map("no admissible point", |(m, seed)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_sym_tensor(&mut rng, 4, m, 0.5).ok()?;
        let p = admissible_point(&mut rng, &a, 200).ok()?;
        Some((a, p))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lookup_ignores_index_order((a, _) in tensor_and_momentum(), perm_seed in any::<u64>()) {
        let m = a.rank();
        for (idx, v) in a.entries() {
            let mut shuffled = idx.to_vec();
            let r = perm_seed as usize;
            shuffled.rotate_left(r % m);
            shuffled.swap(0, (r / m) % m);
            prop_assert_eq!(a.get(&shuffled), v);
        }
    }

    #[test]
    fn contractions_compose((a, p) in tensor_and_momentum()) {
        let m = a.rank();
        let full = a.contract(&p, m).unwrap().scalar();
        let scale = a.abs().contract(&p.iter().map(|v| v.abs()).collect::<Vec<_>>(), m).unwrap().scalar();
        for k in 1..m {
            let staged = a.contract(&p, k).unwrap();
            // Rank-(m-k) result contracted with the remaining slots by brute force.
            let rest = m - k;
            let n = a.dim();
            let mut sum = 0.0;
            let mut idx = vec![0usize; rest];
            for flat in 0..n.pow(rest as u32) {
                let mut r = flat;
                for slot in (0..rest).rev() {
                    idx[slot] = r % n;
                    r /= n;
                }
                sum += staged.get(&idx) * idx.iter().map(|&i| p[i]).product::<f64>();
            }
            prop_assert!((sum - full).abs() <= 1e-14 * scale, "k={} {} vs {}", k, sum, full);
        }
    }

    #[test]
    fn full_contraction_is_homogeneous((a, p) in tensor_and_momentum(), lambda in 0.25f64..4.0) {
        let m = a.rank();
        let base = a.contract(&p, m).unwrap().scalar();
        let scaled: Vec<f64> = p.iter().map(|v| lambda * v).collect();
        let value = a.contract(&scaled, m).unwrap().scalar();
        let scale = a.abs().contract(&p.iter().map(|v| v.abs()).collect::<Vec<_>>(), m).unwrap().scalar() * lambda.powi(m as i32);
        prop_assert!((value - lambda.powi(m as i32) * base).abs() <= 1e-12 * scale.max(f64::MIN_POSITIVE));
    }

    #[test]
    fn compressed_matches_dense((a, p) in tensor_and_momentum()) {
        for k in 0..=a.rank() {
            let fast = a.contract(&p, k).unwrap().to_dense();
            let dense = dense_contract(&a, &p, k).unwrap();
            // Summand magnitude: the same contraction of |a| with |p|.
            let abs_p: Vec<f64> = p.iter().map(|v| v.abs()).collect();
            let scale = max_abs(&dense_contract(&a.abs(), &abs_p, k).unwrap().data).max(f64::MIN_POSITIVE);
            for (x, y) in fast.iter().zip(&dense.data) {
                prop_assert!((x - y).abs() <= 1e-13 * scale);
            }
        }
    }

    #[test]
    fn metric_function_is_one_homogeneous((a, p) in metric_at_point(), lambda in 0.1f64..10.0) {
        let k = eval_k(&a, &p).unwrap();
        let kl = eval_k(&a, &p.scaled(lambda)).unwrap();
        prop_assert!((kl - lambda * k).abs() <= 1e-12 * lambda * k);
    }

    #[test]
    fn contraction_with_momentum_annihilates((a, p) in metric_at_point()) {
        let ctx = EvalContext::new(&a, &p).unwrap();
        let l1: f64 = p.iter().map(|v| v.abs()).sum();
        let cu = c_up(&ctx);
        prop_assert!(max_abs(&cu.contract_last(&p)) <= 1e-10 * cu.max_abs() * l1);
        let cm = c_mixed(&ctx);
        prop_assert!(max_abs(&cm.contract_last(&p)) <= 1e-10 * cm.max_abs() * l1);
        let t = t_closed(&ctx);
        prop_assert!(max_abs(&t.contract_last(&p)) <= 1e-10 * t_term_scale(&ctx) * l1);
    }

    #[test]
    fn v_torsion_is_symmetric((a, p) in metric_at_point()) {
        let ctx = EvalContext::new(&a, &p).unwrap();
        let cu = c_up(&ctx);
        prop_assert!(cu.max_asymmetry_all() <= 1e-13 * cu.max_abs());
    }
}
