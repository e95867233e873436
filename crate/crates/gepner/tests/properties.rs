//! Property tests across modules.

use gepner::classify;
use gepner::exactmath::{cyclo, normalize_phase, q, CycloNum, Q};
use gepner::hearts;
use gepner::mfcore::{koszul_c, tau, zg, WeightedType};
use gepner::quiverrep::{self, FpRep, StabilitySpec};
use proptest::prelude::*;
use rand::SeedableRng;

fn cyc(d: u32, coeffs: &[i64]) -> CycloNum {
    coeffs.iter().enumerate().fold(CycloNum::zero(d), |acc, (k, &c)| &acc + &cyclo(d, k as i64).scale(&Q::from_integer(c.into())))
}

proptest! {
    #[test]
    fn cyclo_field_laws(d in 3u32..13, a in prop::collection::vec(-5i64..6, 6), b in prop::collection::vec(-5i64..6, 6)) {
        let (x, y) = (cyc(d, &a), cyc(d, &b));
        prop_assert_eq!(&x * &y, &y * &x);
        prop_assert_eq!(&(&x + &y) * &y, &(&x * &y) + &(&y * &y));
        if !x.is_zero() {
            prop_assert_eq!(&x * &x.inv().unwrap(), CycloNum::one(d));
        }
    }

    #[test]
    fn normalized_phase_in_window(n in -50i64..50, m in 1i64..13, s in -6i64..6) {
        let start = q(s, 3);
        let p = normalize_phase(&q(n, m), &start);
        prop_assert!(p > start && p <= &start + Q::from_integer(2.into()));
    }

    #[test]
    fn tau_power_d_is_identity_on_classes(v in prop::collection::vec(-4i64..5, 6), which in 0usize..12) {
        let l = hearts::build_lattice(&classify::table1()[which].ty).unwrap();
        let v: Vec<i64> = v.into_iter().take(l.rank()).collect();
        prop_assume!(v.len() == l.rank());
        // τ^d = [2] acts trivially on K-theory
        prop_assert_eq!(l.tau_pow(&v, l.d() as usize), v);
    }

    #[test]
    fn grade_shift_multiplies_supertrace(which in 0usize..12, j in 0i64..6, k in -3i64..4) {
        let t = &classify::table1()[which].ty;
        let c = koszul_c(t, j);
        prop_assert_eq!(zg(&tau(&c, k)), &cyclo(t.degree, k) * &zg(&c));
    }

    #[test]
    fn verdicts_agree_across_primes(seed in 0u64..500, which in 0usize..5) {
        let t = WeightedType::parse(["1,1:3", "2,1:4", "3,2:6", "1,1:4", "3,1:6"][which]).unwrap();
        let q = quiverrep::heart_quiver(&t).unwrap();
        let spec = StabilitySpec::for_lattice(&hearts::build_lattice(&t).unwrap());
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let r = quiverrep::random_rep(&q, 5, 2, 8, &mut rng);
        let h = quiverrep::hn_checked(&q, &r, &spec).unwrap();
        prop_assert!(h.ok());
    }
}

#[test]
fn subrep_count_of_semisimple_rep() {
    // with all maps zero every tuple of subspaces is a subrepresentation
    let t = WeightedType::parse("1,1:4").unwrap();
    let q = quiverrep::heart_quiver(&t).unwrap();
    let dims = vec![2, 2, 1, 0, 1, 1];
    let mats = q.arrows.iter().map(|a| vec![vec![0u64; dims[a.source]]; dims[a.target]]).collect();
    let r = FpRep { p: 5, dims: dims.clone(), mats };
    let total: u128 = quiverrep::all_subreps(&q, &r).unwrap().values().sum();
    let want: u128 = dims.iter().map(|&n| quiverrep::subspace_count(n, 5)).product();
    assert_eq!(total, want);
}
