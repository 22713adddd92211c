mod common;

use common::poisson_oracle;
use ncs::prox::*;
use proptest::prelude::*;

const ALPHAS: [f64; 3] = [1e-3, 1.0, 1e3];

fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn pairs() -> Vec<(&'static str, Box<dyn ProxConj>)> {
    let z = grid(-7.0, 7.0, 29);
    let counts: Vec<f64> = (0..z.len()).map(|i| (i % 5) as f64 * 1.5).collect();
    vec![
        ("quadratic", Box::new(Quadratic)),
        ("l1", Box::new(L1Norm::new(0.7))),
        ("poisson", Box::new(PoissonLogLik::new(counts).unwrap())),
        ("nonneg", Box::new(NonNegative)),
    ]
}

#[test]
fn moreau_identity_holds_for_every_pair() {
    let z = grid(-7.0, 7.0, 29);
    for (name, g) in pairs() {
        for alpha in ALPHAS {
            let mut conj = vec![0.0; z.len()];
            g.prox_conj(&z, alpha, &mut conj);
            let scaled: Vec<f64> = z.iter().map(|v| v / alpha).collect();
            let mut primal = vec![0.0; z.len()];
            g.prox_primal(&scaled, 1.0 / alpha, &mut primal);
            for i in 0..z.len() {
                let residual = (conj[i] - (z[i] - alpha * primal[i])).abs();
                assert!(residual <= 1e-12, "{name}, α = {alpha}, z = {}: {residual:e}", z[i]);
            }
        }
    }
}

#[test]
fn poisson_prox_matches_scalar_minimization() {
    for u in grid(-5.0, 5.0, 21) {
        for c in grid(0.0, 10.0, 21) {
            let got = prox_conj_poisson(u, c).unwrap();
            if c == 0.0 {
                assert_eq!(got, u.min(1.0));
            }
            let want = poisson_oracle(u, c);
            assert!((got - want).abs() <= 1e-9, "u = {u}, c = {c}: {got} vs {want}");
            assert!(got < 1.0 || c == 0.0);
        }
    }
}

#[test]
fn poisson_prox_rejects_negative_offset() {
    assert!(prox_conj_poisson(0.5, -1e-3).is_none());
    assert!(prox_conj_poisson(0.5, f64::NAN).is_none());
    assert!(PoissonLogLik::new(vec![1.0, -2.0]).is_err());
}

#[test]
fn l1_clamp_does_not_depend_on_step() {
    let g = L1Norm::new(0.3);
    let z = [-2.0, -0.1, 0.0, 0.25, 5.0];
    for alpha in ALPHAS {
        let mut out = [0.0; 5];
        g.prox_conj(&z, alpha, &mut out);
        assert_eq!(out, [-0.3, -0.1, 0.0, 0.25, 0.3]);
    }
}

#[test]
fn objectives() {
    assert_eq!(Quadratic.objective(&[3.0, 4.0]), 12.5);
    assert_eq!(L1Norm::new(2.0).objective(&[-1.0, 0.5]), 3.0);
    assert_eq!(NonNegative.objective(&[1.0, 7.0]), 0.0);
    let p = PoissonLogLik::new(vec![0.0, 2.0]).unwrap();
    assert!((p.objective(&[0.5, 1.0]) - 1.5).abs() < 1e-15);
    assert_eq!(p.objective(&[-1.0, 1.0]), f64::INFINITY);
}

proptest! {
    #[test]
    fn conjugate_proxes_are_firmly_nonexpansive(
        a in -50.0f64..50.0, b in -50.0f64..50.0,
        alpha in 1e-3f64..1e3, count in 0.0f64..20.0,
    ) {
        let gs: Vec<Box<dyn ProxConj>> = vec![
            Box::new(Quadratic),
            Box::new(L1Norm::new(1.3)),
            Box::new(PoissonLogLik::new(vec![count]).unwrap()),
            Box::new(NonNegative),
        ];
        for g in gs {
            let (mut pa, mut pb) = ([0.0], [0.0]);
            g.prox_conj(&[a], alpha, &mut pa);
            g.prox_conj(&[b], alpha, &mut pb);
            let d = pa[0] - pb[0];
            prop_assert!(d * d <= d * (a - b) + 1e-9 * (1.0 + (a - b).abs()), "{}", g.descriptor());
        }
    }

    #[test]
    fn poisson_prox_solves_its_optimality_condition(u in -1e3f64..1e3, c in 1e-6f64..1e3) {
        let v = prox_conj_poisson(u, c).unwrap();
        prop_assert!(v < 1.0);
        let residual = (v - u) * (1.0 - v) + c;
        prop_assert!(residual.abs() <= 1e-9 * (1.0 + c + u.abs() * (1.0 + u.abs())));
    }
}
