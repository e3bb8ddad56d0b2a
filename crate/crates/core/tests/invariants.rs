use std::sync::Arc;

use proptest::prelude::*;

use fraclap::harness::{parse_config, solution_csv};
use fraclap::operator::{apply_directional, apply_fractional_field, Backend, FractionalOperator};
use fraclap::weights::{weights_1d, weights_nd};
use fraclap::{
    AxisMask, DiffusionTerm, Grid, GridFunction, InitialData, Nonlinearity, Problem, Scheme,
    SchemeConfig, Solver, TauRule,
};

fn line(n_half: usize, h: f64) -> Arc<Grid<f64>> {
    let l = n_half as f64 * h;
    Arc::new(Grid::new(&[(-l, l)], h).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn operator_is_linear(sigma in 0.1f64..1.95, a in -3.0f64..3.0, b in -3.0f64..3.0,
                          u in prop::collection::vec(-1.0f64..1.0, 41),
                          v in prop::collection::vec(-1.0f64..1.0, 41)) {
        let grid = line(20, 0.25);
        let t = weights_1d(sigma, 0.25, 40).unwrap();
        let w: Vec<f64> = u.iter().zip(&v).map(|(x, y)| a * x + b * y).collect();
        let lu = apply_fractional_field(&t, &GridFunction::new(grid.clone(), u).unwrap()).unwrap();
        let lv = apply_fractional_field(&t, &GridFunction::new(grid.clone(), v).unwrap()).unwrap();
        let lw = apply_fractional_field(&t, &GridFunction::new(grid, w).unwrap()).unwrap();
        let scale = t.diagonal_mass() * 8.0;
        for i in 0..41 {
            let want = a * lu.values()[i] + b * lv.values()[i];
            prop_assert!((lw.values()[i] - want).abs() <= 1e-13 * scale);
        }
    }

    #[test]
    fn operator_is_nonpositive_at_a_nonnegative_maximum(sigma in 0.1f64..1.95,
                          u in prop::collection::vec(0.0f64..1.0, 33)) {
        let grid = line(16, 0.5);
        let t = weights_1d(sigma, 0.5, 32).unwrap();
        let k = (0..u.len()).max_by(|&i, &j| u[i].partial_cmp(&u[j]).unwrap()).unwrap();
        let lu = apply_fractional_field(&t, &GridFunction::new(grid, u).unwrap()).unwrap();
        prop_assert!(lu.values()[k] <= 0.0);
    }

    #[test]
    fn fft_and_direct_agree(sigma in 0.1f64..1.95, u in prop::collection::vec(-1.0f64..1.0, 129)) {
        let grid = line(64, 0.125);
        let t = weights_1d(sigma, 0.125, 128).unwrap();
        let direct = FractionalOperator::new(t.clone(), grid.clone(), None, Backend::Direct).unwrap();
        let fft = FractionalOperator::new(t, grid.clone(), None, Backend::Fft).unwrap();
        prop_assert!(fft.uses_fft());
        let mut a = vec![0.0; 129];
        let mut b = vec![0.0; 129];
        direct.apply(&u, &mut a);
        fft.apply(&u, &mut b);
        let scale = a.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn explicit_step_is_monotone(sigma in 0.2f64..1.9, f in 0usize..3,
                                 u in prop::collection::vec(-1.0f64..1.0, 33),
                                 bump in prop::collection::vec(0.0f64..0.5, 33)) {
        let names = ["F1", "F2", "F3"];
        let p = Problem::new(line(16, 0.25), InitialData::builtin("g2").unwrap())
            .with_term(DiffusionTerm::fractional(sigma, Nonlinearity::builtin(names[f]).unwrap()));
        let s = Solver::new(p, SchemeConfig::new(Scheme::Explicit, 0.5, TauRule::Auto { safety: 1.0 })).unwrap();
        let v: Vec<f64> = u.iter().zip(&bump).map(|(a, b)| a + b).collect();
        let a = s.step_explicit(&u, 0.0);
        let b = s.step_explicit(&v, 0.0);
        for (x, y) in a.iter().zip(&b) {
            prop_assert!(x <= y);
        }
    }
}

#[test]
fn directional_operator_on_a_plane_matches_line_operator() {
    let grid = Arc::new(Grid::cube(-2.0, 2.0, 2, 0.25).unwrap());
    let t = weights_1d(0.8, 0.25, 16).unwrap();
    let u = GridFunction::sample(grid.clone(), |x: &[f64]| (x[0] * 1.3).sin() + x[1] * x[1]);
    let ly = apply_directional(&t, &AxisMask::single(2, 1).unwrap(), &u).unwrap();
    let n = grid.shape()[0];
    for i in 0..n {
        let row = Arc::new(Grid::new(&[(-2.0, 2.0)], 0.25).unwrap());
        let slice = GridFunction::new(row, u.values()[i * n..(i + 1) * n].to_vec()).unwrap();
        let l = apply_fractional_field(&t, &slice).unwrap();
        assert_eq!(l.values(), &ly.values()[i * n..(i + 1) * n]);
    }
}

#[test]
fn full_2d_table_is_positive_and_exterior_drops_out() {
    let grid = Arc::new(Grid::cube(-1.0, 1.0, 2, 0.5).unwrap());
    let t = weights_nd(1.0, 0.5, 2, 4).unwrap();
    let one = GridFunction::sample(grid.clone(), |_| 1.0);
    let l = apply_fractional_field(&t, &one).unwrap();
    // a constant inside a zero exterior is pulled down everywhere
    assert!(l.values().iter().all(|&v| v < 0.0));
    // the centre sees the most mass
    let c = grid.flat(&[2, 2]).unwrap();
    assert!(l.values().iter().all(|&v| v <= l.values()[c] + 1e-15));
}

#[test]
fn single_and_double_precision_agree() {
    let p64 = Problem::new(
        Arc::new(Grid::new(&[(-4.0, 4.0)], 0.125).unwrap()),
        InitialData::builtin("g1").unwrap(),
    )
    .with_term(DiffusionTerm::fractional(
        1.0,
        Nonlinearity::builtin("F2").unwrap(),
    ));
    let p32 = Problem::new(
        Arc::new(Grid::new(&[(-4.0f32, 4.0)], 0.125).unwrap()),
        InitialData::builtin("g1").unwrap(),
    )
    .with_term(DiffusionTerm::fractional(
        1.0f32,
        Nonlinearity::builtin("F2").unwrap(),
    ));
    let a = fraclap::solve(
        p64,
        SchemeConfig::new(Scheme::Explicit, 0.5, TauRule::Auto { safety: 0.9 }),
    )
    .unwrap();
    let b = fraclap::solve(
        p32,
        SchemeConfig::new(Scheme::Explicit, 0.5f32, TauRule::Auto { safety: 0.9 }),
    )
    .unwrap();
    assert_eq!(a.steps, b.steps);
    for (x, y) in a
        .final_state()
        .values()
        .iter()
        .zip(b.final_state().values())
    {
        assert!((x - f64::from(*y)).abs() < 1e-4, "{x} vs {y}");
    }
}

#[test]
fn identical_runs_give_identical_csv() {
    let text = "sigma = 1.5\nh = 0.0625\ndomain = -6, 6\nscheme = explicit\nt_final = 0.25\nnonlinearity = F2\ninitial = g1\nsnapshot_times = 0.1\n";
    let run = || {
        let (p, c) = parse_config(text).unwrap().build::<f64>().unwrap();
        solution_csv(&fraclap::solve(p, c).unwrap().snapshots)
    };
    assert_eq!(run(), run());
}

#[test]
fn implicit_scheme_accepts_steps_beyond_the_explicit_bound() {
    let p = Problem::new(line(32, 0.125), InitialData::builtin("g2").unwrap()).with_term(
        DiffusionTerm::fractional(1.0, Nonlinearity::builtin("F1").unwrap()),
    );
    let mut cfg = SchemeConfig::new(Scheme::Theta, 1.0, TauRule::Fixed(0.25));
    cfg.theta = 1.0;
    let tr = fraclap::solve(p.clone(), cfg).unwrap();
    assert!(tr.max_fp_residual <= 1e-12);
    // ordered between the bounds of the data, as for the explicit scheme
    let v = tr.final_state().values();
    assert!(v.iter().all(|&x| (-1.0..=1.0 + 1e-12).contains(&x)));
    // the same τ is rejected by the explicit scheme
    let err = Solver::new(
        p,
        SchemeConfig::new(Scheme::Explicit, 1.0, TauRule::Fixed(0.25)),
    );
    assert!(matches!(err, Err(fraclap::Error::CflViolation { .. })));
}
