use modal_diversity::channel::{apply_screen, coupling_gain, crosstalk_matrix, projected_gain, sample_gain};
use modal_diversity::field::{inner_product, total_power, GridSpec};
use modal_diversity::modes::ModeSpec;
use modal_diversity::turbulence::{derive_seed, generate_screen, PhaseScreen, ScreenGenerator, Stream, TurbulenceParams};
use num_complex::Complex64;

fn waist() -> f64 {
    1.4e-3 / 5f64.sqrt()
}

fn grid() -> GridSpec {
    GridSpec::new(128, 14e-3).unwrap()
}

fn pair() -> [ModeSpec; 2] {
    [ModeSpec::hg(2, 2, waist()).unwrap(), ModeSpec::lg(2, 1, waist()).unwrap()]
}

/// r0 giving SR = 0.95 for the 2.8 mm beam.
fn mild_r0() -> f64 {
    let x = (-(0.95f64).ln() / 1.03).powf(0.6);
    2.8e-3 / x
}

#[test]
fn zero_and_constant_screens() {
    let g = grid();
    let [hg, lg] = pair();
    let f = hg.evaluate(&g).unwrap();
    let other = lg.evaluate(&g).unwrap();
    assert_eq!(apply_screen(&f, &PhaseScreen::flat(g, 0.0)).unwrap(), f);
    let shifted = apply_screen(&f, &PhaseScreen::flat(g, 1.3)).unwrap();
    let expect = f.scaled(Complex64::from_polar(1.0, 1.3));
    assert!(shifted.max_abs_diff(&expect).unwrap() < 1e-15);
    let before = inner_product(&other, &f).unwrap().norm_sqr();
    let after = inner_product(&other, &shifted).unwrap().norm_sqr();
    assert!((before - after).abs() < 1e-15);
}

#[test]
fn random_screens_preserve_power() {
    let g = grid();
    let f = pair()[1].evaluate(&g).unwrap();
    let params = TurbulenceParams::new(2e-3, g).unwrap();
    for seed in 0..8 {
        let s = generate_screen(&params, seed).unwrap();
        let out = apply_screen(&f, &s).unwrap();
        assert!((total_power(&out) - total_power(&f)).abs() < 1e-12);
    }
}

#[test]
fn couplings_without_turbulence() {
    let g = grid();
    let [hg, lg] = pair();
    let flat = PhaseScreen::flat(g, 0.0);
    assert!((coupling_gain(&hg, &hg, &flat, &g).unwrap().norm_sqr() - 1.0).abs() < 1e-6);
    assert!((coupling_gain(&lg, &lg, &flat, &g).unwrap().norm_sqr() - 1.0).abs() < 1e-6);
    assert!(coupling_gain(&hg, &lg, &flat, &g).unwrap().norm_sqr() < 1e-6);
}

#[test]
fn projected_gain_matches_explicit_overlap() {
    let g = grid();
    let [hg, lg] = pair();
    let params = TurbulenceParams::new(3e-3, g).unwrap();
    let s = generate_screen(&params, 5).unwrap();
    let (a, b) = (hg.evaluate(&g).unwrap(), lg.evaluate(&g).unwrap());
    let explicit = inner_product(&b, &apply_screen(&a, &s).unwrap()).unwrap();
    let fused = projected_gain(&b, &a, &s).unwrap();
    assert!((explicit - fused).norm() < 1e-14);
    let sample = sample_gain(&hg, &lg, &params, 5).unwrap();
    assert!((sample.gain - fused).norm() < 1e-14);
    assert!((sample.power() - fused.norm_sqr()).abs() < 1e-15);
}

#[test]
fn mild_turbulence_crosstalk_small_but_present() {
    let params = TurbulenceParams::new(mild_r0(), grid()).unwrap();
    let m = crosstalk_matrix(&pair(), &params, 200, 11).unwrap();
    for (i, j) in [(0, 1), (1, 0)] {
        let x = m.values[i][j];
        assert!(x > 0.0 && x < 0.05, "cross {i}->{j} = {x}");
        assert!(x < 0.1 * m.values[i][i]);
        assert!(x < 0.1 * m.values[j][j]);
    }
    for row in m.row_sums() {
        assert!(row <= 1.0 + 1e-9);
    }
}

#[test]
fn identity_without_turbulence() {
    let params = TurbulenceParams::new(f64::INFINITY, grid()).unwrap();
    let m = crosstalk_matrix(&pair(), &params, 2, 0).unwrap();
    for i in 0..2 {
        for j in 0..2 {
            let e = if i == j { 1.0 } else { 0.0 };
            assert!((m.values[i][j] - e).abs() < 1e-6);
        }
    }
}

#[test]
fn self_coupling_falls_with_r0() {
    let g = grid();
    let [hg, lg] = pair();
    let n = 200;
    for mode in [hg, lg] {
        let f = mode.evaluate(&g).unwrap();
        let stats: Vec<(f64, f64)> = [20e-3, 10e-3, 5e-3, 2.5e-3, 1.25e-3]
            .iter()
            .map(|&r0| {
                let gen = ScreenGenerator::new(TurbulenceParams::new(r0, g).unwrap()).unwrap();
                let p: Vec<f64> = (0..n)
                    .map(|s| {
                        let screen = gen.generate(derive_seed(21, Stream::Screen, s));
                        projected_gain(&f, &f, &screen).unwrap().norm_sqr()
                    })
                    .collect();
                let mean = p.iter().sum::<f64>() / n as f64;
                let var = p.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
                (mean, (var / n as f64).sqrt())
            })
            .collect();
        for w in stats.windows(2) {
            let tol = 3.0 * (w[0].1.powi(2) + w[1].1.powi(2)).sqrt();
            assert!(w[1].0 <= w[0].0 + tol, "{}: {stats:?}", mode.label());
        }
        assert!(stats[4].0 < stats[0].0);
    }
}

#[test]
fn crosstalk_is_deterministic_and_csv_shaped() {
    let params = TurbulenceParams::new(4e-3, grid()).unwrap();
    let a = crosstalk_matrix(&pair(), &params, 16, 3).unwrap();
    let b = crosstalk_matrix(&pair(), &params, 16, 3).unwrap();
    assert_eq!(a.to_csv(), b.to_csv());
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("x.csv");
    a.write_csv(&path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text, a.to_csv());
    assert!(text.starts_with("launch\\detect,HG_2_2,LG_2_1\n"));
}
