use vri::ensembles::{line_count, line_ensemble, slice_area, slice_grid, LineEnsembleSpec, SliceGridSpec};
use vri::integrator::hamiltonian;
use vri::{Pes, PesSpec};

fn pes(xi: f64) -> Pes {
    Pes::new(PesSpec::default().with_vri_x(xi)).unwrap()
}

fn slice_xis() -> Vec<f64> {
    (1..=28).map(|k| k as f64 * 0.025).collect()
}

/// Area by a fine midpoint rule directly in y.
fn area_oracle(p: &Pes, h0: f64) -> f64 {
    let half = 0.5 * p.bottleneck_width(h0).unwrap();
    let n = 2_000_000;
    let h = 2.0 * half / n as f64;
    let mut sum = 0.0;
    for k in 0..n {
        let y = -half + (k as f64 + 0.5) * h;
        sum += (2.0 * (h0 - p.potential(0.0, y)).max(0.0)).sqrt();
    }
    2.0 * sum * h
}

#[test]
fn line_ensemble_reference_count() {
    let p = pes(0.3265);
    let w = p.bottleneck_width(0.03).unwrap();
    assert_eq!(line_count(500.0, w), 245);
    let states = line_ensemble(&LineEnsembleSpec::new(0.03, 500.0), &p).unwrap();
    assert_eq!(states.len(), 245);
    let mid = states[122];
    assert_eq!((mid.x, mid.y, mid.py), (0.0, 0.0, 0.0));
    assert_eq!(mid.px, (2.0f64 * 0.03).sqrt());
    assert_eq!(states[0].y, -0.5 * w);
    assert_eq!(states[244].y, 0.5 * w);
}

#[test]
fn line_ensemble_shell_and_symmetry() {
    for xi in slice_xis() {
        for h0 in [0.005, 0.03, 0.1] {
            let p = pes(xi);
            let states = line_ensemble(&LineEnsembleSpec::new(h0, 500.0), &p).unwrap();
            let n = states.len();
            assert_eq!(n, (500.0 * p.bottleneck_width(h0).unwrap()).ceil() as usize);
            for (k, s) in states.iter().enumerate() {
                assert!((hamiltonian(s, &p) - h0).abs() <= 1e-14, "xi {xi} H0 {h0} k {k}");
                let m = states[n - 1 - k];
                assert_eq!(s.y, -m.y);
                assert_eq!(s.px.to_bits(), m.px.to_bits());
            }
            let gaps: Vec<f64> = states.windows(2).map(|w| w[1].y - w[0].y).collect();
            let step = gaps[0];
            assert!(gaps.iter().all(|g| (g - step).abs() <= 1e-14));
            assert!(states[0].px <= 1e-5);
        }
    }
}

#[test]
fn grid_mask_symmetries() {
    let p = pes(0.3265);
    for (ny, npy) in [(16, 16), (17, 33), (40, 25)] {
        let g = slice_grid(0.03, &SliceGridSpec { n_y: ny, n_py: npy }, &p).unwrap();
        for iy in 0..ny {
            assert_eq!(g.y_at(iy), -g.y_at(ny - 1 - iy));
            for ipy in 0..npy {
                let here = g.cells[g.index(iy, ipy)].is_some();
                assert_eq!(here, g.cells[g.index(ny - 1 - iy, npy - 1 - ipy)].is_some());
                assert_eq!(here, g.cells[g.index(iy, npy - 1 - ipy)].is_some());
                if let Some(s) = g.cells[g.index(iy, ipy)] {
                    assert!((hamiltonian(&s, &p) - 0.03).abs() <= 1e-14);
                    assert!(s.px > 0.0);
                    assert_eq!(s.x, 0.0);
                }
            }
        }
    }
}

#[test]
fn centre_row_contains_the_line() {
    let p = pes(0.3265);
    let g = slice_grid(0.03, &SliceGridSpec { n_y: 64, n_py: 33 }, &p).unwrap();
    assert_eq!(g.py_at(16), 0.0);
    for iy in 0..64 {
        let s = g.cells[g.index(iy, 16)].expect("p_y = 0 row fully accessible");
        let px = (2.0 * (0.03 - p.potential(0.0, s.y))).sqrt();
        assert_eq!(s.px, px);
    }
    let odd = slice_grid(0.03, &SliceGridSpec::square(33), &p).unwrap();
    let c = odd.cells[odd.index(16, 16)].unwrap();
    assert_eq!((c.y, c.py), (0.0, 0.0));
    assert_eq!(c.px, (2.0f64 * 0.03).sqrt());
}

#[test]
fn area_matches_direct_integration() {
    for xi in [0.025, 0.3265, 0.7] {
        for h0 in [0.005, 0.03, 0.1] {
            let p = pes(xi);
            let a = slice_area(&p, h0).unwrap();
            let oracle = area_oracle(&p, h0);
            assert!((a - oracle).abs() <= 1e-8 * oracle, "xi {xi} H0 {h0}: {a} vs {oracle}");
        }
    }
}

#[test]
fn grid_count_converges_to_area() {
    let p = pes(0.3265);
    let area = slice_area(&p, 0.03).unwrap();
    let err = |n: usize| {
        let g = slice_grid(0.03, &SliceGridSpec::square(n), &p).unwrap();
        (g.accessible_count() as f64 * g.cell_area() - area).abs() / area
    };
    let errs: Vec<f64> = [128, 512, 2048].into_iter().map(err).collect();
    assert!(errs[2] <= 1e-3, "{errs:?}");
    assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
}

#[test]
fn area_monotone_on_experiment_grids() {
    let areas: Vec<f64> = slice_xis().iter().map(|&xi| slice_area(&pes(xi), 0.03).unwrap()).collect();
    assert!(areas.windows(2).all(|w| w[1] < w[0]), "{areas:?}");
    let p = pes(0.3265);
    let by_h0: Vec<f64> = (5..=100).map(|k| slice_area(&p, k as f64 * 1e-3).unwrap()).collect();
    assert!(by_h0.windows(2).all(|w| w[1] > w[0]));
    assert!(slice_area(&p, 1e-12).unwrap() < 1e-9);
}

#[test]
fn rejects_bad_inputs() {
    let p = pes(0.3265);
    assert!(line_ensemble(&LineEnsembleSpec::new(0.03, 0.0), &p).is_err());
    assert!(line_ensemble(&LineEnsembleSpec::new(-0.01, 500.0), &p).is_err());
    assert!(slice_grid(0.03, &SliceGridSpec { n_y: 1, n_py: 8 }, &p).is_err());
}
