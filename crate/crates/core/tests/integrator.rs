use vri::ensembles::{line_ensemble, slice_grid, LineEnsembleSpec, SliceGridSpec};
use vri::integrator::{hamiltonian, integrate, propagate, vector_field, Method};
use vri::{Fate, IntegratorConfig, Pes, PesSpec, State};

fn pes(xi: f64) -> Pes {
    Pes::new(PesSpec::default().with_vri_x(xi)).unwrap()
}

fn line(p: &Pes, h0: f64, density: f64) -> Vec<State> {
    line_ensemble(&LineEnsembleSpec::new(h0, density), p).unwrap()
}

/// Accessible cells of a coarse section grid, which carry momentum along y.
fn slice_states(p: &Pes, h0: f64, n: usize) -> Vec<State> {
    slice_grid(h0, &SliceGridSpec::square(n), p).unwrap().cells.into_iter().flatten().collect()
}

/// Exact comparison key; `==` on f64 identifies the two signed zeros.
fn key(s: &State) -> [f64; 5] {
    [s.t, s.x, s.y, s.px, s.py]
}

#[test]
fn hamiltonian_values() {
    let p = pes(0.3265);
    assert_eq!(hamiltonian(&State::new(0.0, 0.0, 0.0, 0.0, 0.0), &p), 0.0);
    assert!((hamiltonian(&State::new(0.0, 1.25, 1.0, 0.0, 0.0), &p) + 1.0).abs() <= 1e-12);
    for s in line(&p, 0.03, 500.0) {
        assert!((hamiltonian(&s, &p) - 0.03).abs() <= 1e-14);
    }
}

#[test]
fn vector_field_is_minus_gradient_and_odd() {
    let p = pes(0.3265);
    assert_eq!(vector_field(&State::new(0.0, 0.0, 0.0, 0.0, 0.0), &p), [0.0; 4]);
    let mut seed = 0x2545_f491_4f6c_dd1du64;
    let mut unit = || {
        seed ^= seed << 13;
        seed ^= seed >> 7;
        seed ^= seed << 17;
        (seed >> 11) as f64 / (1u64 << 53) as f64
    };
    for _ in 0..1000 {
        let s = State::new(0.0, -1.0 + 3.0 * unit(), -2.0 + 4.0 * unit(), unit() - 0.5, unit() - 0.5);
        let f = vector_field(&s, &p);
        let (gx, gy) = p.gradient(s.x, s.y);
        assert_eq!(f[2].to_bits(), (-gx).to_bits());
        assert_eq!(f[3].to_bits(), (-gy).to_bits());
        assert_eq!(f[0], s.px);
        assert_eq!(f[1], s.py);
        let m = vector_field(&s.mirrored(), &p);
        assert_eq!(m[0].to_bits(), f[0].to_bits());
        assert_eq!(m[1].to_bits(), (-f[1]).to_bits());
        assert_eq!(m[2].to_bits(), f[2].to_bits());
        assert_eq!(m[3].to_bits(), (-f[3]).to_bits());
    }
}

#[test]
fn mirrored_runs_are_exact_mirrors() {
    let cfg = IntegratorConfig {
        sample_interval: 0.05,
        ..Default::default()
    };
    for xi in [0.1, 0.3265, 0.5] {
        let p = pes(xi);
        let mut states = line(&p, 0.03, 60.0);
        states.extend(slice_states(&p, 0.03, 8));
        for s in states {
            let a = integrate(&s, &p, &cfg).unwrap();
            let b = integrate(&s.mirrored(), &p, &cfg).unwrap();
            assert_eq!(b.fate, a.fate.mirrored());
            assert_eq!(key(&b.exit_state), key(&a.exit_state.mirrored()));
            let (pa, pb) = (a.path.unwrap(), b.path.unwrap());
            assert_eq!(pa.len(), pb.len());
            for (u, v) in pa.iter().zip(&pb) {
                assert_eq!(key(v), key(&u.mirrored()));
            }
        }
    }
}

#[test]
fn upper_half_mostly_reaches_top_at_small_xi() {
    let p = pes(0.1);
    let states = line(&p, 0.03, 500.0);
    let upper: Vec<_> = states.iter().filter(|s| s.y > 0.0).collect();
    let top = upper.iter().filter(|s| integrate(s, &p, &IntegratorConfig::default()).unwrap().fate == Fate::TopWell).count();
    assert!(2 * top > upper.len(), "{top} of {}", upper.len());
}

#[test]
fn energy_drift_within_bound() {
    let cfg = IntegratorConfig::default();
    for xi in [0.025, 0.1, 0.3265, 0.5, 0.7] {
        let p = pes(xi);
        for s in slice_states(&p, 0.03, 14) {
            let r = integrate(&s, &p, &cfg).unwrap();
            assert!(r.max_energy_drift <= 1e-9, "xi {xi}: drift {}", r.max_energy_drift);
            let end = (hamiltonian(&r.exit_state, &p) - r.initial_energy).abs();
            assert!(end <= r.max_energy_drift + 1e-15);
        }
    }
}

#[test]
fn exit_states_lie_on_event_surfaces() {
    let cfg = IntegratorConfig::default();
    let r2 = cfg.capture_radius * cfg.capture_radius;
    for xi in [0.1, 0.3265, 0.5] {
        let p = pes(xi);
        for s in line(&p, 0.03, 200.0).into_iter().chain(slice_states(&p, 0.03, 10)) {
            let r = integrate(&s, &p, &cfg).unwrap();
            let e = r.exit_state;
            match r.fate {
                Fate::TopWell => assert!(((e.x - 1.25).powi(2) + (e.y - 1.0).powi(2) - r2).abs() <= 1e-10),
                Fate::BottomWell => assert!(((e.x - 1.25).powi(2) + (e.y + 1.0).powi(2) - r2).abs() <= 1e-10),
                Fate::Recross => {
                    assert!(e.x.abs() <= 1e-10, "x = {}", e.x);
                    assert!(e.px < 0.0);
                }
                Fate::Timeout => panic!("unexpected timeout from {s:?}"),
            }
            assert_eq!(e.t, r.elapsed);
        }
    }
}

#[test]
fn zero_length_integration_has_no_drift() {
    let p = pes(0.3265);
    let s = line(&p, 0.03, 20.0)[3];
    let cfg = IntegratorConfig {
        t_max: 1e-300,
        ..Default::default()
    };
    let r = integrate(&s, &p, &cfg).unwrap();
    assert_eq!(r.fate, Fate::Timeout);
    assert_eq!(r.max_energy_drift, 0.0);
    assert_eq!(propagate(&s, &p, &IntegratorConfig::default(), 0.0).unwrap(), s);
}

#[test]
fn time_reversal_returns_to_start() {
    let cfg = IntegratorConfig::default();
    for xi in [0.1, 0.3265, 0.5] {
        let p = pes(xi);
        for s in line(&p, 0.03, 40.0) {
            let r = integrate(&s, &p, &cfg).unwrap();
            if r.elapsed > 10.0 {
                continue;
            }
            let e = r.exit_state;
            let back = propagate(&State::new(0.0, e.x, e.y, -e.px, -e.py), &p, &cfg, r.elapsed).unwrap();
            let d = ((back.x - s.x).powi(2) + (back.y - s.y).powi(2) + (back.px + s.px).powi(2) + (back.py + s.py).powi(2)).sqrt();
            assert!(d <= 1e-6, "xi {xi}: distance {d}");
        }
    }
}

/// Half period along y = 0 at energy 0.03: with H0 - V(x, 0) = ½(X² - x²)(x² + c)
/// and x = X sin θ, t = ∫₀^{π/2} dθ / √(X² sin²θ + c).
fn axis_half_period() -> f64 {
    let c = 1.06f64.sqrt() - 1.0;
    let xt2 = 1.0 + 1.06f64.sqrt();
    let n = 20_000;
    let h = std::f64::consts::FRAC_PI_2 / n as f64;
    let f = |t: f64| 1.0 / (xt2 * t.sin().powi(2) + c).sqrt();
    let mut sum = f(0.0) + f(std::f64::consts::FRAC_PI_2);
    for k in 1..n {
        sum += if k % 2 == 1 { 4.0 } else { 2.0 } * f(k as f64 * h);
    }
    sum * h / 3.0
}

#[test]
fn symmetry_axis_trajectory_stays_on_axis() {
    let p = pes(0.3265);
    let cfg = IntegratorConfig {
        sample_interval: 0.01,
        ..Default::default()
    };
    let s0 = State::new(0.0, 0.0, 0.0, (2.0f64 * 0.03).sqrt(), 0.0);
    let r = integrate(&s0, &p, &cfg).unwrap();
    for s in r.path.as_ref().unwrap() {
        assert_eq!(s.y, 0.0);
        assert_eq!(s.py, 0.0);
    }
    // y = 0 is invariant, so the motion is the axis oscillation, which
    // passes back over x = 0 after two half periods.
    assert_eq!(r.fate, Fate::Recross);
    let t = 2.0 * axis_half_period();
    assert!((r.elapsed - t).abs() <= 1e-8, "{} vs {t}", r.elapsed);

    let long = IntegratorConfig {
        t_max: 200.0,
        ..Default::default()
    };
    let end = propagate(&s0, &p, &long, 200.0).unwrap();
    assert_eq!(end.y, 0.0);
    assert!((hamiltonian(&end, &p) - 0.03).abs() <= 1e-9);
}

#[test]
fn frozen_fates_stable_under_refinement() {
    let p = pes(0.3265);
    let states = line(&p, 0.03, 204.5);
    let text = include_str!("fixtures/line_fates.txt");
    let rows: Vec<(usize, Fate, bool)> = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| {
            let f: Vec<&str> = l.split_whitespace().collect();
            (f[0].parse().unwrap(), f[1].parse().unwrap(), f[2] == "sensitive")
        })
        .collect();
    assert_eq!(rows.len(), 100);
    assert_eq!(states.len(), 100);
    let cfg = IntegratorConfig::default();
    for cfg in [cfg, cfg.refined()] {
        for &(id, fate, sensitive) in &rows {
            let got = integrate(&states[id], &p, &cfg).unwrap().fate;
            assert!(sensitive || got == fate, "trajectory {id}: {got} vs frozen {fate}");
        }
    }
}

#[test]
fn symplectic_agrees_with_adaptive() {
    let p = pes(0.3265);
    let adaptive = IntegratorConfig::default();
    let symplectic = IntegratorConfig {
        method: Method::Symplectic,
        step_size: 1e-3,
        ..Default::default()
    };
    for s in line(&p, 0.03, 40.0) {
        let a = integrate(&s, &p, &adaptive).unwrap();
        let b = integrate(&s, &p, &symplectic).unwrap();
        assert_eq!(a.fate, b.fate);
        assert!((a.elapsed - b.elapsed).abs() <= 1e-6 * a.elapsed.max(1.0), "{} vs {}", a.elapsed, b.elapsed);
    }
}

#[test]
fn symplectic_drift_shrinks_with_step() {
    let p = pes(0.3265);
    for s in line(&p, 0.03, 20.0) {
        let drift = |h: f64| {
            let cfg = IntegratorConfig {
                method: Method::Symplectic,
                step_size: h,
                ..Default::default()
            };
            propagate_drift(&s, &p, &cfg, 5.0)
        };
        let (d1, d2, d4) = (drift(0.02), drift(0.01), drift(0.005));
        assert!(d1 > d2 && d2 > d4, "{d1} {d2} {d4}");
        // fourth order: halving h cuts the error by about 16
        assert!(d1 / d2 > 8.0 && d2 / d4 > 8.0, "{d1} {d2} {d4}");
    }
}

/// Largest energy error seen at unit-time checkpoints.
fn propagate_drift(s0: &State, p: &Pes, cfg: &IntegratorConfig, duration: f64) -> f64 {
    let h0 = hamiltonian(s0, p);
    let mut s = *s0;
    let mut worst: f64 = 0.0;
    let mut t = 0.0;
    while t < duration {
        s = propagate(&s, p, cfg, 0.25).unwrap();
        worst = worst.max((hamiltonian(&s, p) - h0).abs());
        t += 0.25;
    }
    worst
}

#[test]
fn rejects_non_finite_start() {
    let p = pes(0.3265);
    let s = State::new(0.0, f64::NAN, 0.0, 0.1, 0.0);
    assert!(integrate(&s, &p, &IntegratorConfig::default()).is_err());
}
