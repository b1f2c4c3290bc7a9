use std::f64::consts::PI;

use cavity_thermo::thermo::*;
use cavity_thermo::{CavityGeometry, CutoffConstants, Error, SumPolicy};

fn model(g: CavityGeometry) -> ThermoModel {
    ThermoModel::new(g, CutoffConstants::FROZEN, SumPolicy::default()).unwrap()
}

fn geometries() -> [CavityGeometry; 3] {
    [CavityGeometry::pizza_box(1.0), CavityGeometry::cube(1.0), CavityGeometry::waveguide(1.0)]
}

#[test]
fn zero_temperature_free_energy_is_casimir_energy() {
    for g in geometries() {
        let m = model(g);
        let e0 = m.casimir().unwrap().energy;
        let d = m.delta(0.0).unwrap();
        assert_eq!(d.delta.f, e0);
        assert_eq!(d.delta.e, e0);
        assert_eq!(delta_energy(0.0, &g, &SumPolicy::default()).unwrap(), e0);
    }
}

#[test]
fn cube_regression_at_unit_xi() {
    let g = CavityGeometry::cube(1.0);
    let df = delta_free_energy(g.t_from_xi(1.0), &g, &CutoffConstants::FROZEN, &SumPolicy::default()).unwrap();
    assert!((df - 3.057_864_142_245_710e-4).abs() < 1e-13, "{df:e}");
}

#[test]
fn delta_parts_fade_at_high_temperature() {
    let g = CavityGeometry::cube(1.0);
    let m = model(g);
    let e0 = m.casimir().unwrap().energy;
    let hot = m.delta(g.t_from_xi(10.0)).unwrap().delta;
    assert!(hot.f.abs() < 0.01 * e0.abs());
}

#[test]
fn routes_agree_where_both_apply() {
    for g in [CavityGeometry::cube(1.0), CavityGeometry::new(1.0, 0.5, 2.0).unwrap(), CavityGeometry::waveguide(1.0)] {
        let m = model(g);
        let ts = m.switch_temperature();
        for f in [0.85, 1.6] {
            let t = ts * f;
            let a = m.delta_with(t, Route::Image).unwrap();
            let b = m.delta_with(t, Route::Spectral).unwrap();
            let tol = 1e-9 * (1.0 + a.delta.e.abs());
            assert!((a.delta.f - b.delta.f).abs() < tol, "F {} {}", a.delta.f, b.delta.f);
            assert!((a.delta.s - b.delta.s).abs() < 1e-9, "S {} {}", a.delta.s, b.delta.s);
            assert!((a.delta.e - b.delta.e).abs() < tol);
            assert!((a.delta.c - b.delta.c).abs() < 1e-9);
            for k in 0..3 {
                assert!((a.delta.df[k] - b.delta.df[k]).abs() < 1e-8 * (1.0 + a.delta.df[k].abs()));
            }
            assert_eq!(a.branch, b.branch);
        }
    }
}

#[test]
fn entropy_matches_free_energy_derivative_inside_a_branch() {
    let g = CavityGeometry::cube(1.0);
    let m = model(g);
    let t = g.t_from_xi(0.8);
    let h = 1e-4 * t;
    assert!(m.boundaries_between(g.xi_from_t(t - 2.0 * h), g.xi_from_t(t + 2.0 * h)).is_empty());
    let f = |x: f64| m.delta(x).unwrap().delta.f;
    let d1 = (f(t + h) - f(t - h)) / (2.0 * h);
    let d2 = (f(t + 2.0 * h) - f(t - 2.0 * h)) / (4.0 * h);
    let ds = -(4.0 * d1 - d2) / 3.0;
    let s = m.delta(t).unwrap().delta.s;
    assert!((ds - s).abs() < 1e-5 * s.abs(), "{ds} {s}");
}

#[test]
fn third_law_delta_entropy_cube() {
    let g = CavityGeometry::cube(1.0);
    let s = delta_entropy(g.t_from_xi(1e-3), &g, &CutoffConstants::FROZEN, &SumPolicy::default()).unwrap();
    assert!(s.abs() < 1e-3, "{s}");
}

#[test]
fn pizza_box_delta_entropy_goes_negative() {
    let g = CavityGeometry::pizza_box(1.0);
    let m = model(g);
    assert!((1..200).any(|i| m.delta(g.t_from_xi(0.025 * i as f64)).unwrap().delta.s < 0.0));
}

#[test]
fn energy_identity() {
    let g = CavityGeometry::cube(1.0);
    let m = model(g);
    for xi in [0.3, 0.9, 2.0] {
        let t = g.t_from_xi(xi);
        let d = m.delta(t).unwrap().delta;
        assert!((d.e - (d.f + t * d.s)).abs() < 1e-6 * d.e.abs(), "xi {xi}");
        let de = delta_energy(t, &g, &SumPolicy::default()).unwrap();
        assert!((de - d.e).abs() < 1e-12);
    }
}

#[test]
fn cube_delta_energy_decreases_at_low_temperature() {
    // Monotone from T = 0 up to the minimum near ξ ≈ 1.7; above it ΔE climbs back to 0.
    let g = CavityGeometry::cube(1.0);
    let p = SumPolicy::default();
    let vals: Vec<f64> = (0..=16).map(|i| delta_energy(g.t_from_xi(0.1 * i as f64), &g, &p).unwrap()).collect();
    assert!(vals.windows(2).all(|w| w[1] < w[0]), "{vals:?}");
}

#[test]
fn specific_heat_matches_analytic_derivative() {
    for g in geometries() {
        let m = model(g);
        for xi in [0.02, 0.4, 1.3] {
            let t = g.t_from_xi(xi);
            let fd = m.specific_heat(t).unwrap();
            let an = m.specific_heat_analytic(t).unwrap();
            assert!((fd - an).abs() < 1e-6 * (1.0 + an.abs()), "{:?} xi {xi}: {fd} {an}", g.edges());
        }
    }
}

#[test]
fn specific_heat_reaches_blackbody_limit() {
    let g = CavityGeometry::cube(10.0);
    let t = 3.0;
    let c = specific_heat(t, &g, &SumPolicy::default()).unwrap();
    let bb = 4.0 * PI * PI / 15.0 * g.volume() * t.powi(3) - PI / 6.0 * g.edge_sum() * t;
    assert!((c - bb).abs() < 1e-6 * bb, "{c} {bb}");
}

#[test]
fn specific_heat_signs_at_unit_xi() {
    let cube = CavityGeometry::cube(1.0);
    let pizza = CavityGeometry::pizza_box(1.0);
    let p = SumPolicy::default();
    let t = cube.t_from_xi(1.0);
    assert!(specific_heat(t, &cube, &p).unwrap() < blackbody_specific_heat(t, &cube));
    let t = pizza.t_from_xi(1.0);
    assert!(specific_heat(t, &pizza, &p).unwrap() > blackbody_specific_heat(t, &pizza));
}

#[test]
fn equation_of_state_and_cube_symmetry() {
    for g in geometries() {
        let m = model(g);
        for xi in [0.5, 1.0, 2.0] {
            let r = m.report(xi).unwrap();
            assert!(r.eos_residual() < 1e-6, "{:?} xi {xi}: {}", g.edges(), r.eos_residual());
        }
    }
    let g = CavityGeometry::cube(1.0);
    let m = model(g);
    for xi in [0.05, 0.3, 1.1, 3.0] {
        let t = g.t_from_xi(xi);
        let p = m.pressures(t).unwrap();
        let e = m.totals(t).unwrap().e;
        for k in 0..3 {
            assert!((p[k] - e / 3.0).abs() < 1e-6 * (e / 3.0).abs(), "xi {xi}: {p:?} {e}");
        }
    }
}

#[test]
fn parallel_plate_pressure() {
    let g = CavityGeometry::pizza_box(1.0);
    let r = model(g).report(0.0).unwrap();
    let target = -PI.powi(3) / 240.0;
    assert!((r.p[0].total / target - 1.0).abs() < 0.02, "{}", r.p[0].total);
}

#[test]
fn pressure_refuses_branch_boundary() {
    let g = CavityGeometry::cube(1.0);
    let m = model(g);
    let xi_c = CutoffConstants::FROZEN.v_v / 2.0;
    match m.pressures(g.t_from_xi(xi_c)) {
        Err(Error::BranchBoundary { xi }) => assert!((xi - xi_c).abs() < 1e-12),
        other => panic!("{other:?}"),
    }
    assert!(m.pressures(g.t_from_xi(xi_c + 1e-6)).is_ok());
    assert!(m.pressures(g.t_from_xi(xi_c - 1e-6)).is_ok());
}

#[test]
fn first_crossings_of_the_cube() {
    let g = CavityGeometry::cube(1.0);
    let c = CutoffConstants::FROZEN;
    let b = branch_boundaries(&g, &c, &SumPolicy::default(), 2.0).unwrap();
    let last = *b.last().unwrap();
    assert!((last - c.v_v / 2.0).abs() < 1e-15, "{last}");
    assert!(b.iter().any(|&x| (x - c.v_e / 2.0).abs() < 1e-15));
    let edge_only = cavity_thermo::thermo::branch_boundaries_between(&g, &CutoffConstants { v_v: 1e-9, ..c }, 0.3, 2.0);
    assert_eq!(edge_only.last().copied(), Some(c.v_e / 2.0));
}

#[test]
fn waveguide_crossings_persist_to_higher_xi() {
    let c = CutoffConstants::FROZEN;
    let p = SumPolicy::default();
    let cube = branch_boundaries(&CavityGeometry::cube(1.0), &c, &p, 100.0).unwrap();
    let wg = branch_boundaries(&CavityGeometry::waveguide(1.0), &c, &p, 100.0).unwrap();
    assert!(wg.last().unwrap() > cube.last().unwrap());
}

#[test]
fn free_energy_jumps_only_at_crossings() {
    let g = CavityGeometry::cube(1.0);
    let m = model(g);
    let crossings = m.boundaries_between(0.4, 0.9);
    assert!(crossings.len() >= 3);
    for &xc in &crossings[crossings.len() - 3..] {
        let below = m.totals(g.t_from_xi(xc - 1e-7)).unwrap();
        let above = m.totals(g.t_from_xi(xc + 1e-7)).unwrap();
        assert!((above.f - below.f).abs() > 1e-6, "no jump at {xc}");
        assert!((above.e - below.e).abs() < 1e-6);
        // Away from the crossing F is smooth on the same scale.
        let x0 = xc + 2e-3;
        let f0 = m.totals(g.t_from_xi(x0 - 1e-7)).unwrap().f;
        let f1 = m.totals(g.t_from_xi(x0 + 1e-7)).unwrap().f;
        if m.boundaries_between(x0 - 1e-7, x0 + 1e-7).is_empty() {
            assert!((f1 - f0).abs() < 1e-7);
        }
    }
}

#[test]
fn branch_signature_is_monotone() {
    let g = CavityGeometry::new(1.0, 0.6, 1.7).unwrap();
    let m = model(g);
    let ids: Vec<u64> = (1..40).map(|i| m.branch_signature(g.t_from_xi(0.05 * i as f64)).unwrap().branch_id()).collect();
    assert!(ids.windows(2).all(|w| w[1] <= w[0]));
    assert_eq!(m.branch_signature(g.t_from_xi(50.0)).unwrap().branch_id(), 0);
}

#[test]
fn report_parts_add_up() {
    let g = CavityGeometry::new(1.0, 0.5, 2.0).unwrap();
    let r = model(g).report(0.7).unwrap();
    for q in [r.f, r.s, r.e, r.c_v, r.p[0], r.p[1], r.p[2]] {
        assert_eq!(q.total, q.blackbody + q.delta);
    }
}
