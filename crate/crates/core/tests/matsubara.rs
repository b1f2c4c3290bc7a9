use cavity_thermo::matsubara::*;
use cavity_thermo::*;

fn cube() -> CavityGeometry {
    CavityGeometry::cube(1.0)
}

#[test]
fn edge_part_grows_logarithmically() {
    let g = cube();
    let t = g.t_from_xi(1.0);
    let r = delta_f_matsubara(t, &g, 256, &SumPolicy::default()).unwrap();
    let fit = r.edge.log_fit;
    assert!(fit.c1 > 0.0);
    assert!(fit.residual < 0.01 * fit.spread);
    // Three axes, each ~ (T/4) ln k.
    assert!((fit.c1 / (0.75 * t) - 1.0).abs() < 0.01, "{}", fit.c1);
}

#[test]
fn volume_part_grows_like_minus_quarter_t_ln_k() {
    let g = cube();
    let t = g.t_from_xi(1.0);
    let r = delta_f_matsubara(t, &g, 256, &SumPolicy::default()).unwrap();
    let p = &r.volume.partial_values;
    let step = p[2].1 - p[1].1;
    assert!((step / (-0.25 * t * 2f64.ln()) - 1.0).abs() < 0.01, "{step}");
}

#[test]
fn summands_scale_to_a_temperature_free_limit() {
    // (k/T)² → 0: the k-th volume summand tends to Σ' 1/u⁴ (up to the T-independent prefactor).
    let g = cube();
    let p = SumPolicy::default();
    let a = volume_k_sum(&g, 1e-3, &p).unwrap();
    let b = volume_k_sum(&g, 1e-4, &p).unwrap();
    assert!(((a - b) / b).abs() < 1e-5);
}

#[test]
fn rejects_bad_input() {
    let g = cube();
    assert!(delta_f_matsubara(0.0, &g, 64, &SumPolicy::default()).is_err());
    assert!(delta_f_matsubara(1.0, &g, 4, &SumPolicy::default()).is_err());
}

#[test]
fn relation_residual_stabilizes() {
    let g = cube();
    let c = CutoffConstants::FROZEN;
    let r = relation_check(g.t_from_xi(1.0), &g, &c, &SumPolicy::default(), 1024).unwrap();
    let d1 = (r.rows[1].residual - r.rows[0].residual).abs();
    let d2 = (r.rows[2].residual - r.rows[1].residual).abs();
    assert!(d2 <= d1, "{r:?}");
    assert!(d2 < 1e-3 * r.rows[2].residual.abs().max(1e-3));
    assert!(!r.pairing.is_empty());
}

#[test]
fn relation_at_zero_temperature() {
    let g = cube();
    let r = relation_check(0.0, &g, &CutoffConstants::FROZEN, &SumPolicy::default(), 64).unwrap();
    assert!(r.rows.iter().all(|row| row.residual.abs() < 1e-8));
}

#[test]
fn mu_exponent_diverges() {
    let g = cube();
    let d = scale_factor_mu(g.t_from_xi(1.0), &g, &CutoffConstants::FROZEN, 4).unwrap();
    // Volume images give +¼ ln L, the three edges −¾ ln L.
    assert!(d.log_fit.c1 < 0.0);
    assert!((d.log_fit.c1 + 0.5).abs() < 0.1, "{:?}", d.log_fit);
}

#[test]
fn massive_photon_low_temperature() {
    let g = cube();
    let (m, t) = (1.0, 0.05);
    let f = delta_f_massive(t, &g, m, 10_000, &SumPolicy::default()).unwrap();
    let asym = massive_low_t_asymptote(t, m);
    assert!(((f - asym) / asym).abs() < 0.01, "{f} {asym}");
}

#[test]
fn massive_photon_rejects_bad_mass() {
    assert!(delta_f_massive(0.1, &cube(), 0.0, 10, &SumPolicy::default()).is_err());
    assert!(delta_s_massive_closed_form(0.1, -1.0).is_err());
}

#[test]
fn low_t_reference_shape() {
    let (m, t) = (1.0, 0.05);
    let x: f64 = m / (2.0 * t);
    assert!((massive_low_t_reference(t, m) + t * (1.0 - (-x).exp()).ln()).abs() < 1e-18);
    assert!((massive_low_t_asymptote(t, m) / massive_low_t_reference(t, m) + 0.25).abs() < 1e-14);
}
