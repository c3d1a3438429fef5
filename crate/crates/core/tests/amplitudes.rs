use num_complex::Complex64;
use proptest::prelude::*;
use wirescatter::confinement::{build_modes, channels_from_k0};
use wirescatter::coupling::AlphaMode;
use wirescatter::freescatt::{phase_table, LowEnergyPhaseShifts, PotentialPhaseShifts};
use wirescatter::solver::{
    amplitudes, f0g_closed, f0g_coefficient, g1d, longitudinal_levels, phase_params, single_mode_point, solve_t,
    Parity, SolveOptions, G1d,
};
use wirescatter::{ConfinementModel, CouplingContext, HardWallVariant, ModeSet, RadialPotential};

fn parabolic() -> ModeSet {
    build_modes(&ConfinementModel::parabolic(1.0).unwrap(), 6).unwrap()
}

fn hard_wall() -> ModeSet {
    build_modes(&ConfinementModel::hard_wall(1.0, HardWallVariant::Cosine).unwrap(), 6).unwrap()
}

#[test]
fn coefficient_identity_at_threshold() {
    for m in [parabolic(), hard_wall()] {
        for a in [-1.3, -0.2, 0.07, 0.3, 0.9] {
            let x = f0g_coefficient(a, &m, 0.0);
            let G1d::Finite(g) = g1d(a, &m) else { panic!("unexpected resonance") };
            assert!((x - (-2.0 / g)).abs() <= 1e-12 * x.abs(), "a = {a}");
            let cp = m.cprime();
            let direct = -(m.d_u * m.d_u / (2.0 * a)) * (1.0 - cp * a / m.d_u);
            assert!((x - direct).abs() <= 1e-12 * x.abs());
        }
    }
}

#[test]
fn levels_from_closed_form_phase() {
    let m = hard_wall();
    let a = 0.25 * m.d_u;
    let delta = |k0: f64| phase_params(f0g_closed(a, &m, k0)).delta.unwrap();
    let r_par = 40.0 * m.d_u;
    let levels = longitudinal_levels(&delta, r_par, Parity::G, 12).unwrap();
    assert_eq!(levels.len(), 12);
    for k0 in levels {
        assert!((k0 * r_par + delta(k0)).cos().abs() < 1e-10, "k0 = {k0}");
    }
}

#[test]
fn exact_alpha_agrees_at_low_momentum() {
    let m = parabolic();
    let k0 = 1e-3 * m.q0();
    let ctx = CouplingContext::new(&m, channels_from_k0(&m, k0).unwrap()).unwrap();
    let exact = CouplingContext::new(&m, channels_from_k0(&m, k0).unwrap())
        .unwrap()
        .with_alpha_mode(AlphaMode::Exact { probe_radius: 0.2 * m.d_u });
    let a0 = ctx.alpha(0, 0).unwrap();
    let e0 = exact.alpha(0, 0).unwrap();
    assert!((a0 - e0).abs() < 5e-2 * a0, "{a0} vs {e0}");
}

#[test]
fn table_source_matches_direct_solver_on_grid() {
    let m = parabolic();
    let pot = RadialPotential::square_well(-300.0, 0.05).unwrap();
    let k0s = [0.05, 0.2, 0.5];
    let ks: Vec<f64> = k0s.iter().map(|f: &f64| (m.eps[0] + (f * m.q0()).powi(2)).sqrt()).collect();
    let table = phase_table(&pot, 4, &ks).unwrap();
    let direct = PotentialPhaseShifts::new(pot);
    for f in k0s {
        let a = single_mode_point(&m, &table, f * m.q0(), 2).unwrap();
        let b = single_mode_point(&m, &direct, f * m.q0(), 2).unwrap();
        assert!((a.amplitudes.f0g - b.amplitudes.f0g).norm() < 1e-9);
        assert!((a.amplitudes.f0u - b.amplitudes.f0u).norm() < 1e-9);
    }
}

#[test]
fn phase_table_csv_layout() {
    let pot = RadialPotential::hard_sphere(0.1).unwrap();
    let table = phase_table(&pot, 1, &[0.5, 1.0]).unwrap();
    let mut buf = Vec::new();
    table.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "# wirescatter-v1");
    assert_eq!(lines[1], "l,k,delta");
    assert_eq!(lines.len(), 6);
    assert!(lines[2].starts_with("0,5.000000000000e-1,"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn s_wave_sector_on_unitarity_circle(s in -4.0f64..4.0, frac in 0.001f64..0.99, hw in any::<bool>()) {
        let m = if hw { hard_wall() } else { parabolic() };
        let k0 = frac * m.gap(1).sqrt();
        let f = f0g_closed(s * m.d_u, &m, k0);
        prop_assert!(((f + 0.5).norm() - 0.5).abs() <= 1e-10);
        let d = phase_params(f).delta.unwrap();
        let back = Complex64::new(0.0, d.sin()) * Complex64::from_polar(1.0, d);
        prop_assert!((back - f).norm() <= 1e-10);
    }

    #[test]
    fn odd_coefficients_leave_even_block_untouched(c in prop::collection::vec(-0.3f64..0.3, 7), frac in 0.05f64..0.95) {
        let m = parabolic();
        let k0 = frac * m.gap(1).sqrt();
        let ctx = CouplingContext::new(&m, channels_from_k0(&m, k0).unwrap()).unwrap();
        let mut even = c.clone();
        for (l, v) in even.iter_mut().enumerate() {
            if l % 2 == 1 {
                *v = 0.0;
            }
        }
        let b = [Complex64::new(1.0, 0.0)];
        let x = solve_t(&ctx, &LowEnergyPhaseShifts::new(c), &b, 6, SolveOptions::default()).unwrap();
        let y = solve_t(&ctx, &LowEnergyPhaseShifts::new(even), &b, 6, SolveOptions::default()).unwrap();
        let (fx, fy) = (amplitudes(&x, &ctx).unwrap(), amplitudes(&y, &ctx).unwrap());
        prop_assert_eq!(fx.f0g, fy.f0g);
        prop_assert_eq!(fx.f_g, fy.f_g);
    }
}
