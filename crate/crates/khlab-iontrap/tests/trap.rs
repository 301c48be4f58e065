use khlab_iontrap::{
    equilibrium_positions, match_rabi, run_pipeline, transverse_modes, xx_couplings, zz_couplings, ActiveMap,
    IonCrystal, LaserParams, SolverOptions, TrapConfig,
};
use nalgebra::DMatrix;

fn linear(n: usize) -> TrapConfig {
    TrapConfig { n, wx_over_wz: 30.0, wy_over_wz: 60.0, l_active: 2, restarts: 4, ..TrapConfig::default() }
}

fn solve(cfg: &TrapConfig) -> IonCrystal {
    equilibrium_positions(cfg, &SolverOptions::from_config(cfg)).unwrap()
}

#[test]
fn two_and_three_ion_chains() {
    let c2 = solve(&linear(2));
    let z = 0.25f64.cbrt();
    assert!((c2.positions[1][2] - z).abs() < 1e-10 && (c2.positions[0][2] + z).abs() < 1e-10);
    let c3 = solve(&linear(3));
    let z = 1.25f64.cbrt();
    let got: Vec<f64> = c3.positions.iter().map(|p| p[2]).collect();
    for (g, w) in got.iter().zip([-z, 0.0, z]) {
        assert!((g - w).abs() < 1e-10, "{got:?}");
    }
    assert!(c3.positions.iter().all(|p| p[0].abs() < 1e-10 && p[1].abs() < 1e-10));
    assert!(c3.gradient_norm <= 1e-10 && c3.min_curvature > 0.0);
}

#[test]
fn two_ion_modes_and_exchange() {
    let cfg = linear(2);
    let c = solve(&cfg);
    let m = transverse_modes(&c, &cfg).unwrap();
    let wy = cfg.wy_over_wz;
    // the pair sits at separation 2 (1/4)^(1/3), so 1/d^3 = 1/2
    assert!((m.frequencies[0] - wy).abs() < 1e-12);
    assert!((m.frequencies[1] - (wy * wy - 1.0).sqrt()).abs() < 1e-10);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    assert!((m.vectors[(0, 0)] - s).abs() < 1e-12 && (m.vectors[(1, 0)] - s).abs() < 1e-12);
    assert!((m.vectors[(0, 1)] + m.vectors[(1, 1)]).abs() < 1e-12);

    let tone = LaserParams::new(1.0, 0.0, 0.4);
    let wl = wy + 0.4;
    let want = 0.5 * (1.0 / (wl * wl - wy * wy) - 1.0 / (wl * wl - (wy * wy - 1.0)));
    let v = xx_couplings(&c, &m, &[tone]).unwrap().v;
    assert!((v[(0, 1)] - want).abs() < 1e-14 * want.abs().max(1.0));
    let v2 = xx_couplings(&c, &m, &[tone.with_rabi(2.0)]).unwrap().v;
    assert!((v2[(0, 1)] - 4.0 * v[(0, 1)]).abs() < 1e-15);
}

#[test]
fn coupling_matrix_properties() {
    let cfg = TrapConfig { n: 16, wx_over_wz: 4.0, wy_over_wz: 12.0, l_active: 4, restarts: 6, ..TrapConfig::default() };
    let c = solve(&cfg);
    let m = transverse_modes(&c, &cfg).unwrap();
    let gram = m.vectors.transpose() * &m.vectors;
    assert!((gram - DMatrix::<f64>::identity(16, 16)).amax() < 1e-10);
    assert!((m.frequencies[0] - cfg.wy_over_wz).abs() < 1e-10);
    assert!(m.frequencies[1..].iter().all(|w| *w < cfg.wy_over_wz - 1e-9));

    let a = LaserParams::new(3.0, 0.7, 0.5);
    let b = LaserParams::new(2.0, 0.3, 0.2).with_rabi(0.6);
    for f in [zz_couplings, xx_couplings] {
        let va = f(&c, &m, &[a]).unwrap().v;
        let vb = f(&c, &m, &[b]).unwrap().v;
        let both = f(&c, &m, &[a, b]).unwrap().v;
        assert!((&both - (&va + &vb)).amax() < 1e-14);
        assert_eq!(both.transpose(), both);
        assert!((0..16).all(|i| both[(i, i)] == 0.0));
    }
    assert_eq!(zz_couplings(&c, &m, &[LaserParams::new(3.0, 0.0, 0.5)]).unwrap().v.amax(), 0.0);
    // a beatnote on top of a mode is rejected
    let res = LaserParams::new(1.0, 0.5, m.frequencies[3] - m.frequencies[0]);
    assert!(zz_couplings(&c, &m, &[res]).is_err());
}

#[test]
fn same_rung_pairs_see_no_angular_suppression() {
    let cfg = TrapConfig { n: 24, wx_over_wz: 6.0, wy_over_wz: 20.0, l_active: 4, restarts: 8, ..TrapConfig::default() };
    let c = solve(&cfg);
    let m = transverse_modes(&c, &cfg).unwrap();
    let phi = 0.5;
    let with_k = zz_couplings(&c, &m, &[LaserParams::new(7.0, phi, 0.3)]).unwrap().v;
    let no_k = zz_couplings(&c, &m, &[LaserParams::new(0.0, phi, 0.3)]).unwrap().v;
    let map = ActiveMap::new(&c, 4).unwrap();
    let (i, j) = (map.active[0], map.active[1]);
    // same-rung ions share x up to the edge curvature of the zig-zag
    let ang = (7.0 * phi.cos() * (c.positions[j][0] - c.positions[i][0])).cos();
    assert!((with_k[(i, j)] - ang * no_k[(i, j)]).abs() < 1e-14);
    assert!((ang - 1.0).abs() < 1e-3);
}

#[test]
fn active_window_hides_every_third_ion() {
    let cfg = TrapConfig { n: 20, wx_over_wz: 5.0, wy_over_wz: 20.0, l_active: 8, restarts: 4, ..TrapConfig::default() };
    let c = solve(&cfg);
    let map = ActiveMap::new(&c, 8).unwrap();
    assert_eq!(map.window.len(), 12);
    assert_eq!(map.active.len(), 8);
    assert_eq!(map.hidden, vec![map.window[1], map.window[4], map.window[7], map.window[10]]);
    assert!(ActiveMap::new(&c, 14).is_err());
}

#[test]
fn matching_rejects_vanishing_bonds() {
    let cm = khlab_core::hamiltonian::CouplingMatrix::zeros(4).unwrap();
    assert!(match_rabi(&cm).is_err());
}

#[test]
fn config_round_trips_through_toml() {
    let text = "N = 70\nwx_over_wz = 18.75\nwy_over_wz = 125.0\nphi_a = 0.5164\ndetuning_a = 480.0\ndetuning_b = 540.0\nL_active = 8\n";
    let cfg: TrapConfig = toml::from_str(text).unwrap();
    assert_eq!(cfg, TrapConfig::default());
    assert!(toml::from_str::<TrapConfig>("N = 70\nbogus = 1\n").is_err());
}

#[test]
fn seventy_ion_zigzag() {
    let run = run_pipeline(&TrapConfig::default()).unwrap();
    let r = &run.report;
    assert!(r.max_abs_y <= 1e-8);
    assert!(r.gradient_norm <= 1e-10);
    let x: Vec<f64> = run.crystal.positions[25..45].iter().map(|p| p[0]).collect();
    assert!(x.windows(2).all(|w| w[0] * w[1] < 0.0), "{x:?}");
    assert!((r.top_mode - 125.0).abs() < 1e-9);
    assert_eq!(run.map.active.len(), 8);
}
