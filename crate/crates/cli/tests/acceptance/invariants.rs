//! Property checks, each run for `CASES` random cases.

use std::f64::consts::{PI, TAU};

use emskin::field::{evaluate, oracle_field_converged, reflected_field, FieldSample, ObservationSet, Predictor};
use emskin::geometry::{build_lattice, direction_cosines, region_boundaries, ApertureLattice, SphericalPoint};
use emskin::incident::{
    horn_gain, incident_field_on_aperture, plane_wave_on_aperture, surface_averaged_field, HornDescriptor,
    IncidentFieldGrid, PlaneWave, Polarization, SourcePlacement,
};
use emskin::meta_atom::{
    currents_for_layout, surrogate_table, EMSLayout, ReflectionTensor, SurfaceCurrentGrid, SurrogateParams,
};
use emskin::pso::SwarmConfig;
use emskin::synthesis::{
    apply_target_phases, phase_mismatch_cost, run_sbd_synthesis, separable_optimum, target_phase_ffm,
    target_phase_usm, wrap_phase, Method, SynthesisScenario, TargetPhaseGrid,
};
use emskin::vector::norm;
use emskin_cli::emit::table_csv;
use emskin_cli::{run_analyze, run_regions, run_synthesize, with_threads, ScenarioConfig};
use num_complex::Complex64;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestError, TestRng, TestRunner};

use super::{consts, power, surrogate, PITCH};

pub const CASES: u32 = 1000;

type Check = Result<(), String>;
type Case = Result<(), TestCaseError>;

fn check<S: Strategy>(strategy: S, test: impl Fn(S::Value) -> Case) -> Check {
    let config = Config { cases: CASES, failure_persistence: None, max_shrink_iters: 64, ..Config::default() };
    let mut runner = TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    runner.run(&strategy, test).map_err(|e| match e {
        TestError::Fail(reason, _) => reason.to_string(),
        TestError::Abort(reason) => format!("aborted: {reason}"),
    })
}

pub fn all() -> Vec<(&'static str, fn() -> Check)> {
    vec![
        ("direction cosines unit norm", direction_norm),
        ("region radii monotone in aperture", region_monotone),
        ("far boundary beyond near boundary", region_rule),
        ("power density matches gain", power_density),
        ("averaged field linear in amplitude", averaged_linearity),
        ("incident phase at cell centre", center_phase),
        ("currents linear in illumination", pipeline_linearity),
        ("currents local without normal terms", locality),
        ("table interpolation continuous", interpolation_continuity),
        ("field linear in currents", field_linearity),
        ("inverse distance envelope", inverse_distance),
        ("far-field limit decays as 1/r", ff_limit),
        ("dipole reference agreement", oracle_equivalence),
        ("mirror symmetry", mirror_symmetry),
        ("focusing rule far limit", usm_ffm_limit),
        ("focusing beats steering", focusing_dominance),
        ("swarm matches exhaustive scan", separable_agreement),
        ("cost invariant under global phase", global_phase),
        ("output independent of thread count", cli_determinism),
        ("config hash canonical", config_hash),
    ]
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn complex() -> impl Strategy<Value = Complex64> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(a, b)| c(a, b))
}

fn unit_complex() -> impl Strategy<Value = Complex64> {
    (0.1..3.0f64, 0.0..TAU).prop_map(|(m, p)| Complex64::from_polar(m, p))
}

/// Random currents on an `m`×`n` lattice with both sizes in `sizes`.
fn currents(sizes: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = SurfaceCurrentGrid> {
    (sizes.clone(), sizes).prop_flat_map(|(m, n)| {
        prop::collection::vec(complex(), 4 * m * n).prop_map(move |v| {
            let l = build_lattice(m, n, PITCH, PITCH).unwrap();
            let mut j = SurfaceCurrentGrid::zeros(&l);
            let k = m * n;
            j.je_x = v[..k].to_vec();
            j.je_y = v[k..2 * k].to_vec();
            j.jh_x = v[2 * k..3 * k].iter().map(|z| z * 377.0).collect();
            j.jh_y = v[3 * k..].iter().map(|z| z * 377.0).collect();
            j
        })
    })
}

fn horn_source(r: f64, theta: f64, phi: f64, dbm: f64, high: bool, pol: Polarization) -> (SourcePlacement, HornDescriptor) {
    let horn = if high { HornDescriptor::high_gain() } else { HornDescriptor::low_gain() };
    let placement = SourcePlacement { position: SphericalPoint::new(r, theta, phi).unwrap(), tx_power_dbm: dbm, polarization: pol };
    (placement, horn)
}

fn polarization() -> impl Strategy<Value = Polarization> {
    prop_oneof![Just(Polarization::X), Just(Polarization::Y)]
}

/// Physical currents: a random layout of the surrogate table under a horn
/// 50 m away in a random direction.
fn physical(n: usize, layout: &[f64], tx_theta: f64, tx_phi: f64) -> SurfaceCurrentGrid {
    let l = build_lattice(n, n, PITCH, PITCH).unwrap();
    let (p, h) = horn_source(50.0, tx_theta, tx_phi, 20.0, true, Polarization::Y);
    let grid = incident_field_on_aperture(&p, &h, &l, 2, &consts()).unwrap();
    let layout = EMSLayout { m_count: n, n_count: n, g: layout.to_vec() };
    currents_for_layout(&layout, &surrogate(), &grid, &consts()).unwrap()
}

fn physical_currents(sizes: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = SurfaceCurrentGrid> {
    sizes.prop_flat_map(|n| {
        (prop::collection::vec(1e-3..8e-3f64, n * n), 0.0..50f64.to_radians(), 0.0..TAU)
            .prop_map(move |(g, t, p)| physical(n, &g, t, p))
    })
}

fn field_distance(a: &FieldSample, b: &FieldSample) -> f64 {
    ((a.f_theta - b.f_theta).norm_sqr() + (a.f_phi - b.f_phi).norm_sqr()).sqrt()
}

fn direction_norm() -> Check {
    check((0.0..=PI, 0.0..TAU), |(theta, phi)| {
        let d = direction_cosines(theta, phi);
        prop_assert!((d.u * d.u + d.v * d.v + d.w * d.w - 1.0).abs() <= 1e-12);
        Ok(())
    })
}

fn region_monotone() -> Check {
    let s = (1..200usize, 1..200usize, 0..50usize, 0..50usize, 1e-3..0.05f64, 1e-3..0.05f64, 1e9..1e11f64);
    check(s, |(m, n, dm, dn, dx, dy, f)| {
        let lambda0 = 299_792_458.0 / f;
        let a = region_boundaries(&build_lattice(m, n, dx, dy).unwrap(), lambda0);
        let b = region_boundaries(&build_lattice(m + dm, n + dn, dx, dy).unwrap(), lambda0);
        prop_assert!(b.r_nf >= a.r_nf && b.r_ff >= a.r_ff);
        Ok(())
    })
}

fn region_rule() -> Check {
    check((1..400usize, 1..400usize, 1e-3..0.05f64, 1e9..1e11f64), |(m, n, d, f)| {
        let lambda0 = 299_792_458.0 / f;
        let l = build_lattice(m, n, d, d).unwrap();
        let b = region_boundaries(&l, lambda0);
        if l.diameter >= 5.0 * lambda0 {
            prop_assert!(b.r_ff >= b.r_nf);
        } else {
            let floor = (10.0 * lambda0).max(10.0 * l.diameter);
            prop_assert!(b.r_ff == floor && b.r_nf == floor);
        }
        Ok(())
    })
}

fn power_density() -> Check {
    let s = (5.0..200.0f64, 0.0..60f64.to_radians(), 0.0..TAU, -10.0..40.0f64, any::<bool>(), polarization());
    check(s, |(r, theta, phi, dbm, high, pol)| {
        let k = consts();
        let (p, h) = horn_source(r, theta, phi, dbm, high, pol);
        let l = build_lattice(3, 3, PITCH, PITCH).unwrap();
        let grid = incident_field_on_aperture(&p, &h, &l, 2, &k).unwrap();
        // horn frame: boresight at the origin, y along the projected polarization
        let tx = p.position.to_cartesian();
        let z_h = -tx.normalize();
        let axis = pol.axis();
        let y_h = (axis - z_h * axis.dot(&z_h)).normalize();
        let x_h = y_h.cross(&z_h);
        for s in &grid.samples {
            let d = (s.position - tx).norm();
            let kh = (s.position - tx) / d;
            let g = horn_gain(&h, kh.dot(&z_h).clamp(-1.0, 1.0).acos(), kh.dot(&y_h).atan2(kh.dot(&x_h))).unwrap();
            let density = norm(&s.e).powi(2) / (2.0 * k.eta0) * 4.0 * PI * d * d;
            let expected = p.tx_power_watts() * g;
            prop_assert!((density - expected).abs() <= 1e-9 * expected, "{density} vs {expected}");
        }
        Ok(())
    })
}

fn averaged_linearity() -> Check {
    let s = (1..5usize, 2.0..100.0f64, 0.0..60f64.to_radians(), 0.0..TAU, -10.0..30.0f64)
        .prop_flat_map(|(n, r, t, p, dbm)| (Just((n, r, t, p, dbm)), prop::collection::vec(complex(), n * n)));
    check(s, |((n, r, theta, phi, dbm), gammas)| {
        let k = consts();
        let l = build_lattice(n, n, PITCH, PITCH).unwrap();
        let gammas: Vec<ReflectionTensor> = gammas.into_iter().map(ReflectionTensor::isotropic).collect();
        let averaged = |dbm: f64| {
            let (p, h) = horn_source(r, theta, phi, dbm, false, Polarization::Y);
            let grid = incident_field_on_aperture(&p, &h, &l, 3, &k).unwrap();
            surface_averaged_field(&grid, &gammas).unwrap()
        };
        let (e1, h1) = averaged(dbm);
        let (e4, h4) = averaged(dbm + 10.0 * 4f64.log10());
        for (a, b) in e1.iter().zip(&e4).chain(h1.iter().zip(&h4)) {
            prop_assert!((norm(b) - 2.0 * norm(a)).abs() <= 1e-9 * norm(a) + 1e-300);
        }
        Ok(())
    })
}

fn center_phase() -> Check {
    let s = (1..6usize, 2.0..200.0f64, 0.0..60f64.to_radians(), 0.0..TAU, polarization());
    check(s, |(n, r, theta, phi, pol)| {
        let k = consts();
        let l = build_lattice(n, n, PITCH, PITCH).unwrap();
        let (p, h) = horn_source(r, theta, phi, 20.0, true, pol);
        let grid = incident_field_on_aperture(&p, &h, &l, 1, &k).unwrap();
        let tx = p.position.to_cartesian();
        for (i, s) in grid.samples.iter().enumerate() {
            let (x, y) = l.center(i);
            prop_assert!((s.position.x - x).abs() < 1e-15 && (s.position.y - y).abs() < 1e-15);
            let d = (s.position - tx).norm();
            let along = s.e.iter().zip(pol.axis().iter()).map(|(e, a)| e * a).sum::<Complex64>();
            prop_assert!(wrap_phase(along.arg() + k.k0 * d).abs() < 1e-9);
        }
        Ok(())
    })
}

fn pipeline_linearity() -> Check {
    let s = (1..6usize, -1.0..1.0f64, unit_complex(), 0.0..60f64.to_radians(), 0.0..TAU, polarization())
        .prop_flat_map(|(n, ratio, a, t, p, pol)| {
            (Just((n, ratio, a, t, p, pol)), prop::collection::vec(1e-3..8e-3f64, n * n))
        });
    check(s, |((n, ratio, alpha, theta, phi, pol), g)| {
        let k = consts();
        let l = build_lattice(n, n, PITCH, PITCH).unwrap();
        let table = surrogate_table(&SurrogateParams { normal_ratio: ratio, ..Default::default() }).unwrap();
        let layout = EMSLayout { m_count: n, n_count: n, g };
        let run = |amplitude: Complex64| {
            let wave = PlaneWave { theta, phi, amplitude, polarization: pol };
            let grid = plane_wave_on_aperture(&wave, &l, 2, &k).unwrap();
            currents_for_layout(&layout, &table, &grid, &k).unwrap()
        };
        let (one, scaled) = (run(c(1.0, 0.0)), run(alpha));
        let peak = one.components().iter().flat_map(|a| a.iter().map(|z| z.norm())).fold(0.0, f64::max);
        for (a, b) in one.components().iter().zip(scaled.components()) {
            for (za, zb) in a.iter().zip(b) {
                prop_assert!((zb - za * alpha).norm() <= 1e-12 * alpha.norm() * peak + 1e-300);
            }
        }
        Ok(())
    })
}

fn locality() -> Check {
    let s = (1..7usize, 0.0..50f64.to_radians(), 0.0..TAU, 1e-3..8e-3f64)
        .prop_flat_map(|(n, t, p, g)| (Just((n, t, p, g)), prop::collection::vec(1e-3..8e-3f64, n * n), 0..n * n));
    check(s, |((n, theta, phi, new_g), g, cell)| {
        let k = consts();
        let l = build_lattice(n, n, PITCH, PITCH).unwrap();
        let (p, h) = horn_source(50.0, theta, phi, 20.0, true, Polarization::Y);
        let grid = incident_field_on_aperture(&p, &h, &l, 2, &k).unwrap();
        let table = surrogate();
        let base = EMSLayout { m_count: n, n_count: n, g };
        let mut moved = base.clone();
        moved.g[cell] = new_g;
        let a = currents_for_layout(&base, &table, &grid, &k).unwrap();
        let b = currents_for_layout(&moved, &table, &grid, &k).unwrap();
        for (ca, cb) in a.components().iter().zip(b.components()) {
            for i in (0..n * n).filter(|&i| i != cell) {
                prop_assert_eq!(ca[i], cb[i]);
            }
        }
        Ok(())
    })
}

fn entry_values(table: &emskin::meta_atom::MetaAtomTable, g: f64) -> [Complex64; 10] {
    let (s, r) = table.lookup_response(g).unwrap();
    [s.psi_e_xx, s.psi_e_yy, s.psi_e_zz, s.psi_h_xx, s.psi_h_yy, s.psi_h_zz, r.gamma_pp, r.gamma_ps, r.gamma_sp, r.gamma_ss]
}

fn interpolation_continuity() -> Check {
    let table = surrogate_table(&SurrogateParams { normal_ratio: 0.3, ..Default::default() }).unwrap();
    let (lo, hi) = table.range();
    let nodes = table.descriptors().to_vec();
    let node_values: Vec<[Complex64; 10]> = nodes.iter().map(|&g| entry_values(&table, g)).collect();
    check((lo..=hi, lo..=hi), |(a, b)| {
        let (g1, g2) = (a.min(b), a.max(b));
        let (v1, v2) = (entry_values(&table, g1), entry_values(&table, g2));
        for k in 0..10 {
            // total variation of the piecewise-linear table over [g1, g2]
            let budget: f64 = (0..nodes.len() - 1)
                .filter(|&i| nodes[i + 1] > g1 && nodes[i] < g2)
                .map(|i| (node_values[i + 1][k] - node_values[i][k]).norm())
                .sum();
            prop_assert!((v2[k] - v1[k]).norm() <= budget * (1.0 + 1e-12) + 1e-15);
        }
        Ok(())
    })
}

fn field_linearity() -> Check {
    let s = (currents(1..=6), unit_complex(), 0.2..50.0f64, 0.0..PI / 2.0, 0.0..TAU);
    check(s, |(j, alpha, r, theta, phi)| {
        let k = consts();
        let at = SphericalPoint::new(r, theta, phi).unwrap();
        let f = reflected_field(&j, &at, &k);
        let g = reflected_field(&j.scaled(alpha), &at, &k);
        let expected = FieldSample { f_theta: f.f_theta * alpha, f_phi: f.f_phi * alpha, ..f };
        prop_assert!(field_distance(&g, &expected) <= 1e-12 * alpha.norm() * f.magnitude() + 1e-300);
        Ok(())
    })
}

fn inverse_distance() -> Check {
    let s = (physical_currents(1..=16), 1.0..50.0f64, 0.0..80f64.to_radians(), 0.0..TAU);
    check(s, |(j, scale, theta, phi)| {
        let k = consts();
        let r = scale * region_boundaries(&j.lattice, k.lambda0).r_ff;
        let near = reflected_field(&j, &SphericalPoint::new(r, theta, phi).unwrap(), &k).magnitude();
        let far = reflected_field(&j, &SphericalPoint::new(2.0 * r, theta, phi).unwrap(), &k).magnitude();
        let cut = ObservationSet::theta_cut(r, phi, PI / 2.0, 181).unwrap();
        let peak = evaluate(&j, &cut, Predictor::Fresnel, &k).iter().map(|s| s.magnitude()).fold(0.0, f64::max);
        prop_assert!(
            (2.0 * far / near - 1.0).abs() < 1e-3,
            "n {} r {scale:.2} r_ff theta {:.1}: |F(2r)| 2 / |F(r)| = {}, |F(r)| / cut peak {:.3}",
            j.lattice.m_count,
            theta.to_degrees(),
            2.0 * far / near,
            near / peak
        );
        Ok(())
    })
}

fn cut_deviation(j: &SurfaceCurrentGrid, r: f64, phi: f64) -> f64 {
    let k = consts();
    let obs = ObservationSet::theta_cut(r, phi, PI / 2.0, 181).unwrap();
    let gen = evaluate(j, &obs, Predictor::Fresnel, &k);
    let ff = evaluate(j, &obs, Predictor::FarField, &k);
    let peak = gen.iter().map(|s| s.magnitude()).fold(0.0, f64::max);
    gen.iter().zip(&ff).map(|(a, b)| field_distance(a, b)).fold(0.0, f64::max) / peak
}

fn ff_limit() -> Check {
    let s = (physical_currents(2..=24), 0.0..PI);
    check(s, |(j, phi)| {
        let r_ff = region_boundaries(&j.lattice, consts().lambda0).r_ff;
        let first = cut_deviation(&j, r_ff, phi);
        for factor in [2.0, 5.0, 10.0, 20.0, 50.0, 100.0] {
            let d = cut_deviation(&j, factor * r_ff, phi);
            prop_assert!(d * factor <= first * (1.0 + 1e-9), "{factor} r_ff: {d:.3e}, r_ff: {first:.3e}");
        }
        Ok(())
    })
}

fn oracle_equivalence() -> Check {
    let uniform = (1e-3..8e-3f64, 0.0..50f64.to_radians(), 0.0..TAU).prop_map(|(g, t, p)| physical(16, &[g; 256], t, p));
    let s = (uniform, 0.0..1.3f64, -PI / 2.0..=PI / 2.0);
    check(s, |(j, decades, theta)| {
        let k = consts();
        let r = region_boundaries(&j.lattice, k.lambda0).r_nf * 10f64.powf(decades);
        let cut = ObservationSet::theta_cut(r, 0.0, PI / 2.0, 181).unwrap();
        let peak = evaluate(&j, &cut, Predictor::Fresnel, &k).iter().map(|s| s.f_phi.norm()).fold(0.0, f64::max);
        let at = SphericalPoint::on_cut(r, theta, 0.0).unwrap();
        let gen = reflected_field(&j, &at, &k);
        let (reference, _) = oracle_field_converged(&j, &at, 1e-4, &k).unwrap();
        let err = (gen.f_phi.norm() - reference.f_phi.norm()).abs() / peak;
        prop_assert!(err < 1e-2, "r {r:.2} m, theta {:.1}°: {:.3}%", theta.to_degrees(), 100.0 * err);
        Ok(())
    })
}

fn mirror_symmetry() -> Check {
    let s = (currents(1..=8), 0.1..100.0f64, 0.0..PI / 2.0, 0.0..TAU);
    check(s, |(mut j, r, theta, phi)| {
        let total = j.lattice.cell_count();
        for comp in j.components_mut() {
            for i in 0..total / 2 {
                comp[total - 1 - i] = comp[i];
            }
        }
        let k = consts();
        let a = reflected_field(&j, &SphericalPoint::new(r, theta, phi).unwrap(), &k);
        let b = reflected_field(&j, &SphericalPoint::new(r, theta, phi + PI).unwrap(), &k);
        let tol = 1e-9 * a.magnitude().max(b.magnitude()) + 1e-300;
        prop_assert!((a.f_theta.norm() - b.f_theta.norm()).abs() <= tol);
        prop_assert!((a.f_phi.norm() - b.f_phi.norm()).abs() <= tol);
        Ok(())
    })
}

fn usm_ffm_limit() -> Check {
    check((1..=120usize, 1..=120usize, 0.0..80f64.to_radians(), 0.0..TAU), |(m, n, theta, phi)| {
        let k = consts();
        let l = build_lattice(m, n, PITCH, PITCH).unwrap();
        let r = 1e6 * region_boundaries(&l, k.lambda0).r_ff;
        let rx = SphericalPoint::new(r, theta, phi).unwrap();
        let usm = target_phase_usm(&l, &rx, k.lambda0);
        let ffm = target_phase_ffm(&l, &rx.direction(), k.lambda0);
        for (a, b) in usm.phase.iter().zip(&ffm.phase) {
            prop_assert!(wrap_phase(a - b).abs() < 1e-4);
        }
        Ok(())
    })
}

fn focusing_dominance() -> Check {
    let s = (physical_currents(8..=40), 0.0..1.0f64, 0.0..60f64.to_radians(), 0.0..TAU);
    check(s, |(j, frac, theta, phi)| {
        let k = consts();
        let b = region_boundaries(&j.lattice, k.lambda0);
        let r = b.r_nf * (b.r_ff / b.r_nf).powf(frac);
        prop_assume!(r < b.r_ff);
        let rx = SphericalPoint::new(r, theta, phi).unwrap();
        let focus = |t: TargetPhaseGrid| power(&reflected_field(&apply_target_phases(&j, &t).unwrap(), &rx, &k));
        let usm = focus(target_phase_usm(&j.lattice, &rx, k.lambda0));
        let ffm = focus(target_phase_ffm(&j.lattice, &rx.direction(), k.lambda0));
        prop_assert!(usm >= ffm * (1.0 - 1e-12), "usm {usm:.4e} < ffm {ffm:.4e}");
        Ok(())
    })
}

fn separable_agreement() -> Check {
    let s = (
        1..=16usize,
        1..=16usize,
        (0.0..50f64.to_radians(), 0.0..TAU),
        (0.3..30.0f64, 0.0..60f64.to_radians(), 0.0..TAU),
        any::<u64>(),
        any::<bool>(),
    );
    check(s, |(m, n, (tx_t, tx_p), (r, t, p), seed, usm)| {
        let k = consts();
        let l = build_lattice(m, n, PITCH, PITCH).unwrap();
        let (placement, horn) = horn_source(50.0, tx_t, tx_p, 20.0, true, Polarization::Y);
        let incident: IncidentFieldGrid = incident_field_on_aperture(&placement, &horn, &l, 2, &k).unwrap();
        let rx = SphericalPoint::new(r, t, p).unwrap();
        let scenario = SynthesisScenario { constants: k, incident, rx, g_rx: 1.0 };
        let target = if usm {
            target_phase_usm(&l, &rx, k.lambda0)
        } else {
            target_phase_ffm(&l, &rx.direction(), k.lambda0)
        };
        prop_assert_eq!(target.method, if usm { Method::Usm } else { Method::Ffm });
        let table = surrogate();
        let (_, optimum) = separable_optimum(&scenario, &table, &target, 1).unwrap();
        let out = run_sbd_synthesis(&scenario, &table, &target, &SwarmConfig { seed, ..Default::default() }).unwrap();
        prop_assert!(out.cost <= 1.05 * optimum + 1e-18, "swarm {:.4e} vs scan {optimum:.4e}", out.cost);
        Ok(())
    })
}

fn global_phase() -> Check {
    let s = currents(1..=8).prop_flat_map(|j| {
        let n = j.lattice.cell_count();
        (Just(j), prop::collection::vec(-PI..PI, n), -10.0..10.0f64)
    });
    check(s, |(j, phase, beta)| {
        let l: &ApertureLattice = &j.lattice;
        let target = TargetPhaseGrid { m_count: l.m_count, n_count: l.n_count, phase: phase.clone(), method: Method::Usm };
        let rotated = TargetPhaseGrid { phase: phase.iter().map(|p| wrap_phase(p + beta)).collect(), ..target.clone() };
        let a = phase_mismatch_cost(&j, &target).unwrap();
        let b = phase_mismatch_cost(&j.scaled(Complex64::cis(beta)), &rotated).unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * a + 1e-24, "{a} vs {b}");
        Ok(())
    })
}

#[allow(clippy::too_many_arguments)]
fn scenario_text(
    n: usize,
    tx: (f64, f64),
    rx: (f64, f64, f64),
    seed: u64,
    points: usize,
    g: f64,
    quad: usize,
    power: f64,
) -> String {
    format!(
        r#"
name = "p"
frequency = 17.5e9
quad_order = {quad}

[tx]
source = "horn"
position = {{ r = 40.0, theta_deg = {}, phi_deg = {} }}
power_dbm = {power}
polarization = "y"

[ems]
m = {n}
n = {n}
dx = 8.565e-3
dy = 8.565e-3
layout = {{ kind = "uniform", g = {g} }}

[rx]
gain_dbi = 10.0
position = {{ r = {}, theta_deg = {}, phi_deg = {} }}

[[observation]]
kind = "cut"
name = "cut"
r_over_rnf = 1.5
points = {points}

[run]
seed = {seed}
swarm = {{ iterations = 40 }}
"#,
        tx.0, tx.1, rx.0, rx.1, rx.2
    )
}

fn scenario_strategy() -> impl Strategy<Value = String> {
    (
        2..=5usize,
        (0.0..50.0f64, 0.0..360.0f64),
        (0.5..20.0f64, 0.0..60.0f64, 0.0..360.0f64),
        any::<u64>(),
        3..=12usize,
        1e-3..8e-3f64,
        1..=4usize,
        -10.0..30.0f64,
    )
        .prop_map(|(n, tx, rx, seed, points, g, quad, power)| scenario_text(n, tx, rx, seed, points, g, quad, power))
}

fn cli_determinism() -> Check {
    check((scenario_strategy(), any::<bool>()), |(text, synthesize)| {
        let cfg = ScenarioConfig::parse(&text).unwrap();
        cfg.validate().unwrap();
        let render = |threads: usize| {
            let bundle = with_threads(Some(threads), || if synthesize { run_synthesize(&cfg) } else { run_analyze(&cfg) });
            bundle.unwrap().tables.iter().map(|t| (t.name.clone(), table_csv(t))).collect::<Vec<_>>()
        };
        prop_assert_eq!(render(1), render(3));
        Ok(())
    })
}

fn config_hash() -> Check {
    check(scenario_strategy(), |text| {
        let cfg = ScenarioConfig::parse(&text).unwrap();
        let again = ScenarioConfig::parse(&cfg.to_toml()).unwrap();
        prop_assert_eq!(&cfg, &again);
        prop_assert_eq!(cfg.hash(), again.hash());
        let bundle = run_regions(&cfg).unwrap();
        prop_assert_eq!(&bundle.metadata.config_hash, &cfg.hash());
        Ok(())
    })
}
