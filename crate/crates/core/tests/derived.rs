//! Worked examples per module, each checked against an oracle that does not
//! share code with the implementation.

use std::f64::consts::PI;

use ndf_core::bounds::{
    dgs_lower_bound, lemma_bounds, proposition1_build, proposition1_plan, theorem4_points,
    ClassicalDesigns, PaperConstants,
};
use ndf_core::designs;
use ndf_core::flow::{gradient_l1_norm, normalize_to_boundary, PolynomialHandle};
use ndf_core::harmonics::{dim_harmonic, dim_space, legendre_eval, surface_area};
use ndf_core::mz::{
    integrate_nonsmooth, lemma1_rhs, mz_value_check, product_quadrature, MZOptions,
};
use ndf_core::optimizer::{extend_design, initialize_points, ExtendOptions, InitStrategy};
use ndf_core::partition::equal_area_partition;
use ndf_core::point::norm;
use ndf_core::residual::{certify_points, residual_gradient, weyl_residual, Configuration};
use ndf_core::{KernelSpec, Point, SphereDim};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use statrs::function::gamma::gamma;

const S2: SphereDim = SphereDim::TWO;

fn dim(d: usize) -> SphereDim {
    SphereDim::new(d).unwrap()
}

fn p(v: [f64; 3]) -> Point {
    Point::new(v.to_vec()).unwrap()
}

#[test]
fn harmonic_dimensions() {
    assert_eq!(dim_harmonic(1, S2).unwrap(), 3);
    assert_eq!(dim_harmonic(2, S2).unwrap(), 5);
    assert_eq!(dim_space(3, S2).unwrap(), 3 + 5 + 7);
    assert_eq!(dim_space(1, dim(1)).unwrap(), 2);
}

#[test]
fn surface_areas_match_gamma_form() {
    for d in 1..8 {
        let x = (d as f64 + 1.0) / 2.0;
        let oracle = 2.0 * PI.powf(x) / gamma(x);
        assert!(
            (surface_area(dim(d)) - oracle).abs() <= 1e-12 * oracle,
            "d = {d}"
        );
    }
    assert!((surface_area(dim(3)) - 2.0 * PI * PI).abs() < 1e-12);
}

#[test]
fn legendre_matches_classical_p2() {
    for s in [-0.9, -0.3, 0.0, 0.4, 1.0] {
        let (v, dv) = legendre_eval(2, S2, s);
        assert!((v - (3.0 * s * s - 1.0) / 2.0).abs() < 1e-15);
        assert!((dv - 3.0 * s).abs() < 1e-14);
    }
    assert_eq!(legendre_eval(0, S2, 0.3), (1.0, 0.0));
}

#[test]
fn kernel_degree_one_orthogonal_pair() {
    let k = KernelSpec::new(1, S2).unwrap();
    assert!(
        k.eval(&p([1.0, 0.0, 0.0]), &p([0.0, 1.0, 0.0]))
            .unwrap()
            .abs()
            < 1e-15
    );
}

#[test]
fn kernel_gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(94);
    let h = 1e-6;
    for _ in 0..50 {
        let t = rng.random_range(1..=8);
        let k = KernelSpec::new(t, S2).unwrap();
        let z = Point::random(S2, &mut rng);
        let x = Point::random(S2, &mut rng);
        let g = k.grad(&z, &x).unwrap();
        let v = ndf_core::point::random_tangent(&x, &mut rng);
        let at = |s: f64| {
            let y: Vec<f64> = x.coords().iter().zip(&v).map(|(a, b)| a + s * b).collect();
            k.eval(&z, &Point::new(y).unwrap()).unwrap()
        };
        let fd = (at(h) - at(-h)) / (2.0 * h);
        let an: f64 = g.iter().zip(&v).map(|(a, b)| a * b).sum();
        assert!(
            (fd - an).abs() <= 1e-6 * an.abs().max(1.0),
            "fd {fd} vs {an}"
        );
    }
}

#[test]
fn kernel_reproduces_under_quadrature() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for t in 1..=6 {
        let k = KernelSpec::new(t, S2).unwrap();
        let q = product_quadrature(2 * t).unwrap();
        let z = Point::random(S2, &mut rng);
        let x = Point::random(S2, &mut rng);
        // P = k(z, ·) has zero mean, so ⟨k(x, ·), P⟩ = P(x).
        let ip = q.integrate(|y| k.eval(&x, y).unwrap() * k.eval(&z, y).unwrap());
        let direct = k.eval(&z, &x).unwrap();
        assert!((ip - direct).abs() <= 1e-10 * k.dim_space(), "t = {t}");
    }
}

#[test]
fn residual_examples() {
    let scale =
        |t: usize, n: usize| 4.0 * PI * dim_space(t as u64, S2).unwrap() as f64 * (n * n) as f64;
    let anti = Configuration::from_points(S2, designs::antipodal_pair()).unwrap();
    assert!(weyl_residual(1, &anti).unwrap().total_residual.abs() < 1e-12);

    let tet = Configuration::from_points(S2, designs::tetrahedron()).unwrap();
    let c = weyl_residual(2, &tet).unwrap();
    assert!(c.total_residual.abs() <= 1e-10 * 4.0 * PI * 8.0);

    let oct = Configuration::new(S2, designs::octahedron(), vec![]).unwrap();
    let c = weyl_residual(5, &oct).unwrap();
    for l in 0..3 {
        assert!(
            c.per_degree[l].abs() <= 1e-10 * scale(5, 6),
            "degree {}",
            l + 1
        );
    }
    assert!(c.per_degree[3] > 1.0);

    let ico = designs::icosahedron();
    let same = Configuration::new(S2, ico.clone(), ico).unwrap();
    assert!(weyl_residual(5, &same).unwrap().total_residual.abs() <= 1e-10 * scale(5, 24));
}

#[test]
fn gradient_vanishes_at_a_design() {
    let cfg = Configuration::new(S2, vec![], designs::tetrahedron()).unwrap();
    let g = residual_gradient(2, &cfg).unwrap();
    let scale = 4.0 * PI * 8.0 * 16.0;
    assert!(g.iter().all(|v| norm(v) <= 1e-8 * scale));
}

#[test]
fn octahedron_degree_four_deviation() {
    let c = certify_points(4, S2, &designs::octahedron(), 1e-10).unwrap();
    // Average of x⁴ over the octahedron is 1/3, its sphere integral 1/5.
    assert!((c.oracle_max_deviation.unwrap() - (1.0 / 3.0 - 1.0 / 5.0)).abs() < 1e-14);
    assert_eq!(c.is_design, Some(false));
    let ico = certify_points(5, S2, &designs::icosahedron(), 1e-9).unwrap();
    assert_eq!(ico.is_design, Some(true));
}

#[test]
fn twelve_point_five_design() {
    let res = extend_design(5, S2, &[], 12, &ExtendOptions::default()).unwrap();
    assert!(
        res.converged,
        "A = {:e}",
        res.certificate.normalized_residual
    );
    let c = certify_points(5, S2, &res.free_points, 1e-10).unwrap();
    assert_eq!(c.is_design, Some(true));
}

#[test]
fn equal_area_centers_one_per_cell() {
    let pts = initialize_points(InitStrategy::EqualAreaCenters, 10, S2, &[]).unwrap();
    let r = equal_area_partition(10).unwrap();
    for (i, x) in pts.iter().enumerate() {
        let (theta, phi) = x.to_spherical();
        assert!(r.cells()[i].contains(theta, phi));
        for (j, c) in r.cells().iter().enumerate() {
            if j != i {
                assert!(!c.contains(theta, phi) || (theta - c.theta.0).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn boundary_normalization_reintegrates_to_one() {
    let mut rng = ChaCha8Rng::seed_from_u64(312);
    for _ in 0..5 {
        let raw = PolynomialHandle::random(KernelSpec::new(3, S2).unwrap(), &mut rng);
        let order = 2 * 3 + 16;
        let q = normalize_to_boundary(&raw, order).unwrap();
        let check = integrate_nonsmooth(S2, 2 * order, 1e-9, |x| norm(&q.grad(x))).unwrap();
        assert!((check.value - 1.0).abs() <= 1e-6, "{}", check.value);
        let direct = gradient_l1_norm(&q, order).unwrap();
        assert!((direct.value - 1.0).abs() <= 1e-6);
    }
}

#[test]
fn partition_constant_is_measured_small() {
    for n in [10usize, 100, 1000] {
        let r = equal_area_partition(n).unwrap();
        assert!(r.norm() * (n as f64).sqrt() <= 7.0, "N = {n}");
    }
}

fn boundary_samples(theta: (f64, f64), phi: (f64, f64), per_edge: usize) -> Vec<Point> {
    let lerp = |a: f64, b: f64, k: usize| a + (b - a) * k as f64 / (per_edge - 1) as f64;
    let mut out = Vec::new();
    for k in 0..per_edge {
        for th in [theta.0, theta.1] {
            out.push(Point::from_spherical(th, lerp(phi.0, phi.1, k)));
        }
        for ph in [phi.0, phi.1] {
            out.push(Point::from_spherical(lerp(theta.0, theta.1, k), ph));
        }
    }
    out
}

#[test]
fn partition_norm_matches_brute_force() {
    let r = equal_area_partition(100).unwrap();
    let mut brute: f64 = 0.0;
    for c in r.cells() {
        let pts = boundary_samples(c.theta, c.phi, 25);
        for a in &pts {
            for b in &pts {
                brute = brute.max(a.geodesic_distance(b));
            }
        }
    }
    assert!(
        (brute - r.norm()).abs() <= 1e-3,
        "brute {brute} vs {}",
        r.norm()
    );
}

#[test]
fn locate_occupancy_chi_squared() {
    let n = 100;
    let r = equal_area_partition(n).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(399);
    let samples = 100_000;
    let mut counts = vec![0usize; n];
    for _ in 0..samples {
        counts[r.locate(&Point::random(S2, &mut rng))] += 1;
    }
    let expected = samples as f64 / n as f64;
    let stat: f64 = counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum();
    let pvalue = 1.0 - ChiSquared::new((n - 1) as f64).unwrap().cdf(stat);
    assert!(pvalue > 0.001, "chi2 = {stat}, p = {pvalue}");
}

#[test]
fn mz_degree_one_centers_near_one() {
    let r = equal_area_partition(2000).unwrap();
    let k = KernelSpec::new(1, S2).unwrap();
    let poly = PolynomialHandle::representer(k, p([0.3, -0.2, 0.9])).unwrap();
    let rep = mz_value_check(&poly, &r, &r.centers(), &MZOptions::default()).unwrap();
    let ratio = rep.lower_ratio.unwrap();
    assert!((ratio - 1.0).abs() < 0.01, "{ratio}");
    assert!(rep.pass);
}

#[test]
fn lemma1_rhs_value() {
    // D(4, 3) = C(7,3) - C(5,3) = 35 - 10 = 25.
    let want = (1.5 * 4.0 * PI * 25.0f64).sqrt();
    assert!((lemma1_rhs(3, S2).unwrap() - want).abs() < 1e-12);
}

#[test]
fn bounds_examples() {
    assert_eq!(dgs_lower_bound(1, S2).unwrap(), 2);
    assert_eq!(dgs_lower_bound(2, S2).unwrap(), 4);
    assert_eq!(dgs_lower_bound(3, S2).unwrap(), 6);
    let lb = lemma_bounds(3, 2, 4, S2).unwrap();
    assert!((lb.lemma2_general - 4.0 * (4.0 * PI * 15.0f64).sqrt()).abs() < 1e-12);
    assert_eq!(proposition1_plan(1, 2, S2).unwrap().copies, 3);
    assert_eq!(proposition1_plan(2, 3, S2).unwrap().copies, 5);
}

#[test]
fn theorem4_by_hand() {
    // d = 2, t = 4, t1 = 2, M = 12, B = 7, r = 1, margin 0.01.
    let consts = PaperConstants::defaults(S2).unwrap();
    let c1 = (108.0f64 * 7.0).powi(2) * 1.01;
    let c2 = 1.0 / (36.0 * 2f64.sqrt());
    let c3 = 1.5f64.sqrt();
    let (d5, dt, dt1): (f64, f64, f64) = (41.0, 24.0, 8.0); // D(5,3), D_4, D_2
    let lead = c3 / c2 * 12.0 * 4.0;
    let general = (c1 * 16.0f64).max(lead * (d5 * dt).sqrt());
    let nested = (c1 * 16.0f64).max(lead * (d5 * (dt - dt1)).sqrt());
    let (g, n) = theorem4_points(4, Some(2), 12, S2, &consts).unwrap();
    assert!((g - general).abs() <= 1e-9 * general);
    assert!((n.unwrap() - nested).abs() <= 1e-9 * nested);
}

#[test]
fn octahedron_replication_build() {
    let b = proposition1_build(2, 3, S2, None, &mut ClassicalDesigns::new(3)).unwrap();
    assert_eq!(b.unit_size, 6);
    assert_eq!(b.union.len(), 4 * 6 + 5 * 6);
    assert_eq!(&b.union[..b.base.len()], &b.base[..]);
    assert_eq!(b.union_certificate.is_design, Some(true));
}

#[test]
fn auto_sized_extension_of_the_tetrahedron() {
    let consts = PaperConstants::defaults(S2).unwrap();
    let tet = designs::tetrahedron();
    let res = ndf_core::optimizer::auto_extend(3, S2, &tet, 64, &consts, &ExtendOptions::default())
        .unwrap();
    assert!(res.converged);
    assert_eq!(res.fixed_points, tet);
    assert_eq!(
        certify_points(3, S2, &res.union(), 1e-10)
            .unwrap()
            .is_design,
        Some(true)
    );
}
