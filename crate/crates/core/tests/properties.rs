mod common;

use common::shipped;
use moment_asymptotics::action::GroupAction;
use moment_asymptotics::amplitude::{AmplitudeKind, RadialFactor};
use moment_asymptotics::fourier::{radial_fourier_direct, RadialFourier};
use moment_asymptotics::linalg::numerical_rank;
use moment_asymptotics::phase::{grad_psi, hess_psi, is_critical, moment_map, psi, PhasePoint};
use moment_asymptotics::pipeline::MuGrid;
use moment_asymptotics::resolution::*;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::SeedableRng;
use std::sync::OnceLock;

fn actions() -> &'static [GroupAction] {
    static A: OnceLock<Vec<GroupAction>> = OnceLock::new();
    A.get_or_init(shipped)
}

fn branches() -> &'static [IsotropyBranch] {
    static B: OnceLock<Vec<IsotropyBranch>> = OnceLock::new();
    B.get_or_init(|| actions().iter().flat_map(|a| build_isotropy_tree(a).unwrap()).collect())
}

fn vecs(k: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0..2.0f64, k)
}

/// An action index together with a phase point of matching size.
fn action_point() -> impl Strategy<Value = (usize, PhasePoint)> {
    (0..3usize).prop_flat_map(|i| {
        let a = &actions()[i];
        (Just(i), vecs(a.n()), vecs(a.n()), vecs(a.d())).prop_map(|(i, x, xi, t)| (i, PhasePoint::new(&x, &xi, &t)))
    })
}

/// Coefficients of `[Y, X]` in the orthonormal basis.
fn bracket_coeffs(a: &GroupAction, y: &DVector<f64>, t: &DVector<f64>) -> DVector<f64> {
    let (ym, xm) = (a.element(y.as_slice()), a.element(t.as_slice()));
    let c = &ym * &xm - &xm * &ym;
    DVector::from_fn(a.d(), |k, _| a.generators()[k].dot(&c))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn isotropy_kills_point((i, p) in action_point()) {
        let a = &actions()[i];
        let gx = a.isotropy_algebra(&p.x);
        for y in &gx.basis {
            prop_assert!((a.element(y.as_slice()) * &p.x).norm() <= 1e-10);
        }
        prop_assert!(a.isotropy_algebra_pair(&p.x, &p.xi).dim() <= gx.dim().min(a.isotropy_algebra(&p.xi).dim()));
        prop_assert_eq!(a.d() - gx.dim(), numerical_rank(&a.orbit_matrix(&p.x)));
    }

    #[test]
    fn psi_is_antisymmetric_in_the_pair((i, p) in action_point()) {
        let a = &actions()[i];
        let q = PhasePoint { x: p.xi.clone(), xi: p.x.clone(), t: p.t.clone() };
        prop_assert!((psi(a, &p) + psi(a, &q)).abs() <= 1e-12 * (1.0 + psi(a, &p).abs()));
        prop_assert!((psi(a, &p) - p.t.dot(&moment_map(a, &p.x, &p.xi))).abs() <= 1e-12);
    }

    #[test]
    fn psi_is_infinitesimally_invariant((i, p) in action_point(), y in vecs(3)) {
        let a = &actions()[i];
        let y = DVector::from_column_slice(&y[..a.d()]);
        let ym = a.element(y.as_slice());
        // direction (Y x, Y ξ, [Y, X]) of the diagonal action
        let dir = PhasePoint { x: &ym * &p.x, xi: &ym * &p.xi, t: bracket_coeffs(a, &y, &p.t) };
        let g = grad_psi(a, &p);
        prop_assert!(g.dot(&dir.to_flat()).abs() <= 1e-10 * (1.0 + g.norm() * dir.to_flat().norm()));
    }

    #[test]
    fn derivatives_match_differences((i, p) in action_point()) {
        let a = &actions()[i];
        let z = p.to_flat();
        let h = 1e-5;
        let f = |z: &DVector<f64>| psi(a, &PhasePoint::from_flat(z, a.n()));
        let g = grad_psi(a, &p);
        let hs = hess_psi(a, &p);
        for k in 0..z.len() {
            let mut zp = z.clone();
            let mut zm = z.clone();
            zp[k] += h;
            zm[k] -= h;
            prop_assert!(((f(&zp) - f(&zm)) / (2.0 * h) - g[k]).abs() <= 1e-6 * g.norm().max(1.0));
            let dg = (grad_psi(a, &PhasePoint::from_flat(&zp, a.n())) - grad_psi(a, &PhasePoint::from_flat(&zm, a.n()))) / (2.0 * h);
            prop_assert!((dg - hs.column(k)).norm() <= 1e-6 * hs.norm().max(1.0));
        }
    }

    #[test]
    fn criticality_matches_characterization((i, p) in action_point(), s in prop::sample::select(vec![0.0, 1e-12, 1e-6, 1e-2])) {
        // points on Ω × g_(x,ξ) pushed off by s
        let a = &actions()[i];
        let mut q = p.clone();
        q.xi = &p.x * 1.3;
        let iso = a.isotropy_algebra_pair(&q.x, &q.xi).basis;
        q.t = moment_asymptotics::linalg::project(&p.t, &iso);
        q.xi += &p.xi * s;
        let r = is_critical(a, &q);
        if s == 0.0 {
            prop_assert!(r.critical);
        }
        if r.on_zero_level && r.in_isotropy {
            prop_assert!(r.grad_norm <= 3.0 * r.tol);
        }
        if r.critical {
            prop_assert!(r.on_zero_level && r.in_isotropy);
        }
    }

    #[test]
    fn chart_factorization_holds(b in 0..3usize, seed in any::<u64>()) {
        let br = &branches()[b];
        let layout = br.layout();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let z = common::uniform(&mut rng, layout.dim(), 0.85);
        let c = ResolutionChartPoint::from_flat(&layout, &z);
        let (x, t) = chart_to_ambient(br, &c);
        let lhs = psi(&br.action, &PhasePoint { x, xi: c.xi.clone(), t });
        let rhs = c.tau().iter().product::<f64>() * weak_transform(br, &c);
        prop_assert!((lhs - rhs).abs() <= 1e-11);
    }

    #[test]
    fn gradient_zero_iff_conditions(b in 0..3usize, seed in any::<u64>(), zero in any::<bool>()) {
        let br = &branches()[b];
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let c = critical_witness(br, &mut rng, zero);
        let rec = check_theorem1_conditions(br, &c);
        prop_assert!(rec.grad_zero && rec.consistent());
        for (_, p) in perturbed_witnesses(br, &c) {
            prop_assert!(check_theorem1_conditions(br, &p).consistent());
        }
    }

    #[test]
    fn kernel_dimension_is_constant(b in 0..3usize, seed in any::<u64>(), zero in any::<bool>()) {
        let br = &branches()[b];
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let c = critical_witness(br, &mut rng, zero);
        let rep = check_transversal_nondegeneracy(br, &c).unwrap();
        prop_assert_eq!(rep.kernel_dim, br.chart_dim() - 2 * br.kappa);
    }

    #[test]
    fn delta_determinant_matches_jacobian(s1 in -1.0..1.0f64, s2 in -1.0..1.0f64) {
        let h = 1e-6;
        let d = |a: f64, b: f64| delta_substitution(&[a, b]);
        let j = DMatrix::from_fn(2, 2, |r, k| {
            let (p, m) = if k == 0 { (d(s1 + h, s2), d(s1 - h, s2)) } else { (d(s1, s2 + h), d(s1, s2 - h)) };
            (p[r] - m[r]) / (2.0 * h)
        });
        prop_assert!((j.determinant() - delta_jacobian_det(&[s1, s2])).abs() <= 1e-8);
    }

    #[test]
    fn bump_table_agrees_with_direct(k in 0.0..60.0f64, r in 0.3..2.0f64) {
        let f = RadialFactor::new(&[0.0], r);
        let t = RadialFourier::new(AmplitudeKind::BumpProduct, &f, 60.0);
        let direct = radial_fourier_direct(AmplitudeKind::BumpProduct, &f, k);
        prop_assert!((t.eval(k).unwrap() - direct).abs() <= 1e-8 * t.at_zero());
    }

    #[test]
    fn mu_grid_is_decreasing(min in 1e-3..0.1f64, span in 1.01..20.0f64, count in 2..30usize) {
        let g = MuGrid { min, max: min * span, count }.values().unwrap();
        prop_assert_eq!(g.len(), count);
        prop_assert!(g.windows(2).all(|w| w[0] > w[1]));
        prop_assert!(*g.last().unwrap() > 0.0);
    }
}
