use std::time::Instant;

use gevreylab::corpus::*;
use gevreylab::division::LinearForm;
use gevreylab::gevrey::blowdown;
use gevreylab::linalg::Matrix;
use gevreylab::scalar::rat;
use gevreylab::solver::{
    companion_augment, implicit_solution, residual, solve, solve_convergent, solve_direct,
    solve_padic, Branch, BranchChoice, NonlinearTerm, PdeProblem, RightHandSide,
};
use gevreylab::{Error, MultiIndex, Order, Rational, Series};
use num_traits::{One, Zero};

fn int(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

fn factorial(n: u32) -> Rational {
    (1..=n).fold(Rational::one(), |a, k| a * int(k as i64))
}

fn sign(n: u32) -> Rational {
    if n % 2 == 0 {
        Rational::one()
    } else {
        -Rational::one()
    }
}

#[test]
fn euler_golden_series() {
    let start = Instant::now();
    let problem = euler(30).unwrap();
    let report = solve_padic(&problem, None).unwrap();
    assert_eq!(report.branch, Branch::Divergent);
    assert_eq!(report.certified_order, 30);
    assert!(report.residual_order.exceeds(30));
    let y = &report.plain[0];
    for n in 0..30 {
        assert_eq!(y.coeff_of(&[n + 1]), sign(n) * factorial(n), "x^{}", n + 1);
    }
    let dec = &report.decomposition[0];
    assert!(dec.coeffs()[0].is_zero());
    for n in 1..dec.len() as u32 {
        let c = &dec.coeffs()[n as usize];
        assert_eq!(c.coeff_of(&[0]), sign(n - 1) * factorial(n - 1));
        assert_eq!(c.len(), 1);
    }
    assert!(start.elapsed().as_secs_f64() < 5.0);
}

#[test]
fn euler_with_polynomial_solution() {
    let report = solve(&euler_convergent(20).unwrap(), BranchChoice::Auto, None).unwrap();
    assert_eq!(report.plain[0], Series::variable(1, 20, 0));
    assert_eq!(report.certified_order, 20);
}

#[test]
fn ex_ode_closed_form() {
    let mu = int(2);
    let report = solve_padic(&ex_ode(mu.clone(), 20).unwrap(), None).unwrap();
    assert_eq!(report.certified_order, 20);
    let y = &report.plain[0];
    for deg in 1..=20u32 {
        for m in 0..deg {
            let n = deg - m;
            let mut expected = Rational::one() / &mu;
            for _ in 0..m {
                expected = expected * int(n as i64) / &mu;
            }
            assert_eq!(y.coeff_of(&[n, m]), expected, "x1^{n} x2^{m}");
        }
        assert!(y.coeff_of(&[0, deg]).is_zero());
    }
}

#[test]
fn ex_ode_swapped_is_refused() {
    let problem = ex_ode_swapped(int(2), 12).unwrap();
    assert!(matches!(solve_padic(&problem, None), Err(Error::Refusal(_))));
    assert!(matches!(
        solve(&problem, BranchChoice::Auto, None),
        Err(Error::Refusal(_))
    ));
}

#[test]
fn monomial_family_matches_closed_form_and_direct_solver() {
    let cases: Vec<(Vec<u32>, Vec<Rational>, Vec<u32>, Rational)> = vec![
        (vec![1, 1], vec![int(1), int(2)], vec![1, 0], int(3)),
        (vec![2, 1], vec![rat(1, 2), int(1)], vec![0, 1], int(-2)),
        (vec![1, 0], vec![int(1), int(1)], vec![1, 1], rat(5, 3)),
    ];
    for (alpha, lambda, beta, mu) in cases {
        let trunc = 14;
        let problem = monomial_family(&alpha, &lambda, &beta, mu.clone(), trunc).unwrap();
        let report = solve_padic(&problem, None).unwrap();
        let direct = solve_direct(&problem).unwrap();
        let la: Rational = alpha.iter().zip(&lambda).map(|(a, l)| l * int(*a as i64)).sum();
        let lb: Rational = beta.iter().zip(&lambda).map(|(b, l)| l * int(*b as i64)).sum();
        let y = &report.plain[0];
        let order = report.certified_order;
        assert!(y.agrees_with(&direct[0], order));
        let a_deg: u32 = alpha.iter().sum();
        let b_deg: u32 = beta.iter().sum();
        let mut n = 0;
        while b_deg + n * a_deg <= order {
            let e: Vec<u32> = alpha.iter().zip(&beta).map(|(a, b)| n * a + b).collect();
            assert_eq!(y.coeff_of(&e), monomial_family_coefficient(&la, &lb, &mu, n));
            n += 1;
        }
    }
}

#[test]
fn monomial_family_resonant_case() {
    let alpha = [1, 1];
    let lambda = [int(1), int(-1)];
    let beta = [2, 0];
    let mu = int(3);
    let problem = monomial_family(&alpha, &lambda, &beta, mu.clone(), 16).unwrap();
    let report = solve_padic(&problem, None).unwrap();
    let y = &report.plain[0];
    let lb = int(2);
    for n in 0..=7 {
        assert_eq!(
            y.coeff_of(&[n + 2, n]),
            monomial_family_resonant_coefficient(&lb, &mu, n)
        );
    }
    assert_eq!(y.len() as u32, (report.certified_order - 2) / 2 + 1);
}

#[test]
fn convergent_branch_and_resonance() {
    let report = solve_convergent(&convergent_linear(rat(1, 2), 15).unwrap(), None).unwrap();
    assert_eq!(report.branch, Branch::Convergent);
    assert_eq!(report.plain[0], Series::variable(1, 15, 0).scale(&int(-2)));
    assert_eq!(report.certified_order, 15);
    match solve_convergent(&convergent_linear(int(3), 15).unwrap(), None) {
        Err(Error::Resonance { n }) => assert_eq!(n, 3),
        other => panic!("expected resonance, got {other:?}"),
    }
    let auto = solve(&convergent_linear(rat(1, 2), 10).unwrap(), BranchChoice::Auto, None).unwrap();
    assert_eq!(auto.branch, Branch::Convergent);
}

#[test]
fn divergent_branch_refuses_nondividing_problem() {
    let problem = convergent_linear(rat(1, 2), 10).unwrap();
    assert!(matches!(solve_padic(&problem, None), Err(Error::Refusal(_))));
    assert!(matches!(
        solve_convergent(&euler(10).unwrap(), None),
        Err(Error::Refusal(_))
    ));
}

#[test]
fn function_of_p_solution() {
    let trunc = 18;
    let report = solve_padic(&function_of_p(trunc).unwrap(), None).unwrap();
    let x1 = Series::variable(2, trunc, 0);
    let x2 = Series::variable(2, trunc, 1);
    let p = &x1 * &x2;
    let f = &p * &(&Series::one(2, trunc) - &p).inverse().unwrap();
    assert!(report.plain[0].agrees_with(&f, report.certified_order));
    assert_eq!(report.certified_order, trunc);
}

#[test]
fn multi_euler_blow_down_matches_closed_form() {
    let report = solve_padic(&multi_euler_blown_up(32).unwrap(), None).unwrap();
    assert_eq!(report.certified_order, 32);
    let down = blowdown(&report.plain[0]).unwrap();
    assert_eq!(down.trunc(), 16);
    assert_eq!(down, multi_euler_solution(16));
}

#[test]
fn quadratic_germ_agrees_with_direct_solver() {
    let problem = quadratic_germ(int(2), 12).unwrap();
    let report = solve_padic(&problem, None).unwrap();
    let direct = solve_direct(&problem).unwrap();
    assert!(report.plain[0].agrees_with(&direct[0], report.certified_order));
    assert_eq!(report.certified_order, 12);
}

#[test]
fn saddle_node_unfolding_solves_and_checks() {
    let trunc = 16;
    let x = Series::variable(2, trunc, 0);
    let f = &x + &x.pow(2);
    let problem = saddle_node_unfolding(1, int(-1), &f, trunc).unwrap();
    let report = solve_padic(&problem, None).unwrap();
    let direct = solve_direct(&problem).unwrap();
    assert!(report.plain[0].agrees_with(&direct[0], report.certified_order));
}

fn nonlinear_problem(trunc: u32) -> PdeProblem<Rational> {
    // x² y' = −y + x + y² + x y³
    let x = Series::variable(1, trunc, 0);
    let mu = Matrix::from_rows(vec![vec![int(-1)]]).unwrap();
    let nl = vec![
        NonlinearTerm {
            index: MultiIndex::new(&[2]),
            coeffs: vec![Series::one(1, trunc)],
        },
        NonlinearTerm {
            index: MultiIndex::new(&[3]),
            coeffs: vec![x.clone()],
        },
    ];
    let rhs = RightHandSide::new(vec![x.clone()], mu, None, nl).unwrap();
    PdeProblem::new(x.clone(), vec![x], rhs, LinearForm::uniform(1), trunc).unwrap()
}

#[test]
fn nonlinear_scalar_equation_matches_direct_solver() {
    let problem = nonlinear_problem(20);
    let report = solve_padic(&problem, None).unwrap();
    let direct = solve_direct(&problem).unwrap();
    assert_eq!(report.certified_order, 20);
    assert!(report.plain[0].agrees_with(&direct[0], 20));
    let res = residual(&problem, &report.plain).unwrap();
    assert_eq!(res[0].order(), Order::AboveTruncation);
}

#[test]
fn newton_converges_to_the_same_root_from_a_perturbed_start() {
    let problem = nonlinear_problem(12);
    let plain = implicit_solution(&problem, None).unwrap();
    let x = Series::variable(1, 12, 0);
    let start = vec![&x.pow(3).scale(&rat(7, 5)) + &x.pow(5)];
    let perturbed = implicit_solution(&problem, Some(&start)).unwrap();
    assert_eq!(plain, perturbed);
}

#[test]
fn companion_reduction_of_second_order_equation() {
    // (P L)² y + u (P L) y = μ y − x with P = x, L = x ∂_x.
    let trunc = 14;
    let base = euler(trunc).unwrap();
    let u = vec![Series::constant(1, trunc, int(3))];
    let aug = companion_augment(&base, &u, 2).unwrap();
    assert_eq!(aug.problem.size(), 2);
    // p_μ(σ) = σ + 1 composed with σ² + 3σ
    assert_eq!(aug.characteristic, vec![int(1), int(3), int(1)]);
    let cp = aug.jacobian.characteristic_polynomial();
    assert_eq!(cp, aug.characteristic);
    let report = solve_padic(&aug.problem, None).unwrap();
    let direct = solve_direct(&aug.problem).unwrap();
    for l in 0..2 {
        assert!(report.plain[l].agrees_with(&direct[l], report.certified_order));
    }
    // the second component is P L of the first
    let y = &report.plain[0];
    let x = Series::variable(1, trunc, 0);
    let ply = &x * &(&x * &y.partial(0).unwrap());
    assert!(ply.agrees_with(&report.plain[1], report.certified_order.min(ply.trunc())));
}

mod gevrey_estimates {
    use super::*;
    use gevreylab::gevrey::{estimate_order, norm_sequence, NormProxy};

    fn s_hat(report: &gevreylab::solver::SolverReport<Rational>) -> f64 {
        let ns = norm_sequence::<_, f64>(&report.decomposition[0], NormProxy::CoeffSum, &rat(1, 2));
        estimate_order(&ns).unwrap().s_hat
    }

    #[test]
    fn euler_and_polynomial_variant() {
        let s = s_hat(&solve_padic(&euler(30).unwrap(), None).unwrap());
        assert!((0.9..=1.1).contains(&s), "{s}");
        let s = s_hat(&solve_padic(&euler_convergent(30).unwrap(), None).unwrap());
        assert!((-0.1..=0.1).contains(&s), "{s}");
    }

    #[test]
    fn multi_euler_blown_up_is_one_gevrey_in_z1() {
        let s = s_hat(&solve_padic(&multi_euler_blown_up(32).unwrap(), None).unwrap());
        assert!((0.8..=1.2).contains(&s), "{s}");
    }

    #[test]
    fn saddle_node_unfolding_order() {
        let trunc = 24;
        let x = Series::variable(2, trunc, 0);
        let report = solve_padic(&saddle_node_unfolding(1, rat(1, 3), &x, trunc).unwrap(), None).unwrap();
        assert_eq!(report.h, Some(Series::constant(2, report.h.as_ref().unwrap().trunc(), int(1))));
        let s = s_hat(&report);
        assert!((0.7..=1.3).contains(&s), "{s}");
    }
}

#[test]
fn nonlinear_term_matches_explicit_enumeration() {
    // P = x1² + x2, L = x1 ∂1 + 2 x2 ∂2 (L(P) = 2P), F = x1 + x2 − y + (1 + x1) y²
    use gevreylab::division::{decompose_available, p_adic_multiply};
    use gevreylab::solver::apply_operator;
    let trunc = 12;
    let x1 = Series::variable(2, trunc, 0);
    let x2 = Series::variable(2, trunc, 1);
    let p = &x1.pow(2) + &x2;
    let b = &Series::one(2, trunc) + &x1;
    let rhs = RightHandSide::new(
        vec![&x1 + &x2],
        Matrix::from_rows(vec![vec![int(-1)]]).unwrap(),
        None,
        vec![NonlinearTerm {
            index: MultiIndex::new(&[2]),
            coeffs: vec![b.clone()],
        }],
    )
    .unwrap();
    let a = vec![x1.clone(), x2.scale(&int(2))];
    let problem = PdeProblem::new(p.clone(), a.clone(), rhs, LinearForm::uniform(2), trunc).unwrap();
    let report = solve_padic(&problem, None).unwrap();
    let y = &report.plain[0];
    let div = problem.divisor().unwrap();
    let dy = decompose_available(&div, y).unwrap();
    // Σ_{j+k+l=n} products re-divided term by term
    let y_sq = p_adic_multiply(&dy, &dy).unwrap();
    let by_sq = p_adic_multiply(&decompose_available(&div, &b).unwrap(), &y_sq).unwrap();
    let dc = decompose_available(&div, &(&x1 + &x2)).unwrap();
    let ly = apply_operator(&a, std::slice::from_ref(y)).unwrap().remove(0);
    let lhs = decompose_available(&div, &p.mul_sharp(&ly).unwrap()).unwrap();
    for n in 0..=3 {
        let f_n = &(&dc.coeffs()[n] - &dy.coeffs()[n]) + &by_sq.coeffs()[n];
        let l_n = &lhs.coeffs()[n];
        let t = f_n.trunc().min(l_n.trunc());
        assert!(t >= 4, "n={n} only certified to {t}");
        assert!(l_n.agrees_with(&f_n, t), "coefficient {n}");
    }
}
