//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! A criterion that misses its tolerance prints FAIL with the measured value;
//! the run only aborts if a computation returns an error.

use std::time::Instant;

use fermion_decay_core::bounds::{
    covariance_l1_d, det_bound_scan, schwinger_coefficient_bound, verify_taylor_bounds,
    verify_theorem_envelope, BoundContext, EnvelopeVariant,
};
use fermion_decay_core::covariance::{
    contour_formula_check, decay_envelope_check, det_identity_check, l1_bound_rhs, matsubara_check,
    u1_shift_identity_check, CovarianceSpec, RadiusConstant, SpaceTimePoint,
};
use fermion_decay_core::fock::{
    build_hamiltonian, build_hamiltonian_unchecked, lambda_derivative_check, CorrelationQuery,
    FockOperator, FockSpace, Ladder, ThermalState,
};
use fermion_decay_core::grassmann::{
    berezin_gaussian, correlation_via_grassmann, discrete_partition, partition_via_exponential,
    wick_integrate, Generator, GrassmannPolynomial,
};
use fermion_decay_core::lattice::{LatticeSpec, Spin, TimeGrid};
use fermion_decay_core::model::{
    antisymmetric_norm, antisymmetrize, check_smallness, coupling_table_norm, hubbard_fc,
    CouplingTable, InteractionCoefficients, ModelParams, SmallnessVariant,
};
use fermion_decay_core::Error;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const ONE: Complex64 = Complex64::new(1.0, 0.0);

struct Outcome {
    pass: bool,
    detail: String,
}

fn up1(x: i64, y: i64) -> CorrelationQuery {
    CorrelationQuery::new(vec![vec![x]], vec![vec![y]], vec![Spin::Up], vec![Spin::Up]).unwrap()
}

fn four_point(x1: i64, x2: i64, y1: i64, y2: i64) -> CorrelationQuery {
    CorrelationQuery::new(
        vec![vec![x1], vec![x2]],
        vec![vec![y1], vec![y2]],
        vec![Spin::Up, Spin::Down],
        vec![Spin::Up, Spin::Down],
    )
    .unwrap()
}

fn c1_free_fermions() -> Result<Outcome, Error> {
    let spec = LatticeSpec::new(1, 4)?;
    let p = ModelParams::new(1.0, 0.0, 0.3, 1.0);
    let u = InteractionCoefficients::new(1);
    let state = ThermalState::new(&build_hamiltonian(&spec, &p, &u, None)?, p.beta)?;
    let cs = CovarianceSpec::unshifted(spec, p)?;
    let mut worst: f64 = 0.0;
    for x in 0..4 {
        for y in 0..4 {
            for s in Spin::BOTH {
                let q = CorrelationQuery::new(vec![vec![x]], vec![vec![y]], vec![s], vec![s])?;
                let fock = state.average(&q.observable(&spec)?)?;
                let a = SpaceTimePoint::new(x as usize, s, 0.0);
                let b = SpaceTimePoint::new(y as usize, s, 0.0);
                worst = worst.max((fock - cs.value(&a, &b) - cs.value(&b, &a)).norm());
            }
        }
    }
    Ok(Outcome {
        pass: worst <= 1e-10,
        detail: format!("max |fock - (C(x,y) + C(y,x))| = {worst:.3e} (tol 1e-10)"),
    })
}

fn c2_wick_berezin() -> Result<Outcome, Error> {
    let n = 6;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut g = DMatrix::from_fn(n, n, |_, _| {
        Complex64::new(rng.gen_range(-0.3..0.3), rng.gen_range(-0.3..0.3))
    });
    for i in 0..n {
        g[(i, i)] += ONE;
    }
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let k = rng.gen_range(0..=4);
        let mut idx: Vec<usize> = (0..n).collect();
        idx.shuffle(&mut rng);
        let mut word: Vec<Generator> = idx[..k].iter().map(|&i| Generator::Bar(i)).collect();
        idx.shuffle(&mut rng);
        word.extend(idx[..k].iter().map(|&i| Generator::Psi(i)));
        word.shuffle(&mut rng);
        let coef = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let f = GrassmannPolynomial::from_word(n, coef, &word)?;
        worst = worst.max((berezin_gaussian(&f, &g)? - wick_integrate(&f, &g)?).norm());
    }
    Ok(Outcome {
        pass: worst <= 1e-12,
        detail: format!("N=6, 200 monomials: max |Berezin - Wick| = {worst:.3e} (tol 1e-12)"),
    })
}

fn c3_partition_and_h_limit() -> Result<Outcome, Error> {
    let spec = LatticeSpec::new(1, 1)?;
    let p = ModelParams::new(1.0, 0.0, 0.2, 1.0);
    let u = InteractionCoefficients::hubbard(1, 0.3);
    let cs = CovarianceSpec::unshifted(spec, p)?;
    let grids: Vec<TimeGrid> = [1, 2, 4]
        .iter()
        .map(|&k| TimeGrid::new(1.0, k))
        .collect::<Result<_, _>>()?;
    let mut route_gap: f64 = 0.0;
    for grid in &grids {
        let a = discrete_partition(&cs, grid, &u, None, None)?.value;
        let b = partition_via_exponential(&cs, grid, &u, ONE)?;
        route_gap = route_gap.max((a - b).norm());
    }
    let q = up1(0, 0);
    let exact = fermion_decay_core::fock::correlation(&spec, &p, &u, &q)?.re;
    let vals = correlation_via_grassmann(&cs, &u, &q, &grids)?;
    let errs: Vec<f64> = vals.iter().map(|v| (v.value - exact).norm()).collect();
    let decreasing = errs.windows(2).all(|w| w[1] < w[0]);
    let last = *errs.last().unwrap();
    Ok(Outcome {
        pass: route_gap <= 1e-10 && decreasing && last < 5e-2,
        detail: format!(
            "route gap {route_gap:.3e} (tol 1e-10); |grassmann - fock| at beta*h = 2, 4, 8: {:.4e}, {:.4e}, {:.4e} (final tol 5e-2)",
            errs[0], errs[1], errs[2]
        ),
    })
}

fn c4_det_bound() -> Result<Outcome, Error> {
    let spec = LatticeSpec::new(1, 4)?;
    let p = ModelParams::new(1.0, 0.0, 0.2, 1.0);
    let shifted = det_bound_scan(spec, p, 6, 6, 1000, 4, 1.0)?;
    let plain = det_bound_scan(spec, p, 6, 6, 1000, 5, 0.0)?;
    let worst = shifted.worst_ratio.max(plain.worst_ratio);
    Ok(Outcome {
        pass: worst <= 1.0,
        detail: format!(
            "worst |det|/4^n: shifted {:.3e}, unshifted {:.3e} (tol 1)",
            shifted.worst_ratio, plain.worst_ratio
        ),
    })
}

fn c5_det_identity() -> Result<Outcome, Error> {
    let p = ModelParams::new(1.0, 0.0, 0.2, 1.0);
    let mut worst: f64 = 0.0;
    for l in [1, 2] {
        let spec = LatticeSpec::new(1, l)?;
        for half in [1, 2] {
            let grid = TimeGrid::new(1.0, half)?;
            for shifts in [vec![], vec![(Complex64::new(0.0, 0.1), 0)]] {
                let cs = CovarianceSpec::new(spec, p, shifts)?;
                worst = worst.max(det_identity_check(&cs, &grid)?.relative_error);
            }
        }
    }
    Ok(Outcome {
        pass: worst <= 1e-8,
        detail: format!("max relative error {worst:.3e} (tol 1e-8)"),
    })
}

fn c6_matsubara() -> Result<Outcome, Error> {
    let cs = CovarianceSpec::unshifted(
        LatticeSpec::new(1, 2)?,
        ModelParams::new(1.0, 0.0, 0.2, 1.0),
    )?;
    let r = matsubara_check(&cs, &TimeGrid::new(1.0, 1)?)?;
    Ok(Outcome {
        pass: r.max_off_diagonal <= 1e-9 && r.max_diagonal_deviation <= 1e-9,
        detail: format!(
            "off-diagonal {:.3e}, diagonal deviation {:.3e} (tol 1e-9)",
            r.max_off_diagonal, r.max_diagonal_deviation
        ),
    })
}

fn c7_u1_shift() -> Result<Outcome, Error> {
    let p = ModelParams::new(1.0, 0.5, 0.2, 1.0);
    let grid = TimeGrid::new(1.0, 1)?;
    let mut worst: f64 = 0.0;
    for l in [2, 4] {
        for d in [1, 2] {
            let cs = CovarianceSpec::unshifted(LatticeSpec::new(d, l)?, p)?;
            for q in 0..d {
                worst = worst.max(u1_shift_identity_check(&cs, &grid, q)?);
            }
        }
    }
    Ok(Outcome {
        pass: worst <= 1e-12,
        detail: format!("max deviation {worst:.3e} (tol 1e-12)"),
    })
}

fn c8_contour() -> Result<Outcome, Error> {
    let cs = CovarianceSpec::unshifted(
        LatticeSpec::new(1, 4)?,
        ModelParams::new(1.0, 0.0, 0.2, 1.0),
    )?;
    let mut worst: f64 = 0.0;
    for (xa, ta, xb, tb) in [(0, 0.3, 2, 0.1), (1, 0.0, 0, 0.7), (3, 0.5, 1, 0.5)] {
        let a = SpaceTimePoint::new(xa, Spin::Up, ta);
        let b = SpaceTimePoint::new(xb, Spin::Up, tb);
        let r = contour_formula_check(&cs, &a, &b, 0, 1, 512, 512, RadiusConstant::PiOverTwoBeta)?;
        worst = worst.max(r.deviation);
    }
    Ok(Outcome {
        pass: worst <= 1e-6,
        detail: format!("n=1, 512 nodes: max deviation {worst:.3e} (tol 1e-6)"),
    })
}

fn c9_decay_and_l1() -> Result<Outcome, Error> {
    let p = ModelParams::new(1.0, 0.0, 0.0, 2.0);
    let cs = CovarianceSpec::unshifted(LatticeSpec::new(1, 16)?, p)?;
    let grid = TimeGrid::new(2.0, 4)?;
    let r = decay_envelope_check(&cs, &grid)?;
    let d = covariance_l1_d(&cs, &grid)?;
    let rhs = l1_bound_rhs(&p, 1)?;
    Ok(Outcome {
        pass: r.worst_chord_ratio <= 1.0 && r.worst_window_ratio <= 1.0 && d <= rhs,
        detail: format!(
            "worst |C|/envelope: chord {:.3e}, window {:.3e}; D = {d:.4} <= {rhs:.4}",
            r.worst_chord_ratio, r.worst_window_ratio
        ),
    })
}

fn c10_taylor() -> Result<Outcome, Error> {
    let cs = CovarianceSpec::unshifted(
        LatticeSpec::new(1, 2)?,
        ModelParams::new(1.0, 0.0, 0.2, 1.0),
    )?;
    let grid = TimeGrid::new(1.0, 1)?;
    let u = InteractionCoefficients::hubbard(1, 0.1);
    let ctx = BoundContext::new(&cs, &grid)?;
    let mut ok = true;
    let mut worst: f64 = 0.0;
    for q in [
        four_point(0, 0, 1, 1),
        four_point(0, 1, 1, 0),
        up1(0, 1),
        up1(0, 0),
    ] {
        let r = verify_taylor_bounds(&cs, &grid, &u, &q, 3, &ctx)?;
        ok &= r.all_pass();
        for row in r
            .general
            .iter()
            .chain(r.hubbard_pinned.iter().flatten())
            .chain(r.hubbard_full.iter().flatten())
        {
            worst = worst.max(row.ratio);
        }
        ok &= schwinger_coefficient_bound(0, q.m_hat(), &ctx, &[]) == 4f64.powi(q.m_hat() as i32);
    }
    Ok(Outcome {
        pass: ok,
        detail: format!(
            "D = {:.4}; worst |coefficient|/bound over m <= 3: {worst:.3e}",
            ctx.l1_integral_d
        ),
    })
}

fn c11_envelope() -> Result<Outcome, Error> {
    let spec = LatticeSpec::new(1, 4)?;
    let p = ModelParams::new(1.0, 0.0, 0.2, 1.0);
    let threshold = check_smallness(
        &InteractionCoefficients::hubbard(1, 0.0),
        &p,
        &spec,
        SmallnessVariant::Hubbard,
    )?
    .rhs;
    let u = InteractionCoefficients::hubbard(1, 0.9 * threshold);
    let mut queries = Vec::new();
    for x2 in 0..3 {
        for y1 in 0..3 {
            for y2 in 0..3 {
                queries.push(four_point(0, x2, y1, y2));
            }
        }
    }
    let reports = verify_theorem_envelope(&spec, &p, &u, &queries, EnvelopeVariant::Hubbard)?;
    let worst = reports
        .iter()
        .map(|r| r.computed / r.envelope)
        .fold(0.0, f64::max);
    Ok(Outcome {
        pass: reports.iter().all(|r| r.pass),
        detail: format!(
            "U = {:.4e}, {} queries: worst |corr|/envelope {worst:.3e}",
            0.9 * threshold,
            reports.len()
        ),
    })
}

fn c12_trivial_hopping() -> Result<Outcome, Error> {
    let spec = LatticeSpec::new(1, 4)?;
    let p = ModelParams::new(0.0, 0.0, 0.2, 1.0);
    let u = InteractionCoefficients::hubbard(1, 0.5);
    let state = ThermalState::new(&build_hamiltonian_unchecked(&spec, &p, &u, None)?, p.beta)?;
    let mut worst: f64 = 0.0;
    let mut queries = vec![up1(0, 1), up1(0, 2), up1(1, 3)];
    queries.push(four_point(0, 0, 1, 0));
    queries.push(four_point(0, 1, 2, 2));
    for q in &queries {
        worst = worst.max(state.average(&q.observable(&spec)?)?.norm());
    }
    Ok(Outcome {
        pass: worst <= 1e-12,
        detail: format!("max |correlation| = {worst:.3e} (tol 1e-12)"),
    })
}

fn operator_of_f(
    space: &FockSpace,
    f: &fermion_decay_core::model::AntisymmetricCoefficients,
) -> Result<FockOperator, Error> {
    let mut o = FockOperator::zero(space);
    for ((a, b), v) in &f.entries {
        let mut w: Vec<(usize, Ladder)> = a.iter().map(|&m| (m, Ladder::Create)).collect();
        w.extend(b.iter().map(|&m| (m, Ladder::Annihilate)));
        o.add_word(space, *v, &w)?;
    }
    Ok(o)
}

fn operator_of_g(space: &FockSpace, g: &CouplingTable) -> Result<FockOperator, Error> {
    let mut o = FockOperator::zero(space);
    for ((sites, xi, phi), v) in &g.entries {
        let a: Vec<usize> = sites
            .iter()
            .zip(xi)
            .map(|(s, x)| g.spec.mode(*s, *x))
            .collect();
        let b: Vec<usize> = sites
            .iter()
            .zip(phi)
            .map(|(s, p)| g.spec.mode(*s, *p))
            .collect();
        o.add_word(space, *v, &fermion_decay_core::fock::normal_word(&a, &b))?;
    }
    Ok(o)
}

fn c13_antisymmetrization() -> Result<Outcome, Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut op_gap: f64 = 0.0;
    let mut norm_ok = true;
    let specs = [
        LatticeSpec::new(1, 2)?,
        LatticeSpec::new(1, 4)?,
        LatticeSpec::new(2, 2)?,
    ];
    for trial in 0..50 {
        let spec = specs[trial % specs.len()];
        let order = 1 + trial % 2;
        let mut g = CouplingTable::new(spec, order);
        for _ in 0..rng.gen_range(1..6) {
            let sites: Vec<usize> = (0..order)
                .map(|_| rng.gen_range(0..spec.site_count()))
                .collect();
            let spin = |r: &mut ChaCha8Rng| {
                if r.gen_bool(0.5) {
                    Spin::Up
                } else {
                    Spin::Down
                }
            };
            let xi: Vec<Spin> = (0..order).map(|_| spin(&mut rng)).collect();
            let phi: Vec<Spin> = (0..order).map(|_| spin(&mut rng)).collect();
            g.add(
                sites,
                xi,
                phi,
                Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            );
        }
        let f = antisymmetrize(&g)?;
        let space = FockSpace::for_lattice(&spec)?;
        let diff = operator_of_f(&space, &f)?.add(&operator_of_g(&space, &g)?.scale(-ONE));
        op_gap = op_gap.max(diff.max_abs());
        norm_ok &= antisymmetric_norm(&f) <= coupling_table_norm(&g) * (1.0 + 1e-12);
    }
    let spec = LatticeSpec::new(1, 4)?;
    let u = 0.7;
    let fc = antisymmetric_norm(&hubbard_fc(&spec, u));
    let g = CouplingTable::from_interaction(&InteractionCoefficients::hubbard(1, u), &spec, 2);
    let fh = antisymmetric_norm(&antisymmetrize(&g)?);
    let exact = fc == u / 2.0 && fh == u / 2.0;
    Ok(Outcome {
        pass: op_gap <= 1e-12 && norm_ok && exact,
        detail: format!(
            "operator identity gap {op_gap:.3e} (tol 1e-12); norm inequality on 50 tables: {}; f_c norm {fc} = |U|/2: {exact}",
            if norm_ok { "holds" } else { "violated" }
        ),
    })
}

fn c14_lambda_derivative() -> Result<Outcome, Error> {
    let spec = LatticeSpec::new(1, 1)?;
    let p = ModelParams::new(1.0, 0.0, 0.2, 1.0);
    let u = InteractionCoefficients::hubbard(1, 0.3);
    let mut worst: f64 = 0.0;
    let cross = CorrelationQuery::new(
        vec![vec![0]],
        vec![vec![0]],
        vec![Spin::Up],
        vec![Spin::Down],
    )?;
    for q in [up1(0, 0), cross, four_point(0, 0, 0, 0)] {
        worst = worst.max(lambda_derivative_check(&spec, &p, &u, &q, 1e-4)?.deviation);
    }
    Ok(Outcome {
        pass: worst <= 1e-6,
        detail: format!("max |finite difference - correlation| = {worst:.3e} (tol 1e-6)"),
    })
}

fn main() {
    let criteria: [(&str, f64, fn() -> Result<Outcome, Error>); 14] = [
        ("free-fermion consistency", 5.0, c1_free_fermions),
        ("Wick = Berezin", 10.0, c2_wick_berezin),
        (
            "partition equivalence and h-convergence",
            30.0,
            c3_partition_and_h_limit,
        ),
        ("determinant bound", 30.0, c4_det_bound),
        ("determinant identity", 5.0, c5_det_identity),
        ("Matsubara diagonalization", 5.0, c6_matsubara),
        ("U(1) shift identity", 5.0, c7_u1_shift),
        ("contour formula", 20.0, c8_contour),
        ("covariance decay and L1 bound", 10.0, c9_decay_and_l1),
        ("Taylor coefficient bounds", 60.0, c10_taylor),
        ("decay envelope at finite L", 60.0, c11_envelope),
        ("trivial hopping", 5.0, c12_trivial_hopping),
        ("anti-symmetrization", 30.0, c13_antisymmetrization),
        ("lambda derivative", 10.0, c14_lambda_derivative),
    ];
    let mut passed = 0;
    for (i, (name, budget, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run().unwrap_or_else(|e| panic!("criterion {}: {e}", i + 1));
        let secs = start.elapsed().as_secs_f64();
        let pass = outcome.pass && secs < *budget;
        if pass {
            passed += 1;
        }
        println!(
            "{} criterion {:>2} {name}: {}; {secs:.2} s (budget {budget} s)",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            outcome.detail
        );
    }
    println!("{passed}/{} criteria pass", criteria.len());
}
