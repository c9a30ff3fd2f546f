//! Randomized property checks shared by the property and acceptance suites.
//! Each check runs a fixed number of proptest cases and reports the first
//! minimal counterexample as an error string.

#![allow(dead_code)]

use std::sync::Arc;

use expsum::cyc::Cyclotomic;
use expsum::dwork::artin_hasse_coeffs;
use expsum::ff::{build_tower, FFElement, FieldTower};
use expsum::localseries::{artin_schreier_reduce, swan_conductor, unramified_frobenius_value, LaurentFq};
use expsum::{CycRat, NewtonPolygon, Rational};
use num_bigint::BigInt;
use num_integer::Integer;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};

fn runner(cases: u32) -> TestRunner {
    TestRunner::new(Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    })
}

fn run<S: Strategy>(
    cases: u32,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    runner(cases).run(&strategy, test).map_err(|e| e.to_string())
}

fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

fn slope() -> impl Strategy<Value = Rational> {
    (0i64..8, 1i64..5).prop_map(|(n, d)| rat(n, d))
}

fn polygon(max_len: usize) -> impl Strategy<Value = NewtonPolygon> {
    prop::collection::vec(slope(), 0..max_len).prop_map(|s| NewtonPolygon::from_slopes(s).unwrap())
}

fn from_vertices(np: &NewtonPolygon) -> NewtonPolygon {
    let mut pts: Vec<(i64, Option<Rational>)> = (0..=np.len() as i64).map(|i| (i, None)).collect();
    for (x, y) in np.vertices() {
        pts[x].1 = Some(y);
    }
    NewtonPolygon::lower_hull(&pts).unwrap()
}

/// Moves part of one slope onto another: same length, same endpoint.
fn redistribute(np: &NewtonPolygon, i: usize, j: usize, frac: (i64, i64)) -> NewtonPolygon {
    let mut s = np.slopes().to_vec();
    if s.is_empty() {
        return np.clone();
    }
    let (i, j) = (i % s.len(), j % s.len());
    let delta = &s[i] * rat(frac.0, frac.1);
    s[i] = &s[i] - &delta;
    s[j] = &s[j] + &delta;
    NewtonPolygon::from_slopes(s).unwrap()
}

/// Hull idempotence, partial-order laws for lies_above, concat laws, and
/// the partial-sum description of lies_above for equal endpoints.
pub fn polygon_laws(cases: u32) -> Result<(), String> {
    let strategy = (polygon(7), polygon(7), polygon(7), any::<(usize, usize)>(), (0i64..=4).prop_map(|n| (n, 4)));
    run(cases, strategy, |(a, b, c, (i, j), frac)| {
        prop_assert_eq!(from_vertices(&a), a.clone());

        prop_assert!(a.lies_above(&a));
        if a.len() == b.len() && a.lies_above(&b) && b.lies_above(&a) {
            prop_assert_eq!(&a, &b);
        }
        // Put the three in a chain to exercise transitivity nontrivially.
        let ab = a.concat(&b);
        let lifted = NewtonPolygon::from_slopes(ab.slopes().iter().map(|s| s + rat(1, 3)).collect()).unwrap();
        prop_assert!(lifted.lies_above(&ab));
        if c.lies_above(&lifted) {
            prop_assert!(c.lies_above(&ab));
        }
        // Lengths compare on the common domain only, so the middle polygon
        // has to cover the domain shared by the outer two.
        if b.len() >= a.len().min(c.len()) && a.lies_above(&b) && b.lies_above(&c) {
            prop_assert!(a.lies_above(&c));
        }

        prop_assert_eq!(a.concat(&b), b.concat(&a));
        prop_assert_eq!(a.concat(&b).concat(&c), a.concat(&b.concat(&c)));
        prop_assert_eq!(a.concat(&NewtonPolygon::empty()), a.clone());

        let r = redistribute(&a, i, j, frac);
        prop_assert_eq!(r.height(), a.height());
        let dominates = a
            .heights()
            .iter()
            .zip(r.heights())
            .all(|(x, y)| *x >= y);
        prop_assert_eq!(a.lies_above(&r), dominates);
        Ok(())
    })
}

fn cyc_int(p: u32) -> impl Strategy<Value = CycRat> {
    prop::collection::vec(-9i64..10, (p - 1) as usize)
        .prop_map(move |c| Cyclotomic::new(p, c.into_iter().map(|x| rat(x, 1)).collect()))
}

fn cyc_pair() -> impl Strategy<Value = (CycRat, CycRat, i64)> {
    prop_oneof![Just(3u32), Just(5u32), Just(7u32)]
        .prop_flat_map(|p| (cyc_int(p), cyc_int(p), 1..p as i64))
}

/// v_λ is additive on products, ultrametric on sums, invariant under
/// Galois conjugation, and division by λ round-trips.
pub fn cyc_valuations(cases: u32) -> Result<(), String> {
    run(cases, cyc_pair(), |(a, b, j)| {
        let p = a.p();
        let va = a.lambda_valuation().unwrap();
        let vb = b.lambda_valuation().unwrap();
        let vab = (&a * &b).lambda_valuation().unwrap();
        match (va, vb) {
            (Some(x), Some(y)) => prop_assert_eq!(vab, Some(x + y)),
            _ => prop_assert_eq!(vab, None),
        }
        if let (Some(x), Some(y)) = (va, vb) {
            if let Some(vs) = (&a + &b).lambda_valuation().unwrap() {
                prop_assert!(vs >= x.min(y));
                if x != y {
                    prop_assert_eq!(vs, x.min(y));
                }
            }
        }
        let conj = a.conjugate(j).unwrap();
        prop_assert_eq!(conj.p_adic_valuation().unwrap(), a.p_adic_valuation().unwrap());
        let lambda = &Cyclotomic::one(p) - &Cyclotomic::zeta_pow(p, 1);
        if let Some(q) = a.div_lambda() {
            prop_assert_eq!(&q * &lambda, a.clone());
        }
        Ok(())
    })
}

fn tower_strategy() -> impl Strategy<Value = Arc<FieldTower>> {
    prop_oneof![Just((3u32, 1usize)), Just((3, 2)), Just((5, 1)), Just((5, 2))]
        .prop_map(|(p, a)| build_tower(p, a, 1).unwrap())
}

fn element(t: &Arc<FieldTower>) -> impl Strategy<Value = FFElement> {
    let t = Arc::clone(t);
    (0..t.size() as u64).prop_map(move |i| t.from_index(i as u128))
}

fn laurent(t: &Arc<FieldTower>, low: std::ops::Range<i64>, len: usize) -> impl Strategy<Value = LaurentFq> {
    let t = Arc::clone(t);
    (low, prop::collection::vec(element(&t), 1..=len))
        .prop_map(move |(l, c)| LaurentFq::exact(&t, l, c))
}

/// h^p − h for an exact Laurent polynomial, via (Σ c_i t^i)^p = Σ c_i^p t^{ip}.
fn artin_schreier_coboundary(h: &LaurentFq) -> LaurentFq {
    let t = h.tower();
    let p = t.p() as i64;
    let low = h.low();
    let high = low + 32;
    let mut coeffs = vec![t.zero(); ((high - low) * p) as usize + 1];
    for e in low..high {
        if let Some(c) = h.coeff(e) {
            coeffs[((e - low) * p) as usize] = c.frobenius();
        }
    }
    let hp = LaurentFq::exact(t, low * p, coeffs);
    hp.sub(h).unwrap()
}

/// Reduction defines the same character for g and g + (h^p − h), leaves a
/// pole order prime to p, and swan conductors are ultrametric.
pub fn artin_schreier_invariance(cases: u32) -> Result<(), String> {
    let strategy = tower_strategy().prop_flat_map(|t| {
        (laurent(&t, -12..1, 8), laurent(&t, -4..1, 5), laurent(&t, -12..1, 8))
    });
    run(cases, strategy, |(g, h, g2)| {
        let p = g.tower().p() as u64;
        let moved = g.add(&artin_schreier_coboundary(&h)).unwrap();
        let r1 = artin_schreier_reduce(&g).unwrap();
        let r2 = artin_schreier_reduce(&moved).unwrap();
        prop_assert_eq!(r1.swan, r2.swan);
        prop_assert!(r1.swan == 0 || r1.swan % p != 0);
        if r1.swan == 0 {
            prop_assert_eq!(
                unramified_frobenius_value(&r1).unwrap(),
                unramified_frobenius_value(&r2).unwrap()
            );
        }
        let s1 = r1.swan;
        let s2 = swan_conductor(&g2).unwrap();
        let s = swan_conductor(&g.add(&g2).unwrap()).unwrap();
        prop_assert!(s <= s1.max(s2));
        if s1 != s2 {
            prop_assert_eq!(s, s1.max(s2));
        }
        Ok(())
    })
}

/// Every coefficient of the Artin–Hasse exponential below `order` has a
/// denominator prime to p.
pub fn artin_hasse_integrality(order: usize) -> Result<(), String> {
    for p in [3u32, 5, 7] {
        let coeffs = artin_hasse_coeffs(p, order + 1).map_err(|e| format!("p = {p}: {e}"))?;
        let pb = BigInt::from(p);
        if let Some(n) = coeffs.iter().position(|c| c.denom().is_multiple_of(&pb)) {
            return Err(format!("p = {p}: coefficient {n} is not p-integral"));
        }
        // E(x) ≡ exp(x) through degree p − 1.
        let mut fact = BigInt::from(1);
        for (n, c) in coeffs.iter().enumerate().take(p as usize) {
            if n > 0 {
                fact *= n;
            }
            if *c != Rational::new(BigInt::from(1), fact.clone()) {
                return Err(format!("p = {p}: coefficient {n} differs from 1/{n}!"));
            }
        }
    }
    Ok(())
}

/// Trace transitivity, equidistribution of absolute traces, and
/// pth_root inverting Frobenius, exhaustively on towers with p^{ak} ≤ 3^6.
pub fn field_traces() -> Result<(), String> {
    for (p, a, k) in [(3u32, 1usize, 2usize), (3, 2, 2), (3, 2, 3), (3, 3, 2), (5, 1, 3), (5, 2, 2), (7, 1, 3)] {
        let t = build_tower(p, a, k).map_err(|e| e.to_string())?;
        let mut counts = vec![0u64; p as usize];
        for x in t.enumerate(1 << 20).map_err(|e| e.to_string())?.iter() {
            let tr = x.absolute_trace();
            if x.relative_trace().base_trace() != tr {
                return Err(format!("trace transitivity fails for {x:?}"));
            }
            let r = x.pth_root();
            if r.frobenius() != x || x.frobenius().pth_root() != x {
                return Err(format!("pth_root is not inverse to Frobenius at {x:?}"));
            }
            counts[tr as usize] += 1;
        }
        let expected = (p as u64).pow((a * k) as u32 - 1);
        if counts.iter().any(|&c| c != expected) {
            return Err(format!("traces not equidistributed over F_{p}^{}: {counts:?}", a * k));
        }
    }
    Ok(())
}
