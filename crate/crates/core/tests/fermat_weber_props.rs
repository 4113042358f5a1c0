mod common;

use common::{q, random_point, random_split, tree_point, Q};
use num_integer::gcd;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tropoclust_core::fermat_weber::{
    fw_polytrope, fw_polytrope_by_suprema, fw_value, tropical_median, Polytrope, SiteSet,
};
use tropoclust_core::lp::{solve_lp, LinearProgram, Relation};
use tropoclust_core::phylo::{PairIndexMap, PairVector, UltrametricVector, CoarseType};
use tropoclust_core::trop::{torus_eq, trop_hull_member};
use tropoclust_core::{Scalar, TorusPoint};

fn random_sites<R: Rng>(rng: &mut R, m: usize, n: usize) -> SiteSet<Q> {
    SiteSet::new((0..m).map(|_| random_point(rng, n, 30, 2)).collect()).unwrap()
}

#[test]
fn median_and_vertices_attain_the_optimum() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for trial in 0..60 {
        let n = [3, 6, 10][trial % 3];
        let m = 2 + trial % 6;
        let s = random_sites(&mut rng, m, n);
        let value = fw_value(&s).unwrap();
        let r = tropical_median(&s).unwrap();
        assert_eq!(r.fw_value, value);
        assert_eq!(s.total_distance(&r.median).unwrap(), value, "trial {trial}");
        for v in &r.vertices {
            assert_eq!(s.total_distance(v).unwrap(), value, "trial {trial}");
        }
        assert!(trop_hull_member(&r.median, s.sites()).unwrap().member, "trial {trial}");
    }
}

#[test]
fn median_survives_perturbation() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..5 {
        let s = random_sites(&mut rng, 4, 5);
        let r = tropical_median(&s).unwrap();
        for _ in 0..100 {
            let delta: Vec<Q> = (0..5).map(|_| q(rng.random_range(-10..=10), 1000)).collect();
            let moved: Vec<Q> = r.median.iter().zip(&delta).map(|(a, b)| a.clone() + b.clone()).collect();
            let moved = TorusPoint::new(moved).unwrap();
            assert!(s.total_distance(&moved).unwrap() >= r.fw_value);
        }
    }
}

/// Exhaustive minimum over the vertices of the line arrangement on which the
/// objective (with `t₂ = 0`) is piecewise linear.
fn breakpoint_minimum(s: &SiteSet<Q>) -> Q {
    let mut a = Vec::new();
    let mut b = Vec::new();
    let mut c = Vec::new();
    for x in s.sites() {
        a.push(x[0].clone() - x[2].clone());
        b.push(x[1].clone() - x[2].clone());
        c.push(x[0].clone() - x[1].clone());
    }
    let mut candidates = Vec::new();
    for ai in &a {
        for bi in &b {
            candidates.push((ai.clone(), bi.clone()));
        }
        for ci in &c {
            candidates.push((ai.clone(), ai.clone() - ci.clone()));
        }
    }
    for bi in &b {
        for ci in &c {
            candidates.push((bi.clone() + ci.clone(), bi.clone()));
        }
    }
    candidates
        .into_iter()
        .map(|(x, y)| {
            let t = TorusPoint::new(vec![x, y, Q::from_int(0)]).unwrap();
            s.total_distance(&t).unwrap()
        })
        .reduce(Q::min_of)
        .unwrap()
}

#[test]
fn value_matches_breakpoint_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for m in 1..=7 {
        for _ in 0..10 {
            let s = random_sites(&mut rng, m, 3);
            assert_eq!(fw_value(&s).unwrap(), breakpoint_minimum(&s));
        }
    }
    let s = SiteSet::<Q>::from_ints(&[&[1, 3, 0], &[0, 3, 1]]).unwrap();
    assert_eq!(breakpoint_minimum(&s), Q::from_int(2));
}

#[test]
fn closure_route_matches_pairwise_suprema() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for trial in 0..20 {
        let n = 3 + trial % 3;
        let m = 2 + trial % 4;
        let s = random_sites(&mut rng, m, n);
        assert_eq!(fw_polytrope(&s).unwrap(), fw_polytrope_by_suprema(&s).unwrap(), "trial {trial}");
    }
}

fn check_closed(p: &Polytrope<Q>) {
    let n = p.dim();
    for i in 0..n {
        assert_eq!(p.entry(i, i), &Q::from_int(0));
        for j in 0..n {
            assert!(p.entry(i, j).clone() + p.entry(j, i).clone() >= Q::from_int(0));
            for k in 0..n {
                assert!(p.entry(i, k).clone() <= p.entry(i, j).clone() + p.entry(j, k).clone());
            }
        }
    }
}

/// Classical vertices of the polytrope, found with random objectives, are
/// optimal and lie in the tropical hull of the tropical vertices.
#[test]
fn vertices_generate_the_polytrope() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for trial in 0..20 {
        let n = 3 + trial % 4;
        let m = 2 + trial % 5;
        let s = random_sites(&mut rng, m, n);
        let p = fw_polytrope(&s).unwrap();
        check_closed(&p);
        let value = fw_value(&s).unwrap();
        let vertices = p.tropical_vertices();
        for _ in 0..10 {
            let mut lp = LinearProgram::<Q>::new(n - 1);
            lp.objective = (0..n - 1).map(|_| q(rng.random_range(-9..=9), 1)).collect();
            for i in 0..n {
                for j in 0..n {
                    if i == j {
                        continue;
                    }
                    // t_j − t_i ≤ c[i][j] with t_{n−1} = 0.
                    let mut row = vec![Q::from_int(0); n - 1];
                    if j < n - 1 {
                        row[j] += Q::from_int(1);
                    }
                    if i < n - 1 {
                        row[i] -= Q::from_int(1);
                    }
                    lp.add_constraint(row, Relation::Le, p.entry(i, j).clone());
                }
            }
            let sol = solve_lp(&lp).unwrap();
            let mut t = sol.solution.clone();
            t.push(Q::from_int(0));
            let t = TorusPoint::new(t).unwrap();
            assert_eq!(s.total_distance(&t).unwrap(), value, "trial {trial}");
            assert!(trop_hull_member(&t, &vertices).unwrap().member, "trial {trial}");
        }
    }
}

#[test]
fn coprime_sizes_give_a_single_point() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for (m, n) in [(2, 3), (4, 3), (5, 6), (3, 10), (7, 6)] {
        for _ in 0..5 {
            let s = random_sites(&mut rng, m, n);
            assert_eq!(fw_polytrope(&s).unwrap().dimension(), 0);
        }
    }
}

fn ultrametric(p: &TorusPoint<Q>) -> UltrametricVector<Q> {
    let map = PairIndexMap::for_len(p.len()).unwrap();
    UltrametricVector::new(PairVector::from_point(map, p).unwrap()).unwrap()
}

#[test]
fn dimension_bound_for_tree_sites() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for trial in 0..60 {
        let n_taxa = 3 + trial % 3;
        let n = n_taxa * (n_taxa - 1) / 2;
        let m = 1 + trial % 12;
        let sites: Vec<TorusPoint<Q>> = (0..m)
            .map(|_| {
                let blocks = random_split(&mut rng, n_taxa);
                tree_point(&mut rng, &blocks, 0.1, 1.0)
            })
            .collect();
        let s = SiteSet::new(sites).unwrap();
        let r = tropical_median(&s).unwrap();
        let bound = (n_taxa - 1).min(gcd(m, n)) - 1;
        assert!(r.dimension <= bound, "trial {trial}: {} > {bound}", r.dimension);
    }
}

#[test]
fn median_keeps_the_common_coarse_type() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for trial in 0..40 {
        let n_taxa = 4 + trial % 3;
        let blocks = random_split(&mut rng, n_taxa);
        let m = 2 + trial % 5;
        let sites: Vec<TorusPoint<Q>> =
            (0..m).map(|_| tree_point(&mut rng, &blocks, 0.1, 1.0)).collect();
        let s = SiteSet::new(sites).unwrap();
        let r = tropical_median(&s).unwrap();
        let u = ultrametric(&r.median);
        assert_eq!(u.coarse_type(), CoarseType::new(blocks), "trial {trial}");
    }
}

#[test]
fn float_and_exact_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..20 {
        let s = random_sites(&mut rng, 5, 6);
        let f = SiteSet::new(s.sites().iter().map(|p| TorusPoint::new(p.to_f64()).unwrap()).collect()).unwrap();
        let exact = tropical_median(&s).unwrap();
        let float = tropical_median(&f).unwrap();
        assert!((exact.fw_value.to_f64_lossy() - float.fw_value).abs() < 1e-6);
        let back = TorusPoint::new(exact.median.to_f64()).unwrap();
        assert!(torus_eq(&back, &float.median));
    }
}
