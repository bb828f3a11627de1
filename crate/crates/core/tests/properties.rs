use gapforge_core::criteria::{analyze_patches, knabe_local_bound, knabe_threshold, meet_kernel, meet_projector};
use gapforge_core::hardcore::{
    certify_positivity, cluster_lower_bound, evaluate_z, independence_polynomial, ENUMERATION_BUDGET,
};
use gapforge_core::lattice::{build_chain, build_rect_lattice, enumerate_patches, Boundary, Edge, Family, Graph};
use gapforge_core::linalg::{dot, symmetric_eigenvalues, Matrix};
use gapforge_core::operators::{assemble, patch_hamiltonian};
use gapforge_core::sampler::{haar_orthogonal, sample_projector, ProjectorFrame, RngStream};
use proptest::prelude::*;

fn random_graph(n: usize, mask: u64) -> Graph {
    let mut edges = Vec::new();
    let mut bit = 0;
    for i in 0..n {
        for j in i + 1..n {
            if mask >> (bit % 64) & 1 == 1 {
                edges.push(Edge { tail: i, head: j, ty: 1 });
            }
            bit += 1;
        }
    }
    Graph::new((0..n).map(|i| vec![i as i64]).collect(), edges, Boundary::Open, Family::Custom, Some(1), None).unwrap()
}

fn brute_force_counts(g: &Graph) -> Vec<u64> {
    let n = g.num_vertices();
    let mut counts = vec![0u64; n + 1];
    for s in 0u64..1 << n {
        if g.edges().iter().all(|e| s >> e.tail & 1 == 0 || s >> e.head & 1 == 0) {
            counts[s.count_ones() as usize] += 1;
        }
    }
    while counts.len() > 1 && *counts.last().unwrap() == 0 {
        counts.pop();
    }
    counts
}

fn rotate(frame: &ProjectorFrame, u: &Matrix) -> ProjectorFrame {
    let d = frame.d();
    let cols = frame
        .columns()
        .iter()
        .map(|v| {
            let mut w = vec![0.0; d * d];
            for a in 0..d {
                for b in 0..d {
                    for (c, x) in v.iter().enumerate() {
                        w[a * d + b] += u[(a, c / d)] * u[(b, c % d)] * x;
                    }
                }
            }
            w
        })
        .collect();
    ProjectorFrame::new(d, cols).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn sampled_frames_are_orthonormal_projectors(seed in any::<u64>(), d in 2usize..6, r in 1usize..5) {
        let r = r.min(d * d);
        let f = sample_projector(d, r, &mut RngStream::new(seed, 0)).unwrap();
        prop_assert!(f.gram_deviation() < 1e-12);
        let p = f.projector();
        prop_assert!(p.matmul(&p).sub(&p).max_abs() < 1e-12);
        prop_assert!((p.trace() - r as f64).abs() < 1e-12);
    }

    #[test]
    fn hamiltonian_is_symmetric_and_positive(seed in any::<u64>(), sites in 2usize..6, r in 1usize..4) {
        let d = 2;
        let g = build_chain(sites, Boundary::Open).unwrap();
        let mut rng = RngStream::new(seed, 1);
        let frames = [sample_projector(d, r, &mut rng).unwrap()];
        let h = assemble(&g, d, &frames).unwrap();
        let x = rng.gaussian_vec(h.dim());
        let y = rng.gaussian_vec(h.dim());
        let (hx, hy) = (h.matvec(&x).unwrap(), h.matvec(&y).unwrap());
        prop_assert!((dot(&x, &hy) - dot(&hx, &y)).abs() < 1e-10 * (1.0 + dot(&x, &hy).abs()));
        prop_assert!(dot(&x, &hx) >= -1e-10);
        // ‖H‖ ≤ |E|: each term is a projector
        let hn = dot(&hx, &hx).sqrt() / dot(&x, &x).sqrt();
        prop_assert!(hn <= g.num_edges() as f64 + 1e-9);
    }

    #[test]
    fn gamma3_matches_dense_patches_and_is_basis_invariant(seed in any::<u64>(), r in 1usize..3) {
        let d = 3;
        let g = build_rect_lattice(&[2, 3], Boundary::Open).unwrap();
        let mut rng = RngStream::new(seed, 2);
        let frames: Vec<_> = (0..2).map(|_| sample_projector(d, r, &mut rng).unwrap()).collect();
        let report = analyze_patches(&frames, d, &g).unwrap();
        prop_assume!(!report.frustrated);
        let mut oracle = f64::INFINITY;
        for patch in enumerate_patches(&g) {
            let m = patch_hamiltonian(&g, &patch, &frames, d).unwrap();
            let vals = symmetric_eigenvalues(&m).unwrap();
            if let Some(&v) = vals.iter().find(|&&v| v >= 1e-8) {
                oracle = oracle.min(v);
            }
        }
        prop_assert!((report.gamma3 - oracle).abs() < 1e-9);
        let u = haar_orthogonal(d, &mut rng).unwrap();
        let rotated: Vec<_> = frames.iter().map(|f| rotate(f, &u)).collect();
        let again = analyze_patches(&rotated, d, &g).unwrap();
        prop_assert!((again.gamma3 - report.gamma3).abs() < 1e-9);
        prop_assert!(report.gamma3_lower() <= report.gamma3 + 1e-9);
    }

    #[test]
    fn meet_is_a_projector_below_both(seed in any::<u64>(), shared in 0usize..3) {
        let n = 8;
        let mut rng = RngStream::new(seed, 3);
        let basis = haar_orthogonal(n, &mut rng).unwrap();
        let q_basis = haar_orthogonal(n - shared, &mut rng).unwrap();
        // P contains the shared block plus two directions; Q contains the shared block plus two others
        let col = |k: usize| basis.column(k);
        let mut p_cols: Vec<Vec<f64>> = (0..shared).map(col).collect();
        p_cols.extend((shared..shared + 2).map(col));
        let rest: Vec<Vec<f64>> = (shared..n).map(col).collect();
        let mut q_cols: Vec<Vec<f64>> = (0..shared).map(col).collect();
        for k in 0..2 {
            let mut v = vec![0.0; n];
            for (i, b) in rest.iter().enumerate() {
                for (x, y) in v.iter_mut().zip(b) {
                    *x += q_basis[(i, k)] * y;
                }
            }
            q_cols.push(v);
        }
        let proj = |cols: &[Vec<f64>]| {
            let m = Matrix::from_columns(cols);
            m.matmul(&m.transpose())
        };
        let (p, q) = (proj(&p_cols), proj(&q_cols));
        let meet = meet_projector(&p, &q, 1e-12, 200).unwrap().projector;
        let kernel = meet_kernel(&p, &q, 1e-8).unwrap();
        prop_assert!(meet.sub(&kernel).max_abs() < 1e-8);
        prop_assert!(meet.matmul(&meet).sub(&meet).max_abs() < 1e-8);
        prop_assert!(p.matmul(&meet).sub(&meet).max_abs() < 1e-8);
        prop_assert!(q.matmul(&meet).sub(&meet).max_abs() < 1e-8);
        prop_assert!((meet.trace() - shared as f64).abs() < 1e-8);
    }

    #[test]
    fn independence_polynomial_matches_brute_force(n in 0usize..14, mask in any::<u64>()) {
        let g = random_graph(n, mask);
        let p = independence_polynomial(&g).unwrap();
        prop_assert_eq!(&p.coefficients, &brute_force_counts(&g));
        prop_assert_eq!(p.coefficients[0], 1);
        if n > 0 {
            prop_assert_eq!(p.coefficients[1], n as u64);
        }
    }

    #[test]
    fn cluster_bound_holds_in_the_kp_regime(n in 1usize..14, mask in any::<u64>(), t in 0.0f64..1.0) {
        let g = random_graph(n, mask);
        prop_assume!(n <= ENUMERATION_BUDGET);
        let poly = independence_polynomial(&g).unwrap();
        let delta = g.max_degree() + 1;
        let p = t * (-1.0f64).exp() / delta as f64;
        let z = evaluate_z(&poly, -p);
        prop_assert!(z + 1e-12 >= cluster_lower_bound(n, delta, p).unwrap());
        if p > 0.0 {
            prop_assert!(certify_positivity(&poly, p).unwrap().certified);
        }
    }

    #[test]
    fn knabe_bound_is_affine_with_unit_value_at_one(delta in 2usize..10, g3 in 0.0f64..1.0) {
        let t = knabe_threshold(delta).unwrap();
        let k = (2 * delta - 2) as f64;
        prop_assert!((t - (k - 1.0) / k).abs() < 1e-15);
        prop_assert!((knabe_local_bound(1.0, delta).unwrap() - 1.0).abs() < 1e-12);
        prop_assert!((knabe_local_bound(g3, delta).unwrap() - k * (g3 - t)).abs() < 1e-12);
        prop_assert!(knabe_local_bound(t, delta).unwrap().abs() < 1e-12);
    }
}
