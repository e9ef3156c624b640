//! The fixed-point index axioms and the vector-field index properties as
//! executable tests on the displacement-winding construction.
//!
//! The fixed-point index here is the winding number of `x - f(retract(x))`
//! over the region contours; these tests pin down that it behaves like the
//! axiomatic index on the class of maps the crate works with.

use fieldindex_core::flow::FlowConfig;
use fieldindex_core::index::{
    fixed_point_index, index_at_zero, vector_field_index, HomotopyVerdict, IndexConfig, Region,
};
use fieldindex_core::*;

mod common;
use common::SplitMix;

fn cfg() -> IndexConfig {
    IndexConfig::default()
}

fn disk(r: f64) -> Surface {
    Surface::disk(Vec2::ZERO, r).unwrap()
}

/// FP1: the index only depends on the behavior near the fixed set; any
/// smaller region around it gives the same value.
#[test]
fn fp1_restriction_to_smaller_neighborhoods() {
    let surface = disk(1.0);
    let target = Vec2::new(0.3, -0.1);
    // contraction toward an interior point
    let f = |p: Vec2| Ok(target + (p - target) * 0.4);
    for (center, radius) in [
        (Vec2::ZERO, 0.8),
        (target, 0.3),
        (target, 0.05),
        (Vec2::new(0.25, -0.05), 0.2),
    ] {
        let region = Region::disk(center, radius, 64);
        let idx = fixed_point_index(f, &surface, &region, &cfg()).unwrap();
        assert_eq!(idx.value, 1, "region around {center:?} radius {radius}");
    }
}

/// FP2: empty fixed set gives 0, constant maps give 1.
#[test]
fn fp2_normalization() {
    let surface = disk(1.0);
    let region = Region::disk(Vec2::ZERO, 0.7, 64);
    let c = Vec2::new(-0.2, 0.3);
    let constant = fixed_point_index(|_| Ok(c), &surface, &region, &cfg()).unwrap();
    assert_eq!(constant.value, 1);
    // fixed-point free: contraction toward a point outside the region
    let outside = Vec2::new(0.95, 0.0);
    let free = fixed_point_index(
        |p| Ok(outside + (p - outside) * 0.05),
        &surface,
        &region,
        &cfg(),
    )
    .unwrap();
    assert_eq!(free.value, 0);
}

/// FP3: additivity over disjoint pieces of the region.
#[test]
fn fp3_additivity() {
    let surface = disk(2.0);
    // fixed points at (-1, 0) and (1, 0)
    let f = |p: Vec2| Ok(Vec2::new(p.x + 0.2 * (p.x * p.x - 1.0), 0.5 * p.y));
    let whole = Region::disk(Vec2::ZERO, 1.5, 96);
    let left = Region::disk(Vec2::new(-1.0, 0.0), 0.3, 64);
    let right = Region::disk(Vec2::new(1.0, 0.0), 0.3, 64);
    let i_whole = fixed_point_index(f, &surface, &whole, &cfg())
        .unwrap()
        .value;
    let i_left = fixed_point_index(f, &surface, &left, &cfg()).unwrap().value;
    let i_right = fixed_point_index(f, &surface, &right, &cfg())
        .unwrap()
        .value;
    // Df = diag(1 + 0.4 x, 0.5): x = -1 contracts (index +1), x = +1
    // expands in one direction (index -1)
    assert_eq!(i_left, 1);
    assert_eq!(i_right, -1);
    assert_eq!(i_whole, i_left + i_right);

    // a single region made of the two disjoint disks at once
    let both = Region::new(
        left.contours
            .iter()
            .chain(right.contours.iter())
            .cloned()
            .collect(),
    );
    let i_both = fixed_point_index(f, &surface, &both, &cfg()).unwrap().value;
    assert_eq!(i_both, i_left + i_right);
}

/// FP4 on product-form maps: the planar index of `(f1(x), f2(y))` is the
/// product of the one-dimensional indices `sign(1 - fi')`.
#[test]
fn fp4_multiplicativity_on_products() {
    let surface = disk(1.0);
    let region = Region::disk(Vec2::ZERO, 0.6, 64);
    let one_d = |slope: f64| (1.0 - slope).signum() as i64;
    for (a, d) in [(2.0, 0.5), (0.5, 0.5), (2.0, 2.0), (-2.0, 0.5), (-0.5, 3.0)] {
        let idx = fixed_point_index(
            |p| Ok(Vec2::new(a * p.x, d * p.y)),
            &surface,
            &region,
            &cfg(),
        )
        .unwrap();
        assert_eq!(idx.value, one_d(a) * one_d(d), "product map diag({a}, {d})");
    }
}

/// FP5: homotopy invariance while the fixed set stays compactly inside.
#[test]
fn fp5_homotopy_invariance() {
    let surface = disk(1.0);
    let region = Region::disk(Vec2::ZERO, 0.7, 64);
    let mut values = Vec::new();
    for i in 0..=10 {
        let t = f64::from(i) / 10.0;
        // rotation angle and contraction strength vary along the path;
        // the only fixed point stays at the origin throughout
        let mat = Mat2::rotation(0.3 + 0.9 * t);
        let scale = 0.5 + 0.3 * t;
        let idx =
            fixed_point_index(|p| Ok(mat.apply(p) * scale), &surface, &region, &cfg()).unwrap();
        values.push(idx.value);
    }
    assert!(values.windows(2).all(|w| w[0] == w[1]), "{values:?}");
}

/// FP6: for a C1 map with one hyperbolic fixed point the index is
/// (-1)^nu, nu = number of real eigenvalues above 1 (with multiplicity);
/// checked on seeded random linear maps against the sign-determinant
/// oracle, including negative and complex spectra.
#[test]
fn fp6_hyperbolic_linear_maps() {
    let surface = disk(1.0);
    let region = Region::disk(Vec2::ZERO, 0.6, 64);
    let mut rng = SplitMix::new(0x5eed_f00d);
    let mut done = 0;
    while done < 50 {
        let mat = Mat2::new(
            rng.in_range(-3.0, 3.0),
            rng.in_range(-3.0, 3.0),
            rng.in_range(-3.0, 3.0),
            rng.in_range(-3.0, 3.0),
        );
        let i_minus_a = Mat2::new(1.0 - mat.a, -mat.b, -mat.c, 1.0 - mat.d);
        // skip nearly-degenerate draws: an eigenvalue close to 1 makes
        // the displacement arbitrarily small on the contour
        if i_minus_a.det().abs() < 0.05 {
            continue;
        }
        let nu = mat
            .eigenvalues()
            .iter()
            .filter(|(re, im)| *im == 0.0 && *re > 1.0)
            .count();
        let expected = if nu % 2 == 0 { 1 } else { -1 };
        assert_eq!(
            i_minus_a.det().signum() as i64,
            expected,
            "oracle consistency for {mat:?}"
        );
        let idx = fixed_point_index(|p| Ok(mat.apply(p)), &surface, &region, &cfg()).unwrap();
        assert_eq!(idx.value, expected, "{mat:?}");
        done += 1;
    }
}

/// FP7: a map homotopic to the identity has index chi(S) over the whole
/// surface.
#[test]
fn fp7_lefschetz_normalization() {
    // disk: a contracting rotation, homotopic to the identity
    let surface = disk(1.0);
    let region = Region::full_surface(&surface);
    let mat = Mat2::rotation(0.2);
    let idx = fixed_point_index(|p| Ok(mat.apply(p) * 0.8), &surface, &region, &cfg()).unwrap();
    assert_eq!(idx.value, surface.euler_characteristic());

    // annulus: a pure rotation, fixed-point free, index chi = 0
    let surface = Surface::annulus(Vec2::ZERO, 0.5, 1.5).unwrap();
    let region = Region::full_surface(&surface);
    let idx = fixed_point_index(|p| Ok(mat.apply(p)), &surface, &region, &cfg()).unwrap();
    assert_eq!(idx.value, 0);
    assert_eq!(idx.value, surface.euler_characteristic());
}

/// Perturbation stability of the map index (the content of the
/// close-enough-maps lemma): nearby maps share the index.
#[test]
fn index_stable_under_small_map_perturbations() {
    let surface = disk(1.0);
    let region = Region::disk(Vec2::ZERO, 0.7, 64);
    let mat = Mat2::new(1.6, 0.3, -0.2, 0.4);
    let base = fixed_point_index(|p| Ok(mat.apply(p)), &surface, &region, &cfg()).unwrap();
    let eps = 0.1 * base.min_modulus;
    for dir in [
        Vec2::new(1.0, 0.0),
        Vec2::new(0.0, -1.0),
        Vec2::new(0.7, 0.7),
    ] {
        let shifted =
            fixed_point_index(|p| Ok(mat.apply(p) + dir * eps), &surface, &region, &cfg()).unwrap();
        assert_eq!(shifted.value, base.value);
    }
}

/// VF1: isomorphic germs give equal indices (a saddle and its translate).
#[test]
fn vf1_germ_invariance() {
    let fc = FlowConfig::default();
    let surface = disk(3.0);
    let saddle = parse_field("(x, -y)").unwrap();
    let moved = parse_field("(x - 1, -(y - 0.5))").unwrap();
    let i1 = vector_field_index(
        &saddle,
        &surface,
        &Region::disk(Vec2::ZERO, 0.3, 64),
        &fc,
        &cfg(),
    )
    .unwrap();
    let i2 = vector_field_index(
        &moved,
        &surface,
        &Region::disk(Vec2::new(1.0, 0.5), 0.3, 64),
        &fc,
        &cfg(),
    )
    .unwrap();
    assert_eq!(i1.value, i2.value);
    assert_eq!(i1.value, -1);
}

/// VF2: a nonzero index forces zeros inside the region; zero-free regions
/// report index 0.
#[test]
fn vf2_nonzero_index_needs_zeros() {
    let fc = FlowConfig::default();
    let surface = disk(2.0);
    let field = parse_field("(-y, x)").unwrap();
    // annular region avoiding the origin: no zeros, index 0
    let ring = Region::annulus(Vec2::ZERO, 0.5, 1.2, 96);
    let idx = vector_field_index(&field, &surface, &ring, &fc, &cfg()).unwrap();
    assert_eq!(idx.value, 0);
    // the disk region does contain the zero and indexes 1
    let around = Region::disk(Vec2::ZERO, 0.8, 64);
    let idx = vector_field_index(&field, &surface, &around, &fc, &cfg()).unwrap();
    assert_eq!(idx.value, 1);
    let scan = find_zeros(&field, &surface, 64).unwrap();
    assert!(!scan.zeros.is_empty(), "nonzero index needs a zero");
}

/// VF3: additivity of the vector-field index over disjoint pieces.
#[test]
fn vf3_vector_field_additivity() {
    let fc = FlowConfig::default();
    let surface = disk(3.0);
    let field = parse_field("(x^2 - 1, y)").unwrap();
    let left = Region::disk(Vec2::new(-1.0, 0.0), 0.3, 64);
    let right = Region::disk(Vec2::new(1.0, 0.0), 0.3, 64);
    let both = Region::new(
        left.contours
            .iter()
            .chain(right.contours.iter())
            .cloned()
            .collect(),
    );
    let i_left = vector_field_index(&field, &surface, &left, &fc, &cfg())
        .unwrap()
        .value;
    let i_right = vector_field_index(&field, &surface, &right, &fc, &cfg())
        .unwrap()
        .value;
    let i_both = vector_field_index(&field, &surface, &both, &fc, &cfg())
        .unwrap()
        .value;
    assert_eq!(i_left, -1);
    assert_eq!(i_right, 1);
    assert_eq!(i_both, i_left + i_right);
}

/// VF4: fields close on the region stay isolated and share the index.
#[test]
fn vf4_field_perturbation_stability() {
    let fc = FlowConfig::default();
    let surface = disk(2.0);
    let field = parse_field("(x^2 - y^2, 2*x*y)").unwrap();
    let region = Region::disk(Vec2::ZERO, 0.5, 64);
    let base = vector_field_index(&field, &surface, &region, &fc, &cfg()).unwrap();
    assert_eq!(base.value, 2);
    let eps = 0.1 * base.min_modulus;
    for dir in [Vec2::new(1.0, 0.0), Vec2::new(-0.5, 0.8)] {
        let perturbed = field.offset(dir * eps);
        let got = vector_field_index(&perturbed, &surface, &region, &fc, &cfg()).unwrap();
        assert_eq!(got.value, base.value);
    }
}

/// VF5: away from the boundary the vector-field index is the plain
/// winding-number index.
#[test]
fn vf5_agrees_with_poincare_hopf_in_the_interior() {
    let fc = FlowConfig::default();
    let surface = disk(2.0);
    for (src, expected) in [("(x, y)", 1i64), ("(x, -y)", -1), ("(x^2 - y^2, 2*x*y)", 2)] {
        let field = parse_field(src).unwrap();
        let region = Region::disk(Vec2::ZERO, 0.4, 64);
        let vf = vector_field_index(&field, &surface, &region, &fc, &cfg()).unwrap();
        let ph = index_at_zero(&field, Vec2::ZERO, 0.4, &cfg()).unwrap();
        assert_eq!(vf.value, ph.value, "{src}");
        assert_eq!(vf.value, expected, "{src}");
    }
}

/// Nonsingular homotopy of the boundary restrictions forces equal indices
/// in all three verdict flavors.
#[test]
fn homotopic_boundary_fields_share_the_index() {
    let fc = FlowConfig::default();
    let surface = disk(2.0);
    let region = Region::disk(Vec2::ZERO, 0.8, 64);
    let contour = &region.contours[0];

    let radial = parse_field("(x, y)").unwrap();
    let scaled = parse_field("(2*x, 2*y)").unwrap();
    let negated = parse_field("(-x, -y)").unwrap();
    let sheared = parse_field("(x + 0.3*y, y - 0.2*x)").unwrap();

    let cases = [
        (&scaled, HomotopyVerdict::IdenticalDirection),
        (&negated, HomotopyVerdict::Antipodal),
        (&sheared, HomotopyVerdict::StraightlineNonsingular),
    ];
    let base = vector_field_index(&radial, &surface, &region, &fc, &cfg()).unwrap();
    for (other, expected_verdict) in cases {
        let verdict = nonsingular_homotopy_check(&radial, other, contour).unwrap();
        assert_eq!(verdict, expected_verdict);
        let idx = vector_field_index(other, &surface, &region, &fc, &cfg()).unwrap();
        assert_eq!(idx.value, base.value, "verdict {verdict:?}");
    }
}
