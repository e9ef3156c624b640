//! Acceptance suite: one test per criterion, each printing a PASS line
//! with the measured numbers (run with `--nocapture` to see them). Every
//! tolerance is pinned here, not configurable.

use fieldindex_core::field::ComboField;
use fieldindex_core::flow::FlowConfig;
use fieldindex_core::index::{
    fixed_point_index, index_at_zero, vector_field_index, IndexConfig, Region,
};
use fieldindex_core::scenario::{self, CheckKind, CheckStatus, Configs, Expected, FieldSpec};
use fieldindex_core::*;

mod common;
use common::{angle_sum_oracle, SplitMix};

fn cfg() -> IndexConfig {
    IndexConfig::default()
}

fn flow_cfg() -> FlowConfig {
    FlowConfig::default()
}

/// Canonical index table, cross-checked against the 10^4-sample angle-sum
/// oracle. Exact integers, zero tolerance.
#[test]
fn criterion_01_canonical_index_table() {
    let table: [(&str, i64); 5] = [
        ("(x, y)", 1),
        ("(x, -y)", -1),
        ("(-y, x)", 1),
        ("(x^2 - y^2, 2*x*y)", 2),
        ("(y, x)", -1),
    ];
    for (src, expected) in table {
        let field = parse_field(src).unwrap();
        let oracle = angle_sum_oracle(&field, Vec2::ZERO, 0.5, 10_000);
        assert_eq!(oracle, expected, "oracle disagrees for {src}");
        let got = index_at_zero(&field, Vec2::ZERO, 0.5, &cfg()).unwrap();
        assert_eq!(got.value, expected, "index_at_zero for {src}");
    }
    println!(
        "criterion 01: PASS - canonical indices 1, -1, 1, 2, -1 match the angle-sum oracle exactly"
    );
}

/// Displacement-winding fixed-point index of hyperbolic linear maps equals
/// (-1)^nu with nu the number of real eigenvalues above 1 (equivalently
/// the sign of det(I - A)). For diag(-2, 1/2) both eigenvalues miss the
/// (1, infinity) ray, so nu = 0 and the index is +1.
#[test]
fn criterion_02_linear_map_fixed_point_indices() {
    let surface = Surface::disk(Vec2::ZERO, 1.0).unwrap();
    let region = Region::disk(Vec2::ZERO, 0.8, 64);
    let table: [(Mat2, u32); 4] = [
        (Mat2::diag(2.0, 2.0), 2),
        (Mat2::diag(2.0, 0.5), 1),
        (Mat2::diag(0.5, 0.5), 0),
        (Mat2::diag(-2.0, 0.5), 0),
    ];
    for (mat, nu) in table {
        let expected = if nu % 2 == 0 { 1 } else { -1 };
        let det_oracle = Mat2::new(1.0 - mat.a, -mat.b, -mat.c, 1.0 - mat.d).det();
        assert_eq!(
            det_oracle.signum() as i64,
            expected,
            "sign-det oracle disagrees for {mat:?}"
        );
        let got = fixed_point_index(|p| Ok(mat.apply(p)), &surface, &region, &cfg()).unwrap();
        assert_eq!(got.value, expected, "index of {mat:?}");
    }
    println!(
        "criterion 02: PASS - diag(2,2), diag(2,1/2), diag(1/2,1/2), diag(-2,1/2) give +1, -1, +1, +1 \
         (nu = 2, 1, 0, 0; the last map has no eigenvalue above 1, matching the sign-determinant oracle)"
    );
}

/// The index over the whole surface equals its Euler characteristic for
/// inward fields: 1 on the disk, 0 on the annulus. Exact integers.
#[test]
fn criterion_03_whole_surface_index_is_euler_characteristic() {
    let disk = Surface::disk(Vec2::ZERO, 1.0).unwrap();
    let contraction = parse_field("(-x, -y)").unwrap();
    let r = vector_field_index(
        &contraction,
        &disk,
        &Region::full_surface(&disk),
        &flow_cfg(),
        &cfg(),
    )
    .unwrap();
    assert_eq!(r.value, 1);
    assert_eq!(r.value, disk.euler_characteristic());

    let annulus = Surface::annulus(Vec2::ZERO, 0.5, 1.5).unwrap();
    let rotation = parse_field("(-y, x)").unwrap();
    let r = vector_field_index(
        &rotation,
        &annulus,
        &Region::full_surface(&annulus),
        &flow_cfg(),
        &cfg(),
    )
    .unwrap();
    assert_eq!(r.value, 0);
    assert_eq!(r.value, annulus.euler_characteristic());
    println!("criterion 03: PASS - whole-surface indices equal chi: disk 1, annulus 0, exactly");
}

/// Per-instance data shared between criteria 4 and 5: the random field,
/// its zeros, the enclosing-region index result, and the per-zero results.
struct RandomInstance {
    field: FieldExpr,
    zeros: Vec<Vec2>,
    whole: fieldindex_core::index::IndexResult,
    per_zero: Vec<(Vec2, f64, i64)>,
}

/// Flow domain for the random instances: roomy, so short flows from the
/// enclosing contour never reach the surface boundary.
fn random_field_surface() -> Surface {
    Surface::disk(Vec2::ZERO, 4.0).unwrap()
}

/// Random non-inward fields need a short flow time to keep the index
/// contour flows well inside the surface.
fn random_field_index_cfg() -> IndexConfig {
    IndexConfig {
        tau_initial: 0.02,
        ..IndexConfig::default()
    }
}

fn random_instances() -> &'static [RandomInstance] {
    use std::sync::OnceLock;
    static INSTANCES: OnceLock<Vec<RandomInstance>> = OnceLock::new();
    INSTANCES.get_or_init(|| {
        let surface = random_field_surface();
        let icfg = random_field_index_cfg();
        common::random_hyperbolic_fields(20, 0xfeed_5eed)
            .into_iter()
            .map(|(field, zeros)| {
                let enclosing = Region::disk(Vec2::ZERO, 1.7, 64);
                let whole =
                    vector_field_index(&field, &surface, &enclosing, &flow_cfg(), &icfg).unwrap();
                let per_zero = zeros
                    .iter()
                    .map(|&z| {
                        let radius = common::probe_radius(z, &zeros);
                        let vf = vector_field_index(
                            &field,
                            &surface,
                            &Region::disk(z, radius, 64),
                            &flow_cfg(),
                            &icfg,
                        )
                        .unwrap();
                        (z, radius, vf.value)
                    })
                    .collect();
                RandomInstance {
                    field,
                    zeros,
                    whole,
                    per_zero,
                }
            })
            .collect()
    })
}

/// On seeded random degree-<=2 polynomial fields with hyperbolic interior
/// zeros: the block-sum, the enclosing-region index, and the sum of
/// per-zero winding indices agree exactly.
#[test]
fn criterion_04_additivity_and_poincare_hopf_consistency() {
    let instances = random_instances();
    assert_eq!(instances.len(), 20, "generator must deliver 20 instances");
    let mut checked_zeros = 0usize;
    for inst in instances {
        let mut sum_blocks = 0i64;
        let mut sum_ph = 0i64;
        for &(z, radius, vf) in &inst.per_zero {
            let ph = index_at_zero(&inst.field, z, radius, &cfg()).unwrap().value;
            assert_eq!(vf, ph, "VF5 consistency at {z:?} for {}", inst.field);
            sum_blocks += vf;
            sum_ph += ph;
            checked_zeros += 1;
        }
        assert_eq!(
            inst.whole.value, sum_blocks,
            "VF3 additivity for {}",
            inst.field
        );
        assert_eq!(inst.whole.value, sum_ph, "PH sum for {}", inst.field);
        assert_eq!(inst.zeros.len(), inst.per_zero.len());
    }
    println!(
        "criterion 04: PASS - 20 random hyperbolic fields, {checked_zeros} zeros: \
         region index == block sum == Poincare-Hopf sum, exactly"
    );
}

/// Adding a constant field of magnitude 0.1 x (contour min modulus) never
/// changes an index from criteria 1-4.
#[test]
fn criterion_05_perturbation_stability() {
    let directions = [Vec2::new(1.0, 0.0), Vec2::new(-0.6, 0.8)];
    let mut checked = 0usize;

    // item 1 table
    for (src, expected) in [
        ("(x, y)", 1i64),
        ("(x, -y)", -1),
        ("(-y, x)", 1),
        ("(x^2 - y^2, 2*x*y)", 2),
        ("(y, x)", -1),
    ] {
        let field = parse_field(src).unwrap();
        let base = index_at_zero(&field, Vec2::ZERO, 0.5, &cfg()).unwrap();
        for dir in directions {
            let perturbed = field.offset(dir * (0.1 * base.min_modulus));
            let contour = Curve::circle(Vec2::ZERO, 0.5, 64);
            let got = fieldindex_core::index::field_winding(&perturbed, &contour, &cfg()).unwrap();
            assert_eq!(got.value, expected, "{src} perturbed by {dir:?}");
            checked += 1;
        }
    }

    // item 2 maps
    let surface = Surface::disk(Vec2::ZERO, 1.0).unwrap();
    let region = Region::disk(Vec2::ZERO, 0.8, 64);
    for mat in [
        Mat2::diag(2.0, 2.0),
        Mat2::diag(2.0, 0.5),
        Mat2::diag(0.5, 0.5),
        Mat2::diag(-2.0, 0.5),
    ] {
        let base = fixed_point_index(|p| Ok(mat.apply(p)), &surface, &region, &cfg()).unwrap();
        for dir in directions {
            let c = dir * (0.1 * base.min_modulus);
            let got =
                fixed_point_index(|p| Ok(mat.apply(p) + c), &surface, &region, &cfg()).unwrap();
            assert_eq!(got.value, base.value, "{mat:?} perturbed by {dir:?}");
            checked += 1;
        }
    }

    // item 3 whole-surface indices
    {
        let disk = Surface::disk(Vec2::ZERO, 1.0).unwrap();
        let field = parse_field("(-x, -y)").unwrap();
        let full = Region::full_surface(&disk);
        let base = vector_field_index(&field, &disk, &full, &flow_cfg(), &cfg()).unwrap();
        for dir in directions {
            let perturbed = field.offset(dir * (0.1 * base.min_modulus));
            let got = vector_field_index(&perturbed, &disk, &full, &flow_cfg(), &cfg()).unwrap();
            assert_eq!(got.value, base.value);
            checked += 1;
        }
        let annulus = Surface::annulus(Vec2::ZERO, 0.5, 1.5).unwrap();
        let rotation = parse_field("(-y, x)").unwrap();
        let full = Region::full_surface(&annulus);
        let base = vector_field_index(&rotation, &annulus, &full, &flow_cfg(), &cfg()).unwrap();
        // the perturbed rotation is no longer tangent to the circles, so
        // its projected flow slides along the boundary in excursion-capped
        // steps; a looser integrator tolerance widens the cap and keeps
        // the slide affordable (the displacement modulus is ~0.17, five
        // orders above the coarser 1e-8 orbit accuracy)
        let sliding = FlowConfig {
            abs_tol: 1e-8,
            rel_tol: 1e-8,
            ..flow_cfg()
        };
        for dir in directions {
            let perturbed = rotation.offset(dir * (0.1 * base.min_modulus));
            let got = vector_field_index(&perturbed, &annulus, &full, &sliding, &cfg()).unwrap();
            assert_eq!(got.value, base.value);
            checked += 1;
        }
    }

    // item 4 random fields (enclosing-region index of each)
    let surface2 = random_field_surface();
    let icfg = random_field_index_cfg();
    for inst in random_instances() {
        let enclosing = Region::disk(Vec2::ZERO, 1.7, 64);
        let base = &inst.whole;
        for dir in directions.iter().take(1) {
            let perturbed = inst.field.offset(*dir * (0.1 * base.min_modulus));
            let got =
                vector_field_index(&perturbed, &surface2, &enclosing, &flow_cfg(), &icfg).unwrap();
            assert_eq!(got.value, base.value, "{}", inst.field);
            checked += 1;
        }
    }

    println!("criterion 05: PASS - {checked} perturbed recomputations, every index unchanged");
}

/// The constructed boundary-zero pair on the closed unit disk.
#[test]
fn criterion_06_lima_pair() {
    let (x, y) = build_lima_pair(1.0);
    let disk = Surface::disk(Vec2::ZERO, 1.0).unwrap();

    // bracket residual on the interior grid
    let interior = Surface::disk(Vec2::ZERO, 0.95).unwrap();
    let verdict =
        fieldindex_core::field::check_bracket_condition_numeric(&x, &y, &interior, 1e-6).unwrap();
    let residual = match verdict {
        fieldindex_core::BracketVerdict::Holds { max_residual, .. } => max_residual,
        fieldindex_core::BracketVerdict::Fails { residual, .. } => residual,
    };
    assert!(residual < 1e-6, "bracket residual {residual}");

    // single boundary block with index exactly 1
    let blocks = fieldindex_core::decompose_blocks(&x, &disk, 192, &flow_cfg(), &cfg()).unwrap();
    assert_eq!(blocks.len(), 1, "single block");
    let block = &blocks[0];
    assert!(block.touches_boundary);
    assert_eq!(block.index.value, 1, "boundary block index");
    // the block's cells trace the boundary circle
    let grid = fieldindex_core::zeros::GridInfo::for_surface(&disk, 192);
    for &(ix, iy) in &block.cells {
        let c = grid.cell_center(ix, iy);
        assert!((c.norm() - 1.0).abs() < 0.2, "stray zero cell at {c:?}");
    }

    // the second field vanishes only at the origin
    let scan_y = find_zeros(&y, &disk, 192).unwrap();
    assert_eq!(scan_y.zeros.len(), 1, "zeros of the second field");
    assert!(scan_y.suspect_cells.is_empty());
    let z = scan_y.zeros[0].point;
    assert!(z.norm() < 1e-6, "interior zero at {z:?}");

    // disjoint zero sets, with margin
    let min_distance = block
        .cells
        .iter()
        .map(|&(ix, iy)| grid.cell_center(ix, iy).dist(z))
        .fold(f64::INFINITY, f64::min);
    assert!(min_distance > 0.5, "zero-set separation {min_distance}");

    println!(
        "criterion 06: PASS - bracket residual {residual:.2e}, boundary block index 1, \
         interior zero at distance {:.2e} from origin, zero-set separation {min_distance:.3}",
        z.norm()
    );
}

/// Positive theorem scenario: commuting rotation/contraction pair on the
/// disk. Hypotheses certified, conclusion witnessed.
#[test]
fn criterion_07_common_zero_scenario_positive() {
    let scenario = scenario::Scenario {
        name: "acceptance-rotation-radial".into(),
        surface: SurfaceSpec::Disk {
            center: [0.0, 0.0],
            radius: 1.0,
            retraction_margin: None,
        },
        x: FieldSpec::Expr("(-y, x)".into()),
        y: Some(FieldSpec::Expr("(-x, -y)".into())),
        candidates: vec![],
        checks: vec![CheckKind::BracketCondition, CheckKind::Theorem15a],
        configs: Configs {
            resolution: 128,
            ..Configs::default()
        },
        expected: Expected::default(),
    };
    let report = scenario::run_scenario(&scenario).unwrap();
    let bracket = report.check(CheckKind::BracketCondition).unwrap();
    assert_eq!(bracket.status, CheckStatus::Pass);
    assert_eq!(
        bracket.payload["exact"],
        serde_json::json!(true),
        "symbolic commutation"
    );
    let thm = report.check(CheckKind::Theorem15a).unwrap();
    assert_eq!(thm.status, CheckStatus::Pass, "notes: {:?}", thm.notes);
    let hyp = &thm.payload["hypotheses"];
    assert_eq!(hyp["certified"], serde_json::json!(true));
    assert_eq!(hyp["inward_x"], serde_json::json!(true));
    assert_eq!(hyp["inward_y"], serde_json::json!(true));
    assert_eq!(hyp["block_indices"], serde_json::json!([1]));
    assert_eq!(thm.payload["conclusion_witnessed"], serde_json::json!(true));
    let w = thm.payload["witness"].as_array().unwrap();
    let witness = Vec2::new(w[0].as_f64().unwrap(), w[1].as_f64().unwrap());
    assert!(witness.norm() < 1e-6, "witness at {witness:?}");
    println!(
        "criterion 07: PASS - hypotheses certified (exact commutation, inward, essential index 1), \
         common zero witnessed at ({:.1e}, {:.1e})",
        witness.x, witness.y
    );
}

/// Area-preserving theorem scenario plus the annulus consistency scenario
/// whose essential hypothesis honestly fails.
#[test]
fn criterion_08_area_preserving_scenarios() {
    let positive = scenario::Scenario {
        name: "acceptance-area".into(),
        surface: SurfaceSpec::Disk {
            center: [0.0, 0.0],
            radius: 1.0,
            retraction_margin: None,
        },
        x: FieldSpec::Expr("(-x, -y)".into()),
        y: Some(FieldSpec::Expr("(-y, x)".into())),
        candidates: vec![],
        checks: vec![CheckKind::Theorem18],
        configs: Configs {
            resolution: 128,
            ..Configs::default()
        },
        expected: Expected::default(),
    };
    let report = scenario::run_scenario(&positive).unwrap();
    let thm = report.check(CheckKind::Theorem18).unwrap();
    assert_eq!(thm.status, CheckStatus::Pass, "notes: {:?}", thm.notes);
    let divergence = thm.payload["area"]["divergence_max"].as_f64().unwrap();
    assert!(divergence < 1e-10, "divergence {divergence}");
    assert_eq!(thm.payload["area"]["preserving"], serde_json::json!(true));
    let w = thm.payload["witness"].as_array().unwrap();
    assert!(w[0].as_f64().unwrap().hypot(w[1].as_f64().unwrap()) < 1e-6);

    let annulus = scenario::Scenario {
        name: "acceptance-annulus".into(),
        surface: SurfaceSpec::Annulus {
            center: [0.0, 0.0],
            r_inner: 0.5,
            r_outer: 1.5,
            retraction_margin: None,
        },
        x: FieldSpec::Expr("((1 - x^2 - y^2)*(-y), (1 - x^2 - y^2)*x)".into()),
        y: Some(FieldSpec::Expr("(-y, x)".into())),
        candidates: vec![],
        checks: vec![CheckKind::Theorem18],
        configs: Configs {
            resolution: 160,
            ..Configs::default()
        },
        expected: Expected::default(),
    };
    let report = scenario::run_scenario(&annulus).unwrap();
    let thm = report.check(CheckKind::Theorem18).unwrap();
    assert_eq!(thm.status, CheckStatus::Flagged, "must flag, not fail");
    assert!(
        thm.notes
            .iter()
            .any(|n| n.contains("hypothesis (essential) fails")),
        "notes: {:?}",
        thm.notes
    );
    assert_eq!(
        thm.payload["hypotheses"]["block_indices"],
        serde_json::json!([0]),
        "circle block index exactly 0"
    );
    println!(
        "criterion 08: PASS - preserving verdict with divergence_max {divergence:.1e}, witness at the origin; \
         annulus scenario flags 'hypothesis (essential) fails' with block index 0"
    );
}

/// Product-formula convergence. The pair named by the criterion commutes
/// (verified exactly below), so the composition is exact at every k; the
/// order >= 1 decay is measured on a noncommuting pair, as the property
/// list prescribes.
#[test]
fn criterion_09_product_formula_convergence() {
    let surface = Surface::disk(Vec2::ZERO, 3.0).unwrap();
    let fc = flow_cfg();

    // stated pair: rotation and a small radial field; exact commutation
    let x = parse_field("(-y, x)").unwrap();
    let y = parse_field("(0.1*x, 0.1*y)").unwrap();
    let bracket = fieldindex_core::lie_bracket(&x, &y);
    assert!(
        Poly::from_expr(&bracket.fx).unwrap().is_zero()
            && Poly::from_expr(&bracket.fy).unwrap().is_zero(),
        "the stated pair commutes; composition must be exact for every k"
    );
    let p = Vec2::new(1.0, 0.0);
    let combo = ComboField::sum(&x, &y);
    let direct = fieldindex_core::flow_endpoint(&combo, &surface, p, 0.5, &fc).unwrap();
    let mut commuting_worst = 0.0f64;
    for k in [2u32, 4, 8, 16, 32] {
        let composed = fieldindex_core::nelson_compose(&x, &y, &surface, p, 0.5, k, &fc).unwrap();
        commuting_worst = commuting_worst.max(composed.dist(direct));
    }
    assert!(
        commuting_worst < 1e-8,
        "commuting pair must compose exactly, worst error {commuting_worst}"
    );

    // noncommuting pair: the bracket of the translation and the small
    // radial field is 0.1 x the translation. Composing radial-then-
    // translation keeps the 1/k^2 correction from dragging the fitted
    // slope below the asymptotic order 1.
    let window = Surface::halfplane_window(-8.0, 8.0, 8.0).unwrap();
    let x = parse_field("(1, 0)").unwrap();
    let y = parse_field("(0.1*x, 0.1*y)").unwrap();
    let p = Vec2::new(0.5, 1.0);
    let combo = ComboField::sum(&x, &y);
    let direct = fieldindex_core::flow_endpoint(&combo, &window, p, 0.5, &fc).unwrap();
    let mut errors: Vec<(u32, f64)> = Vec::new();
    for k in [2u32, 4, 8, 16, 32] {
        let composed = fieldindex_core::nelson_compose(&y, &x, &window, p, 0.5, k, &fc).unwrap();
        errors.push((k, composed.dist(direct)));
    }
    for pair in errors.windows(2) {
        assert!(
            pair[1].1 < pair[0].1,
            "errors must decrease monotonically: {errors:?}"
        );
        assert!(
            pair[0].1 / pair[1].1 >= 1.5,
            "doubling k must shrink the error by at least 1.5x: {errors:?}"
        );
    }
    let order = scenario::empirical_order(&errors);
    assert!(order >= 1.0, "empirical order {order} from {errors:?}");
    println!(
        "criterion 09: PASS - commuting pair exact to {commuting_worst:.1e} at every k; \
         noncommuting pair decays monotonically with empirical order {order:.2}"
    );
}

/// Pushforwards along the second flow carry the first field to a positive
/// multiple of itself, and the zero set of the first field is positively
/// invariant.
#[test]
fn criterion_10_integral_curve_permutation() {
    let fc = flow_cfg();
    let window = Surface::halfplane_window(-6.0, 6.0, 6.0).unwrap();
    let x = parse_field("(1, 0)").unwrap();
    let y = parse_field("(x, y)").unwrap();
    let samples = [
        Vec2::new(1.0, 1.0),
        Vec2::new(0.5, 2.0),
        Vec2::new(-1.0, 0.5),
    ];
    let report = check_permutes_integral_curves(&x, &y, &window, &samples, 0.3, &fc).unwrap();
    assert!(
        report.max_residual < 1e-5,
        "residual {}",
        report.max_residual
    );
    assert!(report.all_factors_positive);
    let planar_residual = report.max_residual;

    let disk = Surface::disk(Vec2::ZERO, 2.0).unwrap();
    let x = parse_field("(-y, x)").unwrap();
    let y = parse_field("(x, y)").unwrap();
    let samples = [
        Vec2::new(0.5, 0.0),
        Vec2::new(0.0, -0.7),
        Vec2::new(0.3, 0.4),
    ];
    let report = check_permutes_integral_curves(&x, &y, &disk, &samples, 0.3, &fc).unwrap();
    assert!(
        report.max_residual < 1e-5,
        "residual {}",
        report.max_residual
    );
    assert!(report.all_factors_positive);

    // the zero set of the first field ({0} for the rotation) is positively
    // invariant under the second flow
    let invariance = check_positive_invariance(
        &|p: Vec2| p.norm(),
        &y,
        &disk,
        &[Vec2::ZERO],
        1.0,
        1e-9,
        &fc,
    );
    assert_eq!(invariance.violations.len(), 0);
    println!(
        "criterion 10: PASS - residuals {planar_residual:.1e} and {:.1e} with positive factors; \
         zero-set invariance violations: 0",
        report.max_residual
    );
}

/// First-return map of the rotation field is the identity.
#[test]
fn criterion_11_return_map_identity() {
    let disk = Surface::disk(Vec2::ZERO, 2.0).unwrap();
    let rotation = parse_field("(-y, x)").unwrap();
    let rm = poincare_return_map(
        &rotation,
        &disk,
        Vec2::new(0.3, 0.0),
        Vec2::new(1.7, 0.0),
        20,
        10.0,
        &flow_cfg(),
    )
    .unwrap();
    assert_eq!(rm.returned(), 20, "all samples must return");
    let worst = rm.max_displacement();
    assert!(worst < 1e-5, "max |return(s) - s| = {worst}");
    println!("criterion 11: PASS - 20 samples, max |return(s) - s| = {worst:.2e}");
}

/// Doubling the contour sampling density never changes a returned index
/// anywhere in this suite's canonical computations.
#[test]
fn integer_stability_under_density_doubling() {
    let table: [(&str, i64); 4] = [
        ("(x, y)", 1),
        ("(x, -y)", -1),
        ("(x^2 - y^2, 2*x*y)", 2),
        ("(y, x)", -1),
    ];
    for (src, expected) in table {
        let field = parse_field(src).unwrap();
        for n in [32usize, 64, 128, 256] {
            let contour = Curve::circle(Vec2::ZERO, 0.5, n);
            let got = fieldindex_core::index::field_winding(&field, &contour, &cfg()).unwrap();
            assert_eq!(got.value, expected, "{src} at density {n}");
        }
    }
    let mut rng = SplitMix::new(0xabcdef);
    for _ in 0..8 {
        let mat = Mat2::new(
            rng.in_range(-3.0, 3.0),
            rng.in_range(-3.0, 3.0),
            rng.in_range(-3.0, 3.0),
            rng.in_range(-3.0, 3.0),
        );
        if (1.0 - mat.a) * (1.0 - mat.d) - mat.b * mat.c == 0.0 {
            continue;
        }
        let surface = Surface::disk(Vec2::ZERO, 1.0).unwrap();
        let mut values = Vec::new();
        for n in [64usize, 128] {
            let region = Region::disk(Vec2::ZERO, 0.8, n);
            values.push(
                fixed_point_index(|p| Ok(mat.apply(p)), &surface, &region, &cfg())
                    .unwrap()
                    .value,
            );
        }
        assert_eq!(values[0], values[1], "density sensitivity for {mat:?}");
    }
}
