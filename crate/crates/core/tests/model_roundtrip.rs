use aggper::model::text::{emit_model, parse_model, ModelFormat};
use aggper::model::{ConicModel, LinearRow, Role, RotatedCone, Sense, VarTag, Variable};
use proptest::prelude::*;

fn real() -> impl Strategy<Value = f64> {
    prop_oneof![
        -1e6f64..1e6,
        Just(0.0),
        Just(-0.0),
        Just(1.0 / 3.0),
        (-300i32..300).prop_map(|e| 1.2345678901234567 * 10f64.powi(e)),
    ]
}

fn tag() -> impl Strategy<Value = Option<VarTag>> {
    let role = prop_oneof![Just(Role::X), Just(Role::W), Just(Role::Z), Just(Role::Y), Just(Role::Epigraph), Just(Role::Slack)];
    prop::option::of((0u32..5, prop::option::of(0u32..9), 0u32..20, role, 0u32..4).prop_map(
        |(class, member, block, role, coord)| VarTag { class, member, block, role, coord },
    ))
}

fn variable() -> impl Strategy<Value = Variable> {
    prop_oneof![
        (-50i32..50, 0i32..20, tag()).prop_map(|(lo, w, tag)| Variable {
            lower: lo as f64,
            upper: (lo + w) as f64,
            integer: true,
            tag,
        }),
        (prop::option::of(real()), prop::option::of(0.0f64..1e6), tag()).prop_map(|(lo, w, tag)| {
            let lower = lo.unwrap_or(f64::NEG_INFINITY);
            let upper = match (lo, w) {
                (Some(l), Some(w)) => l + w,
                (None, Some(w)) => w,
                _ => f64::INFINITY,
            };
            Variable { lower, upper, integer: false, tag }
        }),
    ]
}

pub fn conic_model() -> impl Strategy<Value = ConicModel> {
    (1usize..12).prop_flat_map(|n| {
        let sense = prop_oneof![Just(Sense::Le), Just(Sense::Ge), Just(Sense::Eq)];
        (
            "[a-z][a-z0-9_]{0,8}",
            prop::collection::vec(variable(), n),
            prop::collection::vec((prop::collection::vec((0..n, real()), 1..5), sense, real()), 0..6),
            prop::collection::vec((0..n, 0..n, prop::collection::vec(0..n, 0..4)), 0..3),
            prop::collection::vec((0..n, real()), 0..5),
            real(),
        )
            .prop_map(|(name, vars, rows, cones, objective, obj_offset)| ConicModel {
                name,
                vars,
                rows: rows.into_iter().map(|(coeffs, sense, rhs)| LinearRow { coeffs, sense, rhs }).collect(),
                cones: cones.into_iter().map(|(u, v, z)| RotatedCone { u, v, z }).collect(),
                objective,
                obj_offset,
            })
    })
}

fn same_bits(a: &ConicModel, b: &ConicModel) -> bool {
    // PartialEq treats 0.0 and -0.0 as equal; compare bit patterns of bounds too
    a == b
        && a.vars.iter().zip(&b.vars).all(|(x, y)| x.lower.to_bits() == y.lower.to_bits() && x.upper.to_bits() == y.upper.to_bits())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn conic_text_roundtrip(m in conic_model()) {
        let bytes = emit_model(&m, ModelFormat::ConicText).unwrap();
        let back = parse_model(&bytes, ModelFormat::ConicText).unwrap();
        prop_assert!(same_bits(&m, &back), "{}", String::from_utf8_lossy(&bytes));
        prop_assert_eq!(emit_model(&back, ModelFormat::ConicText).unwrap(), bytes);
    }

    #[test]
    fn json_roundtrip(m in conic_model()) {
        let bytes = emit_model(&m, ModelFormat::Json).unwrap();
        let back = parse_model(&bytes, ModelFormat::Json).unwrap();
        prop_assert!(same_bits(&m, &back));
    }

    #[test]
    fn truncated_text_is_rejected(m in conic_model(), cut in 0.0f64..1.0) {
        let text = String::from_utf8(emit_model(&m, ModelFormat::ConicText).unwrap()).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        let keep = ((lines.len() as f64) * cut) as usize;
        // dropping the trailing OBJ line (or more) must not parse silently
        let partial = lines[..keep.min(lines.len() - 1)].join("\n");
        prop_assert!(parse_model(partial.as_bytes(), ModelFormat::ConicText).is_err());
    }
}

#[test]
fn invalid_models_are_not_emitted() {
    let mut m = ConicModel::new("bad");
    m.add_var(0.0, f64::INFINITY, true, None);
    assert!(emit_model(&m, ModelFormat::ConicText).is_err());
    let mut m = ConicModel::new("bad");
    let x = m.add_continuous(0.0, 1.0, None);
    m.add_row(vec![(x + 1, 1.0)], Sense::Le, 0.0);
    assert!(emit_model(&m, ModelFormat::Json).is_err());
}
