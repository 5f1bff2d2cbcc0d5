use vem_spectra::adapt::Strategy;
use vem_spectra_web::{compute_modes, domain_mesh, Session, MAX_SIDE};

#[test]
fn modes_match_direct_solve_and_are_normalized() {
    let view = compute_modes("trapezoid", 4, 3).unwrap();
    assert_eq!(view.frequencies.len(), 3);
    assert_eq!(view.shapes.len(), 3);
    assert!(view.frequencies.windows(2).all(|w| w[0] <= w[1]));
    for shape in &view.shapes {
        assert_eq!(shape.len(), view.mesh.vertices.len());
        let peak = shape.iter().map(|d| d[0].hypot(d[1])).fold(0.0, f64::max);
        assert!((peak - 1.0).abs() < 1e-12);
        // Clamped vertices do not move.
        for (d, &clamped) in shape.iter().zip(&view.mesh.clamped) {
            if clamped {
                assert_eq!(*d, [0.0, 0.0]);
            }
        }
    }
    let vessel = compute_modes("vessel", 0, 1).unwrap();
    assert_eq!(vessel.dofs, 136);
}

#[test]
fn views_serialize_to_json() {
    let view = compute_modes("hexagon", 4, 2).unwrap();
    let json: serde_json::Value = serde_json::to_value(&view).unwrap();
    assert_eq!(json["frequencies"].as_array().unwrap().len(), 2);
    assert_eq!(json["mesh"]["elements"].as_array().unwrap().len(), view.mesh.elements.len());
}

#[test]
fn rejects_bad_requests() {
    assert!(compute_modes("circle", 4, 2).is_err());
    assert!(compute_modes("trapezoid", MAX_SIDE + 1, 2).is_err());
    assert!(compute_modes("trapezoid", 4, 0).is_err());
    assert!(domain_mesh("triangle", 0).is_err());
}

#[test]
fn adaptive_session_refines_marked_elements() {
    let mut session = Session::new(Strategy::Vem, Some(0.1538)).unwrap();
    let first = session.advance().unwrap();
    assert_eq!((first.step, first.dofs), (0, 136));
    assert_eq!(first.eta.len(), first.mesh.elements.len());
    assert!(!first.marked.is_empty());
    let second = session.advance().unwrap();
    assert_eq!(second.step, 1);
    assert!(second.dofs > first.dofs);
    assert!(second.error.unwrap() < first.error.unwrap());
    // Polygon splitting leaves non-triangular elements behind.
    assert!(second.mesh.elements.iter().any(|e| e.len() > 3));
}

#[test]
fn uniform_session_has_no_reference_by_default() {
    let mut session = Session::new(Strategy::Uniform, None).unwrap();
    let first = session.advance().unwrap();
    assert!(first.error.is_none() && first.effectivity.is_none());
    let second = session.advance().unwrap();
    assert!(second.mesh.elements.len() == 4 * first.mesh.elements.len());
}
