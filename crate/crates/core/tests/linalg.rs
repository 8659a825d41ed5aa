use usv_blf::linalg::*;

#[test]
fn transpose_product_matches_explicit_transpose() {
    let m = Mat3([[1.0, 2.0, 3.0], [4.0, 5.0, 6.0], [7.0, 8.0, 10.0]]);
    let v = Vec3([0.5, -1.0, 2.0]);
    assert_eq!(m.tr_mul_vec(v), m.transpose().mul_vec(v));
    assert!((m.determinant() - (-3.0)).abs() < 1e-12);
}
