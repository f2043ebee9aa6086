use nalgebra::DMatrix;

use super::QuadraticObjective;

/// Two scalar components `1/2 (x - 1)^2` and `1/2 (x + 1)^2`.
pub fn two_point_disagreement() -> QuadraticObjective {
    QuadraticObjective::new(
        "two_point_disagreement",
        vec![DMatrix::from_element(1, 1, 1.0)],
        vec![0, 0],
        vec![vec![1.0], vec![-1.0]],
    )
    .expect("valid construction")
}
