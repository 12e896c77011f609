//! Shared fixtures for the benchmarks.

use ibcurve_core::{joint_from_function, JointXY, ProbVector};

/// `inputs` equiprobable inputs, input `i` labelled `i % classes`.
pub fn class_joint(inputs: usize, classes: usize) -> JointXY {
    let f: Vec<usize> = (0..inputs).map(|i| i % classes).collect();
    joint_from_function(&f, &ProbVector::uniform(inputs).expect("inputs > 0"), classes).expect("valid sizes")
}
