//! Single-qubit operators in the basis `{|0>, |1>}` where `σ^z|0> = |0>`.
//!
//! `σ^± = (σ^x ± iσ^y)/2`, so `σ^+ = |0><1|` raises the `σ^z` eigenvalue.

use super::{ComplexMatrix, C64};

fn m(rows: [[C64; 2]; 2]) -> ComplexMatrix {
    ComplexMatrix::from_rows(&[rows[0].to_vec(), rows[1].to_vec()]).expect("2x2")
}

const O: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

pub fn sigma_x() -> ComplexMatrix {
    m([[O, ONE], [ONE, O]])
}

pub fn sigma_y() -> ComplexMatrix {
    m([[O, -I], [I, O]])
}

pub fn sigma_z() -> ComplexMatrix {
    m([[ONE, O], [O, -ONE]])
}

pub fn sigma_plus() -> ComplexMatrix {
    m([[O, ONE], [O, O]])
}

pub fn sigma_minus() -> ComplexMatrix {
    m([[O, O], [ONE, O]])
}
