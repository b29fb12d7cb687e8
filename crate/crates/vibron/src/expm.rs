//! Dense matrix exponential by Padé approximation with scaling and squaring
//! (Higham 2005 degree-13 scheme, as in expm of SciPy/Octave).

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::linalg::{lu_solve, LinalgError};

/// 1-norm (maximum absolute column sum).
fn one_norm(a: &Array2<C64>) -> f64 {
    let mut best = 0.0f64;
    for j in 0..a.ncols() {
        let s: f64 = a.column(j).iter().map(|z| z.norm()).sum();
        best = best.max(s);
    }
    best
}

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// exp(a) for a dense complex matrix.
pub fn expm(a: &Array2<C64>) -> Result<Array2<C64>, LinalgError> {
    let n = a.nrows();
    assert_eq!(n, a.ncols());
    let theta13 = 5.371920351148152;
    let norm = one_norm(a);
    let squarings = if norm > theta13 {
        (norm / theta13).log2().ceil().max(0.0) as u32
    } else {
        0
    };
    let scale = C64::new(1.0 / f64::powi(2.0, squarings as i32), 0.0);
    let a1 = a.mapv(|z| z * scale);

    let a2 = a1.dot(&a1);
    let a4 = a2.dot(&a2);
    let a6 = a2.dot(&a4);
    let b = &PADE13;
    let eye = Array2::<C64>::eye(n);

    // U = A·(A6·(b13 A6 + b11 A4 + b9 A2) + b7 A6 + b5 A4 + b3 A2 + b1 I)
    let w1 = a6.mapv(|z| z * b[13]) + a4.mapv(|z| z * b[11]) + a2.mapv(|z| z * b[9]);
    let w2 = a6.mapv(|z| z * b[7])
        + a4.mapv(|z| z * b[5])
        + a2.mapv(|z| z * b[3])
        + eye.mapv(|z| z * b[1]);
    let u = a1.dot(&(a6.dot(&w1) + w2));
    // V = A6·(b12 A6 + b10 A4 + b8 A2) + b6 A6 + b4 A4 + b2 A2 + b0 I
    let z1 = a6.mapv(|z| z * b[12]) + a4.mapv(|z| z * b[10]) + a2.mapv(|z| z * b[8]);
    let v = a6.dot(&z1)
        + a6.mapv(|z| z * b[6])
        + a4.mapv(|z| z * b[4])
        + a2.mapv(|z| z * b[2])
        + eye.mapv(|z| z * b[0]);

    // (V − U)·X = (V + U)
    let lhs = &v - &u;
    let rhs = &v + &u;
    let mut x = lu_solve(&lhs, &rhs)?;
    for _ in 0..squarings {
        x = x.dot(&x);
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::fro_norm;
    use ndarray::array;

    #[test]
    fn exp_of_diagonal() {
        let a = array![
            [C64::new(0.3, 0.0), C64::new(0.0, 0.0)],
            [C64::new(0.0, 0.0), C64::new(-1.2, 0.7)]
        ];
        let e = expm(&a).unwrap();
        assert!((e[(0, 0)] - C64::new(0.3f64.exp(), 0.0)).norm() < 1e-13);
        assert!((e[(1, 1)] - C64::new(-1.2, 0.7).exp()).norm() < 1e-13);
        assert!(e[(0, 1)].norm() < 1e-15);
    }

    #[test]
    fn exp_of_pauli_x_rotation() {
        // exp(−iθσ_x) = cosθ·I − i sinθ·σ_x
        let theta = 0.77;
        let a = array![
            [C64::new(0.0, 0.0), C64::new(0.0, -theta)],
            [C64::new(0.0, -theta), C64::new(0.0, 0.0)]
        ];
        let e = expm(&a).unwrap();
        assert!((e[(0, 0)] - C64::new(theta.cos(), 0.0)).norm() < 1e-13);
        assert!((e[(0, 1)] - C64::new(0.0, -theta.sin())).norm() < 1e-13);
    }

    #[test]
    fn exp_large_norm_uses_squaring() {
        // exp of a 1×1 with large entry
        let a = array![[C64::new(0.0, 40.0)]];
        let e = expm(&a).unwrap();
        assert!((e[(0, 0)] - C64::new(40.0f64.cos(), 40.0f64.sin())).norm() < 1e-11);
    }

    #[test]
    fn exp_matches_taylor_on_random() {
        let mut s = 123u64;
        let mut next = move || {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let a = Array2::from_shape_fn((5, 5), |_| C64::new(next() * 0.4, next() * 0.4));
        let e = expm(&a).unwrap();
        // Taylor to order 30 converges easily at this norm
        let mut taylor = Array2::<C64>::eye(5);
        let mut term = Array2::<C64>::eye(5);
        for k in 1..=30 {
            term = term.dot(&a).mapv(|z| z / k as f64);
            taylor = taylor + &term;
        }
        assert!(fro_norm(&(&e - &taylor)) < 1e-12);
    }
}
