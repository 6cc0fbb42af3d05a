use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::ComplexMatrix;

/// Haar-random m×m unitary.
///
/// QR-orthonormalizes a matrix of i.i.d. standard complex Gaussians and
/// multiplies each column of Q by the phase of the matching diagonal entry
/// of R, which removes the bias of the raw QR factor.
pub fn haar_unitary<R: Rng + ?Sized>(m: usize, rng: &mut R) -> ComplexMatrix {
    assert!(m >= 1, "haar_unitary needs at least one mode");
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let entries: Vec<Complex64> = (0..m * m)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re * scale, im * scale)
        })
        .collect();
    let z = nalgebra::DMatrix::from_row_slice(m, m, &entries);
    let qr = z.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..m {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        for i in 0..m {
            q[(i, j)] *= phase;
        }
    }
    ComplexMatrix::from_nalgebra(&q)
}
