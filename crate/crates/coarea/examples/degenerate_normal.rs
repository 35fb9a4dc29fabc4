//! Multivariate normals with singular covariance: factorization through the
//! eigendecomposition, the carrier-subspace density, and reproducible
//! sampling.
//!
//! ```text
//! cargo run --example degenerate_normal
//! ```

use coarea::catalog::DegenerateNormal;
use coarea::linalg::Mat;
use coarea::rng::SplitMix64;

fn main() -> coarea::Result<()> {
    // rank-1 covariance: all mass lives on the diagonal line x1 = x2
    let sigma = Mat::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]);
    let n = DegenerateNormal::new(vec![0.0, 0.0], sigma)?;
    println!("rank {}   positive eigenvalues {:?}", n.rank(), n.lambdas());

    let at_origin = n.pdf_on_carrier(&[0.0, 0.0])?;
    println!("H^1 density at the origin: {at_origin:.9}");
    println!("on-carrier  (1, 1):  {:?}", n.pdf_on_carrier(&[1.0, 1.0]));
    println!("off-carrier (1, -1): {:?}", n.pdf_on_carrier(&[1.0, -1.0]));

    // sampling maps standard normal coordinates through the carrier map;
    // the empirical covariance reproduces sigma
    let mut rng = SplitMix64::new(7);
    let mut ss = [[0.0f64; 2]; 2];
    const N: usize = 200_000;
    for _ in 0..N {
        let x = n.sample(&mut rng);
        for i in 0..2 {
            for j in 0..2 {
                ss[i][j] += x[i] * x[j];
            }
        }
    }
    println!(
        "empirical covariance from {N} draws: [{:.4} {:.4}; {:.4} {:.4}]",
        ss[0][0] / N as f64,
        ss[0][1] / N as f64,
        ss[1][0] / N as f64,
        ss[1][1] / N as f64
    );

    // full-rank covariances reduce to the ordinary normal density
    let full = DegenerateNormal::new(vec![0.0, 0.0], Mat::identity(2))?;
    println!(
        "identity covariance at 0: {:.9} (1/(2 pi) = {:.9})",
        full.pdf_on_carrier(&[0.0, 0.0])?,
        1.0 / (2.0 * std::f64::consts::PI)
    );
    Ok(())
}
