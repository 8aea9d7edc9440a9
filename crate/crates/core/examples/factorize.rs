//! Singular values, Takagi values and Hua block values of random states.

use schmidt_sphere::factor::{complex_svd, hua, takagi};
use schmidt_sphere::sampling;
use schmidt_sphere::Shape;

fn main() -> schmidt_sphere::Result<()> {
    let mut rng = sampling::rng(1);

    let st = sampling::random_state(&Shape::distinguishable(3, 4)?, &mut rng);
    let svd = complex_svd(st.matrix())?;
    println!("3x4 distinguishable: sigma = {:.6?}, residual {:.1e}", svd.sigma.as_slice(), svd.residual(st.matrix()));

    let st = sampling::random_state(&Shape::bosonic(3)?, &mut rng);
    let t = takagi(st.matrix())?;
    println!("d=3 bosonic: sigma = {:.6?}, residual {:.1e}", t.sigma.as_slice(), t.residual(st.matrix()));

    for d in [4, 5] {
        let st = sampling::random_state(&Shape::fermionic(d)?, &mut rng);
        let h = hua(st.matrix())?;
        println!("d={d} fermionic: xi = {:.6?}, residual {:.1e}", h.xi.as_slice(), h.residual(st.matrix()));
        // the Schmidt point uses √2·ξ so that it has unit norm
        println!("  sing_sorted = {:.6?}", st.sing_sorted().values().as_slice());
    }
    Ok(())
}
