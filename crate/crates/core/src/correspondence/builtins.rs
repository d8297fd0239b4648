use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::Correspondence;
use crate::error::{Error, Result};
use crate::point::C64;
use crate::poly::BihomogeneousPolynomial;

pub const BUILTIN_NAMES: [&str; 5] = ["square", "sqrt", "chebyshev", "moebius-pair", "nwm22-seeded"];

pub const NWM22_SEED: u64 = 20240917;

/// Named example correspondences.
///
/// * `square`: `y - x^2`, degrees `(d1, d2) = (1, 2)`
/// * `sqrt`: `y^2 - x`, degrees `(2, 1)`
/// * `chebyshev`: `y - (x^2 - 2)`, degrees `(1, 2)`
/// * `moebius-pair`: `(y - x)(y + x)`, degrees `(2, 2)`
/// * `nwm22-seeded`: complex Gaussian `(2, 2)` coefficients from a fixed seed
pub fn builtin(name: &str) -> Result<Correspondence> {
    let r = |v: f64| C64::new(v, 0.0);
    let graph = match name {
        "square" => BihomogeneousPolynomial::from_terms(2, 1, &[(0, 1, r(1.0)), (2, 0, r(-1.0))])?,
        "sqrt" => BihomogeneousPolynomial::from_terms(1, 2, &[(0, 2, r(1.0)), (1, 0, r(-1.0))])?,
        "chebyshev" => {
            BihomogeneousPolynomial::from_terms(2, 1, &[(0, 1, r(1.0)), (2, 0, r(-1.0)), (0, 0, r(2.0))])?
        }
        "moebius-pair" => BihomogeneousPolynomial::from_terms(2, 2, &[(0, 2, r(1.0)), (2, 0, r(-1.0))])?,
        "nwm22-seeded" => {
            let mut rng = ChaCha8Rng::seed_from_u64(NWM22_SEED);
            let c: Vec<C64> = (0..9)
                .map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                .collect();
            BihomogeneousPolynomial::new(2, 2, c)?
        }
        other => return Err(Error::invalid(format!("unknown builtin correspondence '{other}'"))),
    };
    Ok(Correspondence::new(graph)?.with_name(name))
}
