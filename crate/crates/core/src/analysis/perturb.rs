use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};

use crate::device::DevicePoly;
use crate::error::{Error, Result};

/// Cycle-to-cycle variability: every coefficient is multiplied by an
/// independent lognormal factor with median 1 and log-standard-deviation
/// `sigma`. The window is left untouched.
pub fn perturb(poly: &DevicePoly, sigma: f64, seed: u64) -> Result<DevicePoly> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidInput(format!("sigma must be non-negative, got {sigma}")));
    }
    if sigma == 0.0 {
        return Ok(*poly);
    }
    let dist = LogNormal::new(0.0, sigma).map_err(|e| Error::InvalidInput(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(DevicePoly { coeffs: poly.coeffs.map(|c| c * dist.sample(&mut rng)), ..*poly })
}

/// Mixes a base seed with an index into an independent per-item seed.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    // splitmix64 finaliser
    let mut z = base.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
