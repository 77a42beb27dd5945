//! Fixed inputs shared by the benchmarks.

use privthresh_core::Instance;

pub const LN3: f64 = 1.098_612_288_668_109_8;

pub fn three_arm() -> Instance {
    Instance::new(vec![0.2, 0.45, 0.8], 0.5, 0.0).expect("valid fixture")
}

pub fn two_arm() -> Instance {
    Instance::new(vec![0.2, 0.8], 0.5, 0.0).expect("valid fixture")
}

pub fn many_arms(k: usize) -> Instance {
    let means = (0..k).map(|i| 0.05 + 0.9 * i as f64 / (k - 1).max(1) as f64).collect();
    Instance::new(means, 0.52, 0.0).expect("valid fixture")
}
