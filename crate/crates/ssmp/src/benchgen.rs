//! Seeded benchmark instance generator.
//!
//! Two families: integers uniform on `[-gamma, gamma]` and fixed-point
//! reals uniform on `[low, high]` at a given digit count. Zero draws are
//! rejected and resampled, keeping the law uniform on the punctured range
//! while honoring the model's non-zero-amount rule.
//!
//! Instance `i` is generated from its own stream seeded by `(seed, config,
//! i)`, so regenerating any slice of a suite, or generating in parallel,
//! yields identical instances.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::amount::format_amount;
use crate::instance::Instance;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Family {
    Integer {
        gamma: i64,
    },
    /// Bounds are in units at `digits` fractional digits.
    Real {
        low: i64,
        high: i64,
        digits: u32,
    },
}

impl Family {
    pub fn digits(&self) -> u32 {
        match self {
            Family::Integer { .. } => 0,
            Family::Real { digits, .. } => *digits,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Family::Integer { .. } => "int",
            Family::Real { .. } => "real",
        }
    }
}

#[derive(Clone, Debug)]
pub struct GenConfig {
    pub m: usize,
    pub n: usize,
    pub family: Family,
    /// Tolerance in units at the family's digit count.
    pub epsilon: i64,
    pub seed: u64,
    pub count: usize,
}

impl GenConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.m < 1 || self.n < 1 {
            return Err("both sides need at least one element".into());
        }
        if self.count < 1 {
            return Err("count must be at least 1".into());
        }
        if self.epsilon < 0 {
            return Err("epsilon cannot be negative".into());
        }
        match self.family {
            Family::Integer { gamma } if gamma < 1 => Err("gamma must be at least 1".into()),
            Family::Real { low, high, .. } if low >= high => {
                Err("the range low..high is empty".into())
            }
            _ => Ok(()),
        }
    }

    /// Distinguishing parameter for file names: the integer family varies
    /// its range, the real family its tolerance.
    pub fn param_tag(&self) -> String {
        match self.family {
            Family::Integer { gamma } => format!("g{gamma}"),
            Family::Real { .. } => {
                format!("e{}", format_amount(self.epsilon, self.family.digits()))
            }
        }
    }

    pub fn file_stem(&self, index: usize) -> String {
        format!(
            "{}_M{}_N{}_{}_s{}_{}",
            self.family.name(),
            self.m,
            self.n,
            self.param_tag(),
            self.seed,
            index
        )
    }
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stream for instance `index`, keyed by every config field except `count`
/// so extending a suite never reshuffles existing instances.
fn rng_for(cfg: &GenConfig, index: usize) -> ChaCha8Rng {
    let mut state = cfg.seed;
    let mut key = splitmix64(&mut state);
    let fold = |x: u64, state: &mut u64| {
        *state ^= x;
        splitmix64(state)
    };
    key ^= fold(cfg.m as u64, &mut state);
    key ^= fold(cfg.n as u64, &mut state);
    match cfg.family {
        Family::Integer { gamma } => {
            key ^= fold(1, &mut state);
            key ^= fold(gamma as u64, &mut state);
        }
        Family::Real { low, high, digits } => {
            key ^= fold(2, &mut state);
            key ^= fold(low as u64, &mut state);
            key ^= fold(high as u64, &mut state);
            key ^= fold(digits as u64, &mut state);
        }
    }
    key ^= fold(cfg.epsilon as u64, &mut state);
    key ^= fold(index as u64, &mut state);
    ChaCha8Rng::seed_from_u64(key)
}

fn draw(family: &Family, rng: &mut ChaCha8Rng) -> i64 {
    let (low, high) = match *family {
        Family::Integer { gamma } => (-gamma, gamma),
        Family::Real { low, high, .. } => (low, high),
    };
    loop {
        let x = rng.gen_range(low..=high);
        if x != 0 {
            return x;
        }
    }
}

pub fn generate_one(cfg: &GenConfig, index: usize) -> Instance {
    cfg.validate().expect("config must be validated before generating");
    let mut rng = rng_for(cfg, index);
    let a: Vec<i64> = (0..cfg.m).map(|_| draw(&cfg.family, &mut rng)).collect();
    let b: Vec<i64> = (0..cfg.n).map(|_| draw(&cfg.family, &mut rng)).collect();
    Instance::new(a, b, cfg.epsilon, cfg.family.digits())
        .expect("generated amounts are non-zero and in range")
}

pub fn generate(cfg: &GenConfig) -> Vec<Instance> {
    (0..cfg.count).map(|i| generate_one(cfg, i)).collect()
}
