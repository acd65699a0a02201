//! Budgets per recursion level and the certified query floors they add up to.

/// Queries an orthant absorbs before the coordinate adversary commits: `max(1, ⌈d/4⌉)`.
pub fn commit_threshold(d: usize) -> usize {
    d.div_ceil(4).max(1)
}

/// Queries per level of the coordinate adversary: `max(1, ⌈d²/16⌉)`.
pub fn bit_level_budget(d: usize) -> usize {
    (d * d).div_ceil(16).max(1)
}

/// Queries per stage of the inner-product adversary: `max(1, ⌈d²/8⌉)`.
pub fn dir_stage_budget(d: usize) -> usize {
    (d * d).div_ceil(8).max(1)
}

/// Batch size while `k` normals are committed: `⌊(d − k)/2⌋`.
pub fn dir_capacity(d: usize, k: usize) -> usize {
    d.saturating_sub(k) / 2
}

/// `Σ_{k<d} ⌊(d − k)/2⌋ ≥ ⌈d²/8⌉`: batches alone can absorb a full stage.
pub fn capacity_covers_stage(d: usize) -> bool {
    (0..d).map(|k| dir_capacity(d, k)).sum::<usize>() >= dir_stage_budget(d)
}

/// Largest `k` with `base^k < R/(2ρ)`, by exact repeated multiplication.
///
/// This is `⌊log_base(R/2ρ)⌋` except when `R/2ρ` is an exact power of `base`,
/// where the strict inequality keeps the last level able to host two disjoint
/// `ρ`-balls.
pub fn recursion_depth(base: f64, r: f64, rho: f64) -> u32 {
    debug_assert!(base > 1.0);
    let ratio = r / (2.0 * rho);
    let mut k = 0;
    let mut pow = base;
    while pow < ratio {
        k += 1;
        pow *= base;
    }
    k
}

pub fn bit_depth(r: f64, rho: f64) -> u32 {
    recursion_depth(3.0, r, rho)
}

pub fn dir_depth(d: usize, r: f64, rho: f64) -> u32 {
    recursion_depth(3.0 * d as f64, r, rho)
}

fn scale(n: usize, per: usize, k: u32) -> u64 {
    let fibers = 1u64.checked_shl(n as u32).unwrap_or(u64::MAX);
    fibers.saturating_mul(per as u64).saturating_mul(u64::from(k))
}

/// `2^n · ⌈d²/16⌉ · K` with `K` levels of shrink factor 3.
pub fn bit_floor(n: usize, d: usize, r: f64, rho: f64) -> u64 {
    scale(n, bit_level_budget(d), bit_depth(r, rho))
}

/// `2^n · ⌈d²/8⌉ · K` with `K` stages of shrink factor `3d`.
pub fn dir_floor(n: usize, d: usize, r: f64, rho: f64) -> u64 {
    scale(n, dir_stage_budget(d), dir_depth(d, r, rho))
}

/// `2^{3d/4} − 2^{d/2}`: surviving orthants guaranteed at one level within budget.
pub fn survival_bound(d: usize) -> f64 {
    let d = d as f64;
    libm::exp2(0.75 * d) - libm::exp2(0.5 * d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thresholds() {
        assert_eq!(commit_threshold(1), 1);
        assert_eq!(commit_threshold(8), 2);
        assert_eq!(commit_threshold(9), 3);
        assert_eq!(bit_level_budget(8), 4);
        assert_eq!(bit_level_budget(2), 1);
        assert_eq!(bit_level_budget(12), 9);
        assert_eq!(dir_stage_budget(4), 2);
        assert_eq!(dir_stage_budget(2), 1);
        assert_eq!(dir_capacity(4, 0), 2);
        assert_eq!(dir_capacity(4, 3), 0);
    }

    #[test]
    fn capacity_covers_every_desk_dimension() {
        for d in 2..=64 {
            assert!(capacity_covers_stage(d), "d = {d}");
        }
    }

    #[test]
    fn floor_examples() {
        // 3^7 = 2187 < 5000 < 6561
        assert_eq!(bit_depth(1.0, 1e-4), 7);
        assert_eq!(bit_floor(0, 8, 1.0, 1e-4), 28);
        assert_eq!(bit_floor(1, 8, 1.0, 1e-4), 56);
        // 12^3 = 1728 < 5000 < 20736
        assert_eq!(dir_depth(4, 1.0, 1e-4), 3);
        assert_eq!(dir_floor(0, 4, 1.0, 1e-4), 6);
    }

    #[test]
    fn exact_powers_stay_strict() {
        // R/2ρ = 9 exactly: only one full level still fits two disjoint balls.
        assert_eq!(bit_depth(9.0, 0.5), 1);
        assert_eq!(bit_depth(9.0, 0.49), 2);
    }
}
