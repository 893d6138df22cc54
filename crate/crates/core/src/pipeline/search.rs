//! Bounded binary search over the binarization gain.

/// Search state over the gain `α` that scales the Otsu threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchState {
    pub alpha: f64,
    pub lower: f64,
    pub upper: f64,
    pub best_alpha: f64,
    pub best_cost: f64,
    pub t: usize,
    /// Set once some probed gain scored strictly below the threshold.
    pub feasible_found: bool,
}

impl SearchState {
    /// Starts at `alpha` (clamped into `[lower, upper]`) with no best cost.
    pub fn new(alpha: f64, lower: f64, upper: f64) -> Self {
        let upper = upper.max(lower);
        let alpha = alpha.clamp(lower, upper);
        Self {
            alpha,
            lower,
            upper,
            best_alpha: alpha,
            best_cost: f64::INFINITY,
            t: 0,
            feasible_found: false,
        }
    }
}

/// Consumes the mean cost `s_t` measured at `state.alpha`.
///
/// Until a gain scores below `s1`, the best gain is the cheapest one seen;
/// afterwards it is the largest gain scoring below `s1`. A cost below `s1`
/// raises the gain towards `upper` (smaller mask), otherwise the gain drops
/// towards `lower` (larger mask). Both moves use the bounds before update.
pub fn binary_search_step(state: SearchState, s_t: f64, s1: f64) -> SearchState {
    let mut next = state;
    let feasible = s_t < s1;
    if !state.feasible_found {
        if feasible || s_t < state.best_cost {
            next.best_alpha = state.alpha;
            next.best_cost = s_t;
        }
        next.feasible_found = feasible;
    } else if feasible && state.alpha > state.best_alpha {
        next.best_alpha = state.alpha;
        next.best_cost = s_t;
    }
    if feasible {
        next.lower = state.alpha;
        next.alpha = (state.alpha + state.upper) / 2.0;
    } else {
        next.upper = state.alpha;
        next.alpha = (state.alpha + state.lower) / 2.0;
    }
    next.t = state.t + 1;
    next
}

#[cfg(test)]
mod tests {
    use super::*;

    fn state(alpha: f64, lower: f64, upper: f64) -> SearchState {
        SearchState::new(alpha, lower, upper)
    }

    #[test]
    fn failure_lowers_gain() {
        let s = binary_search_step(state(1.0, 0.0, 2.0), 2.0, 1.0);
        assert_eq!((s.alpha, s.lower, s.upper), (0.5, 0.0, 1.0));
        assert!(!s.feasible_found);
        assert_eq!((s.best_alpha, s.best_cost), (1.0, 2.0));
    }

    #[test]
    fn success_raises_gain() {
        let s = binary_search_step(state(1.0, 0.0, 2.0), 0.0, 1.0);
        assert_eq!((s.alpha, s.lower, s.upper), (1.5, 1.0, 2.0));
        assert!(s.feasible_found);
        assert_eq!(s.best_alpha, 1.0);
    }

    #[test]
    fn collapsed_bounds_are_fixed() {
        for cost in [0.0, 1.0, 5.0] {
            assert_eq!(binary_search_step(state(1.0, 1.0, 1.0), cost, 1.0).alpha, 1.0);
        }
    }

    #[test]
    fn threshold_cost_counts_as_failure() {
        let s = binary_search_step(state(1.0, 0.0, 2.0), 1.0, 1.0);
        assert_eq!(s.alpha, 0.5);
        assert!(!s.feasible_found);
    }

    #[test]
    fn feasible_gain_overrides_cheaper_history() {
        let mut s = state(1.0, 0.0, 4.0);
        s = binary_search_step(s, 3.0, 1.0);
        s = binary_search_step(s, 0.5, 1.0);
        assert_eq!(s.best_alpha, 0.5);
        // Cheaper but smaller gains no longer win.
        s = binary_search_step(s, 0.0, 1.0);
        assert_eq!(s.best_alpha, 0.75);
        s = binary_search_step(s, 2.0, 1.0);
        assert_eq!(s.best_alpha, 0.75);
    }
}
